//! Browser bindings for the interactive page in `www/`.
//!
//! Each export is a thin wrapper over a plain Rust function so the logic
//! also builds and tests on the host.

use num_complex::Complex64;
use shelving_core::analytic::amplitudes;
use shelving_core::ensemble::{
    collect_samples, DarkSurvivalOracle, EnsembleConfig, ORACLE_POINTS_PER_DECADE,
};
use shelving_core::trajectory::{classify_periods, DEFAULT_GAP_FACTOR};
use shelving_core::{run_trajectory, ChannelKind, PeriodKind, SystemParams};
use wasm_bindgen::prelude::*;

/// Drive and resonance settings chosen on the page. Everything else keeps
/// the library defaults.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy)]
pub struct DemoParams {
    inner: SystemParams,
}

#[wasm_bindgen]
impl DemoParams {
    #[wasm_bindgen(constructor)]
    pub fn new(
        rabi_frequency: f64,
        strong_decay: f64,
        weak_decay: f64,
        a_re: f64,
        a_im: f64,
        b_re: f64,
        b_im: f64,
    ) -> Result<DemoParams, JsError> {
        build_params(
            rabi_frequency,
            strong_decay,
            weak_decay,
            a_re,
            a_im,
            b_re,
            b_im,
        )
        .map_err(|e| JsError::new(&e))
    }
}

pub fn build_params(
    rabi_frequency: f64,
    strong_decay: f64,
    weak_decay: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
) -> Result<DemoParams, String> {
    SystemParams {
        rabi_frequency,
        strong_decay,
        weak_decay,
        resonance_a: Complex64::new(a_re, a_im),
        resonance_b: Complex64::new(b_re, b_im),
        ..SystemParams::default()
    }
    .validate()
    .map(|inner| DemoParams { inner })
    .map_err(|e| e.to_string())
}

/// Populations `|a0|², |a1|², |a2|²` and the norm on an even grid, packed
/// as `[t, p0, p1, p2, norm]` per point.
#[wasm_bindgen]
pub fn amplitude_curves(
    params: &DemoParams,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    curves(params, t_max, points).map_err(|e| JsError::new(&e))
}

pub fn curves(params: &DemoParams, t_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(t_max > 0.0 && t_max.is_finite()) || points < 2 {
        return Err("need t_max > 0 and at least two points".into());
    }
    let mut out = Vec::with_capacity(points * 5);
    for k in 0..points {
        let t = t_max * k as f64 / (points - 1) as f64;
        let a = amplitudes(&params.inner, t).map_err(|e| e.to_string())?;
        out.extend([
            t,
            a.a0.norm_sqr(),
            a.a1.norm_sqr(),
            a.a2.norm_sqr(),
            a.norm(),
        ]);
    }
    Ok(out)
}

/// One trajectory: emission times by channel and the dark periods found
/// in it.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct Raster {
    fluorescent: Vec<f64>,
    reset_gamma: Vec<f64>,
    reset_gamma_prime: Vec<f64>,
    dark: Vec<f64>,
}

#[wasm_bindgen]
impl Raster {
    pub fn fluorescent(&self) -> Vec<f64> {
        self.fluorescent.clone()
    }

    pub fn reset_gamma(&self) -> Vec<f64> {
        self.reset_gamma.clone()
    }

    pub fn reset_gamma_prime(&self) -> Vec<f64> {
        self.reset_gamma_prime.clone()
    }

    /// Dark periods as `[start, end]` pairs.
    pub fn dark_periods(&self) -> Vec<f64> {
        self.dark.clone()
    }
}

#[wasm_bindgen]
pub fn emission_raster(
    params: &DemoParams,
    seed: u64,
    index: u64,
    t_end: f64,
) -> Result<Raster, JsError> {
    raster(params, seed, index, t_end).map_err(|e| JsError::new(&e))
}

pub fn raster(params: &DemoParams, seed: u64, index: u64, t_end: f64) -> Result<Raster, String> {
    let p = &params.inner;
    let record = run_trajectory(p, seed, index, t_end).map_err(|e| e.to_string())?;
    let mut r = Raster::default();
    for e in &record.events {
        match e.channel {
            ChannelKind::FluorescentGamma => r.fluorescent.push(e.t_sc),
            ChannelKind::ResetGamma => r.reset_gamma.push(e.t_sc),
            ChannelKind::ResetGammaPrime => r.reset_gamma_prime.push(e.t_sc),
        }
    }
    for period in classify_periods(&record, p.strong_decay, DEFAULT_GAP_FACTOR) {
        if period.kind == PeriodKind::Dark {
            r.dark.extend([period.t_start, period.t_end]);
        }
    }
    Ok(r)
}

/// Kaplan-Meier survival of pooled dark durations next to the oracle,
/// both conditioned on exceeding the dark threshold.
#[wasm_bindgen]
#[derive(Debug, Clone, Default)]
pub struct SurvivalCurve {
    durations: Vec<f64>,
    empirical: Vec<f64>,
    oracle: Vec<f64>,
    /// Completed dark periods behind the estimate.
    pub periods: usize,
}

#[wasm_bindgen]
impl SurvivalCurve {
    pub fn durations(&self) -> Vec<f64> {
        self.durations.clone()
    }

    pub fn empirical(&self) -> Vec<f64> {
        self.empirical.clone()
    }

    pub fn oracle(&self) -> Vec<f64> {
        self.oracle.clone()
    }
}

#[wasm_bindgen]
pub fn dark_survival(
    params: &DemoParams,
    seed: u64,
    count: u64,
    t_end: f64,
) -> Result<SurvivalCurve, JsError> {
    survival(params, seed, count, t_end).map_err(|e| JsError::new(&e))
}

pub fn survival(
    params: &DemoParams,
    seed: u64,
    count: u64,
    t_end: f64,
) -> Result<SurvivalCurve, String> {
    let p = &params.inner;
    let cfg = EnsembleConfig {
        master_seed: seed,
        count,
        t_end,
        ..EnsembleConfig::default()
    };
    let pooled = collect_samples(p, &cfg).map_err(|e| e.to_string())?;
    let threshold = cfg.gap_factor / p.strong_decay;

    // (duration, completed) sorted by duration; completions before
    // censorings on ties
    let mut obs: Vec<(f64, bool)> = pooled
        .dark_durations()
        .into_iter()
        .map(|d| (d, true))
        .collect();
    let periods = obs.len();
    obs.extend(
        pooled
            .trajectories
            .iter()
            .filter_map(|t| t.dark_censored)
            .map(|d| (d, false)),
    );
    obs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));

    let longest = obs.last().map_or(threshold, |o| o.0);
    let oracle = DarkSurvivalOracle::new(p, threshold, longest, ORACLE_POINTS_PER_DECADE / 10)
        .map_err(|e| e.to_string())?;
    let mut curve = SurvivalCurve {
        periods,
        ..SurvivalCurve::default()
    };
    let mut at_risk = obs.len() as f64;
    let mut s = 1.0;
    for (d, completed) in obs {
        if completed {
            s *= 1.0 - 1.0 / at_risk;
            curve.durations.push(d);
            curve.empirical.push(s);
            curve.oracle.push(oracle.conditional_survival(d));
        }
        at_risk -= 1.0;
    }
    Ok(curve)
}
