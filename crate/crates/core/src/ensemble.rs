//! Ensembles of independent trajectories and the quadrature oracle their
//! dark-period statistics are checked against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::reset_hazard;
use crate::model::{PhotonKind, SystemParams};
use crate::stats::{ks_statistic, LogHistogram, MeanEstimate};
use crate::trajectory::{
    classify_periods, run_trajectory_observed, EmissionRecord, PeriodKind, TrajectoryError,
    DEFAULT_EVENT_BUDGET, DEFAULT_GAP_FACTOR,
};

/// Trapezoid density of the survival oracle.
pub const ORACLE_POINTS_PER_DECADE: usize = 100_000;
pub const HISTOGRAM_BINS_PER_DECADE: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("count and workers must be at least 1")]
    EmptyEnsemble,
    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: u64,
        #[source]
        source: TrajectoryError,
    },
    #[error("cannot merge ensembles with overlapping trajectory {0}")]
    Overlap(u64),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("time grid must be non-negative, finite and increasing")]
    BadGrid,
    #[error("survival quadrature produced a non-finite value at t = {0}")]
    QuadratureFailure(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub master_seed: u64,
    pub count: u64,
    /// Index of the first trajectory; lets an ensemble be split in parts.
    pub first_index: u64,
    pub t_end: f64,
    pub workers: usize,
    pub gap_factor: f64,
    pub event_budget: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            count: 100,
            first_index: 0,
            t_end: 50_000.0,
            workers: 1,
            gap_factor: DEFAULT_GAP_FACTOR,
            event_budget: DEFAULT_EVENT_BUDGET,
        }
    }
}

/// What an ensemble keeps from one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub index: u64,
    pub events: u64,
    pub gamma: u64,
    pub gamma_prime: u64,
    pub first_event: Option<f64>,
    /// Uncensored dark-period durations in time order.
    pub dark: Vec<f64>,
    /// For each entry of `dark`, the time left until `t_end` when it began:
    /// the longest duration that could have been observed.
    pub dark_window: Vec<f64>,
    /// Duration of a dark period cut short by the end of the run.
    pub dark_censored: Option<f64>,
    /// Uncensored fluorescent-period durations in time order.
    pub bright: Vec<f64>,
    pub fluorescence_in_dark: u64,
}

impl TrajectorySummary {
    pub fn from_record(r: &EmissionRecord, strong_decay: f64, gap_factor: f64) -> Self {
        let periods = classify_periods(r, strong_decay, gap_factor);
        let durations = |kind| {
            periods
                .iter()
                .filter(|x| x.kind == kind && !x.censored)
                .map(|x| x.duration())
                .collect()
        };
        let dark_periods = periods.iter().filter(|x| x.kind == PeriodKind::Dark);
        Self {
            index: r.trajectory_index,
            events: r.events.len() as u64,
            gamma: r.count(PhotonKind::StrongGamma) as u64,
            gamma_prime: r.count(PhotonKind::WeakGammaPrime) as u64,
            first_event: r.events.first().map(|e| e.t_sc),
            dark: durations(PeriodKind::Dark),
            dark_window: dark_periods
                .clone()
                .filter(|x| !x.censored)
                .map(|x| r.t_end - x.t_start)
                .collect(),
            dark_censored: dark_periods
                .filter(|x| x.censored)
                .map(|x| x.duration())
                .next_back(),
            bright: durations(PeriodKind::Fluorescent),
            fluorescence_in_dark: r.fluorescence_in_dark() as u64,
        }
    }
}

/// Per-trajectory summaries ordered by trajectory index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PooledSamples {
    pub trajectories: Vec<TrajectorySummary>,
}

impl PooledSamples {
    /// Union of two disjoint sets of trajectories, re-sorted by index.
    pub fn merge(mut self, other: PooledSamples) -> Result<Self, EnsembleError> {
        self.trajectories.extend(other.trajectories);
        self.trajectories.sort_by_key(|t| t.index);
        if let Some(w) = self
            .trajectories
            .windows(2)
            .find(|w| w[0].index == w[1].index)
        {
            return Err(EnsembleError::Overlap(w[0].index));
        }
        Ok(self)
    }

    pub fn dark_durations(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .flat_map(|t| t.dark.iter().copied())
            .collect()
    }

    pub fn dark_windows(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .flat_map(|t| t.dark_window.iter().copied())
            .collect()
    }

    pub fn bright_durations(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .flat_map(|t| t.bright.iter().copied())
            .collect()
    }

    pub fn first_events(&self) -> Vec<f64> {
        self.trajectories
            .iter()
            .filter_map(|t| t.first_event)
            .collect()
    }
}

/// Aggregate statistics of an ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub trajectory_count: u64,
    pub event_count: u64,
    pub gamma_count: u64,
    pub gamma_prime_count: u64,
    pub fluorescence_in_dark: u64,
    pub dark_threshold: f64,
    pub dark_durations: LogHistogram,
    pub bright_durations: LogHistogram,
    /// Sorted first-event times, one per trajectory that emitted at all.
    pub first_event_cdf: Vec<f64>,
    pub mean_first_event: Option<MeanEstimate>,
    pub mean_dark: Option<MeanEstimate>,
    pub mean_bright: Option<MeanEstimate>,
    /// KS distance between dark durations and the oracle survival, see
    /// [`ks_vs_oracle`].
    pub ks_vs_oracle: Option<f64>,
    /// Exponential rate fitted to dark durations beyond the threshold.
    pub fitted_dark_rate: Option<f64>,
    pub oracle_dark_rate: Option<f64>,
    pub oracle_mean_dark: Option<f64>,
}

pub fn run_ensemble(
    p: &SystemParams,
    cfg: &EnsembleConfig,
) -> Result<EnsembleStats, EnsembleError> {
    let pooled = collect_samples(p, cfg)?;
    summarize(p, &pooled, cfg.gap_factor)
}

/// Runs trajectories `first_index .. first_index + count` and keeps their
/// summaries. Results do not depend on `workers`: each trajectory owns the
/// random stream keyed by its index and the reduction is ordered.
pub fn collect_samples(
    p: &SystemParams,
    cfg: &EnsembleConfig,
) -> Result<PooledSamples, EnsembleError> {
    if cfg.count == 0 || cfg.workers == 0 {
        return Err(EnsembleError::EmptyEnsemble);
    }
    let one = |index: u64| -> Result<TrajectorySummary, EnsembleError> {
        let r = run_trajectory_observed(
            p,
            cfg.master_seed,
            index,
            cfg.t_end,
            cfg.event_budget,
            |_, _, _| {},
        )
        .map_err(|source| EnsembleError::Trajectory { index, source })?;
        Ok(TrajectorySummary::from_record(
            &r,
            p.strong_decay,
            cfg.gap_factor,
        ))
    };
    let range = cfg.first_index..cfg.first_index + cfg.count;
    let trajectories = run_indices(range, cfg.workers, one)?;
    Ok(PooledSamples { trajectories })
}

#[cfg(feature = "parallel")]
fn run_indices<F>(
    range: std::ops::Range<u64>,
    workers: usize,
    one: F,
) -> Result<Vec<TrajectorySummary>, EnsembleError>
where
    F: Fn(u64) -> Result<TrajectorySummary, EnsembleError> + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 1 {
        return range.map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EnsembleError::Pool(e.to_string()))?;
    pool.install(|| range.into_par_iter().map(one).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_indices<F>(
    range: std::ops::Range<u64>,
    _workers: usize,
    one: F,
) -> Result<Vec<TrajectorySummary>, EnsembleError>
where
    F: Fn(u64) -> Result<TrajectorySummary, EnsembleError>,
{
    range.map(one).collect()
}

/// Reduces pooled samples to [`EnsembleStats`].
pub fn summarize(
    p: &SystemParams,
    pooled: &PooledSamples,
    gap_factor: f64,
) -> Result<EnsembleStats, EnsembleError> {
    let beta = p.strong_decay;
    let threshold = gap_factor / beta;
    let dark = pooled.dark_durations();
    let bright = pooled.bright_durations();
    let mut firsts = pooled.first_events();
    firsts.sort_by(f64::total_cmp);

    let anchor = 0.01 / beta;
    let upper = if p.weak_decay > 0.0 {
        100.0 / p.weak_decay
    } else {
        100.0 / beta
    };
    let hist =
        |xs: &[f64]| LogHistogram::build(xs, anchor, HISTOGRAM_BINS_PER_DECADE, anchor, upper);

    let (ks, fitted, oracle_rate, oracle_mean) = if dark.is_empty() || p.resonance_absent() {
        (None, None, None, None)
    } else {
        let longest = pooled
            .dark_windows()
            .into_iter()
            .chain(dark.iter().copied())
            .fold(threshold, f64::max);
        let oracle = DarkSurvivalOracle::new(p, threshold, longest, ORACLE_POINTS_PER_DECADE)?;
        let ks = ks_vs_oracle(&oracle, &dark, &pooled.dark_windows());
        // exponential MLE beyond the threshold, right-censored runs included
        let excess: f64 = dark
            .iter()
            .copied()
            .chain(pooled.trajectories.iter().filter_map(|t| t.dark_censored))
            .map(|d| (d - threshold).max(0.0))
            .sum();
        let fitted = (excess > 0.0).then(|| dark.len() as f64 / excess);
        (
            Some(ks),
            fitted,
            oracle.asymptotic_rate(),
            oracle.mean_duration(),
        )
    };

    let sum = |f: fn(&TrajectorySummary) -> u64| pooled.trajectories.iter().map(f).sum::<u64>();
    Ok(EnsembleStats {
        trajectory_count: pooled.trajectories.len() as u64,
        event_count: sum(|t| t.events),
        gamma_count: sum(|t| t.gamma),
        gamma_prime_count: sum(|t| t.gamma_prime),
        fluorescence_in_dark: sum(|t| t.fluorescence_in_dark),
        dark_threshold: threshold,
        dark_durations: hist(&dark),
        bright_durations: hist(&bright),
        mean_first_event: MeanEstimate::from_samples(&firsts),
        first_event_cdf: firsts,
        mean_dark: MeanEstimate::from_samples(&dark),
        mean_bright: MeanEstimate::from_samples(&bright),
        ks_vs_oracle: ks,
        fitted_dark_rate: fitted,
        oracle_dark_rate: oracle_rate,
        oracle_mean_dark: oracle_mean,
    })
}

/// KS distance between observed dark durations and the oracle.
///
/// A dark period that began `w` before the end of the run is only
/// recorded when it ends within `w`, so its duration follows the oracle
/// law truncated at `w`. Mapping each duration through that truncated CDF
/// gives values that are uniform on `[0, 1]` whatever the horizon; the
/// statistic is their distance from the uniform CDF.
pub fn ks_vs_oracle(oracle: &DarkSurvivalOracle, durations: &[f64], windows: &[f64]) -> f64 {
    let cdf = |d: f64| 1.0 - oracle.conditional_survival(d);
    let u: Vec<f64> = durations
        .iter()
        .zip(windows)
        .map(|(&d, &w)| {
            let f_w = cdf(w);
            if f_w > 0.0 {
                (cdf(d) / f_w).min(1.0)
            } else {
                cdf(d)
            }
        })
        .collect();
    ks_statistic(&u, |x| x.clamp(0.0, 1.0))
}

/// Cumulative reset hazard `H(t) = ∫0^t (j_reset_γ + j_reset_γ') / N dτ`
/// tabulated by the trapezoid rule on a grid that is linear up to
/// `t_lin` and logarithmic beyond, `points_per_decade` nodes per decade.
#[derive(Debug, Clone)]
struct HazardTable {
    t: Vec<f64>,
    cumulative: Vec<f64>,
}

impl HazardTable {
    fn new(p: &SystemParams, t_max: f64, points_per_decade: usize) -> Result<Self, OracleError> {
        let t_lin = 1e-3 / p.strong_decay;
        let n_lin = points_per_decade / 10;
        let mut t: Vec<f64> = (0..=n_lin)
            .map(|k| t_lin * k as f64 / n_lin as f64)
            .collect();
        if t_max > t_lin {
            let decades = (t_max / t_lin).log10();
            let n_log = (decades * points_per_decade as f64).ceil() as usize;
            let ratio = 10f64.powf(1.0 / points_per_decade as f64);
            let mut x = t_lin;
            for _ in 0..n_log {
                x *= ratio;
                t.push(x);
            }
            if let Some(last) = t.last_mut() {
                *last = last.max(t_max);
            }
        }
        let h: Vec<f64> = t.iter().map(|&x| reset_hazard(p, x)).collect();
        let mut cumulative = Vec::with_capacity(t.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 1..t.len() {
            acc += 0.5 * (h[k] + h[k - 1]) * (t[k] - t[k - 1]);
            if !acc.is_finite() {
                return Err(OracleError::QuadratureFailure(t[k]));
            }
            cumulative.push(acc);
        }
        Ok(Self { t, cumulative })
    }

    fn at(&self, x: f64) -> f64 {
        let k = self.t.partition_point(|&s| s <= x);
        if k == 0 {
            return 0.0;
        }
        if k >= self.t.len() {
            return *self.cumulative.last().unwrap();
        }
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let w = (x - t0) / (t1 - t0);
        self.cumulative[k - 1] + w * (self.cumulative[k] - self.cumulative[k - 1])
    }
}

/// Survival against the reset channels, `S(t) = exp(-H(t))`, at each
/// grid time.
pub fn oracle_survival(p: &SystemParams, t_grid: &[f64]) -> Result<Vec<(f64, f64)>, OracleError> {
    oracle_survival_with_resolution(p, t_grid, ORACLE_POINTS_PER_DECADE)
}

pub fn oracle_survival_with_resolution(
    p: &SystemParams,
    t_grid: &[f64],
    points_per_decade: usize,
) -> Result<Vec<(f64, f64)>, OracleError> {
    let ok =
        t_grid.iter().all(|t| t.is_finite() && *t >= 0.0) && t_grid.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(OracleError::BadGrid);
    }
    let Some(&t_max) = t_grid.last() else {
        return Ok(Vec::new());
    };
    let table = HazardTable::new(p, t_max, points_per_decade)?;
    Ok(t_grid.iter().map(|&t| (t, (-table.at(t)).exp())).collect())
}

/// Distribution of dark-period durations predicted by the hazard model: a
/// cycle that outlives `threshold` is dark, and its length then follows
/// the reset survival conditioned on reaching the threshold.
#[derive(Debug, Clone)]
pub struct DarkSurvivalOracle {
    table: HazardTable,
    threshold: f64,
    rate: Option<f64>,
}

impl DarkSurvivalOracle {
    /// Tabulates far enough past `longest` and past the point where the
    /// conditional survival drops below `1e-12`.
    pub fn new(
        p: &SystemParams,
        threshold: f64,
        longest: f64,
        points_per_decade: usize,
    ) -> Result<Self, OracleError> {
        let rate =
            (p.weak_decay > 0.0).then(|| reset_hazard(p, threshold.max(50.0 / p.weak_decay)));
        let tail = rate.map_or(0.0, |r| 30.0 / r);
        let t_max = longest.max(threshold + tail) * 1.01;
        Ok(Self {
            table: HazardTable::new(p, t_max, points_per_decade)?,
            threshold,
            rate,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `P(T > d | T > threshold)`.
    pub fn conditional_survival(&self, d: f64) -> f64 {
        if d <= self.threshold {
            return 1.0;
        }
        (self.table.at(self.threshold) - self.table.at(d)).exp()
    }

    /// Reset hazard deep in the dark regime, or `None` without slow decay.
    pub fn asymptotic_rate(&self) -> Option<f64> {
        self.rate
    }

    /// Expected dark duration, `threshold + ∫ S(t)/S(threshold) dt`.
    pub fn mean_duration(&self) -> Option<f64> {
        self.rate?;
        let h0 = self.table.at(self.threshold);
        let start = self.table.t.partition_point(|&s| s <= self.threshold);
        let mut acc = 0.0;
        let mut prev_t = self.threshold;
        let mut prev_s = 1.0;
        for k in start..self.table.t.len() {
            let s = (h0 - self.table.cumulative[k]).exp();
            acc += 0.5 * (s + prev_s) * (self.table.t[k] - prev_t);
            prev_t = self.table.t[k];
            prev_s = s;
        }
        Some(self.threshold + acc)
    }
}
