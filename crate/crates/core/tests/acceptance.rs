//! Acceptance suite. Every criterion prints one PASS/FAIL line with its
//! measured value and runtime; the target exits nonzero if any failed.
//! It runs without the libtest harness so the lines always show:
//! `cargo test -p shelving-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shelving_core::analytic::{amplitudes, hazard, norm, split};
use shelving_core::ensemble::{run_ensemble, EnsembleConfig};
use shelving_core::nrule::{
    first_event_by_steps, init_graph, sample_next_event, trajectory_rng, Phase, Sample,
};
use shelving_core::stats::{ks_statistic, ks_two_sample};
use shelving_core::trajectory::run_trajectory_observed;
use shelving_core::{ChannelKind, SystemParams};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
    budget: Option<Duration>,
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let strong_decay = rng.gen_range(0.01..1.0);
    let amp = |rng: &mut ChaCha8Rng| {
        Complex64::from_polar(
            rng.gen_range(0.0..0.3),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    };
    SystemParams {
        rabi_frequency: rng.gen_range(0.1..5.0),
        strong_decay,
        weak_decay: strong_decay * rng.gen_range(1e-4..0.5),
        resonance_a: amp(rng),
        resonance_b: amp(rng),
        ..SystemParams::default()
    }
    .validate()
    .expect("generator stays inside the valid region")
}

/// Closed form written out independently of the library, with the phase
/// factor and the two exponentials evaluated separately.
fn reference_amplitudes(p: &SystemParams, t: f64) -> [Complex64; 3] {
    let rotation = Complex64::new(0.0, p.rabi_frequency * t).exp();
    let fast = (-p.strong_decay * t).exp();
    let slow = (-p.weak_decay * t).exp();
    let shared = p.resonance_a * rotation * (fast - slow);
    [
        (p.rabi_frequency * t).cos() * fast + shared,
        Complex64::i() * (p.rabi_frequency * t).sin() * fast + shared,
        -Complex64::i() * p.resonance_b * rotation * (fast - slow),
    ]
}

fn max_gap(a: [Complex64; 3], b: [Complex64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).norm()).fold(0.0, f64::max)
}

/// Initial state is the ground state. The Rabi part of the split equals
/// the amplitudes with the resonance switched off, the resonance part is
/// what remains, and both add up to the reference closed form.
fn c1_analytic_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_start: f64 = 0.0;
    let mut worst_split: f64 = 0.0;
    for set in 0..100 {
        let p = random_params(&mut rng);
        let free = p.without_resonance();
        let v = amplitudes(&p, 0.0).unwrap();
        worst_start = worst_start
            .max((v.a0 - 1.0).norm())
            .max(v.a1.norm())
            .max(v.a2.norm());
        // the full grid on the first set, a sparse one on the rest
        let points = if set == 0 { 10_000 } else { 100 };
        let horizon = 20.0 / p.weak_decay;
        for k in 0..points {
            let t = horizon * k as f64 / (points - 1) as f64;
            let s = split(&p, t).unwrap();
            let r = s.recombine();
            let off = amplitudes(&free, t).unwrap();
            let reference = reference_amplitudes(&p, t);
            worst_split = worst_split
                .max(max_gap([r.a0, r.a1, r.a2], reference))
                .max(max_gap(
                    [s.rabi_a0, s.rabi_a1, Complex64::default()],
                    [off.a0, off.a1, off.a2],
                ))
                .max(max_gap(
                    [s.res_a0, s.res_a1, s.res_a2],
                    [reference[0] - off.a0, reference[1] - off.a1, reference[2]],
                ));
        }
    }
    Verdict {
        ok: worst_start <= 1e-12 && worst_split <= 1e-12,
        detail: format!("start residual {worst_start:.1e}, split residual {worst_split:.1e}"),
        budget: Some(Duration::from_secs(1)),
    }
}

/// With the resonance off the norm is a pure exponential.
fn c2_unperturbed_norm() -> Verdict {
    let p = SystemParams::default().without_resonance();
    let beta = p.strong_decay;
    let mut worst: f64 = 0.0;
    for k in 0..=10_000 {
        let t = 50.0 / beta * k as f64 / 10_000.0;
        let from_amps = amplitudes(&p, t).unwrap().norm();
        worst = worst
            .max((from_amps - (-2.0 * beta * t).exp()).abs())
            .max((norm(&p, t) - (-2.0 * beta * t).exp()).abs());
    }
    Verdict {
        ok: worst <= 1e-12,
        detail: format!("max |N - exp(-2 beta t)| = {worst:.1e}"),
        budget: None,
    }
}

/// The hazard equals the logarithmic decay rate of the norm, the latter
/// computed by central differences of the summed amplitude moduli.
fn c3_hazard_consistency() -> Verdict {
    let p = SystemParams::default();
    let delta = 0.01;
    let ln_n = |t: f64| amplitudes(&p, t).unwrap().norm().ln();
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    let mut points = 0;
    let mut t = delta;
    while amplitudes(&p, t + delta).unwrap().norm() > 1e-8 {
        let fd = -(ln_n(t + delta) - ln_n(t - delta)) / (2.0 * delta);
        let rel = (fd / hazard(&p, t) - 1.0).abs();
        if rel > worst {
            worst = rel;
            at = t;
        }
        points += 1;
        t += 0.37;
    }
    Verdict {
        ok: points > 1000 && worst <= 1e-6,
        detail: format!("max rel. error {worst:.2e} at t = {at:.2} over {points} points"),
        budget: Some(Duration::from_secs(5)),
    }
}

/// Inverse-transform sampling is exponential without resonance and agrees
/// with a fixed-step Bernoulli walk with it.
fn c4_sampler_laws() -> Verdict {
    let n = 10_000;
    let first_events = |p: &SystemParams, seed: u64, horizon: f64| -> Vec<f64> {
        let mut rng = trajectory_rng(seed, 0);
        let g = init_graph(p, 0.0);
        (0..n)
            .map(
                |_| match sample_next_event(&g, p, &mut rng, 0.0, horizon).unwrap() {
                    Sample::Event(e, _) => e.t_sc,
                    Sample::NoEventBefore(t) => t,
                },
            )
            .collect()
    };

    let free = SystemParams::default().without_resonance();
    let rate = 2.0 * free.strong_decay;
    let xs = first_events(&free, 11, 1e9);
    let d_exp = ks_statistic(&xs, |t| 1.0 - (-rate * t).exp());

    let p = SystemParams::default();
    let horizon = 2000.0;
    let inverse = first_events(&p, 12, horizon);
    let mut rng = trajectory_rng(13, 0);
    let steps: Vec<f64> = (0..n)
        .map(|_| first_event_by_steps(&p, &mut rng, horizon).unwrap_or(horizon))
        .collect();
    let d_two = ks_two_sample(&inverse, &steps);
    Verdict {
        ok: d_exp < 0.02 && d_two < 0.03,
        detail: format!(
            "KS vs exponential {d_exp:.4} (< 0.02), Bernoulli vs inverse {d_two:.4} (< 0.03)"
        ),
        budget: None,
    }
}

/// No fluorescent emission ever lands inside a dark phase, and dark phases
/// really occur.
fn c5_phantom_exclusion() -> Verdict {
    let p = SystemParams::default();
    let t_end = 10.0 / p.weak_decay;
    let (mut bad, mut dark_events, mut events) = (0usize, 0usize, 0usize);
    for index in 0..1000 {
        let r = run_trajectory_observed(&p, 5, index, t_end, 10_000_000, |before, e, _| {
            if before.phase == Phase::Dark {
                dark_events += 1;
                if e.channel == ChannelKind::FluorescentGamma {
                    bad += 1;
                }
            }
        })
        .unwrap();
        bad += r.fluorescence_in_dark();
        events += r.events.len();
    }
    Verdict {
        ok: bad == 0 && dark_events > 0,
        detail: format!(
            "{bad} fluorescent hits in dark over {events} events, {dark_events} dark-phase events"
        ),
        budget: None,
    }
}

/// Pooled dark durations follow the quadrature oracle.
fn c6_dark_survival() -> Verdict {
    let p = SystemParams::default();
    let cfg = EnsembleConfig {
        master_seed: 6,
        count: 100,
        t_end: 50.0 / p.weak_decay,
        ..EnsembleConfig::default()
    };
    let s = run_ensemble(&p, &cfg).unwrap();
    let n = s.dark_durations.total();
    let ks = s.ks_vs_oracle.unwrap_or(f64::INFINITY);
    let fit = s.fitted_dark_rate.unwrap_or(f64::NAN);
    let oracle = s.oracle_dark_rate.unwrap_or(f64::NAN);
    let lambda = p.weak_decay;
    let rel = (fit / oracle - 1.0).abs();
    Verdict {
        ok: n >= 500 && ks < 0.05 && rel <= 0.10 && (0.5 * lambda..=4.0 * lambda).contains(&oracle),
        detail: format!(
            "{n} dark periods, KS {ks:.4}, rate {fit:.4e} vs oracle {oracle:.4e} ({:.1}%)",
            rel * 100.0
        ),
        budget: Some(Duration::from_secs(120)),
    }
}

/// Each reduction removes exactly one photon of its own kind.
fn c7_photon_bookkeeping() -> Verdict {
    let p = SystemParams {
        strong_photons: 5_000,
        weak_photons: 200,
        ..SystemParams::default()
    };
    let mut bad = 0usize;
    let mut events = 0usize;
    for index in 0..50 {
        let r = run_trajectory_observed(
            &p,
            7,
            index,
            20.0 / p.weak_decay,
            10_000_000,
            |before, e, after| {
                let (ds, dw) = (
                    before.field_counts.strong - after.field_counts.strong,
                    before.field_counts.weak - after.field_counts.weak,
                );
                let expected = match e.kind {
                    shelving_core::PhotonKind::StrongGamma => (1, 0),
                    shelving_core::PhotonKind::WeakGammaPrime => (0, 1),
                };
                if (ds, dw) != expected || after.cycle_index != before.cycle_index + 1 {
                    bad += 1;
                }
            },
        )
        .unwrap();
        if r.check_bookkeeping().is_err() {
            bad += 1;
        }
        events += r.events.len();
    }
    Verdict {
        ok: bad == 0 && events > 0,
        detail: format!("{bad} bookkeeping errors over {events} events"),
        budget: None,
    }
}

/// Worker count does not change a single byte of the serialized result.
fn c8_parallel_determinism() -> Verdict {
    let p = SystemParams::default();
    let run = |workers| {
        let cfg = EnsembleConfig {
            master_seed: 8,
            count: 64,
            t_end: 10.0 / p.weak_decay,
            workers,
            ..EnsembleConfig::default()
        };
        serde_json::to_string(&run_ensemble(&p, &cfg).unwrap()).unwrap()
    };
    let one = run(1);
    let eight = run(8);
    Verdict {
        ok: one == eight,
        detail: format!(
            "{} bytes with 1 worker, identical with 8: {}",
            one.len(),
            one == eight
        ),
        budget: None,
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("analytic exactness", c1_analytic_exactness),
        ("unperturbed norm", c2_unperturbed_norm),
        ("hazard consistency", c3_hazard_consistency),
        ("sampler laws", c4_sampler_laws),
        ("phantom exclusion", c5_phantom_exclusion),
        ("dark survival", c6_dark_survival),
        ("photon bookkeeping", c7_photon_bookkeeping),
        ("parallel determinism", c8_parallel_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = check();
        let took = started.elapsed();
        let in_time = v.budget.is_none_or(|b| took <= b);
        let ok = v.ok && in_time;
        let budget = v.budget.map_or(String::new(), |b| format!(" / {:.0?}", b));
        println!(
            "[{}] {}. {name}: {} ({:.2?}{budget})",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took
        );
        if !ok {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
