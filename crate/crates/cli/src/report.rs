//! Writers behind each subcommand.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use shelving_core::analytic::{amplitudes, currents};
use shelving_core::ensemble::{run_ensemble, EnsembleConfig, EnsembleStats};
use shelving_core::stats::{LogHistogram, MeanEstimate};
use shelving_core::trajectory::run_trajectory_observed;
use shelving_core::validation::{run_validation, CheckStatus, ValidationPlan};
use shelving_core::SystemParams;

use crate::{write_all, CliError, Format};

pub const ANALYTIC_HEADER: &str =
    "t,a0_re,a0_im,a1_re,a1_im,a2_re,a2_im,norm,j_fluor,j_reset_gamma,j_reset_gamma_prime";
pub const TRAJECTORY_HEADER: &str = "time,photon_kind,channel,cycle_index";
pub const ENSEMBLE_SCHEMA: &str = "shelving.ensemble.v1";

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Numerical(format!("cannot encode JSON: {e}")))
}

#[derive(Serialize)]
struct AnalyticRow {
    t: f64,
    a0: [f64; 2],
    a1: [f64; 2],
    a2: [f64; 2],
    norm: f64,
    j_fluor: f64,
    j_reset_gamma: f64,
    j_reset_gamma_prime: f64,
}

pub fn analytic(
    out: &mut dyn Write,
    p: &SystemParams,
    times: &[f64],
    format: Format,
) -> Result<(), CliError> {
    let rows = times
        .iter()
        .map(|&t| {
            let a = amplitudes(p, t)?;
            let j = currents(p, t)?;
            Ok(AnalyticRow {
                t,
                a0: [a.a0.re, a.a0.im],
                a1: [a.a1.re, a.a1.im],
                a2: [a.a2.re, a.a2.im],
                norm: a.norm(),
                j_fluor: j.j_fluor,
                j_reset_gamma: j.j_reset_gamma,
                j_reset_gamma_prime: j.j_reset_gamma_prime,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let text = match format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from(ANALYTIC_HEADER);
            s.push('\n');
            for r in &rows {
                let cells = [
                    r.t,
                    r.a0[0],
                    r.a0[1],
                    r.a1[0],
                    r.a1[1],
                    r.a2[0],
                    r.a2[1],
                    r.norm,
                    r.j_fluor,
                    r.j_reset_gamma,
                    r.j_reset_gamma_prime,
                ];
                let line: Vec<String> = cells.iter().map(|x| format!("{x:.16e}")).collect();
                s.push_str(&line.join(","));
                s.push('\n');
            }
            s
        }
    };
    write_all(out, text.as_bytes())
}

pub fn trajectory(
    out: &mut dyn Write,
    p: &SystemParams,
    cfg: &EnsembleConfig,
    index: u64,
    format: Format,
) -> Result<(), CliError> {
    let record = run_trajectory_observed(
        p,
        cfg.master_seed,
        index,
        cfg.t_end,
        cfg.event_budget,
        |_, _, _| {},
    )?;
    if record.fluorescence_in_dark() > 0 {
        return Err(CliError::Invariant(format!(
            "{} fluorescent emissions inside dark phases",
            record.fluorescence_in_dark()
        )));
    }
    record.check_bookkeeping().map_err(CliError::Invariant)?;
    let text = match format {
        Format::Json => json(&record)?,
        Format::Csv => {
            let mut s = String::from(TRAJECTORY_HEADER);
            s.push('\n');
            for e in &record.events {
                let _ = writeln!(
                    s,
                    "{:.16e},{},{},{}",
                    e.t_sc,
                    e.kind.label(),
                    e.channel.label(),
                    e.cycle_index
                );
            }
            s
        }
    };
    write_all(out, text.as_bytes())
}

#[derive(Serialize)]
struct EnsembleReport<'a> {
    schema: &'static str,
    params: &'a SystemParams,
    config: &'a EnsembleConfig,
    stats: &'a EnsembleStats,
}

fn mean_line(m: &Option<MeanEstimate>) -> String {
    match m {
        Some(m) => format!("{} periods, mean {:.4e} +/- {:.2e}", m.n, m.mean, m.std_err),
        None => "none".into(),
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.digits$e}"))
}

pub fn summary(s: &EnsembleStats) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "trajectories         {}", s.trajectory_count);
    let _ = writeln!(
        t,
        "emissions            {} (gamma {}, gamma_prime {})",
        s.event_count, s.gamma_count, s.gamma_prime_count
    );
    let _ = writeln!(t, "dark threshold       {:.4e}", s.dark_threshold);
    let _ = writeln!(t, "dark periods         {}", mean_line(&s.mean_dark));
    let _ = writeln!(t, "oracle mean dark     {}", opt(s.oracle_mean_dark, 4));
    let _ = writeln!(t, "bright periods       {}", mean_line(&s.mean_bright));
    let _ = writeln!(
        t,
        "dark rate            fitted {}, oracle {}",
        opt(s.fitted_dark_rate, 4),
        opt(s.oracle_dark_rate, 4)
    );
    let _ = writeln!(
        t,
        "KS vs oracle         {}",
        s.ks_vs_oracle.map_or("n/a".into(), |d| format!("{d:.4}"))
    );
    let _ = writeln!(t, "fluorescence in dark {}", s.fluorescence_in_dark);
    t
}

fn histogram_rows(s: &mut String, series: &str, h: &LogHistogram) {
    for (k, count) in h.counts.iter().enumerate() {
        let _ = writeln!(
            s,
            "{series},{:.16e},{:.16e},{count}",
            h.edges[k],
            h.edges[k + 1]
        );
    }
}

pub fn ensemble(
    out: &mut dyn Write,
    p: &SystemParams,
    cfg: &EnsembleConfig,
    format: Format,
) -> Result<(), CliError> {
    let stats = run_ensemble(p, cfg)?;
    if stats.fluorescence_in_dark > 0 {
        return Err(CliError::Invariant(format!(
            "{} fluorescent emissions inside dark phases",
            stats.fluorescence_in_dark
        )));
    }
    let text = match format {
        Format::Json => json(&EnsembleReport {
            schema: ENSEMBLE_SCHEMA,
            params: p,
            config: cfg,
            stats: &stats,
        })?,
        Format::Csv => {
            let mut s = String::from("series,bin_lo,bin_hi,count\n");
            histogram_rows(&mut s, "dark", &stats.dark_durations);
            histogram_rows(&mut s, "bright", &stats.bright_durations);
            s
        }
    };
    write_all(out, text.as_bytes())?;
    eprint!("{}", summary(&stats));
    Ok(())
}

/// Prints one line per check. A failed phantom check is a physics
/// violation, any other failure a numerical one.
pub fn validate(
    out: &mut dyn Write,
    p: &SystemParams,
    ensemble: EnsembleConfig,
    samples: usize,
    format: Format,
) -> Result<(), CliError> {
    let plan = ValidationPlan { samples, ensemble };
    let outcomes = run_validation(p, &plan);
    let text = match format {
        Format::Json => json(&outcomes)?,
        Format::Csv => {
            let mut s = String::new();
            for o in &outcomes {
                let tag = match o.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skipped => "SKIP",
                };
                let _ = writeln!(s, "[{tag}] {}: {}", o.name, o.detail);
            }
            s
        }
    };
    write_all(out, text.as_bytes())?;
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| o.status == CheckStatus::Fail)
        .map(|o| o.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else if failed.contains(&"phantom exclusion") {
        Err(CliError::Invariant(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    } else {
        Err(CliError::Numerical(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
