//! Single trajectories: chained cycles and their bright/dark segmentation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ChannelKind, PhotonKind, SystemParams};
use crate::nrule::{
    collapse, init_graph, sample_next_event, trajectory_rng, ComponentGraph, EngineError,
    FieldCounts, Phase, ReductionEvent, Sample,
};

pub const DEFAULT_EVENT_BUDGET: u64 = 10_000_000;
pub const DEFAULT_GAP_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("t_end must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("event budget of {budget} exceeded before t_end")]
    BudgetExceeded { budget: u64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Everything one trajectory emitted up to `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionRecord {
    pub events: Vec<ReductionEvent>,
    pub t_end: f64,
    pub master_seed: u64,
    pub trajectory_index: u64,
    pub initial_counts: FieldCounts,
    pub final_counts: FieldCounts,
}

impl EmissionRecord {
    pub fn count(&self, kind: PhotonKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Fluorescent hits that landed while the cycle was dark. Always zero
    /// unless the phantom rule is broken.
    pub fn fluorescence_in_dark(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.channel == ChannelKind::FluorescentGamma && e.phase == Phase::Dark)
            .count()
    }

    /// Replays the photon bookkeeping: every event takes exactly one photon
    /// of its kind and the final counts match.
    pub fn check_bookkeeping(&self) -> Result<(), String> {
        let mut counts = self.initial_counts;
        for (i, e) in self.events.iter().enumerate() {
            if e.cycle_index != i as u64 {
                return Err(format!("event {i} carries cycle index {}", e.cycle_index));
            }
            if e.kind != e.channel.photon() {
                return Err(format!(
                    "event {i}: {:?} emitted by {:?}",
                    e.kind, e.channel
                ));
            }
            match e.kind {
                PhotonKind::StrongGamma => {
                    counts.strong = counts
                        .strong
                        .checked_sub(1)
                        .ok_or("strong field underflow")?
                }
                PhotonKind::WeakGammaPrime => {
                    counts.weak = counts.weak.checked_sub(1).ok_or("weak field underflow")?
                }
            }
        }
        if counts != self.final_counts {
            return Err(format!(
                "replayed {counts:?}, recorded {:?}",
                self.final_counts
            ));
        }
        let depleted = self.initial_counts.total() - self.final_counts.total();
        if depleted != self.events.len() as u64 {
            return Err(format!(
                "{depleted} photons removed for {} events",
                self.events.len()
            ));
        }
        Ok(())
    }
}

pub fn run_trajectory(
    p: &SystemParams,
    seed: u64,
    index: u64,
    t_end: f64,
) -> Result<EmissionRecord, TrajectoryError> {
    run_trajectory_observed(p, seed, index, t_end, DEFAULT_EVENT_BUDGET, |_, _, _| {})
}

/// Same as [`run_trajectory`] with an explicit event budget and a hook
/// called with the graph before collapse, the event and the graph after.
pub fn run_trajectory_observed<F>(
    p: &SystemParams,
    seed: u64,
    index: u64,
    t_end: f64,
    budget: u64,
    mut observe: F,
) -> Result<EmissionRecord, TrajectoryError>
where
    F: FnMut(&ComponentGraph, &ReductionEvent, &ComponentGraph),
{
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(TrajectoryError::BadHorizon(t_end));
    }
    let mut rng = trajectory_rng(seed, index);
    let mut g = init_graph(p, 0.0);
    let initial_counts = g.field_counts;
    let mut events = Vec::new();
    while g.cycle_start < t_end {
        match sample_next_event(&g, p, &mut rng, g.cycle_start, t_end)? {
            Sample::Event(e, before) => {
                if events.len() as u64 >= budget {
                    return Err(TrajectoryError::BudgetExceeded { budget });
                }
                let after = collapse(&before, &e)?;
                observe(&before, &e, &after);
                events.push(e);
                g = after;
            }
            Sample::NoEventBefore(_) => break,
        }
    }
    Ok(EmissionRecord {
        events,
        t_end,
        master_seed: seed,
        trajectory_index: index,
        initial_counts,
        final_counts: g.field_counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodKind {
    Fluorescent,
    Dark,
}

/// A classified stretch of a trajectory. `photon_count` counts emissions
/// in `(t_start, t_end]`, so a dark period holds only the reset photon that
/// closes it. `censored` marks the last period, cut by the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub kind: PeriodKind,
    pub t_start: f64,
    pub t_end: f64,
    pub photon_count: u64,
    pub censored: bool,
}

impl Period {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Splits a record into fluorescent and dark periods.
///
/// Any stretch without emissions longer than `gap_factor / β` is dark and
/// ends at the next emission of either kind. Runs of shorter gaps form the
/// fluorescent periods. Two dark periods can follow each other directly
/// when a reset is followed by another long silence. A record without
/// events is a single (censored) fluorescent period.
///
/// # Panics
///
/// If `gap_factor <= 1`.
pub fn classify_periods(r: &EmissionRecord, strong_decay: f64, gap_factor: f64) -> Vec<Period> {
    assert!(
        gap_factor > 1.0,
        "gap_factor must exceed 1, got {gap_factor}"
    );
    let threshold = gap_factor / strong_decay;
    let mut periods = Vec::new();
    if r.events.is_empty() {
        periods.push(Period {
            kind: PeriodKind::Fluorescent,
            t_start: 0.0,
            t_end: r.t_end,
            photon_count: 0,
            censored: true,
        });
        return periods;
    }

    let mut prev = 0.0;
    let mut open: Option<(f64, u64)> = None;
    let boundaries = r
        .events
        .iter()
        .map(|e| Some(e.t_sc))
        .chain(std::iter::once(None));
    for next in boundaries {
        let stop = next.unwrap_or(r.t_end);
        let censored = next.is_none();
        if stop - prev > threshold {
            if let Some((start, count)) = open.take() {
                periods.push(Period {
                    kind: PeriodKind::Fluorescent,
                    t_start: start,
                    t_end: prev,
                    photon_count: count,
                    censored: false,
                });
            }
            periods.push(Period {
                kind: PeriodKind::Dark,
                t_start: prev,
                t_end: stop,
                photon_count: u64::from(!censored),
                censored,
            });
        } else {
            let (start, count) = open.get_or_insert((prev, 0));
            if censored {
                periods.push(Period {
                    kind: PeriodKind::Fluorescent,
                    t_start: *start,
                    t_end: stop,
                    photon_count: *count,
                    censored: true,
                });
            } else {
                *count += 1;
            }
        }
        prev = stop;
    }
    periods
}
