//! Reduction engine for one cycle between resets.
//!
//! A cycle starts with the atom in the ground state and both fields intact.
//! Probability current flows into three ready components: the fluorescent
//! emission of the Rabi row and the two irreversible leaks of the
//! three-state resonance. A ready component is hit with probability
//! `current * dt`; the hit collapses the state onto it, removes one photon
//! from the corresponding laser field and starts a new cycle.
//!
//! Once the initial component has drained into the resonance, the
//! fluorescent component receives no more current. It turns into a phantom
//! for the rest of the cycle (the dark phase) and only the reset channels
//! can end the cycle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{hazard, log_norm, normalized_currents};
use crate::model::{ChannelKind, PhotonKind, ReadyChannel, SystemParams};

/// Time resolution of the event-time bisection.
pub const EVENT_TIME_RESOLUTION: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("time {t} precedes cycle start {cycle_start}")]
    TimeBeforeCycleStart { t: f64, cycle_start: f64 },
    #[error("{channel:?} selected but its laser field holds no photons")]
    DepletedField { channel: ChannelKind },
    #[error("phantom channel {channel:?} chosen at t = {t}")]
    PhantomChosen { channel: ChannelKind, t: f64 },
    #[error("no live ready channel at sampled event time t = {t}")]
    NoReadyChannel { t: f64 },
    #[error("horizon {t_max} must exceed current time {t}")]
    BadHorizon { t: f64, t_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Fluorescent,
    Dark,
}

/// Photons left in the strong (0-1) and weak (0-2) laser fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldCounts {
    pub strong: u64,
    pub weak: u64,
}

impl FieldCounts {
    pub fn total(&self) -> u64 {
        self.strong + self.weak
    }

    fn take(self, photon: PhotonKind) -> Option<Self> {
        match photon {
            PhotonKind::StrongGamma => self
                .strong
                .checked_sub(1)
                .map(|strong| Self { strong, ..self }),
            PhotonKind::WeakGammaPrime => {
                self.weak.checked_sub(1).map(|weak| Self { weak, ..self })
            }
        }
    }
}

/// State of the component structure of the current cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentGraph {
    /// Absolute time of the last reset.
    pub cycle_start: f64,
    /// Number of reductions before this cycle.
    pub cycle_index: u64,
    pub field_counts: FieldCounts,
    /// Indexed by [`ChannelKind::index`].
    pub channels: [ReadyChannel; 3],
    pub initial_component_alive: bool,
    pub phase: Phase,
    epsilon: f64,
}

impl ComponentGraph {
    fn fresh(t_abs: f64, cycle_index: u64, field_counts: FieldCounts, epsilon: f64) -> Self {
        Self {
            cycle_start: t_abs,
            cycle_index,
            field_counts,
            channels: ChannelKind::ALL.map(|k| ReadyChannel::new(k, 0.0, epsilon)),
            initial_component_alive: true,
            phase: Phase::Fluorescent,
            epsilon,
        }
    }

    pub fn channel(&self, kind: ChannelKind) -> &ReadyChannel {
        &self.channels[kind.index()]
    }
}

/// One stochastic reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionEvent {
    /// Absolute time of the hit.
    pub t_sc: f64,
    pub kind: PhotonKind,
    pub channel: ChannelKind,
    pub cycle_index: u64,
    /// Phase of the cycle when the hit landed.
    pub phase: Phase,
}

/// Outcome of [`sample_next_event`]. An event comes with the graph
/// refreshed at the event time, ready for [`collapse`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Event(ReductionEvent, ComponentGraph),
    NoEventBefore(f64),
}

/// Initial state: ground state, full fields, nothing ready yet.
pub fn init_graph(p: &SystemParams, t_abs: f64) -> ComponentGraph {
    ComponentGraph::fresh(
        t_abs,
        0,
        FieldCounts {
            strong: p.strong_photons,
            weak: p.weak_photons,
        },
        p.phantom_epsilon,
    )
}

/// Re-evaluates channel currents at `t_abs` and updates phantom flags and
/// the phase latch. Dark persists until the next collapse.
pub fn refresh_currents(
    g: &ComponentGraph,
    p: &SystemParams,
    t_abs: f64,
) -> Result<ComponentGraph, EngineError> {
    if !(t_abs >= g.cycle_start) {
        return Err(EngineError::TimeBeforeCycleStart {
            t: t_abs,
            cycle_start: g.cycle_start,
        });
    }
    let eps = p.phantom_epsilon;
    let mut j = normalized_currents(p, t_abs - g.cycle_start);
    let mut phase = g.phase;
    if phase == Phase::Fluorescent && j[0] <= eps && (j[1] > eps || j[2] > eps) {
        phase = Phase::Dark;
    }
    if phase == Phase::Dark {
        // no current reaches the first row from the resonance
        j[0] = 0.0;
    }
    Ok(ComponentGraph {
        channels: ChannelKind::ALL.map(|k| ReadyChannel::new(k, j[k.index()], eps)),
        initial_component_alive: phase == Phase::Fluorescent,
        phase,
        epsilon: eps,
        ..*g
    })
}

/// Draws the next reduction after `t_abs`, or reports that none happens
/// before `t_max`.
///
/// The event time inverts the conditional survival `N(τ)/N(τ_a)` against a
/// uniform draw by bisection; the channel is then picked among live
/// channels with probability proportional to their current.
pub fn sample_next_event<R: Rng + ?Sized>(
    g: &ComponentGraph,
    p: &SystemParams,
    rng: &mut R,
    t_abs: f64,
    t_max: f64,
) -> Result<Sample, EngineError> {
    if !(t_abs >= g.cycle_start) {
        return Err(EngineError::TimeBeforeCycleStart {
            t: t_abs,
            cycle_start: g.cycle_start,
        });
    }
    if !(t_max > t_abs) {
        return Err(EngineError::BadHorizon { t: t_abs, t_max });
    }
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let tau_a = t_abs - g.cycle_start;
    let tau_max = t_max - g.cycle_start;
    let Some(tau) = solve_survival(p, tau_a, tau_max, u.ln()) else {
        return Ok(Sample::NoEventBefore(t_max));
    };
    let mut t_sc = g.cycle_start + tau;
    if t_sc <= g.cycle_start {
        t_sc = g.cycle_start.next_up();
    }

    let graph = refresh_currents(g, p, t_sc)?;
    let pick: f64 = rng.gen();
    let live: Vec<&ReadyChannel> = graph.channels.iter().filter(|c| !c.is_phantom).collect();
    let total: f64 = live.iter().map(|c| c.inflow_current).sum();
    if live.is_empty() || !(total > 0.0) {
        return Err(EngineError::NoReadyChannel { t: t_sc });
    }
    let target = pick * total;
    let mut acc = 0.0;
    let mut chosen = live[live.len() - 1].kind;
    for c in &live {
        acc += c.inflow_current;
        if target < acc {
            chosen = c.kind;
            break;
        }
    }
    if graph.field_counts.take(chosen.photon()).is_none() {
        return Err(EngineError::DepletedField { channel: chosen });
    }
    let event = ReductionEvent {
        t_sc,
        kind: chosen.photon(),
        channel: chosen,
        cycle_index: graph.cycle_index,
        phase: graph.phase,
    };
    Ok(Sample::Event(event, graph))
}

/// Smallest `τ` in `(τ_a, τ_max]` with `ln N(τ) - ln N(τ_a) <= log_u`.
fn solve_survival(p: &SystemParams, tau_a: f64, tau_max: f64, log_u: f64) -> Option<f64> {
    let target = log_norm(p, tau_a) + log_u;
    if !(log_norm(p, tau_max) <= target) {
        return None;
    }
    let mut lo = tau_a;
    let mut step = 0.5 / p.strong_decay;
    let mut hi = (tau_a + step).min(tau_max);
    while log_norm(p, hi) > target {
        lo = hi;
        step *= 2.0;
        hi = (tau_a + step).min(tau_max);
    }
    while hi - lo > EVENT_TIME_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_norm(p, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Collapses onto the chosen ready component: every other component is
/// annihilated, one photon leaves its field and a new cycle starts at the
/// event time.
pub fn collapse(g: &ComponentGraph, e: &ReductionEvent) -> Result<ComponentGraph, EngineError> {
    let ch = g.channel(e.channel);
    if ch.is_phantom {
        return Err(EngineError::PhantomChosen {
            channel: e.channel,
            t: e.t_sc,
        });
    }
    if e.t_sc < g.cycle_start {
        return Err(EngineError::TimeBeforeCycleStart {
            t: e.t_sc,
            cycle_start: g.cycle_start,
        });
    }
    let counts = g
        .field_counts
        .take(e.channel.photon())
        .ok_or(EngineError::DepletedField { channel: e.channel })?;
    Ok(ComponentGraph::fresh(
        e.t_sc,
        g.cycle_index + 1,
        counts,
        g.epsilon,
    ))
}

/// Independent random stream for one trajectory of an ensemble.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Reference sampler for the hit law: walks the cycle in fixed steps and
/// fires with probability `h * dt` in each. `dt` is chosen so that
/// `h * dt` never exceeds `p.max_hazard_step`. Returns the first-event time
/// measured from the cycle start, or `None` if nothing fires before
/// `tau_max`.
pub fn first_event_by_steps<R: Rng + ?Sized>(
    p: &SystemParams,
    rng: &mut R,
    tau_max: f64,
) -> Option<f64> {
    let dt = p.max_hazard_step / hazard_bound(p, tau_max);
    let mut t = 0.0;
    while t < tau_max {
        let h = hazard(p, t + 0.5 * dt);
        if rng.gen::<f64>() < h * dt {
            return Some(t + rng.gen::<f64>() * dt);
        }
        t += dt;
    }
    None
}

/// Upper bound of the hazard on `[0, tau_max]`, scanned on a grid fine
/// against both decay scales with 10% headroom.
pub fn hazard_bound(p: &SystemParams, tau_max: f64) -> f64 {
    let step = 0.01 / p.strong_decay;
    let n = ((tau_max / step).ceil() as usize).min(1_000_000);
    let step = tau_max / n.max(1) as f64;
    let h = (0..=n)
        .map(|k| hazard(p, k as f64 * step))
        .fold(0.0, f64::max);
    1.1 * h.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_statistic, ks_two_sample};
    use num_complex::Complex64;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    fn first_event(p: &SystemParams, rng: &mut ChaCha8Rng, t_max: f64) -> Option<ReductionEvent> {
        let g = init_graph(p, 0.0);
        match sample_next_event(&g, p, rng, 0.0, t_max).unwrap() {
            Sample::Event(e, _) => Some(e),
            Sample::NoEventBefore(_) => None,
        }
    }

    #[test]
    fn initial_graph() {
        let p = params();
        let g = init_graph(&p, 0.0);
        assert_eq!(g.cycle_start, 0.0);
        assert_eq!(
            g.field_counts,
            FieldCounts {
                strong: p.strong_photons,
                weak: p.weak_photons
            }
        );
        assert_eq!(g.phase, Phase::Fluorescent);
        assert!(g.initial_component_alive);
        assert!(g.channels.iter().all(|c| c.inflow_current == 0.0));
    }

    fn event(t: f64, channel: ChannelKind, g: &ComponentGraph) -> ReductionEvent {
        ReductionEvent {
            t_sc: t,
            kind: channel.photon(),
            channel,
            cycle_index: g.cycle_index,
            phase: g.phase,
        }
    }

    #[test]
    fn collapse_bookkeeping() {
        let p = SystemParams {
            strong_photons: 10,
            weak_photons: 10,
            ..params()
        };
        let g = init_graph(&p, 0.0);
        let g = refresh_currents(&g, &p, 3.0).unwrap();
        let next = collapse(&g, &event(3.0, ChannelKind::FluorescentGamma, &g)).unwrap();
        assert_eq!(next.cycle_start, 3.0);
        assert_eq!(
            next.field_counts,
            FieldCounts {
                strong: 9,
                weak: 10
            }
        );
        assert_eq!(next.cycle_index, 1);
        assert_eq!(next.phase, Phase::Fluorescent);

        let g = refresh_currents(&init_graph(&p, 0.0), &p, 900.0).unwrap();
        let next = collapse(&g, &event(900.0, ChannelKind::ResetGammaPrime, &g)).unwrap();
        assert_eq!(
            next.field_counts,
            FieldCounts {
                strong: 10,
                weak: 9
            }
        );
        let next = collapse(&g, &event(900.0, ChannelKind::ResetGamma, &g)).unwrap();
        assert_eq!(
            next.field_counts,
            FieldCounts {
                strong: 9,
                weak: 10
            }
        );
    }

    #[test]
    fn collapse_onto_phantom_is_rejected() {
        let p = params();
        let g = refresh_currents(&init_graph(&p, 0.0), &p, 2000.0).unwrap();
        assert!(g.channel(ChannelKind::FluorescentGamma).is_phantom);
        let err = collapse(&g, &event(2000.0, ChannelKind::FluorescentGamma, &g)).unwrap_err();
        assert!(matches!(err, EngineError::PhantomChosen { .. }));
    }

    #[test]
    fn refresh_before_cycle_start_fails() {
        let p = params();
        let g = init_graph(&p, 5.0);
        assert!(matches!(
            refresh_currents(&g, &p, 4.0),
            Err(EngineError::TimeBeforeCycleStart { .. })
        ));
    }

    #[test]
    fn refresh_at_cycle_start() {
        // only the fluorescent channel is fed at τ = 0
        let p = params();
        let g = refresh_currents(&init_graph(&p, 0.0), &p, 0.0).unwrap();
        assert!(!g.channel(ChannelKind::FluorescentGamma).is_phantom);
        assert!(g.channel(ChannelKind::ResetGamma).is_phantom);
        assert!(g.channel(ChannelKind::ResetGammaPrime).is_phantom);
        assert_eq!(g.phase, Phase::Fluorescent);
    }

    #[test]
    fn fluorescent_channel_alive_at_five_lifetimes() {
        let p = params();
        let g = refresh_currents(&init_graph(&p, 0.0), &p, 5.0 / p.strong_decay).unwrap();
        let ch = g.channel(ChannelKind::FluorescentGamma);
        assert!(!ch.is_phantom);
        // 40-digit oracle: 2β e^{-2βτ}/N at τ = 50
        assert!((ch.inflow_current / 0.001348002714 - 1.0).abs() < 1e-9);
        assert_eq!(g.phase, Phase::Fluorescent);
    }

    #[test]
    fn dark_at_two_hundred_lifetimes() {
        let p = params();
        let g = refresh_currents(&init_graph(&p, 0.0), &p, 200.0 / p.strong_decay).unwrap();
        assert!(g.channel(ChannelKind::FluorescentGamma).is_phantom);
        assert!(!g.channel(ChannelKind::ResetGamma).is_phantom);
        assert!(!g.channel(ChannelKind::ResetGammaPrime).is_phantom);
        assert_eq!(g.phase, Phase::Dark);
        assert!(!g.initial_component_alive);
    }

    #[test]
    fn dark_phase_is_sticky() {
        let p = params();
        let mut g = init_graph(&p, 0.0);
        let mut seen_dark = false;
        for k in 0..20_000 {
            g = refresh_currents(&g, &p, k as f64 * 0.5).unwrap();
            if seen_dark {
                assert_eq!(g.phase, Phase::Dark);
                assert_eq!(g.channel(ChannelKind::FluorescentGamma).inflow_current, 0.0);
            }
            seen_dark |= g.phase == Phase::Dark;
        }
        assert!(seen_dark);
        // a latched graph stays dark even where the raw condition fails
        let p_loose = SystemParams {
            phantom_epsilon: 0.0,
            ..p
        };
        let back = refresh_currents(&g, &p_loose, 10.0).unwrap();
        assert_eq!(back.phase, Phase::Dark);
    }

    #[test]
    fn without_resonance_only_fluorescence_fires() {
        let p = params().without_resonance();
        let mut rng = trajectory_rng(7, 0);
        for _ in 0..2000 {
            let e = first_event(&p, &mut rng, 1e6).unwrap();
            assert_eq!(e.channel, ChannelKind::FluorescentGamma);
            assert_eq!(e.kind, PhotonKind::StrongGamma);
        }
    }

    #[test]
    fn same_seed_same_events() {
        let p = params();
        let draw = |seed| {
            let mut rng = trajectory_rng(seed, 3);
            (0..200)
                .map(|_| first_event(&p, &mut rng, 1e6).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    #[test]
    fn streams_differ_by_index() {
        let mut a = trajectory_rng(42, 0);
        let mut b = trajectory_rng(42, 1);
        assert_ne!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn first_event_exponential_without_resonance() {
        let p = params().without_resonance();
        let rate = 2.0 * p.strong_decay;
        let mut rng = trajectory_rng(42, 0);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| first_event(&p, &mut rng, 1e6).unwrap().t_sc)
            .collect();
        let d = ks_statistic(&xs, |t| 1.0 - (-rate * t).exp());
        assert!(d < 0.02, "KS = {d}");
    }

    #[test]
    fn step_sampler_agrees_with_inversion() {
        let p = params();
        let horizon = 2000.0;
        let mut rng = trajectory_rng(11, 0);
        let inv: Vec<f64> = (0..10_000)
            .map(|_| first_event(&p, &mut rng, horizon).map_or(horizon, |e| e.t_sc))
            .collect();
        let mut rng = trajectory_rng(11, 1);
        let steps: Vec<f64> = (0..10_000)
            .map(|_| first_event_by_steps(&p, &mut rng, horizon).unwrap_or(horizon))
            .collect();
        let d = ks_two_sample(&inv, &steps);
        assert!(d < 0.03, "KS = {d}");
    }

    #[test]
    fn no_event_when_survival_floor_exceeds_draw() {
        // λ = 0: the resonance never drains, so N(∞) = 2|A|² + |B|²
        let p = SystemParams {
            weak_decay: 0.0,
            resonance_a: Complex64::new(0.0, 0.5),
            resonance_b: Complex64::new(0.5, 0.0),
            ..params()
        };
        let mut rng = trajectory_rng(1, 0);
        let mut none = 0;
        for _ in 0..2000 {
            if first_event(&p, &mut rng, 1e4).is_none() {
                none += 1;
            }
        }
        // expected fraction 0.75
        assert!((none as f64 / 2000.0 - 0.75).abs() < 0.04, "{none}");
    }

    #[test]
    fn depleted_field_is_reported() {
        let p = params().without_resonance();
        let mut g = init_graph(&p, 0.0);
        g.field_counts.strong = 0;
        let mut rng = trajectory_rng(0, 0);
        let err = sample_next_event(&g, &p, &mut rng, 0.0, 1e6).unwrap_err();
        assert_eq!(
            err,
            EngineError::DepletedField {
                channel: ChannelKind::FluorescentGamma
            }
        );
    }

    #[test]
    fn all_phantom_is_an_error() {
        let p = SystemParams {
            phantom_epsilon: 1.0,
            ..params()
        };
        let g = init_graph(&p, 0.0);
        let mut rng = trajectory_rng(0, 0);
        assert!(matches!(
            sample_next_event(&g, &p, &mut rng, 0.0, 1e6),
            Err(EngineError::NoReadyChannel { .. })
        ));
    }

    #[test]
    fn conditional_sampling_from_mid_cycle() {
        // restarting the clock at τ_a must not produce times before it
        let p = params();
        let g = init_graph(&p, 100.0);
        let mut rng = trajectory_rng(5, 0);
        for _ in 0..500 {
            match sample_next_event(&g, &p, &mut rng, 400.0, 1e6).unwrap() {
                Sample::Event(e, graph) => {
                    assert!(e.t_sc > 400.0);
                    assert_eq!(e.phase, Phase::Dark);
                    assert_ne!(e.channel, ChannelKind::FluorescentGamma);
                    assert!(collapse(&graph, &e).is_ok());
                }
                Sample::NoEventBefore(_) => panic!("expected an event"),
            }
        }
    }
}
