//! Domain types shared by every stage of the simulator: the physical
//! parameter set, amplitude snapshots and the three ready channels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rejected parameter sets. Every variant names the violated constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("invalid regime: weak_decay ({weak}) must be smaller than strong_decay ({strong})")]
    InvalidRegime { weak: f64, strong: f64 },
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("perturbation violated: |{field}| = {modulus} must be < 1")]
    PerturbationViolation { field: &'static str, modulus: f64 },
    #[error("photon field depleted: {field} must be >= 1")]
    PhotonDepleted { field: &'static str },
    #[error("{field} = {value} outside {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// Physical constants of the driven three-level atom plus the two numeric
/// knobs used by the stochastic engine.
///
/// Times and rates are in whatever unit the caller picks; all rates are per
/// that unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Rabi frequency of the 0-1 drive (rad per unit time).
    pub rabi_frequency: f64,
    /// Fast decay constant of the strong 0-1 interaction.
    pub strong_decay: f64,
    /// Slow decay constant of the three-state resonance.
    pub weak_decay: f64,
    /// Resonance amplitude carried by `a0` and `a1`.
    pub resonance_a: Complex64,
    /// Resonance amplitude carried by `a2`.
    pub resonance_b: Complex64,
    /// Strong (0-1) photons left in the laser field.
    pub strong_photons: u64,
    /// Weak (0-2) photons left in the laser field.
    pub weak_photons: u64,
    /// Normalized current at or below which a ready channel is a phantom.
    pub phantom_epsilon: f64,
    /// Per-step probability cap of the fixed-step reference sampler.
    pub max_hazard_step: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            rabi_frequency: 1.0,
            strong_decay: 0.1,
            weak_decay: 0.001,
            resonance_a: Complex64::new(0.0, 0.05),
            resonance_b: Complex64::new(0.05, 0.0),
            strong_photons: 1_000_000,
            weak_photons: 1_000_000,
            phantom_epsilon: 1e-12,
            max_hazard_step: 0.01,
        }
    }
}

impl SystemParams {
    /// Same parameters with the resonance switched off (`A = B = 0`).
    pub fn without_resonance(self) -> Self {
        Self {
            resonance_a: Complex64::new(0.0, 0.0),
            resonance_b: Complex64::new(0.0, 0.0),
            ..self
        }
    }

    /// True when neither reset channel can ever carry current.
    pub fn resonance_absent(&self) -> bool {
        self.resonance_a.norm_sqr() == 0.0 && self.resonance_b.norm_sqr() == 0.0
    }

    pub fn validate(self) -> Result<Self, ParamError> {
        validate_params(self)
    }
}

/// Checks every invariant of [`SystemParams`] and hands the value back
/// untouched when they all hold.
pub fn validate_params(raw: SystemParams) -> Result<SystemParams, ParamError> {
    for (field, value) in [
        ("rabi_frequency", raw.rabi_frequency),
        ("strong_decay", raw.strong_decay),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ParamError::NonPositive { field, value });
        }
    }
    if !(raw.weak_decay >= 0.0 && raw.weak_decay.is_finite()) {
        return Err(ParamError::OutOfRange {
            field: "weak_decay",
            value: raw.weak_decay,
            range: "[0, strong_decay)",
        });
    }
    if raw.weak_decay >= raw.strong_decay {
        return Err(ParamError::InvalidRegime {
            weak: raw.weak_decay,
            strong: raw.strong_decay,
        });
    }
    for (field, amp) in [("A", raw.resonance_a), ("B", raw.resonance_b)] {
        let modulus = amp.norm();
        if !(modulus < 1.0) {
            return Err(ParamError::PerturbationViolation { field, modulus });
        }
    }
    if raw.strong_photons < 1 {
        return Err(ParamError::PhotonDepleted {
            field: "strong_photons",
        });
    }
    if raw.weak_photons < 1 {
        return Err(ParamError::PhotonDepleted {
            field: "weak_photons",
        });
    }
    if !(raw.phantom_epsilon >= 0.0 && raw.phantom_epsilon.is_finite()) {
        return Err(ParamError::OutOfRange {
            field: "phantom_epsilon",
            value: raw.phantom_epsilon,
            range: "[0, inf)",
        });
    }
    if !(raw.max_hazard_step > 0.0 && raw.max_hazard_step <= 0.1) {
        return Err(ParamError::OutOfRange {
            field: "max_hazard_step",
            value: raw.max_hazard_step,
            range: "(0, 0.1]",
        });
    }
    Ok(raw)
}

/// Amplitudes `(a0, a1, a2)` at time `t` since the last reset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeVector {
    pub a0: Complex64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub t: f64,
}

impl AmplitudeVector {
    /// Surviving norm `|a0|² + |a1|² + |a2|²`.
    pub fn norm(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr() + self.a2.norm_sqr()
    }
}

/// The two-state Rabi oscillation and the radiationless three-state
/// resonance, kept apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSplit {
    pub rabi_a0: Complex64,
    pub rabi_a1: Complex64,
    pub res_a0: Complex64,
    pub res_a1: Complex64,
    pub res_a2: Complex64,
    pub t: f64,
}

impl AmplitudeSplit {
    pub fn recombine(&self) -> AmplitudeVector {
        AmplitudeVector {
            a0: self.rabi_a0 + self.res_a0,
            a1: self.rabi_a1 + self.res_a1,
            a2: self.res_a2,
            t: self.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhotonKind {
    /// Photon of the strong 0-1 field.
    StrongGamma,
    /// Photon of the weak 0-2 field.
    WeakGammaPrime,
}

impl PhotonKind {
    pub fn label(self) -> &'static str {
        match self {
            PhotonKind::StrongGamma => "gamma",
            PhotonKind::WeakGammaPrime => "gamma_prime",
        }
    }
}

/// The three ready components a cycle can collapse onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    /// Spontaneous emission out of the Rabi row.
    FluorescentGamma,
    /// Irreversible leak of the resonance `a1` part.
    ResetGamma,
    /// Irreversible leak of the resonance `a2` part.
    ResetGammaPrime,
}

impl ChannelKind {
    /// Fixed order; also the tie-breaking order of channel selection.
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::FluorescentGamma,
        ChannelKind::ResetGamma,
        ChannelKind::ResetGammaPrime,
    ];

    pub fn photon(self) -> PhotonKind {
        match self {
            ChannelKind::FluorescentGamma | ChannelKind::ResetGamma => PhotonKind::StrongGamma,
            ChannelKind::ResetGammaPrime => PhotonKind::WeakGammaPrime,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::FluorescentGamma => "fluorescent_gamma",
            ChannelKind::ResetGamma => "reset_gamma",
            ChannelKind::ResetGammaPrime => "reset_gamma_prime",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A ready component together with its (normalized) inflow current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadyChannel {
    pub kind: ChannelKind,
    pub is_phantom: bool,
    pub inflow_current: f64,
}

impl ReadyChannel {
    /// Builds a channel; the phantom flag is derived from `epsilon`, never
    /// set independently.
    pub fn new(kind: ChannelKind, inflow_current: f64, epsilon: f64) -> Self {
        let inflow_current = inflow_current.max(0.0);
        Self {
            kind,
            is_phantom: inflow_current <= epsilon,
            inflow_current,
        }
    }
}
