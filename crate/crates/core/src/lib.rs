//! Stochastic trajectories of fluorescence intermittency ("electron
//! shelving") in a three-level atom driven by a strong and a weak laser.
//!
//! The amplitudes between resets come from a closed form ([`analytic`]).
//! Probability current flowing into the irreversible ready components
//! drives stochastic reductions ([`nrule`]); a fluorescent ready component
//! that loses its inflow becomes a phantom and can no longer fire, which
//! is what produces the long dark periods. [`trajectory`] strings cycles
//! together and classifies bright and dark periods, [`ensemble`] pools
//! many trajectories and compares them to a quadrature oracle.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod ensemble;
pub mod model;
pub mod nrule;
pub mod quadrature;
pub mod stats;
pub mod trajectory;
pub mod validation;

pub use analytic::{amplitudes, currents, integrated_hazard, split, ChannelCurrents};
pub use ensemble::{oracle_survival, run_ensemble, EnsembleConfig, EnsembleStats};
pub use model::{
    validate_params, AmplitudeSplit, AmplitudeVector, ChannelKind, ParamError, PhotonKind,
    ReadyChannel, SystemParams,
};
pub use nrule::{
    collapse, init_graph, refresh_currents, sample_next_event, ComponentGraph, Phase,
    ReductionEvent,
};
pub use trajectory::{classify_periods, run_trajectory, EmissionRecord, Period, PeriodKind};
