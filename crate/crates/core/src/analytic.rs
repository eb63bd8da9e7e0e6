//! Closed-form amplitudes of the driven three-level atom and the probability
//! currents derived from them.
//!
//! Between resets the amplitudes are
//!
//! ```text
//! a0(t) = cos(Ωt) e^{-βt} + A e^{iΩt} (e^{-βt} - e^{-λt})
//! a1(t) = i sin(Ωt) e^{-βt} + A e^{iΩt} (e^{-βt} - e^{-λt})
//! a2(t) =                   -i B e^{iΩt} (e^{-βt} - e^{-λt})
//! ```
//!
//! The surviving norm `N(t)` never involves the Rabi phase. Writing
//! `q = e^{-(β-λ)t}`, `c = 2|A|² + |B|²` and `a = Re A`,
//!
//! ```text
//! N(t) = e^{-2λt} G(q),   G(q) = q² + c (1-q)² - 2a q (1-q)
//! ```
//!
//! The total probability current leaving the cycle is `-dN/dt`. It is shared
//! between the three ready channels: the Rabi row loses `2β e^{-2βt}`
//! towards the fluorescent channel, the resonance (plus its interference
//! with the Rabi row) carries the rest. While the resonance is still
//! filling, that remainder is negative and is taken out of the fluorescent
//! share; once it drains, it feeds the two reset channels in the ratio
//! `2β|A|² : 2λ|B|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AmplitudeSplit, AmplitudeVector, ChannelKind, SystemParams};
use crate::quadrature::{Quadrature, QuadratureError};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AnalyticError {
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("bad interval [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error(transparent)]
    QuadratureFailure(#[from] QuadratureError),
}

/// Raw (un-normalized) currents into the three ready channels at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCurrents {
    pub j_fluor: f64,
    pub j_reset_gamma: f64,
    pub j_reset_gamma_prime: f64,
    pub norm: f64,
    pub t: f64,
}

impl ChannelCurrents {
    pub fn total(&self) -> f64 {
        self.j_fluor + self.j_reset_gamma + self.j_reset_gamma_prime
    }

    pub fn get(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::FluorescentGamma => self.j_fluor,
            ChannelKind::ResetGamma => self.j_reset_gamma,
            ChannelKind::ResetGammaPrime => self.j_reset_gamma_prime,
        }
    }

    /// Total current over surviving norm.
    pub fn hazard(&self) -> f64 {
        if self.norm > 0.0 {
            self.total() / self.norm
        } else {
            0.0
        }
    }
}

fn check_time(t: f64) -> Result<(), AnalyticError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::NegativeTime(t))
    }
}

pub fn amplitudes(p: &SystemParams, t: f64) -> Result<AmplitudeVector, AnalyticError> {
    Ok(split(p, t)?.recombine())
}

pub fn split(p: &SystemParams, t: f64) -> Result<AmplitudeSplit, AnalyticError> {
    check_time(t)?;
    let phase = p.rabi_frequency * t;
    let rabi = (-p.strong_decay * t).exp();
    let bracket = rabi - (-p.weak_decay * t).exp();
    let resonance = Complex64::from_polar(bracket, phase);
    let (sin, cos) = phase.sin_cos();
    Ok(AmplitudeSplit {
        rabi_a0: Complex64::new(cos * rabi, 0.0),
        rabi_a1: Complex64::new(0.0, sin * rabi),
        res_a0: p.resonance_a * resonance,
        res_a1: p.resonance_a * resonance,
        res_a2: -Complex64::i() * p.resonance_b * resonance,
        t,
    })
}

/// `q`, `G(q)` and `G'(q)` for the norm factorization in the module docs.
#[derive(Debug, Clone, Copy)]
struct NormShape {
    q: f64,
    g: f64,
    dg: f64,
}

fn norm_shape(p: &SystemParams, t: f64) -> NormShape {
    let c = 2.0 * p.resonance_a.norm_sqr() + p.resonance_b.norm_sqr();
    let a = p.resonance_a.re;
    let q = (-(p.strong_decay - p.weak_decay) * t).exp();
    let one_q = 1.0 - q;
    NormShape {
        q,
        g: q * q + c * one_q * one_q - 2.0 * a * q * one_q,
        dg: 2.0 * q - 2.0 * c * one_q - 2.0 * a * (1.0 - 2.0 * q),
    }
}

/// `ln N(t)` from the closed form. Stays finite long after `N` itself
/// underflows.
pub fn log_norm(p: &SystemParams, t: f64) -> f64 {
    if p.resonance_absent() {
        return -2.0 * p.strong_decay * t;
    }
    let s = norm_shape(p, t);
    -2.0 * p.weak_decay * t + s.g.ln()
}

/// Surviving norm from the closed form.
pub fn norm(p: &SystemParams, t: f64) -> f64 {
    log_norm(p, t).exp()
}

/// Normalized currents `j/N` in [`ChannelKind::ALL`] order.
pub fn normalized_currents(p: &SystemParams, t: f64) -> [f64; 3] {
    let beta = p.strong_decay;
    let lambda = p.weak_decay;
    let (total, rabi) = if p.resonance_absent() {
        (2.0 * beta, 2.0 * beta)
    } else {
        let s = norm_shape(p, t);
        (
            2.0 * lambda + (beta - lambda) * s.q * s.dg / s.g,
            2.0 * beta * s.q * s.q / s.g,
        )
    };
    if !(total > 0.0) {
        return [0.0; 3];
    }
    let resonance = total - rabi;
    let mut fluor = rabi + resonance.min(0.0);
    let drained = resonance.max(0.0);
    let w_gamma = beta * p.resonance_a.norm_sqr();
    let w_prime = lambda * p.resonance_b.norm_sqr();
    let w = w_gamma + w_prime;
    if w > 0.0 {
        [fluor, drained * w_gamma / w, drained * w_prime / w]
    } else {
        fluor += drained;
        [fluor, 0.0, 0.0]
    }
}

/// Instantaneous hazard `h(t) = Σj / N = -d ln N/dt`.
pub fn hazard(p: &SystemParams, t: f64) -> f64 {
    normalized_currents(p, t).iter().sum()
}

/// Hazard restricted to the two reset channels.
pub fn reset_hazard(p: &SystemParams, t: f64) -> f64 {
    let [_, g, gp] = normalized_currents(p, t);
    g + gp
}

pub fn currents(p: &SystemParams, t: f64) -> Result<ChannelCurrents, AnalyticError> {
    let n = amplitudes(p, t)?.norm();
    let [f, g, gp] = normalized_currents(p, t);
    Ok(ChannelCurrents {
        j_fluor: f * n,
        j_reset_gamma: g * n,
        j_reset_gamma_prime: gp * n,
        norm: n,
        t,
    })
}

/// `∫ h dt` over `[t_a, t_b]` by adaptive Simpson.
pub fn integrated_hazard(p: &SystemParams, t_a: f64, t_b: f64) -> Result<f64, AnalyticError> {
    if !(t_a >= 0.0 && t_b >= t_a && t_b.is_finite()) {
        return Err(AnalyticError::BadInterval(t_a, t_b));
    }
    let quad = Quadrature {
        max_panel: std::f64::consts::PI / (20.0 * p.rabi_frequency),
        ..Quadrature::default()
    };
    Ok(quad.integrate(|t| hazard(p, t), t_a, t_b)?)
}

/// `∫ h dt` over `[t_a, t_b]` through the closed form `ln N(t_a) - ln N(t_b)`.
pub fn cumulative_hazard(p: &SystemParams, t_a: f64, t_b: f64) -> f64 {
    log_norm(p, t_a) - log_norm(p, t_b)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // reference values keep all their digits
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference() -> SystemParams {
        SystemParams::default()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn starts_in_ground_state() {
        let v = amplitudes(&reference(), 0.0).unwrap();
        assert_eq!(v.a0, Complex64::new(1.0, 0.0));
        assert_eq!(v.a1, Complex64::new(0.0, 0.0));
        assert_eq!(v.a2.norm(), 0.0);
    }

    #[test]
    fn quarter_rabi_period_without_damping() {
        // β = 0 is only reachable here, validation would reject it
        let p = SystemParams {
            strong_decay: 0.0,
            weak_decay: 0.0,
            rabi_frequency: 2.0,
            ..reference()
        }
        .without_resonance();
        let v = amplitudes(&p, PI / (2.0 * p.rabi_frequency)).unwrap();
        assert!(close(v.a0, Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(v.a1, Complex64::new(0.0, 1.0), 1e-15));
        assert_eq!(v.a2.norm(), 0.0);
    }

    #[test]
    fn matches_high_precision_oracle() {
        // 40-digit re-evaluation of the closed form at t = 10
        let v = amplitudes(&reference(), 10.0).unwrap();
        let a0 = Complex64::new(-0.32560085662614342933, 0.026102273132314451675);
        let a1 = Complex64::new(-0.016923691406630483997, -0.17403190912713417037);
        let a2 = Complex64::new(0.016923691406630483997, -0.026102273132314451675);
        assert!(close(v.a0, a0, 1e-15), "{:?}", v.a0);
        assert!(close(v.a1, a1, 1e-15), "{:?}", v.a1);
        assert!(close(v.a2, a2, 1e-15), "{:?}", v.a2);
    }

    #[test]
    fn negative_time_rejected() {
        assert_eq!(
            amplitudes(&reference(), -1.0),
            Err(AnalyticError::NegativeTime(-1.0))
        );
        assert!(split(&reference(), -1e-300).is_err());
        assert!(currents(&reference(), -0.5).is_err());
    }

    #[test]
    fn split_without_resonance_has_zero_resonance() {
        let p = reference().without_resonance();
        for t in [0.0, 0.3, 7.0, 1e3] {
            let s = split(&p, t).unwrap();
            assert_eq!(s.res_a0.norm(), 0.0);
            assert_eq!(s.res_a1.norm(), 0.0);
            assert_eq!(s.res_a2.norm(), 0.0);
        }
    }

    #[test]
    fn split_at_zero() {
        let s = split(&reference(), 0.0).unwrap();
        assert_eq!(s.rabi_a0, Complex64::new(1.0, 0.0));
        assert_eq!(s.rabi_a1.norm(), 0.0);
        assert_eq!(s.res_a0.norm() + s.res_a1.norm() + s.res_a2.norm(), 0.0);
    }

    #[test]
    fn split_sums_to_amplitudes() {
        let p = reference();
        let s = split(&p, 10.0).unwrap();
        let v = amplitudes(&p, 10.0).unwrap();
        assert!(close(s.rabi_a0 + s.res_a0, v.a0, 1e-12));
        assert!(close(s.rabi_a1 + s.res_a1, v.a1, 1e-12));
        assert_eq!(s.res_a2, v.a2);
    }

    #[test]
    fn currents_match_oracle() {
        // oracle: -dN/dt by numerical differentiation of the 40-digit norm
        let c = currents(&reference(), 10.0).unwrap();
        assert!((c.j_fluor - 0.026732970798226200917).abs() < 1e-14, "{c:?}");
        assert_eq!(c.j_reset_gamma, 0.0);
        assert_eq!(c.j_reset_gamma_prime, 0.0);
        assert!((c.norm - 0.13823850321711510205).abs() < 1e-15);
    }

    #[test]
    fn currents_at_cycle_start() {
        let p = reference();
        let c = currents(&p, 0.0).unwrap();
        assert!((c.j_fluor - 2.0 * p.strong_decay).abs() < 1e-15);
        assert_eq!(c.j_reset_gamma, 0.0);
        assert_eq!(c.j_reset_gamma_prime, 0.0);
    }

    #[test]
    fn normalized_currents_in_dark_regime() {
        // 40-digit oracle at τ = 50 (resonance draining) and τ = 2000
        let n = normalized_currents(&reference(), 50.0);
        assert!((n[0] / 0.001348002714 - 1.0).abs() < 1e-9, "{n:?}");
        assert!((n[1] / 0.0005777425267 - 1.0).abs() < 1e-9);
        assert!((n[2] / 5.777425267e-6 - 1.0).abs() < 1e-9);
        let n = normalized_currents(&reference(), 2000.0);
        assert!(n[0] < 1e-170);
        assert!((n[1] / 0.00198019802 - 1.0).abs() < 1e-9);
        assert!((n[2] / 1.98019802e-5 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_reset_current_without_resonance() {
        let p = reference().without_resonance();
        for k in 0..200 {
            let c = currents(&p, k as f64 * 3.7).unwrap();
            assert_eq!(c.j_reset_gamma, 0.0);
            assert_eq!(c.j_reset_gamma_prime, 0.0);
        }
    }

    #[test]
    fn closed_form_norm_matches_amplitudes() {
        for p in [
            reference(),
            SystemParams {
                resonance_a: Complex64::new(0.3, -0.2),
                resonance_b: Complex64::new(-0.1, 0.4),
                ..reference()
            },
        ] {
            for k in 0..400 {
                let t = k as f64 * 0.73;
                let direct = amplitudes(&p, t).unwrap().norm();
                let closed = norm(&p, t);
                assert!(
                    (direct / closed - 1.0).abs() < 1e-12,
                    "t={t}: {direct} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn integrated_hazard_empty_interval() {
        assert_eq!(integrated_hazard(&reference(), 4.0, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn integrated_hazard_bad_interval() {
        assert!(matches!(
            integrated_hazard(&reference(), 5.0, 4.0),
            Err(AnalyticError::BadInterval(..))
        ));
        assert!(matches!(
            integrated_hazard(&reference(), -1.0, 4.0),
            Err(AnalyticError::BadInterval(..))
        ));
    }

    #[test]
    fn integrated_hazard_without_resonance_is_linear() {
        let p = reference().without_resonance();
        for big_t in [1.0, 13.0, 250.0] {
            let v = integrated_hazard(&p, 0.0, big_t).unwrap();
            assert!((v - 2.0 * p.strong_decay * big_t).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn integrated_hazard_matches_oracle() {
        // 40-digit quadrature of the same hazard, confirmed by -ln N(50)
        let v = integrated_hazard(&reference(), 0.0, 50.0).unwrap();
        assert!((v / 5.000306659144025279 - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn quadrature_and_closed_form_agree() {
        let p = reference();
        for (a, b) in [(0.0, 1.0), (3.0, 47.0), (40.0, 60.0), (100.0, 5000.0)] {
            let quad = integrated_hazard(&p, a, b).unwrap();
            let closed = cumulative_hazard(&p, a, b);
            assert!(
                (quad / closed - 1.0).abs() < 1e-9,
                "[{a},{b}] {quad} vs {closed}"
            );
        }
    }

    #[test]
    fn fluorescence_dies_before_resets() {
        let p = reference();
        let early = currents(&p, 60.0).unwrap();
        let late = currents(&p, 600.0).unwrap();
        let ratio_early = early.j_fluor / (early.j_reset_gamma + early.j_reset_gamma_prime);
        let ratio_late = late.j_fluor / (late.j_reset_gamma + late.j_reset_gamma_prime);
        assert!(ratio_late < ratio_early * 1e-20);
    }
}
