//! Flat run configuration, loadable from TOML and overridable per key.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use shelving_core::ensemble::EnsembleConfig;
use shelving_core::trajectory::{DEFAULT_EVENT_BUDGET, DEFAULT_GAP_FACTOR};
use shelving_core::SystemParams;

use crate::CliError;

/// Everything a run needs. Missing keys fall back to the defaults, unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rabi_frequency: f64,
    pub strong_decay: f64,
    pub weak_decay: f64,
    pub resonance_a_re: f64,
    pub resonance_a_im: f64,
    pub resonance_b_re: f64,
    pub resonance_b_im: f64,
    pub strong_photons: u64,
    pub weak_photons: u64,
    pub phantom_epsilon: f64,
    pub max_hazard_step: f64,

    pub seed: u64,
    pub count: u64,
    pub first_index: u64,
    pub t_end: f64,
    pub gap_factor: f64,
    pub workers: usize,
    pub event_budget: u64,

    /// Last time of the `analytic` table.
    pub analytic_t_max: f64,
    /// Rows of the `analytic` table, evenly spaced from 0.
    pub analytic_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        let e = EnsembleConfig::default();
        Self {
            rabi_frequency: p.rabi_frequency,
            strong_decay: p.strong_decay,
            weak_decay: p.weak_decay,
            resonance_a_re: p.resonance_a.re,
            resonance_a_im: p.resonance_a.im,
            resonance_b_re: p.resonance_b.re,
            resonance_b_im: p.resonance_b.im,
            strong_photons: p.strong_photons,
            weak_photons: p.weak_photons,
            phantom_epsilon: p.phantom_epsilon,
            max_hazard_step: p.max_hazard_step,
            seed: e.master_seed,
            count: e.count,
            first_index: e.first_index,
            t_end: e.t_end,
            gap_factor: DEFAULT_GAP_FACTOR,
            workers: 1,
            event_budget: DEFAULT_EVENT_BUDGET,
            analytic_t_max: 200.0,
            analytic_points: 21,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot write config: {e}")))
    }

    /// Applies one `key=value` override. The value is read as a TOML value,
    /// so numbers keep their type and bare words are taken as strings.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        let key = key.trim();
        let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        {
            Ok(mut t) => t.remove("v").expect("parsed table holds the key"),
            Err(_) => toml::Value::String(raw.trim().to_owned()),
        };
        let mut table =
            toml::Table::try_from(&*self).map_err(|e| CliError::Config(e.to_string()))?;
        if !table.contains_key(key) {
            return Err(CliError::Config(format!("unknown config key `{key}`")));
        }
        // integer literals are fine where a float is expected
        let value = match (&table[key], value) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        };
        table.insert(key.to_owned(), value);
        *self = table.try_into().map_err(|e: toml::de::Error| {
            CliError::Config(format!("--set {key}: {}", e.message()))
        })?;
        Ok(())
    }

    pub fn params(&self) -> Result<SystemParams, CliError> {
        SystemParams {
            rabi_frequency: self.rabi_frequency,
            strong_decay: self.strong_decay,
            weak_decay: self.weak_decay,
            resonance_a: Complex64::new(self.resonance_a_re, self.resonance_a_im),
            resonance_b: Complex64::new(self.resonance_b_re, self.resonance_b_im),
            strong_photons: self.strong_photons,
            weak_photons: self.weak_photons,
            phantom_epsilon: self.phantom_epsilon,
            max_hazard_step: self.max_hazard_step,
        }
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig, CliError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(CliError::Config(format!(
                "t_end must be positive and finite, got {}",
                self.t_end
            )));
        }
        if !(self.gap_factor > 1.0 && self.gap_factor.is_finite()) {
            return Err(CliError::Config(format!(
                "gap_factor must exceed 1, got {}",
                self.gap_factor
            )));
        }
        if self.count == 0 || self.workers == 0 || self.event_budget == 0 {
            return Err(CliError::Config(
                "count, workers and event_budget must be at least 1".into(),
            ));
        }
        Ok(EnsembleConfig {
            master_seed: self.seed,
            count: self.count,
            first_index: self.first_index,
            t_end: self.t_end,
            workers: self.workers,
            gap_factor: self.gap_factor,
            event_budget: self.event_budget,
        })
    }

    /// Evenly spaced times of the analytic table.
    pub fn analytic_times(&self) -> Result<Vec<f64>, CliError> {
        if !(self.analytic_t_max >= 0.0 && self.analytic_t_max.is_finite())
            || self.analytic_points == 0
        {
            return Err(CliError::Config(
                "analytic_t_max must be non-negative and analytic_points at least 1".into(),
            ));
        }
        let n = self.analytic_points;
        Ok((0..n)
            .map(|k| {
                if n == 1 {
                    0.0
                } else {
                    self.analytic_t_max * k as f64 / (n - 1) as f64
                }
            })
            .collect())
    }
}
