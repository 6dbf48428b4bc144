use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inter-tier process variation and the calibration constants of the
/// delay/energy models. Every field can be overridden from the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessParams {
    /// Top-tier transistor on-current degradation.
    pub alpha: f64,
    /// Bottom-tier tungsten link delay penalty.
    pub beta: f64,
    /// Bottom-tier tungsten link energy penalty; `None` means "same as beta".
    pub beta_energy: Option<f64>,
    /// Multitier FO4 delay improvement.
    pub gamma: f64,
    /// Number of device tiers.
    pub tiers: u32,
    /// FO4 ratio slope per unit alpha.
    pub fo4_slope: f64,
    /// Logic capacitance slope per unit alpha.
    pub cap_slope: f64,
    /// Interconnect share of 2D stage capacitance, indexed by `StageKind`.
    pub wire_frac: [f64; 3],
    pub t_cu_ps_per_mm: f64,
    pub e_cu_pj_per_mm: f64,
    pub fo4_ps: f64,
    /// Energy scale of the baseline stage-energy proxy.
    pub stage_energy_pj: f64,
}

impl Default for ProcessParams {
    fn default() -> Self {
        ProcessParams {
            alpha: 0.0,
            beta: 0.0,
            beta_energy: None,
            gamma: 0.0,
            tiers: 2,
            fo4_slope: 1.8,
            cap_slope: 1.0,
            wire_frac: [0.3, 0.3, 0.7],
            t_cu_ps_per_mm: 100.0,
            e_cu_pj_per_mm: 3.0,
            fo4_ps: 15.0,
            stage_energy_pj: 1.0,
        }
    }
}

impl ProcessParams {
    pub fn with_variation(mut self, alpha: f64, beta: f64, gamma: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self.gamma = gamma;
        self
    }

    /// The same calibration with no transistor or interconnect degradation.
    pub fn ideal(mut self) -> Self {
        self.alpha = 0.0;
        self.beta = 0.0;
        self.beta_energy = None;
        self
    }

    pub fn beta_e(&self) -> f64 {
        self.beta_energy.unwrap_or(self.beta)
    }

    pub fn check(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(0.0..=0.5).contains(&self.alpha) {
            bad.push(format!("alpha {} not in [0, 0.5]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            bad.push(format!("beta {} not in [0, 1]", self.beta));
        }
        if let Some(be) = self.beta_energy {
            if !(0.0..=1.0).contains(&be) {
                bad.push(format!("beta_energy {be} not in [0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            bad.push(format!("gamma {} not in [0, 1)", self.gamma));
        }
        if self.tiers == 0 {
            bad.push("tiers must be >= 1".into());
        }
        for (i, r) in self.wire_frac.iter().enumerate() {
            if !(0.0..=1.0).contains(r) {
                bad.push(format!("wire_frac[{i}] {r} not in [0, 1]"));
            }
        }
        let positive = [
            ("fo4_slope", self.fo4_slope),
            ("cap_slope", self.cap_slope),
            ("t_cu_ps_per_mm", self.t_cu_ps_per_mm),
            ("e_cu_pj_per_mm", self.e_cu_pj_per_mm),
            ("fo4_ps", self.fo4_ps),
            ("stage_energy_pj", self.stage_energy_pj),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} must be positive, got {v}"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParam(bad.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ProcessParams::default().check().unwrap();
    }

    #[test]
    fn out_of_range_rejected() {
        let p = ProcessParams::default().with_variation(0.6, 0.0, 0.0);
        assert!(p.check().is_err());
        let p = ProcessParams::default().with_variation(0.1, 0.1, 1.0);
        assert!(p.check().is_err());
        let mut p = ProcessParams::default();
        p.fo4_ps = 0.0;
        assert!(p.check().is_err());
    }

    #[test]
    fn energy_penalty_defaults_to_beta() {
        let mut p = ProcessParams::default().with_variation(0.0, 0.2, 0.0);
        assert_eq!(p.beta_e(), 0.2);
        p.beta_energy = Some(0.05);
        assert_eq!(p.beta_e(), 0.05);
    }
}
