//! Router stage delay and energy, process-variation transforms, and link costs.
//!
//! Stage delays follow the virtual-channel router model in FO4 units. Top-tier
//! logic is slowed by the FO4 ratio and carries extra logic capacitance;
//! multitier stages split logic evenly across the two tiers and shrink their
//! interconnect by `1/sqrt(T)`. Bottom-tier links are tungsten and pay the
//! `beta` penalty, top-tier links are copper.

pub use crate::model::StageKind;
use crate::model::{LinkTier, ProcessParams, StageTier};
use crate::error::{Error, Result};

/// Cost of one stage of one router.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageCost {
    pub delay_fo4: f64,
    /// Multiplier on the 2D baseline stage energy.
    pub energy_rel: f64,
    pub energy_abs_pj: f64,
}

impl StageCost {
    pub fn delay_ps(&self, pp: &ProcessParams) -> f64 {
        self.delay_fo4 * pp.fo4_ps
    }
}

/// Per-millimetre link delay and energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCost {
    pub delay_ps_per_mm: f64,
    pub energy_pj_per_mm: f64,
}

fn log_base(x: f64, base: f64) -> f64 {
    x.ln() / base.ln()
}

/// 2D stage delay in FO4 for a router with `p` ports, `v` virtual channels and `w`-bit flits.
pub fn stage_delay_2d(kind: StageKind, p: u32, v: u32, w: u32) -> Result<f64> {
    if p < 2 || v < 1 || w < 1 || (p as u64) * (v as u64) <= 1 {
        return Err(Error::InvalidParam(format!(
            "stage delay needs p >= 2, v >= 1, w >= 1 (got p={p}, v={v}, w={w})"
        )));
    }
    let (p, v, w) = (p as f64, v as f64, w as f64);
    Ok(match kind {
        StageKind::Vca => 33.0 * log_base(p * v, 4.0) + 125.0 / 6.0,
        StageKind::Swa => 28.0 * log_base(p, 4.0) + 35.0 / 2.0,
        StageKind::Xbar => 9.0 * log_base(w * (p / 2.0).ceil(), 8.0) + 6.0 * p.log2() + 6.0,
    })
}

/// Top-tier to 2D FO4 delay ratio.
pub fn fo4_ratio(pp: &ProcessParams) -> f64 {
    1.0 + pp.fo4_slope * pp.alpha
}

/// Top-tier to 2D logic capacitance ratio.
pub fn cap_ratio_logic(pp: &ProcessParams) -> f64 {
    1.0 + pp.cap_slope * pp.alpha
}

/// Fraction of 2D interconnect capacitance left in a multitier stage.
pub fn mt_wire_factor(tiers: u32) -> f64 {
    1.0 / (tiers as f64).sqrt()
}

/// Baseline 2D stage energy in picojoules.
pub fn stage_energy_baseline(kind: StageKind, p: u32, v: u32, w: u32, pp: &ProcessParams) -> f64 {
    let (p, v, w) = (p as f64, v as f64, w as f64);
    pp.stage_energy_pj
        * match kind {
            StageKind::Vca => p * v,
            StageKind::Swa => p * p,
            StageKind::Xbar => w * p * p / 32.0,
        }
}

/// Delay and energy multiplier of a stage placed on `tier`, given its 2D delay.
pub fn tier_transform(kind: StageKind, tier: StageTier, t2d: f64, pp: &ProcessParams) -> Result<(f64, f64)> {
    let rho = pp.wire_frac[kind.index()];
    match tier {
        StageTier::Bt => Ok((t2d, 1.0)),
        StageTier::Tt | StageTier::Mt if pp.tiers < 2 => Err(Error::InvalidParam(format!(
            "{tier} stages need at least two tiers, got {}",
            pp.tiers
        ))),
        StageTier::Tt => Ok((
            fo4_ratio(pp) * t2d,
            (1.0 - rho) * cap_ratio_logic(pp) + rho,
        )),
        StageTier::Mt => {
            let delay = (1.0 - pp.gamma) * (0.5 * t2d + 0.5 * fo4_ratio(pp) * t2d);
            let logic = 1.0 + pp.cap_slope * pp.alpha / 2.0;
            Ok((delay, (1.0 - rho) * logic + rho * mt_wire_factor(pp.tiers)))
        }
    }
}

pub fn stage_cost(
    kind: StageKind,
    tier: StageTier,
    p: u32,
    v: u32,
    w: u32,
    pp: &ProcessParams,
) -> Result<StageCost> {
    let t2d = stage_delay_2d(kind, p, v, w)?;
    let (delay_fo4, energy_rel) = tier_transform(kind, tier, t2d, pp)?;
    Ok(StageCost {
        delay_fo4,
        energy_rel,
        energy_abs_pj: energy_rel * stage_energy_baseline(kind, p, v, w, pp),
    })
}

pub fn link_cost(tier: LinkTier, pp: &ProcessParams) -> LinkCost {
    match tier {
        LinkTier::Top => LinkCost {
            delay_ps_per_mm: pp.t_cu_ps_per_mm,
            energy_pj_per_mm: pp.e_cu_pj_per_mm,
        },
        LinkTier::Bottom => LinkCost {
            delay_ps_per_mm: pp.t_cu_ps_per_mm * (1.0 + pp.beta),
            energy_pj_per_mm: pp.e_cu_pj_per_mm * (1.0 + pp.beta_e()),
        },
    }
}
