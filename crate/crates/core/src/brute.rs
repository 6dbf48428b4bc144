//! Exhaustive enumeration of tier assignments on a fixed topology and
//! placement, as a global-optimum reference for small instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    validate_design, Design, LinkTier, ProcessParams, RouterConfig, StageKind, StageTier, TrafficMatrix,
};
use crate::route::{evaluate, CostModel, EvalResult, RoutingTable, Usage};

/// Largest `3^stages * 2^links` the enumerator accepts.
pub const MAX_ASSIGNMENTS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteResult {
    pub best: Design,
    pub best_eval: EvalResult,
    /// Assignments satisfying tier compatibility.
    pub valid: u64,
    /// `3^stages * 2^links`.
    pub total: u64,
}

pub fn search_space_size(d: &Design) -> u128 {
    let stages = 3 * d.topology.num_routers() as u32;
    let links = d.topology.links.len() as u32;
    3u128.checked_pow(stages).unwrap_or(u128::MAX).saturating_mul(2u128.checked_pow(links).unwrap_or(u128::MAX))
}

/// Enumerates every tier assignment of `d`'s topology and placement and
/// returns the minimum-EDP valid one. Ties keep the first in enumeration order.
pub fn brute_force(d: &Design, tm: &TrafficMatrix, pp: &ProcessParams, rc: &RouterConfig) -> Result<BruteResult> {
    let n = d.topology.num_routers();
    if n < 2 {
        return Err(Error::InvalidParam("brute force needs at least 2 routers".into()));
    }
    let total = search_space_size(d);
    if total > MAX_ASSIGNMENTS {
        return Err(Error::Infeasible(format!(
            "{total} tier assignments exceed the limit of {MAX_ASSIGNMENTS}"
        )));
    }
    let report = validate_design(d);
    if !report.ok() {
        return Err(Error::Invalid(report));
    }
    let routing = RoutingTable::build(d)?;
    let usage = Usage::compute(&routing, &d.topology.placement, d.topology.links.len(), tm);
    let degrees = d.topology.degrees();
    let model = CostModel::new(*pp, *rc, d.topology.max_ports.max(degrees.iter().max().copied().unwrap_or(0) + 1))?;

    let n_links = d.topology.links.len();
    let mut work = d.clone();
    let mut best: Option<(f64, Design)> = None;
    let mut valid = 0u64;
    let mut digits = vec![0usize; 3 * n];

    for mask in 0u64..(1u64 << n_links) {
        for (u, tier) in work.tiers.link.iter_mut().enumerate() {
            *tier = if mask >> u & 1 == 1 { LinkTier::Top } else { LinkTier::Bottom };
        }
        // Port stages of a router must be compatible with each attached link.
        let mut has = vec![[false; 2]; n];
        for (l, &tier) in d.topology.links.iter().zip(&work.tiers.link) {
            has[l.a][tier as usize] = true;
            has[l.b][tier as usize] = true;
        }
        digits.iter_mut().for_each(|x| *x = 0);
        loop {
            let mut ok = true;
            for r in 0..n {
                for kind in StageKind::ALL {
                    let tier = StageTier::ALL[digits[3 * r + kind.index()]];
                    work.tiers.stage[r][kind.index()] = tier;
                    if kind.is_port_stage() {
                        ok &= !(has[r][LinkTier::Top as usize] && !tier.compatible_with(LinkTier::Top));
                        ok &= !(has[r][LinkTier::Bottom as usize] && !tier.compatible_with(LinkTier::Bottom));
                    }
                }
            }
            if ok {
                valid += 1;
                let edp = model.score(&work, &degrees, &usage).edp;
                if best.as_ref().is_none_or(|(b, _)| edp < *b) {
                    best = Some((edp, work.clone()));
                }
            }
            // odometer over the 3n stage digits
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < 3 {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }

    let (_, best) = best.ok_or_else(|| Error::Infeasible("no valid tier assignment".into()))?;
    let best_eval = evaluate(&best, tm, pp, rc)?;
    Ok(BruteResult {
        best,
        best_eval,
        valid,
        total: total as u64,
    })
}
