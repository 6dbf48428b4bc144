use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_design, Design, DesignKind, Link, LinkTier, StageKind, StageTier};

/// Whether the search may choose tiers or treats them as fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    ProcessAware,
    ProcessOblivious,
}

/// Neighborhood moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Perturbation {
    SwapCores,
    MoveLink,
    CycleStageTier,
    FlipLinkTier,
}

impl Perturbation {
    /// Changes routing paths, not only per-element costs.
    pub fn changes_routing(self) -> bool {
        matches!(self, Perturbation::MoveLink)
    }

    pub fn changes_usage(self) -> bool {
        matches!(self, Perturbation::MoveLink | Perturbation::SwapCores)
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perturbation::SwapCores => "swap-cores",
            Perturbation::MoveLink => "move-link",
            Perturbation::CycleStageTier => "cycle-stage-tier",
            Perturbation::FlipLinkTier => "flip-link-tier",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveOptions {
    pub mode: SearchMode,
    /// Disables core swaps.
    pub fixed_placement: bool,
    /// Draws per call before giving up.
    pub max_retries: usize,
}

impl MoveOptions {
    pub fn new(mode: SearchMode) -> Self {
        MoveOptions {
            mode,
            fixed_placement: false,
            max_retries: 100,
        }
    }
}

/// Moves applicable to a design under the given options.
pub fn applicable_moves(d: &Design, opts: &MoveOptions) -> Vec<Perturbation> {
    let mut moves = Vec::with_capacity(4);
    if !opts.fixed_placement && d.topology.num_cores() >= 2 {
        moves.push(Perturbation::SwapCores);
    }
    if d.kind == DesignKind::SmallWorld && !d.topology.links.is_empty() {
        moves.push(Perturbation::MoveLink);
    }
    if opts.mode == SearchMode::ProcessAware {
        moves.push(Perturbation::CycleStageTier);
        if !d.topology.links.is_empty() {
            moves.push(Perturbation::FlipLinkTier);
        }
    }
    moves
}

/// Applies one randomly drawn instance of `mv`. `None` if the drawn instance
/// cannot be carried out (bridge link, no equal-length replacement).
pub fn apply_move(d: &Design, mv: Perturbation, rng: &mut impl Rng) -> Option<Design> {
    let mut out = d.clone();
    let n = d.topology.num_routers();
    match mv {
        Perturbation::SwapCores => {
            let cores = d.topology.num_cores();
            let i = rng.random_range(0..cores);
            let mut j = rng.random_range(0..cores - 1);
            if j >= i {
                j += 1;
            }
            out.topology.placement.swap(i, j);
        }
        Perturbation::CycleStageTier => {
            let r = rng.random_range(0..n);
            let s = rng.random_range(0..3);
            let current = out.tiers.stage[r][s];
            let others: Vec<StageTier> = StageTier::ALL.into_iter().filter(|&t| t != current).collect();
            set_stage_tier(&mut out, r, s, *others.choose(rng).expect("two alternatives"));
        }
        Perturbation::FlipLinkTier => {
            let u = rng.random_range(0..out.tiers.link.len());
            let tier = out.tiers.link[u].flipped();
            set_link_tier(&mut out, u, tier);
        }
        Perturbation::MoveLink => {
            let u = rng.random_range(0..d.topology.links.len());
            let new = *link_move_candidates(d, u).choose(rng)?;
            out = move_link(d, u, new);
        }
    }
    Some(out)
}

/// Equal-length replacements for link `u` that respect the port limit.
/// Empty when `u` is a bridge.
pub fn link_move_candidates(d: &Design, u: usize) -> Vec<Link> {
    let t = &d.topology;
    if t.is_bridge(u) {
        return Vec::new();
    }
    let n = t.num_routers();
    let old = t.links[u];
    let mut degrees = t.degrees();
    degrees[old.a] -= 1;
    degrees[old.b] -= 1;
    let cap = t.max_ports.saturating_sub(1);
    let mut linked = vec![false; n * n];
    for l in &t.links {
        linked[l.a * n + l.b] = true;
        linked[l.b * n + l.a] = true;
    }
    let mut candidates = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if linked[a * n + b] || degrees[a] >= cap || degrees[b] >= cap {
                continue;
            }
            let l = t.make_link(a, b);
            if l.manhattan_len == old.manhattan_len {
                candidates.push(l);
            }
        }
    }
    candidates
}

/// Replaces link `u` by `new`, keeping its tier when the new endpoints allow it.
pub fn move_link(d: &Design, u: usize, new: Link) -> Design {
    let mut out = d.clone();
    out.topology.links[u] = new;
    let fits = |tier: LinkTier| {
        [new.a, new.b].iter().all(|&r| {
            [StageKind::Vca, StageKind::Swa]
                .iter()
                .all(|&s| d.tiers.stage_tier(r, s).compatible_with(tier))
        })
    };
    let kept = d.tiers.link[u];
    out.tiers.link[u] = if fits(kept) {
        kept
    } else if fits(kept.flipped()) {
        kept.flipped()
    } else {
        LinkTier::Bottom
    };
    out
}

/// Sets one stage tier. Attached links that the new tier cannot drive are
/// flipped, and port stages at their far ends repaired to match.
pub fn set_stage_tier(d: &mut Design, router: usize, stage: usize, tier: StageTier) {
    d.tiers.stage[router][stage] = tier;
    if !StageKind::ALL[stage].is_port_stage() {
        return;
    }
    for u in 0..d.topology.links.len() {
        let l = d.topology.links[u];
        if (l.a == router || l.b == router) && !tier.compatible_with(d.tiers.link[u]) {
            let flipped = d.tiers.link[u].flipped();
            d.tiers.link[u] = flipped;
            repair_ports(d, l.a, flipped);
            repair_ports(d, l.b, flipped);
        }
    }
}

/// Sets one link tier and moves incompatible endpoint port stages to MT.
pub fn set_link_tier(d: &mut Design, link: usize, tier: LinkTier) {
    d.tiers.link[link] = tier;
    let l = d.topology.links[link];
    repair_ports(d, l.a, tier);
    repair_ports(d, l.b, tier);
}

/// Moves port stages of `router` that cannot drive a `link` tier link to MT.
fn repair_ports(d: &mut Design, router: usize, link: LinkTier) {
    for kind in [StageKind::Vca, StageKind::Swa] {
        let t = &mut d.tiers.stage[router][kind.index()];
        if !t.compatible_with(link) {
            *t = StageTier::Mt;
        }
    }
}

/// Draws a valid neighbor of `d`: picks an applicable move uniformly, applies
/// it, and re-draws if the result fails validation.
pub fn perturb(d: &Design, rng: &mut impl Rng, opts: &MoveOptions) -> Result<(Design, Perturbation)> {
    let moves = applicable_moves(d, opts);
    if moves.is_empty() {
        return Err(Error::NoFeasibleNeighbor(0));
    }
    for _ in 0..opts.max_retries {
        let mv = *moves.choose(rng).expect("non-empty");
        if let Some(candidate) = apply_move(d, mv, rng) {
            if validate_design(&candidate).ok() {
                return Ok((candidate, mv));
            }
        }
    }
    Err(Error::NoFeasibleNeighbor(opts.max_retries))
}
