use std::sync::Arc;

use log::debug;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::{ForestConfig, RegressionForest};
use super::perturb::{
    applicable_moves, link_move_candidates, move_link, perturb, set_link_tier, set_stage_tier, MoveOptions,
    Perturbation, SearchMode,
};
use crate::error::{Error, Result};
use crate::model::{
    validate_design, Design, Link, LinkTier, ProcessParams, RouterConfig, StageKind, StageTier,
    TierAssignment, TrafficMatrix,
};
use crate::route::{evaluate, features_with, CostModel, EvalResult, FeatureVector, RoutingTable, Usage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Outer iterations (Step 1 + Step 2 pairs).
    pub iter_max: usize,
    /// Consecutive non-improving proposals that end a climb.
    pub patience: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
    pub mode: SearchMode,
    /// Keep the core placement fixed (no core swaps).
    pub fixed_placement: bool,
    /// Once patience runs out, try every move instance in a fixed order and
    /// continue climbing from the first improving one.
    pub neighborhood_scan: bool,
    /// Restart Step 1 from random tiers when Step 2 cannot move.
    pub restarts: bool,
    pub max_retries: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            iter_max: 10,
            patience: 200,
            n_trees: 50,
            max_depth: 8,
            min_leaf: 5,
            seed: 0,
            mode: SearchMode::ProcessAware,
            fixed_placement: false,
            neighborhood_scan: true,
            restarts: true,
            max_retries: 100,
        }
    }
}

impl SearchConfig {
    pub fn check(&self) -> Result<()> {
        let fields = [
            ("iter_max", self.iter_max),
            ("patience", self.patience),
            ("n_trees", self.n_trees),
            ("max_depth", self.max_depth),
            ("min_leaf", self.min_leaf),
            ("max_retries", self.max_retries),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::InvalidParam(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    fn move_options(&self, mode: SearchMode) -> MoveOptions {
        MoveOptions {
            mode,
            fixed_placement: self.fixed_placement,
            max_retries: self.max_retries,
        }
    }
}

/// What is being optimized: a starting topology/placement, its traffic, and
/// the true process parameters.
#[derive(Debug, Clone)]
pub struct Problem {
    pub start: Design,
    pub traffic: TrafficMatrix,
    pub process: ProcessParams,
    pub router: RouterConfig,
}

/// A design with cached routing and per-element traffic.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub design: Design,
    routing: Arc<RoutingTable>,
    usage: Arc<Usage>,
    degrees: Arc<Vec<usize>>,
}

impl SearchState {
    pub fn new(design: Design, tm: &TrafficMatrix) -> Result<Self> {
        let report = validate_design(&design);
        if !report.ok() {
            return Err(Error::Invalid(report));
        }
        let routing = RoutingTable::build(&design)?;
        let usage = Usage::compute(&routing, &design.topology.placement, design.topology.links.len(), tm);
        Ok(SearchState {
            degrees: Arc::new(design.topology.degrees()),
            routing: Arc::new(routing),
            usage: Arc::new(usage),
            design,
        })
    }

    /// State for a neighbor produced by `mv`, reusing whatever the move leaves intact.
    fn neighbor(&self, design: Design, mv: Perturbation, tm: &TrafficMatrix) -> Result<Self> {
        if mv.changes_routing() {
            let routing = RoutingTable::build(&design)?;
            let usage = Usage::compute(&routing, &design.topology.placement, design.topology.links.len(), tm);
            Ok(SearchState {
                degrees: Arc::new(design.topology.degrees()),
                routing: Arc::new(routing),
                usage: Arc::new(usage),
                design,
            })
        } else if mv.changes_usage() {
            let usage = Usage::compute(&self.routing, &design.topology.placement, design.topology.links.len(), tm);
            Ok(SearchState {
                routing: Arc::clone(&self.routing),
                degrees: Arc::clone(&self.degrees),
                usage: Arc::new(usage),
                design,
            })
        } else {
            Ok(SearchState {
                routing: Arc::clone(&self.routing),
                degrees: Arc::clone(&self.degrees),
                usage: Arc::clone(&self.usage),
                design,
            })
        }
    }

    pub fn eval(&self, model: &CostModel) -> EvalResult {
        model.score(&self.design, &self.degrees, &self.usage)
    }

    pub fn features(&self, tm: &TrafficMatrix, model: &CostModel) -> FeatureVector {
        features_with(&self.design, &self.routing, &self.usage, &self.degrees, tm, model)
    }
}

/// Shared inputs of one search: traffic and the cost model it optimizes under.
#[derive(Debug, Clone)]
pub struct SearchContext<'a> {
    pub traffic: &'a TrafficMatrix,
    pub model: CostModel,
    pub moves: MoveOptions,
}

pub trait Objective {
    fn value(&self, s: &SearchState) -> f64;
}

/// Energy-delay product under the context's cost model.
pub struct Edp<'a>(pub &'a CostModel);

impl Objective for Edp<'_> {
    fn value(&self, s: &SearchState) -> f64 {
        s.eval(self.0).edp
    }
}

/// Forest prediction on min-max normalized features.
pub struct Surrogate<'a> {
    pub forest: RegressionForest,
    pub lo: [f64; FeatureVector::LEN],
    pub hi: [f64; FeatureVector::LEN],
    pub traffic: &'a TrafficMatrix,
    pub model: &'a CostModel,
}

fn normalize(x: &[f64; FeatureVector::LEN], lo: &[f64; FeatureVector::LEN], hi: &[f64; FeatureVector::LEN]) -> Vec<f64> {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| if h > l { (v - l) / (h - l) } else { 0.0 })
        .collect()
}

impl Objective for Surrogate<'_> {
    fn value(&self, s: &SearchState) -> f64 {
        let x = s.features(self.traffic, self.model).to_array();
        self.forest.predict(&normalize(&x, &self.lo, &self.hi))
    }
}

/// `(features, final objective of the trajectory)` rows.
#[derive(Debug, Clone, Default)]
pub struct TrainingDataset {
    pub features: Vec<[f64; FeatureVector::LEN]>,
    pub targets: Vec<f64>,
}

impl TrainingDataset {
    pub fn push(&mut self, f: FeatureVector, target: f64) {
        self.features.push(f.to_array());
        self.targets.push(target);
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Fits a forest on min-max normalized features.
    pub fn fit<'a>(&self, cfg: &ForestConfig, traffic: &'a TrafficMatrix, model: &'a CostModel) -> Result<Surrogate<'a>> {
        if self.is_empty() {
            return Err(Error::InvalidParam("empty training dataset".into()));
        }
        let mut lo = [f64::INFINITY; FeatureVector::LEN];
        let mut hi = [f64::NEG_INFINITY; FeatureVector::LEN];
        for row in &self.features {
            for k in 0..FeatureVector::LEN {
                lo[k] = lo[k].min(row[k]);
                hi[k] = hi[k].max(row[k]);
            }
        }
        let x: Vec<Vec<f64>> = self.features.iter().map(|r| normalize(r, &lo, &hi)).collect();
        let forest = RegressionForest::fit(&x, &self.targets, cfg)?;
        Ok(Surrogate {
            forest,
            lo,
            hi,
            traffic,
            model,
        })
    }
}

pub struct ClimbResult {
    /// Start followed by every accepted design, in order.
    pub trajectory: Vec<SearchState>,
    pub values: Vec<f64>,
}

impl ClimbResult {
    pub fn best(&self) -> &SearchState {
        self.trajectory.last().expect("trajectory holds the start")
    }

    pub fn best_value(&self) -> f64 {
        *self.values.last().expect("trajectory holds the start")
    }
}

#[derive(Debug, Clone, Copy)]
enum ScanMove {
    Stage(usize, usize, StageTier),
    Link(usize),
    Swap(usize, usize),
    Move(usize, Link),
}

impl ScanMove {
    fn kind(self) -> Perturbation {
        match self {
            ScanMove::Stage(..) => Perturbation::CycleStageTier,
            ScanMove::Link(_) => Perturbation::FlipLinkTier,
            ScanMove::Swap(..) => Perturbation::SwapCores,
            ScanMove::Move(..) => Perturbation::MoveLink,
        }
    }

    fn apply(self, d: &Design) -> Design {
        match self {
            ScanMove::Stage(r, s, tier) => {
                let mut c = d.clone();
                set_stage_tier(&mut c, r, s, tier);
                c
            }
            ScanMove::Link(u) => {
                let mut c = d.clone();
                set_link_tier(&mut c, u, d.tiers.link[u].flipped());
                c
            }
            ScanMove::Swap(i, j) => {
                let mut c = d.clone();
                c.topology.placement.swap(i, j);
                c
            }
            ScanMove::Move(u, new) => move_link(d, u, new),
        }
    }
}

/// Every applicable move instance, in a fixed order.
fn scan_moves(d: &Design, opts: &MoveOptions) -> Vec<ScanMove> {
    let mut out = Vec::new();
    let moves = applicable_moves(d, opts);
    if moves.contains(&Perturbation::CycleStageTier) {
        for r in 0..d.topology.num_routers() {
            for s in 0..3 {
                for tier in StageTier::ALL {
                    if tier != d.tiers.stage[r][s] {
                        out.push(ScanMove::Stage(r, s, tier));
                    }
                }
            }
        }
    }
    if moves.contains(&Perturbation::FlipLinkTier) {
        out.extend((0..d.topology.links.len()).map(ScanMove::Link));
    }
    if moves.contains(&Perturbation::SwapCores) {
        let n = d.topology.num_cores();
        for i in 0..n {
            for j in i + 1..n {
                out.push(ScanMove::Swap(i, j));
            }
        }
    }
    if moves.contains(&Perturbation::MoveLink) {
        for u in 0..d.topology.links.len() {
            out.extend(link_move_candidates(d, u).into_iter().map(|l| ScanMove::Move(u, l)));
        }
    }
    out
}

/// Strict-improvement hill climbing from `start`.
pub fn hill_climb(
    start: SearchState,
    objective: &dyn Objective,
    ctx: &SearchContext<'_>,
    cfg: &SearchConfig,
    rng: &mut impl Rng,
) -> Result<ClimbResult> {
    let mut current_value = objective.value(&start);
    let mut result = ClimbResult {
        trajectory: vec![start],
        values: vec![current_value],
    };
    if applicable_moves(&result.best().design, &ctx.moves).is_empty() {
        return Ok(result);
    }
    loop {
        let mut failures = 0;
        while failures < cfg.patience {
            let current = result.best();
            let (candidate, mv) = match perturb(&current.design, rng, &ctx.moves) {
                Ok(c) => c,
                Err(Error::NoFeasibleNeighbor(_)) => {
                    failures += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let next = current.neighbor(candidate, mv, ctx.traffic)?;
            let v = objective.value(&next);
            if v < current_value {
                current_value = v;
                result.trajectory.push(next);
                result.values.push(v);
                failures = 0;
            } else {
                failures += 1;
            }
        }
        if !cfg.neighborhood_scan {
            return Ok(result);
        }
        let current = result.best();
        let mut improved = None;
        for m in scan_moves(&current.design, &ctx.moves) {
            let candidate = m.apply(&current.design);
            if !validate_design(&candidate).ok() {
                continue;
            }
            let next = current.neighbor(candidate, m.kind(), ctx.traffic)?;
            let v = objective.value(&next);
            if v < current_value {
                improved = Some((next, v));
                break;
            }
        }
        match improved {
            Some((next, v)) => {
                current_value = v;
                result.trajectory.push(next);
                result.values.push(v);
            }
            None => return Ok(result),
        }
    }
}

/// Tiers used without process-variation awareness: every stage multitier,
/// links alternating bottom/top by ascending link id.
pub fn po_baseline(d: &Design) -> Design {
    let n = d.topology.num_routers();
    let mut out = d.clone();
    out.tiers = TierAssignment {
        stage: vec![[StageTier::Mt; 3]; n],
        link: (0..d.topology.links.len())
            .map(|u| if u % 2 == 0 { LinkTier::Bottom } else { LinkTier::Top })
            .collect(),
    };
    out
}

/// Random valid tiers: random link tiers, then port stages BT or MT where
/// all attached links are bottom and MT otherwise; crossbars BT or MT.
/// TT is never sampled since MT is at least as good in delay and energy.
pub fn random_tiers(d: &Design, rng: &mut impl Rng) -> Design {
    let mut out = d.clone();
    let n = d.topology.num_routers();
    for tier in out.tiers.link.iter_mut() {
        *tier = if rng.random_bool(0.5) { LinkTier::Top } else { LinkTier::Bottom };
    }
    let mut has_top = vec![false; n];
    for (l, &tier) in d.topology.links.iter().zip(&out.tiers.link) {
        if tier == LinkTier::Top {
            has_top[l.a] = true;
            has_top[l.b] = true;
        }
    }
    let choices = [StageTier::Bt, StageTier::Mt];
    for (r, stages) in out.tiers.stage.iter_mut().enumerate() {
        for kind in StageKind::ALL {
            stages[kind.index()] = if kind.is_port_stage() && has_top[r] {
                StageTier::Mt
            } else {
                *choices.choose(rng).expect("non-empty")
            };
        }
    }
    out
}

/// One row of the optimizer history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub step: u8,
    pub best_edp: f64,
    pub dataset_rows: usize,
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub best: Design,
    /// Best design evaluated under the true process parameters.
    pub best_eval: EvalResult,
    pub history: Vec<HistoryRow>,
}

/// The learned search loop, optimizing EDP under `model` from `start`.
fn run_stage(start: Design, traffic: &TrafficMatrix, model: CostModel, mode: SearchMode, cfg: &SearchConfig) -> Result<(Design, Vec<HistoryRow>)> {
    cfg.check()?;
    let ctx = SearchContext {
        traffic,
        moves: cfg.move_options(mode),
        model,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let edp = Edp(&ctx.model);
    let mut current = SearchState::new(start, traffic)?;
    let mut best = current.clone();
    let mut best_edp = edp.value(&best);
    let mut dataset = TrainingDataset::default();
    let mut history = Vec::with_capacity(2 * cfg.iter_max);

    for iteration in 0..cfg.iter_max {
        let climb = hill_climb(current, &edp, &ctx, cfg, &mut rng)?;
        let final_edp = climb.best_value();
        for s in &climb.trajectory {
            dataset.push(s.features(traffic, &ctx.model), final_edp);
        }
        let end = climb.best().clone();
        if final_edp < best_edp {
            best_edp = final_edp;
            best = end.clone();
        }
        history.push(HistoryRow {
            iteration,
            step: 1,
            best_edp,
            dataset_rows: dataset.len(),
        });
        debug!("iteration {iteration}: step 1 ended at {final_edp:.6e}, best {best_edp:.6e}");

        let forest_cfg = ForestConfig {
            n_trees: cfg.n_trees,
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_leaf,
            seed: cfg.seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        };
        let surrogate = dataset.fit(&forest_cfg, traffic, &ctx.model)?;
        let climb2 = hill_climb(end, &surrogate, &ctx, cfg, &mut rng)?;
        history.push(HistoryRow {
            iteration,
            step: 2,
            best_edp,
            dataset_rows: dataset.len(),
        });

        current = if climb2.trajectory.len() == 1 && cfg.restarts {
            let restart = match mode {
                SearchMode::ProcessAware => random_tiers(&best.design, &mut rng),
                SearchMode::ProcessOblivious if !cfg.fixed_placement => {
                    let mut d = best.design.clone();
                    rand::seq::SliceRandom::shuffle(d.topology.placement.as_mut_slice(), &mut rng);
                    d
                }
                SearchMode::ProcessOblivious => best.design.clone(),
            };
            SearchState::new(restart, traffic)?
        } else {
            climb2.best().clone()
        };
    }
    Ok((best.design, history))
}

fn check_problem(p: &Problem) -> Result<()> {
    p.process.check()?;
    p.router.check()?;
    if p.traffic.n() != p.start.topology.num_cores() {
        return Err(Error::InvalidParam(format!(
            "traffic is for {} cores, design has {}",
            p.traffic.n(),
            p.start.topology.num_cores()
        )));
    }
    Ok(())
}

/// Process-oblivious design: topology and placement optimized with
/// baseline tiers under ideal (alpha = beta = 0) parameters, then evaluated
/// under the true parameters.
pub fn po_optimize(p: &Problem, cfg: &SearchConfig) -> Result<StageOutcome> {
    check_problem(p)?;
    let start = po_baseline(&p.start);
    let model = CostModel::new(p.process.ideal(), p.router, start.topology.max_ports)?;
    let (best, history) = run_stage(start, &p.traffic, model, SearchMode::ProcessOblivious, cfg)?;
    let best_eval = evaluate(&best, &p.traffic, &p.process, &p.router)?;
    Ok(StageOutcome {
        best,
        best_eval,
        history,
    })
}

/// Process-aware search seeded from a (process-oblivious) design under the
/// true parameters. Never returns a design worse than the seed.
pub fn pa_optimize_from(seed_design: &Design, p: &Problem, cfg: &SearchConfig) -> Result<StageOutcome> {
    check_problem(p)?;
    let model = CostModel::new(p.process, p.router, seed_design.topology.max_ports)?;
    let (best, history) = run_stage(seed_design.clone(), &p.traffic, model, SearchMode::ProcessAware, cfg)?;
    let best_eval = evaluate(&best, &p.traffic, &p.process, &p.router)?;
    Ok(StageOutcome {
        best,
        best_eval,
        history,
    })
}

/// Runs the search in the configured mode. Process-aware runs first build the
/// process-oblivious design and start from it.
pub fn stage_optimize(p: &Problem, cfg: &SearchConfig) -> Result<StageOutcome> {
    let po = po_optimize(p, cfg)?;
    match cfg.mode {
        SearchMode::ProcessOblivious => Ok(po),
        SearchMode::ProcessAware => pa_optimize_from(&po.best, p, cfg),
    }
}
