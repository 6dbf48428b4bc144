//! Learned local search over designs.
//!
//! Step 1 hill-climbs on EDP and records every accepted design together with
//! the EDP the climb finished at. Step 2 fits a regression forest to those
//! records and hill-climbs on its prediction, handing the result back to
//! Step 1 as the next starting point.

mod forest;
mod perturb;
mod stage;

pub use forest::{spearman, ForestConfig, RegressionForest, RegressionTree};
pub use perturb::{
    applicable_moves, apply_move, link_move_candidates, move_link, perturb, set_link_tier, set_stage_tier, MoveOptions, Perturbation,
    SearchMode,
};
pub use stage::{
    hill_climb, pa_optimize_from, po_baseline, po_optimize, random_tiers, stage_optimize,
    ClimbResult, Edp, HistoryRow, Objective, Problem, SearchConfig, SearchContext, SearchState,
    StageOutcome, Surrogate, TrainingDataset,
};
