//! Parameter sweeps over (alpha, beta, gamma) and their CSV reports.
//!
//! Every cell runs the process-aware search seeded from the process-oblivious
//! design for the same gamma and replicate. Cell results are written to
//! `cells/` as they finish and merged into the report files at the end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, ExperimentConfig};
use crate::error::{Error, Result};
use crate::io::{ensure_dir, write_atomic, write_rows};
use crate::model::{Design, LinkTier, ProcessParams, StageKind};
use crate::route::evaluate;
use crate::search::{pa_optimize_from, po_optimize, SearchConfig, StageOutcome};

pub const STAGE_DIST_CSV: &str = "stage_dist.csv";
pub const LINK_DIST_CSV: &str = "link_dist.csv";
pub const STAGE_BY_LEN_CSV: &str = "stage_by_len.csv";
pub const EDP_CSV: &str = "edp.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
}

impl Cell {
    fn file_name(&self, index: usize) -> String {
        format!("cell_{index:05}.json")
    }
}

/// Stage and link tier counts for one link-length bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBucket {
    pub manhattan_len: u32,
    /// BT, TT, MT counts over the stages of both endpoint routers.
    pub stages: [usize; 3],
    pub top: usize,
    pub bottom: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub edp_po: f64,
    pub edp_pa: f64,
    pub edp_po_ideal: f64,
    /// `[kind][BT, TT, MT]` for the process-aware design.
    pub stage_counts: [[usize; 3]; 3],
    pub top_links: usize,
    pub bottom_links: usize,
    pub by_len: Vec<LengthBucket>,
}

fn length_buckets(d: &Design) -> Vec<LengthBucket> {
    let mut buckets: BTreeMap<u32, LengthBucket> = BTreeMap::new();
    for (k, link) in d.topology.links.iter().enumerate() {
        let b = buckets.entry(link.manhattan_len).or_insert(LengthBucket {
            manhattan_len: link.manhattan_len,
            stages: [0; 3],
            top: 0,
            bottom: 0,
        });
        for r in [link.a, link.b] {
            for t in d.tiers.stage[r] {
                b.stages[t as usize] += 1;
            }
        }
        match d.tiers.link[k] {
            LinkTier::Top => b.top += 1,
            LinkTier::Bottom => b.bottom += 1,
        }
    }
    buckets.into_values().collect()
}

fn summarize(cell: Cell, po_design: &Design, pa: &StageOutcome, pp: &ProcessParams, cfg: &ExperimentConfig, replicate: u64) -> Result<CellResult> {
    let traffic = cfg.build_traffic(replicate)?;
    let edp_po = evaluate(po_design, &traffic, pp, &cfg.router)?.edp;
    let edp_po_ideal = evaluate(po_design, &traffic, &pp.ideal(), &cfg.router)?.edp;
    let d = &pa.best;
    let top = d.tiers.top_links();
    Ok(CellResult {
        cell,
        edp_po,
        edp_pa: pa.best_eval.edp,
        edp_po_ideal,
        stage_counts: StageKind::ALL.map(|k| d.tiers.stage_counts(&[k])),
        top_links: top,
        bottom_links: d.tiers.link.len() - top,
        by_len: length_buckets(d),
    })
}

fn f64_bits(x: f64) -> u64 {
    x.to_bits()
}

fn search_cfg(base: &SearchConfig, seed: u64) -> SearchConfig {
    SearchConfig { seed, ..*base }
}

/// All cells of the sweep, in report order.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let s = &cfg.sweep;
    let mut out = Vec::new();
    for &gamma in &s.gamma {
        for &alpha in &s.alpha {
            for &beta in &s.beta {
                for replicate in 0..s.replicates {
                    out.push(Cell {
                        alpha,
                        beta,
                        gamma,
                        replicate,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub cell: Cell,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub seed: u64,
    pub cells_total: usize,
    pub completed: Vec<Cell>,
    pub failed: Vec<FailedCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDistRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
    pub stage_kind: String,
    #[serde(rename = "pct_BT")]
    pub pct_bt: f64,
    #[serde(rename = "pct_TT")]
    pub pct_tt: f64,
    #[serde(rename = "pct_MT")]
    pub pct_mt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDistRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
    pub pct_top: f64,
    pub pct_bottom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageByLenRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
    pub manhattan_len: u32,
    pub links: usize,
    #[serde(rename = "pct_BT")]
    pub pct_bt: f64,
    #[serde(rename = "pct_TT")]
    pub pct_tt: f64,
    #[serde(rename = "pct_MT")]
    pub pct_mt: f64,
    pub pct_top: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdpRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub replicate: usize,
    pub edp_po: f64,
    pub edp_pa: f64,
    pub edp_po_ideal: f64,
    pub edp_po_normalized: f64,
    pub edp_pa_normalized: f64,
}

fn pct(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

fn ratio(x: f64, base: f64) -> f64 {
    if base > 0.0 {
        x / base
    } else {
        0.0
    }
}

/// Report rows for a set of cell results.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub stage_dist: Vec<StageDistRow>,
    pub link_dist: Vec<LinkDistRow>,
    pub stage_by_len: Vec<StageByLenRow>,
    pub edp: Vec<EdpRow>,
}

impl Report {
    pub fn from_results(results: &[CellResult]) -> Self {
        let mut rep = Report::default();
        for r in results {
            let Cell {
                alpha,
                beta,
                gamma,
                replicate,
            } = r.cell;
            for k in StageKind::ALL {
                let c = r.stage_counts[k.index()];
                let total = c.iter().sum();
                rep.stage_dist.push(StageDistRow {
                    alpha,
                    beta,
                    gamma,
                    replicate,
                    stage_kind: k.name().to_string(),
                    pct_bt: pct(c[0], total),
                    pct_tt: pct(c[1], total),
                    pct_mt: pct(c[2], total),
                });
            }
            let links = r.top_links + r.bottom_links;
            rep.link_dist.push(LinkDistRow {
                alpha,
                beta,
                gamma,
                replicate,
                pct_top: pct(r.top_links, links),
                pct_bottom: pct(r.bottom_links, links),
            });
            for b in &r.by_len {
                let total = b.stages.iter().sum();
                rep.stage_by_len.push(StageByLenRow {
                    alpha,
                    beta,
                    gamma,
                    replicate,
                    manhattan_len: b.manhattan_len,
                    links: b.top + b.bottom,
                    pct_bt: pct(b.stages[0], total),
                    pct_tt: pct(b.stages[1], total),
                    pct_mt: pct(b.stages[2], total),
                    pct_top: pct(b.top, b.top + b.bottom),
                });
            }
            rep.edp.push(EdpRow {
                alpha,
                beta,
                gamma,
                replicate,
                edp_po: r.edp_po,
                edp_pa: r.edp_pa,
                edp_po_ideal: r.edp_po_ideal,
                edp_po_normalized: ratio(r.edp_po, r.edp_po_ideal),
                edp_pa_normalized: ratio(r.edp_pa, r.edp_po_ideal),
            });
        }
        rep
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_rows(dir.join(STAGE_DIST_CSV), &self.stage_dist)?;
        write_rows(dir.join(LINK_DIST_CSV), &self.link_dist)?;
        write_rows(dir.join(STAGE_BY_LEN_CSV), &self.stage_by_len)?;
        write_rows(dir.join(EDP_CSV), &self.edp)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub dir: PathBuf,
    pub results: Vec<CellResult>,
    pub report: Report,
    pub manifest: Manifest,
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))
}

/// Runs the full sweep of `cfg` on `jobs` worker threads (0 = all cores) and
/// writes the reports under `out`.
///
/// Failed cells do not stop the others. The reports then cover the completed
/// cells only, the manifest lists what failed, and the first error is returned.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<SweepOutput> {
    cfg.check()?;
    let dir = ensure_dir(out)?;
    let cell_dir = ensure_dir(&dir.join("cells"))?;
    let pool = pool(jobs)?;

    // process-oblivious designs per (gamma, replicate)
    let mut po_keys: Vec<(f64, usize)> = Vec::new();
    for &g in &cfg.sweep.gamma {
        for r in 0..cfg.sweep.replicates {
            po_keys.push((g, r));
        }
    }
    let po: Vec<Result<Design>> = pool.install(|| {
        po_keys
            .par_iter()
            .map(|&(gamma, rep)| {
                let pp = cfg.process.with_variation(0.0, 0.0, gamma);
                let problem = cfg.problem(rep as u64, pp)?;
                let seed = derive_seed(cfg.seed ^ cfg.search.seed, &[3, f64_bits(gamma), rep as u64]);
                info!("PO search gamma={gamma} replicate={rep}");
                Ok(po_optimize(&problem, &search_cfg(&cfg.search, seed))?.best)
            })
            .collect()
    });
    let po_for = |gamma: f64, rep: usize| {
        let k = po_keys
            .iter()
            .position(|&(g, r)| g.to_bits() == gamma.to_bits() && r == rep)
            .expect("every cell has a PO key");
        &po[k]
    };

    let all = cells(cfg);
    let outcomes: Vec<Result<CellResult>> = pool.install(|| {
        all.par_iter()
            .enumerate()
            .map(|(index, &cell)| {
                let po_design = po_for(cell.gamma, cell.replicate)
                    .as_ref()
                    .map_err(|e| Error::InvalidParam(format!("process-oblivious search failed: {e}")))?;
                let rep = cell.replicate as u64;
                let pp = cfg.process.with_variation(cell.alpha, cell.beta, cell.gamma);
                let problem = cfg.problem(rep, pp)?;
                let seed = derive_seed(
                    cfg.seed ^ cfg.search.seed,
                    &[4, f64_bits(cell.alpha), f64_bits(cell.beta), f64_bits(cell.gamma), rep],
                );
                info!(
                    "PA search alpha={} beta={} gamma={} replicate={}",
                    cell.alpha, cell.beta, cell.gamma, cell.replicate
                );
                let pa = pa_optimize_from(po_design, &problem, &search_cfg(&cfg.search, seed))?;
                let result = summarize(cell, po_design, &pa, &pp, cfg, rep)?;
                let json = serde_json::to_vec_pretty(&result)?;
                write_atomic(&cell_dir.join(cell.file_name(index)), &json)?;
                Ok(result)
            })
            .collect()
    });

    let mut results = Vec::new();
    let mut failed = Vec::new();
    let mut first_err = None;
    for (cell, outcome) in all.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                warn!("cell {cell:?} failed: {e}");
                failed.push(FailedCell {
                    cell: *cell,
                    error: e.to_string(),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    let report = Report::from_results(&results);
    report.write(&dir)?;
    let manifest = Manifest {
        complete: failed.is_empty(),
        seed: cfg.seed,
        cells_total: all.len(),
        completed: results.iter().map(|r| r.cell).collect(),
        failed,
    };
    write_atomic(&dir.join(MANIFEST_JSON), &serde_json::to_vec_pretty(&manifest)?)?;
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(SweepOutput {
        dir,
        results,
        report,
        manifest,
    })
}

/// Reads back the cell files a sweep left in `dir/cells`, in cell order.
pub fn read_cell_results(dir: &Path) -> Result<Vec<CellResult>> {
    let cell_dir = dir.join("cells");
    let mut names: Vec<PathBuf> = fs::read_dir(&cell_dir)
        .map_err(|e| Error::io(&cell_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    names.sort();
    names
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        })
        .collect()
}
