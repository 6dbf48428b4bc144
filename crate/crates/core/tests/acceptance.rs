//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use m3d_noc::brute::brute_force;
use m3d_noc::config::{ExperimentConfig, TrafficSource};
use m3d_noc::model::{
    Design, DesignKind, GridSpec, LinkTier, ProcessParams, RouterConfig, StageKind, StageTier,
    TierAssignment,
};
use m3d_noc::route::{evaluate, RoutingTable};
use m3d_noc::search::{spearman, stage_optimize, ForestConfig, Problem, RegressionForest, SearchConfig};
use m3d_noc::sweep::{run_sweep, CellResult, SweepOutput};
use m3d_noc::timing::{fo4_ratio, mt_wire_factor, stage_delay_2d, tier_transform};
use m3d_noc::topogen::{gen_mesh, gen_smallworld, gen_traffic, SmallWorldSpec, TrafficKind, TrafficSpec};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn median(v: &mut [f64]) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn anchors() -> Outcome {
    let mut pp = ProcessParams::default();
    pp.alpha = 0.05;
    let fo4 = fo4_ratio(&pp);
    let wire = 1.0 - mt_wire_factor(2);
    let xbar = stage_delay_2d(StageKind::Xbar, 2, 4, 32).map_err(|e| e.to_string())?;
    check(
        (fo4 - 1.09).abs() <= 0.001 && (wire - 0.2929).abs() <= 0.001 && xbar == 27.0,
        format!("fo4_ratio(0.05)={fo4:.4}, MT wire reduction={:.2}%, XBAR(p=2,w=32)={xbar} FO4", 100.0 * wire),
    )
}

fn mt_dominance(sweep: &SweepOutput) -> Outcome {
    let mut points = 0;
    for a in 0..=4 {
        for g in 0..=2 {
            for rho in [0.0, 0.3, 0.7, 1.0] {
                let alpha = 0.05 * a as f64;
                let gamma = 0.1 * g as f64;
                let mut pp = ProcessParams::default().with_variation(alpha, 0.0, gamma);
                pp.wire_frac = [rho; 3];
                for kind in StageKind::ALL {
                    for p in 2..=7 {
                        let t2d = stage_delay_2d(kind, p, 4, 32).map_err(|e| e.to_string())?;
                        let (mt_d, mt_e) = tier_transform(kind, StageTier::Mt, t2d, &pp).map_err(|e| e.to_string())?;
                        let (tt_d, tt_e) = tier_transform(kind, StageTier::Tt, t2d, &pp).map_err(|e| e.to_string())?;
                        let weak = mt_d <= tt_d && mt_e <= tt_e;
                        let strict = mt_d < tt_d || mt_e < tt_e;
                        if !weak || ((alpha > 0.0 || gamma > 0.0) && !strict) {
                            return Err(format!(
                                "MT not dominant at alpha={alpha} gamma={gamma} rho={rho} {kind:?} p={p}"
                            ));
                        }
                        points += 1;
                    }
                }
            }
        }
    }
    let tt_rows = sweep
        .report
        .stage_dist
        .iter()
        .filter(|r| r.pct_tt != 0.0)
        .count();
    check(
        tt_rows == 0,
        format!(
            "{points} grid points dominated; {tt_rows} of {} swept stage_dist rows have TT stages",
            sweep.report.stage_dist.len()
        ),
    )
}

fn mesh_2x2() -> (Design, m3d_noc::model::TrafficMatrix) {
    let g = GridSpec::new(2, 2, 1, 1.0).unwrap();
    let t = gen_mesh(&g).unwrap();
    let traffic = gen_traffic(
        &g,
        &TrafficSpec {
            kind: TrafficKind::Uniform,
            seed: 0,
        },
    )
    .unwrap();
    let d = Design {
        tiers: TierAssignment::uniform(4, t.links.len(), StageTier::Mt, LinkTier::Bottom),
        topology: t,
        kind: DesignKind::Mesh,
    };
    (d, traffic)
}

fn brute_equivalence() -> Outcome {
    let (start, traffic) = mesh_2x2();
    let rc = RouterConfig::default();
    let cfg = SearchConfig {
        fixed_placement: true,
        seed: 11,
        ..Default::default()
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for (a, b, g) in [(0.0, 0.0, 0.1), (0.1, 0.2, 0.1), (0.2, 0.3, 0.1)] {
        let pp = ProcessParams::default().with_variation(a, b, g);
        let brute = brute_force(&start, &traffic, &pp, &rc).map_err(|e| e.to_string())?;
        let problem = Problem {
            start: start.clone(),
            traffic: traffic.clone(),
            process: pp,
            router: rc,
        };
        let found = stage_optimize(&problem, &cfg).map_err(|e| e.to_string())?;
        let (x, y) = (found.best_eval.edp, brute.best_eval.edp);
        let rel = (x - y).abs() / y;
        ok &= rel <= 1e-12 && found.best.topology.placement == start.topology.placement;
        lines.push(format!("({a},{b},{g}) stage={x:.6e} brute={y:.6e} rel={rel:.1e}"));
    }
    check(ok, lines.join("; "))
}

fn ideal_convergence() -> Outcome {
    let g = GridSpec::new(4, 2, 1, 1.0).unwrap();
    let t = gen_smallworld(
        &g,
        &SmallWorldSpec {
            seed: 5,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let traffic = gen_traffic(&g, &TrafficSpec::default()).map_err(|e| e.to_string())?;
    let links = t.links.len();
    let problem = Problem {
        start: Design {
            tiers: TierAssignment::uniform(8, links, StageTier::Bt, LinkTier::Bottom),
            topology: t,
            kind: DesignKind::SmallWorld,
        },
        traffic,
        process: ProcessParams::default().with_variation(0.0, 0.0, 0.1),
        router: RouterConfig::default(),
    };
    let out = stage_optimize(&problem, &SearchConfig::default()).map_err(|e| e.to_string())?;
    let [bt, tt, mt] = out.best.tiers.stage_counts(&StageKind::ALL);
    check(
        bt == 0 && tt == 0,
        format!("8-router SWNoC at alpha=beta=0, gamma=0.1: BT={bt} TT={tt} MT={mt}"),
    )
}

fn sweep_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        grid: GridSpec::new(4, 4, 1, 1.0).unwrap(),
        traffic: TrafficSource::Generated(TrafficSpec::default()),
        seed: 2024,
        ..Default::default()
    };
    cfg.topology.kind = DesignKind::SmallWorld;
    cfg.sweep.alpha = vec![0.05, 0.10, 0.15, 0.20];
    cfg.sweep.beta = vec![0.1, 0.2, 0.3];
    cfg.sweep.gamma = vec![0.1, 0.2];
    cfg
}

type Key = (u64, u64, u64);

fn key(r: &CellResult) -> Key {
    (r.cell.alpha.to_bits(), r.cell.beta.to_bits(), r.cell.gamma.to_bits())
}

fn medians(results: &[CellResult], f: impl Fn(&CellResult) -> f64) -> BTreeMap<Key, f64> {
    let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for r in results {
        groups.entry(key(r)).or_default().push(f(r));
    }
    groups.into_iter().map(|(k, mut v)| (k, median(&mut v))).collect()
}

fn at(m: &BTreeMap<Key, f64>, a: f64, b: f64, g: f64) -> f64 {
    m[&(a.to_bits(), b.to_bits(), g.to_bits())]
}

fn improvement(r: &CellResult) -> f64 {
    1.0 - r.edp_pa / r.edp_po
}

fn pa_vs_po(sweep: &SweepOutput, replicates: usize) -> Outcome {
    let results = &sweep.results;
    let worse = results.iter().filter(|r| r.edp_pa > r.edp_po).count();
    let imp = medians(results, improvement);
    let high = at(&imp, 0.2, 0.3, 0.1);
    let low = at(&imp, 0.1, 0.1, 0.1);
    check(
        worse == 0 && high > low,
        format!(
            "{} cells x {replicates} seeds, edp_pa > edp_po in {worse}; median improvement HIGH={:.2}% LOW={:.2}%",
            results.len() / replicates,
            100.0 * high,
            100.0 * low
        ),
    )
}

fn pct_stage(r: &CellResult, tier: usize) -> f64 {
    let total: usize = r.stage_counts.iter().map(|c| c.iter().sum::<usize>()).sum();
    let n: usize = r.stage_counts.iter().map(|c| c[tier]).sum();
    100.0 * n as f64 / total as f64
}

fn distribution_trends(sweep: &SweepOutput) -> Outcome {
    let results = &sweep.results;
    let alphas = [0.05, 0.10, 0.15, 0.20];
    let betas = [0.1, 0.2, 0.3];
    let gammas = [0.1, 0.2];
    let top = medians(results, |r| 100.0 * r.top_links as f64 / (r.top_links + r.bottom_links) as f64);
    let bt = medians(results, |r| pct_stage(r, 0));
    let mt = medians(results, |r| pct_stage(r, 2));
    let mut bad = Vec::new();
    for &a in &alphas {
        for &g in &gammas {
            for w in betas.windows(2) {
                if at(&top, a, w[1], g) < at(&top, a, w[0], g) {
                    bad.push(format!("top% falls with beta at alpha={a} gamma={g}"));
                }
            }
        }
    }
    for &b in &betas {
        for &g in &gammas {
            for w in alphas.windows(2) {
                if at(&bt, w[1], b, g) < at(&bt, w[0], b, g) {
                    bad.push(format!("BT% falls with alpha at beta={b} gamma={g}"));
                }
            }
        }
    }
    for &a in &alphas {
        for &b in &betas {
            if at(&mt, a, b, 0.2) < at(&mt, a, b, 0.1) {
                bad.push(format!("MT% falls with gamma at alpha={a} beta={b}"));
            }
        }
    }

    // mean Manhattan length of top and bottom links at beta = 0.3, per seed
    let mut by_rep: BTreeMap<usize, [f64; 4]> = BTreeMap::new();
    for r in results.iter().filter(|r| r.cell.beta == 0.3) {
        let e = by_rep.entry(r.cell.replicate).or_default();
        for b in &r.by_len {
            let len = b.manhattan_len as f64;
            e[0] += len * b.top as f64;
            e[1] += b.top as f64;
            e[2] += len * b.bottom as f64;
            e[3] += b.bottom as f64;
        }
    }
    let mut top_len = Vec::new();
    let mut bottom_len = Vec::new();
    for s in by_rep.values().filter(|s| s[1] > 0.0 && s[3] > 0.0) {
        top_len.push(s[0] / s[1]);
        bottom_len.push(s[2] / s[3]);
    }
    let seeds_with_both = top_len.len();
    let (tl, bl) = if seeds_with_both > 0 {
        (median(&mut top_len), median(&mut bottom_len))
    } else {
        bad.push("no seed has bottom-tier links at beta=0.3".into());
        (f64::NAN, f64::NAN)
    };
    if seeds_with_both > 0 && tl < bl {
        bad.push(format!("top links shorter than bottom links at beta=0.3 ({tl:.3} < {bl:.3})"));
    }
    let summary = format!(
        "top% at alpha=0.2,gamma=0.1 over beta: {:.1}/{:.1}/{:.1}; BT% at beta=0.1,gamma=0.1 over alpha: {:.1}/{:.1}/{:.1}/{:.1}; \
         mean length at beta=0.3 top={tl:.3} bottom={bl:.3} ({seeds_with_both} seeds)",
        at(&top, 0.2, 0.1, 0.1),
        at(&top, 0.2, 0.2, 0.1),
        at(&top, 0.2, 0.3, 0.1),
        at(&bt, 0.05, 0.1, 0.1),
        at(&bt, 0.1, 0.1, 0.1),
        at(&bt, 0.15, 0.1, 0.1),
        at(&bt, 0.2, 0.1, 0.1),
    );
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", bad.join("; ")))
    }
}

fn bfs_hops(adj: &[Vec<(usize, usize)>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &(v, _) in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

fn linearity() -> Outcome {
    let g = GridSpec::new(4, 4, 1, 1.0).unwrap();
    let pp = ProcessParams::default().with_variation(0.15, 0.2, 0.1);
    let rc = RouterConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_scale = 0.0f64;
    let mut product_exact = true;
    let mut pairs = 0;
    for k in 0..50u64 {
        let t = gen_smallworld(
            &g,
            &SmallWorldSpec {
                seed: k,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let links = t.links.len();
        let mut d = Design {
            tiers: TierAssignment::uniform(16, links, StageTier::Mt, LinkTier::Bottom),
            topology: t,
            kind: DesignKind::SmallWorld,
        };
        for tier in d.tiers.link.iter_mut() {
            if rng.random_bool(0.5) {
                *tier = LinkTier::Top;
            }
        }
        let traffic = gen_traffic(
            &g,
            &TrafficSpec {
                kind: TrafficKind::Hotspot {
                    fraction: 0.3,
                    hot_cores: 2,
                },
                seed: k,
            },
        )
        .map_err(|e| e.to_string())?;
        let base = evaluate(&d, &traffic, &pp, &rc).map_err(|e| e.to_string())?;
        product_exact &= base.edp == base.latency * base.energy;
        for c in [0.5, 3.7, 12.0] {
            let scaled = evaluate(&d, &traffic.scaled(c), &pp, &rc).map_err(|e| e.to_string())?;
            let rel = (scaled.edp - c * c * base.edp).abs() / (c * c * base.edp);
            worst_scale = worst_scale.max(rel);
            product_exact &= scaled.edp == scaled.latency * scaled.energy;
        }

        let routing = RoutingTable::build(&d).map_err(|e| e.to_string())?;
        let adj = d.topology.adjacency();
        for a in 0..16 {
            let dist = bfs_hops(&adj, a);
            for (b, &h) in dist.iter().enumerate() {
                if routing.hops(a, b) != h {
                    return Err(format!("topology {k}: hops({a},{b})={} but BFS gives {h}", routing.hops(a, b)));
                }
                pairs += 1;
            }
        }
    }
    check(
        worst_scale <= 1e-12 && product_exact,
        format!(
            "worst c^2 scaling error {worst_scale:.1e}, edp == latency*energy: {product_exact}, {pairs} router pairs match BFS"
        ),
    )
}

fn forest_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let x: Vec<Vec<f64>> = (0..60).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
    let constant = RegressionForest::fit(&x, &[4.25; 60], &ForestConfig::default()).map_err(|e| e.to_string())?;
    let exact = (0..20).all(|_| {
        let row: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        constant.predict(&row) == 4.25
    });
    let mut rhos = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut sample = |n: usize| {
            let x: Vec<Vec<f64>> = (0..n).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
            let y: Vec<f64> = x.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
            (x, y)
        };
        let (xt, yt) = sample(400);
        let (xh, yh) = sample(200);
        let f = RegressionForest::fit(
            &xt,
            &yt,
            &ForestConfig {
                seed,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let pred: Vec<f64> = xh.iter().map(|r| f.predict(r)).collect();
        rhos.push(spearman(&pred, &yh));
    }
    let min = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    check(
        exact && min >= 0.8,
        format!(
            "constant target exact: {exact}; held-out Spearman over 5 seeds: {}",
            rhos.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let mut cfg = sweep_config();
    cfg.sweep.replicates = 1;
    let cfg_path = dir.join("determinism.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_m3d-noc");
    let run = |name: &str, jobs: &str| -> Result<(), String> {
        let status = Command::new(bin)
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(dir.join(name))
            .args(["--seed", "77", "--jobs", jobs])
            .stdout(Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if status.success() {
            Ok(())
        } else {
            Err(format!("sweep exited with {status}"))
        }
    };
    run("a", "1")?;
    run("b", "2")?;
    let files = ["stage_dist.csv", "link_dist.csv", "stage_by_len.csv", "edp.csv", "manifest.json"];
    let mut differing = Vec::new();
    for f in files {
        let a = fs::read(dir.join("a").join(f)).map_err(|e| e.to_string())?;
        let b = fs::read(dir.join("b").join(f)).map_err(|e| e.to_string())?;
        if a != b {
            differing.push(f);
        }
    }
    check(
        differing.is_empty(),
        format!("two sweeps (1 and 2 worker threads), {} files compared, differing: {differing:?}", files.len()),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let replicates = 10;
    let started = Instant::now();
    let mut cfg = sweep_config();
    cfg.sweep.replicates = replicates;
    let sweep = run_sweep(&cfg, &tmp.path().join("sweep"), 0).expect("acceptance sweep");
    println!(
        "full sweep: {} cells in {:.0}s",
        sweep.results.len(),
        started.elapsed().as_secs_f64()
    );

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 model anchors", Box::new(anchors)),
        ("2 MT dominance", Box::new(|| mt_dominance(&sweep))),
        ("3 brute-force equivalence", Box::new(brute_equivalence)),
        ("4 ideal-condition convergence", Box::new(ideal_convergence)),
        ("5 PA <= PO", Box::new(|| pa_vs_po(&sweep, replicates))),
        ("6 distribution trends", Box::new(|| distribution_trends(&sweep))),
        ("7 evaluator linearity", Box::new(linearity)),
        ("8 forest sanity", Box::new(forest_sanity)),
        ("9 determinism", Box::new(|| determinism(tmp.path()))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
