use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use m3d_noc::brute::brute_force;
use m3d_noc::config::{derive_seed, ExperimentConfig};
use m3d_noc::io::{
    ensure_dir, load_traffic_csv, read_design_dir, write_design_dir, write_history_csv, write_rows,
    write_traffic_csv, EvalRow,
};
use m3d_noc::model::{clustering_coefficient, Design, ProcessParams, TrafficMatrix};
use m3d_noc::route::{evaluate, EvalResult};
use m3d_noc::search::{pa_optimize_from, po_optimize, SearchConfig, SearchMode};
use m3d_noc::sweep::run_sweep;
use m3d_noc::{Error, Result};

#[derive(Parser)]
#[command(name = "m3d-noc", version, about = "Process-variation-aware M3D NoC design-space exploration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a topology and a traffic matrix.
    Generate(Common),
    /// Evaluate a design directory against a traffic file.
    Evaluate(EvaluateArgs),
    /// Optimize one design.
    Optimize(OptimizeArgs),
    /// Sweep (alpha, beta, gamma) and write the report CSVs.
    Sweep(Common),
    /// Exhaustively search tier assignments of a small design.
    Brute(BruteArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ProcessOverrides {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl ProcessOverrides {
    fn apply(&self, mut pp: ProcessParams) -> ProcessParams {
        if let Some(a) = self.alpha {
            pp.alpha = a;
        }
        if let Some(b) = self.beta {
            pp.beta = b;
        }
        if let Some(g) = self.gamma {
            pp.gamma = g;
        }
        pp
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Design directory as written by `generate` or `optimize`.
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    traffic: PathBuf,
    #[command(flatten)]
    process: ProcessOverrides,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Pa,
    Po,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Mode::Pa)]
    mode: Mode,
    #[command(flatten)]
    process: ProcessOverrides,
}

#[derive(Args)]
struct BruteArgs {
    #[command(flatten)]
    common: Common,
    /// Design directory; defaults to the configured topology.
    #[arg(long)]
    design: Option<PathBuf>,
    /// Traffic file; defaults to the configured traffic.
    #[arg(long)]
    traffic: Option<PathBuf>,
    #[command(flatten)]
    process: ProcessOverrides,
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.check()?;
    Ok(cfg)
}

fn print_eval(label: &str, r: &EvalResult) {
    println!("{label}: latency_ps={} energy_pj={} edp={}", r.latency, r.energy, r.edp);
}

fn cmd_generate(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let design = cfg.build_topology_design(0)?;
    let traffic = cfg.build_traffic(0)?;
    let out = ensure_dir(&cfg.output_dir)?;
    write_design_dir(&out, &design)?;
    write_traffic_csv(out.join("traffic.csv"), &traffic)?;
    let t = &design.topology;
    println!("routers: {}", t.num_routers());
    println!("links: {}", t.links.len());
    match clustering_coefficient(t) {
        Ok(cc) => println!("clustering: {cc:.6}"),
        Err(_) => println!("clustering: n/a"),
    }
    Ok(())
}

fn traffic_for(path: &Path, d: &Design) -> Result<TrafficMatrix> {
    load_traffic_csv(path, d.topology.num_cores())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let pp = a.process.apply(cfg.process);
    pp.check()?;
    let design = read_design_dir(&a.design)?;
    let traffic = traffic_for(&a.traffic, &design)?;
    let r = evaluate(&design, &traffic, &pp, &cfg.router)?;
    print_eval("design", &r);
    if a.common.out.is_some() {
        let out = ensure_dir(&cfg.output_dir)?;
        write_rows(out.join("eval.csv"), &[EvalRow::new("design", &pp, &r)])?;
    }
    Ok(())
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let pp = a.process.apply(cfg.process);
    pp.check()?;
    let problem = cfg.problem(0, pp)?;
    let search = SearchConfig {
        seed: derive_seed(cfg.seed ^ cfg.search.seed, &[5]),
        ..cfg.search
    };
    let out = ensure_dir(&cfg.output_dir)?;
    info!("process-oblivious search");
    let po = po_optimize(&problem, &search)?;
    print_eval("po", &po.best_eval);
    let mut rows = vec![EvalRow::new("po", &pp, &po.best_eval)];
    let result = match a.mode {
        Mode::Po => po,
        Mode::Pa => {
            info!("process-aware search");
            let pa = pa_optimize_from(&po.best, &problem, &SearchConfig { mode: SearchMode::ProcessAware, ..search })?;
            print_eval("pa", &pa.best_eval);
            rows.push(EvalRow::new("pa", &pp, &pa.best_eval));
            pa
        }
    };
    write_design_dir(out.join("design"), &result.best)?;
    write_history_csv(out.join("history.csv"), &result.history)?;
    write_rows(out.join("eval.csv"), &rows)?;
    write_traffic_csv(out.join("traffic.csv"), &problem.traffic)
}

fn cmd_sweep(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let out = run_sweep(&cfg, &cfg.output_dir, c.jobs)?;
    println!("cells: {}", out.results.len());
    println!("reports: {}", out.dir.display());
    Ok(())
}

fn cmd_brute(a: &BruteArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let pp = a.process.apply(cfg.process);
    pp.check()?;
    let design = match &a.design {
        Some(dir) => read_design_dir(dir)?,
        None => cfg.build_topology_design(0)?,
    };
    let traffic = match &a.traffic {
        Some(p) => traffic_for(p, &design)?,
        None => cfg.build_traffic(0)?,
    };
    let r = brute_force(&design, &traffic, &pp, &cfg.router)?;
    println!("assignments: {} valid of {}", r.valid, r.total);
    print_eval("optimum", &r.best_eval);
    let out = ensure_dir(&cfg.output_dir)?;
    write_design_dir(out.join("design"), &r.best)?;
    write_rows(out.join("eval.csv"), &[EvalRow::new("brute", &pp, &r.best_eval)])
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(c) => cmd_generate(c),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(c) => cmd_sweep(c),
        Command::Brute(a) => cmd_brute(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("M3D_NOC_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Invalid(report) = &e {
                for v in &report.violations {
                    eprintln!("  {}: {v}", v.kind());
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
