//! Experiment configuration (a single JSON document) and instance construction.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::load_traffic_csv;
use crate::model::{
    Design, DesignKind, GridSpec, LinkTier, ProcessParams, RouterConfig, StageTier, TierAssignment,
    TrafficMatrix, DEFAULT_MAX_PORTS,
};
use crate::search::{po_baseline, Problem, SearchConfig};
use crate::topogen::{gen_mesh_with_ports, gen_smallworld, gen_traffic, SmallWorldSpec, TrafficSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyConfig {
    pub kind: DesignKind,
    pub max_ports: usize,
    pub small_world: SmallWorldSpec,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            kind: DesignKind::SmallWorld,
            max_ports: DEFAULT_MAX_PORTS,
            small_world: SmallWorldSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrafficSource {
    Csv { csv: PathBuf },
    Generated(TrafficSpec),
}

impl Default for TrafficSource {
    fn default() -> Self {
        TrafficSource::Generated(TrafficSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Independent instances (topology, traffic, search seeds) per cell.
    pub replicates: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            alpha: vec![0.05, 0.10, 0.15, 0.20],
            beta: vec![0.10, 0.20, 0.30],
            gamma: vec![0.10, 0.20],
            replicates: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub router: RouterConfig,
    pub topology: TopologyConfig,
    pub traffic: TrafficSource,
    pub process: ProcessParams,
    pub sweep: SweepSpec,
    pub search: SearchConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid: GridSpec {
                dims: [4, 4, 1],
                hop_pitch_mm: 1.0,
            },
            router: RouterConfig::default(),
            topology: TopologyConfig::default(),
            traffic: TrafficSource::default(),
            process: ProcessParams::default(),
            sweep: SweepSpec::default(),
            search: SearchConfig::default(),
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derived from a base seed and a list of coordinates.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        // relative CSV paths are relative to the config file
        if let TrafficSource::Csv { csv } = &mut cfg.traffic {
            if csv.is_relative() {
                if let Some(parent) = path.parent() {
                    *csv = parent.join(&*csv);
                }
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        self.grid.check()?;
        self.router.check()?;
        self.process.check()?;
        self.search.check()?;
        let s = &self.sweep;
        if s.alpha.is_empty() || s.beta.is_empty() || s.gamma.is_empty() || s.replicates == 0 {
            return Err(Error::InvalidParam(
                "sweep lists must be non-empty and replicates >= 1".into(),
            ));
        }
        for &a in &s.alpha {
            for &b in &s.beta {
                for &g in &s.gamma {
                    self.process.with_variation(a, b, g).check()?;
                }
            }
        }
        Ok(())
    }

    /// Topology for one replicate; small-world topologies get a per-replicate seed.
    pub fn build_topology_design(&self, replicate: u64) -> Result<Design> {
        let topology = match self.topology.kind {
            DesignKind::Mesh => gen_mesh_with_ports(&self.grid, self.topology.max_ports)?,
            DesignKind::SmallWorld => {
                let spec = SmallWorldSpec {
                    seed: derive_seed(self.seed, &[1, replicate]),
                    max_ports: self.topology.max_ports,
                    ..self.topology.small_world
                };
                gen_smallworld(&self.grid, &spec)?
            }
        };
        let n = topology.num_routers();
        let links = topology.links.len();
        Ok(po_baseline(&Design {
            tiers: TierAssignment::uniform(n, links, StageTier::Mt, LinkTier::Bottom),
            topology,
            kind: self.topology.kind,
        }))
    }

    pub fn build_traffic(&self, replicate: u64) -> Result<TrafficMatrix> {
        match &self.traffic {
            TrafficSource::Csv { csv } => load_traffic_csv(csv, self.grid.num_routers()),
            TrafficSource::Generated(spec) => {
                let spec = TrafficSpec {
                    seed: derive_seed(self.seed ^ spec.seed, &[2, replicate]),
                    ..*spec
                };
                gen_traffic(&self.grid, &spec)
            }
        }
    }

    /// Problem instance for one replicate at the given process parameters.
    pub fn problem(&self, replicate: u64, process: ProcessParams) -> Result<Problem> {
        Ok(Problem {
            start: self.build_topology_design(replicate)?,
            traffic: self.build_traffic(replicate)?,
            process,
            router: self.router,
        })
    }
}
