//! Topology and synthetic traffic generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{manhattan_distance, GridSpec, Topology, TrafficMatrix, DEFAULT_MAX_PORTS};

/// Regular mesh: a link between every pair of unit-distance grid neighbors.
pub fn gen_mesh(g: &GridSpec) -> Result<Topology> {
    gen_mesh_with_ports(g, DEFAULT_MAX_PORTS)
}

pub fn gen_mesh_with_ports(g: &GridSpec, max_ports: usize) -> Result<Topology> {
    g.check()?;
    let coords = g.coords();
    let mut pairs = Vec::new();
    for (a, c) in coords.iter().enumerate() {
        if c.x + 1 < g.dims[0] {
            pairs.push((a, a + 1));
        }
    }
    let row = g.dims[0] as usize;
    for (a, c) in coords.iter().enumerate() {
        if c.y + 1 < g.dims[1] {
            pairs.push((a, a + row));
        }
    }
    let plane = row * g.dims[1] as usize;
    for (a, c) in coords.iter().enumerate() {
        if c.z + 1 < g.dims[2] {
            pairs.push((a, a + plane));
        }
    }
    Topology::new(coords, &pairs, g.hop_pitch_mm, max_ports)
}

/// Number of links in the mesh over `g`.
pub fn mesh_link_count(g: &GridSpec) -> usize {
    let [x, y, z] = g.dims.map(|d| d as usize);
    (x - 1) * y * z + x * (y - 1) * z + x * y * (z - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmallWorldSpec {
    /// Total links; `None` uses the mesh link count of the same grid.
    pub link_budget: Option<usize>,
    /// Link probability falls off as `distance^-decay_exponent`.
    pub decay_exponent: f64,
    pub seed: u64,
    pub max_ports: usize,
}

impl Default for SmallWorldSpec {
    fn default() -> Self {
        SmallWorldSpec {
            link_budget: None,
            decay_exponent: 2.0,
            seed: 0,
            max_ports: DEFAULT_MAX_PORTS,
        }
    }
}

/// Picks an index with probability proportional to `weights`, or `None` if all are zero.
fn weighted_pick(rng: &mut impl Rng, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if x < w {
            return Some(i);
        }
        x -= w;
        last = Some(i);
    }
    last
}

/// Power-law small-world topology: a random spanning tree, then extra links
/// sampled without replacement with probability proportional to
/// `distance^-decay_exponent`, never exceeding `max_ports - 1` links per router.
pub fn gen_smallworld(g: &GridSpec, s: &SmallWorldSpec) -> Result<Topology> {
    g.check()?;
    if !(s.decay_exponent > 0.0 && s.decay_exponent.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "decay exponent must be positive, got {}",
            s.decay_exponent
        )));
    }
    if s.max_ports < 2 {
        return Err(Error::InvalidParam("max_ports must be >= 2".into()));
    }
    let coords = g.coords();
    let n = coords.len();
    let cap = s.max_ports - 1;
    let budget = s.link_budget.unwrap_or_else(|| mesh_link_count(g));
    if budget < n - 1 {
        return Err(Error::Infeasible(format!(
            "link budget {budget} cannot connect {n} routers"
        )));
    }
    if budget > n * (n - 1) / 2 || budget > n * cap / 2 {
        return Err(Error::Infeasible(format!(
            "link budget {budget} exceeds what {n} routers with {} ports can hold",
            s.max_ports
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let weight = |a: usize, b: usize| (manhattan_distance(coords[a], coords[b]) as f64).powf(-s.decay_exponent);
    let mut degree = vec![0usize; n];
    let mut linked = vec![false; n * n];
    let mut pairs = Vec::with_capacity(budget);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for k in 1..n {
        let v = order[k];
        let weights: Vec<f64> = order[..k]
            .iter()
            .map(|&u| if degree[u] < cap { weight(u, v) } else { 0.0 })
            .collect();
        let u = order[weighted_pick(&mut rng, &weights).ok_or_else(|| {
            Error::Infeasible(format!("no spanning tree with max_ports {}", s.max_ports))
        })?];
        degree[u] += 1;
        degree[v] += 1;
        linked[u * n + v] = true;
        linked[v * n + u] = true;
        pairs.push((u.min(v), u.max(v)));
    }

    let mut pool: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !linked[a * n + b] {
                pool.push((a, b));
            }
        }
    }
    let mut weights: Vec<f64> = pool.iter().map(|&(a, b)| weight(a, b)).collect();
    while pairs.len() < budget {
        let Some(k) = weighted_pick(&mut rng, &weights) else {
            return Err(Error::Infeasible(format!(
                "placed {} of {budget} links before the degree caps ran out",
                pairs.len()
            )));
        };
        weights[k] = 0.0;
        let (a, b) = pool[k];
        if degree[a] >= cap || degree[b] >= cap {
            continue;
        }
        degree[a] += 1;
        degree[b] += 1;
        pairs.push((a, b));
        if degree[a] >= cap || degree[b] >= cap {
            for (w, &(x, y)) in weights.iter_mut().zip(&pool) {
                if degree[x] >= cap || degree[y] >= cap {
                    *w = 0.0;
                }
            }
        }
    }
    pairs.sort_unstable();
    Topology::new(coords, &pairs, g.hop_pitch_mm, s.max_ports)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrafficKind {
    Uniform,
    /// `fraction` of every source's traffic goes to the hot cores.
    Hotspot { fraction: f64, hot_cores: usize },
    /// Weight falls off as `distance^-exponent`.
    DistanceDecay { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    #[serde(flatten)]
    pub kind: TrafficKind,
    #[serde(default)]
    pub seed: u64,
}

/// Exponent for which an 8x8 grid puts well over 70% of traffic on
/// nearest-neighbor pairs.
pub const DEFAULT_DECAY_EXPONENT: f64 = 4.0;

impl Default for TrafficSpec {
    fn default() -> Self {
        TrafficSpec {
            kind: TrafficKind::DistanceDecay {
                exponent: DEFAULT_DECAY_EXPONENT,
            },
            seed: 0,
        }
    }
}

/// Synthetic traffic over the cores of `g` (identity placement). Every row sums to 1.
pub fn gen_traffic(g: &GridSpec, ts: &TrafficSpec) -> Result<TrafficMatrix> {
    g.check()?;
    let coords = g.coords();
    let n = coords.len();
    let mut rows = vec![vec![0.0; n]; n];
    match ts.kind {
        TrafficKind::Uniform => {
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, w) in row.iter_mut().enumerate() {
                    if i != j {
                        *w = 1.0 / (n - 1) as f64;
                    }
                }
            }
        }
        TrafficKind::DistanceDecay { exponent } => {
            if !(exponent >= 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "decay exponent must be non-negative, got {exponent}"
                )));
            }
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, w) in row.iter_mut().enumerate() {
                    if i != j {
                        *w = (manhattan_distance(coords[i], coords[j]) as f64).powf(-exponent);
                    }
                }
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|w| *w /= total);
            }
        }
        TrafficKind::Hotspot {
            fraction,
            hot_cores,
        } => {
            if !(0.0..=1.0).contains(&fraction) || hot_cores == 0 || hot_cores >= n {
                return Err(Error::InvalidParam(format!(
                    "hotspot needs fraction in [0, 1] and 1 <= hot_cores < {n}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ts.seed);
            let mut cores: Vec<usize> = (0..n).collect();
            cores.shuffle(&mut rng);
            let mut hot = vec![false; n];
            for &c in &cores[..hot_cores] {
                hot[c] = true;
            }
            for (i, row) in rows.iter_mut().enumerate() {
                let n_hot = (0..n).filter(|&j| j != i && hot[j]).count();
                let n_cold = (0..n).filter(|&j| j != i && !hot[j]).count();
                let (w_hot, w_cold) = match (n_hot, n_cold) {
                    (0, c) => (0.0, 1.0 / c as f64),
                    (h, 0) => (1.0 / h as f64, 0.0),
                    (h, c) => (fraction / h as f64, (1.0 - fraction) / c as f64),
                };
                for (j, w) in row.iter_mut().enumerate() {
                    if i != j {
                        *w = if hot[j] { w_hot } else { w_cold };
                    }
                }
            }
        }
    }
    let tm = TrafficMatrix::from_rows(rows)?;
    tm.require_nonzero()?;
    Ok(tm)
}
