use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::grid::{manhattan_distance, Coord};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_PORTS: usize = 7;

/// Undirected inter-router link. `a < b` for links built by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    /// Length in grid units.
    pub manhattan_len: u32,
    pub length_mm: f64,
}

impl Link {
    pub fn other(&self, r: usize) -> usize {
        if self.a == r {
            self.b
        } else {
            self.a
        }
    }

    fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// Routers, links, and the core-to-router binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub routers: Vec<Coord>,
    pub links: Vec<Link>,
    /// `placement[core] = router`.
    pub placement: Vec<usize>,
    pub hop_pitch_mm: f64,
    pub max_ports: usize,
}

impl Topology {
    /// Builds a topology from router pairs, computing link lengths from the coordinates.
    /// Placement starts as the identity.
    pub fn new(
        routers: Vec<Coord>,
        pairs: &[(usize, usize)],
        hop_pitch_mm: f64,
        max_ports: usize,
    ) -> Result<Self> {
        let n = routers.len();
        let mut links = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::InvalidParam(format!(
                    "link ({a}, {b}) references a router outside 0..{n}"
                )));
            }
            links.push(make_link(&routers, a, b, hop_pitch_mm));
        }
        Ok(Topology {
            placement: (0..n).collect(),
            routers,
            links,
            hop_pitch_mm,
            max_ports,
        })
    }

    pub fn num_routers(&self) -> usize {
        self.routers.len()
    }

    pub fn num_cores(&self) -> usize {
        self.placement.len()
    }

    /// Builds a new link between two routers of this topology.
    pub fn make_link(&self, a: usize, b: usize) -> Link {
        make_link(&self.routers, a, b, self.hop_pitch_mm)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_routers()];
        for l in &self.links {
            deg[l.a] += 1;
            deg[l.b] += 1;
        }
        deg
    }

    /// `adjacency()[r]` lists `(neighbor, link_id)` sorted by neighbor.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_routers()];
        for (id, l) in self.links.iter().enumerate() {
            if l.a < adj.len() && l.b < adj.len() {
                adj[l.a].push((l.b, id));
                adj[l.b].push((l.a, id));
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn link_lookup(&self) -> HashMap<(usize, usize), usize> {
        self.links
            .iter()
            .enumerate()
            .map(|(id, l)| (l.key(), id))
            .collect()
    }

    pub fn has_link(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.links.iter().any(|l| l.key() == key)
    }

    /// Routers reachable from router 0, optionally ignoring one link.
    fn reachable(&self, skip_link: Option<usize>) -> Vec<bool> {
        let n = self.num_routers();
        let mut seen = vec![false; n];
        if n == 0 {
            return seen;
        }
        let adj = self.adjacency();
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(r) = queue.pop_front() {
            for &(nb, id) in &adj[r] {
                if Some(id) != skip_link && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.reachable(None).iter().all(|&s| s)
    }

    /// Routers not reachable from router 0.
    pub fn disconnected_routers(&self) -> Vec<usize> {
        self.reachable(None)
            .iter()
            .enumerate()
            .filter(|(_, &s)| !s)
            .map(|(r, _)| r)
            .collect()
    }

    /// True if removing the link disconnects a connected topology.
    pub fn is_bridge(&self, link: usize) -> bool {
        !self.reachable(Some(link)).iter().all(|&s| s)
    }
}

fn make_link(routers: &[Coord], a: usize, b: usize, hop_pitch_mm: f64) -> Link {
    let (a, b) = (a.min(b), a.max(b));
    let manhattan_len = manhattan_distance(routers[a], routers[b]);
    Link {
        a,
        b,
        manhattan_len,
        length_mm: manhattan_len as f64 * hop_pitch_mm,
    }
}

/// Mean over routers of the fraction of neighbor pairs that are themselves linked.
/// Routers with fewer than two neighbors contribute 0.
pub fn clustering_coefficient(t: &Topology) -> Result<f64> {
    let n = t.num_routers();
    if n < 3 {
        return Err(Error::InvalidParam(format!(
            "clustering coefficient needs at least 3 routers, got {n}"
        )));
    }
    let adj = t.adjacency();
    let mut linked = vec![false; n * n];
    for l in &t.links {
        linked[l.a * n + l.b] = true;
        linked[l.b * n + l.a] = true;
    }
    let mut total = 0.0;
    for nbrs in &adj {
        let deg = nbrs.len();
        if deg < 2 {
            continue;
        }
        let mut triangles = 0usize;
        for (i, &(u, _)) in nbrs.iter().enumerate() {
            for &(v, _) in &nbrs[i + 1..] {
                if linked[u * n + v] {
                    triangles += 1;
                }
            }
        }
        total += 2.0 * triangles as f64 / (deg * (deg - 1)) as f64;
    }
    Ok(total / n as f64)
}
