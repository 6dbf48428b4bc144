//! Routing, the traffic-weighted latency/energy/EDP evaluation, and the
//! feature vector used by the learned search.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    clustering_coefficient, validate_design, Design, DesignKind, LinkTier, ProcessParams,
    RouterConfig, StageKind, StageTier, Topology, TrafficMatrix,
};
use crate::timing::{link_cost, stage_cost};

/// Routers visited from source to destination and the links between them.
/// `links[k]` joins `routers[k]` and `routers[k + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub routers: Vec<usize>,
    pub links: Vec<usize>,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.links.len()
    }
}

fn xyz_router_path(
    t: &Topology,
    at: &HashMap<crate::model::Coord, usize>,
    lookup: &HashMap<(usize, usize), usize>,
    a: usize,
    b: usize,
) -> Result<Path> {
    let mut cur = t.routers[a];
    let dst = t.routers[b];
    let mut path = Path {
        routers: vec![a],
        links: Vec::new(),
    };
    let mut here = a;
    for axis in 0..3 {
        loop {
            let (c, d) = match axis {
                0 => (&mut cur.x, dst.x),
                1 => (&mut cur.y, dst.y),
                _ => (&mut cur.z, dst.z),
            };
            if *c == d {
                break;
            }
            if *c < d {
                *c += 1;
            } else {
                *c -= 1;
            }
            let next = *at
                .get(&cur)
                .ok_or_else(|| Error::InvalidParam(format!("mesh has no router at {cur:?}")))?;
            let link = *lookup
                .get(&(here.min(next), here.max(next)))
                .ok_or(Error::Unreachable(here, next))?;
            path.routers.push(next);
            path.links.push(link);
            here = next;
        }
    }
    Ok(path)
}

/// BFS hop distances to `dst` from every router.
fn bfs_to(adj: &[Vec<(usize, usize)>], dst: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[dst] = 0;
    let mut queue = VecDeque::from([dst]);
    while let Some(r) = queue.pop_front() {
        for &(nb, _) in &adj[r] {
            if dist[nb] == usize::MAX {
                dist[nb] = dist[r] + 1;
                queue.push_back(nb);
            }
        }
    }
    dist
}

/// Lexicographically smallest minimum-hop path, given distances to `b`.
fn greedy_path(adj: &[Vec<(usize, usize)>], dist_to_b: &[usize], a: usize, b: usize) -> Result<Path> {
    if dist_to_b[a] == usize::MAX {
        return Err(Error::Unreachable(a, b));
    }
    let mut path = Path {
        routers: vec![a],
        links: Vec::new(),
    };
    let mut cur = a;
    while cur != b {
        // adjacency lists are sorted by neighbor index
        let &(next, link) = adj[cur]
            .iter()
            .find(|(nb, _)| dist_to_b[*nb] + 1 == dist_to_b[cur])
            .expect("BFS distances are consistent");
        path.routers.push(next);
        path.links.push(link);
        cur = next;
    }
    Ok(path)
}

fn core_router(d: &Design, core: usize) -> Result<usize> {
    d.topology.placement.get(core).copied().ok_or_else(|| {
        Error::InvalidParam(format!(
            "core {core} out of range for {} cores",
            d.topology.num_cores()
        ))
    })
}

/// Dimension-order path between the routers of two cores: X, then Y, then Z.
pub fn route_mesh_xyz(d: &Design, i: usize, j: usize) -> Result<Path> {
    if d.kind != DesignKind::Mesh {
        return Err(Error::InvalidParam(
            "dimension-order routing needs a mesh design".into(),
        ));
    }
    let t = &d.topology;
    let at = t.routers.iter().enumerate().map(|(r, &c)| (c, r)).collect();
    xyz_router_path(t, &at, &t.link_lookup(), core_router(d, i)?, core_router(d, j)?)
}

/// Minimum-hop path between the routers of two cores; ties go to the
/// lexicographically smallest router sequence.
pub fn route_shortest(d: &Design, i: usize, j: usize) -> Result<Path> {
    let (a, b) = (core_router(d, i)?, core_router(d, j)?);
    let adj = d.topology.adjacency();
    greedy_path(&adj, &bfs_to(&adj, b), a, b)
}

/// Paths between every ordered pair of routers, computed with the routing
/// function appropriate for the design kind.
#[derive(Debug, Clone)]
pub struct RoutingTable {
    n: usize,
    paths: Vec<Path>,
}

impl RoutingTable {
    pub fn build(d: &Design) -> Result<Self> {
        let t = &d.topology;
        let n = t.num_routers();
        let mut paths = Vec::with_capacity(n * n);
        match d.kind {
            DesignKind::Mesh => {
                let at = t.routers.iter().enumerate().map(|(r, &c)| (c, r)).collect();
                let lookup = t.link_lookup();
                for a in 0..n {
                    for b in 0..n {
                        paths.push(xyz_router_path(t, &at, &lookup, a, b)?);
                    }
                }
            }
            DesignKind::SmallWorld => {
                let adj = t.adjacency();
                let dist: Vec<Vec<usize>> = (0..n).map(|b| bfs_to(&adj, b)).collect();
                for a in 0..n {
                    for (b, dist_b) in dist.iter().enumerate() {
                        paths.push(greedy_path(&adj, dist_b, a, b)?);
                    }
                }
            }
        }
        Ok(RoutingTable { n, paths })
    }

    pub fn num_routers(&self) -> usize {
        self.n
    }

    pub fn path(&self, a: usize, b: usize) -> &Path {
        &self.paths[a * self.n + b]
    }

    pub fn hops(&self, a: usize, b: usize) -> usize {
        self.path(a, b).hops()
    }
}

/// Routing table viewed through a core placement: `path(i, j)` is the path
/// from core `i`'s router to core `j`'s router.
#[derive(Debug, Clone)]
pub struct PathTable {
    pub routing: RoutingTable,
    pub placement: Vec<usize>,
}

impl PathTable {
    pub fn build(d: &Design) -> Result<Self> {
        Ok(PathTable {
            routing: RoutingTable::build(d)?,
            placement: d.topology.placement.clone(),
        })
    }

    pub fn path(&self, i: usize, j: usize) -> &Path {
        self.routing.path(self.placement[i], self.placement[j])
    }
}

/// Traffic-weighted latency and energy of a design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Picoseconds times traffic rate units.
    pub latency: f64,
    /// Picojoules times traffic rate units.
    pub energy: f64,
    pub edp: f64,
}

impl EvalResult {
    pub fn new(latency: f64, energy: f64) -> Self {
        EvalResult {
            latency,
            energy,
            edp: latency * energy,
        }
    }
}

fn check_traffic(d: &Design, tm: &TrafficMatrix) -> Result<()> {
    if tm.n() != d.topology.num_cores() {
        return Err(Error::InvalidParam(format!(
            "traffic matrix is {0}x{0} but the design has {1} cores",
            tm.n(),
            d.topology.num_cores()
        )));
    }
    Ok(())
}

/// Per-element costs of a design: stage delay (ps) and energy (pJ) of every
/// router stage, and total delay/energy of every link.
#[derive(Debug, Clone)]
pub struct ElementCosts {
    pub stage_delay_ps: Vec<[f64; 3]>,
    pub stage_energy_pj: Vec<[f64; 3]>,
    pub link_delay_ps: Vec<f64>,
    pub link_energy_pj: Vec<f64>,
}

impl ElementCosts {
    pub fn compute(d: &Design, pp: &ProcessParams, rc: &RouterConfig) -> Result<Self> {
        let t = &d.topology;
        let degrees = t.degrees();
        let mut stage_delay_ps = Vec::with_capacity(degrees.len());
        let mut stage_energy_pj = Vec::with_capacity(degrees.len());
        for (r, &deg) in degrees.iter().enumerate() {
            let p = deg as u32 + 1;
            let mut delay = [0.0; 3];
            let mut energy = [0.0; 3];
            for kind in StageKind::ALL {
                let c = stage_cost(kind, d.tiers.stage_tier(r, kind), p, rc.vcs, rc.flit_bits, pp)?;
                delay[kind.index()] = c.delay_ps(pp);
                energy[kind.index()] = c.energy_abs_pj;
            }
            stage_delay_ps.push(delay);
            stage_energy_pj.push(energy);
        }
        let (link_delay_ps, link_energy_pj) = t
            .links
            .iter()
            .zip(&d.tiers.link)
            .map(|(l, &tier)| {
                let c = link_cost(tier, pp);
                (l.length_mm * c.delay_ps_per_mm, l.length_mm * c.energy_pj_per_mm)
            })
            .unzip();
        Ok(ElementCosts {
            stage_delay_ps,
            stage_energy_pj,
            link_delay_ps,
            link_energy_pj,
        })
    }
}

/// Latency, energy and EDP of a validated design under `tm` and `pp`.
///
/// Sums, for every core pair, the traffic-weighted cost of every stage of
/// every router on the path plus every link on the path. Each router's port
/// count is its degree plus the local port.
pub fn evaluate(
    d: &Design,
    tm: &TrafficMatrix,
    pp: &ProcessParams,
    rc: &RouterConfig,
) -> Result<EvalResult> {
    let report = validate_design(d);
    if !report.ok() {
        return Err(Error::Invalid(report));
    }
    check_traffic(d, tm)?;
    let paths = PathTable::build(d)?;
    let costs = ElementCosts::compute(d, pp, rc)?;
    let mut latency = 0.0;
    let mut energy = 0.0;
    for (i, j, f) in tm.entries() {
        let path = paths.path(i, j);
        let mut t = 0.0;
        let mut e = 0.0;
        for &r in &path.routers {
            t += costs.stage_delay_ps[r].iter().sum::<f64>();
            e += costs.stage_energy_pj[r].iter().sum::<f64>();
        }
        for &u in &path.links {
            t += costs.link_delay_ps[u];
            e += costs.link_energy_pj[u];
        }
        latency += f * t;
        energy += f * e;
    }
    Ok(EvalResult::new(latency, energy))
}

/// Traffic carried by every router and link under a routing table and placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Usage {
    pub router: Vec<f64>,
    pub link: Vec<f64>,
}

impl Usage {
    pub fn compute(routing: &RoutingTable, placement: &[usize], num_links: usize, tm: &TrafficMatrix) -> Self {
        let mut usage = Usage {
            router: vec![0.0; routing.num_routers()],
            link: vec![0.0; num_links],
        };
        for (i, j, f) in tm.entries() {
            let path = routing.path(placement[i], placement[j]);
            for &r in &path.routers {
                usage.router[r] += f;
            }
            for &u in &path.links {
                usage.link[u] += f;
            }
        }
        usage
    }
}

/// Stage costs for every port count a router can have, so that evaluating a
/// design with known usage is a weighted sum over its elements.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub pp: ProcessParams,
    pub rc: RouterConfig,
    /// `[ports][stage][tier] -> (delay_ps, energy_pj)`
    stage: Vec<[[(f64, f64); 3]; 3]>,
    /// Indexed by `LinkTier as usize`: `(delay_ps_per_mm, energy_pj_per_mm)`.
    link: [(f64, f64); 2],
}

impl CostModel {
    pub fn new(pp: ProcessParams, rc: RouterConfig, max_ports: usize) -> Result<Self> {
        pp.check()?;
        rc.check()?;
        let mut stage = vec![[[(0.0, 0.0); 3]; 3]; max_ports.max(2) + 1];
        for (p, row) in stage.iter_mut().enumerate().skip(2) {
            for kind in StageKind::ALL {
                for tier in StageTier::ALL {
                    let cost = if pp.tiers < 2 && tier != StageTier::Bt {
                        (f64::INFINITY, f64::INFINITY)
                    } else {
                        let c = stage_cost(kind, tier, p as u32, rc.vcs, rc.flit_bits, &pp)?;
                        (c.delay_ps(&pp), c.energy_abs_pj)
                    };
                    row[kind.index()][tier as usize] = cost;
                }
            }
        }
        let link = [LinkTier::Top, LinkTier::Bottom].map(|tier| {
            let c = link_cost(tier, &pp);
            (c.delay_ps_per_mm, c.energy_pj_per_mm)
        });
        Ok(CostModel {
            pp,
            rc,
            stage,
            link,
        })
    }

    pub fn stage(&self, ports: usize, kind: StageKind, tier: StageTier) -> (f64, f64) {
        self.stage[ports][kind.index()][tier as usize]
    }

    pub fn link(&self, tier: LinkTier) -> (f64, f64) {
        self.link[tier as usize]
    }

    /// Evaluation from precomputed usage. Agrees with [`evaluate`] up to
    /// floating-point summation order.
    pub fn score(&self, d: &Design, degrees: &[usize], usage: &Usage) -> EvalResult {
        let mut latency = 0.0;
        let mut energy = 0.0;
        for (r, &w) in usage.router.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let ports = degrees[r] + 1;
            let (mut t, mut e) = (0.0, 0.0);
            for kind in StageKind::ALL {
                let (dt, de) = self.stage(ports, kind, d.tiers.stage[r][kind.index()]);
                t += dt;
                e += de;
            }
            latency += w * t;
            energy += w * e;
        }
        for ((l, &tier), &w) in d.topology.links.iter().zip(&d.tiers.link).zip(&usage.link) {
            if w == 0.0 {
                continue;
            }
            let (dt, de) = self.link(tier);
            latency += w * l.length_mm * dt;
            energy += w * l.length_mm * de;
        }
        EvalResult::new(latency, energy)
    }
}

/// Design descriptors used to learn the search evaluation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub avg_hops: f64,
    pub weighted_hops: f64,
    pub clustering: f64,
    /// Traffic-weighted extra delay (ps) of bottom-tier links.
    pub bottom_link_penalty: f64,
    /// Traffic-weighted extra delay (ps) of TT/MT stages over their BT delay,
    /// counting only stages slower than BT.
    pub top_stage_penalty: f64,
}

impl FeatureVector {
    pub const LEN: usize = 5;

    pub fn to_array(&self) -> [f64; Self::LEN] {
        [
            self.avg_hops,
            self.weighted_hops,
            self.clustering,
            self.bottom_link_penalty,
            self.top_stage_penalty,
        ]
    }
}

/// Computes features from precomputed routing and usage.
pub fn features_with(
    d: &Design,
    routing: &RoutingTable,
    usage: &Usage,
    degrees: &[usize],
    tm: &TrafficMatrix,
    model: &CostModel,
) -> FeatureVector {
    let n = routing.num_routers();
    let mut hop_sum = 0usize;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                hop_sum += routing.hops(a, b);
            }
        }
    }
    let avg_hops = if n > 1 {
        hop_sum as f64 / (n * (n - 1)) as f64
    } else {
        0.0
    };

    let placement = &d.topology.placement;
    let total = tm.total();
    let weighted_hops = if total > 0.0 {
        tm.entries()
            .map(|(i, j, f)| f * routing.hops(placement[i], placement[j]) as f64)
            .sum::<f64>()
            / total
    } else {
        0.0
    };

    let clustering = clustering_coefficient(&d.topology).unwrap_or(0.0);

    let pp = &model.pp;
    let bottom_link_penalty = d
        .topology
        .links
        .iter()
        .zip(&d.tiers.link)
        .zip(&usage.link)
        .filter(|((_, &tier), _)| tier == LinkTier::Bottom)
        .map(|((l, _), &w)| w * l.length_mm * pp.beta * pp.t_cu_ps_per_mm)
        .sum();

    let mut top_stage_penalty = 0.0;
    for (r, &w) in usage.router.iter().enumerate() {
        let ports = degrees[r] + 1;
        for kind in StageKind::ALL {
            let tier = d.tiers.stage[r][kind.index()];
            if tier == StageTier::Bt {
                continue;
            }
            let excess = model.stage(ports, kind, tier).0 - model.stage(ports, kind, StageTier::Bt).0;
            top_stage_penalty += w * excess.max(0.0);
        }
    }

    FeatureVector {
        avg_hops,
        weighted_hops,
        clustering,
        bottom_link_penalty,
        top_stage_penalty,
    }
}

/// Feature vector of a validated design.
pub fn features(
    d: &Design,
    tm: &TrafficMatrix,
    pp: &ProcessParams,
    rc: &RouterConfig,
) -> Result<FeatureVector> {
    let report = validate_design(d);
    if !report.ok() {
        return Err(Error::Invalid(report));
    }
    check_traffic(d, tm)?;
    let routing = RoutingTable::build(d)?;
    let usage = Usage::compute(&routing, &d.topology.placement, d.topology.links.len(), tm);
    let degrees = d.topology.degrees();
    let model = CostModel::new(*pp, *rc, degrees.iter().max().copied().unwrap_or(1) + 1)?;
    Ok(features_with(d, &routing, &usage, &degrees, tm, &model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coord, TierAssignment, Topology};
    use crate::timing::stage_delay_2d;

    fn design(kind: DesignKind, routers: Vec<Coord>, pairs: &[(usize, usize)]) -> Design {
        let n = routers.len();
        let topology = Topology::new(routers, pairs, 1.0, 7).unwrap();
        Design {
            tiers: TierAssignment::uniform(n, pairs.len(), StageTier::Bt, LinkTier::Bottom),
            topology,
            kind,
        }
    }

    fn mesh222() -> Design {
        let g = crate::model::GridSpec::new(3, 2, 2, 1.0).unwrap();
        let coords = g.coords();
        let mut pairs = Vec::new();
        for (a, ca) in coords.iter().enumerate() {
            for (b, cb) in coords.iter().enumerate().skip(a + 1) {
                if crate::model::manhattan_distance(*ca, *cb) == 1 {
                    pairs.push((a, b));
                }
            }
        }
        design(DesignKind::Mesh, coords, &pairs)
    }

    fn ring(n: usize) -> Design {
        let coords = (0..n as u32).map(|x| Coord::new(x, 0, 0)).collect();
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        design(DesignKind::SmallWorld, coords, &pairs)
    }

    #[test]
    fn xyz_corrects_x_then_y_then_z() {
        let d = mesh222();
        let g = crate::model::GridSpec::new(3, 2, 2, 1.0).unwrap();
        let idx = |x, y, z| g.index(Coord::new(x, y, z));
        let p = route_mesh_xyz(&d, idx(0, 0, 0), idx(2, 1, 1)).unwrap();
        assert_eq!(
            p.routers,
            vec![idx(0, 0, 0), idx(1, 0, 0), idx(2, 0, 0), idx(2, 1, 0), idx(2, 1, 1)]
        );
        assert_eq!(p.links.len(), 4);
        let p = route_mesh_xyz(&d, idx(1, 1, 0), idx(0, 1, 0)).unwrap();
        assert_eq!(p.routers, vec![idx(1, 1, 0), idx(0, 1, 0)]);
        let p = route_mesh_xyz(&d, 3, 3).unwrap();
        assert_eq!(p.routers, vec![3]);
        assert!(p.links.is_empty());
    }

    #[test]
    fn xyz_rejects_small_world() {
        assert!(route_mesh_xyz(&ring(4), 0, 1).is_err());
    }

    #[test]
    fn shortest_tie_breaks_lexicographically() {
        let d = ring(4);
        assert_eq!(route_shortest(&d, 0, 2).unwrap().routers, vec![0, 1, 2]);
        assert_eq!(route_shortest(&d, 0, 1).unwrap().routers, vec![0, 1]);
        let d = ring(5);
        assert_eq!(route_shortest(&d, 0, 3).unwrap().routers, vec![0, 4, 3]);
    }

    #[test]
    fn shortest_unreachable_is_error() {
        let coords = (0..3).map(|x| Coord::new(x, 0, 0)).collect();
        let d = design(DesignKind::SmallWorld, coords, &[(0, 1)]);
        assert!(matches!(route_shortest(&d, 0, 2), Err(Error::Unreachable(0, 2))));
    }

    fn pair_design() -> Design {
        design(
            DesignKind::SmallWorld,
            vec![Coord::new(0, 0, 0), Coord::new(1, 0, 0)],
            &[(0, 1)],
        )
    }

    fn pair_params(beta: f64) -> ProcessParams {
        let mut pp = ProcessParams::default().with_variation(0.0, beta, 0.0);
        pp.t_cu_ps_per_mm = 100.0;
        pp.fo4_ps = 1.0;
        pp
    }

    #[test]
    fn zero_traffic_is_zero() {
        let r = evaluate(&pair_design(), &TrafficMatrix::zeros(2), &pair_params(0.0), &RouterConfig::default()).unwrap();
        assert_eq!((r.latency, r.energy, r.edp), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_flow_latency() {
        let mut tm = TrafficMatrix::zeros(2);
        tm.set(0, 1, 1.0).unwrap();
        let rc = RouterConfig::default();
        let r = evaluate(&pair_design(), &tm, &pair_params(0.0), &rc).unwrap();
        let per_router: f64 = StageKind::ALL
            .iter()
            .map(|&k| stage_delay_2d(k, 2, 4, 32).unwrap())
            .sum();
        assert!((per_router - 128.83).abs() < 0.005, "{per_router}");
        assert!((r.latency - (2.0 * per_router + 100.0)).abs() < 1e-9);
        assert!((r.latency - 357.66).abs() < 0.01);

        let r2 = evaluate(&pair_design(), &tm, &pair_params(0.3), &rc).unwrap();
        assert!((r2.latency - r.latency - 30.0).abs() < 1e-9);
        assert_eq!(r.edp, r.latency * r.energy);
    }

    #[test]
    fn invalid_design_is_rejected() {
        let mut d = pair_design();
        d.tiers.link[0] = LinkTier::Top;
        let tm = TrafficMatrix::zeros(2);
        assert!(matches!(
            evaluate(&d, &tm, &pair_params(0.0), &RouterConfig::default()),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn fast_score_matches_reference() {
        let mut d = mesh222();
        d.tiers.stage[0] = [StageTier::Mt, StageTier::Mt, StageTier::Tt];
        d.tiers.stage[1] = [StageTier::Mt; 3];
        d.tiers.link[0] = LinkTier::Top;
        d.topology.placement.swap(2, 7);
        let mut tm = TrafficMatrix::zeros(12);
        for i in 0..12 {
            for j in 0..12 {
                if i != j {
                    tm.set(i, j, ((i * 7 + j * 3) % 5) as f64).unwrap();
                }
            }
        }
        let pp = ProcessParams::default().with_variation(0.15, 0.2, 0.1);
        let rc = RouterConfig::default();
        let reference = evaluate(&d, &tm, &pp, &rc).unwrap();
        let routing = RoutingTable::build(&d).unwrap();
        let usage = Usage::compute(&routing, &d.topology.placement, d.topology.links.len(), &tm);
        let model = CostModel::new(pp, rc, 7).unwrap();
        let fast = model.score(&d, &d.topology.degrees(), &usage);
        assert!((fast.latency / reference.latency - 1.0).abs() < 1e-12);
        assert!((fast.energy / reference.energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feature_examples() {
        // Complete graph on 4 routers.
        let coords = (0..4).map(|x| Coord::new(x, 0, 0)).collect();
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut d = design(DesignKind::SmallWorld, coords, &pairs);
        let mut tm = TrafficMatrix::zeros(4);
        tm.set(0, 3, 2.0).unwrap();
        tm.set(1, 2, 1.0).unwrap();
        let pp = ProcessParams::default().with_variation(0.1, 0.2, 0.1);
        let rc = RouterConfig::default();
        let f = features(&d, &tm, &pp, &rc).unwrap();
        assert_eq!(f.avg_hops, 1.0);
        assert_eq!(f.weighted_hops, 1.0);
        assert_eq!(f.clustering, 1.0);
        assert_eq!(f.top_stage_penalty, 0.0);
        // link 0-3 (length 3 mm) carries 2, link 1-2 (1 mm) carries 1
        let expected = (2.0 * 3.0 + 1.0) * 0.2 * pp.t_cu_ps_per_mm;
        assert!((f.bottom_link_penalty - expected).abs() < 1e-9);

        d.tiers = TierAssignment::uniform(4, 6, StageTier::Tt, LinkTier::Top);
        let f = features(&d, &tm, &pp, &rc).unwrap();
        assert_eq!(f.bottom_link_penalty, 0.0);
        assert!(f.top_stage_penalty > 0.0);
        assert!(f.to_array().iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}
