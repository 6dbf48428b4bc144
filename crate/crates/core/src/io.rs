//! CSV and JSON file formats.
//!
//! * traffic: `src,dst,weight`, one row per nonzero entry
//! * design directory: `design.json`, `routers.csv`, `links.csv`,
//!   `placement.csv`, `stage_tiers.csv`, `link_tiers.csv`
//! * evaluation rows: `design_id,alpha,beta,gamma,latency_ps,energy_pj,edp`
//! * optimizer history: `iteration,step,best_edp,dataset_rows`

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseErrorKind, Result};
use crate::model::{
    Coord, Design, DesignKind, Link, LinkTier, ProcessParams, StageTier, TierAssignment, Topology,
    TrafficMatrix,
};
use crate::route::EvalResult;
use crate::search::HistoryRow;

pub const TRAFFIC_HEADER: &str = "src,dst,weight";

fn parse_err(path: &Path, line: u64, kind: ParseErrorKind) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        kind,
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn check_header(path: &Path, rdr: &mut csv::Reader<fs::File>, expected: &str) -> Result<()> {
    let headers = rdr.headers()?;
    let got: Vec<&str> = headers.iter().collect();
    if got.join(",") != expected {
        return Err(parse_err(path, 1, ParseErrorKind::Header(expected.into())));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, k: usize) -> Result<T> {
    let raw = rec.get(k).unwrap_or("");
    raw.parse().map_err(|_| {
        parse_err(
            path,
            line,
            ParseErrorKind::Malformed(format!("field {} `{raw}`", k + 1)),
        )
    })
}

fn expect_width(path: &Path, line: u64, rec: &csv::StringRecord, width: usize) -> Result<()> {
    if rec.len() != width {
        return Err(parse_err(
            path,
            line,
            ParseErrorKind::Malformed(format!("expected {width} fields, got {}", rec.len())),
        ));
    }
    Ok(())
}

/// Reads an `n`-core traffic matrix. Entries not listed are zero.
pub fn load_traffic_csv(path: impl AsRef<Path>, n: usize) -> Result<TrafficMatrix> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    check_header(path, &mut rdr, TRAFFIC_HEADER)?;
    let mut tm = TrafficMatrix::zeros(n);
    let mut seen = HashSet::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k as u64 + 2;
        let rec = rec.map_err(|e| parse_err(path, line, ParseErrorKind::Malformed(e.to_string())))?;
        expect_width(path, line, &rec, 3)?;
        let src: usize = field(path, line, &rec, 0)?;
        let dst: usize = field(path, line, &rec, 1)?;
        let w: f64 = field(path, line, &rec, 2)?;
        for index in [src, dst] {
            if index >= n {
                return Err(parse_err(path, line, ParseErrorKind::OutOfRange { index, n }));
            }
        }
        if !w.is_finite() {
            return Err(parse_err(path, line, ParseErrorKind::Malformed(format!("weight {w}"))));
        }
        if w < 0.0 {
            return Err(parse_err(path, line, ParseErrorKind::NegativeWeight(w)));
        }
        if src == dst {
            return Err(parse_err(path, line, ParseErrorKind::SelfTraffic(src)));
        }
        if !seen.insert((src, dst)) {
            return Err(parse_err(path, line, ParseErrorKind::DuplicatePair(src, dst)));
        }
        tm.set(src, dst, w)?;
    }
    Ok(tm)
}

/// Writes `contents` to `path` through a temporary file and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_traffic_csv(path: impl AsRef<Path>, tm: &TrafficMatrix) -> Result<()> {
    let mut out = String::from(TRAFFIC_HEADER);
    out.push('\n');
    for (i, j, w) in tm.entries() {
        out.push_str(&format!("{i},{j},{w}\n"));
    }
    write_atomic(path.as_ref(), out.as_bytes())
}

/// Serializes rows with a header line.
pub fn write_rows<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path.as_ref(), e.into_error()))?;
    write_atomic(path.as_ref(), &bytes)
}

pub fn read_rows<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let mut rdr = reader(path.as_ref())?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterRow {
    pub router_id: usize,
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRow {
    pub link_id: usize,
    pub router_a: usize,
    pub router_b: usize,
    pub manhattan_len: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PlacementRow {
    core: usize,
    router: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StageTierRow {
    router_id: usize,
    vca: String,
    swa: String,
    xbar: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LinkTierRow {
    link_id: usize,
    tier: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DesignMeta {
    kind: DesignKind,
    hop_pitch_mm: f64,
    max_ports: usize,
}

pub const DESIGN_FILES: [&str; 6] = [
    "design.json",
    "routers.csv",
    "links.csv",
    "placement.csv",
    "stage_tiers.csv",
    "link_tiers.csv",
];

pub fn write_topology_csv(dir: &Path, t: &Topology) -> Result<()> {
    let routers: Vec<RouterRow> = t
        .routers
        .iter()
        .enumerate()
        .map(|(router_id, c)| RouterRow {
            router_id,
            x: c.x,
            y: c.y,
            z: c.z,
        })
        .collect();
    write_rows(dir.join("routers.csv"), &routers)?;
    let links: Vec<LinkRow> = t
        .links
        .iter()
        .enumerate()
        .map(|(link_id, l)| LinkRow {
            link_id,
            router_a: l.a,
            router_b: l.b,
            manhattan_len: l.manhattan_len,
        })
        .collect();
    write_rows(dir.join("links.csv"), &links)
}

/// Writes a design as a directory of CSV files plus `design.json`.
pub fn write_design_dir(dir: impl AsRef<Path>, d: &Design) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = DesignMeta {
        kind: d.kind,
        hop_pitch_mm: d.topology.hop_pitch_mm,
        max_ports: d.topology.max_ports,
    };
    write_atomic(&dir.join("design.json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;
    write_topology_csv(dir, &d.topology)?;
    let placement: Vec<PlacementRow> = d
        .topology
        .placement
        .iter()
        .enumerate()
        .map(|(core, &router)| PlacementRow { core, router })
        .collect();
    write_rows(dir.join("placement.csv"), &placement)?;
    let stages: Vec<StageTierRow> = d
        .tiers
        .stage
        .iter()
        .enumerate()
        .map(|(router_id, s)| StageTierRow {
            router_id,
            vca: s[0].to_string(),
            swa: s[1].to_string(),
            xbar: s[2].to_string(),
        })
        .collect();
    write_rows(dir.join("stage_tiers.csv"), &stages)?;
    let links: Vec<LinkTierRow> = d
        .tiers
        .link
        .iter()
        .enumerate()
        .map(|(link_id, t)| LinkTierRow {
            link_id,
            tier: t.to_string(),
        })
        .collect();
    write_rows(dir.join("link_tiers.csv"), &links)
}

fn check_ids(path: &Path, ids: impl Iterator<Item = usize>) -> Result<()> {
    for (expected, id) in ids.enumerate() {
        if id != expected {
            return Err(parse_err(
                path,
                expected as u64 + 2,
                ParseErrorKind::Malformed(format!("id {id} out of sequence, expected {expected}")),
            ));
        }
    }
    Ok(())
}

fn parse_tier<T: std::str::FromStr>(path: &Path, line: usize, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(path, line as u64 + 2, ParseErrorKind::Malformed(format!("tier `{s}`"))))
}

/// Reads a design directory. Link lengths are taken from the file as
/// written, so inconsistent lengths surface in validation.
pub fn read_design_dir(dir: impl AsRef<Path>) -> Result<Design> {
    let dir = dir.as_ref();
    let meta_path = dir.join("design.json");
    let meta: DesignMeta =
        serde_json::from_slice(&fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?)?;

    let p = dir.join("routers.csv");
    let routers: Vec<RouterRow> = read_rows(&p)?;
    check_ids(&p, routers.iter().map(|r| r.router_id))?;
    let coords: Vec<Coord> = routers.iter().map(|r| Coord::new(r.x, r.y, r.z)).collect();

    let p = dir.join("links.csv");
    let link_rows: Vec<LinkRow> = read_rows(&p)?;
    check_ids(&p, link_rows.iter().map(|r| r.link_id))?;
    let links = link_rows
        .iter()
        .map(|r| Link {
            a: r.router_a,
            b: r.router_b,
            manhattan_len: r.manhattan_len,
            length_mm: r.manhattan_len as f64 * meta.hop_pitch_mm,
        })
        .collect();

    let p = dir.join("placement.csv");
    let placement_rows: Vec<PlacementRow> = read_rows(&p)?;
    check_ids(&p, placement_rows.iter().map(|r| r.core))?;

    let p = dir.join("stage_tiers.csv");
    let stage_rows: Vec<StageTierRow> = read_rows(&p)?;
    check_ids(&p, stage_rows.iter().map(|r| r.router_id))?;
    let stage = stage_rows
        .iter()
        .enumerate()
        .map(|(k, r)| -> Result<[StageTier; 3]> {
            Ok([
                parse_tier(&p, k, &r.vca)?,
                parse_tier(&p, k, &r.swa)?,
                parse_tier(&p, k, &r.xbar)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let p = dir.join("link_tiers.csv");
    let tier_rows: Vec<LinkTierRow> = read_rows(&p)?;
    check_ids(&p, tier_rows.iter().map(|r| r.link_id))?;
    let link = tier_rows
        .iter()
        .enumerate()
        .map(|(k, r)| parse_tier::<LinkTier>(&p, k, &r.tier))
        .collect::<Result<Vec<_>>>()?;

    Ok(Design {
        topology: Topology {
            routers: coords,
            links,
            placement: placement_rows.iter().map(|r| r.router).collect(),
            hop_pitch_mm: meta.hop_pitch_mm,
            max_ports: meta.max_ports,
        },
        tiers: TierAssignment { stage, link },
        kind: meta.kind,
    })
}

/// One evaluation, as written to `eval.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub design_id: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub latency_ps: f64,
    pub energy_pj: f64,
    pub edp: f64,
}

impl EvalRow {
    pub fn new(design_id: impl Into<String>, pp: &ProcessParams, r: &EvalResult) -> Self {
        EvalRow {
            design_id: design_id.into(),
            alpha: pp.alpha,
            beta: pp.beta,
            gamma: pp.gamma,
            latency_ps: r.latency,
            energy_pj: r.energy,
            edp: r.edp,
        }
    }
}

pub fn write_history_csv(path: impl AsRef<Path>, rows: &[HistoryRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.to_path_buf())
}
