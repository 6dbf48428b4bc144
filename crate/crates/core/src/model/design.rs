use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::topology::Topology;
use crate::error::{Error, Result};

/// The three router pipeline stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StageKind {
    /// Virtual channel allocator.
    Vca,
    /// Switch allocator.
    Swa,
    /// Crossbar traversal.
    Xbar,
}

impl StageKind {
    pub const ALL: [StageKind; 3] = [StageKind::Vca, StageKind::Swa, StageKind::Xbar];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Stages attached to router ports, and therefore to links.
    pub fn is_port_stage(self) -> bool {
        !matches!(self, StageKind::Xbar)
    }

    pub fn name(self) -> &'static str {
        match self {
            StageKind::Vca => "VCA",
            StageKind::Swa => "SWA",
            StageKind::Xbar => "XBAR",
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tier placement of one router stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StageTier {
    /// Bottom tier only.
    Bt,
    /// Top tier only.
    Tt,
    /// Split across both tiers.
    Mt,
}

impl StageTier {
    pub const ALL: [StageTier; 3] = [StageTier::Bt, StageTier::Tt, StageTier::Mt];

    pub fn compatible_with(self, link: LinkTier) -> bool {
        !matches!(
            (self, link),
            (StageTier::Bt, LinkTier::Top) | (StageTier::Tt, LinkTier::Bottom)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            StageTier::Bt => "BT",
            StageTier::Tt => "TT",
            StageTier::Mt => "MT",
        }
    }
}

impl fmt::Display for StageTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StageTier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BT" => Ok(StageTier::Bt),
            "TT" => Ok(StageTier::Tt),
            "MT" => Ok(StageTier::Mt),
            other => Err(Error::InvalidParam(format!("unknown stage tier `{other}`"))),
        }
    }
}

/// Tier placement of an inter-router link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkTier {
    /// Copper back-end interconnect.
    Top,
    /// Tungsten back-end interconnect.
    Bottom,
}

impl LinkTier {
    pub fn flipped(self) -> Self {
        match self {
            LinkTier::Top => LinkTier::Bottom,
            LinkTier::Bottom => LinkTier::Top,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkTier::Top => "top",
            LinkTier::Bottom => "bottom",
        }
    }
}

impl fmt::Display for LinkTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkTier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "top" => Ok(LinkTier::Top),
            "bottom" => Ok(LinkTier::Bottom),
            other => Err(Error::InvalidParam(format!("unknown link tier `{other}`"))),
        }
    }
}

/// Per-router, per-stage and per-link tier choices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TierAssignment {
    /// `stage[router][StageKind::index()]`
    pub stage: Vec<[StageTier; 3]>,
    pub link: Vec<LinkTier>,
}

impl TierAssignment {
    pub fn uniform(routers: usize, links: usize, stage: StageTier, link: LinkTier) -> Self {
        TierAssignment {
            stage: vec![[stage; 3]; routers],
            link: vec![link; links],
        }
    }

    pub fn stage_tier(&self, router: usize, kind: StageKind) -> StageTier {
        self.stage[router][kind.index()]
    }

    /// Counts of (BT, TT, MT) over the given stage kinds.
    pub fn stage_counts(&self, kinds: &[StageKind]) -> [usize; 3] {
        let mut counts = [0; 3];
        for router in &self.stage {
            for k in kinds {
                counts[router[k.index()] as usize] += 1;
            }
        }
        counts
    }

    pub fn top_links(&self) -> usize {
        self.link.iter().filter(|&&t| t == LinkTier::Top).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignKind {
    Mesh,
    SmallWorld,
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignKind::Mesh => "mesh",
            DesignKind::SmallWorld => "small_world",
        })
    }
}

/// A complete point in the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub topology: Topology,
    pub tiers: TierAssignment,
    pub kind: DesignKind,
}

/// Router microarchitecture parameters shared by every router.
/// The port count is per router (degree + 1) and is not stored here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RouterConfig {
    pub vcs: u32,
    pub flit_bits: u32,
    pub flits_per_packet: u32,
}

impl Default for RouterConfig {
    fn default() -> Self {
        RouterConfig {
            vcs: 4,
            flit_bits: 32,
            flits_per_packet: 6,
        }
    }
}

impl RouterConfig {
    pub fn check(&self) -> Result<()> {
        if self.vcs == 0 || self.flit_bits == 0 || self.flits_per_packet == 0 {
            return Err(Error::InvalidParam(format!(
                "router config fields must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }
}
