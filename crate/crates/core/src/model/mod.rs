//! Domain types: grid, topology, tier assignment, traffic, and process parameters.

mod design;
mod grid;
mod params;
mod topology;
mod traffic;
mod validate;

pub use design::{
    Design, DesignKind, LinkTier, RouterConfig, StageKind, StageTier, TierAssignment,
};
pub use grid::{manhattan_distance, Coord, GridSpec};
pub use params::ProcessParams;
pub use topology::{clustering_coefficient, Link, Topology, DEFAULT_MAX_PORTS};
pub use traffic::TrafficMatrix;
pub use validate::{validate_design, ValidationReport, Violation};
