//! Process-variation-aware design-space exploration for two-tier monolithic
//! 3D network-on-chip architectures.
//!
//! A [`Design`](model::Design) fixes a topology, a core placement, the tier of
//! every router pipeline stage, and the tier of every link. [`route::evaluate`]
//! scores it by traffic-weighted energy-delay product, and
//! [`search::stage_optimize`] searches the design space with a learned local
//! search that alternates hill climbing on EDP with hill climbing on a
//! regression-forest prediction of where the next climb will end.

pub mod brute;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod route;
pub mod search;
pub mod sweep;
pub mod timing;
pub mod topogen;

pub use error::{Error, Result};
