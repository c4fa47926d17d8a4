//! Sectorized hexagonal cellular networks with mixed delay constraints:
//! interference topology, clustering schemes, multiplexing-gain regions,
//! zero-forcing checks and converse schedules.

pub mod clustering;
pub mod config;
pub mod converse;
pub mod error;
pub mod lattice;
pub mod rational;
pub mod regions;
pub mod zf;

pub use error::{Error, Result};
pub use lattice::{build_network, CellCoord, Network, Orientation, SectorId};
