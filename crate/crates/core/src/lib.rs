//! Evolutionary Prisoner's Dilemma on heterogeneous Newman-Watts networks.
//!
//! - [`graph`]: ring lattices, hub-biased shortcut networks, degree statistics.
//! - [`edgelist`]: text serialization of networks.
//! - [`game`]: payoffs and imitation probabilities.
//! - [`dynamics`]: synchronous generations and equilibrium measurement.
//! - [`sweep`]: replicated parameter sweeps and CSV output.

pub mod dynamics;
pub mod edgelist;
pub mod error;
pub mod game;
pub mod graph;
pub mod seed;
pub mod sweep;

pub use dynamics::{run_simulation, Absorbed, SimProtocol, SimResult};
pub use error::{Error, Result};
pub use game::{GameParams, Strategy, UpdateRule};
pub use graph::{degree_stats, generate_hnw, ring_lattice, DegreeStats, Graph};
pub use sweep::{Replication, SweepPoint, SweepRecord, SweepSpec};
