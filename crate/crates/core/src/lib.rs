//! Anchor-free localization of unit disk graph networks with communication
//! wheels, plus a trilateration baseline and a rigidity oracle.

pub mod geometry;
pub mod io;
pub mod network;
pub mod protocol;
pub mod rigidity;
pub mod seed;
pub mod trilateration;
pub mod wheel;

pub use geometry::{Isometry, Point};
pub use network::{Network, NetworkError, NodeClass};
pub use protocol::{run_simulation, verify_localization, LocalizationResult, SimConfig};
pub use wheel::{construct_communication_wheel, verify_wheel, Verdict, Wheel};
