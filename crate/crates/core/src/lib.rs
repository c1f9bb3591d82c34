//! Truck + UAV tandem last-mile delivery optimization.
//!
//! A delivery truck drives a street network while a fleet of quadrotor UAVs
//! flies sorties from and back to the moving truck. The library models the
//! physics of both vehicles (fuel and battery energy, bang-bang edge timing),
//! transforms the street graph into a metric closure over mission nodes with
//! candidate rendezvous points, and minimizes a weighted energy/time
//! objective with a genetic algorithm whose fitness lazily solves a UAV
//! scheduling subproblem on the fixed truck timeline.

pub mod audit;
pub mod cost;
pub mod error;
pub mod generate;
pub mod graph_xform;
pub mod model;
pub mod oracle;
pub mod report;
pub mod route_ga;
pub mod scheduler;

pub use error::{ModelError, SolveError};
pub use model::{Instance, NodeClass, NodeId};
