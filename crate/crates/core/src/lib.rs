//! Exact VRPTW solving with a compact MILP tightened by local-area arcs and
//! capacity/time bucket graphs, plus the discovery loop that sizes them.

pub mod buckets;
pub mod discovery;
pub mod error;
pub mod instance;
pub mod la_arcs;
pub mod lp;
pub mod model;
pub mod solver;
pub mod units;

pub use buckets::{init_thresholds, FlowGraph, Resource, Thresholds};
pub use error::{Error, Result};
pub use instance::{parse_solomon, Customer, Instance, RouteCheck};
pub use la_arcs::{compute_frontiers, Frontiers, LaArcs, Ordering, PKey};
pub use units::Tenths;
