//! Solvers for deploying a heterogeneous fleet of aerial agents so that their
//! ground footprints jointly cover a target interval (or a gridded rectangle).
//!
//! Two objectives are supported:
//!
//! * **min-max**: minimise the largest per-agent travel delay. Exact for a
//!   shared origin ([`minmax::solve_common_origin_minmax`]), and a `(1 + ε)`
//!   grid bisection over an exact feasibility sweep when agents keep their
//!   initial left-to-right order ([`minmax::fptas_minmax`]).
//! * **min-sum**: minimise the total travel delay. A radius-greedy heuristic for
//!   a shared origin ([`minsum::greedy_common_origin_minsum`]) and a
//!   pseudo-polynomial dynamic program over a discretised delay budget
//!   ([`minsum::dp_minsum`]).
//!
//! [`planar`] extends the min-max machinery to rectangular targets split into
//! square cells, [`oracle`] holds exhaustive reference solvers for small
//! fleets and [`generate`] builds random and 3-partition hard instances.

pub mod error;
pub mod generate;
pub mod minmax;
pub mod minsum;
pub mod model;
pub mod oracle;
pub mod planar;

pub use error::{DeployError, Result};
pub use model::{
    bounds, footprint_halfwidth, radius_from_snr, travel_time, travel_time_to, verify_coverage,
    BoundReport, Deployment, Instance, Metric, Placement, RadioLink, RadioParams, Target, Uav,
};
