//! Dynamic economic dispatch with valve-point loading costs.
//!
//! The non-convex fuel cost of each unit is replaced by a piecewise-linear
//! interpolant whose breakpoints follow the period of the rectified sine
//! term. The resulting mixed-integer linear program is solved by the
//! branch-and-bound solver in [`solver`].

pub mod cli;
pub mod error;
pub mod io;
pub mod linearize;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod solver;

pub use error::{DedError, Result};
pub use linearize::{build_piecewise, PiecewiseCost};
pub use milp::{build_milp, extract_solution, MilpInstance};
pub use model::{GeneratorUnit, ReserveProduct, Schedule, SystemInstance};
pub use solver::{solve_lp, solve_milp, BnbResult, BnbStatus, SolverConfig};
