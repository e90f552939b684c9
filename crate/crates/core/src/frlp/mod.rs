//! Factor-revealing linear programs for the unweighted and weighted
//! matching duals, and the dense simplex that solves them.

mod build;
mod model;
mod qorder;
pub mod simplex;
mod text;

pub use build::{build_unweighted, build_weighted, unweighted_order};
pub use model::{check_solution, simplex_solve, CheckReport, LpModel, LpSolution, LpStatus, Row, Sense, TagWorst, Var, Variant};
pub use qorder::{sorted_q, QOrder};
pub use text::{export_lp_text, parse_lp_text};
