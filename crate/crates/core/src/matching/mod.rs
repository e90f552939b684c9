//! OCS-driven online bipartite matching, unweighted and edge-weighted with
//! free disposal, audited against the primal-dual certificate.

mod audit;
mod experiment;
mod instance;
mod offline;
mod unweighted;
mod weighted;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use audit::{dual_audit_check, AuditReport, Dispatch, DualAudit, Increment, InvariantPoint, StepFunction};
pub use experiment::{instance_experiment, ratio_experiment, ExperimentConfig, ExperimentReport, RatioRow};
pub use instance::{generate_instance, Arrival, Instance, InstanceKind, DEFAULT_EDGE_PROBABILITY};
pub use offline::{hungarian_max, maximum_matching, maximum_weight_matching};
pub use unweighted::run_unweighted;
pub use weighted::{run_weighted, Level, WeightProfile, MATCHED};

use crate::bounds::{BoundParams, TwoWayBound};
use crate::error::{Error, Result};
use crate::frlp::{build_unweighted, build_weighted, simplex_solve, unweighted_order, LpSolution, QOrder, Variant};

/// Coin stream of the stand-alone two-way OCS; the three-way OCS uses 0 to 2.
const PAIR_OCS_STREAM: u64 = 3;

/// Simplex tolerance for the tables the runs use.
pub const TABLE_TOL: f64 = 1e-9;

/// Which constants the dual tables are solved under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// The published constants, including a two-way OCS stronger than the one run here.
    Paper,
    /// Both selectors at `γ = 1/16`, matching the OCS that actually runs.
    Consistent,
}

impl Mode {
    pub fn params(self) -> BoundParams<f64> {
        match self {
            Mode::Paper => BoundParams::paper(),
            Mode::Consistent => BoundParams::consistent(),
        }
    }

    /// Two-way bound of the unweighted analysis.
    pub fn two_way_bound(self) -> TwoWayBound {
        match self {
            Mode::Paper => TwoWayBound::Recursive,
            Mode::Consistent => TwoWayBound::Product,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Paper => "paper",
            Mode::Consistent => "consistent",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Mode::Paper),
            "consistent" => Ok(Mode::Consistent),
            _ => Err(Error::InvalidParams(format!("unknown mode `{s}`"))),
        }
    }
}

/// Solved unweighted tables and the order they were built on.
#[derive(Debug, Clone)]
pub struct UnweightedTables {
    pub params: BoundParams<f64>,
    pub order: QOrder,
    pub tables: LpSolution<f64>,
}

pub fn unweighted_tables(mode: Mode, limit: (usize, usize)) -> Result<UnweightedTables> {
    unweighted_tables_with(mode.params(), mode.two_way_bound(), limit)
}

pub fn unweighted_tables_with(
    params: BoundParams<f64>,
    two_way: TwoWayBound,
    limit: (usize, usize),
) -> Result<UnweightedTables> {
    let model = build_unweighted(limit.0, limit.1, &params, two_way)?;
    let tables = simplex_solve(&model, TABLE_TOL)?;
    let order = unweighted_order(limit, &params, two_way);
    Ok(UnweightedTables { params, order, tables })
}

#[derive(Debug, Clone)]
pub struct WeightedTables {
    pub params: BoundParams<f64>,
    pub tables: LpSolution<f64>,
}

pub fn weighted_tables(mode: Mode, top: (usize, usize)) -> Result<WeightedTables> {
    weighted_tables_with(mode.params(), top)
}

pub fn weighted_tables_with(params: BoundParams<f64>, top: (usize, usize)) -> Result<WeightedTables> {
    let model = build_weighted(top.0, top.1, &params)?;
    let tables = simplex_solve(&model, TABLE_TOL)?;
    Ok(WeightedTables { params, tables })
}

/// Default LP range per variant.
pub fn default_limit(variant: Variant) -> (usize, usize) {
    match variant {
        Variant::Unweighted => (8, 0),
        Variant::Weighted => (25, 25),
    }
}

/// Result of one run.
#[derive(Debug, Clone, Serialize)]
pub struct MatchingOutcome {
    /// Arrival index each offline vertex ends up matched to.
    pub assignment: Vec<Option<usize>>,
    /// Weight of that edge; the heaviest one ever matched under free disposal.
    pub matched_weight: Vec<f64>,
    pub dispatch: Vec<Dispatch>,
    /// Matching size, or total weight.
    pub value: f64,
    /// Final weight profiles; empty for unweighted runs.
    pub profiles: Vec<WeightProfile>,
}

impl MatchingOutcome {
    fn new(inst: &Instance) -> Self {
        MatchingOutcome {
            assignment: vec![None; inst.offline],
            matched_weight: vec![0.0; inst.offline],
            dispatch: Vec::with_capacity(inst.arrivals.len()),
            value: 0.0,
            profiles: Vec::new(),
        }
    }

    /// Matches `u` to arrival `v` unless `u` already holds a heavier edge.
    fn assign(&mut self, u: usize, v: usize, w: f64) {
        if self.assignment[u].is_none() || w >= self.matched_weight[u] {
            self.assignment[u] = Some(v);
            self.matched_weight[u] = w;
        }
    }
}
