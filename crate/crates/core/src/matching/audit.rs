use serde::Serialize;

/// How an arriving online vertex was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dispatch {
    Exposed,
    Deterministic,
    TwoWay,
    ThreeWay,
}

/// Increments of one iteration. `primal` is the increase of the primal
/// lower bound, `dual` the increase of `Σα + Σβ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Increment {
    pub arrival: usize,
    pub dispatch: Dispatch,
    pub primal: f64,
    pub dual: f64,
}

/// `α_u(w)` against the table value it must dominate, at the weight level
/// interval ending at `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantPoint {
    pub arrival: usize,
    pub offline: usize,
    pub level: f64,
    pub alpha: f64,
    pub required: f64,
}

/// Piecewise-constant `α_u(w)`: `(upper end, value)` per interval, the first
/// interval starting at 0. Zero past the last breakpoint.
pub type StepFunction = Vec<(f64, f64)>;

/// Everything a run records for the primal-dual certificate.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DualAudit {
    pub gamma: f64,
    pub increments: Vec<Increment>,
    pub invariant_points: Vec<InvariantPoint>,
    /// Final `α_u`.
    pub alpha: Vec<f64>,
    /// `β_v` per arrival.
    pub beta: Vec<f64>,
    /// Final `α_u(w)`; empty for unweighted runs.
    pub alpha_levels: Vec<StepFunction>,
    /// `(offline, arrival, weight)`.
    pub edges: Vec<(usize, usize, f64)>,
}

impl DualAudit {
    pub fn primal_total(&self) -> f64 {
        self.increments.iter().map(|i| i.primal).sum()
    }

    pub fn dual_total(&self) -> f64 {
        self.increments.iter().map(|i| i.dual).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AuditReport {
    pub iterations: usize,
    /// Arrivals whose dual increment exceeds the primal increment.
    pub increment_violations: Vec<usize>,
    /// Arrivals after which the running dual total exceeds the primal total.
    pub prefix_violations: Vec<usize>,
    pub invariant_violations: Vec<InvariantPoint>,
    /// Edges `(offline, arrival)` with `α_u + β_v < Γ·w`.
    pub feasibility_violations: Vec<(usize, usize)>,
    /// Smallest `primal − dual` over iterations.
    pub min_increment_slack: f64,
    /// Smallest `α_u + β_v − Γ·w` over edges.
    pub min_feasibility_slack: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.increment_violations.is_empty()
            && self.prefix_violations.is_empty()
            && self.invariant_violations.is_empty()
            && self.feasibility_violations.is_empty()
    }
}

/// Reverse weak duality per iteration and per prefix, the offline invariant
/// at every recorded point, and approximate dual feasibility on every edge.
pub fn dual_audit_check(audit: &DualAudit, tol: f64) -> AuditReport {
    let mut report = AuditReport {
        iterations: audit.increments.len(),
        min_increment_slack: f64::INFINITY,
        min_feasibility_slack: f64::INFINITY,
        ..AuditReport::default()
    };
    let (mut primal, mut dual) = (0.0, 0.0);
    for inc in &audit.increments {
        let slack = inc.primal - inc.dual;
        report.min_increment_slack = report.min_increment_slack.min(slack);
        if slack < -tol {
            report.increment_violations.push(inc.arrival);
        }
        primal += inc.primal;
        dual += inc.dual;
        if dual > primal + tol {
            report.prefix_violations.push(inc.arrival);
        }
    }
    report.invariant_violations =
        audit.invariant_points.iter().filter(|p| p.alpha < p.required - tol).copied().collect();
    for &(u, v, w) in &audit.edges {
        let slack = audit.alpha[u] + audit.beta[v] - audit.gamma * w;
        report.min_feasibility_slack = report.min_feasibility_slack.min(slack);
        if slack < -tol {
            report.feasibility_violations.push((u, v));
        }
    }
    report
}
