use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::simplex::{solve_auto, StandardLp, StandardRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Var {
    Gamma,
    A(usize, usize),
    B(usize, usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Gamma => f.write_str("gamma"),
            Var::A(k, l) => write!(f, "a({k},{l})"),
            Var::B(k, l) => write!(f, "b({k},{l})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Unweighted,
    Weighted,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Unweighted => "unweighted",
            Variant::Weighted => "weighted",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" => Ok(Variant::Unweighted),
            "weighted" => Ok(Variant::Weighted),
            _ => Err(Error::InvalidParams(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row<S> {
    pub tag: String,
    pub coeffs: Vec<(usize, S)>,
    pub sense: Sense,
    pub rhs: S,
}

/// A "maximize Γ" linear program over `Γ`, `a(k, ℓ)` and `b(k, ℓ)`, all
/// non-negative.
#[derive(Debug, Clone)]
pub struct LpModel<S> {
    pub variant: Variant,
    /// `(kmax, ellmax)`; `a` at this index stands for `a(∞, ∞)`.
    pub top: (usize, usize),
    vars: Vec<Var>,
    index: FxHashMap<Var, usize>,
    rows: Vec<Row<S>>,
}

impl<S: Scalar> LpModel<S> {
    pub fn new(variant: Variant, top: (usize, usize)) -> Self {
        let mut m = LpModel { variant, top, vars: Vec::new(), index: FxHashMap::default(), rows: Vec::new() };
        m.var(Var::Gamma);
        m
    }

    /// Index of `v`, creating it on first use.
    pub fn var(&mut self, v: Var) -> usize {
        if let Some(&i) = self.index.get(&v) {
            return i;
        }
        self.vars.push(v);
        self.index.insert(v, self.vars.len() - 1);
        self.vars.len() - 1
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn rows(&self) -> &[Row<S>] {
        &self.rows
    }

    /// Adds `Σ coef·var (sense) rhs`, merging repeated variables. Rows whose
    /// coefficients all cancel are dropped when they hold trivially.
    pub fn add_row(&mut self, tag: &str, terms: &[(S, Var)], sense: Sense, rhs: S) {
        let mut merged: Vec<(usize, S)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            let i = self.var(*v);
            match merged.iter_mut().find(|(j, _)| *j == i) {
                Some((_, acc)) => *acc = acc.clone() + c.clone(),
                None => merged.push((i, c.clone())),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        if merged.is_empty() {
            let zero = S::zero();
            let holds = match sense {
                Sense::Le => zero <= rhs,
                Sense::Ge => zero >= rhs,
                Sense::Eq => zero == rhs,
            };
            if holds {
                return;
            }
        }
        self.rows.push(Row { tag: tag.to_string(), coeffs: merged, sense, rhs });
    }

    pub(crate) fn push_raw_row(&mut self, row: Row<S>) {
        self.rows.push(row);
    }

    pub fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = self.rows.iter().map(|r| r.tag.as_str()).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    fn standard(&self) -> StandardLp<S> {
        let mut objective = vec![S::zero(); self.vars.len()];
        objective[0] = S::one();
        StandardLp {
            num_vars: self.vars.len(),
            objective,
            rows: self
                .rows
                .iter()
                .map(|r| StandardRow { coeffs: r.coeffs.clone(), sense: r.sense, rhs: r.rhs.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
}

/// Optimum of an [`LpModel`].
#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub variant: Variant,
    pub top: (usize, usize),
    pub gamma: S,
    pub status: LpStatus,
    pub pivots: usize,
    /// Largest row violation found by [`check_solution`].
    pub max_violation: f64,
    pub values: Vec<S>,
    a: BTreeMap<(usize, usize), S>,
    b: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> LpSolution<S> {
    pub fn from_values(model: &LpModel<S>, values: Vec<S>) -> Self {
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        for (v, x) in model.vars.iter().zip(&values) {
            match *v {
                Var::A(k, l) => {
                    a.insert((k, l), x.clone());
                }
                Var::B(k, l) => {
                    b.insert((k, l), x.clone());
                }
                Var::Gamma => {}
            }
        }
        let report = check_solution(model, &values, S::zero());
        LpSolution {
            variant: model.variant,
            top: model.top,
            gamma: values[0].clone(),
            status: LpStatus::Optimal,
            pivots: 0,
            max_violation: report.max_violation,
            values,
            a,
            b,
        }
    }

    /// `a(∞, ∞)`, represented by `a(kmax, ellmax)`.
    pub fn a_inf(&self) -> S {
        self.a.get(&self.top).cloned().unwrap_or_else(S::zero)
    }

    /// `a(k, ℓ)`; indices without a variable lie beyond the model and take `a(∞, ∞)`.
    pub fn a(&self, k: usize, l: usize) -> S {
        self.a.get(&(k, l)).cloned().unwrap_or_else(|| self.a_inf())
    }

    /// `b(k, ℓ)`; zero beyond the model.
    pub fn b(&self, k: usize, l: usize) -> S {
        self.b.get(&(k, l)).cloned().unwrap_or_else(S::zero)
    }

    pub fn a_table(&self) -> &BTreeMap<(usize, usize), S> {
        &self.a
    }

    pub fn b_table(&self) -> &BTreeMap<(usize, usize), S> {
        &self.b
    }

    pub fn to_f64(&self) -> LpSolution<f64> {
        let f = |m: &BTreeMap<(usize, usize), S>| m.iter().map(|(k, v)| (*k, v.to_f64_lossy())).collect();
        LpSolution {
            variant: self.variant,
            top: self.top,
            gamma: self.gamma.to_f64_lossy(),
            status: self.status,
            pivots: self.pivots,
            max_violation: self.max_violation,
            values: self.values.iter().map(Scalar::to_f64_lossy).collect(),
            a: f(&self.a),
            b: f(&self.b),
        }
    }

    /// Copy with `a(k, ℓ)` replaced; used for fault injection.
    pub fn with_a(&self, k: usize, l: usize, value: S) -> Self {
        let mut s = self.clone();
        s.a.insert((k, l), value);
        s
    }

    /// CSV rows `kind,k,l,value` for both tables.
    pub fn tables_csv(&self) -> String {
        let mut out = String::from("kind,k,l,value\n");
        for (name, table) in [("a", &self.a), ("b", &self.b)] {
            for ((k, l), v) in table {
                out.push_str(&format!("{name},{k},{l},{}\n", v.to_f64_lossy() + 0.0));
            }
        }
        out
    }
}

/// Solves `model` with the dense simplex and verifies the optimum.
pub fn simplex_solve<S: Scalar>(model: &LpModel<S>, tol: S) -> Result<LpSolution<S>> {
    let out = solve_auto(&model.standard(), tol)?;
    let mut sol = LpSolution::from_values(model, out.x);
    sol.pivots = out.pivots;
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagWorst {
    pub row: usize,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub max_violation: f64,
    pub worst_by_tag: BTreeMap<String, TagWorst>,
    pub violated_rows: Vec<usize>,
}

impl CheckReport {
    pub fn feasible(&self) -> bool {
        self.violated_rows.is_empty()
    }
}

/// Re-evaluates every row and every sign constraint at `values`. Rows
/// violated by more than `tol` are listed.
pub fn check_solution<S: Scalar>(model: &LpModel<S>, values: &[S], tol: S) -> CheckReport {
    let mut report = CheckReport { max_violation: 0.0, worst_by_tag: BTreeMap::new(), violated_rows: Vec::new() };
    let note = |tag: &str, row: usize, violation: S, report: &mut CheckReport| {
        let v = violation.to_f64_lossy().max(0.0);
        report.max_violation = report.max_violation.max(v);
        let e = report.worst_by_tag.entry(tag.to_string()).or_insert(TagWorst { row, violation: 0.0 });
        if v > e.violation {
            *e = TagWorst { row, violation: v };
        }
        if violation > tol {
            report.violated_rows.push(row);
        }
    };
    for (i, row) in model.rows.iter().enumerate() {
        let lhs = row.coeffs.iter().fold(S::zero(), |acc, (j, c)| acc + c.clone() * values[*j].clone());
        let excess = lhs - row.rhs.clone();
        let violation = match row.sense {
            Sense::Le => excess,
            Sense::Ge => -excess,
            Sense::Eq => excess.abs(),
        };
        note(&row.tag, i, violation, &mut report);
    }
    for (j, x) in values.iter().enumerate() {
        note("nonnegative", model.rows.len() + j, -x.clone(), &mut report);
    }
    report
}
