use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_traits::{One, ToPrimitive};
use ocskit::bounds::{eta_closed, eta_pow_bound, eta_sum, zeta_product, zeta_unweighted, BoundParams};
use ocskit::frlp::{build_unweighted, build_weighted, check_solution, export_lp_text, simplex_solve, Variant};
use ocskit::matching::{instance_experiment, ratio_experiment, ExperimentConfig, Instance, Mode, TABLE_TOL};
use ocskit::ocs::{parse_replay, Query};
use ocskit::oracle::{
    adversarial_family, all_window_sets, enumerate_three_way, enumerate_two_way, mc_never, split_queries,
    three_way_product_bound, two_way_product_bound, Arity, Family, SubsequenceSpec,
};
use ocskit::{Exact, Params};

use crate::CliError;

/// Tolerance of the duality audit in `simulate`.
pub const AUDIT_TOL: f64 = 1e-9;
/// Largest LP row violation `lp` accepts.
const LP_CHECK_TOL: f64 = 1e-8;
/// Agreement required between the two evaluations of `η`.
const ETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Audit {
    Strict,
    Off,
}

impl FromStr for Audit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict" => Ok(Audit::Strict),
            "off" => Ok(Audit::Off),
            _ => Err(format!("unknown audit level `{s}`, expected strict or off")),
        }
    }
}

impl fmt::Display for Audit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Audit::Strict => "strict",
            Audit::Off => "off",
        })
    }
}

/// A finished command: the table, the constants it was computed under, and
/// any bound or audit violations.
#[derive(Debug)]
pub struct Report {
    pub resolved: Vec<(String, String)>,
    pub params: Params,
    /// Summary lines written after the header.
    pub summary: Vec<String>,
    pub body: String,
    pub violations: Vec<String>,
    /// Lines for standard error.
    pub notes: Vec<String>,
}

impl Report {
    fn new(params: Params, body: String) -> Self {
        Report { resolved: Vec::new(), params, summary: Vec::new(), body, violations: Vec::new(), notes: Vec::new() }
    }

    /// Header of `#` lines with the resolved settings and constants, then the CSV.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.resolved {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for line in self.params.to_string().lines() {
            out.push_str(&format!("# {line}\n"));
        }
        for line in &self.summary {
            out.push_str(&format!("# {line}\n"));
        }
        out.push_str(&self.body);
        out
    }
}

/// Quotes a CSV field when it contains a comma.
fn field(s: &str) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}

fn decimal(q: &Exact) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn bounds(max_k: usize, mode: Mode) -> Result<Report, CliError> {
    let p = mode.params();
    let mut body = String::from("k,eta_sum,eta_closed,eta_pow_bound,zeta_product,zeta_unweighted\n");
    let mut violations = Vec::new();
    for k in 0..=max_k {
        let sum = eta_sum(k, &p.gamma_a, &p.gamma_b);
        let closed = eta_closed(k, &p);
        let pow = eta_pow_bound(k, &p.delta1, &p.delta2);
        let zp = zeta_product(k, &p.gamma_a);
        let zu = zeta_unweighted(k, &p.gamma_b);
        body.push_str(&format!("{k},{sum},{closed},{pow},{zp},{zu}\n"));
        if (sum - closed).abs() > ETA_TOL {
            violations.push(format!("k = {k}: summed and closed-form eta differ by {:e}", (sum - closed).abs()));
        }
        if closed > pow + ETA_TOL {
            violations.push(format!("k = {k}: eta {closed} exceeds the power bound {pow}"));
        }
    }
    let mut report = Report::new(p, body);
    report.violations = violations;
    Ok(report)
}

/// Where the queries of `verify` and `enumerate` come from.
#[derive(Debug, Clone)]
pub enum Source {
    Replay(PathBuf),
    Family { family: Family, pairs: Option<usize>, triples: Option<usize>, seed: u64 },
}

impl Source {
    fn label(&self) -> String {
        match self {
            Source::Replay(path) => path.display().to_string(),
            Source::Family { family, pairs: Some(n), .. } => format!("{family}:pairs={n}"),
            Source::Family { family, triples, .. } => format!("{family}:triples={}", triples.unwrap_or(3)),
        }
    }

    fn queries(&self) -> Result<Vec<Query>, CliError> {
        match self {
            Source::Replay(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                Ok(parse_replay(&text)?)
            }
            Source::Family { family, pairs: Some(n), seed, .. } => Ok(adversarial_family(*family, *n, Arity::Pair, *seed)?),
            Source::Family { family, triples, seed, .. } => {
                Ok(adversarial_family(*family, triples.unwrap_or(3), Arity::Triple, *seed)?)
            }
        }
    }
}

/// The selectors that actually run: two 1/16 two-way OCS.
fn exact_gamma() -> Exact {
    Exact::new(1.into(), 16.into())
}

fn occurrences(queries: &[Query], element: u64) -> usize {
    queries.iter().filter(|q| q.contains(element.into())).count()
}

/// Specs from `--windows`, or every window family over `occ` occurrences.
fn specs(element: u64, windows: Option<&str>, occ: usize) -> Result<Vec<SubsequenceSpec>, CliError> {
    match windows {
        Some(text) => text
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| SubsequenceSpec::parse(element, s).map_err(CliError::from))
            .collect(),
        None => all_window_sets(occ)
            .into_iter()
            .map(|w| SubsequenceSpec::new(element, w).map_err(CliError::from))
            .collect(),
    }
}

fn never_bound(arity: Arity, spec: &SubsequenceSpec) -> Exact {
    let g = exact_gamma();
    match arity {
        Arity::Pair => two_way_product_bound(&spec.lengths(), &g),
        Arity::Triple => three_way_product_bound(&spec.lengths(), &g, &g),
    }
}

fn arity_of(queries: &[Query]) -> Result<Arity, CliError> {
    if queries.iter().all(|q| matches!(q, Query::Pair(_))) {
        Ok(Arity::Pair)
    } else if queries.iter().all(|q| matches!(q, Query::Triple(_))) {
        Ok(Arity::Triple)
    } else {
        Err(CliError::Usage("pairs and triples cannot be mixed in one input".into()))
    }
}

/// Never-chosen probability of every spec against its product bound:
/// exact when the input is within the caps, Monte Carlo otherwise.
pub fn verify(
    source: &Source,
    element: u64,
    windows: Option<&str>,
    caps: (usize, usize),
    trials: u64,
    seed: u64,
) -> Result<Report, CliError> {
    let queries = source.queries()?;
    let arity = arity_of(&queries)?;
    let occ = occurrences(&queries, element);
    if occ == 0 {
        return Err(ocskit::Error::UnknownElement(element.into()).into());
    }
    let label = source.label();
    let cap = match arity {
        Arity::Pair => caps.0.min(ocskit::oracle::DEFAULT_MAX_PAIRS),
        Arity::Triple => caps.1.min(ocskit::oracle::ABSOLUTE_MAX_TRIPLES),
    };
    let exact = queries.len() <= cap;
    let specs = match (windows, exact) {
        (None, false) => (1..=occ).map(|k| SubsequenceSpec::new(element, std::iter::once(0..k).collect())).collect::<Result<_, _>>()?,
        _ => specs(element, windows, occ)?,
    };
    let mut body = String::from("input,spec,exact_or_estimate,bound,pass\n");
    let mut violations = Vec::new();
    let (pairs, triples) = split_queries(&queries);
    let two = if exact && arity == Arity::Pair { Some(enumerate_two_way(&pairs, element.into(), cap)?) } else { None };
    let three =
        if exact && arity == Arity::Triple { Some(enumerate_three_way(&triples, element.into(), cap)?) } else { None };
    for spec in &specs {
        let bound = never_bound(arity, spec);
        let (value, pass) = if let Some(out) = &two {
            let p = out.never_probability(spec)?;
            (decimal(&p), p <= bound)
        } else if let Some(out) = &three {
            let p = out.never_probability(spec)?;
            (decimal(&p), p <= bound)
        } else {
            let est = mc_never(|_| queries.clone(), spec, trials, seed)?;
            (est.estimate, est.respects_upper_bound(decimal(&bound)))
        };
        body.push_str(&format!("{},{},{value},{},{pass}\n", field(&label), field(&spec.to_string()), decimal(&bound)));
        if !pass {
            violations.push(format!("{label} {spec}: {value} above bound {}", decimal(&bound)));
        }
    }
    let mut report = Report::new(BoundParams::consistent(), body);
    report.summary.push(format!("method = {}", if exact { "exact" } else { "monte-carlo" }));
    report.violations = violations;
    Ok(report)
}

/// Exact never-chosen probabilities as rationals, plus the no-internal-link
/// probability of every consecutive window for pair inputs.
pub fn enumerate(
    source: &Source,
    element: u64,
    windows: Option<&str>,
    caps: (usize, usize),
) -> Result<Report, CliError> {
    let queries = source.queries()?;
    let (pairs, triples) = split_queries(&queries);
    let mut body = String::from("check,spec,exact,decimal,bound,pass\n");
    let mut violations = Vec::new();
    let mut row = |check: &str, spec: &str, p: Exact, bound: Exact, body: &mut String| {
        let pass = p <= bound;
        body.push_str(&format!("{check},{},{p},{},{},{pass}\n", field(spec), decimal(&p), decimal(&bound)));
        if !pass {
            violations.push(format!("{check} {spec}: {p} above bound {bound}"));
        }
    };
    let mut any = false;
    if pairs.iter().any(|q| q.contains(element.into())) {
        any = true;
        let out = enumerate_two_way(&pairs, element.into(), caps.0)?;
        let occ = out.occurrences.len();
        for spec in specs(element, windows, occ)? {
            let p = out.never_probability(&spec)?;
            row("never-pair", &spec.to_string(), p, never_bound(Arity::Pair, &spec), &mut body);
        }
        let stay = Exact::one() - exact_gamma();
        for s in 0..occ {
            for e in s + 1..=occ {
                let p = out.no_internal_link_probability(s..e)?;
                let bound = (1..e - s).fold(Exact::one(), |acc, _| acc * stay.clone());
                row("no-link", &format!("{element}:{s}..{e}"), p, bound, &mut body);
            }
        }
    }
    if triples.iter().any(|q| q.contains(element.into())) {
        any = true;
        let out = enumerate_three_way(&triples, element.into(), caps.1)?;
        for spec in specs(element, windows, out.occurrences.len())? {
            let p = out.never_probability(&spec)?;
            row("never-triple", &spec.to_string(), p, never_bound(Arity::Triple, &spec), &mut body);
        }
    }
    if !any {
        return Err(ocskit::Error::UnknownElement(element.into()).into());
    }
    let mut report = Report::new(BoundParams::consistent(), body);
    report.summary.push(format!("input = {}", source.label()));
    report.violations = violations;
    Ok(report)
}

pub fn lp(
    variant: Variant,
    top: (usize, usize),
    consistent: bool,
    sigmas: (f64, f64),
    export: Option<&Path>,
) -> Result<Report, CliError> {
    let mode = if consistent { Mode::Consistent } else { Mode::Paper };
    let params = mode.params().with_sigmas(sigmas.0, sigmas.1)?;
    let model = match variant {
        Variant::Unweighted => build_unweighted(top.0, top.1, &params, mode.two_way_bound())?,
        Variant::Weighted => build_weighted(top.0, top.1, &params)?,
    };
    if let Some(path) = export {
        crate::write_atomic(path, &export_lp_text(&model))?;
    }
    let sol = simplex_solve(&model, TABLE_TOL)?;
    let check = check_solution(&model, &sol.values, LP_CHECK_TOL);
    let mut body = sol.tables_csv();
    body.push_str(&format!("gamma,,,{}\n", sol.gamma));
    let mut report = Report::new(params, body);
    report.summary.push(format!("gamma = {:.8}", sol.gamma));
    report.summary.push(format!("pivots = {}", sol.pivots));
    report.summary.push(format!("max_violation = {:e}", check.max_violation));
    report.notes.push(format!("gamma = {:.8}", sol.gamma));
    if !check.feasible() {
        report.violations.push(format!(
            "{} rows violated by more than {LP_CHECK_TOL:e}, worst {:e}",
            check.violated_rows.len(),
            check.max_violation
        ));
    }
    Ok(report)
}

pub fn simulate(cfg: &ExperimentConfig, instance: Option<&Path>, audit: Audit) -> Result<Report, CliError> {
    let report = match instance {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            instance_experiment(&Instance::from_json(&text)?, cfg)?
        }
        None => ratio_experiment(cfg)?,
    };
    let mut out = Report::new(cfg.mode.params(), report.to_csv());
    out.summary.extend([
        format!("gamma = {}", report.gamma),
        format!("mean_ratio = {}", report.mean),
        format!("min_ratio = {}", report.min),
        format!("std_err = {}", report.std_err),
        format!("ci_lower = {}", report.ci.0),
        format!("ci_upper = {}", report.ci.1),
        format!("audit_failures = {}", report.audit_failures()),
    ]);
    out.notes.push(format!("mean ratio {:.6} against gamma {:.6}", report.mean, report.gamma));
    if audit == Audit::Strict && report.audit_failures() > 0 {
        out.violations.push(format!("{} of {} runs failed the duality audit", report.audit_failures(), report.rows.len()));
    }
    Ok(out)
}
