//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//! Run with `cargo test -p ocskit --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use ocskit::bounds::{
    alpha_coef, centrally_dominates, d_of_q, derive_deltas, eta_closed, eta_pow_bound, eta_sum, p_star, theta,
    theta_prime, BoundParams,
};
use ocskit::frlp::{build_unweighted, build_weighted, simplex_solve, Variant};
use ocskit::matching::{
    generate_instance, instance_experiment, ratio_experiment, unweighted_tables, weighted_tables, ExperimentConfig,
    Instance, InstanceKind, Mode, TABLE_TOL,
};
use ocskit::ocs::{PairQuery, Query, TripleQuery};
use ocskit::oracle::{
    adversarial_family, all_window_sets, enumerate_three_way, enumerate_two_way, mc_never, split_queries,
    three_way_product_bound, two_way_product_bound, Arity, Family, SubsequenceSpec,
};
use ocskit::{Exact, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SLACK: f64 = 1e-12;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(failures: &[String], ok: String) -> Verdict {
    match failures.first() {
        None => Verdict { pass: true, detail: ok },
        Some(first) => Verdict { pass: false, detail: format!("{} failures, first: {first}", failures.len()) },
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64, failures: &mut Vec<String>) {
    if (got - want).abs() > tol {
        failures.push(format!("{name} = {got}, expected {want} ± {tol:e}"));
    }
}

fn in_time(name: &str, elapsed: Duration, limit: Duration, failures: &mut Vec<String>) {
    if elapsed > limit {
        failures.push(format!("{name} took {elapsed:.1?}, limit {limit:?}"));
    }
}

fn lp_reproduction() -> Verdict {
    let mut failures = Vec::new();
    let paper = Params::paper();
    let start = Instant::now();
    let gamma_u = build_unweighted(8, 0, &paper, Mode::Paper.two_way_bound())
        .and_then(|m| simplex_solve(&m, TABLE_TOL))
        .map(|s| s.gamma);
    let t_u = start.elapsed();
    let start = Instant::now();
    let gamma_w = build_weighted(25, 25, &paper).and_then(|m| simplex_solve(&m, TABLE_TOL)).map(|s| s.gamma);
    let t_w = start.elapsed();
    match (gamma_u, gamma_w) {
        (Ok(u), Ok(w)) => {
            within("unweighted (8,0) gamma", u, 0.50962346, 1e-6, &mut failures);
            within("weighted (25,25) gamma", w, 0.50930725, 1e-6, &mut failures);
            in_time("unweighted LP", t_u, Duration::from_secs(60), &mut failures);
            in_time("weighted LP", t_w, Duration::from_secs(600), &mut failures);
            let ok = format!("unweighted {u:.10} in {t_u:.2?}, weighted {w:.10} in {t_w:.2?}");
            verdict(&failures, ok)
        }
        (u, w) => Verdict { pass: false, detail: format!("solver error: {u:?} / {w:?}") },
    }
}

fn constant_reproduction() -> Verdict {
    let mut failures = Vec::new();
    let p = Params::paper();
    match derive_deltas(&p.gamma_a, &p.gamma_b) {
        Ok((d1, d2)) => {
            within("delta1", d1, 0.0309587, 5e-7, &mut failures);
            within("delta2", d2, 0.0165525, 5e-7, &mut failures);
        }
        Err(e) => failures.push(format!("derive_deltas failed: {e}")),
    }
    let c = [0.957795, 0.176756, 0.011047, 0.131738];
    let t = [0.630024, 0.599919, 0.148345, 0.3125];
    for i in 0..4 {
        within(&format!("c{}", i + 1), p.c()[i], c[i], 5e-6, &mut failures);
        within(&format!("t{}", i + 1), p.t()[i], t[i], 5e-6, &mut failures);
    }
    verdict(&failures, "deltas within 5e-7, c1..c4 and t1..t4 within 5e-6".into())
}

fn eta_consistency() -> Verdict {
    let mut failures = Vec::new();
    let p = Params::paper();
    for k in 0..=30 {
        let (s, c) = (eta_sum(k, &p.gamma_a, &p.gamma_b), eta_closed(k, &p));
        within(&format!("eta_sum({k}) - eta_closed({k})"), s, c, 1e-12, &mut failures);
    }
    let exact: BoundParams<Exact> = BoundParams::new(
        BigRational::from_float(p.gamma_a).unwrap(),
        BigRational::from_float(p.gamma_b).unwrap(),
        BigRational::from_float(p.delta1).unwrap(),
        BigRational::from_float(p.delta2).unwrap(),
        BigRational::from_float(p.sigma_r2).unwrap(),
        BigRational::from_float(p.sigma_d).unwrap(),
    )
    .expect("paper constants are valid");
    let mut prev = f64::INFINITY;
    for k in 0..=100 {
        let closed = eta_closed(k, &p);
        let pow = eta_pow_bound(k, &p.delta1, &p.delta2);
        if closed > pow + SLACK {
            failures.push(format!("eta_closed({k}) = {closed} above power bound {pow}"));
        }
        if eta_closed(k, &exact) > eta_pow_bound(k, &exact.delta1, &exact.delta2) {
            failures.push(format!("exact eta_closed({k}) above the power bound"));
        }
        if closed >= prev {
            failures.push(format!("eta({k}) = {closed} does not decrease"));
        }
        prev = closed;
    }
    within("eta(1)", eta_closed(1, &p), 2.0 / 3.0, SLACK, &mut failures);
    if eta_closed(1, &exact) != BigRational::new(2.into(), 3.into()) {
        failures.push("exact eta(1) differs from 2/3".into());
    }
    let e4 = eta_closed(4, &p);
    if e4 >= 0.173 {
        failures.push(format!("eta(4) = {e4} not below 0.173"));
    }
    verdict(&failures, format!("k <= 100 checked in f64 and exactly, eta(4) = {e4:.6}"))
}

/// Pair and triple inputs used by the enumeration and Monte Carlo criteria:
/// every adversarial family at every enumerable size, random pair sequences
/// over five elements, and a few hand-written triple inputs.
fn corpus() -> Vec<(String, Vec<Query>)> {
    let mut out = Vec::new();
    for family in Family::ALL {
        for (arity, sizes) in [(Arity::Pair, 1..=8), (Arity::Triple, 1..=3)] {
            for size in sizes {
                let seeds: &[u64] = if family == Family::RandomRegular { &[0, 1] } else { &[0] };
                for &seed in seeds {
                    if let Ok(q) = adversarial_family(family, size, arity, seed) {
                        out.push((format!("{family}/{arity:?}/{size}/{seed}"), q));
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..12 {
        let n = rng.random_range(2..=8);
        let queries = (0..n)
            .map(|step| {
                let a = rng.random_range(0..5u64);
                let b = (a + rng.random_range(1..5u64)) % 5;
                Query::Pair(PairQuery::new(a, b, step))
            })
            .collect();
        out.push((format!("random-pairs/{i}"), queries));
    }
    let hand: [&[(u64, u64, u64)]; 3] =
        [&[(0, 1, 2), (1, 2, 3), (0, 2, 3)], &[(2, 0, 1), (0, 3, 1)], &[(0, 1, 2), (3, 4, 5), (0, 4, 1)]];
    for (i, list) in hand.iter().enumerate() {
        let q = list.iter().enumerate().map(|(s, &(a, b, c))| Query::Triple(TripleQuery::new(a, b, c, s as u64)));
        out.push((format!("hand-triples/{i}"), q.collect()));
    }
    out
}

fn watched(queries: &[Query]) -> Option<u64> {
    (0..6).find(|&e| queries.iter().any(|q| q.contains(e.into())))
}

fn enumeration_suite(corpus: &[(String, Vec<Query>)]) -> Verdict {
    let start = Instant::now();
    let gamma = Exact::new(1.into(), 16.into());
    let stay = Exact::one() - gamma.clone();
    let results: Vec<(usize, Vec<String>)> = corpus
        .par_iter()
        .map(|(name, queries)| {
            let mut failures = Vec::new();
            let mut checks = 0;
            let element = watched(queries).expect("inputs are non-empty").into();
            let (pairs, triples) = split_queries(queries);
            if !pairs.is_empty() {
                let out = enumerate_two_way(&pairs, element, 8).expect("enumerable pair input");
                let occ = out.occurrences.len();
                for w in all_window_sets(occ) {
                    let spec = SubsequenceSpec::new(element, w).unwrap();
                    let p = out.never_probability(&spec).unwrap();
                    checks += 1;
                    if p > two_way_product_bound(&spec.lengths(), &gamma) {
                        failures.push(format!("{name} {spec}: never-chosen {p} above the two-way bound"));
                    }
                }
                for s in 0..occ {
                    for e in s + 1..=occ {
                        let p = out.no_internal_link_probability(s..e).unwrap();
                        let bound = (1..e - s).fold(Exact::one(), |acc, _| acc * stay.clone());
                        checks += 1;
                        if p > bound {
                            failures.push(format!("{name} {s}..{e}: no-link probability {p} above {bound}"));
                        }
                    }
                }
            }
            if !triples.is_empty() {
                let out = enumerate_three_way(&triples, element, 3).expect("enumerable triple input");
                for w in all_window_sets(out.occurrences.len()) {
                    let spec = SubsequenceSpec::new(element, w).unwrap();
                    let p = out.never_probability(&spec).unwrap();
                    checks += 1;
                    if p > three_way_product_bound(&spec.lengths(), &gamma, &gamma) {
                        failures.push(format!("{name} {spec}: never-chosen {p} above the three-way bound"));
                    }
                }
            }
            (checks, failures)
        })
        .collect();
    let checks: usize = results.iter().map(|r| r.0).sum();
    let mut failures: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
    let elapsed = start.elapsed();
    in_time("enumeration suite", elapsed, Duration::from_secs(300), &mut failures);
    verdict(&failures, format!("{} inputs, {checks} exact checks in {elapsed:.1?}", corpus.len()))
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn central_dominance_suite() -> Verdict {
    let mut failures = Vec::new();
    let p = Params::paper();
    let (ga, gb) = (&p.gamma_a, &p.gamma_b);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut dominated_pairs = 0;
    for case in 0..10_000 {
        let x = rng.random_range(0..=12usize);
        let n = x / 2 + 1;
        // Central dominance orders θ and θ′.
        let draw = |rng: &mut ChaCha8Rng| {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(2)).collect();
            d_of_q(x, &normalized(&w)).unwrap()
        };
        let (p1, p2) = (draw(&mut rng), draw(&mut rng));
        for (hi, lo) in [(&p1, &p2), (&p2, &p1)] {
            if centrally_dominates(hi, lo).unwrap() {
                dominated_pairs += 1;
                if theta(hi, gb) > theta(lo, gb) + SLACK || theta_prime(hi, gb) > theta_prime(lo, gb) + SLACK {
                    failures.push(format!("case {case}: dominance does not order theta at x = {x}"));
                }
            }
        }
        // Admissible mixtures with q0 ≤ α_x are bounded by p*.
        let alpha = alpha_coef(x, ga);
        let mut q = vec![0.0; n];
        if n == 1 {
            q[0] = 1.0;
        } else {
            q[0] = alpha * rng.random::<f64>();
            let rest = normalized(&(1..n).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
            for i in 1..n {
                q[i] = (1.0 - q[0]) * rest[i - 1];
            }
        }
        let d = d_of_q(x, &q).unwrap();
        let ps = p_star(x, ga);
        if theta(&d, gb) > theta(&ps, gb) + SLACK || theta_prime(&d, gb) > theta_prime(&ps, gb) + SLACK {
            failures.push(format!("case {case}: D(q) exceeds p* at x = {x}, q = {q:?}"));
        }
    }
    verdict(&failures, format!("10000 cases, {dominated_pairs} dominated pairs, no violations"))
}

struct Suite {
    label: &'static str,
    variant: Variant,
    source: Result<InstanceKind, Instance>,
    n: usize,
    trials: usize,
}

fn matching_suite() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let gamma_u = unweighted_tables(Mode::Consistent, (8, 0)).map(|t| t.tables.gamma);
    let gamma_w = weighted_tables(Mode::Consistent, (25, 25)).map(|t| t.tables.gamma);
    let (Ok(gamma_u), Ok(gamma_w)) = (gamma_u, gamma_w) else {
        return Verdict { pass: false, detail: "consistent-mode tables failed to solve".into() };
    };
    let suites = [
        Suite { label: "fresh random", variant: Variant::Unweighted, source: Ok(InstanceKind::RandomBipartite(0.1)), n: 50, trials: 2_500 },
        Suite { label: "fresh upper-triangular", variant: Variant::Unweighted, source: Ok(InstanceKind::UpperTriangular), n: 50, trials: 2_500 },
        Suite { label: "fresh uniform weights", variant: Variant::Weighted, source: Ok(InstanceKind::UniformWeights(0.2)), n: 40, trials: 2_500 },
        Suite { label: "fresh exponential weights", variant: Variant::Weighted, source: Ok(InstanceKind::ExponentialWeights(0.2)), n: 40, trials: 2_500 },
        Suite { label: "fixed upper-triangular", variant: Variant::Unweighted, source: Err(generate_instance(InstanceKind::UpperTriangular, 50, 1)), n: 50, trials: 10_000 },
        Suite { label: "fixed random", variant: Variant::Unweighted, source: Err(generate_instance(InstanceKind::RandomBipartite(0.08), 50, 2)), n: 50, trials: 10_000 },
        Suite { label: "fixed uniform weights", variant: Variant::Weighted, source: Err(generate_instance(InstanceKind::UniformWeights(0.15), 30, 3)), n: 30, trials: 10_000 },
        Suite { label: "fixed exponential weights", variant: Variant::Weighted, source: Err(generate_instance(InstanceKind::ExponentialWeights(0.15), 30, 4)), n: 30, trials: 10_000 },
    ];
    let mut runs = 0;
    let mut summary = Vec::new();
    for (i, s) in suites.iter().enumerate() {
        let cfg = ExperimentConfig {
            variant: s.variant,
            kind: *s.source.as_ref().unwrap_or(&InstanceKind::UpperTriangular),
            n: s.n,
            trials: s.trials,
            seed: 100 + i as u64,
            mode: Mode::Consistent,
            limit: None,
            tol: 1e-9,
        };
        let report = match &s.source {
            Ok(_) => ratio_experiment(&cfg),
            Err(inst) => instance_experiment(inst, &cfg),
        };
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{}: {e}", s.label));
                continue;
            }
        };
        runs += report.rows.len();
        let gamma = if s.variant == Variant::Unweighted { gamma_u } else { gamma_w };
        if report.audit_failures() > 0 {
            failures.push(format!("{}: {} audit failures", s.label, report.audit_failures()));
        }
        if report.mean < gamma - 3.0 * report.std_err {
            failures.push(format!("{}: mean ratio {} below {gamma} - 3 se", s.label, report.mean));
        }
        summary.push(format!("{} {:.3}", s.label, report.mean));
    }
    let elapsed = start.elapsed();
    in_time("matching suite", elapsed, Duration::from_secs(600), &mut failures);
    let ok = format!(
        "{runs} audited runs in {elapsed:.1?}, gamma {gamma_u:.6}/{gamma_w:.6}, mean ratios: {}",
        summary.join(", ")
    );
    verdict(&failures, ok)
}

fn monte_carlo_agreement(corpus: &[(String, Vec<Query>)]) -> Verdict {
    let start = Instant::now();
    let failures: Vec<String> = corpus
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, (name, queries))| {
            let element = watched(queries).unwrap();
            let (pairs, triples) = split_queries(queries);
            let full = |occ: usize| SubsequenceSpec::new(element, std::iter::once(0..occ).collect()).unwrap();
            let (spec, exact) = if triples.is_empty() {
                let out = enumerate_two_way(&pairs, element.into(), 8).unwrap();
                let spec = full(out.occurrences.len());
                let p = out.never_probability(&spec).unwrap();
                (spec, p)
            } else {
                let out = enumerate_three_way(&triples, element.into(), 3).unwrap();
                let spec = full(out.occurrences.len());
                let p = out.never_probability(&spec).unwrap();
                (spec, p)
            };
            let exact = exact.to_f64().unwrap();
            let est = mc_never(|_| queries.clone(), &spec, 1_000_000, 7_000 + i as u64).unwrap();
            (!est.contains(exact))
                .then(|| format!("{name} {spec}: exact {exact} outside [{}, {}]", est.lower, est.upper))
        })
        .collect();
    let elapsed = start.elapsed();
    verdict(&failures, format!("{} inputs at 10^6 trials each in {elapsed:.1?}", corpus.len()))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let criteria: [Criterion; 7] = [
        ("LP reproduction", Box::new(lp_reproduction)),
        ("constant reproduction", Box::new(constant_reproduction)),
        ("eta consistency", Box::new(eta_consistency)),
        ("exact-enumeration bound suite", Box::new(|| enumeration_suite(&corpus))),
        ("central-dominance suite", Box::new(central_dominance_suite)),
        ("matching duality suite", Box::new(matching_suite)),
        ("Monte Carlo / exact agreement", Box::new(|| monte_carlo_agreement(&corpus))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!("criterion {} {}: {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
