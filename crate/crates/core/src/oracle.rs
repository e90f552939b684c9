//! Exact and Monte Carlo probabilities of "never chosen" events.
//!
//! Exact enumeration walks every coin assignment once and records, per
//! assignment, which occurrences of the watched element were chosen. Any
//! number of window specifications can then be evaluated from the same
//! histogram.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::bounds::{eta_sum, zeta_product};
use crate::error::{Error, Result};
use crate::ocs::{split_triple, ElementId, PairQuery, Query, ScriptedCoins, ThreeWayOcs, TripleQuery, TwoWayOcs};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_PAIRS: usize = 8;
pub const DEFAULT_MAX_TRIPLES: usize = 3;
/// Hard ceiling for three-way enumeration.
pub const ABSOLUTE_MAX_TRIPLES: usize = 4;

/// Disjoint windows over the occurrences of one element.
///
/// Window `i..j` covers the `i`-th through `(j−1)`-th queries containing the
/// element, so each window is a consecutive subsequence by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsequenceSpec {
    pub element: ElementId,
    pub windows: Vec<Range<usize>>,
}

impl SubsequenceSpec {
    pub fn new(element: impl Into<ElementId>, mut windows: Vec<Range<usize>>) -> Result<Self> {
        windows.sort_by_key(|w| w.start);
        for w in &windows {
            if w.is_empty() {
                return Err(Error::InvalidWindows(format!("empty window {}..{}", w.start, w.end)));
            }
        }
        for pair in windows.windows(2) {
            if pair[0].end > pair[1].start {
                return Err(Error::InvalidWindows(format!(
                    "windows {}..{} and {}..{} overlap",
                    pair[0].start, pair[0].end, pair[1].start, pair[1].end
                )));
            }
        }
        Ok(SubsequenceSpec { element: element.into(), windows })
    }

    /// Parses `0..2,3..5`. A bare index `i` means `i..i+1`.
    pub fn parse(element: impl Into<ElementId>, text: &str) -> Result<Self> {
        let mut windows = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::InvalidWindows(format!("cannot parse window `{part}`"));
            let w = match part.split_once("..") {
                Some((a, b)) => a.parse().map_err(|_| bad())?..b.parse().map_err(|_| bad())?,
                None => {
                    let i: usize = part.parse().map_err(|_| bad())?;
                    i..i + 1
                }
            };
            windows.push(w);
        }
        Self::new(element, windows)
    }

    /// Window lengths `k_1..k_m`.
    pub fn lengths(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.len()).collect()
    }

    pub fn occurrence_mask(&self) -> u64 {
        self.windows.iter().flat_map(|w| w.clone()).fold(0, |m, i| m | 1 << i)
    }

    fn check(&self, occurrences: usize) -> Result<()> {
        match self.windows.last() {
            Some(w) if w.end > occurrences => Err(Error::InvalidWindows(format!(
                "window ends at {} but element {} occurs {occurrences} times",
                w.end, self.element
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SubsequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.windows.iter().map(|w| format!("{}..{}", w.start, w.end)).collect();
        write!(f, "{}:{}", self.element, parts.join(","))
    }
}

/// Every non-empty family of disjoint windows over `n` occurrences.
pub fn all_window_sets(n: usize) -> Vec<Vec<Range<usize>>> {
    fn go(start: usize, n: usize, acc: &mut Vec<Range<usize>>, out: &mut Vec<Vec<Range<usize>>>) {
        for s in start..n {
            for e in s + 1..=n {
                acc.push(s..e);
                out.push(acc.clone());
                go(e, n, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out
}

/// `∏ (1/2)^{k_i} (1 − γ)^{max(k_i−1, 0)}`.
pub fn two_way_product_bound<S: Scalar>(lengths: &[usize], gamma: &S) -> S {
    lengths.iter().fold(S::one(), |acc, &k| acc * zeta_product(k, gamma))
}

/// `∏ η(k_i)` with `η` evaluated by direct summation.
pub fn three_way_product_bound<S: Scalar>(lengths: &[usize], gamma_a: &S, gamma_b: &S) -> S {
    lengths.iter().fold(S::one(), |acc, &k| acc * eta_sum(k, gamma_a, gamma_b))
}

fn occurrence_steps(queries: impl Iterator<Item = bool>) -> Vec<usize> {
    queries.enumerate().filter(|(_, hit)| *hit).map(|(i, _)| i).collect()
}

fn probability(count: u64, total: u64) -> BigRational {
    BigRational::new(BigInt::from(count), BigInt::from(total))
}

/// Outcome histogram of a two-way run over all `2^{3n}` coin assignments.
#[derive(Debug, Clone)]
pub struct TwoWayOutcomes {
    pub element: ElementId,
    /// Query indices containing the element.
    pub occurrences: Vec<usize>,
    pub total: u64,
    /// `(chosen occurrences, links between occurrences)` to count. Link
    /// `(i, j)` between occurrences `i < j` is bit `8i + j`.
    pub hist: FxHashMap<(u64, u64), u64>,
}

impl TwoWayOutcomes {
    pub fn never_probability(&self, spec: &SubsequenceSpec) -> Result<BigRational> {
        spec.check(self.occurrences.len())?;
        let mask = spec.occurrence_mask();
        let hits: u64 = self.hist.iter().filter(|((c, _), _)| c & mask == 0).map(|(_, n)| n).sum();
        Ok(probability(hits, self.total))
    }

    /// Probability that no realized link has both ends inside `window`.
    pub fn no_internal_link_probability(&self, window: Range<usize>) -> Result<BigRational> {
        let spec = SubsequenceSpec::new(self.element, vec![window.clone()])?;
        spec.check(self.occurrences.len())?;
        let mut inside = 0u64;
        for i in window.clone() {
            for j in i + 1..window.end {
                inside |= 1 << (8 * i + j);
            }
        }
        let hits: u64 = self.hist.iter().filter(|((_, l), _)| l & inside == 0).map(|(_, n)| n).sum();
        Ok(probability(hits, self.total))
    }
}

/// Runs the two-way OCS on `pairs` under every coin assignment.
pub fn enumerate_two_way(pairs: &[PairQuery], element: ElementId, max_pairs: usize) -> Result<TwoWayOutcomes> {
    let n = pairs.len();
    if n > max_pairs.min(DEFAULT_MAX_PAIRS) {
        return Err(Error::TooLarge(format!("{n} pairs, at most {} enumerable", max_pairs.min(DEFAULT_MAX_PAIRS))));
    }
    let occurrences = occurrence_steps(pairs.iter().map(|q| q.contains(element)));
    if occurrences.is_empty() {
        return Err(Error::UnknownElement(element));
    }
    let mut occ_of_step = vec![usize::MAX; n];
    for (i, &s) in occurrences.iter().enumerate() {
        occ_of_step[s] = i;
    }
    let total = 1u64 << (3 * n);
    let mut hist = FxHashMap::default();
    let mut ocs = TwoWayOcs::with_coins(ScriptedCoins::default());
    for bits in 0..total {
        ocs.reset(ScriptedCoins::from_bits(bits));
        let mut chosen = 0u64;
        for (i, q) in pairs.iter().enumerate() {
            let q = PairQuery { step: i as u64, ..*q };
            if ocs.select(q)? == element {
                chosen |= 1 << occ_of_step[i];
            }
        }
        let mut links = 0u64;
        for (s, r, _) in ocs.trace().links() {
            let (i, j) = (occ_of_step[s as usize], occ_of_step[r as usize]);
            if i != usize::MAX && j != usize::MAX {
                links |= 1 << (8 * i + j);
            }
        }
        *hist.entry((chosen, links)).or_insert(0) += 1;
    }
    Ok(TwoWayOutcomes { element, occurrences, total, hist })
}

pub fn exact_two_way_never(pairs: &[PairQuery], spec: &SubsequenceSpec) -> Result<BigRational> {
    enumerate_two_way(pairs, spec.element, DEFAULT_MAX_PAIRS)?.never_probability(spec)
}

/// Outcome histogram of a three-way run over all `3^n · 2^{3n} · 2^{3n}`
/// combinations of pair choices and both selectors' coins.
#[derive(Debug, Clone)]
pub struct ThreeWayOutcomes {
    pub element: ElementId,
    pub occurrences: Vec<usize>,
    pub total: u64,
    /// Chosen-occurrence mask to weighted count.
    pub hist: FxHashMap<u64, u64>,
}

impl ThreeWayOutcomes {
    pub fn never_probability(&self, spec: &SubsequenceSpec) -> Result<BigRational> {
        spec.check(self.occurrences.len())?;
        let mask = spec.occurrence_mask();
        let hits: u64 = self.hist.iter().filter(|(c, _)| *c & mask == 0).map(|(_, n)| n).sum();
        Ok(probability(hits, self.total))
    }
}

/// Runs the three-way OCS on `triples` under every outcome.
///
/// The first selector's run is fixed by the pair choices and its coins, and
/// it determines the second selector's input, so identical second-stage
/// inputs are merged before the second selector's coins are enumerated.
pub fn enumerate_three_way(triples: &[TripleQuery], element: ElementId, max_triples: usize) -> Result<ThreeWayOutcomes> {
    let n = triples.len();
    let cap = max_triples.min(ABSOLUTE_MAX_TRIPLES);
    if n > cap {
        return Err(Error::TooLarge(format!("{n} triples, at most {cap} enumerable")));
    }
    for (i, t) in triples.iter().enumerate() {
        if t.a == t.b || t.a == t.c || t.b == t.c {
            return Err(Error::MalformedQuery { step: i as u64 });
        }
    }
    let occurrences = occurrence_steps(triples.iter().map(|t| t.contains(element)));
    if occurrences.is_empty() {
        return Err(Error::UnknownElement(element));
    }
    let coin_space = 1u64 << (3 * n);
    let choice_space = 3u64.pow(n as u32);

    let mut second_stage: FxHashMap<Vec<(ElementId, ElementId)>, u64> = FxHashMap::default();
    let mut a = TwoWayOcs::with_coins(ScriptedCoins::default());
    let mut choices = vec![0usize; n];
    for code in 0..choice_space {
        let mut c = code;
        for slot in choices.iter_mut() {
            *slot = (c % 3) as usize;
            c /= 3;
        }
        for bits in 0..coin_space {
            a.reset(ScriptedCoins::from_bits(bits));
            let mut b_input = Vec::with_capacity(n);
            for (i, t) in triples.iter().enumerate() {
                let ((x, y), left_out) = split_triple(t, choices[i]);
                let first = a.select(PairQuery { a: x, b: y, step: i as u64 })?;
                b_input.push((first, left_out));
            }
            *second_stage.entry(b_input).or_insert(0) += 1;
        }
    }

    let mut hist = FxHashMap::default();
    let mut b = TwoWayOcs::with_coins(ScriptedCoins::default());
    for (input, mult) in &second_stage {
        for bits in 0..coin_space {
            b.reset(ScriptedCoins::from_bits(bits));
            let mut chosen = 0u64;
            let mut occ = 0;
            for (i, &(x, y)) in input.iter().enumerate() {
                let out = b.select(PairQuery { a: x, b: y, step: i as u64 })?;
                if triples[i].contains(element) {
                    if out == element {
                        chosen |= 1 << occ;
                    }
                    occ += 1;
                }
            }
            *hist.entry(chosen).or_insert(0) += mult;
        }
    }
    Ok(ThreeWayOutcomes { element, occurrences, total: choice_space * coin_space * coin_space, hist })
}

pub fn exact_three_way_never(triples: &[TripleQuery], spec: &SubsequenceSpec) -> Result<BigRational> {
    enumerate_three_way(triples, spec.element, DEFAULT_MAX_TRIPLES)?.never_probability(spec)
}

/// A Monte Carlo frequency with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub successes: u64,
    pub trials: u64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided 99.9% normal quantile.
pub fn z_999() -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(0.9995)
}

impl EstimateWithCI {
    pub fn wilson(successes: u64, trials: u64, z: f64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        EstimateWithCI {
            estimate: p,
            successes,
            trials,
            lower: (center - half).max(0.0).min(p),
            upper: (center + half).min(1.0).max(p),
        }
    }

    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// No significant exceedance: the interval reaches down to `bound`.
    /// Equivalently the upper end exceeds `bound` by at most the full width,
    /// so a bound that holds with equality passes regardless of the sample.
    pub fn respects_upper_bound(&self, bound: f64) -> bool {
        self.lower <= bound
    }
}

/// Seed of trial `trial` under `master`: first word of ChaCha stream `trial`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.next_u64()
}

/// Estimates the probability that `spec.element` is never chosen inside
/// `spec`'s windows. `build` produces the input of each trial from the
/// trial's seed; all queries of one input must have the same arity.
pub fn mc_never<F>(mut build: F, spec: &SubsequenceSpec, trials: u64, master_seed: u64) -> Result<EstimateWithCI>
where
    F: FnMut(u64) -> Vec<Query>,
{
    if trials == 0 {
        return Err(Error::InvalidParams("at least one trial is required".into()));
    }
    let mask = spec.occurrence_mask();
    let mut two = TwoWayOcs::new(0);
    let mut three = ThreeWayOcs::new(0);
    let mut never = 0u64;
    for trial in 0..trials {
        let seed = trial_seed(master_seed, trial);
        let queries = build(seed);
        let pairs = queries.iter().all(|q| matches!(q, Query::Pair(_)));
        if !pairs && !queries.iter().all(|q| matches!(q, Query::Triple(_))) {
            return Err(Error::InvalidInstance("pairs and triples mixed in one input".into()));
        }
        two.reset(crate::ocs::StreamCoins::new(seed, 0));
        three.reseed(seed);
        let mut chosen = 0u64;
        let mut occ = 0;
        for (i, q) in queries.iter().enumerate() {
            let out = match *q {
                Query::Pair(p) => two.select(PairQuery { step: i as u64, ..p })?,
                Query::Triple(t) => three.select(TripleQuery { step: i as u64, ..t })?,
            };
            if q.contains(spec.element) {
                if out == spec.element {
                    chosen |= 1 << occ.min(63);
                }
                occ += 1;
            }
        }
        spec.check(occ)?;
        if chosen & mask == 0 {
            never += 1;
        }
    }
    Ok(EstimateWithCI::wilson(never, trials, z_999()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Pair,
    Triple,
}

impl Arity {
    pub fn size(self) -> usize {
        match self {
            Arity::Pair => 2,
            Arity::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    AllSame,
    Alternating,
    Chained,
    RandomRegular,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::AllSame, Family::Alternating, Family::Chained, Family::RandomRegular];

    pub fn name(self) -> &'static str {
        match self {
            Family::AllSame => "all-same",
            Family::Alternating => "alternating",
            Family::Chained => "chained",
            Family::RandomRegular => "random-k-regular",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn make_query(ids: &[u64], step: u64) -> Query {
    match *ids {
        [a, b] => Query::Pair(PairQuery::new(a, b, step)),
        [a, b, c] => Query::Triple(TripleQuery::new(a, b, c, step)),
        _ => unreachable!("arity is 2 or 3"),
    }
}

/// Deterministic stress inputs. Element 0 is in every query of the first
/// three families:
///
/// - `all-same`: `{0,1,2}` repeated;
/// - `alternating`: `{0,1,2}` and `{0,3,4}` in turn;
/// - `chained`: `{0,1,2}, {0,2,3}, {0,3,4}, …`, consecutive queries share a partner;
/// - `random-k-regular`: `size` queries over `size` elements, each element in
///   exactly `k` (the arity) of them, shuffled by `seed`.
///
/// Pair inputs drop the last element of each triple.
pub fn adversarial_family(family: Family, size: usize, arity: Arity, seed: u64) -> Result<Vec<Query>> {
    let k = arity.size();
    let ids: Vec<Vec<u64>> = match family {
        Family::AllSame => (0..size).map(|_| (0..k as u64).collect()).collect(),
        Family::Alternating => (0..size)
            .map(|i| {
                let base = if i % 2 == 0 { 1 } else { 1 + k as u64 - 1 };
                std::iter::once(0).chain(base..base + k as u64 - 1).collect()
            })
            .collect(),
        Family::Chained => (0..size as u64)
            .map(|i| std::iter::once(0).chain(i + 1..i + k as u64).collect())
            .collect(),
        Family::RandomRegular => random_regular(size, k, seed)?,
    };
    Ok(ids.iter().enumerate().map(|(i, q)| make_query(q, i as u64)).collect())
}

fn random_regular(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<u64>>> {
    if n < k {
        return Err(Error::InvalidParams(format!("random-k-regular needs at least {k} elements")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<u64> = (0..n as u64).flat_map(|e| std::iter::repeat_n(e, k)).collect();
    for _ in 0..10_000 {
        pool.shuffle(&mut rng);
        let groups: Vec<Vec<u64>> = pool.chunks(k).map(<[u64]>::to_vec).collect();
        let distinct = groups.iter().all(|g| (1..g.len()).all(|i| !g[..i].contains(&g[i])));
        if distinct {
            return Ok(groups);
        }
    }
    // Cyclic windows are always valid; relabel them randomly instead.
    let mut label: Vec<u64> = (0..n as u64).collect();
    label.shuffle(&mut rng);
    Ok((0..n).map(|i| (0..k).map(|j| label[(i + j) % n]).collect()).collect())
}

/// Splits a query list into its pairs and triples, renumbering steps.
pub fn split_queries(queries: &[Query]) -> (Vec<PairQuery>, Vec<TripleQuery>) {
    let mut pairs = Vec::new();
    let mut triples = Vec::new();
    for q in queries {
        match *q {
            Query::Pair(p) => pairs.push(PairQuery { step: pairs.len() as u64, ..p }),
            Query::Triple(t) => triples.push(TripleQuery { step: triples.len() as u64, ..t }),
        }
    }
    (pairs, triples)
}
