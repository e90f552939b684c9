//! Probability bounds for the two-way and three-way selectors.
//!
//! Everything is generic over [`Scalar`]: `f64` for production tables,
//! [`num_rational::BigRational`] for exact checks at small sizes.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{binomial, le_slack, powi, Scalar};

/// `(13·√13 − 35) / 108`, the guarantee of the stronger two-way OCS.
pub fn paper_gamma_b() -> f64 {
    (13.0 * 13f64.sqrt() - 35.0) / 108.0
}

/// Rounded deltas of paper mode.
const PAPER_DELTA1: f64 = 0.0309587;
const PAPER_DELTA2: f64 = 0.0165525;

/// Scalar constants of the bound calculus and the weighted dual.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams<S> {
    pub gamma_a: S,
    pub gamma_b: S,
    pub delta1: S,
    pub delta2: S,
    pub sigma_r2: S,
    pub sigma_d: S,
    c: [S; 4],
    t: [S; 4],
}

impl<S: Scalar> BoundParams<S> {
    /// Validates the parameters and derives `c1..c4`, `t1..t4` from the gammas.
    pub fn new(gamma_a: S, gamma_b: S, delta1: S, delta2: S, sigma_r2: S, sigma_d: S) -> Result<Self> {
        let zero = S::zero();
        let one = S::one();
        let three = S::ratio(3, 1);
        for (name, g) in [("gamma_a", &gamma_a), ("gamma_b", &gamma_b)] {
            if *g <= zero || *g >= one {
                return Err(Error::InvalidParams(format!("{name} must lie in (0, 1)")));
            }
        }
        for (name, d) in [("delta1", &delta1), ("delta2", &delta2)] {
            if *d < zero || *d >= one {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1)")));
            }
        }
        if sigma_r2 <= zero || sigma_r2 > S::ratio(3, 2) {
            return Err(Error::InvalidParams("sigma_r2 must lie in (0, 3/2]".into()));
        }
        let sigma_d_max = three.clone() * sigma_r2.clone() / (three - sigma_r2.clone());
        if sigma_d <= zero || sigma_d > sigma_d_max {
            return Err(Error::InvalidParams("sigma_d must lie in (0, 3·sigma_r2/(3 − sigma_r2)]".into()));
        }
        let (c, t) = closed_form_constants(&gamma_a, &gamma_b);
        Ok(BoundParams { gamma_a, gamma_b, delta1, delta2, sigma_r2, sigma_d, c, t })
    }

    /// Paper-mode constants: `γ_A = 1/16`, `γ_B = (13√13 − 35)/108`, the rounded
    /// deltas, `σ_R2 = 1.3`, `σ_D = 2.2`.
    pub fn paper() -> Self {
        Self::new(
            S::ratio(1, 16),
            S::from_f64_lossy(paper_gamma_b()),
            S::from_f64_lossy(PAPER_DELTA1),
            S::from_f64_lossy(PAPER_DELTA2),
            S::ratio(13, 10),
            S::ratio(22, 10),
        )
        .expect("paper constants are valid")
    }

    /// Both selectors are 1/16-OCS instances, deltas re-derived to match.
    pub fn consistent() -> Self {
        let g = S::ratio(1, 16);
        let (d1, d2) = derive_deltas(&g, &g).expect("1/16 gives valid deltas");
        Self::new(g.clone(), g, d1, d2, S::ratio(13, 10), S::ratio(22, 10)).expect("consistent constants are valid")
    }

    /// Same gammas and deltas with different dual scalings.
    pub fn with_sigmas(&self, sigma_r2: S, sigma_d: S) -> Result<Self> {
        Self::new(
            self.gamma_a.clone(),
            self.gamma_b.clone(),
            self.delta1.clone(),
            self.delta2.clone(),
            sigma_r2,
            sigma_d,
        )
    }

    /// `c1..c4` of the closed form of `η`.
    pub fn c(&self) -> &[S; 4] {
        &self.c
    }

    /// `t1..t4` of the closed form of `η`.
    pub fn t(&self) -> &[S; 4] {
        &self.t
    }

    pub fn to_f64(&self) -> BoundParams<f64> {
        let f = |s: &S| s.to_f64_lossy();
        BoundParams {
            gamma_a: f(&self.gamma_a),
            gamma_b: f(&self.gamma_b),
            delta1: f(&self.delta1),
            delta2: f(&self.delta2),
            sigma_r2: f(&self.sigma_r2),
            sigma_d: f(&self.sigma_d),
            c: self.c.each_ref().map(f),
            t: self.t.each_ref().map(f),
        }
    }
}

impl<S: Scalar> fmt::Display for BoundParams<S> {
    /// One `key=value` per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.to_f64();
        writeln!(f, "gamma_a={}", p.gamma_a)?;
        writeln!(f, "gamma_b={}", p.gamma_b)?;
        writeln!(f, "delta1={}", p.delta1)?;
        writeln!(f, "delta2={}", p.delta2)?;
        writeln!(f, "sigma_r2={}", p.sigma_r2)?;
        writeln!(f, "sigma_d={}", p.sigma_d)?;
        for i in 0..4 {
            writeln!(f, "c{}={}", i + 1, p.c[i])?;
        }
        for i in 0..4 {
            writeln!(f, "t{}={}", i + 1, p.t[i])?;
        }
        Ok(())
    }
}

fn closed_form_constants<S: Scalar>(ga: &S, gb: &S) -> ([S; 4], [S; 4]) {
    let one = S::one();
    let r = |n, d| S::ratio(n, d);
    let three_m = r(3, 1) - gb.clone();
    let sq = three_m.clone() * three_m;
    let one_p = one.clone() + gb.clone();
    let denom = (one.clone() - ga.clone()) * (one.clone() - gb.clone()) * sq.clone();
    let c1 = r(8, 1) / sq;
    let c2 = one_p.clone() * one_p.clone() / denom.clone();
    let c3 = ga.clone() * one_p.clone() * one_p / denom;
    let c4 = gb.clone() / ((one.clone() - ga.clone()) * (one.clone() - gb.clone()));
    let t1 = (r(2, 1) - gb.clone()) / r(3, 1);
    let t2 = (r(4, 1) - r(3, 1) * ga.clone() - r(2, 1) * gb.clone() + ga.clone() * gb.clone()) / r(6, 1);
    let t3 = (one.clone() - gb.clone()) / r(6, 1);
    let t4 = (one - ga.clone()) / r(3, 1);
    ([c1, c2, c3, c4], [t1, t2, t3, t4])
}

/// A probability mass function on `{0..x}` symmetric about `x/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricDistribution<S> {
    x: usize,
    mass: Vec<S>,
}

impl<S: Scalar> SymmetricDistribution<S> {
    pub fn new(mass: Vec<S>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let x = mass.len() - 1;
        let mut total = S::zero();
        for (y, m) in mass.iter().enumerate() {
            if *m < -S::slack() {
                return Err(Error::InvalidDistribution(format!("negative mass at {y}")));
            }
            if (m.clone() - mass[x - y].clone()).abs() > S::slack() {
                return Err(Error::InvalidDistribution(format!("mass at {y} and {} differ", x - y)));
            }
            total = total + m.clone();
        }
        if (total - S::one()).abs() > S::slack() {
            return Err(Error::InvalidDistribution("mass does not sum to 1".into()));
        }
        Ok(SymmetricDistribution { x, mass })
    }

    /// `Binom(x, 1/2)`.
    pub fn binomial_half(x: usize) -> Self {
        let half = powi(&S::ratio(1, 2), x);
        let mass = (0..=x).map(|y| binomial::<S>(x, y) * half.clone()).collect();
        SymmetricDistribution { x, mass }
    }

    /// Point mass on `x/2`; `x` must be even.
    pub fn central_point(x: usize) -> Result<Self> {
        if !x.is_multiple_of(2) {
            return Err(Error::InvalidDistribution("central point needs even x".into()));
        }
        let mut mass = vec![S::zero(); x + 1];
        mass[x / 2] = S::one();
        Ok(SymmetricDistribution { x, mass })
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn mass(&self) -> &[S] {
        &self.mass
    }

    pub fn get(&self, y: usize) -> S {
        self.mass.get(y).cloned().unwrap_or_else(S::zero)
    }
}

/// `(1/2)^k (1 − γ)^{max(k−1, 0)}`: never-chosen bound of a two-way γ-OCS
/// over `k` consecutive pairs.
pub fn zeta_product<S: Scalar>(k: usize, gamma: &S) -> S {
    powi(&S::ratio(1, 2), k) * powi(&(S::one() - gamma.clone()), k.saturating_sub(1))
}

/// Which never-chosen bound the two-way selector is credited with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoWayBound {
    /// `(1/2)^k f_k`, the single-subsequence bound of the stronger OCS.
    Recursive,
    /// `(1/2)^k (1 − γ)^{max(k−1, 0)}`, valid for any γ-OCS.
    Product,
}

impl TwoWayBound {
    pub fn zeta<S: Scalar>(self, k: usize, gamma: &S) -> S {
        match self {
            TwoWayBound::Recursive => zeta_unweighted(k, gamma),
            TwoWayBound::Product => zeta_product(k, gamma),
        }
    }
}

/// `f_0 = f_1 = 1`, `f_k = f_{k−1} − γ_B f_{k−2}`.
pub fn f_seq<S: Scalar>(k: usize, gamma_b: &S) -> S {
    let (mut prev, mut cur) = (S::one(), S::one());
    for _ in 1..k {
        let next = cur.clone() - gamma_b.clone() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(1/2)^k f_k`, the two-way bound used by the unweighted dual.
pub fn zeta_unweighted<S: Scalar>(k: usize, gamma_b: &S) -> S {
    powi(&S::ratio(1, 2), k) * f_seq(k, gamma_b)
}

/// `α_x = (1 − γ_A)^{max(x−1, 0)}`.
pub fn alpha_coef<S: Scalar>(x: usize, gamma_a: &S) -> S {
    powi(&(S::one() - gamma_a.clone()), x.saturating_sub(1))
}

/// `D(q)(y) = Σ_i q_i C(x−2i, y−i) (1/2)^{x−2i}`: `i` forced anti-correlated
/// pairs contribute one selection each, the rest are fair coins.
pub fn d_of_q<S: Scalar>(x: usize, q: &[S]) -> Result<SymmetricDistribution<S>> {
    if q.len() != x / 2 + 1 {
        return Err(Error::InvalidDistribution(format!("q needs {} entries, got {}", x / 2 + 1, q.len())));
    }
    let mut total = S::zero();
    for qi in q {
        if *qi < -S::slack() {
            return Err(Error::InvalidDistribution("negative q entry".into()));
        }
        total = total + qi.clone();
    }
    if (total - S::one()).abs() > S::slack() {
        return Err(Error::InvalidDistribution("q does not sum to 1".into()));
    }
    let half = S::ratio(1, 2);
    let mut mass = vec![S::zero(); x + 1];
    for (i, qi) in q.iter().enumerate() {
        if qi.is_zero() {
            continue;
        }
        let free = x - 2 * i;
        let scale = qi.clone() * powi(&half, free);
        for j in 0..=free {
            mass[i + j] = mass[i + j].clone() + scale.clone() * binomial::<S>(free, j);
        }
    }
    Ok(SymmetricDistribution { x, mass })
}

/// The bounding distribution `p*(x, ·) = D(α_x, 1 − α_x, 0, …)`.
pub fn p_star<S: Scalar>(x: usize, gamma_a: &S) -> SymmetricDistribution<S> {
    let mut q = vec![S::zero(); x / 2 + 1];
    let a = alpha_coef(x, gamma_a);
    if x >= 2 {
        q[1] = S::one() - a.clone();
    }
    q[0] = a;
    d_of_q(x, &q).expect("p* mixture is valid")
}

/// `θ(x, p) = Σ_y p(y) (1/2)^y (1 − γ_B)^{y−1}`.
pub fn theta<S: Scalar>(p: &SymmetricDistribution<S>, gamma_b: &S) -> S {
    let one_m = S::one() - gamma_b.clone();
    let half = S::ratio(1, 2);
    let mut acc = S::zero();
    let mut w = S::one() / one_m.clone();
    for m in &p.mass {
        acc = acc + m.clone() * w.clone();
        w = w * half.clone() * one_m.clone();
    }
    acc
}

/// `θ′(x, p) = Σ_y p(y) (1/2)^y (1 − γ_B)^{max(y−1, 0)}`.
pub fn theta_prime<S: Scalar>(p: &SymmetricDistribution<S>, gamma_b: &S) -> S {
    theta(p, gamma_b) - gamma_b.clone() / (S::one() - gamma_b.clone()) * p.get(0)
}

/// Closed form of `θ(x, p*(x, ·))`.
pub fn theta_closed<S: Scalar>(x: usize, params: &BoundParams<S>) -> S {
    let one = S::one();
    let (ga, gb) = (&params.gamma_a, &params.gamma_b);
    if x == 0 {
        return one / (S::one() - gb.clone());
    }
    let base = (S::ratio(3, 1) - gb.clone()) / S::ratio(4, 1);
    let [c1, c2, _, _] = &params.c;
    c1.clone() * powi(&base, x) + c2.clone() * powi(&(base * (one - ga.clone())), x)
}

/// Closed form of `θ′(x, p*(x, ·))`.
pub fn theta_prime_closed<S: Scalar>(x: usize, params: &BoundParams<S>) -> S {
    if x == 0 {
        return S::one();
    }
    let ga = params.gamma_a.clone();
    let c4 = params.c[3].clone();
    theta_closed(x, params) - c4 * powi(&((S::one() - ga) / S::ratio(2, 1)), x)
}

/// Whether `p1` centrally dominates `p2`: some radius `z` has `p1 ≥ p2`
/// on `[x/2 − z, x/2 + z]` and `p1 ≤ p2` outside it.
pub fn centrally_dominates<S: Scalar>(p1: &SymmetricDistribution<S>, p2: &SymmetricDistribution<S>) -> Result<bool> {
    if p1.x != p2.x {
        return Err(Error::InvalidDistribution("supports differ".into()));
    }
    for p in [p1, p2] {
        for y in 0..=p.x {
            if (p.mass[y].clone() - p.mass[p.x - y].clone()).abs() > S::slack() {
                return Err(Error::InvalidDistribution("asymmetric input".into()));
            }
        }
    }
    // By symmetry only the lower half matters. Inner window starts at `lo`:
    // indices `lo..=x/2` need p1 ≥ p2, indices `0..lo` need p1 ≤ p2.
    let mid = p1.x / 2;
    let ge: Vec<bool> = (0..=mid).map(|y| le_slack(&p2.mass[y], &p1.mass[y])).collect();
    let le: Vec<bool> = (0..=mid).map(|y| le_slack(&p1.mass[y], &p2.mass[y])).collect();
    Ok((0..=mid).any(|lo| le[..lo].iter().all(|&b| b) && ge[lo..].iter().all(|&b| b)))
}

/// `C(k, x) r^x (1 − r)^{k−x}`.
pub fn binom_pmf<S: Scalar>(k: usize, x: usize, r: &S) -> Result<S> {
    if x > k {
        return Err(Error::InvalidParams(format!("binomial outcome {x} exceeds {k} trials")));
    }
    Ok(binomial::<S>(k, x) * powi(r, x) * powi(&(S::one() - r.clone()), k - x))
}

/// `η(k)` by direct summation over the first selector's load `x` and
/// selection count `y`.
pub fn eta_sum<S: Scalar>(k: usize, gamma_a: &S, gamma_b: &S) -> S {
    let two_thirds = S::ratio(2, 3);
    let half = S::ratio(1, 2);
    let one_m = S::one() - gamma_b.clone();
    let mut acc = S::zero();
    for x in 0..=k {
        let px = binom_pmf(k, x, &two_thirds).expect("x ≤ k");
        let ps = p_star(x, gamma_a);
        let mut inner = S::zero();
        for (y, m) in ps.mass.iter().enumerate() {
            let n = k - x + y;
            inner = inner + m.clone() * powi(&half, n) * powi(&one_m, n.saturating_sub(1));
        }
        acc = acc + px * inner;
    }
    acc
}

/// `η(k) = c1 t1^k + c2 t2^k − c3 t3^k − c4 t4^k`, with `η(0) = 1`.
pub fn eta_closed<S: Scalar>(k: usize, params: &BoundParams<S>) -> S {
    if k == 0 {
        return S::one();
    }
    let [c1, c2, c3, c4] = &params.c;
    let [t1, t2, t3, t4] = &params.t;
    c1.clone() * powi(t1, k) + c2.clone() * powi(t2, k) - c3.clone() * powi(t3, k) - c4.clone() * powi(t4, k)
}

/// `(2/3)^k (1 − δ1)^{max(k−1, 0)} (1 − δ2)^{max(k−2, 0)}`.
pub fn eta_pow_bound<S: Scalar>(k: usize, delta1: &S, delta2: &S) -> S {
    powi(&S::ratio(2, 3), k)
        * powi(&(S::one() - delta1.clone()), k.saturating_sub(1))
        * powi(&(S::one() - delta2.clone()), k.saturating_sub(2))
}

/// Solves `(2/3)^2 (1 − δ1) = η(2)` and `(2/3)^3 (1 − δ1)^2 (1 − δ2) = η(3)`.
pub fn derive_deltas<S: Scalar>(gamma_a: &S, gamma_b: &S) -> Result<(S, S)> {
    let one = S::one();
    let e2 = eta_sum(2, gamma_a, gamma_b);
    let e3 = eta_sum(3, gamma_a, gamma_b);
    let r1 = e2 / S::ratio(4, 9);
    if r1 <= S::zero() || r1 > one {
        return Err(Error::InvalidParams("η(2) outside (0, 4/9]".into()));
    }
    let r2 = e3 / (S::ratio(8, 27) * r1.clone() * r1.clone());
    if r2 <= S::zero() || r2 > one {
        return Err(Error::InvalidParams("η(3) outside the admissible range".into()));
    }
    Ok((one.clone() - r1, one - r2))
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use proptest::prelude::*;

    use super::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    #[test]
    fn zeta_small_values() {
        assert_eq!(zeta_product(0, &q(1, 16)), q(1, 1));
        assert_eq!(zeta_product(1, &q(1, 16)), q(1, 2));
        assert_eq!(zeta_product(2, &q(1, 16)), q(15, 64));
    }

    #[test]
    fn f_seq_recursion() {
        let gb = paper_gamma_b();
        assert_eq!(f_seq(0, &gb), 1.0);
        assert_eq!(f_seq(1, &gb), 1.0);
        assert!((f_seq(2, &gb) - 0.8900725).abs() < 1e-7);
        assert_eq!(f_seq(3, &q(1, 4)), q(1, 2));
        assert_eq!(zeta_unweighted(1, &gb), 0.5);
    }

    #[test]
    fn alpha_and_p_star() {
        let ga = q(1, 16);
        assert_eq!(alpha_coef(1, &ga), q(1, 1));
        assert_eq!(alpha_coef(2, &ga), q(15, 16));
        assert_eq!(alpha_coef(3, &ga), q(225, 256));
        assert_eq!(p_star(0, &ga).mass(), &[q(1, 1)]);
        assert_eq!(p_star(2, &ga).get(0), q(15, 64));
        for x in 0..=20 {
            let p = p_star(x, &ga);
            assert_eq!(p.mass().iter().cloned().fold(q(0, 1), |a, b| a + b), q(1, 1));
            assert_eq!(p.get(0), alpha_coef(x, &ga) * powi(&q(1, 2), x));
            SymmetricDistribution::new(p.mass().to_vec()).unwrap();
        }
    }

    #[test]
    fn d_of_q_cases() {
        assert_eq!(d_of_q(4, &[q(1, 1), q(0, 1), q(0, 1)]).unwrap(), SymmetricDistribution::binomial_half(4));
        assert_eq!(d_of_q(2, &[q(0, 1), q(1, 1)]).unwrap().mass(), &[q(0, 1), q(1, 1), q(0, 1)]);
        assert!(d_of_q(2, &[q(1, 2), q(1, 4)]).is_err());
        assert!(d_of_q(2, &[q(1, 1)]).is_err());
    }

    #[test]
    fn theta_at_zero() {
        let p = BoundParams::<f64>::paper();
        let point = SymmetricDistribution::new(vec![1.0]).unwrap();
        assert!((theta(&point, &p.gamma_b) - 1.0 / (1.0 - p.gamma_b)).abs() < 1e-15);
        assert_eq!(theta_prime(&point, &p.gamma_b), 1.0);
        assert!((theta_closed(0, &p) - 1.0 / (1.0 - p.gamma_b)).abs() < 1e-15);
        assert_eq!(theta_prime_closed(0, &p), 1.0);
    }

    #[test]
    fn theta_closed_matches_sum_exactly() {
        let p = BoundParams::<Q>::consistent();
        for x in 0..=30 {
            let ps = p_star(x, &p.gamma_a);
            assert_eq!(theta(&ps, &p.gamma_b), theta_closed(x, &p), "x={x}");
            assert_eq!(theta_prime(&ps, &p.gamma_b), theta_prime_closed(x, &p), "x={x}");
        }
    }

    #[test]
    fn theta_closed_matches_sum_paper() {
        let p = BoundParams::<f64>::paper();
        for x in 0..=30 {
            let ps = p_star(x, &p.gamma_a);
            assert!((theta(&ps, &p.gamma_b) - theta_closed(x, &p)).abs() < 1e-12);
            assert!((theta_prime(&ps, &p.gamma_b) - theta_prime_closed(x, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn dominance_basics() {
        let b = SymmetricDistribution::<Q>::binomial_half(6);
        assert!(centrally_dominates(&b, &b).unwrap());
        let point = SymmetricDistribution::central_point(6).unwrap();
        assert!(centrally_dominates(&point, &b).unwrap());
        assert!(!centrally_dominates(&b, &point).unwrap());
        let lopsided = SymmetricDistribution { x: 2, mass: vec![q(1, 2), q(1, 2), q(0, 1)] };
        assert!(centrally_dominates(&b, &lopsided).is_err());
        assert!(centrally_dominates(&b, &SymmetricDistribution::binomial_half(4)).is_err());
    }

    #[test]
    fn binom_pmf_values() {
        assert_eq!(binom_pmf(2, 1, &q(2, 3)).unwrap(), q(4, 9));
        assert_eq!(binom_pmf(5, 0, &q(2, 3)).unwrap(), q(1, 243));
        let total = (0..=7).map(|x| binom_pmf(7, x, &q(2, 3)).unwrap()).fold(q(0, 1), |a, b| a + b);
        assert_eq!(total, q(1, 1));
        assert!(binom_pmf(2, 3, &q(1, 2)).is_err());
    }

    #[test]
    fn eta_spot_values() {
        let p = BoundParams::<f64>::paper();
        assert_eq!(eta_sum(0, &p.gamma_a, &p.gamma_b), 1.0);
        assert!((eta_sum(1, &p.gamma_a, &p.gamma_b) - 2.0 / 3.0).abs() < 1e-15);
        assert!((eta_closed(1, &p) - 2.0 / 3.0).abs() < 1e-15);
        assert!(eta_closed(4, &p) < 0.173);
        assert_eq!(eta_sum(1, &q(1, 16), &q(1, 16)), q(2, 3));
    }

    #[test]
    fn eta_closed_is_exact_for_rationals() {
        let p = BoundParams::<Q>::consistent();
        for k in 0..=12 {
            assert_eq!(eta_sum(k, &p.gamma_a, &p.gamma_b), eta_closed(k, &p), "k={k}");
        }
    }

    #[test]
    fn paper_constants() {
        let p = BoundParams::<f64>::paper();
        let c = [0.957795, 0.176756, 0.011047, 0.131738];
        let t = [0.630024, 0.599919, 0.148345, 0.312500];
        for i in 0..4 {
            assert!((p.c()[i] - c[i]).abs() < 5e-6, "c{}", i + 1);
            assert!((p.t()[i] - t[i]).abs() < 5e-6, "t{}", i + 1);
        }
        let (d1, d2) = derive_deltas(&p.gamma_a, &p.gamma_b).unwrap();
        assert!((d1 - 0.0309587).abs() < 5e-7);
        assert!((d2 - 0.0165525).abs() < 5e-7);
        assert!((eta_pow_bound(2, &p.delta1, &p.delta2) - 0.430685).abs() < 1e-6);
    }

    #[test]
    fn consistent_deltas_are_exact() {
        let p = BoundParams::<Q>::consistent();
        assert_eq!(p.gamma_b, q(1, 16));
        assert!(p.delta1 > q(0, 1) && p.delta2 > q(0, 1));
        assert_eq!(eta_pow_bound(2, &p.delta1, &p.delta2), eta_sum(2, &p.gamma_a, &p.gamma_b));
        assert_eq!(eta_pow_bound(3, &p.delta1, &p.delta2), eta_sum(3, &p.gamma_a, &p.gamma_b));
    }

    #[test]
    fn pow_bound_dominates_closed_form() {
        for p in [BoundParams::<f64>::paper(), BoundParams::<f64>::consistent()] {
            let mut prev = 1.0;
            for k in 0..=100 {
                let e = eta_closed(k, &p);
                assert!(le_slack(&e, &eta_pow_bound(k, &p.delta1, &p.delta2)), "k={k}");
                if k > 0 {
                    assert!(e < prev);
                }
                prev = e;
            }
        }
    }

    #[test]
    fn param_validation() {
        let p = BoundParams::<f64>::paper();
        assert!(p.with_sigmas(1.6, 1.0).is_err());
        assert!(p.with_sigmas(1.3, 2.3).is_err());
        assert!(p.with_sigmas(1.5, 3.0).is_ok());
        assert!(BoundParams::new(0.0, 0.1, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(SymmetricDistribution::new(vec![0.5, 0.25]).is_err());
        assert!(SymmetricDistribution::new(vec![0.5, 0.4]).is_err());
    }

    fn random_q(x: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, x / 2 + 1).prop_map(|w| {
            let s: f64 = w.iter().sum::<f64>().max(1e-9);
            w.iter().map(|v| v / s).collect()
        })
    }

    proptest! {
        #[test]
        fn binomial_is_dominated_by_any_mixture((x, q) in (0usize..=12).prop_flat_map(|x| (Just(x), random_q(x)))) {
            let d = d_of_q(x, &q).unwrap();
            prop_assert!(centrally_dominates(&d, &SymmetricDistribution::binomial_half(x)).unwrap());
        }

        #[test]
        fn dominance_orders_theta(x in 0usize..=12, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gb = paper_gamma_b();
            let mut draw = || {
                let w: Vec<f64> = (0..=x / 2).map(|_| rng.random::<f64>()).collect();
                let s: f64 = w.iter().sum();
                d_of_q(x, &w.iter().map(|v| v / s).collect::<Vec<_>>()).unwrap()
            };
            let (p1, p2) = (draw(), draw());
            for (hi, lo) in [(&p1, &p2), (&p2, &p1)] {
                if centrally_dominates(hi, lo).unwrap() {
                    prop_assert!(theta(hi, &gb) <= theta(lo, &gb) + 1e-12);
                    prop_assert!(theta_prime(hi, &gb) <= theta_prime(lo, &gb) + 1e-12);
                }
            }
        }

        #[test]
        fn p_star_bounds_admissible_mixtures(x in 0usize..=12, raw in prop::collection::vec(0.0f64..1.0, 7), t in 0.0f64..=1.0) {
            let p = BoundParams::<f64>::paper();
            let alpha = alpha_coef(x, &p.gamma_a);
            let n = x / 2 + 1;
            let mut q = vec![0.0; n];
            q[0] = alpha * t;
            if n > 1 {
                let s: f64 = raw[..n - 1].iter().sum::<f64>().max(1e-9);
                for i in 1..n {
                    q[i] = (1.0 - q[0]) * raw[i - 1] / s;
                }
            } else {
                q[0] = 1.0;
            }
            let d = d_of_q(x, &q).unwrap();
            let ps = p_star(x, &p.gamma_a);
            prop_assert!(theta(&d, &p.gamma_b) <= theta(&ps, &p.gamma_b) + 1e-12);
            prop_assert!(theta_prime(&d, &p.gamma_b) <= theta_prime(&ps, &p.gamma_b) + 1e-12);
        }
    }
}
