use std::cmp::Ordering;

use serde::Serialize;

use crate::bounds::{eta_pow_bound, zeta_product, BoundParams};
use crate::error::{Error, Result};
use crate::frlp::{LpSolution, Variant};
use crate::ocs::{PairQuery, StreamCoins, ThreeWayOcs, TripleQuery, TwoWayOcs};

use super::audit::{Dispatch, DualAudit, Increment, InvariantPoint};
use super::instance::Instance;
use super::{MatchingOutcome, PAIR_OCS_STREAM};

/// Count standing for a deterministic match.
pub const MATCHED: u32 = u32::MAX;

/// State on one weight interval `(previous breakpoint, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub hi: f64,
    pub k: u32,
    pub l: u32,
    pub alpha: f64,
}

/// Step functions `k_u(w)`, `ℓ_u(w)` and `α_u(w)` of one offline vertex,
/// plus the levels of its last pair and last two triples. All three
/// functions vanish past the last breakpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WeightProfile {
    levels: Vec<Level>,
    pub last_pair: f64,
    pub last_triple: f64,
    pub second_triple: f64,
}

impl WeightProfile {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Intervals as `(lo, level)`.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, &Level)> {
        let los = std::iter::once(0.0).chain(self.levels.iter().map(|l| l.hi));
        los.zip(&self.levels)
    }

    /// Level in force at weight `w > 0`.
    pub fn at(&self, w: f64) -> Level {
        self.levels
            .iter()
            .find(|l| l.hi >= w)
            .copied()
            .unwrap_or(Level { hi: f64::INFINITY, k: 0, l: 0, alpha: 0.0 })
    }

    /// Makes `w` a breakpoint without changing any function.
    fn split_at(&mut self, w: f64) {
        if w <= 0.0 {
            return;
        }
        match self.levels.iter().position(|l| l.hi >= w) {
            Some(i) if self.levels[i].hi == w => {}
            Some(i) => {
                let copy = Level { hi: w, ..self.levels[i] };
                self.levels.insert(i, copy);
            }
            None => self.levels.push(Level { hi: w, k: 0, l: 0, alpha: 0.0 }),
        }
    }

    pub fn alpha_total(&self) -> f64 {
        self.intervals().map(|(lo, l)| (l.hi - lo) * l.alpha).sum()
    }
}

/// Table lookups with the conventions beyond the solved range.
struct Duals<'a> {
    sol: &'a LpSolution<f64>,
    a_inf: f64,
    gamma: f64,
    delta1: f64,
    delta2: f64,
}

impl Duals<'_> {
    fn a(&self, k: u32, l: u32) -> f64 {
        if k == MATCHED {
            self.a_inf
        } else {
            self.sol.a(k as usize, l as usize)
        }
    }

    fn b(&self, k: u32, l: u32) -> f64 {
        if k == MATCHED {
            0.0
        } else {
            self.sol.b(k as usize, l as usize)
        }
    }

    fn zn(&self, k: u32, l: u32) -> f64 {
        if k == MATCHED {
            0.0
        } else {
            zeta_product(k as usize, &self.gamma) * eta_pow_bound(l as usize, &self.delta1, &self.delta2)
        }
    }

    /// `Δβ^{R3}_{u,v}` for an edge of weight `w`. Past the last breakpoint
    /// the counts are zero and `a(0, 0) = 0`, so the tail adds only `b(0, 0)`.
    fn delta_beta(&self, p: &WeightProfile, w: f64) -> f64 {
        let top = p.levels.last().map_or(0.0, |l| l.hi);
        let inside: f64 = p
            .intervals()
            .map(|(lo, lev)| {
                let below = (lev.hi.min(w) - lo).max(0.0);
                let above = (lev.hi - lo.max(w)).max(0.0);
                self.b(lev.k, lev.l) * below - self.a(lev.k, lev.l) * above / 3.0
            })
            .sum();
        inside + self.b(0, 0) * (w - top).max(0.0)
    }

    /// Deterministic match at `w`; returns `(primal increment, ∫Δα)`.
    fn deterministic(&self, p: &mut WeightProfile, w: f64) -> (f64, f64) {
        p.split_at(w);
        let (mut primal, mut dalpha, mut lo) = (0.0, 0.0, 0.0);
        for lev in &mut p.levels {
            let len = lev.hi - lo;
            lo = lev.hi;
            if lev.hi > w {
                continue;
            }
            primal += len * self.zn(lev.k, lev.l);
            let raised = lev.alpha.max(self.a_inf);
            dalpha += len * (raised - lev.alpha);
            *lev = Level { hi: lev.hi, k: MATCHED, l: MATCHED, alpha: raised };
        }
        (primal, dalpha)
    }

    fn two_way(&self, p: &mut WeightProfile, w: f64) -> (f64, f64) {
        p.split_at(w);
        let last = p.last_pair;
        let g = self.gamma;
        let (mut primal, mut dalpha, mut lo) = (0.0, 0.0, 0.0);
        for lev in &mut p.levels {
            let len = lev.hi - lo;
            lo = lev.hi;
            let (k, l) = (lev.k, lev.l);
            if k == MATCHED {
                continue;
            }
            let z = self.zn(k, l);
            let d = if lev.hi <= w {
                let deficit = if lev.hi > last && k >= 1 { g / 2.0 * z } else { 0.0 };
                let gain = if k >= 1 && lev.hi <= last { (1.0 + g) / 2.0 } else { 0.5 };
                primal += len * gain * z;
                lev.k += 1;
                self.a(k + 1, l) - self.a(k, l) - deficit
            } else if k >= 1 {
                g / 2.0 * z
            } else {
                0.0
            };
            lev.alpha += d;
            dalpha += len * d;
        }
        p.last_pair = w;
        (primal, dalpha)
    }

    fn three_way(&self, p: &mut WeightProfile, w: f64) -> (f64, f64) {
        p.split_at(w);
        let (w1, w2) = (p.last_triple, p.second_triple);
        let (d1, d2) = (self.delta1, self.delta2);
        let pay1 = 2.0 * d1 / 3.0;
        let pay12 = 2.0 * (d1 + d2 - d1 * d2) / 3.0;
        let pay2 = 2.0 * (d2 - d1 * d2) / 3.0;
        // The smallest of w, w1, w2 decides which earlier prepayment is spent.
        let smallest = if w <= w1 && w <= w2 {
            0
        } else if w1 <= w2 {
            1
        } else {
            2
        };
        let (mut primal, mut dalpha, mut lo) = (0.0, 0.0, 0.0);
        for lev in &mut p.levels {
            let len = lev.hi - lo;
            lo = lev.hi;
            let (k, l) = (lev.k, lev.l);
            if k == MATCHED {
                continue;
            }
            let z = self.zn(k, l);
            let tier = match l {
                0 => 0.0,
                1 => pay1 * z,
                _ => pay12 * z,
            };
            let d = if lev.hi <= w {
                let deficit = match smallest {
                    0 => 0.0,
                    1 if lev.hi <= w1 => 0.0,
                    1 => tier,
                    _ if lev.hi <= w2 => 0.0,
                    _ if lev.hi <= w1 => {
                        if l >= 2 {
                            pay2 * z
                        } else {
                            0.0
                        }
                    }
                    _ => tier,
                };
                let gain = if l >= 2 && lev.hi <= w1.min(w2) {
                    (1.0 + 2.0 * d1 + 2.0 * d2 - 2.0 * d1 * d2) / 3.0
                } else if l >= 1 && lev.hi <= w1 {
                    (1.0 + 2.0 * d1) / 3.0
                } else {
                    1.0 / 3.0
                };
                primal += len * gain * z;
                lev.l += 1;
                self.a(k, l + 1) - self.a(k, l) - deficit
            } else if l == 0 {
                0.0
            } else {
                tier + pay2 * self.zn(k, l + 1)
            };
            lev.alpha += d;
            dalpha += len * d;
        }
        p.second_triple = w1;
        p.last_triple = w;
        (primal, dalpha)
    }
}

/// Runs the OCS-driven edge-weighted algorithm with free disposal and
/// records its dual audit.
///
/// Each arrival scores its neighbors by `Δβ^{R3}`, forms the best triple,
/// pair and single, and serves the one with the largest positive total
/// (ties prefer the single, then the pair). The algorithm keeps, per
/// offline vertex, the heaviest edge it was ever matched with.
pub fn run_weighted(
    inst: &Instance,
    tables: &LpSolution<f64>,
    params: &BoundParams<f64>,
    seed: u64,
) -> Result<(MatchingOutcome, DualAudit)> {
    if tables.variant != Variant::Weighted {
        return Err(Error::TableMismatch(format!("{:?} tables in a weighted run", tables.variant)));
    }
    let params = params.with_sigmas(params.sigma_r2, params.sigma_d)?;
    inst.validate()?;
    let duals = Duals {
        sol: tables,
        a_inf: tables.a_inf(),
        gamma: params.gamma_b,
        delta1: params.delta1,
        delta2: params.delta2,
    };
    let (sr2, sd) = (params.sigma_r2, params.sigma_d);

    let mut pair_ocs = TwoWayOcs::with_coins(StreamCoins::new(seed, PAIR_OCS_STREAM));
    let mut triple_ocs = ThreeWayOcs::new(seed);
    let mut profiles = vec![WeightProfile::default(); inst.offline];
    let mut out = MatchingOutcome::new(inst);
    let mut audit = DualAudit { gamma: tables.gamma, beta: vec![0.0; inst.arrivals.len()], ..DualAudit::default() };

    for (v, arrival) in inst.arrivals.iter().enumerate() {
        let step = v as u64;
        let mut scored: Vec<(usize, f64, f64)> =
            arrival.edges.iter().map(|&(u, w)| (u, w, duals.delta_beta(&profiles[u], w))).collect();
        scored.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap_or(Ordering::Equal).then(x.0.cmp(&y.0)));
        let total = |n: usize| scored[..n].iter().map(|s| s.2).sum::<f64>();
        let beta_d = if !scored.is_empty() { sd * total(1) } else { f64::NEG_INFINITY };
        let beta_2 = if scored.len() >= 2 { sr2 * total(2) } else { f64::NEG_INFINITY };
        let beta_3 = if scored.len() >= 3 { total(3) } else { f64::NEG_INFINITY };
        let best = beta_d.max(beta_2).max(beta_3);
        let dispatch = if best.is_nan() || best <= 0.0 {
            Dispatch::Exposed
        } else if beta_d >= beta_2 && beta_d >= beta_3 {
            Dispatch::Deterministic
        } else if beta_2 >= beta_3 {
            Dispatch::TwoWay
        } else {
            Dispatch::ThreeWay
        };

        let (mut primal, mut dual) = (0.0, 0.0);
        let (chosen, touched, beta) = match dispatch {
            Dispatch::Exposed => (None, 0, 0.0),
            Dispatch::Deterministic => {
                let (u, w, _) = scored[0];
                let (p, da) = duals.deterministic(&mut profiles[u], w);
                primal += p;
                dual += da;
                (Some(u), 1, beta_d)
            }
            Dispatch::TwoWay => {
                let q = PairQuery::new(scored[0].0 as u64, scored[1].0 as u64, step);
                let pick = pair_ocs.select(q)?.0 as usize;
                for &(u, w, _) in &scored[..2] {
                    let (p, da) = duals.two_way(&mut profiles[u], w);
                    primal += p;
                    dual += da;
                }
                (Some(pick), 2, beta_2)
            }
            Dispatch::ThreeWay => {
                let t = TripleQuery::new(scored[0].0 as u64, scored[1].0 as u64, scored[2].0 as u64, step);
                let pick = triple_ocs.select(t)?.0 as usize;
                for &(u, w, _) in &scored[..3] {
                    let (p, da) = duals.three_way(&mut profiles[u], w);
                    primal += p;
                    dual += da;
                }
                (Some(pick), 3, beta_3)
            }
        };
        dual += beta;
        if let Some(u) = chosen {
            let w = scored.iter().find(|s| s.0 == u).expect("chosen among scored").1;
            out.assign(u, v, w);
        }
        for &(u, _, _) in &scored[..touched] {
            for (_, lev) in profiles[u].intervals() {
                audit.invariant_points.push(InvariantPoint {
                    arrival: v,
                    offline: u,
                    level: lev.hi,
                    alpha: lev.alpha,
                    required: duals.a(lev.k, lev.l),
                });
            }
        }
        out.dispatch.push(dispatch);
        audit.beta[v] = beta;
        audit.increments.push(Increment { arrival: v, dispatch, primal, dual });
    }

    audit.alpha = profiles.iter().map(WeightProfile::alpha_total).collect();
    audit.alpha_levels = profiles.iter().map(|p| p.levels.iter().map(|l| (l.hi, l.alpha)).collect()).collect();
    audit.edges = inst.edges().collect();
    out.value = out.matched_weight.iter().sum();
    out.profiles = profiles;
    Ok((out, audit))
}
