use crate::bounds::{eta_closed, eta_pow_bound, zeta_product, BoundParams, TwoWayBound};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::model::{LpModel, Sense, Var, Variant};
use super::qorder::{sorted_q, QOrder};

/// `ζ` and `η` of the unweighted dual, as exact scalars and as the `f64`
/// order on `Q` they induce.
pub fn unweighted_order<S: Scalar>(limit: (usize, usize), params: &BoundParams<S>, two_way: TwoWayBound) -> QOrder {
    let p = params.to_f64();
    let gb = p.gamma_b;
    sorted_q(limit, move |k| two_way.zeta(k, &gb), move |l| eta_closed(l, &p))
}

/// Unweighted factor-revealing LP up to `(kmax, ellmax)` in the `Q` order.
///
/// `ζ` is the two-way bound selected by `two_way`, `η` the closed form.
/// Pairs past the limit that appear in some row get pinned variables.
pub fn build_unweighted<S: Scalar>(
    kmax: usize,
    ellmax: usize,
    params: &BoundParams<S>,
    two_way: TwoWayBound,
) -> Result<LpModel<S>> {
    let limit = (kmax, ellmax);
    let order = unweighted_order(limit, params, two_way);
    let zeta = |k: usize| two_way.zeta(k, &params.gamma_b);
    let eta = |l: usize| eta_closed(l, params);
    let r = |n: i64| S::ratio(n, 1);

    let mut m = LpModel::new(Variant::Unweighted, limit);
    let top = Var::A(kmax, ellmax);
    for &(k, l) in order.prefix() {
        m.var(Var::A(k, l));
    }
    for &(k, l) in order.prefix() {
        m.var(Var::B(k, l));
    }

    let mut pinned = Vec::new();
    let mut pin = |p: (usize, usize)| {
        if !order.within_limit(p) && !pinned.contains(&p) {
            pinned.push(p);
        }
    };

    m.add_row("a00", &[(r(1), Var::A(0, 0))], Sense::Eq, S::zero());
    for &(k, l) in order.prefix() {
        let p = Var::A(k, l);
        let b = Var::B(k, l);
        let nx = order.next((k, l)).expect("prefix pairs have successors");
        pin(nx);
        pin((k + 1, l));
        pin((k, l + 1));
        let (an, bn) = (Var::A(nx.0, nx.1), Var::B(nx.0, nx.1));
        let z = zeta(k);
        let e = eta(l);

        m.add_row("monotone", &[(r(1), p), (r(-1), an)], Sense::Le, S::zero());
        m.add_row("deterministic", &[(r(1), top), (r(-1), p), (r(1), bn)], Sense::Le, z.clone() * e.clone());
        m.add_row(
            "two-way",
            &[(r(2), Var::A(k + 1, l)), (r(-2), p), (r(1), bn)],
            Sense::Le,
            r(2) * e.clone() * (z.clone() - zeta(k + 1)),
        );
        m.add_row(
            "three-way",
            &[(r(3), Var::A(k, l + 1)), (r(-3), p), (r(1), b)],
            Sense::Le,
            r(3) * z * (e - eta(l + 1)),
        );
        m.add_row("gamma", &[(r(1), p), (r(1), b), (r(-1), Var::Gamma)], Sense::Ge, S::zero());
    }
    m.add_row("top-gamma", &[(r(1), top), (r(-1), Var::Gamma)], Sense::Ge, S::zero());
    pinned.sort_by(|&p, &q| order.compare(p, q));
    for (k, l) in pinned {
        m.add_row("pin-a", &[(r(1), Var::A(k, l)), (r(-1), top)], Sense::Eq, S::zero());
        m.add_row("pin-b", &[(r(1), Var::B(k, l))], Sense::Eq, S::zero());
    }
    Ok(m)
}

/// Weighted factor-revealing LP over `R = {0..kmax} × {0..ellmax}`.
///
/// `ζ` is the product bound at `γ_B`, `η` the power bound at `δ1, δ2`.
/// Indices outside `R` are substituted directly: `a` becomes `a(kmax, ellmax)`
/// and `b` becomes zero.
pub fn build_weighted<S: Scalar>(kmax: usize, ellmax: usize, params: &BoundParams<S>) -> Result<LpModel<S>> {
    if kmax < 3 || ellmax < 3 {
        return Err(Error::InvalidParams("weighted LP needs kmax, ellmax ≥ 3".into()));
    }
    // Re-validate the sigma chain in case the fields were edited.
    let params = params.with_sigmas(params.sigma_r2.clone(), params.sigma_d.clone())?;
    let g = params.gamma_b.clone();
    let (d1, d2) = (params.delta1.clone(), params.delta2.clone());
    let (sr2, sd) = (params.sigma_r2.clone(), params.sigma_d.clone());
    let zeta = |k: usize| zeta_product(k, &g);
    let eta = |l: usize| eta_pow_bound(l, &d1, &d2);
    let r = |n: i64| S::ratio(n, 1);
    let one = S::one();

    let mut m = LpModel::new(Variant::Weighted, (kmax, ellmax));
    let top = Var::A(kmax, ellmax);
    let a = |k: usize, l: usize| if k <= kmax && l <= ellmax { Var::A(k, l) } else { top };
    let inside = |k: usize, l: usize| k <= kmax && l <= ellmax;
    for k in 0..=kmax {
        for l in 0..=ellmax {
            m.var(Var::A(k, l));
        }
    }
    for k in 0..=kmax {
        for l in 0..=ellmax {
            m.var(Var::B(k, l));
        }
    }
    // Terms with `b` outside R vanish.
    let bterm = |c: S, k: usize, l: usize| -> Vec<(S, Var)> {
        if inside(k, l) {
            vec![(c, Var::B(k, l))]
        } else {
            Vec::new()
        }
    };

    let triple = (one.clone() + r(2) * d1.clone() + r(2) * d2.clone() - r(2) * d1.clone() * d2.clone()) / r(3);
    for k in 0..=kmax {
        for l in 0..=ellmax {
            let (z, e) = (zeta(k), eta(l));
            let mut row = |tag: &str, mut terms: Vec<(S, Var)>, extra: Vec<(S, Var)>, sense, rhs| {
                terms.extend(extra);
                m.add_row(tag, &terms, sense, rhs);
            };
            row("monotone-k", vec![(one.clone(), a(k, l)), (-one.clone(), a(k + 1, l))], vec![], Sense::Le, S::zero());
            row("monotone-l", vec![(one.clone(), a(k, l)), (-one.clone(), a(k, l + 1))], vec![], Sense::Le, S::zero());
            row(
                "deterministic",
                vec![(one.clone(), top), (-one.clone(), a(k, l))],
                bterm(sd.clone(), k, l),
                Sense::Le,
                z.clone() * e.clone(),
            );
            if k == 0 {
                row(
                    "two-way-first",
                    vec![(one.clone(), a(1, l)), (-one.clone(), a(0, l))],
                    bterm(sr2.clone(), 0, l),
                    Sense::Le,
                    e.clone() / r(2),
                );
            } else {
                row(
                    "two-way",
                    vec![(one.clone(), a(k + 1, l)), (-one.clone(), a(k, l))],
                    bterm(sr2.clone(), k, l),
                    Sense::Le,
                    (one.clone() + g.clone()) / r(2) * z.clone() * e.clone(),
                );
            }
            let three_rhs = match l {
                0 => z.clone() / r(3),
                1 => (r(2) + r(4) * d1.clone()) / r(9) * z.clone(),
                _ => triple.clone() * z.clone() * e.clone(),
            };
            let three_tag = match l {
                0 => "three-way-first",
                1 => "three-way-second",
                _ => "three-way",
            };
            row(
                three_tag,
                vec![(one.clone(), a(k, l + 1)), (-one.clone(), a(k, l))],
                bterm(one.clone(), k, l),
                Sense::Le,
                three_rhs,
            );
            row("gamma-three", vec![(one.clone(), a(k, l)), (-one.clone(), Var::Gamma)], bterm(r(3), k, l), Sense::Ge, S::zero());
            row(
                "gamma-next-l",
                vec![(one.clone(), a(k, l + 1)), (-one.clone(), Var::Gamma)],
                bterm(sd.clone(), k, l),
                Sense::Ge,
                S::zero(),
            );
            row(
                "gamma-next-k",
                vec![(one.clone(), a(k + 1, l)), (-one.clone(), Var::Gamma)],
                bterm(sd.clone(), k, l),
                Sense::Ge,
                S::zero(),
            );
        }
    }
    m.add_row("a00", &[(one.clone(), Var::A(0, 0))], Sense::Eq, S::zero());
    m.add_row("two-way-floor", &[(one.clone(), Var::A(1, 0))], Sense::Ge, r(3) * g / (r(4) * sr2));
    let floor01 = r(2) * d1.clone() * eta(1) + r(2) * (d2.clone() - d1.clone() * d2.clone()) * eta(2);
    let floor02 = r(2) * (d1.clone() + d2.clone() - d1.clone() * d2.clone()) * eta(2)
        + r(2) * (d2.clone() - d1.clone() * d2.clone()) * eta(3);
    m.add_row("prepay-01", &[(one.clone(), Var::A(0, 1))], Sense::Ge, floor01);
    m.add_row("prepay-02", &[(one.clone(), Var::A(0, 2))], Sense::Ge, floor02);
    m.add_row("top-gamma", &[(one, top), (-S::one(), Var::Gamma)], Sense::Ge, S::zero());
    Ok(m)
}
