use crate::error::{Error, Result};
use crate::frlp::{LpSolution, QOrder, Variant};
use crate::ocs::{ElementId, PairQuery, StreamCoins, ThreeWayOcs, TripleQuery, TwoWayOcs};

use super::audit::{Dispatch, DualAudit, Increment};
use super::instance::Instance;
use super::{MatchingOutcome, PAIR_OCS_STREAM};

/// Offline state: `(k, ℓ)` OCS counts, or `None` once matched deterministically.
type Counts = Option<(usize, usize)>;

/// Runs the OCS-driven unweighted algorithm and records its dual audit.
///
/// Each arrival looks at its neighbors that are not deterministically
/// matched and keeps those whose counts come first in `order` (`N*`). One
/// such neighbor is matched outright, two go to the two-way OCS, three or
/// more send their three lowest ids to the three-way OCS. A chosen vertex
/// that is already matched is re-matched. Edge weights are ignored.
pub fn run_unweighted(
    inst: &Instance,
    order: &QOrder,
    tables: &LpSolution<f64>,
    seed: u64,
) -> Result<(MatchingOutcome, DualAudit)> {
    if tables.variant != Variant::Unweighted || tables.top != order.limit {
        return Err(Error::TableMismatch(format!(
            "{:?} tables up to {:?} against an order up to {:?}",
            tables.variant, tables.top, order.limit
        )));
    }
    inst.validate()?;
    let a_inf = tables.a_inf();
    let a = |c: Counts| c.map_or(a_inf, |(k, l)| tables.a(k, l));
    let b_next = |p: (usize, usize)| order.next(p).map_or(0.0, |q| tables.b(q.0, q.1));

    let mut pair_ocs = TwoWayOcs::with_coins(StreamCoins::new(seed, PAIR_OCS_STREAM));
    let mut triple_ocs = ThreeWayOcs::new(seed);
    let mut counts: Vec<Counts> = vec![Some((0, 0)); inst.offline];
    let mut out = MatchingOutcome::new(inst);
    let mut audit = DualAudit { gamma: tables.gamma, beta: vec![0.0; inst.arrivals.len()], ..DualAudit::default() };

    for (v, arrival) in inst.arrivals.iter().enumerate() {
        let step = v as u64;
        let open: Vec<(usize, (usize, usize))> =
            arrival.edges.iter().filter_map(|&(u, _)| counts[u].map(|c| (u, c))).collect();
        let Some(&(_, first)) = open.iter().min_by(|x, y| order.compare(x.1, y.1)) else {
            out.dispatch.push(Dispatch::Exposed);
            audit.increments.push(Increment { arrival: v, dispatch: Dispatch::Exposed, primal: 0.0, dual: 0.0 });
            continue;
        };
        let mut nstar: Vec<usize> = open.iter().filter(|x| x.1 == first).map(|x| x.0).collect();
        nstar.sort_unstable();
        let (k, l) = first;
        let here = a(Some(first));
        let (dispatch, chosen, primal, dual, beta) = match nstar.len() {
            1 => {
                counts[nstar[0]] = None;
                let beta = b_next(first);
                let z = order.product(first);
                (Dispatch::Deterministic, nstar[0], z, a_inf - here + beta, beta)
            }
            2 => {
                let pick = pair_ocs.select(PairQuery::new(nstar[0] as u64, nstar[1] as u64, step))?;
                for &u in &nstar {
                    counts[u] = Some((k + 1, l));
                }
                let beta = b_next(first);
                let primal = 2.0 * order.eta(l) * (order.zeta(k) - order.zeta(k + 1));
                (Dispatch::TwoWay, id(pick), primal, 2.0 * (a(Some((k + 1, l))) - here) + beta, beta)
            }
            _ => {
                let t = TripleQuery::new(nstar[0] as u64, nstar[1] as u64, nstar[2] as u64, step);
                let pick = triple_ocs.select(t)?;
                for &u in &nstar[..3] {
                    counts[u] = Some((k, l + 1));
                }
                let beta = tables.b(k, l);
                let primal = 3.0 * order.zeta(k) * (order.eta(l) - order.eta(l + 1));
                (Dispatch::ThreeWay, id(pick), primal, 3.0 * (a(Some((k, l + 1))) - here) + beta, beta)
            }
        };
        out.assign(chosen, v, 1.0);
        out.dispatch.push(dispatch);
        audit.beta[v] = beta;
        audit.increments.push(Increment { arrival: v, dispatch, primal, dual });
    }

    audit.alpha = counts.iter().map(|&c| a(c)).collect();
    audit.edges = inst.edges().map(|(u, v, _)| (u, v, 1.0)).collect();
    out.value = out.assignment.iter().filter(|m| m.is_some()).count() as f64;
    Ok((out, audit))
}

fn id(e: ElementId) -> usize {
    e.0 as usize
}
