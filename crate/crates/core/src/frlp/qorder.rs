use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rustc_hash::FxHashMap;

type BoundFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// The order on `(k, ℓ)` by decreasing `ζ(k)·η(ℓ)`, ties lexicographic.
///
/// `sorted` holds every pair up to and including `limit` plus the pair
/// right after it, so `next` is defined on the whole prefix. Pairs outside
/// the prefix can still be compared.
#[derive(Clone)]
pub struct QOrder {
    pub limit: (usize, usize),
    sorted: Vec<(usize, usize)>,
    rank: FxHashMap<(usize, usize), usize>,
    zeta: BoundFn,
    eta: BoundFn,
}

impl fmt::Debug for QOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QOrder").field("limit", &self.limit).field("sorted", &self.sorted).finish()
    }
}

impl QOrder {
    pub fn zeta(&self, k: usize) -> f64 {
        (self.zeta)(k)
    }

    pub fn eta(&self, l: usize) -> f64 {
        (self.eta)(l)
    }

    pub fn product(&self, p: (usize, usize)) -> f64 {
        self.zeta(p.0) * self.eta(p.1)
    }

    pub fn compare(&self, p: (usize, usize), q: (usize, usize)) -> Ordering {
        self.product(q).total_cmp(&self.product(p)).then(p.cmp(&q))
    }

    /// Pairs up to `limit` in order, followed by the successor of `limit`.
    pub fn sorted(&self) -> &[(usize, usize)] {
        &self.sorted
    }

    /// Pairs `≤_Q limit`.
    pub fn prefix(&self) -> &[(usize, usize)] {
        &self.sorted[..self.sorted.len() - 1]
    }

    pub fn within_limit(&self, p: (usize, usize)) -> bool {
        self.compare(p, self.limit) != Ordering::Greater
    }

    /// Successor of `p`, for `p ≤_Q limit`.
    pub fn next(&self, p: (usize, usize)) -> Option<(usize, usize)> {
        self.rank.get(&p).and_then(|&r| self.sorted.get(r + 1).copied())
    }
}

/// Builds the order up to `limit`.
///
/// Both bound functions must be positive and strictly decreasing, with
/// value 1 at 0. Every pair `≤_Q limit` satisfies `ζ(k) ≥ v` and `η(ℓ) ≥ v`
/// for `v = ζη(limit)`, which bounds the scan; one more step in each
/// direction covers the successor.
pub fn sorted_q<Z, E>(limit: (usize, usize), zeta: Z, eta: E) -> QOrder
where
    Z: Fn(usize) -> f64 + Send + Sync + 'static,
    E: Fn(usize) -> f64 + Send + Sync + 'static,
{
    let v = zeta(limit.0) * eta(limit.1);
    let reach = |f: &dyn Fn(usize) -> f64| (0..).find(|&i| f(i) < v).unwrap();
    let kmax = reach(&zeta);
    let lmax = reach(&eta);
    let mut order = QOrder {
        limit,
        sorted: Vec::new(),
        rank: FxHashMap::default(),
        zeta: Arc::new(zeta),
        eta: Arc::new(eta),
    };
    let mut all: Vec<(usize, usize)> = (0..=kmax).flat_map(|k| (0..=lmax).map(move |l| (k, l))).collect();
    all.sort_by(|&p, &q| order.compare(p, q));
    let cut = all.iter().position(|&p| p == limit).expect("limit lies in the scanned rectangle");
    all.truncate(cut + 2);
    order.rank = all.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    order.sorted = all;
    order
}
