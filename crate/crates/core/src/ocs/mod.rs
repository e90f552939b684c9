//! Online correlated selection.
//!
//! [`TwoWayOcs`] is the matching-based 1/16-OCS: every pair draws a role, a
//! correlation element and an output bit, and consecutive pairs that agree
//! on a shared element are negatively correlated on it. [`ThreeWayOcs`]
//! composes two independent two-way selectors: a uniformly random sub-pair
//! of each triple goes to the first, and its winner plays the left-out
//! element in the second.

mod coins;
mod replay;
mod three_way;
mod two_way;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use coins::{CoinSource, ScriptedCoins, StreamCoins};
pub use replay::{format_replay, parse_replay, Query};
pub use three_way::{split_triple, ThreeWayOcs, ThreeWayStep};
pub use two_way::{Role, TraceStep, TwoWayOcs, TwoWayTrace};

use crate::error::{Error, Result};

/// An element of the ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u64);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for ElementId {
    fn from(id: u64) -> Self {
        ElementId(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairQuery {
    pub a: ElementId,
    pub b: ElementId,
    pub step: u64,
}

impl PairQuery {
    pub fn new(a: impl Into<ElementId>, b: impl Into<ElementId>, step: u64) -> Self {
        PairQuery { a: a.into(), b: b.into(), step }
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.a == e || self.b == e
    }

    pub fn other(&self, e: ElementId) -> ElementId {
        if self.a == e {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleQuery {
    pub a: ElementId,
    pub b: ElementId,
    pub c: ElementId,
    pub step: u64,
}

impl TripleQuery {
    pub fn new(a: impl Into<ElementId>, b: impl Into<ElementId>, c: impl Into<ElementId>, step: u64) -> Self {
        TripleQuery { a: a.into(), b: b.into(), c: c.into(), step }
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.a == e || self.b == e || self.c == e
    }

    pub fn elements(&self) -> [ElementId; 3] {
        [self.a, self.b, self.c]
    }
}

/// Anything that picks one element of a pair online.
///
/// The three-way composition treats its second selector through this trait
/// so a stronger two-way OCS can be plugged in.
pub trait TwoWaySelector {
    fn select_pair(&mut self, query: PairQuery) -> Result<ElementId>;
}

impl<C: CoinSource> TwoWaySelector for TwoWayOcs<C> {
    fn select_pair(&mut self, query: PairQuery) -> Result<ElementId> {
        self.select(query)
    }
}

impl<T: TwoWaySelector + ?Sized> TwoWaySelector for Box<T> {
    fn select_pair(&mut self, query: PairQuery) -> Result<ElementId> {
        (**self).select_pair(query)
    }
}

/// Shared step-ordering check.
#[derive(Debug, Clone, Default)]
pub(crate) struct StepClock {
    last: Option<u64>,
}

impl StepClock {
    pub(crate) fn advance(&mut self, step: u64) -> Result<()> {
        if let Some(last) = self.last {
            if step <= last {
                return Err(Error::InputOrder { step, last });
            }
        }
        self.last = Some(step);
        Ok(())
    }

    pub(crate) fn reset(&mut self) {
        self.last = None;
    }
}
