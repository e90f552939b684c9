use serde::{Deserialize, Serialize};

use super::{CoinSource, ElementId, PairQuery, StepClock, StreamCoins, TripleQuery, TwoWayOcs, TwoWaySelector};
use crate::error::{Error, Result};

/// Substream ids carved out of one master seed.
const PAIR_STREAM: u64 = 0;
const A_STREAM: u64 = 1;
const B_STREAM: u64 = 2;

/// Sub-pair `index` of a triple and the element it leaves out.
pub fn split_triple(t: &TripleQuery, index: usize) -> ((ElementId, ElementId), ElementId) {
    match index {
        0 => ((t.a, t.b), t.c),
        1 => ((t.a, t.c), t.b),
        _ => ((t.b, t.c), t.a),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeWayStep {
    pub step: u64,
    /// Pair handed to the first selector.
    pub first_pair: [ElementId; 2],
    pub left_out: ElementId,
    pub first_output: ElementId,
    pub output: ElementId,
}

/// Three-way OCS built from two independent two-way selectors.
///
/// Each triple: pick one of its three pairs uniformly, let `A` choose from
/// it, then let `B` choose between `A`'s output and the left-out element.
#[derive(Debug, Clone)]
pub struct ThreeWayOcs<A = TwoWayOcs, B = TwoWayOcs, P = StreamCoins> {
    pair_coins: P,
    selector_a: A,
    selector_b: B,
    clock: StepClock,
    history: Vec<ThreeWayStep>,
}

impl ThreeWayOcs {
    /// Both inner selectors are independent 1/16-OCS instances.
    pub fn new(seed: u64) -> Self {
        Self::with_selector_b(seed, TwoWayOcs::with_coins(StreamCoins::new(seed, B_STREAM)))
    }

    /// Start a fresh run under `seed`, keeping allocations.
    pub fn reseed(&mut self, seed: u64) {
        self.pair_coins = StreamCoins::new(seed, PAIR_STREAM);
        self.selector_a.reset(StreamCoins::new(seed, A_STREAM));
        self.selector_b.reset(StreamCoins::new(seed, B_STREAM));
        self.clock.reset();
        self.history.clear();
    }
}

impl<B: TwoWaySelector> ThreeWayOcs<TwoWayOcs, B, StreamCoins> {
    pub fn with_selector_b(seed: u64, selector_b: B) -> Self {
        ThreeWayOcs::from_parts(
            StreamCoins::new(seed, PAIR_STREAM),
            TwoWayOcs::with_coins(StreamCoins::new(seed, A_STREAM)),
            selector_b,
        )
    }
}

impl<A: TwoWaySelector, B: TwoWaySelector, P: CoinSource> ThreeWayOcs<A, B, P> {
    pub fn from_parts(pair_coins: P, selector_a: A, selector_b: B) -> Self {
        ThreeWayOcs { pair_coins, selector_a, selector_b, clock: StepClock::default(), history: Vec::new() }
    }

    pub fn selector_a(&self) -> &A {
        &self.selector_a
    }

    pub fn selector_b(&self) -> &B {
        &self.selector_b
    }

    pub fn history(&self) -> &[ThreeWayStep] {
        &self.history
    }

    pub fn select(&mut self, t: TripleQuery) -> Result<ElementId> {
        if t.a == t.b || t.a == t.c || t.b == t.c {
            return Err(Error::MalformedQuery { step: t.step });
        }
        self.clock.advance(t.step)?;
        let (first, left_out) = split_triple(&t, self.pair_coins.uniform_index(3));
        let first_output = self.selector_a.select_pair(PairQuery::new(first.0, first.1, t.step))?;
        let output = self.selector_b.select_pair(PairQuery::new(first_output, left_out, t.step))?;
        self.history.push(ThreeWayStep {
            step: t.step,
            first_pair: [first.0, first.1],
            left_out,
            first_output,
            output,
        });
        Ok(output)
    }
}
