use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{CoinSource, ElementId, PairQuery, StepClock, StreamCoins};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Sender,
    Receiver,
}

/// What happened at one step of a two-way run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: u64,
    pub pair: [ElementId; 2],
    pub role: Role,
    /// The element whose neighbouring pair this step wants to link with.
    pub wanted: ElementId,
    /// Step of the sender this receiver was linked to, if any.
    pub matched: Option<u64>,
    /// Shared element of the realized link.
    pub annotation: Option<ElementId>,
    pub output: ElementId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoWayTrace {
    pub steps: Vec<TraceStep>,
}

impl TwoWayTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Realized links as `(sender_step, receiver_step, shared_element)`.
    pub fn links(&self) -> impl Iterator<Item = (u64, u64, ElementId)> + '_ {
        self.steps
            .iter()
            .filter_map(|s| Some((s.matched?, s.step, s.annotation?)))
    }

    /// Checks the two structural invariants of the ex-post graph: it is a
    /// matching, and linked steps disagree on the shared element.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = rustc_hash::FxHashSet::default();
        for (sender, receiver, shared) in self.links() {
            if !seen.insert(sender) || !seen.insert(receiver) {
                return Err(format!("step {sender} or {receiver} linked twice"));
            }
            let s = self.steps.iter().find(|t| t.step == sender).ok_or("dangling link")?;
            let r = self.steps.iter().find(|t| t.step == receiver).unwrap();
            if s.role != Role::Sender || r.role != Role::Receiver {
                return Err(format!("link {sender}->{receiver} has wrong roles"));
            }
            if (s.output == shared) == (r.output == shared) {
                return Err(format!("link {sender}->{receiver} is not anti-correlated on {shared}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct LastOccurrence {
    role: Role,
    wanted: ElementId,
    output: ElementId,
    step: u64,
}

/// The matching-based two-way 1/16-OCS.
///
/// Links are detected lazily: a sender's link to the next pair sharing its
/// wanted element is resolved when that pair arrives, so the state is one
/// record per element.
#[derive(Debug, Clone)]
pub struct TwoWayOcs<C = StreamCoins> {
    coins: C,
    last: FxHashMap<ElementId, LastOccurrence>,
    trace: TwoWayTrace,
    clock: StepClock,
}

impl TwoWayOcs<StreamCoins> {
    pub fn new(seed: u64) -> Self {
        Self::with_coins(StreamCoins::new(seed, 0))
    }
}

impl<C: CoinSource> TwoWayOcs<C> {
    pub fn with_coins(coins: C) -> Self {
        TwoWayOcs {
            coins,
            last: FxHashMap::default(),
            trace: TwoWayTrace::default(),
            clock: StepClock::default(),
        }
    }

    /// Start a fresh run with new coins, keeping allocations.
    pub fn reset(&mut self, coins: C) {
        self.coins = coins;
        self.last.clear();
        self.trace.steps.clear();
        self.clock.reset();
    }

    pub fn coins(&self) -> &C {
        &self.coins
    }

    pub fn trace(&self) -> &TwoWayTrace {
        &self.trace
    }

    pub fn select(&mut self, q: PairQuery) -> Result<ElementId> {
        if q.a == q.b {
            return Err(Error::MalformedQuery { step: q.step });
        }
        self.clock.advance(q.step)?;

        let role = if self.coins.fair_bit() { Role::Receiver } else { Role::Sender };
        let wanted = if self.coins.fair_bit() { q.b } else { q.a };
        let free_output = if self.coins.fair_bit() { q.b } else { q.a };

        let link = match role {
            Role::Receiver => self
                .last
                .get(&wanted)
                .filter(|prev| prev.role == Role::Sender && prev.wanted == wanted)
                .copied(),
            Role::Sender => None,
        };
        let output = match link {
            // The receiver takes the opposite decision on the shared element.
            Some(prev) if prev.output == wanted => q.other(wanted),
            Some(_) => wanted,
            None => free_output,
        };

        let record = LastOccurrence { role, wanted, output, step: q.step };
        self.last.insert(q.a, record);
        self.last.insert(q.b, record);
        self.trace.steps.push(TraceStep {
            step: q.step,
            pair: [q.a, q.b],
            role,
            wanted,
            matched: link.map(|p| p.step),
            annotation: link.map(|_| wanted),
            output,
        });
        Ok(output)
    }
}
