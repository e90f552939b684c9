use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One online vertex and its incident edges `(offline vertex, weight)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub id: u64,
    pub edges: Vec<(usize, f64)>,
}

/// Bipartite graph revealed one online vertex at a time, in list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub offline: usize,
    pub arrivals: Vec<Arrival>,
}

impl Instance {
    pub fn new(offline: usize, arrivals: Vec<Arrival>) -> Result<Self> {
        let inst = Instance { offline, arrivals };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<u64> = self.arrivals.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance("online vertex ids must be distinct".into()));
        }
        for a in &self.arrivals {
            let mut seen: Vec<usize> = Vec::with_capacity(a.edges.len());
            for &(u, w) in &a.edges {
                if u >= self.offline {
                    return Err(Error::InvalidInstance(format!("vertex {} has edge to offline {u} of {}", a.id, self.offline)));
                }
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::InvalidInstance(format!("edge ({u}, {}) has weight {w}", a.id)));
                }
                if seen.contains(&u) {
                    return Err(Error::InvalidInstance(format!("vertex {} lists offline {u} twice", a.id)));
                }
                seen.push(u);
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instances serialize")
    }

    /// Every edge as `(offline, arrival index, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.arrivals.iter().enumerate().flat_map(|(v, a)| a.edges.iter().map(move |&(u, w)| (u, v, w)))
    }

    /// Same graph with every weight set to 1.
    pub fn unit_weights(&self) -> Self {
        let mut inst = self.clone();
        for a in &mut inst.arrivals {
            for e in &mut a.edges {
                e.1 = 1.0;
            }
        }
        inst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InstanceKind {
    /// Each edge present independently with probability `p`, unit weights.
    RandomBipartite(f64),
    /// Online vertex `i` sees offline vertices `i..n`, under a seeded relabeling.
    UpperTriangular,
    /// Random bipartite graph with weights uniform in `(0, 1]`.
    UniformWeights(f64),
    /// Random bipartite graph with exponentially distributed weights.
    ExponentialWeights(f64),
}

pub const DEFAULT_EDGE_PROBABILITY: f64 = 0.2;

impl InstanceKind {
    pub fn weighted(self) -> bool {
        matches!(self, InstanceKind::UniformWeights(_) | InstanceKind::ExponentialWeights(_))
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceKind::RandomBipartite(p) => write!(f, "random-bipartite:{p}"),
            InstanceKind::UpperTriangular => f.write_str("upper-triangular-adversarial"),
            InstanceKind::UniformWeights(p) => write!(f, "uniform-weights:{p}"),
            InstanceKind::ExponentialWeights(p) => write!(f, "exponential-weights:{p}"),
        }
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    /// `name` or `name:p` for the random kinds.
    fn from_str(s: &str) -> Result<Self> {
        let (name, p) = match s.split_once(':') {
            Some((name, p)) => {
                let p: f64 = p.parse().map_err(|_| Error::InvalidParams(format!("bad edge probability in `{s}`")))?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidParams(format!("edge probability {p} not in (0, 1]")));
                }
                (name, Some(p))
            }
            None => (s, None),
        };
        let p = p.unwrap_or(DEFAULT_EDGE_PROBABILITY);
        match name {
            "random-bipartite" => Ok(InstanceKind::RandomBipartite(p)),
            "upper-triangular-adversarial" if !s.contains(':') => Ok(InstanceKind::UpperTriangular),
            "uniform-weights" => Ok(InstanceKind::UniformWeights(p)),
            "exponential-weights" => Ok(InstanceKind::ExponentialWeights(p)),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// `n` offline and `n` online vertices, deterministic in `seed`. Random
/// kinds give every online vertex at least one edge.
pub fn generate_instance(kind: InstanceKind, n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrivals = match kind {
        InstanceKind::UpperTriangular => {
            let mut label: Vec<usize> = (0..n).collect();
            label.shuffle(&mut rng);
            (0..n)
                .map(|i| Arrival { id: i as u64, edges: (i..n).map(|j| (label[j], 1.0)).collect() })
                .collect()
        }
        InstanceKind::RandomBipartite(p) | InstanceKind::UniformWeights(p) | InstanceKind::ExponentialWeights(p) => (0..n)
            .map(|i| {
                let mut nbrs: Vec<usize> = (0..n).filter(|_| rng.random_bool(p)).collect();
                if nbrs.is_empty() && n > 0 {
                    nbrs.push(rng.random_range(0..n));
                }
                let edges = nbrs
                    .into_iter()
                    .map(|u| {
                        let w = match kind {
                            InstanceKind::UniformWeights(_) => 1.0 - rng.random::<f64>(),
                            InstanceKind::ExponentialWeights(_) => Exp1.sample(&mut rng),
                            _ => 1.0,
                        };
                        (u, w)
                    })
                    .collect();
                Arrival { id: i as u64, edges }
            })
            .collect(),
    };
    Instance { offline: n, arrivals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"offline": 2, "arrivals": [{"id": 7, "edges": [[0, 1.5], [1, 2]]}]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.arrivals[0].edges, vec![(0, 1.5), (1, 2.0)]);
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
        let bad = r#"{"offline": 1, "arrivals": [{"id": 0, "edges": [[1, 1]]}]}"#;
        assert!(matches!(Instance::from_json(bad), Err(Error::InvalidInstance(_))));
        let neg = r#"{"offline": 1, "arrivals": [{"id": 0, "edges": [[0, -1]]}]}"#;
        assert!(matches!(Instance::from_json(neg), Err(Error::InvalidInstance(_))));
        assert!(matches!(Instance::from_json("{"), Err(Error::Parse { .. })));
    }

    #[test]
    fn kinds_parse_and_reproduce() {
        for s in ["random-bipartite", "upper-triangular-adversarial", "uniform-weights:0.5", "exponential-weights"] {
            let kind: InstanceKind = s.parse().unwrap();
            let a = generate_instance(kind, 12, 9);
            assert_eq!(a, generate_instance(kind, 12, 9));
            a.validate().unwrap();
            assert_eq!(kind, kind.to_string().parse().unwrap());
        }
        assert!("random-bipartite:0".parse::<InstanceKind>().is_err());
        assert!("star".parse::<InstanceKind>().is_err());
    }

    #[test]
    fn upper_triangular_shape() {
        let inst = generate_instance(InstanceKind::UpperTriangular, 5, 1);
        let degrees: Vec<usize> = inst.arrivals.iter().map(|a| a.edges.len()).collect();
        assert_eq!(degrees, [5, 4, 3, 2, 1]);
    }
}
