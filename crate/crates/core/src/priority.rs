use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Per-edge priorities `rho`. Edges are processed by ascending `(key, id)`,
/// so the induced order is total even if two 64-bit keys collide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Priorities {
    Explicit(Vec<u64>),
    /// Keys computed on demand from `(seed, edge)`; used for large graphs
    /// where materializing one word per edge is wasteful.
    Hashed {
        seed: u64,
        len: usize,
    },
}

impl Priorities {
    /// Independent uniform 64-bit keys.
    pub fn random(m: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        Priorities::Explicit((0..m).map(|_| rng.random::<u64>()).collect())
    }

    pub fn hashed(m: usize, seed: u64) -> Self {
        Priorities::Hashed { seed, len: m }
    }

    pub fn from_keys(keys: Vec<u64>) -> Self {
        Priorities::Explicit(keys)
    }

    /// `ranks[e]` is the position of edge `e` in the processing order.
    pub fn from_ranks(ranks: &[usize]) -> Self {
        Priorities::Explicit(ranks.iter().map(|&r| r as u64).collect())
    }

    /// Ascending edge id; the "arbitrary" order used for single-machine steps.
    pub fn by_edge_id(m: usize) -> Self {
        Priorities::Explicit(vec![0; m])
    }

    pub fn len(&self) -> usize {
        match self {
            Priorities::Explicit(k) => k.len(),
            Priorities::Hashed { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn key(&self, e: usize) -> u64 {
        match self {
            Priorities::Explicit(k) => k[e],
            Priorities::Hashed { seed, .. } => seed::splitmix64(seed ^ (e as u64).wrapping_mul(0xd6e8_feb8_6659_fd93)),
        }
    }

    /// The key as a real in `[0, 1)`.
    pub fn rho(&self, e: usize) -> f64 {
        (self.key(e) >> 11) as f64 / (1u64 << 53) as f64
    }

    #[inline]
    pub fn order_key(&self, e: usize) -> (u64, usize) {
        (self.key(e), e)
    }

    /// Whether `a` is processed before `b`.
    #[inline]
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.order_key(a) < self.order_key(b)
    }

    pub fn covers(&self, g: &Graph) -> Result<()> {
        if self.len() == g.m() {
            Ok(())
        } else {
            Err(Error::MissingPriority {
                expected: g.m(),
                got: self.len(),
            })
        }
    }

    /// Edge ids in processing order.
    pub fn processing_order(&self) -> Vec<usize> {
        let mut keyed: Vec<(u64, u32)> = (0..self.len()).map(|e| (self.key(e), e as u32)).collect();
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, e)| e as usize).collect()
    }

    /// Priorities of a subgraph whose local edge `i` is parent edge
    /// `edge_map[i]`.
    pub fn restrict(&self, edge_map: &[u32]) -> Priorities {
        let keys = edge_map.iter().map(|&e| self.key(e as usize)).collect();
        // Parent ids are ascending in every subgraph we build, so tie-breaking
        // by local id agrees with tie-breaking by parent id.
        debug_assert!(edge_map.windows(2).all(|w| w[0] < w[1]));
        Priorities::Explicit(keys)
    }

    /// Copy with one entry replaced.
    pub fn with_key(&self, e: usize, key: u64) -> Priorities {
        let mut keys: Vec<u64> = (0..self.len()).map(|i| self.key(i)).collect();
        keys[e] = key;
        Priorities::Explicit(keys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_edge_id() {
        let p = Priorities::from_keys(vec![5, 3, 5, 3]);
        assert_eq!(p.processing_order(), vec![1, 3, 0, 2]);
        assert!(p.precedes(0, 2));
        assert!(!p.precedes(2, 0));
    }

    #[test]
    fn hashed_is_stable_and_spread() {
        let p = Priorities::hashed(1000, 9);
        let q = Priorities::hashed(1000, 9);
        assert_eq!(p.processing_order(), q.processing_order());
        let mean: f64 = (0..1000).map(|e| p.rho(e)).sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05);
        assert_ne!(p.processing_order(), Priorities::hashed(1000, 10).processing_order());
    }

    #[test]
    fn restrict_and_replace() {
        let p = Priorities::from_keys(vec![10, 20, 30]);
        assert_eq!(p.restrict(&[0, 2]), Priorities::from_keys(vec![10, 30]));
        assert_eq!(p.with_key(1, 0).processing_order(), vec![1, 0, 2]);
    }
}
