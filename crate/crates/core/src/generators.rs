//! Synthetic graph families and the `kind:args` spec strings that name them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_indices, Graph};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GraphSpec {
    /// `G(n, p)` with `p = avg_degree / (n - 1)`.
    ErdosRenyi {
        n: usize,
        avg_degree: f64,
    },
    RandomRegular {
        n: usize,
        d: usize,
    },
    /// Center 0 with leaves `1..=d`.
    Star {
        d: usize,
    },
    /// Edges `(i, i + 1)`; edge id `i` joins `i` and `i + 1`.
    Path {
        n: usize,
    },
    Complete {
        n: usize,
    },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match *self {
            GraphSpec::ErdosRenyi { n, .. } | GraphSpec::RandomRegular { n, .. } => n,
            GraphSpec::Star { d } => d + 1,
            GraphSpec::Path { n } | GraphSpec::Complete { n } => n,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        match *self {
            GraphSpec::ErdosRenyi { n, avg_degree } => erdos_renyi(n, avg_degree, seed),
            GraphSpec::RandomRegular { n, d } => random_regular(n, d, seed),
            GraphSpec::Star { d } => Ok(star(d)),
            GraphSpec::Path { n } => Ok(path(n)),
            GraphSpec::Complete { n } => Ok(complete(n)),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphSpec::ErdosRenyi { n, avg_degree } => write!(f, "erdos-renyi:{n},{avg_degree}"),
            GraphSpec::RandomRegular { n, d } => write!(f, "random-regular:{n},{d}"),
            GraphSpec::Star { d } => write!(f, "star:{d}"),
            GraphSpec::Path { n } => write!(f, "path:{n}"),
            GraphSpec::Complete { n } => write!(f, "complete:{n}"),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("generator `{s}`: {msg}"));
        let (kind, args) = s.split_once(':').ok_or_else(|| bad("expected kind:args"))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<usize> {
            args.get(i)
                .ok_or_else(|| bad("missing argument"))?
                .parse()
                .map_err(|_| bad("arguments must be non-negative integers"))
        };
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(bad(&format!("expected {k} argument(s)")))
            }
        };
        match kind.trim() {
            "erdos-renyi" | "er" => {
                arity(2)?;
                let avg_degree: f64 = args[1].parse().map_err(|_| bad("average degree must be a number"))?;
                Ok(GraphSpec::ErdosRenyi { n: int(0)?, avg_degree })
            }
            "random-regular" | "rr" => {
                arity(2)?;
                Ok(GraphSpec::RandomRegular { n: int(0)?, d: int(1)? })
            }
            "star" => {
                arity(1)?;
                Ok(GraphSpec::Star { d: int(0)? })
            }
            "path" => {
                arity(1)?;
                Ok(GraphSpec::Path { n: int(0)? })
            }
            "complete" => {
                arity(1)?;
                Ok(GraphSpec::Complete { n: int(0)? })
            }
            other => Err(bad(&format!("unknown family `{other}`"))),
        }
    }
}

pub fn path(n: usize) -> Graph {
    let edges = (1..n as u32).map(|i| (i - 1, i)).collect();
    Graph::from_sorted_unique(n, edges)
}

pub fn star(d: usize) -> Graph {
    let edges = (1..=d as u32).map(|l| (0, l)).collect();
    Graph::from_sorted_unique(d + 1, edges)
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            edges.push((u, v));
        }
    }
    Graph::from_sorted_unique(n, edges)
}

pub fn erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Ok(Graph::empty(n));
    }
    let p = avg_degree / (n - 1) as f64;
    if !(avg_degree >= 0.0 && p <= 1.0) {
        return Err(Error::Config(format!(
            "average degree {avg_degree} is impossible on {n} vertices"
        )));
    }
    if p == 0.0 {
        return Ok(Graph::empty(n));
    }
    let ids = sample_indices(n * (n - 1) / 2, p, seed::derive(seed, &[seed::tag::GRAPH]))?;
    let mut edges = Vec::with_capacity(ids.len());
    let (mut u, mut row_start) = (0usize, 0usize);
    for idx in ids {
        while idx >= row_start + (n - 1 - u) {
            row_start += n - 1 - u;
            u += 1;
        }
        edges.push((u as u32, (u + 1 + idx - row_start) as u32));
    }
    Ok(Graph::from_sorted_unique(n, edges))
}

/// Membership for unordered pairs: a bit matrix when it fits, a hash set
/// otherwise.
enum PairSet {
    Dense { n: usize, bits: FixedBitSet },
    Sparse(HashSet<u64>),
}

impl PairSet {
    fn new(n: usize, expected: usize) -> Self {
        if n <= 60_000 {
            PairSet::Dense {
                n,
                bits: FixedBitSet::with_capacity(n * n),
            }
        } else {
            PairSet::Sparse(HashSet::with_capacity(expected))
        }
    }

    fn key(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    fn contains(&self, a: usize, b: usize) -> bool {
        let (u, v) = Self::key(a, b);
        match self {
            PairSet::Dense { n, bits } => bits.contains(u * n + v),
            PairSet::Sparse(s) => s.contains(&((u as u64) << 32 | v as u64)),
        }
    }

    fn set(&mut self, a: usize, b: usize, on: bool) {
        let (u, v) = Self::key(a, b);
        match self {
            PairSet::Dense { n, bits } => bits.set(u * *n + v, on),
            PairSet::Sparse(s) => {
                let k = (u as u64) << 32 | v as u64;
                if on {
                    s.insert(k);
                } else {
                    s.remove(&k);
                }
            }
        }
    }

    fn admits(&self, a: usize, b: usize) -> bool {
        a != b && !self.contains(a, b)
    }

    fn into_sorted_edges(self) -> Vec<(u32, u32)> {
        match self {
            PairSet::Dense { n, bits } => bits.ones().map(|i| ((i / n) as u32, (i % n) as u32)).collect(),
            PairSet::Sparse(s) => {
                let mut e: Vec<(u32, u32)> = s.into_iter().map(|k| ((k >> 32) as u32, k as u32)).collect();
                e.sort_unstable();
                e
            }
        }
    }
}

const REPAIR_ATTEMPTS: usize = 100_000;

fn stuck(n: usize, d: usize) -> Error {
    Error::Config(format!("could not realize a {d}-regular graph on {n} vertices"))
}

/// Adds the edges `(v, sigma(v))` of a random permutation with no fixed
/// points, no 2-cycles and no pair already present; conflicts are repaired by
/// swapping images, so every vertex gains exactly 2 to its degree.
fn add_permutation(set: &mut PairSet, n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    for v in 0..n {
        let mut tries = 0;
        while !set.admits(v, sigma[v]) {
            tries += 1;
            if tries > REPAIR_ATTEMPTS {
                return Err(stuck(n, d));
            }
            let j = rng.random_range(0..n);
            if j == v {
                continue;
            }
            if j > v {
                if set.admits(v, sigma[j]) {
                    sigma.swap(v, j);
                }
            } else {
                set.set(j, sigma[j], false);
                let (a, b) = (sigma[j], sigma[v]);
                let distinct = PairSet::key(v, a) != PairSet::key(j, b);
                if distinct && set.admits(v, a) && set.admits(j, b) {
                    sigma.swap(v, j);
                    set.set(j, sigma[j], true);
                } else {
                    set.set(j, sigma[j], true);
                }
            }
        }
        set.set(v, sigma[v], true);
    }
    Ok(())
}

/// Adds a random perfect matching avoiding existing pairs.
fn add_perfect_matching(set: &mut PairSet, n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let pairs = n / 2;
    for i in 0..pairs {
        let mut tries = 0;
        while !set.admits(order[2 * i], order[2 * i + 1]) {
            tries += 1;
            if tries > REPAIR_ATTEMPTS {
                return Err(stuck(n, d));
            }
            let j = rng.random_range(0..pairs);
            if j == i {
                continue;
            }
            let side = 2 * j + rng.random_range(0..2usize);
            if j > i {
                if set.admits(order[2 * i], order[side]) {
                    order.swap(2 * i + 1, side);
                }
            } else {
                let (a, b) = (order[2 * j], order[2 * j + 1]);
                set.set(a, b, false);
                let (x, y) = (order[2 * i], order[2 * i + 1]);
                // Re-pair as (x, b) and (a, y).
                if PairSet::key(x, b) != PairSet::key(a, y) && set.admits(x, b) && set.admits(a, y) {
                    order[2 * i + 1] = b;
                    order[2 * j + 1] = y;
                    set.set(a, y, true);
                } else {
                    set.set(a, b, true);
                }
            }
        }
        set.set(order[2 * i], order[2 * i + 1], true);
    }
    Ok(())
}

/// A `d`-regular simple graph: `d / 2` random permutations, plus a random
/// perfect matching when `d` is odd, with local swaps to remove conflicts.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d == 0 {
        return Ok(Graph::empty(n));
    }
    if d >= n {
        return Err(Error::Config(format!("degree {d} needs more than {n} vertices")));
    }
    if n * d % 2 == 1 {
        return Err(Error::Config(format!("n * d must be even (n = {n}, d = {d})")));
    }
    if 2 * d > n - 1 {
        // Dense: take the complement of a sparse regular graph.
        let sparse = random_regular(n, n - 1 - d, seed)?;
        let mut edges = Vec::with_capacity(n * d / 2);
        for u in 0..n {
            let mut nbrs = sparse.neighbors(u).map(|(w, _)| w).peekable();
            for v in u + 1..n {
                while nbrs.next_if(|&w| w < v).is_some() {}
                if nbrs.next_if_eq(&v).is_none() {
                    edges.push((u as u32, v as u32));
                }
            }
        }
        return Ok(Graph::from_sorted_unique(n, edges));
    }
    let mut rng = seed::rng(seed::derive(seed, &[seed::tag::GRAPH]));
    let mut last = None;
    for _ in 0..RESTARTS {
        match regular_attempt(n, d, &mut rng) {
            Ok(edges) => return Ok(Graph::from_sorted_unique(n, edges)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

const RESTARTS: usize = 20;

fn regular_attempt(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(u32, u32)>> {
    let mut set = PairSet::new(n, n * d / 2);
    for _ in 0..d / 2 {
        add_permutation(&mut set, n, d, rng)?;
    }
    if d % 2 == 1 {
        add_perfect_matching(&mut set, n, d, rng)?;
    }
    Ok(set.into_sorted_edges())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_families() {
        let p = path(5);
        assert_eq!((p.n(), p.m()), (5, 4));
        assert_eq!(p.endpoints(2), (2, 3));
        let s = star(7);
        assert_eq!((s.n(), s.m(), s.degree(0)), (8, 7, 7));
        let k = complete(9);
        assert_eq!(k.m(), 36);
        assert_eq!(path(0).n(), 0);
        assert_eq!(path(1).m(), 0);
    }

    #[test]
    fn regular_degrees_are_exact() {
        for (n, d) in [
            (10, 3),
            (200, 20),
            (1000, 8),
            (50, 49),
            (64, 31),
            (12, 10),
            (11, 6),
            (30, 17),
        ] {
            let g = random_regular(n, d, 4).unwrap();
            assert!((0..n).all(|v| g.degree(v) == d), "n={n} d={d}");
            assert_eq!(g.m(), n * d / 2);
        }
        assert!(random_regular(5, 3, 1).is_err());
        assert!(random_regular(5, 5, 1).is_err());
    }

    #[test]
    fn erdos_renyi_density() {
        let g = erdos_renyi(2000, 10.0, 3).unwrap();
        let mean = 2.0 * g.m() as f64 / 2000.0;
        // m ~ Binomial(n(n-1)/2, p); sd of the mean degree is about 0.07.
        assert!((mean - 10.0).abs() < 0.5, "{mean}");
        assert_eq!(erdos_renyi(2000, 10.0, 3).unwrap().m(), g.m());
        assert!(erdos_renyi(10, 20.0, 1).is_err());
        let full = erdos_renyi(6, 5.0, 1).unwrap();
        assert_eq!(full.m(), 15);
    }

    #[test]
    fn spec_round_trip_and_errors() {
        for s in [
            "erdos-renyi:100,4",
            "random-regular:10,3",
            "star:5",
            "path:1000",
            "complete:9",
        ] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!(
            "er:10,2".parse::<GraphSpec>().unwrap(),
            GraphSpec::ErdosRenyi { n: 10, avg_degree: 2.0 }
        );
        for s in ["path", "path:x", "cube:3", "star:1,2", "rr:10"] {
            assert!(s.parse::<GraphSpec>().is_err(), "{s}");
        }
        assert_eq!(GraphSpec::Star { d: 4 }.generate(0).unwrap().n(), 5);
    }
}
