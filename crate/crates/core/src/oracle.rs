//! Query processes that decide greedy-matching membership locally, with exact
//! accounting of how much of the input they reveal.
//!
//! The recursion "is any lower-priority incident edge in the matching?" is run
//! on an explicit stack. Without memoization the ledgers count every call of
//! the naive recursive process; with memoization repeated sub-queries inside
//! one top-level call are answered from a cache. Answers never depend on the
//! memoization setting.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::priority::Priorities;
use crate::seed;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    /// Every oracle invocation, top-level ones included.
    pub oracle_calls: u64,
    /// Invocations that were not answered immediately by a partition check
    /// (for the unpartitioned oracle this equals `oracle_calls`).
    pub l1_calls: u64,
    pub top_level_calls: u64,
    /// Distinct entries of the partition indicator that were read.
    pub vertex_probes: u64,
    pub memo_hits: u64,
}

impl QueryLedger {
    pub fn recursive_calls(&self) -> u64 {
        self.oracle_calls - self.top_level_calls
    }
}

/// Lower-priority edges incident to `e`, ascending by priority.
fn lower_incident(g: &Graph, rho: &Priorities, e: usize, buf: &mut Vec<(u64, usize)>) {
    buf.clear();
    let own = rho.order_key(e);
    let (u, v) = g.endpoints(e);
    for x in [u, v] {
        for &(_, f) in g.adjacency(x) {
            let f = f as usize;
            if f != e {
                let k = rho.order_key(f);
                if k < own {
                    buf.push(k);
                }
            }
        }
    }
    buf.sort_unstable();
}

struct Frame {
    edge: usize,
    lower: Vec<(u64, usize)>,
    next: usize,
}

/// Source of partition bits for the partitioned oracle. `None` means the
/// unpartitioned process: every edge is eligible and nothing is probed.
struct Probes<'a> {
    x: Option<&'a [bool]>,
    seen: HashSet<u32>,
}

impl Probes<'_> {
    fn read(&mut self, v: usize, ledger: &mut QueryLedger) -> bool {
        match self.x {
            None => true,
            Some(x) => {
                if self.seen.insert(v as u32) {
                    ledger.vertex_probes += 1;
                }
                x[v]
            }
        }
    }
}

/// Shared engine. `memo` persists across top-level calls that share it.
fn run_edge_query(
    g: &Graph,
    rho: &Priorities,
    root: usize,
    probes: &mut Probes<'_>,
    memo: Option<&mut HashMap<u32, bool>>,
    ledger: &mut QueryLedger,
    on_l1_edge: &mut dyn FnMut(usize),
) -> bool {
    let mut memo = memo;
    ledger.top_level_calls += 1;
    let mut stack: Vec<Frame> = Vec::new();
    let mut buf = Vec::new();

    // Returns Some(answer) if the call finished immediately.
    let mut enter =
        |e: usize, stack: &mut Vec<Frame>, probes: &mut Probes<'_>, ledger: &mut QueryLedger| -> Option<bool> {
            ledger.oracle_calls += 1;
            let (u, v) = g.endpoints(e);
            let xu = probes.read(u, ledger);
            let xv = probes.read(v, ledger);
            if !(xu && xv) {
                return Some(false);
            }
            ledger.l1_calls += 1;
            on_l1_edge(e);
            lower_incident(g, rho, e, &mut buf);
            if buf.is_empty() {
                return Some(true);
            }
            stack.push(Frame {
                edge: e,
                lower: buf.clone(),
                next: 0,
            });
            None
        };

    if let Some(ans) = memo.as_ref().and_then(|m| m.get(&(root as u32)).copied()) {
        ledger.memo_hits += 1;
        return ans;
    }
    if let Some(ans) = enter(root, &mut stack, probes, ledger) {
        if let Some(m) = memo.as_deref_mut() {
            m.insert(root as u32, ans);
        }
        return ans;
    }
    let mut result: Option<bool> = None;

    while let Some(top) = stack.last_mut() {
        if let Some(true) = result.take() {
            // A lower-priority neighbor is matched, so this edge is not.
            let done = stack.pop().unwrap();
            if let Some(m) = memo.as_deref_mut() {
                m.insert(done.edge as u32, false);
            }
            result = Some(false);
            continue;
        }
        if top.next == top.lower.len() {
            let done = stack.pop().unwrap();
            if let Some(m) = memo.as_deref_mut() {
                m.insert(done.edge as u32, true);
            }
            result = Some(true);
            continue;
        }
        let child = top.lower[top.next].1;
        top.next += 1;
        if let Some(ans) = memo.as_ref().and_then(|m| m.get(&(child as u32)).copied()) {
            ledger.memo_hits += 1;
            result = Some(ans);
            continue;
        }
        if let Some(ans) = enter(child, &mut stack, probes, ledger) {
            if let Some(m) = memo.as_deref_mut() {
                m.insert(child as u32, ans);
            }
            result = Some(ans);
        }
    }
    result.expect("root frame always produces an answer")
}

/// Decides `e ∈ GreedyMM(G, pi)` by the local recursive process.
/// The ledger's `oracle_calls` is `A(e)`, the root call included.
pub fn edge_oracle(g: &Graph, rho: &Priorities, e: usize, memoize: bool) -> Result<(bool, QueryLedger)> {
    rho.covers(g)?;
    g.check_edge(e)?;
    let mut ledger = QueryLedger::default();
    let mut probes = Probes {
        x: None,
        seen: HashSet::new(),
    };
    let mut memo = memoize.then(HashMap::new);
    let ans = run_edge_query(g, rho, e, &mut probes, memo.as_mut(), &mut ledger, &mut |_| {});
    Ok((ans, ledger))
}

fn check_indicator(g: &Graph, x: &[bool]) -> Result<()> {
    if x.len() != g.n() {
        return Err(Error::UniverseMismatch {
            left: g.n(),
            right: x.len(),
        });
    }
    Ok(())
}

/// Decides `e ∈ GreedyMM(G^L[V_1], pi)` where `V_1 = {v : x_v}`, reading
/// entries of `x` only as needed. Each entry is probed at most once.
pub fn partitioned_edge_oracle(
    gl: &Graph,
    rho: &Priorities,
    x: &[bool],
    e: usize,
    memoize: bool,
) -> Result<(bool, QueryLedger)> {
    rho.covers(gl)?;
    gl.check_edge(e)?;
    check_indicator(gl, x)?;
    let mut ledger = QueryLedger::default();
    let mut probes = Probes {
        x: Some(x),
        seen: HashSet::new(),
    };
    let mut memo = memoize.then(HashMap::new);
    let ans = run_edge_query(gl, rho, e, &mut probes, memo.as_mut(), &mut ledger, &mut |_| {});
    Ok((ans, ledger))
}

/// Terms of the per-run probe bound: neighbors of `v`, sampled neighbors of
/// those in `V_1`, and two per sampled edge adjacent to an `L_1` edge the
/// process recursed from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProbeDecomposition {
    pub neighbors: u64,
    pub second_hop: u64,
    pub l1_edges_queried: u64,
    pub l1_adjacent: u64,
}

impl ProbeDecomposition {
    pub fn bound(&self) -> u64 {
        self.neighbors + self.second_hop + 2 * self.l1_adjacent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeOracleReport {
    /// `Z_{v,1}`.
    pub value: usize,
    pub ledger: QueryLedger,
    pub decomposition: ProbeDecomposition,
    /// Vertices whose indicator entries were read, ascending.
    pub probed: Vec<usize>,
}

/// Computes `Z_{v,1}`: neighbors `u` of `v` in `g` with `x_u` set that are
/// unmatched in `GreedyMM(G^L[V_1], pi)`. `gl` is an edge sample of `g` on the
/// same vertex ids and `rho` covers `gl`'s edges. `B(v)` is
/// `ledger.vertex_probes`.
pub fn degree_oracle(
    g: &Graph,
    gl: &Graph,
    rho: &Priorities,
    x: &[bool],
    v: usize,
    memoize: bool,
) -> Result<DegreeOracleReport> {
    if g.n() != gl.n() {
        return Err(Error::UniverseMismatch {
            left: g.n(),
            right: gl.n(),
        });
    }
    rho.covers(gl)?;
    check_indicator(g, x)?;
    g.check_vertex(v)?;

    let mut ledger = QueryLedger::default();
    let mut probes = Probes {
        x: Some(x),
        seen: HashSet::new(),
    };
    let mut memo = memoize.then(HashMap::new);
    let mut l1_seen: HashSet<usize> = HashSet::new();
    let mut decomposition = ProbeDecomposition {
        neighbors: g.degree(v) as u64,
        ..Default::default()
    };
    let mut value = 0;
    for &(u, _) in g.adjacency(v) {
        let u = u as usize;
        if !probes.read(u, &mut ledger) {
            continue;
        }
        decomposition.second_hop += gl.degree(u) as u64;
        let mut matched = false;
        for &(_, f) in gl.adjacency(u) {
            let ans = run_edge_query(gl, rho, f as usize, &mut probes, memo.as_mut(), &mut ledger, &mut |e| {
                l1_seen.insert(e);
            });
            matched |= ans;
        }
        if !matched {
            value += 1;
        }
    }
    decomposition.l1_edges_queried = l1_seen.len() as u64;
    decomposition.l1_adjacent = l1_seen
        .iter()
        .map(|&e| {
            let (a, b) = gl.endpoints(e);
            (gl.degree(a) + gl.degree(b) - 2) as u64
        })
        .sum();
    let mut probed: Vec<usize> = probes.seen.iter().map(|&p| p as usize).collect();
    probed.sort_unstable();
    Ok(DegreeOracleReport {
        value,
        ledger,
        decomposition,
        probed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QueryComplexityStats {
    pub trials: usize,
    pub m: usize,
    /// Pairs of intersecting edges.
    pub r: u64,
    /// Mean over trials of `sum_e A(e)` (no memoization).
    pub mean_total: f64,
    pub std_total: f64,
    pub std_error: f64,
    /// `m + 2r`.
    pub reference: f64,
}

/// Monte-Carlo estimate of `E_pi[sum_e A(e)]` over fresh uniform priorities.
pub fn query_complexity_stats(g: &Graph, trials: usize, seed: u64) -> Result<QueryComplexityStats> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let totals: Vec<f64> = (0..trials)
        .map(|t| {
            let rho = Priorities::random(g.m(), seed::derive(seed, &[seed::tag::TRIAL, t as u64]));
            total_query_calls(g, &rho) as f64
        })
        .collect();
    let mean = totals.iter().sum::<f64>() / trials as f64;
    let var = if trials > 1 {
        totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
    } else {
        0.0
    };
    let r = g.intersecting_pair_count();
    Ok(QueryComplexityStats {
        trials,
        m: g.m(),
        r,
        mean_total: mean,
        std_total: var.sqrt(),
        std_error: (var / trials as f64).sqrt(),
        reference: g.m() as f64 + 2.0 * r as f64,
    })
}

/// `sum_e A(e)` for one priority draw, without memoization.
pub fn total_query_calls(g: &Graph, rho: &Priorities) -> u64 {
    let mut probes = Probes {
        x: None,
        seen: HashSet::new(),
    };
    let mut ledger = QueryLedger::default();
    for e in 0..g.m() {
        run_edge_query(g, rho, e, &mut probes, None, &mut ledger, &mut |_| {});
    }
    ledger.oracle_calls
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_mm;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn minimum_edge_answers_yes_in_one_call() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let rho = Priorities::from_keys(vec![7, 3, 9, 5]);
        let (ans, ledger) = edge_oracle(&g, &rho, 1, false).unwrap();
        assert!(ans);
        assert_eq!(ledger.oracle_calls, 1);
    }

    #[test]
    fn path_query_recurses_once() {
        let g = path3();
        let rho = Priorities::from_keys(vec![1, 2]);
        let (ans, ledger) = edge_oracle(&g, &rho, 1, false).unwrap();
        assert!(!ans);
        assert_eq!(ledger.oracle_calls, 2);
        assert_eq!(ledger.recursive_calls(), 1);
        assert!(edge_oracle(&g, &rho, 5, false).is_err());
    }

    #[test]
    fn memo_does_not_change_answers() {
        let g = Graph::from_edges(
            6,
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4), (2, 5), (0, 3)],
        )
        .unwrap();
        for s in 0..50 {
            let rho = Priorities::random(g.m(), s);
            let m = greedy_mm(&g, &rho).unwrap();
            for e in 0..g.m() {
                let (a, raw) = edge_oracle(&g, &rho, e, false).unwrap();
                let (b, memo) = edge_oracle(&g, &rho, e, true).unwrap();
                assert_eq!(a, b);
                assert_eq!(a, m.contains_edge(e));
                assert!(memo.oracle_calls <= raw.oracle_calls);
            }
        }
    }

    #[test]
    fn partition_rejects_outside_edge_with_two_probes() {
        let g = path3();
        let rho = Priorities::from_keys(vec![1, 2]);
        let (ans, ledger) = partitioned_edge_oracle(&g, &rho, &[false, true, true], 0, false).unwrap();
        assert!(!ans);
        assert_eq!(ledger.vertex_probes, 2);
        assert_eq!(ledger.recursive_calls(), 0);
    }

    #[test]
    fn degree_oracle_trivial_cases() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let rho = Priorities::random(g.m(), 0);
        let iso = degree_oracle(&g, &g, &rho, &[true; 4], 3, false).unwrap();
        assert_eq!((iso.value, iso.ledger.vertex_probes), (0, 0));
        let none = degree_oracle(&g, &g, &rho, &[false; 4], 1, false).unwrap();
        assert_eq!((none.value, none.ledger.vertex_probes), (0, 2));
    }

    #[test]
    fn single_edge_query_stats() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let s = query_complexity_stats(&g, 5, 1).unwrap();
        assert_eq!(s.mean_total, 1.0);
        assert_eq!(s.reference, 1.0);
        assert!(query_complexity_stats(&g, 0, 1).is_err());
    }
}
