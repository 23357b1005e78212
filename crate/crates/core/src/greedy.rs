//! Sequential random-greedy maximal matching and the helpers used by the
//! structural checks.

use serde::Serialize;

use crate::error::Result;
use crate::graph::{Graph, Subgraph};
use crate::matching::Matching;
use crate::priority::Priorities;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Added,
    Blocked,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyTrace {
    /// Edge ids by ascending priority.
    pub order: Vec<usize>,
    /// Indexed by edge id.
    pub decisions: Vec<Decision>,
}

/// Process edges in the given order, adding each edge whose endpoints are
/// both still free.
pub fn greedy_in_order(g: &Graph, order: &[usize]) -> Matching {
    let mut m = Matching::empty(g.n());
    for &e in order {
        m.try_add(g, e);
    }
    m
}

/// `GreedyMM(G, pi)` where `pi` sorts edges by `(rho, edge id)`.
pub fn greedy_mm(g: &Graph, rho: &Priorities) -> Result<Matching> {
    rho.covers(g)?;
    Ok(greedy_in_order(g, &rho.processing_order()))
}

pub fn greedy_mm_traced(g: &Graph, rho: &Priorities) -> Result<(Matching, GreedyTrace)> {
    rho.covers(g)?;
    let order = rho.processing_order();
    let mut m = Matching::empty(g.n());
    let mut decisions = vec![Decision::Blocked; g.m()];
    for &e in &order {
        if m.try_add(g, e) {
            decisions[e] = Decision::Added;
        }
    }
    Ok((m, GreedyTrace { order, decisions }))
}

/// Greedy matching of an edge sample of `g`, expressed on `g`'s ids.
#[derive(Clone, Debug)]
pub struct SampledGreedy {
    pub sample: Subgraph,
    pub matching: Matching,
}

impl SampledGreedy {
    /// Residual degree of `v` in the full graph `g` the sample was drawn from.
    pub fn residual_degree(&self, g: &Graph, v: usize) -> usize {
        self.matching.residual_degree(g, v)
    }

    pub fn residual_degrees(&self, g: &Graph) -> Vec<u32> {
        self.matching.residual_degrees(g)
    }
}

/// `GreedyMM(G_p, pi)` where `G_p = edge_sample(G, p, seed)`.
pub fn sample_and_greedy(g: &Graph, p: f64, rho: &Priorities, seed: u64) -> Result<SampledGreedy> {
    rho.covers(g)?;
    let sample = g.edge_sample(p, seed)?;
    let local = greedy_mm(&sample.graph, &rho.restrict(&sample.edge_map))?;
    let matching = Matching::from_edges(g, local.edges().iter().map(|&e| sample.parent_edge(e)))?;
    Ok(SampledGreedy { sample, matching })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::verify_matching;

    #[test]
    fn path_takes_first_edge() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let m = greedy_mm(&g, &Priorities::from_keys(vec![1, 2])).unwrap();
        assert_eq!(m.edge_set(), vec![0]);
    }

    #[test]
    fn triangle_takes_min_edge() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        // e1 = (0,2) has id 1 in lexicographic order.
        let m = greedy_mm(&g, &Priorities::from_keys(vec![3, 1, 2])).unwrap();
        assert_eq!(m.edge_set(), vec![1]);
    }

    #[test]
    fn missing_priority_is_rejected() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(greedy_mm(&g, &Priorities::from_keys(vec![1])).is_err());
    }

    #[test]
    fn trace_matches_output() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let rho = Priorities::random(g.m(), 3);
        let (m, trace) = greedy_mm_traced(&g, &rho).unwrap();
        let added: Vec<usize> = (0..g.m()).filter(|&e| trace.decisions[e] == Decision::Added).collect();
        assert_eq!(added, m.edge_set());
        assert!(verify_matching(&g, &m).maximal);
    }

    #[test]
    fn sampled_full_equals_direct() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)]).unwrap();
        let rho = Priorities::random(g.m(), 11);
        let s = sample_and_greedy(&g, 1.0, &rho, 99).unwrap();
        assert_eq!(s.matching, greedy_mm(&g, &rho).unwrap());
    }

    #[test]
    fn empty_sample_leaves_degrees() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let rho = Priorities::random(g.m(), 1);
        // Find a seed whose tiny-p sample keeps nothing.
        let seed = (0..100)
            .find(|&s| g.edge_sample(1e-9, s).unwrap().graph.m() == 0)
            .unwrap();
        let s = sample_and_greedy(&g, 1e-9, &rho, seed).unwrap();
        assert!(s.matching.is_empty());
        for v in 0..g.n() {
            assert_eq!(s.residual_degree(&g, v), g.degree(v));
        }
    }
}
