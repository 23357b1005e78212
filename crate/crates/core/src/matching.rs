use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A set of edge ids together with per-vertex match-status.
///
/// `Matching` does not itself enforce vertex-disjointness; [`verify_matching`]
/// is the authority on validity. Matchings produced by this crate are valid by
/// construction and are checked again at the pipeline boundaries.
#[derive(Clone, Debug, Eq)]
pub struct Matching {
    edges: Vec<usize>,
    matched: Vec<bool>,
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.matched == other.matched && self.edge_set() == other.edge_set()
    }
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            edges: Vec::new(),
            matched: vec![false; n],
        }
    }

    /// Wrap an arbitrary edge-id list. Ids must exist in `g`.
    pub fn from_edges(g: &Graph, ids: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m = Matching::empty(g.n());
        for e in ids {
            g.check_edge(e)?;
            let (u, v) = g.endpoints(e);
            m.matched[u] = true;
            m.matched[v] = true;
            m.edges.push(e);
        }
        Ok(m)
    }

    /// Add `e` if both endpoints are free. Returns whether it was added.
    #[inline]
    pub fn try_add(&mut self, g: &Graph, e: usize) -> bool {
        let (u, v) = g.endpoints(e);
        if self.matched[u] || self.matched[v] {
            return false;
        }
        self.matched[u] = true;
        self.matched[v] = true;
        self.edges.push(e);
        true
    }

    /// Edge ids in insertion order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn edge_set(&self) -> Vec<usize> {
        let mut s = self.edges.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn n(&self) -> usize {
        self.matched.len()
    }

    #[inline]
    pub fn is_matched(&self, v: usize) -> bool {
        self.matched[v]
    }

    pub fn matched(&self) -> &[bool] {
        &self.matched
    }

    pub fn matched_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.matched.iter().enumerate().filter_map(|(v, &b)| b.then_some(v))
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }

    /// 0 if `v` is matched, else the number of unmatched neighbors.
    pub fn residual_degree(&self, g: &Graph, v: usize) -> usize {
        if self.matched[v] {
            return 0;
        }
        g.adjacency(v)
            .iter()
            .filter(|&&(w, _)| !self.matched[w as usize])
            .count()
    }

    pub fn residual_degrees(&self, g: &Graph) -> Vec<u32> {
        residual_degrees(g, &self.matched)
    }

    pub fn to_export(&self) -> MatchingExport {
        MatchingExport {
            n: self.n(),
            edges: self.edge_set(),
        }
    }
}

/// Residual degree of every vertex given a match-status mask.
pub fn residual_degrees(g: &Graph, matched: &[bool]) -> Vec<u32> {
    (0..g.n())
        .map(|v| {
            if matched[v] {
                0
            } else {
                g.adjacency(v).iter().filter(|&&(w, _)| !matched[w as usize]).count() as u32
            }
        })
        .collect()
}

pub fn residual_degree(g: &Graph, m: &Matching, v: usize) -> Result<usize> {
    g.check_vertex(v)?;
    if m.n() != g.n() {
        return Err(Error::UniverseMismatch {
            left: g.n(),
            right: m.n(),
        });
    }
    Ok(m.residual_degree(g, v))
}

/// JSON shape for exported matchings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatchingExport {
    pub n: usize,
    pub edges: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatchingViolation {
    UnknownEdge { edge: usize },
    SharedEndpoint { vertex: usize, first: usize, second: usize },
    Addable { edge: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingCheck {
    pub valid: bool,
    pub maximal: bool,
    /// First violation found, if any flag is false.
    pub violation: Option<MatchingViolation>,
}

/// Check validity (edges exist and are vertex-disjoint) and maximality
/// (every edge of `g` has a matched endpoint).
pub fn verify_matching(g: &Graph, m: &Matching) -> MatchingCheck {
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    let mut violation = None;
    let mut valid = m.n() == g.n();
    for &e in &m.edges {
        if e >= g.m() {
            valid = false;
            violation.get_or_insert(MatchingViolation::UnknownEdge { edge: e });
            continue;
        }
        let (u, v) = g.endpoints(e);
        for x in [u, v] {
            match owner[x] {
                Some(first) => {
                    valid = false;
                    violation.get_or_insert(MatchingViolation::SharedEndpoint {
                        vertex: x,
                        first,
                        second: e,
                    });
                }
                None => owner[x] = Some(e),
            }
        }
    }
    let covered = |x: usize| owner[x].is_some();
    let mut maximal = true;
    for (e, (u, v)) in g.edges().enumerate() {
        if !covered(u) && !covered(v) {
            maximal = false;
            if valid {
                violation.get_or_insert(MatchingViolation::Addable { edge: e });
            }
            break;
        }
    }
    MatchingCheck {
        valid,
        maximal,
        violation,
    }
}

/// Vertices whose match-status differs between two matchings over the same
/// vertex universe.
pub fn match_status_delta(a: &Matching, b: &Matching) -> Result<Vec<usize>> {
    if a.n() != b.n() {
        return Err(Error::UniverseMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok((0..a.n()).filter(|&v| a.matched[v] != b.matched[v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn residual_degree_on_path_and_star() {
        let g = path(3);
        let m = Matching::from_edges(&g, [0]).unwrap();
        assert_eq!(residual_degree(&g, &m, 2).unwrap(), 0);
        assert_eq!(residual_degree(&g, &m, 0).unwrap(), 0);
        let star = Graph::from_edges(6, (1..6).map(|l| (0, l))).unwrap();
        assert_eq!(residual_degree(&star, &Matching::empty(6), 0).unwrap(), 5);
        assert!(residual_degree(&star, &Matching::empty(6), 6).is_err());
    }

    #[test]
    fn verify_triangle_and_paths() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let c = verify_matching(&tri, &Matching::from_edges(&tri, [1]).unwrap());
        assert!(c.valid && c.maximal && c.violation.is_none());

        let p4 = path(4);
        let mid = Matching::from_edges(&p4, [1]).unwrap();
        let c = verify_matching(&p4, &mid);
        assert!(c.valid && c.maximal);

        let left = Matching::from_edges(&p4, [0]).unwrap();
        let c = verify_matching(&p4, &left);
        assert!(c.valid && !c.maximal);
        assert_eq!(c.violation, Some(MatchingViolation::Addable { edge: 2 }));
    }

    #[test]
    fn verify_flags_shared_endpoint() {
        let p3 = path(3);
        let bad = Matching::from_edges(&p3, [0, 1]).unwrap();
        let c = verify_matching(&p3, &bad);
        assert!(!c.valid);
        assert_eq!(
            c.violation,
            Some(MatchingViolation::SharedEndpoint {
                vertex: 1,
                first: 0,
                second: 1
            })
        );
        assert!(Matching::from_edges(&p3, [5]).is_err());
    }

    #[test]
    fn delta_cases() {
        let g = path(3);
        let a = Matching::from_edges(&g, [0]).unwrap();
        let b = Matching::from_edges(&g, [1]).unwrap();
        assert!(match_status_delta(&a, &a).unwrap().is_empty());
        assert_eq!(match_status_delta(&a, &b).unwrap(), vec![0, 2]);
        assert!(matches!(
            match_status_delta(&a, &Matching::empty(4)),
            Err(Error::UniverseMismatch { .. })
        ));
    }

    #[test]
    fn try_add_respects_endpoints() {
        let g = path(4);
        let mut m = Matching::empty(4);
        assert!(m.try_add(&g, 1));
        assert!(!m.try_add(&g, 0));
        assert!(!m.try_add(&g, 2));
        assert_eq!(m.len(), 1);
        assert_eq!(m.matched_vertices().collect::<Vec<_>>(), vec![1, 2]);
    }
}
