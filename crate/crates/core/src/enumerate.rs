//! Exhaustive domains for small-case checks: isomorphism classes of graphs
//! on a few vertices and all orderings of a short list.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MAX_ENUMERATED_VERTICES: usize = 7;

/// Advance `a` to the next permutation in lexicographic order; false after
/// the last one.
pub fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let Some(i) = (0..a.len() - 1).rev().find(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let j = (i + 1..a.len()).rev().find(|&j| a[j] > a[i]).unwrap();
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Calls `f` on every permutation of `0..k`, in lexicographic order.
pub fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..k).collect();
    loop {
        f(&a);
        if !next_permutation(&mut a) {
            break;
        }
    }
}

fn pair_index(n: usize) -> Vec<Vec<usize>> {
    let mut idx = vec![vec![usize::MAX; n]; n];
    for (c, (u, v)) in pairs_of(n).into_iter().enumerate() {
        idx[u][v] = c;
        idx[v][u] = c;
    }
    idx
}

fn pairs_of(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

/// Canonical codes (bit `b` set iff pair `b` of the lexicographic pair list
/// is an edge) of every isomorphism class on `n` vertices, grown from the
/// classes on `n - 1` vertices by attaching the new vertex to every subset.
fn class_codes(n: usize) -> BTreeSet<u32> {
    if n <= 1 {
        return BTreeSet::from([0]);
    }
    let idx = pair_index(n);
    let pairs = pairs_of(n);
    let mut maps: Vec<Vec<usize>> = Vec::new();
    for_each_permutation(n, |p| {
        maps.push(pairs.iter().map(|&(u, v)| idx[p[u]][p[v]]).collect());
    });
    let canonical = |code: u32| -> u32 {
        maps.iter()
            .map(|map| {
                let mut out = 0u32;
                let mut bits = code;
                while bits != 0 {
                    out |= 1 << map[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                out
            })
            .min()
            .unwrap()
    };
    let smaller = pairs_of(n - 1);
    let mut out = BTreeSet::new();
    for code in class_codes(n - 1) {
        let mut base = 0u32;
        for (b, &(u, v)) in smaller.iter().enumerate() {
            if code >> b & 1 == 1 {
                base |= 1 << idx[u][v];
            }
        }
        for mask in 0u32..1 << (n - 1) {
            let mut c = base;
            for (u, row) in idx.iter().enumerate().take(n - 1) {
                if mask >> u & 1 == 1 {
                    c |= 1 << row[n - 1];
                }
            }
            out.insert(canonical(c));
        }
    }
    out
}

/// One representative per isomorphism class of simple graphs on exactly `n`
/// vertices (isolated vertices allowed), ordered by edge count.
pub fn nonisomorphic_graphs(n: usize) -> Result<Vec<Graph>> {
    if n > MAX_ENUMERATED_VERTICES {
        return Err(Error::TooLarge(format!("isomorphism classes on {n} vertices")));
    }
    let pairs = pairs_of(n);
    let mut codes: Vec<(u32, u32)> = class_codes(n).into_iter().map(|c| (c.count_ones(), c)).collect();
    codes.sort_unstable();
    Ok(codes
        .into_iter()
        .map(|(_, c)| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|&(b, _)| c >> b & 1 == 1)
                .map(|(_, &e)| e);
            Graph::from_edges(n, edges).expect("enumerated pairs are simple")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        let mut c = 0;
        for_each_permutation(5, |_| c += 1);
        assert_eq!(c, 120);
        let mut c = 0;
        for_each_permutation(0, |_| c += 1);
        assert_eq!(c, 1);
    }

    #[test]
    fn class_counts_match_known_sequence() {
        // Graphs on n unlabeled vertices: 1, 2, 4, 11, 34, 156.
        let counts: Vec<usize> = (1..=6).map(|n| nonisomorphic_graphs(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34, 156]);
        assert!(nonisomorphic_graphs(8).is_err());
    }
}
