use proptest::prelude::*;

use mpcmm::oracle::{edge_oracle, partitioned_edge_oracle};
use mpcmm::suites::{perturbation_delta, Perturbation};
use mpcmm::{greedy_mm, verify_matching, Graph, Priorities};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..(3 * n)).prop_map(move |pairs| {
            let pairs: Vec<(usize, usize)> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            Graph::from_edges(n, pairs).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_is_valid_and_maximal(g in graph_strategy(40), key in any::<u64>()) {
        let m = greedy_mm(&g, &Priorities::random(g.m(), key)).unwrap();
        let check = verify_matching(&g, &m);
        prop_assert!(check.valid && check.maximal, "{:?}", check.violation);
    }

    #[test]
    fn single_changes_move_at_most_two_vertices(g in graph_strategy(25), key in any::<u64>(), pick in any::<u64>(), kind in 0usize..3) {
        let rho = Priorities::random(g.m(), key);
        let change = match (kind, g.m()) {
            (_, 0) | (0, _) => Perturbation::RemoveVertex(pick as usize % g.n()),
            (1, m) => Perturbation::RemoveEdge(pick as usize % m),
            (_, m) => Perturbation::Resample(pick as usize % m, pick.rotate_left(17)),
        };
        prop_assert!(perturbation_delta(&g, &rho, change).unwrap() <= 2);
    }

    #[test]
    fn oracles_reproduce_greedy(g in graph_strategy(20), key in any::<u64>(), mask in any::<u32>()) {
        let rho = Priorities::random(g.m(), key);
        let m = greedy_mm(&g, &rho).unwrap();
        let x: Vec<bool> = (0..g.n()).map(|v| mask >> (v % 32) & 1 == 1).collect();
        let sub = g.induced_by_mask(&x);
        let local = greedy_mm(&sub.graph, &rho.restrict(&sub.edge_map)).unwrap();
        let in_part: Vec<usize> = local.edges().iter().map(|&e| sub.parent_edge(e)).collect();
        for e in 0..g.m() {
            let memo = e % 2 == 0;
            prop_assert_eq!(edge_oracle(&g, &rho, e, memo).unwrap().0, m.contains_edge(e));
            prop_assert_eq!(partitioned_edge_oracle(&g, &rho, &x, e, memo).unwrap().0, in_part.contains(&e));
        }
    }
}
