use mpcmm::algorithms::{degree_reduction_phase, vertex_cover_2approx};
use mpcmm::analysis::brute_force_max_matching;
use mpcmm::{load_graph, maximal_matching_driver, verify_matching, DriverMode, GraphSpec, PhaseConfig};

#[test]
fn driver_on_generated_families() {
    let cfg = PhaseConfig::default();
    for spec in [
        "random-regular:3000,64",
        "erdos-renyi:3000,80",
        "star:500",
        "complete:120",
    ] {
        let g: mpcmm::Graph = spec.parse::<GraphSpec>().unwrap().generate(11).unwrap();
        for mode in [DriverMode::LogLog, DriverMode::ConstantDelta { delta: 0.5 }] {
            let (m, s) = maximal_matching_driver(&g, &cfg, mode, 7).unwrap();
            let check = verify_matching(&g, &m);
            assert!(check.valid && check.maximal, "{spec}: {:?}", check.violation);
            assert!(s.maximal && s.space_clean, "{spec}");
            assert_eq!(s.rounds, 3 * s.phase_count + 1);
            assert_eq!(s.matching_size, m.len());
        }
    }
}

#[test]
fn driver_is_deterministic() {
    let g = GraphSpec::RandomRegular { n: 2000, d: 100 }.generate(3).unwrap();
    let cfg = PhaseConfig::default();
    let (a, sa) = maximal_matching_driver(&g, &cfg, DriverMode::LogLog, 99).unwrap();
    let (b, sb) = maximal_matching_driver(&g, &cfg, DriverMode::LogLog, 99).unwrap();
    assert_eq!(a.edge_set(), b.edge_set());
    assert_eq!(serde_json::to_string(&sa).unwrap(), serde_json::to_string(&sb).unwrap());
}

#[test]
fn one_phase_lowers_the_max_degree() {
    let g = GraphSpec::RandomRegular { n: 4000, d: 256 }.generate(5).unwrap();
    let cfg = PhaseConfig::default();
    let (m, rep) = degree_reduction_phase(&g, &cfg, 1).unwrap();
    assert!((rep.residual_max_degree as f64) < cfg.cleanup_threshold(256));
    assert_eq!(
        rep.residual_max_degree,
        m.residual_degrees(&g).into_iter().max().unwrap() as usize
    );
    assert!(verify_matching(&g, &m).valid);
    assert_eq!(rep.round_cost, 3);
}

#[test]
fn edge_list_input_keeps_labels() {
    let g = load_graph("# triangle plus tail\n10 20\n20 30\n30 10\n30 40\n\n").unwrap();
    assert_eq!((g.n(), g.m()), (4, 4));
    let (m, _) = maximal_matching_driver(&g, &PhaseConfig::default(), DriverMode::LogLog, 1).unwrap();
    assert!(verify_matching(&g, &m).maximal);
    assert_eq!(m.len(), 2);
    assert!(load_graph("1 1\n").is_err());
    assert!(load_graph("1 x\n").is_err());
}

#[test]
fn cover_and_half_approximation_on_petersen_like_graphs() {
    let g = GraphSpec::RandomRegular { n: 30, d: 3 }.generate(8).unwrap();
    let (m, _) = maximal_matching_driver(&g, &PhaseConfig::default(), DriverMode::LogLog, 2).unwrap();
    let best = brute_force_max_matching(&g).unwrap().len();
    assert!(2 * m.len() >= best && m.len() <= best);
    let cover = vertex_cover_2approx(&g, &m).unwrap();
    assert_eq!(cover.len(), 2 * m.len());
}
