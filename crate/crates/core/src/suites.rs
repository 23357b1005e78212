//! Named verification suites. Each returns a report of individual checks;
//! a suite passes iff every check does.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algorithms::{maximal_matching_driver, vertex_cover_2approx, DriverMode, PhaseConfig};
use crate::analysis::{self, Conditioning};
use crate::enumerate::{for_each_permutation, nonisomorphic_graphs, MAX_ENUMERATED_VERTICES};
use crate::error::{Error, Result};
use crate::generators;
use crate::graph::Graph;
use crate::greedy::greedy_mm;
use crate::matching::{match_status_delta, verify_matching};
use crate::oracle::{degree_oracle, edge_oracle, partitioned_edge_oracle, query_complexity_stats, total_query_calls};
use crate::priority::Priorities;
use crate::seed::{self, splitmix64, tag};
use crate::stats;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lipschitz,
    Tails,
    OracleEquivalence,
    EfronStein,
    QueryComplexity,
    Survivors,
    VertexCover,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lipschitz,
        Suite::Tails,
        Suite::OracleEquivalence,
        Suite::EfronStein,
        Suite::QueryComplexity,
        Suite::Survivors,
        Suite::VertexCover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lipschitz => "lipschitz",
            Suite::Tails => "tails",
            Suite::OracleEquivalence => "oracle-equivalence",
            Suite::EfronStein => "efron-stein",
            Suite::QueryComplexity => "query-complexity",
            Suite::Survivors => "survivors",
            Suite::VertexCover => "vertex-cover",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Suite-specific main trial count; `None` selects the suite default.
    pub trials: Option<usize>,
    pub beta: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, observed: f64, bound: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            observed,
            bound,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub instances: usize,
    pub checks: Vec<Check>,
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    let (instances, checks) = match suite {
        Suite::Lipschitz => lipschitz(opts)?,
        Suite::Tails => tails(opts)?,
        Suite::OracleEquivalence => oracle_equivalence(opts)?,
        Suite::EfronStein => efron_stein(opts)?,
        Suite::QueryComplexity => query_complexity(opts)?,
        Suite::Survivors => survivors(opts)?,
        Suite::VertexCover => vertex_cover(opts)?,
    };
    Ok(SuiteReport {
        schema_version: REPORT_SCHEMA_VERSION,
        suite,
        seed: opts.seed,
        passed: checks.iter().all(|c| c.passed),
        instances,
        checks,
    })
}

/// A random simple graph with `n` vertices and edge probability `p`, drawn
/// pair by pair.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edges(n, pairs).expect("generated pairs are simple")
}

/// Every isomorphism class on at most `max_n` vertices.
pub fn small_graph_corpus(max_n: usize) -> Result<Vec<Graph>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.extend(nonisomorphic_graphs(n)?);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    RemoveVertex(usize),
    RemoveEdge(usize),
    Resample(usize, u64),
}

/// Match-status changes between greedy on `(g, rho)` and greedy after one
/// perturbation. A removed vertex stays in the universe, isolated.
pub fn perturbation_delta(g: &Graph, rho: &Priorities, change: Perturbation) -> Result<usize> {
    let base = greedy_mm(g, rho)?;
    let after = match change {
        Perturbation::RemoveVertex(v) => {
            g.check_vertex(v)?;
            let keep: Vec<usize> = g
                .edges()
                .enumerate()
                .filter(|&(_, (a, b))| a != v && b != v)
                .map(|(e, _)| e)
                .collect();
            let sub = g.edge_subgraph(&keep);
            let local = greedy_mm(&sub.graph, &rho.restrict(&sub.edge_map))?;
            crate::matching::Matching::from_edges(g, local.edges().iter().map(|&e| sub.parent_edge(e)))?
        }
        Perturbation::RemoveEdge(e) => {
            g.check_edge(e)?;
            let keep: Vec<usize> = (0..g.m()).filter(|&f| f != e).collect();
            let sub = g.edge_subgraph(&keep);
            let local = greedy_mm(&sub.graph, &rho.restrict(&sub.edge_map))?;
            crate::matching::Matching::from_edges(g, local.edges().iter().map(|&f| sub.parent_edge(f)))?
        }
        Perturbation::Resample(e, key) => {
            g.check_edge(e)?;
            greedy_mm(g, &rho.with_key(e, key))?
        }
    };
    Ok(match_status_delta(&base, &after)?.len())
}

pub const LIPSCHITZ_DRAWS: usize = 100;
pub const LIPSCHITZ_RANDOM_TRIALS: usize = 10_000;

fn lipschitz(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let corpus = small_graph_corpus(MAX_ENUMERATED_VERTICES)?;
    let exhaustive: Vec<(usize, usize)> = corpus
        .par_iter()
        .enumerate()
        .map(|(gi, g)| -> Result<(usize, usize)> {
            let mut worst = 0;
            let mut perturbations = 0;
            for d in 0..LIPSCHITZ_DRAWS {
                let s = seed::derive(opts.seed, &[tag::TRIAL, gi as u64, d as u64]);
                let rho = Priorities::random(g.m(), s);
                let mut changes: Vec<Perturbation> = (0..g.n()).map(Perturbation::RemoveVertex).collect();
                changes.extend((0..g.m()).map(Perturbation::RemoveEdge));
                changes.extend((0..g.m()).map(|e| Perturbation::Resample(e, splitmix64(s ^ e as u64))));
                for c in changes {
                    worst = worst.max(perturbation_delta(g, &rho, c)?);
                    perturbations += 1;
                }
            }
            Ok((worst, perturbations))
        })
        .collect::<Result<_>>()?;
    let worst_small = exhaustive.iter().map(|w| w.0).max().unwrap_or(0);
    let count_small: usize = exhaustive.iter().map(|w| w.1).sum();
    let small_violations = exhaustive.iter().filter(|w| w.0 > 2).count();

    let trials = opts.trials.unwrap_or(LIPSCHITZ_RANDOM_TRIALS);
    let random: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut rng = seed::rng(seed::derive(opts.seed, &[tag::GRAPH, t as u64]));
            let n = rng.random_range(8..=60);
            let avg = rng.random_range(1.0..8.0);
            let g = random_graph(n, avg / (n - 1) as f64, &mut rng);
            let rho = Priorities::random(g.m(), rng.random());
            let kind = if g.m() == 0 { 0 } else { rng.random_range(0..3) };
            let change = match kind {
                0 => Perturbation::RemoveVertex(rng.random_range(0..n)),
                1 => Perturbation::RemoveEdge(rng.random_range(0..g.m())),
                _ => Perturbation::Resample(rng.random_range(0..g.m()), rng.random()),
            };
            perturbation_delta(&g, &rho, change)
        })
        .collect::<Result<_>>()?;
    let worst_random = random.iter().copied().max().unwrap_or(0);
    let random_violations = random.iter().filter(|&&d| d > 2).count();

    Ok((
        corpus.len() + trials,
        vec![
            Check::new(
                "small-graphs-exhaustive",
                small_violations == 0,
                worst_small as f64,
                2.0,
                format!(
                    "{} graphs on <= {} vertices, {} priority draws each, {} perturbations, {} violating graphs",
                    corpus.len(),
                    MAX_ENUMERATED_VERTICES,
                    LIPSCHITZ_DRAWS,
                    count_small,
                    small_violations
                ),
            ),
            Check::new(
                "random-larger-graphs",
                random_violations == 0,
                worst_random as f64,
                2.0,
                format!("{trials} random perturbations on graphs with 8..=60 vertices, {random_violations} violations"),
            ),
        ],
    ))
}

pub const TAIL_TRIALS: usize = 2000;

fn tails(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let trials = opts.trials.unwrap_or(TAIL_TRIALS);
    let ps = opts.p.map_or(vec![0.5, 0.2], |p| vec![p]);
    let betas = opts.beta.map_or(vec![0.1, 0.05], |b| vec![b]);
    let graphs = [
        ("complete:20".to_string(), generators::complete(20)),
        (
            "random-regular:200,20".to_string(),
            generators::random_regular(200, 20, seed::derive(opts.seed, &[tag::GRAPH]))?,
        ),
    ];
    let mut jobs = Vec::new();
    for (gi, (name, g)) in graphs.iter().enumerate() {
        for &p in &ps {
            for &b in &betas {
                jobs.push((gi, name, g, p, b));
            }
        }
    }
    let checks = jobs
        .par_iter()
        .map(|&(gi, name, g, p, b)| -> Result<Check> {
            let s = seed::derive(opts.seed, &[tag::TRIAL, gi as u64, p.to_bits(), b.to_bits()]);
            let t = analysis::residual_tail_check(g, p, b, 0, trials, s)?;
            Ok(Check::new(
                format!("{name} p={p} beta={b}"),
                t.holds,
                t.frequency,
                b + 3.0 * t.sigma,
                format!(
                    "threshold {:.3}, {} of {} trials exceeded, pooled over vertices {:.5}",
                    t.threshold, t.exceedances, trials, t.pooled_frequency
                ),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((graphs.len(), checks))
}

/// Disagreements between the oracles and direct recomputation on one
/// instance: `g` plays both the graph and its edge sample unless
/// `sample_p < 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleTally {
    pub edge_queries: usize,
    pub edge_disagreements: usize,
    pub partitioned_queries: usize,
    pub partitioned_disagreements: usize,
    pub degree_queries: usize,
    pub degree_disagreements: usize,
    pub probe_determinism_failures: usize,
}

impl OracleTally {
    fn add(&mut self, o: &OracleTally) {
        self.edge_queries += o.edge_queries;
        self.edge_disagreements += o.edge_disagreements;
        self.partitioned_queries += o.partitioned_queries;
        self.partitioned_disagreements += o.partitioned_disagreements;
        self.degree_queries += o.degree_queries;
        self.degree_disagreements += o.degree_disagreements;
        self.probe_determinism_failures += o.probe_determinism_failures;
    }

    pub fn disagreements(&self) -> usize {
        self.edge_disagreements
            + self.partitioned_disagreements
            + self.degree_disagreements
            + self.probe_determinism_failures
    }
}

pub fn compare_oracles(
    g: &Graph,
    cond: &Conditioning,
    x: &[bool],
    memo: bool,
    rng: Option<&mut dyn rand::RngCore>,
) -> Result<OracleTally> {
    let mut t = OracleTally::default();
    let gl = cond.gl();
    // Unpartitioned oracle on the sample against greedy on the sample.
    let full = greedy_mm(gl, &cond.rho)?;
    let mut in_full = vec![false; gl.m()];
    for &e in full.edges() {
        in_full[e] = true;
    }
    // Partitioned oracle against greedy on the induced subgraph.
    let sub = gl.induced_by_mask(x);
    let local = greedy_mm(&sub.graph, &cond.rho.restrict(&sub.edge_map))?;
    let mut in_part = vec![false; gl.m()];
    for &e in local.edges() {
        in_part[sub.parent_edge(e)] = true;
    }
    for e in 0..gl.m() {
        t.edge_queries += 1;
        if edge_oracle(gl, &cond.rho, e, memo)?.0 != in_full[e] {
            t.edge_disagreements += 1;
        }
        t.partitioned_queries += 1;
        if partitioned_edge_oracle(gl, &cond.rho, x, e, memo)?.0 != in_part[e] {
            t.partitioned_disagreements += 1;
        }
    }
    let matched = cond.partition_matched(x);
    let mut rng = rng;
    for v in 0..g.n() {
        let direct = g
            .adjacency(v)
            .iter()
            .filter(|&&(u, _)| x[u as usize] && !matched[u as usize])
            .count();
        let rep = degree_oracle(g, gl, &cond.rho, x, v, memo)?;
        t.degree_queries += 1;
        if rep.value != direct {
            t.degree_disagreements += 1;
        }
        if let Some(r) = rng.as_deref_mut() {
            // Unread entries must not matter.
            let mut y = x.to_vec();
            let mut probed = vec![false; x.len()];
            for &u in &rep.probed {
                probed[u] = true;
            }
            for (u, slot) in y.iter_mut().enumerate() {
                if !probed[u] {
                    *slot = r.next_u32() & 1 == 1;
                }
            }
            if cond.z_value(g, &y, v) != direct {
                t.probe_determinism_failures += 1;
            }
        }
    }
    Ok(t)
}

/// Small-graph domain: every isomorphism class without isolated vertices
/// on at most 7 vertices with at most `ORACLE_MAX_EDGES` edges. Classes with
/// at most `ORACLE_FULL_ORDER_EDGES` edges are checked under every edge
/// ordering, the rest under `ORACLE_SAMPLED_ORDERS` random orderings.
pub const ORACLE_MAX_EDGES: usize = 9;
pub const ORACLE_FULL_ORDER_EDGES: usize = 8;
pub const ORACLE_SAMPLED_ORDERS: usize = 5000;
pub const ORACLE_RANDOM_INSTANCES: usize = 500;

fn indicator_from(h: u64, n: usize) -> Vec<bool> {
    (0..n).map(|v| splitmix64(h ^ v as u64) & 1 == 1).collect()
}

fn oracle_equivalence(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let corpus: Vec<Graph> = small_graph_corpus(MAX_ENUMERATED_VERTICES)?
        .into_iter()
        .filter(|g| g.m() <= ORACLE_MAX_EDGES && (g.n() == 1 || (0..g.n()).all(|v| g.degree(v) > 0)))
        .collect();
    let exhaustive: Vec<(OracleTally, usize, bool)> = corpus
        .par_iter()
        .enumerate()
        .map(|(gi, g)| -> Result<(OracleTally, usize, bool)> {
            let mut tally = OracleTally::default();
            let mut orders = 0;
            let all = g.m() <= ORACLE_FULL_ORDER_EDGES;
            let mut visit = |ranks: &[usize], o: u64| -> Result<()> {
                let rho = Priorities::from_ranks(ranks);
                let cond = Conditioning::new(g, &rho, 1.0, 0, 2)?;
                let x = indicator_from(seed::derive(opts.seed, &[gi as u64, o]), g.n());
                tally.add(&compare_oracles(g, &cond, &x, false, None)?);
                orders += 1;
                Ok(())
            };
            if all {
                let mut result = Ok(());
                let mut o = 0u64;
                for_each_permutation(g.m(), |p| {
                    if result.is_ok() {
                        result = visit(p, o);
                    }
                    o += 1;
                });
                result?;
            } else {
                let mut rng = seed::rng(seed::derive(opts.seed, &[tag::PRIORITY, gi as u64]));
                for o in 0..ORACLE_SAMPLED_ORDERS {
                    let mut ranks: Vec<usize> = (0..g.m()).collect();
                    rand::seq::SliceRandom::shuffle(ranks.as_mut_slice(), &mut rng);
                    visit(&ranks, o as u64)?;
                }
            }
            Ok((tally, orders, all))
        })
        .collect::<Result<_>>()?;
    let mut small = OracleTally::default();
    for (t, _, _) in &exhaustive {
        small.add(t);
    }
    let orders: usize = exhaustive.iter().map(|e| e.1).sum();
    let fully = exhaustive.iter().filter(|e| e.2).count();

    let instances = opts.trials.unwrap_or(ORACLE_RANDOM_INSTANCES);
    let random: Vec<OracleTally> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<OracleTally> {
            let mut rng = seed::rng(seed::derive(opts.seed, &[tag::GRAPH, i as u64]));
            let n = rng.random_range(2..=60);
            let avg = rng.random_range(1.0..10.0);
            let g = random_graph(n, (avg / (n - 1) as f64).min(1.0), &mut rng);
            let rho = Priorities::random(g.m(), rng.random());
            let p = [1.0, 0.7, 0.3][i % 3];
            let k = rng.random_range(1..=4);
            let cond = Conditioning::new(&g, &rho, p, rng.random(), k)?;
            let x: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 1.0 / k as f64).collect();
            let mut t = compare_oracles(&g, &cond, &x, i % 2 == 0, Some(&mut rng))?;
            // Degenerate partition: everything in the first part.
            let all = vec![true; n];
            t.add(&compare_oracles(&g, &cond, &all, false, None)?);
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut big = OracleTally::default();
    for t in &random {
        big.add(t);
    }

    let detail = |t: &OracleTally| {
        format!(
            "edge {}/{}, partitioned {}/{}, degree {}/{}, probe-determinism failures {}",
            t.edge_disagreements,
            t.edge_queries,
            t.partitioned_disagreements,
            t.partitioned_queries,
            t.degree_disagreements,
            t.degree_queries,
            t.probe_determinism_failures
        )
    };
    Ok((
        corpus.len() + instances,
        vec![
            Check::new(
                "small-graphs-all-orders",
                small.disagreements() == 0,
                small.disagreements() as f64,
                0.0,
                format!(
                    "{} classes on <= 7 vertices with <= {} edges, {} of them under every order, {} orderings; {}",
                    corpus.len(),
                    ORACLE_MAX_EDGES,
                    fully,
                    orders,
                    detail(&small)
                ),
            ),
            Check::new(
                "random-instances",
                big.disagreements() == 0,
                big.disagreements() as f64,
                0.0,
                format!("{instances} graphs with <= 60 vertices; {}", detail(&big)),
            ),
        ],
    ))
}

pub const ES_INSTANCES: usize = 10;
pub const ES_VERTICES: usize = 30;
pub const ES_TRIALS: usize = 300;
pub const LIPSCHITZ_Z_RESAMPLES: usize = 10_000;

fn efron_stein(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let mut checks = Vec::new();

    // Exactly enumerable case.
    let edge = Graph::from_edges(2, [(0, 1)])?;
    let cond = Conditioning::new(&edge, &Priorities::random(1, opts.seed), 1.0, 0, 2)?;
    let exact = analysis::exact_efron_stein(&edge, &cond, 0)?;
    let ok = (exact.variance - 3.0 / 16.0).abs() < 1e-12 && (exact.es_bound - 0.25).abs() < 1e-12;
    checks.push(Check::new(
        "single-edge-exact",
        ok && exact.variance <= exact.es_bound,
        exact.variance,
        exact.es_bound,
        "variance 3/16 against right-hand side 1/4 by enumerating all 4 partitions",
    ));

    // Bounded differences on n = 50.
    let resamples = opts.trials.unwrap_or(LIPSCHITZ_Z_RESAMPLES);
    let mut rng = seed::rng(seed::derive(opts.seed, &[tag::GRAPH, 50]));
    let g50 = random_graph(50, 6.0 / 49.0, &mut rng);
    let cond50 = Conditioning::new(&g50, &Priorities::random(g50.m(), rng.random()), 0.5, rng.random(), 2)?;
    let per_vertex = resamples.div_ceil(g50.n());
    let runs: Vec<analysis::LipschitzZ> = (0..g50.n())
        .into_par_iter()
        .map(|v| {
            analysis::lipschitz_z_check(
                &g50,
                &cond50,
                v,
                per_vertex,
                seed::derive(opts.seed, &[tag::TRIAL, v as u64]),
            )
        })
        .collect::<Result<_>>()?;
    let max_sq = runs.iter().map(|r| r.max_squared_difference).max().unwrap_or(0);
    let changed: usize = runs.iter().map(|r| r.changed).sum();
    checks.push(Check::new(
        "bounded-differences",
        max_sq <= 4,
        max_sq as f64,
        4.0,
        format!(
            "{} coordinate resamples on a 50-vertex graph, {} changed Z",
            per_vertex * g50.n(),
            changed
        ),
    ));

    // Variance against the Efron-Stein estimate on n = 30 instances.
    let pairs: Vec<(usize, usize)> = (0..ES_INSTANCES)
        .flat_map(|i| (0..ES_VERTICES).map(move |v| (i, v)))
        .collect();
    let instances: Vec<(Graph, Conditioning)> = (0..ES_INSTANCES)
        .map(|i| -> Result<_> {
            let mut rng = seed::rng(seed::derive(opts.seed, &[tag::GRAPH, 30, i as u64]));
            let g = random_graph(ES_VERTICES, 4.0 / 29.0, &mut rng);
            let cond = Conditioning::new(&g, &Priorities::random(g.m(), rng.random()), 0.5, rng.random(), 2)?;
            Ok((g, cond))
        })
        .collect::<Result<_>>()?;
    let results: Vec<analysis::EfronSteinEstimate> = pairs
        .par_iter()
        .map(|&(i, v)| {
            let (g, cond) = &instances[i];
            analysis::efron_stein_check(
                g,
                cond,
                v,
                ES_TRIALS,
                seed::derive(opts.seed, &[tag::TRIAL, i as u64, v as u64]),
            )
        })
        .collect::<Result<_>>()?;
    let held = results.iter().filter(|r| r.holds).count();
    let frac = held as f64 / results.len() as f64;
    let es_max_sq = results.iter().map(|r| r.max_squared_difference).max().unwrap_or(0);
    checks.push(Check::new(
        "variance-below-efron-stein",
        frac >= 0.95,
        frac,
        0.95,
        format!(
            "{held} of {} (vertex, instance) pairs hold at 3 sigma, {ES_TRIALS} partitions each",
            results.len()
        ),
    ));
    checks.push(Check::new(
        "bounded-differences-in-estimates",
        es_max_sq <= 4,
        es_max_sq as f64,
        4.0,
        "every coordinate flip evaluated while estimating the right-hand side",
    ));
    Ok((2 + ES_INSTANCES, checks))
}

pub const QUERY_DRAWS: usize = 500;

pub fn query_corpus(seed_value: u64) -> Result<Vec<(String, Graph)>> {
    let s = |i: u64| seed::derive(seed_value, &[tag::GRAPH, i]);
    Ok(vec![
        ("single-edge".into(), generators::path(2)),
        ("path:200".into(), generators::path(200)),
        ("star:50".into(), generators::star(50)),
        ("complete:16".into(), generators::complete(16)),
        ("random-regular:200,3".into(), generators::random_regular(200, 3, s(1))?),
        ("random-regular:200,8".into(), generators::random_regular(200, 8, s(2))?),
        ("erdos-renyi:200,4".into(), generators::erdos_renyi(200, 4.0, s(3))?),
        ("erdos-renyi:100,16".into(), generators::erdos_renyi(100, 16.0, s(4))?),
        ("erdos-renyi:60,6".into(), generators::erdos_renyi(60, 6.0, s(5))?),
    ])
}

fn query_complexity(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let draws = opts.trials.unwrap_or(QUERY_DRAWS);
    let corpus = query_corpus(opts.seed)?;
    let mut checks: Vec<Check> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, (name, g))| -> Result<Check> {
            let q = query_complexity_stats(g, draws, seed::derive(opts.seed, &[tag::TRIAL, i as u64]))?;
            Ok(Check::new(
                name.clone(),
                q.mean_total <= q.reference,
                q.mean_total,
                q.reference,
                format!(
                    "m = {}, r = {}, {} draws, std error {:.2}",
                    q.m, q.r, draws, q.std_error
                ),
            ))
        })
        .collect::<Result<_>>()?;
    // Stars: every order gives the root call plus one call on the minimum
    // edge for all but the minimum edge itself, so the total is 2d - 1.
    for d in 1..=6 {
        let g = generators::star(d);
        let mut totals = Vec::new();
        for_each_permutation(d, |p| {
            totals.push(total_query_calls(&g, &Priorities::from_ranks(p)) as f64)
        });
        let exact = stats::mean(&totals);
        let mc = query_complexity_stats(&g, draws, seed::derive(opts.seed, &[tag::TRIAL, 100 + d as u64]))?;
        let expected = (2 * d - 1) as f64;
        let within = (mc.mean_total - exact).abs() <= 3.0 * mc.std_error + 1e-9;
        checks.push(Check::new(
            format!("star:{d} exhaustive"),
            exact == expected && within && exact <= mc.reference,
            exact,
            expected,
            format!("all {} orders; Monte-Carlo mean {:.3}", totals.len(), mc.mean_total),
        ));
    }
    Ok((corpus.len() + 6, checks))
}

pub const SURVIVOR_TRIALS: usize = 20;

fn survivors(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let trials = opts.trials.unwrap_or(SURVIVOR_TRIALS);
    let degrees = [4usize, 8, 16, 64, 256];
    let cfg = PhaseConfig::default();
    let censuses: Vec<analysis::SurvivorCensus> = degrees
        .par_iter()
        .map(|&d| {
            let g = generators::random_regular(5000, d, seed::derive(opts.seed, &[tag::GRAPH, d as u64]))?;
            analysis::survivor_census(&g, &cfg, trials, seed::derive(opts.seed, &[tag::TRIAL, d as u64]))
        })
        .collect::<Result<_>>()?;
    let medians: Vec<f64> = censuses.iter().map(|c| stats::median(&c.fractions)).collect();
    let xs: Vec<f64> = degrees.iter().map(|&d| (d as f64).ln()).collect();
    let ys: Vec<f64> = censuses
        .iter()
        .map(|c| ((c.total_survivors as f64 + 0.5) / (c.n * c.trials) as f64).ln())
        .collect();
    let fit = stats::linear_fit(&xs, &ys).expect("distinct degrees");
    let fitted_c: Vec<String> = censuses
        .iter()
        .map(|c| format!("{:.3e}", c.mean_fraction * (c.max_degree as f64).powf(0.03)))
        .collect();
    Ok((
        degrees.len(),
        vec![
            Check::new(
                "median-survivor-fraction-non-increasing",
                stats::non_increasing(&medians),
                medians.last().copied().unwrap_or(0.0),
                medians.first().copied().unwrap_or(0.0),
                format!("degrees {degrees:?}, medians {medians:?}"),
            ),
            Check::new(
                "pooled-log-log-slope-negative",
                fit.slope < 0.0,
                fit.slope,
                0.0,
                format!("fraction x Δ^0.03 per degree: {}", fitted_c.join(", ")),
            ),
            Check::new(
                "space-clean",
                censuses.iter().all(|c| c.space_clean),
                censuses.iter().map(|c| c.max_machine_words).max().unwrap_or(0) as f64,
                censuses.iter().map(|c| c.machine_budget).max().unwrap_or(0) as f64,
                "largest partition load against the per-machine budget",
            ),
        ],
    ))
}

pub const COVER_INSTANCES: usize = 200;

struct CoverRow {
    covers: bool,
    cover: usize,
    optimum: usize,
    matched: usize,
    maximum: usize,
}

fn vertex_cover(opts: &SuiteOptions) -> Result<(usize, Vec<Check>)> {
    let instances = opts.trials.unwrap_or(COVER_INSTANCES);
    let cfg = PhaseConfig::default();
    let rows: Vec<CoverRow> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = seed::rng(seed::derive(opts.seed, &[tag::GRAPH, i as u64]));
            let n = rng.random_range(2..=14);
            let g = random_graph(n, rng.random_range(0.1..0.9), &mut rng);
            let (m, _) = maximal_matching_driver(&g, &cfg, DriverMode::LogLog, rng.random())?;
            let cover = vertex_cover_2approx(&g, &m)?;
            let mut inside = vec![false; n];
            for &v in &cover {
                inside[v] = true;
            }
            let covers = g.edges().all(|(u, v)| inside[u] || inside[v]);
            Ok(CoverRow {
                covers,
                cover: cover.len(),
                optimum: analysis::min_vertex_cover_size(&g)?,
                matched: m.len(),
                maximum: analysis::brute_force_max_matching(&g)?.len(),
            })
        })
        .collect::<Result<_>>()?;
    let all_cover = rows.iter().all(|r| r.covers);
    let all_ratio = rows.iter().all(|r| r.cover <= 2 * r.optimum);
    let half = rows.iter().all(|r| 2 * r.matched >= r.maximum);
    let worst_half = rows
        .iter()
        .filter(|r| r.maximum > 0)
        .map(|r| r.matched as f64 / r.maximum as f64)
        .fold(1.0, f64::min);
    let worst = rows
        .iter()
        .filter(|r| r.optimum > 0)
        .map(|r| r.cover as f64 / r.optimum as f64)
        .fold(0.0, f64::max);

    let edge = Graph::from_edges(2, [(0, 1)])?;
    let m = greedy_mm(&edge, &Priorities::by_edge_id(1))?;
    let cover = vertex_cover_2approx(&edge, &m)?;
    let opt = analysis::min_vertex_cover_size(&edge)?;
    let edge_ok = verify_matching(&edge, &m).maximal && cover.len() == 2 && opt == 1;
    Ok((
        instances + 1,
        vec![
            Check::new(
                "covers-every-edge",
                all_cover,
                rows.iter().filter(|r| r.covers).count() as f64,
                instances as f64,
                "random graphs on 2..=14 vertices",
            ),
            Check::new(
                "at-most-twice-optimum",
                all_ratio,
                worst,
                2.0,
                "largest cover / optimum ratio observed",
            ),
            Check::new(
                "single-edge-ratio-two",
                edge_ok,
                cover.len() as f64 / opt as f64,
                2.0,
                "cover {0, 1} against optimum 1",
            ),
            Check::new(
                "at-least-half-maximum-matching",
                half,
                worst_half,
                0.5,
                "smallest driver matching / maximum matching ratio",
            ),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn perturbations_on_path() {
        let g = generators::path(4);
        let rho = Priorities::from_keys(vec![1, 2, 3]);
        // Greedy takes edges 0 and 2. Isolating vertex 1 unmatches 0 and 1.
        assert_eq!(perturbation_delta(&g, &rho, Perturbation::RemoveVertex(1)).unwrap(), 2);
        assert_eq!(perturbation_delta(&g, &rho, Perturbation::RemoveEdge(1)).unwrap(), 0);
        // Moving the middle edge first leaves both ends unmatched.
        assert_eq!(perturbation_delta(&g, &rho, Perturbation::Resample(1, 0)).unwrap(), 2);
    }

    #[test]
    fn quick_suites_pass() {
        let opts = SuiteOptions {
            seed: 3,
            trials: Some(40),
            ..Default::default()
        };
        for s in [Suite::Tails, Suite::VertexCover] {
            let r = run_suite(s, &opts).unwrap();
            assert!(r.passed, "{s}: {:?}", r.checks);
        }
    }
}
