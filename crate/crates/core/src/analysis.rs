//! Monte-Carlo and exact checks of the quantities the analysis of the
//! partitioned algorithm rests on: `Z_{v,i}`, its Efron-Stein bound and
//! bounded differences, probe counts, survivor counts and residual-degree
//! tails. Exact small-case oracles live here too.

use petgraph::graph::UnGraph;
use rand::Rng;
use serde::Serialize;

use crate::algorithms::{partition_mm, PhaseConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, Subgraph};
use crate::greedy::{greedy_mm, sample_and_greedy};
use crate::matching::{verify_matching, Matching};
use crate::mpc::assign_partitions;
use crate::oracle::degree_oracle;
use crate::priority::Priorities;
use crate::seed::{self, tag};
use crate::stats;

/// `(pi, L)` held fixed while only the partition is redrawn.
#[derive(Clone, Debug)]
pub struct Conditioning {
    /// Edge sample `G^L` on the vertex ids of `G`.
    pub sample: Subgraph,
    /// Priorities restricted to the sample's edges.
    pub rho: Priorities,
    pub k: usize,
}

impl Conditioning {
    pub fn new(g: &Graph, rho: &Priorities, p: f64, l_seed: u64, k: usize) -> Result<Self> {
        rho.covers(g)?;
        if k == 0 {
            return Err(Error::ZeroPartitions);
        }
        let sample = g.edge_sample(p, l_seed)?;
        let rho = rho.restrict(&sample.edge_map);
        Ok(Conditioning { sample, rho, k })
    }

    pub fn gl(&self) -> &Graph {
        &self.sample.graph
    }

    /// Match-status of `GreedyMM(G^L[V_x], pi)` where `V_x = {u : x_u}`.
    pub fn partition_matched(&self, x: &[bool]) -> Vec<bool> {
        let sub = self.gl().induced_by_mask(x);
        let local = greedy_mm(&sub.graph, &self.rho.restrict(&sub.edge_map)).expect("restricted priorities cover");
        let mut matched = vec![false; x.len()];
        for v in local.matched_vertices() {
            matched[sub.parent_vertex(v)] = true;
        }
        matched
    }

    /// `Z_{v}(x)` by direct greedy recomputation.
    pub fn z_value(&self, g: &Graph, x: &[bool], v: usize) -> usize {
        let matched = self.partition_matched(x);
        z_from_status(g, x, &matched, v)
    }

    fn draw_indicator(&self, n: usize, rng: &mut impl Rng) -> Vec<bool> {
        let q = 1.0 / self.k as f64;
        (0..n).map(|_| rng.random::<f64>() < q).collect()
    }
}

fn z_from_status(g: &Graph, x: &[bool], matched: &[bool], v: usize) -> usize {
    g.adjacency(v)
        .iter()
        .filter(|&&(u, _)| x[u as usize] && !matched[u as usize])
        .count()
}

#[derive(Clone, Debug, Serialize)]
pub struct ZStats {
    pub vertex: usize,
    pub partition: usize,
    pub samples: Vec<usize>,
    pub mean: f64,
    pub variance: f64,
}

/// Draws of `Z_{v,i}` over fresh partitions, with `(pi, L)` fixed.
pub fn z_statistics(g: &Graph, cond: &Conditioning, v: usize, i: usize, trials: usize, seed: u64) -> Result<ZStats> {
    g.check_vertex(v)?;
    if i >= cond.k {
        return Err(Error::Config(format!("partition {i} is outside 0..{}", cond.k)));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let samples: Vec<usize> = (0..trials)
        .map(|t| {
            let parts = assign_partitions(g.n(), cond.k, seed::derive(seed, &[tag::TRIAL, t as u64])).expect("k >= 1");
            let x = parts.indicator(i);
            cond.z_value(g, &x, v)
        })
        .collect();
    let xs: Vec<f64> = samples.iter().map(|&s| s as f64).collect();
    Ok(ZStats {
        vertex: v,
        partition: i,
        mean: stats::mean(&xs),
        variance: stats::sample_variance(&xs),
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EfronSteinEstimate {
    pub vertex: usize,
    pub trials: usize,
    pub variance: f64,
    pub variance_std_error: f64,
    /// Estimate of `1/2 E[sum_w (Z(x) - Z(x^(w)))^2]`.
    pub es_estimate: f64,
    pub es_std_error: f64,
    pub holds: bool,
    pub max_squared_difference: usize,
    /// Mean number of indicator entries the degree oracle read.
    pub mean_probes: f64,
}

/// Estimates `Var(Z_{v,1} | pi, L)` and the Efron-Stein right-hand side.
/// For each draw of `x` the resampling of every coordinate `w` is averaged
/// exactly: `x'_w` differs from `x_w` with probability `1/k` or `1 - 1/k`.
pub fn efron_stein_check(
    g: &Graph,
    cond: &Conditioning,
    v: usize,
    trials: usize,
    seed: u64,
) -> Result<EfronSteinEstimate> {
    g.check_vertex(v)?;
    if trials < 2 {
        return Err(Error::Config("trials must be at least 2".into()));
    }
    let q = 1.0 / cond.k as f64;
    let mut rng = seed::rng(seed);
    let mut zs = Vec::with_capacity(trials);
    let mut es = Vec::with_capacity(trials);
    let mut probes = Vec::with_capacity(trials);
    let mut max_sq = 0;
    for _ in 0..trials {
        let mut x = cond.draw_indicator(g.n(), &mut rng);
        let z = cond.z_value(g, &x, v);
        let report = degree_oracle(g, cond.gl(), &cond.rho, &x, v, true)?;
        debug_assert_eq!(report.value, z);
        probes.push(report.ledger.vertex_probes as f64);
        let mut sum = 0.0;
        for w in 0..g.n() {
            let flip = if x[w] { 1.0 - q } else { q };
            x[w] = !x[w];
            let zw = cond.z_value(g, &x, v);
            x[w] = !x[w];
            let d = z.abs_diff(zw);
            max_sq = max_sq.max(d * d);
            sum += flip * (d * d) as f64;
        }
        zs.push(z as f64);
        es.push(0.5 * sum);
    }
    let mean = stats::mean(&zs);
    let variance = stats::sample_variance(&zs);
    let centered: Vec<f64> = zs.iter().map(|z| (z - mean).powi(2)).collect();
    let variance_std_error = stats::std_error(&centered);
    let es_estimate = stats::mean(&es);
    let es_std_error = stats::std_error(&es);
    let slack = 3.0 * (variance_std_error.powi(2) + es_std_error.powi(2)).sqrt();
    Ok(EfronSteinEstimate {
        vertex: v,
        trials,
        variance,
        variance_std_error,
        es_estimate,
        es_std_error,
        holds: variance <= es_estimate + slack,
        max_squared_difference: max_sq,
        mean_probes: stats::mean(&probes),
    })
}

pub const MAX_EXACT_VERTICES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactEfronStein {
    pub variance: f64,
    pub es_bound: f64,
}

/// Exact `Var(Z_{v,1})` and Efron-Stein right-hand side by enumerating every
/// indicator vector with its Bernoulli(`1/k`) weight.
pub fn exact_efron_stein(g: &Graph, cond: &Conditioning, v: usize) -> Result<ExactEfronStein> {
    g.check_vertex(v)?;
    let n = g.n();
    if n > MAX_EXACT_VERTICES {
        return Err(Error::TooLarge(format!("exact enumeration over 2^{n} partitions")));
    }
    let q = 1.0 / cond.k as f64;
    let weight = |mask: u32| {
        let ones = mask.count_ones() as i32;
        q.powi(ones) * (1.0 - q).powi(n as i32 - ones)
    };
    let z: Vec<f64> = (0u32..1 << n)
        .map(|mask| {
            let x: Vec<bool> = (0..n).map(|b| mask >> b & 1 == 1).collect();
            cond.z_value(g, &x, v) as f64
        })
        .collect();
    let (mut m1, mut m2, mut es) = (0.0, 0.0, 0.0);
    for mask in 0u32..1 << n {
        let w = weight(mask);
        let zx = z[mask as usize];
        m1 += w * zx;
        m2 += w * zx * zx;
        for b in 0..n {
            let flip = if mask >> b & 1 == 1 { 1.0 - q } else { q };
            let d = zx - z[(mask ^ 1 << b) as usize];
            es += w * flip * d * d;
        }
    }
    Ok(ExactEfronStein {
        variance: m2 - m1 * m1,
        es_bound: 0.5 * es,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LipschitzZ {
    pub trials: usize,
    pub max_squared_difference: usize,
    pub changed: usize,
}

/// Largest `(Z_{v,1}(x) - Z_{v,1}(x^(w)))^2` over random `x` and a random
/// coordinate `w` resampled from Bernoulli(`1/k`).
pub fn lipschitz_z_check(g: &Graph, cond: &Conditioning, v: usize, trials: usize, seed: u64) -> Result<LipschitzZ> {
    g.check_vertex(v)?;
    let mut rng = seed::rng(seed);
    let q = 1.0 / cond.k as f64;
    let (mut max_sq, mut changed) = (0, 0);
    for _ in 0..trials {
        let mut x = cond.draw_indicator(g.n(), &mut rng);
        let z = cond.z_value(g, &x, v);
        let w = rng.random_range(0..g.n());
        x[w] = rng.random::<f64>() < q;
        let d = z.abs_diff(cond.z_value(g, &x, v));
        if d > 0 {
            changed += 1;
        }
        max_sq = max_sq.max(d * d);
    }
    Ok(LipschitzZ {
        trials,
        max_squared_difference: max_sq,
        changed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BadVertexCensus {
    pub n: usize,
    pub max_degree: usize,
    pub trials: usize,
    /// Mean over trials of `sum_v B(v)`.
    pub mean_total_probes: f64,
    /// `n · Δ^1.15`.
    pub reference: f64,
    /// `Δ^1.4`.
    pub bad_threshold: f64,
    pub bad_fraction: f64,
    /// Whether every run's probe count respected its decomposition bound.
    pub decomposition_holds: bool,
    pub max_probes: u64,
}

/// Estimates `E[B(v) | pi, L]` for every vertex by running the degree oracle
/// under fresh partitions.
pub fn bad_vertex_census(g: &Graph, cond: &Conditioning, trials: usize, seed: u64) -> Result<BadVertexCensus> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let n = g.n();
    let delta = g.max_degree();
    let mut rng = seed::rng(seed);
    let mut per_vertex = vec![0u64; n];
    let mut totals = Vec::with_capacity(trials);
    let mut decomposition_holds = true;
    let mut max_probes = 0;
    for _ in 0..trials {
        let x = cond.draw_indicator(n, &mut rng);
        let mut total = 0u64;
        for (v, acc) in per_vertex.iter_mut().enumerate() {
            let r = degree_oracle(g, cond.gl(), &cond.rho, &x, v, true)?;
            let b = r.ledger.vertex_probes;
            decomposition_holds &= b <= r.decomposition.bound();
            max_probes = max_probes.max(b);
            *acc += b;
            total += b;
        }
        totals.push(total as f64);
    }
    let d = delta.max(1) as f64;
    let bad_threshold = d.powf(1.4);
    let bad = per_vertex
        .iter()
        .filter(|&&s| s as f64 / trials as f64 > bad_threshold)
        .count();
    Ok(BadVertexCensus {
        n,
        max_degree: delta,
        trials,
        mean_total_probes: stats::mean(&totals),
        reference: n as f64 * d.powf(1.15),
        bad_threshold,
        bad_fraction: if n == 0 { 0.0 } else { bad as f64 / n as f64 },
        decomposition_holds,
        max_probes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivorCensus {
    pub n: usize,
    pub max_degree: usize,
    pub trials: usize,
    /// Per run, the fraction of vertices with residual degree above `Δ^0.99`.
    pub fractions: Vec<f64>,
    pub mean_fraction: f64,
    pub total_survivors: usize,
    pub max_machine_words: u64,
    pub machine_budget: u64,
    pub space_clean: bool,
}

/// Independent single runs of the partitioned algorithm.
pub fn survivor_census(g: &Graph, cfg: &PhaseConfig, trials: usize, seed: u64) -> Result<SurvivorCensus> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let mut fractions = Vec::with_capacity(trials);
    let (mut total, mut words, mut budget, mut clean) = (0, 0, 0, true);
    for t in 0..trials {
        let (_, rep) = partition_mm(g, cfg, seed::derive(seed, &[tag::TRIAL, t as u64]))?;
        total += rep.high_degree_survivors;
        fractions.push(rep.high_degree_survivors as f64 / g.n().max(1) as f64);
        words = words.max(rep.max_machine_words);
        budget = rep.machine_budget.max(budget);
        clean &= rep.space_clean;
    }
    Ok(SurvivorCensus {
        n: g.n(),
        max_degree: g.max_degree(),
        trials,
        mean_fraction: stats::mean(&fractions),
        fractions,
        total_survivors: total,
        max_machine_words: words,
        machine_budget: budget,
        space_clean: clean,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCheck {
    pub p: f64,
    pub beta: f64,
    pub trials: usize,
    pub vertex: usize,
    /// `ln(1/beta) / p`.
    pub threshold: f64,
    pub exceedances: usize,
    pub frequency: f64,
    pub sigma: f64,
    pub holds: bool,
    /// Exceedance frequency pooled over all vertices, for reference.
    pub pooled_frequency: f64,
}

/// Frequency with which `vertex` keeps residual degree above `ln(1/beta)/p`
/// after greedy on a fresh edge sample under fresh priorities.
pub fn residual_tail_check(g: &Graph, p: f64, beta: f64, vertex: usize, trials: usize, seed: u64) -> Result<TailCheck> {
    g.check_vertex(vertex)?;
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Config(format!("beta = {beta} must lie in (0, 1/2)")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let threshold = (1.0 / beta).ln() / p;
    let (mut hits, mut pooled) = (0, 0u64);
    for t in 0..trials {
        let rho = Priorities::random(g.m(), seed::derive(seed, &[tag::PRIORITY, t as u64]));
        let s = sample_and_greedy(g, p, &rho, seed::derive(seed, &[tag::SAMPLE, t as u64]))?;
        let res = s.residual_degrees(g);
        if res[vertex] as f64 > threshold {
            hits += 1;
        }
        pooled += res.iter().filter(|&&d| d as f64 > threshold).count() as u64;
    }
    let sigma = stats::binomial_sigma(beta, trials);
    let frequency = hits as f64 / trials as f64;
    Ok(TailCheck {
        p,
        beta,
        trials,
        vertex,
        threshold,
        exceedances: hits,
        frequency,
        sigma,
        holds: frequency <= beta + 3.0 * sigma,
        pooled_frequency: pooled as f64 / (trials * g.n().max(1)) as f64,
    })
}

/// Largest edge count for the exhaustive branch-and-bound search.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 30;
/// Largest vertex count for the augmenting-path search.
pub const EXACT_VERTEX_LIMIT: usize = 200;

/// A maximum matching by exhaustive search over edge subsets.
pub fn exhaustive_max_matching(g: &Graph) -> Result<Matching> {
    if g.m() > EXHAUSTIVE_EDGE_LIMIT {
        return Err(Error::TooLarge(format!(
            "exhaustive matching search over {} edges",
            g.m()
        )));
    }
    fn go(g: &Graph, e: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        if cur.len() + (g.m() - e) <= best.len() {
            return;
        }
        if e == g.m() {
            *best = cur.clone();
            return;
        }
        let (u, v) = g.endpoints(e);
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            cur.push(e);
            go(g, e + 1, used, cur, best);
            cur.pop();
            used[u] = false;
            used[v] = false;
        }
        go(g, e + 1, used, cur, best);
    }
    let mut best = Vec::new();
    go(g, 0, &mut vec![false; g.n()], &mut Vec::new(), &mut best);
    Matching::from_edges(g, best)
}

/// A maximum matching: exhaustive for at most 30 edges, otherwise the
/// general-graph augmenting-path algorithm for at most 200 vertices.
pub fn brute_force_max_matching(g: &Graph) -> Result<Matching> {
    if g.m() <= EXHAUSTIVE_EDGE_LIMIT {
        return exhaustive_max_matching(g);
    }
    if g.n() > EXACT_VERTEX_LIMIT {
        return Err(Error::TooLarge(format!("exact maximum matching on {} vertices", g.n())));
    }
    let pg: UnGraph<(), usize> = UnGraph::from_edges(g.edges().enumerate().map(|(e, (u, v))| (u as u32, v as u32, e)));
    let mm = petgraph::algo::maximum_matching(&pg);
    let ids = mm
        .edges()
        .map(|(a, b)| g.edge_between(a.index(), b.index()).expect("matched pair is an edge"));
    let m = Matching::from_edges(g, ids)?;
    debug_assert!(verify_matching(g, &m).valid);
    Ok(m)
}

pub const VERTEX_COVER_LIMIT: usize = 20;

/// Minimum vertex cover size by trying subsets in increasing size.
pub fn min_vertex_cover_size(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n > VERTEX_COVER_LIMIT {
        return Err(Error::TooLarge(format!("vertex cover search on {n} vertices")));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let covers = |mask: u32| edges.iter().all(|&(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1);
    let mut best = n;
    for mask in 0u32..1 << n {
        let size = mask.count_ones() as usize;
        if size < best && covers(mask) {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn single_edge() -> Graph {
        Graph::from_edges(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn exact_single_edge_two_partitions() {
        let g = single_edge();
        let cond = Conditioning::new(&g, &Priorities::random(1, 1), 1.0, 0, 2).unwrap();
        let e = exact_efron_stein(&g, &cond, 0).unwrap();
        // Z = x_b (1 - x_a): mean 1/4, variance 3/16; each coordinate flips
        // Z with probability 1/4, so the right-hand side is 1/4.
        assert!((e.variance - 3.0 / 16.0).abs() < 1e-12);
        assert!((e.es_bound - 0.25).abs() < 1e-12);
    }

    #[test]
    fn isolated_vertex_is_constant() {
        let g = Graph::from_edges(3, [(1, 2)]).unwrap();
        let cond = Conditioning::new(&g, &Priorities::random(1, 2), 1.0, 0, 2).unwrap();
        let e = exact_efron_stein(&g, &cond, 0).unwrap();
        assert_eq!((e.variance, e.es_bound), (0.0, 0.0));
        let z = z_statistics(&g, &cond, 0, 1, 50, 3).unwrap();
        assert!(z.samples.iter().all(|&s| s == 0));
        let es = efron_stein_check(&g, &cond, 0, 50, 3).unwrap();
        assert_eq!((es.variance, es.es_estimate), (0.0, 0.0));
    }

    #[test]
    fn path_differences_are_at_most_two() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        for keys in [vec![1, 2], vec![2, 1]] {
            let cond = Conditioning::new(&g, &Priorities::from_keys(keys), 1.0, 0, 2).unwrap();
            for mask in 0u32..8 {
                let x: Vec<bool> = (0..3).map(|b| mask >> b & 1 == 1).collect();
                let z = cond.z_value(&g, &x, 0);
                let mut y = x.clone();
                y[1] = !y[1];
                assert!(z.abs_diff(cond.z_value(&g, &y, 0)) <= 2);
            }
        }
    }

    #[test]
    fn single_partition_matches_residual_degree() {
        let g = generators::erdos_renyi(40, 5.0, 1).unwrap();
        let rho = Priorities::random(g.m(), 4);
        let cond = Conditioning::new(&g, &rho, 0.5, 9, 1).unwrap();
        let x = vec![true; g.n()];
        let matched = cond.partition_matched(&x);
        for v in 0..g.n() {
            if !matched[v] {
                let res = g.adjacency(v).iter().filter(|&&(u, _)| !matched[u as usize]).count();
                assert_eq!(cond.z_value(&g, &x, v), res);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (0, 4)]).unwrap();
        let cond = Conditioning::new(&g, &Priorities::random(g.m(), 5), 1.0, 0, 2).unwrap();
        let exact = exact_efron_stein(&g, &cond, 1).unwrap();
        let mc = efron_stein_check(&g, &cond, 1, 4000, 11).unwrap();
        assert!((mc.variance - exact.variance).abs() < 4.0 * mc.variance_std_error + 1e-9);
        assert!((mc.es_estimate - exact.es_bound).abs() < 4.0 * mc.es_std_error + 1e-9);
        assert!(exact.variance <= exact.es_bound + 1e-12);
        assert!(mc.max_squared_difference <= 4);
    }

    #[test]
    fn exact_matchings() {
        let p4 = generators::path(4);
        assert_eq!(brute_force_max_matching(&p4).unwrap().len(), 2);
        assert_eq!(brute_force_max_matching(&generators::complete(3)).unwrap().len(), 1);
        let petersen = Graph::from_edges(
            10,
            [
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (0, 4),
                (0, 5),
                (1, 6),
                (2, 7),
                (3, 8),
                (4, 9),
                (5, 7),
                (7, 9),
                (6, 9),
                (6, 8),
                (5, 8),
            ],
        )
        .unwrap();
        assert_eq!(exhaustive_max_matching(&petersen).unwrap().len(), 5);
        let k12 = generators::complete(12);
        assert_eq!(brute_force_max_matching(&k12).unwrap().len(), 6);
        assert!(brute_force_max_matching(&generators::path(500)).is_err());
    }

    #[test]
    fn vertex_cover_sizes() {
        assert_eq!(min_vertex_cover_size(&single_edge()).unwrap(), 1);
        assert_eq!(min_vertex_cover_size(&generators::star(5)).unwrap(), 1);
        assert_eq!(min_vertex_cover_size(&generators::complete(5)).unwrap(), 4);
        assert_eq!(min_vertex_cover_size(&generators::path(5)).unwrap(), 2);
    }

    #[test]
    fn tail_on_complete_graph() {
        let g = generators::complete(20);
        let t = residual_tail_check(&g, 0.5, 0.1, 0, 300, 1).unwrap();
        assert!(t.holds);
        assert!((t.threshold - 10f64.ln() / 0.5).abs() < 1e-12);
    }

    #[test]
    fn survivors_zero_when_greedy_is_maximal() {
        let g = Graph::from_edges(8, (0..4).flat_map(|a| (4..8).map(move |b| (a, b)))).unwrap();
        let cfg = PhaseConfig {
            p_exponent: 1e-9,
            k_exponent: 1e-9,
            ..PhaseConfig::default()
        };
        let s = survivor_census(&g, &cfg, 10, 2).unwrap();
        assert_eq!(s.total_survivors, 0);
    }

    #[test]
    fn census_on_empty_graph() {
        let g = Graph::empty(6);
        let cond = Conditioning::new(&g, &Priorities::random(0, 1), 0.5, 1, 2).unwrap();
        let c = bad_vertex_census(&g, &cond, 3, 1).unwrap();
        assert_eq!(c.mean_total_probes, 0.0);
    }
}
