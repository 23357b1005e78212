//! The degree-reduction pipeline: partitioned greedy on an edge sample,
//! best-of-t amplification, the sampled cleanup of high-degree leftovers,
//! the single-machine gather step, and the phase driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Subgraph};
use crate::greedy::{greedy_in_order, greedy_mm};
use crate::matching::{residual_degrees, verify_matching, Matching};
use crate::mpc::{assign_partitions, space_of, space_of_subgraph, MachineSpec, RoundLog};
use crate::priority::Priorities;
use crate::seed::{self, tag};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Retries allowed per phase after the first attempt.
pub const PHASE_RETRIES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseConfig {
    /// Edge-sample probability is `Δ^-p_exponent`.
    pub p_exponent: f64,
    /// Partition count is `max(1, floor(Δ^k_exponent))`.
    pub k_exponent: f64,
    /// Survivors of a partitioned run have residual degree `> Δ^high_degree_exponent`.
    pub high_degree_exponent: f64,
    /// Cleanup and gather threshold `τ = Δ^cleanup_threshold_exponent`.
    pub cleanup_threshold_exponent: f64,
    /// Cleanup sample probability `q = Δ^-cleanup_sample_exponent`.
    pub cleanup_sample_exponent: f64,
    /// Reference cap `n / Δ^survivor_cap_exponent` on the amplified survivor count.
    pub survivor_cap_exponent: f64,
    pub repetitions: usize,
    /// Degree at or below which the residual graph is finished on one machine.
    pub terminal_degree: usize,
    /// `c_s` in the per-machine budget `c_s · n / Δ^(2·k_exponent + p_exponent - 1)`.
    pub space_constant: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            p_exponent: 0.85,
            k_exponent: 0.1,
            high_degree_exponent: 0.99,
            cleanup_threshold_exponent: 0.999,
            cleanup_sample_exponent: 0.99,
            survivor_cap_exponent: 0.02,
            repetitions: 8,
            terminal_degree: 32,
            space_constant: 8.0,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        let exps = [
            ("p_exponent", self.p_exponent),
            ("k_exponent", self.k_exponent),
            ("high_degree_exponent", self.high_degree_exponent),
            ("cleanup_threshold_exponent", self.cleanup_threshold_exponent),
            ("cleanup_sample_exponent", self.cleanup_sample_exponent),
            ("survivor_cap_exponent", self.survivor_cap_exponent),
        ];
        for (name, x) in exps {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Config(format!("{name} = {x} must lie in (0, 1)")));
            }
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.terminal_degree == 0 {
            return Err(Error::Config("terminal_degree must be at least 1".into()));
        }
        if !(self.space_constant > 0.0 && self.space_constant.is_finite()) {
            return Err(Error::Config(format!(
                "space_constant = {} must be positive",
                self.space_constant
            )));
        }
        Ok(())
    }

    fn pow(delta: usize, e: f64) -> f64 {
        (delta.max(1) as f64).powf(e)
    }

    pub fn sample_probability(&self, delta: usize) -> f64 {
        Self::pow(delta, -self.p_exponent).min(1.0)
    }

    pub fn partition_count(&self, delta: usize) -> usize {
        (Self::pow(delta, self.k_exponent).floor() as usize).max(1)
    }

    pub fn high_degree_threshold(&self, delta: usize) -> f64 {
        Self::pow(delta, self.high_degree_exponent)
    }

    pub fn cleanup_threshold(&self, delta: usize) -> f64 {
        Self::pow(delta, self.cleanup_threshold_exponent)
    }

    pub fn cleanup_probability(&self, delta: usize) -> f64 {
        Self::pow(delta, -self.cleanup_sample_exponent).min(1.0)
    }

    pub fn survivor_cap(&self, n: usize, delta: usize) -> f64 {
        n as f64 / Self::pow(delta, self.survivor_cap_exponent)
    }

    /// Exponent of `Δ` in the expected size of one partition's sampled graph.
    pub fn space_exponent(&self) -> f64 {
        (2.0 * self.k_exponent + self.p_exponent - 1.0).max(0.0)
    }

    /// Per-machine word budget for a partitioned round on `n` vertices.
    pub fn machine_budget(&self, n: usize, delta: usize) -> u64 {
        let s = self.space_constant * n.max(1) as f64 / Self::pow(delta, self.space_exponent());
        (s.ceil() as u64).max(1)
    }
}

/// Result of one degree-reduction step or one partitioned run.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    #[serde(skip)]
    pub matching: Matching,
    pub matching_size: usize,
    pub input_max_degree: usize,
    pub residual_max_degree: usize,
    /// Survivors (residual degree above `Δ^0.99`) of the selected partitioned run.
    pub high_degree_survivors: usize,
    /// Survivor count of every partitioned run, in repetition order.
    pub survivor_counts: Vec<usize>,
    /// Vertices above `τ` before cleanup, after cleanup, and gathered.
    pub cleanup_candidates: usize,
    pub after_cleanup_high: usize,
    pub gathered: usize,
    pub round_cost: usize,
    pub space_clean: bool,
    /// Largest partition load in the partitioned round, and its budget.
    pub max_machine_words: u64,
    pub machine_budget: u64,
    /// True if `Δ` was already at the terminal constant and nothing ran.
    pub skipped: bool,
    pub rounds: Vec<RoundLog>,
}

impl PhaseReport {
    fn empty(g: &Graph) -> Self {
        PhaseReport {
            matching: Matching::empty(g.n()),
            matching_size: 0,
            input_max_degree: g.max_degree(),
            residual_max_degree: g.max_degree(),
            high_degree_survivors: 0,
            survivor_counts: Vec::new(),
            cleanup_candidates: 0,
            after_cleanup_high: 0,
            gathered: 0,
            round_cost: 0,
            space_clean: true,
            max_machine_words: 0,
            machine_budget: 0,
            skipped: false,
            rounds: Vec::new(),
        }
    }
}

fn count_above(res: &[u32], threshold: f64) -> usize {
    res.iter().filter(|&&d| d as f64 > threshold).count()
}

struct PartitionRun {
    matching: Matching,
    survivors: usize,
    words: Vec<u64>,
}

/// One run of the partitioned algorithm: a single priority draw and edge
/// sample, a uniform vertex partition, and greedy on each `G^L[V_i]`.
fn partition_run(g: &Graph, cfg: &PhaseConfig, delta: usize, seed: u64) -> Result<PartitionRun> {
    let p = cfg.sample_probability(delta);
    let k = cfg.partition_count(delta);
    let rho = Priorities::hashed(g.m(), seed::derive(seed, &[tag::PRIORITY]));
    let sample = g.edge_sample(p, seed::derive(seed, &[tag::SAMPLE]))?;
    let parts = assign_partitions(g.n(), k, seed::derive(seed, &[tag::PARTITION]))?;

    let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
    let mut local = vec![0u32; g.n()];
    for (v, slot) in local.iter_mut().enumerate() {
        let i = parts.part(v);
        *slot = members[i].len() as u32;
        members[i].push(v as u32);
    }
    // Local ids are monotone in parent ids, so each bucket stays in
    // lexicographic edge order.
    // Per partition: local edge endpoints and the matching sample edge ids.
    type Bucket = (Vec<(u32, u32)>, Vec<u32>);
    let mut buckets: Vec<Bucket> = vec![(Vec::new(), Vec::new()); k];
    for (le, (u, v)) in sample.graph.edges().enumerate() {
        let i = parts.part(u);
        if parts.part(v) == i {
            buckets[i].0.push((local[u], local[v]));
            buckets[i].1.push(sample.edge_map[le]);
        }
    }
    drop(sample);

    let pieces: Vec<(Vec<usize>, u64)> = members
        .into_par_iter()
        .zip(buckets.into_par_iter())
        .map(|(vertex_map, (edges, edge_map))| {
            let sub = Subgraph {
                graph: Graph::from_sorted_unique(vertex_map.len(), edges),
                vertex_map,
                edge_map,
            };
            let words = space_of_subgraph(&sub.graph);
            let local_m =
                greedy_mm(&sub.graph, &rho.restrict(&sub.edge_map)).expect("restricted priorities cover the subgraph");
            (local_m.edges().iter().map(|&e| sub.parent_edge(e)).collect(), words)
        })
        .collect();

    let mut matching = Matching::empty(g.n());
    let mut words = Vec::with_capacity(k);
    for (edges, w) in pieces {
        for e in edges {
            assert!(matching.try_add(g, e), "partition matchings overlap at edge {e}");
        }
        words.push(w);
    }
    let survivors = count_above(
        &residual_degrees(g, matching.matched()),
        cfg.high_degree_threshold(delta),
    );
    Ok(PartitionRun {
        matching,
        survivors,
        words,
    })
}

fn repetition_seed(seed: u64, r: usize) -> u64 {
    if r == 0 {
        seed
    } else {
        seed::derive(seed, &[tag::REPETITION, r as u64])
    }
}

/// Partitioned greedy with `t` independent repetitions charged to one round.
/// Partition `i` of repetition `r` goes to machine `(r·k + i) mod M`, so
/// loads add up when there are fewer machines than partitions. Keeps the
/// repetition with the fewest survivors (earliest on ties).
fn amplified(g: &Graph, cfg: &PhaseConfig, delta: usize, seed: u64, t: usize, round: usize) -> Result<PhaseReport> {
    let budget = cfg.machine_budget(g.n(), delta);
    let cap = (t as u64 * space_of_subgraph(g)).max(budget);
    let spec = MachineSpec::new(budget, cap)?;
    let mut log = RoundLog::new(round, "partitioned-greedy", spec);
    let k = cfg.partition_count(delta);

    let mut best: Option<Matching> = None;
    let mut counts = Vec::with_capacity(t);
    for r in 0..t {
        let run = partition_run(g, cfg, delta, repetition_seed(seed, r))?;
        for (i, &w) in run.words.iter().enumerate() {
            let machine = (r * k + i) % spec.machines;
            log.charge_messages(machine, w);
            log.charge(machine, w);
        }
        let improves = counts.iter().all(|&c| run.survivors < c);
        counts.push(run.survivors);
        if improves {
            best = Some(run.matching);
        }
    }
    let matching = best.expect("at least one repetition");
    let winner = *counts.iter().min().unwrap();
    let res = residual_degrees(g, matching.matched());
    Ok(PhaseReport {
        matching_size: matching.len(),
        matching,
        input_max_degree: delta,
        residual_max_degree: res.iter().copied().max().unwrap_or(0) as usize,
        high_degree_survivors: winner,
        survivor_counts: counts,
        round_cost: 1,
        space_clean: log.is_clean(),
        max_machine_words: log.max_words(),
        machine_budget: budget,
        rounds: vec![log],
        ..PhaseReport::empty(g)
    })
}

/// A single partitioned run with the given seed.
pub fn partition_mm(g: &Graph, cfg: &PhaseConfig, seed: u64) -> Result<(Matching, PhaseReport)> {
    cfg.validate()?;
    if g.m() == 0 {
        return Ok((Matching::empty(g.n()), PhaseReport::empty(g)));
    }
    let rep = amplified(g, cfg, g.max_degree(), seed, 1, 0)?;
    Ok((rep.matching.clone(), rep))
}

/// Best of `cfg.repetitions` partitioned runs by survivor count. Repetition 0
/// uses `seed` itself, so one repetition reproduces [`partition_mm`].
/// Graphs already at the terminal degree are returned untouched and marked
/// skipped.
pub fn amplified_partition_mm(g: &Graph, cfg: &PhaseConfig, seed: u64) -> Result<(Matching, PhaseReport)> {
    cfg.validate()?;
    let delta = g.max_degree();
    if delta <= cfg.terminal_degree || g.m() == 0 {
        let mut rep = PhaseReport::empty(g);
        rep.skipped = true;
        return Ok((rep.matching.clone(), rep));
    }
    let rep = amplified(g, cfg, delta, seed, cfg.repetitions, 0)?;
    Ok((rep.matching.clone(), rep))
}

#[derive(Clone, Debug)]
pub struct CleanupOutcome {
    /// `M'`, on the ids of the input graph.
    pub matching: Matching,
    /// Vertices above `τ` in the residual graph before cleanup.
    pub candidates: usize,
    pub sampled_edges: usize,
    pub log: RoundLog,
}

fn cleanup_with(
    g: &Graph,
    m: &Matching,
    delta: usize,
    cfg: &PhaseConfig,
    seed: u64,
    spec: MachineSpec,
    round: usize,
) -> Result<CleanupOutcome> {
    let tau = cfg.cleanup_threshold(delta);
    let res = residual_degrees(g, m.matched());
    let high: Vec<bool> = res.iter().map(|&d| d as f64 > tau).collect();
    let candidates = high.iter().filter(|&&h| h).count();
    let mut log = RoundLog::new(round, "cleanup", spec);
    let mut out = Matching::empty(g.n());
    if candidates == 0 {
        log.charge(0, 0);
        return Ok(CleanupOutcome {
            matching: out,
            candidates,
            sampled_edges: 0,
            log,
        });
    }
    let incident: Vec<usize> = g
        .edges()
        .enumerate()
        .filter(|&(_, (u, v))| !m.is_matched(u) && !m.is_matched(v) && (high[u] || high[v]))
        .map(|(e, _)| e)
        .collect();
    let picks = crate::graph::sample_indices(incident.len(), cfg.cleanup_probability(delta), seed)?;
    let sampled: Vec<usize> = picks.into_iter().map(|i| incident[i]).collect();
    let mut touched = vec![false; g.n()];
    for &e in &sampled {
        let (u, v) = g.endpoints(e);
        touched[u] = true;
        touched[v] = true;
        out.try_add(g, e);
    }
    let words = space_of(touched.iter().filter(|&&t| t).count(), sampled.len());
    log.charge_messages(0, words);
    log.charge(0, words);
    Ok(CleanupOutcome {
        matching: out,
        candidates,
        sampled_edges: sampled.len(),
        log,
    })
}

/// Sample each residual edge touching a vertex of residual degree above `τ`
/// with probability `q`, and greedily match the sample on one machine in
/// ascending edge-id order.
pub fn leftover_cleanup(g: &Graph, m: &Matching, cfg: &PhaseConfig, seed: u64) -> Result<CleanupOutcome> {
    cfg.validate()?;
    if m.n() != g.n() {
        return Err(Error::UniverseMismatch {
            left: g.n(),
            right: m.n(),
        });
    }
    if !verify_matching(g, m).valid {
        return Err(Error::Config("input matching is not valid in the graph".into()));
    }
    let delta = g.max_degree();
    let spec = MachineSpec::new(
        cfg.machine_budget(g.n(), delta),
        space_of_subgraph(g).max(cfg.machine_budget(g.n(), delta)),
    )?;
    cleanup_with(g, m, delta, cfg, seed, spec, 0)
}

/// Amplified partitioned greedy, cleanup, then gathering every vertex whose
/// residual degree is still at least `Δ^0.999` on one machine and extending
/// greedily there. Fails if the residual max degree is not below `Δ^0.999`.
pub fn degree_reduction_phase(g: &Graph, cfg: &PhaseConfig, seed: u64) -> Result<(Matching, PhaseReport)> {
    cfg.validate()?;
    let delta = g.max_degree();
    if delta <= cfg.terminal_degree {
        return Err(Error::AtTerminalDegree {
            max_degree: delta,
            terminal: cfg.terminal_degree,
        });
    }
    let mut rep = amplified(g, cfg, delta, seed::derive(seed, &[tag::PARTITION]), cfg.repetitions, 0)?;
    let spec = rep.rounds[0].spec;
    let mut m = rep.matching.clone();

    let clean = cleanup_with(g, &m, delta, cfg, seed::derive(seed, &[tag::CLEANUP]), spec, 1)?;
    for &e in clean.matching.edges() {
        assert!(m.try_add(g, e), "cleanup edge {e} touches a matched vertex");
    }
    rep.cleanup_candidates = clean.candidates;
    rep.rounds.push(clean.log);

    let tau = cfg.cleanup_threshold(delta);
    let res = residual_degrees(g, m.matched());
    let gather: Vec<bool> = res.iter().map(|&d| d as f64 >= tau).collect();
    rep.after_cleanup_high = res.iter().filter(|&&d| d as f64 > tau).count();
    rep.gathered = gather.iter().filter(|&&h| h).count();
    let mut log = RoundLog::new(2, "gather", spec);
    if rep.gathered > 0 {
        let edges: Vec<usize> = g
            .edges()
            .enumerate()
            .filter(|&(_, (u, v))| !m.is_matched(u) && !m.is_matched(v) && (gather[u] || gather[v]))
            .map(|(e, _)| e)
            .collect();
        let mut touched = vec![false; g.n()];
        for &e in &edges {
            let (u, v) = g.endpoints(e);
            touched[u] = true;
            touched[v] = true;
            m.try_add(g, e);
        }
        let words = space_of(touched.iter().filter(|&&t| t).count(), edges.len());
        log.charge_messages(0, words);
        log.charge(0, words);
    } else {
        log.charge(0, 0);
    }
    rep.rounds.push(log);

    let residual = residual_degrees(g, m.matched()).into_iter().max().unwrap_or(0) as usize;
    if residual as f64 >= tau {
        return Err(Error::PhaseFailure {
            residual,
            threshold: tau,
        });
    }
    rep.residual_max_degree = residual;
    rep.matching_size = m.len();
    rep.matching = m.clone();
    rep.round_cost = rep.rounds.len();
    rep.space_clean = rep.rounds.iter().all(RoundLog::is_clean);
    Ok((m, rep))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DriverMode {
    /// Run phases until the residual max degree is at most the terminal constant.
    LogLog,
    /// Run phases until the residual max degree is at most `n^delta`.
    ConstantDelta { delta: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSummary {
    pub phase: usize,
    pub attempts: usize,
    pub vertices: usize,
    pub edges: usize,
    pub input_max_degree: usize,
    pub residual_max_degree: usize,
    pub high_degree_survivors: usize,
    /// Mean survivor fraction over all partitioned repetitions of the phase.
    pub survivor_fraction: f64,
    pub cleanup_candidates: usize,
    pub gathered: usize,
    pub matched_edges: usize,
    pub rounds: usize,
    pub space_clean: bool,
    pub max_machine_words: u64,
    pub machine_budget: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriverSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub mode: DriverMode,
    pub n: usize,
    pub m: usize,
    pub input_max_degree: usize,
    pub stop_degree: f64,
    pub phase_count: usize,
    pub phases: Vec<PhaseSummary>,
    pub retries: usize,
    pub finish_max_degree: usize,
    pub finish_edges: usize,
    pub rounds: usize,
    pub space_clean: bool,
    pub matching_size: usize,
    pub maximal: bool,
}

/// Repeated degree-reduction phases on the shrinking residual graph, then
/// the residual graph is matched greedily on one machine. Each phase is
/// retried with fresh seeds up to [`PHASE_RETRIES`] times.
pub fn maximal_matching_driver(
    g: &Graph,
    cfg: &PhaseConfig,
    mode: DriverMode,
    seed: u64,
) -> Result<(Matching, DriverSummary)> {
    cfg.validate()?;
    let stop = match mode {
        DriverMode::LogLog => cfg.terminal_degree as f64,
        DriverMode::ConstantDelta { delta } => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::Config(format!("delta = {delta} must lie in (0, 1)")));
            }
            (g.n().max(1) as f64).powf(delta).max(cfg.terminal_degree as f64)
        }
    };

    let mut matching = Matching::empty(g.n());
    let mut current = Subgraph::identity(g.clone());
    let mut phases = Vec::new();
    let mut retries = 0;
    let mut rounds = 0;
    let mut clean = true;

    while current.graph.max_degree() as f64 > stop {
        let index = phases.len();
        let mut attempt = 0;
        let (local, rep) = loop {
            let s = if attempt == 0 {
                seed::derive(seed, &[tag::PHASE, index as u64])
            } else {
                seed::derive(seed, &[tag::PHASE, index as u64, tag::RETRY, attempt as u64])
            };
            match degree_reduction_phase(&current.graph, cfg, s) {
                Ok(ok) => break ok,
                Err(e @ Error::PhaseFailure { .. }) => {
                    if attempt == PHASE_RETRIES {
                        return Err(Error::DriverFailure {
                            phase: index,
                            attempts: attempt + 1,
                            last: Box::new(e),
                        });
                    }
                    attempt += 1;
                    retries += 1;
                }
                Err(e) => return Err(e),
            }
        };
        for &e in local.edges() {
            assert!(
                matching.try_add(g, current.parent_edge(e)),
                "phase output conflicts with earlier phases"
            );
        }
        let gn = current.graph.n();
        let t = rep.survivor_counts.len().max(1) as f64;
        phases.push(PhaseSummary {
            phase: index,
            attempts: attempt + 1,
            vertices: gn,
            edges: current.graph.m(),
            input_max_degree: rep.input_max_degree,
            residual_max_degree: rep.residual_max_degree,
            high_degree_survivors: rep.high_degree_survivors,
            survivor_fraction: rep.survivor_counts.iter().sum::<usize>() as f64 / t / gn.max(1) as f64,
            cleanup_candidates: rep.cleanup_candidates,
            gathered: rep.gathered,
            matched_edges: local.len(),
            rounds: rep.round_cost,
            space_clean: rep.space_clean,
            max_machine_words: rep.max_machine_words,
            machine_budget: rep.machine_budget,
        });
        rounds += rep.round_cost;
        clean &= rep.space_clean;

        let res = residual_degrees(&current.graph, local.matched());
        let keep: Vec<bool> = res.iter().map(|&d| d > 0).collect();
        let next = current.graph.induced_by_mask(&keep);
        current = current.compose(next);
    }

    // Finish: the whole residual graph on one machine, ascending edge id.
    let finish_max_degree = current.graph.max_degree();
    let words = space_of_subgraph(&current.graph);
    let budget = (current.graph.n() as f64 * (1.0 + stop)).ceil().max(1.0) as u64;
    let mut log = RoundLog::new(rounds, "finish", MachineSpec::new(budget, budget)?);
    log.charge_messages(0, words);
    log.charge(0, words);
    clean &= log.is_clean();
    rounds += 1;
    let order: Vec<usize> = (0..current.graph.m()).collect();
    let finish = greedy_in_order(&current.graph, &order);
    for &e in finish.edges() {
        assert!(
            matching.try_add(g, current.parent_edge(e)),
            "finish edge conflicts with earlier phases"
        );
    }

    let check = verify_matching(g, &matching);
    if !check.valid || !check.maximal {
        let edge = match check.violation {
            Some(crate::matching::MatchingViolation::Addable { edge }) => edge,
            _ => usize::MAX,
        };
        return Err(Error::NotMaximal { edge });
    }
    let summary = DriverSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        seed,
        mode,
        n: g.n(),
        m: g.m(),
        input_max_degree: g.max_degree(),
        stop_degree: stop,
        phase_count: phases.len(),
        phases,
        retries,
        finish_max_degree,
        finish_edges: current.graph.m(),
        rounds,
        space_clean: clean,
        matching_size: matching.len(),
        maximal: check.maximal,
    };
    Ok((matching, summary))
}

/// Matched vertices of a maximal matching; a vertex cover at most twice the
/// minimum.
pub fn vertex_cover_2approx(g: &Graph, m: &Matching) -> Result<Vec<usize>> {
    let check = verify_matching(g, m);
    if !check.valid {
        return Err(Error::Config("matching is not valid in the graph".into()));
    }
    if let Some(crate::matching::MatchingViolation::Addable { edge }) = check.violation {
        return Err(Error::NotMaximal { edge });
    }
    Ok(m.matched_vertices().collect())
}
