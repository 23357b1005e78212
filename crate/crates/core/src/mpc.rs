//! Logical MPC accounting: machines with word budgets, synchronous rounds,
//! and per-round ledgers. Machines are work items, not threads; the ledger is
//! the contract.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub machines: usize,
    pub space_per_machine: u64,
    pub total_space_cap: u64,
}

impl MachineSpec {
    /// Takes the machine count as `ceil(total_space_cap / space_per_machine)`.
    pub fn new(space_per_machine: u64, total_space_cap: u64) -> Result<Self> {
        if space_per_machine == 0 {
            return Err(Error::Config("space per machine must be at least 1 word".into()));
        }
        if total_space_cap < space_per_machine {
            return Err(Error::Config(format!(
                "total space cap {total_space_cap} is below space per machine {space_per_machine}"
            )));
        }
        Ok(MachineSpec {
            machines: total_space_cap.div_ceil(space_per_machine) as usize,
            space_per_machine,
            total_space_cap,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MachineSpace,
    MachineMessages,
    TotalSpace,
    NoSuchMachine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub machine: Option<usize>,
    pub amount: u64,
    pub limit: u64,
}

/// Words held and words received per machine during one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub label: String,
    pub spec: MachineSpec,
    pub words_used: Vec<u64>,
    pub message_words: Vec<u64>,
    pub violations: Vec<Violation>,
    /// Number of charge operations applied, zero-word ones included.
    pub charges: u64,
}

impl RoundLog {
    pub fn new(round: usize, label: impl Into<String>, spec: MachineSpec) -> Self {
        RoundLog {
            round,
            label: label.into(),
            spec,
            words_used: Vec::new(),
            message_words: Vec::new(),
            violations: Vec::new(),
            charges: 0,
        }
    }

    fn slot(&mut self, machine: usize) -> bool {
        if machine >= self.spec.machines {
            self.record(
                ViolationKind::NoSuchMachine,
                Some(machine),
                machine as u64 + 1,
                self.spec.machines as u64,
            );
            return false;
        }
        if self.words_used.len() <= machine {
            self.words_used.resize(machine + 1, 0);
            self.message_words.resize(machine + 1, 0);
        }
        true
    }

    fn record(&mut self, kind: ViolationKind, machine: Option<usize>, amount: u64, limit: u64) {
        match self
            .violations
            .iter_mut()
            .find(|v| v.kind == kind && v.machine == machine)
        {
            Some(v) => v.amount = v.amount.max(amount),
            None => self.violations.push(Violation {
                kind,
                machine,
                amount,
                limit,
            }),
        }
    }

    /// Add `words` of local storage to `machine`. Budget overruns are recorded
    /// as violations, never dropped.
    pub fn charge(&mut self, machine: usize, words: u64) {
        self.charges += 1;
        if !self.slot(machine) {
            return;
        }
        self.words_used[machine] += words;
        let used = self.words_used[machine];
        if used > self.spec.space_per_machine {
            self.record(
                ViolationKind::MachineSpace,
                Some(machine),
                used,
                self.spec.space_per_machine,
            );
        }
        let total = self.total_words();
        if total > self.spec.total_space_cap {
            self.record(ViolationKind::TotalSpace, None, total, self.spec.total_space_cap);
        }
    }

    /// Add `words` received by `machine` this round.
    pub fn charge_messages(&mut self, machine: usize, words: u64) {
        self.charges += 1;
        if !self.slot(machine) {
            return;
        }
        self.message_words[machine] += words;
        let got = self.message_words[machine];
        if got > self.spec.space_per_machine {
            self.record(
                ViolationKind::MachineMessages,
                Some(machine),
                got,
                self.spec.space_per_machine,
            );
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_words(&self) -> u64 {
        self.words_used.iter().copied().max().unwrap_or(0)
    }

    pub fn total_words(&self) -> u64 {
        self.words_used.iter().sum()
    }
}

/// Functional form of [`RoundLog::charge`].
pub fn charge_round(mut log: RoundLog, machine: usize, words: u64) -> RoundLog {
    log.charge(machine, words);
    log
}

/// Words needed to hold a graph: one per vertex id plus one per edge endpoint.
pub fn space_of_subgraph(g: &Graph) -> u64 {
    space_of(g.n(), g.m())
}

#[inline]
pub fn space_of(vertices: usize, edges: usize) -> u64 {
    vertices as u64 + 2 * edges as u64
}

/// Vertex coloring `chi : V -> [k]`. Stored 0-based: the "first" partition
/// of the analysis is index 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    pub k: usize,
    pub chi: Vec<u32>,
}

impl PartitionAssignment {
    #[inline]
    pub fn part(&self, v: usize) -> usize {
        self.chi[v] as usize
    }

    /// Indicator vector of partition `i`.
    pub fn indicator(&self, i: usize) -> Vec<bool> {
        self.chi.iter().map(|&c| c as usize == i).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &c in &self.chi {
            s[c as usize] += 1;
        }
        s
    }
}

/// Each vertex picks a partition independently and uniformly from `k`.
pub fn assign_partitions(n: usize, k: usize, seed: u64) -> Result<PartitionAssignment> {
    if k == 0 {
        return Err(Error::ZeroPartitions);
    }
    let mut rng = seed::rng(seed);
    let chi = if k == 1 {
        vec![0; n]
    } else {
        (0..n).map(|_| rng.random_range(0..k as u32)).collect()
    };
    Ok(PartitionAssignment { k, chi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: u64, cap: u64) -> MachineSpec {
        MachineSpec::new(s, cap).unwrap()
    }

    #[test]
    fn machine_count_rounds_up() {
        assert_eq!(spec(10, 95).machines, 10);
        assert_eq!(spec(10, 100).machines, 10);
        assert!(MachineSpec::new(0, 10).is_err());
        assert!(MachineSpec::new(10, 5).is_err());
    }

    #[test]
    fn zero_charge_only_touches() {
        let log = RoundLog::new(0, "r", spec(10, 100));
        let after = charge_round(log.clone(), 3, 0);
        assert_eq!(after.charges, 1);
        assert_eq!(after.max_words(), 0);
        assert!(after.is_clean());
    }

    #[test]
    fn overrun_is_flagged() {
        let log = charge_round(RoundLog::new(0, "r", spec(10, 100)), 2, 11);
        assert_eq!(
            log.violations,
            vec![Violation {
                kind: ViolationKind::MachineSpace,
                machine: Some(2),
                amount: 11,
                limit: 10
            }]
        );
        let mut log = RoundLog::new(0, "r", spec(10, 15));
        log.charge(0, 10);
        log.charge(1, 10);
        assert!(log.violations.iter().any(|v| v.kind == ViolationKind::TotalSpace));
        let mut log = RoundLog::new(0, "r", spec(10, 20));
        log.charge(5, 1);
        assert_eq!(log.violations[0].kind, ViolationKind::NoSuchMachine);
        log.charge_messages(0, 12);
        assert!(log.violations.iter().any(|v| v.kind == ViolationKind::MachineMessages));
    }

    #[test]
    fn space_costing_rule() {
        assert_eq!(space_of_subgraph(&Graph::empty(5)), 5);
        assert_eq!(space_of_subgraph(&Graph::from_edges(2, [(0, 1)]).unwrap()), 4);
        assert_eq!(space_of_subgraph(&Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()), 7);
    }

    #[test]
    fn partitions_basic() {
        let p = assign_partitions(50, 1, 3).unwrap();
        assert!(p.chi.iter().all(|&c| c == 0));
        assert_eq!(assign_partitions(10, 0, 1), Err(Error::ZeroPartitions));
        let a = assign_partitions(1000, 7, 42).unwrap();
        assert_eq!(a, assign_partitions(1000, 7, 42).unwrap());
        assert_eq!(a.sizes().iter().sum::<usize>(), 1000);
        let ind = a.indicator(0);
        assert!(ind.iter().zip(&a.chi).all(|(&x, &c)| x == (c == 0)));
    }
}
