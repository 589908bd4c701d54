//! Breadth-first exploration of transaction sequences.
//!
//! Both strategies execute every public function at depth 1 and apply the
//! same two pruning rules to end states. `RawPruned` additionally continues
//! from a transaction only into the functions that read something it may
//! have written.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::depgraph::{compute_raw_map, compute_usage, RawMap, UsageTable};
use crate::detectors::{run_all, DetectorContext, Finding, FindingKey};
use crate::frontend::{lower_contract, parse_source, Cfg, ContractUnit, FrontendError};
use crate::solver::{Solver, SolverBudget, SolverError};
use crate::symcore::{
    exec_transaction, ExecError, ExecLimits, TermKind, TxEndState, TxOutcome, WorldState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Strategy {
    #[serde(rename = "brute")]
    BruteForce,
    #[serde(rename = "raw")]
    RawPruned,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::BruteForce, Strategy::RawPruned];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::BruteForce => "brute",
            Strategy::RawPruned => "raw",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" => Ok(Strategy::BruteForce),
            "raw" => Ok(Strategy::RawPruned),
            other => Err(format!(
                "unknown strategy `{other}` (expected brute or raw)"
            )),
        }
    }
}

/// A parsed and lowered contract with its dependency analysis.
#[derive(Debug, Clone)]
pub struct ContractBundle {
    pub unit: ContractUnit,
    pub cfgs: Vec<Cfg>,
    pub usage: UsageTable,
    pub raw: RawMap,
}

impl ContractBundle {
    pub fn analyze(source: &str) -> Result<ContractBundle, FrontendError> {
        Self::from_unit(parse_source(source)?)
    }

    pub fn from_unit(unit: ContractUnit) -> Result<ContractBundle, FrontendError> {
        let cfgs = lower_contract(&unit)?;
        let usage = compute_usage(&cfgs);
        let raw = compute_raw_map(&usage);
        Ok(ContractBundle {
            unit,
            cfgs,
            usage,
            raw,
        })
    }

    pub fn name(&self) -> &str {
        &self.unit.name
    }

    /// Public functions in declaration order.
    pub fn public_functions(&self) -> Vec<String> {
        self.cfgs.iter().map(|c| c.function.clone()).collect()
    }

    pub fn cfg(&self, function: &str) -> Option<&Cfg> {
        self.cfgs.iter().find(|c| c.function == function)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub exec: ExecLimits,
    pub solver: SolverBudget,
    /// Wall-clock budget for one exploration, checked between transactions.
    pub timeout: Option<Duration>,
}

impl Limits {
    pub fn with_width(width: u32) -> Limits {
        let mut l = Limits::default();
        l.exec.width = width;
        l
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExplorationStats {
    /// Distinct function sequences executed, indexed by depth - 1.
    pub sequences_started: Vec<u64>,
    /// Symbolic transactions executed (one per frontier state and
    /// candidate), indexed by depth - 1.
    pub transactions: Vec<u64>,
    /// Feasible end states produced, indexed by depth - 1.
    pub end_states: Vec<u64>,
    pub end_states_pruned_rule1: u64,
    pub end_states_pruned_rule2: u64,
    pub end_states_pruned_raw: u64,
    pub solver_calls: u64,
    /// Solver Unknown answers, at branches and in detectors.
    pub unknowns: u64,
    pub loop_drops: u64,
    pub truncated: bool,
    pub timed_out: bool,
    /// Seconds per depth.
    pub wall_time: Vec<f64>,
}

impl ExplorationStats {
    fn new(depth: u32) -> ExplorationStats {
        let n = depth as usize;
        ExplorationStats {
            sequences_started: vec![0; n],
            transactions: vec![0; n],
            end_states: vec![0; n],
            wall_time: vec![0.0; n],
            ..ExplorationStats::default()
        }
    }

    pub fn total_sequences(&self) -> u64 {
        self.sequences_started.iter().sum()
    }

    pub fn total_time(&self) -> f64 {
        self.wall_time.iter().sum()
    }

    /// The same stats with timings zeroed, for comparisons.
    pub fn without_timing(&self) -> ExplorationStats {
        ExplorationStats {
            wall_time: vec![0.0; self.wall_time.len()],
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Prune {
    Keep,
    PruneRule1,
    PruneRule2,
}

/// Reverted and selfdestructed states end a sequence; so do states that
/// left storage untouched, since continuing from them repeats earlier work.
pub fn prune_end_state(s: &TxEndState) -> Prune {
    match s.terminator {
        TermKind::Revert | TermKind::Selfdestruct => Prune::PruneRule1,
        _ if !s.wrote_storage => Prune::PruneRule2,
        _ => Prune::Keep,
    }
}

pub fn candidate_successors(
    strategy: Strategy,
    raw: &RawMap,
    prev_fn: &str,
    all_public: &[String],
) -> Vec<String> {
    match strategy {
        Strategy::BruteForce => all_public.to_vec(),
        Strategy::RawPruned => {
            let dependents = raw.inverse_deps.get(prev_fn);
            all_public
                .iter()
                .filter(|f| dependents.is_some_and(|d| d.contains(*f)))
                .cloned()
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("no public function named `{0}`")]
    UnknownFunction(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Callbacks for debugging output; every method defaults to a no-op.
pub trait Observer {
    /// First execution of a function sequence.
    fn on_sequence(&mut self, _depth: u32, _sequence: &[String]) {}
    /// Every symbolic transaction, including repeats of a sequence from
    /// other end states.
    fn on_outcome(&mut self, _sequence: &[String], _outcome: &TxOutcome) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

/// Records every distinct executed sequence, grouped by depth.
#[derive(Debug, Clone, Default)]
pub struct SequenceLog {
    pub by_depth: Vec<Vec<Vec<String>>>,
}

impl Observer for SequenceLog {
    fn on_sequence(&mut self, depth: u32, sequence: &[String]) {
        let d = depth as usize;
        if self.by_depth.len() < d {
            self.by_depth.resize(d, Vec::new());
        }
        self.by_depth[d - 1].push(sequence.to_vec());
    }
}

/// A state that later transactions start from.
#[derive(Debug, Clone)]
pub struct FrontierEntry {
    pub world: WorldState,
    pub sequence: Vec<String>,
}

impl FrontierEntry {
    pub fn depth(&self) -> u32 {
        self.sequence.len() as u32
    }
}

#[derive(Debug, Clone)]
pub struct Exploration {
    /// Minimal-depth findings in discovery order.
    pub findings: Vec<Finding>,
    pub stats: ExplorationStats,
    pub warnings: Vec<String>,
}

impl Exploration {
    pub fn finding_keys(&self) -> BTreeSet<FindingKey> {
        self.findings.iter().map(Finding::key).collect()
    }

    /// Some sequences were not fully explored.
    pub fn partial(&self) -> bool {
        self.stats.timed_out || self.stats.truncated
    }
}

pub fn explore(
    bundle: &ContractBundle,
    depth: u32,
    strategy: Strategy,
    limits: &Limits,
) -> Result<Exploration, ExploreError> {
    let mut solver = Solver::new(limits.solver);
    explore_with(
        bundle,
        depth,
        strategy,
        limits,
        &mut solver,
        &mut NoObserver,
    )
}

/// Like [`explore`] with a caller-supplied solver (for query hooks) and
/// observer.
pub fn explore_with(
    bundle: &ContractBundle,
    depth: u32,
    strategy: Strategy,
    limits: &Limits,
    solver: &mut Solver,
    observer: &mut dyn Observer,
) -> Result<Exploration, ExploreError> {
    if depth == 0 {
        return Err(ExploreError::ZeroDepth);
    }
    let started = Instant::now();
    let deadline = limits.timeout.map(|t| started + t);
    let calls_before = solver.stats.calls;
    let public = bundle.public_functions();

    let mut stats = ExplorationStats::new(depth);
    let mut findings: Vec<Finding> = Vec::new();
    let mut known: BTreeSet<FindingKey> = BTreeSet::new();
    let mut warnings = Vec::new();

    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut frontier = vec![FrontierEntry {
        world: WorldState::deploy(&bundle.unit, limits.exec.width),
        sequence: Vec::new(),
    }];

    'depths: for d in 1..=depth {
        let level_start = Instant::now();
        let mut next = Vec::new();
        for entry in &frontier {
            let candidates = match entry.sequence.last() {
                None => public.clone(),
                Some(prev) => candidate_successors(strategy, &bundle.raw, prev, &public),
            };
            for f in candidates {
                if deadline.is_some_and(|dl| Instant::now() >= dl) {
                    stats.timed_out = true;
                    stats.wall_time[d as usize - 1] = level_start.elapsed().as_secs_f64();
                    break 'depths;
                }
                let cfg = bundle
                    .cfg(&f)
                    .ok_or_else(|| ExploreError::UnknownFunction(f.clone()))?;
                let mut sequence = entry.sequence.clone();
                sequence.push(f.clone());
                stats.transactions[d as usize - 1] += 1;
                if seen.insert(sequence.clone()) {
                    stats.sequences_started[d as usize - 1] += 1;
                    observer.on_sequence(d, &sequence);
                }

                solver.set_context(d, &f);
                let outcome = exec_transaction(cfg, &entry.world, d, &limits.exec, solver)?;
                observer.on_outcome(&sequence, &outcome);
                stats.truncated |= outcome.truncated;
                stats.loop_drops += outcome.loop_drops;
                stats.unknowns += outcome.unknown_branches;
                stats.end_states[d as usize - 1] += outcome.end_states.len() as u64;

                for end in outcome.end_states {
                    let mut ctx = DetectorContext {
                        solver,
                        width: limits.exec.width,
                        known: &known,
                    };
                    let found = run_all(&end, &mut ctx)?;
                    stats.unknowns += found.unknowns;
                    warnings.extend(found.warnings);
                    for finding in found.findings {
                        if known.insert(finding.key()) {
                            findings.push(finding);
                        }
                    }

                    if d == depth {
                        continue;
                    }
                    match prune_end_state(&end) {
                        Prune::PruneRule1 => stats.end_states_pruned_rule1 += 1,
                        Prune::PruneRule2 => stats.end_states_pruned_rule2 += 1,
                        Prune::Keep => {
                            let has_dependents = bundle
                                .raw
                                .inverse_deps
                                .get(&f)
                                .is_some_and(|s| !s.is_empty());
                            if strategy == Strategy::RawPruned && !has_dependents {
                                stats.end_states_pruned_raw += 1;
                            } else {
                                next.push(FrontierEntry {
                                    world: end.world,
                                    sequence: sequence.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        stats.wall_time[d as usize - 1] = level_start.elapsed().as_secs_f64();
        frontier = next;
    }

    stats.solver_calls = solver.stats.calls - calls_before;
    Ok(Exploration {
        findings,
        stats,
        warnings,
    })
}
