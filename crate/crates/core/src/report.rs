//! Scan reports and debugging dumps.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::detectors::Finding;
use crate::explorer::{Exploration, ExplorationStats, Limits, Observer, SequenceLog, Strategy};
use crate::symcore::TxOutcome;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub contract: String,
    pub strategy: Strategy,
    pub depth: u32,
    pub findings: Vec<Finding>,
    pub stats: ExplorationStats,
    pub limits: Value,
    pub version: String,
    pub truncated: bool,
    pub timed_out: bool,
    pub warnings: Vec<String>,
}

pub fn limits_json(limits: &Limits) -> Value {
    json!({
        "width": limits.exec.width,
        "loop_bound": limits.exec.loop_bound,
        "max_paths": limits.exec.max_paths,
        "max_conflicts": limits.solver.max_conflicts,
        "timeout_secs": limits.timeout.map(|t| t.as_secs_f64()),
    })
}

impl Report {
    pub fn new(
        contract: &str,
        strategy: Strategy,
        depth: u32,
        limits: &Limits,
        exploration: Exploration,
    ) -> Report {
        let mut findings = exploration.findings;
        findings.sort_by(|a, b| {
            (a.detector, &a.location, a.depth).cmp(&(b.detector, &b.location, b.depth))
        });
        Report {
            contract: contract.to_string(),
            strategy,
            depth,
            findings,
            truncated: exploration.stats.truncated,
            timed_out: exploration.stats.timed_out,
            stats: exploration.stats,
            limits: limits_json(limits),
            version: TOOL_VERSION.to_string(),
            warnings: exploration.warnings,
        }
    }
}

/// Canonical JSON: sorted keys, two-space indent, trailing newline. Without
/// `timing` the wall-clock fields are removed so output is reproducible.
pub fn emit_report_json(report: &Report, timing: bool) -> Vec<u8> {
    // serde_json's default map is ordered, so keys come out sorted.
    let mut v = serde_json::to_value(report).expect("reports serialize");
    if !timing {
        if let Some(stats) = v.get_mut("stats").and_then(Value::as_object_mut) {
            stats.remove("wall_time");
        }
    }
    let mut out = serde_json::to_vec_pretty(&v).expect("values serialize");
    out.push(b'\n');
    out
}

pub fn render_text(report: &Report) -> String {
    let mut s = String::new();
    let st = &report.stats;
    let _ = writeln!(
        s,
        "{} depth={} strategy={}: {} finding(s)",
        report.contract,
        report.depth,
        report.strategy,
        report.findings.len()
    );
    for f in &report.findings {
        let _ = writeln!(
            s,
            "  {} at {} via [{}]",
            f.detector,
            f.location,
            f.sequence.join(", ")
        );
        let inputs: Vec<String> = f
            .model
            .iter()
            .map(|(k, v)| format!("{}={v}", k.name()))
            .collect();
        if !inputs.is_empty() {
            let _ = writeln!(s, "    inputs: {}", inputs.join(" "));
        }
    }
    let _ = writeln!(
        s,
        "  sequences per depth: {:?}, transactions: {:?}, pruned rule1={} rule2={} raw={}, solver calls={}, unknowns={}",
        st.sequences_started,
        st.transactions,
        st.end_states_pruned_rule1,
        st.end_states_pruned_rule2,
        st.end_states_pruned_raw,
        st.solver_calls,
        st.unknowns
    );
    let _ = writeln!(s, "  time: {:.3}s", st.total_time());
    if report.truncated {
        let _ = writeln!(s, "  warning: path budget exhausted, results are partial");
    }
    if report.timed_out {
        let _ = writeln!(s, "  warning: timed out, results are partial");
    }
    for w in &report.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    s
}

/// JSON lines `{"depth": d, "sequence": [..]}` in execution order.
pub fn sequences_json_lines(log: &SequenceLog) -> String {
    let mut s = String::new();
    for (i, level) in log.by_depth.iter().enumerate() {
        for seq in level {
            s.push_str(&json!({"depth": i + 1, "sequence": seq}).to_string());
            s.push('\n');
        }
    }
    s
}

/// Collects the per-transaction execution trees.
#[derive(Debug, Default)]
pub struct TreeRecorder {
    pub transactions: Vec<Value>,
}

impl Observer for TreeRecorder {
    fn on_outcome(&mut self, sequence: &[String], outcome: &TxOutcome) {
        let paths: Vec<Value> = outcome
            .end_states
            .iter()
            .map(|e| {
                json!({
                    "blocks": e.blocks.iter().map(|b| b.0).collect::<Vec<_>>(),
                    "branch_conditions": e.branch_conditions.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "terminator": format!("{:?}", e.terminator),
                    "wrote_storage": e.wrote_storage,
                })
            })
            .collect();
        self.transactions.push(json!({
            "sequence": sequence,
            "paths": paths,
            "loop_drops": outcome.loop_drops,
            "truncated": outcome.truncated,
        }));
    }
}

/// Forwards callbacks to two observers.
pub struct Both<'a>(pub &'a mut dyn Observer, pub &'a mut dyn Observer);

impl Observer for Both<'_> {
    fn on_sequence(&mut self, depth: u32, sequence: &[String]) {
        self.0.on_sequence(depth, sequence);
        self.1.on_sequence(depth, sequence);
    }

    fn on_outcome(&mut self, sequence: &[String], outcome: &TxOutcome) {
        self.0.on_outcome(sequence, outcome);
        self.1.on_outcome(sequence, outcome);
    }
}
