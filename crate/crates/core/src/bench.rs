//! Side-by-side runs of both strategies over a set of contracts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::Serialize;

use crate::detectors::FindingKey;
use crate::explorer::{explore, ContractBundle, Limits, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub contract: String,
    pub depth: u32,
    pub strategy: Strategy,
    pub wall_time: f64,
    pub sequences_started: u64,
    pub findings: usize,
    pub timed_out: bool,
    pub truncated: bool,
    /// Set when the contract could not be analyzed.
    pub error: Option<String>,
}

impl BenchRow {
    pub fn solved(&self) -> bool {
        !self.timed_out && self.error.is_none()
    }
}

/// A (contract, depth) cell whose strategies disagree on findings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub contract: String,
    pub depth: u32,
    pub only_brute: Vec<FindingKey>,
    pub only_raw: Vec<FindingKey>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub mismatches: Vec<Mismatch>,
    /// Cells skipped by the equivalence check because a run was partial.
    pub incomparable: Vec<(String, u32)>,
}

/// Runs both strategies at each depth. Parse errors become error rows.
pub fn bench_contract(name: &str, source: &str, depths: &[u32], limits: &Limits) -> BenchResult {
    let mut out = BenchResult::default();
    let bundle = match ContractBundle::analyze(source) {
        Ok(b) => b,
        Err(e) => {
            for &depth in depths {
                for strategy in Strategy::ALL {
                    out.rows
                        .push(error_row(name, depth, strategy, e.to_string()));
                }
            }
            return out;
        }
    };
    for &depth in depths {
        let mut keys = BTreeMap::new();
        let mut partial = false;
        for strategy in Strategy::ALL {
            match explore(&bundle, depth, strategy, limits) {
                Ok(ex) => {
                    partial |= ex.partial();
                    out.rows.push(BenchRow {
                        contract: name.to_string(),
                        depth,
                        strategy,
                        wall_time: ex.stats.total_time(),
                        sequences_started: ex.stats.total_sequences(),
                        findings: ex.findings.len(),
                        timed_out: ex.stats.timed_out,
                        truncated: ex.stats.truncated,
                        error: None,
                    });
                    keys.insert(strategy, ex.finding_keys());
                }
                Err(e) => {
                    partial = true;
                    out.rows
                        .push(error_row(name, depth, strategy, e.to_string()));
                }
            }
        }
        if partial {
            out.incomparable.push((name.to_string(), depth));
            continue;
        }
        let (brute, raw) = (&keys[&Strategy::BruteForce], &keys[&Strategy::RawPruned]);
        if brute != raw {
            out.mismatches.push(Mismatch {
                contract: name.to_string(),
                depth,
                only_brute: brute.difference(raw).cloned().collect(),
                only_raw: raw.difference(brute).cloned().collect(),
            });
        }
    }
    out
}

fn error_row(name: &str, depth: u32, strategy: Strategy, error: String) -> BenchRow {
    BenchRow {
        contract: name.to_string(),
        depth,
        strategy,
        wall_time: 0.0,
        sequences_started: 0,
        findings: 0,
        timed_out: false,
        truncated: false,
        error: Some(error),
    }
}

pub fn bench_all<'a>(
    contracts: impl IntoIterator<Item = (&'a str, &'a str)>,
    depths: &[u32],
    limits: &Limits,
) -> BenchResult {
    let mut all = BenchResult::default();
    for (name, source) in contracts {
        let r = bench_contract(name, source, depths, limits);
        all.rows.extend(r.rows);
        all.mismatches.extend(r.mismatches);
        all.incomparable.extend(r.incomparable);
    }
    all.rows.sort_by(|a, b| {
        (&a.contract, a.depth, a.strategy).cmp(&(&b.contract, b.depth, b.strategy))
    });
    all
}

pub fn write_csv<W: io::Write>(rows: &[BenchRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Total BruteForce time over total RawPruned time at `depth`, counting
/// only contracts both strategies solved.
pub fn speedup(rows: &[BenchRow], depth: u32) -> Option<f64> {
    let mut times: BTreeMap<&str, [Option<f64>; 2]> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.depth == depth && r.solved()) {
        let i = (r.strategy == Strategy::RawPruned) as usize;
        times.entry(&r.contract).or_default()[i] = Some(r.wall_time);
    }
    let (mut brute, mut raw) = (0.0, 0.0);
    for [b, r] in times.values() {
        if let (Some(b), Some(r)) = (b, r) {
            brute += b;
            raw += r;
        }
    }
    (raw > 0.0).then(|| brute / raw)
}

pub const THRESHOLDS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 60.0];

/// Rows of `strategy` at `depth` finished within each threshold.
pub fn solved_counts(rows: &[BenchRow], depth: u32, strategy: Strategy) -> Vec<(f64, usize)> {
    THRESHOLDS
        .iter()
        .map(|&t| {
            let n = rows
                .iter()
                .filter(|r| {
                    r.depth == depth && r.strategy == strategy && r.solved() && r.wall_time <= t
                })
                .count();
            (t, n)
        })
        .collect()
}

pub fn summary_table(result: &BenchResult, depths: &[u32]) -> String {
    let rows = &result.rows;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "depth  speedup  timeouts(brute/raw)  sequences(brute/raw)"
    );
    for &d in depths {
        let count = |st: Strategy, f: &dyn Fn(&BenchRow) -> u64| -> u64 {
            rows.iter()
                .filter(|r| r.depth == d && r.strategy == st)
                .map(f)
                .sum()
        };
        let sp = speedup(rows, d).map_or("n/a".to_string(), |x| format!("{x:.2}x"));
        let _ = writeln!(
            s,
            "{d:>5}  {sp:>7}  {:>8}/{:<10}  {}/{}",
            count(Strategy::BruteForce, &|r| r.timed_out as u64),
            count(Strategy::RawPruned, &|r| r.timed_out as u64),
            count(Strategy::BruteForce, &|r| r.sequences_started),
            count(Strategy::RawPruned, &|r| r.sequences_started),
        );
    }
    let _ = writeln!(s, "\nsolved within threshold (brute/raw)");
    for &d in depths {
        let b = solved_counts(rows, d, Strategy::BruteForce);
        let r = solved_counts(rows, d, Strategy::RawPruned);
        let cells: Vec<String> = b
            .iter()
            .zip(&r)
            .map(|((t, nb), (_, nr))| format!("<={t}s: {nb}/{nr}"))
            .collect();
        let _ = writeln!(s, "depth {d}: {}", cells.join("  "));
    }
    for m in &result.mismatches {
        let _ = writeln!(
            s,
            "MISMATCH {} depth {}: only brute {:?}, only raw {:?}",
            m.contract, m.depth, m.only_brute, m.only_raw
        );
    }
    s
}
