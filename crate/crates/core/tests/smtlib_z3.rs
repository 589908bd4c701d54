//! Emitted SMT-LIB checked against z3, when a Python z3 is installed.
//! Skips with a message otherwise.

mod common;

use std::cell::RefCell;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::rc::Rc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use depthscan::corpus;
use depthscan::explorer::{explore_with, ContractBundle, Limits, NoObserver, Strategy};
use depthscan::solver::{check, to_smtlib, CheckResult, Solver, SolverBudget};
use depthscan::symcore::Constraint;

/// File name and constraints.
type Query = (String, Vec<Constraint>);

const SCRIPT: &str = r#"
import sys, os, z3
d = sys.argv[1]
for name in sorted(os.listdir(d)):
    s = z3.Solver()
    s.from_file(os.path.join(d, name))
    print(name, s.check())
"#;

fn z3_available() -> bool {
    Command::new("python3")
        .args(["-c", "import z3"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// `name -> sat|unsat|unknown` for every file in `dir`.
fn z3_verdicts(dir: &Path) -> Vec<(String, String)> {
    let out = Command::new("python3")
        .arg("-c")
        .arg(SCRIPT)
        .arg(dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| {
            let (n, v) = l.split_once(' ').unwrap();
            (n.to_string(), v.to_string())
        })
        .collect()
}

fn verdict(cs: &[Constraint]) -> &'static str {
    match check(cs, SolverBudget::default()).unwrap() {
        CheckResult::Sat(_) => "sat",
        CheckResult::Unsat => "unsat",
        CheckResult::Unknown => "unknown",
    }
}

fn compare(dir: &Path, queries: &[Query]) {
    for (name, cs) in queries {
        fs::write(dir.join(name), to_smtlib(cs)).unwrap();
    }
    let z3 = z3_verdicts(dir);
    assert_eq!(z3.len(), queries.len());
    let mut sorted: Vec<&Query> = queries.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for ((name, cs), (zname, zv)) in sorted.into_iter().zip(&z3) {
        assert_eq!(name, zname);
        assert_eq!(verdict(cs), zv, "{name}:\n{}", to_smtlib(cs));
    }
}

#[test]
fn random_queries_agree_with_z3() {
    if !z3_available() {
        eprintln!("skipping: python3 with z3 not found");
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let queries: Vec<Query> = (0..200)
        .map(|i| {
            let fs = common::enumerate::gen_conjunction(&mut rng);
            (format!("q{i:03}.smt2"), common::enumerate::constraints(&fs))
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    compare(dir.path(), &queries);
}

#[test]
fn corpus_queries_agree_with_z3() {
    if !z3_available() {
        eprintln!("skipping: python3 with z3 not found");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let queries: Rc<RefCell<Vec<Query>>> = Rc::default();
    for e in corpus::bundled() {
        let b = ContractBundle::analyze(&e.source).unwrap();
        let limits = Limits::with_width(8);
        let mut solver = Solver::new(limits.solver);
        let sink = Rc::clone(&queries);
        let name = e.name.clone();
        solver.set_hook(Box::new(move |ctx, cs| {
            sink.borrow_mut()
                .push((format!("{name}_{}.smt2", ctx.file_stem()), cs.to_vec()));
        }));
        explore_with(
            &b,
            2,
            Strategy::RawPruned,
            &limits,
            &mut solver,
            &mut NoObserver,
        )
        .unwrap();
    }
    let queries = queries.borrow();
    assert!(queries.len() > 50);
    compare(dir.path(), &queries);
}
