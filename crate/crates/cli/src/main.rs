use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use depthscan::bench::{bench_all, summary_table, write_csv};
use depthscan::corpus;
use depthscan::explorer::{explore_with, ContractBundle, Limits, SequenceLog, Strategy};
use depthscan::report::{
    emit_report_json, render_text, sequences_json_lines, Both, Report, TreeRecorder,
};
use depthscan::solver::{to_smtlib, Solver};

#[derive(Parser)]
#[command(
    name = "depthscan",
    version,
    about = "Depth-n vulnerability scanner for MiniSol contracts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Brute,
    Raw,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Brute => Strategy::BruteForce,
            StrategyArg::Raw => Strategy::RawPruned,
        }
    }
}

#[derive(clap::Args)]
struct LimitArgs {
    /// Bit width of symbolic words (1-64).
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..=64))]
    width: u32,
    #[arg(long, default_value_t = 3)]
    loop_bound: u32,
    /// End states per transaction before results are marked truncated.
    #[arg(long, default_value_t = 512)]
    max_paths: usize,
    /// Conflict budget per solver query.
    #[arg(long, default_value_t = 100_000)]
    max_conflicts: u64,
    /// Wall-clock limit in seconds per exploration.
    #[arg(long)]
    timeout: Option<f64>,
}

impl LimitArgs {
    fn limits(&self) -> Result<Limits> {
        let mut l = Limits::with_width(self.width);
        l.exec.loop_bound = self.loop_bound;
        l.exec.max_paths = self.max_paths;
        l.solver.max_conflicts = self.max_conflicts;
        if let Some(t) = self.timeout {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("--timeout must be a non-negative number of seconds");
            }
            l.timeout = Some(Duration::from_secs_f64(t));
        }
        Ok(l)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Explore one contract and report findings.
    Scan {
        file: PathBuf,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        #[arg(long, value_enum, default_value = "raw")]
        strategy: StrategyArg,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Leave wall-clock times out of JSON reports.
        #[arg(long)]
        no_timing: bool,
        /// Print the read-after-write dependency map as JSON.
        #[arg(long)]
        emit_deps: bool,
        /// Write every solver query as SMT-LIB into this directory.
        #[arg(long, value_name = "DIR")]
        emit_smt: Option<PathBuf>,
        /// Print the execution tree of every transaction as JSON.
        #[arg(long)]
        emit_tree: bool,
        /// Print executed sequences as JSON lines.
        #[arg(long)]
        emit_sequences: bool,
    },
    /// Run both strategies over every `.msol` file in a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        depths: Vec<u32>,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Exit nonzero if the strategies report different findings.
        #[arg(long)]
        check_equivalence: bool,
    },
    /// Write the bundled corpus (seeded by DEPTHSCAN_SEED) into a directory.
    ExportCorpus { dir: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Scan {
            file,
            depth,
            strategy,
            limits,
            format,
            output,
            no_timing,
            emit_deps,
            emit_smt,
            emit_tree,
            emit_sequences,
        } => {
            let source =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let bundle = ContractBundle::analyze(&source)
                .with_context(|| format!("in {}", file.display()))?;
            let limits = limits.limits()?;
            let strategy = Strategy::from(strategy);
            let mut stdout = io::stdout().lock();

            if emit_deps {
                writeln!(stdout, "{:#}", bundle.raw.to_json())?;
            }
            let mut solver = Solver::new(limits.solver);
            if let Some(dir) = &emit_smt {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let dir = dir.clone();
                solver.set_hook(Box::new(move |ctx, query| {
                    let path = dir.join(format!("{}.smt2", ctx.file_stem()));
                    if let Err(e) = fs::write(&path, to_smtlib(query)) {
                        eprintln!("warning: could not write {}: {e}", path.display());
                    }
                }));
            }
            let mut log = SequenceLog::default();
            let mut tree = TreeRecorder::default();
            let exploration = explore_with(
                &bundle,
                depth,
                strategy,
                &limits,
                &mut solver,
                &mut Both(&mut log, &mut tree),
            )?;
            if emit_tree {
                let v = serde_json::Value::Array(std::mem::take(&mut tree.transactions));
                writeln!(stdout, "{v:#}")?;
            }
            if emit_sequences {
                write!(stdout, "{}", sequences_json_lines(&log))?;
            }

            let report = Report::new(bundle.name(), strategy, depth, &limits, exploration);
            let bytes = match format {
                Format::Json => emit_report_json(&report, !no_timing),
                Format::Text => render_text(&report).into_bytes(),
            };
            match &output {
                Some(path) => fs::write(path, &bytes)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => stdout.write_all(&bytes)?,
            }
            Ok(if report.findings.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Bench {
            dir,
            depths,
            limits,
            csv,
            check_equivalence,
        } => {
            if depths.contains(&0) {
                bail!("depths start at 1");
            }
            let limits = limits.limits()?;
            let contracts = read_corpus_dir(&dir)?;
            if contracts.is_empty() {
                bail!("no .msol files in {}", dir.display());
            }
            let result = bench_all(
                contracts.iter().map(|(n, s)| (n.as_str(), s.as_str())),
                &depths,
                &limits,
            );
            match &csv {
                Some(path) => {
                    let f = fs::File::create(path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    write_csv(&result.rows, f)?;
                }
                None => write_csv(&result.rows, io::stdout().lock())?,
            }
            eprint!("{}", summary_table(&result, &depths));
            for row in result.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "error: {} depth {}: {}",
                    row.contract,
                    row.depth,
                    row.error.as_deref().unwrap_or("")
                );
            }
            if check_equivalence {
                for (c, d) in &result.incomparable {
                    eprintln!("note: {c} depth {d} was partial and not compared");
                }
                if !result.mismatches.is_empty() {
                    return Ok(ExitCode::from(1));
                }
                eprintln!("equivalence: all finding sets match");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportCorpus { dir } => {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for entry in corpus::bundled() {
                fs::write(dir.join(format!("{}.msol", entry.name)), &entry.source)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_corpus_dir(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "msol") {
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let source =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            out.push((name, source));
        }
    }
    out.sort();
    Ok(out)
}
