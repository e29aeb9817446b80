//! `msk`: batch driver for model-space and truncated Toeplitz checks.

mod report;
mod scenario;
mod tasks;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use msk_core::model_space::ModelSpaceBasis;
use msk_core::selftest::{self, Level, Tolerances};
use msk_core::InnerSpec;

use report::{digest, InstanceId, ReportRecord, Verdict};

#[derive(Parser)]
#[command(name = "msk", version, about = "Verification driver for matrix-valued model spaces")]
struct Cli {
    /// Write JSONL records here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long, global = true, env = "MSK_SEED")]
    seed: Option<u64>,
    /// Grid size override (power of two).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "KEY=VAL", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files and emit one record per task.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Selftest {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
    /// Dimension of the operator space between two model spaces.
    Dim {
        /// Inner function spec as JSON, or @path to a JSON file.
        #[arg(long)]
        theta1: String,
        #[arg(long)]
        theta2: String,
    },
    /// Print the scenario and report JSON schemas.
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad tolerance value {v:?}: {e}"))?;
    Ok((k.to_string(), v))
}

fn open_output(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_records(w: &mut dyn Write, records: &[ReportRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn cmd_run(cli: &Cli, paths: &[PathBuf], tol: &BTreeMap<String, f64>) -> io::Result<ExitCode> {
    // validate everything before writing any report line
    let mut scenarios = Vec::new();
    for p in paths {
        let text = match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("schema error: {}: {e}", p.display());
                return Ok(ExitCode::from(2));
            }
        };
        let parsed = scenario::parse(&text)
            .map_err(|e| e.to_string())
            .and_then(|s| s.with_overrides(cli.seed, cli.grid, tol));
        match parsed {
            Ok(s) => scenarios.push(s),
            Err(e) => {
                eprintln!("schema error: {}: {e}", p.display());
                return Ok(ExitCode::from(2));
            }
        }
    }
    let mut out = open_output(&cli.out)?;
    let mut failed = false;
    for (p, s) in paths.iter().zip(&scenarios) {
        if !cli.quiet {
            eprintln!("running {}", p.display());
        }
        let records = tasks::run_scenario(s);
        failed |= records.iter().any(|r| r.verdict == Verdict::Fail);
        write_records(&mut out, &records)?;
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_selftest(cli: &Cli, level: LevelArg, tol: &BTreeMap<String, f64>) -> io::Result<ExitCode> {
    let level = match level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let tolerances = match Tolerances::default().with_overrides(tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return Ok(ExitCode::from(2));
        }
    };
    let seed = cli.seed.unwrap_or(1);
    let start = Instant::now();
    let report = match selftest::run(level, seed, &tolerances) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("selftest aborted: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    if !cli.quiet {
        println!("{:<22} {:>6} {:>12} {:>10}  status", "invariant", "cases", "worst", "tol");
        for r in &report.results {
            let status = if r.passed { "ok" } else { "FAIL" };
            println!("{:<22} {:>6} {:>12.3e} {:>10.1e}  {status}", r.name, r.cases, r.worst, r.tol);
        }
        println!("{} findings, {:.2} s", report.findings.len(), start.elapsed().as_secs_f64());
    }
    if cli.out.is_some() {
        let id = InstanceId { seed, digest: digest(&(seed, format!("{:?}", level))) };
        let records: Vec<ReportRecord> = report
            .results
            .iter()
            .map(|r| {
                let m = BTreeMap::from([("worst".to_string(), r.worst), ("tol".to_string(), r.tol), ("cases".to_string(), r.cases as f64)]);
                let v = if r.passed { Verdict::Pass } else { Verdict::Fail };
                ReportRecord::new(&format!("selftest.{}", r.name), id.clone(), m, v, vec![])
            })
            .collect();
        write_records(&mut *open_output(&cli.out)?, &records)?;
    }
    let failing: Vec<&str> = report.results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failing.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failing invariants: {}", failing.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn read_spec(arg: &str) -> Result<InnerSpec, String> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn cmd_dim(cli: &Cli, theta1: &str, theta2: &str) -> io::Result<ExitCode> {
    let specs = match (read_spec(theta1), read_spec(theta2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("schema error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let grid = cli.grid.unwrap_or(msk_core::circle_fun::DEFAULT_GRID);
    let seed = cli.seed.unwrap_or(0);
    let id = InstanceId { seed, digest: digest(&(&specs.0, &specs.1, grid)) };
    let start = Instant::now();
    let outcome = (|| {
        let b1 = ModelSpaceBasis::new(&specs.0.build(grid)?)?;
        let b2 = ModelSpaceBasis::new(&specs.1.build(grid)?)?;
        tasks::dim_outcome(&b1, &b2, seed)
    })();
    let mut rec = match outcome {
        Ok((m, v, f)) => ReportRecord::new("dim", id, m, v, f),
        Err(e) => ReportRecord::failed("dim", id, e.to_string()),
    };
    rec.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let failed = rec.verdict == Verdict::Fail;
    write_records(&mut *open_output(&cli.out)?, &[rec])?;
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol: BTreeMap<String, f64> = cli.tol.iter().cloned().collect();
    let result = match &cli.command {
        Command::Run { scenarios } => cmd_run(&cli, scenarios, &tol),
        Command::Selftest { level } => cmd_selftest(&cli, *level, &tol),
        Command::Dim { theta1, theta2 } => cmd_dim(&cli, theta1, theta2),
        Command::Schema => {
            let both = serde_json::json!({
                "scenario": report::scenario_schema(),
                "report": report::report_schema(),
            });
            println!("{}", serde_json::to_string_pretty(&both).expect("static schema"));
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("io error: {e}");
        ExitCode::from(1)
    })
}
