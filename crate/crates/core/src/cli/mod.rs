//! Command-line front end: `evaluate`, `verify`, `discretize`, `sweep`.

pub mod scenario_file;
pub mod verify;

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::conditions::{evaluate_scenario, fmt_sci, ConditionReport, Verdict};
use crate::discretize::{discretize_scenario, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::grid::GRID_ENV;
use crate::oracle::{best_lower, OracleConfig, DEFAULT_CELLS};
use scenario_file::Document;
use verify::verify;

/// First line of every CSV file written.
pub const CSV_VERSION: &str = "# hardykit-csv v1";
pub const CSV_COLUMNS: &str = "scenario_id,case,constant,oracle_lb,ratio,verdict";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITIONS: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hardykit", version, about = "Weighted bilinear and iterated Hardy inequalities: conditions, discretization, oracle checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Oracle cells at the base resolution.
    #[arg(long, global = true, env = GRID_ENV, default_value_t = DEFAULT_CELLS)]
    pub grid: usize,
    /// Seed of the oracle's random starts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Append result rows to this CSV file.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify a scenario and evaluate its condition constant.
    Evaluate {
        /// Scenario file.
        file: PathBuf,
    },
    /// Compare the condition constant with oracle lower bounds at two resolutions.
    Verify {
        /// Scenario file.
        file: PathBuf,
    },
    /// List the discretizing sequence of an iterated scenario.
    Discretize {
        /// Scenario file of an iterated scenario.
        file: PathBuf,
        /// Growth factor of `b` between consecutive points.
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
    },
    /// Evaluate every scenario of a sweep file and run the oracle once each.
    Sweep {
        /// Scenario file with `sweep.NAME = ...` lines.
        file: PathBuf,
    },
}

/// One CSV row.
pub struct Row {
    pub id: String,
    pub case: String,
    pub constant: ExtReal,
    pub oracle_lb: Option<ExtReal>,
    pub ratio: Option<f64>,
    pub verdict: String,
}

impl Row {
    fn from_report(r: &ConditionReport) -> Self {
        Row { id: r.scenario_id.clone(), case: r.kind.tag().into(), constant: r.constant, oracle_lb: None, ratio: None, verdict: r.verdict.to_string() }
    }

    pub fn to_csv(&self) -> String {
        let id = if self.id.contains([',', '"']) { format!("\"{}\"", self.id.replace('"', "\"\"")) } else { self.id.clone() };
        format!(
            "{},{},{},{},{},{}",
            id,
            self.case,
            fmt_sci(self.constant),
            self.oracle_lb.map(fmt_sci).unwrap_or_default(),
            self.ratio.map(|r| fmt_sci(ExtReal::from_f64(r))).unwrap_or_default(),
            self.verdict
        )
    }
}

/// Appends rows, writing the versioned header into a new or empty file.
pub fn append_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{CSV_VERSION}")?;
        writeln!(f, "{CSV_COLUMNS}")?;
    }
    for r in rows {
        writeln!(f, "{}", r.to_csv())?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) => EXIT_PARSE,
        Error::Precondition(_) | Error::Degenerate(_) => EXIT_PRECONDITIONS,
        Error::Domain(_) => EXIT_FAILURE,
    }
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let (result, buf) = pool.install(|| {
        let mut buf = Vec::new();
        let r = dispatch(cli, &mut buf);
        (r, buf)
    });
    if out.write_all(&buf).and_then(|_| out.flush()).is_err() {
        return EXIT_FAILURE;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    if cli.grid < 2 {
        return Err(Error::Domain("--grid needs at least 2 cells".into()));
    }
    match &cli.command {
        Command::Evaluate { file } => evaluate(cli, file, out),
        Command::Verify { file } => verify_cmd(cli, file, out),
        Command::Discretize { file, lambda } => discretize(file, *lambda, out),
        Command::Sweep { file } => sweep(cli, file, out),
    }
}

fn report_code(r: &ConditionReport) -> i32 {
    if r.verdict == Verdict::PreconditionsViolated {
        EXIT_PRECONDITIONS
    } else {
        EXIT_OK
    }
}

fn evaluate(cli: &Cli, file: &Path, out: &mut dyn Write) -> Result<i32> {
    let s = Document::read(file)?.scenario()?;
    let r = evaluate_scenario(&s);
    writeln!(out, "scenario={} {}", r.scenario_id, r.summary_line())?;
    for (name, v) in &r.factors {
        writeln!(out, "  factor {name}={}", fmt_sci(*v))?;
    }
    writeln!(out, "  path={}", if r.path == crate::conditions::EvalPath::Closed { "closed" } else { "grid" })?;
    if let Some(note) = &r.note {
        writeln!(out, "  note: {note}")?;
    }
    if let Some(path) = &cli.csv {
        append_csv(path, &[Row::from_report(&r)])?;
    }
    Ok(report_code(&r))
}

fn verify_cmd(cli: &Cli, file: &Path, out: &mut dyn Write) -> Result<i32> {
    let s = Document::read(file)?.scenario()?;
    let v = verify(&s, cli.grid, cli.seed)?;
    writeln!(out, "{}", v.line())?;
    if let Some(note) = &v.report.note {
        writeln!(out, "  note: {note}")?;
    }
    if let Some(path) = &cli.csv {
        let mut row = Row::from_report(&v.report);
        row.oracle_lb = v.lower.last().map(|l| l.1);
        row.ratio = v.ratio_refined;
        row.verdict = v.outcome.to_string();
        append_csv(path, &[row])?;
    }
    Ok(report_code(&v.report))
}

fn discretize(file: &Path, lambda: f64, out: &mut dyn Write) -> Result<i32> {
    let s = Document::read(file)?.scenario()?;
    let d = discretize_scenario(&s, lambda)?;
    let seq = &d.seq;
    writeln!(out, "scenario={} lambda={} D={} points={}", s.id, seq.lambda, seq.d, seq.len())?;
    writeln!(out, "{:>5} {:>12} {:>5} {:>12} {:>12}", "k", "x_k", "class", "phi", "U")?;
    for (i, k) in seq.ks().enumerate() {
        let f = seq.indices[i];
        writeln!(out, "{:>5} {:>12.5e} {:>5} {:>12.5e} {:>12.5e}", k, seq.points[i], seq.classes[i].to_string(), d.phi.vals[f], d.big_u.vals[f])?;
    }
    let c = seq.check_clauses(&d.phi, &d.b);
    let flag = |b: bool| if b { "ok" } else { "FAILED" };
    writeln!(out, "clauses growth={} monotone={} decomposition={}", flag(c.growth), flag(c.monotone), flag(c.decomposition))?;
    writeln!(out, "boundary lo={} hi={}", seq.boundary_lo, seq.boundary_hi)?;
    Ok(if c.all() { EXIT_OK } else { EXIT_FAILURE })
}

fn sweep(cli: &Cli, file: &Path, out: &mut dyn Write) -> Result<i32> {
    let all = Document::read(file)?.scenarios()?;
    let rows: Vec<Result<Row>> = all
        .par_iter()
        .map(|s| {
            let r = evaluate_scenario(s);
            let mut row = Row::from_report(&r);
            if r.verdict != Verdict::PreconditionsViolated {
                let cfg = OracleConfig { cells: cli.grid, seed: cli.seed, ..OracleConfig::default() };
                let l = best_lower(s, &cfg)?.value;
                row.oracle_lb = Some(l);
                row.ratio = Some(if l.is_zero() { f64::INFINITY } else { r.constant.get() / l.get() });
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    writeln!(out, "{CSV_VERSION}")?;
    writeln!(out, "{CSV_COLUMNS}")?;
    for r in &rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    if let Some(path) = &cli.csv {
        append_csv(path, &rows)?;
    }
    Ok(EXIT_OK)
}

/// Entry point of the binary.
pub fn main_with_args(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    run(&cli, &mut io::stdout().lock(), &mut io::stderr().lock())
}
