//! The `rado` command line.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 search budget exhausted,
//! 4 formula/search discrepancy, 5 certificate failure.

use std::fmt::Display;
use std::fs;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::certify::{self, SweepConfig, TemplateReport};
use crate::domain::{Coloring, EquationInstance};
use crate::formula::{compute_c, rado_formula, FormulaError};
use crate::repr;
use crate::search::{exact_rado, ExactOptions, ProofStatus, SearchOptions, DEFAULT_SPLIT_DEPTH};
use crate::table::{
    self, RowOptions, TableError, TableFormat, TableMode, TableSpec, DEFAULT_MAX_C,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_DISCREPANCY: i32 = 4;
pub const EXIT_LEMMA: i32 = 5;

/// Optional worker-count override used when `--threads` is absent.
pub const THREADS_ENV: &str = "RADO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "rado",
    version,
    about = "Exact 2-color Rado numbers for x_1 + ... + x_{m-1} = a x_m"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form value, region and rule for one (m, a).
    Formula {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        json: bool,
    },
    /// Exact value by exhaustive coloring search.
    Exact {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        a: u64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
    },
    /// Check one coloring: prints BAD or a monochromatic solution.
    Verify {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        a: u64,
        #[arg(long)]
        coloring: String,
    },
    /// Grid of formula and/or exact values, written as CSV or JSON.
    Table {
        #[arg(long, value_parser = parse_range)]
        a: RangeInclusive<u64>,
        #[arg(long, value_parser = parse_range)]
        m: RangeInclusive<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Search only cells with C(m,a) at most this.
        #[arg(long = "max-C", visible_alias = "max-c", default_value_t = DEFAULT_MAX_C)]
        max_c: u64,
        /// Output file; an existing file is resumed. Stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[command(flatten)]
        search: SearchArgs,
        /// Write 0 in the ms column.
        #[arg(long)]
        no_timing: bool,
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
    /// Run every certificate sweep.
    Lemmas {
        #[arg(long, value_parser = parse_range, default_value = "3..20")]
        a_range: RangeInclusive<u64>,
        /// Write the reports as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_corrupt: bool,
    },
}

#[derive(Debug, clap::Args)]
struct SearchArgs {
    /// Largest n tried before giving up.
    #[arg(long, default_value_t = 64)]
    n_max: u64,
    /// Node budget for the whole run (per cell in tables).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Start the ascent next to C(m,a).
    #[arg(long)]
    hint: bool,
    #[arg(long, hide = true, default_value_t = DEFAULT_SPLIT_DEPTH)]
    split_depth: usize,
}

impl SearchArgs {
    fn options(&self) -> Result<ExactOptions, String> {
        let threads = match self.threads {
            Some(t) => t,
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => v
                    .parse()
                    .map_err(|_| format!("{THREADS_ENV}={v:?} is not a thread count"))?,
                Err(_) => 1,
            },
        };
        if threads == 0 {
            return Err("thread count must be positive".into());
        }
        Ok(ExactOptions {
            n_max: self.n_max,
            search: SearchOptions {
                budget: self.budget.unwrap_or(u64::MAX),
                threads,
                split_depth: self.split_depth,
            },
            hint: self.hint,
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Formula,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// `A1..A2` (inclusive) or a single `A`.
fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| format!("bad integer {t:?} in range {s:?}"))
    };
    let range = match s.split_once("..") {
        Some((lo, hi)) => parse(lo)?..=parse(hi.trim_start_matches('='))?,
        None => {
            let v = parse(s)?;
            v..=v
        }
    };
    if range.is_empty() {
        return Err(format!("empty range {s:?}"));
    }
    Ok(range)
}

fn usage(msg: impl Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn instance(m: u64, a: u64) -> Result<EquationInstance, i32> {
    EquationInstance::new(m, a).map_err(usage)
}

/// Parses `std::env::args` and runs the command; returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Formula { m, a, json } => cmd_formula(m, a, json),
        Command::Exact { m, a, search, json } => cmd_exact(m, a, &search, json),
        Command::Verify { m, a, coloring } => cmd_verify(m, a, &coloring),
        Command::Table {
            a,
            m,
            mode,
            max_c,
            out,
            format,
            search,
            no_timing,
            stop_after,
        } => {
            let mode = match mode {
                ModeArg::Formula => TableMode::Formula,
                ModeArg::Exact => TableMode::Exact,
                ModeArg::Both => TableMode::Both,
            };
            let format = match format {
                FormatArg::Csv => TableFormat::Csv,
                FormatArg::Json => TableFormat::Json,
            };
            match search.options() {
                Ok(exact) => {
                    let spec = TableSpec {
                        a,
                        m,
                        row: RowOptions {
                            mode,
                            max_c,
                            exact,
                            timing: !no_timing,
                        },
                        stop_after,
                    };
                    cmd_table(&spec, out, format)
                }
                Err(e) => Err(usage(e)),
            }
        }
        Command::Lemmas {
            a_range,
            out,
            inject_corrupt,
        } => cmd_lemmas(a_range, out, inject_corrupt),
    };
    result.unwrap_or_else(|code| code)
}

fn formula_error(e: FormulaError) -> i32 {
    eprintln!("error: {e}");
    match e {
        FormulaError::Inconsistent { .. } => EXIT_DISCREPANCY,
        _ => EXIT_USAGE,
    }
}

fn cmd_formula(m: u64, a: u64, as_json: bool) -> Result<i32, i32> {
    let inst = instance(m, a)?;
    let verdict = rado_formula(&inst).map_err(formula_error)?;
    let c = compute_c(&inst);
    if as_json {
        let value = json!({
            "m": m,
            "a": a,
            "region": verdict.region,
            "C": c,
            "R2": verdict.value.to_string(),
            "rule": verdict.rule,
        });
        println!("{value}");
    } else {
        println!(
            "region={} C={c} R2={} rule={}",
            verdict.region, verdict.value, verdict.rule
        );
    }
    Ok(EXIT_OK)
}

fn cmd_exact(m: u64, a: u64, args: &SearchArgs, as_json: bool) -> Result<i32, i32> {
    let inst = instance(m, a)?;
    let opts = args.options().map_err(usage)?;
    let res = exact_rado(&inst, &opts).map_err(usage)?;
    let witness = res
        .witness
        .as_ref()
        .map(Coloring::to_string)
        .unwrap_or_default();
    let (status, value, code) = match res.status {
        ProofStatus::Proven => ("Proven", format!("={}", res.value), EXIT_OK),
        ProofStatus::ExhaustedBudget { lower_bound } => {
            ("ExhaustedBudget", format!(">={lower_bound}"), EXIT_BUDGET)
        }
    };
    let ms = res.stats.elapsed.as_secs_f64() * 1e3;
    if as_json {
        let out = json!({
            "m": m,
            "a": a,
            "value": res.value,
            "status": status,
            "witness": witness,
            "nodes": res.stats.nodes,
            "ms": ms,
        });
        println!("{out}");
    } else {
        println!(
            "value{value} status={status} witness={witness} nodes={} ms={ms:.3}",
            res.stats.nodes
        );
    }
    Ok(code)
}

fn cmd_verify(m: u64, a: u64, coloring: &str) -> Result<i32, i32> {
    let inst = instance(m, a)?;
    let col: Coloring = coloring.parse().map_err(usage)?;
    match repr::find_mono_solution(&inst, &col).map_err(usage)? {
        None => println!("BAD"),
        Some(w) => println!("{w}"),
    }
    Ok(EXIT_OK)
}

fn table_error(e: TableError) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

fn cmd_table(spec: &TableSpec, out: Option<PathBuf>, format: TableFormat) -> Result<i32, i32> {
    let target = out.as_deref().map(|p| (p, format));
    let outcome = table::run_table(spec, target).map_err(table_error)?;
    if out.is_none() {
        let text = table::rows_to_string(&outcome.rows, format).map_err(table_error)?;
        print!("{text}");
    }
    eprintln!(
        "rows={} computed={} reused={} budget={} discrepancies={}{}",
        outcome.rows.len(),
        outcome.computed,
        outcome.reused,
        outcome.budget,
        outcome.discrepancies,
        if outcome.complete {
            ""
        } else {
            " (stopped early)"
        }
    );
    for row in outcome
        .rows
        .iter()
        .filter(|r| r.status == table::RowStatus::Discrepancy)
    {
        eprintln!(
            "DISCREPANCY a={} m={} formula={} exact={}",
            row.a, row.m, row.formula, row.exact
        );
    }
    Ok(if outcome.discrepancies > 0 {
        EXIT_DISCREPANCY
    } else {
        EXIT_OK
    })
}

fn cmd_lemmas(
    a_range: RangeInclusive<u64>,
    out: Option<PathBuf>,
    inject_corrupt: bool,
) -> Result<i32, i32> {
    let cfg = SweepConfig::a_range(*a_range.start(), *a_range.end());
    let mut reports: Vec<TemplateReport> = certify::run_all(&cfg).map_err(usage)?;
    if inject_corrupt {
        reports.push(certify::run_template(&certify::CORRUPT_TEMPLATE, &cfg));
    }
    for report in &reports {
        println!("{report}");
    }
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&reports).map_err(usage)?;
        fs::write(&path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(if reports.iter().all(TemplateReport::is_pass) {
        EXIT_OK
    } else {
        EXIT_LEMMA
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..6"), Ok(3..=6));
        assert_eq!(parse_range("7"), Ok(7..=7));
        assert_eq!(parse_range("3..=4"), Ok(3..=4));
        assert!(parse_range("6..3").is_err());
        assert!(parse_range("x..3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(
            run_from(["rado", "formula", "--m", "2", "--a", "3"]),
            EXIT_USAGE
        );
        assert_eq!(
            run_from(["rado", "formula", "--m", "x", "--a", "3"]),
            EXIT_USAGE
        );
        assert_eq!(run_from(["rado", "bogus"]), EXIT_USAGE);
    }
}
