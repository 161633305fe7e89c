//! Result tables over `(a, m)` grids: one row per cell, persisted as CSV or
//! JSON, sorted by `(a, m)`, and resumable.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::domain::{Coloring, EquationInstance};
use crate::formula::{
    classify_region, compute_c, rado_formula, FormulaError, RadoValue, RegionClass,
};
use crate::search::{exact_rado, ExactOptions, ProofStatus, SearchError};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("empty range {0}")]
    EmptyRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMode {
    Formula,
    Exact,
    Both,
}

impl TableMode {
    fn uses_formula(self) -> bool {
        matches!(self, TableMode::Formula | TableMode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// A formula or exact value column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Value(u64),
    Unknown,
    Skipped,
    Budget,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => write!(f, "{v}"),
            Cell::Unknown => f.write_str("unknown"),
            Cell::Skipped => f.write_str("skipped"),
            Cell::Budget => f.write_str("budget"),
        }
    }
}

impl FromStr for Cell {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unknown" => Ok(Cell::Unknown),
            "skipped" => Ok(Cell::Skipped),
            "budget" => Ok(Cell::Budget),
            _ => s
                .parse()
                .map(Cell::Value)
                .map_err(|_| format!("bad cell {s:?}")),
        }
    }
}

impl From<RadoValue> for Cell {
    fn from(v: RadoValue) -> Self {
        match v {
            RadoValue::Known(v) => Cell::Value(v),
            RadoValue::Unknown => Cell::Unknown,
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        // Accept bare numbers in JSON as well as strings.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(Cell::Value(v)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowStatus {
    Proven,
    Budget,
    Skipped,
    #[serde(rename = "DISCREPANCY")]
    Discrepancy,
}

mod witness_serde {
    use super::*;

    pub fn serialize<S: Serializer>(w: &Option<Coloring>, s: S) -> Result<S::Ok, S::Error> {
        match w {
            Some(c) => s.collect_str(c),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Coloring>, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub a: u64,
    pub m: u64,
    pub region: RegionClass,
    #[serde(rename = "C")]
    pub c: u64,
    pub formula: Cell,
    pub exact: Cell,
    pub status: RowStatus,
    #[serde(with = "witness_serde")]
    pub witness: Option<Coloring>,
    pub ms: u64,
}

impl ResultRow {
    pub fn key(&self) -> (u64, u64) {
        (self.a, self.m)
    }

    fn reconcile(&mut self) {
        if self.status == RowStatus::Proven || self.status == RowStatus::Discrepancy {
            self.status = match (self.formula, self.exact) {
                (Cell::Value(f), Cell::Value(e)) if f != e => RowStatus::Discrepancy,
                _ => RowStatus::Proven,
            };
        }
    }
}

pub const DEFAULT_MAX_C: u64 = 22;

/// Per-cell settings shared by every row of a table run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowOptions {
    pub mode: TableMode,
    pub max_c: u64,
    pub exact: ExactOptions,
    /// When false the `ms` column is written as 0.
    pub timing: bool,
}

impl Default for RowOptions {
    fn default() -> Self {
        Self {
            mode: TableMode::Both,
            max_c: DEFAULT_MAX_C,
            exact: ExactOptions::default(),
            timing: true,
        }
    }
}

/// Computes one row. The search runs when `C <= max_c` and, in `Both`
/// mode, only when the formula gives a value to check against.
pub fn compute_row(inst: &EquationInstance, opts: &RowOptions) -> Result<ResultRow, TableError> {
    let c = compute_c(inst);
    let formula = if opts.mode.uses_formula() {
        Cell::from(rado_formula(inst)?.value)
    } else {
        Cell::Skipped
    };
    let search = match opts.mode {
        TableMode::Formula => false,
        TableMode::Exact => c <= opts.max_c,
        TableMode::Both => c <= opts.max_c && formula != Cell::Unknown,
    };
    let mut row = ResultRow {
        a: inst.a(),
        m: inst.m(),
        region: classify_region(inst),
        c,
        formula,
        exact: Cell::Skipped,
        status: RowStatus::Skipped,
        witness: None,
        ms: 0,
    };
    if search {
        let res = exact_rado(inst, &opts.exact)?;
        row.witness = res.witness;
        if opts.timing {
            row.ms = res.stats.elapsed.as_millis() as u64;
        }
        match res.status {
            ProofStatus::Proven => {
                row.exact = Cell::Value(res.value);
                row.status = RowStatus::Proven;
                row.reconcile();
            }
            ProofStatus::ExhaustedBudget { .. } => {
                row.exact = Cell::Budget;
                row.status = RowStatus::Budget;
            }
        }
    }
    Ok(row)
}

pub fn write_rows<W: Write>(
    rows: &[ResultRow],
    format: TableFormat,
    mut w: W,
) -> Result<(), TableError> {
    match format {
        TableFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(w);
            for row in rows {
                wtr.serialize(row)?;
            }
            if rows.is_empty() {
                wtr.write_record([
                    "a", "m", "region", "C", "formula", "exact", "status", "witness", "ms",
                ])?;
            }
            wtr.flush().map_err(csv::Error::from)?;
        }
        TableFormat::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n").map_err(csv::Error::from)?;
        }
    }
    Ok(())
}

pub fn read_rows<R: Read>(format: TableFormat, r: R) -> Result<Vec<ResultRow>, TableError> {
    match format {
        TableFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(r);
            rdr.deserialize()
                .map(|row| row.map_err(TableError::from))
                .collect()
        }
        TableFormat::Json => Ok(serde_json::from_reader(r)?),
    }
}

pub fn rows_to_string(rows: &[ResultRow], format: TableFormat) -> Result<String, TableError> {
    let mut buf = Vec::new();
    write_rows(rows, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv and json output is utf-8"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> TableError + '_ {
    move |source| TableError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Rows of an existing table, or none if the file does not exist.
pub fn load_table(path: &Path, format: TableFormat) -> Result<Vec<ResultRow>, TableError> {
    match fs::File::open(path) {
        Ok(f) => read_rows(format, io::BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(io_err(path)(e)),
    }
}

/// Replaces `path` atomically with `rows`.
pub fn save_table(path: &Path, format: TableFormat, rows: &[ResultRow]) -> Result<(), TableError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    let mut w = io::BufWriter::new(file);
    write_rows(rows, format, &mut w)?;
    w.flush().map_err(io_err(&tmp))?;
    drop(w);
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    pub a: RangeInclusive<u64>,
    pub m: RangeInclusive<u64>,
    pub row: RowOptions,
    /// Stop after computing this many new rows (simulates an interruption).
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableOutcome {
    pub rows: Vec<ResultRow>,
    pub computed: usize,
    pub reused: usize,
    pub discrepancies: usize,
    pub budget: usize,
    /// False when `stop_after` cut the run short.
    pub complete: bool,
}

/// Every `(a, m)` cell of the grid with a valid instance, in `(a, m)` order.
pub fn grid(
    a: &RangeInclusive<u64>,
    m: &RangeInclusive<u64>,
) -> Result<Vec<EquationInstance>, TableError> {
    if a.is_empty() {
        return Err(TableError::EmptyRange(format!(
            "a={}..{}",
            a.start(),
            a.end()
        )));
    }
    if m.is_empty() {
        return Err(TableError::EmptyRange(format!(
            "m={}..{}",
            m.start(),
            m.end()
        )));
    }
    Ok(a.clone()
        .flat_map(|a| {
            m.clone()
                .filter_map(move |m| EquationInstance::new(m, a).ok())
        })
        .collect())
}

/// Computes the grid, reusing Proven rows found in `out`, and rewrites
/// `out` sorted by `(a, m)` after every new row.
pub fn run_table(
    spec: &TableSpec,
    out: Option<(&Path, TableFormat)>,
) -> Result<TableOutcome, TableError> {
    let cells = grid(&spec.a, &spec.m)?;
    let mut rows: std::collections::BTreeMap<(u64, u64), ResultRow> =
        std::collections::BTreeMap::new();
    if let Some((path, format)) = out {
        for mut row in load_table(path, format)? {
            if matches!(row.status, RowStatus::Proven | RowStatus::Discrepancy) {
                if spec.row.mode.uses_formula() {
                    let inst = EquationInstance::new(row.m, row.a).map_err(|e| {
                        TableError::Formula(FormulaError::Inconsistent {
                            m: row.m,
                            a: row.a,
                            detail: e.to_string(),
                        })
                    })?;
                    row.formula = Cell::from(rado_formula(&inst)?.value);
                    row.reconcile();
                }
                rows.insert(row.key(), row);
            }
        }
    }

    let mut outcome = TableOutcome {
        rows: Vec::new(),
        computed: 0,
        reused: 0,
        discrepancies: 0,
        budget: 0,
        complete: true,
    };
    for inst in &cells {
        let key = (inst.a(), inst.m());
        if rows.contains_key(&key) {
            outcome.reused += 1;
            continue;
        }
        if spec.stop_after.is_some_and(|n| outcome.computed >= n) {
            outcome.complete = false;
            break;
        }
        let row = compute_row(inst, &spec.row)?;
        rows.insert(key, row);
        outcome.computed += 1;
        if let Some((path, format)) = out {
            save_table(path, format, &rows.values().cloned().collect::<Vec<_>>())?;
        }
    }
    outcome.rows = rows.into_values().collect();
    if let Some((path, format)) = out {
        save_table(path, format, &outcome.rows)?;
    }
    outcome.discrepancies = outcome
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Discrepancy)
        .count();
    outcome.budget = outcome
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Budget)
        .count();
    Ok(outcome)
}
