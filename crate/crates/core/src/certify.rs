//! Mechanical checks of the explicit constructions behind the closed forms:
//! solution templates, named bad colorings, and the completion arithmetic
//! used to build a red solution inside `[C(m,a)]`.
//!
//! Every check is numeric over a bounded sweep. Reports list each failing
//! parameter tuple.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::bounds::{
    congruent_to_m_minus_one, ge_half_plus_one, ge_two_thirds_plus_one, le_three_halves_plus_one,
};
use crate::domain::{validate_compact, Coloring, CompactAssignment, EquationInstance, Group};
use crate::formula::{candidate_bound, closed_form_c, compute_c, decompose, FormulaError};
use crate::repr::{self, ReprError};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("unknown template id {0:?}")]
    UnknownTemplate(String),
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportStatus {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailCase {
    pub params: Vec<(String, i64)>,
    pub reason: String,
}

impl fmt::Display for FailCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "({}): {}", params.join(", "), self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateReport {
    pub id: String,
    pub sweep: String,
    pub passed: u64,
    pub failures: Vec<FailCase>,
    pub status: ReportStatus,
}

impl TemplateReport {
    pub fn is_pass(&self) -> bool {
        self.status == ReportStatus::Pass
    }
}

impl fmt::Display for TemplateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.is_pass() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {} [{}] {}/{}",
            self.id,
            self.sweep,
            self.passed,
            self.passed + self.failures.len() as u64
        )?;
        for fail in &self.failures {
            write!(f, "\n  fail {fail}")?;
        }
        Ok(())
    }
}

struct ReportBuilder {
    id: String,
    sweep: String,
    passed: u64,
    failures: Vec<FailCase>,
}

impl ReportBuilder {
    fn new(id: impl Into<String>, sweep: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            sweep: sweep.into(),
            passed: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, params: &[(&str, i64)], outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.passed += 1,
            Err(reason) => self.failures.push(FailCase {
                params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
                reason,
            }),
        }
    }

    fn finish(self) -> TemplateReport {
        let status = if self.failures.is_empty() {
            ReportStatus::Pass
        } else {
            ReportStatus::Fail
        };
        TemplateReport {
            id: self.id,
            sweep: self.sweep,
            passed: self.passed,
            failures: self.failures,
            status,
        }
    }
}

/// Parameter ranges for a sweep. Each template further restricts these to
/// the ranges where its construction applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    pub a_min: u64,
    pub a_max: u64,
    pub m_min: Option<u64>,
    pub m_max: Option<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            a_min: 3,
            a_max: 20,
            m_min: None,
            m_max: None,
        }
    }
}

impl SweepConfig {
    pub fn a_range(a_min: u64, a_max: u64) -> Self {
        Self {
            a_min,
            a_max,
            ..Self::default()
        }
    }

    fn a_values(&self, floor: u64) -> std::ops::RangeInclusive<u64> {
        self.a_min.max(floor)..=self.a_max
    }

    fn m_values(&self, lo: u64, hi: u64) -> std::ops::RangeInclusive<u64> {
        let lo = self.m_min.map_or(lo, |m| m.max(lo));
        let hi = self.m_max.map_or(hi, |m| m.min(hi));
        lo..=hi
    }

    fn contains(&self, m: u64, a: u64) -> bool {
        (self.a_min..=self.a_max).contains(&a)
            && self.m_min.is_none_or(|lo| m >= lo)
            && self.m_max.is_none_or(|hi| m <= hi)
    }

    fn describe(&self) -> String {
        let mut s = format!("a={}..{}", self.a_min, self.a_max);
        if self.m_min.is_some() || self.m_max.is_some() {
            s.push_str(&format!(
                ", m={}..{}",
                self.m_min.map_or("*".into(), |m| m.to_string()),
                self.m_max.map_or("*".into(), |m| m.to_string())
            ));
        }
        s
    }
}

/// One instantiated template: the assignment must solve `L(m,a)` using
/// only values in `[bound]`.
#[derive(Debug, Clone)]
pub struct TemplateCase {
    pub params: Vec<(&'static str, i64)>,
    pub m: u64,
    pub a: u64,
    pub bound: u64,
    /// Signed `(count, value)` pairs; a negative entry is a template defect.
    pub groups: Vec<(i64, i64)>,
}

impl TemplateCase {
    fn check(&self) -> Result<(), String> {
        let inst = EquationInstance::new(self.m, self.a).map_err(|e| e.to_string())?;
        let mut groups = Vec::with_capacity(self.groups.len());
        for &(count, value) in &self.groups {
            if count < 0 || value < 1 {
                return Err(format!("bad group {count}->{value}"));
            }
            groups.push(Group {
                count: count as u64,
                value: value as u64,
            });
        }
        let asg = CompactAssignment::new(groups);
        match validate_compact(&inst, &asg) {
            Ok(true) => {}
            Ok(false) => return Err(format!("{asg} is not a solution")),
            Err(e) => return Err(format!("{asg}: {e}")),
        }
        if let Some(v) = asg.max_value().filter(|&v| v > self.bound) {
            return Err(format!("{asg} uses {v} > {}", self.bound));
        }
        Ok(())
    }
}

type CaseGen = fn(&SweepConfig) -> Vec<TemplateCase>;

/// A named family of compact solutions parameterized over a sweep.
#[derive(Clone, Copy)]
pub struct Template {
    pub id: &'static str,
    pub description: &'static str,
    pub cases: CaseGen,
}

fn case(
    params: &[(&'static str, u64)],
    m: u64,
    a: u64,
    bound: u64,
    groups: &[(i64, i64)],
) -> TemplateCase {
    TemplateCase {
        params: params.iter().map(|&(k, v)| (k, v as i64)).collect(),
        m,
        a,
        bound,
        groups: groups.to_vec(),
    }
}

/// `m` just above the square boundary: `a^2 - a + 2 ..= a^2 + 4a`.
fn upper_m(cfg: &SweepConfig, a: u64) -> std::ops::RangeInclusive<u64> {
    cfg.m_values(a * a - a + 2, a * a + 4 * a)
}

fn upper_run_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    let mut out = Vec::new();
    for a in cfg.a_values(4) {
        for m in upper_m(cfg, a) {
            let bound = candidate_bound(m, a);
            for j in 0..a {
                let (mi, ai, ji) = (m as i64, a as i64, j as i64);
                out.push(case(
                    &[("a", a), ("m", m), ("j", j)],
                    m,
                    a,
                    bound,
                    &[
                        (mi - 2 * ai + 2 * ji + 1, ai),
                        (ai - 1 - ji, ai - 1),
                        (ai - 1 - ji, 1),
                        (1, mi - ai + ji),
                    ],
                ));
            }
        }
    }
    out
}

fn lower_run_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    let mut out = Vec::new();
    for a in cfg.a_values(4) {
        for m in upper_m(cfg, a) {
            let bound = candidate_bound(m, a);
            for j in 0..a {
                let (mi, ai, ji) = (m as i64, a as i64, j as i64);
                out.push(case(
                    &[("a", a), ("m", m), ("j", j)],
                    m,
                    a,
                    bound,
                    &[(mi - ai + ji, ji + 1), (ai - ji, mi - ai + ji)],
                ));
            }
        }
    }
    out
}

/// `d = (m-1)j + k` with `1 <= j <= a-1`, `0 <= k <= m-1`.
fn split_multiple(d: u64, m: u64, a: u64) -> (u64, u64) {
    let j = d / (m - 1);
    if j >= a {
        (a - 1, d - (a - 1) * (m - 1))
    } else {
        (j, d - j * (m - 1))
    }
}

fn quotient_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    let mut out = Vec::new();
    for a in cfg.a_values(4) {
        for m in upper_m(cfg, a) {
            let bound = candidate_bound(m, a);
            let first = (m - 1).div_ceil(a) * a;
            for d in (first..=a * (m - 1)).step_by(a as usize) {
                let (j, k) = split_multiple(d, m, a);
                let (mi, ji, ki) = (m as i64, j as i64, k as i64);
                out.push(case(
                    &[("a", a), ("m", m), ("d", d)],
                    m,
                    a,
                    bound,
                    &[(mi - 1 - ki, ji), (ki, ji + 1), (1, (d / a) as i64)],
                ));
            }
        }
    }
    out
}

fn square_boundary_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    let mut out = Vec::new();
    for a in cfg.a_values(3) {
        let m = a * a - a + 1;
        if !cfg.contains(m, a) {
            continue;
        }
        let bound = candidate_bound(m, a);
        let (ai, sq) = (a as i64, ((a - 1) * (a - 1)) as i64);
        let p = [("a", a), ("m", m)];
        out.push(case(&p, m, a, bound, &[(ai * ai - ai, 1), (1, ai - 1)]));
        out.push(case(&p, m, a, bound, &[(ai * ai - ai, ai - 1), (1, sq)]));
        out.push(case(&p, m, a, bound, &[(sq, 1), (ai, sq)]));
    }
    out
}

fn fixed_cases(
    cfg: &SweepConfig,
    m: u64,
    a: u64,
    bound: u64,
    list: &[&[(i64, i64)]],
) -> Vec<TemplateCase> {
    if !cfg.contains(m, a) {
        return Vec::new();
    }
    list.iter()
        .enumerate()
        .map(|(i, groups)| {
            case(
                &[("a", a), ("m", m), ("case", i as u64)],
                m,
                a,
                bound,
                groups,
            )
        })
        .collect()
}

fn m4_a5_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    fixed_cases(
        cfg,
        4,
        5,
        9,
        &[
            &[(3, 5), (1, 3)],
            &[(2, 6), (2, 3)],
            &[(2, 7), (1, 6), (1, 4)],
            &[(2, 8), (2, 4)],
            &[(1, 9), (3, 3)],
            &[(1, 5), (1, 6), (1, 9), (1, 4)],
        ],
    )
}

fn m11_a4_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    fixed_cases(
        cfg,
        11,
        4,
        candidate_bound(11, 4),
        &[
            &[(10, 2), (1, 5)],
            &[(6, 2), (4, 3), (1, 6)],
            &[(8, 1), (2, 6), (1, 5)],
        ],
    )
}

fn band4_m_eq_a_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    cfg.a_values(4)
        .filter(|&a| cfg.contains(a, a))
        .map(|a| {
            let ai = a as i64;
            case(
                &[("a", a), ("m", a)],
                a,
                a,
                4,
                &[(ai - 4, 3), (3, 4), (1, 3)],
            )
        })
        .collect()
}

fn band5_m_eq_a_minus_4_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    let mut out = Vec::new();
    for a in cfg.a_values(10).filter(|&a| a <= 14) {
        let m = a - 4;
        if !cfg.contains(m, a) {
            continue;
        }
        let ai = a as i64;
        let p = [("a", a), ("m", m)];
        out.push(case(&p, m, a, 6, &[(5, 6), (ai - 9, 3)]));
        out.push(case(&p, m, a, 6, &[(1, 6), (ai - 5, 1)]));
    }
    out
}

fn tail_c0_cases(cfg: &SweepConfig) -> Vec<TemplateCase> {
    let mut out = Vec::new();
    for a in cfg.a_values(4) {
        for v in 3..a {
            let m = a * v;
            if !cfg.contains(m, a) {
                continue;
            }
            let (mi, ai, vi) = (m as i64, a as i64, v as i64);
            out.push(case(
                &[("a", a), ("m", m), ("v", v)],
                m,
                a,
                candidate_bound(m, a),
                &[
                    (mi - ai - 1, 1),
                    (ai - 1, 2 * vi),
                    (1, 2 * vi + 1),
                    (1, 3 * vi - 1),
                ],
            ));
        }
    }
    out
}

/// All built-in template families.
pub const TEMPLATES: &[Template] = &[
    Template {
        id: "upper-run",
        description: "forces m-a..m-1 from 1, a-1, a",
        cases: upper_run_cases,
    },
    Template {
        id: "lower-run",
        description: "forces 1..a from m-a..m-1",
        cases: lower_run_cases,
    },
    Template {
        id: "quotient",
        description: "forces d/a for a|d, m-1 <= d <= a(m-1)",
        cases: quotient_cases,
    },
    Template {
        id: "square-boundary",
        description: "m = a^2-a+1 solutions in [(a-1)^2]",
        cases: square_boundary_cases,
    },
    Template {
        id: "m4-a5",
        description: "solutions fixing the unique bad coloring of [8] for (4,5)",
        cases: m4_a5_cases,
    },
    Template {
        id: "m11-a4",
        description: "solutions for (11,4) with 2,3 blue",
        cases: m11_a4_cases,
    },
    Template {
        id: "band4-m=a",
        description: "[a-4->3; 3->4; 1->3] for m=a",
        cases: band4_m_eq_a_cases,
    },
    Template {
        id: "band5-m=a-4",
        description: "solutions for m=a-4, 10<=a<=14",
        cases: band5_m_eq_a_minus_4_cases,
    },
    Template {
        id: "tail-c0",
        description: "[m-a-1->1; a-1->2v; 1->2v+1; 1->3v-1] for m=av",
        cases: tail_c0_cases,
    },
];

fn corrupt_cases(_: &SweepConfig) -> Vec<TemplateCase> {
    vec![
        case(&[("a", 3), ("m", 7)], 7, 3, 10, &[(6, 3), (1, 6)]),
        case(&[("a", 3), ("m", 7)], 7, 3, 10, &[(6, 3), (1, 7)]),
    ]
}

/// Deliberately wrong family, used to exercise failure reporting.
#[doc(hidden)]
pub const CORRUPT_TEMPLATE: Template = Template {
    id: "corrupt-fixture",
    description: "second case is not a solution",
    cases: corrupt_cases,
};

pub fn template_by_id(id: &str) -> Option<&'static Template> {
    TEMPLATES.iter().find(|t| t.id == id)
}

/// Instantiates `template` across the sweep and checks every case.
pub fn run_template(template: &Template, cfg: &SweepConfig) -> TemplateReport {
    let mut report = ReportBuilder::new(template.id, cfg.describe());
    for case in (template.cases)(cfg) {
        let params: Vec<(&str, i64)> = case.params.clone();
        report.record(&params, case.check());
    }
    report.finish()
}

pub fn verify_template(id: &str, cfg: &SweepConfig) -> Result<TemplateReport, CertifyError> {
    let template =
        template_by_id(id).ok_or_else(|| CertifyError::UnknownTemplate(id.to_string()))?;
    Ok(run_template(template, cfg))
}

/// A named coloring together with the instances it is claimed bad for.
#[derive(Debug, Clone)]
pub struct BadColoringEntry {
    pub id: &'static str,
    pub coloring: Coloring,
    pub instances: Vec<(u64, u64)>,
}

fn band_instances(
    cfg: &SweepConfig,
    floor: u64,
    keep: impl Fn(u64, u64) -> bool,
) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for a in cfg.a_values(floor) {
        for m in 3..=2 * a + 1 {
            if keep(m, a) && cfg.contains(m, a) {
                out.push((m, a));
            }
        }
    }
    out
}

fn in_band5(m: u64, a: u64) -> bool {
    ge_half_plus_one(m, a) && !ge_two_thirds_plus_one(m, a)
}

/// The named bad colorings and the ranges they are claimed for.
pub fn bad_coloring_catalog(cfg: &SweepConfig) -> Vec<BadColoringEntry> {
    vec![
        BadColoringEntry {
            id: "R{1,3} B{2}",
            coloring: Coloring::from_red_set(3, &[1, 3]).expect("n > 0"),
            instances: band_instances(cfg, 3, |m, a| {
                ge_two_thirds_plus_one(m, a) && m <= a && !congruent_to_m_minus_one(a, m, 2)
            }),
        },
        BadColoringEntry {
            id: "R{1,4} B{2,3}",
            coloring: Coloring::from_red_set(4, &[1, 4]).expect("n > 0"),
            instances: band_instances(cfg, 3, |m, a| {
                let high = !le_three_halves_plus_one(m, a) && m >= a + 2;
                (high || in_band5(m, a)) && !congruent_to_m_minus_one(a, m, 3)
            }),
        },
        BadColoringEntry {
            id: "R{1} B{2,3}",
            coloring: Coloring::from_red_set(3, &[1]).expect("n > 0"),
            instances: band_instances(cfg, 4, in_band5),
        },
        BadColoringEntry {
            id: "R{1,4,5} B{2,3}",
            coloring: Coloring::from_red_set(5, &[1, 4, 5]).expect("n > 0"),
            instances: band_instances(cfg, 10, |m, a| a <= 14 && m + 4 == a),
        },
        BadColoringEntry {
            id: "R{1,4,5,6} B{2,3,7,8}",
            coloring: Coloring::from_red_set(8, &[1, 4, 5, 6]).expect("n > 0"),
            instances: band_instances(cfg, 5, |m, a| (m, a) == (4, 5)),
        },
    ]
}

pub fn check_bad_colorings(
    catalog: &[BadColoringEntry],
    sweep: &str,
) -> Result<TemplateReport, CertifyError> {
    let mut report = ReportBuilder::new("bad-colorings", sweep);
    for entry in catalog {
        for &(m, a) in &entry.instances {
            let inst = EquationInstance::new(m, a).map_err(|e| {
                CertifyError::Formula(FormulaError::Inconsistent {
                    m,
                    a,
                    detail: e.to_string(),
                })
            })?;
            let outcome = match repr::find_mono_solution(&inst, &entry.coloring)? {
                None => Ok(()),
                Some(w) => Err(format!("{} refuted by {w}", entry.id)),
            };
            report.record(
                &[
                    ("a", a as i64),
                    ("m", m as i64),
                    ("n", entry.coloring.n() as i64),
                ],
                outcome,
            );
        }
    }
    Ok(report.finish())
}

pub fn verify_bad_colorings(cfg: &SweepConfig) -> Result<TemplateReport, CertifyError> {
    check_bad_colorings(&bad_coloring_catalog(cfg), &cfg.describe())
}

/// The element used to build a red solution inside `[C(m,a)]` when the
/// residue `c` of `m` mod `a` is 0 or at least 2, together with the
/// completion the remaining variables must supply from values in `[a]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionConstruction {
    pub a: u64,
    pub m: u64,
    pub u: u64,
    pub v: u64,
    pub c: u64,
    /// Zero when `c = 0`.
    pub t: u64,
    /// Zero when `c = 0`.
    pub gamma: u64,
    /// Red element with `s + 1` blue.
    pub s: u64,
    /// The constructed element assigned to `x_{m-2}, x_{m-1}, x_m`.
    pub alpha_or_beta: u64,
    /// How many variables receive the value `s`.
    pub s_count: u64,
    pub completion_count: u64,
    pub completion_target: u64,
}

fn exact_div(num: i128, den: i128, what: &str) -> Result<u64, String> {
    if num < 0 || num % den != 0 {
        return Err(format!("{what} = {num}/{den} is not a nonnegative integer"));
    }
    Ok((num / den) as u64)
}

impl CompletionConstruction {
    /// Largest admissible `s`: `s + 1` may not exceed the blue quotient
    /// `m/a` (c = 0) or `(m+a-c)/a` (c >= 2). `None` when `c = 1`.
    pub fn max_s(m: u64, a: u64) -> Option<u64> {
        let c = m % a;
        match c {
            0 => Some(m / a - 1),
            1 => None,
            _ => Some((m + a - c) / a - 1),
        }
    }

    /// Builds the construction for `s`. `Ok(None)` when `c = 1`.
    pub fn new(m: u64, a: u64, s: u64) -> Result<Option<Self>, String> {
        let inst = EquationInstance::new(m, a).map_err(|e| e.to_string())?;
        let d = decompose(&inst).map_err(|e| e.to_string())?;
        let (mi, ai, vi, ci, si) = (m as i128, a as i128, d.v as i128, d.c as i128, s as i128);
        let sq = ai * ai;
        let out = match d.c {
            1 => return Ok(None),
            0 => {
                let alpha = exact_div(
                    (mi - ai) * (si + 1) * ai + (ai - 1) * mi + vi * ai,
                    sq,
                    "alpha",
                )?;
                let count = exact_div(2 * mi + ai * (ai - 5), ai, "completion count")?;
                let target = exact_div(
                    (ai - 2) * (mi - ai) * ai + (ai - 2) * ((ai - 1) * mi + vi * ai),
                    sq,
                    "completion target",
                )?;
                Self {
                    a,
                    m,
                    u: d.u,
                    v: d.v,
                    c: 0,
                    t: 0,
                    gamma: 0,
                    s,
                    alpha_or_beta: alpha,
                    s_count: exact_div((ai - 2) * (mi - ai), ai, "s count")?,
                    completion_count: count,
                    completion_target: target,
                }
            }
            _ => {
                let t = d.t().expect("c >= 2");
                let gamma = d.gamma().expect("c >= 2");
                let gi = gamma as i128;
                let tail = (ci - 1) * (mi + ai - ci) + ai * gi;
                let beta = exact_div((mi - ci) * (si + 1) * ai + tail, sq, "beta")?;
                let count = exact_div(2 * (mi - ci) + ai * (ci - 3), ai, "completion count")?;
                let target = exact_div(
                    (ai - 2) * (mi - ci) * ai + (ai - 2) * tail,
                    sq,
                    "completion target",
                )?;
                Self {
                    a,
                    m,
                    u: d.u,
                    v: d.v,
                    c: d.c,
                    t,
                    gamma,
                    s,
                    alpha_or_beta: beta,
                    s_count: exact_div((ai - 2) * (mi - ci), ai, "s count")?,
                    completion_count: count,
                    completion_target: target,
                }
            }
        };
        Ok(Some(out))
    }

    /// `(m + a - c)/a`, the blue quotient (`m/a` when `c = 0`).
    pub fn quotient(&self) -> u64 {
        if self.c == 0 {
            self.m / self.a
        } else {
            (self.m + self.a - self.c) / self.a
        }
    }

    /// The solution certifying the constructed element (only for `c >= 2`):
    /// `[m-c -> s+1; c-2 -> q; 1 -> q+gamma; 1 -> beta]`.
    pub fn element_solution(&self) -> Option<CompactAssignment> {
        (self.c >= 2).then(|| {
            let q = self.quotient();
            CompactAssignment::from_pairs(&[
                (self.m - self.c, self.s + 1),
                (self.c - 2, q),
                (1, q + self.gamma),
                (1, self.alpha_or_beta),
            ])
        })
    }

    /// Assembles the full red solution from a completion multiset.
    pub fn red_solution(&self, completion: &[u64]) -> CompactAssignment {
        let mut groups = repr::runs(completion);
        groups.push(Group {
            count: self.s_count,
            value: self.s,
        });
        groups.push(Group {
            count: 3,
            value: self.alpha_or_beta,
        });
        CompactAssignment::new(groups)
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solves(inst: &EquationInstance, asg: &CompactAssignment, bound: u64) -> Result<(), String> {
    match validate_compact(inst, asg) {
        Ok(true) => {}
        Ok(false) => return Err(format!("{asg} is not a solution")),
        Err(e) => return Err(format!("{asg}: {e}")),
    }
    ensure(asg.max_value().is_none_or(|v| v <= bound), || {
        format!("{asg} leaves [{bound}]")
    })
}

/// Every check for one `(m, a)` above the square boundary.
fn check_completion_cell(m: u64, a: u64) -> Result<(), String> {
    let inst = EquationInstance::new(m, a).map_err(|e| e.to_string())?;
    let cap = compute_c(&inst);
    let d = decompose(&inst).map_err(|e| e.to_string())?;
    ensure(d.recompose() == m, || {
        format!("decomposition {d:?} does not recompose")
    })?;
    let closed = closed_form_c(&inst).map_err(|e| e.to_string())?;
    ensure(closed == cap, || {
        format!("closed form {closed} != C = {cap}")
    })?;
    ensure(m - 1 <= cap, || format!("m-1 = {} > C = {cap}", m - 1))?;

    if let (Some(t), Some(gamma)) = (d.t(), d.gamma()) {
        ensure(gamma <= a, || format!("gamma = {gamma} > a"))?;
        ensure((1..=d.v + 1).contains(&t), || {
            format!("t = {t} outside [1, v+1]")
        })?;
        ensure(m + a - 2 + a * a <= a * (m - 1), || {
            "m+a-2+a^2 > a(m-1)".to_string()
        })?;
        let aux = m + a - d.c + a * gamma;
        ensure(
            aux.is_multiple_of(a) && m - 1 <= aux && aux <= a * (m - 1),
            || format!("auxiliary multiple {aux} outside [m-1, a(m-1)]"),
        )?;
    }

    let Some(max_s) = CompletionConstruction::max_s(m, a) else {
        return Ok(());
    };
    let allowed: Vec<u64> = (1..=a).collect();
    let mut completion: Option<Vec<u64>> = None;
    for s in 1..=max_s {
        let cons = CompletionConstruction::new(m, a, s)?.expect("c != 1");
        let (count, target) = (cons.completion_count, cons.completion_target);
        ensure(count <= target && target <= a * count, || {
            format!("completion {count} <= {target} <= {} fails", a * count)
        })?;
        ensure(cons.alpha_or_beta <= cap, || {
            format!(
                "constructed element {} > C = {cap} at s={s}",
                cons.alpha_or_beta
            )
        })?;
        ensure(
            (a - 2) * cons.alpha_or_beta == cons.s_count * s + target,
            || format!("completion target {target} does not close the equation at s={s}"),
        )?;
        if let Some(asg) = cons.element_solution() {
            solves(&inst, &asg, cap)?;
        }
        if completion.is_none() {
            completion = Some(
                repr::extract_composition(&allowed, count, target)
                    .map_err(|e| e.to_string())?
                    .ok_or_else(|| format!("{target} is not a sum of {count} values in [a]"))?,
            );
        }
        let red = cons.red_solution(completion.as_deref().expect("set above"));
        solves(&inst, &red, cap)?;
    }
    Ok(())
}

/// `n(m-1) <= a C <= (n+1)(m-1)` with `n = ceil((m-1)/a)`, and the 1-or-2
/// completion placing `C` on `x_m` and `a - j` left variables.
fn check_sandwich_cell(m: u64, a: u64) -> Result<(), String> {
    let inst = EquationInstance::new(m, a).map_err(|e| e.to_string())?;
    let cap = compute_c(&inst);
    let n = (m - 1).div_ceil(a);
    ensure(
        n * (m - 1) <= a * cap && a * cap <= (n + 1) * (m - 1),
        || {
            format!(
                "sandwich {} <= {} <= {} fails (n={n}, C={cap})",
                n * (m - 1),
                a * cap,
                (n + 1) * (m - 1)
            )
        },
    )?;
    ensure(n < cap, || format!("n+1 = {} > C = {cap}", n + 1))?;
    for k in [n, n + 1] {
        ensure(m - 1 <= a * k && a * k <= 2 * (m - 1), || {
            format!("a*{k} outside [m-1, 2(m-1)]")
        })?;
    }

    if a >= 4 && m + a <= a * a {
        let (v, c) = (m / a, m % a);
        let need = |j: u64| a * (v - 1) + j + c - 1;
        let j = (1..=a)
            .find(|&j| need(j) <= j * cap)
            .ok_or_else(|| "no j in [1, a] meets the lower inequality".to_string())?;
        ensure(j * cap <= 2 * need(j), || {
            format!("j={j}: {} > 2*{}", j * cap, need(j))
        })?;
        let comp = repr::extract_composition(&[1, 2], need(j), j * cap)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("j={j}: {} not a sum of {} ones and twos", j * cap, need(j)))?;
        let mut groups = repr::runs(&comp);
        groups.push(Group {
            count: a - j + 1,
            value: cap,
        });
        solves(&inst, &CompactAssignment::new(groups), cap)?;
    }
    Ok(())
}

/// Completion arithmetic above the square boundary (`a >= 4`,
/// `m in [a^2-a+2, a^2+4a]`) plus the candidate-bound sandwich on
/// `m in [2a+2, a^2+4a]` (`a >= 3`).
pub fn verify_completion(cfg: &SweepConfig) -> TemplateReport {
    let mut report = ReportBuilder::new(
        "completion",
        format!(
            "{}; completion a>=4, m=a^2-a+2..a^2+4a; sandwich a>=3, m=2a+2..a^2+4a",
            cfg.describe()
        ),
    );
    for a in cfg.a_values(4) {
        for m in upper_m(cfg, a) {
            let params = [("check", 0), ("a", a as i64), ("m", m as i64)];
            report.record(&params, check_completion_cell(m, a));
        }
    }
    for a in cfg.a_values(3) {
        for m in cfg.m_values(2 * a + 2, a * a + 4 * a) {
            let params = [("check", 1), ("a", a as i64), ("m", m as i64)];
            report.record(&params, check_sandwich_cell(m, a));
        }
    }
    report.finish()
}

/// Every template, the bad-coloring catalog, and the completion checks.
pub fn run_all(cfg: &SweepConfig) -> Result<Vec<TemplateReport>, CertifyError> {
    let mut reports: Vec<TemplateReport> = TEMPLATES.iter().map(|t| run_template(t, cfg)).collect();
    reports.push(verify_bad_colorings(cfg)?);
    reports.push(verify_completion(cfg));
    Ok(reports)
}
