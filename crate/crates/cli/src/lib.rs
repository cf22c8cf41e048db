//! Report formats and the parallel chain runner behind the `nlie` binary.
//!
//! Every report carries the resolved truncation `M`, the characteristic, the
//! mode and the tool version. JSON field order is fixed by the structs below,
//! so output is byte-identical across runs and across `--jobs` settings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use nlie_core::classify::{Condition, LambdaPolynomial, Satisfiability, SweepRow};
use nlie_core::qmaps::Witness;
use nlie_core::support::PartitionPair;
use nlie_core::{
    AlgebraElement, CheckOptions, CheckPlan, CheckReport, Coefficient, DecomposedForm, MultiIndex,
    WronskianSum,
};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = nlie_core::VERSION;

/// Resolved settings of one invocation that checks a single multiplication.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub p: u64,
    pub psi: WronskianSum,
    pub options: CheckOptions,
    pub json: bool,
    pub jobs: usize,
}

/// Reads a multiplication from either `--w 0,1,2` or `--sum "V[0,1] + ..."`.
pub fn parse_psi(w: Option<&str>, sum: Option<&str>) -> Result<WronskianSum> {
    match (w, sum) {
        (Some(w), None) => Ok(WronskianSum::single(
            MultiIndex::parse(w).with_context(|| format!("--w {w:?}"))?,
        )),
        (None, Some(s)) => WronskianSum::parse(s).with_context(|| format!("--sum {s:?}")),
        (Some(_), Some(_)) => bail!("give either --w or --sum, not both"),
        (None, None) => bail!("a multiplication is required: --w <orders> or --sum <expr>"),
    }
}

/// Checks a plan, fanning chains out over `jobs` worker threads. The result
/// matches [`CheckPlan::run`] exactly: chains are scanned in blocks and the
/// least failing index of the first failing block wins.
pub struct Runner {
    pool: Option<rayon::ThreadPool>,
}

const BLOCK: u64 = 4096;

impl Runner {
    pub fn new(jobs: usize) -> Result<Self> {
        let pool = if jobs > 1 {
            Some(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
        } else {
            None
        };
        Ok(Runner { pool })
    }

    pub fn run(&self, plan: &CheckPlan) -> nlie_core::Result<CheckReport> {
        let Some(pool) = &self.pool else {
            return plan.run();
        };
        let total = plan.chain_count();
        let mut start = 0;
        while start < total {
            let end = (start + BLOCK).min(total);
            let hit = pool.install(|| {
                (start..end).into_par_iter().find_map_first(|idx| {
                    match plan.evaluate(&plan.chain(idx)) {
                        Ok(v) if v.is_zero() => None,
                        Ok(v) => Some(Ok((idx, v))),
                        Err(e) => Some(Err(e)),
                    }
                })
            });
            if let Some(hit) = hit {
                return plan.report(Some(hit?));
            }
            start = end;
        }
        plan.report(None)
    }
}

/// Scalars become JSON integers when they fit, otherwise strings such as
/// `"5/7"`. Residues use the centered representative.
pub fn coefficient_json(c: &Coefficient) -> Value {
    let c = c.centered();
    match c.to_integer().and_then(|i| i.to_i64()) {
        Some(i) => Value::from(i),
        None => Value::from(c.to_string()),
    }
}

/// `[[exp, coeff], ...]` for every term.
pub fn element_terms(e: &AlgebraElement) -> Value {
    Value::Array(
        e.terms()
            .map(|(i, c)| Value::Array(vec![Value::from(i), coefficient_json(c)]))
            .collect(),
    )
}

/// A basis monomial as `[exp, coeff]`; a general element as its term list.
pub fn argument_json(e: &AlgebraElement) -> Value {
    let terms: Vec<_> = e.terms().collect();
    match terms.as_slice() {
        [(i, c)] => Value::Array(vec![Value::from(*i), coefficient_json(c)]),
        _ => element_terms(e),
    }
}

/// A scalar value as a number (or string), anything else as its term list.
pub fn value_json(e: &AlgebraElement) -> Value {
    if e.is_scalar() {
        coefficient_json(&e.constant_term())
    } else {
        element_terms(e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessJson {
    pub args: Vec<Value>,
    pub value: Value,
}

impl From<&Witness> for WitnessJson {
    fn from(w: &Witness) -> Self {
        WitnessJson {
            args: w.args.iter().map(argument_json).collect(),
            value: value_json(&w.value),
        }
    }
}

/// `[alpha, beta, lambda]`.
pub type TableRow = (Vec<u32>, Vec<u32>, Value);

/// The common report schema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub identity: String,
    pub psi: String,
    pub p: u64,
    #[serde(rename = "M")]
    pub max_degree: u32,
    pub mode: String,
    pub verdict: bool,
    pub witness: Option<WitnessJson>,
    pub chains: u64,
    pub chains_total: u64,
    pub table: Option<Vec<TableRow>>,
    pub version: &'static str,
}

impl From<&CheckReport> for Report {
    fn from(r: &CheckReport) -> Self {
        Report {
            identity: r.identity.clone(),
            psi: r.psi.clone(),
            p: r.p,
            max_degree: r.max_degree,
            mode: r.mode.name().to_string(),
            verdict: r.verdict,
            witness: r.witness.as_ref().map(WitnessJson::from),
            chains: r.chains_examined,
            chains_total: r.chains_total,
            table: None,
            version: VERSION,
        }
    }
}

pub fn table_rows(entries: impl IntoIterator<Item = (PartitionPair, Coefficient)>) -> Vec<TableRow> {
    entries
        .into_iter()
        .map(|(pair, c)| {
            (
                pair.alpha.orders().to_vec(),
                pair.beta.orders().to_vec(),
                coefficient_json(&c),
            )
        })
        .collect()
}

/// Decomposition report. `verdict` says whether the defect map vanishes;
/// `chains` counts the pairs of `Γ` that were evaluated.
pub fn decomposition_report(
    identity: &str,
    psi: &WronskianSum,
    p: u64,
    form: &DecomposedForm,
    zeros: bool,
) -> Report {
    let pairs = form.full_table().map_or(form.len() as u64, |t| t.len() as u64);
    let rows = if zeros {
        form.full_table().unwrap_or_default()
    } else {
        form.entries().map(|(a, c)| (a.clone(), c.clone())).collect()
    };
    Report {
        identity: identity.to_string(),
        psi: psi.to_string(),
        p,
        max_degree: form.weight().unwrap_or(0) as u32,
        mode: "support".to_string(),
        verdict: form.is_empty(),
        witness: None,
        chains: pairs,
        chains_total: pairs,
        table: Some(table_rows(rows)),
        version: VERSION,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

fn tuple(args: &[AlgebraElement]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Plain-text rendering of a check report.
pub fn render_report(r: &CheckReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "identity: {}", r.identity);
    let _ = writeln!(out, "psi:      {}", r.psi);
    let _ = writeln!(out, "p:        {}", r.p);
    let _ = writeln!(out, "M:        {}", r.max_degree);
    let _ = writeln!(out, "mode:     {}", r.mode.name());
    let _ = writeln!(out, "chains:   {}/{}", r.chains_examined, r.chains_total);
    if let Some(w) = &r.witness {
        let _ = writeln!(out, "witness:  {}", tuple(&w.args));
        let _ = writeln!(out, "value:    {}", w.value);
    }
    let _ = writeln!(out, "verdict:  {}", r.verdict);
    let _ = writeln!(out, "version:  {VERSION}");
    out
}

/// Plain-text rendering of a decomposition; zeros are listed when asked for.
pub fn render_decomposition(identity: &str, psi: &WronskianSum, p: u64, form: &DecomposedForm, zeros: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "identity: {identity}");
    let _ = writeln!(out, "psi:      {psi}");
    let _ = writeln!(out, "p:        {p}");
    let _ = writeln!(out, "shape:    ({}, {}), weight {}", form.k(), form.l(), form.weight().unwrap_or(0));
    let rows: Vec<(PartitionPair, Coefficient)> = if zeros {
        form.full_table().unwrap_or_default()
    } else {
        form.entries().map(|(a, c)| (a.clone(), c.clone())).collect()
    };
    for (pair, c) in &rows {
        let _ = writeln!(out, "  {pair:<28} {}", c.centered());
    }
    let _ = writeln!(out, "form:     {form}");
    let _ = writeln!(out, "version:  {VERSION}");
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyRowJson {
    pub k: u32,
    pub p: u64,
    pub psi: String,
    pub reports: Vec<Report>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRowJson {
    pub family: String,
    pub params: String,
    pub report: Report,
}

impl From<&SweepRow> for SweepRowJson {
    fn from(r: &SweepRow) -> Self {
        SweepRowJson {
            family: r.instance.family.clone(),
            params: r.instance.params.clone(),
            report: Report::from(&r.report),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionJson {
    pub gamma: Vec<u32>,
    pub polynomial: String,
}

impl From<&Condition> for ConditionJson {
    fn from(c: &Condition) -> Self {
        ConditionJson {
            gamma: c.gamma.orders().to_vec(),
            polynomial: c.polynomial.to_string(),
        }
    }
}

pub fn satisfiability_text(s: &Satisfiability) -> String {
    match s {
        Satisfiability::Unconstrained => "unconstrained".to_string(),
        Satisfiability::SingleCondition(p) => format!("single condition {p} = 0"),
        Satisfiability::Points { unknowns, rational } => {
            if rational.is_empty() {
                return format!("no rational solution in ({})", unknowns.join(", "));
            }
            let pts: Vec<String> = rational
                .iter()
                .map(|pt| {
                    let vals: Vec<String> = unknowns.iter().zip(pt).map(|(u, v)| format!("{u}={v}")).collect();
                    vals.join(", ")
                })
                .collect();
            format!("finitely many solutions: {}", pts.join("; "))
        }
        Satisfiability::Infeasible => "infeasible".to_string(),
        Satisfiability::Undecided => "undecided".to_string(),
    }
}

/// Conditions of one arity with their common factor, when there is one.
pub fn common_condition(conditions: &[Condition]) -> Option<LambdaPolynomial> {
    let first = conditions.first()?.polynomial.primitive();
    conditions
        .iter()
        .all(|c| c.polynomial.primitive().ratio_to(&first).is_some())
        .then_some(first)
}

#[derive(Clone, Debug, Serialize)]
pub struct ArityJson {
    pub n: usize,
    pub conditions: Vec<ConditionJson>,
    pub common: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub identity: &'static str,
    pub psi: String,
    pub p: u64,
    pub mode: String,
    pub rule: String,
    pub verdict: bool,
    pub arities: Vec<ArityJson>,
    pub satisfiability: String,
    pub version: &'static str,
}

pub fn family_arities(conditions: &BTreeMap<usize, Vec<Condition>>) -> Vec<ArityJson> {
    conditions
        .iter()
        .map(|(&n, cs)| ArityJson {
            n,
            conditions: cs.iter().map(ConditionJson::from).collect(),
            common: common_condition(cs).map(|p| p.to_string()),
        })
        .collect()
}

pub fn render_family(report: &FamilyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "family:   {}", report.psi);
    let _ = writeln!(out, "mode:     {} (sign rule {})", report.mode, report.rule);
    for a in &report.arities {
        if a.conditions.is_empty() {
            let _ = writeln!(out, "n={}: residual vanishes", a.n);
            continue;
        }
        let _ = writeln!(out, "n={}: {} nonzero coefficient(s)", a.n, a.conditions.len());
        for c in &a.conditions {
            let g: Vec<String> = c.gamma.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "  V[{}]: {}", g.join(","), c.polynomial);
        }
        if let Some(common) = &a.common {
            let _ = writeln!(out, "  every coefficient is a multiple of {common}");
        }
    }
    let _ = writeln!(out, "solutions: {}", report.satisfiability);
    let _ = writeln!(out, "verdict:  {}", report.verdict);
    let _ = writeln!(out, "version:  {VERSION}");
    out
}
