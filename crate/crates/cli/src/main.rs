use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nlie::{
    decomposition_report, family_arities, parse_psi, render_decomposition, render_family, render_report,
    satisfiability_text, to_json, ClassifyRowJson, FamilyReport, Report, RunConfig, Runner, SweepRowJson,
};
use nlie_core::classify::{
    classify_standard, derivation_table, left_commutative_k1_note, prolongation_conditions,
    satisfiability, verify_sparse_families, FamilyTemplate,
};
use nlie_core::qmaps::{family_residual, FamilyResidual, ResidualMode, SignRule, DEFAULT_SIGN_RULE};
use nlie_core::support::{decompose_q, reduce_mod_p};
use nlie_core::{CheckOptions, CheckPlan, Identity};
use num_rational::BigRational;

/// Exact checks of n-Lie, left-commutative and homotopical identities for
/// generalized Wronskians.
#[derive(Parser)]
#[command(name = "nlie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one identity for a multiplication.
    Check(CheckArgs),
    /// Decompose a defect map into cup products of Wronskians.
    Decompose(DecomposeArgs),
    /// Classify V[0..k] for k <= kmax over characteristic 0 and the given primes.
    Classify(ClassifyArgs),
    /// n-Lie checks of the sparse Wronskian families.
    Sparse(SparseArgs),
    /// For which q is the q-th derivative power a derivation of O_1(m)?
    Derivations(DerivationArgs),
    /// Residuals and prolongation conditions of a family {ω_k}.
    Family(FamilyArgs),
    /// Least failing argument tuple of a failing check.
    Witness(WitnessArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum IdentityArg {
    Nlie,
    Leftcomm,
    Homotopical,
}

impl From<IdentityArg> for Identity {
    fn from(a: IdentityArg) -> Self {
        match a {
            IdentityArg::Nlie => Identity::NLie,
            IdentityArg::Leftcomm => Identity::LeftCommutative,
            IdentityArg::Homotopical => Identity::Homotopical,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Machine-readable JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Multiplication {
    /// Characteristic: 0 or a prime.
    #[arg(long, default_value_t = 0)]
    p: u64,
    /// Derivative orders of a single Wronskian, e.g. 0,1,2,3.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    /// A sum such as "V[0,1,8] + V[0,2,7]".
    #[arg(long, allow_hyphen_values = true)]
    sum: Option<String>,
}

#[derive(Args)]
struct Mode {
    /// Check every basis tuple up to --M instead of supporting chains.
    #[arg(long)]
    brute: bool,
    /// Truncation: the exponent bound (p^m - 1 in characteristic p).
    #[arg(long = "M")]
    max_degree: Option<u32>,
    /// Worker threads for chain evaluation.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Mode {
    fn options(&self) -> Result<CheckOptions> {
        match (self.brute, self.max_degree) {
            (true, None) => bail!("--brute needs --M <bound>"),
            (true, Some(m)) => Ok(CheckOptions::brute(m)),
            (false, m) => Ok(CheckOptions {
                max_degree: m,
                ..CheckOptions::support()
            }),
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    identity: IdentityArg,
    #[command(flatten)]
    psi: Multiplication,
    #[command(flatten)]
    mode: Mode,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    psi: Multiplication,
    /// Which defect map to decompose.
    #[arg(long, value_enum, default_value = "nlie")]
    variant: IdentityArg,
    /// List every pair of the index set, zeros included.
    #[arg(long)]
    zeros: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, default_value_t = 5)]
    kmax: u32,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
    primes: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SparseArgs {
    #[arg(long, default_value_t = 3)]
    rmax: u32,
    #[arg(long, default_value_t = 3)]
    lmax: u32,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DerivationArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 16)]
    qmax: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FamilyArgs {
    /// Members separated by ';', e.g. "2:V[0,1]; 3:l3*V[0,2,3]".
    #[arg(long)]
    omega: String,
    /// Largest total arity to examine.
    #[arg(long, default_value_t = 5)]
    nmax: usize,
    /// One signed residual per arity instead of one per pair.
    #[arg(long)]
    aggregated: bool,
    /// Sign rule of the aggregated residual: constant, outer-parity or inner-parity.
    #[arg(long)]
    rule: Option<String>,
    /// Values for the unknowns, e.g. l3=1,l4=5/7.
    #[arg(long, value_delimiter = ',')]
    set: Vec<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    check: IdentityArg,
    #[command(flatten)]
    psi: Multiplication,
    #[command(flatten)]
    mode: Mode,
    #[command(flatten)]
    output: Output,
}

fn emit(output: &Output, text: String) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    let config = RunConfig {
        p: args.psi.p,
        psi: parse_psi(args.psi.w.as_deref(), args.psi.sum.as_deref())?,
        options: args.mode.options()?,
        json: args.output.json,
        jobs: args.mode.jobs,
    };
    let plan = CheckPlan::new(args.identity.into(), &config.psi, config.p, config.options)?;
    let report = Runner::new(config.jobs)?.run(&plan)?;
    let text = if config.json {
        to_json(&Report::from(&report))?
    } else {
        render_report(&report)
    };
    emit(&args.output, text)?;
    Ok(exit(report.verdict))
}

fn cmd_decompose(args: DecomposeArgs) -> Result<ExitCode> {
    let psi = parse_psi(args.psi.w.as_deref(), args.psi.sum.as_deref())?;
    let identity: Identity = args.variant.into();
    let mut form = decompose_q(&psi, identity)?;
    if args.psi.p > 0 {
        form = reduce_mod_p(&form, args.psi.p)?;
    }
    let text = if args.output.json {
        to_json(&decomposition_report(identity.name(), &psi, args.psi.p, &form, args.zeros))?
    } else {
        render_decomposition(identity.name(), &psi, args.psi.p, &form, args.zeros)
    };
    emit(&args.output, text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode> {
    let runner = Runner::new(args.jobs)?;
    let rows = classify_standard(args.kmax, &args.primes, &|plan: &CheckPlan| runner.run(plan))?;
    let note = left_commutative_k1_note(&rows);
    let text = if args.output.json {
        #[derive(serde::Serialize)]
        struct Out {
            rows: Vec<ClassifyRowJson>,
            notes: Vec<String>,
            version: &'static str,
        }
        to_json(&Out {
            rows: rows
                .iter()
                .map(|r| ClassifyRowJson {
                    k: r.k,
                    p: r.p,
                    psi: r.psi.to_string(),
                    reports: r.reports.iter().map(Report::from).collect(),
                })
                .collect(),
            notes: note.into_iter().collect(),
            version: nlie::VERSION,
        })?
    } else {
        let mut out = format!("{:<3} {:<4} {:<18} {:<6} {:<9} {:<11}\n", "k", "p", "psi", "nlie", "leftcomm", "homotopical");
        for r in &rows {
            let v = |i| r.verdict(i).map_or("-".to_string(), |b: bool| b.to_string());
            out += &format!(
                "{:<3} {:<4} {:<18} {:<6} {:<9} {:<11}\n",
                r.k,
                r.p,
                r.psi.to_string(),
                v(Identity::NLie),
                v(Identity::LeftCommutative),
                v(Identity::Homotopical)
            );
        }
        if let Some(note) = note {
            out += &format!("note: {note}\n");
        }
        out
    };
    emit(&args.output, text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sparse(args: SparseArgs) -> Result<ExitCode> {
    let runner = Runner::new(args.jobs)?;
    let rows = verify_sparse_families(args.rmax, args.lmax, &|plan: &CheckPlan| runner.run(plan))?;
    let all = rows.iter().all(|r| r.report.verdict);
    let text = if args.output.json {
        to_json(&rows.iter().map(SweepRowJson::from).collect::<Vec<_>>())?
    } else {
        let mut out = String::new();
        for r in &rows {
            out += &format!(
                "{:<32} {:<10} p={} {:<48} {}\n",
                r.instance.family,
                r.instance.params,
                r.instance.p,
                r.instance.psi.to_string(),
                r.report.verdict
            );
        }
        out
    };
    emit(&args.output, text)?;
    Ok(exit(all))
}

fn cmd_derivations(args: DerivationArgs) -> Result<ExitCode> {
    let table = derivation_table(args.p, args.m, args.qmax)?;
    let text = if args.output.json {
        #[derive(serde::Serialize)]
        struct Out {
            p: u64,
            m: u32,
            #[serde(rename = "M")]
            max_degree: u64,
            derivations: Vec<u32>,
            table: Vec<(u32, bool)>,
            version: &'static str,
        }
        to_json(&Out {
            p: args.p,
            m: args.m,
            max_degree: args.p.pow(args.m) - 1,
            derivations: table.iter().filter(|(_, b)| *b).map(|(q, _)| *q).collect(),
            table,
            version: nlie::VERSION,
        })?
    } else {
        let yes: Vec<String> = table.iter().filter(|(_, b)| *b).map(|(q, _)| q.to_string()).collect();
        format!(
            "derivations of O_1({}) at p={}: q in {{{}}} (verified for q <= {})\n",
            args.m,
            args.p,
            yes.join(","),
            args.qmax
        )
    };
    emit(&args.output, text)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_values(set: &[String]) -> Result<BTreeMap<String, BigRational>> {
    set.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set {kv:?}: expected name=value"))?;
            let v: BigRational = v.trim().parse().with_context(|| format!("--set {kv:?}: bad rational"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn cmd_family(args: FamilyArgs) -> Result<ExitCode> {
    let template = FamilyTemplate::parse(&args.omega)?;
    let rule = match &args.rule {
        Some(r) => SignRule::parse(r)?,
        None => DEFAULT_SIGN_RULE,
    };
    let values = parse_values(&args.set)?;
    let missing: Vec<String> = template.unknowns().into_iter().filter(|u| !values.contains_key(u)).collect();
    let mode = if args.aggregated { "aggregated" } else { "per-pair" };
    let report = if !args.aggregated && values.is_empty() && !missing.is_empty() {
        bail!("per-pair residuals need values for {}; use --aggregated or --set", missing.join(", "));
    } else if args.aggregated && !missing.is_empty() {
        if !values.is_empty() {
            bail!("no value given for {}", missing.join(", "));
        }
        let conditions = prolongation_conditions(&template, args.nmax, rule)?;
        let all: Vec<_> = conditions.values().flatten().map(|c| c.polynomial.clone()).collect();
        FamilyReport {
            identity: "family",
            psi: args.omega.clone(),
            p: 0,
            mode: mode.into(),
            rule: rule.name().into(),
            verdict: all.is_empty(),
            arities: family_arities(&conditions),
            satisfiability: satisfiability_text(&satisfiability(&all)),
            version: nlie::VERSION,
        }
    } else {
        if !missing.is_empty() {
            bail!("no value given for {}", missing.join(", "));
        }
        let family = template.specialize(&values)?;
        let residual_mode = if args.aggregated { ResidualMode::Aggregated } else { ResidualMode::PerPair };
        let mut conditions = BTreeMap::new();
        for n in 3..=args.nmax {
            let residual = family_residual(&family, n, residual_mode, rule)?;
            let forms = match residual {
                FamilyResidual::Aggregated(f) => vec![f],
                FamilyResidual::PerPair(v) => v.into_iter().map(|(_, f)| f).collect(),
            };
            let list = forms
                .iter()
                .flat_map(|f| f.entries().map(|(pair, c)| (pair.alpha.clone(), c.clone())).collect::<Vec<_>>())
                .map(|(gamma, c)| nlie_core::classify::Condition {
                    gamma,
                    polynomial: nlie_core::classify::LambdaPolynomial::constant(c.to_rational().expect("characteristic 0")),
                })
                .collect::<Vec<_>>();
            conditions.insert(n, list);
        }
        let vanishes = conditions.values().all(Vec::is_empty);
        FamilyReport {
            identity: "family",
            psi: args.omega.clone(),
            p: 0,
            mode: mode.into(),
            rule: rule.name().into(),
            verdict: vanishes,
            arities: family_arities(&conditions),
            satisfiability: if vanishes { "unconstrained".into() } else { "infeasible".into() },
            version: nlie::VERSION,
        }
    };
    let text = if args.output.json { to_json(&report)? } else { render_family(&report) };
    emit(&args.output, text)?;
    Ok(exit(report.verdict))
}

fn cmd_witness(args: WitnessArgs) -> Result<ExitCode> {
    let psi = parse_psi(args.psi.w.as_deref(), args.psi.sum.as_deref())?;
    let identity: Identity = args.check.into();
    let plan = CheckPlan::new(identity, &psi, args.psi.p, args.mode.options()?)?;
    let report = Runner::new(args.mode.jobs)?.run(&plan)?;
    let Some(witness) = &report.witness else {
        bail!("no witness: {} holds for {psi} at p = {}", identity.name(), args.psi.p);
    };
    // certify the value independently of the search
    let degrees = witness.degrees().context("witness arguments are not basis monomials")?;
    let value = plan.evaluate(&degrees)?;
    if value != witness.value || value.is_zero() {
        bail!("witness re-evaluation disagrees: {value} vs {}", witness.value);
    }
    let text = if args.output.json {
        to_json(&Report::from(&report))?
    } else {
        render_report(&report)
    };
    emit(&args.output, text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Sparse(a) => cmd_sparse(a),
        Command::Derivations(a) => cmd_derivations(a),
        Command::Family(a) => cmd_family(a),
        Command::Witness(a) => cmd_witness(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
