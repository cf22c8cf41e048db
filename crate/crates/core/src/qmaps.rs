//! Shuffles, the Leibniz-defect maps `Q`, `Q_short`, `Q_long`, `Q_alt`, and
//! the identity checkers built on them.
//!
//! For `f` of arity `k` and `g` of arity `l`, every map below takes
//! `k + l - 1` arguments. The first `k - 1` are the *short* arguments, the
//! remaining `l` the *long* ones. With `f = g = ψ`:
//!
//! * `Q ψ = 0` is the n-Lie identity,
//! * `Q_short ψ = 0` is (n-1)-left commutativity,
//! * `Q_alt ψ = 0` is the homotopical n-Lie identity.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::diffalg::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::exact::Coefficient;
use crate::support::{self, DecomposedForm};
use crate::wronskian::{star, Evaluator, WronskianSum};

/// A `(k, l)`-shuffle: `perm[0..k]` and `perm[k..]` are increasing. Entries
/// are 0-based argument positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shuffle {
    pub perm: Vec<usize>,
    pub sign: i8,
}

/// All `C(k+l, k)` shuffles in lexicographic order of `perm`.
pub fn shuffles(k: usize, l: usize) -> Vec<Shuffle> {
    let n = k + l;
    let mut out = Vec::new();
    let mut first: Vec<usize> = (0..k).collect();
    loop {
        let mut perm = first.clone();
        perm.extend((0..n).filter(|i| !first.contains(i)));
        let sign = permutation_sign(&perm);
        out.push(Shuffle { perm, sign });
        // next k-combination of 0..n in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| first[i] < n - k + i) else {
            break;
        };
        first[pos] += 1;
        for j in pos + 1..k {
            first[j] = first[j - 1] + 1;
        }
    }
    out
}

/// Sign of a permutation in one-line notation.
pub fn permutation_sign(perm: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn arities(f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<(usize, usize)> {
    let (k, l) = (f.arity(), g.arity());
    if k == 0 || l == 0 || args.len() + 1 != k + l {
        return Err(Error::ArityMismatch {
            expected: (k + l).saturating_sub(1),
            got: args.len(),
        });
    }
    Ok((k, l))
}

fn signed_add(acc: &AlgebraElement, sign: i8, v: &AlgebraElement) -> AlgebraElement {
    if sign > 0 {
        acc + v
    } else {
        acc - v
    }
}

fn permuted(args: &[AlgebraElement], perm: &[usize]) -> Vec<AlgebraElement> {
    perm.iter().map(|&i| args[i].clone()).collect()
}

/// `Q(f, g)(u) = f(u_1..u_{k-1}, g(u_k..)) - Σ_i g(u_k.., f(u_1..u_{k-1}, u_{k+i-1}), ..)`:
/// the failure of `f(u_1..u_{k-1}, ·)` to be a derivation of `g`.
pub fn q_eval(f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    let (k, l) = arities(f, g, args)?;
    let short = &args[..k - 1];
    let long = &args[k - 1..];
    let mut acc = star(f, g, args)?;
    let mut inner_args = short.to_vec();
    inner_args.push(args[0].clone());
    for i in 0..l {
        inner_args[k - 1] = long[i].clone();
        let replaced = f.eval(&inner_args)?;
        if replaced.is_zero() {
            continue;
        }
        let mut outer = long.to_vec();
        outer[i] = replaced;
        acc = &acc - &g.eval(&outer)?;
    }
    Ok(acc)
}

/// Sum over all `(k-1, l)`-shuffles of `sign · (f ⋆ g)`.
pub fn q_alt_eval(f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    let (k, l) = arities(f, g, args)?;
    let mut acc = args[0].spec().zero();
    for s in shuffles(k - 1, l) {
        let v = star(f, g, &permuted(args, &s.perm))?;
        acc = signed_add(&acc, s.sign, &v);
    }
    Ok(acc)
}

/// The part of `Q_alt` where the last argument sits in the short block
/// (`σ(k-1) = k+l-1`).
pub fn q_long_eval(f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    let (k, l) = arities(f, g, args)?;
    let last = k + l - 2;
    let mut acc = args[0].spec().zero();
    if k < 2 {
        return Ok(acc);
    }
    for s in shuffles(k - 1, l).into_iter().filter(|s| s.perm[k - 2] == last) {
        let v = star(f, g, &permuted(args, &s.perm))?;
        acc = signed_add(&acc, s.sign, &v);
    }
    Ok(acc)
}

/// Sum over `(k-1, l-1)`-shuffles of the first `k+l-2` arguments with the
/// last argument pinned inside `g`.
pub fn q_short_eval(
    f: &Evaluator,
    g: &Evaluator,
    args: &[AlgebraElement],
) -> Result<AlgebraElement> {
    let (k, l) = arities(f, g, args)?;
    let n = k + l - 1;
    let mut acc = args[0].spec().zero();
    for s in shuffles(k - 1, l - 1) {
        let mut p = permuted(args, &s.perm);
        p.push(args[n - 1].clone());
        let v = star(f, g, &p)?;
        acc = signed_add(&acc, s.sign, &v);
    }
    Ok(acc)
}

/// Block structure of a multilinear map's symmetries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryDescriptor {
    blocks: Vec<Block>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub len: usize,
    pub skew: bool,
}

impl SymmetryDescriptor {
    pub fn new(blocks: Vec<Block>) -> Self {
        SymmetryDescriptor { blocks }
    }

    pub fn skew(lens: &[usize]) -> Self {
        Self::new(lens.iter().map(|&len| Block { len, skew: true }).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn arity(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    /// Exponent tuples with the given total, entries at most `max_entry`,
    /// strictly increasing inside skew blocks; lexicographic order.
    pub fn chains(&self, total: u64, max_entry: u32) -> Vec<Vec<u32>> {
        let mut layout = Vec::new();
        for b in &self.blocks {
            for pos in 0..b.len {
                layout.push(b.skew && pos > 0);
            }
        }
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(layout.len());
        chain_dfs(&layout, total, max_entry as u64, &mut cur, &mut out);
        out
    }
}

/// Smallest sum the positions `from..` can still reach given the previous
/// entry.
fn min_tail(layout: &[bool], from: usize, prev: Option<u64>) -> u64 {
    let mut sum = 0;
    let mut last = prev;
    for &chained in &layout[from..] {
        let v = match (chained, last) {
            (true, Some(p)) => p + 1,
            _ => 0,
        };
        sum += v;
        last = Some(v);
    }
    sum
}

fn chain_dfs(layout: &[bool], remaining: u64, max: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let pos = cur.len();
    if pos == layout.len() {
        if remaining == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let lo = match (layout[pos], cur.last()) {
        (true, Some(&p)) => p as u64 + 1,
        _ => 0,
    };
    let hi = max.min(remaining);
    let mut v = lo;
    while v <= hi {
        if v + min_tail(layout, pos + 1, Some(v)) > remaining {
            break;
        }
        cur.push(v as u32);
        chain_dfs(layout, remaining - v, max, cur, out);
        cur.pop();
        v += 1;
    }
}

/// Which defect map an identity check evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Identity {
    /// `Q ψ = 0`.
    NLie,
    /// `Q_short ψ = 0`.
    LeftCommutative,
    /// `Q_alt ψ = 0`.
    Homotopical,
}

impl Identity {
    pub const ALL: [Identity; 3] = [Identity::NLie, Identity::LeftCommutative, Identity::Homotopical];

    pub fn name(&self) -> &'static str {
        match self {
            Identity::NLie => "nlie",
            Identity::LeftCommutative => "leftcomm",
            Identity::Homotopical => "homotopical",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "nlie" | "n-lie" | "q" => Ok(Identity::NLie),
            "leftcomm" | "left-commutative" | "qshort" => Ok(Identity::LeftCommutative),
            "homotopical" | "qalt" => Ok(Identity::Homotopical),
            other => Err(Error::Parse(format!("unknown identity {other:?}"))),
        }
    }

    pub fn apply(&self, f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<AlgebraElement> {
        match self {
            Identity::NLie => q_eval(f, g, args),
            Identity::LeftCommutative => q_short_eval(f, g, args),
            Identity::Homotopical => q_alt_eval(f, g, args),
        }
    }

    /// Argument symmetries of the defect map of a skew `k`-ary map.
    pub fn symmetry(&self, k: usize) -> SymmetryDescriptor {
        let short = k.saturating_sub(1);
        match self {
            Identity::NLie | Identity::Homotopical => SymmetryDescriptor::skew(&[short, k]),
            // the shuffle sum alternates all of the first 2k-2 arguments
            Identity::LeftCommutative => SymmetryDescriptor::skew(&[2 * short, 1]),
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckMode {
    /// Only supporting chains: basis tuples of total degree `2|ψ|`.
    Support,
    /// Every basis tuple with entries up to the bound.
    Brute,
}

impl CheckMode {
    pub fn name(&self) -> &'static str {
        match self {
            CheckMode::Support => "support",
            CheckMode::Brute => "brute",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub mode: CheckMode,
    /// Truncation override. Support mode sizes it automatically; brute mode
    /// requires it (in characteristic `p` it must be `p^m - 1`).
    pub max_degree: Option<u32>,
}

impl CheckOptions {
    pub fn support() -> Self {
        CheckOptions {
            mode: CheckMode::Support,
            max_degree: None,
        }
    }

    pub fn brute(max_degree: u32) -> Self {
        CheckOptions {
            mode: CheckMode::Brute,
            max_degree: Some(max_degree),
        }
    }
}

/// Failing argument tuple and the nonzero value found there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub args: Vec<AlgebraElement>,
    pub value: AlgebraElement,
}

impl Witness {
    /// Exponents of the arguments when they are all basis monomials.
    pub fn degrees(&self) -> Option<Vec<u32>> {
        self.args
            .iter()
            .map(|a| match a.terms().collect::<Vec<_>>().as_slice() {
                [(i, c)] if c.is_one() => Some(*i),
                _ => None,
            })
            .collect()
    }
}

/// Outcome of an identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub identity: String,
    pub psi: String,
    pub p: u64,
    pub max_degree: u32,
    pub mode: CheckMode,
    pub verdict: bool,
    pub witness: Option<Witness>,
    /// Chains evaluated up to and including the first failure (all of them
    /// on success).
    pub chains_examined: u64,
    pub chains_total: u64,
}

#[derive(Clone, Debug)]
enum Chains {
    Listed(Vec<Vec<u32>>),
    /// Every tuple of `len` entries in `0..base`.
    Odometer { len: usize, base: u64 },
}

impl Chains {
    fn count(&self) -> u64 {
        match self {
            Chains::Listed(v) => v.len() as u64,
            Chains::Odometer { len, base } => base.saturating_pow(*len as u32),
        }
    }

    fn get(&self, idx: u64) -> Vec<u32> {
        match self {
            Chains::Listed(v) => v[idx as usize].clone(),
            Chains::Odometer { len, base } => {
                let mut out = alloc::vec![0u32; *len];
                let mut rest = idx;
                for slot in out.iter_mut().rev() {
                    *slot = (rest % base) as u32;
                    rest /= base;
                }
                out
            }
        }
    }
}

/// A fully resolved identity check: the algebra, the chains to visit and the
/// map to evaluate on each. Chains are indexed in lexicographic order, so the
/// least failing index is the lexicographically least witness whichever order
/// the chains are evaluated in.
#[derive(Clone, Debug)]
pub struct CheckPlan {
    identity: Identity,
    psi: WronskianSum,
    evaluator: Evaluator,
    spec: AlgebraSpec,
    mode: CheckMode,
    chains: Chains,
    /// Truncation as requested: the exponent bound in brute mode, which in
    /// characteristic 0 is smaller than the algebra it runs in.
    bound: u32,
    /// Unary n-Lie: Leibniz rule of ψ on `U` over basis pairs.
    derivation: bool,
}

impl CheckPlan {
    pub fn new(identity: Identity, psi: &WronskianSum, p: u64, options: CheckOptions) -> Result<Self> {
        let k = psi.arity();
        if k == 0 {
            return Err(Error::InvalidArgument("nullary multiplication".into()));
        }
        let derivation = k == 1 && identity == Identity::NLie;
        let arity = if derivation { 2 } else { 2 * k - 1 };
        let (spec, chains, bound) = match options.mode {
            CheckMode::Support => {
                if !psi.is_homogeneous() {
                    return Err(Error::MixedWeight);
                }
                let need = 2 * psi.weight().unwrap_or(0);
                let spec = match options.max_degree {
                    Some(m) => {
                        let spec = AlgebraSpec::new(p, m)?;
                        if (m as u64) < need {
                            return Err(Error::TruncationTooSmall { max: m, required: need });
                        }
                        require_divided_power(spec)?;
                        spec
                    }
                    None => AlgebraSpec::covering(p, need)?,
                };
                let chains = if psi.is_zero() {
                    Vec::new()
                } else if derivation {
                    // pairs i <= j; total degree is free for a unary map
                    let m = spec.max_degree();
                    (0..=m)
                        .flat_map(|i| (i..=m - i).map(move |j| alloc::vec![i, j]))
                        .collect()
                } else {
                    identity.symmetry(k).chains(need, spec.max_degree())
                };
                (spec, Chains::Listed(chains), spec.max_degree())
            }
            CheckMode::Brute => {
                let bound = options.max_degree.ok_or_else(|| {
                    Error::InvalidArgument("brute mode needs an explicit truncation bound".into())
                })?;
                let spec = if p == 0 {
                    // no truncation effects: products of all arguments fit
                    AlgebraSpec::rational(bound.saturating_mul(arity as u32))
                } else {
                    let spec = AlgebraSpec::new(p, bound)?;
                    require_divided_power(spec)?;
                    spec
                };
                let chains = if derivation {
                    let m = bound;
                    Chains::Listed(
                        (0..=m)
                            .flat_map(|i| (0..=m).map(move |j| alloc::vec![i, j]))
                            .filter(|v| v[0] + v[1] <= m)
                            .collect(),
                    )
                } else {
                    Chains::Odometer {
                        len: arity,
                        base: bound as u64 + 1,
                    }
                };
                (spec, chains, bound)
            }
        };
        Ok(CheckPlan {
            identity,
            psi: psi.clone(),
            evaluator: Evaluator::Sum(psi.clone()),
            spec,
            mode: options.mode,
            chains,
            bound,
            derivation,
        })
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn identity(&self) -> Identity {
        self.identity
    }

    pub fn chain_count(&self) -> u64 {
        self.chains.count()
    }

    pub fn chain(&self, idx: u64) -> Vec<u32> {
        self.chains.get(idx)
    }

    pub fn args(&self, chain: &[u32]) -> Result<Vec<AlgebraElement>> {
        chain.iter().map(|&i| self.spec.monomial(i)).collect()
    }

    /// Value of the defect map on a chain.
    pub fn evaluate(&self, chain: &[u32]) -> Result<AlgebraElement> {
        let args = self.args(chain)?;
        if self.derivation {
            let (a, b) = (&args[0], &args[1]);
            let f = &self.evaluator;
            let lhs = f.eval(&[a * b])?;
            let rhs = &(&f.eval(core::slice::from_ref(a))? * b) + &(a * &f.eval(core::slice::from_ref(b))?);
            return Ok(&lhs - &rhs);
        }
        self.identity.apply(&self.evaluator, &self.evaluator, &args)
    }

    /// Sequential run, stopping at the first failure.
    pub fn run(&self) -> Result<CheckReport> {
        for idx in 0..self.chain_count() {
            let value = self.evaluate(&self.chain(idx))?;
            if !value.is_zero() {
                return self.report(Some((idx, value)));
            }
        }
        self.report(None)
    }

    /// Builds the report from the least failing chain index, if any.
    pub fn report(&self, failure: Option<(u64, AlgebraElement)>) -> Result<CheckReport> {
        let total = self.chain_count();
        let (witness, examined) = match failure {
            Some((idx, value)) => {
                let args = self.args(&self.chain(idx))?;
                (Some(Witness { args, value }), idx + 1)
            }
            None => (None, total),
        };
        Ok(CheckReport {
            identity: self.identity.name().to_string(),
            psi: self.psi.to_string(),
            p: self.spec.characteristic(),
            max_degree: self.bound,
            mode: self.mode,
            verdict: witness.is_none(),
            witness,
            chains_examined: examined,
            chains_total: total,
        })
    }
}

fn require_divided_power(spec: AlgebraSpec) -> Result<()> {
    if spec.is_divided_power() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "truncation {} is not of the form p^m - 1 for p = {}",
            spec.max_degree(),
            spec.characteristic()
        )))
    }
}

/// `Q ψ ≡ 0`.
pub fn is_n_lie(psi: &WronskianSum, p: u64, options: CheckOptions) -> Result<CheckReport> {
    CheckPlan::new(Identity::NLie, psi, p, options)?.run()
}

/// `Q_short ψ ≡ 0`.
pub fn is_left_commutative(psi: &WronskianSum, p: u64, options: CheckOptions) -> Result<CheckReport> {
    CheckPlan::new(Identity::LeftCommutative, psi, p, options)?.run()
}

/// `Q_alt ψ ≡ 0`.
pub fn is_homotopical_n_lie(psi: &WronskianSum, p: u64, options: CheckOptions) -> Result<CheckReport> {
    CheckPlan::new(Identity::Homotopical, psi, p, options)?.run()
}

/// Sign attached to the `(i, j)` summand when residuals of one total arity
/// are added up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignRule {
    Constant,
    /// `(-1)^{i(j-1)}`
    OuterParity,
    /// `(-1)^{(i-1)j}`
    InnerParity,
}

impl SignRule {
    pub const ALL: [SignRule; 3] = [SignRule::Constant, SignRule::OuterParity, SignRule::InnerParity];

    pub fn sign(&self, i: usize, j: usize) -> i64 {
        let e = match self {
            SignRule::Constant => 0,
            SignRule::OuterParity => i * (j - 1),
            SignRule::InnerParity => (i - 1) * j,
        };
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SignRule::Constant => "constant",
            SignRule::OuterParity => "outer-parity",
            SignRule::InnerParity => "inner-parity",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        SignRule::ALL
            .into_iter()
            .find(|r| r.name() == text)
            .ok_or_else(|| Error::Parse(format!("unknown sign rule {text:?}")))
    }
}

/// The rule under which the family `{V^{0,1}, λ₃V^{0,2,3}, λ₄V^{0,2,3,4}}`
/// is homotopical exactly when `-5λ₃² + 7λ₄ = 0`. All three rules give that
/// condition at total arity 5, but only the constant rule also clears the
/// arity-4 residual, where `Q_alt(V^{0,1}, V^{0,2,3})` and
/// `Q_alt(V^{0,2,3}, V^{0,1})` cancel.
pub const DEFAULT_SIGN_RULE: SignRule = SignRule::Constant;

/// A family `{ω_k}` of skew multiplications indexed by arity; absent arities
/// (and arity 1) are the zero map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Family {
    members: BTreeMap<usize, WronskianSum>,
}

impl Family {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, omega: WronskianSum) -> Result<Self> {
        self.insert(omega)?;
        Ok(self)
    }

    pub fn insert(&mut self, omega: WronskianSum) -> Result<()> {
        let k = omega.arity();
        if k < 2 {
            return Err(Error::InvalidArgument("ω_1 must be zero".into()));
        }
        if self.members.contains_key(&k) {
            return Err(Error::InvalidArgument(format!("two members of arity {k}")));
        }
        self.members.insert(k, omega);
        Ok(())
    }

    pub fn member(&self, arity: usize) -> Option<&WronskianSum> {
        self.members.get(&arity)
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.keys().copied()
    }

    /// Pairs `(i, j)` with `i + j - 1 = n` and both members present.
    pub fn pairs(&self, n: usize) -> Vec<(usize, usize)> {
        (2..n)
            .map(|i| (i, n + 1 - i))
            .filter(|(i, j)| *j >= 2 && self.members.contains_key(i) && self.members.contains_key(j))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResidualMode {
    PerPair,
    Aggregated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyResidual {
    /// `Q_alt(ω_i, ω_j)` for every pair, as decompositions over `V^γ`.
    PerPair(Vec<((usize, usize), DecomposedForm)>),
    /// `Σ ε(i, j) Q_alt(ω_i, ω_j)`.
    Aggregated(DecomposedForm),
}

impl FamilyResidual {
    pub fn vanishes(&self) -> bool {
        match self {
            FamilyResidual::PerPair(v) => v.iter().all(|(_, f)| f.is_empty()),
            FamilyResidual::Aggregated(f) => f.is_empty(),
        }
    }
}

/// Homotopical-family residual at total arity `n`, computed exactly over
/// characteristic 0. `Q_alt(ω_i, ω_j)` is fully skew and D-invariant, so it
/// is recorded by its coefficients on single Wronskians `V^γ` of arity `n`.
pub fn family_residual(family: &Family, n: usize, mode: ResidualMode, rule: SignRule) -> Result<FamilyResidual> {
    let pairs = family.pairs(n);
    let mut per_pair = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let form = support::decompose_q_alt(&family.members[&i], &family.members[&j])?;
        per_pair.push(((i, j), form));
    }
    Ok(match mode {
        ResidualMode::PerPair => FamilyResidual::PerPair(per_pair),
        ResidualMode::Aggregated => {
            let mut total = DecomposedForm::new(n, 0, None);
            for ((i, j), form) in per_pair {
                total.add_scaled(&form, &Coefficient::integer(rule.sign(i, j)))?;
            }
            FamilyResidual::Aggregated(total)
        }
    })
}
