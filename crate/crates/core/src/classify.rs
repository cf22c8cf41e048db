//! Parameter sweeps over standard and sparse Wronskians, witness search, the
//! derivation table, and the homotopical-prolongation condition emitter.
//!
//! Sweeps take a `run` callback so the caller decides how a [`CheckPlan`] is
//! executed (sequentially via [`CheckPlan::run`], or in parallel).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::diffalg::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::exact::Coefficient;
use crate::qmaps::{CheckOptions, CheckPlan, CheckReport, Family, Identity, SignRule, Witness};
use crate::support::decompose_q_alt;
use crate::wronskian::{parse_terms, MultiIndex, WronskianSum};

/// Executes a plan; [`CheckPlan::run`] is the sequential choice.
pub type Runner<'a> = &'a dyn Fn(&CheckPlan) -> Result<CheckReport>;

/// Verdicts of the three identities for one `(ψ, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationRow {
    /// `ψ = V^{0,1,…,k}` for the standard sweep.
    pub k: u32,
    pub psi: WronskianSum,
    pub p: u64,
    pub reports: Vec<CheckReport>,
}

impl ClassificationRow {
    pub fn report(&self, identity: Identity) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.identity == identity.name())
    }

    pub fn verdict(&self, identity: Identity) -> Option<bool> {
        self.report(identity).map(|r| r.verdict)
    }
}

/// Smallest brute-force bound at least `min` that is a valid truncation in
/// characteristic `p`.
pub fn brute_bound(p: u64, min: u32) -> Result<u32> {
    Ok(AlgebraSpec::covering(p, min as u64)?.max_degree())
}

/// Options used by the standard sweep. The arity-2 left-commutativity check
/// runs on the brute-force oracle over all basis triples with `M >= 4`; every
/// other check uses supporting chains.
pub fn standard_options(k: u32, p: u64, identity: Identity) -> Result<CheckOptions> {
    if k == 1 && identity == Identity::LeftCommutative {
        Ok(CheckOptions::brute(brute_bound(p, 4)?))
    } else {
        Ok(CheckOptions::support())
    }
}

/// All three checks on `V^{0,…,k}` for `1 <= k <= k_max` and `p ∈ {0} ∪
/// primes`, sorted by `(k, p)`.
pub fn classify_standard(k_max: u32, primes: &[u64], run: Runner) -> Result<Vec<ClassificationRow>> {
    let mut chars: Vec<u64> = primes.to_vec();
    chars.push(0);
    chars.sort_unstable();
    chars.dedup();
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let psi = WronskianSum::standard(k);
        for &p in &chars {
            let mut reports = Vec::with_capacity(3);
            for identity in Identity::ALL {
                let plan = CheckPlan::new(identity, &psi, p, standard_options(k, p, identity)?)?;
                reports.push(run(&plan)?);
            }
            rows.push(ClassificationRow {
                k,
                psi: psi.clone(),
                p,
                reports,
            });
        }
    }
    Ok(rows)
}

/// Observation on the arity-2 left-commutativity verdicts of a sweep. The
/// classification can be read as "iff k > 2" or as "iff k ≠ 2"; the two
/// differ exactly at `k = 1`.
pub fn left_commutative_k1_note(rows: &[ClassificationRow]) -> Option<String> {
    let verdicts: BTreeSet<bool> = rows
        .iter()
        .filter(|r| r.k == 1)
        .filter_map(|r| r.verdict(Identity::LeftCommutative))
        .collect();
    match verdicts.into_iter().collect::<Vec<_>>().as_slice() {
        [false] => Some(
            "k=1: V[0,1] is not left commutative in any characteristic tested; \
             consistent with \"iff k > 2\", contradicts \"iff k != 2\""
                .to_string(),
        ),
        [true] => Some(
            "k=1: V[0,1] is left commutative in every characteristic tested; \
             consistent with \"iff k != 2\", contradicts \"iff k > 2\""
                .to_string(),
        ),
        [] => None,
        _ => Some("k=1: left commutativity of V[0,1] depends on the characteristic".to_string()),
    }
}

/// One instance of a sparse-Wronskian family claimed to be n-Lie.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub family: String,
    pub params: String,
    pub psi: WronskianSum,
    pub p: u64,
}

/// The checked instance together with its report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub instance: FamilyInstance,
    pub report: CheckReport,
}

fn sum_of(arity: usize, terms: impl IntoIterator<Item = Vec<u32>>) -> Result<WronskianSum> {
    WronskianSum::from_terms(arity, terms.into_iter().map(|o| (o, Coefficient::integer(1))))
}

/// Every listed sparse n-Lie instance with `r <= r_max`, `1 <= l <= l_max`
/// (and `0 <= l <= r` for the two-index family).
///
/// `Σ_{i=1}^{2^l} V^{i, 2^l+1-i}` pairs `i` with `2^l+1-i`, so the literal
/// sum cancels to the zero map; the half sum over `i < 2^l+1-i` is listed
/// alongside it (likewise for the `V^{0,i,2^l+1-i}` family).
pub fn sparse_instances(r_max: u32, l_max: u32) -> Result<Vec<FamilyInstance>> {
    let mut out = Vec::new();
    let mut push = |family: &str, params: String, psi: WronskianSum, p: u64| {
        out.push(FamilyInstance {
            family: family.to_string(),
            params,
            psi,
            p,
        })
    };
    for r in 0..=r_max {
        for l in 0..=r.min(l_max) {
            let psi = sum_of(2, [vec![(1 << r) - (1 << l), 1 << r]])?;
            push("V[2^r-2^l,2^r]", format!("r={r},l={l}"), psi, 2);
        }
    }
    for l in 1..=l_max {
        let top = (1u32 << l) + 1;
        let full = sum_of(2, (1..top).map(|i| vec![i, top - i]))?;
        push("sum V[i,2^l+1-i]", format!("l={l}"), full, 2);
        let half = sum_of(2, (1..top).filter(|&i| 2 * i < top).map(|i| vec![i, top - i]))?;
        push("sum V[i,2^l+1-i], i<2^l+1-i", format!("l={l}"), half, 2);
    }
    for r in 0..=r_max {
        let psi = sum_of(2, [vec![2 * 3u32.pow(r), 3u32.pow(r + 1)]])?;
        push("V[2*3^r,3^(r+1)]", format!("r={r}"), psi, 3);
    }
    for (orders, p) in [(vec![1, 2, 4], 2), (vec![2, 3, 4], 2), (vec![1, 2, 3], 3)] {
        let psi = sum_of(3, [orders])?;
        push("single", String::new(), psi, p);
    }
    for l in 1..=l_max {
        let top = (1u32 << l) + 1;
        let full = sum_of(3, (1..top).map(|i| vec![0, i, top - i]))?;
        push("sum V[0,i,2^l+1-i]", format!("l={l}"), full, 2);
        let half = sum_of(3, (1..top).filter(|&i| 2 * i < top).map(|i| vec![0, i, top - i]))?;
        push("sum V[0,i,2^l+1-i], i<2^l+1-i", format!("l={l}"), half, 2);
    }
    for (orders, p) in [(vec![1, 2, 3, 4], 2), (vec![0, 1, 2, 3], 3), (vec![0, 1, 2, 3, 4], 2)] {
        let arity = orders.len();
        let psi = sum_of(arity, [orders])?;
        push("single", String::new(), psi, p);
    }
    Ok(out)
}

/// n-Lie check of every [`sparse_instances`] entry.
pub fn verify_sparse_families(r_max: u32, l_max: u32, run: Runner) -> Result<Vec<SweepRow>> {
    sparse_instances(r_max, l_max)?
        .into_iter()
        .map(|instance| {
            let plan = CheckPlan::new(Identity::NLie, &instance.psi, instance.p, CheckOptions::support())?;
            Ok(SweepRow {
                report: run(&plan)?,
                instance,
            })
        })
        .collect()
}

/// `(q, ∂^q is a derivation of O_1(m))` for `1 <= q <= q_max`.
pub fn derivation_table(p: u64, m: u32, q_max: u32) -> Result<Vec<(u32, bool)>> {
    let spec = AlgebraSpec::divided_power(p, m)?;
    (1..=q_max).map(|q| Ok((q, spec.is_derivation(q)?))).collect()
}

/// Lexicographically least failing tuple of `identity` for `ψ` in
/// characteristic `p`.
pub fn find_witness(psi: &WronskianSum, p: u64, identity: Identity, options: CheckOptions, run: Runner) -> Result<Witness> {
    let plan = CheckPlan::new(identity, psi, p, options)?;
    run(&plan)?.witness.ok_or_else(|| {
        Error::NoWitness(format!("{} holds for {psi} at p = {p}", identity.name()))
    })
}

/// Value of the defect map of `identity` at the basis tuple `degrees`, in the
/// algebra the checker would use (or `O_1(m)` with bound `max_degree`).
pub fn evaluate_at(
    psi: &WronskianSum,
    p: u64,
    identity: Identity,
    degrees: &[u32],
    max_degree: Option<u32>,
) -> Result<AlgebraElement> {
    let options = CheckOptions {
        max_degree,
        ..CheckOptions::support()
    };
    let plan = CheckPlan::new(identity, psi, p, options)?;
    if let Some(&d) = degrees.iter().find(|&&d| d > plan.spec().max_degree()) {
        return Err(Error::ExponentOutOfRange {
            exponent: d as u64,
            max: plan.spec().max_degree(),
        });
    }
    plan.evaluate(degrees)
}

/// A monomial in named unknowns: name -> exponent.
pub type Monomial = BTreeMap<String, u32>;

/// Polynomial in the family unknowns with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LambdaPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

impl LambdaPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(Monomial::new(), c)
    }

    pub fn variable(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        Self::term(m, BigRational::one())
    }

    pub fn term(monomial: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(monomial, c);
        p
    }

    fn add_term(&mut self, monomial: Monomial, c: BigRational) {
        let sum = self.terms.remove(&monomial).unwrap_or_else(BigRational::zero) + c;
        if !sum.is_zero() {
            self.terms.insert(monomial, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> + '_ {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.values().sum()).max().unwrap_or(0)
    }

    pub fn unknowns(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.keys().cloned()).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Value at a point; every unknown must be assigned.
    pub fn evaluate(&self, values: &BTreeMap<String, BigRational>) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m {
                let x = values
                    .get(v)
                    .ok_or_else(|| Error::InvalidArgument(format!("no value for {v}")))?;
                t *= num_traits::pow(x.clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Integer coefficients with gcd 1, the first term (highest degree, then
    /// name order) positive.
    pub fn primitive(&self) -> Self {
        let Some(lead) = self.ordered().first().map(|(_, c)| (*c).clone()) else {
            return Self::zero();
        };
        let den_lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scaled: Vec<BigInt> = self
            .terms
            .values()
            .map(|c| (c * BigRational::from_integer(den_lcm.clone())).to_integer())
            .collect();
        let content = scaled.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let mut factor = BigRational::new(den_lcm, content);
        if lead.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    /// `r` with `self = r · other`, if the two are proportional.
    pub fn ratio_to(&self, other: &Self) -> Option<BigRational> {
        if self.is_zero() || other.is_zero() {
            return None;
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut ratio = None;
        for (m, c) in &self.terms {
            let r = c / other.terms.get(m)?;
            match &ratio {
                None => ratio = Some(r),
                Some(prev) if *prev == r => {}
                Some(_) => return None,
            }
        }
        ratio
    }

    /// Terms by descending degree, then monomial order.
    fn ordered(&self) -> Vec<(&Monomial, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.values().sum(), b.values().sum());
            db.cmp(&da).then_with(|| a.cmp(b))
        });
        v
    }

    /// Coefficients in `x` when `x` is the only unknown.
    fn univariate(&self, x: &str) -> Option<UPoly> {
        let mut coeffs = Vec::new();
        for (m, c) in &self.terms {
            let e = match m.len() {
                0 => 0,
                1 => *m.get(x)? as usize,
                _ => return None,
            };
            if coeffs.len() <= e {
                coeffs.resize(e + 1, BigRational::zero());
            }
            coeffs[e] = c.clone();
        }
        Some(UPoly::new(coeffs))
    }

    /// Coefficients in `y`, each a polynomial in `x`.
    fn bivariate(&self, x: &str, y: &str) -> Option<Vec<UPoly>> {
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for (m, c) in &self.terms {
            if m.keys().any(|k| k != x && k != y) {
                return None;
            }
            let ex = m.get(x).copied().unwrap_or(0) as usize;
            let ey = m.get(y).copied().unwrap_or(0) as usize;
            if rows.len() <= ey {
                rows.resize(ey + 1, Vec::new());
            }
            if rows[ey].len() <= ex {
                rows[ey].resize(ex + 1, BigRational::zero());
            }
            rows[ey][ex] = c.clone();
        }
        Some(rows.into_iter().map(UPoly::new).collect())
    }
}

impl fmt::Display for LambdaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.ordered().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let vars: Vec<String> = m
                .iter()
                .map(|(v, &e)| if e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
struct UPoly(Vec<BigRational>);

impl UPoly {
    fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    fn zero() -> Self {
        UPoly(Vec::new())
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        UPoly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    fn neg(&self) -> Self {
        UPoly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    fn rem(&self, d: &Self) -> Self {
        let mut r = self.0.clone();
        let lead = d.0.last().expect("nonzero divisor");
        while r.len() >= d.0.len() && !r.is_empty() {
            let q = r.last().expect("nonempty") / lead;
            let shift = r.len() - d.0.len();
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn eval(&self, x: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Rational roots by the rational root theorem, ascending and distinct.
    fn rational_roots(&self) -> Vec<BigRational> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let mut roots = BTreeSet::new();
        let mut c: &[BigRational] = &self.0;
        while c.first().is_some_and(Zero::is_zero) {
            roots.insert(BigRational::zero());
            c = &c[1..];
        }
        if c.len() > 1 {
            let den = c.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            let ints: Vec<BigInt> = c
                .iter()
                .map(|v| (v * BigRational::from_integer(den.clone())).to_integer())
                .collect();
            let reduced = UPoly::new(c.to_vec());
            for num in divisors(&ints[0]) {
                for d in divisors(ints.last().expect("nonempty")) {
                    for s in [BigInt::one(), -BigInt::one()] {
                        let x = BigRational::new(&s * &num, d.clone());
                        if reduced.eval(&x).is_zero() {
                            roots.insert(x);
                        }
                    }
                }
            }
        }
        roots.into_iter().collect()
    }
}

/// Positive divisors of `n != 0`; empty for values too large to factor by
/// trial division.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let Some(n) = n.abs().to_u64() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    out
}

fn upoly_det(m: &[Vec<UPoly>]) -> UPoly {
    let n = m.len();
    if n == 0 {
        return UPoly(vec![BigRational::one()]);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = UPoly::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<UPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let t = m[0][c].mul(&upoly_det(&minor));
        acc = if c % 2 == 0 { acc.add(&t) } else { acc.add(&t.neg()) };
    }
    acc
}

/// Resultant in `y` of two polynomials given by their `y`-coefficients.
fn resultant(a: &[UPoly], b: &[UPoly]) -> UPoly {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    if size == 0 {
        return UPoly(vec![BigRational::one()]);
    }
    let mut rows = Vec::with_capacity(size);
    for (shift, src) in (0..n).map(|s| (s, a)).chain((0..m).map(|s| (s, b))) {
        let mut row = vec![UPoly::zero(); size];
        // highest y-degree first
        for (i, c) in src.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    upoly_det(&rows)
}

/// What the emitted conditions say about the unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Satisfiability {
    /// Every condition vanishes identically.
    Unconstrained,
    /// All conditions are multiples of one polynomial.
    SingleCondition(LambdaPolynomial),
    /// Finitely many common zeros; only the rational ones are listed, as
    /// values for `unknowns` in order. An empty list means no rational
    /// solution.
    Points {
        unknowns: Vec<String>,
        rational: Vec<Vec<BigRational>>,
    },
    /// Independent conditions with no common zero.
    Infeasible,
    /// Outside the exact-elimination range: more than two unknowns, or two
    /// unknowns whose conditions share a curve component.
    Undecided,
}

/// Exact elimination for at most two unknowns.
pub fn satisfiability(conditions: &[LambdaPolynomial]) -> Satisfiability {
    let polys: Vec<LambdaPolynomial> = conditions
        .iter()
        .filter(|c| !c.is_zero())
        .map(LambdaPolynomial::primitive)
        .collect();
    if polys.is_empty() {
        return Satisfiability::Unconstrained;
    }
    if polys.iter().any(|p| p.degree() == 0) {
        return Satisfiability::Infeasible;
    }
    let unknowns: Vec<String> = polys
        .iter()
        .flat_map(LambdaPolynomial::unknowns)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let independent = polys.iter().any(|p| p.ratio_to(&polys[0]).is_none());
    match unknowns.as_slice() {
        [x] => {
            let g = polys
                .iter()
                .map(|p| p.univariate(x).expect("single unknown"))
                .fold(UPoly::zero(), |acc, p| acc.gcd(&p));
            if g.degree() == 0 {
                return Satisfiability::Infeasible;
            }
            Satisfiability::Points {
                unknowns: unknowns.clone(),
                rational: g.rational_roots().into_iter().map(|r| vec![r]).collect(),
            }
        }
        _ if !independent => Satisfiability::SingleCondition(polys[0].clone()),
        [x, y] => solve_two(&polys, x, y),
        _ => Satisfiability::Undecided,
    }
}

fn solve_two(polys: &[LambdaPolynomial], x: &str, y: &str) -> Satisfiability {
    let biv: Vec<Vec<UPoly>> = polys
        .iter()
        .map(|p| p.bivariate(x, y).expect("two unknowns"))
        .collect();
    let other = polys
        .iter()
        .position(|p| p.ratio_to(&polys[0]).is_none())
        .expect("independent pair");
    let res = resultant(&biv[0], &biv[other]);
    if res.is_zero() {
        return Satisfiability::Undecided;
    }
    if res.degree() == 0 {
        return Satisfiability::Infeasible;
    }
    let mut points = Vec::new();
    for x0 in res.rational_roots() {
        let g = biv
            .iter()
            .map(|rows| UPoly::new(rows.iter().map(|c| c.eval(&x0)).collect()))
            .fold(UPoly::zero(), |acc, p| acc.gcd(&p));
        if g.is_zero() {
            // a whole line x = x0 solves everything
            return Satisfiability::Undecided;
        }
        for y0 in g.rational_roots() {
            points.push(vec![x0.clone(), y0]);
        }
    }
    Satisfiability::Points {
        unknowns: vec![x.to_string(), y.to_string()],
        rational: points,
    }
}

/// One summand `c · [λ] · V^α` of a family template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateTerm {
    pub coefficient: BigRational,
    pub unknown: Option<String>,
    pub index: MultiIndex,
}

impl TemplateTerm {
    fn polynomial(&self) -> LambdaPolynomial {
        let base = LambdaPolynomial::constant(self.coefficient.clone());
        match &self.unknown {
            Some(u) => base.mul(&LambdaPolynomial::variable(u)),
            None => base,
        }
    }
}

/// A family `{ω_k}` whose members are sums with symbolic coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyTemplate {
    members: BTreeMap<usize, Vec<TemplateTerm>>,
}

impl FamilyTemplate {
    /// Parses `"2:V[0,1]; 3:l3*V[0,2,3]; 4:l4*V[0,2,3,4]"`. The `k:` prefix
    /// is optional and must match the arity of the sum when present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = FamilyTemplate::default();
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (declared, body) = match part.split_once(':') {
                Some((a, b)) => (
                    Some(a.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad arity {a:?}")))?),
                    b,
                ),
                None => (None, part),
            };
            let terms = parse_terms(body)?;
            let arity = terms[0].orders.len();
            if declared.is_some_and(|d| d != arity) {
                return Err(Error::Parse(format!("{part:?}: declared arity differs from V[...] length")));
            }
            let mut member = Vec::with_capacity(terms.len());
            for t in terms {
                let index = MultiIndex::new(t.orders)?;
                member.push(TemplateTerm {
                    coefficient: t.coefficient,
                    unknown: t.unknown,
                    index,
                });
            }
            out.insert(arity, member)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, arity: usize, terms: Vec<TemplateTerm>) -> Result<()> {
        if arity < 2 {
            return Err(Error::InvalidArgument("ω_1 must be zero".into()));
        }
        let distinct: BTreeSet<&MultiIndex> = terms.iter().map(|t| &t.index).collect();
        if distinct.len() != terms.len() {
            return Err(Error::InvalidArgument(format!("repeated multi-index at arity {arity}")));
        }
        if terms.iter().any(|t| t.index.arity() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: terms[0].index.arity(),
            });
        }
        if self.members.insert(arity, terms).is_some() {
            return Err(Error::InvalidArgument(format!("two members of arity {arity}")));
        }
        Ok(())
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, &[TemplateTerm])> + '_ {
        self.members.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn unknowns(&self) -> BTreeSet<String> {
        self.members
            .values()
            .flatten()
            .filter_map(|t| t.unknown.clone())
            .collect()
    }

    /// Concrete family with the unknowns replaced by `values`.
    pub fn specialize(&self, values: &BTreeMap<String, BigRational>) -> Result<Family> {
        let mut family = Family::new();
        for (&arity, terms) in &self.members {
            let mut sum = WronskianSum::zero(arity);
            for t in terms {
                let c = t.polynomial().evaluate(values)?;
                sum.add_term(t.index.orders(), Coefficient::Rational(c))?;
            }
            family.insert(sum)?;
        }
        Ok(family)
    }
}

/// One emitted condition: the coefficient of `V^γ` in the aggregated
/// residual, as a polynomial in the unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub gamma: MultiIndex,
    pub polynomial: LambdaPolynomial,
}

/// For each total arity `3 <= n <= n_max`, the nonzero coefficients of
/// `Σ_{i+j=n+1} ε(i,j) Q_alt(ω_i, ω_j)`, assembled by bilinearity from the
/// integer decompositions of `Q_alt(V^α, V^β)`. Arities without conditions
/// map to an empty list.
pub fn prolongation_conditions(
    template: &FamilyTemplate,
    n_max: usize,
    rule: SignRule,
) -> Result<BTreeMap<usize, Vec<Condition>>> {
    let mut cache: BTreeMap<(MultiIndex, MultiIndex), Vec<(MultiIndex, BigRational)>> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for n in 3..=n_max {
        let mut acc: BTreeMap<MultiIndex, LambdaPolynomial> = BTreeMap::new();
        for i in 2..n {
            let j = n + 1 - i;
            let (Some(fs), Some(gs)) = (template.members.get(&i), template.members.get(&j)) else {
                continue;
            };
            let eps = BigRational::from_integer(BigInt::from(rule.sign(i, j)));
            for s in fs {
                for t in gs {
                    let key = (s.index.clone(), t.index.clone());
                    if !cache.contains_key(&key) {
                        let form = decompose_q_alt(
                            &WronskianSum::single(s.index.clone()),
                            &WronskianSum::single(t.index.clone()),
                        )?;
                        let entries = form
                            .entries()
                            .map(|(pair, c)| (pair.alpha.clone(), c.to_rational().expect("characteristic 0")))
                            .collect();
                        cache.insert(key.clone(), entries);
                    }
                    let weight = s.polynomial().mul(&t.polynomial()).scale(&eps);
                    for (gamma, c) in &cache[&key] {
                        let slot = acc.entry(gamma.clone()).or_default();
                        *slot = slot.add(&weight.scale(c));
                    }
                }
            }
        }
        let conditions = acc
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(gamma, polynomial)| Condition { gamma, polynomial })
            .collect();
        out.insert(n, conditions);
    }
    Ok(out)
}

/// `true` when every condition is a rational multiple of `target`
/// (content-normalized comparison) and at least one is nonzero.
pub fn conditions_equivalent_to(conditions: &[Condition], target: &LambdaPolynomial) -> bool {
    let target = target.primitive();
    !conditions.is_empty()
        && conditions
            .iter()
            .all(|c| c.polynomial.primitive().ratio_to(&target).is_some())
}
