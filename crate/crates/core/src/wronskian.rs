//! Generalized Wronskians `V^{i_1,...,i_k}(u_1,...,u_k) = det(∂^{i_r} u_c)`.
//!
//! Entry `(r, c)` of the matrix is `∂^{i_r}` applied to the `c`-th argument.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::diffalg::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::exact::Coefficient;

/// Strictly increasing derivative orders `i_1 < ... < i_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMultiIndex(format!(
                "{orders:?} is not strictly increasing"
            )));
        }
        Ok(MultiIndex(orders))
    }

    /// `0, 1, ..., k - 1`.
    pub fn standard(arity: u32) -> Self {
        MultiIndex((0..arity).collect())
    }

    /// Sorts `orders`, returning the sign of the sorting permutation, or
    /// `None` if an order repeats (the Wronskian then vanishes).
    pub fn canonical(orders: &[u32]) -> Option<(MultiIndex, i64)> {
        let mut v = orders.to_vec();
        let mut sign = 1i64;
        // insertion sort, counting transpositions
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((MultiIndex(v), sign))
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ i_j`.
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&i| i as u64).sum()
    }

    /// Parses `"0,1,2,3"`; whitespace is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(MultiIndex(Vec::new()));
        }
        let orders = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad derivative order {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(orders)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Exact determinant of a square matrix over the algebra.
///
/// Division-free: cofactor expansion up to size 5, expansion over column
/// subsets (one row at a time) above that. The algebra has zero divisors, so
/// fraction-free elimination does not apply.
pub fn determinant(spec: AlgebraSpec, matrix: &[Vec<AlgebraElement>]) -> AlgebraElement {
    let n = matrix.len();
    if n == 0 {
        return spec.one();
    }
    if n <= 5 {
        let mut cols: Vec<usize> = (0..n).collect();
        cofactor(spec, matrix, 0, &mut cols)
    } else {
        subset_expansion(spec, matrix)
    }
}

fn cofactor(
    spec: AlgebraSpec,
    m: &[Vec<AlgebraElement>],
    row: usize,
    cols: &mut Vec<usize>,
) -> AlgebraElement {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = spec.zero();
    for pos in 0..cols.len() {
        let c = cols[pos];
        if m[row][c].is_zero() {
            continue;
        }
        cols.remove(pos);
        let minor = cofactor(spec, m, row + 1, cols);
        cols.insert(pos, c);
        if minor.is_zero() {
            continue;
        }
        let term = &m[row][c] * &minor;
        acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

fn subset_expansion(spec: AlgebraSpec, m: &[Vec<AlgebraElement>]) -> AlgebraElement {
    let n = m.len();
    let mut layer: BTreeMap<u64, AlgebraElement> = BTreeMap::new();
    layer.insert(0, spec.one());
    for (row, entries) in m.iter().enumerate() {
        let mut next: BTreeMap<u64, AlgebraElement> = BTreeMap::new();
        for (&set, minor) in &layer {
            for (c, entry) in entries.iter().enumerate() {
                if set & (1 << c) != 0 || entry.is_zero() {
                    continue;
                }
                let above = (set >> (c + 1)).count_ones();
                let term = entry * minor;
                let slot = next.entry(set | (1 << c)).or_insert_with(|| spec.zero());
                *slot = if above % 2 == 0 {
                    &*slot + &term
                } else {
                    &*slot - &term
                };
            }
        }
        debug_assert!(next.keys().all(|s| s.count_ones() as usize == row + 1));
        layer = next;
    }
    layer.remove(&((1u64 << n) - 1)).unwrap_or_else(|| spec.zero())
}

fn common_spec(args: &[AlgebraElement]) -> Result<Option<AlgebraSpec>> {
    let Some(first) = args.first() else {
        return Ok(None);
    };
    let spec = first.spec();
    if let Some(bad) = args.iter().find(|a| a.spec() != spec) {
        return Err(Error::SpecMismatch(format!(
            "{:?} vs {:?}",
            spec,
            bad.spec()
        )));
    }
    Ok(Some(spec))
}

/// `V^α(args)`.
pub fn eval_wronskian(index: &MultiIndex, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    if args.len() != index.arity() {
        return Err(Error::ArityMismatch {
            expected: index.arity(),
            got: args.len(),
        });
    }
    let Some(spec) = common_spec(args)? else {
        return Err(Error::InvalidArgument(
            "the empty Wronskian has no algebra to land in".into(),
        ));
    };
    Ok(wronskian_unchecked(spec, index, args))
}

fn wronskian_unchecked(
    spec: AlgebraSpec,
    index: &MultiIndex,
    args: &[AlgebraElement],
) -> AlgebraElement {
    let matrix: Vec<Vec<AlgebraElement>> = index
        .orders()
        .iter()
        .map(|&order| args.iter().map(|a| a.der_pow(order)).collect())
        .collect();
    determinant(spec, &matrix)
}

/// A formal combination `Σ c_α V^α` of generalized Wronskians of one arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WronskianSum {
    arity: usize,
    terms: BTreeMap<MultiIndex, Coefficient>,
}

impl WronskianSum {
    pub fn zero(arity: usize) -> Self {
        WronskianSum {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(index: MultiIndex) -> Self {
        let mut s = Self::zero(index.arity());
        s.terms.insert(index, Coefficient::integer(1));
        s
    }

    /// `V^{0,1,...,k}`.
    pub fn standard(k: u32) -> Self {
        Self::single(MultiIndex::standard(k + 1))
    }

    /// Adds `c · V^{orders}`; unsorted orders are sorted with the permutation
    /// sign folded into `c`, repeated orders contribute nothing.
    pub fn add_term(&mut self, orders: &[u32], c: Coefficient) -> Result<()> {
        if orders.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: orders.len(),
            });
        }
        let Some((index, sign)) = MultiIndex::canonical(orders) else {
            return Ok(());
        };
        let c = if sign < 0 { -c } else { c };
        let sum = match self.terms.remove(&index) {
            Some(prev) => &prev + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(index, sum);
        }
        Ok(())
    }

    pub fn from_terms(
        arity: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Coefficient)>,
    ) -> Result<Self> {
        let mut s = Self::zero(arity);
        for (orders, c) in terms {
            s.add_term(&orders, c)?;
        }
        Ok(s)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Coefficient)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Common weight of all terms; `None` for mixed weights or the zero sum.
    pub fn weight(&self) -> Option<u64> {
        let mut weights = self.terms.keys().map(MultiIndex::weight);
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first)
    }

    /// Zero sums count as homogeneous.
    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.weight().is_some()
    }

    pub fn scaled(&self, c: &Coefficient) -> WronskianSum {
        WronskianSum {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// `Σ c_α V^α(args)`.
    pub fn eval(&self, args: &[AlgebraElement]) -> Result<AlgebraElement> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        let Some(spec) = common_spec(args)? else {
            return Err(Error::InvalidArgument(
                "nullary sums have no algebra to land in".into(),
            ));
        };
        let mut acc = spec.zero();
        for (index, c) in &self.terms {
            let c = spec.embed(c)?;
            if c.is_zero() {
                continue;
            }
            let v = wronskian_unchecked(spec, index, args);
            acc = &acc + &v.scale(&c);
        }
        Ok(acc)
    }

    /// Parses `c*V[i1,...,ik] + ...` with integer or rational `c`.
    pub fn parse(text: &str) -> Result<Self> {
        let terms = parse_terms(text)?;
        if let Some(t) = terms.iter().find(|t| t.unknown.is_some()) {
            return Err(Error::Parse(format!(
                "symbolic coefficient {:?} is only allowed in family templates",
                t.unknown.as_deref().unwrap_or_default()
            )));
        }
        let arity = terms[0].orders.len();
        Self::from_terms(
            arity,
            terms
                .into_iter()
                .map(|t| (t.orders, Coefficient::Rational(t.coefficient))),
        )
    }
}

impl From<MultiIndex> for WronskianSum {
    fn from(index: MultiIndex) -> Self {
        WronskianSum::single(index)
    }
}

impl fmt::Display for WronskianSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (index, c)) in self.terms.iter().enumerate() {
            let negative = c.to_rational().is_some_and(|r| r < BigRational::zero());
            let magnitude = if negative { -c } else { c.clone() };
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !magnitude.is_one() {
                write!(f, "{magnitude}*")?;
            }
            write!(f, "V[{index}]")?;
        }
        Ok(())
    }
}

/// One summand of the text syntax, before canonicalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedTerm {
    pub coefficient: BigRational,
    pub unknown: Option<String>,
    pub orders: Vec<u32>,
}

/// Parses `[+|-] [c*] [name*] V[i1,...] (+|- ...)*`. Coefficients are
/// integers or `a/b`; names are identifiers such as `l3`.
pub fn parse_terms(text: &str) -> Result<Vec<ParsedTerm>> {
    let mut rest = text.trim();
    if rest.is_empty() {
        return Err(Error::Parse("empty sum".into()));
    }
    let mut out = Vec::new();
    let mut first = true;
    while !rest.is_empty() {
        let mut sign = BigInt::one();
        if let Some(r) = rest.strip_prefix('+') {
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -sign;
            rest = r.trim_start();
        } else if !first {
            return Err(Error::Parse(format!("expected '+' or '-' before {rest:?}")));
        }
        first = false;
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        // a '-' may not appear inside a term, so this split is exact
        let (term, tail) = rest.split_at(end);
        out.push(parse_one_term(term.trim(), sign)?);
        rest = tail.trim_start();
    }
    let arity = out[0].orders.len();
    if out.iter().any(|t| t.orders.len() != arity) {
        return Err(Error::Parse("all terms must have the same arity".into()));
    }
    Ok(out)
}

fn parse_one_term(term: &str, sign: BigInt) -> Result<ParsedTerm> {
    let mut factors: Vec<&str> = term.split('*').map(str::trim).collect();
    let wronskian = factors
        .pop()
        .ok_or_else(|| Error::Parse("empty term".into()))?;
    let inner = wronskian
        .strip_prefix('V')
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('['))
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected V[...], found {wronskian:?}")))?;
    let orders = inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad derivative order {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coefficient = BigRational::from_integer(sign);
    let mut unknown = None;
    for f in factors {
        if f.starts_with(|c: char| c.is_ascii_alphabetic()) {
            if !f.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Parse(format!("bad unknown {f:?}")));
            }
            if unknown.replace(f.to_string()).is_some() {
                return Err(Error::Parse("at most one unknown per term".into()));
            }
        } else {
            coefficient *= parse_rational(f)?;
        }
    }
    Ok(ParsedTerm {
        coefficient,
        unknown,
        orders,
    })
}

fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad coefficient {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(num, den))
}

/// A multilinear map usable wherever a multiplication is expected: a formal
/// Wronskian sum or a contraction `i(a)ψ` of another evaluator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evaluator {
    Sum(WronskianSum),
    Contraction {
        inner: Box<Evaluator>,
        fixed: AlgebraElement,
    },
}

impl Evaluator {
    pub fn arity(&self) -> usize {
        match self {
            Evaluator::Sum(s) => s.arity(),
            Evaluator::Contraction { inner, .. } => inner.arity() - 1,
        }
    }

    pub fn eval(&self, args: &[AlgebraElement]) -> Result<AlgebraElement> {
        match self {
            Evaluator::Sum(s) => s.eval(args),
            Evaluator::Contraction { inner, fixed } => {
                if args.len() != self.arity() {
                    return Err(Error::ArityMismatch {
                        expected: self.arity(),
                        got: args.len(),
                    });
                }
                let mut full = Vec::with_capacity(args.len() + 1);
                full.push(fixed.clone());
                full.extend_from_slice(args);
                inner.eval(&full)
            }
        }
    }

    /// Weight of a homogeneous sum; contractions are not graded.
    pub fn weight(&self) -> Option<u64> {
        match self {
            Evaluator::Sum(s) => s.weight(),
            Evaluator::Contraction { .. } => None,
        }
    }

    pub fn as_sum(&self) -> Option<&WronskianSum> {
        match self {
            Evaluator::Sum(s) => Some(s),
            Evaluator::Contraction { .. } => None,
        }
    }
}

impl From<WronskianSum> for Evaluator {
    fn from(s: WronskianSum) -> Self {
        Evaluator::Sum(s)
    }
}

impl From<MultiIndex> for Evaluator {
    fn from(i: MultiIndex) -> Self {
        Evaluator::Sum(WronskianSum::single(i))
    }
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Sum(s) => write!(f, "{s}"),
            Evaluator::Contraction { inner, fixed } => write!(f, "i({fixed})({inner})"),
        }
    }
}

/// `i(a)ψ`: the map with its first argument fixed to `a`.
pub fn contract(psi: &Evaluator, a: AlgebraElement) -> Result<Evaluator> {
    if psi.arity() < 2 {
        return Err(Error::InvalidArgument(
            "contracting a unary map leaves a constant".into(),
        ));
    }
    Ok(Evaluator::Contraction {
        inner: Box::new(psi.clone()),
        fixed: a,
    })
}

/// `f ⌣ g` on values: the product in `U`.
pub fn cup(f_value: &AlgebraElement, g_value: &AlgebraElement) -> Result<AlgebraElement> {
    f_value.checked_mul(g_value)
}

/// `(f ⌣ g)(u_1..u_{k+l}) = f(u_1..u_k) g(u_{k+1}..u_{k+l})`.
pub fn cup_eval(f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    let (k, l) = (f.arity(), g.arity());
    if args.len() != k + l {
        return Err(Error::ArityMismatch {
            expected: k + l,
            got: args.len(),
        });
    }
    cup(&f.eval(&args[..k])?, &g.eval(&args[k..])?)
}

/// `(f ⋆ g)(u_1..u_{k+l-1}) = f(u_1..u_{k-1}, g(u_k..u_{k+l-1}))`.
pub fn star(f: &Evaluator, g: &Evaluator, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    let (k, l) = (f.arity(), g.arity());
    if k == 0 || args.len() + 1 != k + l {
        return Err(Error::ArityMismatch {
            expected: (k + l).saturating_sub(1),
            got: args.len(),
        });
    }
    let inner = g.eval(&args[k - 1..])?;
    let mut outer = Vec::with_capacity(k);
    outer.extend_from_slice(&args[..k - 1]);
    outer.push(inner);
    f.eval(&outer)
}
