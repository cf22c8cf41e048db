//! The divided-power algebra `U(p; M)`.
//!
//! Basis `x^(0), ..., x^(M)` with `x^(i) x^(j) = C(i+j, i) x^(i+j)` (zero when
//! `i + j > M`) and the special derivation `x^(i) -> x^(i-1)`. In
//! characteristic `p > 0` with `M = p^m - 1` this is `O_1(m)`; in
//! characteristic 0 it is the polynomial ring in the divided basis, with
//! `x^i = i! x^(i)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::{self, Coefficient, Residue};

/// Characteristic and truncation bound of a divided-power algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraSpec {
    p: u64,
    max_degree: u32,
}

impl AlgebraSpec {
    /// `p` must be 0 or prime. Any bound is accepted; only `M = p^m - 1` gives
    /// a differential algebra in characteristic `p`.
    pub fn new(p: u64, max_degree: u32) -> Result<Self> {
        if p != 0 {
            exact::check_prime(p)?;
        }
        Ok(AlgebraSpec { p, max_degree })
    }

    pub fn rational(max_degree: u32) -> Self {
        AlgebraSpec { p: 0, max_degree }
    }

    /// `O_1(m)`: characteristic `p`, bound `p^m - 1`.
    pub fn divided_power(p: u64, m: u32) -> Result<Self> {
        exact::check_prime(p)?;
        if m == 0 {
            return Err(Error::InvalidArgument("O_1(m) needs m >= 1".into()));
        }
        let size = p
            .checked_pow(m)
            .filter(|s| *s - 1 <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{m} is too large")))?;
        Ok(AlgebraSpec {
            p,
            max_degree: (size - 1) as u32,
        })
    }

    /// Least `O_1(m)` whose bound is at least `degree`.
    pub fn divided_power_covering(p: u64, degree: u64) -> Result<Self> {
        exact::check_prime(p)?;
        let mut m = 1u32;
        let mut size = p;
        while size <= degree {
            size = size
                .checked_mul(p)
                .ok_or_else(|| Error::InvalidArgument(format!("degree {degree} too large")))?;
            m += 1;
        }
        Self::divided_power(p, m)
    }

    /// Same rule as [`Self::divided_power_covering`] in characteristic `p`,
    /// and the bare bound in characteristic 0.
    pub fn covering(p: u64, degree: u64) -> Result<Self> {
        if p == 0 {
            let m = u32::try_from(degree)
                .map_err(|_| Error::InvalidArgument(format!("degree {degree} too large")))?;
            Ok(Self::rational(m))
        } else {
            Self::divided_power_covering(p, degree)
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// `true` when `max_degree + 1` is a power of `p` (always true in
    /// characteristic 0).
    pub fn is_divided_power(&self) -> bool {
        if self.p == 0 {
            return true;
        }
        let mut size = 1u64;
        while size < self.max_degree as u64 + 1 {
            size *= self.p;
        }
        size == self.max_degree as u64 + 1
    }

    /// `c` as a scalar of this field.
    pub fn scalar(&self, c: i64) -> Coefficient {
        if self.p == 0 {
            Coefficient::Rational(BigRational::from_integer(BigInt::from(c)))
        } else {
            Coefficient::Residue(Residue::reduce_i128(c as i128, self.p))
        }
    }

    /// Image of an exact scalar in this field.
    pub fn embed(&self, c: &Coefficient) -> Result<Coefficient> {
        if self.p == 0 {
            c.to_rational()
                .map(Coefficient::Rational)
                .ok_or_else(|| Error::FieldMismatch(format!("{c} is a residue")))
        } else {
            c.reduce_mod(self.p)
        }
    }

    /// `C(n, k)` in this field.
    pub fn binomial(&self, n: u64, k: u64) -> Coefficient {
        if self.p == 0 {
            Coefficient::Rational(BigRational::from_integer(exact::binom(n, k)))
        } else {
            Coefficient::Residue(exact::lucas(n, k, self.p))
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            spec: *self,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self) -> AlgebraElement {
        self.monomial(0).expect("x^(0) is always in range")
    }

    /// `x^(i)`.
    pub fn monomial(&self, i: u32) -> Result<AlgebraElement> {
        self.term(i, self.scalar(1))
    }

    /// The ordinary power `x^i = i! x^(i)`; needs `i!` to be invertible, i.e.
    /// `p = 0` or `i < p`.
    pub fn ordinary_monomial(&self, i: u32) -> Result<AlgebraElement> {
        if self.p != 0 && i as u64 >= self.p {
            return Err(Error::FactorialNotInvertible(i, self.p));
        }
        let mut fact = self.scalar(1);
        for f in 2..=i as i64 {
            fact *= &self.scalar(f);
        }
        self.term(i, fact)
    }

    /// `c * x^(i)`.
    pub fn term(&self, i: u32, c: Coefficient) -> Result<AlgebraElement> {
        if i > self.max_degree {
            return Err(Error::ExponentOutOfRange {
                exponent: i as u64,
                max: self.max_degree,
            });
        }
        let c = self.embed(&c)?;
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(i, c);
        }
        Ok(AlgebraElement { spec: *self, terms })
    }

    /// `true` iff `∂^q` satisfies the Leibniz rule on every pair of basis
    /// elements `x^(i), x^(j)` with `i + j <= M`.
    ///
    /// In characteristic 0 only `∂` itself qualifies. `q = 0` is rejected.
    pub fn is_derivation(&self, q: u32) -> Result<bool> {
        if q == 0 {
            return Err(Error::InvalidArgument("∂^0 is the identity map".into()));
        }
        if self.p == 0 && q > 1 {
            return Ok(false);
        }
        let m = self.max_degree;
        for i in 0..=m {
            let xi = self.monomial(i)?;
            let di = xi.der_pow(q);
            for j in i..=m - i {
                let xj = self.monomial(j)?;
                let lhs = (&xi * &xj).der_pow(q);
                let rhs = &(&di * &xj) + &(&xi * &xj.der_pow(q));
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Element of `U(p; M)` as a sparse map exponent -> nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    spec: AlgebraSpec,
    terms: BTreeMap<u32, Coefficient>,
}

impl AlgebraElement {
    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Coefficient)> + '_ {
        self.terms.iter().map(|(&i, c)| (i, c))
    }

    pub fn coefficient(&self, i: u32) -> Coefficient {
        self.terms
            .get(&i)
            .cloned()
            .unwrap_or_else(|| self.spec.scalar(0))
    }

    /// Coefficient of `x^(0)`.
    pub fn constant_term(&self) -> Coefficient {
        self.coefficient(0)
    }

    /// The single exponent of a nonzero homogeneous element.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        if self.terms.len() == 1 {
            self.terms.keys().next().copied()
        } else {
            None
        }
    }

    /// `true` if the element is a multiple of `x^(0)` (including zero).
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|&i| i == 0)
    }

    /// Builds an element from arbitrary terms, embedding coefficients and
    /// merging repeated exponents.
    pub fn from_terms(
        spec: AlgebraSpec,
        terms: impl IntoIterator<Item = (u32, Coefficient)>,
    ) -> Result<Self> {
        let mut out = spec.zero();
        for (i, c) in terms {
            out = &out + &spec.term(i, c)?;
        }
        Ok(out)
    }

    fn check_spec(&self, other: &AlgebraElement) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!(
                "{:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_spec(other)?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_spec(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, c: &Coefficient) -> AlgebraElement {
        let c = self.spec.embed(c).expect("scalar embeds into the algebra");
        if c.is_zero() {
            return self.spec.zero();
        }
        AlgebraElement {
            spec: self.spec,
            terms: self
                .terms
                .iter()
                .map(|(&i, v)| (i, v * &c))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// `∂^q`.
    pub fn der_pow(&self, q: u32) -> AlgebraElement {
        if q == 0 {
            return self.clone();
        }
        AlgebraElement {
            spec: self.spec,
            terms: self
                .terms
                .range(q..)
                .map(|(&i, c)| (i - q, c.clone()))
                .collect(),
        }
    }

    fn accumulate(terms: &mut BTreeMap<u32, Coefficient>, i: u32, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        match terms.entry(i) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    /// Panics on mismatched specs; use [`AlgebraElement::checked_add`] at
    /// trust boundaries.
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.spec, rhs.spec, "algebra mismatch");
        let mut terms = self.terms.clone();
        for (&i, c) in &rhs.terms {
            AlgebraElement::accumulate(&mut terms, i, c.clone());
        }
        AlgebraElement {
            spec: self.spec,
            terms,
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement {
            spec: self.spec,
            terms: self.terms.iter().map(|(&i, c)| (i, -c)).collect(),
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self + &(-rhs)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    /// Bilinear extension of the divided-power product, truncated above `M`.
    /// Panics on mismatched specs.
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.spec, rhs.spec, "algebra mismatch");
        let spec = self.spec;
        let mut terms = BTreeMap::new();
        for (&i, a) in &self.terms {
            for (&j, b) in &rhs.terms {
                let Some(s) = i.checked_add(j).filter(|s| *s <= spec.max_degree) else {
                    break;
                };
                let c = spec.binomial(s as u64, i as u64);
                if c.is_zero() {
                    continue;
                }
                AlgebraElement::accumulate(&mut terms, s, &(a * b) * &c);
            }
        }
        AlgebraElement { spec, terms }
    }
}

macro_rules! owned_elem_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for AlgebraElement {
            type Output = AlgebraElement;
            fn $m(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_elem_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let shown: Vec<_> = self
            .terms
            .iter()
            .map(|(i, c)| {
                let c = c.centered();
                if c.is_one() {
                    format!("x^({i})")
                } else {
                    format!("{c}*x^({i})")
                }
            })
            .collect();
        write!(f, "{}", shown.join(" + "))
    }
}

/// `c * 1` in the algebra.
pub fn constant(spec: AlgebraSpec, c: &Coefficient) -> Result<AlgebraElement> {
    spec.term(0, c.clone())
}
