//! Exact scalars.
//!
//! A [`Coefficient`] is an arbitrary-precision integer, a normalized rational,
//! or a residue modulo a prime. Characteristic zero always computes with
//! rationals; `p = 0` in downstream signatures selects that mode.

use alloc::format;
use alloc::string::ToString;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Rejects anything but a prime.
pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Element of `Z/pZ` for a prime `p`, stored as `0 <= value < p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Reduces `value` modulo the prime `p`.
    pub fn new(value: i64, p: u64) -> Result<Self> {
        check_prime(p)?;
        Ok(Self::reduce_i128(value as i128, p))
    }

    /// Caller guarantees that `p` is prime.
    pub(crate) fn reduce_i128(value: i128, p: u64) -> Self {
        let m = p as i128;
        Residue {
            value: value.rem_euclid(m) as u64,
            modulus: p,
        }
    }

    pub(crate) fn from_bigint(value: &BigInt, p: u64) -> Self {
        let r = value.mod_floor(&BigInt::from(p));
        Residue {
            value: r.to_u64().expect("residue fits"),
            modulus: p,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Representative in `(-p/2, p/2]`.
    pub fn centered(&self) -> i64 {
        if self.value > self.modulus / 2 {
            self.value as i64 - self.modulus as i64
        } else {
            self.value as i64
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Residue) {
        assert_eq!(
            self.modulus, other.modulus,
            "residues modulo different primes"
        );
    }

    pub fn pow(self, mut e: u64) -> Residue {
        let mut base = self;
        let mut acc = Residue {
            value: 1 % self.modulus,
            modulus: self.modulus,
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self) -> Result<Residue> {
        if self.value == 0 {
            return Err(Error::NotInvertible("0".to_string(), self.modulus));
        }
        Ok(self.pow(self.modulus - 2))
    }
}

impl Add for Residue {
    type Output = Residue;

    fn add(self, other: Residue) -> Residue {
        self.same_field(&other);
        let s = (self.value as u128 + other.value as u128) % self.modulus as u128;
        Residue {
            value: s as u64,
            modulus: self.modulus,
        }
    }
}

impl Neg for Residue {
    type Output = Residue;

    fn neg(self) -> Residue {
        Residue {
            value: if self.value == 0 {
                0
            } else {
                self.modulus - self.value
            },
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;

    fn sub(self, other: Residue) -> Residue {
        self + -other
    }
}

impl Mul for Residue {
    type Output = Residue;

    fn mul(self, other: Residue) -> Residue {
        self.same_field(&other);
        let s = (self.value as u128 * other.value as u128) % self.modulus as u128;
        Residue {
            value: s as u64,
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An exact scalar.
///
/// Integers and rationals mix freely (the result is rational unless both are
/// integers). Residues mix with integers, with rationals whose denominator is
/// invertible, and with residues of the same prime. Combining residues of
/// different primes is a programming error and panics; fallible conversions go
/// through [`Coefficient::reduce_mod`].
#[derive(Clone, Debug)]
pub enum Coefficient {
    Integer(BigInt),
    Rational(BigRational),
    Residue(Residue),
}

impl Coefficient {
    pub fn integer(v: i64) -> Self {
        Coefficient::Integer(BigInt::from(v))
    }

    /// `num/den` in lowest terms.
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Coefficient::Rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    pub fn residue(v: i64, p: u64) -> Result<Self> {
        Ok(Coefficient::Residue(Residue::new(v, p)?))
    }

    /// The zero of the same mode as `self`.
    pub fn zero_like(&self) -> Self {
        match self {
            Coefficient::Integer(_) => Coefficient::Integer(BigInt::zero()),
            Coefficient::Rational(_) => Coefficient::Rational(BigRational::zero()),
            Coefficient::Residue(r) => Coefficient::Residue(Residue {
                value: 0,
                modulus: r.modulus,
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Integer(v) => v.is_zero(),
            Coefficient::Rational(v) => v.is_zero(),
            Coefficient::Residue(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Integer(v) => v.is_one(),
            Coefficient::Rational(v) => v.is_one(),
            Coefficient::Residue(r) => r.value == 1,
        }
    }

    /// Characteristic of the field this value lives in (0 for integers and
    /// rationals).
    pub fn characteristic(&self) -> u64 {
        match self {
            Coefficient::Residue(r) => r.modulus,
            _ => 0,
        }
    }

    /// Integer value, if this is an integer or a rational with denominator 1.
    pub fn to_integer(&self) -> Option<BigInt> {
        match self {
            Coefficient::Integer(v) => Some(v.clone()),
            Coefficient::Rational(v) if v.is_integer() => Some(v.to_integer()),
            _ => None,
        }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Coefficient::Integer(v) => Some(BigRational::from_integer(v.clone())),
            Coefficient::Rational(v) => Some(v.clone()),
            Coefficient::Residue(_) => None,
        }
    }

    /// Image in `Z/pZ` (or the value itself when `p = 0`).
    pub fn reduce_mod(&self, p: u64) -> Result<Coefficient> {
        if p == 0 {
            return match self {
                Coefficient::Residue(r) => Err(Error::FieldMismatch(format!(
                    "residue mod {} has no characteristic-zero image",
                    r.modulus
                ))),
                other => Ok(other.clone()),
            };
        }
        match self {
            Coefficient::Integer(v) => Ok(Coefficient::Residue(Residue::from_bigint(v, p))),
            Coefficient::Rational(v) => {
                let num = Residue::from_bigint(v.numer(), p);
                let den = Residue::from_bigint(v.denom(), p);
                if den.is_zero() {
                    return Err(Error::NotInvertible(v.denom().to_string(), p));
                }
                Ok(Coefficient::Residue(num.mul(den.inv()?)))
            }
            Coefficient::Residue(r) if r.modulus == p => Ok(self.clone()),
            Coefficient::Residue(r) => Err(Error::FieldMismatch(format!(
                "residue mod {} reduced mod {}",
                r.modulus, p
            ))),
        }
    }

    /// Multiplicative inverse; integers invert to rationals.
    pub fn inv(&self) -> Result<Coefficient> {
        if self.is_zero() {
            return Err(match self {
                Coefficient::Residue(r) => Error::NotInvertible("0".to_string(), r.modulus),
                _ => Error::DivisionByZero,
            });
        }
        Ok(match self {
            Coefficient::Integer(v) => {
                Coefficient::Rational(BigRational::new(BigInt::one(), v.clone()))
            }
            Coefficient::Rational(v) => Coefficient::Rational(v.recip()),
            Coefficient::Residue(r) => Coefficient::Residue(r.inv()?),
        })
    }

    pub fn checked_div(&self, other: &Coefficient) -> Result<Coefficient> {
        Ok(self * &other.inv()?)
    }

    /// Human-facing integer for residues: the centered representative.
    pub fn centered(&self) -> Coefficient {
        match self {
            Coefficient::Residue(r) => Coefficient::Integer(BigInt::from(r.centered())),
            other => other.clone(),
        }
    }

    fn binary(
        &self,
        other: &Coefficient,
        int: impl Fn(&BigInt, &BigInt) -> BigInt,
        rat: impl Fn(&BigRational, &BigRational) -> BigRational,
        res: impl Fn(Residue, Residue) -> Residue,
    ) -> Coefficient {
        use Coefficient::*;
        match (self, other) {
            (Integer(a), Integer(b)) => Integer(int(a, b)),
            (Residue(a), Residue(b)) => Residue(res(*a, *b)),
            (Residue(a), b) => Residue(res(*a, b.as_residue(a.modulus))),
            (a, Residue(b)) => Residue(res(a.as_residue(b.modulus), *b)),
            (a, b) => Rational(rat(
                &a.to_rational().expect("rational"),
                &b.to_rational().expect("rational"),
            )),
        }
    }

    fn as_residue(&self, p: u64) -> Residue {
        match self.reduce_mod(p) {
            Ok(Coefficient::Residue(r)) => r,
            Ok(_) => unreachable!("reduce_mod(p > 0) yields a residue"),
            Err(e) => panic!("{e}"),
        }
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        use Coefficient::*;
        match (self, other) {
            (Residue(a), Residue(b)) => a == b,
            (Residue(_), _) | (_, Residue(_)) => false,
            (Integer(a), Integer(b)) => a == b,
            (a, b) => a.to_rational() == b.to_rational(),
        }
    }
}

impl Eq for Coefficient {}

impl Hash for Coefficient {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Coefficient::Residue(r) => {
                1u8.hash(state);
                r.hash(state);
            }
            other => {
                0u8.hash(state);
                other.to_rational().hash(state);
            }
        }
    }
}

impl PartialOrd for Coefficient {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.to_rational(), other.to_rational()) {
            (Some(a), Some(b)) => Some(a.cmp(&b)),
            _ => match (self, other) {
                (Coefficient::Residue(a), Coefficient::Residue(b)) if a.modulus == b.modulus => {
                    Some(a.value.cmp(&b.value))
                }
                _ => None,
            },
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Integer(v) => write!(f, "{v}"),
            Coefficient::Rational(v) => {
                if v.is_integer() {
                    write!(f, "{}", v.numer())
                } else {
                    write!(f, "{}/{}", v.numer(), v.denom())
                }
            }
            Coefficient::Residue(r) => write!(f, "{r}"),
        }
    }
}

impl From<i64> for Coefficient {
    fn from(v: i64) -> Self {
        Coefficient::integer(v)
    }
}

impl From<BigInt> for Coefficient {
    fn from(v: BigInt) -> Self {
        Coefficient::Integer(v)
    }
}

impl From<BigRational> for Coefficient {
    fn from(v: BigRational) -> Self {
        Coefficient::Rational(v)
    }
}

impl From<Residue> for Coefficient {
    fn from(v: Residue) -> Self {
        Coefficient::Residue(v)
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &Coefficient) -> Coefficient {
        self.binary(rhs, |a, b| a + b, |a, b| a + b, Residue::add)
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: &Coefficient) -> Coefficient {
        self.binary(rhs, |a, b| a - b, |a, b| a - b, Residue::sub)
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &Coefficient) -> Coefficient {
        self.binary(rhs, |a, b| a * b, |a, b| a * b, Residue::mul)
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        match self {
            Coefficient::Integer(v) => Coefficient::Integer(-v),
            Coefficient::Rational(v) => Coefficient::Rational(-v),
            Coefficient::Residue(r) => Coefficient::Residue(r.neg()),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Coefficient {
            type Output = Coefficient;
            fn $m(self, rhs: Coefficient) -> Coefficient {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $m(self, rhs: &Coefficient) -> Coefficient {
                (&self).$m(rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Coefficient> for Coefficient {
    fn sub_assign(&mut self, rhs: &Coefficient) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Coefficient> for Coefficient {
    fn mul_assign(&mut self, rhs: &Coefficient) {
        *self = &*self * rhs;
    }
}

/// `C(n, k)`, zero when `k > n`.
pub fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(a, b) mod p` from the base-`p` digits of `a` and `b`.
pub fn binom_mod_p(a: u64, b: u64, p: u64) -> Result<Residue> {
    check_prime(p)?;
    Ok(lucas(a, b, p))
}

/// Lucas reduction without the primality check.
pub(crate) fn lucas(mut a: u64, mut b: u64, p: u64) -> Residue {
    let mut acc = Residue {
        value: 1 % p,
        modulus: p,
    };
    while b > 0 || a > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return Residue { value: 0, modulus: p };
        }
        acc = acc.mul(small_binom_mod(ad, bd, p));
        a /= p;
        b /= p;
    }
    acc
}

/// `C(n, k) mod p` for digits `k <= n < p`.
fn small_binom_mod(n: u64, k: u64, p: u64) -> Residue {
    let k = k.min(n - k);
    let mut num = Residue { value: 1 % p, modulus: p };
    let mut den = num;
    for i in 0..k {
        num = num.mul(Residue::reduce_i128((n - i) as i128, p));
        den = den.mul(Residue::reduce_i128((i + 1) as i128, p));
    }
    // den is a product of integers below p, hence a unit.
    num.mul(den.inv().expect("unit"))
}
