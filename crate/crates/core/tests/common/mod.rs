//! Shared test helpers: an independent polynomial-ring oracle over Q[x] and
//! a parser for hand-written decomposition tables.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nlie_core::support::DecomposedForm;
use nlie_core::{AlgebraElement, AlgebraSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Dense polynomial in Q[x], lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<BigRational>);

impl Poly {
    pub fn monomial(i: usize) -> Poly {
        let mut v = vec![BigRational::zero(); i + 1];
        v[i] = BigRational::one();
        Poly(v)
    }

    pub fn constant(c: i64) -> Poly {
        Poly(vec![BigRational::from_integer(BigInt::from(c))]).trim()
    }

    fn trim(mut self) -> Poly {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn derivative(&self, q: u32) -> Poly {
        let mut cur = self.clone();
        for _ in 0..q {
            cur = Poly(
                cur.0
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                    .collect(),
            );
        }
        cur.trim()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        Poly((0..n)
            .map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z))
            .collect())
        .trim()
    }

    pub fn scale(&self, c: i64) -> Poly {
        let c = BigRational::from_integer(BigInt::from(c));
        Poly(self.0.iter().map(|v| v * &c).collect()).trim()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly(vec![]);
        }
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trim()
    }

    /// Same polynomial as an element of the divided-power algebra
    /// (`x^i = i! x^(i)`).
    pub fn to_element(&self, spec: AlgebraSpec) -> AlgebraElement {
        let mut acc = spec.zero();
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let fact: BigInt = (1..=i as u64).map(BigInt::from).product();
            let coeff = nlie_core::Coefficient::Rational(c * BigRational::from_integer(fact));
            acc = &acc + &spec.term(i as u32, coeff).unwrap();
        }
        acc
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn perm_sign(p: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// `det(∂^{orders[r]} args[c])` by the Leibniz permutation expansion.
pub fn wronskian(orders: &[u32], args: &[Poly]) -> Poly {
    let n = orders.len();
    assert_eq!(n, args.len());
    let mut acc = Poly(vec![]);
    for p in permutations(n) {
        let mut t = Poly::constant(perm_sign(&p));
        for (r, &c) in p.iter().enumerate() {
            t = t.mul(&args[c].derivative(orders[r]));
        }
        acc = acc.add(&t);
    }
    acc
}

pub type Op<'a> = &'a dyn Fn(&[Poly]) -> Poly;

/// `f(u_1..u_{k-1}, g(u_k..))`.
pub fn star(f: Op, k: usize, g: Op, args: &[Poly]) -> Poly {
    let inner = g(&args[k - 1..]);
    let mut outer = args[..k - 1].to_vec();
    outer.push(inner);
    f(&outer)
}

/// The n-Lie defect, written straight from its definition.
pub fn q(f: Op, k: usize, g: Op, l: usize, args: &[Poly]) -> Poly {
    assert_eq!(args.len(), k + l - 1);
    let mut acc = star(f, k, g, args);
    for i in 0..l {
        let mut inner = args[..k - 1].to_vec();
        inner.push(args[k - 1 + i].clone());
        let mut outer = args[k - 1..].to_vec();
        outer[i] = f(&inner);
        acc = acc.add(&g(&outer).scale(-1));
    }
    acc
}

/// Signed sum over all permutations of `0..n` that are increasing on
/// `0..a` and on `a..n` (brute-force shuffles).
pub fn shuffle_sum(n: usize, a: usize, term: impl Fn(&[usize]) -> Poly) -> Poly {
    let mut acc = Poly(vec![]);
    for p in permutations(n) {
        if p[..a].windows(2).all(|w| w[0] < w[1]) && p[a..].windows(2).all(|w| w[0] < w[1]) {
            acc = acc.add(&term(&p).scale(perm_sign(&p)));
        }
    }
    acc
}

pub fn q_short(f: Op, k: usize, g: Op, l: usize, args: &[Poly]) -> Poly {
    let n = k + l - 1;
    shuffle_sum(n - 1, k - 1, |p| {
        let mut a: Vec<Poly> = p.iter().map(|&i| args[i].clone()).collect();
        a.push(args[n - 1].clone());
        star(f, k, g, &a)
    })
}

pub fn q_alt(f: Op, k: usize, g: Op, l: usize, args: &[Poly]) -> Poly {
    let n = k + l - 1;
    shuffle_sum(n, k - 1, |p| {
        let a: Vec<Poly> = p.iter().map(|&i| args[i].clone()).collect();
        star(f, k, g, &a)
    })
}

pub type Table = BTreeMap<(Vec<u32>, Vec<u32>), i64>;

/// Parses `4*V[0,1,2,7]V[0,1,2,3,4] - 2*V[...]V[...] + V[...]V[...]`.
pub fn parse_table(text: &str) -> Table {
    let mut out = Table::new();
    let cleaned: String = text.split_whitespace().collect();
    let mut rest = cleaned.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'-' => (-1, &rest[1..]),
            b'+' => (1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let (coeff, factors) = match term.split_once('*') {
            Some((c, f)) => (c.parse::<i64>().unwrap(), f),
            None => (1, term),
        };
        let idx: Vec<Vec<u32>> = factors
            .split('V')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.trim_start_matches('[')
                    .trim_end_matches(']')
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().unwrap())
                    .collect()
            })
            .collect();
        let beta = idx.get(1).cloned().unwrap_or_default();
        *out.entry((idx[0].clone(), beta)).or_insert(0) += sign * coeff;
    }
    out.retain(|_, v| *v != 0);
    out
}

pub fn form_table(form: &DecomposedForm) -> Table {
    form.entries()
        .map(|(pair, c)| {
            let v = c.to_integer().expect("integral table");
            (
                (pair.alpha.orders().to_vec(), pair.beta.orders().to_vec()),
                i64::try_from(v).unwrap(),
            )
        })
        .collect()
}

pub const Q0123: &str = "3*V[0,1,2]V[0,1,3,5] - 3*V[0,1,3]V[0,1,2,5] + 3*V[0,1,5]V[0,1,2,3]";

pub const Q123: &str = "3*V[1,2]V[1,3,5] - 3*V[1,3]V[1,2,5] + 3*V[1,5]V[1,2,3]";

pub const Q01234: &str = "
  4*V[0,1,2,7]V[0,1,2,3,4] + 2*V[0,1,3,6]V[0,1,2,3,4] - 2*V[0,1,4,5]V[0,1,2,3,4]
+ 2*V[0,2,3,5]V[0,1,2,3,4] + 2*V[0,1,2,6]V[0,1,2,3,5] - 2*V[0,2,3,4]V[0,1,2,3,5]
- 2*V[0,1,2,5]V[0,1,2,3,6] - 2*V[0,1,3,4]V[0,1,2,3,6] - 4*V[0,1,2,4]V[0,1,2,3,7]
+ 2*V[0,1,3,4]V[0,1,2,4,5] + 4*V[0,1,2,3]V[0,1,2,4,7] + 2*V[0,1,2,3]V[0,1,2,5,6]
- 2*V[0,1,2,4]V[0,1,3,4,5] + 2*V[0,1,2,3]V[0,1,3,4,6] + 2*V[0,1,2,3]V[0,2,3,4,5]";

pub const Q1234: &str = "
  4*V[1,2,7]V[1,2,3,4] + 2*V[1,3,6]V[1,2,3,4] - 2*V[1,4,5]V[1,2,3,4]
+ 2*V[2,3,5]V[1,2,3,4] + 2*V[1,2,6]V[1,2,3,5] - 2*V[2,3,4]V[1,2,3,5]
- 2*V[1,2,5]V[1,2,3,6] - 2*V[1,3,4]V[1,2,3,6] - 4*V[1,2,4]V[1,2,3,7]
+ 2*V[1,3,4]V[1,2,4,5] + 4*V[1,2,3]V[1,2,4,7] + 2*V[1,2,3]V[1,2,5,6]
- 2*V[1,2,4]V[1,3,4,5] + 2*V[1,2,3]V[1,3,4,6] + 2*V[1,2,3]V[2,3,4,5]";
