//! Weight-graded supports: `Γ_{k,l}(s)`, exact decomposition of defect maps
//! into cup products `Σ λ_{α,β} V^α ⌣ V^β`, and restoration cross-checks.
//!
//! A graded D-invariant map of weight `s` is determined by its values on
//! divided-power basis tuples of total degree `s`. On such a tuple,
//! `V^α(x^(α'))` is the Kronecker delta `δ_{α,α'}` whenever `|α| = |α'|`, so
//! `λ_{α,β}` is the scalar value of the map at `(x^(α), x^(β))`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffalg::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::exact::Coefficient;
use crate::qmaps::{self, CheckMode, CheckReport, Identity, SymmetryDescriptor, Witness};
use crate::wronskian::{eval_wronskian, Evaluator, MultiIndex, WronskianSum};

/// A pair `(α, β)` of strictly increasing tuples; ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionPair {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
}

impl PartitionPair {
    pub fn new(alpha: MultiIndex, beta: MultiIndex) -> Self {
        PartitionPair { alpha, beta }
    }

    pub fn weight(&self) -> u64 {
        self.alpha.weight() + self.beta.weight()
    }

    /// Concatenated exponents, the supporting chain of this pair.
    pub fn chain(&self) -> Vec<u32> {
        let mut v = self.alpha.orders().to_vec();
        v.extend_from_slice(self.beta.orders());
        v
    }

    fn split(chain: &[u32], k: usize) -> Self {
        // chains come from skew blocks, so both halves are strictly increasing
        PartitionPair {
            alpha: MultiIndex::new(chain[..k].to_vec()).expect("increasing block"),
            beta: MultiIndex::new(chain[k..].to_vec()).expect("increasing block"),
        }
    }
}

impl fmt::Display for PartitionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}|{})", self.alpha, self.beta)
    }
}

/// `Γ_{k,l}(s)`: every pair of strictly increasing tuples of lengths `k`, `l`
/// with entries summing to `s`, in lexicographic order.
pub fn gamma_partitions(k: usize, l: usize, s: u64) -> Vec<PartitionPair> {
    let max = u32::try_from(s).unwrap_or(u32::MAX);
    SymmetryDescriptor::skew(&[k, l])
        .chains(s, max)
        .iter()
        .map(|c| PartitionPair::split(c, k))
        .collect()
}

/// Exact coefficient table of `Σ λ_{α,β} V^α ⌣ V^β` with `|α| = k`,
/// `|β| = l`. Only nonzero entries are stored. `l = 0` stands for a single
/// fully skew factor (`V^∅ = 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedForm {
    k: usize,
    l: usize,
    weight: Option<u64>,
    entries: BTreeMap<PartitionPair, Coefficient>,
}

impl DecomposedForm {
    pub fn new(k: usize, l: usize, weight: Option<u64>) -> Self {
        DecomposedForm {
            k,
            l,
            weight,
            entries: BTreeMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn arity(&self) -> usize {
        self.k + self.l
    }

    /// Target weight; `None` for forms assembled from several weights.
    pub fn weight(&self) -> Option<u64> {
        self.weight
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PartitionPair, &Coefficient)> + '_ {
        self.entries.iter()
    }

    pub fn get(&self, pair: &PartitionPair) -> Option<&Coefficient> {
        self.entries.get(pair)
    }

    /// Coefficient of `V^α ⌣ V^β`, zero when absent.
    pub fn coefficient(&self, alpha: &[u32], beta: &[u32]) -> Result<Coefficient> {
        let pair = PartitionPair::new(MultiIndex::new(alpha.to_vec())?, MultiIndex::new(beta.to_vec())?);
        Ok(self.entries.get(&pair).cloned().unwrap_or(Coefficient::integer(0)))
    }

    /// Adds `c` to the entry at `pair`.
    pub fn add(&mut self, pair: PartitionPair, c: Coefficient) -> Result<()> {
        if pair.alpha.arity() != self.k || pair.beta.arity() != self.l {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: pair.alpha.arity() + pair.beta.arity(),
            });
        }
        if self.weight.is_some_and(|w| w != pair.weight()) {
            self.weight = None;
        }
        let sum = match self.entries.remove(&pair) {
            Some(prev) => &prev + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.entries.insert(pair, normalize(sum));
        }
        Ok(())
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &DecomposedForm, c: &Coefficient) -> Result<()> {
        if self.is_empty() && self.weight.is_none() {
            self.weight = other.weight;
        } else if self.weight != other.weight && !other.is_empty() {
            self.weight = None;
        }
        for (pair, v) in &other.entries {
            self.add(pair.clone(), v * c)?;
        }
        Ok(())
    }

    /// The whole of `Γ_{k,l}(s)` with explicit zeros, for side-by-side
    /// comparison with hand-computed tables.
    pub fn full_table(&self) -> Option<Vec<(PartitionPair, Coefficient)>> {
        let s = self.weight?;
        Some(
            gamma_partitions(self.k, self.l, s)
                .into_iter()
                .map(|pair| {
                    let c = self.entries.get(&pair).cloned().unwrap_or(Coefficient::integer(0));
                    (pair, c)
                })
                .collect(),
        )
    }

    /// `Σ λ_{α,β} V^α(args[..k]) V^β(args[k..])`.
    pub fn eval(&self, args: &[AlgebraElement]) -> Result<AlgebraElement> {
        if args.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: args.len(),
            });
        }
        let spec = args
            .first()
            .map(AlgebraElement::spec)
            .ok_or_else(|| Error::InvalidArgument("nullary form".into()))?;
        let (left, right) = args.split_at(self.k);
        let mut acc = spec.zero();
        for (pair, c) in &self.entries {
            let c = spec.embed(c)?;
            if c.is_zero() {
                continue;
            }
            let a = factor(spec, &pair.alpha, left)?;
            let b = factor(spec, &pair.beta, right)?;
            acc = &acc + &(&a * &b).scale(&c);
        }
        Ok(acc)
    }

    /// Compact rendering, e.g. `3*V[0,1,2]V[0,1,3,5] - 3*V[0,1,3]V[0,1,2,5]`.
    pub fn describe(&self) -> String {
        if self.entries.is_empty() {
            return String::from("0");
        }
        let mut out = String::new();
        for (i, (pair, c)) in self.entries.iter().enumerate() {
            let c = c.centered();
            let negative = c < Coefficient::integer(0);
            let magnitude = if negative { -c } else { c };
            match (i, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            if !magnitude.is_one() {
                out.push_str(&format!("{magnitude}*"));
            }
            out.push_str(&format!("V[{}]", pair.alpha));
            if self.l > 0 {
                out.push_str(&format!("V[{}]", pair.beta));
            }
        }
        out
    }
}

impl fmt::Display for DecomposedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn factor(spec: AlgebraSpec, index: &MultiIndex, args: &[AlgebraElement]) -> Result<AlgebraElement> {
    if index.arity() == 0 {
        Ok(spec.one())
    } else {
        eval_wronskian(index, args)
    }
}

/// Integral rationals become integers so tables print and compare uniformly.
fn normalize(c: Coefficient) -> Coefficient {
    match c.to_integer() {
        Some(i) if !matches!(c, Coefficient::Residue(_)) => Coefficient::Integer(i),
        _ => c,
    }
}

/// Reads `λ_{α,β}` off a D-invariant map of weight `s` by evaluating it at
/// every pair of `Γ_{k,l}(s)` in `spec`.
pub fn decompose_by_support(
    k: usize,
    l: usize,
    s: u64,
    spec: AlgebraSpec,
    map: impl Fn(&[AlgebraElement]) -> Result<AlgebraElement>,
) -> Result<DecomposedForm> {
    if (spec.max_degree() as u64) < s {
        return Err(Error::TruncationTooSmall {
            max: spec.max_degree(),
            required: s,
        });
    }
    let mut form = DecomposedForm::new(k, l, Some(s));
    for pair in gamma_partitions(k, l, s) {
        let args = pair
            .chain()
            .iter()
            .map(|&i| spec.monomial(i))
            .collect::<Result<Vec<_>>>()?;
        let value = map(&args)?;
        if !value.is_scalar() {
            return Err(Error::NotHomogeneous(format!(
                "value {value} at {pair} is not a scalar"
            )));
        }
        form.add(pair, value.constant_term())?;
    }
    Ok(form)
}

/// Shape `(k, l)` of the decomposition of a defect map of a `k`-ary map.
pub fn decomposition_shape(identity: Identity, arity: usize) -> (usize, usize) {
    let short = arity.saturating_sub(1);
    match identity {
        Identity::NLie | Identity::Homotopical => (short, arity),
        Identity::LeftCommutative => (2 * short, 1),
    }
}

/// Integer table of `Q ψ` (or of `Q_short ψ`, `Q_alt ψ`) over
/// characteristic 0, as cup products of Wronskians.
pub fn decompose_q(psi: &WronskianSum, identity: Identity) -> Result<DecomposedForm> {
    if !psi.is_homogeneous() {
        return Err(Error::MixedWeight);
    }
    let (k, l) = decomposition_shape(identity, psi.arity());
    let s = 2 * psi.weight().unwrap_or(0);
    if psi.is_zero() {
        return Ok(DecomposedForm::new(k, l, Some(s)));
    }
    let spec = AlgebraSpec::covering(0, s)?;
    let ev = Evaluator::Sum(psi.clone());
    let form = decompose_by_support(k, l, s, spec, |args| identity.apply(&ev, &ev, args))?;
    if let Some((pair, c)) = form.entries().find(|(_, c)| c.to_integer().is_none()) {
        return Err(Error::Integrality(format!("λ at {pair} is {c}")));
    }
    Ok(form)
}

/// `Q_alt(f, g)` over characteristic 0 as a combination of single Wronskians
/// of arity `|f| + |g| - 1`. Mixed-weight inputs are split into homogeneous
/// parts, decomposed separately and added up.
pub fn decompose_q_alt(f: &WronskianSum, g: &WronskianSum) -> Result<DecomposedForm> {
    let n = f.arity() + g.arity() - 1;
    let mut total = DecomposedForm::new(n, 0, None);
    for (wf, fp) in homogeneous_parts(f) {
        for (wg, gp) in homogeneous_parts(g) {
            let s = wf + wg;
            let spec = AlgebraSpec::covering(0, s)?;
            let (fe, ge) = (Evaluator::Sum(fp.clone()), Evaluator::Sum(gp));
            let part = decompose_by_support(n, 0, s, spec, |args| qmaps::q_alt_eval(&fe, &ge, args))?;
            total.add_scaled(&part, &Coefficient::integer(1))?;
        }
    }
    Ok(total)
}

/// Splits a sum into its homogeneous components, keyed by weight.
pub fn homogeneous_parts(psi: &WronskianSum) -> BTreeMap<u64, WronskianSum> {
    let mut parts: BTreeMap<u64, WronskianSum> = BTreeMap::new();
    for (index, c) in psi.terms() {
        let part = parts
            .entry(index.weight())
            .or_insert_with(|| WronskianSum::zero(psi.arity()));
        part.add_term(index.orders(), c.clone())
            .expect("arity matches its own sum");
    }
    parts
}

/// Compares a form with its source map on every supporting chain and on
/// `trials` pseudo-random basis tuples (seeded, so reruns are identical).
/// On disagreement the witness value is `form - source`.
pub fn restore_check(
    form: &DecomposedForm,
    source: impl Fn(&[AlgebraElement]) -> Result<AlgebraElement>,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let arity = form.arity();
    let weight = form.weight.unwrap_or(0);
    let bound = weight as u32 + 2;
    let spec = AlgebraSpec::rational(bound * arity.max(1) as u32);
    let mut tuples: Vec<Vec<u32>> = match form.weight {
        Some(s) => gamma_partitions(form.k, form.l, s)
            .iter()
            .map(PartitionPair::chain)
            .collect(),
        None => Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        tuples.push((0..arity).map(|_| rng.gen_range(0..=bound)).collect());
    }
    let total = tuples.len() as u64;
    let mut witness = None;
    let mut examined = total;
    for (idx, tuple) in tuples.iter().enumerate() {
        let args = tuple
            .iter()
            .map(|&i| spec.monomial(i))
            .collect::<Result<Vec<_>>>()?;
        let diff = &form.eval(&args)? - &source(&args)?;
        if !diff.is_zero() {
            witness = Some(Witness { args, value: diff });
            examined = idx as u64 + 1;
            break;
        }
    }
    Ok(CheckReport {
        identity: String::from("restore"),
        psi: form.describe(),
        p: 0,
        max_degree: spec.max_degree(),
        mode: CheckMode::Brute,
        verdict: witness.is_none(),
        witness,
        chains_examined: examined,
        chains_total: total,
    })
}

/// Entry-wise reduction mod `p`, dropping entries that vanish.
pub fn reduce_mod_p(form: &DecomposedForm, p: u64) -> Result<DecomposedForm> {
    let mut out = DecomposedForm::new(form.k, form.l, form.weight);
    for (pair, c) in &form.entries {
        let r = c.reduce_mod(p)?;
        if !r.is_zero() {
            out.entries.insert(pair.clone(), r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn small_gamma_sets() {
        let g = gamma_partitions(1, 2, 2);
        assert_eq!(
            g,
            [
                PartitionPair::new(mi(&[0]), mi(&[0, 2])),
                PartitionPair::new(mi(&[1]), mi(&[0, 1]))
            ]
        );
        assert_eq!(gamma_partitions(3, 4, 12).len(), 10);
        assert_eq!(gamma_partitions(4, 5, 20).len(), 20);
        assert!(gamma_partitions(3, 4, 8).is_empty());
    }

    #[test]
    fn bracket_has_empty_table() {
        let f = decompose_q(&WronskianSum::standard(1), Identity::NLie).unwrap();
        assert!(f.is_empty());
        assert_eq!(f.weight(), Some(2));
    }

    #[test]
    fn describe_and_reduce() {
        let mut f = DecomposedForm::new(1, 1, Some(1));
        f.add(PartitionPair::new(mi(&[0]), mi(&[1])), Coefficient::integer(3)).unwrap();
        f.add(PartitionPair::new(mi(&[1]), mi(&[0])), Coefficient::integer(-2)).unwrap();
        assert_eq!(f.describe(), "3*V[0]V[1] - 2*V[1]V[0]");
        assert_eq!(reduce_mod_p(&f, 3).unwrap().len(), 1);
        f.add(PartitionPair::new(mi(&[0]), mi(&[1])), Coefficient::integer(-3)).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn homogeneous_split() {
        let s = WronskianSum::parse("V[0,1,2] + 2*V[0,1,3] - V[0,2,3]").unwrap();
        let parts = homogeneous_parts(&s);
        assert_eq!(parts.keys().copied().collect::<Vec<_>>(), [3, 4, 5]);
    }
}
