//! Exact symbolic verification of n-ary identities for generalized
//! Wronskian multiplications on divided-power differential algebras.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, parallel scheduling and report formats live in
//! the companion `nlie` crate.
//!
//! Layout, bottom-up:
//!
//! * [`exact`]: integers, rationals, prime-field residues, binomials.
//! * [`diffalg`]: the truncated divided-power algebra with its special
//!   derivation.
//! * [`wronskian`]: multi-indices, determinant evaluation, formal sums and
//!   contractions.
//! * [`qmaps`]: shuffles, the four Leibniz-defect maps and the identity
//!   checkers.
//! * [`support`]: weight-graded decomposition of defect maps into cup products
//!   of Wronskians.
//! * [`classify`]: parameter sweeps, witnesses and prolongation conditions.
#![no_std]

extern crate alloc;

pub mod classify;
pub mod diffalg;
mod error;
pub mod exact;
pub mod qmaps;
pub mod support;
pub mod wronskian;

pub use diffalg::{AlgebraElement, AlgebraSpec};
pub use error::{Error, Result};
pub use exact::Coefficient;
pub use qmaps::{CheckMode, CheckOptions, CheckPlan, CheckReport, Identity};
pub use support::DecomposedForm;
pub use wronskian::{Evaluator, MultiIndex, WronskianSum};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
