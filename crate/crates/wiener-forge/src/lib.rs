//! Wiener-type inversion in weighted sequence algebras.
//!
//! A sequence `f` on Z (or Z^2) with coefficients in a matrix algebra is
//! invertible in `l^1` exactly when its symbol `f^(z) = sum f(n) z^n` is
//! invertible on the unit circle. For a non-admissible weight `w` the inverse
//! may leave `l^p_w`; this crate computes the inverse numerically, fits its
//! tails, and constructs the weights (step-geometric, piecewise, hybrid) in
//! which the inverse provably stays, both for single weights and for
//! countable families of them.
//!
//! ```
//! use wiener_forge::sequences::Sequence;
//! use wiener_forge::weights::Weight;
//! use wiener_forge::wiener::{max_weight_discrete, AnnulusOptions};
//!
//! let f = Sequence::scalars(0, &[2.0, -1.0]);
//! let m = max_weight_discrete(&f, &Weight::exponential(0.0), &AnnulusOptions::default()).unwrap();
//! assert_eq!(m.case, 2);
//! assert!((m.s - 2.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod continuous;
pub mod error;
pub mod limits;
pub mod poly;
pub mod sequences;
pub mod weights;
pub mod wiener;

pub use algebra::AlgebraElement;
pub use error::{Error, Result};
pub use sequences::{Sequence, Verdict};
pub use weights::{Domain, Weight, WeightFamily};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/inversion.md")]
    mod inversion {}
    #[doc = include_str!("../../../book/src/maximal-weights.md")]
    mod maximal_weights {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    mod continuous {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
