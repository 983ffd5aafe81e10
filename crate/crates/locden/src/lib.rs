//! Exact computation of motivic local densities over Henselian valued fields.
//!
//! The library is organised around a symbolic pipeline and an independent
//! verification oracle:
//!
//! - [`lring`]: exact arithmetic in the localized ring
//!   `Z[L, L^-1, 1/(1-L^-n)]` and its rationalization, with degree,
//!   evaluation `L -> q`, and decidable positivity.
//! - [`presburger`]: quantifier-free sets in `Z^s`, cell normalization, and
//!   exact parametric summation of exponential-polynomial integrands, plus
//!   the mean-value-at-infinity operator.
//! - [`residue`]: classes of binomial varieties over the residue field,
//!   Smith-normal-form canonicalization, root-of-unity symbols, and
//!   brute-force counting over small finite fields.
//! - [`geometry`]: the computable fragment of definable sets (monomial
//!   cells), sphere/ball measures, deformations, tangent cones, cones with
//!   multiplicities, and cone stabilization.
//! - [`density`]: the local-density pipeline (normalized sphere sequence,
//!   mean value, finite cone-density formula, main equality check).
//! - [`padic`]: specialization `L -> q` of all symbolic outputs and an
//!   exhaustive p-adic counting oracle over `Z/p^k`.
//! - [`dsl`]: the textual set-description language and CLI entry points.

pub mod density;
pub mod dsl;
pub mod geometry;
pub mod lring;
pub mod padic;
pub mod presburger;
pub mod residue;
pub mod zlattice;

pub use lring::LElement;
