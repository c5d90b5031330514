//! Numerical laboratory for the classical difference-based Besov and
//! Triebel-Lizorkin quasi-norms.
//!
//! Functions are sampled on uniform dyadic lattices `δ·ℤⁿ` (`n ∈ {1, 2}`) and
//! are zero outside a ball `B_R`. On such lattices the moduli of smoothness,
//! ball means and dyadic dilations are computed by exact index arithmetic, so
//! scaling identities can be checked to rounding precision and scaling laws
//! can be fitted on log-log axes.
//!
//! Module map:
//!
//! * [`grid`]: sampled functions, L_p quadrature, test profiles.
//! * [`smoothness`]: iterated differences, moduli of smoothness, ball means.
//! * [`norms`]: B and F quasi-norms and the embedding/equivalence probes.
//! * [`dilation`]: exact dyadic dilation and the homogeneity experiment.
//! * [`seqspace`]: weighted mixed-norm sequence spaces and entropy numbers.
//! * [`multiplier`]: smooth pointwise multipliers and the λ-uniform bound.

pub mod corpus;
pub mod dilation;
pub mod error;
pub mod grid;
pub mod multiplier;
pub mod norms;
pub mod seqspace;
pub mod smoothness;

mod aggregate;

pub use dilation::{dilate, homogeneity_experiment, DilationExponent, FitResult, HomogeneityRun};
pub use error::{Error, Result};
pub use grid::{lp_norm, make_bump, GridFunction, LpExponent, Profile};
pub use norms::{
    besov_norm, embedding_probe, equivalence_probe, quasi_norm, tl_norm, Family, NormVariant,
    QuasiNormReport, SmoothnessParams,
};
pub use smoothness::{ball_means, iterated_difference, modulus, modulus_curve, LatticeShift, ModulusCurve};
