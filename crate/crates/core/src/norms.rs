//! Besov (B) and Triebel-Lizorkin (F) quasi-norms defined via differences.
//!
//! The integral `∫ t^{-sq} (·)^q dt/t` is evaluated on the dyadic radii
//! `t_k = 2^{-k}` with weight `ln 2` per step. The finest scale is the grid
//! spacing (`k ≤ level`). For the `(0, ∞)` variants the coarsest explicit
//! scale is `2^{K}`, the first dyadic radius `≥ 2·extent`. Beyond it the
//! modulus of a supported function is constant, and the remaining geometric
//! series is added in closed form for the B family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::aggregate::weighted_lq;
use crate::error::{Error, Result};
use crate::grid::{finish_lp, lp_norm, GridFunction, LpExponent};
use crate::smoothness::{steps_sq_within, BallMeanTable, ModulusTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    B,
    F,
}

/// Smoothness parameters `(s, p, q, r)` of one quasi-norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SmoothnessParams {
    pub s: f64,
    pub p: LpExponent,
    pub q: LpExponent,
    pub r: usize,
    pub family: Family,
}

#[derive(Deserialize)]
struct RawParams {
    s: f64,
    p: LpExponent,
    q: LpExponent,
    r: Option<usize>,
    family: Family,
}

impl TryFrom<RawParams> for SmoothnessParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let r = raw.r.unwrap_or_else(|| default_order(raw.s));
        SmoothnessParams::new(raw.family, raw.s, raw.p, raw.q, r)
    }
}

/// Smallest admissible difference order `⌊s⌋ + 1`.
pub fn default_order(s: f64) -> usize {
    s.max(0.0).floor() as usize + 1
}

impl SmoothnessParams {
    pub fn new(family: Family, s: f64, p: LpExponent, q: LpExponent, r: usize) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Usage(format!("smoothness s must be positive, got {s}")));
        }
        if (r as f64) <= s {
            return Err(Error::Usage(format!("difference order r = {r} must exceed s = {s}")));
        }
        if family == Family::F && p.is_infinite() {
            return Err(Error::Usage("the F family requires p < ∞".into()));
        }
        Ok(SmoothnessParams { s, p, q, r, family })
    }

    pub fn besov(s: f64, p: LpExponent, q: LpExponent) -> Result<Self> {
        Self::new(Family::B, s, p, q, default_order(s))
    }

    pub fn triebel_lizorkin(s: f64, p: LpExponent, q: LpExponent) -> Result<Self> {
        Self::new(Family::F, s, p, q, default_order(s))
    }

    pub fn with_q(self, q: LpExponent) -> Self {
        SmoothnessParams { q, ..self }
    }

    pub fn with_order(self, r: usize) -> Result<Self> {
        Self::new(self.family, self.s, self.p, self.q, r)
    }
}

/// Which form of the quasi-norm to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormVariant {
    /// `‖f|L_p‖` plus the seminorm over `t ∈ (0, 1]`.
    #[serde(rename = "inhomogeneous_01")]
    Inhomogeneous01,
    /// `‖f|L_p‖` plus the seminorm over `t ∈ (0, ∞)`.
    #[serde(rename = "inhomogeneous_0inf")]
    Inhomogeneous0inf,
    /// The seminorm over `t ∈ (0, ∞)` alone, equivalent on functions with
    /// bounded support.
    #[serde(rename = "homogeneous_0inf")]
    Homogeneous0inf,
}

impl NormVariant {
    fn is_inhomogeneous(self) -> bool {
        !matches!(self, NormVariant::Homogeneous0inf)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleContribution {
    pub t: f64,
    /// `2^{ks}·ω_r(f, t_k)_p` for B, `‖2^{ks}·d^r_{t_k,p} f | L_p‖` for F.
    pub contribution: f64,
}

/// A quasi-norm split into its L_p and seminorm parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiNormReport {
    pub variant: NormVariant,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lp_part: Option<f64>,
    pub seminorm_part: f64,
    /// Per-scale terms in ascending `t`.
    pub scales: Vec<ScaleContribution>,
    /// Closed-form contribution of the scales above the last explicit one
    /// (`q`-th power, already included in `seminorm_part`).
    #[serde(default)]
    pub tail: f64,
}

/// Dyadic exponents `k` with `t_k = 2^{-k}`, ascending in `k`.
fn scale_range(f: &GridFunction, variant: NormVariant) -> (i32, i32) {
    let finest = f.level() as i32;
    let coarsest = match variant {
        NormVariant::Inhomogeneous01 => 0,
        NormVariant::Inhomogeneous0inf | NormVariant::Homogeneous0inf => -coarse_exponent(f.extent()),
    };
    (coarsest, finest)
}

/// Smallest integer `K` with `2^K ≥ 2·extent`.
pub(crate) fn coarse_exponent(extent: f64) -> i32 {
    let mut k = (2.0 * extent).log2().ceil() as i32;
    while (k as f64).exp2() < 2.0 * extent {
        k += 1;
    }
    while ((k - 1) as f64).exp2() >= 2.0 * extent {
        k -= 1;
    }
    k
}

fn check_family(params: &SmoothnessParams, family: Family) -> Result<()> {
    if params.family != family {
        return Err(Error::Usage(format!(
            "expected {family:?}-family parameters, got {:?}",
            params.family
        )));
    }
    Ok(())
}

fn assemble(
    f: &GridFunction,
    params: &SmoothnessParams,
    variant: NormVariant,
    seminorm_part: f64,
    scales: Vec<ScaleContribution>,
    tail: f64,
) -> QuasiNormReport {
    let lp_part = variant.is_inhomogeneous().then(|| lp_norm(f, params.p));
    QuasiNormReport {
        variant,
        total: lp_part.unwrap_or(0.0) + seminorm_part,
        lp_part,
        seminorm_part,
        scales,
        tail,
    }
}

/// Besov quasi-norm built from the modulus of smoothness.
pub fn besov_norm(
    f: &GridFunction,
    params: &SmoothnessParams,
    variant: NormVariant,
) -> Result<QuasiNormReport> {
    check_family(params, Family::B)?;
    let (k_lo, k_hi) = scale_range(f, variant);
    let table = ModulusTable::new(f, params.p, params.r, (-(k_lo as f64)).exp2());
    let s = params.s;

    let mut terms: Vec<(f64, f64)> = Vec::new();
    let mut scales = Vec::new();
    for k in (k_lo..=k_hi).rev() {
        let t = (-(k as f64)).exp2();
        let weighted = (k as f64 * s).exp2() * table.at(t);
        terms.push((weighted, LN_2));
        scales.push(ScaleContribution { t, contribution: weighted });
    }

    let mut tail = 0.0;
    if variant != NormVariant::Inhomogeneous01 {
        if let LpExponent::Finite(q) = params.q {
            // Σ_{k < k_lo} (2^{ks} ω_max)^q ln 2, with ω constant on those scales.
            let omega_max = table.at((-(k_lo as f64)).exp2());
            let base = ((k_lo - 1) as f64 * s).exp2() * omega_max;
            let weight = LN_2 / (1.0 - (-s * q).exp2());
            tail = weight * base.powf(q);
            terms.push((base, weight));
        }
    }
    let seminorm = weighted_lq(&terms, params.q);
    Ok(assemble(f, params, variant, seminorm, scales, tail))
}

/// Triebel-Lizorkin quasi-norm built from ball means.
pub fn tl_norm(
    f: &GridFunction,
    params: &SmoothnessParams,
    variant: NormVariant,
) -> Result<QuasiNormReport> {
    check_family(params, Family::F)?;
    let LpExponent::Finite(_) = params.p else {
        return Err(Error::Usage("the F family requires p < ∞".into()));
    };
    let (k_lo, k_hi) = scale_range(f, variant);
    let spacing = f.spacing();
    let ks: Vec<i32> = (k_lo..=k_hi).rev().collect();
    let limits: Vec<i64> = ks
        .iter()
        .map(|&k| steps_sq_within((-(k as f64)).exp2(), spacing))
        .collect();
    let table = BallMeanTable::new(f, params.p, params.r, &limits);
    let weights: Vec<f64> = ks.iter().map(|&k| (k as f64 * params.s).exp2()).collect();

    let pointwise: Vec<f64> = table
        .means
        .par_iter()
        .map(|row| {
            let terms: Vec<(f64, f64)> = row
                .iter()
                .zip(&weights)
                .map(|(&d, &w)| (w * d, LN_2))
                .collect();
            weighted_lq(&terms, params.q)
        })
        .collect();
    let dim = f.dim();
    let seminorm = finish_lp(
        crate::grid::power_sum(&pointwise, params.p),
        spacing,
        dim,
        params.p,
    );

    let scales = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let column: Vec<f64> = table.means.iter().map(|row| weights[i] * row[i]).collect();
            ScaleContribution {
                t: (-(k as f64)).exp2(),
                contribution: finish_lp(crate::grid::power_sum(&column, params.p), spacing, dim, params.p),
            }
        })
        .collect();
    Ok(assemble(f, params, variant, seminorm, scales, 0.0))
}

/// Dispatches to [`besov_norm`] or [`tl_norm`] by family.
pub fn quasi_norm(
    f: &GridFunction,
    params: &SmoothnessParams,
    variant: NormVariant,
) -> Result<QuasiNormReport> {
    match params.family {
        Family::B => besov_norm(f, params, variant),
        Family::F => tl_norm(f, params, variant),
    }
}

/// Smoothness gap `s₁ - s₂ - n(1/p₁ - 1/p₂)₊` of an embedding.
pub fn embedding_gap(src: &SmoothnessParams, dst: &SmoothnessParams, dim: usize) -> f64 {
    let integrability = (src.p.reciprocal() - dst.p.reciprocal()).max(0.0);
    src.s - dst.s - dim as f64 * integrability
}

/// Largest ratio `‖f|dst‖ / ‖f|src‖` over a corpus sharing one support ball.
pub fn embedding_probe(
    corpus: &[GridFunction],
    src: &SmoothnessParams,
    dst: &SmoothnessParams,
) -> Result<f64> {
    let first = corpus
        .first()
        .ok_or_else(|| Error::Usage("embedding probe needs a nonempty corpus".into()))?;
    let gap = embedding_gap(src, dst, first.dim());
    if gap <= 0.0 {
        return Err(Error::Usage(format!(
            "no embedding: s₁ - s₂ - n(1/p₁ - 1/p₂)₊ = {gap} ≤ 0"
        )));
    }
    if corpus
        .iter()
        .any(|f| f.dim() != first.dim() || f.support_radius() != first.support_radius())
    {
        return Err(Error::Domain(
            "corpus members must share dimension and support radius".into(),
        ));
    }
    let mut worst = 0.0_f64;
    for f in corpus {
        let upper = quasi_norm(f, src, NormVariant::Inhomogeneous01)?.total;
        if upper == 0.0 {
            continue;
        }
        let lower = quasi_norm(f, dst, NormVariant::Inhomogeneous01)?.total;
        worst = worst.max(lower / upper);
    }
    Ok(worst)
}

/// Totals of the inhomogeneous `(0, 1]` norm and of the homogeneous
/// `(0, ∞)` seminorm of `f`.
pub fn equivalence_probe(f: &GridFunction, params: &SmoothnessParams) -> Result<(f64, f64)> {
    let full = quasi_norm(f, params, NormVariant::Inhomogeneous01)?.total;
    let homogeneous = quasi_norm(f, params, NormVariant::Homogeneous0inf)?.total;
    Ok((full, homogeneous))
}
