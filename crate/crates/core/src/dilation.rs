//! Exact dyadic dilation `f ↦ f(λ·)`, `λ = 2^{-m}`, and the homogeneity
//! experiment `‖f(λ·)‖ ∼ λ^{s - n/p} ‖f‖`.
//!
//! On nested dyadic lattices the dilation is a relabelling: the sample stored
//! at lattice index `i` stays put while the spacing grows from `δ` to
//! `2^m δ`. No arithmetic touches the sample values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, LpExponent};
use crate::norms::{quasi_norm, NormVariant, SmoothnessParams};
use crate::smoothness::{ball_means, iterated_difference, modulus, LatticeShift};

/// Dilation exponent `m` of `λ = 2^{-m} ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DilationExponent(pub u32);

impl DilationExponent {
    pub fn lambda(self) -> f64 {
        (-(self.0 as f64)).exp2()
    }
}

/// `g(x) = f(2^{-m} x)` on the lattice of level `f.level - m`.
pub fn dilate(f: &GridFunction, m: u32) -> Result<GridFunction> {
    if f.level() < m {
        return Err(Error::Resolution(format!(
            "level {} is too coarse for a dilation by 2^-{m}",
            f.level()
        )));
    }
    let lambda = DilationExponent(m).lambda();
    if f.support_radius() > lambda {
        return Err(Error::Domain(format!(
            "support radius {} exceeds λ = {lambda}",
            f.support_radius()
        )));
    }
    let stretch = (m as f64).exp2();
    Ok(f.relabelled(
        f.level() - m,
        f.extent() * stretch,
        f.support_radius() * stretch,
    ))
}

/// Least-squares line through log-log data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual, in natural-log units.
    pub max_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_slope: Option<f64>,
    /// `(log x, log y)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

impl FitResult {
    /// Ordinary least squares for `y = intercept + slope·x` on points that
    /// are already logarithmic.
    pub fn from_log_points(points: Vec<(f64, f64)>) -> Result<FitResult> {
        if points.len() < 3 {
            return Err(Error::Experiment(format!(
                "a slope needs at least 3 points, got {}",
                points.len()
            )));
        }
        let n = points.len() as f64;
        let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
        if sxx == 0.0 {
            return Err(Error::Experiment("all abscissae coincide".into()));
        }
        let slope = sxy / sxx;
        let intercept = mean_y - slope * mean_x;
        let max_residual = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).abs())
            .fold(0.0_f64, f64::max);
        Ok(FitResult {
            slope,
            intercept,
            max_residual,
            predicted_slope: None,
            points,
        })
    }

    /// Fits `log y` against `log x`, skipping pairs that are not strictly
    /// positive and finite.
    pub fn power_law(samples: &[(f64, f64)]) -> Result<FitResult> {
        let points = samples
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect();
        Self::from_log_points(points)
    }

    pub fn with_prediction(mut self, predicted: f64) -> Self {
        self.predicted_slope = Some(predicted);
        self
    }
}

/// Outcome of one homogeneity run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityRun {
    pub fit: FitResult,
    pub predicted_slope: f64,
    pub lambdas: Vec<f64>,
    /// Homogeneous `(0, ∞)` quasi-norms of `f0(λ_m ·)`; these are fitted.
    pub norms: Vec<f64>,
    /// Inhomogeneous `(0, 1]` quasi-norms, recorded alongside.
    pub inhomogeneous_norms: Vec<f64>,
}

/// Exponent `s - n/p` of the homogeneity law.
pub fn predicted_homogeneity_slope(params: &SmoothnessParams, dim: usize) -> f64 {
    params.s - dim as f64 * params.p.reciprocal()
}

/// Dilates `f0` by `λ_m = 2^{-m}`, `m = 0..=steps`, and fits
/// `log ‖f0(λ_m ·)‖` against `log λ_m`.
pub fn homogeneity_experiment(
    f0: &GridFunction,
    params: &SmoothnessParams,
    steps: u32,
) -> Result<HomogeneityRun> {
    if steps < 3 {
        return Err(Error::Usage(format!("need at least 3 dilation steps, got {steps}")));
    }
    // validates level and support for the largest dilation up front
    dilate(f0, steps)?;
    let results: Vec<Result<(f64, f64, f64)>> = (0..=steps)
        .into_par_iter()
        .map(|m| {
            let g = dilate(f0, m)?;
            let homogeneous = quasi_norm(&g, params, NormVariant::Homogeneous0inf)?.total;
            let full = quasi_norm(&g, params, NormVariant::Inhomogeneous01)?.total;
            Ok((DilationExponent(m).lambda(), homogeneous, full))
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let samples: Vec<(f64, f64)> = rows.iter().map(|&(l, n, _)| (l, n)).collect();
    let predicted = predicted_homogeneity_slope(params, f0.dim());
    let fit = FitResult::power_law(&samples)?.with_prediction(predicted);
    Ok(HomogeneityRun {
        fit,
        predicted_slope: predicted,
        lambdas: rows.iter().map(|r| r.0).collect(),
        norms: rows.iter().map(|r| r.1).collect(),
        inhomogeneous_norms: rows.iter().map(|r| r.2).collect(),
    })
}

/// Which scaling identity [`scale_commutation_check`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutationKind {
    /// `Δ_h^r(f(λ·))(x) = (Δ^r_{λh} f)(λx)` for the given shift.
    Difference(LatticeShift),
    /// `ω_r(f(λ·), t)_p = λ^{-n/p} ω_r(f, λt)_p`.
    Modulus,
    /// `d^r_{t,p}(f(λ·))(x) = d^r_{λt,p} f(λx)`.
    BallMeans,
}

/// The two sides of a scaling identity, sample by sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationSides {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl CommutationSides {
    /// `max |lhs - rhs| / max(|lhs|, |rhs|)` over all entries, `0` when both
    /// sides vanish.
    pub fn max_relative_gap(&self) -> f64 {
        let scale = self
            .lhs
            .iter()
            .chain(&self.rhs)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.lhs
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max)
            / scale
    }
}

fn aligned(lhs: &GridFunction, rhs: &GridFunction) -> Result<CommutationSides> {
    if lhs.half_width() != rhs.half_width() || lhs.dim() != rhs.dim() {
        return Err(Error::Resolution(
            "the two sides live on incompatible lattices".into(),
        ));
    }
    Ok(CommutationSides {
        lhs: lhs.values().to_vec(),
        rhs: rhs.values().to_vec(),
    })
}

/// Evaluates both sides of a scaling identity for `λ = 2^{-m}`. The
/// dilated side is computed on the dilated lattice; the other side on the
/// lattice of `f`, read at the same indices (physical point `λx`).
pub fn scale_commutation_check(
    f: &GridFunction,
    m: u32,
    t: f64,
    p: LpExponent,
    r: usize,
    kind: CommutationKind,
) -> Result<CommutationSides> {
    let g = dilate(f, m)?;
    let lambda = DilationExponent(m).lambda();
    match kind {
        CommutationKind::Difference(h) => {
            aligned(&iterated_difference(&g, &h, r)?, &iterated_difference(f, &h, r)?)
        }
        CommutationKind::Modulus => {
            let lhs = modulus(&g, t, p, r)?.value;
            let factor = lambda.powf(-(f.dim() as f64) * p.reciprocal());
            let rhs = factor * modulus(f, lambda * t, p, r)?.value;
            Ok(CommutationSides {
                lhs: vec![lhs],
                rhs: vec![rhs],
            })
        }
        CommutationKind::BallMeans => {
            aligned(&ball_means(&g, t, p, r)?, &ball_means(f, lambda * t, p, r)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, make_bump, Profile};

    fn p(v: f64) -> LpExponent {
        LpExponent::new(v).unwrap()
    }

    #[test]
    fn zero_dilation_is_identity() {
        let f = make_bump(1, 6, 1.0, 0.9, Profile::SmoothBump).unwrap();
        assert_eq!(dilate(&f, 0).unwrap(), f);
    }

    #[test]
    fn dilation_scales_lattice_and_support() {
        let f = make_bump(2, 6, 0.25, 0.25, Profile::Hat).unwrap();
        let g = dilate(&f, 2).unwrap();
        assert_eq!(g.level(), 4);
        assert_eq!(g.extent(), 1.0);
        assert_eq!(g.support_radius(), 1.0);
        assert_eq!(g.values(), f.values());
        // g(x) = f(x/4)
        assert_eq!(g.sample(&[8, 0]), f.sample(&[8, 0]));
    }

    #[test]
    fn lp_norm_rescales_exactly() {
        let f = make_bump(1, 8, 0.125, 0.125, Profile::SmoothBump).unwrap();
        for (m, q) in [(1, 1.0), (2, 2.0), (3, 0.5)] {
            let g = dilate(&f, m).unwrap();
            let expected = (m as f64 / q).exp2() * lp_norm(&f, p(q));
            assert!((lp_norm(&g, p(q)) - expected).abs() <= 1e-13 * expected);
        }
        let g = dilate(&f, 3).unwrap();
        assert_eq!(lp_norm(&g, LpExponent::Infinity), lp_norm(&f, LpExponent::Infinity));
    }

    #[test]
    fn dilation_preconditions() {
        let f = make_bump(1, 2, 1.0, 0.5, Profile::Hat).unwrap();
        assert_eq!(dilate(&f, 3).unwrap_err().kind(), "resolution");
        assert_eq!(dilate(&f, 2).unwrap_err().kind(), "domain");
    }

    #[test]
    fn dilations_compose() {
        let f = make_bump(1, 9, 0.125, 0.125, Profile::Hat).unwrap();
        let twice = dilate(&dilate(&f, 1).unwrap(), 2).unwrap();
        assert_eq!(twice, dilate(&f, 3).unwrap());
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let samples: Vec<(f64, f64)> = (0..5)
            .map(|m| {
                let l = (-(m as f64)).exp2();
                (l, 3.0 * l.powf(0.75))
            })
            .collect();
        let fit = FitResult::power_law(&samples).unwrap();
        assert!((fit.slope - 0.75).abs() < 1e-12);
        assert!((fit.intercept - 3.0_f64.ln()).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn fit_needs_three_points() {
        let err = FitResult::power_law(&[(1.0, 1.0), (2.0, 0.0), (4.0, 2.0)]).unwrap_err();
        assert_eq!(err.kind(), "experiment");
    }

    #[test]
    fn hat_commutation_sup_norm() {
        // ω₁(f(½·), ½)_∞ against ω₁(f, ¼)_∞
        let f = make_bump(1, 6, 0.5, 0.5, Profile::Hat).unwrap();
        let sides =
            scale_commutation_check(&f, 1, 0.5, LpExponent::Infinity, 1, CommutationKind::Modulus)
                .unwrap();
        assert_eq!(sides.lhs, sides.rhs);
        // brute force over every shift of the fine lattice up to ¼
        let brute = (1..=16)
            .map(|h| {
                (-80..=80)
                    .map(|x| (f.sample(&[x + h]) - f.sample(&[x])).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        assert_eq!(sides.rhs[0], brute);
    }

    #[test]
    fn zero_dilation_commutes_trivially() {
        let f = make_bump(2, 3, 1.0, 1.0, Profile::SmoothBump).unwrap();
        for kind in [CommutationKind::Modulus, CommutationKind::BallMeans] {
            let sides = scale_commutation_check(&f, 0, 0.5, p(1.0), 2, kind).unwrap();
            assert_eq!(sides.lhs, sides.rhs);
        }
    }

    #[test]
    fn homogeneity_exponent_is_reproduced() {
        let f0 = make_bump(1, 10, 0.0625, 0.0625, Profile::SmoothBump).unwrap();
        let params = SmoothnessParams::besov(1.25, p(2.0), p(2.0)).unwrap();
        let run = homogeneity_experiment(&f0, &params, 4).unwrap();
        assert_eq!(run.predicted_slope, 0.75);
        assert!((run.fit.slope - 0.75).abs() < 1e-9, "{}", run.fit.slope);
        assert!(run.fit.max_residual < 1e-9);
        assert_eq!(run.norms.len(), 5);
    }

    #[test]
    fn homogeneity_rejects_large_support() {
        let f0 = make_bump(1, 10, 0.25, 0.25, Profile::SmoothBump).unwrap();
        let params = SmoothnessParams::besov(0.5, p(2.0), p(2.0)).unwrap();
        assert_eq!(homogeneity_experiment(&f0, &params, 4).unwrap_err().kind(), "domain");
        assert_eq!(homogeneity_experiment(&f0, &params, 2).unwrap_err().kind(), "usage");
    }
}
