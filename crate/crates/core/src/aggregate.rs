use crate::grid::LpExponent;

/// Weighted ℓ_q aggregate `(Σ wᵢ vᵢ^q)^{1/q}` of nonnegative values, or
/// `max vᵢ` when `q = ∞` (weights are ignored there).
///
/// Values are rescaled by their maximum before raising to the power `q`, so
/// very large finite `q` neither overflows nor underflows.
pub(crate) fn weighted_lq(terms: &[(f64, f64)], q: LpExponent) -> f64 {
    let peak = terms.iter().fold(0.0_f64, |acc, &(v, _)| acc.max(v));
    match q {
        LpExponent::Infinity => peak,
        LpExponent::Finite(q) => {
            if peak == 0.0 {
                return 0.0;
            }
            let sum: f64 = terms
                .iter()
                .map(|&(v, w)| w * (v / peak).powf(q))
                .sum();
            peak * sum.powf(1.0 / q)
        }
    }
}

/// Unweighted variant of [`weighted_lq`].
#[cfg(test)]
pub(crate) fn lq(values: &[f64], q: LpExponent) -> f64 {
    let terms: Vec<(f64, f64)> = values.iter().map(|&v| (v, 1.0)).collect();
    weighted_lq(&terms, q)
}
