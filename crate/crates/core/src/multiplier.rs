//! Smooth pointwise multipliers `φ = ψ(·/λ)` and the λ-uniform bound
//! `‖φf‖ ≤ c‖f‖` for `f` supported in `B_λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::norms::{default_order, quasi_norm, Family, NormVariant, SmoothnessParams};

/// Mother bump `ψ` of a multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mother {
    /// Radially monotone, `ψ = 1` on `B_1`, `ψ = 0` outside `B_2`.
    Plateau,
    /// The plateau bump times `1 + ½cos(πx₁)`, not constant on `B_1`.
    Modulated,
}

fn transition(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Plateau profile of the radius: `1` on `[0, 1]`, `0` on `[2, ∞)`.
pub fn plateau(radius: f64) -> f64 {
    if radius <= 1.0 {
        1.0
    } else if radius >= 2.0 {
        0.0
    } else {
        let a = transition(2.0 - radius);
        a / (a + transition(radius - 1.0))
    }
}

impl Mother {
    pub fn value(self, x: &[f64]) -> f64 {
        let radius = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let base = plateau(radius);
        match self {
            Mother::Plateau => base,
            Mother::Modulated => base * (1.0 + 0.5 * (std::f64::consts::PI * x[0]).cos()),
        }
    }

    /// `max_{k ≤ order} sup |ψ^{(k)}|` along the first axis, from finite
    /// differences on a fine lattice, with 25% headroom.
    pub fn derivative_constant(self, order: usize) -> f64 {
        let level = 12;
        let psi = GridFunction::from_fn(1, level, 2.0, 2.0, |x| self.value(x))
            .expect("the reference lattice is valid");
        let values = psi.values();
        let h = psi.spacing();
        (0..=order)
            .map(|k| max_axis_difference(values, &[values.len()], 0, k) / h.powi(k as i32))
            .fold(0.0_f64, f64::max)
            * 1.25
    }
}

/// `max |Δ^k_{δe_axis} v|` over a row-major array of the given shape.
fn max_axis_difference(values: &[f64], shape: &[usize], axis: usize, k: usize) -> f64 {
    if k == 0 {
        return values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    let stride: usize = shape[axis + 1..].iter().product();
    let mut current = values.to_vec();
    let mut valid = shape[axis];
    for _ in 0..k {
        valid -= 1;
        let mut next = vec![0.0; current.len()];
        for (i, slot) in next.iter_mut().enumerate() {
            let pos = (i / stride) % shape[axis];
            if pos < valid {
                *slot = current[i + stride] - current[i];
            }
        }
        current = next;
    }
    current.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Multiplier `φ = ψ(·/λ)`, `λ = 2^{-m}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub m: u32,
    /// Bound constant in `|D^γ φ| ≤ a·λ^{-|γ|}`.
    pub a: f64,
    /// Highest controlled derivative order.
    pub order: usize,
    pub mother: Mother,
}

impl MultiplierSpec {
    /// Spec controlling `1 + ⌊s⌋` derivatives with the constant of the mother.
    pub fn new(m: u32, s: f64, mother: Mother) -> Self {
        let order = default_order(s);
        MultiplierSpec {
            m,
            a: mother.derivative_constant(order),
            order,
            mother,
        }
    }

    pub fn lambda(&self) -> f64 {
        (-(self.m as f64)).exp2()
    }
}

/// Samples `ψ(x/λ)` on the lattice `(dim, level, extent)`; the support is
/// `B_{2λ}`, cut at the extent.
pub fn make_multiplier(spec: &MultiplierSpec, dim: usize, level: u32, extent: f64) -> Result<GridFunction> {
    let lambda = spec.lambda();
    if spec.m + 2 > level {
        return Err(Error::Resolution(format!(
            "level {level} resolves λ = {lambda} with fewer than 4 points"
        )));
    }
    let support = (2.0 * lambda).min(extent);
    GridFunction::from_fn(dim, level, extent, support, |p| {
        let mut x = [0.0; 2];
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi = pi / lambda;
        }
        spec.mother.value(&x[..dim])
    })
}

/// Largest scaled axis difference `λ^k max|Δ^k_{δe_i} φ| / δ^k` for every
/// `k = 1..=order`.
pub fn derivative_profile(phi: &GridFunction, spec: &MultiplierSpec) -> Vec<f64> {
    let side = 2 * phi.half_width() as usize + 1;
    let shape = vec![side; phi.dim()];
    let lambda = spec.lambda();
    (1..=spec.order)
        .map(|k| {
            (0..phi.dim())
                .map(|axis| max_axis_difference(phi.values(), &shape, axis, k))
                .fold(0.0_f64, f64::max)
                * (lambda / phi.spacing()).powi(k as i32)
        })
        .collect()
}

/// Whether every entry of [`derivative_profile`] is at most `a(1 + tol)`.
pub fn satisfies_derivative_bounds(phi: &GridFunction, spec: &MultiplierSpec, tol: f64) -> bool {
    derivative_profile(phi, spec)
        .iter()
        .all(|&d| d <= spec.a * (1.0 + tol))
}

/// Pointwise product on a common lattice.
pub fn multiply(f: &GridFunction, phi: &GridFunction) -> Result<GridFunction> {
    f.ensure_same_lattice(phi)?;
    let values = f.values().iter().zip(phi.values()).map(|(a, b)| a * b).collect();
    Ok(GridFunction::from_parts(
        f.dim(),
        f.level(),
        f.half_width(),
        f.support_radius().min(phi.support_radius()),
        values,
    ))
}

/// Largest `n(1/min(p,q) - 1/p)` below which the F-family bound is not
/// asserted.
pub fn f_family_threshold(params: &SmoothnessParams, dim: usize) -> f64 {
    dim as f64 * (params.p.min(params.q).reciprocal() - params.p.reciprocal())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierOutcome {
    pub lambda: f64,
    pub max_ratio: f64,
    /// `‖φf‖/‖f‖` per corpus member, `None` for `f = 0`.
    pub ratios: Vec<Option<f64>>,
}

/// `max ‖φf‖/‖f‖` over the nonzero members of a corpus supported in `B_λ`,
/// with inhomogeneous `(0, 1]` norms.
pub fn multiplier_bound_experiment(
    corpus: &[GridFunction],
    spec: &MultiplierSpec,
    params: &SmoothnessParams,
    override_restriction: bool,
) -> Result<MultiplierOutcome> {
    let lambda = spec.lambda();
    if let Some(i) = corpus.iter().position(|f| f.support_radius() > lambda) {
        return Err(Error::Domain(format!(
            "corpus member {i} has support radius {} > λ = {lambda}",
            corpus[i].support_radius()
        )));
    }
    if params.family == Family::F && !override_restriction {
        if let Some(f) = corpus.first() {
            let threshold = f_family_threshold(params, f.dim());
            if params.s <= threshold {
                return Err(Error::Usage(format!(
                    "the F-family bound needs s > n(1/min(p,q) - 1/p) = {threshold}, got s = {}",
                    params.s
                )));
            }
        }
    }
    let ratios: Vec<Result<Option<f64>>> = corpus
        .par_iter()
        .map(|f| {
            let below = quasi_norm(f, params, NormVariant::Inhomogeneous01)?.total;
            if below == 0.0 {
                return Ok(None);
            }
            let phi = make_multiplier(spec, f.dim(), f.level(), f.extent())?;
            let above = quasi_norm(&multiply(f, &phi)?, params, NormVariant::Inhomogeneous01)?.total;
            Ok(Some(above / below))
        })
        .collect();
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = ratios.iter().flatten().fold(0.0_f64, |m, &r| m.max(r));
    Ok(MultiplierOutcome {
        lambda,
        max_ratio,
        ratios,
    })
}
