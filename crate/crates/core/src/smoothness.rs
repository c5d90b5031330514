//! Iterated differences, moduli of smoothness and ball means.
//!
//! Shifts are lattice multiples `h·δ`, so every difference is an exact read
//! of stored samples (zero outside the window). The supremum over `|h| ≤ t`
//! becomes a maximum over the finite lattice ball, and the ball-mean integral
//! `t^{-n}∫_{|h|≤t} dh` becomes an average over the lattice ball including
//! `h = 0`. Below one grid spacing no nonzero shift exists; that is the
//! resolution floor of the whole crate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_sq, power_sum, finish_lp, GridFunction, Lattice, LpExponent, Site};

/// A lattice shift `h`, measured in grid steps. Its physical length is
/// `|h|·δ` for the grid it is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeShift {
    dim: usize,
    steps: Site,
}

impl LatticeShift {
    pub fn new(steps: &[i64]) -> Result<Self> {
        match *steps {
            [a] => Ok(LatticeShift { dim: 1, steps: [a, 0] }),
            [a, b] => Ok(LatticeShift { dim: 2, steps: [a, b] }),
            _ => Err(Error::Usage(format!(
                "shift must have 1 or 2 components, got {}",
                steps.len()
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps[..self.dim]
    }

    /// Physical length `|h|·δ` on a lattice of the given spacing.
    pub fn length(&self, spacing: f64) -> f64 {
        (norm_sq(self.steps) as f64).sqrt() * spacing
    }

    pub(crate) fn site(&self) -> Site {
        self.steps
    }
}

/// Coefficients `c_j = (-1)^{r-j} C(r, j)`, `j = 0..=r`, of `Δ_h^r`.
pub(crate) fn difference_coefficients(r: usize) -> Vec<f64> {
    let mut binom = vec![1.0_f64; r + 1];
    for j in 1..=r {
        binom[j] = binom[j - 1] * (r + 1 - j) as f64 / j as f64;
    }
    binom
        .iter()
        .enumerate()
        .map(|(j, &c)| if (r - j).is_multiple_of(2) { c } else { -c })
        .collect()
}

#[inline]
fn difference_at(f: &GridFunction, x: Site, h: Site, coeffs: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut y = x;
    for &c in coeffs {
        acc += c * f.at(y);
        y[0] += h[0];
        y[1] += h[1];
    }
    acc
}

fn check_order(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::Usage("difference order r must be at least 1".into()));
    }
    Ok(())
}

fn check_shift(f: &GridFunction, h: &LatticeShift) -> Result<()> {
    if h.dim != f.dim() {
        return Err(Error::Usage(format!(
            "{}-d shift applied to a {}-d function",
            h.dim,
            f.dim()
        )));
    }
    if h.length(f.spacing()) > 2.0 * f.extent() {
        return Err(Error::Domain(format!(
            "shift length {} exceeds twice the extent {}",
            h.length(f.spacing()),
            f.extent()
        )));
    }
    Ok(())
}

/// Output window for a quantity that is nonzero only within `reach` of the
/// support of `f`: `(half width, support radius)`.
fn widened(f: &GridFunction, reach: f64) -> (i64, f64) {
    let radius = f.support_radius() + reach;
    let half = ((radius / f.spacing()).ceil() as i64).max(f.half_width());
    (half, radius)
}

/// Largest squared step length `|h|²` with `|h|·δ ≤ t`.
pub(crate) fn steps_sq_within(t: f64, spacing: f64) -> i64 {
    let u = t / spacing;
    let sq = u * u;
    (sq + 1e-9 * sq.max(1.0)).floor().min(1e15) as i64
}

/// `Δ_h^r f` by repeated first differences, `Δ^{r+1} = Δ¹(Δ^r)`.
///
/// The result lives on a window widened so that it holds the whole support
/// `B_{R + r|h|δ}` of the difference; its declared support radius is that
/// enlarged radius.
pub fn iterated_difference(f: &GridFunction, h: &LatticeShift, r: usize) -> Result<GridFunction> {
    check_order(r)?;
    check_shift(f, h)?;
    let (half, radius) = widened(f, r as f64 * h.length(f.spacing()));
    let lattice = Lattice { dim: f.dim(), half };
    let mut current: Vec<f64> = (0..lattice.len()).map(|i| f.at(lattice.site(i))).collect();
    let shift = h.site();
    for _ in 0..r {
        let next: Vec<f64> = (0..lattice.len())
            .map(|i| {
                let x = lattice.site(i);
                let ahead = lattice
                    .flat([x[0] + shift[0], x[1] + shift[1]])
                    .map_or(0.0, |j| current[j]);
                ahead - current[i]
            })
            .collect();
        current = next;
    }
    Ok(GridFunction::from_parts(f.dim(), f.level(), half, radius, current))
}

/// `Δ_h^r f` from the closed binomial sum `Σ_j (-1)^{r-j} C(r,j) f(x + jh)`,
/// on the same window as [`iterated_difference`].
pub fn binomial_difference(f: &GridFunction, h: &LatticeShift, r: usize) -> Result<GridFunction> {
    check_order(r)?;
    check_shift(f, h)?;
    let (half, radius) = widened(f, r as f64 * h.length(f.spacing()));
    let lattice = Lattice { dim: f.dim(), half };
    let coeffs = difference_coefficients(r);
    let values = (0..lattice.len())
        .map(|i| difference_at(f, lattice.site(i), h.site(), &coeffs))
        .collect();
    Ok(GridFunction::from_parts(f.dim(), f.level(), half, radius, values))
}

/// Power sums `Σ_x |Δ_h^r f(x)|^p` over the whole lattice `δℤⁿ`.
pub(crate) struct DifferenceNorms<'a> {
    f: &'a GridFunction,
    coeffs: Vec<f64>,
    p: LpExponent,
    support_half: i64,
    /// `|h|²` (in steps) from which the translates `f(· + jh)` are disjoint.
    disjoint_sq: f64,
    disjoint_sum: f64,
}

impl<'a> DifferenceNorms<'a> {
    pub fn new(f: &'a GridFunction, r: usize, p: LpExponent) -> Self {
        let coeffs = difference_coefficients(r);
        let base = power_sum(f.values(), p);
        let disjoint_sum = match p {
            LpExponent::Infinity => coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs())) * base,
            LpExponent::Finite(q) => coeffs.iter().map(|c| c.abs().powf(q)).sum::<f64>() * base,
        };
        let ratio = 2.0 * f.support_radius() / f.spacing();
        DifferenceNorms {
            f,
            coeffs,
            p,
            support_half: f.support_half(),
            disjoint_sq: ratio * ratio,
            disjoint_sum,
        }
    }

    /// Squared step length beyond which every shift gives the same sum.
    pub fn saturation_steps_sq(&self) -> i64 {
        let steps = self.disjoint_sq.sqrt().ceil() as i64;
        (steps + 1) * (steps + 1)
    }

    pub fn power_sum(&self, h: Site) -> f64 {
        if norm_sq(h) as f64 >= self.disjoint_sq {
            return self.disjoint_sum;
        }
        let r = (self.coeffs.len() - 1) as i64;
        let s = self.support_half;
        let dim = self.f.dim();
        let range = |a: usize| -> (i64, i64) {
            if a >= dim {
                (0, 0)
            } else {
                (-s - r * h[a].max(0), s - r * h[a].min(0))
            }
        };
        let (lo0, hi0) = range(0);
        let (lo1, hi1) = range(1);
        let mut acc = 0.0_f64;
        for x0 in lo0..=hi0 {
            for x1 in lo1..=hi1 {
                let v = difference_at(self.f, [x0, x1], h, &self.coeffs).abs();
                match self.p {
                    LpExponent::Infinity => acc = acc.max(v),
                    LpExponent::Finite(q) => acc += v.powf(q),
                }
            }
        }
        acc
    }

    pub fn norm(&self, h: Site) -> f64 {
        finish_lp(self.power_sum(h), self.f.spacing(), self.f.dim(), self.p)
    }
}

/// Nonzero shifts of the half space (first nonzero component positive) with
/// `|h|² ≤ limit`, ordered by length then lexicographically.
pub(crate) fn half_ball_shifts(dim: usize, limit: i64) -> Vec<(i64, Site)> {
    let reach = (limit.max(0) as f64).sqrt().floor() as i64;
    let mut shifts = Vec::new();
    if dim == 1 {
        shifts.extend((1..=reach).map(|a| (a * a, [a, 0])));
    } else {
        for a in 0..=reach {
            for b in -reach..=reach {
                let sq = a * a + b * b;
                if (a > 0 || b > 0) && sq <= limit {
                    shifts.push((sq, [a, b]));
                }
            }
        }
    }
    shifts.sort_unstable();
    shifts
}

/// All shifts with `|h|² ≤ limit`, including `h = 0`, in the same order.
pub(crate) fn ball_shifts(dim: usize, limit: i64) -> Vec<(i64, Site)> {
    let reach = (limit.max(0) as f64).sqrt().floor() as i64;
    let mut shifts = Vec::new();
    if dim == 1 {
        shifts.extend((-reach..=reach).map(|a| (a * a, [a, 0])));
    } else {
        for a in -reach..=reach {
            for b in -reach..=reach {
                let sq = a * a + b * b;
                if sq <= limit {
                    shifts.push((sq, [a, b]));
                }
            }
        }
    }
    shifts.sort_unstable();
    shifts
}

/// `‖Δ_h^r f | L_p‖` for every lattice shift up to a radius, with running
/// maxima so that `ω_r(f, t)_p` is a lookup.
pub(crate) struct ModulusTable {
    spacing: f64,
    limit: i64,
    radii_sq: Vec<i64>,
    running_max: Vec<f64>,
}

impl ModulusTable {
    /// Table valid for all `t ≤ t_max`.
    pub fn new(f: &GridFunction, p: LpExponent, r: usize, t_max: f64) -> Self {
        let spacing = f.spacing();
        let limit = steps_sq_within(t_max, spacing);
        let kernel = DifferenceNorms::new(f, r, p);
        // All shifts longer than the support diameter share one value, which the
        // truncated enumeration already contains.
        let enumerated = limit.min(kernel.saturation_steps_sq());
        let shifts = half_ball_shifts(f.dim(), enumerated);
        let norms: Vec<f64> = shifts.par_iter().map(|&(_, h)| kernel.norm(h)).collect();
        let mut radii_sq: Vec<i64> = Vec::new();
        let mut running_max: Vec<f64> = Vec::new();
        let mut best = 0.0_f64;
        for (&(sq, _), &v) in shifts.iter().zip(&norms) {
            best = best.max(v);
            if radii_sq.last() == Some(&sq) {
                *running_max.last_mut().unwrap() = best;
            } else {
                radii_sq.push(sq);
                running_max.push(best);
            }
        }
        ModulusTable {
            spacing,
            limit,
            radii_sq,
            running_max,
        }
    }

    /// `ω_r(f, t)_p`; zero below the resolution floor.
    pub fn at(&self, t: f64) -> f64 {
        let limit = steps_sq_within(t, self.spacing);
        debug_assert!(limit <= self.limit, "modulus table queried beyond its range");
        match self.radii_sq.partition_point(|&sq| sq <= limit) {
            0 => 0.0,
            n => self.running_max[n - 1],
        }
    }
}

/// Value of `ω_r(f, t)_p` together with the resolution flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusValue {
    pub value: f64,
    /// `t < δ`: no nonzero lattice shift fits and the value is `0`.
    pub below_resolution: bool,
}

fn check_scale(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Usage(format!("scale t must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `ω_r(f, t)_p = max_{0 < |hδ| ≤ t} ‖Δ_h^r f | L_p‖`.
pub fn modulus(f: &GridFunction, t: f64, p: LpExponent, r: usize) -> Result<ModulusValue> {
    check_order(r)?;
    check_scale(t)?;
    if t < f.spacing() {
        return Ok(ModulusValue {
            value: 0.0,
            below_resolution: true,
        });
    }
    let table = ModulusTable::new(f, p, r, t);
    Ok(ModulusValue {
        value: table.at(t),
        below_resolution: false,
    })
}

/// Samples of `t ↦ ω_r(f, t)_p` at dyadic radii, ascending in `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// `ω_r(f, 2^{-k})_p` for `k = k_min..=k_max`.
pub fn modulus_curve(
    f: &GridFunction,
    p: LpExponent,
    r: usize,
    k_min: i32,
    k_max: i32,
) -> Result<ModulusCurve> {
    check_order(r)?;
    if k_min > k_max {
        return Err(Error::Usage(format!("empty scale range {k_min}..={k_max}")));
    }
    if (-(k_max as f64)).exp2() < f.spacing() {
        return Err(Error::Resolution(format!(
            "2^-{k_max} is below the spacing 2^-{}",
            f.level()
        )));
    }
    let table = ModulusTable::new(f, p, r, (-(k_min as f64)).exp2());
    let radii: Vec<f64> = (k_min..=k_max).rev().map(|k| (-(k as f64)).exp2()).collect();
    let values = radii.iter().map(|&t| table.at(t)).collect();
    Ok(ModulusCurve { radii, values })
}

/// Ball means `d^r_{t,p} f(x) = ((1/N_t) Σ_{|hδ| ≤ t} |Δ_h^r f(x)|^p)^{1/p}`,
/// with `N_t` the number of lattice shifts in the closed ball, `h = 0`
/// included.
///
/// The result is returned on a window widened to hold its whole support
/// `B_{R + r t}`.
pub fn ball_means(f: &GridFunction, t: f64, p: LpExponent, r: usize) -> Result<GridFunction> {
    check_order(r)?;
    check_scale(t)?;
    let LpExponent::Finite(_) = p else {
        return Err(Error::Usage("ball means are defined for p < ∞ only".into()));
    };
    if t < f.spacing() {
        return Err(Error::Resolution(format!(
            "scale {t} is below the spacing {}",
            f.spacing()
        )));
    }
    let limit = steps_sq_within(t, f.spacing());
    let table = BallMeanTable::new(f, p, r, &[limit]);
    let values = table.means.iter().map(|row| row[0]).collect();
    Ok(GridFunction::from_parts(
        f.dim(),
        f.level(),
        table.lattice.half,
        table.support_radius,
        values,
    ))
}

/// Ball means of `f` at several radii at once, evaluated at every point of a
/// window that holds the support of the widest one.
pub(crate) struct BallMeanTable {
    pub lattice: Lattice,
    pub support_radius: f64,
    /// `means[x][i]` is the ball mean at the `i`-th requested radius.
    pub means: Vec<Vec<f64>>,
}

impl BallMeanTable {
    /// `limits` are squared step radii in ascending order.
    pub fn new(f: &GridFunction, p: LpExponent, r: usize, limits: &[i64]) -> Self {
        debug_assert!(limits.windows(2).all(|w| w[0] <= w[1]));
        let q = match p {
            LpExponent::Finite(q) => q,
            LpExponent::Infinity => unreachable!("ball means need p < ∞"),
        };
        let widest = *limits.last().expect("at least one radius");
        let shifts = ball_shifts(f.dim(), widest);
        let reach = (widest as f64).sqrt() * f.spacing();
        let (half, support_radius) = widened(f, r as f64 * reach);
        let lattice = Lattice { dim: f.dim(), half };
        let coeffs = difference_coefficients(r);
        let means = (0..lattice.len())
            .into_par_iter()
            .map(|i| {
                let x = lattice.site(i);
                let mut row = Vec::with_capacity(limits.len());
                let mut sum = 0.0_f64;
                let mut count = 0usize;
                let mut next = 0usize;
                for &(sq, h) in &shifts {
                    while next < limits.len() && sq > limits[next] {
                        row.push((sum / count as f64).powf(1.0 / q));
                        next += 1;
                    }
                    sum += difference_at(f, x, h, &coeffs).abs().powf(q);
                    count += 1;
                }
                while row.len() < limits.len() {
                    row.push((sum / count as f64).powf(1.0 / q));
                }
                row
            })
            .collect();
        BallMeanTable {
            lattice,
            support_radius,
            means,
        }
    }
}
