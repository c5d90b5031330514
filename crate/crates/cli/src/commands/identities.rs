use fslab_core::corpus::random_corpus;
use fslab_core::dilation::{scale_commutation_check, CommutationKind};
use fslab_core::{iterated_difference, make_bump, LatticeShift, LpExponent, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{num, require, Assertion, Outcome, Table};
use crate::error::Result;

fn default_cases() -> usize {
    50
}

fn default_tolerance() -> f64 {
    1e-12
}

fn default_orders() -> Vec<usize> {
    vec![1, 2, 3, 4]
}

fn default_level() -> u32 {
    7
}

/// Exact scaling identities on random dyadic cases, and annihilation of
/// polynomials by high-order differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesConfig {
    #[serde(default = "default_cases")]
    pub cases: usize,
    /// Largest relative gap between the two sides of an identity.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Difference orders for the polynomial check.
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    /// Lattice level of the one-dimensional polynomial profiles.
    #[serde(default = "default_level")]
    pub polynomial_level: u32,
}

/// One random dyadic case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub dim: usize,
    pub level: u32,
    pub m: u32,
    pub radius: f64,
    pub r: usize,
    pub p: LpExponent,
    pub t: f64,
    pub shift: Vec<i64>,
    pub seed: u64,
}

impl Case {
    fn draw(rng: &mut ChaCha8Rng) -> Case {
        let dim = if rng.random_bool(0.7) { 1 } else { 2 };
        let (level, m) = if dim == 1 {
            (rng.random_range(6..=9), rng.random_range(1..=3))
        } else {
            (rng.random_range(4..=6), rng.random_range(1..=2))
        };
        let lambda = (-(m as f64)).exp2();
        let radius = lambda * rng.random_range(0.5..=1.0);
        let ps = [
            LpExponent::Finite(1.0),
            LpExponent::Finite(1.5),
            LpExponent::Finite(2.0),
            LpExponent::Finite(3.0),
            LpExponent::Infinity,
        ];
        let p = ps[rng.random_range(0..ps.len())];
        // t is at least one step of the coarse lattice of the dilated function
        let t = (-((level - m) as f64)).exp2() * (rng.random_range(0..=3) as f64).exp2();
        let mut shift: Vec<i64> = (0..dim).map(|_| rng.random_range(-3..=3)).collect();
        if shift.iter().all(|&h| h == 0) {
            shift[0] = 1;
        }
        Case {
            dim,
            level,
            m,
            radius,
            r: rng.random_range(1..=3),
            p,
            t,
            shift,
            seed: rng.random(),
        }
    }

    /// Relative gaps of the difference, modulus and ball-means identities.
    fn gaps(&self) -> Result<[f64; 3]> {
        let extent = (-(self.m as f64)).exp2();
        let f = random_corpus(self.dim, self.level, extent, self.radius, 1, self.seed)?.remove(0);
        let h = LatticeShift::new(&self.shift)?;
        let check = |p, kind| scale_commutation_check(&f, self.m, self.t, p, self.r, kind);
        let ball_p = match self.p {
            LpExponent::Infinity => LpExponent::Finite(2.0),
            p => p,
        };
        Ok([
            check(self.p, CommutationKind::Difference(h))?.max_relative_gap(),
            check(self.p, CommutationKind::Modulus)?.max_relative_gap(),
            check(ball_p, CommutationKind::BallMeans)?.max_relative_gap(),
        ])
    }
}

/// `max |Δ_h^r f(x)|` over the `x` whose whole stencil `x, …, x + rh`
/// stays strictly inside the support ball.
pub fn interior_difference_max(dim: usize, level: u32, degree: u32, r: usize, shift: &[i64]) -> Result<f64> {
    let f = make_bump(dim, level, 1.0, 1.0, Profile::Polynomial(degree))?;
    let h = LatticeShift::new(shift)?;
    let d = iterated_difference(&f, &h, r)?;
    let inner = (1i64 << level) - 1;
    let inside = |x: &[i64]| x.iter().map(|c| c * c).sum::<i64>() <= inner * inner;
    let mut worst = 0.0_f64;
    for (i, v) in d.values().iter().enumerate() {
        let x = d.index_of(i);
        let end: Vec<i64> = x.iter().zip(shift).map(|(a, b)| a + r as i64 * b).collect();
        if inside(&x) && inside(&end) {
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

impl IdentitiesConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.cases >= 1, "cases must be at least 1")?;
        require(self.tolerance >= 0.0, "tolerance must be nonnegative")?;
        require(self.orders.iter().all(|&r| r >= 1), "orders start at 1")?;
        require(
            (3..=12).contains(&self.polynomial_level),
            "polynomial_level must lie in 3..=12",
        )?;
        Ok(())
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cases: Vec<Case> = (0..self.cases).map(|_| Case::draw(&mut rng)).collect();
        let gaps = cases
            .par_iter()
            .map(Case::gaps)
            .collect::<Result<Vec<_>>>()?;

        let mut table = Table::new(
            "identities.csv",
            &["case", "dim", "level", "m", "r", "p", "t", "difference_gap", "modulus_gap", "ball_means_gap"],
        );
        let mut worst = [0.0_f64; 3];
        for (i, (c, g)) in cases.iter().zip(&gaps).enumerate() {
            table.push(vec![
                i.to_string(),
                c.dim.to_string(),
                c.level.to_string(),
                c.m.to_string(),
                c.r.to_string(),
                c.p.to_string(),
                num(c.t),
                num(g[0]),
                num(g[1]),
                num(g[2]),
            ]);
            for (w, x) in worst.iter_mut().zip(g) {
                *w = w.max(*x);
            }
        }
        let mut assertions = vec![
            Assertion::at_most("difference_identity", worst[0], self.tolerance),
            Assertion::at_most("modulus_identity", worst[1], self.tolerance),
            Assertion::at_most("ball_means_identity", worst[2], self.tolerance),
        ];

        let mut poly = Table::new("annihilation.csv", &["dim", "r", "degree", "shift", "max_abs"]);
        let mut poly_worst = 0.0_f64;
        let shifts: [(usize, u32, &[i64]); 6] = [
            (1, self.polynomial_level, &[1]),
            (1, self.polynomial_level, &[3]),
            (1, self.polynomial_level, &[-2]),
            (2, self.polynomial_level.min(5), &[1, 0]),
            (2, self.polynomial_level.min(5), &[1, 1]),
            (2, self.polynomial_level.min(5), &[2, -1]),
        ];
        for &r in &self.orders {
            for degree in 0..r as u32 {
                for &(dim, level, shift) in &shifts {
                    let v = interior_difference_max(dim, level, degree, r, shift)?;
                    let label = shift.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
                    poly.push(vec![dim.to_string(), r.to_string(), degree.to_string(), label, num(v)]);
                    poly_worst = poly_worst.max(v);
                }
            }
        }
        assertions.push(Assertion::at_most("polynomial_annihilation", poly_worst, 0.0));
        Ok(Outcome {
            results: json!({
                "cases": cases,
                "max_gaps": {
                    "difference": worst[0],
                    "modulus": worst[1],
                    "ball_means": worst[2],
                },
                "polynomial_max_abs": poly_worst,
            }),
            assertions,
            tables: vec![table, poly],
        })
    }
}
