//! Test function families with a common support radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{smooth_bump_value, GridFunction};

/// Smooth bump of radius `width` centred at `center·e₁`.
fn shifted_bump(x: &[f64], center: f64, width: f64) -> f64 {
    let d2 = (x[0] - center).powi(2) + x[1..].iter().map(|c| c * c).sum::<f64>();
    smooth_bump_value(d2.sqrt() / width)
}

/// Names of the members of [`standard_corpus`], in order.
pub const STANDARD_NAMES: [&str; 10] = [
    "bump",
    "narrow_bump",
    "offset_bump",
    "left_bump",
    "odd_bump",
    "quadratic_bump",
    "oscillating_bump",
    "dipole",
    "bump_power4",
    "tilted_bump",
];

/// Ten `C^∞` functions supported in `B_radius`. Off-centre members are
/// shifted along the first axis; in 2-d the others are radial.
pub fn standard_corpus(
    dim: usize,
    level: u32,
    extent: f64,
    radius: f64,
) -> Result<Vec<GridFunction>> {
    let r = radius;
    let members: [Box<dyn Fn(&[f64]) -> f64 + Sync>; 10] = [
        Box::new(move |x| shifted_bump(x, 0.0, r)),
        Box::new(move |x| shifted_bump(x, 0.0, 0.5 * r)),
        Box::new(move |x| shifted_bump(x, 0.25 * r, 0.5 * r)),
        Box::new(move |x| shifted_bump(x, -0.5 * r, r / 3.0)),
        Box::new(move |x| x[0] / r * shifted_bump(x, 0.0, r)),
        Box::new(move |x| (x[0] / r).powi(2) * shifted_bump(x, 0.0, r)),
        Box::new(move |x| {
            (4.0 * std::f64::consts::PI * x[0] / r).cos() * shifted_bump(x, 0.0, r)
        }),
        Box::new(move |x| shifted_bump(x, 0.3 * r, 0.5 * r) - shifted_bump(x, -0.3 * r, 0.5 * r)),
        Box::new(move |x| shifted_bump(x, 0.0, r).powi(4)),
        Box::new(move |x| (1.0 + x[0] / r) * shifted_bump(x, 0.0, r)),
    ];
    members
        .iter()
        .map(|g| GridFunction::from_fn(dim, level, extent, radius, g))
        .collect()
}

/// `count` seeded random sums of two or three smooth bumps with random
/// centres, widths and signed amplitudes, all inside `B_radius`.
pub fn random_corpus(
    dim: usize,
    level: u32,
    extent: f64,
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<GridFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms: Vec<([f64; 2], f64, f64)> = (0..rng.random_range(2..=3))
                .map(|_| {
                    let width = radius * rng.random_range(0.2..0.6);
                    let reach = radius - width;
                    let mut c = [0.0; 2];
                    for ci in c.iter_mut().take(dim) {
                        *ci = reach * rng.random_range(-1.0..1.0) / (dim as f64).sqrt();
                    }
                    let amp = rng.random_range(0.25..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (c, width, amp)
                })
                .collect();
            GridFunction::from_fn(dim, level, extent, radius, |x| {
                terms
                    .iter()
                    .map(|(c, w, a)| {
                        let d2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                        a * smooth_bump_value(d2.sqrt() / w)
                    })
                    .sum()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_members_are_distinct_and_nonzero() {
        let corpus = standard_corpus(1, 6, 1.0, 1.0).unwrap();
        assert_eq!(corpus.len(), STANDARD_NAMES.len());
        for (i, f) in corpus.iter().enumerate() {
            assert!(f.values().iter().any(|&v| v != 0.0), "{}", STANDARD_NAMES[i]);
            for g in &corpus[..i] {
                assert_ne!(f.values(), g.values());
            }
        }
    }

    #[test]
    fn two_dimensional_corpus() {
        let corpus = standard_corpus(2, 4, 1.0, 0.5).unwrap();
        assert!(corpus.iter().all(|f| f.support_radius() == 0.5 && f.dim() == 2));
    }

    #[test]
    fn random_corpus_is_seeded() {
        let a = random_corpus(1, 6, 1.0, 1.0, 5, 7).unwrap();
        let b = random_corpus(1, 6, 1.0, 1.0, 5, 7).unwrap();
        let c = random_corpus(1, 6, 1.0, 1.0, 5, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
