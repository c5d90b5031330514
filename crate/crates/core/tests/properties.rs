use fslab_core::dilation::{scale_commutation_check, CommutationKind};
use fslab_core::multiplier::{multiplier_bound_experiment, multiply, Mother, MultiplierSpec};
use fslab_core::seqspace::{farthest_point_cover, seq_norm, SeqElement, SeqSpaceParams};
use fslab_core::smoothness::binomial_difference;
use fslab_core::*;
use proptest::prelude::*;

fn exponent(v: f64) -> LpExponent {
    LpExponent::new(v).unwrap()
}

/// Integer-valued samples on `[-1, 1]^dim` at the given level, zero outside
/// `B_radius`.
fn lattice_fn(dim: usize, level: u32, radius: f64, seeds: &[i32]) -> GridFunction {
    let zero = GridFunction::zeros(dim, level, 1.0, radius).unwrap();
    let values = (0..zero.values().len())
        .map(|i| {
            let x = zero.coordinates_of(i);
            if x.iter().map(|c| c * c).sum::<f64>().sqrt() >= radius {
                0.0
            } else {
                seeds[i % seeds.len()] as f64
            }
        })
        .collect();
    GridFunction::new(dim, level, 1.0, radius, values).unwrap()
}

fn seeds() -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(-20i32..=20, 7..40)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recursive_and_binomial_differences_agree(
        s in seeds(),
        dim in 1usize..=2,
        r in 1usize..=4,
        h0 in -3i64..=3,
        h1 in -3i64..=3,
    ) {
        let f = lattice_fn(dim, 3, 0.75, &s);
        let steps: Vec<i64> = if dim == 1 { vec![h0] } else { vec![h0, h1] };
        let h = LatticeShift::new(&steps).unwrap();
        let a = iterated_difference(&f, &h, r).unwrap();
        let b = binomial_difference(&f, &h, r).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn modulus_is_subadditive(
        a in seeds(),
        b in seeds(),
        dim in 1usize..=2,
        r in 1usize..=3,
        pv in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0, f64::INFINITY]),
        k in 0i32..=3,
    ) {
        let f = lattice_fn(dim, 3, 0.75, &a);
        let g = lattice_fn(dim, 3, 0.75, &b);
        let sum = f.try_add(&g).unwrap();
        let p = if pv.is_infinite() { LpExponent::Infinity } else { exponent(pv) };
        let t = (-(k as f64)).exp2();
        let w = |h: &GridFunction| modulus(h, t, p, r).unwrap().value;
        let e = 1.0_f64.min(p.value());
        let lhs = w(&sum).powf(e);
        let rhs = w(&f).powf(e) + w(&g).powf(e);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{} > {}", lhs, rhs);
    }

    #[test]
    fn difference_commutes_with_dilation(
        s in seeds(),
        dim in 1usize..=2,
        m in 1u32..=3,
        r in 1usize..=3,
        h0 in -2i64..=2,
        h1 in -2i64..=2,
    ) {
        let radius = (-(m as f64)).exp2();
        let f = lattice_fn(dim, 4, radius, &s);
        let steps: Vec<i64> = if dim == 1 { vec![h0] } else { vec![h0, h1] };
        let h = LatticeShift::new(&steps).unwrap();
        let sides = scale_commutation_check(&f, m, 0.0, exponent(1.0), r, CommutationKind::Difference(h)).unwrap();
        prop_assert_eq!(sides.lhs, sides.rhs);
    }

    #[test]
    fn modulus_and_ball_means_commute_with_dilation(
        s in seeds(),
        dim in 1usize..=2,
        m in 1u32..=2,
        r in 1usize..=2,
        pv in prop::sample::select(vec![0.5, 1.0, 2.0]),
        k in 0i32..=2,
    ) {
        let radius = (-(m as f64)).exp2();
        let f = lattice_fn(dim, 4, radius, &s);
        let t = (-(k as f64)).exp2();
        let p = exponent(pv);
        let sides = scale_commutation_check(&f, m, t, p, r, CommutationKind::Modulus).unwrap();
        prop_assert!(sides.max_relative_gap() <= 1e-12);
        let sides = scale_commutation_check(&f, m, t, p, r, CommutationKind::BallMeans).unwrap();
        prop_assert!(sides.max_relative_gap() <= 1e-12);
    }

    #[test]
    fn dilations_compose(s in seeds(), a in 0u32..=2, b in 0u32..=2) {
        let radius = (-((a + b) as f64)).exp2();
        let f = lattice_fn(1, 5, radius, &s);
        let once = dilate(&f, a + b).unwrap();
        let twice = dilate(&dilate(&f, a).unwrap(), b).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn norms_are_absolutely_homogeneous(
        s in seeds(),
        c in -5.0f64..5.0,
        exp2 in -3i32..=3,
        family_f in any::<bool>(),
        variant in prop::sample::select(vec![
            NormVariant::Inhomogeneous01,
            NormVariant::Inhomogeneous0inf,
            NormVariant::Homogeneous0inf,
        ]),
    ) {
        let f = lattice_fn(1, 5, 0.75, &s);
        let params = if family_f {
            SmoothnessParams::triebel_lizorkin(0.6, exponent(2.0), exponent(1.5)).unwrap()
        } else {
            SmoothnessParams::besov(1.3, exponent(2.0), LpExponent::Infinity).unwrap()
        };
        let base = quasi_norm(&f, &params, variant).unwrap().total;
        let scaled = quasi_norm(&f.scaled(c), &params, variant).unwrap().total;
        prop_assert!(relative_gap(scaled, c.abs() * base) <= 1e-12);
        // at p = 2 rescaling by a power of two is exact in every step
        let power = (exp2 as f64).exp2();
        let exact = quasi_norm(&f.scaled(-power), &params, variant).unwrap().total;
        prop_assert_eq!(exact, power * base);
    }

    #[test]
    fn seq_norm_homogeneity_and_quasi_triangle(
        x in prop::collection::vec(-4.0f64..4.0, 7),
        y in prop::collection::vec(-4.0f64..4.0, 7),
        c in -3.0f64..3.0,
        pv in prop::sample::select(vec![0.5, 1.0, 2.0, f64::INFINITY]),
        qv in prop::sample::select(vec![0.5, 1.0, 2.0, f64::INFINITY]),
    ) {
        let lp = |v: f64| if v.is_infinite() { LpExponent::Infinity } else { exponent(v) };
        let space = SeqSpaceParams::new(1.5, 0.5, lp(pv), lp(qv), 1.0, vec![1, 2, 4]).unwrap();
        let norm = |v: &[f64]| seq_norm(&SeqElement { coeffs: v.to_vec() }, &space).unwrap();
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!(relative_gap(norm(&cx), c.abs() * norm(&x)) <= 1e-12);
        let rho = 1.0_f64.min(pv).min(qv);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = norm(&sum).powf(rho);
        let rhs = norm(&x).powf(rho) + norm(&y).powf(rho);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn farthest_point_cover_is_two_approximate(
        cloud in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..=12),
        centers in 1usize..=4,
    ) {
        let dist = |a: usize, b: usize| {
            let (x, y) = (cloud[a], cloud[b]);
            ((x.0 - y.0).powi(2) + (x.1 - y.1).powi(2)).sqrt()
        };
        let n = cloud.len();
        let centers = centers.min(n);
        let (_, radii) = farthest_point_cover(n, centers, dist);
        let greedy = radii[centers - 1];
        // exhaustive search over center subsets drawn from the cloud
        let mut optimum = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            if mask.count_ones() as usize != centers {
                continue;
            }
            let radius = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&c| mask & (1 << c) != 0)
                        .map(|c| dist(c, i))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0_f64, f64::max);
            optimum = optimum.min(radius);
        }
        prop_assert!(greedy <= 2.0 * optimum + 1e-12, "{} vs {}", greedy, optimum);
    }

    #[test]
    fn multiplication_is_bilinear_and_commutative(
        a in seeds(),
        b in seeds(),
        c in seeds(),
        k in -4.0f64..4.0,
    ) {
        let f = lattice_fn(1, 4, 0.75, &a);
        let g = lattice_fn(1, 4, 0.5, &b);
        let h = lattice_fn(1, 4, 0.75, &c);
        prop_assert_eq!(multiply(&f, &g).unwrap(), multiply(&g, &f).unwrap());
        let left = multiply(&f.try_add(&h).unwrap(), &g).unwrap();
        let right = multiply(&f, &g).unwrap().try_add(&multiply(&h, &g).unwrap()).unwrap();
        prop_assert_eq!(left.values(), right.values());
        let first = multiply(&f.scaled(k), &g).unwrap();
        let later = multiply(&f, &g).unwrap().scaled(k);
        for (a, b) in first.values().iter().zip(later.values()) {
            prop_assert!(relative_gap(*a, *b) <= 1e-15);
        }
        let product = multiply(&f, &g).unwrap();
        prop_assert_eq!(product.support_radius(), 0.5);
        for (i, &v) in product.values().iter().enumerate() {
            if f.values()[i] == 0.0 || g.values()[i] == 0.0 {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fitted_slope_ignores_scalar_multiples(exp2 in -4i32..=4, s_choice in 0usize..3) {
        let s = [0.5, 0.75, 1.25][s_choice];
        let f0 = make_bump(1, 8, 0.0625, 0.0625, Profile::SmoothBump).unwrap();
        let params = SmoothnessParams::besov(s, exponent(2.0), exponent(1.0)).unwrap();
        let base = homogeneity_experiment(&f0, &params, 3).unwrap();
        let scaled = homogeneity_experiment(&f0.scaled((exp2 as f64).exp2()), &params, 3).unwrap();
        prop_assert!((base.fit.slope - scaled.fit.slope).abs() <= 1e-12);
    }

    #[test]
    fn multiplier_ratio_ignores_corpus_scaling(exp2 in -4i32..=4, m in 0u32..=2) {
        let lambda = (-(m as f64)).exp2();
        let corpus: Vec<GridFunction> = [Profile::Hat, Profile::SmoothBump]
            .iter()
            .map(|&p| make_bump(1, 7, 1.0, lambda, p).unwrap())
            .collect();
        let params = SmoothnessParams::besov(0.5, exponent(2.0), exponent(2.0)).unwrap();
        let spec = MultiplierSpec::new(m, params.s, Mother::Modulated);
        let base = multiplier_bound_experiment(&corpus, &spec, &params, false).unwrap();
        let c = (exp2 as f64).exp2();
        let scaled: Vec<GridFunction> = corpus.iter().map(|f| f.scaled(c)).collect();
        let other = multiplier_bound_experiment(&scaled, &spec, &params, false).unwrap();
        prop_assert_eq!(base.max_ratio, other.max_ratio);
    }
}

#[test]
fn lp_part_never_exceeds_total() {
    let f = make_bump(1, 7, 1.0, 1.0, Profile::Hat).unwrap();
    for params in [
        SmoothnessParams::besov(0.5, exponent(1.0), exponent(2.0)).unwrap(),
        SmoothnessParams::triebel_lizorkin(0.8, exponent(2.0), LpExponent::Infinity).unwrap(),
    ] {
        for variant in [NormVariant::Inhomogeneous01, NormVariant::Inhomogeneous0inf] {
            let report = quasi_norm(&f, &params, variant).unwrap();
            assert!(report.lp_part.unwrap() <= report.total);
        }
    }
}
