//! Sampled, compactly supported functions on uniform dyadic lattices.
//!
//! A [`GridFunction`] stores the samples of `f` at the lattice points
//! `x = m·δ`, `δ = 2^{-level}`, of the cube `[-extent, extent]^n`. Outside
//! the cube the function is zero, and inside the cube it vanishes at every
//! point with `|x| ≥ support_radius`.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of stored samples accepted for one grid function.
pub const MAX_SAMPLES: usize = 1 << 26;

/// Lattice index of a point, `x = site·δ`. Dimension-one grids use the first
/// component only and keep the second at zero.
pub(crate) type Site = [i64; 2];

/// Integrability exponent `p ∈ (0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(LpExponent::Infinity)
        } else if p.is_finite() && p > 0.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(Error::Usage(format!("exponent must lie in (0, ∞], got {p}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, LpExponent::Infinity)
    }

    /// `p` as a float, `f64::INFINITY` for `∞`.
    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, which is `0` for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            LpExponent::Finite(p) => 1.0 / p,
            LpExponent::Infinity => 0.0,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.value() <= other.value() {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.value() >= other.value() {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpExponent::Finite(p) => write!(f, "{p}"),
            LpExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(LpExponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("cannot parse exponent {s:?}")))
                .and_then(LpExponent::new),
        }
    }
}

impl Serialize for LpExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LpExponent::Finite(p) => serializer.serialize_f64(*p),
            LpExponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LpExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(p) => LpExponent::new(p).map_err(de::Error::custom),
            Raw::Text(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

/// Shape of a cubic lattice window `{-half, …, half}^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Lattice {
    pub dim: usize,
    pub half: i64,
}

impl Lattice {
    pub fn side(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn flat(&self, site: Site) -> Option<usize> {
        let h = self.half;
        if site[0] < -h || site[0] > h {
            return None;
        }
        if self.dim == 1 {
            return Some((site[0] + h) as usize);
        }
        if site[1] < -h || site[1] > h {
            return None;
        }
        Some((site[0] + h) as usize * self.side() + (site[1] + h) as usize)
    }

    pub fn site(&self, flat: usize) -> Site {
        let side = self.side();
        if self.dim == 1 {
            [flat as i64 - self.half, 0]
        } else {
            [
                (flat / side) as i64 - self.half,
                (flat % side) as i64 - self.half,
            ]
        }
    }
}

pub(crate) fn norm_sq(site: Site) -> i64 {
    site[0] * site[0] + site[1] * site[1]
}

/// `true` when the lattice point lies outside the open ball `B_radius`.
pub(crate) fn outside_ball(site: Site, spacing: f64, radius: f64) -> bool {
    (norm_sq(site) as f64).sqrt() * spacing >= radius
}

pub(crate) fn spacing_of(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

/// Number of lattice steps in `extent`, if it is a whole number.
pub(crate) fn steps_in(extent: f64, level: u32) -> Option<i64> {
    let steps = extent * (level as f64).exp2();
    (steps.is_finite() && steps >= 1.0 && steps.fract() == 0.0 && steps < 1e15).then_some(steps as i64)
}

/// Real samples of a compactly supported function on a dyadic lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionRepr", into = "GridFunctionRepr")]
pub struct GridFunction {
    dim: usize,
    level: u32,
    extent: f64,
    support_radius: f64,
    half: i64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridFunctionRepr {
    dim: usize,
    level: u32,
    extent: f64,
    support_radius: f64,
    values: Vec<f64>,
}

impl TryFrom<GridFunctionRepr> for GridFunction {
    type Error = Error;

    fn try_from(raw: GridFunctionRepr) -> Result<Self> {
        GridFunction::new(raw.dim, raw.level, raw.extent, raw.support_radius, raw.values)
    }
}

impl From<GridFunction> for GridFunctionRepr {
    fn from(f: GridFunction) -> Self {
        GridFunctionRepr {
            dim: f.dim,
            level: f.level,
            extent: f.extent,
            support_radius: f.support_radius,
            values: f.values,
        }
    }
}

impl GridFunction {
    /// Builds a grid function from row-major samples, checking every
    /// structural invariant.
    pub fn new(
        dim: usize,
        level: u32,
        extent: f64,
        support_radius: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        let lattice = Self::check_shape(dim, level, extent, support_radius)?;
        if values.len() != lattice.len() {
            return Err(Error::Usage(format!(
                "expected {} samples, got {}",
                lattice.len(),
                values.len()
            )));
        }
        let spacing = spacing_of(level);
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("sample {i} is not finite")));
            }
            if v != 0.0 && outside_ball(lattice.site(i), spacing, support_radius) {
                return Err(Error::Domain(format!(
                    "sample {i} = {v} lies outside the declared support radius {support_radius}"
                )));
            }
        }
        Ok(GridFunction {
            dim,
            level,
            extent,
            support_radius,
            half: lattice.half,
            values,
        })
    }

    /// The zero function on the given lattice.
    pub fn zeros(dim: usize, level: u32, extent: f64, support_radius: f64) -> Result<Self> {
        let lattice = Self::check_shape(dim, level, extent, support_radius)?;
        Ok(GridFunction {
            dim,
            level,
            extent,
            support_radius,
            half: lattice.half,
            values: vec![0.0; lattice.len()],
        })
    }

    /// Samples `profile(x)` at every lattice point inside `B_support_radius`
    /// and stores zero elsewhere. Non-finite profile values are rejected.
    pub fn from_fn<F>(
        dim: usize,
        level: u32,
        extent: f64,
        support_radius: f64,
        profile: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut f = Self::zeros(dim, level, extent, support_radius)?;
        let lattice = f.lattice();
        let spacing = f.spacing();
        let mut x = [0.0; 2];
        for (i, v) in f.values.iter_mut().enumerate() {
            let site = lattice.site(i);
            if outside_ball(site, spacing, support_radius) {
                continue;
            }
            x[0] = site[0] as f64 * spacing;
            x[1] = site[1] as f64 * spacing;
            let y = profile(&x[..dim]);
            if !y.is_finite() {
                return Err(Error::Domain(format!("profile is not finite at {:?}", &x[..dim])));
            }
            *v = y;
        }
        Ok(f)
    }

    fn check_shape(dim: usize, level: u32, extent: f64, support_radius: f64) -> Result<Lattice> {
        if dim != 1 && dim != 2 {
            return Err(Error::Usage(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::Domain(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::Domain(format!("extent must be positive, got {extent}")));
        }
        if support_radius > extent {
            return Err(Error::Domain(format!(
                "support radius {support_radius} exceeds extent {extent}"
            )));
        }
        let half = steps_in(extent, level).ok_or_else(|| {
            Error::Resolution(format!(
                "extent {extent} is not a multiple of the spacing 2^-{level}"
            ))
        })?;
        let side = (2 * half + 1) as f64;
        if side.powi(dim as i32) > MAX_SAMPLES as f64 {
            return Err(Error::Resource(format!(
                "a {dim}-d lattice with {} points per axis is too large",
                2 * half + 1
            )));
        }
        Ok(Lattice { dim, half })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Lattice spacing `δ = 2^{-level}`.
    pub fn spacing(&self) -> f64 {
        spacing_of(self.level)
    }

    /// Number of lattice steps from the origin to the window boundary.
    pub fn half_width(&self) -> i64 {
        self.half
    }

    /// Row-major samples, first axis slowest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn lattice(&self) -> Lattice {
        Lattice {
            dim: self.dim,
            half: self.half,
        }
    }

    /// Sample at lattice index `index` (length `dim`); zero outside the window.
    pub fn sample(&self, index: &[i64]) -> f64 {
        assert_eq!(index.len(), self.dim, "index dimension mismatch");
        let site = if self.dim == 1 {
            [index[0], 0]
        } else {
            [index[0], index[1]]
        };
        self.at(site)
    }

    #[inline]
    pub(crate) fn at(&self, site: Site) -> f64 {
        match self.lattice().flat(site) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    /// Lattice index of the `flat`-th stored sample.
    pub fn index_of(&self, flat: usize) -> Vec<i64> {
        self.lattice().site(flat)[..self.dim].to_vec()
    }

    /// Physical coordinates of the `flat`-th stored sample.
    pub fn coordinates_of(&self, flat: usize) -> Vec<f64> {
        let spacing = self.spacing();
        self.index_of(flat)
            .into_iter()
            .map(|m| m as f64 * spacing)
            .collect()
    }

    /// Half-width, in lattice steps, of the smallest cube holding the support.
    pub(crate) fn support_half(&self) -> i64 {
        let steps = (self.support_radius / self.spacing()).ceil() as i64;
        steps.min(self.half)
    }

    /// `c·f` on the same lattice.
    pub fn scaled(&self, c: f64) -> GridFunction {
        let mut g = self.clone();
        for v in &mut g.values {
            *v *= c;
        }
        g
    }

    /// Sample-wise sum. The support radius of the result is the larger of the
    /// two radii.
    pub fn try_add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.ensure_same_lattice(other)?;
        let mut g = self.clone();
        g.support_radius = self.support_radius.max(other.support_radius);
        for (a, b) in g.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(g)
    }

    pub(crate) fn ensure_same_lattice(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.level != other.level || self.half != other.half {
            return Err(Error::GridMismatch(format!(
                "(dim {}, level {}, extent {}) vs (dim {}, level {}, extent {})",
                self.dim, self.level, self.extent, other.dim, other.level, other.extent
            )));
        }
        Ok(())
    }

    /// Pure reindexing onto a lattice with the same samples but a different
    /// level, extent and support radius.
    pub(crate) fn relabelled(&self, level: u32, extent: f64, support_radius: f64) -> GridFunction {
        GridFunction {
            dim: self.dim,
            level,
            extent,
            support_radius,
            half: self.half,
            values: self.values.clone(),
        }
    }

    /// Assembles a function from parts whose invariants the caller guarantees.
    pub(crate) fn from_parts(
        dim: usize,
        level: u32,
        half: i64,
        support_radius: f64,
        values: Vec<f64>,
    ) -> GridFunction {
        debug_assert_eq!(values.len(), Lattice { dim, half }.len());
        GridFunction {
            dim,
            level,
            extent: half as f64 * spacing_of(level),
            support_radius,
            half,
            values,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid functions always serialize")
    }

    pub fn from_json(text: &str) -> std::result::Result<GridFunction, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Closed-form test profiles for [`make_bump`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `max(0, 1 - |x|/R)`.
    Hat,
    /// `exp(-1/(1 - |x/R|²))` inside `B_R`.
    SmoothBump,
    /// `x₁^d` truncated to `B_R`.
    Polynomial(u32),
    /// `|x₁| - R` truncated to `B_R`.
    Abs,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "hat" => Ok(Profile::Hat),
            "smooth_bump" => Ok(Profile::SmoothBump),
            "abs" => Ok(Profile::Abs),
            _ => s
                .strip_prefix("polynomial(")
                .and_then(|rest| rest.strip_suffix(')'))
                .and_then(|d| d.trim().parse().ok())
                .map(Profile::Polynomial)
                .ok_or_else(|| Error::Usage(format!("unknown profile {s:?}"))),
        }
    }
}

/// Smooth bump `exp(-1/(1-u²))` of the normalized radius `u = |x|/R`, zero
/// for `u ≥ 1`.
pub fn smooth_bump_value(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Samples a closed-form profile truncated to `B_radius`.
pub fn make_bump(
    dim: usize,
    level: u32,
    extent: f64,
    radius: f64,
    profile: Profile,
) -> Result<GridFunction> {
    if radius > extent {
        return Err(Error::Domain(format!(
            "radius {radius} exceeds the sampled extent {extent}"
        )));
    }
    GridFunction::from_fn(dim, level, extent, radius, |x| {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        match profile {
            Profile::Hat => (1.0 - r / radius).max(0.0),
            Profile::SmoothBump => smooth_bump_value(r / radius),
            Profile::Polynomial(d) => x[0].powi(d as i32),
            Profile::Abs => x[0].abs() - radius,
        }
    })
}

/// Riemann-sum L_p quasi-norm `(δⁿ Σ |f(x)|^p)^{1/p}`, or the sample maximum
/// for `p = ∞`.
pub fn lp_norm(f: &GridFunction, p: LpExponent) -> f64 {
    finish_lp(power_sum(&f.values, p), f.spacing(), f.dim, p)
}

/// `Σ |v|^p`, or `max |v|` for `p = ∞`, in storage order.
pub(crate) fn power_sum(values: &[f64], p: LpExponent) -> f64 {
    match p {
        LpExponent::Infinity => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        LpExponent::Finite(p) => values.iter().map(|v| v.abs().powf(p)).sum(),
    }
}

/// Turns a [`power_sum`] into the quadrature quasi-norm on spacing `δ`.
pub(crate) fn finish_lp(sum: f64, spacing: f64, dim: usize, p: LpExponent) -> f64 {
    match p {
        LpExponent::Infinity => sum,
        LpExponent::Finite(p) => (spacing.powi(dim as i32) * sum).powf(1.0 / p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> LpExponent {
        LpExponent::new(v).unwrap()
    }

    #[test]
    fn hat_samples() {
        let f = make_bump(1, 4, 2.0, 1.0, Profile::Hat).unwrap();
        assert_eq!(f.sample(&[0]), 1.0);
        assert_eq!(f.sample(&[8]), 0.5);
        assert_eq!(f.sample(&[-8]), 0.5);
        assert_eq!(f.sample(&[16]), 0.0);
        assert_eq!(f.values().len(), 65);
    }

    #[test]
    fn polynomial_zero_is_indicator_of_open_ball() {
        let f = make_bump(1, 4, 2.0, 1.0, Profile::Polynomial(0)).unwrap();
        for (i, &v) in f.values().iter().enumerate() {
            let x = f.coordinates_of(i)[0];
            let expected = if x.abs() < 1.0 { 1.0 } else { 0.0 };
            assert_eq!(v, expected, "x = {x}");
        }
    }

    #[test]
    fn smooth_bump_value_at_half() {
        let f = make_bump(1, 6, 2.0, 1.0, Profile::SmoothBump).unwrap();
        let expected = (-1.0_f64 / 0.75).exp();
        assert_eq!(f.sample(&[32]), expected);
        assert!((expected - 0.2636).abs() < 5e-5);
    }

    #[test]
    fn abs_profile_vanishes_at_edge() {
        let f = make_bump(1, 3, 1.0, 1.0, Profile::Abs).unwrap();
        assert_eq!(f.sample(&[0]), -1.0);
        assert_eq!(f.sample(&[4]), -0.5);
        assert_eq!(f.sample(&[8]), 0.0);
    }

    #[test]
    fn radius_beyond_extent_is_domain_error() {
        let err = make_bump(1, 4, 1.0, 2.0, Profile::Hat).unwrap_err();
        assert_eq!(err.kind(), "domain");
    }

    #[test]
    fn unknown_profile_is_usage_error() {
        assert_eq!("spline".parse::<Profile>().unwrap_err().kind(), "usage");
        assert_eq!("polynomial(3)".parse::<Profile>().unwrap(), Profile::Polynomial(3));
    }

    #[test]
    fn extent_must_be_lattice_multiple() {
        let err = GridFunction::zeros(1, 2, 0.3, 0.3).unwrap_err();
        assert_eq!(err.kind(), "resolution");
    }

    #[test]
    fn rejects_samples_outside_support() {
        let mut values = vec![0.0; 9];
        values[8] = 1.0;
        let err = GridFunction::new(1, 2, 1.0, 0.5, values).unwrap_err();
        assert_eq!(err.kind(), "domain");
    }

    #[test]
    fn lp_norm_examples() {
        let zero = GridFunction::zeros(2, 3, 1.0, 1.0).unwrap();
        assert_eq!(lp_norm(&zero, p(2.0)), 0.0);

        // indicator of [0, 1) with δ = 1/4: δ·Σ|f|² = 4·(1/4)
        let ind = GridFunction::from_fn(1, 2, 2.0, 2.0, |x| {
            if (0.0..1.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!(lp_norm(&ind, p(2.0)), 1.0);

        let mut values = vec![0.0; 9];
        values[4] = 3.0;
        let single = GridFunction::new(1, 2, 1.0, 1.0, values).unwrap();
        assert_eq!(lp_norm(&single, LpExponent::Infinity), 3.0);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<LpExponent>().unwrap(), LpExponent::Infinity);
        assert_eq!("0.5".parse::<LpExponent>().unwrap(), LpExponent::Finite(0.5));
        assert!("0".parse::<LpExponent>().is_err());
        assert!(LpExponent::new(-1.0).is_err());
        let json: LpExponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(json.is_infinite());
        assert_eq!(serde_json::to_string(&LpExponent::Finite(2.0)).unwrap(), "2.0");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = make_bump(2, 3, 1.0, 0.9, Profile::SmoothBump).unwrap();
        let back = GridFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn json_rejects_broken_invariants() {
        let text = r#"{"dim":1,"level":1,"extent":1.0,"support_radius":0.5,"values":[1.0,0.0,0.0]}"#;
        assert!(GridFunction::from_json(text).is_err());
    }

    #[test]
    fn refinement_of_smooth_bump_converges() {
        let norms: Vec<f64> = (4..=8)
            .map(|level| {
                let f = make_bump(1, level, 1.0, 1.0, Profile::SmoothBump).unwrap();
                lp_norm(&f, p(2.0))
            })
            .collect();
        let gaps: Vec<f64> = norms.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for pair in gaps.windows(2) {
            assert!(pair[1] <= pair[0], "gaps not decreasing: {gaps:?}");
            assert!(pair[1] <= 0.5 * pair[0] + 1e-15, "gaps not halving: {gaps:?}");
        }
    }
}
