//! Truncated weighted sequence spaces `b^{s,ρ}_{p,q}(M_j)` and cover-based
//! entropy-number estimates for linear maps between them.
//!
//! Coefficients `λ^β_{j,m}` are stored flat: β-slices in the order of
//! [`SeqSpaceParams::betas`], inside each slice level `j` ascending, inside
//! each level `m = 0..M_j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::FitResult;
use crate::error::{Error, Result};
use crate::grid::LpExponent;

/// Largest coordinate count accepted by the entropy estimator.
pub const MAX_COORDINATES: usize = 256;
/// Largest point cloud accepted by the entropy estimator.
pub const MAX_CLOUD: usize = 1 << 16;

fn default_beta_dim() -> usize {
    1
}
fn default_c1() -> f64 {
    0.25
}
fn default_c2() -> f64 {
    4.0
}

/// Index set and weights of a truncated sequence space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeqSpace")]
pub struct SeqSpaceParams {
    pub s: f64,
    pub rho: f64,
    pub p: LpExponent,
    pub q: LpExponent,
    /// Dimension parameter in `M_j ∼ 2^{jn}` and in the weight `2^{j(s-n/p)}`.
    pub n: f64,
    /// `M_j` for `j = 0..J`.
    pub sizes: Vec<usize>,
    /// Largest `|β|`.
    pub beta_max: u32,
    /// Number of components of a multi-index β.
    pub beta_dim: usize,
    pub c1: f64,
    pub c2: f64,
    /// `2^{ρ|β|}` per β-slice.
    #[serde(skip)]
    slice_weights: Vec<f64>,
    /// `2^{j(s-n/p)}` per level.
    #[serde(skip)]
    level_weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSeqSpace {
    s: f64,
    rho: f64,
    p: LpExponent,
    q: LpExponent,
    n: f64,
    sizes: Vec<usize>,
    #[serde(default)]
    beta_max: u32,
    #[serde(default = "default_beta_dim")]
    beta_dim: usize,
    #[serde(default = "default_c1")]
    c1: f64,
    #[serde(default = "default_c2")]
    c2: f64,
}

impl TryFrom<RawSeqSpace> for SeqSpaceParams {
    type Error = Error;

    fn try_from(raw: RawSeqSpace) -> Result<Self> {
        SeqSpaceParams {
            s: raw.s,
            rho: raw.rho,
            p: raw.p,
            q: raw.q,
            n: raw.n,
            sizes: raw.sizes,
            beta_max: raw.beta_max,
            beta_dim: raw.beta_dim,
            c1: raw.c1,
            c2: raw.c2,
            slice_weights: Vec::new(),
            level_weights: Vec::new(),
        }
        .validated()
    }
}

impl SeqSpaceParams {
    /// A space with `β = 0` only and the default size constants.
    pub fn new(s: f64, rho: f64, p: LpExponent, q: LpExponent, n: f64, sizes: Vec<usize>) -> Result<Self> {
        SeqSpaceParams {
            s,
            rho,
            p,
            q,
            n,
            sizes,
            beta_max: 0,
            beta_dim: 1,
            c1: default_c1(),
            c2: default_c2(),
            slice_weights: Vec::new(),
            level_weights: Vec::new(),
        }
        .validated()
    }

    pub fn with_betas(mut self, beta_max: u32, beta_dim: usize) -> Result<Self> {
        self.beta_max = beta_max;
        self.beta_dim = beta_dim;
        self.validated()
    }

    pub fn with_smoothness(mut self, s: f64, rho: f64) -> Result<Self> {
        self.s = s;
        self.rho = rho;
        self.validated()
    }

    fn validated(mut self) -> Result<Self> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Usage(format!("s must be positive, got {}", self.s)));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::Usage(format!("rho must be nonnegative, got {}", self.rho)));
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::Usage(format!("n must be positive, got {}", self.n)));
        }
        if self.sizes.is_empty() {
            return Err(Error::Usage("at least one level is required".into()));
        }
        if self.beta_dim == 0 {
            return Err(Error::Usage("beta_dim must be at least 1".into()));
        }
        if !(self.c1 > 0.0 && self.c1 <= self.c2 && self.c2.is_finite()) {
            return Err(Error::Usage(format!(
                "size constants must satisfy 0 < c1 ≤ c2, got {} and {}",
                self.c1, self.c2
            )));
        }
        for (j, &m) in self.sizes.iter().enumerate() {
            let nominal = (j as f64 * self.n).exp2();
            let m = m as f64;
            if m < 1.0 || m < self.c1 * nominal || m > self.c2 * nominal {
                return Err(Error::Usage(format!(
                    "M_{j} = {m} is outside [{} , {}]",
                    self.c1 * nominal,
                    self.c2 * nominal
                )));
            }
        }
        let count = self.dimension_checked().ok_or_else(|| {
            Error::Resource("the coordinate count overflows".into())
        })?;
        if count > 1 << 24 {
            return Err(Error::Resource(format!("{count} coordinates are too many")));
        }
        self.slice_weights = self
            .betas()
            .iter()
            .map(|b| (self.rho * b.iter().sum::<u32>() as f64).exp2())
            .collect();
        let exponent = self.s - self.n * self.p.reciprocal();
        self.level_weights = (0..self.sizes.len()).map(|j| (j as f64 * exponent).exp2()).collect();
        Ok(self)
    }

    pub fn levels(&self) -> usize {
        self.sizes.len()
    }

    /// Multi-indices with `|β| ≤ beta_max`, graded by `|β|` and then
    /// lexicographic.
    pub fn betas(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for order in 0..=self.beta_max {
            let mut current = vec![0; self.beta_dim];
            compositions(order, 0, &mut current, &mut out);
        }
        out
    }

    fn dimension_checked(&self) -> Option<usize> {
        let per_slice: usize = self.sizes.iter().try_fold(0usize, |a, &m| a.checked_add(m))?;
        let mut slices = 0usize;
        for order in 0..=self.beta_max as usize {
            // C(order + d - 1, d - 1)
            let mut c = 1u128;
            for i in 0..self.beta_dim.saturating_sub(1) {
                c = c * (order + i + 1) as u128 / (i + 1) as u128;
            }
            slices = slices.checked_add(usize::try_from(c).ok()?)?;
        }
        per_slice.checked_mul(slices)
    }

    /// Total coordinate count `#β · Σ_j M_j`.
    pub fn dimension(&self) -> usize {
        self.dimension_checked().expect("validated on construction")
    }

    /// Flat position of `λ^β_{j,m}`, with β given by its position in
    /// [`betas`](Self::betas).
    pub fn slot(&self, beta: usize, j: usize, m: usize) -> Option<usize> {
        let per_slice: usize = self.sizes.iter().sum();
        let slices = self.dimension() / per_slice;
        (beta < slices && j < self.sizes.len() && m < self.sizes[j])
            .then(|| beta * per_slice + self.sizes[..j].iter().sum::<usize>() + m)
    }

    fn same_index_set(&self, other: &SeqSpaceParams) -> bool {
        self.sizes == other.sizes && self.beta_max == other.beta_max && self.beta_dim == other.beta_dim
    }

    /// Mixed norm of the coefficients produced by `value(i)`, `i` flat.
    fn norm_with<F: Fn(usize) -> f64>(&self, value: F) -> f64 {
        let mut start = 0;
        let mut best = 0.0_f64;
        for &slice_weight in &self.slice_weights {
            let mut levels = 0.0_f64;
            for (&size, &level_weight) in self.sizes.iter().zip(&self.level_weights) {
                let range = start..start + size;
                start += size;
                let inner = match self.p {
                    LpExponent::Infinity => range.map(|i| value(i).abs()).fold(0.0, f64::max),
                    LpExponent::Finite(p) if p == 2.0 => range.map(|i| value(i).powi(2)).sum::<f64>().sqrt(),
                    LpExponent::Finite(p) => range.map(|i| value(i).abs().powf(p)).sum::<f64>().powf(1.0 / p),
                };
                let weighted = level_weight * inner;
                levels = match self.q {
                    LpExponent::Infinity => levels.max(weighted),
                    LpExponent::Finite(q) if q == 2.0 => levels + weighted * weighted,
                    LpExponent::Finite(q) => levels + weighted.powf(q),
                };
            }
            levels = match self.q {
                LpExponent::Infinity => levels,
                LpExponent::Finite(q) if q == 2.0 => levels.sqrt(),
                LpExponent::Finite(q) => levels.powf(1.0 / q),
            };
            best = best.max(slice_weight * levels);
        }
        best
    }

    /// Mixed norm of a flat coefficient slice of the right length.
    pub fn norm_of(&self, coeffs: &[f64]) -> f64 {
        debug_assert_eq!(coeffs.len(), self.dimension());
        self.norm_with(|i| coeffs[i])
    }
}

fn compositions(rest: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = rest;
        out.push(current.clone());
        return;
    }
    for v in (0..=rest).rev() {
        current[pos] = v;
        compositions(rest - v, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Coefficient family `{λ^β_{j,m}}` in flat storage order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqElement {
    pub coeffs: Vec<f64>,
}

impl SeqElement {
    pub fn zeros(params: &SeqSpaceParams) -> Self {
        SeqElement {
            coeffs: vec![0.0; params.dimension()],
        }
    }

    /// The element with a single nonzero coefficient.
    pub fn single(params: &SeqSpaceParams, beta: usize, j: usize, m: usize, value: f64) -> Result<Self> {
        let slot = params
            .slot(beta, j, m)
            .ok_or_else(|| Error::Usage(format!("no coefficient at (β#{beta}, {j}, {m})")))?;
        let mut x = Self::zeros(params);
        x.coeffs[slot] = value;
        Ok(x)
    }

    fn conforms(&self, params: &SeqSpaceParams) -> Result<()> {
        if self.coeffs.len() != params.dimension() {
            return Err(Error::Usage(format!(
                "element has {} coefficients, the space has {}",
                self.coeffs.len(),
                params.dimension()
            )));
        }
        if let Some(i) = self.coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("coefficient {i} is not finite")));
        }
        Ok(())
    }
}

/// `sup_β 2^{ρ|β|} (Σ_j 2^{j(s-n/p)q} (Σ_m |λ^β_{j,m}|^p)^{q/p})^{1/q}`.
pub fn seq_norm(x: &SeqElement, params: &SeqSpaceParams) -> Result<f64> {
    x.conforms(params)?;
    Ok(params.norm_of(&x.coeffs))
}

/// `δ = s₁ - s₂ - n(1/p₁ - 1/p₂)`.
pub fn embedding_gap(src: &SeqSpaceParams, dst: &SeqSpaceParams) -> f64 {
    src.s - dst.s - src.n * (src.p.reciprocal() - dst.p.reciprocal())
}

/// Same index set, `ρ₁ > ρ₂`, `p₁ ≤ p₂` and `δ > 0`.
pub fn check_embedding(src: &SeqSpaceParams, dst: &SeqSpaceParams) -> Result<()> {
    if !src.same_index_set(dst) || src.n != dst.n {
        return Err(Error::Usage("source and target index sets differ".into()));
    }
    if !(src.rho > dst.rho) {
        return Err(Error::Usage(format!(
            "need ρ₁ > ρ₂, got {} and {}",
            src.rho, dst.rho
        )));
    }
    if src.p.value() > dst.p.value() {
        return Err(Error::Usage(format!("need p₁ ≤ p₂, got {} and {}", src.p, dst.p)));
    }
    let delta = embedding_gap(src, dst);
    if !(delta > 0.0) {
        return Err(Error::Usage(format!("need δ > 0, got {delta}")));
    }
    Ok(())
}

/// The formal identity `b^{s₁,ρ₁}_{p₁,q₁} → b^{s₂,ρ₂}_{p₂,q₂}`.
pub fn embedding_map(x: &SeqElement, src: &SeqSpaceParams, dst: &SeqSpaceParams) -> Result<SeqElement> {
    check_embedding(src, dst)?;
    x.conforms(src)?;
    Ok(x.clone())
}

/// Dense matrix of a linear map, `rows × cols`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Usage(format!(
                "a {rows}×{cols} map needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(LinearMap { rows, cols, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            entries[i * n + i] = v;
        }
        LinearMap { rows: n, cols: n, entries }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        LinearMap {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Usage("maps of different shapes cannot be added".into()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(LinearMap { entries, ..*self })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if self.cols != inner.rows {
            return Err(Error::Usage("map shapes do not compose".into()));
        }
        let mut entries = vec![0.0; self.rows * inner.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                for j in 0..inner.cols {
                    entries[i * inner.cols + j] += a * inner.entries[k * inner.cols + j];
                }
            }
        }
        Ok(LinearMap {
            rows: self.rows,
            cols: inner.cols,
            entries,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    Exact1d,
    GreedyCover,
}

/// Estimate of the `k`-th dyadic entropy number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub k: u32,
    pub value: f64,
    pub method: EntropyMethod,
    pub centers_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverOptions {
    pub cloud_size: usize,
    pub seed: u64,
    /// Use the cover even where the closed form applies.
    #[serde(default)]
    pub force_greedy: bool,
}

impl CoverOptions {
    pub fn new(cloud_size: usize, seed: u64) -> Self {
        CoverOptions {
            cloud_size,
            seed,
            force_greedy: false,
        }
    }
}

/// Points of the unit ball of `space`: the origin, the signed normalized
/// coordinate vectors, random unit-sphere points and random interior points
/// with stratified radii.
pub fn unit_ball_cloud(space: &SeqSpaceParams, size: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let dim = space.dimension();
    if dim > MAX_COORDINATES || size > MAX_CLOUD {
        return Err(Error::Resource(format!(
            "a cloud of {size} points in {dim} coordinates is too large"
        )));
    }
    if size < 2 * dim + 1 {
        return Err(Error::Usage(format!(
            "cloud size {size} cannot hold the origin and the {} extreme points",
            2 * dim
        )));
    }
    let mut cloud = Vec::with_capacity(size);
    cloud.push(vec![0.0; dim]);
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let w = space.norm_of(&e);
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = sign / w;
            cloud.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = size - cloud.len();
    let interior = random / 2;
    for i in 0..random {
        let mut v: Vec<f64> = loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            if v.iter().any(|&c| c != 0.0) {
                break v;
            }
        };
        let norm = space.norm_of(&v);
        let radius = if i % 2 == 0 {
            1.0
        } else {
            // stratified in the radius
            let stratum = (i / 2) as f64;
            ((stratum + rng.random::<f64>()) / interior.max(1) as f64).powf(1.0 / dim as f64)
        };
        for c in &mut v {
            *c *= radius / norm;
        }
        cloud.push(v);
    }
    Ok(cloud)
}

/// Farthest-point traversal from point 0 in the metric `d`. Entry `c - 1`
/// of the returned radii is the covering radius of the first `c` centers.
pub fn farthest_point_cover<D>(count: usize, centers: usize, dist: D) -> (Vec<usize>, Vec<f64>)
where
    D: Fn(usize, usize) -> f64 + Sync,
{
    let centers = centers.min(count).max(1);
    let mut nearest: Vec<f64> = (0..count).into_par_iter().map(|i| dist(0, i)).collect();
    let mut chosen = vec![0];
    let mut radii = Vec::with_capacity(centers);
    loop {
        let (far, radius) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        radii.push(radius.max(0.0));
        if chosen.len() == centers {
            break;
        }
        chosen.push(far);
        nearest.par_iter_mut().enumerate().for_each(|(i, d)| {
            *d = d.min(dist(far, i));
        });
    }
    (chosen, radii)
}

/// Minimax center of `members` under `dist`: the better of the current
/// center, the bounding-box midpoint and a short Badoiu-Clarkson walk.
fn minimax_center<N>(points: &[Vec<f64>], members: &[usize], current: &[f64], dist: &N) -> Vec<f64>
where
    N: Fn(&[f64], &[f64]) -> f64,
{
    let cost = |c: &[f64]| members.iter().fold(0.0_f64, |m, &b| m.max(dist(c, &points[b])));
    let dim = current.len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &b in members {
        for i in 0..dim {
            lo[i] = lo[i].min(points[b][i]);
            hi[i] = hi[i].max(points[b][i]);
        }
    }
    let midpoint: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let mut best = (cost(current), current.to_vec());
    let mid_cost = cost(&midpoint);
    if mid_cost < best.0 {
        best = (mid_cost, midpoint.clone());
    }
    let mut walk = midpoint;
    for step in 1..=24 {
        let far = members
            .iter()
            .map(|&b| (dist(&walk, &points[b]), b))
            .fold((f64::NEG_INFINITY, 0), |m, e| if e.0 > m.0 { e } else { m });
        if far.0 < best.0 {
            best = (far.0, walk.clone());
        }
        let w = 1.0 / (step as f64 + 1.0);
        for (c, y) in walk.iter_mut().zip(&points[far.1]) {
            *c += w * (y - *c);
        }
    }
    best.1
}

/// Alternates nearest-center assignment with a minimax center per cluster,
/// starting from the cloud points `seeds`. Centers may leave the cloud.
/// Returns the smallest covering radius met.
pub fn refine_cover<N>(points: &[Vec<f64>], seeds: &[usize], dist: N) -> f64
where
    N: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    // nearest center under additive weights; the radius is unweighted
    let assign = |centers: &[Vec<f64>], weights: &[f64]| -> (Vec<(usize, f64)>, f64) {
        let pairs: Vec<(usize, f64, f64)> = points
            .par_iter()
            .map(|y| {
                centers
                    .iter()
                    .zip(weights)
                    .enumerate()
                    .map(|(c, (x, w))| {
                        let d = dist(x, y);
                        (c, d + w, d)
                    })
                    .fold((0, f64::INFINITY, 0.0), |b, e| if e.1 < b.1 { e } else { b })
            })
            .collect();
        let radius = pairs.iter().fold(0.0_f64, |m, p| m.max(p.2));
        (pairs.into_iter().map(|p| (p.0, p.2)).collect(), radius)
    };
    // centers that own no point jump to the worst-covered point
    let settle = |centers: &mut Vec<Vec<f64>>, weights: &mut [f64]| -> (Vec<usize>, f64) {
        loop {
            let (pairs, radius) = assign(centers, weights);
            let mut owned = vec![false; centers.len()];
            for p in &pairs {
                owned[p.0] = true;
            }
            match owned.iter().position(|&o| !o) {
                Some(idle) if radius > 0.0 => {
                    let worst = pairs
                        .iter()
                        .enumerate()
                        .fold((0, -1.0), |b, (i, p)| if p.1 > b.1 { (i, p.1) } else { b });
                    centers[idle] = points[worst.0].clone();
                    weights[idle] = 0.0;
                }
                _ => return (pairs.into_iter().map(|p| p.0).collect(), radius),
            }
        }
    };
    let true_radius = |centers: &[Vec<f64>]| assign(centers, &vec![0.0; centers.len()]).1;
    let mut centers: Vec<Vec<f64>> = seeds.iter().map(|&i| points[i].clone()).collect();
    let mut weights = vec![0.0; centers.len()];
    let (mut owner, mut best) = settle(&mut centers, &mut weights);
    // plain alternation until the memberships freeze, then rounds that
    // penalize oversized clusters through the weights
    let mut balancing = false;
    let mut idle_rounds = 0;
    for _ in 0..2000 {
        let mut clusters = vec![Vec::new(); centers.len()];
        for (i, &c) in owner.iter().enumerate() {
            clusters[c].push(i);
        }
        let moved: Vec<Vec<f64>> = clusters
            .par_iter()
            .zip(&centers)
            .map(|(members, current)| minimax_center(points, members, current, &dist))
            .collect();
        let shift = moved
            .iter()
            .zip(&centers)
            .map(|(a, b)| dist(a, b))
            .fold(0.0_f64, f64::max);
        centers = moved;
        if balancing {
            let spread: Vec<f64> = clusters
                .iter()
                .zip(&centers)
                .map(|(members, c)| members.iter().fold(0.0_f64, |m, &b| m.max(dist(c, &points[b]))))
                .collect();
            let mean = spread.iter().sum::<f64>() / spread.len() as f64;
            for (w, r) in weights.iter_mut().zip(&spread) {
                *w += 0.5 * (r - mean);
            }
        }
        let (next, _) = settle(&mut centers, &mut weights);
        owner = next;
        let radius = true_radius(&centers);
        if radius < best * (1.0 - 1e-9) {
            best = radius;
            idle_rounds = 0;
        } else {
            idle_rounds += 1;
        }
        if !balancing && shift <= 1e-4 * best {
            balancing = centers.len() > 1;
            idle_rounds = 0;
            if !balancing {
                break;
            }
        } else if balancing && idle_rounds >= 40 {
            break;
        }
    }
    best
}

fn check_ks(ks: &[u32], cloud_size: usize) -> Result<()> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::Usage("entropy indices start at k = 1".into()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("entropy indices must be strictly ascending".into()));
    }
    let last = *ks.last().unwrap();
    if last > 40 || cloud_size < 1usize << (last - 1) {
        return Err(Error::Usage(format!(
            "cloud size {cloud_size} is smaller than the 2^{} centers of e_{last}",
            last - 1
        )));
    }
    Ok(())
}

/// Entropy-number estimates of `map: src → dst` for the ascending indices
/// `ks`, all read off one seeded cloud. The values are non-increasing in `k`.
pub fn map_entropy(
    map: &LinearMap,
    src: &SeqSpaceParams,
    dst: &SeqSpaceParams,
    ks: &[u32],
    options: CoverOptions,
) -> Result<Vec<EntropyEstimate>> {
    check_ks(ks, options.cloud_size)?;
    if map.cols != src.dimension() || map.rows != dst.dimension() {
        return Err(Error::Usage(format!(
            "a {}×{} map does not act between spaces of dimension {} and {}",
            map.rows,
            map.cols,
            src.dimension(),
            dst.dimension()
        )));
    }
    if src.dimension() == 1 && dst.dimension() == 1 && !options.force_greedy {
        let w = map.entries[0].abs() * dst.norm_of(&[1.0]) / src.norm_of(&[1.0]);
        return Ok(ks
            .iter()
            .map(|&k| EntropyEstimate {
                k,
                value: w * (-(k as f64 - 1.0)).exp2(),
                method: EntropyMethod::Exact1d,
                centers_used: 1 << (k - 1),
            })
            .collect());
    }
    let cloud = unit_ball_cloud(src, options.cloud_size, options.seed)?;
    let image: Vec<Vec<f64>> = cloud.par_iter().map(|x| map.apply(x)).collect();
    let dist = |a: usize, b: usize| dst.norm_with(|i| image[a][i] - image[b][i]);
    let most = 1usize << (ks.last().unwrap() - 1);
    let (order, radii) = farthest_point_cover(image.len(), most, dist);
    let mut running = f64::INFINITY;
    Ok(ks
        .iter()
        .map(|&k| {
            let centers = 1usize << (k - 1);
            let greedy = radii[(centers - 1).min(radii.len() - 1)];
            let refined = if centers <= order.len() {
                refine_cover(&image, &order[..centers], |a: &[f64], b: &[f64]| {
                    dst.norm_with(|i| a[i] - b[i])
                })
            } else {
                greedy
            };
            running = running.min(greedy).min(refined);
            EntropyEstimate {
                k,
                value: running,
                method: EntropyMethod::GreedyCover,
                centers_used: centers,
            }
        })
        .collect())
}

/// Entropy numbers of the embedding `id: src → dst`.
pub fn entropy_estimates(
    src: &SeqSpaceParams,
    dst: &SeqSpaceParams,
    ks: &[u32],
    options: CoverOptions,
) -> Result<Vec<EntropyEstimate>> {
    check_embedding(src, dst)?;
    map_entropy(&LinearMap::identity(src.dimension()), src, dst, ks, options)
}

/// Single-index form of [`entropy_estimates`].
pub fn entropy_estimate(
    src: &SeqSpaceParams,
    dst: &SeqSpaceParams,
    k: u32,
    options: CoverOptions,
) -> Result<EntropyEstimate> {
    check_ks(&[k], options.cloud_size)?;
    let ks: Vec<u32> = (1..=k).collect();
    Ok(entropy_estimates(src, dst, &ks, options)?.pop().unwrap())
}

/// `-δ/n + 1/p₂ - 1/p₁`.
pub fn predicted_entropy_slope(src: &SeqSpaceParams, dst: &SeqSpaceParams) -> f64 {
    -embedding_gap(src, dst) / src.n + dst.p.reciprocal() - src.p.reciprocal()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRateRun {
    pub fit: FitResult,
    pub predicted_slope: f64,
    pub estimates: Vec<EntropyEstimate>,
}

/// Fits `log e_k` against `log k` over `ks`.
pub fn entropy_rate_fit(
    src: &SeqSpaceParams,
    dst: &SeqSpaceParams,
    ks: &[u32],
    options: CoverOptions,
) -> Result<EntropyRateRun> {
    if src.levels() == 1 {
        return Err(Error::Usage(
            "a single-level space has geometric entropy decay and no polynomial rate".into(),
        ));
    }
    if ks.len() < 4 {
        return Err(Error::Usage(format!("a rate fit needs at least 4 indices, got {}", ks.len())));
    }
    let estimates = entropy_estimates(src, dst, ks, options)?;
    let samples: Vec<(f64, f64)> = estimates.iter().map(|e| (e.k as f64, e.value)).collect();
    let predicted = predicted_entropy_slope(src, dst);
    let fit = FitResult::power_law(&samples)?.with_prediction(predicted);
    Ok(EntropyRateRun {
        fit,
        predicted_slope: predicted,
        estimates,
    })
}

/// Maps `S, T: X → Y` and `R: Y → Z` between tiny spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalculusInstance {
    pub name: String,
    pub x: SeqSpaceParams,
    pub y: SeqSpaceParams,
    pub z: SeqSpaceParams,
    pub s: LinearMap,
    pub t: LinearMap,
    pub r: LinearMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalculusRule {
    Additivity,
    Multiplicativity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalculusCheck {
    pub instance: String,
    pub rule: CalculusRule,
    pub j: u32,
    pub k: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `e_{j+k-1}(S+T)^ρ ≤ e_j(S)^ρ + e_k(T)^ρ`, `ρ = min(1, p, q)` of
/// `Y`, and `e_{j+k-1}(RT) ≤ e_j(R) e_k(T)` for every `(j, k)` in `pairs`.
/// The right-hand sides are multiplied by `slack`.
pub fn entropy_calculus_check(
    instance: &CalculusInstance,
    pairs: &[(u32, u32)],
    options: CoverOptions,
    slack: f64,
) -> Result<Vec<CalculusCheck>> {
    let top = pairs.iter().map(|&(j, k)| j.max(k).max(j + k - 1)).max().unwrap_or(1);
    let ks: Vec<u32> = (1..=top).collect();
    let at = |v: &[EntropyEstimate], k: u32| v[k as usize - 1].value;
    let e_s = map_entropy(&instance.s, &instance.x, &instance.y, &ks, options)?;
    let e_t = map_entropy(&instance.t, &instance.x, &instance.y, &ks, options)?;
    let e_r = map_entropy(&instance.r, &instance.y, &instance.z, &ks, options)?;
    let e_sum = map_entropy(&instance.s.add(&instance.t)?, &instance.x, &instance.y, &ks, options)?;
    let e_comp = map_entropy(&instance.r.compose(&instance.t)?, &instance.x, &instance.z, &ks, options)?;
    let rho = 1.0_f64.min(instance.y.p.value()).min(instance.y.q.value());
    let mut out = Vec::new();
    for &(j, k) in pairs {
        let lhs = at(&e_sum, j + k - 1);
        let rhs = slack * (at(&e_s, j).powf(rho) + at(&e_t, k).powf(rho)).powf(1.0 / rho);
        out.push(CalculusCheck {
            instance: instance.name.clone(),
            rule: CalculusRule::Additivity,
            j,
            k,
            lhs,
            rhs,
            holds: lhs <= rhs,
        });
        let lhs = at(&e_comp, j + k - 1);
        let rhs = slack * at(&e_r, j) * at(&e_t, k);
        out.push(CalculusCheck {
            instance: instance.name.clone(),
            rule: CalculusRule::Multiplicativity,
            j,
            k,
            lhs,
            rhs,
            holds: lhs <= rhs,
        });
    }
    Ok(out)
}

/// Tiny instances for [`entropy_calculus_check`]: a zero summand with a 2-d
/// diagonal map, exact 1-d scalings, and 2-d diagonal maps in ℓ₂ and ℓ₁.
pub fn tiny_calculus_suite() -> Result<Vec<CalculusInstance>> {
    let two = LpExponent::Finite(2.0);
    let one = LpExponent::Finite(1.0);
    let line = SeqSpaceParams::new(1.0, 0.0, two, two, 1.0, vec![1])?;
    let plane = SeqSpaceParams::new(1.0, 0.0, two, two, 1.0, vec![2])?;
    let plane_l1 = SeqSpaceParams::new(1.0, 0.0, one, one, 1.0, vec![2])?;
    Ok(vec![
        CalculusInstance {
            name: "zero_plus_diagonal".into(),
            x: plane.clone(),
            y: plane.clone(),
            z: plane.clone(),
            s: LinearMap::zero(2, 2),
            t: LinearMap::diagonal(&[1.0, 0.5]),
            r: LinearMap::identity(2),
        },
        CalculusInstance {
            name: "scalar_line".into(),
            x: line.clone(),
            y: line.clone(),
            z: line,
            s: LinearMap::diagonal(&[0.5]),
            t: LinearMap::identity(1),
            r: LinearMap::diagonal(&[3.0]),
        },
        CalculusInstance {
            name: "diagonal_plane".into(),
            x: plane.clone(),
            y: plane.clone(),
            z: plane,
            s: LinearMap::diagonal(&[0.25, 1.0]),
            t: LinearMap::diagonal(&[1.0, 0.5]),
            r: LinearMap::diagonal(&[2.0, 0.75]),
        },
        CalculusInstance {
            name: "diagonal_plane_l1".into(),
            x: plane_l1.clone(),
            y: plane_l1.clone(),
            z: plane_l1,
            s: LinearMap::diagonal(&[0.5, 0.5]),
            t: LinearMap::diagonal(&[1.0, 0.25]),
            r: LinearMap::diagonal(&[1.0, 2.0]),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> LpExponent {
        LpExponent::Finite(2.0)
    }

    fn rate_pair() -> (SeqSpaceParams, SeqSpaceParams) {
        let src = SeqSpaceParams::new(2.0, 1.0, two(), two(), 1.0, vec![1, 2, 4]).unwrap();
        let dst = SeqSpaceParams::new(1.0, 0.0, two(), two(), 1.0, vec![1, 2, 4]).unwrap();
        (src, dst)
    }

    #[test]
    fn single_coefficient_norms() {
        let (src, _) = rate_pair();
        let x = SeqElement::single(&src, 0, 2, 3, 1.0).unwrap();
        assert_eq!(seq_norm(&x, &src).unwrap(), (2.0 * 1.5_f64).exp2());
        let betas = src.clone().with_betas(1, 2).unwrap();
        assert_eq!(betas.betas(), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let x = SeqElement::single(&betas, 2, 1, 0, 1.0).unwrap();
        assert_eq!(seq_norm(&x, &betas).unwrap(), 2.0 * 1.5_f64.exp2());
    }

    #[test]
    fn euclidean_case_matches_weighted_l2() {
        let space = SeqSpaceParams::new(0.75, 0.0, two(), two(), 1.0, vec![1, 2, 4]).unwrap();
        let coeffs: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut direct = 0.0;
        let mut i = 0;
        for (j, m) in [1usize, 2, 4].into_iter().enumerate() {
            for _ in 0..m {
                direct += (coeffs[i] * (0.25 * j as f64).exp2()).powi(2);
                i += 1;
            }
        }
        let got = seq_norm(&SeqElement { coeffs }, &space).unwrap();
        assert!((got - direct.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn index_mismatch_is_rejected() {
        let (src, _) = rate_pair();
        let err = seq_norm(&SeqElement { coeffs: vec![1.0; 3] }, &src).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn size_constants_are_enforced() {
        let err = SeqSpaceParams::new(1.0, 0.0, two(), two(), 1.0, vec![1, 2, 40]).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn embedding_map_preconditions() {
        let (src, dst) = rate_pair();
        let x = SeqElement::single(&src, 0, 1, 0, 2.0).unwrap();
        assert_eq!(embedding_map(&x, &src, &dst).unwrap(), x);
        assert_eq!(embedding_map(&x, &dst, &src).unwrap_err().kind(), "usage");
        let flat = dst.clone().with_smoothness(1.0, 0.5).unwrap();
        assert_eq!(embedding_map(&x, &flat, &dst).unwrap_err().kind(), "usage");
    }

    #[test]
    fn embedding_ratio_on_single_coefficients() {
        let (src, dst) = rate_pair();
        let src = src.with_betas(1, 1).unwrap();
        let dst = dst.with_betas(1, 1).unwrap();
        for (beta, j) in [(0, 0), (0, 2), (1, 1)] {
            let x = SeqElement::single(&src, beta, j, 0, 1.0).unwrap();
            let ratio = seq_norm(&x, &dst).unwrap() / seq_norm(&x, &src).unwrap();
            let expected = ((dst.rho - src.rho) * beta as f64 - j as f64).exp2();
            assert!((ratio - expected).abs() < 1e-15 * expected);
        }
    }

    #[test]
    fn one_dimensional_entropy_is_exact() {
        let src = SeqSpaceParams::new(2.0, 1.0, two(), two(), 1.0, vec![1]).unwrap();
        let dst = SeqSpaceParams::new(1.0, 0.0, two(), two(), 1.0, vec![1]).unwrap();
        let ks = [1, 2, 3, 4, 5];
        let exact = entropy_estimates(&src, &dst, &ks, CoverOptions::new(512, 1)).unwrap();
        for e in &exact {
            assert_eq!(e.method, EntropyMethod::Exact1d);
            assert_eq!(e.value, (-(e.k as f64 - 1.0)).exp2());
        }
        let options = CoverOptions {
            force_greedy: true,
            ..CoverOptions::new(512, 1)
        };
        for (e, x) in entropy_estimates(&src, &dst, &ks, options).unwrap().iter().zip(&exact) {
            assert_eq!(e.method, EntropyMethod::GreedyCover);
            assert!((e.value / x.value - 1.0).abs() <= 0.15, "k = {}: {}", e.k, e.value);
        }
    }

    #[test]
    fn entropy_is_monotone_and_seeded() {
        let (src, dst) = rate_pair();
        let ks: Vec<u32> = (1..=5).collect();
        let a = entropy_estimates(&src, &dst, &ks, CoverOptions::new(600, 3)).unwrap();
        let b = entropy_estimates(&src, &dst, &ks, CoverOptions::new(600, 3)).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1].value <= w[0].value));
        let cloud = unit_ball_cloud(&src, 600, 3).unwrap();
        let widest = cloud.iter().map(|x| dst.norm_of(x)).fold(0.0, f64::max);
        assert!(a[0].value <= widest);
        assert_eq!(a[4].centers_used, 16);
    }

    #[test]
    fn entropy_argument_checks() {
        let (src, dst) = rate_pair();
        let small = entropy_estimate(&src, &dst, 6, CoverOptions::new(20, 0)).unwrap_err();
        assert_eq!(small.kind(), "usage");
        let single = SeqSpaceParams::new(2.0, 1.0, two(), two(), 1.0, vec![1]).unwrap();
        let single_dst = SeqSpaceParams::new(1.0, 0.0, two(), two(), 1.0, vec![1]).unwrap();
        let err = entropy_rate_fit(&single, &single_dst, &[1, 2, 3, 4], CoverOptions::new(64, 0))
            .unwrap_err();
        assert_eq!(err.kind(), "usage");
        let err = entropy_rate_fit(&src, &dst, &[1, 2, 3], CoverOptions::new(64, 0)).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn exact_line_calculus() {
        let suite = tiny_calculus_suite().unwrap();
        let line = &suite[1];
        let checks = entropy_calculus_check(line, &[(1, 1), (2, 3)], CoverOptions::new(64, 0), 1.0).unwrap();
        assert!(checks.iter().all(|c| c.holds));
        // R∘T = 3·id: e_4 = 3/8 = e_2(R)·e_3(T)
        let mult = &checks[3];
        assert_eq!((mult.lhs, mult.rhs), (0.375, 0.375));
    }

    #[test]
    fn linear_map_algebra() {
        let a = LinearMap::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = LinearMap::diagonal(&[2.0, -1.0]);
        assert_eq!(a.compose(&b).unwrap().entries, vec![2.0, -2.0, 6.0, -4.0]);
        assert_eq!(a.add(&b).unwrap().entries, vec![3.0, 2.0, 3.0, 3.0]);
        assert_eq!(a.apply(&[1.0, 1.0]), vec![3.0, 7.0]);
    }
}
