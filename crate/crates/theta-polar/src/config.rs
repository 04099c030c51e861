//! Periodic point configurations: canonicalization, Fourier profiles, and
//! the equispaced-plus-perturbation decomposition.

use rand::RngCore;
use serde::Deserialize;

use crate::error::Error;
use crate::numerics::{Complex, PrecisionContext, Real};

/// `n` strictly increasing points in `[0, 1)`, one period of the
/// configuration `Gamma = union_k (Z + x_k)`.
#[derive(Clone, Debug)]
pub struct Configuration {
    points: Vec<Real>,
}

impl Configuration {
    /// Canonicalize: reduce mod 1, sort, reject near-duplicates (cyclic
    /// gaps of at most `2*eps` make points indistinguishable at this
    /// precision).
    pub fn new(points: Vec<Real>, ctx: &PrecisionContext) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("configuration needs at least one point".into()));
        }
        let mut pts: Vec<Real> = points.iter().map(|x| ctx.reduce_mod1(x)).collect();
        pts.sort_by(|a, b| ctx.cmp(a, b));
        let sep = ctx.scale2(&ctx.eps(), 1);
        let n = pts.len();
        for j in 0..n {
            let gap = if j + 1 < n {
                ctx.sub(&pts[j + 1], &pts[j])
            } else if n > 1 {
                ctx.add(&ctx.sub(&pts[0], &pts[n - 1]), &ctx.one())
            } else {
                continue;
            };
            if ctx.le(&gap, &sep) {
                return Err(Error::InvalidParameter(format!(
                    "points {} and {} coincide within 2*eps",
                    j,
                    (j + 1) % n
                )));
            }
        }
        Ok(Self { points: pts })
    }

    /// The equispaced configuration `{0, 1/n, ..., (n-1)/n}`.
    pub fn equispaced(n: usize, ctx: &PrecisionContext) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidParameter("equispaced requires n >= 1".into()));
        }
        let points = (0..n).map(|j| ctx.ratio(j as i64, n as i64)).collect();
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Real] {
        &self.points
    }

    /// Shift every point by `t` (mod 1).
    pub fn translate(&self, t: &Real, ctx: &PrecisionContext) -> Result<Self, Error> {
        Self::new(self.points.iter().map(|x| ctx.add(x, t)).collect(), ctx)
    }

    /// Smallest cyclic gap.
    pub fn min_cyclic_gap(&self, ctx: &PrecisionContext) -> Real {
        let n = self.points.len();
        if n == 1 {
            return ctx.one();
        }
        let mut min = ctx.one();
        for j in 0..n {
            let gap = if j + 1 < n {
                ctx.sub(&self.points[j + 1], &self.points[j])
            } else {
                ctx.add(&ctx.sub(&self.points[0], &self.points[n - 1]), &ctx.one())
            };
            min = ctx.min_r(&min, &gap);
        }
        min
    }

    /// Uniform draw of `n` points conditioned on all cyclic gaps exceeding
    /// `min_gap` (rejection sampling).
    pub fn random<R: RngCore>(
        n: usize,
        min_gap: &Real,
        rng: &mut R,
        ctx: &PrecisionContext,
    ) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidParameter("random configuration requires n >= 1".into()));
        }
        if !ctx.lt(&ctx.mul(min_gap, &ctx.from_u64(n as u64)), &ctx.one()) {
            return Err(Error::InvalidParameter("min_gap * n must be below 1".into()));
        }
        for _ in 0..10_000 {
            let pts: Vec<Real> = (0..n).map(|_| ctx.uniform_unit(rng, )).collect();
            let Ok(c) = Self::new(pts, ctx) else { continue };
            if ctx.gt(&c.min_cyclic_gap(ctx), min_gap) {
                return Ok(c);
            }
        }
        Err(Error::InvalidParameter("rejection sampling failed; min_gap too demanding".into()))
    }

    /// Parse the points-file JSON body `{"n": 3, "points": ["0", "0.25", ...]}`.
    pub fn from_points_json(body: &str, ctx: &PrecisionContext) -> Result<Self, Error> {
        #[derive(Deserialize)]
        struct File {
            n: usize,
            points: Vec<String>,
        }
        let f: File = serde_json::from_str(body)
            .map_err(|e| Error::InvalidInput(format!("points file: {e}")))?;
        if f.points.len() != f.n {
            return Err(Error::InvalidInput(format!(
                "points file declares n={} but lists {} points",
                f.n,
                f.points.len()
            )));
        }
        let mut pts = Vec::with_capacity(f.n);
        for (i, s) in f.points.iter().enumerate() {
            let x = ctx
                .parse(s)
                .map_err(|_| Error::InvalidInput(format!("points[{i}]: cannot parse {s:?}")))?;
            pts.push(x);
        }
        Self::new(pts, ctx)
    }

    /// Serialize to the points-file JSON body with `digits` significant digits.
    pub fn to_points_json(&self, digits: usize) -> String {
        let points: Vec<String> = self.points.iter().map(|x| x.to_decimal(digits)).collect();
        serde_json::json!({ "n": self.n(), "points": points }).to_string()
    }
}

/// Exponential sums `c_k = sum_j exp(-2*pi*i*k*x_j)` for `0 <= k <= k_max`;
/// negative frequencies follow by conjugation.
#[derive(Clone, Debug)]
pub struct FourierProfile {
    coeffs: Vec<Complex>,
}

impl FourierProfile {
    pub fn k_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c_k` for any `|k| <= k_max`.
    pub fn coeff(&self, k: i64, _ctx: &PrecisionContext) -> Complex {
        let a = &self.coeffs[k.unsigned_abs() as usize];
        if k < 0 {
            a.conj()
        } else {
            a.clone()
        }
    }

    /// Largest magnitude over `1 <= k <= upto`, with its frequency.
    pub fn max_magnitude(&self, upto: usize, ctx: &PrecisionContext) -> (usize, Real) {
        let mut best_k = 1;
        let mut best = ctx.zero();
        for k in 1..=upto.min(self.k_max()) {
            let m = ctx.cabs(&self.coeffs[k]);
            if ctx.gt(&m, &best) {
                best = m;
                best_k = k;
            }
        }
        (best_k, best)
    }
}

/// Exponential sums of the configuration up to frequency `k_max`.
/// Per-coefficient error at most `4 * ctx.eps()`.
pub fn fourier_profile(
    c: &Configuration,
    k_max: usize,
    ctx: &PrecisionContext,
) -> Result<FourierProfile, Error> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("fourier_profile requires k_max >= 1".into()));
    }
    let n = c.n();
    let two_pi = ctx.scale2(&ctx.pi(), 1);
    // w_j = exp(-2*pi*i*x_j); powers advance one frequency at a time.
    let ws: Vec<Complex> = c
        .points()
        .iter()
        .map(|x| ctx.unit(&ctx.mul(&two_pi, x).neg()))
        .collect();
    let mut pow: Vec<Complex> = vec![Complex::new(ctx.one(), ctx.zero()); n];
    let mut coeffs = Vec::with_capacity(k_max + 1);
    coeffs.push(Complex::new(ctx.from_u64(n as u64), ctx.zero()));
    for _k in 1..=k_max {
        let mut acc = Complex::zero(ctx);
        for j in 0..n {
            pow[j] = ctx.cmul(&pow[j], &ws[j]);
            acc = ctx.cadd(&acc, &pow[j]);
        }
        coeffs.push(acc);
    }
    Ok(FourierProfile { coeffs })
}

/// A near-equispaced configuration written as slots plus shift plus sum-zero
/// residuals: `x_{permutation[j]} = j/n + shift + eps[j] (mod 1)`.
#[derive(Clone, Debug)]
pub struct PerturbationDecomposition {
    pub shift: Real,
    /// `permutation[j]` is the index (into the sorted points) of the point
    /// occupying slot `j`.
    pub permutation: Vec<usize>,
    pub eps: Vec<Real>,
    pub residual_norm: Real,
}

/// Decompose against the equispaced slots `j/n`. Requires every cyclic gap
/// to exceed `1/(2n)` (the near-equispaced regime); the rotation is chosen
/// to minimize the residual sum of squares, ties to the smallest rotation.
pub fn decompose(
    c: &Configuration,
    ctx: &PrecisionContext,
) -> Result<PerturbationDecomposition, Error> {
    let n = c.n();
    let required = ctx.ratio(1, 2 * n as i64);
    let min_gap = c.min_cyclic_gap(ctx);
    if ctx.le(&min_gap, &required) {
        return Err(Error::GapTooSmall {
            min_gap: min_gap.to_decimal(12),
            required: required.to_decimal(12),
        });
    }
    let inv_n = ctx.ratio(1, n as i64);
    let nn = ctx.from_u64(n as u64);
    let mut best: Option<(Real, Vec<Real>, Real, usize)> = None;
    for r in 0..n {
        // Unwrap one period starting at point r, so y_j is increasing.
        let mut ds = Vec::with_capacity(n);
        let mut mean = ctx.zero();
        for j in 0..n {
            let idx = (r + j) % n;
            let mut y = c.points()[idx].clone();
            if r + j >= n {
                y = ctx.add(&y, &ctx.one());
            }
            let d = ctx.sub(&y, &ctx.mul(&ctx.from_u64(j as u64), &inv_n));
            mean = ctx.add(&mean, &d);
            ds.push(d);
        }
        mean = ctx.div(&mean, &nn);
        let mut ss = ctx.zero();
        let mut eps = Vec::with_capacity(n);
        for d in &ds {
            let e = ctx.sub(d, &mean);
            ss = ctx.add(&ss, &ctx.mul(&e, &e));
            eps.push(e);
        }
        let better = match &best {
            None => true,
            Some((best_ss, ..)) => ctx.lt(&ss, best_ss),
        };
        if better {
            best = Some((ss, eps, mean, r));
        }
    }
    let (ss, eps, z, r) = best.expect("n >= 1 rotations examined");
    let permutation = (0..n).map(|j| (r + j) % n).collect();
    Ok(PerturbationDecomposition {
        shift: ctx.reduce_mod1(&z),
        permutation,
        eps,
        residual_norm: ctx.sqrt(&ss),
    })
}

/// Rebuild the configuration a decomposition describes.
pub fn reconstruct(
    d: &PerturbationDecomposition,
    ctx: &PrecisionContext,
) -> Result<Configuration, Error> {
    let n = d.permutation.len();
    let inv_n = ctx.ratio(1, n as i64);
    let mut pts = vec![ctx.zero(); n];
    for j in 0..n {
        let slot = ctx.mul(&ctx.from_u64(j as u64), &inv_n);
        let x = ctx.add(&ctx.add(&slot, &d.shift), &d.eps[j]);
        pts[d.permutation[j]] = ctx.reduce_mod1(&x);
    }
    Configuration::new(pts, ctx)
}
