//! The 1-periodic Jacobi theta function, its Gaussian periodization, and the
//! triple product form.
//!
//! `theta(x; alpha) = 1 + 2 * sum_{k>=1} exp(-pi*alpha*k^2) * cos(2*pi*k*x)`
//! is the heat kernel on the circle: positive, even, mean 1, maximal at 0 and
//! minimal at 1/2. Poisson summation identifies it with the periodized
//! Gaussian at the dual parameter: `theta(x; a) = a^(-1/2) * p_{1/a}(x)` with
//! `p_a(x) = sum_k exp(-pi*a*(x+k)^2)`.
//!
//! Every evaluator picks its truncation point through
//! [`numerics::tail_cutoff`](crate::numerics::tail_cutoff), aiming the tail
//! below the working-precision floor so the documented `4*eps` accuracy is
//! dominated by rounding, not truncation.

use crate::error::Error;
use crate::numerics::{tail_cutoff, PrecisionContext, Real, SeriesKind};

/// Gaussian width parameter `alpha > 0`.
#[derive(Clone, Debug)]
pub struct ThetaParams {
    alpha: Real,
}

impl ThetaParams {
    pub fn new(alpha: Real) -> Result<Self, Error> {
        if !alpha.is_positive() {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        Ok(Self { alpha })
    }

    pub fn from_f64(alpha: f64, ctx: &PrecisionContext) -> Result<Self, Error> {
        Self::new(ctx.from_f64(alpha))
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    /// The Poisson-dual parameter `1/alpha`.
    pub fn dual(&self, ctx: &PrecisionContext) -> Real {
        ctx.div(&ctx.one(), &self.alpha)
    }
}

/// Below this alpha the frequency series needs K ~ alpha^(-1/2) terms, so
/// evaluation switches to the space-domain dual sum.
fn below_dual_switch(alpha: &Real, ctx: &PrecisionContext) -> bool {
    ctx.lt(alpha, &ctx.ratio(1, 20))
}

/// theta(x; alpha) by the cosine series (or the Poisson dual for small alpha).
///
/// Absolute error at most `4 * ctx.eps()`.
pub fn theta_series(x: &Real, p: &ThetaParams, ctx: &PrecisionContext) -> Result<Real, Error> {
    if below_dual_switch(&p.alpha, ctx) {
        let dual = p.dual(ctx);
        let pg = periodized_gaussian(x, &dual, ctx)?;
        return Ok(ctx.div(&pg, &ctx.sqrt(&p.alpha)));
    }
    Ok(ctx.add(&ctx.one(), &theta_deviation(x, &p.alpha, ctx)?))
}

/// The mean-free part `2 * sum_{k=1..K} q^(k^2) cos(2*pi*k*x)`, `q = e^(-pi*alpha)`.
///
/// Exposed within the crate so polarization-scale quantities (which live at
/// the size of this deviation) never round against the constant term 1.
pub(crate) fn theta_deviation(
    x: &Real,
    alpha: &Real,
    ctx: &PrecisionContext,
) -> Result<Real, Error> {
    let target = ctx.pow2(-(ctx.work_bits() as i64));
    let budget = tail_cutoff(alpha, &target, SeriesKind::GaussianFrequency, ctx)?;
    let xr = ctx.reduce_center(x);
    let two_pi = ctx.scale2(&ctx.pi(), 1);
    let c1 = ctx.cos(&ctx.mul(&two_pi, &xr));

    let q = ctx.exp(&ctx.mul(&ctx.pi(), alpha).neg());
    let q2 = ctx.mul(&q, &q);
    // t_k = q^(k^2) via the odd-step chain t_{k+1} = t_k * u_k, u_k = q^(2k+1).
    let mut t = q.clone();
    let mut u = ctx.mul(&q2, &q);
    // cos(2*pi*k*x) by the Chebyshev recurrence.
    let mut c_prev = ctx.one();
    let mut c_cur = c1.clone();
    let mut sum = ctx.zero();
    for _k in 1..=budget.cutoff {
        sum = ctx.add(&sum, &ctx.mul(&t, &c_cur));
        t = ctx.mul(&t, &u);
        u = ctx.mul(&u, &q2);
        let c_next = ctx.sub(&ctx.mul(&ctx.scale2(&c1, 1), &c_cur), &c_prev);
        c_prev = c_cur;
        c_cur = c_next;
    }
    Ok(ctx.scale2(&sum, 1))
}

/// `p_alpha(x) = sum_{k in Z} exp(-pi*alpha*(x+k)^2)`, summed in the space
/// domain (no Poisson step). Relative error at the working-precision floor.
pub fn periodized_gaussian(x: &Real, alpha: &Real, ctx: &PrecisionContext) -> Result<Real, Error> {
    if !alpha.is_positive() {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let xr = ctx.reduce_center(x);
    let pi_alpha = ctx.mul(&ctx.pi(), alpha);
    // Central term; also a lower bound for the whole (positive) sum, so an
    // absolute tail target of t0 * 2^-work keeps the relative error at the floor.
    let t0 = ctx.exp(&ctx.mul(&pi_alpha, &ctx.mul(&xr, &xr)).neg());
    let target = ctx.mul(&t0, &ctx.pow2(-(ctx.work_bits() as i64)));
    let target = ctx.min_r(&target, &ctx.pow2(-(ctx.work_bits() as i64)));
    let budget = tail_cutoff(alpha, &target, SeriesKind::GaussianSpace, ctx)?;

    // exp(-pi*alpha*(x+k)^2) steps multiplicatively:
    // ratio_up(k) = exp(-pi*alpha*(2(x+k)+1)) and successive ratios shrink by
    // exp(-2*pi*alpha); the downward chain mirrors with x -> -x.
    let b = ctx.exp(&ctx.scale2(&pi_alpha, 1).neg());
    let two_x = ctx.scale2(&xr, 1);
    let mut up_ratio = ctx.exp(&ctx.mul(&pi_alpha, &ctx.add(&two_x, &ctx.one())).neg());
    let mut down_ratio = ctx.exp(&ctx.mul(&pi_alpha, &ctx.sub(&ctx.one(), &two_x)).neg());
    let mut up = t0.clone();
    let mut down = t0.clone();
    let mut sum = t0;
    for _k in 1..=budget.cutoff {
        up = ctx.mul(&up, &up_ratio);
        down = ctx.mul(&down, &down_ratio);
        sum = ctx.add(&sum, &ctx.add(&up, &down));
        up_ratio = ctx.mul(&up_ratio, &b);
        down_ratio = ctx.mul(&down_ratio, &b);
    }
    Ok(sum)
}

/// theta(x; alpha) by the Jacobi triple product
/// `prod_{k>=1} (1 - q^(2k)) (1 + 2cos(2*pi*x) q^(2k-1) + q^(2(2k-1)))`.
pub fn theta_product(x: &Real, p: &ThetaParams, ctx: &PrecisionContext) -> Result<Real, Error> {
    let target = ctx.pow2(-(ctx.work_bits() as i64));
    let budget = tail_cutoff(&p.alpha, &target, SeriesKind::TripleProduct, ctx)?;
    let xr = ctx.reduce_center(x);
    let two_pi = ctx.scale2(&ctx.pi(), 1);
    let c = ctx.scale2(&ctx.cos(&ctx.mul(&two_pi, &xr)), 1);

    let q = ctx.exp(&ctx.mul(&ctx.pi(), &p.alpha).neg());
    let q2 = ctx.mul(&q, &q);
    let one = ctx.one();
    let mut even = q2.clone(); // q^(2k)
    let mut odd = q.clone(); // q^(2k-1)
    let mut prod = ctx.one();
    for _k in 1..=budget.cutoff {
        let f1 = ctx.sub(&one, &even);
        let f2 = ctx.add(&ctx.add(&one, &ctx.mul(&c, &odd)), &ctx.mul(&odd, &odd));
        prod = ctx.mul(&prod, &ctx.mul(&f1, &f2));
        even = ctx.mul(&even, &q2);
        odd = ctx.mul(&odd, &q2);
    }
    Ok(prod)
}

/// Composite-midpoint quadrature of `int_0^1 theta(x; alpha) dx` with 2^12
/// nodes. The series has mean exactly 1, so this must return 1 within
/// quadrature tolerance; exposed as a self-check.
pub fn theta_mean_check(p: &ThetaParams, ctx: &PrecisionContext) -> Result<Real, Error> {
    let m: u32 = 1 << 12;
    let inv_m = ctx.ratio(1, m as i64);
    let mut sum = ctx.zero();
    for j in 0..m {
        let xj = ctx.mul(&ctx.add(&ctx.from_u64(j as u64), &ctx.pow2(-1)), &inv_m);
        sum = ctx.add(&sum, &theta_series(&xj, p, ctx)?);
    }
    Ok(ctx.mul(&sum, &inv_m))
}

/// d/dx theta(x; alpha) = -4*pi * sum_{k>=1} k q^(k^2) sin(2*pi*k*x)
/// (dual chain rule for small alpha). Used by the envelope gradient.
pub(crate) fn theta_deriv(x: &Real, p: &ThetaParams, ctx: &PrecisionContext) -> Result<Real, Error> {
    if below_dual_switch(&p.alpha, ctx) {
        // theta'(x; a) = a^(-1/2) * p'_{1/a}(x).
        let beta = p.dual(ctx);
        let d = periodized_gaussian_deriv(x, &beta, ctx)?;
        return Ok(ctx.div(&d, &ctx.sqrt(&p.alpha)));
    }
    let target = ctx.pow2(-(ctx.work_bits() as i64));
    let budget = tail_cutoff(&p.alpha, &target, SeriesKind::GaussianFrequency, ctx)?;
    let xr = ctx.reduce_center(x);
    let two_pi = ctx.scale2(&ctx.pi(), 1);
    let phi = ctx.mul(&two_pi, &xr);
    let c1 = ctx.cos(&phi);
    let s1 = ctx.sin(&phi);

    let q = ctx.exp(&ctx.mul(&ctx.pi(), &p.alpha).neg());
    let q2 = ctx.mul(&q, &q);
    let mut t = q.clone();
    let mut u = ctx.mul(&q2, &q);
    let mut c_prev = ctx.one();
    let mut c_cur = c1.clone();
    let mut s_prev = ctx.zero();
    let mut s_cur = s1;
    let mut sum = ctx.zero();
    for k in 1..=budget.cutoff {
        sum = ctx.add(&sum, &ctx.mul(&ctx.from_u64(k as u64), &ctx.mul(&t, &s_cur)));
        t = ctx.mul(&t, &u);
        u = ctx.mul(&u, &q2);
        let two_c1 = ctx.scale2(&c1, 1);
        let c_next = ctx.sub(&ctx.mul(&two_c1, &c_cur), &c_prev);
        let s_next = ctx.sub(&ctx.mul(&two_c1, &s_cur), &s_prev);
        c_prev = c_cur;
        c_cur = c_next;
        s_prev = s_cur;
        s_cur = s_next;
    }
    Ok(ctx.mul(&ctx.scale2(&two_pi, 1), &sum).neg())
}

/// d/dx p_beta(x) = sum_k -2*pi*beta*(x+k) * exp(-pi*beta*(x+k)^2).
fn periodized_gaussian_deriv(
    x: &Real,
    beta: &Real,
    ctx: &PrecisionContext,
) -> Result<Real, Error> {
    let xr = ctx.reduce_center(x);
    let pi_beta = ctx.mul(&ctx.pi(), beta);
    let t0 = ctx.exp(&ctx.mul(&pi_beta, &ctx.mul(&xr, &xr)).neg());
    // Absolute target well under the center-term scale; the polynomial
    // prefactor (x+k) is absorbed by an extra 2^-32 margin.
    let target = ctx.mul(&t0, &ctx.pow2(-(ctx.work_bits() as i64) - 32));
    let target = ctx.min_r(&target, &ctx.pow2(-(ctx.work_bits() as i64)));
    let budget = tail_cutoff(beta, &target, SeriesKind::GaussianSpace, ctx)?;

    let b = ctx.exp(&ctx.scale2(&pi_beta, 1).neg());
    let two_x = ctx.scale2(&xr, 1);
    let mut up_ratio = ctx.exp(&ctx.mul(&pi_beta, &ctx.add(&two_x, &ctx.one())).neg());
    let mut down_ratio = ctx.exp(&ctx.mul(&pi_beta, &ctx.sub(&ctx.one(), &two_x)).neg());
    let mut up = t0.clone();
    let mut down = t0.clone();
    let mut sum = ctx.mul(&xr, &t0);
    for k in 1..=budget.cutoff {
        up = ctx.mul(&up, &up_ratio);
        down = ctx.mul(&down, &down_ratio);
        let kk = ctx.from_u64(k as u64);
        sum = ctx.add(&sum, &ctx.mul(&ctx.add(&xr, &kk), &up));
        sum = ctx.add(&sum, &ctx.mul(&ctx.sub(&xr, &kk), &down));
        up_ratio = ctx.mul(&up_ratio, &b);
        down_ratio = ctx.mul(&down_ratio, &b);
    }
    Ok(ctx.mul(&ctx.scale2(&pi_beta, 1), &sum).neg())
}
