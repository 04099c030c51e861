//! Polarization, covering, energy, and sampling-error functionals of a
//! configuration under the theta interaction.
//!
//! The shared representation is the deviation polynomial of the sum
//! `f(x) = sum_j theta(x - x_j; alpha)`: with `c_k = sum_j e^(-2*pi*i*k*x_j)`
//! and `w_k = e^(-pi*alpha*k^2)`,
//!
//! ```text
//! f(x) = n + sum_{k>=1} 2 Re(w_k c_k e^(2*pi*i*k*x)).
//! ```
//!
//! Extremum certificates report both `value` and `value_minus_mean`; the
//! latter is the quantity that stays fully accurate when `f` hugs its mean
//! `n` to within machine noise, which is exactly the regime near-equispaced
//! configurations live in.

use crate::config::{fourier_profile, Configuration};
use crate::error::Error;
use crate::extrema::{noise_tie_tol, scan_extrema, DeviationPoly};
use crate::numerics::{tail_cutoff, PrecisionContext, Real, SeriesKind};
use crate::theta::{theta_series, ThetaParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

/// A certified global extremum of a configuration sum.
#[derive(Clone, Debug)]
pub struct ExtremumCertificate {
    pub kind: ExtremumKind,
    /// Representative extremal location in `[0, 1)`.
    pub location: Real,
    /// Extremal value of the sum.
    pub value: Real,
    /// Extremal value minus the mean `n`; exact where `value` saturates.
    pub value_minus_mean: Real,
    /// Radius of the location enclosure.
    pub enclosure: Real,
    /// All tied extremal locations with their `value_minus_mean`, ascending.
    pub candidates: Vec<(Real, Real)>,
}

/// `sum_j theta(x - x_j; alpha)` evaluated pointwise, in configuration order.
pub fn config_sum(
    c: &Configuration,
    p: &ThetaParams,
    x: &Real,
    ctx: &PrecisionContext,
) -> Result<Real, Error> {
    let mut s = ctx.zero();
    for xj in c.points() {
        s = ctx.add(&s, &theta_series(&ctx.sub(x, xj), p, ctx)?);
    }
    Ok(s)
}

/// The same sum assembled from the truncated Fourier side; agrees with
/// [`config_sum`] to working precision and shares its truncation with the
/// extremum search.
pub fn config_sum_fourier(
    c: &Configuration,
    p: &ThetaParams,
    x: &Real,
    ctx: &PrecisionContext,
) -> Result<Real, Error> {
    let (g, _) = deviation_poly(c, p, ctx)?;
    Ok(ctx.add(&ctx.from_u64(c.n() as u64), &g.eval(x, ctx)))
}

/// Build the deviation polynomial of the configuration sum, truncated where
/// the weighted tail drops below one unit in the last working bit. Returns
/// the polynomial and the frequency cutoff used.
pub(crate) fn deviation_poly(
    c: &Configuration,
    p: &ThetaParams,
    ctx: &PrecisionContext,
) -> Result<(DeviationPoly, u32), Error> {
    let n = c.n() as u64;
    let target = ctx.div(
        &ctx.pow2(-(ctx.work_bits() as i64)),
        &ctx.from_u64(n),
    );
    let budget = tail_cutoff(p.alpha(), &target, SeriesKind::GaussianFrequency, ctx)?;
    let k_max = budget.cutoff.max(1);
    let prof = fourier_profile(c, k_max as usize, ctx)?;

    // Coefficients below the noise floor of the profile sums are arithmetic
    // junk (an exact zero lands at ~n*eps after n rounded additions); keep
    // them and the extremum search would chase pure rounding noise.
    let floor = ctx.mul(&ctx.from_u64(4 * n), &ctx.eps());

    let q = ctx.exp(&ctx.mul(&ctx.pi(), &p.alpha()).neg());
    let q2 = ctx.mul(&q, &q);
    let mut w = q.clone(); // w_k = q^(k^2)
    let mut u = ctx.mul(&q2, &q); // q^(2k+1)
    let mut terms = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let ck = prof.coeff(k as i64, ctx);
        if ctx.gt(&ctx.cabs(&ck), &floor) {
            terms.push((k, ctx.cscale(&w, &ck)));
        }
        if k < k_max {
            w = ctx.mul(&w, &u);
            u = ctx.mul(&u, &q2);
        }
    }
    Ok((DeviationPoly::new(terms), k_max))
}

/// Certified global minimum and maximum of the configuration sum.
pub fn certify_extrema(
    c: &Configuration,
    p: &ThetaParams,
    ctx: &PrecisionContext,
) -> Result<(ExtremumCertificate, ExtremumCertificate), Error> {
    let (g, k_max) = deviation_poly(c, p, ctx)?;
    let m = (32 * c.n() * k_max as usize).max(4096);
    let tie = noise_tie_tol(&g, ctx);
    let scan = scan_extrema(&g, m, &tie, ctx);
    let n_real = ctx.from_u64(c.n() as u64);

    let build = |kind: ExtremumKind, list: Vec<(Real, Real)>, enclosure: Real| {
        // Representative: best value, then smallest location.
        let mut best = 0usize;
        for i in 1..list.len() {
            let better = match kind {
                ExtremumKind::Min => ctx.lt(&list[i].1, &list[best].1),
                ExtremumKind::Max => ctx.gt(&list[i].1, &list[best].1),
            };
            if better {
                best = i;
            }
        }
        let (loc, dev) = list[best].clone();
        ExtremumCertificate {
            kind,
            location: loc,
            value: ctx.add(&n_real, &dev),
            value_minus_mean: dev,
            enclosure,
            candidates: list,
        }
    };

    Ok((
        build(ExtremumKind::Min, scan.minima, scan.enclosure_min),
        build(ExtremumKind::Max, scan.maxima, scan.enclosure_max),
    ))
}

/// Polarization: the certified global minimum of the configuration sum.
pub fn polarization(
    c: &Configuration,
    p: &ThetaParams,
    ctx: &PrecisionContext,
) -> Result<ExtremumCertificate, Error> {
    Ok(certify_extrema(c, p, ctx)?.0)
}

/// Covering value: the certified global maximum of the configuration sum.
pub fn covering_value(
    c: &Configuration,
    p: &ThetaParams,
    ctx: &PrecisionContext,
) -> Result<ExtremumCertificate, Error> {
    Ok(certify_extrema(c, p, ctx)?.1)
}

/// Average pair energy `(1/n) sum_j sum_k theta(x_j - x_k; alpha)`,
/// diagonal included. Always `>= n`, with equality only in the limit.
pub fn energy(
    c: &Configuration,
    p: &ThetaParams,
    ctx: &PrecisionContext,
) -> Result<Real, Error> {
    let mut s = ctx.zero();
    for xj in c.points() {
        for xk in c.points() {
            s = ctx.add(&s, &theta_series(&ctx.sub(xj, xk), p, ctx)?);
        }
    }
    Ok(ctx.div(&s, &ctx.from_u64(c.n() as u64)))
}

/// The mean-value chain `max_x f(x) >= (1/n) sum_j f(x_j) = energy`: returns
/// `(energy, covering certificate)` after checking the chain numerically.
pub fn mean_max_chain(
    c: &Configuration,
    p: &ThetaParams,
    ctx: &PrecisionContext,
) -> Result<(Real, ExtremumCertificate), Error> {
    let e = energy(c, p, ctx)?;
    let max_cert = covering_value(c, p, ctx)?;
    // Mathematically guaranteed; violation beyond rounding noise means a bug.
    let slack = ctx.mul(&ctx.from_u64(16 * c.n() as u64), &ctx.eps());
    assert!(
        ctx.ge(&ctx.add(&max_cert.value, &slack), &e),
        "covering maximum fell below the configuration mean energy"
    );
    Ok((e, max_cert))
}

/// Worst-case relative error when the mean of the heat evolution at time
/// `t` is estimated by sampling at the configuration points:
/// `max(f_max - n, n - f_min) / n` for `f` at `alpha = t`.
pub fn sampling_worst_case_error(
    c: &Configuration,
    t: &Real,
    ctx: &PrecisionContext,
) -> Result<Real, Error> {
    let p = ThetaParams::new(t.clone())?;
    let (min_cert, max_cert) = certify_extrema(c, &p, ctx)?;
    let worst = ctx.max_r(
        &max_cert.value_minus_mean,
        &min_cert.value_minus_mean.neg(),
    );
    Ok(ctx.div(&worst, &ctx.from_u64(c.n() as u64)))
}
