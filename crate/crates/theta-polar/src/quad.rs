//! Gauss-Legendre quadrature at working precision.
//!
//! Nodes are the roots of the Legendre polynomial P_m, found by Newton
//! iteration from the classical cosine seeds; with the integrand split so
//! that each piece spans well under a wavelength, the m = 32 rule leaves
//! truncation error far below the 2^-work rounding floor of the contexts
//! used in this crate.

use crate::numerics::{PrecisionContext, Real};

pub(crate) struct GaussLegendre {
    /// Nodes in (-1, 1), ascending.
    nodes: Vec<Real>,
    weights: Vec<Real>,
}

/// P_m(x) and P_{m-1}(x) by the three-term recurrence.
fn legendre_pair(m: usize, x: &Real, ctx: &PrecisionContext) -> (Real, Real) {
    let mut p_prev = ctx.one();
    let mut p = x.clone();
    for j in 1..m {
        // (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
        let a = ctx.mul(&ctx.from_u64(2 * j as u64 + 1), &ctx.mul(x, &p));
        let b = ctx.mul(&ctx.from_u64(j as u64), &p_prev);
        let next = ctx.div(&ctx.sub(&a, &b), &ctx.from_u64(j as u64 + 1));
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

impl GaussLegendre {
    pub fn new(m: usize, ctx: &PrecisionContext) -> Self {
        assert!(m >= 2);
        let one = ctx.one();
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        // Newton converges quadratically from the cosine seed; iterations
        // sized to reach the working precision with margin.
        let iters = 6 + (ctx.work_bits() as f64).log2().ceil() as usize;
        for i in 1..=m {
            let seed =
                (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            let mut x = ctx.from_f64(seed);
            let mut dp = ctx.one();
            for _ in 0..iters {
                let (p, p_prev) = legendre_pair(m, &x, ctx);
                // P'_m(x) = m (x P_m - P_{m-1}) / (x^2 - 1)
                let num = ctx.mul(
                    &ctx.from_u64(m as u64),
                    &ctx.sub(&ctx.mul(&x, &p), &p_prev),
                );
                let den = ctx.sub(&ctx.mul(&x, &x), &one);
                dp = ctx.div(&num, &den);
                x = ctx.sub(&x, &ctx.div(&p, &dp));
            }
            let one_minus_x2 = ctx.sub(&one, &ctx.mul(&x, &x));
            let w = ctx.div(
                &ctx.from_u64(2),
                &ctx.mul(&one_minus_x2, &ctx.mul(&dp, &dp)),
            );
            nodes.push(x);
            weights.push(w);
        }
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate(
        &self,
        a: &Real,
        b: &Real,
        ctx: &PrecisionContext,
        mut f: impl FnMut(&Real) -> Real,
    ) -> Real {
        let half = ctx.pow2(-1);
        let mid = ctx.mul(&ctx.add(a, b), &half);
        let rad = ctx.mul(&ctx.sub(b, a), &half);
        let mut sum = ctx.zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = ctx.add(&mid, &ctx.mul(&rad, x));
            sum = ctx.add(&sum, &ctx.mul(w, &f(&t)));
        }
        ctx.mul(&sum, &rad)
    }
}
