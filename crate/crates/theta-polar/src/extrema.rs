//! Certified extrema of real trigonometric polynomials in deviation form.
//!
//! Everything here works on the mean-free part `g(x) = sum_k 2 Re(a_k
//! e^(2*pi*i*k*x))`, `k >= 1`. Configuration sums live at `n + g`, and the
//! quantities of interest (polarization gaps, perturbation responses) have
//! the size of `g`, so carrying the deviation separately preserves full
//! relative precision where `n + g` would round it away.
//!
//! The search contract: evaluate `g` and `g'` on a uniform grid, bracket
//! every sign change of `g'`, shrink each bracket by bisection and finish
//! with Newton on `g'`. Global extrema are the best refined values; ties
//! within a noise tolerance are all reported.

use rayon::prelude::*;

use crate::numerics::{Complex, PrecisionContext, Real};

pub(crate) struct DeviationPoly {
    /// `(k, a_k)` with `k >= 1`, ascending, `a_k != 0`.
    terms: Vec<(u32, Complex)>,
}

impl DeviationPoly {
    pub fn new(mut terms: Vec<(u32, Complex)>) -> Self {
        terms.retain(|(k, a)| *k >= 1 && !a.is_zero());
        terms.sort_by_key(|(k, _)| *k);
        Self { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.last().map_or(0, |(k, _)| *k)
    }

    /// `sum_k 2|a_k|`, a sup-norm bound for `g`.
    pub fn coeff_scale(&self, ctx: &PrecisionContext) -> Real {
        let mut s = ctx.zero();
        for (_, a) in &self.terms {
            s = ctx.add(&s, &ctx.cabs(a));
        }
        ctx.scale2(&s, 1)
    }

    /// `a_k * z^k` for every term, sharing one power chain.
    fn products(&self, z: &Complex, ctx: &PrecisionContext) -> Vec<Complex> {
        let mut out = Vec::with_capacity(self.terms.len());
        let mut p = Complex::new(ctx.one(), ctx.zero());
        let mut cur = 0u32;
        for (k, a) in &self.terms {
            while cur < *k {
                p = ctx.cmul(&p, z);
                cur += 1;
            }
            out.push(ctx.cmul(a, &p));
        }
        out
    }

    pub fn eval(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        let z = self.unit_at(x, ctx);
        self.value_from(&self.products(&z, ctx), ctx)
    }

    fn unit_at(&self, x: &Real, ctx: &PrecisionContext) -> Complex {
        ctx.unit(&ctx.mul(&ctx.scale2(&ctx.pi(), 1), x))
    }

    fn value_from(&self, prods: &[Complex], ctx: &PrecisionContext) -> Real {
        let mut g = ctx.zero();
        for t in prods {
            g = ctx.add(&g, &t.re);
        }
        ctx.scale2(&g, 1)
    }

    /// `(g, g')` from a precomputed `z = e^(2*pi*i*x)`.
    fn value_deriv_from(&self, prods: &[Complex], ctx: &PrecisionContext) -> (Real, Real) {
        let mut g = ctx.zero();
        let mut d = ctx.zero();
        for ((k, _), t) in self.terms.iter().zip(prods) {
            g = ctx.add(&g, &t.re);
            d = ctx.add(&d, &ctx.mul(&ctx.from_u64(*k as u64), &t.im));
        }
        let four_pi = ctx.scale2(&ctx.pi(), 2);
        (ctx.scale2(&g, 1), ctx.mul(&four_pi, &d).neg())
    }

    /// `(g, g', g'')` at `x`.
    pub fn eval_d012(&self, x: &Real, ctx: &PrecisionContext) -> (Real, Real, Real) {
        let z = self.unit_at(x, ctx);
        let prods = self.products(&z, ctx);
        let (g, d) = self.value_deriv_from(&prods, ctx);
        let mut h = ctx.zero();
        for ((k, _), t) in self.terms.iter().zip(prods.iter()) {
            let k2 = ctx.from_u64(*k as u64 * *k as u64);
            h = ctx.add(&h, &ctx.mul(&k2, &t.re));
        }
        let pi2 = ctx.mul(&ctx.pi(), &ctx.pi());
        (g, d, ctx.mul(&ctx.scale2(&pi2, 3), &h).neg())
    }

    fn deriv_at(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        let z = self.unit_at(x, ctx);
        let prods = self.products(&z, ctx);
        self.value_deriv_from(&prods, ctx).1
    }
}

/// Value-noise scale for tie grouping: rounding of a single evaluation is
/// bounded by a small multiple of `(degree+2) * coeff_scale * 2^-work`.
pub(crate) fn noise_tie_tol(g: &DeviationPoly, ctx: &PrecisionContext) -> Real {
    let s = g.coeff_scale(ctx);
    let k = g.degree() as i64 + 2;
    ctx.mul(&s, &ctx.mul(&ctx.from_i64(k), &ctx.pow2(10 - ctx.work_bits() as i64)))
}

pub(crate) struct ScanOutcome {
    /// Tied global minima as `(location, deviation value)`, ascending locations.
    pub minima: Vec<(Real, Real)>,
    pub maxima: Vec<(Real, Real)>,
    pub enclosure_min: Real,
    pub enclosure_max: Real,
    /// The polynomial had no terms: the function is constant.
    pub degenerate: bool,
}

struct Critical {
    loc: Real,
    val: Real,
    radius: Real,
}

/// Grid-scan `g` on `m` uniform points, refine every bracketed root of `g'`,
/// and group global extrema tied within `tie_tol`.
pub(crate) fn scan_extrema(
    g: &DeviationPoly,
    m: usize,
    tie_tol: &Real,
    ctx: &PrecisionContext,
) -> ScanOutcome {
    if g.is_empty() {
        let z = (ctx.zero(), ctx.zero());
        return ScanOutcome {
            minima: vec![z.clone()],
            maxima: vec![z],
            enclosure_min: ctx.pow2(-1),
            enclosure_max: ctx.pow2(-1),
            degenerate: true,
        };
    }
    let m = m.max(64);
    let (gvals, dvals) = grid_eval(g, m, ctx);

    // Bracket sign changes of g' between consecutive grid points (cyclic).
    let inv_m = ctx.ratio(1, m as i64);
    let mut criticals: Vec<Critical> = Vec::new();
    for t in 0..m {
        let s0 = !dvals[t].is_negative();
        let s1 = !dvals[(t + 1) % m].is_negative();
        if s0 != s1 {
            let lo = ctx.mul(&ctx.from_u64(t as u64), &inv_m);
            let hi = ctx.mul(&ctx.from_u64(t as u64 + 1), &inv_m);
            criticals.push(refine_bracket(g, &lo, &hi, dvals[t].is_negative(), ctx));
        }
    }

    // Global extrema over refined criticals and (defensively) grid values.
    let mut min_val = gvals[0].clone();
    let mut max_val = gvals[0].clone();
    for v in &gvals[1..] {
        min_val = ctx.min_r(&min_val, v);
        max_val = ctx.max_r(&max_val, v);
    }
    for c in &criticals {
        min_val = ctx.min_r(&min_val, &c.val);
        max_val = ctx.max_r(&max_val, &c.val);
    }

    let half_cell = ctx.scale2(&inv_m, -1);
    let select = |target: &Real| -> (Vec<(Real, Real)>, Real) {
        let mut picked: Vec<(&Critical, bool)> = criticals
            .iter()
            .filter(|c| ctx.le(&ctx.sub(target, &c.val).abs(), tie_tol))
            .map(|c| (c, true))
            .collect();
        picked.sort_by(|a, b| ctx.cmp(&a.0.loc, &b.0.loc));
        let mut out: Vec<(Real, Real)> = Vec::new();
        let mut radius = ctx.zero();
        for (c, _) in &picked {
            // Merge duplicates refined from adjacent brackets (mod 1).
            let dup = out.iter().any(|(l, _)| {
                let d = ctx.reduce_center(&ctx.sub(l, &c.loc)).abs();
                ctx.le(&d, &ctx.scale2(&ctx.max_r(&c.radius, &half_cell), 3))
            });
            if !dup {
                out.push((c.loc.clone(), c.val.clone()));
                radius = ctx.max_r(&radius, &c.radius);
            }
        }
        if out.is_empty() {
            // Extremum observed only as a grid value (flat or missed basin):
            // report the best grid point with a whole-cell radius.
            let mut best_t = 0usize;
            for t in 1..m {
                if ctx.lt(
                    &ctx.sub(target, &gvals[t]).abs(),
                    &ctx.sub(target, &gvals[best_t]).abs(),
                ) {
                    best_t = t;
                }
            }
            out.push((
                ctx.mul(&ctx.from_u64(best_t as u64), &inv_m),
                gvals[best_t].clone(),
            ));
            radius = inv_m.clone();
        }
        (out, radius)
    };

    let (minima, enclosure_min) = select(&min_val);
    let (maxima, enclosure_max) = select(&max_val);
    ScanOutcome { minima, maxima, enclosure_min, enclosure_max, degenerate: false }
}

/// `(g, g')` on the uniform grid `t/m`. Points are processed in anchored
/// blocks of 256 — each block starts from a fresh `e^(2*pi*i*t/m)` — so the
/// values are identical no matter how blocks are scheduled across threads.
pub(crate) fn grid_eval(
    g: &DeviationPoly,
    m: usize,
    ctx: &PrecisionContext,
) -> (Vec<Real>, Vec<Real>) {
    const BLOCK: usize = 256;
    let two_pi = ctx.scale2(&ctx.pi(), 1);
    let omega = ctx.unit(&ctx.div(&two_pi, &ctx.from_u64(m as u64)));
    let starts: Vec<usize> = (0..m).step_by(BLOCK).collect();
    let blocks: Vec<Vec<(Real, Real)>> = starts
        .par_iter()
        .map(|&s| {
            let end = (s + BLOCK).min(m);
            let mut z = ctx.unit(&ctx.div(
                &ctx.mul(&two_pi, &ctx.from_u64(s as u64)),
                &ctx.from_u64(m as u64),
            ));
            let mut out = Vec::with_capacity(end - s);
            for _ in s..end {
                let prods = g.products(&z, ctx);
                out.push(g.value_deriv_from(&prods, ctx));
                z = ctx.cmul(&z, &omega);
            }
            out
        })
        .collect();
    let mut gvals = Vec::with_capacity(m);
    let mut dvals = Vec::with_capacity(m);
    for b in blocks {
        for (v, d) in b {
            gvals.push(v);
            dvals.push(d);
        }
    }
    (gvals, dvals)
}

/// Shrink a bracket `[lo, hi]` containing a sign change of `g'` and polish
/// with Newton. `neg_at_lo` records the sign of `g'` at `lo`.
fn refine_bracket(
    g: &DeviationPoly,
    lo: &Real,
    hi: &Real,
    neg_at_lo: bool,
    ctx: &PrecisionContext,
) -> Critical {
    let target = ctx.scale2(&ctx.eps(), 2);
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut x = ctx.scale2(&ctx.add(&lo, &hi), -1);
    let mut radius = ctx.scale2(&ctx.sub(&hi, &lo), -1);
    for _iter in 0..200 {
        if ctx.le(&radius, &target) {
            break;
        }
        let (_, d, h) = g.eval_d012(&x, ctx);
        // Maintain the bracket from the derivative sign at x.
        if d.is_negative() == neg_at_lo {
            lo = x.clone();
        } else {
            hi = x.clone();
        }
        let width = ctx.sub(&hi, &lo);
        let mut next: Option<Real> = None;
        if !h.is_zero() {
            let step = ctx.div(&d, &h);
            let cand = ctx.sub(&x, &step);
            if ctx.lt(&lo, &cand) && ctx.lt(&cand, &hi) {
                // Newton's own error estimate: the last step size.
                radius = ctx.min_r(&radius, &step.abs());
                next = Some(cand);
            }
        }
        x = match next {
            Some(c) => c,
            None => {
                radius = ctx.scale2(&width, -1);
                ctx.scale2(&ctx.add(&lo, &hi), -1)
            }
        };
    }
    let radius = ctx.max_r(&radius, &target);
    let loc = ctx.reduce_mod1(&x);
    let val = g.eval(&loc, ctx);
    Critical { loc, val, radius }
}

/// Polish a critical point of `g` from a nearby seed with plain Newton on
/// `g'`; used by warm-started evaluation paths that track basins across
/// small parameter changes. Returns `(location, value)`.
pub(crate) fn newton_polish(
    g: &DeviationPoly,
    seed: &Real,
    iters: usize,
    ctx: &PrecisionContext,
) -> (Real, Real) {
    let mut x = seed.clone();
    for _ in 0..iters {
        let (_, d, h) = g.eval_d012(&x, ctx);
        if h.is_zero() {
            break;
        }
        let step = ctx.div(&d, &h);
        x = ctx.sub(&x, &step);
    }
    let loc = ctx.reduce_mod1(&x);
    let val = g.eval(&loc, ctx);
    (loc, val)
}

/// Derivative sign of `g` at `x` (used by seed bracketing in fast paths).
pub(crate) fn deriv_at(g: &DeviationPoly, x: &Real, ctx: &PrecisionContext) -> Real {
    g.deriv_at(x, ctx)
}
