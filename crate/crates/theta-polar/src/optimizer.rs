//! Search for extremal configurations: a brute-force grid oracle for tiny
//! `n`, a translation-quotiented local ascent, and a seeded multi-start
//! wrapper.
//!
//! The two objectives are `MaxMin` (maximize the polarization, the global
//! minimum of the configuration sum) and `MinMax` (minimize the covering
//! value, its global maximum). Inner extrema during a search are evaluated
//! by Newton polish from structural seeds — gap midpoints for minima,
//! configuration points for maxima — which is orders of magnitude cheaper
//! than a certified scan; the reported final value always comes from a full
//! [`certify_extrema`] pass on the winning configuration.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::config::{decompose, Configuration};
use crate::error::Error;
use crate::extrema::{newton_polish, DeviationPoly};
use crate::functionals::{certify_extrema, deviation_poly, ExtremumCertificate};
use crate::numerics::{PrecisionContext, Real};
use crate::theta::{theta_deriv, ThetaParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Maximize the polarization `min_x f(x)`.
    MaxMin,
    /// Minimize the covering value `max_x f(x)`.
    MinMax,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MaxMin => "max-min",
            Objective::MinMax => "min-max",
        }
    }

    fn minimize_inner(self) -> bool {
        matches!(self, Objective::MaxMin)
    }

    /// `true` when `a` is a better objective value than `b`.
    fn better(self, a: &Real, b: &Real, ctx: &PrecisionContext) -> bool {
        match self {
            Objective::MaxMin => ctx.gt(a, b),
            Objective::MinMax => ctx.lt(a, b),
        }
    }
}

/// Outcome of a search run.
#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub best: Configuration,
    pub objective: Objective,
    /// Certified objective value of `best`.
    pub value: Real,
    /// `residual_norm` of the perturbation decomposition of `best`, or
    /// `None` when `best` is not decomposable (far from equispaced).
    pub distance_to_equispaced: Option<Real>,
    /// `(iteration, value)` at every improvement, monotone in value.
    pub trace: Vec<(usize, Real)>,
    pub converged: bool,
}

/// Inner extremum of the configuration sum by Newton polish from seeds.
/// Returns `(location, deviation value, tied)` where `tied` reports a
/// second basin within value noise — the cue to distrust envelope
/// gradients.
fn inner_extremum(
    g: &DeviationPoly,
    seeds: &[Real],
    minimize: bool,
    ctx: &PrecisionContext,
) -> (Real, Real, bool) {
    if g.is_empty() {
        return (ctx.zero(), ctx.zero(), true);
    }
    let mut cands: Vec<(Real, Real)> = seeds
        .iter()
        .map(|s| newton_polish(g, s, 8, ctx))
        .collect();
    let mut best = 0usize;
    for i in 1..cands.len() {
        let better = if minimize {
            ctx.lt(&cands[i].1, &cands[best].1)
        } else {
            ctx.gt(&cands[i].1, &cands[best].1)
        };
        if better {
            best = i;
        }
    }
    let (loc, val) = cands.swap_remove(best);
    let tol = crate::extrema::noise_tie_tol(g, ctx);
    let sep = ctx.pow2(-20);
    let tied = cands.iter().any(|(l, v)| {
        ctx.le(&ctx.sub(v, &val).abs(), &tol)
            && ctx.gt(&ctx.reduce_center(&ctx.sub(l, &loc)).abs(), &sep)
    });
    (loc, val, tied)
}

/// Seeds for the inner search: gap midpoints for minima, the points
/// themselves for maxima.
fn inner_seeds(c: &Configuration, minimize: bool, ctx: &PrecisionContext) -> Vec<Real> {
    let pts = c.points();
    let n = pts.len();
    if minimize {
        (0..n)
            .map(|j| {
                let next = if j + 1 < n {
                    pts[j + 1].clone()
                } else {
                    ctx.add(&pts[0], &ctx.one())
                };
                ctx.scale2(&ctx.add(&pts[j], &next), -1)
            })
            .collect()
    } else {
        pts.to_vec()
    }
}

/// Objective value of `c` (full sum, `n + deviation`) by the fast path.
fn fast_objective(
    c: &Configuration,
    p: &ThetaParams,
    objective: Objective,
    ctx: &PrecisionContext,
) -> Result<(Real, Real, bool), Error> {
    let (g, _) = deviation_poly(c, p, ctx)?;
    let minimize = objective.minimize_inner();
    let (loc, dev, tied) = inner_extremum(&g, &inner_seeds(c, minimize, ctx), minimize, ctx);
    Ok((loc, ctx.add(&ctx.from_u64(c.n() as u64), &dev), tied))
}

fn certificate_for(
    c: &Configuration,
    p: &ThetaParams,
    objective: Objective,
    ctx: &PrecisionContext,
) -> Result<ExtremumCertificate, Error> {
    let (min_cert, max_cert) = certify_extrema(c, p, ctx)?;
    Ok(match objective {
        Objective::MaxMin => min_cert,
        Objective::MinMax => max_cert,
    })
}

fn distance_of(c: &Configuration, ctx: &PrecisionContext) -> Option<Real> {
    decompose(c, ctx).ok().map(|d| d.residual_norm)
}

/// Exhaustive grid search with `x_1` pinned at 0 and the remaining
/// coordinates swept over the sorted simplex in steps of `grid_step`.
///
/// Configurations are pre-ranked with a fast double-precision evaluation;
/// everything within a safety window of the apparent optimum is re-ranked
/// at working precision, and the winner is certified. Rejects `n > 4`
/// (combinatorial blowup) and `grid_step < 1e-4`.
pub fn brute_force_oracle(
    n: usize,
    p: &ThetaParams,
    grid_step: &Real,
    objective: Objective,
    ctx: &PrecisionContext,
) -> Result<OptimizationResult, Error> {
    if n == 0 || n > 4 {
        return Err(Error::InvalidParameter(
            "the brute-force oracle handles 1 <= n <= 4".into(),
        ));
    }
    if !grid_step.is_positive() || ctx.lt(grid_step, &ctx.ratio(1, 10_000)) {
        return Err(Error::InvalidParameter(
            "grid_step must be at least 1e-4".into(),
        ));
    }
    if n == 1 {
        let c = Configuration::equispaced(1, ctx)?;
        let cert = certificate_for(&c, p, objective, ctx)?;
        let trace = vec![(0usize, cert.value.clone())];
        return Ok(OptimizationResult {
            distance_to_equispaced: distance_of(&c, ctx),
            best: c,
            objective,
            value: cert.value,
            trace,
            converged: true,
        });
    }

    let h = grid_step.to_f64();
    let m = (1.0 / h).round() as usize;
    let alpha = p.alpha().to_f64();
    // f64 Fourier weights: enough terms for double precision.
    let k_max = ((40.0 / (std::f64::consts::PI * alpha)).sqrt().ceil() as usize).max(1);
    let minimize = objective.minimize_inner();

    // Enumerate sorted tuples 0 < i_2 < ... < i_n < m, score in f64.
    let mut idx: Vec<usize> = (1..n).collect();
    let mut scored: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut best_f64 = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
    loop {
        let mut xs = vec![0.0f64];
        xs.extend(idx.iter().map(|&i| i as f64 * h));
        let v = f64_extremum(&xs, alpha, k_max, minimize);
        let better = if minimize { v > best_f64 } else { v < best_f64 };
        // objective: MaxMin keeps the largest minimum, MinMax the smallest
        // maximum.
        if (objective == Objective::MaxMin && v > best_f64)
            || (objective == Objective::MinMax && v < best_f64)
        {
            best_f64 = v;
        }
        let _ = better;
        scored.push((idx.clone(), v));
        // Advance the sorted multi-index.
        let mut pos = n - 1;
        loop {
            if pos == 0 {
                break;
            }
            let cap = m - (n - 1 - pos);
            idx[pos - 1] += 1;
            if idx[pos - 1] < cap {
                for q in pos..n - 1 {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
    }

    // Shortlist everything within a window that comfortably covers the f64
    // evaluation error, then re-rank at working precision.
    let window = 1e-7;
    let inv_m = ctx.ratio(1, m as i64);
    let mut best: Option<(Vec<usize>, Real, Configuration)> = None;
    let mut trace: Vec<(usize, Real)> = Vec::new();
    for (count, (tuple, v)) in scored.iter().enumerate() {
        let close = if objective == Objective::MaxMin {
            *v >= best_f64 - window
        } else {
            *v <= best_f64 + window
        };
        if !close {
            continue;
        }
        let mut pts = vec![ctx.zero()];
        for &i in tuple {
            pts.push(ctx.mul(&ctx.from_u64(i as u64), &inv_m));
        }
        let c = Configuration::new(pts, ctx)?;
        let (_, val, _) = fast_objective(&c, p, objective, ctx)?;
        let improved = match &best {
            None => true,
            Some((_, bv, _)) => objective.better(&val, bv, ctx),
        };
        if improved {
            trace.push((count, val.clone()));
            best = Some((tuple.clone(), val, c));
        }
    }
    let (_, _, best_c) = best.expect("grid is nonempty");
    let cert = certificate_for(&best_c, p, objective, ctx)?;
    trace.push((scored.len(), cert.value.clone()));
    Ok(OptimizationResult {
        distance_to_equispaced: distance_of(&best_c, ctx),
        best: best_c,
        objective,
        value: cert.value,
        trace,
        converged: true,
    })
}

/// Double-precision inner extremum of `sum_j theta(x - x_j)` minus nothing:
/// returns the full-sum extremum value (mean `n` included) by a dense scan
/// plus parabolic refinement. Good to ~1e-9, which only has to rank grid
/// configurations whose values differ by far more.
fn f64_extremum(xs: &[f64], alpha: f64, k_max: usize, minimize: bool) -> f64 {
    let n = xs.len();
    let tau = std::f64::consts::TAU;
    // a_k = w_k * c_k
    let mut ak = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let w = (-std::f64::consts::PI * alpha * (k * k) as f64).exp();
        let (mut re, mut im) = (0.0, 0.0);
        for &x in xs {
            let (s, c) = (tau * k as f64 * x).sin_cos();
            re += c;
            im -= s;
        }
        ak.push((w * re, w * im));
    }
    let eval = |x: f64| -> f64 {
        let mut g = 0.0;
        for (k, (re, im)) in ak.iter().enumerate() {
            let (s, c) = (tau * (k + 1) as f64 * x).sin_cos();
            g += 2.0 * (re * c - im * s);
        }
        n as f64 + g
    };
    const M: usize = 512;
    let mut best_t = 0usize;
    let mut best_v = eval(0.0);
    for t in 1..M {
        let v = eval(t as f64 / M as f64);
        if (minimize && v < best_v) || (!minimize && v > best_v) {
            best_v = v;
            best_t = t;
        }
    }
    // Parabola through the winning sample and its neighbors.
    let x0 = best_t as f64 / M as f64;
    let dx = 1.0 / M as f64;
    let (vl, vc, vr) = (eval(x0 - dx), best_v, eval(x0 + dx));
    let denom = vl - 2.0 * vc + vr;
    if denom.abs() > 1e-300 {
        let shift = 0.5 * (vl - vr) / denom;
        if shift.abs() <= 1.0 {
            return eval(x0 + shift * dx);
        }
    }
    vc
}

/// Steepest-ascent search quotiented by translations: steps live in the
/// sum-zero perturbation coordinates, the gradient comes from the envelope
/// rule at the active inner extremum (finite differences when the extremum
/// ties across basins), and the step size doubles on success / halves on
/// rejection until it reaches the precision floor `2^(-mantissa/3)`.
pub fn local_ascent(
    start: &Configuration,
    p: &ThetaParams,
    objective: Objective,
    ctx: &PrecisionContext,
) -> Result<OptimizationResult, Error> {
    const MAX_ITER: usize = 500;
    let n = start.n();
    let n_real = ctx.from_u64(n as u64);
    let minimize = objective.minimize_inner();
    let accept_slack = ctx.mul(&ctx.from_u64(8 * n as u64), &ctx.eps());
    let s_min = ctx.pow2(-(ctx.mantissa_bits() as i64) / 3);
    let cap = ctx.ratio(1, 16 * n as i64);
    let fd_h = ctx.pow2(-(ctx.mantissa_bits() as i64) / 3);

    let mut current = start.clone();
    let (mut loc, mut value, mut tied) = fast_objective(&current, p, objective, ctx)?;
    let mut trace = vec![(0usize, value.clone())];
    let mut step = cap.clone();
    let mut converged = false;

    for iter in 1..=MAX_ITER {
        if ctx.lt(&step, &s_min) {
            converged = true;
            break;
        }
        // Gradient of the objective in point coordinates.
        let mut grad = Vec::with_capacity(n);
        if tied {
            // Envelope rule is ambiguous; central finite differences on the
            // objective itself.
            for j in 0..n {
                let mut plus = current.points().to_vec();
                plus[j] = ctx.reduce_mod1(&ctx.add(&plus[j], &fd_h));
                let mut minus = current.points().to_vec();
                minus[j] = ctx.reduce_mod1(&ctx.sub(&minus[j], &fd_h));
                let (fp, fm) = match (
                    Configuration::new(plus, ctx),
                    Configuration::new(minus, ctx),
                ) {
                    (Ok(cp), Ok(cm)) => (
                        fast_objective(&cp, p, objective, ctx)?.1,
                        fast_objective(&cm, p, objective, ctx)?.1,
                    ),
                    _ => (value.clone(), value.clone()),
                };
                grad.push(ctx.div(&ctx.sub(&fp, &fm), &ctx.scale2(&fd_h, 1)));
            }
        } else {
            for xj in current.points() {
                let d = theta_deriv(&ctx.sub(&loc, xj), p, ctx)?;
                grad.push(d.neg());
            }
        }
        // Project out the translation direction.
        let mut mean = ctx.zero();
        for g in &grad {
            mean = ctx.add(&mean, g);
        }
        mean = ctx.div(&mean, &n_real);
        let mut gmax = ctx.zero();
        for g in grad.iter_mut() {
            *g = ctx.sub(g, &mean);
            gmax = ctx.max_r(&gmax, &g.abs());
        }
        if gmax.is_zero() {
            step = ctx.scale2(&step, -1);
            continue;
        }
        //

        // Displacement capped at 1/(16n) regardless of gradient size.
        let mut scale = ctx.div(&step, &gmax);
        if ctx.gt(&ctx.mul(&scale, &gmax), &cap) {
            scale = ctx.div(&cap, &gmax);
        }
        let dir = if objective == Objective::MaxMin { 1i64 } else { -1 };
        let mut pts = Vec::with_capacity(n);
        for (xj, g) in current.points().iter().zip(&grad) {
            let d = ctx.mul(&scale, g);
            let d = if dir > 0 { d } else { d.neg() };
            pts.push(ctx.reduce_mod1(&ctx.add(xj, &d)));
        }
        let accepted = match Configuration::new(pts, ctx) {
            Err(_) => false,
            Ok(cand) => {
                let (nl, nv, nt) = fast_objective(&cand, p, objective, ctx)?;
                let improved = match objective {
                    Objective::MaxMin => ctx.ge(&nv, &ctx.add(&value, &accept_slack)),
                    Objective::MinMax => ctx.le(&nv, &ctx.sub(&value, &accept_slack)),
                };
                if improved {
                    current = cand;
                    loc = nl;
                    value = nv;
                    tied = nt;
                    trace.push((iter, value.clone()));
                }
                improved
            }
        };
        let _ = minimize;
        step = if accepted {
            ctx.min_r(&ctx.scale2(&step, 1), &cap)
        } else {
            ctx.scale2(&step, -1)
        };
    }

    let cert = certificate_for(&current, p, objective, ctx)?;
    trace.push((MAX_ITER + 1, cert.value.clone()));
    Ok(OptimizationResult {
        distance_to_equispaced: distance_of(&current, ctx),
        best: current,
        objective,
        value: cert.value,
        trace,
        converged,
    })
}

/// One sweep sample: `x1` against the fixed lattice `{1/n, ..., (n-1)/n}`.
#[derive(Clone, Debug)]
pub struct SweepCurve {
    /// `(x1, polarization)` on the uniform sample grid.
    pub samples: Vec<(Real, Real)>,
    /// Index of the sample with the largest polarization.
    pub argmax: usize,
    /// The maximum sits at the sample nearest 0 (mod 1), i.e. index 0.
    pub max_at_zero: bool,
}

/// Sweep the first point across `[0, 1)` on `m` uniform samples, the other
/// `n-1` points pinned at `k/n`, recording the polarization of each
/// configuration. Samples colliding with a pinned point are rejected as a
/// parameter error (choose `m` coprime to `n`).
pub fn one_point_sweep(
    n: usize,
    p: &ThetaParams,
    m: usize,
    ctx: &PrecisionContext,
) -> Result<SweepCurve, Error> {
    if n < 2 {
        return Err(Error::InvalidParameter("the sweep needs n >= 2".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    for i in 0..m {
        if i * n % m == 0 && i != 0 {
            return Err(Error::InvalidParameter(format!(
                "sample {i}/{m} collides with a lattice point; pick m coprime to n"
            )));
        }
    }
    let samples: Vec<(Real, Real)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x1 = ctx.ratio(i as i64, m as i64);
            let mut pts = vec![x1.clone()];
            for j in 1..n {
                pts.push(ctx.ratio(j as i64, n as i64));
            }
            let c = Configuration::new(pts, ctx)?;
            let (_, val, _) = fast_objective(&c, p, Objective::MaxMin, ctx)?;
            Ok((x1, val))
        })
        .collect::<Result<_, Error>>()?;
    let mut argmax = 0usize;
    for i in 1..m {
        if ctx.gt(&samples[i].1, &samples[argmax].1) {
            argmax = i;
        }
    }
    Ok(SweepCurve { samples, argmax, max_at_zero: argmax == 0 })
}

/// Independent местном ascents from `starts` random simplex draws (min gap
/// `1/(4n)`), reduced deterministically to the best result by value, ties
/// to the lexicographically smallest configuration.
pub fn multi_start(
    n: usize,
    p: &ThetaParams,
    objective: Objective,
    starts: usize,
    seed: u64,
    ctx: &PrecisionContext,
) -> Result<OptimizationResult, Error> {
    let runs = multi_start_runs(n, p, objective, starts, seed, ctx)?;
    let mut best = 0usize;
    for i in 1..runs.len() {
        let better = objective.better(&runs[i].value, &runs[best].value, ctx)
            || (!objective.better(&runs[best].value, &runs[i].value, ctx)
                && lex_less(&runs[i].best, &runs[best].best, ctx));
        if better {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("at least one start"))
}

/// All per-start results of a multi-start run, in start order. Start `i`
/// draws from stream `i` of a ChaCha20 generator seeded with `seed`, so
/// the list does not depend on scheduling.
pub fn multi_start_runs(
    n: usize,
    p: &ThetaParams,
    objective: Objective,
    starts: usize,
    seed: u64,
    ctx: &PrecisionContext,
) -> Result<Vec<OptimizationResult>, Error> {
    if starts == 0 {
        return Err(Error::InvalidParameter("need at least one start".into()));
    }
    let gap = ctx.ratio(1, 4 * n as i64);
    (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start = Configuration::random(n, &gap, &mut rng, ctx)?;
            local_ascent(&start, p, objective, ctx)
        })
        .collect()
}

fn lex_less(a: &Configuration, b: &Configuration, ctx: &PrecisionContext) -> bool {
    for (x, y) in a.points().iter().zip(b.points()) {
        if ctx.lt(x, y) {
            return true;
        }
        if ctx.gt(x, y) {
            return false;
        }
    }
    false
}
