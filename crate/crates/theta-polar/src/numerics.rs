//! Fixed-precision real and complex arithmetic on top of `astro-float`,
//! decimal string I/O, and truncation budgeting for the theta series.
//!
//! Every computation in this crate runs through a [`PrecisionContext`]: a
//! mantissa width `m` plus `g` guard bits. Operations are carried out with
//! `m + g` working bits and round-to-even; accuracy claims elsewhere are
//! stated against `eps = 2^(g - m)`, so the guard bits are headroom between
//! the rounding floor of individual operations and the documented budget.
//!
//! [`Real`] is a thin newtype over `astro_float::BigFloat` that keeps the
//! "finite value" invariant: library code never produces NaN or infinity
//! from finite inputs, and the parsers reject non-finite literals.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign, Word};

use crate::error::Error;

/// Rounding mode used for every operation in the crate.
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working precision plus accuracy bookkeeping.
///
/// `mantissa_bits >= 64` is the precision results are claimed at;
/// `guard_bits >= 16` extra bits absorb rounding noise. The working
/// precision of every arithmetic operation is the sum of the two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    mantissa_bits: u32,
    guard_bits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self { mantissa_bits: 256, guard_bits: 32 }
    }
}

impl PrecisionContext {
    pub const MIN_MANTISSA_BITS: u32 = 64;
    pub const MIN_GUARD_BITS: u32 = 16;
    pub const DEFAULT_GUARD_BITS: u32 = 32;

    pub fn new(mantissa_bits: u32, guard_bits: u32) -> Result<Self, Error> {
        if mantissa_bits < Self::MIN_MANTISSA_BITS {
            return Err(Error::InvalidPrecision(format!(
                "mantissa_bits = {mantissa_bits}, minimum is {}",
                Self::MIN_MANTISSA_BITS
            )));
        }
        if guard_bits < Self::MIN_GUARD_BITS {
            return Err(Error::InvalidPrecision(format!(
                "guard_bits = {guard_bits}, minimum is {}",
                Self::MIN_GUARD_BITS
            )));
        }
        if mantissa_bits.saturating_add(guard_bits) > 1 << 20 {
            return Err(Error::InvalidPrecision(format!(
                "requested {mantissa_bits}+{guard_bits} bits exceeds the 2^20 cap"
            )));
        }
        Ok(Self { mantissa_bits, guard_bits })
    }

    /// Context with the given mantissa width and default guard bits.
    pub fn with_mantissa(mantissa_bits: u32) -> Result<Self, Error> {
        Self::new(mantissa_bits, Self::DEFAULT_GUARD_BITS)
    }

    /// Context sized for `digits` significant decimal digits:
    /// `mantissa_bits = ceil(digits * log2(10))`, clamped to the minimum.
    pub fn from_decimal_digits(digits: u32) -> Result<Self, Error> {
        if digits == 0 || digits > 250_000 {
            return Err(Error::InvalidPrecision(format!(
                "decimal digit request {digits} outside 1..=250000"
            )));
        }
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32;
        Self::new(bits.max(Self::MIN_MANTISSA_BITS), Self::DEFAULT_GUARD_BITS)
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Working precision in bits: mantissa plus guard.
    pub fn work_bits(&self) -> usize {
        (self.mantissa_bits + self.guard_bits) as usize
    }

    /// The accuracy unit results are documented against: `2^(guard - mantissa)`.
    pub fn eps(&self) -> Real {
        self.pow2(self.guard_bits as i64 - self.mantissa_bits as i64)
    }

    fn p(&self) -> usize {
        self.work_bits()
    }

    // --- constructors ---

    pub fn zero(&self) -> Real {
        Real(BigFloat::from_u64(0, self.p()))
    }

    pub fn one(&self) -> Real {
        Real(BigFloat::from_u64(1, self.p()))
    }

    pub fn from_u64(&self, v: u64) -> Real {
        Real(BigFloat::from_u64(v, self.p()))
    }

    pub fn from_i64(&self, v: i64) -> Real {
        Real(BigFloat::from_i64(v, self.p()))
    }

    pub fn from_f64(&self, v: f64) -> Real {
        debug_assert!(v.is_finite(), "from_f64 requires a finite value");
        Real(BigFloat::from_f64(v, self.p()))
    }

    /// Exact power of two.
    pub fn pow2(&self, k: i64) -> Real {
        let mut x = BigFloat::from_u64(1, self.p());
        // 1 is stored as 0.1b * 2^1; shifting the exponent is exact.
        x.set_exponent((k + 1).try_into().expect("pow2 exponent fits i32"));
        Real(x)
    }

    /// The rational `num/den` rounded once at working precision.
    pub fn ratio(&self, num: i64, den: i64) -> Real {
        debug_assert!(den != 0);
        let n = BigFloat::from_i64(num, self.p());
        let d = BigFloat::from_i64(den, self.p());
        Real(n.div(&d, self.p(), RM))
    }

    // --- arithmetic ---

    pub fn add(&self, a: &Real, b: &Real) -> Real {
        Real(a.0.add(&b.0, self.p(), RM))
    }

    pub fn sub(&self, a: &Real, b: &Real) -> Real {
        Real(a.0.sub(&b.0, self.p(), RM))
    }

    pub fn mul(&self, a: &Real, b: &Real) -> Real {
        Real(a.0.mul(&b.0, self.p(), RM))
    }

    pub fn div(&self, a: &Real, b: &Real) -> Real {
        debug_assert!(!b.is_zero(), "division by zero");
        Real(a.0.div(&b.0, self.p(), RM))
    }

    /// Multiply by an exact power of two (exponent shift, no rounding).
    pub fn scale2(&self, a: &Real, k: i64) -> Real {
        if a.is_zero() {
            return a.clone();
        }
        let mut x = a.0.clone();
        let e = x.exponent().expect("finite value has an exponent") as i64;
        x.set_exponent((e + k).try_into().expect("scale2 exponent fits i32"));
        Real(x)
    }

    pub fn powi(&self, a: &Real, n: usize) -> Real {
        Real(a.0.powi(n, self.p(), RM))
    }

    pub fn sqrt(&self, a: &Real) -> Real {
        debug_assert!(!a.is_negative(), "sqrt of a negative value");
        Real(a.0.sqrt(self.p(), RM))
    }

    pub fn exp(&self, a: &Real) -> Real {
        Real(with_consts(|cc| a.0.exp(self.p(), RM, cc)))
    }

    pub fn ln(&self, a: &Real) -> Real {
        debug_assert!(a.is_positive(), "ln of a non-positive value");
        Real(with_consts(|cc| a.0.ln(self.p(), RM, cc)))
    }

    pub fn cos(&self, a: &Real) -> Real {
        Real(with_consts(|cc| a.0.cos(self.p(), RM, cc)))
    }

    pub fn sin(&self, a: &Real) -> Real {
        Real(with_consts(|cc| a.0.sin(self.p(), RM, cc)))
    }

    pub fn pi(&self) -> Real {
        Real(with_consts(|cc| cc.pi(self.p(), RM)))
    }

    // --- comparisons ---

    pub fn cmp(&self, a: &Real, b: &Real) -> Ordering {
        let s = a.0.cmp(&b.0).expect("comparison of finite values");
        s.cmp(&0)
    }

    pub fn lt(&self, a: &Real, b: &Real) -> bool {
        self.cmp(a, b) == Ordering::Less
    }

    pub fn le(&self, a: &Real, b: &Real) -> bool {
        self.cmp(a, b) != Ordering::Greater
    }

    pub fn gt(&self, a: &Real, b: &Real) -> bool {
        self.cmp(a, b) == Ordering::Greater
    }

    pub fn ge(&self, a: &Real, b: &Real) -> bool {
        self.cmp(a, b) != Ordering::Less
    }

    pub fn min_r(&self, a: &Real, b: &Real) -> Real {
        if self.le(a, b) {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max_r(&self, a: &Real, b: &Real) -> Real {
        if self.ge(a, b) {
            a.clone()
        } else {
            b.clone()
        }
    }

    // --- range reduction ---

    pub fn floor(&self, a: &Real) -> Real {
        Real(a.0.floor())
    }

    /// Reduce to the fundamental domain `[0, 1)`.
    pub fn reduce_mod1(&self, x: &Real) -> Real {
        let f = self.sub(x, &self.floor(x));
        // x just below an integer can round up to exactly 1.
        if self.ge(&f, &self.one()) {
            self.sub(&f, &self.one())
        } else if f.is_negative() {
            self.add(&f, &self.one())
        } else {
            f
        }
    }

    /// Reduce to the centered domain `[-1/2, 1/2]`.
    pub fn reduce_center(&self, x: &Real) -> Real {
        let half = self.pow2(-1);
        let shifted = self.add(x, &half);
        let r = self.sub(&shifted, &self.floor(&shifted));
        self.sub(&r, &half)
    }

    // --- random ---

    /// Uniform draw from `[0, 1)` using whole words of the generator, so the
    /// value is reproducible for a given stream regardless of context.
    pub fn uniform_unit<R: rand::RngCore>(&self, rng: &mut R) -> Real {
        let words = self.p().div_ceil(64) + 1;
        let mut acc = self.zero();
        for i in 0..words {
            let w = self.from_u64(rng.next_u64());
            acc = self.add(&acc, &self.scale2(&w, -64 * (i as i64 + 1)));
        }
        acc
    }

    // --- parsing / formatting ---

    /// Parse a decimal literal (integer, fixed point, or scientific).
    pub fn parse(&self, s: &str) -> Result<Real, Error> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Parse(s.to_string()));
        }
        // astro-float accepts Inf/NaN spellings; keep the finite invariant.
        if t.chars().any(|c| c.is_ascii_alphabetic() && !matches!(c, 'e' | 'E')) {
            return Err(Error::Parse(s.to_string()));
        }
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, self.p(), RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::Parse(s.to_string()));
        }
        Ok(Real(v))
    }
}

/// A finite arbitrary-precision real. All operations go through a
/// [`PrecisionContext`]; the wrapper itself only exposes sign queries,
/// lossy conversion, and formatting.
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive()
    }

    pub fn neg(&self) -> Real {
        Real(self.0.neg())
    }

    pub fn abs(&self) -> Real {
        Real(self.0.abs())
    }

    /// Binary exponent `e` with `|x| in [2^(e-1), 2^e)`; `None` for zero.
    pub fn exponent2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            self.0.exponent().map(|e| e as i64)
        }
    }

    /// Nearest double, for diagnostics and coarse seeding only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let n = words.len();
        if n == 0 {
            return 0.0;
        }
        let wb = (std::mem::size_of::<Word>() * 8) as i32;
        let mut m = words[n - 1] as f64 * (2f64).powi(-wb);
        if n >= 2 {
            m += words[n - 2] as f64 * (2f64).powi(-2 * wb);
        }
        let v = m * (2f64).powi(exp);
        match sign {
            Sign::Neg => -v,
            Sign::Pos => v,
        }
    }

    /// Scientific decimal form with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        format_real(self, digits)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_real(self, 40))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", format_real(self, 12))
    }
}

/// Format as normalized scientific notation `d.dd...e<exp>` with `digits`
/// significant digits (round half up on the decimal expansion).
pub fn format_real(x: &Real, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_zero() {
        return "0".to_string();
    }
    let (sign, mut ds, mut exp) = with_consts(|cc| x.0.convert_to_radix(Radix::Dec, RM, cc))
        .expect("finite value converts to decimal");
    // Value is 0.d1 d2 ... * 10^exp; normalize away leading zeros.
    let first_nonzero = ds.iter().position(|&d| d != 0).unwrap_or(ds.len());
    ds.drain(..first_nonzero);
    exp -= first_nonzero as i32;
    if ds.is_empty() {
        return "0".to_string();
    }
    // Round to `digits` significant digits.
    if ds.len() > digits {
        let round_up = ds[digits] >= 5;
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    exp += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    } else {
        ds.resize(digits, 0);
    }
    let mut out = String::with_capacity(digits + 8);
    if sign == Sign::Neg {
        out.push('-');
    }
    out.push((b'0' + ds[0]) as char);
    if digits > 1 {
        out.push('.');
        for &d in &ds[1..] {
            out.push((b'0' + d) as char);
        }
    }
    out.push('e');
    out.push_str(&(exp - 1).to_string());
    out
}

/// Complex number with [`Real`] parts.
#[derive(Clone, Debug)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Self { re, im }
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        Self { re: ctx.zero(), im: ctx.zero() }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl PrecisionContext {
    pub fn cadd(&self, a: &Complex, b: &Complex) -> Complex {
        Complex { re: self.add(&a.re, &b.re), im: self.add(&a.im, &b.im) }
    }

    pub fn csub(&self, a: &Complex, b: &Complex) -> Complex {
        Complex { re: self.sub(&a.re, &b.re), im: self.sub(&a.im, &b.im) }
    }

    pub fn cmul(&self, a: &Complex, b: &Complex) -> Complex {
        let re = self.sub(&self.mul(&a.re, &b.re), &self.mul(&a.im, &b.im));
        let im = self.add(&self.mul(&a.re, &b.im), &self.mul(&a.im, &b.re));
        Complex { re, im }
    }

    pub fn cscale(&self, s: &Real, a: &Complex) -> Complex {
        Complex { re: self.mul(s, &a.re), im: self.mul(s, &a.im) }
    }

    /// Squared modulus.
    pub fn cabs2(&self, a: &Complex) -> Real {
        self.add(&self.mul(&a.re, &a.re), &self.mul(&a.im, &a.im))
    }

    pub fn cabs(&self, a: &Complex) -> Real {
        self.sqrt(&self.cabs2(a))
    }

    /// `exp(i * angle)`.
    pub fn unit(&self, angle: &Real) -> Complex {
        Complex { re: self.cos(angle), im: self.sin(angle) }
    }
}

/// Which truncated series a tail budget refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// `sum_k exp(-pi*alpha*(x+k)^2)`, truncated to `|k| <= K`.
    GaussianSpace,
    /// `1 + 2*sum_{k>=1} exp(-pi*alpha*k^2) cos(2*pi*k*x)`, truncated to `k <= K`.
    GaussianFrequency,
    /// Jacobi triple product, truncated to factors `k <= K` (relative bound).
    TripleProduct,
}

/// Proof-carrying truncation point: keeping terms up to `cutoff` leaves a
/// tail no larger than `tail_bound` (absolute for the Gaussian series,
/// relative for the triple product).
#[derive(Clone, Debug)]
pub struct TailBudget {
    pub kind: SeriesKind,
    pub cutoff: u32,
    pub tail_bound: Real,
}

/// Smallest cutoff `K` whose closed-form tail bound is at most `target`.
///
/// The bounds are geometric-series majorants:
/// frequency `2 e^(-pi a K^2) / (1 - e^(-pi a (2K+1)))`,
/// space `2 e^(-pi a (K+1/2)^2) / (1 - e^(-2 pi a (K+1)))`,
/// product `8 e^(-pi a (2K+1)) / (1 - e^(-2 pi a))`.
///
/// Requires `alpha > 0` and `target` in `(0, 1)`.
pub fn tail_cutoff(
    alpha: &Real,
    target: &Real,
    kind: SeriesKind,
    ctx: &PrecisionContext,
) -> Result<TailBudget, Error> {
    if !alpha.is_positive() {
        return Err(Error::InvalidParameter("tail_cutoff requires alpha > 0".into()));
    }
    if !target.is_positive() || !ctx.lt(target, &ctx.one()) {
        return Err(Error::InvalidParameter("tail_cutoff requires target in (0, 1)".into()));
    }

    let pi_alpha = ctx.mul(&ctx.pi(), alpha);
    let one = ctx.one();
    // None means the bound is not usable at this K (denominator rounded to <= 0),
    // which we treat as "larger than any target".
    let bound = |k: u32| -> Option<Real> {
        let kk = ctx.from_u64(k as u64);
        let (num_exp, den_exp) = match kind {
            SeriesKind::GaussianFrequency => {
                let e1 = ctx.mul(&pi_alpha, &ctx.mul(&kk, &kk));
                let e2 = ctx.mul(&pi_alpha, &ctx.from_u64(2 * k as u64 + 1));
                (e1, e2)
            }
            SeriesKind::GaussianSpace => {
                let kh = ctx.add(&kk, &ctx.pow2(-1));
                let e1 = ctx.mul(&pi_alpha, &ctx.mul(&kh, &kh));
                let e2 = ctx.mul(&ctx.scale2(&pi_alpha, 1), &ctx.from_u64(k as u64 + 1));
                (e1, e2)
            }
            SeriesKind::TripleProduct => {
                let e1 = ctx.mul(&pi_alpha, &ctx.from_u64(2 * k as u64 + 1));
                let e2 = ctx.scale2(&pi_alpha, 1);
                (e1, e2)
            }
        };
        let num = ctx.exp(&num_exp.neg());
        let den = ctx.sub(&one, &ctx.exp(&den_exp.neg()));
        if !den.is_positive() {
            return None;
        }
        let scale = match kind {
            SeriesKind::TripleProduct => 3,
            _ => 1,
        };
        Some(ctx.scale2(&ctx.div(&num, &den), scale))
    };
    let ok = |k: u32| -> bool { matches!(bound(k), Some(b) if ctx.le(&b, target)) };

    if ok(0) {
        return Ok(TailBudget { kind, cutoff: 0, tail_bound: bound(0).unwrap() });
    }
    // Exponential search for an admissible K, then binary search for the
    // smallest one (the bound is strictly decreasing in K).
    let mut hi: u32 = 1;
    while !ok(hi) {
        hi = hi.checked_mul(2).ok_or_else(|| {
            Error::InvalidParameter("tail_cutoff: no admissible cutoff below 2^32".into())
        })?;
    }
    let mut lo = hi / 2; // known to fail (or 0, which failed above)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(TailBudget { kind, cutoff: hi, tail_bound: bound(hi).unwrap() })
}
