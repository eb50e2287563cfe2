//! The limit density u(x,y,β) on the unit square, its one-dimensional CDF
//! in closed form, rectangle masses, and the two-parameter product density
//! ρ(x,y) = ∫₀¹ u(x,t,β)·u(t,y,γ) dt.
//!
//! All evaluation routes through a two-term exponential sum
//! `B = e^{A3}·exp_m1(β(1−y)) + e^{A4}·exp_m1(βy)` whose terms share the
//! sign of β, so no cancellation occurs for any β; u = 2β·sinh(β/2)/B².
//! Log-space assembly keeps log_u finite out to |β| = 1e4.

use crate::measure::Rect;
use crate::real::Real;
use crate::{Error, Result};

/// β parameter of the one-permutation limit density; any finite real,
/// β = 0 giving the uniform density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityParams<F> {
    pub beta: F,
}

impl<F: Real> DensityParams<F> {
    pub fn new(beta: F) -> Self {
        DensityParams { beta }
    }
}

/// (β, γ) parameters of the product density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoParams<F> {
    pub beta: F,
    pub gamma: F,
}

impl<F: Real> RhoParams<F> {
    pub fn new(beta: F, gamma: F) -> Self {
        RhoParams { beta, gamma }
    }

    /// β factor as standalone density parameters.
    pub fn first(&self) -> DensityParams<F> {
        DensityParams { beta: self.beta }
    }

    /// γ factor as standalone density parameters.
    pub fn second(&self) -> DensityParams<F> {
        DensityParams { beta: self.gamma }
    }
}

/// Absolute tolerance and subdivision budget for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig<F> {
    pub abs_tol: F,
    pub max_subdivisions: usize,
}

impl<F: Real> QuadratureConfig<F> {
    pub fn new(abs_tol: F, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > F::zero()) {
            return Err(Error::InvalidConfig("abs_tol must be positive".into()));
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be positive".into()));
        }
        Ok(QuadratureConfig { abs_tol, max_subdivisions })
    }
}

impl<F: Real> Default for QuadratureConfig<F> {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: F::of(1e-10),
            max_subdivisions: 4096,
        }
    }
}

/// Below this |β| the quadratic-over-quadratic form of u loses precision;
/// a first-order expansion takes over (error is O(β²) ≈ 1e−12 there).
const SMALL_BETA: f64 = 1e-6;

/// 16-point Gauss-Legendre nodes (positive abscissae) and weights.
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_440_185,
    0.281_603_550_779_258_913_230,
    0.458_016_777_657_227_386_342,
    0.617_876_244_402_643_748_447,
    0.755_404_408_355_003_033_895,
    0.865_631_202_387_831_743_880,
    0.944_575_023_073_232_576_078,
    0.989_400_934_991_649_932_596,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_496_285,
    0.182_603_415_044_923_588_867,
    0.169_156_519_395_002_538_189,
    0.149_595_988_816_576_732_081,
    0.124_628_971_255_533_872_052,
    0.095_158_511_682_492_784_810,
    0.062_253_523_938_647_892_863,
    0.027_152_459_411_754_094_852,
];

fn gl16<F: Real>(f: &impl Fn(F) -> F, a: F, b: F) -> F {
    let mid = (a + b) * F::of(0.5);
    let half = (b - a) * F::of(0.5);
    let mut sum = F::zero();
    for i in 0..8 {
        let dx = half * F::of(GL16_X[i]);
        sum = sum + F::of(GL16_W[i]) * (f(mid - dx) + f(mid + dx));
    }
    sum * half
}

/// ∫_lo^hi f, by Gauss-Legendre panels bisected until the refinement error
/// of each panel drops below its share of abs_tol.
pub fn integrate<F: Real>(
    f: impl Fn(F) -> F,
    lo: F,
    hi: F,
    quad: &QuadratureConfig<F>,
) -> Result<F> {
    if !(quad.abs_tol > F::zero()) {
        return Err(Error::InvalidConfig("abs_tol must be positive".into()));
    }
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "integration bounds out of order: {lo} > {hi}"
        )));
    }
    if lo == hi {
        return Ok(F::zero());
    }
    let whole = gl16(&f, lo, hi);
    let mut stack = vec![(lo, hi, whole, quad.abs_tol)];
    let mut total = F::zero();
    let mut splits = 0usize;
    while let Some((a, b, coarse, tol)) = stack.pop() {
        let m = (a + b) * F::of(0.5);
        if !(a < m && m < b) {
            // No representable midpoint; the panel cannot be refined further.
            total = total + coarse;
            continue;
        }
        let left = gl16(&f, a, m);
        let right = gl16(&f, m, b);
        let refined = left + right;
        if (refined - coarse).abs() <= tol {
            total = total + refined;
        } else {
            splits += 1;
            if splits > quad.max_subdivisions {
                let mut estimate = total + refined;
                for &(_, _, pending, _) in &stack {
                    estimate = estimate + pending;
                }
                return Err(Error::QuadratureDidNotConverge {
                    tol: quad.abs_tol.to_f64().unwrap_or(f64::NAN),
                    max_subdivisions: quad.max_subdivisions,
                    estimate: estimate.to_f64().unwrap_or(f64::NAN),
                });
            }
            let half_tol = tol * F::of(0.5);
            stack.push((a, m, left, half_tol));
            stack.push((m, b, right, half_tol));
        }
    }
    Ok(total)
}

/// ln|e^z − 1|, stable across the whole line: exp_m1 below 33, the
/// asymptotic z + ln(1 − e^{−z}) above (where exp_m1 would overflow for
/// large z and the direct ln is exact anyway).
fn ln_abs_expm1<F: Real>(z: F) -> F {
    if z > F::of(33.0) {
        z + (-((-z).exp())).ln_1p()
    } else {
        z.exp_m1().abs().ln()
    }
}

/// max + ln(e^{a−max} + e^{b−max}); tolerates one operand being −∞.
fn logsumexp2<F: Real>(a: F, b: F) -> F {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn logistic<F: Real>(t: F) -> F {
    if t >= F::zero() {
        F::one() / (F::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (F::one() + e)
    }
}

fn clamp01<F: Real>(v: F) -> F {
    v.max(F::zero()).min(F::one())
}

/// ln of the denominator sum |B| at canonical coordinates. y = 0 and y = 1
/// zero out one term exactly, so those branches skip the log-sum.
fn ln_abs_b<F: Real>(x: F, y: F, beta: F) -> F {
    let half = F::of(0.5);
    let s = x + y - F::one();
    let a3 = beta * (half * s - F::of(0.25));
    let a4 = beta * (-half * s - F::of(0.25));
    if y == F::zero() {
        return a3 + ln_abs_expm1(beta);
    }
    if y == F::one() {
        return a4 + ln_abs_expm1(beta);
    }
    let t1 = a3 + ln_abs_expm1(beta * (F::one() - y));
    let t2 = a4 + ln_abs_expm1(beta * y);
    logsumexp2(t1, t2)
}

/// ln u(x,y,β). Finite for |β| up to 1e4; exactly 0 at β = 0. Inputs are
/// clamped to [0,1] and canonicalized to x ≤ y, which makes the x↔y
/// symmetry hold at the bit level.
pub fn log_u<F: Real>(x: F, y: F, params: DensityParams<F>) -> F {
    let beta = params.beta;
    if beta == F::zero() {
        return F::zero();
    }
    let (x, y) = {
        let (a, b) = (clamp01(x), clamp01(y));
        if a <= b { (a, b) } else { (b, a) }
    };
    if beta.abs() < F::of(SMALL_BETA) {
        let two = F::of(2.0);
        let t = beta * (two * x - F::one()) * (two * y - F::one()) * F::of(0.5);
        return t.ln_1p();
    }
    let ab = beta.abs();
    // ln(2β·sinh(β/2)) = ln|β| + |β|/2 + ln(1 − e^{−|β|}).
    let ln_num = ab.ln() + ab * F::of(0.5) + ln_abs_expm1(-ab);
    ln_num - F::of(2.0) * ln_abs_b(x, y, beta)
}

/// u(x,y,β); 1 when β = 0. Evaluated as exp(log_u), so it may overflow to
/// ∞ for |β| beyond a few thousand even where log_u stays finite.
pub fn u_density<F: Real>(x: F, y: F, params: DensityParams<F>) -> F {
    let beta = params.beta;
    if beta == F::zero() {
        return F::one();
    }
    if beta.abs() < F::of(SMALL_BETA) {
        let two = F::of(2.0);
        let (x, y) = (clamp01(x), clamp01(y));
        return F::one() + beta * (two * x - F::one()) * (two * y - F::one()) * F::of(0.5);
    }
    log_u(x, y, params).exp()
}

/// ∫₀^y u(a,t,β) dt in closed form: the antiderivative of u in its second
/// argument collapses to a logistic of
/// −β(a+y−1) + ln|e^{βy}−1| − ln|e^{β(1−y)}−1|.
pub fn u_cdf<F: Real>(a: F, y: F, params: DensityParams<F>) -> F {
    let a = clamp01(a);
    let y = clamp01(y);
    if y == F::zero() {
        return F::zero();
    }
    if y == F::one() {
        return F::one();
    }
    let beta = params.beta;
    if beta == F::zero() {
        return y;
    }
    if beta.abs() < F::of(SMALL_BETA) {
        let two = F::of(2.0);
        return y + beta * (two * a - F::one()) * (y * y - y) * F::of(0.5);
    }
    let ln_r = -beta * (a + y - F::one()) + ln_abs_expm1(beta * y) - ln_abs_expm1(beta * (F::one() - y));
    logistic(ln_r)
}

/// ∫∫_r u dx dy: one quadrature over x of the CDF difference in y.
pub fn u_rect<F: Real>(r: &Rect<F>, params: DensityParams<F>, quad: &QuadratureConfig<F>) -> Result<F> {
    let (x1, x2, y1, y2) = (r.x1(), r.x2(), r.y1(), r.y2());
    if x1 == x2 || y1 == y2 {
        return Ok(F::zero());
    }
    integrate(
        |x| u_cdf(x, y2, params) - u_cdf(x, y1, params),
        x1,
        x2,
        quad,
    )
}

/// ρ(x,y) = ∫₀¹ u(x,t,β)·u(t,y,γ) dt by quadrature.
pub fn rho_density<F: Real>(x: F, y: F, params: RhoParams<F>, quad: &QuadratureConfig<F>) -> Result<F> {
    let pb = params.first();
    let pg = params.second();
    integrate(
        |t| u_density(x, t, pb) * u_density(t, y, pg),
        F::zero(),
        F::one(),
        quad,
    )
}

/// ∫∫_r ρ dx dy, collapsed to a single t-quadrature of the product of
/// closed-form CDF differences (no nested quadrature).
pub fn rho_rect<F: Real>(r: &Rect<F>, params: RhoParams<F>, quad: &QuadratureConfig<F>) -> Result<F> {
    let (x1, x2, y1, y2) = (r.x1(), r.x2(), r.y1(), r.y2());
    if x1 == x2 || y1 == y2 {
        return Ok(F::zero());
    }
    let pb = params.first();
    let pg = params.second();
    integrate(
        |t| {
            (u_cdf(t, x2, pb) - u_cdf(t, x1, pb)) * (u_cdf(t, y2, pg) - u_cdf(t, y1, pg))
        },
        F::zero(),
        F::one(),
        quad,
    )
}

/// y′ = u-mass of [0,b]×[0,y] divided by b: the second coordinate of the
/// rescaling that maps the strip [0,b] back to the unit square. Requires
/// 0 ≤ a < b ≤ 1 (a is the point being rescaled alongside y).
pub fn rescaled_point<F: Real>(
    a: F,
    b: F,
    y: F,
    params: DensityParams<F>,
    quad: &QuadratureConfig<F>,
) -> Result<F> {
    if !(F::zero() <= a && a < b && b <= F::one()) {
        return Err(Error::InvalidParameter(format!(
            "rescaling needs 0 <= a < b <= 1, got a={a}, b={b}"
        )));
    }
    let y = clamp01(y);
    let r = Rect::closed(F::zero(), b, F::zero(), y)?;
    Ok(u_rect(&r, params, quad)? / b)
}
