//! The classical odd theta function, its derivatives, the degree-k basis and
//! the identity checks built on them.
//!
//! Every series here is a shifted Gaussian sum
//!
//! ```text
//! S(tau, w, c) = sum_{n in Z} exp(pi i tau (n+c)^2 + 2 pi i (n+c) w)
//! ```
//!
//! summed outward from the index closest to the Gaussian peak, so that large
//! `Im w` (deep in a fiber) costs no extra terms.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Real;

/// Smallest accepted imaginary part of a period. Below this the Gaussian decay
/// is too slow for direct summation to stay within a reasonable term budget.
pub const MIN_IM_TAU: f64 = 0.05;

/// Magnitude below which a theta value counts as a zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

/// A period in the upper half plane with `Im tau >= MIN_IM_TAU`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau<T>(Complex<T>);

impl<T: Real> Tau<T> {
    pub fn new(value: Complex<T>) -> Result<Self> {
        let floor = T::lit(MIN_IM_TAU);
        if !(value.im >= floor) || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidTau { im: value.im.as_f64(), floor: MIN_IM_TAU });
        }
        Ok(Self(value))
    }

    /// `tau = i`.
    pub fn i() -> Self {
        Self(Complex::new(T::zero(), T::one()))
    }

    pub fn value(&self) -> Complex<T> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy<T> {
    pub target_abs_error: T,
    pub max_terms: usize,
}

impl<T: Real> TruncationPolicy<T> {
    pub fn new(target_abs_error: T, max_terms: usize) -> Result<Self> {
        if !(target_abs_error > T::zero()) || !target_abs_error.is_finite() {
            return Err(Error::InvalidPolicy(format!(
                "target_abs_error must be positive, got {target_abs_error}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidPolicy("max_terms must be at least 1".into()));
        }
        Ok(Self { target_abs_error, max_terms })
    }

    /// Same term budget, target scaled by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.target_abs_error * factor, self.max_terms)
    }
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        Self { target_abs_error: T::lit(64.0) * T::epsilon(), max_terms: 2000 }
    }
}

/// A series value with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEvaluation<T> {
    pub value: Complex<T>,
    /// Number of summands actually added.
    pub terms_used: usize,
    /// Rigorous bound on the magnitude of the omitted tail.
    pub tail_bound: T,
}

impl<T: Real> ThetaEvaluation<T> {
    pub(crate) fn scale(self, factor: Complex<T>) -> Self {
        Self { value: self.value * factor, terms_used: self.terms_used, tail_bound: self.tail_bound * factor.norm() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl ModularMatrix {
    pub const IDENTITY: Self = Self { a: 1, b: 0, c: 0, d: 1 };
    /// `tau -> -1/tau`.
    pub const S: Self = Self { a: 0, b: -1, c: 1, d: 0 };
    /// `tau -> tau + 1`.
    pub const T: Self = Self { a: 1, b: 1, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(Error::InvalidModularMatrix { a, b, c, d, det });
        }
        Ok(Self { a, b, c, d })
    }
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Sums `sum_n (2 pi i (n+c))^order exp(pi i tau (n+c)^2 + 2 pi i (n+c) w)`.
///
/// The tail bound: with `m*` the peak position, `A = |m*|`, `D = N + 1/2` and
/// `b = Im tau`, every omitted term is at most
/// `g(d) = (2 pi (A+d))^r exp(pi b m*^2 - pi b d^2)` at distance `d >= D` from the
/// peak. Consecutive ratios are at most
/// `q = ((A+D+1)/(A+D))^r exp(-pi b (2D+1))`, so both tails together are below
/// `2 g(D) / (1-q)` once `q < 1` and `g` is decreasing past `D`.
pub(crate) fn gaussian_series<T: Real>(
    tau: Complex<T>,
    w: Complex<T>,
    shift: T,
    order: u32,
    policy: &TruncationPolicy<T>,
) -> Result<ThetaEvaluation<T>> {
    let pi = T::PI();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let b = tau.im;
    let peak = -w.im / b;
    let center = (peak - shift).round();
    let pi_i = Complex::new(T::zero(), pi);
    let r = T::lit(order as f64);

    let term = |n: T| -> Complex<T> {
        let m = n + shift;
        let mut value = (pi_i * tau * (m * m) + pi_i * w * (two * m)).exp();
        if order > 0 {
            value *= (pi_i * (two * m)).powu(order);
        }
        value
    };

    let amplitude = peak.abs();
    let log_peak = pi * b * peak * peak;
    let mut sum = term(center);
    let mut last_tail = T::infinity();
    for n in 0..=policy.max_terms {
        let nt = T::lit(n as f64);
        if n > 0 {
            sum += term(center + nt) + term(center - nt);
        }
        let d = nt + half;
        if two * pi * b * d * (amplitude + d) < r {
            continue;
        }
        let q = ((amplitude + d + T::one()) / (amplitude + d)).powf(r) * (-(pi * b * (two * d + T::one()))).exp();
        if q >= T::one() {
            continue;
        }
        let log_g = r * (two * pi * (amplitude + d)).ln() + log_peak - pi * b * d * d;
        let tail = two * log_g.exp() / (T::one() - q);
        last_tail = tail;
        if tail <= policy.target_abs_error {
            return Ok(ThetaEvaluation { value: sum, terms_used: 2 * n + 1, tail_bound: tail });
        }
    }
    Err(Error::NonConvergent { max_terms: policy.max_terms, tail_bound: last_tail.as_f64() })
}

/// The odd theta function `theta(z, tau)` with `theta(0) = 0`,
/// `theta(z+1) = -theta(z)` and `theta(z+tau) = -exp(-2 pi i z - pi i tau) theta(z)`.
pub fn theta11<T: Real>(z: Complex<T>, tau: Tau<T>, policy: &TruncationPolicy<T>) -> Result<ThetaEvaluation<T>> {
    let half = T::lit(0.5);
    gaussian_series(tau.value(), z + half, half, 0, policy)
}

/// `order`-th derivative of [`theta11`] in `z`, summed term by term.
pub fn theta11_deriv<T: Real>(
    z: Complex<T>,
    tau: Tau<T>,
    order: u32,
    policy: &TruncationPolicy<T>,
) -> Result<ThetaEvaluation<T>> {
    if order == 0 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    let half = T::lit(0.5);
    gaussian_series(tau.value(), z + half, half, order, policy)
}

fn check_degree_index(k: u32, p: u32) -> Result<()> {
    if k == 0 || p >= k {
        return Err(Error::InvalidArgument(format!("degree-k basis needs k >= 1 and 0 <= p < k, got k={k}, p={p}")));
    }
    Ok(())
}

/// `p`-th basis function of degree `k`:
/// `sum_n exp(pi i k tau (n + p/k + 1/2)^2 + 2 pi i k (n + p/k + 1/2)(z + 1/2))`.
///
/// Satisfies `f(z+1) = (-1)^k f(z)` and `f(z+tau) = (-1)^k exp(-k(2 pi i z + pi i tau)) f(z)`,
/// and reduces to [`theta11`] at `k = 1`.
pub fn theta_degree_basis<T: Real>(
    k: u32,
    p: u32,
    z: Complex<T>,
    tau: Tau<T>,
    policy: &TruncationPolicy<T>,
) -> Result<ThetaEvaluation<T>> {
    theta_degree_basis_deriv(k, p, z, tau, 0, policy)
}

/// `order`-th `z`-derivative of [`theta_degree_basis`]; `order = 0` is the value itself.
pub fn theta_degree_basis_deriv<T: Real>(
    k: u32,
    p: u32,
    z: Complex<T>,
    tau: Tau<T>,
    order: u32,
    policy: &TruncationPolicy<T>,
) -> Result<ThetaEvaluation<T>> {
    check_degree_index(k, p)?;
    let kt = T::lit(k as f64);
    let half = T::lit(0.5);
    let shift = T::lit(p as f64) / kt + half;
    let chain = kt.powi(order as i32);
    // the tail bound of the inner series is in units of the unscaled terms
    let target = policy.target_abs_error / chain;
    let inner = TruncationPolicy { target_abs_error: target, max_terms: policy.max_terms };
    let eval = gaussian_series(tau.value() * kt, (z + half) * kt, shift, order, &inner)?;
    Ok(eval.scale(Complex::new(chain, T::zero())))
}

/// Theta with characteristic `[0,0]`: `sum_n exp(pi i tau n^2 + 2 pi i n z)`.
pub fn theta_char00<T: Real>(z: Complex<T>, tau: Tau<T>, policy: &TruncationPolicy<T>) -> Result<ThetaEvaluation<T>> {
    gaussian_series(tau.value(), z, T::zero(), 0, policy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularCheck<T> {
    /// Mean of the sampled ratios.
    pub zeta_estimate: Complex<T>,
    /// Largest deviation of a single ratio from the mean.
    pub max_residual: T,
}

/// Samples `theta(z/(c tau+d), (a tau+b)/(c tau+d)) / [(c tau+d)^{1/2} exp(pi i c z^2/(c tau+d)) theta(z, tau)]`
/// with the principal square root.
pub fn modular_transform_check<T: Real>(
    z_samples: &[Complex<T>],
    tau: Tau<T>,
    m: ModularMatrix,
    policy: &TruncationPolicy<T>,
) -> Result<ModularCheck<T>> {
    if z_samples.is_empty() {
        return Err(Error::InvalidArgument("modular check needs at least one sample".into()));
    }
    ModularMatrix::new(m.a, m.b, m.c, m.d)?;
    let t = tau.value();
    let lift = |v: i64| Complex::new(T::from_int(v), T::zero());
    let denom = lift(m.c) * t + lift(m.d);
    if denom.norm() == T::zero() {
        return Err(Error::InvalidArgument("c tau + d vanishes".into()));
    }
    let tau_image = Tau::new((lift(m.a) * t + lift(m.b)) / denom)?;
    let root = denom.sqrt();
    let pi_i = i_unit::<T>() * T::PI();

    let mut ratios = Vec::with_capacity(z_samples.len());
    for &z in z_samples {
        let base = theta11(z, tau, policy)?.value;
        if base.norm() < T::lit(ZERO_THRESHOLD) {
            return Err(Error::SampleAtZero { re: z.re.as_f64(), im: z.im.as_f64() });
        }
        let image = theta11(z / denom, tau_image, policy)?.value;
        let factor = root * (pi_i * lift(m.c) * z * z / denom).exp();
        ratios.push(image / (factor * base));
    }
    let count = T::lit(ratios.len() as f64);
    let mean = ratios.iter().fold(Complex::new(T::zero(), T::zero()), |acc, r| acc + r) / count;
    let max_residual = ratios.iter().map(|r| (r - mean).norm()).fold(T::zero(), T::max);
    Ok(ModularCheck { zeta_estimate: mean, max_residual })
}

/// `|d theta/d tau - (1/(4 pi i)) d^2 theta/dz^2|`, the `tau` derivative by a
/// central difference along the real axis.
pub fn heat_equation_residual<T: Real>(
    z: Complex<T>,
    tau: Tau<T>,
    fd_step: T,
    policy: &TruncationPolicy<T>,
) -> Result<T> {
    if !(fd_step > T::zero()) || !(tau.value().im > fd_step) {
        return Err(Error::InvalidArgument(format!("finite-difference step {fd_step} must be positive and below Im tau")));
    }
    let h = Complex::new(fd_step, T::zero());
    let plus = theta11(z, Tau::new(tau.value() + h)?, policy)?.value;
    let minus = theta11(z, Tau::new(tau.value() - h)?, policy)?.value;
    let d_tau = (plus - minus) / (h * T::lit(2.0));
    let d_zz = theta11_deriv(z, tau, 2, policy)?.value;
    let four_pi_i = i_unit::<T>() * (T::lit(4.0) * T::PI());
    Ok((d_tau - d_zz / four_pi_i).norm())
}

/// Offsets tried in turn by [`count_zeros_fundamental_domain`].
pub const CONTOUR_OFFSETS: [(f64, f64); 3] = [(0.0371, 0.0213), (-0.0417, 0.0291), (0.0253, -0.0389)];

/// Winding number `(1/2 pi i) * contour integral of theta'/theta` around the
/// parallelogram `offset + [0,1] + [0,1] tau`. Returns the raw complex value.
pub fn argument_principle_winding<T: Real>(
    tau: Tau<T>,
    offset: Complex<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Complex<T>> {
    let t = tau.value();
    let one = Complex::new(T::one(), T::zero());
    let corners = [offset, offset + one, offset + one + t, offset + t];
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
    let mut total = Complex::new(T::zero(), T::zero());
    for edge in 0..4 {
        let start = corners[edge];
        let delta = corners[(edge + 1) % 4] - start;
        let integrand = |u: T| -> Result<Complex<T>> {
            let z = start + delta * u;
            let value = theta11(z, tau, policy)?.value;
            if value.norm() < T::lit(ZERO_THRESHOLD) {
                return Err(Error::ContourThroughZero { min_abs: value.norm().as_f64() });
            }
            let slope = theta11_deriv(z, tau, 1, policy)?.value;
            Ok(slope / value * delta)
        };
        total += adaptive_simpson(integrand, T::zero(), T::one(), tol, 40)?;
    }
    Ok(total / (i_unit::<T>() * (T::lit(2.0) * T::PI())))
}

/// Number of zeros of `theta(., tau)` in a fundamental parallelogram, by the
/// argument principle. Retries with the next offset in [`CONTOUR_OFFSETS`] when
/// a contour runs through a zero.
pub fn count_zeros_fundamental_domain<T: Real>(tau: Tau<T>, policy: &TruncationPolicy<T>) -> Result<i64> {
    let mut last_err = None;
    for (re, im) in CONTOUR_OFFSETS {
        match argument_principle_winding(tau, Complex::new(T::lit(re), T::lit(im)), policy) {
            Ok(winding) => return Ok(winding.re.round().to_i64().unwrap_or(i64::MAX)),
            Err(err @ Error::ContourThroughZero { .. }) => last_err = Some(err),
            Err(err) => return Err(err),
        }
    }
    Err(last_err.expect("at least one offset was tried"))
}
