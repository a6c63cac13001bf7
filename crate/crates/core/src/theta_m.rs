//! The bundle theta function `theta_M(x,y,s,t) = theta(s + omega(x) t, omega(x)) theta(x + iy, i)`,
//! its multipliers under `Gamma`, shifted copies and their products, the
//! degree-k section basis, and the Kirwin-Uribe series on the
//! Kodaira-Thurston manifold.

use std::sync::OnceLock;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::bundles::{BundleType, Gen, GroupElement, Letter, TotalPoint};
use crate::error::{Constraint, Error, Result};
use crate::scalar::Real;
use crate::theta_core::{
    modular_transform_check, theta11, theta_char00, theta_degree_basis, ModularMatrix, Tau, ThetaEvaluation,
    TruncationPolicy,
};

/// Base point whose period `omega(x0)` feeds the numerical estimate of the
/// constant in the `a`-multiplier.
pub const ZETA_REFERENCE_X: f64 = 0.3;

/// Offsets (in units of `1e-3` along a fixed direction) tried when a base
/// point sits too close to a zero of `theta_M`.
const RETRY_STEPS: [f64; 3] = [1.0, -2.0, 3.0];

fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

fn real<T: Real>(v: T) -> Complex<T> {
    Complex::new(v, T::zero())
}

/// `-gamma omega + delta`, built componentwise so that `gamma = 0` leaves a `+0`
/// imaginary part and the principal root of a negative `delta` is `+i`, as in
/// the modular check that fixes `zeta`.
fn a_denominator<T: Real>(bundle: &BundleType<T>, w: Complex<T>) -> Complex<T> {
    let a = bundle.pair().a();
    let g = T::from_int(a.gamma());
    cplx(T::from_int(a.delta()) - g * w.re, T::zero() - g * w.im)
}

fn i_pi<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::PI())
}

/// Product of two certified evaluations, with the tail bounds combined to first order and the cross term.
pub(crate) fn product_eval<T: Real>(f: ThetaEvaluation<T>, g: ThetaEvaluation<T>) -> ThetaEvaluation<T> {
    ThetaEvaluation {
        value: f.value * g.value,
        terms_used: f.terms_used + g.terms_used,
        tail_bound: f.value.norm() * g.tail_bound + g.value.norm() * f.tail_bound + f.tail_bound * g.tail_bound,
    }
}

/// Nonzero automorphy factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierValue<T>(Complex<T>);

impl<T: Real> MultiplierValue<T> {
    pub fn new(value: Complex<T>) -> Result<Self> {
        if value.norm() == T::zero() || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidArgument(format!("multiplier must be finite and nonzero, got {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> Complex<T> {
        self.0
    }
}

/// A translation `(lambda, mu)` of the fiber and base arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPair<T> {
    pub lambda: Complex<T>,
    pub mu: Complex<T>,
}

impl<T: Real> ShiftPair<T> {
    pub fn new(lambda: Complex<T>, mu: Complex<T>) -> Self {
        Self { lambda, mu }
    }

    pub fn zero() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
    }
}

/// Index `(p, q)` of a degree-k basis section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectionIndex {
    k: u32,
    p: u32,
    q: u32,
}

impl SectionIndex {
    pub fn new(k: u32, p: u32, q: u32) -> Result<Self> {
        if k == 0 || p >= k || q >= k {
            return Err(Error::InvalidArgument(format!("section index needs 0 <= p, q < k, got k={k}, p={p}, q={q}")));
        }
        Ok(Self { k, p, q })
    }

    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn q(&self) -> u32 {
        self.q
    }

    /// All `k^2` indices in `(p, q)` lexicographic order.
    pub fn all(k: u32) -> Vec<Self> {
        (0..k).flat_map(|p| (0..k).map(move |q| Self { k, p, q })).collect()
    }
}

/// `theta_M` for one bundle, with the per-bundle modular constant cached on first use.
#[derive(Debug, Clone)]
pub struct ThetaM<T: Real> {
    bundle: BundleType<T>,
    policy: TruncationPolicy<T>,
    zeta: OnceLock<Complex<T>>,
}

impl<T: Real> ThetaM<T> {
    pub fn new(bundle: BundleType<T>, policy: TruncationPolicy<T>) -> Self {
        Self { bundle, policy, zeta: OnceLock::new() }
    }

    pub fn bundle(&self) -> &BundleType<T> {
        &self.bundle
    }

    pub fn policy(&self) -> &TruncationPolicy<T> {
        &self.policy
    }

    /// `(s + omega t, omega)` at `p`.
    pub fn fiber_argument(&self, p: TotalPoint<T>) -> Result<(Complex<T>, Tau<T>)> {
        let w = self.bundle.omega(p.x);
        Ok((w * p.t + p.s, Tau::new(w)?))
    }

    pub fn value(&self, p: TotalPoint<T>) -> Result<ThetaEvaluation<T>> {
        self.shifted(ShiftPair::zero(), p)
    }

    /// `theta(s + omega t + lambda, omega) theta(x + iy + mu, i)`.
    pub fn shifted(&self, shift: ShiftPair<T>, p: TotalPoint<T>) -> Result<ThetaEvaluation<T>> {
        let (z, tau) = self.fiber_argument(p)?;
        let fiber = theta11(z + shift.lambda, tau, &self.policy)?;
        let base = theta11(cplx(p.x, p.y) + shift.mu, Tau::i(), &self.policy)?;
        Ok(product_eval(fiber, base))
    }

    /// The constant in the `a`-multiplier. It is minus the ratio constant of the
    /// modular transformation `(alpha, -beta; -gamma, delta)` at `tau = omega(x0)`.
    pub fn zeta(&self) -> Result<Complex<T>> {
        if let Some(z) = self.zeta.get() {
            return Ok(*z);
        }
        let a = self.bundle.pair().a();
        let matrix = ModularMatrix::new(a.alpha(), -a.beta(), -a.gamma(), a.delta())?;
        let tau = Tau::new(self.bundle.omega(T::lit(ZETA_REFERENCE_X)))?;
        let samples: Vec<Complex<T>> = (0..5)
            .map(|j| {
                let u = T::lit(0.1 + 0.15 * j as f64);
                let v = T::lit(0.2 + 0.1 * j as f64);
                tau.value() * v + u
            })
            .collect();
        let check = modular_transform_check(&samples, tau, matrix, &self.policy)?;
        let value = -check.zeta_estimate;
        Ok(*self.zeta.get_or_init(|| value))
    }

    /// Closed-form automorphy factor `e_gen(p)`, so that `theta_M(gen p) = e_gen(p) theta_M(p)`.
    pub fn multiplier(&self, gen: Gen, p: TotalPoint<T>) -> Result<MultiplierValue<T>> {
        let w = self.bundle.omega(p.x);
        let z = w * p.t + p.s;
        let base = cplx(p.x, p.y);
        let two_pi_i = i_pi::<T>() * T::lit(2.0);
        let value = match gen {
            Gen::A => {
                let a = self.bundle.pair().a();
                let g = real(T::from_int(a.gamma()));
                let den = a_denominator(&self.bundle, w);
                self.zeta()? * den.sqrt() * (-i_pi::<T>() * g * z * z / den).exp()
            }
            Gen::B => {
                let e = (-two_pi_i * base + T::PI()).exp();
                if self.bundle.b_sign() > 0 {
                    -e
                } else {
                    e
                }
            }
            Gen::C => real(-T::one()),
            Gen::D => -(-two_pi_i * z - i_pi::<T>() * w).exp(),
        };
        MultiplierValue::new(value)
    }

    /// `e_{gen^n}(p)` telescoped along the orbit; negative powers use
    /// `e_{g^{-1}}(q) = 1 / e_g(g^{-1} q)`.
    pub fn letter_multiplier(&self, letter: Letter, p: TotalPoint<T>) -> Result<Complex<T>> {
        let step = Letter::new(letter.gen, letter.power.signum());
        let mut total = real(T::one());
        let mut q = p;
        for _ in 0..letter.power.unsigned_abs() {
            if letter.power > 0 {
                total *= self.multiplier(letter.gen, q)?.value();
                q = self.bundle.act_letter(step, q);
            } else {
                q = self.bundle.act_letter(step, q);
                total /= self.multiplier(letter.gen, q)?.value();
            }
        }
        Ok(total)
    }

    /// Multiplier of a word, rightmost letter first.
    pub fn word_multiplier(&self, word: &[Letter], p: TotalPoint<T>) -> Result<Complex<T>> {
        let mut total = real(T::one());
        let mut q = p;
        for &letter in word.iter().rev() {
            total *= self.letter_multiplier(letter, q)?;
            q = self.bundle.act_letter(letter, q);
        }
        Ok(total)
    }

    pub fn element_multiplier(&self, g: &GroupElement, p: TotalPoint<T>) -> Result<Complex<T>> {
        self.word_multiplier(&g.word(), p)
    }

    /// `|theta_M(gen p) - e_gen(p) theta_M(p)| / |theta_M(p)|`.
    pub fn verify_multiplier(&self, gen: Gen, p: TotalPoint<T>) -> Result<T> {
        let base = self.value(p)?.value;
        if base.norm() < T::lit(crate::theta_core::ZERO_THRESHOLD) {
            return Err(Error::NearZeroBase { magnitude: base.norm().as_f64() });
        }
        let moved = self.value(self.bundle.act_letter(Letter::new(gen, 1), p))?.value;
        let e = self.multiplier(gen, p)?.value();
        Ok((moved - e * base).norm() / base.norm())
    }

    /// [`Self::verify_multiplier`], moving `p` slightly when it sits on a zero of `theta_M`.
    /// Returns the point actually used.
    pub fn verify_multiplier_near(&self, gen: Gen, p: TotalPoint<T>) -> Result<(T, TotalPoint<T>)> {
        match self.verify_multiplier(gen, p) {
            Err(Error::NearZeroBase { .. }) => {}
            other => return other.map(|r| (r, p)),
        }
        let direction = [0.37, 0.61, 0.23, 0.89];
        let mut last = Error::NearZeroBase { magnitude: 0.0 };
        for step in RETRY_STEPS {
            let c = p.to_array();
            let moved = TotalPoint::from_array(std::array::from_fn(|i| c[i] + T::lit(1e-3 * step * direction[i])));
            match self.verify_multiplier(gen, moved) {
                Ok(r) => return Ok((r, moved)),
                Err(e @ Error::NearZeroBase { .. }) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    /// `|e_{g1}(g2 p) e_{g2}(p) - e_{g1 g2}(p)|` relative to the larger side.
    pub fn cocycle_check(&self, g1: &GroupElement, g2: &GroupElement, p: TotalPoint<T>) -> Result<T> {
        let lhs = self.element_multiplier(g1, self.bundle.act(g2, p))? * self.element_multiplier(g2, p)?;
        let rhs = self.element_multiplier(&self.bundle.compose(g1, g2), p)?;
        let scale = lhs.norm().max(rhs.norm());
        if scale == T::zero() {
            return Ok(T::zero());
        }
        Ok((lhs - rhs).norm() / scale)
    }

    /// For a word acting trivially on `R^4`, `|e_word(p) - 1|`.
    pub fn relator_residual(&self, word: &[Letter], p: TotalPoint<T>) -> Result<T> {
        Ok((self.word_multiplier(word, p)? - T::one()).norm())
    }

    fn check_shifts(&self, shifts: &[ShiftPair<T>]) -> Result<()> {
        if shifts.is_empty() {
            return Err(Error::InvalidArgument("a product needs at least one shift".into()));
        }
        let zero = real(T::zero());
        let lambda_sum = shifts.iter().fold(zero, |acc, s| acc + s.lambda);
        let mu_sum = shifts.iter().fold(zero, |acc, s| acc + s.mu);
        let square_sum = shifts.iter().fold(zero, |acc, s| acc + s.lambda * s.lambda);
        let scale_l = shifts.iter().fold(T::one(), |acc, s| acc + s.lambda.norm());
        let scale_m = shifts.iter().fold(T::one(), |acc, s| acc + s.mu.norm());
        let scale_q = shifts.iter().fold(T::one(), |acc, s| acc + s.lambda.norm_sqr());
        let tol = T::lit(1e-10);
        if lambda_sum.norm() > tol * scale_l {
            return Err(Error::ConstraintViolated { which: Constraint::FiberSum, magnitude: lambda_sum.norm().as_f64() });
        }
        if mu_sum.norm() > tol * scale_m {
            return Err(Error::ConstraintViolated { which: Constraint::BaseSum, magnitude: mu_sum.norm().as_f64() });
        }
        if self.bundle.pair().a().gamma() != 0 && square_sum.norm() > tol * scale_q {
            return Err(Error::ConstraintViolated {
                which: Constraint::FiberSquareSum,
                magnitude: square_sum.norm().as_f64(),
            });
        }
        Ok(())
    }

    /// Product of shifted copies. Requires `sum lambda = sum mu = 0`, and
    /// `sum lambda^2 = 0` when `gamma != 0`.
    pub fn product_section(&self, shifts: &[ShiftPair<T>], p: TotalPoint<T>) -> Result<ThetaEvaluation<T>> {
        self.check_shifts(shifts)?;
        self.product_section_unchecked(shifts, p)
    }

    /// [`Self::product_section`] without the constraint check, for negative controls.
    pub fn product_section_unchecked(&self, shifts: &[ShiftPair<T>], p: TotalPoint<T>) -> Result<ThetaEvaluation<T>> {
        let mut acc = ThetaEvaluation { value: real(T::one()), terms_used: 0, tail_bound: T::zero() };
        for &shift in shifts {
            acc = product_eval(acc, self.shifted(shift, p)?);
        }
        Ok(acc)
    }

    /// `|P(gen p) - e_gen(p)^k P(p)|` relative to the larger side, for the product `P`
    /// of `k` shifted copies. `checked = false` skips the constraint validation.
    pub fn product_law_residual(&self, shifts: &[ShiftPair<T>], gen: Gen, p: TotalPoint<T>, checked: bool) -> Result<T> {
        if checked {
            self.check_shifts(shifts)?;
        }
        let here = self.product_section_unchecked(shifts, p)?.value;
        if here.norm() < T::lit(crate::theta_core::ZERO_THRESHOLD) {
            return Err(Error::NearZeroBase { magnitude: here.norm().as_f64() });
        }
        let there = self.product_section_unchecked(shifts, self.bundle.act_letter(Letter::new(gen, 1), p))?.value;
        let e = self.multiplier(gen, p)?.value().powu(shifts.len() as u32);
        Ok(relative(there, e * here))
    }

    /// `theta_k^p(s + omega t, omega) theta_k^q(x + iy, i)`.
    pub fn basis_section(&self, idx: SectionIndex, p: TotalPoint<T>) -> Result<ThetaEvaluation<T>> {
        let (z, tau) = self.fiber_argument(p)?;
        let fiber = theta_degree_basis(idx.k, idx.p, z, tau, &self.policy)?;
        let base = theta_degree_basis(idx.k, idx.q, cplx(p.x, p.y), Tau::i(), &self.policy)?;
        Ok(product_eval(fiber, base))
    }
}

/// `log e_gen(p)` along an explicit continuous branch, so that
/// `exp(log_multiplier) = e_gen(p)` up to a `p`-independent factor:
///
/// * `c`: `pi i`
/// * `d`: `-2 pi i (s + omega t) - pi i omega + pi i`
/// * `b`: `-2 pi i (x + iy) + pi (+ pi i when B = I)`
/// * `a`: `Log(-gamma omega + delta)/2 - pi i gamma Z^2/(-gamma omega + delta)`; the constant `log zeta` is dropped.
///
/// Constants cancel in the four-term Chern combination, where each generator
/// appears once with each sign.
pub fn log_multiplier<T: Real>(bundle: &BundleType<T>, gen: Gen, p: TotalPoint<T>) -> Result<Complex<T>> {
    let w = bundle.omega(p.x);
    let z = w * p.t + p.s;
    let two_pi_i = i_pi::<T>() * T::lit(2.0);
    Ok(match gen {
        Gen::C => i_pi(),
        Gen::D => -two_pi_i * z - i_pi::<T>() * w + i_pi::<T>(),
        Gen::B => {
            let core = -two_pi_i * cplx(p.x, p.y) + T::PI();
            if bundle.b_sign() > 0 {
                core + i_pi::<T>()
            } else {
                core
            }
        }
        Gen::A => {
            let a = bundle.pair().a();
            let g = real(T::from_int(a.gamma()));
            let den = a_denominator(bundle, w);
            if a.gamma() != 0 && den.im.abs() < T::lit(1e-12) && den.re < T::zero() {
                return Err(Error::BranchAmbiguous);
            }
            den.ln() / T::lit(2.0) - i_pi::<T>() * g * z * z / den
        }
    })
}

/// Solves `x^2 + S x + (S^2 + alpha^2 + beta^2)/2 = 0`, `S = alpha + beta`, whose
/// roots make `alpha + beta + gamma + delta = 0` and
/// `alpha^2 + beta^2 + gamma^2 + delta^2 = 0`.
pub fn solve_shift_constraints<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> (Complex<T>, Complex<T>) {
    let two = T::lit(2.0);
    let s = alpha + beta;
    let disc = -(s * s) - (alpha * alpha + beta * beta) * two;
    let root = disc.sqrt();
    ((-s + root) / two, (-s - root) / two)
}

/// Sums `sum_j term(j)` over integers `j`, where `|term(j)| <= exp(-2 pi (j - center)^2)`.
fn unit_gaussian_sum<T: Real>(
    center: T,
    term: impl Fn(T) -> Complex<T>,
    policy: &TruncationPolicy<T>,
) -> Result<ThetaEvaluation<T>> {
    let two_pi = T::lit(2.0) * T::PI();
    let half = T::lit(0.5);
    let j0 = (-center).round();
    let mut sum = term(j0);
    let mut tail = T::infinity();
    for n in 0..=policy.max_terms {
        let nt = T::lit(n as f64);
        if n > 0 {
            sum += term(j0 + nt) + term(j0 - nt);
        }
        let d = nt + half;
        tail = T::lit(2.0) * (-two_pi * d * d).exp() / (T::one() - (-two_pi * (T::lit(2.0) * d + T::one())).exp());
        if tail <= policy.target_abs_error {
            return Ok(ThetaEvaluation { value: sum, terms_used: 2 * n + 1, tail_bound: tail });
        }
    }
    Err(Error::NonConvergent { max_terms: policy.max_terms, tail_bound: tail.as_f64() })
}

/// The Kirwin-Uribe function on the Kodaira-Thurston manifold for the Gaussian
/// `f(x, t) = exp(-2 pi x^2) exp(-2 pi t^2)`, at a point `(x, y, z, t)` carried in
/// `TotalPoint` with `s` playing the role of `z`:
///
/// ```text
/// exp(-2 pi i [m y - n (z + x y)] + 4 pi i k z x)
///   * sum_{a,b} exp(2 pi i n y a - 4 pi i k (b y - z a - y (x+a)^2 / 2)) f(x + a, t + b)
/// ```
///
/// The `+4 pi i k z x` sign is the one for which the function is invariant under
/// `x -> x + 1` and picks up `exp(4 pi i k x)` under `z -> z + 1`.
pub fn ku_theta<T: Real>(k: u32, m: u32, n: u32, p: TotalPoint<T>, policy: &TruncationPolicy<T>) -> Result<ThetaEvaluation<T>> {
    if k == 0 || m >= 2 * k || n >= 2 * k {
        return Err(Error::InvalidArgument(format!("need k >= 1 and 0 <= m, n < 2k, got k={k}, m={m}, n={n}")));
    }
    let (x, y, z, t) = (p.x, p.y, p.s, p.t);
    let (kt, mt, nt) = (T::lit(k as f64), T::lit(m as f64), T::lit(n as f64));
    let two_pi = T::lit(2.0) * T::PI();
    let i = cplx(T::zero(), T::one());
    // separable: exponent = 2 pi i [n y a + 2 k z a + k y (x+a)^2] - 4 pi i k b y
    let a_sum = unit_gaussian_sum(
        x,
        |a| {
            let xa = x + a;
            let phase = two_pi * (nt * y * a + T::lit(2.0) * kt * z * a + kt * y * xa * xa);
            (i * phase).exp() * (-two_pi * xa * xa).exp()
        },
        policy,
    )?;
    let b_sum = unit_gaussian_sum(
        t,
        |b| {
            let tb = t + b;
            (i * (-T::lit(2.0) * two_pi * kt * b * y)).exp() * (-two_pi * tb * tb).exp()
        },
        policy,
    )?;
    let prefactor = (i * (-two_pi * (mt * y - nt * (z + x * y)) + T::lit(2.0) * two_pi * kt * z * x)).exp();
    Ok(product_eval(a_sum, b_sum).scale(prefactor))
}

fn ku_theta_factors<T: Real>(p: TotalPoint<T>, policy: &TruncationPolicy<T>) -> Result<Complex<T>> {
    let (x, y, z, t) = (p.x, p.y, p.s, p.t);
    let two = T::lit(2.0);
    let first = theta_char00((cplx(z, T::zero()) + cplx(y, T::one()) * x) * two, Tau::new(cplx(y, T::one()) * two)?, policy)?;
    let second = theta_char00(cplx(-y, t) * two, Tau::new(cplx(T::zero(), two))?, policy)?;
    Ok(first.value * second.value)
}

/// Relative residual of the product formula
/// `ku_theta(1,0,0) = exp(-4 pi i z x - 2 pi t^2 - 2 pi x^2) theta00(2(z+(y+i)x), 2(y+i)) theta00(2(-y+it), 2i)`.
pub fn ku_cross_check<T: Real>(p: TotalPoint<T>, policy: &TruncationPolicy<T>) -> Result<T> {
    let (x, z, t) = (p.x, p.s, p.t);
    let two_pi = T::lit(2.0) * T::PI();
    let lhs = ku_theta(1, 0, 0, p, policy)?.value;
    let gauss = cplx(-two_pi * (t * t + x * x), -T::lit(2.0) * two_pi * z * x).exp();
    let rhs = gauss * ku_theta_factors(p, policy)?;
    Ok(relative(lhs, rhs))
}

/// Closed form of `ku_theta(1, 0, 0)` obtained by completing the square in each sum:
/// `exp(4 pi i z x + 2 pi i y x^2 - 2 pi x^2 - 2 pi t^2) theta00(2(z+(y+i)x), 2(y+i)) theta00(2(-y+it), 2i)`.
pub fn ku_closed_form<T: Real>(p: TotalPoint<T>, policy: &TruncationPolicy<T>) -> Result<Complex<T>> {
    let (x, y, z, t) = (p.x, p.y, p.s, p.t);
    let two_pi = T::lit(2.0) * T::PI();
    let exponent = cplx(-two_pi * (x * x + t * t), T::lit(2.0) * two_pi * z * x + two_pi * y * x * x);
    Ok(exponent.exp() * ku_theta_factors(p, policy)?)
}

pub(crate) fn relative<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    let scale = a.norm().max(b.norm());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).norm() / scale
    }
}
