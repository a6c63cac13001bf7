//! Pullback of the Fubini-Study forms through the fiber and base section maps,
//! its Pfaffian and exterior derivative, period integrals over invariant
//! 2-tori and the Chern numbers of those tori from the multipliers.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundles::{BundleTag, BundleType, Gen, GroupElement, Letter, TotalPoint};
use crate::embedding::{base_sections, chart, fiber_sections, pivot_index, Pivot, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;
use crate::scalar::Real;
use crate::theta_core::TruncationPolicy;
use crate::theta_m::log_multiplier;

/// Pivot magnitude below which an affine chart is refused.
pub const CHART_THRESHOLD: f64 = 1e-10;

/// Tolerance on `|period - k * chern|` in [`cohomology_class_report`].
pub const PERIOD_TOL: f64 = 1e-4;

/// Largest allowed distance of a Chern value from its nearest integer.
pub const CHERN_TOL: f64 = 1e-9;

/// 2-form at a point, as an antisymmetric matrix in the coordinate order `(x, y, s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoFormMatrix<T> {
    entries: [[T; 4]; 4],
}

impl<T: Real> TwoFormMatrix<T> {
    /// Accepts matrices antisymmetric to `1e-12` relative to the largest entry.
    pub fn new(entries: [[T; 4]; 4]) -> Result<Self> {
        let scale = max_entry(&entries);
        let asym = (0..4)
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .map(|(a, b)| (entries[a][b] + entries[b][a]).abs())
            .fold(T::zero(), T::max);
        if asym > T::lit(1e-12) * scale {
            return Err(Error::InvalidArgument(format!("matrix is not antisymmetric (defect {asym})")));
        }
        Ok(Self { entries })
    }

    pub fn zero() -> Self {
        Self { entries: [[T::zero(); 4]; 4] }
    }

    /// Builds the form from its upper-triangular components.
    pub fn from_components(xy: T, xs: T, xt: T, ys: T, yt: T, st: T) -> Self {
        let mut m = Self::zero();
        for (a, b, v) in [(0, 1, xy), (0, 2, xs), (0, 3, xt), (1, 2, ys), (1, 3, yt), (2, 3, st)] {
            m.set(a, b, v);
        }
        m
    }

    /// `dx ^ dy + ds ^ dt`.
    pub fn reference() -> Self {
        Self::from_components(T::one(), T::zero(), T::zero(), T::zero(), T::zero(), T::one())
    }

    fn set(&mut self, a: usize, b: usize, v: T) {
        self.entries[a][b] = v;
        self.entries[b][a] = -v;
    }

    pub fn get(&self, a: usize, b: usize) -> T {
        self.entries[a][b]
    }

    pub fn entries(&self) -> [[T; 4]; 4] {
        self.entries
    }

    pub fn max_abs(&self) -> T {
        max_entry(&self.entries)
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for a in 0..4 {
            for b in 0..4 {
                out.entries[a][b] += other.entries[a][b];
            }
        }
        out
    }

    /// `M01 M23 - M02 M13 + M03 M12`.
    pub fn pfaffian(&self) -> T {
        let m = &self.entries;
        m[0][1] * m[2][3] - m[0][2] * m[1][3] + m[0][3] * m[1][2]
    }

    /// Determinant by cofactor expansion; equals the squared Pfaffian.
    pub fn determinant(&self) -> T {
        let m = &self.entries;
        let minor = |r: [usize; 3], c: [usize; 3]| {
            m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
                - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
                + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
        };
        let rows = [1, 2, 3];
        m[0][0] * minor(rows, [1, 2, 3]) - m[0][1] * minor(rows, [0, 2, 3]) + m[0][2] * minor(rows, [0, 1, 3])
            - m[0][3] * minor(rows, [0, 1, 2])
    }
}

fn max_entry<T: Real>(m: &[[T; 4]; 4]) -> T {
    m.iter().flatten().map(|v| v.abs()).fold(T::zero(), T::max)
}

/// Pfaffian of the form; nonzero exactly when the form is non-degenerate.
pub fn nondegeneracy_check<T: Real>(form: &TwoFormMatrix<T>) -> T {
    form.pfaffian()
}

/// `|Pf^2 - det|` relative to `max(|Pf|^2, |det|)`.
pub fn pfaffian_determinant_mismatch<T: Real>(form: &TwoFormMatrix<T>) -> T {
    let pf2 = form.pfaffian() * form.pfaffian();
    let det = form.determinant();
    let scale = pf2.abs().max(det.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (pf2 - det).abs() / scale
    }
}

/// Pullback of the Fubini-Study form (normalized to give a line area 1) through
/// one factor map `values: R^4 -> C^n`, restricted to the coordinate axes in `axes`.
///
/// In the affine chart `w` the form is `(i/2pi) sum g_{ij} dw_i ^ dw_j-bar` with
/// `g = ((1+|w|^2) I - w-bar w^T)/(1+|w|^2)^2`, so
/// `Omega(e_a, e_b) = -Im G(dw_a, dw_b) / (pi (1+|w|^2)^2)` where
/// `G(u, v) = (1+|w|^2) <v, u> - (w^* u)(w^* v)-bar`.
fn factor_pullback<T, F>(values: F, p: TotalPoint<T>, axes: &[usize], h: T) -> Result<TwoFormMatrix<T>>
where
    T: Real,
    F: Fn(TotalPoint<T>) -> Result<Vec<Complex<T>>>,
{
    let v0 = values(p)?;
    if v0.len() < 2 {
        return Ok(TwoFormMatrix::zero());
    }
    let pivot = pivot_index(&v0, Pivot::Largest);
    if v0[pivot].norm() < T::lit(CHART_THRESHOLD) {
        return Err(Error::ChartDegenerate { magnitude: v0[pivot].norm().as_f64() });
    }
    let w = chart(&v0, pivot);
    let mut du: Vec<(usize, Vec<Complex<T>>)> = Vec::with_capacity(axes.len());
    for &axis in axes {
        let plus = chart(&values(p.shifted(axis, h))?, pivot);
        let minus = chart(&values(p.shifted(axis, -h))?, pivot);
        du.push((axis, plus.iter().zip(&minus).map(|(a, b)| (a - b) / (h + h)).collect()));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let r2 = w.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
    let one_r2 = T::one() + r2;
    let wu: Vec<Complex<T>> =
        du.iter().map(|(_, u)| w.iter().zip(u).fold(zero, |acc, (wi, ui)| acc + wi.conj() * ui)).collect();
    let mut form = TwoFormMatrix::zero();
    for i in 0..du.len() {
        for j in i + 1..du.len() {
            let (a, ua) = (&du[i].0, &du[i].1);
            let (b, ub) = (&du[j].0, &du[j].1);
            let hermitian = ua.iter().zip(ub).fold(zero, |acc, (x, y)| acc + x * y.conj()) * one_r2;
            let g = hermitian - wu[i] * wu[j].conj();
            form.set(*a, *b, -g.im / (T::PI() * one_r2 * one_r2));
        }
    }
    Ok(form)
}

const FIBER_AXES: [usize; 3] = [0, 2, 3];
const BASE_AXES: [usize; 2] = [0, 1];

/// Pullback restricted to the axes in `axes`; other components are zero.
fn pullback_on_axes<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    axes: &[usize],
    h: T,
    policy: &TruncationPolicy<T>,
) -> Result<TwoFormMatrix<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let pick = |dependent: &[usize]| -> Vec<usize> { axes.iter().copied().filter(|a| dependent.contains(a)).collect() };
    let fiber_axes = pick(&FIBER_AXES);
    let base_axes = pick(&BASE_AXES);
    let fiber = if fiber_axes.len() >= 2 {
        factor_pullback(|q| fiber_sections(bundle, k, q, policy), p, &fiber_axes, h)?
    } else {
        TwoFormMatrix::zero()
    };
    let base = if base_axes.len() >= 2 {
        factor_pullback(|q| base_sections(k, q, policy), p, &base_axes, h)?
    } else {
        TwoFormMatrix::zero()
    };
    Ok(fiber.add(&base))
}

/// Pullback of the sum of the Fubini-Study forms on `CP^{k-1} x CP^{k-1}`
/// through the fiber and base section maps, by central differences.
pub fn fs_pullback<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    fd_step: T,
    policy: &TruncationPolicy<T>,
) -> Result<TwoFormMatrix<T>> {
    pullback_on_axes(bundle, k, p, &[0, 1, 2, 3], fd_step, policy)
}

/// Largest component of `d Omega` for a form field, by central differences of
/// step `h`, relative to the largest entry of `Omega(p)`. Falls back to the
/// absolute value when `Omega(p)` vanishes.
pub fn closedness_residual_of<T, F>(field: F, p: TotalPoint<T>, h: T) -> Result<T>
where
    T: Real,
    F: Fn(TotalPoint<T>) -> Result<TwoFormMatrix<T>>,
{
    let center = field(p)?;
    let mut d: Vec<TwoFormMatrix<T>> = Vec::with_capacity(4);
    for axis in 0..4 {
        let plus = field(p.shifted(axis, h))?;
        let minus = field(p.shifted(axis, -h))?;
        let mut diff = TwoFormMatrix::zero();
        for a in 0..4 {
            for b in 0..4 {
                diff.entries[a][b] = (plus.entries[a][b] - minus.entries[a][b]) / (h + h);
            }
        }
        d.push(diff);
    }
    let residual = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        .into_iter()
        .map(|(a, b, c)| (d[a].get(b, c) + d[b].get(c, a) + d[c].get(a, b)).abs())
        .fold(T::zero(), T::max);
    let scale = center.max_abs();
    Ok(if scale > T::zero() { residual / scale } else { residual })
}

/// [`closedness_residual_of`] for the pullback form. `fd_step` is the outer
/// step; the form itself is differentiated with [`DEFAULT_FD_STEP`].
pub fn closedness_residual<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    fd_step: T,
    policy: &TruncationPolicy<T>,
) -> Result<T> {
    let inner = T::lit(DEFAULT_FD_STEP);
    closedness_residual_of(|q| fs_pullback(bundle, k, q, inner, policy), p, fd_step)
}

fn gen_axis(gen: Gen) -> usize {
    match gen {
        Gen::A => 0,
        Gen::B => 1,
        Gen::C => 2,
        Gen::D => 3,
    }
}

/// The 2-torus swept from `base` by two commuting generators, each moving one
/// coordinate by one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleSpec<T> {
    pub gens: (Gen, Gen),
    pub base: TotalPoint<T>,
}

impl<T: Real> CycleSpec<T> {
    /// Checks that the generators commute in `Gamma` and that each maps the
    /// slice through `base` to itself by a unit translation.
    pub fn new(bundle: &BundleType<T>, first: Gen, second: Gen, base: TotalPoint<T>) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidCycle(format!("generators must differ, got {first} twice")));
        }
        let (g1, g2) = (GroupElement::generator(first), GroupElement::generator(second));
        if !bundle.commute(&g1, &g2) {
            return Err(Error::InvalidCycle(format!("{first} and {second} do not commute for type {}", bundle.label())));
        }
        let cycle = Self { gens: (first, second), base };
        for (u, v) in [(0.0, 0.0), (0.3, 0.7), (0.6, 0.2)] {
            let (u, v) = (T::lit(u), T::lit(v));
            let p = cycle.point(u, v);
            let along_first = bundle.act_letter(Letter::new(first, 1), p);
            let along_second = bundle.act_letter(Letter::new(second, 1), p);
            let tol = T::lit(1e-12);
            if along_first.max_abs_diff(cycle.point(u + T::one(), v)) > tol
                || along_second.max_abs_diff(cycle.point(u, v + T::one())) > tol
            {
                return Err(Error::InvalidCycle(format!(
                    "T_{first}{second} through {base:?} is not preserved by its generators"
                )));
            }
        }
        Ok(cycle)
    }

    pub fn name(&self) -> String {
        format!("T_{}{}", self.gens.0, self.gens.1)
    }

    pub fn axes(&self) -> (usize, usize) {
        (gen_axis(self.gens.0), gen_axis(self.gens.1))
    }

    /// `base + u e_first + v e_second`.
    pub fn point(&self, u: T, v: T) -> TotalPoint<T> {
        let (a, b) = self.axes();
        self.base.shifted(a, u).shifted(b, v)
    }
}

/// Periodic trapezoid rule on `[0,1)^2` for the form component along the cycle.
pub fn integrate_over_cycle<T, F>(cycle: &CycleSpec<T>, resolution: usize, field: F) -> Result<T>
where
    T: Real,
    F: Fn(TotalPoint<T>) -> Result<TwoFormMatrix<T>> + Sync,
{
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let n = T::lit(resolution as f64);
    let (a, b) = cycle.axes();
    let rows: Vec<T> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let u = T::lit(i as f64) / n;
            let row: Vec<T> = (0..resolution)
                .map(|j| Ok(field(cycle.point(u, T::lit(j as f64) / n))?.get(a, b)))
                .collect::<Result<_>>()?;
            Ok(pairwise_sum(&row))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&rows) / (n * n))
}

/// Integral of the pullback form over the cycle at `resolution^2` nodes.
pub fn period_integral<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    cycle: &CycleSpec<T>,
    resolution: usize,
    policy: &TruncationPolicy<T>,
) -> Result<T> {
    let (a, b) = cycle.axes();
    let h = T::lit(DEFAULT_FD_STEP);
    integrate_over_cycle(cycle, resolution, |q| pullback_on_axes(bundle, k, q, &[a.min(b), a.max(b)], h, policy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernEvaluation<T> {
    pub cycle: CycleSpec<T>,
    pub point: TotalPoint<T>,
    pub value: T,
    /// Imaginary part of the four-term combination; zero up to rounding.
    pub imaginary_part: T,
    pub nearest_integer: i64,
    /// `|value - nearest_integer|`.
    pub deviation: T,
}

/// `c_1` of the line bundle on the cycle:
/// `f_mu(u) + f_lambda(mu u) - f_lambda(u) - f_mu(lambda u)` with
/// `f = log e / (2 pi i)` along the branches of [`log_multiplier`].
pub fn chern_pairing<T: Real>(
    bundle: &BundleType<T>,
    cycle: &CycleSpec<T>,
    u: TotalPoint<T>,
) -> Result<ChernEvaluation<T>> {
    let (lambda, mu) = cycle.gens;
    if !bundle.commute(&GroupElement::generator(lambda), &GroupElement::generator(mu)) {
        return Err(Error::InvalidCycle(format!("{lambda} and {mu} do not commute")));
    }
    let two_pi_i = Complex::new(T::zero(), T::lit(2.0) * T::PI());
    let f = |g: Gen, q: TotalPoint<T>| -> Result<Complex<T>> { Ok(log_multiplier(bundle, g, q)? / two_pi_i) };
    let step = |g: Gen| bundle.act_letter(Letter::new(g, 1), u);
    let total = f(mu, u)? + f(lambda, step(mu))? - f(lambda, u)? - f(mu, step(lambda))?;
    let nearest = total.re.round();
    Ok(ChernEvaluation {
        cycle: *cycle,
        point: u,
        value: total.re,
        imaginary_part: total.im,
        nearest_integer: nearest.to_i64().unwrap_or(i64::MAX),
        deviation: (total.re - nearest).abs(),
    })
}

/// The cycles used by [`cohomology_class_report`]: `T_ab` and `T_cd` for every
/// bundle, plus `T_bd` and `T_ac` for the Kodaira-Thurston row.
pub fn standard_cycles<T: Real>(bundle: &BundleType<T>) -> Result<Vec<CycleSpec<T>>> {
    let x0 = T::lit(0.37);
    let y0 = T::lit(0.21);
    let s0 = T::lit(0.29);
    let zero = T::zero();
    let mut cycles = vec![
        CycleSpec::new(bundle, Gen::A, Gen::B, TotalPoint::new(zero, zero, zero, zero))?,
        CycleSpec::new(bundle, Gen::C, Gen::D, TotalPoint::new(x0, y0, zero, zero))?,
    ];
    if bundle.tag() == BundleTag::C {
        cycles.push(CycleSpec::new(bundle, Gen::B, Gen::D, TotalPoint::new(x0, zero, s0, zero))?);
        cycles.push(CycleSpec::new(bundle, Gen::A, Gen::C, TotalPoint::new(zero, y0, zero, zero))?);
    }
    Ok(cycles)
}

/// Point at which [`cohomology_class_report`] evaluates Chern pairings.
pub const CHERN_SAMPLE_POINT: [f64; 4] = [0.31, 0.17, 0.43, 0.29];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleResult<T> {
    pub name: String,
    pub period: T,
    pub chern: ChernEvaluation<T>,
    /// `k * chern`.
    pub expected_period: T,
    pub period_error: T,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohomologyReport<T> {
    pub bundle: String,
    pub k: u32,
    pub resolution: usize,
    pub cycles: Vec<CycleResult<T>>,
    /// Set for `k = 1`, where both factor maps land in a point and the pullback vanishes.
    pub degenerate_factors: bool,
    pub tolerance: T,
    pub passed: bool,
}

/// Periods of the pullback against `k` times the Chern numbers, cycle by cycle.
pub fn cohomology_class_report<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    resolution: usize,
    policy: &TruncationPolicy<T>,
) -> Result<CohomologyReport<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let tol = T::lit(PERIOD_TOL);
    let u = TotalPoint::from_array(CHERN_SAMPLE_POINT.map(T::lit));
    let mut cycles = Vec::new();
    for cycle in standard_cycles(bundle)? {
        let period = period_integral(bundle, k, &cycle, resolution, policy)?;
        let chern = chern_pairing(bundle, &cycle, u)?;
        let expected = T::lit((i64::from(k) * chern.nearest_integer) as f64);
        let error = (period - expected).abs();
        let passed = error < tol && chern.deviation < T::lit(CHERN_TOL);
        cycles.push(CycleResult { name: cycle.name(), period, chern, expected_period: expected, period_error: error, passed });
    }
    let passed = cycles.iter().all(|c| c.passed);
    Ok(CohomologyReport {
        bundle: bundle.label(),
        k,
        resolution,
        cycles,
        degenerate_factors: k == 1,
        tolerance: tol,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kt() -> BundleType<f64> {
        BundleType::representative(BundleTag::C, Some(1)).unwrap()
    }

    #[test]
    fn reference_form_pfaffian() {
        let w = TwoFormMatrix::<f64>::reference();
        assert_eq!(nondegeneracy_check(&w), 1.0);
        assert_eq!(w.determinant(), 1.0);
    }

    #[test]
    fn block_form_pfaffian_is_mu_nu() {
        let (mu, nu) = (0.7_f64, -1.3_f64);
        let m = TwoFormMatrix::from_components(mu, 0.4, -2.2, 0.0, 0.0, nu);
        assert!((m.pfaffian() - mu * nu).abs() < 1e-15);
        assert!(pfaffian_determinant_mismatch(&m) < 1e-14);
        let single = TwoFormMatrix::from_components(3.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(single.pfaffian(), 0.0);
    }

    #[test]
    fn antisymmetry_is_validated() {
        let mut e = [[0.0; 4]; 4];
        e[0][1] = 1.0;
        assert!(TwoFormMatrix::new(e).is_err());
        e[1][0] = -1.0;
        assert!(TwoFormMatrix::new(e).is_ok());
    }

    #[test]
    fn degree_one_pullback_vanishes() {
        let b = BundleType::<f64>::representative(BundleTag::A, None).unwrap();
        let m = fs_pullback(&b, 1, TotalPoint::new(0.1, 0.2, 0.3, 0.4), 1e-5, &TruncationPolicy::default()).unwrap();
        assert_eq!(m, TwoFormMatrix::zero());
    }

    #[test]
    fn reference_form_is_closed_and_has_unit_period() {
        let p = TotalPoint::new(0.1, 0.2, 0.3, 0.4);
        let r = closedness_residual_of(|_| Ok(TwoFormMatrix::<f64>::reference()), p, 1e-3).unwrap();
        assert_eq!(r, 0.0);
        let cycle = CycleSpec::new(&kt(), Gen::C, Gen::D, p).unwrap();
        let period = integrate_over_cycle(&cycle, 7, |_| Ok(TwoFormMatrix::reference())).unwrap();
        assert!((period - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cycle_validation() {
        let b = kt();
        assert!(CycleSpec::new(&b, Gen::A, Gen::C, TotalPoint::new(0.0, 0.2, 0.0, 0.5)).is_err());
        assert!(CycleSpec::new(&b, Gen::A, Gen::C, TotalPoint::new(0.0, 0.2, 0.0, 0.0)).is_ok());
        assert!(CycleSpec::new(&b, Gen::A, Gen::D, TotalPoint::new(0.0, 0.2, 0.0, 0.0)).is_err());
        assert!(CycleSpec::new(&b, Gen::C, Gen::C, TotalPoint::default()).is_err());
    }

    #[test]
    fn chern_numbers_on_kodaira_thurston() {
        let b = kt();
        let u = TotalPoint::new(0.31, 0.17, 0.43, 0.29);
        let expected = [1, 1, 0, 0];
        for (cycle, want) in standard_cycles(&b).unwrap().iter().zip(expected) {
            let c = chern_pairing(&b, cycle, u).unwrap();
            assert_eq!(c.nearest_integer, want, "{}", cycle.name());
            assert!(c.deviation < 1e-9 && c.imaginary_part.abs() < 1e-9);
        }
    }
}
