//! Small quadrature helpers: adaptive Simpson on an interval and a
//! deterministic pairwise sum for grid reductions.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

type C<T> = Complex<T>;

/// Adaptive Simpson integration of a complex integrand over `[a, b]`.
///
/// Each panel is refined until the Richardson estimate of its error is below
/// its share of `tol`; `max_depth` bounds the recursion.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, tol: T, max_depth: u32) -> Result<C<T>>
where
    T: Real,
    F: Fn(T) -> Result<C<T>>,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = simpson(a, b, fa, fm, fb);
    refine(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

fn simpson<T: Real>(a: T, b: T, fa: C<T>, fm: C<T>, fb: C<T>) -> C<T> {
    (fa + fm * T::lit(4.0) + fb) * ((b - a) / T::lit(6.0))
}

#[allow(clippy::too_many_arguments)]
fn refine<T, F>(f: &F, a: T, b: T, fa: C<T>, fm: C<T>, fb: C<T>, whole: C<T>, tol: T, depth: u32) -> Result<C<T>>
where
    T: Real,
    F: Fn(T) -> Result<C<T>>,
{
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.norm() <= T::lit(15.0) * tol {
        return Ok(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return Err(Error::QuadratureFailed);
    }
    Ok(refine(f, a, m, fa, flm, fm, left, tol * half, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, tol * half, depth - 1)?)
}

/// Pairwise (cascade) summation; the association order depends only on the
/// length of the slice, so results are reproducible bit for bit.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n if n <= 8 => values.iter().fold(T::zero(), |acc, &v| acc + v),
        n => {
            let (left, right) = values.split_at(n / 2);
            pairwise_sum(left) + pairwise_sum(right)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exponential() {
        let value = adaptive_simpson(|u: f64| Ok(C::new(u.exp(), u.sin())), 0.0, 1.0, 1e-12, 30).unwrap();
        assert!((value.re - (1f64.exp() - 1.0)).abs() < 1e-11);
        assert!((value.im - (1.0 - 1f64.cos())).abs() < 1e-11);
    }

    #[test]
    fn simpson_depth_exhaustion_is_an_error() {
        let r = adaptive_simpson(|u: f64| Ok(C::new((1e4 * u).sin(), 0.0)), 0.0, 1.0, 1e-14, 2);
        assert!(matches!(r, Err(Error::QuadratureFailed)));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_exact_values() {
        let values: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&values), 499_500.0);
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
    }
}
