//! Singular values through nalgebra. Inputs are promoted to `f64`.

use nalgebra::{Complex as NaComplex, DMatrix};
use num_complex::Complex;

use crate::scalar::Real;

/// Singular values of a real row-major matrix, descending.
pub fn singular_values_real<T: Real>(rows: &[Vec<T>]) -> Vec<T> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j].as_f64());
    sorted(m.singular_values().iter().copied())
}

/// Singular values of a complex row-major matrix, descending.
pub fn singular_values_complex<T: Real>(rows: &[Vec<Complex<T>>]) -> Vec<T> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(n_rows, n_cols, |i, j| NaComplex::new(rows[i][j].re.as_f64(), rows[i][j].im.as_f64()));
    sorted(m.singular_values().iter().copied())
}

fn sorted<T: Real>(values: impl Iterator<Item = f64>) -> Vec<T> {
    let mut out: Vec<f64> = values.collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.into_iter().map(T::lit).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_real() {
        let s = singular_values_real(&[vec![0.0, 3.0], vec![-2.0, 0.0], vec![0.0, 0.0]]);
        assert!((s[0] - 3.0f64).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_complex() {
        let i = Complex::new(0.0, 1.0);
        let rows = vec![vec![Complex::new(1.0, 0.0), i], vec![i, Complex::new(-1.0, 0.0)]];
        let s: Vec<f64> = singular_values_complex(&rows);
        assert!((s[0] - 2.0).abs() < 1e-14);
        assert!(s[1].abs() < 1e-14);
    }
}
