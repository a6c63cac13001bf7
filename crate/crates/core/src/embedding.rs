//! The map `phi_k` of the total space into `CP^{k^2-1}` given by the degree-k
//! basis sections, with finite-difference Jacobians, chart rank, projective
//! equivariance reports and pairwise injectivity scans.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundles::{BundleType, Gen, Letter, TotalPoint};
use crate::error::{Error, Result};
use crate::linalg::singular_values_real;
use crate::scalar::Real;
use crate::theta_core::{theta_degree_basis, Tau, TruncationPolicy};

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default threshold on chart singular values.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Default FS distance below which two grid images count as a collision.
pub const DEFAULT_COLLISION_TOL: f64 = 1e-6;

/// Largest coordinate magnitude below which a section vector counts as zero.
pub const VANISHING_THRESHOLD: f64 = 1e-14;

/// Distance used to decide that two grid points are identified by `Gamma`.
pub const IDENTIFICATION_TOL: f64 = 1e-9;

/// Homogeneous coordinates, not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint<T>(Vec<Complex<T>>);

impl<T: Real> ProjectivePoint<T> {
    pub fn new(coords: Vec<Complex<T>>) -> Result<Self> {
        if coords.is_empty() || coords.iter().all(|c| c.norm() == T::zero()) {
            return Err(Error::InvalidArgument("projective point needs a nonzero coordinate".into()));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[Complex<T>] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    fn normalized(&self) -> Vec<Complex<T>> {
        let norm = self.0.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        self.0.iter().map(|c| c / norm).collect()
    }
}

fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

fn vec_norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|c| c.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt()
}

/// Distance on unit-normalized vectors, `atan2(|Q - P <P,Q>|, |<P,Q>|)`; equal to
/// `arccos |<P,Q>|` but accurate near zero.
fn fs_distance_unit<T: Real>(p: &[Complex<T>], q: &[Complex<T>]) -> T {
    let ip = inner(p, q);
    let perp: Vec<Complex<T>> = q.iter().zip(p).map(|(qi, pi)| qi - pi * ip).collect();
    vec_norm(&perp).atan2(ip.norm())
}

/// Fubini-Study distance in `[0, pi/2]`.
pub fn fs_distance<T: Real>(p: &ProjectivePoint<T>, q: &ProjectivePoint<T>) -> Result<T> {
    if p.0.len() != q.0.len() {
        return Err(Error::InvalidArgument(format!("dimension mismatch: {} vs {}", p.0.len(), q.0.len())));
    }
    Ok(fs_distance_unit(&p.normalized(), &q.normalized()))
}

/// `theta_k^j(s + omega(x) t, omega(x))` for `j = 0..k`.
pub fn fiber_sections<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Vec<Complex<T>>> {
    let w = bundle.omega(p.x);
    let tau = Tau::new(w)?;
    let z = w * p.t + p.s;
    (0..k).map(|j| Ok(theta_degree_basis(k, j, z, tau, policy)?.value)).collect()
}

/// `theta_k^j(x + iy, i)` for `j = 0..k`.
pub fn base_sections<T: Real>(k: u32, p: TotalPoint<T>, policy: &TruncationPolicy<T>) -> Result<Vec<Complex<T>>> {
    let z = Complex::new(p.x, p.y);
    (0..k).map(|j| Ok(theta_degree_basis(k, j, z, Tau::i(), policy)?.value)).collect()
}

/// All `k^2` basis sections at `p`, in `(p, q)` lexicographic order.
pub fn section_vector<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    policy: &TruncationPolicy<T>,
) -> Result<Vec<Complex<T>>> {
    let fiber = fiber_sections(bundle, k, p, policy)?;
    let base = base_sections(k, p, policy)?;
    Ok(fiber.iter().flat_map(|f| base.iter().map(move |b| f * b)).collect())
}

fn vanishing_error<T: Real>(p: TotalPoint<T>) -> Error {
    Error::AllSectionsVanish { x: p.x.as_f64(), y: p.y.as_f64(), s: p.s.as_f64(), t: p.t.as_f64() }
}

fn max_abs<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|c| c.norm()).fold(T::zero(), T::max)
}

/// `phi_k(p)`.
pub fn phi_k<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    policy: &TruncationPolicy<T>,
) -> Result<ProjectivePoint<T>> {
    let v = section_vector(bundle, k, p, policy)?;
    if max_abs(&v) < T::lit(VANISHING_THRESHOLD) {
        return Err(vanishing_error(p));
    }
    ProjectivePoint::new(v)
}

/// Regular grid of `n^4` points `((i + offset)/n, ...)` in the unit cube,
/// enumerated with `x` slowest and `t` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid4 {
    pub n: usize,
    /// `0` puts points on the lower faces; `0.5` uses cell centers.
    pub offset: f64,
}

impl Grid4 {
    pub fn new(n: usize, offset: f64) -> Result<Self> {
        if n == 0 || !(0.0..1.0).contains(&offset) {
            return Err(Error::InvalidArgument(format!("grid needs n >= 1 and offset in [0, 1), got {n}, {offset}")));
        }
        Ok(Self { n, offset })
    }

    pub fn len(&self) -> usize {
        self.n.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point<T: Real>(&self, index: usize) -> TotalPoint<T> {
        let n = self.n;
        let coord = |i: usize| T::lit((i as f64 + self.offset) / n as f64);
        TotalPoint::new(coord(index / (n * n * n)), coord(index / (n * n) % n), coord(index / n % n), coord(index % n))
    }

    pub fn points<T: Real>(&self) -> Vec<TotalPoint<T>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// How `gen` acts on the homogeneous coordinates of `phi_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceReport<T> {
    pub generator: Gen,
    /// Coordinate ratios `sigma_i(gen p) / sigma_i(p)` at the first usable grid point
    /// (`None` where the denominator is negligible).
    pub induced_ratios: Vec<Option<Complex<T>>>,
    pub is_projectively_scalar: bool,
    /// Largest relative spread of the ratios at one point, over the grid.
    pub spread: T,
    pub tolerance: T,
    /// Common ratio at the first usable point.
    pub scalar: Option<Complex<T>>,
    pub points_used: usize,
}

/// Ratios `sigma_i(gen p)/sigma_i(p)` at every grid point, skipping coordinates below
/// `1e-8` of the largest one. Descriptive: nothing is asserted.
pub fn equivariance_check<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    gen: Gen,
    grid: &Grid4,
    tolerance: T,
    policy: &TruncationPolicy<T>,
) -> Result<EquivarianceReport<T>> {
    let per_point: Vec<Result<Option<(Vec<Option<Complex<T>>>, T)>>> = grid
        .points::<T>()
        .into_par_iter()
        .map(|p| {
            let here = section_vector(bundle, k, p, policy)?;
            let scale = max_abs(&here);
            if scale < T::lit(VANISHING_THRESHOLD) {
                return Ok(None);
            }
            let there = section_vector(bundle, k, bundle.act_letter(Letter::new(gen, 1), p), policy)?;
            let floor = scale * T::lit(1e-8);
            let ratios: Vec<Option<Complex<T>>> =
                here.iter().zip(&there).map(|(h, t)| (h.norm() > floor).then(|| t / h)).collect();
            let pivot = here
                .iter()
                .enumerate()
                .max_by(|a, b| order(a.1.norm(), b.1.norm()))
                .map(|(i, _)| i)
                .expect("nonempty");
            let reference = ratios[pivot].expect("pivot is above the floor");
            let spread = ratios
                .iter()
                .flatten()
                .map(|r| (r - reference).norm() / reference.norm())
                .fold(T::zero(), T::max);
            Ok(Some((ratios, spread)))
        })
        .collect();

    let mut spread = T::zero();
    let mut first: Option<Vec<Option<Complex<T>>>> = None;
    let mut used = 0;
    for item in per_point {
        if let Some((ratios, s)) = item? {
            used += 1;
            spread = spread.max(s);
            first.get_or_insert(ratios);
        }
    }
    let induced_ratios = first.unwrap_or_default();
    let is_scalar = used > 0 && spread < tolerance;
    let scalar = if is_scalar { induced_ratios.iter().flatten().next().copied() } else { None };
    Ok(EquivarianceReport {
        generator: gen,
        induced_ratios,
        is_projectively_scalar: is_scalar,
        spread,
        tolerance,
        scalar,
        points_used: used,
    })
}

fn order<T: Real>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}

/// Rows: `sigma`, `(d_x - i d_y) sigma`, `(d_s + d_t/omega) sigma`,
/// `(d_x + i d_y) sigma`, `(d_s - d_t/omega) sigma`. The last row vanishes
/// identically because every section depends on `(s, t)` through `s + omega t`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianTilde<T> {
    pub rows: [Vec<Complex<T>>; 5],
}

/// Central differences of the section vector along the four coordinate axes.
fn section_partials<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    h: T,
    policy: &TruncationPolicy<T>,
) -> Result<[Vec<Complex<T>>; 4]> {
    let mut out: [Vec<Complex<T>>; 4] = Default::default();
    for (axis, slot) in out.iter_mut().enumerate() {
        let plus = section_vector(bundle, k, p.shifted(axis, h), policy)?;
        let minus = section_vector(bundle, k, p.shifted(axis, -h), policy)?;
        *slot = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (h + h)).collect();
    }
    Ok(out)
}

pub fn jacobian_tilde<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    fd_step: T,
    policy: &TruncationPolicy<T>,
) -> Result<JacobianTilde<T>> {
    check_step(fd_step)?;
    let value = section_vector(bundle, k, p, policy)?;
    let [dx, dy, ds, dt] = section_partials(bundle, k, p, fd_step, policy)?;
    let i = Complex::new(T::zero(), T::one());
    let w = bundle.omega(p.x);
    let combine = |a: &[Complex<T>], b: &[Complex<T>], f: &dyn Fn(Complex<T>, Complex<T>) -> Complex<T>| {
        a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect::<Vec<_>>()
    };
    Ok(JacobianTilde {
        rows: [
            value,
            combine(&dx, &dy, &|x, y| x - i * y),
            combine(&ds, &dt, &|s, t| s + t / w),
            combine(&dx, &dy, &|x, y| x + i * y),
            combine(&ds, &dt, &|s, t| s - t / w),
        ],
    })
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    Ok(())
}

/// Which coordinate an affine chart divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pivot {
    Largest,
    SecondLargest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions<T> {
    pub fd_step: T,
    pub pivot: Pivot,
}

impl<T: Real> Default for RankOptions<T> {
    fn default() -> Self {
        Self { fd_step: T::lit(DEFAULT_FD_STEP), pivot: Pivot::Largest }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport<T> {
    pub point: TotalPoint<T>,
    /// Descending.
    pub singular_values: [T; 4],
    pub rank_at_tol: usize,
    /// Chart pivot index; `None` when the target is a point.
    pub pivot: Option<usize>,
}

/// Affine-chart coordinates `w_j = v_j / v_pivot`, `j != pivot`.
pub(crate) fn chart<T: Real>(v: &[Complex<T>], pivot: usize) -> Vec<Complex<T>> {
    let denom = v[pivot];
    v.iter().enumerate().filter(|(j, _)| *j != pivot).map(|(_, x)| x / denom).collect()
}

pub(crate) fn pivot_index<T: Real>(v: &[Complex<T>], which: Pivot) -> usize {
    let mut indices: Vec<usize> = (0..v.len()).collect();
    indices.sort_by(|&a, &b| order(v[b].norm(), v[a].norm()).then(a.cmp(&b)));
    match which {
        Pivot::Largest => indices[0],
        Pivot::SecondLargest => indices[indices.len().min(2) - 1],
    }
}

/// Rank of `phi_k` at `p` with default options.
pub fn rank_check<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    tolerance: T,
    policy: &TruncationPolicy<T>,
) -> Result<RankReport<T>> {
    rank_check_with(bundle, k, p, tolerance, &RankOptions::default(), policy)
}

/// Singular values of the real `2(k^2-1) x 4` Jacobian of an affine chart,
/// measured in the Fubini-Study metric so that they do not depend on the chart:
/// the chart differential is multiplied by `H^{1/2}` where
/// `H = ((1+|w|^2) I - w w^*) / (1+|w|^2)^2`.
pub fn rank_check_with<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    p: TotalPoint<T>,
    tolerance: T,
    options: &RankOptions<T>,
    policy: &TruncationPolicy<T>,
) -> Result<RankReport<T>> {
    check_step(options.fd_step)?;
    let value = section_vector(bundle, k, p, policy)?;
    if max_abs(&value) < T::lit(VANISHING_THRESHOLD) {
        return Err(vanishing_error(p));
    }
    if value.len() == 1 {
        return Ok(RankReport { point: p, singular_values: [T::zero(); 4], rank_at_tol: 0, pivot: None });
    }
    let pivot = pivot_index(&value, options.pivot);
    let w = chart(&value, pivot);
    let h = options.fd_step;
    let mut dw: Vec<Vec<Complex<T>>> = Vec::with_capacity(4);
    for axis in 0..4 {
        let plus = chart(&section_vector(bundle, k, p.shifted(axis, h), policy)?, pivot);
        let minus = chart(&section_vector(bundle, k, p.shifted(axis, -h), policy)?, pivot);
        dw.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (h + h)).collect());
    }
    let metric_root = fs_metric_root(&w);
    let n = w.len();
    let mut rows = vec![vec![T::zero(); 4]; 2 * n];
    for (axis, column) in dw.iter().enumerate() {
        for i in 0..n {
            let entry = (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + metric_root(i, j) * column[j]);
            rows[2 * i][axis] = entry.re;
            rows[2 * i + 1][axis] = entry.im;
        }
    }
    let s = singular_values_real(&rows);
    let singular_values = [s[0], s[1], s[2], s[3]];
    let rank_at_tol = singular_values.iter().filter(|&&v| v > tolerance).count();
    Ok(RankReport { point: p, singular_values, rank_at_tol, pivot: Some(pivot) })
}

/// Entries of `H^{1/2} = (I - c w w^*) / sqrt(1+r^2)` with `c = (1 - 1/sqrt(1+r^2)) / r^2`.
fn fs_metric_root<T: Real>(w: &[Complex<T>]) -> impl Fn(usize, usize) -> Complex<T> + '_ {
    let r2 = w.iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a + b);
    let root = (T::one() + r2).sqrt();
    let c = if r2 > T::lit(1e-30) { (T::one() - root.recip()) / r2 } else { T::lit(0.5) };
    move |i, j| {
        let delta = if i == j { T::one() } else { T::zero() };
        (Complex::new(delta, T::zero()) - w[i] * w[j].conj() * c) / root
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collision<T> {
    pub i: usize,
    pub j: usize,
    pub distance: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport<T> {
    pub points: usize,
    /// Smallest FS distance between images of distinct, non-identified grid points.
    pub min_offdiagonal_fs_distance: Option<T>,
    pub min_pair: Option<(usize, usize)>,
    /// Pairs closer than the tolerance, sorted by index.
    pub collisions: Vec<Collision<T>>,
    /// Grid indices where every section vanishes; they are left out of the scan.
    pub vanishing: Vec<usize>,
}

/// True when `q = g p` for some `g` in `Gamma`, up to `tol`.
pub fn gamma_equivalent<T: Real>(bundle: &BundleType<T>, p: TotalPoint<T>, q: TotalPoint<T>, tol: T) -> bool {
    let near_int = |v: T| (v - v.round()).abs() < tol;
    let (dx, dy) = (q.x - p.x, q.y - p.y);
    if !near_int(dx) || !near_int(dy) {
        return false;
    }
    let na = dx.round().to_i64().unwrap_or(0);
    let nb = dy.round().to_i64().unwrap_or(0);
    let m = bundle.pair().a().pow(na).mul(&bundle.pair().b().pow(nb));
    let (s, t) = m.apply(p.s, p.t);
    near_int(q.s - s) && near_int(q.t - t)
}

/// Pairwise FS distances between the images of all grid points.
pub fn injectivity_scan<T: Real>(
    bundle: &BundleType<T>,
    k: u32,
    grid: &Grid4,
    tolerance: T,
    policy: &TruncationPolicy<T>,
) -> Result<InjectivityReport<T>> {
    let points = grid.points::<T>();
    let images: Vec<Option<Vec<Complex<T>>>> = points
        .par_iter()
        .map(|&p| {
            let v = section_vector(bundle, k, p, policy)?;
            if max_abs(&v) < T::lit(VANISHING_THRESHOLD) {
                return Ok(None);
            }
            Ok(Some(ProjectivePoint::new(v)?.normalized()))
        })
        .collect::<Result<_>>()?;
    let vanishing: Vec<usize> = images.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i).collect();
    let id_tol = T::lit(IDENTIFICATION_TOL);

    // per row: (closest partner, its distance, collisions in this row)
    let rows: Vec<(Option<(usize, T)>, Vec<Collision<T>>)> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let Some(vi) = images[i].as_ref() else { return (None, Vec::new()) };
            let mut best: Option<(usize, T)> = None;
            let mut hits = Vec::new();
            for j in i + 1..points.len() {
                let Some(vj) = images[j].as_ref() else { continue };
                if gamma_equivalent(bundle, points[i], points[j], id_tol) {
                    continue;
                }
                let d = fs_distance_unit(vi, vj);
                if best.map_or(true, |(_, b)| d < b) {
                    best = Some((j, d));
                }
                if d < tolerance {
                    hits.push(Collision { i, j, distance: d });
                }
            }
            (best, hits)
        })
        .collect();

    let mut min: Option<(usize, usize, T)> = None;
    let mut collisions = Vec::new();
    for (i, (best, hits)) in rows.into_iter().enumerate() {
        if let Some((j, d)) = best {
            if min.map_or(true, |(_, _, m)| d < m) {
                min = Some((i, j, d));
            }
        }
        collisions.extend(hits);
    }
    Ok(InjectivityReport {
        points: points.len(),
        min_offdiagonal_fs_distance: min.map(|m| m.2),
        min_pair: min.map(|m| (m.0, m.1)),
        collisions,
        vanishing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::BundleTag;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn kt() -> BundleType<f64> {
        BundleType::representative(BundleTag::C, Some(1)).unwrap()
    }

    #[test]
    fn fs_distance_examples() {
        let p = ProjectivePoint::new(vec![c(1.0, 2.0), c(-0.5, 0.3)]).unwrap();
        assert_eq!(fs_distance(&p, &p).unwrap(), 0.0);
        let scaled = ProjectivePoint::new(p.coords().iter().map(|z| z * c(3.0, -4.0)).collect()).unwrap();
        assert!(fs_distance(&p, &scaled).unwrap() < 1e-14);
        let e0 = ProjectivePoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e1 = ProjectivePoint::new(vec![c(0.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert!((fs_distance(&e0, &e1).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(ProjectivePoint::<f64>::new(vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn grid_enumeration() {
        let g = Grid4::new(3, 0.5).unwrap();
        assert_eq!(g.len(), 81);
        let p: TotalPoint<f64> = g.point(1);
        assert_eq!(p.to_array(), [0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0, 1.5 / 3.0]);
        assert!(Grid4::new(0, 0.0).is_err());
    }

    #[test]
    fn degree_one_target_is_a_point() {
        let pol = TruncationPolicy::default();
        let p = TotalPoint::new(0.1, 0.2, 0.3, 0.4);
        assert_eq!(phi_k(&kt(), 1, p, &pol).unwrap().dimension(), 0);
        let r = rank_check(&kt(), 1, p, 1e-6, &pol).unwrap();
        assert_eq!(r.rank_at_tol, 0);
    }

    #[test]
    fn c_acts_by_a_scalar_on_phi() {
        let pol = TruncationPolicy::default();
        let p = TotalPoint::new(0.1, 0.2, 0.3, 0.4);
        let a = phi_k(&kt(), 3, p, &pol).unwrap();
        let b = phi_k(&kt(), 3, p.shifted(2, 1.0), &pol).unwrap();
        assert!(fs_distance(&a, &b).unwrap() < 1e-8);
    }

    #[test]
    fn vanishing_sections_are_reported() {
        let pol = TruncationPolicy::default();
        let origin = TotalPoint::new(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(phi_k(&kt(), 1, origin, &pol), Err(Error::AllSectionsVanish { .. })));
    }

    #[test]
    fn gamma_identification() {
        let b = kt();
        let p = TotalPoint::new(0.0, 0.2, 0.3, 0.4);
        let q = b.act_letter(Letter::new(Gen::A, 1), p);
        assert!(gamma_equivalent(&b, p, q, 1e-9));
        assert!(!gamma_equivalent(&b, p, p.shifted(2, 0.5), 1e-9));
    }

    #[test]
    fn pivot_selection() {
        let v = vec![c(0.1, 0.0), c(3.0, 0.0), c(0.0, -2.0)];
        assert_eq!(pivot_index(&v, Pivot::Largest), 1);
        assert_eq!(pivot_index(&v, Pivot::SecondLargest), 2);
        let w = chart(&v, 1);
        assert!((w[0] - c(0.1 / 3.0, 0.0)).norm() < 1e-16 && (w[1] - c(0.0, -2.0 / 3.0)).norm() < 1e-16);
    }
}
