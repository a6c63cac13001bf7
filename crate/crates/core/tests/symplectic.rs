use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_bundle::bundles::*;
use theta_bundle::embedding::{base_sections, fiber_sections, Grid4};
use theta_bundle::symplectic::*;
use theta_bundle::theta_core::TruncationPolicy;

fn pol() -> TruncationPolicy<f64> {
    TruncationPolicy::default()
}

fn kt() -> BundleType<f64> {
    BundleType::representative(BundleTag::C, Some(1)).unwrap()
}

fn b2() -> BundleType<f64> {
    BundleType::representative(BundleTag::B2, None).unwrap()
}

/// `-(1/pi) Im <P d_a v, P d_b v> / |v|^2` with `P` the projection orthogonal to `v`:
/// the line-area-1 Fubini-Study form in homogeneous coordinates, no chart involved.
fn homogeneous_form(values: &dyn Fn(TotalPoint<f64>) -> Vec<Complex<f64>>, p: TotalPoint<f64>, h: f64) -> [[f64; 4]; 4] {
    let v = values(p);
    let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let project = |u: Vec<Complex<f64>>| {
        let overlap: Complex<f64> = u.iter().zip(&v).map(|(a, b)| a * b.conj()).sum::<Complex<f64>>() / norm2;
        u.iter().zip(&v).map(|(a, b)| a - overlap * b).collect::<Vec<_>>()
    };
    let d: Vec<Vec<Complex<f64>>> = (0..4)
        .map(|axis| {
            let plus = values(p.shifted(axis, h));
            let minus = values(p.shifted(axis, -h));
            project(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect();
    let mut m = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let inner: Complex<f64> = d[a].iter().zip(&d[b]).map(|(x, y)| x * y.conj()).sum();
            m[a][b] = -inner.im / (PI * norm2);
        }
    }
    m
}

#[test]
fn pullback_matches_homogeneous_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (b, k) in [(kt(), 3u32), (b2(), 3), (BundleType::representative(BundleTag::G, None).unwrap(), 2)] {
        for _ in 0..4 {
            let p = TotalPoint::new(rng.gen(), rng.gen(), rng.gen(), rng.gen());
            let ours = fs_pullback(&b, k, p, 1e-5, &pol()).unwrap();
            let fiber = homogeneous_form(&|q| fiber_sections(&b, k, q, &pol()).unwrap(), p, 1e-5);
            let base = homogeneous_form(&|q| base_sections(k, q, &pol()).unwrap(), p, 1e-5);
            for i in 0..4 {
                for j in 0..4 {
                    let want = fiber[i][j] + base[i][j];
                    assert!((ours.get(i, j) - want).abs() < 1e-7 * ours.max_abs(), "{} ({i},{j})", b.label());
                }
            }
        }
    }
}

#[test]
fn pullback_is_antisymmetric_with_the_expected_blocks() {
    let p = TotalPoint::new(0.37, 0.61, 0.23, 0.89);
    let m = fs_pullback(&b2(), 3, p, 1e-5, &pol()).unwrap();
    assert!(TwoFormMatrix::new(m.entries()).is_ok());
    // fiber sections do not see y, base sections do not see s, t
    assert_eq!(m.get(1, 2), 0.0);
    assert_eq!(m.get(1, 3), 0.0);
    assert!(m.get(0, 1).abs() > 1e-6 && m.get(2, 3).abs() > 1e-6);
    assert!(pfaffian_determinant_mismatch(&m) < 1e-8);
}

#[test]
fn pullback_converges_at_second_order() {
    let p = TotalPoint::new(0.37, 0.61, 0.23, 0.89);
    let reference = fs_pullback(&kt(), 3, p, 1e-4, &pol()).unwrap();
    let err = |h: f64| {
        let m = fs_pullback(&kt(), 3, p, h, &pol()).unwrap();
        (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| (m.get(a, b) - reference.get(a, b)).abs()).fold(0.0, f64::max)
    };
    let ratio = err(2e-2) / err(1e-2);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn pfaffian_nonzero_on_a_coarse_grid() {
    for (b, k) in [(kt(), 3u32), (b2(), 3)] {
        for p in Grid4::new(3, 0.0).unwrap().points::<f64>() {
            let m = fs_pullback(&b, k, p, 1e-5, &pol()).unwrap();
            let rel = nondegeneracy_check(&m) / (m.max_abs() * m.max_abs());
            assert!(rel.abs() > 1e-6, "{} {p:?}: {rel}", b.label());
        }
    }
}

#[test]
fn pullback_is_closed() {
    let p = TotalPoint::new(0.37, 0.61, 0.23, 0.89);
    let r1 = closedness_residual(&kt(), 3, p, 2e-3, &pol()).unwrap();
    let r2 = closedness_residual(&kt(), 3, p, 1e-3, &pol()).unwrap();
    assert!(r2 < 1e-4, "{r2}");
    assert!((3.0..5.0).contains(&(r1 / r2)), "{r1} {r2}");
    let flat = closedness_residual(&b2(), 3, p, 1e-3, &pol()).unwrap();
    assert!(flat < 1e-4, "{flat}");
}

#[test]
fn periods_are_k_times_chern_numbers() {
    let r = cohomology_class_report(&kt(), 3, 32, &pol()).unwrap();
    let periods: Vec<f64> = r.cycles.iter().map(|c| c.period).collect();
    let want = [3.0, 3.0, 0.0, 0.0];
    for (got, w) in periods.iter().zip(want) {
        assert!((got - w).abs() < 1e-4, "{periods:?}");
    }
    assert!(r.passed && !r.degenerate_factors);

    let r = cohomology_class_report(&b2(), 4, 32, &pol()).unwrap();
    assert_eq!(r.cycles.len(), 2);
    assert!(r.cycles.iter().all(|c| (c.period - 4.0).abs() < 1e-4), "{:?}", r.cycles);
}

#[test]
fn period_quadrature_converges_at_least_at_second_order() {
    let cycle = CycleSpec::new(&kt(), Gen::C, Gen::D, TotalPoint::new(0.37, 0.21, 0.0, 0.0)).unwrap();
    let err = |n| (period_integral(&kt(), 2, &cycle, n, &pol()).unwrap() - 2.0).abs();
    let (coarse, fine) = (err(4), err(8));
    assert!(fine < 1e-12 || coarse / fine > 4.0, "{coarse} {fine}");
}

#[test]
fn degree_one_report_is_flagged() {
    let r = cohomology_class_report(&kt(), 1, 4, &pol()).unwrap();
    assert!(r.degenerate_factors && !r.passed);
    assert!(r.cycles.iter().all(|c| c.period == 0.0));
}

#[test]
fn chern_numbers_are_integers_independent_of_the_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<TotalPoint<f64>> = (0..10).map(|_| TotalPoint::new(rng.gen(), rng.gen(), rng.gen(), rng.gen())).collect();
    let mut bundles = BundleType::table_representatives();
    bundles.push(BundleType::representative(BundleTag::C, Some(3)).unwrap());
    for b in bundles {
        let cycles = standard_cycles(&b).unwrap();
        for cycle in &cycles {
            let want = if matches!(cycle.gens, (Gen::A, Gen::B) | (Gen::C, Gen::D)) { 1 } else { 0 };
            for &u in &points {
                let e = chern_pairing(&b, cycle, u).unwrap();
                assert_eq!(e.nearest_integer, want, "{} {}", b.label(), cycle.name());
                assert!(e.deviation < 1e-9 && e.imaginary_part.abs() < 1e-9, "{} {} {e:?}", b.label(), cycle.name());
            }
        }
    }
}
