//! The five verification suites. Each returns a finished [`Report`].
//!
//! Random inputs come from a ChaCha8 stream seeded by `config.seed` and are drawn
//! sequentially before any parallel evaluation, so reports depend only on the config.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use theta_bundle::bundles::{BundleTag, BundleType, Gen, GroupElement, TotalPoint};
use theta_bundle::embedding::{
    equivariance_check, fs_distance, injectivity_scan, phi_k, rank_check, Grid4, ProjectivePoint,
};
use theta_bundle::linalg::singular_values_complex;
use theta_bundle::symplectic::{
    chern_pairing, closedness_residual, cohomology_class_report, fs_pullback, nondegeneracy_check,
    pfaffian_determinant_mismatch, standard_cycles,
};
use theta_bundle::theta_core::{
    count_zeros_fundamental_domain, heat_equation_residual, modular_transform_check, theta11, theta11_deriv, ModularMatrix, Tau,
    TruncationPolicy,
};
use theta_bundle::theta_m::{ku_closed_form, ku_cross_check, ku_theta, solve_shift_constraints, ShiftPair, ThetaM};
use theta_bundle::{Error, Result as LibResult};

use crate::config::RunConfig;
use crate::report::{Check, Relation, Report};
use crate::UsageError;

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Theta,
    Bundle,
    Sections,
    Embed,
    Symplectic,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Theta, Command::Bundle, Command::Sections, Command::Embed, Command::Symplectic];

    pub fn name(self) -> &'static str {
        match self {
            Command::Theta => "theta",
            Command::Bundle => "bundle",
            Command::Sections => "sections",
            Command::Embed => "embed",
            Command::Symplectic => "symplectic",
        }
    }

    /// Tolerance names accepted by `--tol.NAME`, with defaults.
    pub fn tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Command::Theta => &[
                ("quasi_periodicity_z_plus_1", 1e-12),
                ("quasi_periodicity_z_plus_tau", 1e-11),
                ("modular_constancy", 1e-9),
                ("heat_equation", 1e-6),
            ],
            Command::Bundle => &[
                ("omega_mobius", 1e-12),
                ("fiber_coordinate_transform", 1e-11),
                ("relators_fix_points", 1e-12),
                ("group_action", 1e-12),
                ("coframe_cocycle", 1e-12),
            ],
            Command::Sections => &[
                ("multiplier", 1e-7),
                ("cocycle", 1e-7),
                ("relator_multiplier", 1e-7),
                ("product_law", 1e-7),
                ("negative_control", 1e-2),
                ("ku_cross_check", 1e-8),
                ("ku_closed_form", 1e-9),
                ("basis_dimension", 1e-8),
            ],
            Command::Embed => &[
                ("rank", 1e-6),
                ("collision", 1e-6),
                ("equivariance", 1e-9),
                ("truncation_stability", 1e-9),
            ],
            Command::Symplectic => &[
                ("pfaffian", 1e-6),
                ("antisymmetry", 1e-12),
                ("pfaffian_determinant", 1e-8),
                ("closedness", 1e-4),
                ("closedness_order", 1.0),
                ("period", 1e-4),
                ("chern", 1e-9),
            ],
        }
    }

    /// Fault names accepted by `--inject-fault`.
    pub fn faults(self) -> &'static [&'static str] {
        match self {
            Command::Theta => &["theta-prefactor"],
            Command::Bundle => &["omega-conjugate"],
            Command::Sections => &["drop-square-constraint"],
            Command::Embed | Command::Symplectic => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| UsageError(format!("unknown command {s:?}")))
    }
}

/// Validates `config` for `command` and runs the suite.
pub fn run(command: Command, config: &RunConfig) -> Result<Report, UsageError> {
    config.validate()?;
    for name in config.tolerances.keys() {
        if !command.tolerances().iter().any(|(n, _)| n == name) {
            let known: Vec<&str> = command.tolerances().iter().map(|(n, _)| *n).collect();
            return Err(UsageError(format!("unknown tolerance {name:?} for {command}; known: {}", known.join(", "))));
        }
    }
    if let Some(fault) = &config.inject_fault {
        if !command.faults().contains(&fault.as_str()) {
            return Err(UsageError(format!("unknown fault {fault:?} for {command}")));
        }
    }
    let ctx = Ctx::new(command, config)?;
    let mut report = Report::new(&format!("{command} verify"), config.clone());
    report.set("tolerances_used", &ctx.tolerances);
    match command {
        Command::Theta => theta_suite(&ctx, &mut report)?,
        Command::Bundle => bundle_suite(&ctx, &mut report),
        Command::Sections => sections_suite(&ctx, &mut report),
        Command::Embed => embed_suite(&ctx, &mut report)?,
        Command::Symplectic => symplectic_suite(&ctx, &mut report)?,
    }
    Ok(report.finish())
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    bundle: BundleType<f64>,
    policy: TruncationPolicy<f64>,
    tolerances: BTreeMap<String, f64>,
}

impl<'a> Ctx<'a> {
    fn new(command: Command, cfg: &'a RunConfig) -> Result<Self, UsageError> {
        let tolerances = command.tolerances().iter().map(|&(n, d)| (n.to_string(), cfg.tolerance(n, d))).collect();
        Ok(Self { cfg, bundle: cfg.resolve_bundle()?, policy: cfg.truncation, tolerances })
    }

    fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    fn fault(&self, name: &str) -> bool {
        self.cfg.inject_fault.as_deref() == Some(name)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed)
    }

    fn usage_grid(&self, n: usize, offset: f64) -> Result<Grid4, UsageError> {
        Grid4::new(n, offset).map_err(crate::config::usage)
    }
}

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn random_point(rng: &mut ChaCha8Rng) -> TotalPoint<f64> {
    TotalPoint::new(rng.gen(), rng.gen(), rng.gen(), rng.gen())
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<TotalPoint<f64>> {
    (0..n).map(|_| random_point(rng)).collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Pushes `check(value)` or, when the computation failed, a failed check naming the error.
fn guarded(report: &mut Report, name: &str, relation: Relation, threshold: f64, value: LibResult<f64>) {
    report.push(match value {
        Ok(v) => Check::compare(name, v, relation, threshold),
        Err(e) => Check::errored(name, relation, threshold, e),
    });
}

fn relative(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

const DEFAULT_TAUS: [(f64, f64); 5] = [(0.0, 1.0), (0.5, 0.866), (-0.3, 0.7), (0.2, 2.0), (0.45, 0.35)];

/// Step of the `tau` difference in the heat-equation check.
const HEAT_STEP: f64 = 1e-4;

fn modular_matrices() -> [ModularMatrix; 5] {
    [
        ModularMatrix::S,
        ModularMatrix::T,
        ModularMatrix { a: 1, b: 0, c: 1, d: 1 },
        ModularMatrix { a: 2, b: 1, c: 1, d: 1 },
        ModularMatrix { a: 1, b: -1, c: 1, d: 0 },
    ]
}

#[derive(Serialize)]
struct ModularConstant {
    tau: [f64; 2],
    matrix: [i64; 4],
    zeta: [f64; 2],
    residual: f64,
}

fn theta_suite(ctx: &Ctx, report: &mut Report) -> Result<(), UsageError> {
    let taus: Vec<Tau<f64>> = match ctx.cfg.tau()? {
        Some(t) => vec![t],
        None => DEFAULT_TAUS.iter().map(|&(re, im)| Tau::new(c(re, im)).expect("default tau is valid")).collect(),
    };
    let policy = ctx.policy;
    // the fault multiplies by a non-periodic prefactor; only the quasi-periodicity checks see it
    let prefactor = ctx.fault("theta-prefactor");
    let theta = move |z: C64, tau: Tau<f64>| -> LibResult<C64> {
        let v = theta11(z, tau, &policy)?.value;
        Ok(if prefactor { v * (c(0.0, -PI) * z).exp() } else { v })
    };
    let mut rng = ctx.rng();
    let zs: Vec<C64> = (0..ctx.cfg.samples).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))).collect();
    let pairs: Vec<(Tau<f64>, C64)> = taus.iter().flat_map(|&t| zs.iter().map(move |&z| (t, z))).collect();

    let plus_one: LibResult<Vec<f64>> = pairs
        .par_iter()
        .map(|&(tau, z)| Ok(relative(theta(z + 1.0, tau)?, -theta(z, tau)?)))
        .collect();
    guarded(report, "quasi_periodicity_z_plus_1", Relation::Below, ctx.tol("quasi_periodicity_z_plus_1"), plus_one.map(max_of));

    let plus_tau: LibResult<Vec<f64>> = pairs
        .par_iter()
        .map(|&(tau, z)| {
            let t = tau.value();
            let factor = -(c(0.0, -PI) * (t + z * 2.0)).exp();
            Ok(relative(theta(z + t, tau)?, factor * theta(z, tau)?))
        })
        .collect();
    guarded(report, "quasi_periodicity_z_plus_tau", Relation::Below, ctx.tol("quasi_periodicity_z_plus_tau"), plus_tau.map(max_of));

    // samples spread over the period cell, away from the lattice
    let n = ctx.cfg.samples as f64;
    let modular: LibResult<Vec<ModularConstant>> = taus
        .par_iter()
        .flat_map_iter(|&tau| modular_matrices().into_iter().map(move |m| (tau, m)))
        .map(|(tau, m)| {
            let samples: Vec<C64> = (0..ctx.cfg.samples)
                .map(|j| {
                    let f = j as f64 / n;
                    c(0.03 + 0.94 * f, 0.0) + tau.value() * (0.05 + 0.82 * f)
                })
                .collect();
            let check = modular_transform_check(&samples, tau, m, &policy)?;
            Ok(ModularConstant {
                tau: [tau.value().re, tau.value().im],
                matrix: [m.a, m.b, m.c, m.d],
                zeta: [check.zeta_estimate.re, check.zeta_estimate.im],
                residual: check.max_residual,
            })
        })
        .collect();
    let worst = modular.as_ref().map(|v| max_of(v.iter().map(|m| m.residual))).map_err(Clone::clone);
    guarded(report, "modular_constancy", Relation::Below, ctx.tol("modular_constancy"), worst);
    if let Ok(constants) = modular {
        report.set("modular_constants", constants);
    }

    let heat: LibResult<Vec<f64>> = pairs
        .par_iter()
        .map(|&(tau, z)| {
            // relative to the size of the terms, floored at 1
            let d_tau = theta11_deriv(z, tau, 2, &policy)?.value.norm() / (4.0 * PI);
            Ok(heat_equation_residual(z, tau, HEAT_STEP, &policy)? / d_tau.max(1.0))
        })
        .collect();
    match heat {
        Ok(v) => report.push(Check::below("heat_equation", max_of(v), ctx.tol("heat_equation")).with_note("|residual| / max(1, |d_tau theta|)")),
        Err(e) => report.push(Check::errored("heat_equation", Relation::Below, ctx.tol("heat_equation"), e)),
    }

    let counts: LibResult<Vec<i64>> = taus.par_iter().map(|&tau| count_zeros_fundamental_domain(tau, &policy)).collect();
    match counts {
        Ok(counts) => {
            let off = counts.iter().filter(|&&n| n != 1).count();
            report.push(Check::equal("zero_count", off as f64, 0.0).with_note("number of tau values without exactly one zero per cell"));
            report.set("zero_counts", counts);
        }
        Err(e) => report.push(Check::errored("zero_count", Relation::Equal, 0.0, e)),
    }
    report.set("taus", taus.iter().map(|t| [t.value().re, t.value().im]).collect::<Vec<_>>());
    report.set("heat_step", HEAT_STEP);
    Ok(())
}

fn bundle_suite(ctx: &Ctx, report: &mut Report) {
    let b = &ctx.bundle;
    let conjugate = ctx.fault("omega-conjugate");
    let omega = |x: f64| if conjugate { b.omega(x).conj() } else { b.omega(x) };

    let min_im = (0..1000).map(|j| omega(-2.0 + 4.0 * j as f64 / 999.0).im).fold(f64::INFINITY, f64::min);
    report.push(Check::above("im_omega_positive", min_im, 0.0).with_note("min Im omega over 1000 points of [-2, 2]"));

    let mut rng = ctx.rng();
    let points: Vec<TotalPoint<f64>> =
        (0..ctx.cfg.samples).map(|_| TotalPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0), rng.gen(), rng.gen())).collect();
    let (mut mobius, mut fiber) = (0.0f64, 0.0f64);
    for &p in &points {
        let r = b.omega_transform_check(p);
        let scale = b.omega(p.x + 1.0).norm().max(1.0);
        mobius = mobius.max(r.residual_omega / scale);
        fiber = fiber.max(r.residual_z / scale);
    }
    report.push(Check::below("omega_mobius", mobius, ctx.tol("omega_mobius")));
    report.push(Check::below("fiber_coordinate_transform", fiber, ctx.tol("fiber_coordinate_transform")));

    let relators = b.relator_words();
    let (mut moved, mut not_identity) = (0.0f64, 0usize);
    for (_, word) in &relators {
        not_identity += usize::from(!b.element_of_word(word).is_identity());
        for &p in &points {
            moved = moved.max(b.apply_word(word, p).max_abs_diff(p));
        }
    }
    report.push(Check::below("relators_fix_points", moved, ctx.tol("relators_fix_points")));
    report.push(Check::equal("relators_reduce_to_identity", not_identity as f64, 0.0).with_note("relators whose normal form is not the identity"));

    let element = |rng: &mut ChaCha8Rng| {
        GroupElement::new(rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-3..=3), rng.gen_range(-3..=3))
    };
    let (mut action, mut normal_form) = (0.0f64, 0usize);
    for &p in &points {
        let (g, h) = (element(&mut rng), element(&mut rng));
        let lhs = b.act(&b.compose(&g, &h), p);
        let rhs = b.act(&g, b.act(&h, p));
        let scale = rhs.to_array().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        action = action.max(lhs.max_abs_diff(rhs) / scale);
        normal_form += usize::from(b.element_of_word(&g.word()) != g);
    }
    report.push(Check::below("group_action", action, ctx.tol("group_action")));
    report.push(Check::equal("normal_form_round_trip", normal_form as f64, 0.0));

    match coframe_residual(b, &points) {
        Ok(r) => report.push(Check::below("coframe_cocycle", r, ctx.tol("coframe_cocycle"))),
        Err(e @ Error::NonRealPower { .. }) => report.skip("coframe_cocycle", format!("no real one-parameter subgroup: {e}")),
        Err(e) => report.push(Check::errored("coframe_cocycle", Relation::Below, ctx.tol("coframe_cocycle"), e)),
    }

    report.set("bundle", b.label());
    report.set("monodromy", serde_json::json!({ "A": b.pair().a().0, "B": b.pair().b().0 }));
    report.set("min_im_omega", min_im);
    report.set("relators", relators.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
}

/// `max |F(x+1, y) - A^{-1} F(x, y)|` relative, for the coframe `F = A^{-x} B^{-y}`.
fn coframe_residual(b: &BundleType<f64>, points: &[TotalPoint<f64>]) -> LibResult<f64> {
    let ai = b.pair().a().inverse_sl2();
    let mut worst = 0.0f64;
    for p in points {
        let y = p.y.round();
        let here = b.left_invariant_coframe(p.x, y)?;
        let next = b.left_invariant_coframe(p.x + 1.0, y)?;
        for i in 0..2 {
            for j in 0..2 {
                let want = ai.0[i][0] as f64 * here[0][j] + ai.0[i][1] as f64 * here[1][j];
                worst = worst.max((next[i][j] - want).abs() / (1.0 + want.abs()));
            }
        }
    }
    Ok(worst)
}

const COCYCLE_TRIPLES: usize = 50;
const PRODUCT_FACTORS: usize = 4;
const KU_POINTS: usize = 20;

fn small_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))
}

/// Fiber shifts summing to zero, with vanishing square sum when `square` is set.
fn fiber_shifts(rng: &mut ChaCha8Rng, square: bool) -> Vec<C64> {
    let (a, b) = (small_complex(rng), small_complex(rng));
    if square {
        let (g, d) = solve_shift_constraints(a, b);
        vec![a, b, g, d]
    } else {
        let g = small_complex(rng);
        vec![a, b, g, -(a + b + g)]
    }
}

fn random_shifts(rng: &mut ChaCha8Rng, square: bool) -> Vec<ShiftPair<f64>> {
    let lambdas = fiber_shifts(rng, square);
    let mut mus: Vec<C64> = (0..PRODUCT_FACTORS - 1).map(|_| small_complex(rng)).collect();
    mus.push(-mus.iter().sum::<C64>());
    lambdas.into_iter().zip(mus).map(|(l, m)| ShiftPair::new(l, m)).collect()
}

fn sections_suite(ctx: &Ctx, report: &mut Report) {
    let b = &ctx.bundle;
    let tm = ThetaM::new(b.clone(), ctx.policy);
    let needs_square = b.pair().a().gamma() != 0;
    let mut rng = ctx.rng();

    let grid = Grid4::new(ctx.cfg.grid, ctx.cfg.grid_offset).expect("validated grid");
    let grid_points = grid.points::<f64>();
    for gen in Gen::ALL {
        let r: LibResult<Vec<f64>> = grid_points.par_iter().map(|&p| Ok(tm.verify_multiplier_near(gen, p)?.0)).collect();
        guarded(report, &format!("multiplier_{gen}"), Relation::Below, ctx.tol("multiplier"), r.map(max_of));
    }

    let element = |rng: &mut ChaCha8Rng| {
        GroupElement::new(rng.gen_range(-1..=1), rng.gen_range(-1..=1), rng.gen_range(-2..=2), rng.gen_range(-2..=2))
    };
    let triples: Vec<(GroupElement, GroupElement, TotalPoint<f64>)> =
        (0..COCYCLE_TRIPLES).map(|_| (element(&mut rng), element(&mut rng), random_point(&mut rng))).collect();
    let r: LibResult<Vec<f64>> = triples.par_iter().map(|(g, h, p)| tm.cocycle_check(g, h, *p)).collect();
    guarded(report, "cocycle", Relation::Below, ctx.tol("cocycle"), r.map(max_of));

    let relator_points = random_points(&mut rng, ctx.cfg.samples);
    let words = b.relator_words();
    let r: LibResult<Vec<f64>> = words
        .par_iter()
        .flat_map_iter(|(_, w)| relator_points.iter().map(move |&p| (w, p)))
        .map(|(w, p)| tm.relator_residual(w, p))
        .collect();
    guarded(report, "relator_multiplier", Relation::Below, ctx.tol("relator_multiplier"), r.map(max_of));

    // dropping the square-sum constraint is the injected fault
    let square = needs_square && !ctx.fault("drop-square-constraint");
    let cases: Vec<(Vec<ShiftPair<f64>>, TotalPoint<f64>)> =
        (0..ctx.cfg.samples).map(|_| (random_shifts(&mut rng, square), random_point(&mut rng))).collect();
    for gen in Gen::ALL {
        let r: LibResult<Vec<f64>> =
            cases.par_iter().map(|(shifts, p)| tm.product_law_residual(shifts, gen, *p, false)).collect();
        guarded(report, &format!("product_law_{gen}"), Relation::Below, ctx.tol("product_law"), r.map(max_of));
    }

    // negative control: break the constraint the bundle actually needs
    let p = random_point(&mut rng);
    let violated: Vec<ShiftPair<f64>> = if needs_square {
        random_shifts(&mut rng, false)
    } else {
        vec![ShiftPair::new(c(0.2, 0.0), c(0.0, 0.0)), ShiftPair::new(c(0.1, 0.0), c(0.0, 0.0))]
    };
    let r: LibResult<Vec<f64>> = Gen::ALL.iter().map(|&g| tm.product_law_residual(&violated, g, p, false)).collect();
    let note = if needs_square { "square sum of fiber shifts nonzero" } else { "fiber shifts do not sum to zero" };
    match r {
        Ok(v) => report.push(Check::above("negative_control", max_of(v), ctx.tol("negative_control")).with_note(note)),
        Err(e) => report.push(Check::errored("negative_control", Relation::Above, ctx.tol("negative_control"), e)),
    }
    let rejected = tm.product_section(&violated, p).is_err();
    report.push(Check::equal("constraint_validation", f64::from(u8::from(rejected)), 1.0).with_note("1 when violated shifts are rejected"));

    if b.tag() == BundleTag::C {
        let points = random_points(&mut rng, KU_POINTS);
        let r: LibResult<Vec<f64>> = points.par_iter().map(|&p| ku_cross_check(p, &ctx.policy)).collect();
        guarded(report, "ku_cross_check", Relation::Below, ctx.tol("ku_cross_check"), r.map(max_of));
        let r: LibResult<Vec<f64>> = points
            .par_iter()
            .map(|&p| Ok(relative(ku_theta(1, 0, 0, p, &ctx.policy)?.value, ku_closed_form(p, &ctx.policy)?)))
            .collect();
        guarded(report, "ku_closed_form", Relation::Below, ctx.tol("ku_closed_form"), r.map(max_of));
    } else {
        let reason = "the comparison function is defined on the Kodaira-Thurston row only";
        report.skip("ku_cross_check", reason);
        report.skip("ku_closed_form", reason);
    }

    let k = ctx.cfg.k;
    let dim = (k * k) as usize;
    // a uniform grid with 2k nodes per axis resolves every basis function
    let basis_grid = Grid4::new(2 * k as usize, 0.5).expect("valid grid");
    let rows: LibResult<Vec<Vec<C64>>> = basis_grid
        .points::<f64>()
        .par_iter()
        .map(|&p| theta_bundle::embedding::section_vector(b, k, p, &ctx.policy))
        .collect();
    match rows {
        Ok(rows) => {
            let sv = singular_values_complex(&rows);
            let ratio = sv[sv.len() - 1] / sv[0];
            report.push(Check::above("basis_dimension", ratio, ctx.tol("basis_dimension")).with_note(format!("smallest/largest of {dim} singular values")));
        }
        Err(e) => report.push(Check::errored("basis_dimension", Relation::Above, ctx.tol("basis_dimension"), e)),
    }

    report.set("bundle", b.label());
    report.set("k", k);
    report.set("product_constraints", if needs_square { "sum lambda = sum mu = 0, sum lambda^2 = 0" } else { "sum lambda = sum mu = 0" });
    if let Ok(z) = tm.zeta() {
        report.set("zeta", [z.re, z.im]);
    }
}

/// Full rank and injectivity are guaranteed from `k = 3` when `A` is upper
/// triangular and from `k = 4` otherwise.
pub fn embedding_guaranteed(bundle: &BundleType<f64>, k: u32) -> bool {
    if bundle.pair().a().gamma() == 0 {
        k >= 3
    } else {
        k >= 4
    }
}

#[derive(Serialize)]
struct ActionSummary {
    generator: Gen,
    is_projectively_scalar: bool,
    spread: f64,
    scalar: Option<[f64; 2]>,
}

fn embed_suite(ctx: &Ctx, report: &mut Report) -> Result<(), UsageError> {
    let (b, k) = (&ctx.bundle, ctx.cfg.k);
    let guaranteed = embedding_guaranteed(b, k);
    let why = format!("rank and injectivity are not guaranteed for {} at k = {k}", b.label());
    let mut rng = ctx.rng();

    let points = random_points(&mut rng, ctx.cfg.rank_points);
    let ranks: LibResult<Vec<_>> = points.par_iter().map(|&p| rank_check(b, k, p, ctx.tol("rank"), &ctx.policy)).collect();
    match ranks {
        Ok(ranks) => {
            let deficient = ranks.iter().filter(|r| r.rank_at_tol < 4).count();
            let min_sv = ranks.iter().map(|r| r.singular_values[3]).fold(f64::INFINITY, f64::min);
            if guaranteed {
                report.push(Check::equal("rank_full", deficient as f64, 0.0).with_note("points with rank below 4"));
            } else {
                report.skip("rank_full", why.clone());
            }
            report.set("rank_grid", ranks.iter().map(|r| r.rank_at_tol).collect::<Vec<_>>());
            report.set("min_singular_value", min_sv);
        }
        Err(e) => report.push(Check::errored("rank_full", Relation::Equal, 0.0, e)),
    }

    let grid = ctx.usage_grid(ctx.cfg.grid, ctx.cfg.grid_offset)?;
    match injectivity_scan(b, k, &grid, ctx.tol("collision"), &ctx.policy) {
        Ok(scan) => {
            if guaranteed {
                report.push(Check::equal("injectivity", scan.collisions.len() as f64, 0.0).with_note(format!("collisions in a {}^4 scan", grid.n)));
            } else {
                report.skip("injectivity", why.clone());
            }
            report.set("collisions", scan.collisions.len());
            report.set("min_offdiagonal_fs_distance", scan.min_offdiagonal_fs_distance);
            report.set("vanishing_points", scan.vanishing.len());
        }
        Err(e) => report.push(Check::errored("injectivity", Relation::Equal, 0.0, e)),
    }

    let small = ctx.usage_grid(2, 0.3)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut actions = Vec::new();
    for gen in Gen::ALL {
        match equivariance_check(b, k, gen, &small, ctx.tol("equivariance"), &ctx.policy) {
            Ok(r) => {
                if gen == Gen::C {
                    let dev = r.scalar.map_or(f64::INFINITY, |s| (s - sign).norm());
                    let value = if r.is_projectively_scalar { dev } else { f64::INFINITY };
                    report.push(Check::below("equivariance_c", value, ctx.tol("equivariance")).with_note("|ratio - (-1)^k|, infinite when not scalar"));
                }
                actions.push(ActionSummary {
                    generator: gen,
                    is_projectively_scalar: r.is_projectively_scalar,
                    spread: r.spread,
                    scalar: r.scalar.map(|s| [s.re, s.im]),
                });
            }
            Err(e) if gen == Gen::C => report.push(Check::errored("equivariance_c", Relation::Below, ctx.tol("equivariance"), e)),
            Err(_) => {}
        }
    }
    report.set("induced_actions", actions);

    let tight = TruncationPolicy::new(ctx.policy.target_abs_error * 1e-6, ctx.policy.max_terms * 2).map_err(crate::config::usage)?;
    let stability: LibResult<Vec<f64>> = small
        .points::<f64>()
        .par_iter()
        .map(|&p| {
            let a: ProjectivePoint<f64> = phi_k(b, k, p, &ctx.policy)?;
            fs_distance(&a, &phi_k(b, k, p, &tight)?)
        })
        .collect();
    guarded(report, "truncation_stability", Relation::Below, ctx.tol("truncation_stability"), stability.map(max_of));

    report.set("bundle", b.label());
    report.set("k", k);
    report.set("embedding_guaranteed", guaranteed);
    Ok(())
}

/// The logarithm branches behind the Chern pairing.
const LOG_BRANCHES: [(&str, &str); 4] = [
    ("a", "Log(-gamma omega + delta)/2 - pi i gamma Z^2/(-gamma omega + delta), constant log zeta dropped"),
    ("b", "-2 pi i (x + i y) + pi, plus pi i when B = I"),
    ("c", "pi i"),
    ("d", "-2 pi i Z - pi i omega + pi i"),
];

const CHERN_POINTS: usize = 10;

fn symplectic_suite(ctx: &Ctx, report: &mut Report) -> Result<(), UsageError> {
    let (b, k) = (&ctx.bundle, ctx.cfg.k);
    let h = ctx.cfg.fd_step;
    let mut rng = ctx.rng();

    let grid = ctx.usage_grid(ctx.cfg.grid, ctx.cfg.grid_offset)?;
    let forms: LibResult<Vec<_>> = grid.points::<f64>().par_iter().map(|&p| fs_pullback(b, k, p, h, &ctx.policy)).collect();
    let mut pfaffian_min = None;
    match forms {
        Ok(forms) => {
            let rel: Vec<f64> = forms.iter().map(|m| (nondegeneracy_check(m) / (m.max_abs() * m.max_abs())).abs()).collect();
            let min = rel.iter().copied().fold(f64::INFINITY, |m, v| if v.is_nan() { f64::NAN } else { m.min(v) });
            report.push(Check::above("pfaffian_nonzero", min, ctx.tol("pfaffian")).with_note("min |Pf| / max|entry|^2 over the grid"));
            pfaffian_min = Some(min);
            let asym = max_of(forms.iter().map(|m| {
                let e = m.entries();
                let worst = (0..4).flat_map(|i| (0..4).map(move |j| (e[i][j] + e[j][i]).abs())).fold(0.0, f64::max);
                worst / m.max_abs()
            }));
            report.push(Check::below("antisymmetry", asym, ctx.tol("antisymmetry")));
            let mismatch = max_of(forms.iter().map(pfaffian_determinant_mismatch));
            report.push(Check::below("pfaffian_squared_is_determinant", mismatch, ctx.tol("pfaffian_determinant")));
        }
        Err(e) => report.push(Check::errored("pfaffian_nonzero", Relation::Above, ctx.tol("pfaffian"), e)),
    }

    let p = random_point(&mut rng);
    let step = ctx.cfg.closedness_step;
    let residuals = closedness_residual(b, k, p, step, &ctx.policy)
        .and_then(|fine| Ok((fine, closedness_residual(b, k, p, 2.0 * step, &ctx.policy)?)));
    match residuals {
        Ok((fine, coarse)) => {
            report.push(Check::below("closedness", fine, ctx.tol("closedness")).with_note("scale-relative |d Omega|"));
            if fine < 1e-14 && coarse < 1e-14 {
                report.skip("closedness_order", "residual vanishes at both steps");
            } else {
                let ratio = coarse / fine;
                report.push(Check::below("closedness_order", (ratio - 4.0).abs(), ctx.tol("closedness_order")).with_note(format!("step-doubling ratio {ratio:.4}, 4 for second order")));
            }
            report.set("closedness_residuals", [fine, coarse]);
        }
        Err(e) => report.push(Check::errored("closedness", Relation::Below, ctx.tol("closedness"), e)),
    }

    let mut periods = BTreeMap::new();
    match cohomology_class_report(b, k, ctx.cfg.resolution, &ctx.policy) {
        Ok(r) => {
            for cycle in &r.cycles {
                let name = format!("period_{}", cycle.name);
                report.push(Check::below(&name, cycle.period_error, ctx.tol("period")).with_note(format!("expected {}", cycle.expected_period)));
                periods.insert(cycle.name.clone(), cycle.period);
            }
            report.set("degenerate_factors", r.degenerate_factors);
        }
        Err(e) => report.push(Check::errored("period", Relation::Below, ctx.tol("period"), e)),
    }

    let mut chern = BTreeMap::new();
    let points = random_points(&mut rng, CHERN_POINTS);
    match standard_cycles(b) {
        Ok(cycles) => {
            for cycle in cycles {
                let name = cycle.name();
                let evals: LibResult<Vec<_>> = points.iter().map(|&u| chern_pairing(b, &cycle, u)).collect();
                let evals = match evals {
                    Ok(e) => e,
                    Err(e) => {
                        report.push(Check::errored(&format!("chern_integer_{name}"), Relation::Below, ctx.tol("chern"), e));
                        continue;
                    }
                };
                let deviation = max_of(evals.iter().map(|e| e.deviation.max(e.imaginary_part.abs())));
                report.push(Check::below(&format!("chern_integer_{name}"), deviation, ctx.tol("chern")));
                let first = evals[0].nearest_integer;
                let spread = evals.iter().filter(|e| e.nearest_integer != first).count();
                report.push(Check::equal(&format!("chern_point_independence_{name}"), spread as f64, 0.0));
                let expected = if matches!(cycle.gens, (Gen::A, Gen::B) | (Gen::C, Gen::D)) { 1.0 } else { 0.0 };
                report.push(Check::equal(&format!("chern_value_{name}"), first as f64, expected));
                chern.insert(name, first);
            }
        }
        Err(e) => report.push(Check::errored("chern_integer", Relation::Below, ctx.tol("chern"), e)),
    }

    report.set("bundle", b.label());
    report.set("k", k);
    report.set("pfaffian_min", pfaffian_min);
    report.set("periods", periods);
    report.set("chern", chern);
    report.set("log_branches", LOG_BRANCHES.iter().map(|(g, f)| (g.to_string(), f.to_string())).collect::<BTreeMap<_, _>>());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use theta_bundle::bundles::BundleSpec;

    fn quick(bundle: &str, k: u32) -> RunConfig {
        RunConfig {
            bundle: BundleSpec::Row { tag: bundle.into(), k: None },
            k,
            grid: 2,
            grid_offset: 0.25,
            rank_points: 4,
            samples: 4,
            resolution: 8,
            ..RunConfig::default()
        }
    }

    #[test]
    fn guarantee_depends_on_gamma() {
        let c1 = BundleType::representative(BundleTag::C, Some(1)).unwrap();
        let b2 = BundleType::representative(BundleTag::B2, None).unwrap();
        assert!(embedding_guaranteed(&c1, 3) && !embedding_guaranteed(&c1, 2));
        assert!(embedding_guaranteed(&b2, 4) && !embedding_guaranteed(&b2, 3));
    }

    #[test]
    fn unknown_tolerance_is_a_usage_error() {
        let mut cfg = quick("A", 3);
        cfg.tolerances.insert("nope".into(), 1e-3);
        assert!(run(Command::Bundle, &cfg).is_err());
        cfg.tolerances.clear();
        cfg.tolerances.insert("group_action".into(), 1e-3);
        assert!(run(Command::Bundle, &cfg).is_ok());
    }

    #[test]
    fn faults_belong_to_their_suite() {
        let cfg = RunConfig { inject_fault: Some("omega-conjugate".into()), ..quick("A", 3) };
        assert!(run(Command::Theta, &cfg).is_err());
        let r = run(Command::Bundle, &cfg).unwrap();
        assert!(!r.check("im_omega_positive").unwrap().passed);
    }

    #[test]
    fn constrained_shifts_satisfy_both_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shifts = random_shifts(&mut rng, true);
        let sum: C64 = shifts.iter().map(|s| s.lambda).sum();
        let squares: C64 = shifts.iter().map(|s| s.lambda * s.lambda).sum();
        let mus: C64 = shifts.iter().map(|s| s.mu).sum();
        assert!(sum.norm() < 1e-14 && squares.norm() < 1e-14 && mus.norm() < 1e-14);
    }

    #[test]
    fn small_symplectic_run_reports_schema() {
        let r = run(Command::Symplectic, &quick("B2", 3)).unwrap();
        for key in ["bundle", "k", "pfaffian_min", "periods", "chern", "log_branches"] {
            assert!(r.data.contains_key(key), "{key}");
        }
        assert_eq!(r.data["chern"]["T_ab"], 1);
    }
}
