//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hkq_core::checks::{
    ddc, projection_properties, reduced_k1, run_suite, slice_properties, CheckConfig,
    PropertyResult, Suite,
};
use hkq_core::matcore::{from_row_major, real};
use hkq_core::potentials::evaluate;
use hkq_core::{ConfigPoint, PotentialKind, Truncation};

struct Outcome {
    passed: bool,
    detail: String,
}

fn props(outcome: &mut Outcome, list: &[PropertyResult], names: &[&str]) {
    for name in names {
        match list.iter().find(|p| p.name == *name) {
            Some(p) => {
                outcome.passed &= p.passed();
                outcome.detail.push_str(&format!(
                    " {}={:.2e}/{:.0e}(n={})",
                    p.name, p.max_residual, p.tolerance, p.samples
                ));
                if let Some(e) = &p.error {
                    outcome.detail.push_str(&format!(" [{e}]"));
                }
            }
            None => {
                outcome.passed = false;
                outcome.detail.push_str(&format!(" {name}=missing"));
            }
        }
    }
}

fn budget(outcome: &mut Outcome, elapsed: Duration, limit: Duration) {
    outcome.passed &= elapsed < limit;
    outcome.detail.push_str(&format!(
        " time={:.2}s/<{}s",
        elapsed.as_secs_f64(),
        limit.as_secs()
    ));
}

fn new_outcome() -> Outcome {
    Outcome {
        passed: true,
        detail: String::new(),
    }
}

fn cfg(trials: usize, max_dim: usize) -> CheckConfig {
    CheckConfig {
        trials,
        seed: 20261016,
        max_dim,
        ..CheckConfig::default()
    }
}

fn column_point(k: f64, x: [f64; 2], fiber: [f64; 2]) -> ConfigPoint {
    let col = |v: [f64; 2]| from_row_major(2, 1, &[real(v[0]), real(v[1])]).unwrap();
    ConfigPoint::new(Truncation::new(1, 1, k).unwrap(), col(x), col(fiber)).unwrap()
}

fn pinned(outcome: &mut Outcome, kind: PotentialKind, pt: &ConfigPoint, want: f64, tol: f64) {
    for &route in kind.routes() {
        let got = evaluate(kind, route, pt);
        let ok = matches!(got, Ok(v) if (v - want).abs() <= tol);
        outcome.passed &= ok;
        match got {
            Ok(v) => outcome.detail.push_str(&format!(" {route}={v:.10}")),
            Err(e) => outcome.detail.push_str(&format!(" {route}=error({e})")),
        }
    }
    outcome
        .detail
        .push_str(&format!(" want={want:.10}±{tol:.0e}"));
}

fn main() -> ExitCode {
    let r2 = 2f64.sqrt();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let mut o = new_outcome();
    let rep = run_suite(Suite::Quaternion, &cfg(100, 6)).unwrap();
    props(
        &mut o,
        &rep.properties,
        &[
            "i_squared_is_minus_id",
            "quaternion_products",
            "omega_is_metric_of_i",
        ],
    );
    budget(&mut o, rep.elapsed, Duration::from_secs(1));
    results.push((1, "quaternion relations and compatibility", o));

    let mut o = new_outcome();
    // three structures per trial
    let rep = run_suite(Suite::Moment, &cfg(67, 6)).unwrap();
    props(&mut o, &rep.properties, &["moment_pairing"]);
    budget(&mut o, rep.elapsed, Duration::from_secs(2));
    results.push((2, "moment map defining equation", o));

    let mut o = new_outcome();
    let start = Instant::now();
    let list = projection_properties(&cfg(100, 8)).unwrap();
    props(
        &mut o,
        &list,
        &["project1_level_residual", "project1_equivariance"],
    );
    budget(&mut o, start.elapsed(), Duration::from_secs(5));
    results.push((3, "level projection", o));

    let potentials = run_suite(Suite::Potentials, &cfg(100, 6)).unwrap();

    let mut o = new_outcome();
    props(&mut o, &potentials.properties, &["k1_route_agreement"]);
    pinned(
        &mut o,
        PotentialKind::K1,
        &column_point(r2, [r2, 0.0], [0.0, 1.0]),
        0.2100727247,
        1e-7,
    );
    results.push((4, "K1 route agreement and pinned value", o));

    let mut o = new_outcome();
    props(&mut o, &potentials.properties, &["k3_route_agreement"]);
    pinned(
        &mut o,
        PotentialKind::K3,
        &column_point(r2, [r2, 0.5 * r2], [0.0, -0.5 * r2]),
        0.2071068,
        1e-7,
    );
    results.push((5, "K3 route agreement and pinned value", o));

    let maps = run_suite(Suite::Maps, &cfg(100, 6)).unwrap();

    let mut o = new_outcome();
    props(
        &mut o,
        &maps.properties,
        &["psi1_section_round_trip", "psi3_section_round_trip"],
    );
    results.push((6, "map round trips", o));

    let mut o = new_outcome();
    props(
        &mut o,
        &maps.properties,
        &["psi1_fiber_constancy", "psi3_fiber_constancy"],
    );
    results.push((7, "fiber constancy", o));

    let mut o = new_outcome();
    let slice = CheckConfig {
        slice_max_dim: 4,
        ..cfg(30, 4)
    };
    let list = slice_properties(&slice).unwrap();
    props(
        &mut o,
        &list,
        &[
            "decomposition_reconstruction",
            "decomposition_block_orthogonality",
        ],
    );
    results.push((8, "slice decomposition", o));

    let mut o = new_outcome();
    let list = slice_properties(&CheckConfig {
        trials: 50,
        ..slice
    })
    .unwrap();
    props(&mut o, &list, &["reduced_pairing_independence"]);
    results.push((9, "reduced pairing representative independence", o));

    let mut o = new_outcome();
    let start = Instant::now();
    let list = ddc(&cfg(10, 3), &reduced_k1).unwrap();
    props(
        &mut o,
        &list,
        &["flat_ddc_matches_omega", "reduced_ddc_matches_omega1"],
    );
    budget(&mut o, start.elapsed(), Duration::from_secs(30));
    results.push((10, "flat and reduced ddc", o));

    let mut o = new_outcome();
    props(&mut o, &maps.properties, &["curvature_operator_routes"]);
    results.push((11, "curvature identity", o));

    let mut o = new_outcome();
    props(
        &mut o,
        &potentials.properties,
        &["k1_zero_section", "k3_zero_fiber"],
    );
    results.push((12, "zero-section pinning", o));

    let mut o = new_outcome();
    props(
        &mut o,
        &potentials.properties,
        &["k3hat_angles_match_spectral"],
    );
    results.push((13, "angle formula normalization", o));

    let mut all = true;
    for (id, name, outcome) in &results {
        all &= outcome.passed;
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}:{}", outcome.detail);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        results.iter().filter(|r| r.2.passed).count(),
        results.len()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
