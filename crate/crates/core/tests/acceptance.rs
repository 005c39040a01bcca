//! Acceptance suite: one pass/fail line per criterion. Runs without the test
//! harness so the lines are always printed; exits non-zero on any failure.

use hsflow_core::diagnostics::{
    check_blowup_records, check_energy_identity, entropy_of_density, gradient_consistency, heat_kernel,
    BLOWUP_PRODUCT_THRESHOLD,
};
use hsflow_core::flows::{run_flow, RecordOptions, RunOutcome};
use hsflow_core::g2::{full_torsion, g2_grid, torsion_divergence};
use hsflow_core::grid::s3_hopf_tension;
use hsflow_core::init::{build, rng, InitSpec};
use hsflow_core::selftest::standard_selftest;
use hsflow_core::{Field, FlowState, GridSpec, S3Homogeneous, StepperConfig, Structure, StructureKind};
use nalgebra::Rotation3;
use std::f64::consts::PI;
use std::time::Instant;

const SELFTEST_SECONDS: f64 = 5.0;
const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_SECONDS: f64 = 10.0;
const IDENTITY_REL_TOL: f64 = 0.05;
const IDENTITY_MIN_RATIO: f64 = 3.0;
const IDENTITY_SECONDS: f64 = 300.0;
/// Per-step energy increase allowed, relative to E₀.
const MONOTONE_TOL: f64 = 1e-12;
const REGRESSION_STEPS: usize = 200;
const GRADIENT_TOL: f64 = 0.01;
const GRADIENT_CONFIGS: u64 = 5;
const GRADIENT_DIRECTIONS: usize = 20;
const GRADIENT_STEP: f64 = 1e-5;
const CONVERGED_RATIO: f64 = 1e-8;
const CONVERGE_MAX_STEPS: usize = 100_000;
const ENTROPY_TOL: f64 = 1e-10;

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: String) -> Line {
    Line { pass, detail }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn quiet() -> impl FnMut(usize, &FlowState, Option<&hsflow_core::diagnostics::DiagnosticsRecord>) {
    |_, _, _| {}
}

fn grid_for(kind: StructureKind, n: usize) -> GridSpec {
    match kind {
        StructureKind::Parallelism => GridSpec::torus(3, 3, n, 1.0).unwrap(),
        StructureKind::Acs => GridSpec::torus(4, 4, n, 1.0).unwrap(),
        StructureKind::Acts => GridSpec::torus(5, 3, n, 1.0).unwrap(),
        StructureKind::G2 => g2_grid(3, n, 1.0).unwrap(),
    }
}

const KINDS: [StructureKind; 4] =
    [StructureKind::Parallelism, StructureKind::Acs, StructureKind::Acts, StructureKind::G2];

fn selftest() -> Line {
    let t = Instant::now();
    let r = standard_selftest();
    let s = secs(t);
    let worst = r.rows.iter().map(|x| x.max_error).fold(0.0, f64::max);
    let failed: Vec<_> = r.rows.iter().filter(|x| !x.pass).map(|x| x.name.clone()).collect();
    let recovered = r.row("beta_recovery_72").map_or(f64::NAN, |x| x.value);
    line(
        r.pass() && s < SELFTEST_SECONDS,
        format!(
            "{} rows, recovery constant {recovered:.12}, max error {worst:.1e}, failed {failed:?}, {s:.2}s",
            r.rows.len()
        ),
    )
}

fn fixed_points() -> Line {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for kind in KINDS {
        let s = build(kind, &grid_for(kind, 6), &InitSpec::Constant).unwrap();
        worst = worst.max(s.tension().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let mut hopf: f64 = s3_hopf_tension(&S3Homogeneous::hopf()).unwrap().abs().max();
    for (a, b, c) in [(0.4, -1.0, 2.0), (3.0, 0.2, -0.9)] {
        let m = S3Homogeneous::new(Rotation3::from_euler_angles(a, b, c).into_inner()).unwrap();
        hopf = hopf.max(s3_hopf_tension(&m).unwrap().abs().max());
    }
    let mut div: f64 = 0.0;
    for (axis, dir) in [(0, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), (2, vec![0.2, -0.7, 0.1, 0.4, 0.0, 0.3, -0.5])] {
        let s = build(
            StructureKind::G2,
            &grid_for(StructureKind::G2, 8),
            &InitSpec::ConstantTorsion { axis, wavenumber: 1, direction: dir },
        )
        .unwrap();
        let f = s.field().unwrap();
        div = div.max(torsion_divergence(&full_torsion(f, None).unwrap()).max_abs());
        div = div.max(s.tension().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let s = secs(t);
    line(
        worst < FIXED_POINT_TOL && hopf < FIXED_POINT_TOL && div < FIXED_POINT_TOL && s < FIXED_POINT_SECONDS,
        format!("constant |rhs| {worst:.1e}, Hopf |tension| {hopf:.1e}, constant-T |div T| {div:.1e}, {s:.2}s"),
    )
}

/// Max relative identity error and wall time of a single-mode run.
fn identity_run(kind: StructureKind, grid: GridSpec, steps: usize) -> (f64, f64) {
    let t = Instant::now();
    let s = build(kind, &grid, &InitSpec::SingleMode { amplitude: 0.5, axis: 0, wavenumber: 1, beta: None }).unwrap();
    let cfg = StepperConfig { max_steps: steps, stop_tolerance: 0.0, ..StepperConfig::default() };
    let r = run_flow(FlowState::new(0.0, s).unwrap(), &cfg, &RecordOptions::default(), &mut quiet()).unwrap();
    assert_eq!(r.outcome, RunOutcome::MaxSteps, "{kind:?}: {:?}", r.outcome);
    let rep = check_energy_identity(&r.records, IDENTITY_REL_TOL).unwrap();
    (rep.max_rel_error, secs(t))
}

fn energy_identity() -> Line {
    let (f1, tf1) = identity_run(StructureKind::Parallelism, grid_for(StructureKind::Parallelism, 16), 20);
    let (f2, tf2) = identity_run(StructureKind::Parallelism, grid_for(StructureKind::Parallelism, 32), 80);
    let (g1, tg1) = identity_run(StructureKind::G2, grid_for(StructureKind::G2, 32), 5);
    let (g2, tg2) = identity_run(StructureKind::G2, grid_for(StructureKind::G2, 64), 20);
    let pass = f1 <= IDENTITY_REL_TOL
        && g1 <= IDENTITY_REL_TOL
        && f1 / f2 >= IDENTITY_MIN_RATIO
        && g1 / g2 >= IDENTITY_MIN_RATIO
        && tf1 + tf2 < IDENTITY_SECONDS
        && tg1 + tg2 < IDENTITY_SECONDS;
    line(
        pass,
        format!(
            "frames 16³ {f1:.2e} -> 32³ {f2:.2e} (ratio {:.1}, {:.0}s); g2 32³ {g1:.2e} -> 64³ {g2:.2e} (ratio {:.1}, {:.0}s)",
            f1 / f2,
            tf1 + tf2,
            g1 / g2,
            tg1 + tg2
        ),
    )
}

fn regression_set() -> Vec<(String, Structure)> {
    let mut out = Vec::new();
    let grids = [
        (StructureKind::Parallelism, GridSpec::torus(3, 3, 16, 1.0).unwrap()),
        (StructureKind::Acs, GridSpec::torus(4, 4, 8, 1.0).unwrap()),
        (StructureKind::Acts, GridSpec::torus(5, 3, 12, 1.0).unwrap()),
        (StructureKind::G2, g2_grid(3, 12, 1.0).unwrap()),
    ];
    for (kind, g) in grids {
        let specs = [
            ("mode", InitSpec::SingleMode { amplitude: 0.5, axis: 0, wavenumber: 1, beta: None }),
            ("smooth1", InitSpec::RandomSmooth { amplitude: 0.5, cutoff: 2, seed: 1 }),
            ("smooth2", InitSpec::RandomSmooth { amplitude: 1.0, cutoff: 2, seed: 2 }),
        ];
        for (name, spec) in specs {
            out.push((format!("{}/{name}", kind.name()), build(kind, &g, &spec).unwrap()));
        }
    }
    out
}

/// Monotonicity and blow-up-bound lines from the shared regression runs.
fn regression() -> (Line, Line) {
    let mut worst_rise = f64::NEG_INFINITY;
    let mut mono_ok = true;
    let mut bound_ok = true;
    let mut worst_product: f64 = 0.0;
    let mut problems = Vec::new();
    let t = Instant::now();
    for (name, s) in regression_set() {
        let cfg = StepperConfig { max_steps: REGRESSION_STEPS, ..StepperConfig::default() };
        let r = run_flow(FlowState::new(0.0, s).unwrap(), &cfg, &RecordOptions::default(), &mut quiet()).unwrap();
        if matches!(r.outcome, RunOutcome::Error(_) | RunOutcome::Blowup) {
            problems.push(format!("{name}: {:?}", r.outcome));
            mono_ok = false;
            bound_ok = false;
            continue;
        }
        let e0 = r.records[0].energy;
        for w in r.records.windows(2) {
            let rise = (w[1].energy - w[0].energy) / e0;
            worst_rise = worst_rise.max(rise);
            if rise > MONOTONE_TOL {
                mono_ok = false;
                problems.push(format!("{name}: rise {rise:.1e} at step {}", w[1].step));
            }
        }
        let b = check_blowup_records(&r.records, BLOWUP_PRODUCT_THRESHOLD).unwrap();
        worst_product = worst_product.max(b.product);
        if !b.pass {
            bound_ok = false;
            problems.push(format!("{name}: C ε̄₀ δ̂ = {:.3}", b.product));
        }
    }
    let s = secs(t);
    (
        line(
            mono_ok,
            format!(
                "12 runs × {REGRESSION_STEPS} RK4 steps, worst relative rise {worst_rise:.1e}, {s:.0}s {problems:?}"
            ),
        ),
        line(bound_ok, format!("12 runs, worst C ε̄₀ δ̂ = {worst_product:.3} (threshold {BLOWUP_PRODUCT_THRESHOLD})")),
    )
}

fn gradient() -> Line {
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in KINDS {
        let n = if kind == StructureKind::Acs { 6 } else { 8 };
        let mut worst: f64 = 0.0;
        for seed in 1..=GRADIENT_CONFIGS {
            let s =
                build(kind, &grid_for(kind, n), &InitSpec::RandomSmooth { amplitude: 0.6, cutoff: 2, seed }).unwrap();
            let r = gradient_consistency(&s, GRADIENT_DIRECTIONS, GRADIENT_STEP, &mut rng(1000 + seed)).unwrap();
            worst = worst.max(r.max_rel_error);
        }
        pass &= worst <= GRADIENT_TOL;
        parts.push(format!("{} {worst:.1e}", kind.name()));
    }
    line(pass, format!("max relative error: {}", parts.join(", ")))
}

fn convergence() -> Line {
    let mut parts = Vec::new();
    let mut pass = true;
    for (kind, g) in [
        (StructureKind::Parallelism, GridSpec::torus(3, 3, 16, 1.0).unwrap()),
        (StructureKind::Acs, GridSpec::torus(4, 4, 8, 1.0).unwrap()),
    ] {
        let s = build(kind, &g, &InitSpec::RandomSmooth { amplitude: 0.05, cutoff: 2, seed: 1 }).unwrap();
        let cfg = StepperConfig { max_steps: CONVERGE_MAX_STEPS, sample_interval: 100, ..StepperConfig::default() };
        let r = run_flow(FlowState::new(0.0, s).unwrap(), &cfg, &RecordOptions::default(), &mut quiet()).unwrap();
        let ratio = r.final_state.energy() / r.records[0].energy;
        pass &= r.outcome == RunOutcome::Converged && ratio < CONVERGED_RATIO;
        parts.push(format!("{} {} after {} steps, E/E₀ {ratio:.1e}", kind.name(), r.outcome.label(), r.steps));
    }
    line(pass, parts.join("; "))
}

/// Dense lattice sum Θ with 81 shifts per active axis.
fn dense_kernel(grid: &GridSpec, center: &[f64], v: f64) -> Field {
    Field::from_fn(grid, 1, |x, o| {
        let mut k = 1.0;
        for a in 0..grid.n() {
            let l = grid.lengths()[a];
            if !grid.is_active(a) {
                k /= l;
                continue;
            }
            let s: f64 = (-40..=40)
                .map(|j| {
                    let d = x[a] - center[a] + j as f64 * l;
                    (-d * d / (4.0 * v)).exp()
                })
                .sum();
            k *= s / (4.0 * PI * v).sqrt();
        }
        o[0] = k;
    })
}

fn entropy() -> Line {
    let g = GridSpec::new(vec![32, 24, 1], vec![1.0, 1.5, 2.0]).unwrap();
    let c = [0.4, 0.9, 0.0];
    let densities = [
        Field::constant(&g, &[1.3]),
        Field::from_fn(&g, 1, |x, o| o[0] = (-((x[0] - 0.4).powi(2) + (x[1] - 0.9).powi(2)) / 0.03).exp()),
        Field::from_fn(&g, 1, |x, o| o[0] = 1.0 + (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1] / 1.5).cos()),
    ];
    let mut norm_err: f64 = 0.0;
    let mut oracle_err: f64 = 0.0;
    for (t, horizon) in [(0.0, 0.05), (0.1, 0.3), (0.0, 2.0)] {
        let v = horizon - t;
        norm_err = norm_err.max((heat_kernel(&g, &c, v).integral() - 1.0).abs());
        let dense = dense_kernel(&g, &c, v);
        for d in &densities {
            let f = entropy_of_density(d, t, horizon, &c).unwrap();
            let oracle = 0.5 * v * dense.integral_dot(d);
            oracle_err = oracle_err.max((f - oracle).abs() / oracle.abs().max(1.0));
        }
    }
    line(
        norm_err < ENTROPY_TOL && oracle_err < ENTROPY_TOL,
        format!("kernel normalization error {norm_err:.1e}, oracle error {oracle_err:.1e} (3 densities × 3 horizons)"),
    )
}

fn main() {
    let (mono, bound) = regression();
    let lines = [
        ("1 algebraic identities", selftest()),
        ("2 fixed points", fixed_points()),
        ("3 energy identity", energy_identity()),
        ("4 monotonicity", mono),
        ("5 doubling/blow-up bound", bound),
        ("6 gradient consistency", gradient()),
        ("7 convergence at small energy", convergence()),
        ("8 entropy functional", entropy()),
    ];
    let mut all = true;
    for (name, l) in &lines {
        println!("criterion {name}: {} | {}", if l.pass { "PASS" } else { "FAIL" }, l.detail);
        all &= l.pass;
    }
    if !all {
        std::process::exit(1);
    }
}
