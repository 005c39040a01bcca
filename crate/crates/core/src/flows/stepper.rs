//! Explicit time stepping with retraction, and the run driver.

use super::{g2flow, FlowState, Structure, StructureKind};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    /// Fixed step; `None` means `cfl` times the stability bound.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub scheme: Scheme,
    pub max_steps: usize,
    /// Converged once ‖τ^V‖_∞ falls below this.
    pub stop_tolerance: f64,
    /// Largest accepted retraction change per step; `None` disables the check.
    pub repair_tol: Option<f64>,
    /// Largest accepted G2 metric drift; `None` disables monitoring.
    pub drift_tol: Option<f64>,
    pub enforce_cfl: bool,
    /// Records are emitted every this many steps (and at the end).
    pub sample_interval: usize,
    /// Blow-up once sup ε exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: None,
            cfl: 0.5,
            scheme: Scheme::Rk4,
            max_steps: 1000,
            stop_tolerance: 1e-8,
            repair_tol: Some(1e-6),
            drift_tol: Some(1e-3),
            enforce_cfl: true,
            sample_interval: 1,
            blowup_factor: 1e6,
        }
    }
}

/// Λ per kind: 1 for frames, J and ξ; measured for G2.
pub fn diffusion_constant(kind: StructureKind) -> f64 {
    match kind {
        StructureKind::G2 => g2flow::g2_diffusion_constant(),
        _ => 1.0,
    }
}

/// h²/(2nΛ) over the active axes; infinite when nothing varies.
pub fn cfl_bound(structure: &Structure) -> f64 {
    match structure.field() {
        Some(f) if f.grid().n_active() > 0 => {
            let h = f.grid().h_min();
            h * h / (2.0 * f.grid().n_active() as f64 * diffusion_constant(structure.kind()))
        }
        _ => f64::INFINITY,
    }
}

/// Step size used for `structure` under `cfg`.
pub fn resolve_dt(structure: &Structure, cfg: &StepperConfig) -> Result<f64> {
    let bound = cfg.cfl * cfl_bound(structure);
    let dt = match cfg.dt {
        Some(dt) => dt,
        None if bound.is_finite() => bound,
        None => 1e-2,
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("time step {dt}")));
    }
    if cfg.enforce_cfl && dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    Ok(dt)
}

fn add_scaled(base: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = base.to_vec();
    for (a, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += a * x;
        }
    }
    out
}

/// Advances one step: scheme update, finiteness check, retraction with
/// repair check, drift monitoring, cache refresh.
pub fn step(state: &FlowState, cfg: &StepperConfig) -> Result<FlowState> {
    let dt = resolve_dt(&state.structure, cfg)?;
    step_with_dt(state, cfg, dt)
}

pub(crate) fn step_with_dt(state: &FlowState, cfg: &StepperConfig, dt: f64) -> Result<FlowState> {
    let s = &state.structure;
    let u = s.values();
    let k1 = state.tension();
    let raw = match cfg.scheme {
        Scheme::Euler => add_scaled(u, &[(dt, k1)]),
        Scheme::Rk4 => {
            let k2 = s.with_values(add_scaled(u, &[(0.5 * dt, k1)])).tension();
            let k3 = s.with_values(add_scaled(u, &[(0.5 * dt, &k2)])).tension();
            let k4 = s.with_values(add_scaled(u, &[(dt, &k3)])).tension();
            add_scaled(u, &[(dt / 6.0, k1), (dt / 3.0, &k2), (dt / 3.0, &k3), (dt / 6.0, &k4)])
        }
    };
    let t = state.t + dt;
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(t));
    }
    let (next, repair) = s.with_values(raw).retract_with_repair();
    if let Some(tol) = cfg.repair_tol {
        if repair > tol {
            return Err(Error::ConstraintBlowup { repair, tol });
        }
    }
    let drift = match (&next, cfg.drift_tol) {
        (Structure::G2(_), None) => f64::NAN,
        _ => next.constraint_drift()?,
    };
    if let (Structure::G2(_), Some(tol)) = (&next, cfg.drift_tol) {
        if drift > tol {
            return Err(Error::MetricDrift { drift, tol });
        }
    }
    let out = FlowState::with_drift(t, next, drift);
    if !(out.eps.is_finite() && out.kappa.is_finite()) {
        return Err(Error::NonFinite(t));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Converged,
    MaxSteps,
    Blowup,
    Error(Error),
}

impl RunOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            RunOutcome::Converged => "converged",
            RunOutcome::MaxSteps => "max_steps",
            RunOutcome::Blowup => "blowup",
            RunOutcome::Error(_) => "error",
        }
    }
}

/// Optional diagnostics computed per record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordOptions {
    /// (center, horizon) of the entropy functional.
    pub entropy: Option<(Vec<f64>, f64)>,
    /// Compute the harmonic-map residual for G2 records.
    pub harmonic_residual: bool,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub steps: usize,
    pub dt: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
}

/// Steps until convergence, `max_steps`, blow-up or a step error.
/// `observer` sees every accepted state with its step index and, on sampled
/// steps, the emitted record. Setup problems (invalid initial structure,
/// CFL violation) are returned as errors; failures during the run become
/// the `Error` outcome with everything recorded so far.
pub fn run_flow(
    initial: FlowState,
    cfg: &StepperConfig,
    opts: &RecordOptions,
    observer: &mut dyn FnMut(usize, &FlowState, Option<&DiagnosticsRecord>),
) -> Result<RunResult> {
    let dt = resolve_dt(&initial.structure, cfg)?;
    let init_tol = if initial.kind() == StructureKind::G2 { cfg.drift_tol.unwrap_or(f64::INFINITY) } else { 1e-8 };
    if initial.drift > init_tol {
        return Err(Error::ConstraintViolation(format!("initial constraint drift {:e}", initial.drift)));
    }
    let interval = cfg.sample_interval.max(1);
    let eps0 = initial.eps_max();
    let mut records = Vec::new();
    let mut state = initial;
    let mut emit = |n: usize, s: &FlowState, records: &mut Vec<DiagnosticsRecord>, force: bool| -> Result<()> {
        if n.is_multiple_of(interval) || force {
            if records.last().is_some_and(|r: &DiagnosticsRecord| r.step == n) {
                return Ok(());
            }
            let rec = diagnostics::record(s, n, opts)?;
            observer(n, s, Some(&rec));
            records.push(rec);
        } else {
            observer(n, s, None);
        }
        Ok(())
    };
    let fail = |e: Error, n: usize, state: FlowState, records: Vec<DiagnosticsRecord>| RunResult {
        outcome: RunOutcome::Error(e),
        steps: n,
        dt,
        records,
        final_state: state,
    };
    if let Err(e) = emit(0, &state, &mut records, true) {
        return Ok(fail(e, 0, state, records));
    }
    let mut n = 0;
    let outcome = loop {
        if state.tension_sup() < cfg.stop_tolerance {
            break RunOutcome::Converged;
        }
        if eps0 > 0.0 && state.eps_max() > cfg.blowup_factor * eps0 {
            break RunOutcome::Blowup;
        }
        if n >= cfg.max_steps {
            break RunOutcome::MaxSteps;
        }
        match step_with_dt(&state, cfg, dt) {
            Ok(next) => state = next,
            Err(e) => break RunOutcome::Error(e),
        }
        n += 1;
        if let Err(e) = emit(n, &state, &mut records, false) {
            break RunOutcome::Error(e);
        }
    };
    if let Err(e) = emit(n, &state, &mut records, true) {
        return Ok(fail(e, n, state, records));
    }
    Ok(RunResult { outcome, steps: n, dt, records, final_state: state })
}
