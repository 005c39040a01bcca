//! Run configuration: a TOML file with dotted sections, unknown keys
//! rejected, validated before any field is allocated.

use hsflow_core::flows::RecordOptions;
use hsflow_core::init::InitSpec;
use hsflow_core::{AltForm, GridSpec, Scheme, SkewMatrix, StepperConfig, StructureKind};
use nalgebra::Rotation3;
use serde::Deserialize;
use std::path::PathBuf;

/// Upper bound on stored values (grid points × components) per field.
pub const MAX_VALUES: usize = 1 << 28;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: StructureKind,
    #[serde(default)]
    pub grid: Option<GridSection>,
    pub init: InitSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Points per axis; 1 marks an axis the fields do not vary along.
    pub sizes: Vec<usize>,
    /// Period per axis, default 1.
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Constant,
    SingleMode,
    RandomSmooth,
    Hopf,
    ConstantTorsion,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub generator: Generator,
    pub amplitude: Option<f64>,
    pub axis: Option<usize>,
    pub wavenumber: Option<u32>,
    /// Upper-triangular entries of the so(m) generator, row by row.
    pub beta: Option<Vec<f64>>,
    pub cutoff: Option<u32>,
    pub seed: Option<u64>,
    /// Euler angles (roll, pitch, yaw) of the Hopf frame rotation.
    pub rotation: Option<[f64; 3]>,
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub scheme: Scheme,
    pub dt: Option<f64>,
    pub cfl: f64,
    pub max_steps: usize,
    pub stop_tolerance: f64,
    /// Negative disables the check.
    pub repair_tol: f64,
    /// Negative disables drift monitoring.
    pub drift_tol: f64,
    pub enforce_cfl: bool,
    pub blowup_factor: f64,
}

impl Default for StepperSection {
    fn default() -> Self {
        let d = StepperConfig::default();
        StepperSection {
            scheme: d.scheme,
            dt: d.dt,
            cfl: d.cfl,
            max_steps: d.max_steps,
            stop_tolerance: d.stop_tolerance,
            repair_tol: d.repair_tol.unwrap_or(-1.0),
            drift_tol: d.drift_tol.unwrap_or(-1.0),
            enforce_cfl: d.enforce_cfl,
            blowup_factor: d.blowup_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub sample_interval: usize,
    /// 0 writes no snapshots.
    pub snapshot_interval: usize,
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { sample_interval: 1, snapshot_interval: 0, dir: PathBuf::from("hsflow-out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub entropy_center: Option<Vec<f64>>,
    pub entropy_horizon: Option<f64>,
    pub harmonic_residual: bool,
    pub blowup_fit: bool,
}

/// Everything a run needs, checked.
#[derive(Debug, Clone)]
pub struct Plan {
    pub kind: StructureKind,
    /// `None` for the Hopf frame on S³.
    pub grid: Option<GridSpec>,
    pub init: InitSpec,
    pub stepper: StepperConfig,
    pub record: RecordOptions,
    pub snapshot_interval: usize,
    pub out_dir: PathBuf,
    pub blowup_fit: bool,
}

fn bad(msg: impl Into<String>) -> String {
    msg.into()
}

fn components(kind: StructureKind, n: usize) -> usize {
    match kind {
        StructureKind::Parallelism | StructureKind::Acs => n * n,
        StructureKind::Acts => n + n * n,
        StructureKind::G2 => 35,
    }
}

fn check_dimension(kind: StructureKind, n: usize) -> Result<(), String> {
    let ok = match kind {
        StructureKind::Parallelism => (1..=8).contains(&n),
        StructureKind::Acs => n.is_multiple_of(2) && (2..=8).contains(&n),
        StructureKind::Acts => !n.is_multiple_of(2) && (3..=7).contains(&n),
        StructureKind::G2 => n == 7,
    };
    if ok {
        Ok(())
    } else {
        Err(bad(format!("grid dimension {n} does not fit kind {}", kind.name())))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Validates and resolves the configuration. `seed` and `out_dir`
    /// override the file.
    pub fn plan(&self, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<Plan, String> {
        let kind = self.kind;
        let init = &self.init;
        let grid = if init.generator == Generator::Hopf {
            if kind != StructureKind::Parallelism {
                return Err(bad("the hopf generator needs kind = \"parallelism\""));
            }
            None
        } else {
            let g = self.grid.as_ref().ok_or_else(|| bad("missing [grid] section"))?;
            let n = g.sizes.len();
            check_dimension(kind, n)?;
            let lengths = g.lengths.clone().unwrap_or_else(|| vec![1.0; n]);
            let mut values = components(kind, n);
            for &s in &g.sizes {
                values = values
                    .checked_mul(s)
                    .filter(|v| *v <= MAX_VALUES)
                    .ok_or_else(|| bad(format!("grid {:?} needs more than {MAX_VALUES} stored values", g.sizes)))?;
            }
            Some(GridSpec::new(g.sizes.clone(), lengths).map_err(|e| e.to_string())?)
        };
        let spec = self.init_spec(seed, grid.as_ref())?;
        let st = &self.stepper;
        if let Some(dt) = st.dt {
            positive("stepper.dt", dt)?;
        }
        positive("stepper.cfl", st.cfl)?;
        positive("stepper.blowup_factor", st.blowup_factor)?;
        if !(st.stop_tolerance >= 0.0) {
            return Err(bad("stepper.stop_tolerance must be non-negative"));
        }
        let opt = |v: f64| if v < 0.0 { None } else { Some(v) };
        let stepper = StepperConfig {
            dt: st.dt,
            cfl: st.cfl,
            scheme: st.scheme,
            max_steps: st.max_steps,
            stop_tolerance: st.stop_tolerance,
            repair_tol: opt(st.repair_tol),
            drift_tol: opt(st.drift_tol),
            enforce_cfl: st.enforce_cfl,
            sample_interval: self.output.sample_interval,
            blowup_factor: st.blowup_factor,
        };
        if self.output.sample_interval == 0 {
            return Err(bad("output.sample_interval must be at least 1"));
        }
        let d = &self.diagnostics;
        let entropy = match (&d.entropy_center, d.entropy_horizon) {
            (None, None) => None,
            (Some(c), Some(h)) => {
                let g = grid.as_ref().ok_or_else(|| bad("the entropy functional needs a grid"))?;
                if c.len() != g.n() {
                    return Err(bad(format!("entropy_center needs {} coordinates", g.n())));
                }
                Some((c.clone(), positive("diagnostics.entropy_horizon", h)?))
            }
            _ => return Err(bad("entropy_center and entropy_horizon go together")),
        };
        Ok(Plan {
            kind,
            grid,
            init: spec,
            stepper,
            record: RecordOptions { entropy, harmonic_residual: d.harmonic_residual },
            snapshot_interval: self.output.snapshot_interval,
            out_dir: out_dir.unwrap_or_else(|| self.output.dir.clone()),
            blowup_fit: d.blowup_fit,
        })
    }

    fn init_spec(&self, seed: Option<u64>, grid: Option<&GridSpec>) -> Result<InitSpec, String> {
        let i = &self.init;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| bad(format!("init.{name} is required")));
        let active_axis = |axis: usize| -> Result<usize, String> {
            match grid {
                Some(g) if axis < g.n() && g.is_active(axis) => Ok(axis),
                _ => Err(bad(format!("init.axis {axis} is not an active grid axis"))),
            }
        };
        Ok(match i.generator {
            Generator::Constant => InitSpec::Constant,
            Generator::SingleMode => {
                let m = if self.kind == StructureKind::G2 { 7 } else { grid.map_or(0, |g| g.n()) };
                let beta = match &i.beta {
                    Some(v) => Some(
                        AltForm::from_coeffs(m, 2, v.clone())
                            .and_then(|f| SkewMatrix::from_form(&f))
                            .map_err(|e| format!("init.beta: {e}"))?,
                    ),
                    None => None,
                };
                InitSpec::SingleMode {
                    amplitude: need(i.amplitude, "amplitude")?,
                    axis: active_axis(i.axis.unwrap_or(0))?,
                    wavenumber: i.wavenumber.unwrap_or(1),
                    beta,
                }
            }
            Generator::RandomSmooth => {
                let amplitude = need(i.amplitude, "amplitude")?;
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(bad("init.amplitude must be non-negative"));
                }
                InitSpec::RandomSmooth { amplitude, cutoff: i.cutoff.unwrap_or(2), seed: seed.or(i.seed).unwrap_or(0) }
            }
            Generator::Hopf => InitSpec::Hopf {
                rotation: i.rotation.map(|[a, b, c]| Rotation3::from_euler_angles(a, b, c).into_inner()),
            },
            Generator::ConstantTorsion => {
                if self.kind != StructureKind::G2 {
                    return Err(bad("constant_torsion needs kind = \"g2\""));
                }
                let direction = i.direction.clone().ok_or_else(|| bad("init.direction is required"))?;
                if direction.len() != 7 {
                    return Err(bad("init.direction needs 7 entries"));
                }
                InitSpec::ConstantTorsion {
                    axis: active_axis(i.axis.unwrap_or(0))?,
                    wavenumber: i.wavenumber.unwrap_or(1),
                    direction,
                }
            }
        })
    }
}
