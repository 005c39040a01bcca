//! Harmonic section flows: structure fields, their energies and tensions,
//! retractions, and the explicit time stepper.

mod acs;
mod acts;
mod frames;
mod g2flow;
pub(crate) mod mat;
mod stepper;

pub use acs::acs_rhs;
pub use acts::{acts_grid, acts_pack, acts_rhs, acts_split};
pub use frames::parallelism_rhs;
pub use g2flow::g2_diffusion_constant;
pub use stepper::{
    cfl_bound, diffusion_constant, resolve_dt, run_flow, step, RecordOptions, RunOutcome, RunResult, Scheme,
    StepperConfig,
};

use crate::error::{Error, Result};
use crate::g2;
use crate::grid::{Field, GridSpec, S3Homogeneous, S3_VOLUME};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Parallelism,
    Acs,
    Acts,
    G2,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Parallelism => "parallelism",
            StructureKind::Acs => "acs",
            StructureKind::Acts => "acts",
            StructureKind::G2 => "g2",
        }
    }
}

/// A structure field on a grid, or the constant-coefficient S³ frame.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    /// Frame matrices F (columns σᵢ), m = grid dimension.
    Frames(Field),
    S3(S3Homogeneous),
    /// J matrices, m = grid dimension (even).
    Acs(Field),
    /// Packed (ξ, θ), m = grid dimension (odd).
    Acts(Field),
    /// 3-form coefficients on a 7-torus.
    G2(Field),
}

impl Structure {
    pub fn frames(f: Field) -> Result<Self> {
        frames::check_shape(&f)?;
        Ok(Structure::Frames(f))
    }
    pub fn acs(f: Field) -> Result<Self> {
        acs::check_shape(&f)?;
        Ok(Structure::Acs(f))
    }
    pub fn acts(f: Field) -> Result<Self> {
        acts::check_shape(&f)?;
        Ok(Structure::Acts(f))
    }
    pub fn g2(f: Field) -> Result<Self> {
        if f.ncomp() != g2::N3 || f.grid().n() != 7 {
            return Err(Error::DimensionMismatch("G2 field needs 35 components on a 7-torus".into()));
        }
        Ok(Structure::G2(f))
    }

    pub fn kind(&self) -> StructureKind {
        match self {
            Structure::Frames(_) | Structure::S3(_) => StructureKind::Parallelism,
            Structure::Acs(_) => StructureKind::Acs,
            Structure::Acts(_) => StructureKind::Acts,
            Structure::G2(_) => StructureKind::G2,
        }
    }

    /// Label used in snapshots and reports.
    pub fn label(&self) -> &'static str {
        match self {
            Structure::S3(_) => "s3",
            s => s.kind().name(),
        }
    }

    pub fn field(&self) -> Option<&Field> {
        match self {
            Structure::Frames(f) | Structure::Acs(f) | Structure::Acts(f) | Structure::G2(f) => Some(f),
            Structure::S3(_) => None,
        }
    }

    /// Grid carrying the densities ε and κ (a single point for S³).
    pub fn density_grid(&self) -> GridSpec {
        match self.field() {
            Some(f) => f.grid().clone(),
            None => GridSpec::new(vec![], vec![]).expect("empty grid is valid"),
        }
    }

    /// Quadrature weight per density point.
    pub fn weight(&self) -> f64 {
        match self.field() {
            Some(f) => f.grid().cell_volume(),
            None => S3_VOLUME,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Structure::Frames(f) | Structure::Acs(f) | Structure::Acts(f) | Structure::G2(f) => f.data(),
            Structure::S3(m) => m.coefficients().as_slice(),
        }
    }

    /// Same shape, new values.
    pub fn with_values(&self, v: Vec<f64>) -> Structure {
        let wrap = |f: &Field| Field::from_data(f.grid(), f.ncomp(), v.clone()).expect("same shape");
        match self {
            Structure::Frames(f) => Structure::Frames(wrap(f)),
            Structure::Acs(f) => Structure::Acs(wrap(f)),
            Structure::Acts(f) => Structure::Acts(wrap(f)),
            Structure::G2(f) => Structure::G2(wrap(f)),
            Structure::S3(_) => Structure::S3(S3Homogeneous::from_raw(Matrix3::from_column_slice(&v))),
        }
    }

    /// Vertical tension τ^V in ambient coordinates (same layout as `values`).
    pub fn tension(&self) -> Vec<f64> {
        match self {
            Structure::Frames(f) => frames::rhs(f).into_data(),
            Structure::Acs(f) => acs::rhs(f).into_data(),
            Structure::Acts(f) => acts::rhs(f).into_data(),
            Structure::G2(f) => g2flow::rhs(f).into_data(),
            Structure::S3(m) => m.tension_vectors().as_slice().to_vec(),
        }
    }

    /// ε per density point.
    pub fn energy_density(&self) -> Field {
        match self {
            Structure::Frames(f) => frames::energy_density(f),
            Structure::Acs(f) => acs::energy_density(f),
            Structure::Acts(f) => acts::energy_density(f),
            Structure::G2(f) => g2flow::energy_density(f),
            Structure::S3(m) => Field::constant(&self.density_grid(), &[m.energy_density()]),
        }
    }

    /// Pointwise fibre metric η(a, b) on tangent vectors at this state.
    pub fn eta_density(&self, a: &[f64], b: &[f64]) -> Field {
        let g = self.density_grid();
        let mut out = Field::zeros(&g, 1);
        match self {
            Structure::Frames(f) => {
                let w = f.ncomp();
                for p in 0..g.npoints() {
                    out.data_mut()[p] = 0.5 * mat::dot(&a[p * w..(p + 1) * w], &b[p * w..(p + 1) * w]);
                }
            }
            Structure::Acs(f) => {
                let w = f.ncomp();
                for p in 0..g.npoints() {
                    out.data_mut()[p] = mat::dot(&a[p * w..(p + 1) * w], &b[p * w..(p + 1) * w]) / 8.0;
                }
            }
            Structure::Acts(f) => {
                let w = f.ncomp();
                let m = f.grid().n();
                for p in 0..g.npoints() {
                    let r = p * w..(p + 1) * w;
                    out.data_mut()[p] = acts::eta_point(f.at(p), &a[r.clone()], &b[r], m);
                }
            }
            Structure::G2(f) => {
                let w = f.ncomp();
                for p in 0..g.npoints() {
                    let r = p * w..(p + 1) * w;
                    out.data_mut()[p] = g2flow::eta_point(f.at(p), &a[r.clone()], &b[r]);
                }
            }
            Structure::S3(_) => out.data_mut()[0] = 0.5 * mat::dot(a, b),
        }
        out
    }

    /// ∫ η(a, b).
    pub fn eta_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.eta_density(a, b).data().iter().sum::<f64>() * self.weight()
    }

    /// Discrete Dirichlet energy Σ ε · weight.
    pub fn energy(&self) -> f64 {
        self.energy_density().data().iter().sum::<f64>() * self.weight()
    }

    /// Torsion representation per active axis with ε = ½|rep|² pointwise.
    pub fn torsion_rep(&self) -> Option<Field> {
        match self {
            Structure::Frames(f) => Some(frames::torsion_rep(f)),
            Structure::Acs(f) => Some(acs::torsion_rep(f)),
            Structure::Acts(f) => Some(acts::torsion_rep(f)),
            Structure::G2(f) => Some(g2flow::torsion_rep(f)),
            Structure::S3(_) => None,
        }
    }

    /// Pointwise constraint violation (metric drift |g_φ − id| for G2).
    pub fn constraint_drift(&self) -> Result<f64> {
        Ok(match self {
            Structure::Frames(f) => frames::drift(f),
            Structure::Acs(f) => acs::drift(f),
            Structure::Acts(f) => acts::drift(f),
            Structure::G2(f) => g2::metric_drift(f)?,
            Structure::S3(m) => {
                let a = m.coefficients();
                (a.transpose() * a - Matrix3::identity()).abs().max()
            }
        })
    }

    /// Projects back onto the constraint set; returns the new structure and
    /// the largest per-entry change. G2 fields are returned unchanged.
    pub fn retract_with_repair(&self) -> (Structure, f64) {
        match self {
            Structure::Frames(f) => {
                let (r, d) = frames::retract(f);
                (Structure::Frames(r), d)
            }
            Structure::Acs(f) => {
                let (r, d) = acs::retract(f);
                (Structure::Acs(r), d)
            }
            Structure::Acts(f) => {
                let (r, d) = acts::retract(f);
                (Structure::Acts(r), d)
            }
            Structure::G2(_) => (self.clone(), 0.0),
            Structure::S3(m) => {
                let a = m.coefficients();
                let r = mat::polar(a.transpose().as_slice(), None, 3);
                let rm = Matrix3::from_row_slice(&r[..9]);
                let d = (rm - a).abs().max();
                (Structure::S3(S3Homogeneous::from_raw(rm)), d)
            }
        }
    }
}

/// Per-point retraction onto the structure's constraint set.
pub fn retract(raw: &Structure) -> Structure {
    raw.retract_with_repair().0
}

/// Time, structure and cached densities ε = ½|d^Vσ|², κ = ½|τ^V|².
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub structure: Structure,
    pub eps: Field,
    pub kappa: Field,
    tension: Vec<f64>,
    pub drift: f64,
}

impl FlowState {
    pub fn new(t: f64, structure: Structure) -> Result<Self> {
        let drift = structure.constraint_drift()?;
        Ok(Self::with_drift(t, structure, drift))
    }

    pub(crate) fn with_drift(t: f64, structure: Structure, drift: f64) -> Self {
        let (tension, eps) = match &structure {
            Structure::G2(f) => {
                let (r, e) = g2flow::rhs_with_energy(f);
                (r.into_data(), e)
            }
            s => (s.tension(), s.energy_density()),
        };
        let kappa = structure.eta_density(&tension, &tension).scaled(0.5);
        FlowState { t, structure, eps, kappa, tension, drift }
    }

    pub fn kind(&self) -> StructureKind {
        self.structure.kind()
    }

    /// Cached tension (right side of the flow) at this state.
    pub fn tension(&self) -> &[f64] {
        &self.tension
    }

    /// E = Σ ε · weight.
    pub fn energy(&self) -> f64 {
        self.eps.data().iter().sum::<f64>() * self.structure.weight()
    }

    /// K = Σ κ · weight.
    pub fn kinetic(&self) -> f64 {
        self.kappa.data().iter().sum::<f64>() * self.structure.weight()
    }

    /// sup ε.
    pub fn eps_max(&self) -> f64 {
        self.eps.max()
    }

    /// ‖τ^V‖_∞ in the fibre metric.
    pub fn tension_sup(&self) -> f64 {
        (2.0 * self.kappa.max().max(0.0)).sqrt()
    }
}
