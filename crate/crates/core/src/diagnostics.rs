//! Energies, the energy identity, blow-up rate fits, the heat-subsolution
//! fit and the entropy functional.

use crate::error::{Error, Result};
use crate::flows::{FlowState, RecordOptions, Structure};
use crate::g2;
use crate::grid::{laplacian, partial, Field, GridSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsRecord {
    #[serde(default)]
    pub step: usize,
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "K")]
    pub kinetic: f64,
    pub eps_max: f64,
    pub constraint_drift: f64,
    #[serde(default)]
    pub residual_harmonic_map: Option<f64>,
    #[serde(default, rename = "entropy_F")]
    pub entropy: Option<f64>,
}

/// (E, K, ε, κ) of a state.
pub fn energy(state: &FlowState) -> (f64, f64, Field, Field) {
    (state.energy(), state.kinetic(), state.eps.clone(), state.kappa.clone())
}

/// Builds the record for a state.
pub fn record(state: &FlowState, step: usize, opts: &RecordOptions) -> Result<DiagnosticsRecord> {
    let drift = if state.drift.is_nan() { state.structure.constraint_drift().unwrap_or(f64::MAX) } else { state.drift };
    let residual_harmonic_map = match (&state.structure, opts.harmonic_residual) {
        (Structure::G2(f), true) => Some(g2::harmonic_map_residual(f, None)?.max_abs()),
        _ => None,
    };
    let entropy = match &opts.entropy {
        Some((center, horizon)) if state.t < *horizon => Some(entropy(state, state.t, *horizon, center)?),
        _ => None,
    };
    Ok(DiagnosticsRecord {
        step,
        t: state.t,
        energy: state.energy(),
        kinetic: state.kinetic(),
        eps_max: state.eps_max(),
        constraint_drift: drift,
        residual_harmonic_map,
        entropy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyIdentityReport {
    pub samples_checked: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Default relative tolerance for |dE/dt + 2K| / K.
pub const ENERGY_IDENTITY_TOL: f64 = 0.05;

/// Samples with K below this fraction of the series maximum are at
/// round-off level and skipped.
pub const KINETIC_FLOOR: f64 = 1e-10;

/// Compares a three-point derivative of E with −2K at interior samples.
/// The relative error is |dE/dt + 2K| / K, taken as zero when the
/// numerator is at round-off level.
pub fn check_energy_identity(series: &[DiagnosticsRecord], tol: f64) -> Result<EnergyIdentityReport> {
    if series.len() < 3 {
        return Err(Error::TooShortSeries(series.len()));
    }
    let kmax = series.iter().map(|r| r.kinetic).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for w in series.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let (h1, h2) = (b.t - a.t, c.t - b.t);
        if !(h1 > 0.0 && h2 > 0.0) || (b.kinetic > 0.0 && b.kinetic <= KINETIC_FLOOR * kmax) {
            continue;
        }
        let de =
            -h2 / (h1 * (h1 + h2)) * a.energy + (h2 - h1) / (h1 * h2) * b.energy + h1 / (h2 * (h1 + h2)) * c.energy;
        let num = (de + 2.0 * b.kinetic).abs();
        let noise = 64.0 * f64::EPSILON * (a.energy.abs() + b.energy.abs() + c.energy.abs()) / h1.min(h2);
        let rel = if num <= noise { 0.0 } else { num / b.kinetic.abs() };
        worst = worst.max(rel);
        n += 1;
    }
    Ok(EnergyIdentityReport { samples_checked: n, max_rel_error: worst, tolerance: tol, pass: n > 0 && worst <= tol })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckReport {
    /// Smallest C ≥ 0 with ε̄_t ≤ ε̄₀ / (1 − C ε̄₀ t) over the series.
    pub c_fit: f64,
    /// First time ε̄ exceeds 2ε̄₀, or the horizon end.
    pub delta_hat: f64,
    pub doubled: bool,
    /// C ε̄₀ δ̂.
    pub product: f64,
    pub threshold: f64,
    pub finite_c: bool,
    pub pass: bool,
    /// threshold − product.
    pub margin: f64,
}

/// Pass threshold on C ε̄₀ δ̂.
pub const BLOWUP_PRODUCT_THRESHOLD: f64 = 0.75;

/// Fits the blow-up rate bound to a series of (t, ε̄_t).
pub fn check_blowup_bound(series: &[(f64, f64)], eps0_bar: f64, threshold: f64) -> Result<BoundCheckReport> {
    let Some(&(t0, _)) = series.first() else {
        return Err(Error::EmptySeries);
    };
    let doubling = series.iter().find(|(_, e)| *e > 2.0 * eps0_bar);
    let (delta_hat, doubled) = match doubling {
        Some(&(t, _)) => (t - t0, true),
        None => (series.last().unwrap().0 - t0, false),
    };
    let mut c: f64 = 0.0;
    for &(t, e) in series {
        let s = t - t0;
        if s <= 0.0 || eps0_bar <= 0.0 {
            continue;
        }
        c = c.max((1.0 - eps0_bar / e) / (eps0_bar * s));
    }
    let finite_c = c.is_finite();
    let product = c * eps0_bar * delta_hat;
    let pass = finite_c && product <= threshold;
    Ok(BoundCheckReport {
        c_fit: c,
        delta_hat,
        doubled,
        product,
        threshold,
        finite_c,
        pass,
        margin: threshold - product,
    })
}

/// Convenience: the blow-up check on a record series.
pub fn check_blowup_records(series: &[DiagnosticsRecord], threshold: f64) -> Result<BoundCheckReport> {
    let pts: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.eps_max)).collect();
    let e0 = pts.first().ok_or(Error::EmptySeries)?.1;
    check_blowup_bound(&pts, e0, threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatFitReport {
    /// Smallest C₁ ≥ 0 with H(ε) ≤ C₁ε(ε+1) − |∇T|² at every used point.
    pub c1: f64,
    /// max of H(ε) + |∇T|².
    pub max_excess: f64,
    pub points_used: usize,
}

/// Fits the heat-subsolution constant over consecutive state pairs.
pub fn fit_heat_subsolution(states: &[FlowState]) -> Result<HeatFitReport> {
    let mut c1: f64 = 0.0;
    let mut max_excess = f64::NEG_INFINITY;
    let mut used = 0;
    for w in states.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.eps.grid() != b.eps.grid() {
            return Err(Error::MismatchedGrids);
        }
        let dt = b.t - a.t;
        if !(dt > 0.0) {
            continue;
        }
        let lap = laplacian(&a.eps);
        let grad_t = torsion_gradient_sq(&a.structure);
        let floor = 1e-12 * a.eps_max().max(f64::MIN_POSITIVE);
        for p in 0..a.eps.npoints() {
            let e = a.eps.data()[p];
            let h = (b.eps.data()[p] - e) / dt - lap.data()[p];
            let excess = h + grad_t.as_ref().map_or(0.0, |g| g.data()[p]);
            max_excess = max_excess.max(excess);
            if e > floor {
                c1 = c1.max(excess / (e * (e + 1.0)));
                used += 1;
            }
        }
    }
    Ok(HeatFitReport { c1, max_excess, points_used: used })
}

/// |∇T|² = Σ_a |∂_a rep|² of the torsion representation.
pub fn torsion_gradient_sq(s: &Structure) -> Option<Field> {
    let rep = s.torsion_rep()?;
    let mut out = Field::zeros(rep.grid(), 1);
    for a in rep.grid().active_axes() {
        let d = partial(&rep, a);
        for p in 0..rep.npoints() {
            out.data_mut()[p] += d.at(p).iter().map(|v| v * v).sum::<f64>();
        }
    }
    Some(out)
}

/// 1-D periodized heat kernel (4πv)^{−1/2} Σ_k exp(−(x + kL)²/4v).
pub fn periodic_gaussian(x: f64, length: f64, v: f64) -> f64 {
    let x = x - length * (x / length).round();
    let kmax = 1 + ((4.0 * v * 35.0).sqrt() / length).ceil() as i64;
    let norm = 1.0 / (4.0 * std::f64::consts::PI * v).sqrt();
    (-kmax..=kmax).map(|k| (-(x + k as f64 * length).powi(2) / (4.0 * v)).exp()).sum::<f64>() * norm
}

/// Backward heat kernel Θ at time-to-horizon v, centered at `center`.
/// Inactive axes contribute the constant 1/L.
pub fn heat_kernel(grid: &GridSpec, center: &[f64], v: f64) -> Field {
    Field::from_fn(grid, 1, |x, o| {
        let mut k = 1.0;
        for a in 0..grid.n() {
            let l = grid.lengths()[a];
            k *= if grid.is_active(a) { periodic_gaussian(x[a] - center[a], l, v) } else { 1.0 / l };
        }
        o[0] = k;
    })
}

/// (T − t)/2 · Σ Θ · density · cell volume for a density |d^Vσ|².
pub fn entropy_of_density(density: &Field, t: f64, horizon: f64, center: &[f64]) -> Result<f64> {
    if t >= horizon {
        return Err(Error::HorizonPassed { t, horizon });
    }
    if center.len() != density.grid().n() {
        return Err(Error::DimensionMismatch("entropy center".into()));
    }
    let theta = heat_kernel(density.grid(), center, horizon - t);
    Ok(0.5 * (horizon - t) * theta.integral_dot(density))
}

/// Entropy functional of a grid state with |d^Vσ|² = 2ε.
pub fn entropy(state: &FlowState, t: f64, horizon: f64, center: &[f64]) -> Result<f64> {
    entropy_of_density(&state.eps.scaled(2.0), t, horizon, center)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReport {
    pub directions: usize,
    /// max |δE(v) + ∫η(τ, v)| / (‖τ‖_η ‖v‖_η).
    pub max_rel_error: f64,
}

/// Compares the flow right side τ with a central difference of the discrete
/// energy along random tangents: E(R(u ± s v)) should change at rate −∫η(τ, v).
pub fn gradient_consistency(
    s: &Structure,
    directions: usize,
    step: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<GradientReport> {
    let u = s.values();
    let tau = s.tension();
    let tn = s.eta_inner(&tau, &tau).sqrt();
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let v = crate::init::random_tangent(s, 2, rng)?;
        let shifted = |sign: f64| {
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + sign * step * b).collect();
            crate::flows::retract(&s.with_values(w)).energy()
        };
        let de = (shifted(1.0) - shifted(-1.0)) / (2.0 * step);
        let pred = -s.eta_inner(&tau, &v);
        let vn = s.eta_inner(&v, &v).sqrt();
        let scale = tn * vn;
        let err = if scale > 0.0 { (de - pred).abs() / scale } else { (de - pred).abs() };
        worst = worst.max(err);
    }
    Ok(GradientReport { directions, max_rel_error: worst })
}
