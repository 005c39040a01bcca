//! Initial-condition generators and random smooth fields.

use crate::error::{Error, Result};
use crate::flows::{Structure, StructureKind};
use crate::g2;
use crate::grid::{Field, GridSpec, S3Homogeneous};
use crate::tensor::{combinations, AltForm, SkewMatrix};
use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded generator used everywhere a seed appears (ChaCha8, 64-bit seed).
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// The model structure at every point.
    Constant,
    /// exp(s(x)β)·model with s = a·sin(2πm x_axis / L_axis).
    SingleMode { amplitude: f64, axis: usize, wavenumber: u32, beta: Option<SkewMatrix> },
    /// exp(W(x))·model with W a band-limited random field, max |W| = amplitude.
    RandomSmooth { amplitude: f64, cutoff: u32, seed: u64 },
    /// Constant frame σᵢ = Σⱼ Aᵢⱼ Hⱼ on S³ (A = identity is the Hopf frame).
    Hopf { rotation: Option<Matrix3<f64>> },
    /// φ(x) = pullback of φ₀ by exp(q x_axis X⌟φ₀), q = 2πm/L: constant torsion.
    ConstantTorsion { axis: usize, wavenumber: u32, direction: Vec<f64> },
}

/// Matrix size m of a kind on a grid of dimension n.
pub fn matrix_dim(kind: StructureKind, n: usize) -> usize {
    match kind {
        StructureKind::G2 => 7,
        _ => n,
    }
}

/// Standard complex structure: J e_{2k} = e_{2k+1}.
fn j0(m: usize) -> Vec<f64> {
    let mut j = vec![0.0; m * m];
    for k in 0..m / 2 {
        j[(2 * k + 1) * m + 2 * k] = 1.0;
        j[(2 * k) * m + 2 * k + 1] = -1.0;
    }
    j
}

/// Constant model values at one point.
pub fn model_point(kind: StructureKind, m: usize) -> Vec<f64> {
    match kind {
        StructureKind::Parallelism => DMatrix::<f64>::identity(m, m).transpose().as_slice().to_vec(),
        StructureKind::Acs => j0(m),
        StructureKind::Acts => {
            let mut v = vec![0.0; m];
            v[m - 1] = 1.0;
            let jj = j0(m - 1);
            let mut th = vec![0.0; m * m];
            for a in 0..m - 1 {
                for b in 0..m - 1 {
                    th[a * m + b] = jj[a * (m - 1) + b];
                }
            }
            v.extend(th);
            v
        }
        StructureKind::G2 => g2::phi0().into_coeffs(),
    }
}

/// A generator that moves the model structure.
pub fn default_beta(kind: StructureKind, m: usize) -> SkewMatrix {
    let mut b = SkewMatrix::zero(m);
    match kind {
        StructureKind::Parallelism => b.set(0, 1, 1.0),
        StructureKind::Acs => b.set(0, 2, 1.0),
        StructureKind::Acts => {
            b.set(0, 2, 1.0);
            b.set(1, m - 1, 1.0);
        }
        StructureKind::G2 => {
            let mut x = vec![0.0; 7];
            x[0] = 1.0;
            b = SkewMatrix::from_form(&g2::phi0().interior(&x).unwrap()).unwrap();
        }
    }
    b
}

fn row_major(r: &DMatrix<f64>) -> Vec<f64> {
    r.transpose().as_slice().to_vec()
}

/// Pullback (R*φ)(X, Y, Z) = φ(RX, RY, RZ) of a 3-form.
pub fn pullback3(phi: &[f64], r: &DMatrix<f64>) -> Vec<f64> {
    let c3 = combinations(7, 3);
    let mut terms = Vec::new();
    for (v, idx) in phi.iter().zip(&c3) {
        if *v == 0.0 {
            continue;
        }
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        for (p, s) in [
            ([a, b, c], 1.0),
            ([b, c, a], 1.0),
            ([c, a, b], 1.0),
            ([b, a, c], -1.0),
            ([a, c, b], -1.0),
            ([c, b, a], -1.0),
        ] {
            terms.push((p, s * v));
        }
    }
    c3.iter()
        .map(|t| terms.iter().map(|(p, v)| v * r[(p[0], t[0])] * r[(p[1], t[1])] * r[(p[2], t[2])]).sum())
        .collect()
}

/// Acts on model values by a rotation R.
pub fn rotate_point(kind: StructureKind, model: &[f64], r: &DMatrix<f64>) -> Vec<f64> {
    let m = r.nrows();
    match kind {
        StructureKind::Parallelism => row_major(&(r * DMatrix::from_row_slice(m, m, model))),
        StructureKind::Acs => row_major(&(r * DMatrix::from_row_slice(m, m, model) * r.transpose())),
        StructureKind::Acts => {
            let xi = r * nalgebra::DVector::from_column_slice(&model[..m]);
            let th = r * DMatrix::from_row_slice(m, m, &model[m..]) * r.transpose();
            let mut v = xi.as_slice().to_vec();
            v.extend(row_major(&th));
            v
        }
        StructureKind::G2 => pullback3(model, r),
    }
}

fn structure_from_field(kind: StructureKind, f: Field) -> Result<Structure> {
    match kind {
        StructureKind::Parallelism => Structure::frames(f),
        StructureKind::Acs => Structure::acs(f),
        StructureKind::Acts => Structure::acts(f),
        StructureKind::G2 => Structure::g2(f),
    }
}

/// Band-limited random field: all Fourier modes with |k|_∞ ≤ cutoff on the
/// active axes, uniform random coefficients, rescaled to max |value| = amplitude.
pub fn random_smooth_field(grid: &GridSpec, ncomp: usize, cutoff: u32, amplitude: f64, rng: &mut ChaCha8Rng) -> Field {
    let axes = grid.active_axes();
    let c = cutoff as i64;
    let mut modes: Vec<Vec<i64>> = vec![vec![]];
    for _ in &axes {
        modes = modes.into_iter().flat_map(|m| (-c..=c).map(move |k| [m.clone(), vec![k]].concat())).collect();
    }
    // keep one of each ±k pair
    modes.retain(|m| m.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0));
    let coeffs: Vec<(Vec<f64>, Vec<f64>)> = modes
        .iter()
        .map(|_| {
            let a = (0..ncomp).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = (0..ncomp).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (a, b)
        })
        .collect();
    let mut f = Field::from_fn(grid, ncomp, |x, o| {
        for (m, (a, b)) in modes.iter().zip(&coeffs) {
            let ph: f64 =
                axes.iter().zip(m).map(|(&ax, &k)| std::f64::consts::TAU * k as f64 * x[ax] / grid.lengths()[ax]).sum();
            let (s, co) = ph.sin_cos();
            for q in 0..ncomp {
                o[q] += a[q] * co + b[q] * s;
            }
        }
    });
    let mx = f.max_abs();
    if mx > 0.0 {
        f = f.scaled(amplitude / mx);
    }
    f
}

/// Random smooth so(m)-valued field (strict upper triangle per point).
pub fn random_skew_field(grid: &GridSpec, m: usize, cutoff: u32, amplitude: f64, rng: &mut ChaCha8Rng) -> Field {
    random_smooth_field(grid, m * (m - 1) / 2, cutoff, amplitude, rng)
}

fn skew_dense(upper: &[f64], m: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            w[(i, j)] = upper[k];
            w[(j, i)] = -upper[k];
            k += 1;
        }
    }
    w
}

/// Builds an initial structure of `kind` on `grid`.
pub fn build(kind: StructureKind, grid: &GridSpec, spec: &InitSpec) -> Result<Structure> {
    if let InitSpec::Hopf { rotation } = spec {
        if kind != StructureKind::Parallelism {
            return Err(Error::InvalidConfig("the Hopf generator needs kind = parallelism".into()));
        }
        return Ok(Structure::S3(S3Homogeneous::new(rotation.unwrap_or_else(Matrix3::identity))?));
    }
    let m = matrix_dim(kind, grid.n());
    let model = model_point(kind, m);
    let field = match spec {
        InitSpec::Constant => Field::constant(grid, &model),
        InitSpec::SingleMode { amplitude, axis, wavenumber, beta } => {
            if *axis >= grid.n() || !grid.is_active(*axis) {
                return Err(Error::InvalidConfig(format!("mode axis {axis} is not an active axis")));
            }
            let beta = beta.clone().unwrap_or_else(|| default_beta(kind, m));
            if beta.dim() != m {
                return Err(Error::DimensionMismatch(format!("generator of so({}) for m = {m}", beta.dim())));
            }
            let b = beta.to_dense();
            let q = std::f64::consts::TAU * *wavenumber as f64 / grid.lengths()[*axis];
            Field::from_fn(grid, model.len(), |x, o| {
                let s = amplitude * (q * x[*axis]).sin();
                o.copy_from_slice(&rotate_point(kind, &model, &(&b * s).exp()));
            })
        }
        InitSpec::RandomSmooth { amplitude, cutoff, seed } => {
            let mut r = rng(*seed);
            let w = if kind == StructureKind::G2 {
                // Λ²₇ generators Y⌟φ₀ with a random smooth vector field Y
                let y = random_smooth_field(grid, 7, *cutoff, 1.0, &mut r);
                let w =
                    y.map_points(21, |src, dst| dst.copy_from_slice(&g2::interior_phi_point(src, g2::phi0().coeffs())));
                let mx = w.max_abs();
                w.scaled(amplitude / mx)
            } else {
                random_skew_field(grid, m, *cutoff, *amplitude, &mut r)
            };
            let mut out = Field::zeros(grid, model.len());
            for p in 0..grid.npoints() {
                let rot = skew_dense(w.at(p), m).exp();
                out.at_mut(p).copy_from_slice(&rotate_point(kind, &model, &rot));
            }
            out
        }
        InitSpec::ConstantTorsion { axis, wavenumber, direction } => {
            if kind != StructureKind::G2 {
                return Err(Error::InvalidConfig("constant-torsion generator needs kind = g2".into()));
            }
            if direction.len() != 7 || *axis >= 7 || !grid.is_active(*axis) {
                return Err(Error::InvalidConfig("constant torsion needs a 7-vector and an active axis".into()));
            }
            let n = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(n > 0.0) {
                return Err(Error::InvalidConfig("zero direction".into()));
            }
            let x: Vec<f64> = direction.iter().map(|v| v / n).collect();
            let b = SkewMatrix::from_form(&g2::phi0().interior(&x)?)?.to_dense();
            let q = std::f64::consts::TAU * *wavenumber as f64 / grid.lengths()[*axis];
            Field::from_fn(grid, g2::N3, |p, o| o.copy_from_slice(&pullback3(&model, &(&b * (q * p[*axis])).exp())))
        }
        InitSpec::Hopf { .. } => unreachable!(),
    };
    structure_from_field(kind, field)
}

/// Random smooth tangent vector at a grid state: the infinitesimal action
/// of a random so(m)-valued field W (W·F, [W, J], (Wξ, [W, θ]), W.φ).
pub fn random_tangent(s: &Structure, cutoff: u32, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let f = s.field().ok_or_else(|| Error::InvalidConfig("no grid".into()))?;
    let kind = s.kind();
    let m = matrix_dim(kind, f.grid().n());
    let w = random_skew_field(f.grid(), m, cutoff, 1.0, rng);
    let mut out = vec![0.0; f.data().len()];
    let nc = f.ncomp();
    for p in 0..f.npoints() {
        let wd = skew_dense(w.at(p), m);
        let u = f.at(p);
        let o = &mut out[p * nc..(p + 1) * nc];
        match kind {
            StructureKind::Parallelism => o.copy_from_slice(&row_major(&(&wd * DMatrix::from_row_slice(m, m, u)))),
            StructureKind::Acs => {
                let j = DMatrix::from_row_slice(m, m, u);
                o.copy_from_slice(&row_major(&(&wd * &j - &j * &wd)));
            }
            StructureKind::Acts => {
                let xi = &wd * nalgebra::DVector::from_column_slice(&u[..m]);
                let th = DMatrix::from_row_slice(m, m, &u[m..]);
                o[..m].copy_from_slice(xi.as_slice());
                o[m..].copy_from_slice(&row_major(&(&wd * &th - &th * &wd)));
            }
            StructureKind::G2 => {
                let phi = AltForm::from_coeffs(7, 3, u.to_vec())?;
                let beta = SkewMatrix::from_dense(&wd)?;
                o.copy_from_slice(phi.so_action(&beta)?.coeffs());
            }
        }
    }
    Ok(out)
}
