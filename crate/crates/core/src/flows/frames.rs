//! Orthonormal frame fields on flat tori. A frame is stored as the matrix F
//! (row-major, m×m) whose columns are σ₁,…,σ_m.

use super::mat::{self, dot};
use crate::error::{Error, Result};
use crate::grid::{laplacian, partial, Field};

pub(crate) fn dim(f: &Field) -> usize {
    f.grid().n()
}

pub(crate) fn check_shape(f: &Field) -> Result<usize> {
    let m = dim(f);
    if f.ncomp() != m * m || m > mat::MAXM {
        return Err(Error::DimensionMismatch(format!("frame field needs {} components, has {}", m * m, f.ncomp())));
    }
    Ok(m)
}

/// max |FᵀF − I| over all points.
pub(crate) fn drift(f: &Field) -> f64 {
    let m = dim(f);
    let mut worst: f64 = 0.0;
    for p in 0..f.npoints() {
        let a = f.at(p);
        let g = mat::mul(&mat::transpose(a, m)[..m * m], a, m);
        for i in 0..m {
            for j in 0..m {
                let d = g[i * m + j] - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
    }
    worst
}

/// ½(LF − F(LF)ᵀF): the tangential part of the rough Laplacian, which is
/// also the negative gradient of ½Σ|∂F|² on the orthogonal group.
pub(crate) fn rhs(f: &Field) -> Field {
    let m = dim(f);
    let l = laplacian(f);
    let mut out = Field::zeros(f.grid(), m * m);
    for p in 0..f.npoints() {
        let (a, b) = (f.at(p), l.at(p));
        let bt = mat::transpose(b, m);
        let t = mat::mul(&bt[..m * m], a, m);
        let fbf = mat::mul(a, &t[..m * m], m);
        let o = out.at_mut(p);
        for k in 0..m * m {
            o[k] = 0.5 * (b[k] - fbf[k]);
        }
    }
    out
}

/// Frame flow right side with constraint validation.
pub fn parallelism_rhs(frame: &Field) -> Result<Field> {
    check_shape(frame)?;
    let d = drift(frame);
    if d > 1e-8 {
        return Err(Error::ConstraintViolation(format!("frame not orthonormal (drift {d:e})")));
    }
    Ok(rhs(frame))
}

/// ε = ¼ Σᵢ |∂ᵢF|², the trace-form norm −½tr of the torsion matrices.
pub(crate) fn energy_density(f: &Field) -> Field {
    let mut eps = Field::zeros(f.grid(), 1);
    for a in f.grid().active_axes() {
        let d = partial(f, a);
        for p in 0..f.npoints() {
            eps.data_mut()[p] += 0.25 * dot(d.at(p), d.at(p));
        }
    }
    eps
}

/// Torsion matrices Fᵀ∂ᵢF/√2, one m×m block per active axis.
pub(crate) fn torsion_rep(f: &Field) -> Field {
    let m = dim(f);
    let axes = f.grid().active_axes();
    let mut out = Field::zeros(f.grid(), axes.len() * m * m);
    for (k, &a) in axes.iter().enumerate() {
        let d = partial(f, a);
        for p in 0..f.npoints() {
            let t = mat::mul(&mat::transpose(f.at(p), m)[..m * m], d.at(p), m);
            for (o, v) in out.at_mut(p)[k * m * m..(k + 1) * m * m].iter_mut().zip(&t[..m * m]) {
                *o = v * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
    }
    out
}

pub(crate) fn retract(f: &Field) -> (Field, f64) {
    let m = dim(f);
    let mut out = f.clone();
    let mut repair: f64 = 0.0;
    for p in 0..f.npoints() {
        let r = mat::polar(f.at(p), None, m);
        repair = repair.max(mat::max_abs_diff(&r[..m * m], f.at(p)));
        out.at_mut(p).copy_from_slice(&r[..m * m]);
    }
    (out, repair)
}
