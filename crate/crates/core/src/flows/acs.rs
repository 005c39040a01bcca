//! Almost complex structures J (skew, J² = −I) on flat even-dimensional tori.
//! Norm on the fibre: ⟨A, B⟩ = −½ tr(AB), so ε = ½·¼|∂J|² = |∂J|²_F / 16.

use super::mat::{self, dot};
use crate::error::{Error, Result};
use crate::grid::{laplacian, partial, Field};

pub(crate) fn check_shape(f: &Field) -> Result<usize> {
    let m = f.grid().n();
    if !m.is_multiple_of(2) || f.ncomp() != m * m || m > mat::MAXM {
        return Err(Error::DimensionMismatch(format!(
            "almost complex field needs an even torus and m² components (m = {m}, ncomp = {})",
            f.ncomp()
        )));
    }
    Ok(m)
}

/// max of |J + Jᵀ| and |J² + I|.
pub(crate) fn point_drift(j: &[f64], m: usize) -> f64 {
    let jj = mat::mul(j, j, m);
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            worst = worst.max((j[a * m + b] + j[b * m + a]).abs());
            worst = worst.max((jj[a * m + b] + if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

pub(crate) fn drift(f: &Field) -> f64 {
    let m = f.grid().n();
    (0..f.npoints()).fold(0.0, |w, p| w.max(point_drift(f.at(p), m)))
}

/// ½(B + JBJ): projection of B onto the skew matrices anticommuting with J.
#[inline]
pub(crate) fn anticommuting_part(b: &[f64], j: &[f64], m: usize) -> mat::Buf {
    let jb = mat::mul(j, b, m);
    let jbj = mat::mul(&jb[..m * m], j, m);
    let mut o = [0.0; mat::MAXM * mat::MAXM];
    for k in 0..m * m {
        o[k] = 0.5 * (b[k] + jbj[k]);
    }
    o
}

pub(crate) fn rhs(f: &Field) -> Field {
    let m = f.grid().n();
    let l = laplacian(f);
    let mut out = Field::zeros(f.grid(), m * m);
    for p in 0..f.npoints() {
        let o = anticommuting_part(l.at(p), f.at(p), m);
        out.at_mut(p).copy_from_slice(&o[..m * m]);
    }
    out
}

/// ∂_t J = ½(LJ + J(LJ)J) with L the grid Laplacian.
pub fn acs_rhs(j: &Field) -> Result<Field> {
    check_shape(j)?;
    let d = drift(j);
    if d > 1e-8 {
        return Err(Error::ConstraintViolation(format!("J not skew-orthogonal (drift {d:e})")));
    }
    Ok(rhs(j))
}

pub(crate) fn energy_density(f: &Field) -> Field {
    let mut eps = Field::zeros(f.grid(), 1);
    for a in f.grid().active_axes() {
        let d = partial(f, a);
        for p in 0..f.npoints() {
            eps.data_mut()[p] += dot(d.at(p), d.at(p)) / 16.0;
        }
    }
    eps
}

/// ∂ᵢJ / √8 per active axis, so that ε = ½|rep|².
pub(crate) fn torsion_rep(f: &Field) -> Field {
    let m2 = f.ncomp();
    let axes = f.grid().active_axes();
    let mut out = Field::zeros(f.grid(), axes.len() * m2);
    let s = 1.0 / 8f64.sqrt();
    for (k, &a) in axes.iter().enumerate() {
        let d = partial(f, a);
        for p in 0..f.npoints() {
            for (o, v) in out.at_mut(p)[k * m2..(k + 1) * m2].iter_mut().zip(d.at(p)) {
                *o = s * v;
            }
        }
    }
    out
}

pub(crate) fn retract(f: &Field) -> (Field, f64) {
    let m = f.grid().n();
    let mut out = f.clone();
    let mut repair: f64 = 0.0;
    for p in 0..f.npoints() {
        let s = mat::skew(f.at(p), m);
        let r = mat::polar(&s[..m * m], None, m);
        repair = repair.max(mat::max_abs_diff(&r[..m * m], f.at(p)));
        out.at_mut(p).copy_from_slice(&r[..m * m]);
    }
    (out, repair)
}
