//! Almost contact structures (ξ, θ) on flat odd-dimensional tori, with
//! θ² = −I + ξξᵀ, |ξ| = 1 and J = θ on D = ξ^⊥.
//!
//! Packed layout per point: ξ (m entries) then θ (m×m row-major).
//! ε = ½(|∂ξ|² + ⅛|P∂θP|²_F), the −½tr norm on the J part.
//!
//! The right side is the exact gradient of the discrete energy for the
//! metric |ξ̇|² + ⅛|Pθ̇P|²_F, written in the tangent parametrization
//! ξ̇ = u ∈ D, θ̇ = ξ(θu)ᵀ − (θu)ξᵀ + K with K skew on D anticommuting
//! with J. Its continuum limit is
//! ∂_t ξ = ∇*∇ξ + |∇ξ|²ξ − ½ J tr ∇̄J ⊗ ∇ξ, ∂_t J = ½(∇̄*∇̄J + J(∇̄*∇̄J)J).

use super::acs::anticommuting_part;
use super::mat::{self, dot, Buf, MAXM};
use crate::error::{Error, Result};
use crate::grid::{laplacian, partial, Field, GridSpec};

pub(crate) fn dim(f: &Field) -> usize {
    f.grid().n()
}

pub(crate) fn check_shape(f: &Field) -> Result<usize> {
    let m = dim(f);
    if m % 2 != 1 || f.ncomp() != m + m * m || m > MAXM {
        return Err(Error::DimensionMismatch(format!(
            "almost contact field needs an odd torus and m + m² components (m = {m}, ncomp = {})",
            f.ncomp()
        )));
    }
    Ok(m)
}

/// Packs ξ and θ fields into one field.
pub fn acts_pack(xi: &Field, theta: &Field) -> Result<Field> {
    let m = xi.grid().n();
    if xi.grid() != theta.grid() {
        return Err(Error::MismatchedGrids);
    }
    if xi.ncomp() != m || theta.ncomp() != m * m {
        return Err(Error::DimensionMismatch("ξ needs m, θ needs m² components".into()));
    }
    let mut out = Field::zeros(xi.grid(), m + m * m);
    for p in 0..xi.npoints() {
        let o = out.at_mut(p);
        o[..m].copy_from_slice(xi.at(p));
        o[m..].copy_from_slice(theta.at(p));
    }
    Ok(out)
}

/// Splits a packed field into (ξ, θ).
pub fn acts_split(u: &Field) -> (Field, Field) {
    let m = dim(u);
    let xi = u.map_points(m, |s, d| d.copy_from_slice(&s[..m]));
    let th = u.map_points(m * m, |s, d| d.copy_from_slice(&s[m..]));
    (xi, th)
}

pub(crate) fn point_drift(u: &[f64], m: usize) -> f64 {
    let (xi, th) = u.split_at(m);
    let mut worst = (dot(xi, xi).sqrt() - 1.0).abs();
    let tx = mat::matvec(th, xi, m);
    let tt = mat::mul(th, th, m);
    for a in 0..m {
        worst = worst.max(tx[a].abs());
        for b in 0..m {
            worst = worst.max((th[a * m + b] + th[b * m + a]).abs());
            let target = -(if a == b { 1.0 } else { 0.0 }) + xi[a] * xi[b];
            worst = worst.max((tt[a * m + b] - target).abs());
        }
    }
    worst
}

pub(crate) fn drift(u: &Field) -> f64 {
    let m = dim(u);
    (0..u.npoints()).fold(0.0, |w, p| w.max(point_drift(u.at(p), m)))
}

struct Derivs {
    axes: Vec<usize>,
    dxi: Vec<Field>,
    dth: Vec<Field>,
    /// P ∂θ P per axis
    a: Vec<Field>,
}

fn derivs(xi: &Field, th: &Field) -> Derivs {
    let m = xi.ncomp();
    let axes = xi.grid().active_axes();
    let mut dxi = Vec::new();
    let mut dth = Vec::new();
    let mut a = Vec::new();
    for &ax in &axes {
        let dx = partial(xi, ax);
        let dt = partial(th, ax);
        let mut af = Field::zeros(xi.grid(), m * m);
        for p in 0..xi.npoints() {
            let pr = mat::projector(xi.at(p), m);
            let s = mat::sandwich(&pr[..m * m], dt.at(p), m);
            af.at_mut(p).copy_from_slice(&s[..m * m]);
        }
        dxi.push(dx);
        dth.push(dt);
        a.push(af);
    }
    Derivs { axes, dxi, dth, a }
}

pub(crate) fn energy_density(u: &Field) -> Field {
    let (xi, th) = acts_split(u);
    let d = derivs(&xi, &th);
    let mut eps = Field::zeros(u.grid(), 1);
    for k in 0..d.axes.len() {
        for p in 0..u.npoints() {
            eps.data_mut()[p] += 0.5 * (dot(d.dxi[k].at(p), d.dxi[k].at(p)) + dot(d.a[k].at(p), d.a[k].at(p)) / 8.0);
        }
    }
    eps
}

/// (∂ᵢξ, P∂ᵢθP/√8) per active axis, so that ε = ½|rep|².
pub(crate) fn torsion_rep(u: &Field) -> Field {
    let m = dim(u);
    let (xi, th) = acts_split(u);
    let d = derivs(&xi, &th);
    let w = m + m * m;
    let s = 1.0 / 8f64.sqrt();
    let mut out = Field::zeros(u.grid(), d.axes.len() * w);
    for k in 0..d.axes.len() {
        for p in 0..u.npoints() {
            let o = &mut out.at_mut(p)[k * w..(k + 1) * w];
            o[..m].copy_from_slice(d.dxi[k].at(p));
            for (x, v) in o[m..].iter_mut().zip(d.a[k].at(p)) {
                *x = s * v;
            }
        }
    }
    out
}

/// θ̇ from a D-vector u̇ and an m-part K̇.
#[inline]
fn assemble_theta_dot(xi: &[f64], th: &[f64], udot: &[f64], kdot: &[f64], m: usize) -> Buf {
    let tu = mat::matvec(th, udot, m);
    let mut o = [0.0; MAXM * MAXM];
    for a in 0..m {
        for b in 0..m {
            o[a * m + b] = xi[a] * tu[b] - tu[a] * xi[b] + kdot[a * m + b];
        }
    }
    o
}

pub(crate) fn rhs(u: &Field) -> Field {
    let m = dim(u);
    let g = u.grid().clone();
    let (xi, th) = acts_split(u);
    let d = derivs(&xi, &th);
    let lxi = laplacian(&xi);
    // G_θ = −⅛ Σᵢ ∂ᵢ(P∂ᵢθP)
    let mut gth = Field::zeros(&g, m * m);
    for (k, &ax) in d.axes.iter().enumerate() {
        gth.axpy(-0.125, &partial(&d.a[k], ax));
    }
    let mut out = Field::zeros(&g, m + m * m);
    for p in 0..g.npoints() {
        let x = xi.at(p);
        let t = th.at(p);
        let pr = mat::projector(x, m);
        // G_ξ = −Lξ − ⅛ Σᵢ (Sᵢ + Sᵢᵀ)ξ, Sᵢ = AᵢMᵢᵀ + MᵢᵀAᵢ
        let mut gxi = [0.0; MAXM];
        for (o, l) in gxi.iter_mut().zip(lxi.at(p)) {
            *o = -l;
        }
        for k in 0..d.axes.len() {
            let a = d.a[k].at(p);
            let mm = d.dth[k].at(p);
            let at = mat::transpose(a, m);
            let mt = mat::transpose(mm, m);
            let mtx = mat::matvec(&mt[..m * m], x, m);
            let ax = mat::matvec(a, x, m);
            let atx = mat::matvec(&at[..m * m], x, m);
            let mx = mat::matvec(mm, x, m);
            let v1 = mat::matvec(a, &mtx[..m], m);
            let v2 = mat::matvec(&mt[..m * m], &ax[..m], m);
            let v3 = mat::matvec(mm, &atx[..m], m);
            let v4 = mat::matvec(&at[..m * m], &mx[..m], m);
            for c in 0..m {
                gxi[c] -= 0.125 * (v1[c] + v2[c] + v3[c] + v4[c]);
            }
        }
        let gt = gth.at(p);
        let gtt = mat::transpose(gt, m);
        let mut asym = [0.0; MAXM * MAXM];
        for k in 0..m * m {
            asym[k] = gt[k] - gtt[k];
        }
        let ax = mat::matvec(&asym[..m * m], x, m);
        let c = mat::matvec(t, &ax[..m], m);
        let mut gu = [0.0; MAXM];
        for k in 0..m {
            gu[k] = gxi[k] + c[k];
        }
        let grad_u = mat::matvec(&pr[..m * m], &gu[..m], m);
        let mut udot = [0.0; MAXM];
        for k in 0..m {
            udot[k] = -grad_u[k];
        }
        // K̇ = −8 Π(G_θ), Π(G) = ½(S + θSθ), S = P skew(G) P
        let sk = mat::skew(gt, m);
        let s = mat::sandwich(&pr[..m * m], &sk[..m * m], m);
        let pi = anticommuting_part(&s[..m * m], t, m);
        let mut kdot = [0.0; MAXM * MAXM];
        for k in 0..m * m {
            kdot[k] = -8.0 * pi[k];
        }
        let tdot = assemble_theta_dot(x, t, &udot[..m], &kdot, m);
        let o = out.at_mut(p);
        o[..m].copy_from_slice(&udot[..m]);
        o[m..].copy_from_slice(&tdot[..m * m]);
    }
    out
}

/// Almost contact flow right side (ξ̇, θ̇) with constraint validation.
pub fn acts_rhs(xi: &Field, theta: &Field) -> Result<(Field, Field)> {
    let u = acts_pack(xi, theta)?;
    check_shape(&u)?;
    let d = drift(&u);
    if d > 1e-8 {
        return Err(Error::ConstraintViolation(format!("(ξ, θ) violates θ² = −I + ξξᵀ, |ξ| = 1 (drift {d:e})")));
    }
    Ok(acts_split(&rhs(&u)))
}

/// |ξ̇|² + ⅛|Pθ̇P|²_F at one point.
#[inline]
pub(crate) fn eta_point(state: &[f64], a: &[f64], b: &[f64], m: usize) -> f64 {
    let pr = mat::projector(&state[..m], m);
    let pa = mat::sandwich(&pr[..m * m], &a[m..], m);
    let pb = mat::sandwich(&pr[..m * m], &b[m..], m);
    dot(&a[..m], &b[..m]) + dot(&pa[..m * m], &pb[..m * m]) / 8.0
}

pub(crate) fn retract(u: &Field) -> (Field, f64) {
    let m = dim(u);
    let mut out = u.clone();
    let mut repair: f64 = 0.0;
    for p in 0..u.npoints() {
        let src = u.at(p);
        let n = dot(&src[..m], &src[..m]).sqrt();
        let xi: Vec<f64> = src[..m].iter().map(|v| v / n).collect();
        let pr = mat::projector(&xi, m);
        let sk = mat::skew(&src[m..], m);
        let s = mat::sandwich(&pr[..m * m], &sk[..m * m], m);
        let mut e = [0.0; MAXM * MAXM];
        for a in 0..m {
            for b in 0..m {
                e[a * m + b] = xi[a] * xi[b];
            }
        }
        let th = mat::polar(&s[..m * m], Some(&e[..m * m]), m);
        let o = out.at_mut(p);
        o[..m].copy_from_slice(&xi);
        o[m..].copy_from_slice(&th[..m * m]);
        repair = repair.max(mat::max_abs_diff(o, src));
    }
    (out, repair)
}

/// Grid for the default almost contact runs: T⁵ with `active` varying axes.
pub fn acts_grid(active: usize, size: usize, length: f64) -> Result<GridSpec> {
    GridSpec::torus(5, active, size, length)
}
