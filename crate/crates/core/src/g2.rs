//! G2 linear algebra on ℝ⁷ and the torsion of G2-structure fields on flat tori.
//!
//! φ₀ = e¹²³ + e¹⁴⁵ + e¹⁶⁷ + e²⁴⁶ − e²⁵⁷ − e³⁴⁷ − e³⁵⁶ (1-based), ψ₀ = ∗φ₀.
//! "Contraction" of a 3-form with a 4-form means the full tensor sum
//! Σ_{jkl} γ_{jkl} ψ_{jklm} over all ordered index triples.

use crate::error::{Error, Result};
use crate::grid::{partial, Field, GridSpec};
use crate::tensor::{combinations, rank, sort_sign, AltForm, SkewMatrix, Vector};
use nalgebra::SMatrix;
use std::sync::OnceLock;

pub type Matrix7 = SMatrix<f64, 7, 7>;

/// Number of 3-form components on ℝ⁷.
pub const N3: usize = 35;
/// Number of 2-form components on ℝ⁷.
pub const N2: usize = 21;

const PHI0_TERMS: [(f64, [usize; 3]); 7] = [
    (1.0, [1, 2, 3]),
    (1.0, [1, 4, 5]),
    (1.0, [1, 6, 7]),
    (1.0, [2, 4, 6]),
    (-1.0, [2, 5, 7]),
    (-1.0, [3, 4, 7]),
    (-1.0, [3, 5, 6]),
];

pub fn phi0() -> AltForm {
    let mut f = AltForm::zero(7, 3);
    for (c, idx) in PHI0_TERMS {
        f.add_at(&[idx[0] - 1, idx[1] - 1, idx[2] - 1], c);
    }
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Constants {
    phi0: AltForm,
    psi0: AltForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda2Split {
    pub part7: AltForm,
    pub part14: AltForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda3Split {
    pub part1: AltForm,
    pub part7: AltForm,
    pub part27: AltForm,
}

impl G2Constants {
    pub fn standard() -> Self {
        Self::from_phi(phi0())
    }

    /// Constants built from an arbitrary 3-form, with ψ = ∗φ. Used to
    /// exercise the identity checks against a wrong convention.
    pub fn from_phi(phi: AltForm) -> Self {
        let psi0 = phi.hodge();
        G2Constants { phi0: phi, psi0 }
    }

    pub fn phi0(&self) -> &AltForm {
        &self.phi0
    }
    pub fn psi0(&self) -> &AltForm {
        &self.psi0
    }

    /// φ_{ijk} on arbitrary (0-based) indices.
    pub fn phi(&self, i: usize, j: usize, k: usize) -> f64 {
        self.phi0.get(&[i, j, k])
    }
    /// ψ_{ijkl} on arbitrary (0-based) indices.
    pub fn psi(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.psi0.get(&[i, j, k, l])
    }

    /// η ↦ ∗(φ₀ ∧ η) on 2-forms.
    pub fn star_phi_wedge(&self, eta: &AltForm) -> Result<AltForm> {
        Ok(self.phi0.wedge(eta)?.hodge())
    }

    /// Λ²₇ ⊕ Λ²₁₄ split. With this φ₀ and orientation, η ↦ ∗(φ₀∧η) acts as
    /// +2 on Λ²₇ (the X⌟φ₀) and −1 on Λ²₁₄.
    pub fn project_lambda2(&self, eta: &AltForm) -> Result<Lambda2Split> {
        check_shape(eta, 2)?;
        let s = self.star_phi_wedge(eta)?;
        Ok(Lambda2Split { part7: eta.add(&s)?.scale(1.0 / 3.0), part14: eta.scale(2.0).sub(&s)?.scale(1.0 / 3.0) })
    }

    pub fn project_lambda3(&self, gamma: &AltForm) -> Result<Lambda3Split> {
        check_shape(gamma, 3)?;
        let part1 = self.phi0.scale(gamma.form_inner(&self.phi0)? / self.phi0.form_inner(&self.phi0)?);
        let x = self.recover_vector_psi(gamma)?;
        let part7 = self.psi0.interior(&x)?;
        let part27 = gamma.sub(&part1)?.sub(&part7)?;
        Ok(Lambda3Split { part1, part7, part27 })
    }

    /// X with γ = X⌟ψ₀, via (X⌟ψ₀)⌟ψ₀ = −24X. For γ outside Λ³₇ this
    /// returns the vector of its Λ³₇ part.
    pub fn recover_vector_psi(&self, gamma7: &AltForm) -> Result<Vector> {
        Ok(contract3(gamma7, &self.psi0)?.into_iter().map(|v| -v / 24.0).collect())
    }
}

fn check_shape(f: &AltForm, k: usize) -> Result<()> {
    if f.dim() != 7 || f.degree() != k {
        return Err(Error::DimensionMismatch(format!("expected a {k}-form on R^7, got ({}, {})", f.dim(), f.degree())));
    }
    Ok(())
}

/// v_m = Σ_{jkl} γ_{jkl} ψ_{jklm}.
pub fn contract3(gamma: &AltForm, psi: &AltForm) -> Result<Vector> {
    check_shape(gamma, 3)?;
    check_shape(psi, 4)?;
    let mut out = vec![0.0; 7];
    let mut buf = [0usize; 4];
    for (g, idx) in gamma.coeffs().iter().zip(combinations(7, 3)) {
        if *g == 0.0 {
            continue;
        }
        buf[..3].copy_from_slice(&idx);
        for (m, o) in out.iter_mut().enumerate() {
            buf[3] = m;
            *o += 6.0 * g * psi.get(&buf);
        }
    }
    Ok(out)
}

/// β = (1/72)·(γ⌟ψ)⌟φ, the Λ²₇ element with β.φ = γ.
pub fn recover_beta_72(gamma7: &AltForm, phi: &AltForm, psi: &AltForm) -> Result<SkewMatrix> {
    let v: Vector = contract3(gamma7, psi)?.into_iter().map(|c| c / 72.0).collect();
    SkewMatrix::from_form(&phi.interior(&v)?)
}

/// Metric induced by a positive 3-form: B(X,Y)vol = ⅙(X⌟φ)∧(Y⌟φ)∧φ,
/// g = det(B)^{−1/9} B.
pub fn metric_from_phi(phi: &AltForm) -> Result<Matrix7> {
    check_shape(phi, 3)?;
    let mut c = [0.0; N3];
    c.copy_from_slice(phi.coeffs());
    metric_point(&c)
}

/// Pointwise tables for the ℝ⁷ kernels used on grids.
struct Tables {
    /// ψ[comp(I)] = sign · φ[I] for the Hodge star on 3-forms.
    hodge3: [(usize, f64); N3],
    /// For each 3-index I, the four m ∉ I with rank(I ∪ m) and sign(I, m).
    c34: [[(usize, usize, f64); 4]; N3],
    /// For each 3-index J, the four m ∉ J with rank(J ∪ m) and sign(m, J).
    i43: [[(usize, usize, f64); 4]; N3],
    /// For each 2-index P, the five m ∉ P with rank(P ∪ m) and sign(m, P).
    i32: [[(usize, usize, f64); 5]; N2],
    /// 2-form ∧ 3-form → 5-form entries (r2, r3, r5, sign).
    w23: Vec<(usize, usize, usize, f64)>,
    /// For each 2-index P, sign(P, comp P) (volume coefficient of e^P ∧ e^{comp P}).
    vol25: [(usize, f64); N2],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let c3 = combinations(7, 3);
        let c2 = combinations(7, 2);
        let mut hodge3 = [(0, 0.0); N3];
        let mut c34 = [[(0, 0, 0.0); 4]; N3];
        let mut i43 = [[(0, 0, 0.0); 4]; N3];
        for (r, idx) in c3.iter().enumerate() {
            let comp: Vec<usize> = (0..7).filter(|m| !idx.contains(m)).collect();
            let mut perm = idx.clone();
            perm.extend_from_slice(&comp);
            hodge3[r] = (rank(&comp, 7), sort_sign(&mut perm).unwrap());
            for (s, &m) in comp.iter().enumerate() {
                let mut a = idx.clone();
                a.push(m);
                let sa = sort_sign(&mut a).unwrap();
                let mut b = vec![m];
                b.extend_from_slice(idx);
                let sb = sort_sign(&mut b).unwrap();
                c34[r][s] = (m, rank(&a, 7), sa);
                i43[r][s] = (m, rank(&b, 7), sb);
            }
        }
        let mut i32 = [[(0, 0, 0.0); 5]; N2];
        let mut vol25 = [(0, 0.0); N2];
        for (r, idx) in c2.iter().enumerate() {
            let comp: Vec<usize> = (0..7).filter(|m| !idx.contains(m)).collect();
            for (s, &m) in comp.iter().enumerate() {
                let mut b = vec![m];
                b.extend_from_slice(idx);
                let sb = sort_sign(&mut b).unwrap();
                i32[r][s] = (m, rank(&b, 7), sb);
            }
            let mut perm = idx.clone();
            perm.extend_from_slice(&comp);
            vol25[r] = (rank(&comp, 7), sort_sign(&mut perm).unwrap());
        }
        let mut w23 = Vec::new();
        for (r2, p) in c2.iter().enumerate() {
            for (r3, i) in c3.iter().enumerate() {
                let mut a = p.clone();
                a.extend_from_slice(i);
                if let Some(s) = sort_sign(&mut a) {
                    w23.push((r2, r3, rank(&a, 7), s));
                }
            }
        }
        Tables { hodge3, c34, i43, i32, w23, vol25 }
    })
}

/// ψ = ∗φ for a 3-form given by its 35 coefficients.
#[inline]
pub fn psi_point(phi: &[f64]) -> [f64; N3] {
    let t = tables();
    let mut psi = [0.0; N3];
    for (r, &(c, s)) in t.hodge3.iter().enumerate() {
        psi[c] = s * phi[r];
    }
    psi
}

/// v_m = Σ_{jkl} γ_{jkl} ψ_{jklm} on raw coefficients.
#[inline]
pub fn contract_point(gamma: &[f64], psi: &[f64]) -> [f64; 7] {
    let t = tables();
    let mut v = [0.0; 7];
    for (r, row) in t.c34.iter().enumerate() {
        let g = 6.0 * gamma[r];
        for &(m, r4, s) in row {
            v[m] += s * g * psi[r4];
        }
    }
    v
}

/// Y⌟ψ on raw coefficients.
#[inline]
pub fn interior_psi_point(y: &[f64], psi: &[f64]) -> [f64; N3] {
    let t = tables();
    let mut out = [0.0; N3];
    for (r, row) in t.i43.iter().enumerate() {
        let mut acc = 0.0;
        for &(m, r4, s) in row {
            acc += s * y[m] * psi[r4];
        }
        out[r] = acc;
    }
    out
}

/// Y⌟φ on raw coefficients (2-form, also the strict upper triangle of a skew matrix).
#[inline]
pub fn interior_phi_point(y: &[f64], phi: &[f64]) -> [f64; N2] {
    let t = tables();
    let mut out = [0.0; N2];
    for (r, row) in t.i32.iter().enumerate() {
        let mut acc = 0.0;
        for &(m, r3, s) in row {
            acc += s * y[m] * phi[r3];
        }
        out[r] = acc;
    }
    out
}

/// Unnormalized B of the metric formula, on raw coefficients.
pub fn b_matrix_point(phi: &[f64]) -> Matrix7 {
    let t = tables();
    let mut alpha = [[0.0; N2]; 7];
    for (a, al) in alpha.iter_mut().enumerate() {
        let mut e = [0.0; 7];
        e[a] = 1.0;
        *al = interior_phi_point(&e, phi);
    }
    // five-forms α_b ∧ φ
    let mut beta = [[0.0; N2]; 7];
    for (b, be) in beta.iter_mut().enumerate() {
        for &(r2, r3, r5, s) in &t.w23 {
            be[r5] += s * alpha[b][r2] * phi[r3];
        }
    }
    let mut m = Matrix7::zeros();
    for a in 0..7 {
        for b in a..7 {
            let mut acc = 0.0;
            for (r2, &(r5, s)) in t.vol25.iter().enumerate() {
                acc += s * alpha[a][r2] * beta[b][r5];
            }
            m[(a, b)] = acc / 6.0;
            m[(b, a)] = acc / 6.0;
        }
    }
    m
}

fn metric_point(phi: &[f64]) -> Result<Matrix7> {
    let b = b_matrix_point(phi);
    let det = b.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPositiveForm(det));
    }
    Ok(b * det.powf(-1.0 / 9.0))
}

/// max |g_φ − id| over the entries of the induced metric.
pub fn metric_drift_point(phi: &[f64]) -> Result<f64> {
    Ok((metric_point(phi)? - Matrix7::identity()).abs().max())
}

/// Largest pointwise metric drift over a G2 field.
pub fn metric_drift(phi: &Field) -> Result<f64> {
    check_g2_field(phi)?;
    let mut worst: f64 = 0.0;
    for p in 0..phi.npoints() {
        worst = worst.max(metric_drift_point(phi.at(p))?);
    }
    Ok(worst)
}

fn check_g2_field(phi: &Field) -> Result<()> {
    if phi.ncomp() != N3 || phi.grid().n() != 7 {
        return Err(Error::DimensionMismatch(format!(
            "G2 field needs 35 components on a 7-torus, got {} on {}",
            phi.ncomp(),
            phi.grid().n()
        )));
    }
    Ok(())
}

fn check_drift(phi: &Field, drift_tol: Option<f64>) -> Result<()> {
    check_g2_field(phi)?;
    if let Some(tol) = drift_tol {
        let d = metric_drift(phi)?;
        if d > tol {
            return Err(Error::MetricDrift { drift: d, tol });
        }
    }
    Ok(())
}

pub fn psi_field(phi: &Field) -> Field {
    phi.map_points(N3, |src, dst| dst.copy_from_slice(&psi_point(src)))
}

/// Full torsion without the drift check. Output has 49 components per
/// point: entry 7·i + j is T_{ij}, i the derivative axis.
pub(crate) fn torsion_with_psi(phi: &Field, psi: &Field) -> Field {
    let g = phi.grid();
    let mut t = Field::zeros(g, 49);
    for i in g.active_axes() {
        let d = partial(phi, i);
        for p in 0..g.npoints() {
            let v = contract_point(d.at(p), psi.at(p));
            let row = &mut t.at_mut(p)[7 * i..7 * i + 7];
            for j in 0..7 {
                row[j] = -v[j] / 24.0;
            }
        }
    }
    t
}

/// T with ∂ᵢφ = T(eᵢ)⌟ψ, T_{i·} = −(1/24) contraction of ∂ᵢφ with ψ.
/// Layout as in [`torsion_with_psi`]; inactive-axis rows are zero.
pub fn full_torsion(phi: &Field, drift_tol: Option<f64>) -> Result<Field> {
    check_drift(phi, drift_tol)?;
    Ok(torsion_with_psi(phi, &psi_field(phi)))
}

/// (div T)_j = Σᵢ ∂ᵢ T_{ij}.
pub fn torsion_divergence(t: &Field) -> Field {
    let g = t.grid();
    let mut out = Field::zeros(g, 7);
    for i in g.active_axes() {
        let inv = 1.0 / (2.0 * g.h(i));
        for p in 0..g.npoints() {
            let (pp, pm) = (g.shift(p, i, 1), g.shift(p, i, -1));
            let (a, b) = (&t.at(pp)[7 * i..7 * i + 7], &t.at(pm)[7 * i..7 * i + 7]);
            let o = out.at_mut(p);
            for j in 0..7 {
                o[j] += (a[j] - b[j]) * inv;
            }
        }
    }
    out
}

pub(crate) fn rhs_from_parts(div: &Field, psi: &Field) -> Field {
    let mut out = Field::zeros(div.grid(), N3);
    for p in 0..div.npoints() {
        out.at_mut(p).copy_from_slice(&interior_psi_point(div.at(p), psi.at(p)));
    }
    out
}

/// ∂_t φ = (div T)⌟ψ.
pub fn g2_flow_rhs(phi: &Field, drift_tol: Option<f64>) -> Result<Field> {
    check_drift(phi, drift_tol)?;
    let psi = psi_field(phi);
    let t = torsion_with_psi(phi, &psi);
    Ok(rhs_from_parts(&torsion_divergence(&t), &psi))
}

/// Λ²₇ representation −⅓ (div T)⌟φ of the tension, 21 upper-triangle
/// entries per point.
pub fn g2_tension_m(phi: &Field, drift_tol: Option<f64>) -> Result<Field> {
    check_drift(phi, drift_tol)?;
    let t = torsion_with_psi(phi, &psi_field(phi));
    let div = torsion_divergence(&t);
    let mut out = Field::zeros(phi.grid(), N2);
    for p in 0..phi.npoints() {
        let w = interior_phi_point(div.at(p), phi.at(p));
        for (o, v) in out.at_mut(p).iter_mut().zip(w) {
            *o = -v / 3.0;
        }
    }
    Ok(out)
}

/// Λ²₇ representation −⅓ T(eᵢ)⌟φ of the vertical torsion: 7 × 21 entries
/// per point (axis-major). Its Frobenius norm squared is ⅔|T|².
pub fn vertical_torsion_m(phi: &Field, t: &Field) -> Field {
    let mut out = Field::zeros(phi.grid(), 7 * N2);
    for p in 0..phi.npoints() {
        for i in 0..7 {
            let w = interior_phi_point(&t.at(p)[7 * i..7 * i + 7], phi.at(p));
            for (o, v) in out.at_mut(p)[N2 * i..N2 * (i + 1)].iter_mut().zip(w) {
                *o = -v / 3.0;
            }
        }
    }
    out
}

/// r_p = Σ_{ij} T_{ij}(∂ᵢT_{pj} − ∂_p T_{ij}).
pub fn harmonic_map_residual(phi: &Field, drift_tol: Option<f64>) -> Result<Field> {
    let t = full_torsion(phi, drift_tol)?;
    let g = phi.grid();
    let dt: Vec<Option<Field>> = (0..7).map(|a| g.is_active(a).then(|| partial(&t, a))).collect();
    let mut out = Field::zeros(g, 7);
    for p in 0..g.npoints() {
        let tp = t.at(p);
        let o = out.at_mut(p);
        for (i, di) in dt.iter().enumerate() {
            let Some(di) = di else { continue };
            let d = di.at(p);
            for pp in 0..7 {
                for j in 0..7 {
                    o[pp] += tp[7 * i + j] * d[7 * pp + j];
                }
            }
        }
        for (pp, dp) in dt.iter().enumerate() {
            let Some(dp) = dp else { continue };
            let d = dp.at(p);
            o[pp] -= (0..49).map(|k| tp[k] * d[k]).sum::<f64>();
        }
    }
    Ok(out)
}

/// Standard grid constructor for G2 runs: a 7-torus with `active` axes of
/// `size` points and side `length`.
pub fn g2_grid(active: usize, size: usize, length: f64) -> Result<GridSpec> {
    GridSpec::torus(7, active, size, length)
}

/// Adjoint of γ ↦ contract_point(γ, ψ): A_I = ∂⟨y, C(γ, ψ)⟩/∂γ_I.
#[inline]
pub(crate) fn contract_adjoint_gamma(y: &[f64], psi: &[f64]) -> [f64; N3] {
    let t = tables();
    let mut out = [0.0; N3];
    for (r, row) in t.c34.iter().enumerate() {
        out[r] = 6.0 * row.iter().map(|&(m, r4, s)| s * y[m] * psi[r4]).sum::<f64>();
    }
    out
}

/// ∂⟨y, C(γ, ∗φ)⟩/∂φ, as 3-form coefficients.
#[inline]
pub(crate) fn contract_adjoint_phi(y: &[f64], gamma: &[f64]) -> [f64; N3] {
    let t = tables();
    let mut b4 = [0.0; N3];
    for (r, row) in t.c34.iter().enumerate() {
        let g = 6.0 * gamma[r];
        for &(m, r4, s) in row {
            b4[r4] += s * g * y[m];
        }
    }
    let mut out = [0.0; N3];
    for (r, &(c, s)) in t.hodge3.iter().enumerate() {
        out[r] = s * b4[c];
    }
    out
}

/// w_m = ⟨a, e_m⌟ψ⟩ on raw coefficients (adjoint of Y ↦ Y⌟ψ).
#[inline]
pub(crate) fn interior_psi_adjoint(a: &[f64], psi: &[f64]) -> [f64; 7] {
    let t = tables();
    let mut w = [0.0; 7];
    for (r, row) in t.i43.iter().enumerate() {
        for &(m, r4, s) in row {
            w[m] += s * a[r] * psi[r4];
        }
    }
    w
}
