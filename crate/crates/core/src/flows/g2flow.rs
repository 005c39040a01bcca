//! Isometric G2 flow ∂_t φ = (div T)⌟ψ on flat 7-tori.
//!
//! ε = ⅓|T|²; a vertical vector Y⌟ψ has squared norm ⅔|Y|², matching the
//! Λ²₇ representation −⅓Y⌟φ under the Frobenius norm.

use crate::g2::{self, contract_point, psi_field, N3};
use crate::grid::{Field, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

/// Exact steepest descent of the discrete energy Σ ⅓|T|² in the fibre
/// metric. It differs from (div T)⌟ψ at O(h²), where the discrete product
/// rule fails.
pub(crate) fn rhs(u: &Field) -> Field {
    rhs_with_energy(u).0
}

/// Central difference of component block `p` along `axis`, into `out`.
#[inline]
fn diff_at(u: &Field, p: usize, axis: usize, out: &mut [f64; N3]) {
    let g = u.grid();
    let inv = 1.0 / (2.0 * g.h(axis));
    let (a, b) = (u.at(g.shift(p, axis, 1)), u.at(g.shift(p, axis, -1)));
    for k in 0..N3 {
        out[k] = (a[k] - b[k]) * inv;
    }
}

/// Right side and ε = ⅓|T|² from one torsion evaluation.
pub(crate) fn rhs_with_energy(u: &Field) -> (Field, Field) {
    let g = u.grid();
    let axes = g.active_axes();
    let np = g.npoints();
    let mut d = [0.0; N3];
    // T_i = −C(∂ᵢφ, ∗φ)/24, stored per active axis
    let mut t = Field::zeros(g, 7 * axes.len());
    for p in 0..np {
        let psi = g2::psi_point(u.at(p));
        for (k, &i) in axes.iter().enumerate() {
            diff_at(u, p, i, &mut d);
            let v = contract_point(&d, &psi);
            for (o, c) in t.at_mut(p)[7 * k..7 * k + 7].iter_mut().zip(v) {
                *o = -c / 24.0;
            }
        }
    }
    let eps = t.map_points(1, |s, o| o[0] = s.iter().map(|v| v * v).sum::<f64>() / 3.0);
    // ambient gradient density of ε
    let mut grad = Field::zeros(g, N3);
    let mut a = Field::zeros(g, N3);
    for (k, &i) in axes.iter().enumerate() {
        for p in 0..np {
            let psi = g2::psi_point(u.at(p));
            a.at_mut(p).copy_from_slice(&g2::contract_adjoint_gamma(&t.at(p)[7 * k..7 * k + 7], &psi));
        }
        let inv = 1.0 / (2.0 * g.h(i) * 36.0);
        for p in 0..np {
            diff_at(u, p, i, &mut d);
            let b = g2::contract_adjoint_phi(&t.at(p)[7 * k..7 * k + 7], &d);
            let (ap, am) = (a.at(g.shift(p, i, 1)), a.at(g.shift(p, i, -1)));
            let o = grad.at_mut(p);
            for c in 0..N3 {
                o[c] += (ap[c] - am[c]) * inv - b[c] / 36.0;
            }
        }
    }
    // τ = Y⌟ψ with ⅔ Y·Z = −⟨grad, Z⌟ψ⟩
    let mut out = a;
    for p in 0..np {
        let psi = g2::psi_point(u.at(p));
        let w = g2::interior_psi_adjoint(grad.at(p), &psi);
        let y = w.map(|c| -1.5 * c);
        out.at_mut(p).copy_from_slice(&g2::interior_psi_point(&y, &psi));
    }
    (out, eps)
}

pub(crate) fn torsion(u: &Field) -> Field {
    g2::torsion_with_psi(u, &psi_field(u))
}

pub(crate) fn energy_density(u: &Field) -> Field {
    let t = torsion(u);
    t.map_points(1, |s, d| d[0] = s.iter().map(|v| v * v).sum::<f64>() / 3.0)
}

/// √(2/3)·T(eᵢ) per active axis, so that ε = ½|rep|².
pub(crate) fn torsion_rep(u: &Field) -> Field {
    let t = torsion(u);
    let axes = u.grid().active_axes();
    let s = (2.0f64 / 3.0).sqrt();
    t.map_points(7 * axes.len(), |src, dst| {
        for (k, &a) in axes.iter().enumerate() {
            for j in 0..7 {
                dst[7 * k + j] = s * src[7 * a + j];
            }
        }
    })
}

/// Vector Y with a = Y⌟ψ for a tangent 3-form a.
#[inline]
pub(crate) fn tangent_vector(a: &[f64], psi: &[f64]) -> [f64; 7] {
    let v = contract_point(a, psi);
    v.map(|c| -c / 24.0)
}

#[inline]
pub(crate) fn eta_point(state: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let psi = g2::psi_point(state);
    let ya = tangent_vector(a, &psi);
    let yb = tangent_vector(b, &psi);
    (2.0 / 3.0) * ya.iter().zip(&yb).map(|(x, y)| x * y).sum::<f64>()
}

/// Ratio of the spectral radius of the linearized right side at φ₀ to that
/// of the scalar grid Laplacian, by power iteration on an 8³ × 1⁴ grid.
pub fn g2_diffusion_constant() -> f64 {
    static L: OnceLock<f64> = OnceLock::new();
    *L.get_or_init(|| {
        let g = GridSpec::torus(7, 3, 8, std::f64::consts::TAU).expect("valid grid");
        let base = Field::constant(&g, g2::phi0().coeffs());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut v = Field::from_fn(&g, N3, |_, o| o.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0)));
        let eps = 1e-6;
        let mut rho = 0.0;
        for _ in 0..200 {
            let n = v.data().iter().map(|x| x * x).sum::<f64>().sqrt();
            v = v.scaled(1.0 / n);
            let mut plus = base.clone();
            plus.axpy(eps, &v);
            let mut minus = base.clone();
            minus.axpy(-eps, &v);
            let mut w = rhs(&plus);
            w.axpy(-1.0, &rhs(&minus));
            let w = w.scaled(1.0 / (2.0 * eps));
            rho = w.data().iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w;
        }
        let h = g.h(0);
        let rho_lap = g.n_active() as f64 / (h * h);
        rho / rho_lap
    })
}
