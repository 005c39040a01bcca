//! Randomized identity checks for the exterior algebra and G2 conventions.

use crate::g2::{contract3, recover_beta_72, G2Constants};
use crate::init::rng;
use crate::tensor::{AltForm, SkewMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const IDENTITY_TOL: f64 = 1e-12;
pub const DEFAULT_SEED: u64 = 20240611;
pub const SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    /// Measured constant or rank.
    pub value: f64,
    pub expected: f64,
    /// Largest deviation seen.
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub rows: Vec<CheckRow>,
}

impl SelfTestReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

fn random_vec(r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..7).map(|_| r.gen_range(-1.0..1.0)).collect()
}

fn row(name: &str, value: f64, expected: f64, max_error: f64, tol: f64) -> CheckRow {
    CheckRow {
        name: name.into(),
        pass: max_error <= tol && (value - expected).abs() <= tol.max(1e-9),
        value,
        expected,
        max_error,
    }
}

/// Least-squares constant c with a ≈ c·b, and max |a − expected·b|.
fn fit(pairs: &[(Vec<f64>, Vec<f64>)], expected: f64) -> (f64, f64) {
    let (mut ab, mut bb, mut err) = (0.0, 0.0, 0.0f64);
    for (a, b) in pairs {
        for (x, y) in a.iter().zip(b) {
            ab += x * y;
            bb += y * y;
            err = err.max((x - expected * y).abs());
        }
    }
    (ab / bb, err)
}

fn rank_at(eigs: &[f64], target: f64) -> usize {
    eigs.iter().filter(|e| (*e - target).abs() < 1e-8).count()
}

fn operator_matrix(dim: usize, f: impl Fn(&AltForm) -> AltForm, degree: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut e = AltForm::zero(7, degree);
        e.coeffs_mut()[c] = 1.0;
        let img = f(&e);
        for r in 0..dim {
            m[(r, c)] = img.coeffs()[r];
        }
    }
    m
}

fn sym_eigs(m: &DMatrix<f64>) -> Vec<f64> {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.as_slice().to_vec()
}

/// Runs every identity check against the given constants.
pub fn run_selftest(c: &G2Constants, seed: u64) -> SelfTestReport {
    let mut r = rng(seed);
    let (phi, psi) = (c.phi0(), c.psi0());
    let mut rows = Vec::new();

    // ((β.φ)⌟ψ)⌟φ = 72β on Λ²₇
    let mut pairs = Vec::new();
    let mut rec_err: f64 = 0.0;
    for _ in 0..SAMPLES {
        let x = random_vec(&mut r);
        let beta = SkewMatrix::from_form(&phi.interior(&x).unwrap()).unwrap();
        let gamma = phi.so_action(&beta).unwrap();
        let v = contract3(&gamma, psi).unwrap();
        let lhs = phi.interior(&v).unwrap();
        pairs.push((lhs.coeffs().to_vec(), beta.upper().to_vec()));
        let back = recover_beta_72(&gamma, phi, psi).unwrap();
        rec_err = rec_err.max(back.upper().iter().zip(beta.upper()).fold(0.0, |m, (a, b)| m.max((a - b).abs())));
    }
    let (k, e) = fit(&pairs, 72.0);
    rows.push(row("beta_recovery_72", k, 72.0, e.max(72.0 * rec_err), 72.0 * IDENTITY_TOL));

    // β.φ = −3 X⌟ψ for β = X⌟φ
    let mut pairs = Vec::new();
    for _ in 0..SAMPLES {
        let x = random_vec(&mut r);
        let beta = SkewMatrix::from_form(&phi.interior(&x).unwrap()).unwrap();
        pairs.push((phi.so_action(&beta).unwrap().into_coeffs(), psi.interior(&x).unwrap().into_coeffs()));
    }
    let (k, e) = fit(&pairs, -3.0);
    rows.push(row("action_minus_3", k, -3.0, e, IDENTITY_TOL));

    // (X⌟ψ)⌟ψ = −24X
    let mut pairs = Vec::new();
    for _ in 0..SAMPLES {
        let x = random_vec(&mut r);
        pairs.push((contract3(&psi.interior(&x).unwrap(), psi).unwrap(), x));
    }
    let (k, e) = fit(&pairs, -24.0);
    rows.push(row("psi_contraction_minus_24", k, -24.0, e, 24.0 * IDENTITY_TOL));

    // ⟨X⌟φ, X⌟φ⟩ = 6|X|² (tensor inner product)
    let mut pairs = Vec::new();
    for _ in 0..SAMPLES {
        let x = random_vec(&mut r);
        let a = phi.interior(&x).unwrap();
        pairs.push((vec![a.tensor_inner(&a).unwrap()], vec![x.iter().map(|v| v * v).sum()]));
    }
    let (k, e) = fit(&pairs, 6.0);
    rows.push(row("phi_norm_6", k, 6.0, e, 6.0 * IDENTITY_TOL));

    // Λ² = Λ²₇ ⊕ Λ²₁₄ by eigenvalues of η ↦ ∗(φ∧η) and projector ranks
    let op = operator_matrix(21, |e| c.star_phi_wedge(e).unwrap(), 2);
    let eigs = sym_eigs(&op);
    rows.push(row("lambda2_eigen_plus2_rank", rank_at(&eigs, 2.0) as f64, 7.0, 0.0, 0.0));
    rows.push(row("lambda2_eigen_minus1_rank", rank_at(&eigs, -1.0) as f64, 14.0, 0.0, 0.0));
    let p7 = operator_matrix(21, |e| c.project_lambda2(e).unwrap().part7, 2);
    let p14 = operator_matrix(21, |e| c.project_lambda2(e).unwrap().part14, 2);
    rows.push(row("lambda2_projector7_rank", rank_at(&sym_eigs(&p7), 1.0) as f64, 7.0, 0.0, 0.0));
    rows.push(row("lambda2_projector14_rank", rank_at(&sym_eigs(&p14), 1.0) as f64, 14.0, 0.0, 0.0));

    // Λ³ = Λ³₁ ⊕ Λ³₇ ⊕ Λ³₂₇ by projector ranks
    let p1 = operator_matrix(35, |e| c.project_lambda3(e).unwrap().part1, 3);
    let p7 = operator_matrix(35, |e| c.project_lambda3(e).unwrap().part7, 3);
    let p27 = operator_matrix(35, |e| c.project_lambda3(e).unwrap().part27, 3);
    rows.push(row("lambda3_projector1_rank", rank_at(&sym_eigs(&p1), 1.0) as f64, 1.0, 0.0, 0.0));
    rows.push(row("lambda3_projector7_rank", rank_at(&sym_eigs(&p7), 1.0) as f64, 7.0, 0.0, 0.0));
    rows.push(row("lambda3_projector27_rank", rank_at(&sym_eigs(&p27), 1.0) as f64, 27.0, 0.0, 0.0));

    SelfTestReport { rows }
}

/// The standard-convention self-test with the default seed.
pub fn standard_selftest() -> SelfTestReport {
    run_selftest(&G2Constants::standard(), DEFAULT_SEED)
}
