//! Dense exterior algebra on ℝⁿ for n ≤ 8.
//!
//! A k-form stores its C(n,k) coefficients on strictly increasing
//! multi-indices in lexicographic order. Indices are 0-based.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

pub const MAX_DIM: usize = 8;

/// Plain component vector.
pub type Vector = Vec<f64>;

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// All strictly increasing k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binom(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lexicographic rank of a strictly increasing multi-index.
pub fn rank(idx: &[usize], n: usize) -> usize {
    let k = idx.len();
    let mut r = 0;
    let mut prev: isize = -1;
    for (i, &c) in idx.iter().enumerate() {
        for j in (prev + 1) as usize..c {
            r += binom(n - j - 1, k - i - 1);
        }
        prev = c as isize;
    }
    r
}

/// Sorts `idx` in place and returns the permutation sign, or `None` on a repeat.
pub fn sort_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl AltForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim, "form shape ({dim},{degree}) out of range");
        AltForm { dim, degree, coeffs: vec![0.0; binom(dim, degree)] }
    }

    pub fn scalar(dim: usize, v: f64) -> Self {
        let mut f = Self::zero(dim, 0);
        f.coeffs[0] = v;
        f
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim > MAX_DIM || degree > dim || coeffs.len() != binom(dim, degree) {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a {degree}-form on R^{dim}",
                coeffs.len()
            )));
        }
        Ok(AltForm { dim, degree, coeffs })
    }

    /// Sum of `c · e^{I}` terms; indices may be unordered.
    pub fn from_terms(dim: usize, degree: usize, terms: &[(f64, &[usize])]) -> Self {
        let mut f = Self::zero(dim, degree);
        for (c, idx) in terms {
            assert_eq!(idx.len(), degree);
            f.add_at(idx, *c);
        }
        f
    }

    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        Self::from_terms(dim, idx.len(), &[(1.0, idx)])
    }

    pub fn volume(dim: usize) -> Self {
        let idx: Vec<usize> = (0..dim).collect();
        Self::basis(dim, &idx)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Component on an arbitrary index tuple (antisymmetric extension).
    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.degree);
        let mut s = idx.to_vec();
        match sort_sign(&mut s) {
            Some(sign) => sign * self.coeffs[rank(&s, self.dim)],
            None => 0.0,
        }
    }

    /// Adds `v` to the component on `idx`, respecting antisymmetry.
    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let mut s = idx.to_vec();
        if let Some(sign) = sort_sign(&mut s) {
            let r = rank(&s, self.dim);
            self.coeffs[r] += sign * v;
        }
    }

    fn check_same(&self, other: &AltForm) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "({},{}) vs ({},{})",
                self.dim, self.degree, other.dim, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &AltForm) -> Result<AltForm> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(AltForm { coeffs, ..*self })
    }

    pub fn sub(&self, other: &AltForm) -> Result<AltForm> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(AltForm { coeffs, ..*self })
    }

    pub fn scale(&self, s: f64) -> AltForm {
        AltForm { coeffs: self.coeffs.iter().map(|c| c * s).collect(), ..*self }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn wedge(&self, other: &AltForm) -> Result<AltForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("R^{} vs R^{}", self.dim, other.dim)));
        }
        let (n, k, l) = (self.dim, self.degree, other.degree);
        if k + l > n {
            return Err(Error::DegreeOverflow { k, l, n });
        }
        let mut out = AltForm::zero(n, k + l);
        let ci = combinations(n, k);
        let cj = combinations(n, l);
        let mut buf = Vec::with_capacity(k + l);
        for (a, i) in self.coeffs.iter().zip(&ci) {
            if *a == 0.0 {
                continue;
            }
            for (b, j) in other.coeffs.iter().zip(&cj) {
                if *b == 0.0 {
                    continue;
                }
                buf.clear();
                buf.extend_from_slice(i);
                buf.extend_from_slice(j);
                if let Some(sign) = sort_sign(&mut buf) {
                    out.coeffs[rank(&buf, n)] += sign * a * b;
                }
            }
        }
        Ok(out)
    }

    /// Euclidean Hodge star with α ∧ ∗β = ⟨α, β⟩ vol.
    pub fn hodge(&self) -> AltForm {
        let (n, k) = (self.dim, self.degree);
        let mut out = AltForm::zero(n, n - k);
        for (a, i) in self.coeffs.iter().zip(combinations(n, k)) {
            let comp: Vec<usize> = (0..n).filter(|m| !i.contains(m)).collect();
            let mut perm = i.clone();
            perm.extend_from_slice(&comp);
            let sign = sort_sign(&mut perm).expect("complement is disjoint");
            out.coeffs[rank(&comp, n)] += sign * a;
        }
        out
    }

    /// (X ⌟ a)(Y₁,…) = a(X, Y₁,…).
    pub fn interior(&self, x: &[f64]) -> Result<AltForm> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!("vector of length {} on R^{}", x.len(), self.dim)));
        }
        if self.degree == 0 {
            return Err(Error::DegreeZero);
        }
        let (n, k) = (self.dim, self.degree);
        let mut out = AltForm::zero(n, k - 1);
        let mut buf = Vec::with_capacity(k);
        for (r, j) in combinations(n, k - 1).into_iter().enumerate() {
            let mut s = 0.0;
            for (m, xm) in x.iter().enumerate() {
                if *xm == 0.0 || j.contains(&m) {
                    continue;
                }
                buf.clear();
                buf.push(m);
                buf.extend_from_slice(&j);
                s += xm * self.get(&buf);
            }
            out.coeffs[r] = s;
        }
        Ok(out)
    }

    /// Infinitesimal pullback: (β.a)(X₁,…,X_k) = Σᵢ a(X₁,…,βXᵢ,…,X_k),
    /// with (βX)_i = Σ_j β_ij X_j.
    pub fn so_action(&self, beta: &SkewMatrix) -> Result<AltForm> {
        if beta.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!("so({}) on R^{}", beta.dim(), self.dim)));
        }
        let (n, k) = (self.dim, self.degree);
        let mut out = AltForm::zero(n, k);
        let mut buf = vec![0; k];
        for (r, idx) in combinations(n, k).into_iter().enumerate() {
            let mut s = 0.0;
            for slot in 0..k {
                for j in 0..n {
                    let b = beta.get(j, idx[slot]);
                    if b == 0.0 {
                        continue;
                    }
                    buf.copy_from_slice(&idx);
                    buf[slot] = j;
                    s += b * self.get(&buf);
                }
            }
            out.coeffs[r] = s;
        }
        Ok(out)
    }

    /// Inner product summed over increasing multi-indices.
    pub fn form_inner(&self, other: &AltForm) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    /// Inner product of the underlying antisymmetric tensors (sum over all
    /// index tuples); equals k! times `form_inner`.
    pub fn tensor_inner(&self, other: &AltForm) -> Result<f64> {
        let f: f64 = (1..=self.degree).map(|i| i as f64).product();
        Ok(f * self.form_inner(other)?)
    }
}

/// Skew-symmetric n×n matrix stored by its strict upper triangle, row-major.
/// The storage coincides with the 2-form coefficient layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SkewMatrix {
    pub fn zero(dim: usize) -> Self {
        SkewMatrix { dim, upper: vec![0.0; binom(dim, 2)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        // rank of (i, j), i < j
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[self.slot(i, j)],
            Greater => -self.upper[self.slot(j, i)],
            Equal => 0.0,
        }
    }

    /// Sets entry (i, j) and implicitly (j, i) = −v. Diagonal writes must be 0.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => {
                let s = self.slot(i, j);
                self.upper[s] = v
            }
            Greater => {
                let s = self.slot(j, i);
                self.upper[s] = -v
            }
            Equal => assert!(v == 0.0, "diagonal of a skew matrix must vanish"),
        }
    }

    pub fn from_form(f: &AltForm) -> Result<Self> {
        if f.degree() != 2 {
            return Err(Error::DimensionMismatch(format!("{}-form is not a 2-form", f.degree())));
        }
        Ok(SkewMatrix { dim: f.dim(), upper: f.coeffs().to_vec() })
    }

    pub fn to_form(&self) -> AltForm {
        AltForm { dim: self.dim, degree: 2, coeffs: self.upper.clone() }
    }

    /// Skew part ½(M − Mᵀ) of a square matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch("non-square matrix".into()));
        }
        let n = m.nrows();
        let mut s = Self::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                s.set(i, j, 0.5 * (m[(i, j)] - m[(j, i)]));
            }
        }
        Ok(s)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn apply(&self, x: &[f64]) -> Vector {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        SkewMatrix { dim: self.dim, upper: self.upper.iter().map(|v| v * s).collect() }
    }

    /// Frobenius norm of the full matrix.
    pub fn frobenius(&self) -> f64 {
        (2.0 * self.upper.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_match_enumeration() {
        for n in 0..=8 {
            for k in 0..=n {
                let c = combinations(n, k);
                assert_eq!(c.len(), binom(n, k));
                for (r, idx) in c.iter().enumerate() {
                    assert_eq!(rank(idx, n), r);
                }
            }
        }
    }

    #[test]
    fn e1_wedge_e2() {
        let a = AltForm::basis(3, &[0]);
        let b = AltForm::basis(3, &[1]);
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.get(&[0, 1]), 1.0);
        assert_eq!(w.get(&[1, 0]), -1.0);
        assert_eq!(w.get(&[0, 0]), 0.0);
    }

    #[test]
    fn wedge_errors() {
        let a = AltForm::zero(3, 2);
        assert!(matches!(a.wedge(&AltForm::zero(3, 2)), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(a.wedge(&AltForm::zero(4, 1)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn hodge_volume_and_unit() {
        assert_eq!(AltForm::volume(7).hodge().coeffs(), &[1.0]);
        assert_eq!(AltForm::scalar(7, 1.0).hodge(), AltForm::volume(7));
    }

    #[test]
    fn interior_basics() {
        let f = AltForm::basis(3, &[0, 1]);
        let g = f.interior(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g, AltForm::basis(3, &[1]));
        assert_eq!(AltForm::scalar(3, 1.0).interior(&[1.0, 0.0, 0.0]), Err(Error::DegreeZero));
    }

    #[test]
    fn rotation_fixes_area_form() {
        let mut b = SkewMatrix::zero(2);
        b.set(0, 1, 0.7);
        let a = AltForm::basis(2, &[0, 1]);
        assert_eq!(a.so_action(&b).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn skew_matrix_roundtrip() {
        let mut s = SkewMatrix::zero(4);
        s.set(2, 1, 3.0);
        assert_eq!(s.get(1, 2), -3.0);
        let d = s.to_dense();
        assert_eq!(SkewMatrix::from_dense(&d).unwrap(), s);
        assert_eq!(s.to_form().get(&[2, 1]), 3.0);
    }
}
