//! Row-major m×m helpers for per-point work (m ≤ 8).

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) const MAXM: usize = 8;
pub(crate) type Buf = [f64; MAXM * MAXM];

#[inline]
pub(crate) fn mul(a: &[f64], b: &[f64], m: usize) -> Buf {
    let mut o = [0.0; MAXM * MAXM];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                o[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    o
}

#[inline]
pub(crate) fn transpose(a: &[f64], m: usize) -> Buf {
    let mut o = [0.0; MAXM * MAXM];
    for i in 0..m {
        for j in 0..m {
            o[j * m + i] = a[i * m + j];
        }
    }
    o
}

#[inline]
pub(crate) fn matvec(a: &[f64], x: &[f64], m: usize) -> [f64; MAXM] {
    let mut o = [0.0; MAXM];
    for i in 0..m {
        o[i] = (0..m).map(|j| a[i * m + j] * x[j]).sum();
    }
    o
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// P = I − ξξᵀ.
#[inline]
pub(crate) fn projector(xi: &[f64], m: usize) -> Buf {
    let mut p = [0.0; MAXM * MAXM];
    for i in 0..m {
        for j in 0..m {
            p[i * m + j] = if i == j { 1.0 } else { 0.0 } - xi[i] * xi[j];
        }
    }
    p
}

/// P A P.
#[inline]
pub(crate) fn sandwich(p: &[f64], a: &[f64], m: usize) -> Buf {
    let t = mul(p, a, m);
    mul(&t[..m * m], p, m)
}

/// ½(A − Aᵀ).
#[inline]
pub(crate) fn skew(a: &[f64], m: usize) -> Buf {
    let mut o = [0.0; MAXM * MAXM];
    for i in 0..m {
        for j in 0..m {
            o[i * m + j] = 0.5 * (a[i * m + j] - a[j * m + i]);
        }
    }
    o
}

/// S (SᵀS + E)^{−1/2}: the polar factor of S, with E added to make a
/// kernel direction invertible.
pub(crate) fn polar(s: &[f64], extra: Option<&[f64]>, m: usize) -> Buf {
    let sm = DMatrix::from_row_slice(m, m, &s[..m * m]);
    let mut g = sm.transpose() * &sm;
    if let Some(e) = extra {
        g += DMatrix::from_row_slice(m, m, &e[..m * m]);
    }
    let eig = SymmetricEigen::new(g);
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.max(1e-300).sqrt());
    let r = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let out = sm * r;
    let mut o = [0.0; MAXM * MAXM];
    for i in 0..m {
        for j in 0..m {
            o[i * m + j] = out[(i, j)];
        }
    }
    o
}

#[inline]
pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (x, y)| w.max((x - y).abs()))
}
