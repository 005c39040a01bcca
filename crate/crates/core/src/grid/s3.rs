//! Constant-coefficient frames on the round S³.
//!
//! H_a(x) = x·e_a (unit quaternions, e_a ∈ {i, j, k}) is an orthonormal
//! left-invariant frame with ∇_{H_a}H_b = ε_{abc}H_c. A frame
//! σᵢ = Σⱼ Aᵢⱼ Hⱼ with constant A has all covariant derivatives given by
//! structure-constant sums.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, PartialEq)]
pub struct S3Homogeneous {
    a: Matrix3<f64>,
}

/// Volume of the unit 3-sphere.
pub const S3_VOLUME: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

fn levi(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Matrix of v ↦ coefficients of ∇_{H_a}(Σ v_c H_c).
fn ad(a: usize) -> Matrix3<f64> {
    Matrix3::from_fn(|d, c| levi(a, c, d))
}

impl S3Homogeneous {
    pub fn new(a: Matrix3<f64>) -> Result<Self> {
        let dev = (a.transpose() * a - Matrix3::identity()).abs().max();
        if dev > 1e-12 || a.determinant() < 0.0 {
            return Err(Error::ConstraintViolation(format!("frame coefficients not in SO(3) (|AᵀA − I| = {dev:e})")));
        }
        Ok(S3Homogeneous { a })
    }

    /// A = identity: the Hopf frame.
    pub fn hopf() -> Self {
        S3Homogeneous { a: Matrix3::identity() }
    }

    pub fn coefficients(&self) -> &Matrix3<f64> {
        &self.a
    }

    pub(crate) fn from_raw(a: Matrix3<f64>) -> Self {
        S3Homogeneous { a }
    }

    fn row(&self, i: usize) -> Vector3<f64> {
        self.a.row(i).transpose()
    }

    /// Gram matrix ⟨∇σᵢ, ∇σⱼ⟩.
    fn gradient_gram(&self) -> Matrix3<f64> {
        let mut g = Matrix3::zeros();
        for a in 0..3 {
            let m = ad(a);
            for i in 0..3 {
                for j in 0..3 {
                    g[(i, j)] += (m * self.row(i)).dot(&(m * self.row(j)));
                }
            }
        }
        g
    }

    /// ε = ¼ Σᵢ |∇σᵢ|² (uniform over S³).
    pub fn energy_density(&self) -> f64 {
        0.25 * self.gradient_gram().trace()
    }

    /// Rows τᵢ of tr∇²σᵢ + Σⱼ ⟨∇σᵢ, ∇σⱼ⟩ σⱼ in the Hopf basis.
    pub fn tension_vectors(&self) -> Matrix3<f64> {
        let lap: Matrix3<f64> = (0..3).map(|a| ad(a) * ad(a)).sum();
        let g = self.gradient_gram();
        let mut out = Matrix3::zeros();
        for i in 0..3 {
            let mut t = lap * self.row(i);
            for j in 0..3 {
                t += g[(i, j)] * self.row(j);
            }
            out.set_row(i, &t.transpose());
        }
        out
    }
}

/// Tension of the frame, as the matrix ⟨σᵢ, τⱼ⟩.
pub fn s3_hopf_tension(model: &S3Homogeneous) -> Result<Matrix3<f64>> {
    let a = model.coefficients();
    if (a.transpose() * a - Matrix3::identity()).abs().max() > 1e-10 {
        return Err(Error::ConstraintViolation("frame coefficients not orthogonal".into()));
    }
    let t = model.tension_vectors();
    Ok(a * t.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Quaternion, Rotation3, Vector4};

    // Ambient oracle: S³ ⊂ ℝ⁴, vector fields x ↦ x·q, Levi-Civita
    // connection = tangential projection of the ambient derivative.
    fn qmul(a: Vector4<f64>, b: Vector4<f64>) -> Vector4<f64> {
        let p = Quaternion::new(a[0], a[1], a[2], a[3]) * Quaternion::new(b[0], b[1], b[2], b[3]);
        Vector4::new(p.w, p.i, p.j, p.k)
    }
    fn unit(i: usize) -> Vector4<f64> {
        let mut v = Vector4::zeros();
        v[i + 1] = 1.0;
        v
    }
    fn proj(x: Vector4<f64>, v: Vector4<f64>) -> Vector4<f64> {
        v - x * x.dot(&v)
    }
    fn frame_vec(a: &Matrix3<f64>, i: usize, x: Vector4<f64>) -> Vector4<f64> {
        let xn = x / x.norm();
        let q = (0..3).map(|j| unit(j) * a[(i, j)]).sum::<Vector4<f64>>();
        qmul(xn, q)
    }
    fn h(a: usize, x: Vector4<f64>) -> Vector4<f64> {
        qmul(x / x.norm(), unit(a))
    }
    // ∇_{H_a} V at x by central differences along the great circle.
    fn cov<F: Fn(Vector4<f64>) -> Vector4<f64>>(v: &F, a: usize, x: Vector4<f64>) -> Vector4<f64> {
        let e = 1e-5;
        let d = h(a, x);
        proj(x, (v(x + d * e) - v(x - d * e)) / (2.0 * e))
    }

    fn ambient_tension(a: &Matrix3<f64>, x: Vector4<f64>) -> Matrix3<f64> {
        let mut grads = [[Vector4::zeros(); 3]; 3];
        let mut lap = [Vector4::zeros(); 3];
        for (i, (gi, li)) in grads.iter_mut().zip(lap.iter_mut()).enumerate() {
            let s = |y: Vector4<f64>| frame_vec(a, i, y);
            for (b, g) in gi.iter_mut().enumerate() {
                *g = cov(&s, b, x);
                let inner = |y: Vector4<f64>| cov(&s, b, y);
                *li += cov(&inner, b, x);
            }
        }
        let mut out = Matrix3::zeros();
        for j in 0..3 {
            let mut t = lap[j];
            for k in 0..3 {
                let g: f64 = (0..3).map(|b| grads[j][b].dot(&grads[k][b])).sum();
                t += frame_vec(a, k, x) * g;
            }
            for i in 0..3 {
                out[(i, j)] = frame_vec(a, i, x).dot(&t);
            }
        }
        out
    }

    #[test]
    fn hopf_frame_is_harmonic() {
        let t = s3_hopf_tension(&S3Homogeneous::hopf()).unwrap();
        assert!(t.abs().max() < 1e-14);
        assert!((S3Homogeneous::hopf().energy_density() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn rotated_frames_match_ambient_oracle() {
        let rots = [Rotation3::from_euler_angles(0.3, -1.1, 2.0), Rotation3::from_euler_angles(-2.5, 0.4, 0.9)];
        let x = Vector4::new(0.3, -0.5, 0.7, 0.1).normalize();
        for r in rots {
            let m = S3Homogeneous::new(*r.matrix()).unwrap();
            let t = s3_hopf_tension(&m).unwrap();
            assert!(t.abs().max() < 1e-13);
            let oracle = ambient_tension(r.matrix(), x);
            assert!(oracle.abs().max() < 1e-4, "oracle {oracle}");
        }
    }

    #[test]
    fn ambient_oracle_sees_nonzero_connection() {
        // Oracle sanity: the covariant derivative ∇_{H_0}H_1 = H_2.
        let x = Vector4::new(0.2, 0.4, -0.1, 0.9).normalize();
        let d = cov(&|y| h(1, y), 0, x);
        assert!((d - h(2, x)).norm() < 1e-8);
    }

    #[test]
    fn rejects_non_orthogonal() {
        assert!(S3Homogeneous::new(Matrix3::identity() * 1.1).is_err());
        let bad = S3Homogeneous::from_raw(Matrix3::identity() * 2.0);
        assert!(s3_hopf_tension(&bad).is_err());
    }
}
