use hsflow_core::grid::snapshot::{read_snapshot, write_snapshot, FORMAT};
use hsflow_core::grid::{divergence, laplacian, partial, s3_hopf_tension};
use hsflow_core::init::{random_smooth_field, rng};
use hsflow_core::{Error, Field, GridSpec, S3Homogeneous};
use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn sine_errors(n: usize, l: f64) -> (f64, f64) {
    let g = GridSpec::new(vec![n, 1, 5], vec![l, 1.0, 2.0]).unwrap();
    let q = TAU / l;
    let f = Field::from_fn(&g, 1, |x, o| o[0] = (q * x[0]).sin() * (1.0 + 0.0 * x[2]));
    let d = partial(&f, 0);
    let lap = laplacian(&f);
    let mut ed: f64 = 0.0;
    let mut el: f64 = 0.0;
    for p in 0..g.npoints() {
        let x = g.position(p)[0];
        ed = ed.max((d.data()[p] - q * (q * x).cos()).abs());
        el = el.max((lap.data()[p] + q * q * (q * x).sin()).abs());
    }
    (ed, el)
}

#[test]
fn derivative_and_laplacian_converge_at_second_order() {
    let (d1, l1) = sine_errors(16, 2.0);
    let (d2, l2) = sine_errors(32, 2.0);
    let (d3, l3) = sine_errors(64, 2.0);
    for r in [d1 / d2, d2 / d3, l1 / l2, l2 / l3] {
        assert!((3.6..=4.4).contains(&r), "ratio {r}");
    }
    assert!(d3 < 1e-2 && l3 < 1e-1);
}

#[test]
fn constants_are_annihilated() {
    let g = GridSpec::new(vec![5, 7, 1], vec![1.0, 2.0, 3.0]).unwrap();
    let f = Field::constant(&g, &[1.5, -2.0]);
    assert_eq!(partial(&f, 0).max_abs(), 0.0);
    assert_eq!(laplacian(&f).max_abs(), 0.0);
    // inactive axis: zero field by definition
    let h = Field::from_fn(&g, 1, |x, o| o[0] = x[0].sin());
    assert_eq!(partial(&h, 2).max_abs(), 0.0);
}

#[test]
fn divergence_of_curl_type_field_vanishes() {
    let g = GridSpec::new(vec![12, 12], vec![1.0, 1.0]).unwrap();
    let v = Field::from_fn(&g, 2, |x, o| {
        // (∂_y ψ, −∂_x ψ) for ψ = sin(2πx) sin(2πy)
        o[0] = TAU * (TAU * x[0]).sin() * (TAU * x[1]).cos();
        o[1] = -TAU * (TAU * x[0]).cos() * (TAU * x[1]).sin();
    });
    assert!(divergence(&v).unwrap().max_abs() < 1e-12);
    let bad = Field::zeros(&g, 3);
    assert!(divergence(&bad).is_err());
}

#[test]
fn grid_validation() {
    assert!(matches!(GridSpec::new(vec![4, 2], vec![1.0, 1.0]), Err(Error::InvalidGrid(_))));
    assert!(matches!(GridSpec::new(vec![4, 0], vec![1.0, 1.0]), Err(Error::InvalidGrid(_))));
    assert!(matches!(GridSpec::new(vec![4], vec![1.0, 1.0]), Err(Error::InvalidGrid(_))));
    assert!(matches!(GridSpec::new(vec![4], vec![-1.0]), Err(Error::InvalidGrid(_))));
    let g = GridSpec::new(vec![4, 1, 3], vec![2.0, 5.0, 3.0]).unwrap();
    assert_eq!(g.npoints(), 12);
    assert_eq!(g.active_axes(), vec![0, 2]);
    assert!((g.cell_volume() - 0.5 * 5.0 * 1.0).abs() < 1e-15);
    assert!((g.volume() - 30.0).abs() < 1e-12);
    for p in 0..g.npoints() {
        assert_eq!(g.index_of(&g.multi_index(p)), p);
        assert_eq!(g.shift(g.shift(p, 0, 1), 0, -1), p);
        assert_eq!(g.shift(p, 1, 1), p);
    }
    assert!(Field::from_data(&g, 2, vec![0.0; 23]).is_err());
}

#[test]
fn hopf_model_is_a_fixed_point_for_every_rotation() {
    assert!(s3_hopf_tension(&S3Homogeneous::hopf()).unwrap().abs().max() < 1e-14);
    for (a, b, c) in [(0.3, -1.2, 2.2), (1.0, 0.5, -0.7), (-2.9, 0.1, 0.4)] {
        let r = Rotation3::from_euler_angles(a, b, c).into_inner();
        let m = S3Homogeneous::new(r).unwrap();
        assert!(s3_hopf_tension(&m).unwrap().abs().max() < 1e-13);
        assert!((m.energy_density() - S3Homogeneous::hopf().energy_density()).abs() < 1e-13);
    }
    assert!(S3Homogeneous::new(Matrix3::identity() * 1.1).is_err());
}

#[test]
fn hopf_tension_is_odd_under_skew_perturbation() {
    // Raw (non-orthogonal) coefficients A = exp(sβ) + s²C probe the
    // expansion around the critical point; here A stays in SO(3).
    let beta = Vector3::new(0.3, -0.8, 0.5);
    let t = |s: f64| s3_hopf_tension(&S3Homogeneous::new(Rotation3::new(beta * s).into_inner()).unwrap()).unwrap();
    for s in [1e-2, 5e-3] {
        let odd = t(s) + t(-s);
        assert!(odd.abs().max() <= 1e-12 + (t(s).abs().max()) * s * s * 10.0);
    }
}

#[test]
fn snapshot_header_and_layout() {
    let g = GridSpec::new(vec![3, 1, 4], vec![1.0, 1.0, 2.0]).unwrap();
    let f = Field::from_fn(&g, 2, |x, o| {
        o[0] = x[0] + 10.0 * x[2];
        o[1] = -x[2];
    });
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &f, "frames", 0.25).unwrap();
    let nl = buf.iter().position(|b| *b == b'\n').unwrap();
    let header: serde_json::Value = serde_json::from_slice(&buf[..nl]).unwrap();
    assert_eq!(header["format"], FORMAT);
    assert_eq!(header["byte_order"], "little");
    assert_eq!(header["ncomp"], 2);
    assert_eq!(buf.len() - nl - 1, 8 * 24);
    // row-major over axes, last axis fastest, component innermost
    let second = f64::from_le_bytes(buf[nl + 1 + 16..nl + 1 + 24].try_into().unwrap());
    assert_eq!(second, f.at(1)[0]);
    let (h, back) = read_snapshot(&buf[..]).unwrap();
    assert_eq!(h.t, 0.25);
    assert_eq!(back, f);
    assert!(read_snapshot(&buf[..buf.len() - 3]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn summation_by_parts(seed in any::<u64>(), n in 3usize..9, m in 3usize..7) {
        let g = GridSpec::new(vec![n, m], vec![1.3, 0.7]).unwrap();
        let mut r = rng(seed);
        let f = random_smooth_field(&g, 2, 3, 1.0, &mut r);
        let h = random_smooth_field(&g, 2, 3, 1.0, &mut r);
        for axis in 0..2 {
            let lhs = partial(&f, axis).integral_dot(&h);
            let rhs = -f.integral_dot(&partial(&h, axis));
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
        // laplacian = −DᵀD
        let lhs = laplacian(&f).integral_dot(&h);
        let rhs: f64 = -(0..2).map(|a| partial(&f, a).integral_dot(&partial(&h, a))).sum::<f64>();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
    }
}
