//! Periodic finite differences on flat tori with an active-axis mask.
//!
//! Points are ordered row-major over axes (last axis fastest); each point
//! carries `ncomp` contiguous components.

use crate::error::{Error, Result};

mod s3;
pub mod snapshot;

pub use s3::{s3_hopf_tension, S3Homogeneous, S3_VOLUME};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
    active: Vec<bool>,
    strides: Vec<usize>,
}

impl GridSpec {
    /// Axes with a single point are inactive: fields are constant along them.
    pub fn new(sizes: Vec<usize>, lengths: Vec<f64>) -> Result<Self> {
        if sizes.len() != lengths.len() {
            return Err(Error::InvalidGrid(format!("{} sizes but {} lengths", sizes.len(), lengths.len())));
        }
        for (i, (&s, &l)) in sizes.iter().zip(&lengths).enumerate() {
            if s == 0 || s == 2 {
                return Err(Error::InvalidGrid(format!("axis {i}: size {s} (need 1 or at least 3)")));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("axis {i}: length {l}")));
            }
        }
        let active = sizes.iter().map(|&s| s > 1).collect();
        let strides = (0..sizes.len()).map(|a| sizes[a + 1..].iter().product()).collect();
        Ok(GridSpec { sizes, lengths, active, strides })
    }

    /// Cube torus: `active` axes get `size` points, the rest one point.
    pub fn torus(n: usize, active_axes: usize, size: usize, length: f64) -> Result<Self> {
        let sizes = (0..n).map(|i| if i < active_axes { size } else { 1 }).collect();
        Self::new(sizes, vec![length; n])
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }
    pub fn is_active(&self, axis: usize) -> bool {
        self.active[axis]
    }
    pub fn active_axes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.active[i]).collect()
    }
    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }
    pub fn h(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.sizes[axis] as f64
    }
    /// Smallest spacing over active axes (infinite if none).
    pub fn h_min(&self) -> f64 {
        self.active_axes().into_iter().map(|a| self.h(a)).fold(f64::INFINITY, f64::min)
    }
    pub fn npoints(&self) -> usize {
        self.sizes.iter().product()
    }
    pub fn cell_volume(&self) -> f64 {
        (0..self.n()).map(|i| self.h(i)).product()
    }
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }
    pub fn index_of(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.sizes).fold(0, |acc, (&i, &s)| acc * s + i)
    }
    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for a in (0..self.n()).rev() {
            out[a] = p % self.sizes[a];
            p /= self.sizes[a];
        }
        out
    }
    pub fn position(&self, p: usize) -> Vec<f64> {
        self.multi_index(p).iter().enumerate().map(|(a, &i)| i as f64 * self.h(a)).collect()
    }

    /// Index of the point shifted by `k` along `axis`, with periodic wrap.
    #[inline]
    pub fn shift(&self, p: usize, axis: usize, k: isize) -> usize {
        let s = self.strides[axis];
        let n = self.sizes[axis] as isize;
        let c = ((p / s) % self.sizes[axis]) as isize;
        let c2 = (c + k).rem_euclid(n);
        (p as isize + (c2 - c) * s as isize) as usize
    }
}

/// Per-point array of `ncomp` reals on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    ncomp: usize,
    data: Vec<f64>,
}

pub type ScalarField = Field;

impl Field {
    pub fn zeros(grid: &GridSpec, ncomp: usize) -> Self {
        Field { grid: grid.clone(), ncomp, data: vec![0.0; grid.npoints() * ncomp] }
    }

    pub fn from_data(grid: &GridSpec, ncomp: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.npoints() * ncomp {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} points x {} components",
                data.len(),
                grid.npoints(),
                ncomp
            )));
        }
        Ok(Field { grid: grid.clone(), ncomp, data })
    }

    /// Builds a field from a function of the point position.
    pub fn from_fn(grid: &GridSpec, ncomp: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut out = Self::zeros(grid, ncomp);
        for p in 0..grid.npoints() {
            let x = grid.position(p);
            f(&x, &mut out.data[p * ncomp..(p + 1) * ncomp]);
        }
        out
    }

    pub fn constant(grid: &GridSpec, value: &[f64]) -> Self {
        Self::from_fn(grid, value.len(), |_, out| out.copy_from_slice(value))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn ncomp(&self) -> usize {
        self.ncomp
    }
    pub fn npoints(&self) -> usize {
        self.grid.npoints()
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
    #[inline]
    pub fn at(&self, p: usize) -> &[f64] {
        &self.data[p * self.ncomp..(p + 1) * self.ncomp]
    }
    #[inline]
    pub fn at_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.data[p * self.ncomp..(p + 1) * self.ncomp]
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.ncomp == other.ncomp && self.grid == other.grid
    }

    /// self += a · other
    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert!(self.same_shape(other));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { grid: self.grid.clone(), ncomp: self.ncomp, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Euclidean inner product of all values times the cell volume.
    pub fn integral_dot(&self, other: &Field) -> f64 {
        assert!(self.same_shape(other));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_volume()
    }

    /// Midpoint quadrature of a scalar field.
    pub fn integral(&self) -> f64 {
        assert_eq!(self.ncomp, 1);
        self.data.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    /// Component-wise map into a new field with `ncomp` components.
    pub fn map_points(&self, ncomp: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Field {
        let mut out = Field::zeros(&self.grid, ncomp);
        for p in 0..self.npoints() {
            f(self.at(p), &mut out.data[p * ncomp..(p + 1) * ncomp]);
        }
        out
    }
}

/// Central difference (f(x+h) − f(x−h))/2h along `axis`, periodic.
/// An inactive axis yields the zero field.
pub fn partial(f: &Field, axis: usize) -> Field {
    let g = f.grid();
    let mut out = Field::zeros(g, f.ncomp());
    if !g.is_active(axis) {
        return out;
    }
    let inv = 1.0 / (2.0 * g.h(axis));
    let nc = f.ncomp();
    for p in 0..g.npoints() {
        let (pp, pm) = (g.shift(p, axis, 1), g.shift(p, axis, -1));
        let (a, b) = (f.at(pp), f.at(pm));
        let o = &mut out.data[p * nc..(p + 1) * nc];
        for c in 0..nc {
            o[c] = (a[c] - b[c]) * inv;
        }
    }
    out
}

/// Σᵢ ∂ᵢ∂ᵢ over active axes, using the composed central difference
/// (f(x+2h) − 2f(x) + f(x−2h))/4h². Composing the first-order stencil
/// keeps summation by parts exact for the discrete Dirichlet energy.
/// Consequence: on even grids the two sublattices decouple.
pub fn laplacian(f: &Field) -> Field {
    let g = f.grid();
    let nc = f.ncomp();
    let mut out = Field::zeros(g, nc);
    for axis in g.active_axes() {
        let inv = 1.0 / (4.0 * g.h(axis) * g.h(axis));
        for p in 0..g.npoints() {
            let (pp, pm) = (g.shift(p, axis, 2), g.shift(p, axis, -2));
            for c in 0..nc {
                out.data[p * nc + c] += (f.data[pp * nc + c] - 2.0 * f.data[p * nc + c] + f.data[pm * nc + c]) * inv;
            }
        }
    }
    out
}

/// Σᵢ ∂ᵢ vᵢ for a field with one component per axis.
pub fn divergence(v: &Field) -> Result<Field> {
    let g = v.grid();
    if v.ncomp() != g.n() {
        return Err(Error::DimensionMismatch(format!("{} components on a {}-torus", v.ncomp(), g.n())));
    }
    let mut out = Field::zeros(g, 1);
    for axis in g.active_axes() {
        let inv = 1.0 / (2.0 * g.h(axis));
        for p in 0..g.npoints() {
            let (pp, pm) = (g.shift(p, axis, 1), g.shift(p, axis, -1));
            out.data[p] += (v.at(pp)[axis] - v.at(pm)[axis]) * inv;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn grid_basics() {
        let g = GridSpec::new(vec![4, 1, 3], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.npoints(), 12);
        assert_eq!(g.active_axes(), vec![0, 2]);
        assert!((g.cell_volume() - 0.25 * 2.0 * 1.0).abs() < 1e-15);
        for p in 0..12 {
            assert_eq!(g.index_of(&g.multi_index(p)), p);
        }
        assert_eq!(g.shift(0, 0, -1), g.index_of(&[3, 0, 0]));
        assert_eq!(g.shift(g.index_of(&[1, 0, 2]), 2, 1), g.index_of(&[1, 0, 0]));
        assert!(GridSpec::new(vec![2], vec![1.0]).is_err());
        assert!(GridSpec::new(vec![4], vec![0.0]).is_err());
    }

    #[test]
    fn inactive_axis_partial_is_zero() {
        let g = GridSpec::new(vec![8, 1], vec![TAU, TAU]).unwrap();
        let f = Field::from_fn(&g, 1, |x, o| o[0] = x[0].sin());
        assert_eq!(partial(&f, 1).max_abs(), 0.0);
    }

    #[test]
    fn laplacian_is_composed_partial() {
        let g = GridSpec::new(vec![8, 6], vec![TAU, 3.0]).unwrap();
        let f = Field::from_fn(&g, 2, |x, o| {
            o[0] = (x[0]).sin() * (x[1] * 2.0).cos();
            o[1] = x[0].cos().powi(3) + x[1].sin();
        });
        let mut comp = partial(&partial(&f, 0), 0);
        comp.axpy(1.0, &partial(&partial(&f, 1), 1));
        let l = laplacian(&f);
        for (a, b) in l.data().iter().zip(comp.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
