//! Scalar fields sampled at the nodes of a regular axis-aligned grid.
//!
//! Values are stored row-major: the last axis varies fastest. Integration is
//! the per-axis trapezoidal rule, so boundary nodes carry half a cell of
//! weight along each axis they sit on.

mod io;
mod shape;

pub use io::{read_field, write_field, write_pgm};
pub use shape::{init_shape, InitShape};

use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    bounds: Vec<(f64, f64)>,
    cells: Vec<usize>,
    strides: Vec<usize>,
}

impl GridSpec {
    /// `cells[a]` is the number of cells along axis `a`; there are
    /// `cells[a] + 1` nodes on that axis.
    pub fn new(bounds: Vec<(f64, f64)>, cells: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        if bounds.len() != cells.len() {
            return Err(Error::InvalidGrid(format!(
                "{} bounds for {} resolutions",
                bounds.len(),
                cells.len()
            )));
        }
        for (a, (&(lo, hi), &n)) in bounds.iter().zip(&cells).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: bounds ({lo}, {hi}) are not an increasing finite pair"
                )));
            }
            if n == 0 {
                return Err(Error::InvalidGrid(format!("axis {a}: zero cells")));
            }
            let h = (hi - lo) / n as f64;
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidGrid(format!("axis {a}: spacing {h}")));
            }
        }
        let mut strides = vec![1; cells.len()];
        for a in (0..cells.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * (cells[a + 1] + 1);
        }
        Ok(GridSpec {
            bounds,
            cells,
            strides,
        })
    }

    /// Bounding box of `points` (flat, row-major with `dim` coordinates each)
    /// widened by `margin` of the extent on every side.
    pub fn around_points(
        points: &[f64],
        dim: usize,
        cells: Vec<usize>,
        margin: f64,
    ) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidGrid("no points to bound".into()));
        }
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for p in points.chunks_exact(dim) {
            for (b, &x) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        for b in &mut bounds {
            let mut extent = b.1 - b.0;
            if extent <= 0.0 {
                // constant feature: give it a unit-wide box
                extent = 1.0;
                b.0 -= 0.5;
                b.1 += 0.5;
            }
            b.0 -= margin * extent;
            b.1 += margin * extent;
        }
        GridSpec::new(bounds, cells)
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn nodes(&self, axis: usize) -> usize {
        self.cells[axis] + 1
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().map(|n| n + 1).product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / self.cells[axis] as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        if i == self.cells[axis] {
            hi
        } else {
            lo + i as f64 * self.spacing(axis)
        }
    }

    /// Per-axis index of the node at flat `index`.
    pub fn axis_index(&self, index: usize, axis: usize) -> usize {
        (index / self.strides[axis]) % (self.cells[axis] + 1)
    }

    pub fn multi_index(&self, index: usize, out: &mut [usize]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.axis_index(index, a);
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn node_point(&self, index: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.coord(a, self.axis_index(index, a)))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Trapezoidal quadrature weight of every node.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let axis_w: Vec<Vec<f64>> = (0..self.dim())
            .map(|a| {
                let h = self.spacing(a);
                let n = self.nodes(a);
                (0..n)
                    .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                    .collect()
            })
            .collect();
        (0..self.node_count())
            .map(|k| {
                axis_w
                    .iter()
                    .enumerate()
                    .map(|(a, w)| w[self.axis_index(k, a)])
                    .product()
            })
            .collect()
    }

    /// Offsets a node by `step` along `axis`, or `None` if that leaves the grid.
    fn neighbor(&self, index: usize, axis: usize, step: isize) -> Option<usize> {
        let i = self.axis_index(index, axis) as isize + step;
        if i < 0 || i > self.cells[axis] as isize {
            None
        } else {
            Some((index as isize + step * self.strides[axis] as isize) as usize)
        }
    }
}

/// How [`ScalarField::interpolate`] treats queries outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutOfBounds {
    #[default]
    Clamp,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: f64,
    /// The query was outside the grid and was moved onto its boundary.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {i}")));
        }
        Ok(ScalarField { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        ScalarField { grid, values }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let n = grid.node_count();
        ScalarField {
            grid,
            values: vec![value; n],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| f(&grid.node_point(k)))
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when the field has at least one strictly positive and one
    /// strictly negative node.
    pub fn has_sign_change(&self) -> bool {
        self.values.iter().any(|&v| v > 0.0) && self.values.iter().any(|&v| v < 0.0)
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn integrate(&self) -> f64 {
        integrate_values(&self.grid, &self.values, Execution::default())
    }

    pub fn interpolate(&self, x: &[f64], oob: OutOfBounds) -> Result<Interpolated> {
        let grid = &self.grid;
        if x.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                got: x.len(),
            });
        }
        let clamped = !grid.contains(x);
        if clamped && oob == OutOfBounds::Reject {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        let d = grid.dim();
        let mut base = 0usize;
        let mut frac = vec![0.0; d];
        for a in 0..d {
            let (lo, _) = grid.bounds[a];
            let n = grid.cells[a];
            let t = ((x[a] - lo) / grid.spacing(a)).clamp(0.0, n as f64);
            let i0 = (t.floor() as usize).min(n - 1);
            frac[a] = t - i0 as f64;
            base += i0 * grid.strides[a];
        }
        let mut value = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = base;
            for a in 0..d {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    idx += grid.strides[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                value += w * self.values[idx];
            }
        }
        Ok(Interpolated { value, clamped })
    }

    /// Sum of central second differences. Boundary ghosts are linearly
    /// extrapolated, so the normal-direction term vanishes on the boundary
    /// and affine fields map to zero everywhere.
    pub fn laplacian(&self) -> Result<ScalarField> {
        self.require_nodes(3)?;
        let mut out = vec![0.0; self.values.len()];
        laplacian_into(&self.grid, &self.values, &mut out, Execution::default());
        Ok(ScalarField::from_parts_unchecked(self.grid.clone(), out))
    }

    /// |∇f| with central differences inside and one-sided differences on the
    /// boundary.
    pub fn gradient_magnitude(&self) -> Result<ScalarField> {
        self.require_nodes(3)?;
        let grid = &self.grid;
        let v = &self.values;
        let out = Execution::default().map(v.len(), |k| {
            let mut sq = 0.0;
            for a in 0..grid.dim() {
                let h = grid.spacing(a);
                let g = match (grid.neighbor(k, a, -1), grid.neighbor(k, a, 1)) {
                    (Some(l), Some(r)) => (v[r] - v[l]) / (2.0 * h),
                    (None, Some(r)) => (v[r] - v[k]) / h,
                    (Some(l), None) => (v[k] - v[l]) / h,
                    (None, None) => 0.0,
                };
                sq += g * g;
            }
            sq.sqrt()
        });
        Ok(ScalarField::from_parts_unchecked(grid.clone(), out))
    }

    fn require_nodes(&self, n: usize) -> Result<()> {
        match (0..self.grid.dim()).find(|&a| self.grid.nodes(a) < n) {
            Some(a) => Err(Error::InvalidGrid(format!(
                "axis {a} has {} nodes, need at least {n}",
                self.grid.nodes(a)
            ))),
            None => Ok(()),
        }
    }
}

pub(crate) fn integrate_values(grid: &GridSpec, values: &[f64], exec: Execution) -> f64 {
    let w = grid.quadrature_weights();
    exec.sum(values.len(), |k| w[k] * values[k])
}

pub(crate) fn laplacian_into(grid: &GridSpec, v: &[f64], out: &mut [f64], exec: Execution) {
    let d = grid.dim();
    let last = d - 1;
    let row = grid.nodes(last);
    let inv_h2: Vec<f64> = (0..d)
        .map(|a| 1.0 / (grid.spacing(a) * grid.spacing(a)))
        .collect();
    // boundary nodes get no contribution along the normal axis
    exec.for_each_chunk(out, row, |r, dst| {
        let k0 = r * row;
        dst.fill(0.0);
        for a in 0..last {
            let (stride, nodes) = (grid.stride(a), grid.nodes(a));
            let i = (k0 / stride) % nodes;
            if i == 0 || i + 1 == nodes {
                continue;
            }
            for (j, o) in dst.iter_mut().enumerate() {
                let k = k0 + j;
                *o += (v[k + stride] - 2.0 * v[k] + v[k - stride]) * inv_h2[a];
            }
        }
        let line = &v[k0..k0 + row];
        for j in 1..row - 1 {
            dst[j] += (line[j + 1] - 2.0 * line[j] + line[j - 1]) * inv_h2[last];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_grid(dim: usize, cells: usize) -> GridSpec {
        GridSpec::new(vec![(0.0, 1.0); dim], vec![cells; dim]).unwrap()
    }

    #[test]
    fn grid_rejects_bad_bounds() {
        assert!(GridSpec::new(vec![(1.0, 1.0)], vec![4]).is_err());
        assert!(GridSpec::new(vec![(0.0, f64::INFINITY)], vec![4]).is_err());
        assert!(GridSpec::new(vec![(0.0, 1.0)], vec![0]).is_err());
        assert!(GridSpec::new(vec![(0.0, 1.0)], vec![4, 4]).is_err());
    }

    #[test]
    fn integrate_constant_and_zero() {
        let g = unit_grid(2, 32);
        assert_eq!(ScalarField::constant(g.clone(), 1.0).integrate(), 1.0);
        assert_eq!(ScalarField::constant(g, 0.0).integrate(), 0.0);
    }

    #[test]
    fn integrate_gaussian_against_erf() {
        let g = GridSpec::new(vec![(-6.0, 6.0)], vec![1200]).unwrap();
        let f = ScalarField::from_fn(g, |x| {
            (-0.5 * x[0] * x[0]).exp() / (2.0 * std::f64::consts::PI).sqrt()
        });
        let exact = statrs::function::erf::erf(6.0 / 2f64.sqrt());
        assert_abs_diff_eq!(f.integrate(), exact, epsilon = 1e-6);
        assert_abs_diff_eq!(f.integrate(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn interpolation_examples() {
        let g = unit_grid(1, 1);
        let f = ScalarField::new(g, vec![0.0, 1.0]).unwrap();
        let v = f.interpolate(&[0.25], OutOfBounds::Reject).unwrap();
        assert_abs_diff_eq!(v.value, 0.25, epsilon = 1e-15);
        assert!(!v.clamped);

        // corners (0,0),(0,1),(1,0),(1,1) -> 0,0,0,1; bilinear form x*y
        let g = unit_grid(2, 1);
        let f = ScalarField::new(g, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let v = f.interpolate(&[0.5, 0.5], OutOfBounds::Reject).unwrap();
        assert_abs_diff_eq!(v.value, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let g = GridSpec::new(vec![(-1.0, 2.0), (0.0, 5.0)], vec![6, 9]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (x[0] * 3.1).sin() + x[1] * x[1]);
        for k in 0..g.node_count() {
            let p = g.node_point(k);
            let v = f.interpolate(&p, OutOfBounds::Reject).unwrap();
            assert_eq!(v.value, f.values()[k]);
        }
    }

    #[test]
    fn out_of_bounds_clamps_or_rejects() {
        let g = unit_grid(1, 4);
        let f = ScalarField::from_fn(g, |x| x[0]);
        let v = f.interpolate(&[1.5], OutOfBounds::Clamp).unwrap();
        assert!(v.clamped);
        assert_eq!(v.value, 1.0);
        assert!(matches!(
            f.interpolate(&[-0.1], OutOfBounds::Reject),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn laplacian_examples() {
        let g = GridSpec::new(vec![(-2.0, 3.0), (0.0, 1.0)], vec![10, 7]).unwrap();
        let affine = ScalarField::from_fn(g.clone(), |x| 0.7 + 2.0 * x[0] - 3.0 * x[1]);
        for &v in affine.laplacian().unwrap().values() {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-9);
        }
        for &v in ScalarField::constant(g, 4.0).laplacian().unwrap().values() {
            assert_eq!(v, 0.0);
        }

        let g = GridSpec::new(vec![(0.0, 2.0)], vec![16]).unwrap();
        let quad = ScalarField::from_fn(g, |x| x[0] * x[0]);
        let lap = quad.laplacian().unwrap();
        for &v in &lap.values()[1..16] {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn gradient_examples() {
        let g = GridSpec::new(vec![(0.0, 3.0)], vec![12]).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0]);
        for &v in f.gradient_magnitude().unwrap().values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        for &v in ScalarField::constant(g, 2.0)
            .gradient_magnitude()
            .unwrap()
            .values()
        {
            assert_eq!(v, 0.0);
        }

        let g = GridSpec::new(vec![(-2.0, 2.0); 2], vec![64; 2]).unwrap();
        let r = ScalarField::from_fn(g.clone(), |x| x[0].hypot(x[1]));
        let gm = r.gradient_magnitude().unwrap();
        for k in 0..g.node_count() {
            let p = g.node_point(k);
            if p[0].hypot(p[1]) > 0.5 {
                assert_abs_diff_eq!(gm.values()[k], 1.0, epsilon = 0.05);
            }
        }
    }

    #[test]
    fn too_few_nodes_for_stencils() {
        let f = ScalarField::constant(unit_grid(1, 1), 0.0);
        assert!(f.laplacian().is_err());
        assert!(f.gradient_magnitude().is_err());
    }

    proptest! {
        #[test]
        fn integrate_is_linear(a in -5.0..5.0f64, b in -5.0..5.0f64, seed in 0u32..1000) {
            let g = GridSpec::new(vec![(-1.0, 1.5), (0.0, 2.0)], vec![9, 13]).unwrap();
            let s = seed as f64;
            let f = ScalarField::from_fn(g.clone(), |x| (x[0] * s).cos() + x[1]);
            let h = ScalarField::from_fn(g.clone(), |x| (x[1] * 0.3 * s).sin() * x[0]);
            let combo = ScalarField::new(
                g,
                f.values().iter().zip(h.values()).map(|(p, q)| a * p + b * q).collect(),
            ).unwrap();
            let lhs = combo.integrate();
            let rhs = a * f.integrate() + b * h.integrate();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn interpolation_bounded_by_cell_corners(
            x in 0.0..1.0f64, y in 0.0..1.0f64, vals in proptest::collection::vec(-3.0..3.0f64, 25)
        ) {
            let g = unit_grid(2, 4);
            let f = ScalarField::new(g, vals).unwrap();
            let v = f.interpolate(&[x, y], OutOfBounds::Reject).unwrap().value;
            let (i, j) = (((x * 4.0) as usize).min(3), ((y * 4.0) as usize).min(3));
            let corners = [
                f.values()[i * 5 + j], f.values()[i * 5 + j + 1],
                f.values()[(i + 1) * 5 + j], f.values()[(i + 1) * 5 + j + 1],
            ];
            let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }

        #[test]
        fn laplacian_annihilates_affine(c in -3.0..3.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64) {
            let g = GridSpec::new(vec![(-1.0, 1.0), (2.0, 3.0)], vec![7, 5]).unwrap();
            let f = ScalarField::from_fn(g, |x| c + bx * x[0] + by * x[1]);
            for &v in f.laplacian().unwrap().values() {
                prop_assert!(v.abs() < 1e-9);
            }
        }
    }
}
