//! Spatial discretization of the truncated domain.
//!
//! The whole space is replaced by the box `[-L, L]^n` (`n = 1` or `2`) with
//! homogeneous Dirichlet data; the truncation error is observable through the
//! tail-mass functionals, which is what justifies working on a box at all.
//! Only interior nodes are stored. With `N` interior points per axis the
//! spacing is `h = 2L/(N+1)` and node `i` sits at `-L + (i+1)h` along each
//! axis; the boundary rows of ghost values are identically zero.

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform tensor grid on `[-L, L]^n` with homogeneous Dirichlet boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    dimension: usize,
    radius: f64,
    points_per_axis: usize,
    spacing: f64,
}

/// Builds a grid, rejecting dimensions outside {1, 2}, non-positive radii and
/// axes with fewer than three interior points.
pub fn build_grid(dimension: usize, radius: f64, points_per_axis: usize) -> Result<Grid> {
    if dimension != 1 && dimension != 2 {
        return Err(Error::InvalidParameter(format!(
            "grid dimension must be 1 or 2, got {dimension}"
        )));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "truncation radius must be positive, got {radius}"
        )));
    }
    if points_per_axis < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 interior points per axis, got {points_per_axis}"
        )));
    }
    let spacing = 2.0 * radius / (points_per_axis as f64 + 1.0);
    Ok(Grid {
        dimension,
        radius,
        points_per_axis,
        spacing,
    })
}

impl Grid {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Truncation radius `L`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Interior points per axis.
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Mesh spacing `h = 2L/(N+1)`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of interior nodes, `N^n`.
    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    /// Quadrature weight of one node, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dimension as i32)
    }

    /// Coordinate of interior index `i` along one axis.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.radius + (i as f64 + 1.0) * self.spacing
    }

    /// Coordinates of a flat node index; the second entry is 0 in 1D.
    pub fn node_coord(&self, idx: usize) -> [f64; 2] {
        match self.dimension {
            1 => [self.axis_coord(idx), 0.0],
            _ => {
                let n = self.points_per_axis;
                [self.axis_coord(idx % n), self.axis_coord(idx / n)]
            }
        }
    }

    /// Squared Euclidean distance of a node from the origin.
    pub fn node_radius_sq(&self, idx: usize) -> f64 {
        let c = self.node_coord(idx);
        c[0] * c[0] + c[1] * c[1]
    }

    /// Discrete Dirichlet sine mode with 1-based mode numbers per axis.
    ///
    /// In 1D, mode `m` is `sin(m π (x+L) / (2L))`; in 2D the tensor product of
    /// the per-axis modes. These are exact eigenfunctions of the discrete
    /// Laplacian.
    pub fn sine_mode(&self, modes: &[usize]) -> Result<Field> {
        if modes.len() != self.dimension || modes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "expected {} positive mode numbers, got {:?}",
                self.dimension, modes
            )));
        }
        let denom = 2.0 * self.radius;
        let mut values = vec![0.0; self.node_count()];
        for (idx, v) in values.iter_mut().enumerate() {
            let c = self.node_coord(idx);
            let mut val = (modes[0] as f64 * std::f64::consts::PI * (c[0] + self.radius) / denom).sin();
            if self.dimension == 2 {
                val *= (modes[1] as f64 * std::f64::consts::PI * (c[1] + self.radius) / denom).sin();
            }
            *v = val;
        }
        Field::new(*self, values)
    }

    /// Eigenvalue of `-Δ_h` for the sine mode with the given mode numbers:
    /// the sum over axes of `(2/h²)(1 - cos(m π h / (2L)))`.
    pub fn sine_eigenvalue(&self, modes: &[usize]) -> Result<f64> {
        if modes.len() != self.dimension || modes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "expected {} positive mode numbers, got {:?}",
                self.dimension, modes
            )));
        }
        let h = self.spacing;
        Ok(modes
            .iter()
            .map(|&m| {
                let angle = m as f64 * std::f64::consts::PI * h / (2.0 * self.radius);
                2.0 / (h * h) * (1.0 - angle.cos())
            })
            .sum())
    }
}

/// Real-valued grid function over the interior nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Wraps samples, checking the node count and finiteness of every value.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "field contains non-finite samples".to_string(),
            ));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self + a * other`, requiring both fields to share the grid.
    pub fn add_scaled(&self, a: f64, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(Field {
            grid: self.grid,
            values,
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }
}

/// Second-order central-difference Laplacian with zero ghost values.
///
/// Along each axis, `(Δ_h u)_i` picks up `(u_{i-1} - 2 u_i + u_{i+1}) / h²`
/// with the out-of-range neighbors replaced by the Dirichlet zeros.
pub fn laplacian_apply(grid: &Grid, u: &Field) -> Result<Field> {
    if u.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.points_per_axis();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let vals = u.values();
    let mut out = vec![0.0; vals.len()];
    match grid.dimension() {
        1 => {
            for i in 0..n {
                let left = if i > 0 { vals[i - 1] } else { 0.0 };
                let right = if i + 1 < n { vals[i + 1] } else { 0.0 };
                out[i] = (left - 2.0 * vals[i] + right) * inv_h2;
            }
        }
        _ => {
            for j in 0..n {
                for i in 0..n {
                    let idx = j * n + i;
                    let v = vals[idx];
                    let left = if i > 0 { vals[idx - 1] } else { 0.0 };
                    let right = if i + 1 < n { vals[idx + 1] } else { 0.0 };
                    let down = if j > 0 { vals[idx - n] } else { 0.0 };
                    let up = if j + 1 < n { vals[idx + n] } else { 0.0 };
                    out[idx] = (left + right + down + up - 4.0 * v) * inv_h2;
                }
            }
        }
    }
    Ok(Field {
        grid: *grid,
        values: out,
    })
}

/// Everywhere-valid bound on the slope of [`cutoff_theta`].
pub const CUTOFF_SLOPE_BOUND: f64 = 1.5;

/// Radial cutoff used by the tail estimates: 0 on `[0, 1]`, 1 on `[2, ∞)`,
/// and the C¹ smoothstep `3σ² - 2σ³` (σ = s - 1) in between. The derivative
/// never exceeds [`CUTOFF_SLOPE_BOUND`].
pub fn cutoff_theta(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff argument must be nonnegative, got {s}"
        )));
    }
    Ok(if s <= 1.0 {
        0.0
    } else if s >= 2.0 {
        1.0
    } else {
        let sigma = s - 1.0;
        sigma * sigma * (3.0 - 2.0 * sigma)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inner(grid: &Grid, u: &Field, v: &Field) -> f64 {
        grid.cell_volume()
            * u.values()
                .iter()
                .zip(v.values())
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    #[test]
    fn build_grid_examples() {
        let g = build_grid(1, 1.0, 3).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(
            (0..3).map(|i| g.axis_coord(i)).collect::<Vec<_>>(),
            vec![-0.5, 0.0, 0.5]
        );

        let g = build_grid(1, 8.0, 255).unwrap();
        assert!((g.spacing() - 0.0625).abs() < 1e-15);

        let g = build_grid(2, 4.0, 63).unwrap();
        assert_eq!(g.node_count(), 3969);
    }

    #[test]
    fn build_grid_rejects_bad_input() {
        assert!(build_grid(3, 1.0, 8).is_err());
        assert!(build_grid(0, 1.0, 8).is_err());
        assert!(build_grid(1, 0.0, 8).is_err());
        assert!(build_grid(1, -2.0, 8).is_err());
        assert!(build_grid(1, 1.0, 2).is_err());
    }

    #[test]
    fn nodes_symmetric_about_origin() {
        for (n, l, npts) in [(1usize, 3.0, 9usize), (2, 4.0, 7)] {
            let g = build_grid(n, l, npts).unwrap();
            for i in 0..npts {
                let x = g.axis_coord(i);
                let mirror = g.axis_coord(npts - 1 - i);
                assert!((x + mirror).abs() < 1e-13);
                assert!(x > -l && x < l);
            }
        }
    }

    #[test]
    fn laplacian_zero_field() {
        let g = build_grid(2, 2.0, 5).unwrap();
        let z = Field::zeros(g);
        let lz = laplacian_apply(&g, &z).unwrap();
        assert!(lz.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_three_point_hand_value() {
        // h = 0.5, u = (0, 1, 0): ghost zeros give (4, -8, 4).
        let g = build_grid(1, 1.0, 3).unwrap();
        let u = Field::new(g, vec![0.0, 1.0, 0.0]).unwrap();
        let lu = laplacian_apply(&g, &u).unwrap();
        assert_eq!(lu.values(), &[4.0, -8.0, 4.0]);
    }

    #[test]
    fn laplacian_rejects_grid_mismatch() {
        let g = build_grid(1, 1.0, 3).unwrap();
        let other = build_grid(1, 2.0, 3).unwrap();
        let u = Field::zeros(other);
        assert!(matches!(laplacian_apply(&g, &u), Err(Error::GridMismatch)));
    }

    #[test]
    fn first_sine_mode_is_discrete_eigenfunction() {
        for (dim, modes) in [(1usize, vec![1usize]), (2, vec![1, 1]), (2, vec![2, 3])] {
            let g = build_grid(dim, 5.0, 17).unwrap();
            let e = g.sine_mode(&modes).unwrap();
            let mu = g.sine_eigenvalue(&modes).unwrap();
            let le = laplacian_apply(&g, &e).unwrap();
            for (l, v) in le.values().iter().zip(e.values()) {
                assert!((l + mu * v).abs() < 1e-11 * mu.max(1.0));
            }
        }
    }

    #[test]
    fn cutoff_endpoint_and_midpoint_values() {
        assert_eq!(cutoff_theta(0.0).unwrap(), 0.0);
        assert_eq!(cutoff_theta(1.0).unwrap(), 0.0);
        assert_eq!(cutoff_theta(2.0).unwrap(), 1.0);
        assert_eq!(cutoff_theta(5.0).unwrap(), 1.0);
        assert!((cutoff_theta(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(cutoff_theta(-0.1).is_err());
    }

    #[test]
    fn field_construction_checks() {
        let g = build_grid(1, 1.0, 3).unwrap();
        assert!(Field::new(g, vec![0.0; 4]).is_err());
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(Field::new(g, vec![1.0, 2.0, 3.0]).is_ok());
    }

    proptest! {
        #[test]
        fn cutoff_monotone_bounded_and_slope_limited(a in 0.0f64..4.0, b in 0.0f64..4.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ta = cutoff_theta(lo).unwrap();
            let tb = cutoff_theta(hi).unwrap();
            prop_assert!((0.0..=1.0).contains(&ta));
            prop_assert!((0.0..=1.0).contains(&tb));
            prop_assert!(tb >= ta);
            if hi - lo > 1e-9 {
                let slope = (tb - ta) / (hi - lo);
                prop_assert!(slope <= CUTOFF_SLOPE_BOUND + 1e-9);
            }
        }

        #[test]
        fn discrete_laplacian_is_symmetric(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dim = if seed % 2 == 0 { 1 } else { 2 };
            let g = build_grid(dim, 3.0, 9).unwrap();
            let u = Field::new(g, (0..g.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let v = Field::new(g, (0..g.node_count()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let lu = laplacian_apply(&g, &u).unwrap();
            let lv = laplacian_apply(&g, &v).unwrap();
            let lhs = inner(&g, &lu, &v);
            let rhs = inner(&g, &u, &lv);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())));
        }
    }
}
