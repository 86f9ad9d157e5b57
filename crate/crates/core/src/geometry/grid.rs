use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed manifold family a grid discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundKind {
    /// Rotationally symmetric 2-sphere carrying a conformal factor.
    RotSymSphere,
    /// Flat n-torus with data depending on one periodic coordinate.
    FlatTorus,
    /// Round n-sphere with a spatially constant scale factor.
    RoundSphere,
}

impl BackgroundKind {
    pub fn is_sphere(self) -> bool {
        matches!(self, BackgroundKind::RotSymSphere | BackgroundKind::RoundSphere)
    }
}

/// One-dimensional spatial grid.
///
/// Spheres use a staggered meridian grid `θ_j = (j + 1/2) h`, `h = π/N`, so
/// the poles are never nodes; ghost values are even reflections. Tori use
/// the periodic grid `x_j = j h`, `h = 2π/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: BackgroundKind,
    dim: usize,
    nodes: Vec<f64>,
    spacing: f64,
    // (n - 1) cot θ_j on spheres, zero on tori
    radial_weight: Vec<f64>,
    // sin^{n-1} θ_j on spheres, one on tori
    volume_weight: Vec<f64>,
}

impl Grid {
    pub fn new(kind: BackgroundKind, dim: usize, num_points: usize) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::Domain("manifold dimension must be at least 1".into()));
        }
        if kind == BackgroundKind::RotSymSphere && dim != 2 {
            return Err(Error::Domain(format!(
                "conformal sphere backgrounds are 2-dimensional, got n = {dim}"
            )));
        }
        if kind == BackgroundKind::RoundSphere && dim < 2 {
            return Err(Error::Domain("round spheres need n >= 2".into()));
        }
        if num_points < 4 {
            return Err(Error::Domain(format!("need at least 4 grid points, got {num_points}")));
        }
        let n = num_points as f64;
        let (spacing, nodes): (f64, Vec<f64>) = if kind.is_sphere() {
            let h = PI / n;
            (h, (0..num_points).map(|j| (j as f64 + 0.5) * h).collect())
        } else {
            let h = 2.0 * PI / n;
            (h, (0..num_points).map(|j| j as f64 * h).collect())
        };
        let (radial_weight, volume_weight) = if kind.is_sphere() {
            let k = (dim - 1) as f64;
            (
                nodes.iter().map(|t| k * t.cos() / t.sin()).collect(),
                nodes.iter().map(|t| t.sin().powi(dim as i32 - 1)).collect(),
            )
        } else {
            (vec![0.0; num_points], vec![1.0; num_points])
        };
        Ok(Arc::new(Self {
            kind,
            dim,
            nodes,
            spacing,
            radial_weight,
            volume_weight,
        }))
    }

    pub fn kind(&self) -> BackgroundKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub(crate) fn radial_weight(&self) -> &[f64] {
        &self.radial_weight
    }

    pub(crate) fn volume_weight(&self) -> &[f64] {
        &self.volume_weight
    }

    /// Total measure of the coordinate directions the data does not depend on.
    pub(crate) fn transverse_measure(&self) -> f64 {
        match self.kind {
            BackgroundKind::FlatTorus => (2.0 * PI).powi(self.dim as i32 - 1),
            _ => unit_sphere_area(self.dim - 1),
        }
    }

    /// Neighbor values `(u_{j-1}, u_{j+1})` with reflection or wrap-around.
    #[inline]
    fn neighbors(&self, u: &[f64], j: usize) -> (f64, f64) {
        let n = u.len();
        if self.kind.is_sphere() {
            let left = if j == 0 { u[0] } else { u[j - 1] };
            let right = if j + 1 == n { u[n - 1] } else { u[j + 1] };
            (left, right)
        } else {
            let left = if j == 0 { u[n - 1] } else { u[j - 1] };
            let right = if j + 1 == n { u[0] } else { u[j + 1] };
            (left, right)
        }
    }

    /// Second-order central first and second coordinate derivatives at node `j`.
    #[inline]
    pub(crate) fn derivs_at(&self, u: &[f64], j: usize) -> (f64, f64) {
        let (l, r) = self.neighbors(u, j);
        let h = self.spacing;
        ((r - l) / (2.0 * h), (r - 2.0 * u[j] + l) / (h * h))
    }

    /// Linear interpolation of nodal data at coordinate `x`.
    ///
    /// Spheres extend the data by even reflection past the end nodes, tori
    /// wrap around.
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let n = u.len();
        let h = self.spacing;
        if self.kind.is_sphere() {
            let s = x / h - 0.5;
            if s <= 0.0 {
                return u[0];
            }
            if s >= (n - 1) as f64 {
                return u[n - 1];
            }
            let i = s.floor() as usize;
            let w = s - i as f64;
            (1.0 - w) * u[i] + w * u[i + 1]
        } else {
            let period = 2.0 * PI;
            let s = x.rem_euclid(period) / h;
            let i = (s.floor() as usize) % n;
            let w = s - s.floor();
            (1.0 - w) * u[i] + w * u[(i + 1) % n]
        }
    }
}

/// Area of the unit k-sphere in R^{k+1}.
pub fn unit_sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * unit_sphere_area(k - 2),
    }
}

/// Nodal values of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = j;
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if std::ptr::eq(a, b) || (a.kind == b.kind && a.dim == b.dim && a.len() == b.len()) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{:?}(n={}, N={}) vs {:?}(n={}, N={})",
            a.kind,
            a.dim,
            a.len(),
            b.kind,
            b.dim,
            b.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_nodes_are_staggered() {
        let g = Grid::new(BackgroundKind::RotSymSphere, 2, 16).unwrap();
        let h = g.spacing();
        assert!((g.nodes()[0] - h / 2.0).abs() < 1e-15);
        assert!((g.nodes()[15] - (PI - h / 2.0)).abs() < 1e-14);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.nodes().iter().all(|&t| t > 0.0 && t < PI));
    }

    #[test]
    fn torus_nodes_are_periodic() {
        let g = Grid::new(BackgroundKind::FlatTorus, 3, 32).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert!(g.nodes().iter().all(|&x| (0.0..2.0 * PI).contains(&x)));
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Grid::new(BackgroundKind::RotSymSphere, 3, 16).is_err());
        assert!(Grid::new(BackgroundKind::RoundSphere, 1, 16).is_err());
        assert!(Grid::new(BackgroundKind::FlatTorus, 0, 16).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn pole_derivative_is_exact_for_even_quadratics() {
        let g = Grid::new(BackgroundKind::RoundSphere, 2, 32).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|t| 1.0 + 3.0 * t * t).collect();
        let (d1, d2) = g.derivs_at(&u, 0);
        assert!((d1 - 6.0 * g.nodes()[0]).abs() < 1e-12);
        assert!((d2 - 6.0).abs() < 1e-9);
    }

    #[test]
    fn interpolation_hits_nodes() {
        let g = Grid::new(BackgroundKind::FlatTorus, 1, 16).unwrap();
        let f = ScalarField::from_fn(g.clone(), f64::sin);
        for (j, &x) in g.nodes().iter().enumerate() {
            assert!((g.interpolate(f.values(), x) - f.values()[j]).abs() < 1e-14);
        }
        assert!((g.interpolate(f.values(), 2.0 * PI) - f.values()[0]).abs() < 1e-14);
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = ScalarField::constant(Grid::new(BackgroundKind::FlatTorus, 1, 16).unwrap(), 1.0);
        let b = ScalarField::constant(Grid::new(BackgroundKind::FlatTorus, 1, 32).unwrap(), 1.0);
        assert!(matches!(a.zip_with(&b, |x, y| x + y), Err(Error::GridMismatch(_))));
    }
}
