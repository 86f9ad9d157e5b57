use std::sync::Arc;

use super::grid::{BackgroundKind, Grid, ScalarField};
use crate::error::{Error, Result};

/// Metric degrees of freedom at one instant.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricForm {
    /// `g = e^{2φ} g_round` on the unit 2-sphere.
    Conformal { phi: Arc<[f64]> },
    /// `g = c · g_round` on the unit n-sphere.
    Scaled { c: f64 },
    /// Flat torus metric.
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricState {
    time: f64,
    grid: Arc<Grid>,
    form: MetricForm,
}

impl MetricState {
    pub fn conformal(grid: Arc<Grid>, phi: Vec<f64>, time: f64) -> Result<Self> {
        if grid.kind() != BackgroundKind::RotSymSphere {
            return Err(Error::GridMismatch(
                "conformal metrics live on the rotationally symmetric sphere grid".into(),
            ));
        }
        if phi.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "conformal factor has {} values, grid has {}",
                phi.len(),
                grid.len()
            )));
        }
        Ok(Self::conformal_shared(grid, phi.into(), time))
    }

    pub(crate) fn conformal_shared(grid: Arc<Grid>, phi: Arc<[f64]>, time: f64) -> Self {
        Self {
            time,
            grid,
            form: MetricForm::Conformal { phi },
        }
    }

    pub fn scaled(grid: Arc<Grid>, c: f64, time: f64) -> Result<Self> {
        if grid.kind() != BackgroundKind::RoundSphere {
            return Err(Error::GridMismatch(
                "scaled metrics live on the round sphere grid".into(),
            ));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(Self {
            time,
            grid,
            form: MetricForm::Scaled { c },
        })
    }

    pub fn flat(grid: Arc<Grid>, time: f64) -> Result<Self> {
        if grid.kind() != BackgroundKind::FlatTorus {
            return Err(Error::GridMismatch("flat metrics live on the torus grid".into()));
        }
        Ok(Self {
            time,
            grid,
            form: MetricForm::Flat,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn form(&self) -> &MetricForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn phi(&self) -> Option<&[f64]> {
        match &self.form {
            MetricForm::Conformal { phi } => Some(phi),
            _ => None,
        }
    }

    /// Nodal inverse metric factor: `e^{-2φ}`, `1/c` or `1`.
    pub(crate) fn inverse_scale(&self) -> Vec<f64> {
        match &self.form {
            MetricForm::Conformal { phi } => phi.iter().map(|p| (-2.0 * p).exp()).collect(),
            MetricForm::Scaled { c } => vec![1.0 / c; self.grid.len()],
            MetricForm::Flat => vec![1.0; self.grid.len()],
        }
    }

    /// Smallest value of the metric factor over the grid.
    pub fn min_scale(&self) -> f64 {
        match &self.form {
            MetricForm::Conformal { phi } => phi
                .iter()
                .map(|p| (2.0 * p).exp())
                .fold(f64::INFINITY, f64::min),
            MetricForm::Scaled { c } => *c,
            MetricForm::Flat => 1.0,
        }
    }

    /// Metric factor multiplying `(dx)^2` along the data coordinate at `x`.
    pub fn coordinate_scale_at(&self, x: f64) -> f64 {
        match &self.form {
            MetricForm::Conformal { phi } => (2.0 * self.grid.interpolate(phi, x)).exp(),
            MetricForm::Scaled { c } => *c,
            MetricForm::Flat => 1.0,
        }
    }

    pub(crate) fn check_field(&self, u: &ScalarField) -> Result<()> {
        super::grid::same_grid(&self.grid, u.grid())
    }
}
