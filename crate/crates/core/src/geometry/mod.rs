//! Discretized backgrounds and the operators acting on them.

mod grid;
mod metric;
mod ops;
mod path;

pub use grid::{unit_sphere_area, BackgroundKind, Grid, ScalarField};
pub use metric::{MetricForm, MetricState};
pub use ops::{
    grad_dot, grad_norm_sq, hessian_norm_sq, hessian_spectrum, integrate, laplacian,
    ricci_eigenvalue, ricci_norm_sq, scalar_curvature, volume, HessianSpectrum,
};
pub use path::meridian_path_energy;

pub(crate) use ops::{
    grad_dot_values, hessian_spectrum_values, laplacian_values, ricci_eigenvalue_values,
    scalar_curvature_values,
};
pub(crate) use grid::same_grid;
pub(crate) use path::simpson_weight;
