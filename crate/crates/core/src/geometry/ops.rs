//! Differential operators, curvature and quadrature for rotationally
//! symmetric data.
//!
//! Every operator acts on fields depending on the meridian angle θ (spheres)
//! or on one periodic coordinate x (tori). With `w_j = (n-1) cot θ_j` on
//! spheres and `w_j = 0` on tori, the Laplace–Beltrami operator is
//! `Δu = s_j (u'' + w_j u')` where `s_j` is the inverse metric factor.

use super::grid::ScalarField;
use super::metric::{MetricForm, MetricState};
use crate::error::Result;

/// `Δ₀u = u'' + w u'` for the background metric (round sphere or flat torus).
fn background_laplacian(m: &MetricState, u: &[f64]) -> Vec<f64> {
    let grid = m.grid();
    let w = grid.radial_weight();
    (0..u.len())
        .map(|j| {
            let (d1, d2) = grid.derivs_at(u, j);
            d2 + w[j] * d1
        })
        .collect()
}

pub(crate) fn laplacian_values(m: &MetricState, u: &[f64]) -> Vec<f64> {
    let mut out = background_laplacian(m, u);
    for (o, s) in out.iter_mut().zip(m.inverse_scale()) {
        *o *= s;
    }
    out
}

/// Laplace–Beltrami operator of the metric `m`.
///
/// On the conformal sphere this is `e^{-2φ}` times the round-sphere
/// Laplacian, so conformal covariance holds exactly.
pub fn laplacian(m: &MetricState, u: &ScalarField) -> Result<ScalarField> {
    m.check_field(u)?;
    ScalarField::new(m.grid().clone(), laplacian_values(m, u.values()))
}

pub(crate) fn scalar_curvature_values(m: &MetricState) -> Vec<f64> {
    let n = m.dim() as f64;
    match m.form() {
        MetricForm::Conformal { phi } => {
            let lap0 = background_laplacian(m, phi);
            phi.iter()
                .zip(lap0)
                .map(|(p, l)| (-2.0 * p).exp() * (2.0 - 2.0 * l))
                .collect()
        }
        MetricForm::Scaled { c } => vec![n * (n - 1.0) / c; m.grid().len()],
        MetricForm::Flat => vec![0.0; m.grid().len()],
    }
}

/// Scalar curvature `R`; `e^{-2φ}(2 - 2Δ₀φ)` on conformal spheres.
pub fn scalar_curvature(m: &MetricState) -> ScalarField {
    ScalarField::new(m.grid().clone(), scalar_curvature_values(m))
        .expect("curvature matches grid")
}

pub(crate) fn grad_dot_values(m: &MetricState, a: &[f64], b: &[f64]) -> Vec<f64> {
    let grid = m.grid();
    let s = m.inverse_scale();
    (0..a.len())
        .map(|j| s[j] * grid.derivs_at(a, j).0 * grid.derivs_at(b, j).0)
        .collect()
}

/// `|∇u|²` with respect to `m`.
pub fn grad_norm_sq(m: &MetricState, u: &ScalarField) -> Result<ScalarField> {
    m.check_field(u)?;
    ScalarField::new(m.grid().clone(), grad_dot_values(m, u.values(), u.values()))
}

/// `∇a · ∇b`, formed from the two coordinate derivatives.
pub fn grad_dot(m: &MetricState, a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    m.check_field(a)?;
    m.check_field(b)?;
    ScalarField::new(m.grid().clone(), grad_dot_values(m, a.values(), b.values()))
}

/// Eigenvalues of the Hessian `∇∇u` relative to `g`.
///
/// For rotationally symmetric data the Hessian is diagonal in the coordinate
/// frame: one radial eigenvalue and a tangential eigenvalue of multiplicity
/// `n - 1`. Their weighted sum is exactly the discrete Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianSpectrum {
    pub radial: Vec<f64>,
    pub tangential: Vec<f64>,
    pub tangential_multiplicity: usize,
}

impl HessianSpectrum {
    /// `|∇∇u + μ g|²` at node `j`.
    pub fn shifted_norm_sq(&self, j: usize, mu: f64) -> f64 {
        let r = self.radial[j] + mu;
        let t = self.tangential[j] + mu;
        r * r + self.tangential_multiplicity as f64 * t * t
    }
}

pub(crate) fn hessian_spectrum_values(m: &MetricState, u: &[f64]) -> HessianSpectrum {
    let grid = m.grid();
    let len = u.len();
    let dim = m.dim();
    let mut radial = Vec::with_capacity(len);
    let mut tangential = Vec::with_capacity(len);
    match m.form() {
        MetricForm::Conformal { phi } => {
            let cot = grid.radial_weight();
            for j in 0..len {
                let (u1, u2) = grid.derivs_at(u, j);
                let p1 = grid.derivs_at(phi, j).0;
                let s = (-2.0 * phi[j]).exp();
                radial.push(s * (u2 - p1 * u1));
                tangential.push(s * (cot[j] + p1) * u1);
            }
        }
        MetricForm::Scaled { c } => {
            let k = (dim - 1) as f64;
            let w = grid.radial_weight();
            for j in 0..len {
                let (u1, u2) = grid.derivs_at(u, j);
                radial.push(u2 / c);
                tangential.push(w[j] / k * u1 / c);
            }
        }
        MetricForm::Flat => {
            for j in 0..len {
                radial.push(grid.derivs_at(u, j).1);
                tangential.push(0.0);
            }
        }
    }
    HessianSpectrum {
        radial,
        tangential,
        tangential_multiplicity: dim - 1,
    }
}

pub fn hessian_spectrum(m: &MetricState, u: &ScalarField) -> Result<HessianSpectrum> {
    m.check_field(u)?;
    Ok(hessian_spectrum_values(m, u.values()))
}

/// `|∇∇u|²` with respect to `m`.
pub fn hessian_norm_sq(m: &MetricState, u: &ScalarField) -> Result<ScalarField> {
    let spec = hessian_spectrum(m, u)?;
    let values = (0..u.values().len())
        .map(|j| spec.shifted_norm_sq(j, 0.0))
        .collect();
    ScalarField::new(m.grid().clone(), values)
}

/// Eigenvalue `ρ` of the Ricci tensor, `Ric = ρ g`: `R/2` on surfaces,
/// `(n-1)/c` on scaled spheres, zero on the flat torus.
pub(crate) fn ricci_eigenvalue_values(m: &MetricState) -> Vec<f64> {
    let n = m.dim() as f64;
    match m.form() {
        MetricForm::Conformal { .. } => scalar_curvature_values(m)
            .into_iter()
            .map(|r| 0.5 * r)
            .collect(),
        MetricForm::Scaled { c } => vec![(n - 1.0) / c; m.grid().len()],
        MetricForm::Flat => vec![0.0; m.grid().len()],
    }
}

pub fn ricci_eigenvalue(m: &MetricState) -> ScalarField {
    ScalarField::new(m.grid().clone(), ricci_eigenvalue_values(m)).expect("matches grid")
}

/// `|Rc|²`.
pub fn ricci_norm_sq(m: &MetricState) -> ScalarField {
    let n = m.dim() as f64;
    ricci_eigenvalue(m).map(|rho| n * rho * rho)
}

/// Riemannian volume integral of `u`.
pub fn integrate(m: &MetricState, u: &ScalarField) -> Result<f64> {
    m.check_field(u)?;
    let grid = m.grid();
    let h = grid.spacing();
    let vw = grid.volume_weight();
    let sum: f64 = match m.form() {
        MetricForm::Conformal { phi } => u
            .values()
            .iter()
            .zip(phi.iter())
            .zip(vw)
            .map(|((v, p), w)| v * (2.0 * p).exp() * w)
            .sum(),
        _ => u.values().iter().zip(vw).map(|(v, w)| v * w).sum(),
    };
    let density = match m.form() {
        MetricForm::Scaled { c } => c.powf(m.dim() as f64 / 2.0),
        _ => 1.0,
    };
    Ok(grid.transverse_measure() * density * sum * h)
}

/// Total volume.
pub fn volume(m: &MetricState) -> f64 {
    integrate(m, &ScalarField::constant(m.grid().clone(), 1.0)).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::{BackgroundKind, Grid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn round(n_pts: usize) -> (Arc<Grid>, MetricState) {
        let g = Grid::new(BackgroundKind::RotSymSphere, 2, n_pts).unwrap();
        let m = MetricState::conformal(g.clone(), vec![0.0; n_pts], 0.0).unwrap();
        (g, m)
    }

    fn conformal(n_pts: usize, phi: impl Fn(f64) -> f64) -> (Arc<Grid>, MetricState) {
        let g = Grid::new(BackgroundKind::RotSymSphere, 2, n_pts).unwrap();
        let p = g.nodes().iter().map(|&t| phi(t)).collect();
        let m = MetricState::conformal(g.clone(), p, 0.0).unwrap();
        (g, m)
    }

    fn torus(n_pts: usize, dim: usize) -> (Arc<Grid>, MetricState) {
        let g = Grid::new(BackgroundKind::FlatTorus, dim, n_pts).unwrap();
        let m = MetricState::flat(g.clone(), 0.0).unwrap();
        (g, m)
    }

    fn scaled(n_pts: usize, dim: usize, c: f64) -> (Arc<Grid>, MetricState) {
        let g = Grid::new(BackgroundKind::RoundSphere, dim, n_pts).unwrap();
        let m = MetricState::scaled(g.clone(), c, 0.0).unwrap();
        (g, m)
    }

    fn sup_err(a: &ScalarField, f: impl Fn(f64) -> f64) -> f64 {
        a.grid()
            .nodes()
            .iter()
            .zip(a.values())
            .fold(0.0, |m, (&x, &v)| m.max((v - f(x)).abs()))
    }

    #[test]
    fn cos_theta_is_a_spherical_harmonic() {
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let (g, m) = round(n);
            let u = ScalarField::from_fn(g.clone(), f64::cos);
            let lap = laplacian(&m, &u).unwrap();
            let e = sup_err(&lap, |t| -2.0 * t.cos());
            assert!(e < 2.0 * g.spacing().powi(2), "N={n}: {e}");
            errs.push(e);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9);
        }
    }

    #[test]
    fn torus_fourier_mode() {
        let (g, m) = torus(128, 2);
        let u = ScalarField::from_fn(g.clone(), f64::sin);
        let lap = laplacian(&m, &u).unwrap();
        assert!(sup_err(&lap, |x| -x.sin()) < g.spacing().powi(2));
    }

    #[test]
    fn constant_conformal_factor_scales_the_laplacian() {
        let (g, m) = conformal(64, |_| 0.3);
        let (_, m0) = round(64);
        let u = ScalarField::from_fn(g.clone(), f64::cos);
        let a = laplacian(&m, &u).unwrap();
        let b = laplacian(&m0, &u).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(*x, (-0.6f64).exp() * y);
        }
        assert!(sup_err(&a, |t| -2.0 * (-0.6f64).exp() * t.cos()) < 1e-3);
    }

    #[test]
    fn conformal_covariance_is_structural() {
        let (g, m) = conformal(64, |t| 0.2 * t.cos() + 0.05 * (2.0 * t).cos());
        let (_, m0) = round(64);
        let u = ScalarField::from_fn(g.clone(), |t| (t.cos()).exp());
        let a = laplacian(&m, &u).unwrap();
        let b = laplacian(&m0, &u).unwrap();
        let phi = m.phi().unwrap();
        for j in 0..64 {
            assert_eq!(a.values()[j], (-2.0 * phi[j]).exp() * b.values()[j]);
        }
    }

    #[test]
    fn curvature_examples() {
        let (_, m) = round(32);
        assert!(scalar_curvature(&m).values().iter().all(|&r| r == 2.0));
        let (_, s) = scaled(16, 3, 0.6);
        assert!(scalar_curvature(&s).values().iter().all(|&r| (r - 10.0).abs() < 1e-12));
        let (_, f) = torus(16, 2);
        assert!(scalar_curvature(&f).values().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn perturbed_conformal_curvature_matches_closed_form() {
        // φ = 0.1 cos θ: φ' = -0.1 sin θ, φ'' = -0.1 cos θ, Δ₀φ = -0.2 cos θ
        let closed = |t: f64| (-0.2 * t.cos()).exp() * (2.0 + 0.4 * t.cos());
        let at_third = closed(PI / 3.0);
        assert!((at_third - 1.9906).abs() < 5e-5);
        let (g, m) = conformal(256, |t| 0.1 * t.cos());
        let r = scalar_curvature(&m);
        assert!(sup_err(&r, closed) < 5.0 * g.spacing().powi(2));
    }

    #[test]
    fn gradient_examples() {
        let (g, m) = round(32);
        let c = ScalarField::constant(g, 3.0);
        assert!(grad_norm_sq(&m, &c).unwrap().max_abs() == 0.0);

        let (g, m) = torus(256, 1);
        let u = ScalarField::from_fn(g.clone(), f64::sin);
        let gn = grad_norm_sq(&m, &u).unwrap();
        assert!((gn.values()[0] - 1.0).abs() < 1e-3);

        // N even puts θ = π/2 midway; use N odd so that a node sits on it
        let (g, m) = scaled(255, 2, 4.0);
        let u = ScalarField::from_fn(g.clone(), f64::cos);
        let gn = grad_norm_sq(&m, &u).unwrap();
        let mid = 127;
        assert!((g.nodes()[mid] - PI / 2.0).abs() < 1e-12);
        assert!((gn.values()[mid] - 0.25).abs() < 1e-4);
    }

    #[test]
    fn hessian_examples() {
        let (g, m) = torus(256, 1);
        let c = ScalarField::constant(g.clone(), 2.0);
        assert_eq!(hessian_norm_sq(&m, &c).unwrap().max_abs(), 0.0);
        let u = ScalarField::from_fn(g.clone(), f64::sin);
        let hn = hessian_norm_sq(&m, &u).unwrap();
        assert!((hn.values()[64] - 1.0).abs() < 1e-3);

        let (g, m) = round(128);
        let u = ScalarField::from_fn(g.clone(), f64::cos);
        let hn = hessian_norm_sq(&m, &u).unwrap();
        assert!(sup_err(&hn, |t| 2.0 * t.cos().powi(2)) < 10.0 * g.spacing().powi(2));
    }

    #[test]
    fn hessian_trace_is_the_laplacian() {
        let (g, m) = conformal(64, |t| 0.1 * t.cos());
        let u = ScalarField::from_fn(g.clone(), |t| 1.0 + 0.3 * (2.0 * t).cos());
        let spec = hessian_spectrum(&m, &u).unwrap();
        let lap = laplacian(&m, &u).unwrap();
        for j in 0..64 {
            let tr = spec.radial[j] + spec.tangential[j];
            assert!((tr - lap.values()[j]).abs() < 1e-10 * (1.0 + tr.abs()));
        }
    }

    #[test]
    fn quadrature_examples() {
        let (g, m) = round(256);
        let one = ScalarField::constant(g.clone(), 1.0);
        assert!((integrate(&m, &one).unwrap() - 4.0 * PI).abs() < 10.0 * g.spacing().powi(2));
        let r = scalar_curvature(&m);
        assert!((integrate(&m, &r).unwrap() - 8.0 * PI).abs() < 20.0 * g.spacing().powi(2));

        let (g, m) = conformal(256, |t| 0.1 * t.cos());
        let r = scalar_curvature(&m);
        assert!((integrate(&m, &r).unwrap() - 8.0 * PI).abs() < 50.0 * g.spacing().powi(2));

        let (g, m) = scaled(256, 3, 0.25);
        let one = ScalarField::constant(g, 1.0);
        // vol(S³ of radius 1/2) = 2π² / 8
        assert!((integrate(&m, &one).unwrap() - PI * PI / 4.0).abs() < 1e-3);

        let (g, m) = torus(64, 3);
        let one = ScalarField::constant(g, 1.0);
        assert!((integrate(&m, &one).unwrap() - (2.0 * PI).powi(3)).abs() < 1e-10);
    }

    #[test]
    fn ricci_examples() {
        let (_, m) = round(16);
        assert!(ricci_norm_sq(&m).values().iter().all(|&v| v == 2.0));
        let (_, f) = torus(16, 3);
        assert!(ricci_norm_sq(&f).max_abs() == 0.0);
        let (_, s) = scaled(16, 3, 0.5);
        assert!(ricci_norm_sq(&s).values().iter().all(|&v| (v - 48.0).abs() < 1e-12));
    }

    #[test]
    fn constants_are_annihilated_everywhere() {
        let cases = [round(32).1, conformal(32, |t| 0.2 * t.cos()).1, torus(32, 2).1, scaled(32, 4, 0.7).1];
        for m in cases {
            let c = ScalarField::constant(m.grid().clone(), -1.7);
            assert_eq!(laplacian(&m, &c).unwrap().max_abs(), 0.0);
            assert_eq!(grad_norm_sq(&m, &c).unwrap().max_abs(), 0.0);
            assert_eq!(hessian_norm_sq(&m, &c).unwrap().max_abs(), 0.0);
        }
    }

    fn bochner_defect(n_pts: usize) -> f64 {
        let (g, m) = conformal(n_pts, |t| 0.15 * t.cos());
        let u = ScalarField::from_fn(g.clone(), |t| 0.5 * t.cos() + 0.2 * (2.0 * t).cos());
        let gn = grad_norm_sq(&m, &u).unwrap();
        let lhs = laplacian(&m, &gn).unwrap();
        let hn = hessian_norm_sq(&m, &u).unwrap();
        let lap = laplacian(&m, &u).unwrap();
        let cross = grad_dot(&m, &lap, &u).unwrap();
        let r = scalar_curvature(&m);
        (0..n_pts)
            .map(|j| {
                let v = lhs.values()[j]
                    - 2.0 * hn.values()[j]
                    - 2.0 * cross.values()[j]
                    - r.values()[j] * gn.values()[j];
                v.abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn surface_bochner_identity_converges() {
        let e: Vec<f64> = [64, 128, 256].iter().map(|&n| bochner_defect(n)).collect();
        for w in e.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.0, "{e:?}");
        }
    }

    #[test]
    fn elementary_trace_inequality_holds_pointwise() {
        let (g, m) = conformal(128, |t| 0.1 * t.cos());
        let u = ScalarField::from_fn(g.clone(), |t| 1.2 + 0.2 * t.cos() + 0.1 * (3.0 * t).cos());
        let r = scalar_curvature(&m);
        let lap = laplacian(&m, &u).unwrap();
        let hn = hessian_norm_sq(&m, &u).unwrap();
        for eps in [0.0, 0.25, 0.5, 1.0] {
            for j in 0..128 {
                let (rr, l) = (r.values()[j], lap.values()[j]);
                let lhs = hn.values()[j] - eps * rr * l + 0.5 * eps * eps * rr * rr;
                let rhs = 0.5 * (l - eps * rr).powi(2);
                assert!(lhs >= rhs - 1e-10 * (1.0 + rhs.abs()));
            }
        }
    }
}
