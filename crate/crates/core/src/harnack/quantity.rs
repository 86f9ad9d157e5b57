use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowKind, FlowTrajectory};
use crate::geometry::{grad_dot_values, laplacian_values, scalar_curvature_values, ScalarField};
use crate::heat::{Direction, HeatTrajectory};

/// The monitored Harnack expressions.
///
/// With `u = -ln f`:
///
/// | kind            | quantity                                   | bound   | clock |
/// |-----------------|--------------------------------------------|---------|-------|
/// | `Heps`          | `Δu - εR`                                  | `1/t`   | t > 0 |
/// | `H2R`           | `2Δu - |∇u|² + 2R - 2n/τ`                  | `n/2`   | τ > 0 |
/// | `H2RTypeOne`    | `2Δu - |∇u|² + 2R - dn/τ`                  | `n/2`   | τ > 0 |
/// | `HR`            | `2Δu - |∇u|² + R - 2n/τ`                   | `n/4`   | τ > 0 |
/// | `HRTypeOne`     | `2Δu - |∇u|² + R - dn/τ`                   | `n/4`   | τ > 0 |
/// | `PShifted`      | `2Δv - |∇v|² + R - 3n/τ`, `v = u - (n/2)ln(4πτ)` | `n/4` | t ∈ [T/2, T) |
/// | `GradForward`   | `|∇u|² - u/t`                              | `0`     | t > 0 |
/// | `GradBackward`  | `|∇u|² - u/τ`                              | `0`     | τ > 0 |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuantityKind {
    Heps { epsilon: f64 },
    #[serde(rename = "h2r")]
    H2R,
    #[serde(rename = "h2r-type-one")]
    H2RTypeOne { d: f64 },
    #[serde(rename = "hr")]
    HR,
    #[serde(rename = "hr-type-one")]
    HRTypeOne { d: f64 },
    PShifted,
    GradForward,
    GradBackward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnackQuantity {
    pub kind: QuantityKind,
    pub n: usize,
}

impl HarnackQuantity {
    pub fn new(kind: QuantityKind, n: usize) -> Self {
        Self { kind, n }
    }

    pub fn name(&self) -> String {
        match self.kind {
            QuantityKind::Heps { epsilon } => format!("heps_{epsilon}"),
            QuantityKind::H2R => "h2r".into(),
            QuantityKind::H2RTypeOne { d } => format!("h2r_type_one_d{d}"),
            QuantityKind::HR => "hr".into(),
            QuantityKind::HRTypeOne { d } => format!("hr_type_one_d{d}"),
            QuantityKind::PShifted => "p_shifted".into(),
            QuantityKind::GradForward => "grad_forward".into(),
            QuantityKind::GradBackward => "grad_backward".into(),
        }
    }

    /// Clock the quantity is evaluated on.
    pub fn direction(&self) -> Direction {
        match self.kind {
            QuantityKind::Heps { .. } | QuantityKind::GradForward => Direction::ForwardInT,
            _ => Direction::ForwardInTau,
        }
    }

    /// `(q, a)` of the heat equation the quantity is built for.
    pub fn equation(&self) -> (f64, f64) {
        match self.kind {
            QuantityKind::Heps { epsilon } => (epsilon, 1.0),
            QuantityKind::H2R | QuantityKind::H2RTypeOne { .. } => (2.0, 1.0),
            QuantityKind::HR | QuantityKind::HRTypeOne { .. } | QuantityKind::PShifted => (1.0, 1.0),
            QuantityKind::GradForward | QuantityKind::GradBackward => (0.0, 1.0),
        }
    }

    pub fn bound(&self, clock: f64) -> f64 {
        let n = self.n as f64;
        match self.kind {
            QuantityKind::Heps { .. } => 1.0 / clock,
            QuantityKind::H2R | QuantityKind::H2RTypeOne { .. } => n / 2.0,
            QuantityKind::HR | QuantityKind::HRTypeOne { .. } | QuantityKind::PShifted => n / 4.0,
            QuantityKind::GradForward | QuantityKind::GradBackward => 0.0,
        }
    }

    /// Validity window `(lo, hi]` on the quantity's clock for a flow ending at `t_end`.
    pub fn validity_window(&self, t_end: f64) -> (f64, f64) {
        match self.kind {
            QuantityKind::PShifted => (0.0, 0.5 * t_end),
            _ => (0.0, t_end),
        }
    }

    /// Purely time-dependent part of the quantity, e.g. `-2n/τ`.
    pub(crate) fn explicit_term(&self, clock: f64) -> f64 {
        let n = self.n as f64;
        match self.kind {
            QuantityKind::H2R | QuantityKind::HR => -2.0 * n / clock,
            QuantityKind::H2RTypeOne { d } | QuantityKind::HRTypeOne { d } => -d * n / clock,
            QuantityKind::PShifted => -3.0 * n / clock,
            _ => 0.0,
        }
    }

    /// Clock derivative of [`Self::explicit_term`].
    pub(crate) fn explicit_rate(&self, clock: f64) -> f64 {
        -self.explicit_term(clock) / clock
    }

    /// Curvature coefficient multiplying R in the quantity.
    fn curvature_coefficient(&self) -> f64 {
        match self.kind {
            QuantityKind::Heps { epsilon } => -epsilon,
            QuantityKind::H2R | QuantityKind::H2RTypeOne { .. } => 2.0,
            QuantityKind::HR | QuantityKind::HRTypeOne { .. } | QuantityKind::PShifted => 1.0,
            QuantityKind::GradForward | QuantityKind::GradBackward => 0.0,
        }
    }

    /// Checks that `heat` solves the equation this quantity belongs to.
    pub fn check_compatible(&self, flow: &FlowTrajectory, heat: &HeatTrajectory) -> Result<()> {
        if heat.direction() != self.direction() {
            return Err(Error::Domain(format!(
                "{} is evaluated on a {:?} solution, got {:?}",
                self.name(),
                self.direction(),
                heat.direction()
            )));
        }
        let (q, a) = self.equation();
        if heat.potential() != q || heat.decay() != a {
            return Err(Error::Domain(format!(
                "{} needs the heat equation with q = {q}, a = {a}; got q = {}, a = {}",
                self.name(),
                heat.potential(),
                heat.decay()
            )));
        }
        if let QuantityKind::Heps { epsilon } = self.kind {
            let matches = match flow.kind() {
                FlowKind::EpsilonSurface { epsilon: e } => e == epsilon,
                FlowKind::ShrinkingSphere { n } => n == 2 && epsilon == 1.0,
                FlowKind::StaticFlat => false,
            };
            if !matches {
                return Err(Error::Domain(format!(
                    "Heps with ε = {epsilon} needs the ε-flow with the same ε, got {:?}",
                    flow.kind()
                )));
            }
        }
        if heat.num_steps() != flow.num_steps() || heat.dt() != flow.dt() {
            return Err(Error::Domain("heat and flow use different schedules".into()));
        }
        Ok(())
    }

    /// Field part of the quantity at heat index `k` (everything except
    /// [`Self::explicit_term`]).
    pub(crate) fn field_part(&self, flow: &FlowTrajectory, heat: &HeatTrajectory, k: usize) -> Vec<f64> {
        let m = heat.metric(flow, k);
        let clock = heat.clock(k);
        let n = self.n as f64;
        let u = heat.u(k);
        match self.kind {
            QuantityKind::Heps { .. }
            | QuantityKind::H2R
            | QuantityKind::H2RTypeOne { .. }
            | QuantityKind::HR
            | QuantityKind::HRTypeOne { .. }
            | QuantityKind::PShifted => {
                let w: Vec<f64> = if self.kind == QuantityKind::PShifted {
                    let shift = 0.5 * n * (4.0 * PI * clock).ln();
                    u.iter().map(|x| x - shift).collect()
                } else {
                    u.to_vec()
                };
                let lap = laplacian_values(m, &w);
                let r = scalar_curvature_values(m);
                let cr = self.curvature_coefficient();
                if let QuantityKind::Heps { .. } = self.kind {
                    return lap.iter().zip(&r).map(|(l, r)| l + cr * r).collect();
                }
                let g2 = grad_dot_values(m, &w, &w);
                (0..w.len())
                    .map(|j| 2.0 * lap[j] - g2[j] + cr * r[j])
                    .collect()
            }
            QuantityKind::GradForward | QuantityKind::GradBackward => {
                let g2 = grad_dot_values(m, u, u);
                g2.iter().zip(u).map(|(g, u)| g - u / clock).collect()
            }
        }
    }

    /// Pointwise quantity at heat index `k`.
    pub fn evaluate(&self, flow: &FlowTrajectory, heat: &HeatTrajectory, k: usize) -> Result<ScalarField> {
        self.check_compatible(flow, heat)?;
        let clock = heat.clock(k);
        let (lo, hi) = self.validity_window(flow.t_end());
        if !(clock > lo && clock <= hi + 1e-12 * hi.max(1.0)) {
            return Err(Error::Domain(format!(
                "{} is only defined for clock values in ({lo}, {hi}], got {clock}",
                self.name()
            )));
        }
        let explicit = self.explicit_term(clock);
        let values = self
            .field_part(flow, heat, k)
            .into_iter()
            .map(|v| v + explicit)
            .collect();
        ScalarField::new(flow.grid().clone(), values)
    }
}

/// Both sides of the Li–Yau form of `H2R ≤ n/2` at heat index `k`.
///
/// The first field is assembled from `f = e^{-u}` as
/// `|∇f|²/f² - 2(f_τ/f + ln f + R) - (2n/τ + n/2)` with `f_τ` taken from
/// the analytic u-equation; the second is `H2R - n/2`.
pub fn li_yau_form(
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
    n: usize,
    k: usize,
) -> Result<(ScalarField, ScalarField)> {
    let q = HarnackQuantity::new(QuantityKind::H2R, n);
    let h = q.evaluate(flow, heat, k)?;
    let m = heat.metric(flow, k);
    let grid = flow.grid();
    let tau = heat.clock(k);
    let nf = n as f64;
    let f: Vec<f64> = heat.u(k).iter().map(|u| (-u).exp()).collect();
    let u = heat.u(k);
    let rate = heat.rate(flow, k);
    let s = m.inverse_scale();
    let r = scalar_curvature_values(m);
    let lhs: Vec<f64> = (0..f.len())
        .map(|j| {
            let du = grid.derivs_at(u, j).0;
            let df = -f[j] * du;
            let f_tau = -f[j] * rate[j];
            s[j] * df * df / (f[j] * f[j]) - 2.0 * (f_tau / f[j] + f[j].ln() + r[j])
                - (2.0 * nf / tau + nf / 2.0)
        })
        .collect();
    Ok((
        ScalarField::new(grid.clone(), lhs)?,
        h.map(|v| v - nf / 2.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{build_trajectory, FlowConfig};
    use crate::geometry::{BackgroundKind, Grid};
    use crate::heat::{solve, HeatProblem};
    use proptest::prelude::*;

    fn backward(
        kind: BackgroundKind,
        flow_kind: FlowKind,
        n: usize,
        f0: impl Fn(f64) -> f64,
    ) -> (FlowTrajectory, HeatTrajectory) {
        let g = Grid::new(kind, n, 48).unwrap();
        let mut config = FlowConfig::new(flow_kind, g.clone());
        if flow_kind == FlowKind::StaticFlat {
            config = config.with_t_end(0.5);
        }
        let flow = build_trajectory(&config).unwrap();
        let data = ScalarField::from_fn(g, f0);
        let heat = solve(&HeatProblem::new(Direction::ForwardInTau, 2.0, 1.0, data), &flow).unwrap();
        (flow, heat)
    }

    fn assert_li_yau_matches(flow: &FlowTrajectory, heat: &HeatTrajectory, n: usize) {
        for k in [1, heat.num_steps() / 3, heat.num_steps()] {
            let (a, b) = li_yau_form(flow, heat, n, k).unwrap();
            let scale = b.max_abs().max(1.0);
            let diff = a.zip_with(&b, |x, y| x - y).unwrap().max_abs();
            assert!(diff <= 1e-10 * scale, "k = {k}: diff {diff:e}");
        }
    }

    #[test]
    fn li_yau_form_equals_shifted_h2r() {
        let (flow, heat) = backward(BackgroundKind::RoundSphere, FlowKind::ShrinkingSphere { n: 3 }, 3, |x| {
            (-(1.0 + 0.3 * x.cos())).exp()
        });
        assert_li_yau_matches(&flow, &heat, 3);
        let (flow, heat) = backward(BackgroundKind::FlatTorus, FlowKind::StaticFlat, 2, |x| {
            (-(1.0 + 0.2 * (2.0 * x).sin())).exp()
        });
        assert_li_yau_matches(&flow, &heat, 2);
    }

    #[test]
    fn evaluation_outside_the_window_is_a_domain_error() {
        let (flow, heat) = backward(BackgroundKind::FlatTorus, FlowKind::StaticFlat, 2, |_| 0.5);
        let q = HarnackQuantity::new(QuantityKind::H2R, 2);
        assert!(matches!(q.evaluate(&flow, &heat, 0), Err(Error::Domain(_))));
        let data = ScalarField::constant(flow.grid().clone(), 0.5);
        let heat = solve(&HeatProblem::new(Direction::ForwardInTau, 1.0, 1.0, data), &flow).unwrap();
        let p = HarnackQuantity::new(QuantityKind::PShifted, 2);
        assert!(p.evaluate(&flow, &heat, heat.num_steps()).is_err());
        assert!(p.evaluate(&flow, &heat, heat.num_steps() / 2).is_ok());
    }

    #[test]
    fn heps_needs_matching_epsilon() {
        let g = Grid::new(BackgroundKind::RotSymSphere, 2, 32).unwrap();
        let flow = build_trajectory(
            &FlowConfig::new(FlowKind::EpsilonSurface { epsilon: 0.5 }, g.clone()).with_t_end(0.05),
        )
        .unwrap();
        let data = ScalarField::constant(g, 0.5);
        let heat = solve(&HeatProblem::new(Direction::ForwardInT, 0.5, 1.0, data), &flow).unwrap();
        let ok = HarnackQuantity::new(QuantityKind::Heps { epsilon: 0.5 }, 2);
        assert!(ok.check_compatible(&flow, &heat).is_ok());
        let wrong = HarnackQuantity::new(QuantityKind::Heps { epsilon: 1.0 }, 2);
        assert!(wrong.check_compatible(&flow, &heat).is_err());
    }

    #[test]
    fn serialized_kinds_are_tagged() {
        let json = serde_json::to_string(&QuantityKind::H2RTypeOne { d: 3.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"h2r-type-one","d":3.0}"#);
        assert_eq!(serde_json::to_string(&QuantityKind::HR).unwrap(), r#"{"kind":"hr"}"#);
    }

    proptest! {
        #[test]
        fn bounds_and_windows_follow_the_kind(n in 1usize..6, t_end in 0.1f64..10.0) {
            let nf = n as f64;
            let h2r = HarnackQuantity::new(QuantityKind::H2R, n);
            let hr = HarnackQuantity::new(QuantityKind::HR, n);
            let p = HarnackQuantity::new(QuantityKind::PShifted, n);
            prop_assert_eq!(h2r.bound(1.0), nf / 2.0);
            prop_assert_eq!(hr.bound(1.0), nf / 4.0);
            prop_assert_eq!(p.validity_window(t_end), (0.0, t_end / 2.0));
            prop_assert_eq!(h2r.validity_window(t_end), (0.0, t_end));
            let heps = HarnackQuantity::new(QuantityKind::Heps { epsilon: 0.5 }, 2);
            prop_assert!((heps.bound(t_end) * t_end - 1.0).abs() < 1e-15);
        }
    }
}
