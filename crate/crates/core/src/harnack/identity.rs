use serde::{Deserialize, Serialize};

use super::quantity::{HarnackQuantity, QuantityKind};
use crate::error::{Error, Result};
use crate::flow::{FlowKind, FlowTrajectory};
use crate::geometry::{
    grad_dot_values, hessian_spectrum_values, laplacian_values, ricci_eigenvalue_values,
    scalar_curvature_values, ScalarField,
};
use crate::heat::HeatTrajectory;

/// Exact evolution equations satisfied by the Harnack quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    HepsEvolution,
    #[serde(rename = "h2r-evolution")]
    H2REvolution,
    #[serde(rename = "hr-evolution")]
    HREvolution,
    PEvolution,
    GradForwardEvolution,
    GradBackwardEvolution,
}

impl IdentityId {
    pub const ALL: [IdentityId; 6] = [
        IdentityId::HepsEvolution,
        IdentityId::H2REvolution,
        IdentityId::HREvolution,
        IdentityId::PEvolution,
        IdentityId::GradForwardEvolution,
        IdentityId::GradBackwardEvolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::HepsEvolution => "heps-evolution",
            IdentityId::H2REvolution => "h2r-evolution",
            IdentityId::HREvolution => "hr-evolution",
            IdentityId::PEvolution => "p-evolution",
            IdentityId::GradForwardEvolution => "grad-forward-evolution",
            IdentityId::GradBackwardEvolution => "grad-backward-evolution",
        }
    }

    /// Quantity whose evolution the identity describes.
    pub fn quantity(self, flow: &FlowTrajectory) -> HarnackQuantity {
        let n = flow.grid().dim();
        let kind = match self {
            IdentityId::HepsEvolution => QuantityKind::Heps {
                epsilon: match flow.kind() {
                    FlowKind::EpsilonSurface { epsilon } => epsilon,
                    _ => 1.0,
                },
            },
            IdentityId::H2REvolution => QuantityKind::H2R,
            IdentityId::HREvolution => QuantityKind::HR,
            IdentityId::PEvolution => QuantityKind::PShifted,
            IdentityId::GradForwardEvolution => QuantityKind::GradForward,
            IdentityId::GradBackwardEvolution => QuantityKind::GradBackward,
        };
        HarnackQuantity::new(kind, n)
    }

    fn check_background(self, flow: &FlowTrajectory) -> Result<()> {
        let ok = match self {
            IdentityId::HepsEvolution => matches!(flow.kind(), FlowKind::EpsilonSurface { .. }),
            _ => flow.kind().is_ricci_flow(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{} is not available on a {:?} background",
                self.name(),
                flow.kind()
            )))
        }
    }
}

/// Residual of `id` at heat index `k`: centered difference of the quantity
/// in its own clock minus the analytic right-hand side.
///
/// Needs `1 <= k < K` and a positive clock at `k - 1`.
pub fn identity_residual(
    id: IdentityId,
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
    k: usize,
) -> Result<ScalarField> {
    id.check_background(flow)?;
    let quantity = id.quantity(flow);
    quantity.check_compatible(flow, heat)?;
    if k == 0 || k >= heat.num_steps() {
        return Err(Error::Domain(format!(
            "centered difference needs 1 <= k < {}, got {k}",
            heat.num_steps()
        )));
    }
    let clock = heat.clock(k);
    // The identities hold wherever the quantity is defined, which is wider
    // than the window of the corresponding inequality.
    if heat.clock(k - 1) <= 0.0 {
        return Err(Error::Domain(format!(
            "{} needs a positive clock at both neighbours of {clock}",
            id.name()
        )));
    }
    let before = quantity.field_part(flow, heat, k - 1);
    let after = quantity.field_part(flow, heat, k + 1);
    let current = quantity.field_part(flow, heat, k);
    let rhs = right_hand_side(id, &quantity, flow, heat, k, &current);
    let inv = 0.5 / heat.dt();
    let explicit_rate = quantity.explicit_rate(clock);
    let values = (0..current.len())
        .map(|j| (after[j] - before[j]) * inv + explicit_rate - rhs[j])
        .collect();
    ScalarField::new(flow.grid().clone(), values)
}

fn right_hand_side(
    id: IdentityId,
    quantity: &HarnackQuantity,
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
    k: usize,
    field: &[f64],
) -> Vec<f64> {
    let m = heat.metric(flow, k);
    let u = heat.u(k);
    let s = heat.clock(k);
    let n = quantity.n as f64;
    let h: Vec<f64> = field.iter().map(|v| v + quantity.explicit_term(s)).collect();
    let lap_h = laplacian_values(m, field);
    let gh_gu = grad_dot_values(m, field, u);
    let lap_u = laplacian_values(m, u);
    let g2 = grad_dot_values(m, u, u);
    let hess = hessian_spectrum_values(m, u);
    let r = scalar_curvature_values(m);
    let rho = ricci_eigenvalue_values(m);
    let transport = |j: usize| lap_h[j] - 2.0 * gh_gu[j];
    (0..u.len())
        .map(|j| match id {
            IdentityId::HepsEvolution => {
                let eps = match flow.kind() {
                    FlowKind::EpsilonSurface { epsilon } => epsilon,
                    _ => unreachable!("checked by check_background"),
                };
                let gr_gu = grad_dot_values(m, &r, u)[j];
                let lap_r = laplacian_values(m, &r)[j];
                let r_t = eps * (lap_r + r[j] * r[j]);
                transport(j)
                    - 2.0 * hess.shifted_norm_sq(j, -0.5 * eps * r[j])
                    - eps * r[j] * h[j]
                    - 2.0 * eps * gr_gu
                    - r[j] * g2[j]
                    - eps * r_t
                    - lap_u[j]
            }
            IdentityId::H2REvolution | IdentityId::HREvolution | IdentityId::PEvolution => {
                let curvature = match id {
                    IdentityId::H2REvolution => 2.0 * n * rho[j] * rho[j],
                    _ => 2.0 * r[j] / s,
                };
                let extra = if id == IdentityId::PEvolution { n / (s * s) } else { 0.0 };
                transport(j) - 2.0 / s * h[j] - 2.0 / s * g2[j] - curvature - extra
                    - 2.0 * hess.shifted_norm_sq(j, rho[j] - 1.0 / s)
                    - 2.0 * (lap_u[j] - g2[j])
            }
            IdentityId::GradForwardEvolution => {
                transport(j) - (1.0 / s + 1.0) * h[j] - 2.0 * hess.shifted_norm_sq(j, 0.0) - g2[j]
            }
            IdentityId::GradBackwardEvolution => {
                transport(j) - (1.0 / s + 1.0) * h[j] - 2.0 * hess.shifted_norm_sq(j, 0.0)
                    - 4.0 * rho[j] * g2[j]
                    - g2[j]
            }
        })
        .collect()
}

/// Max-norm of the residual over a set of heat indices.
pub fn residual_max_norm(
    id: IdentityId,
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
    indices: &[usize],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &k in indices {
        worst = worst.max(identity_residual(id, flow, heat, k)?.max_abs());
    }
    Ok(worst)
}

/// Observed orders `log2(e_l / e_{l+1})` of successive halvings of h.
pub fn observed_orders(norms: &[f64]) -> Vec<f64> {
    norms.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Residual norms of `id` at a sequence of resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub id: IdentityId,
    pub resolutions: Vec<usize>,
    pub norms: Vec<f64>,
    pub orders: Vec<f64>,
}

impl IdentityResidual {
    pub fn new(id: IdentityId, resolutions: Vec<usize>, norms: Vec<f64>) -> Self {
        let orders = observed_orders(&norms);
        Self { id, resolutions, norms, orders }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{build_trajectory, FlowConfig};
    use crate::geometry::{BackgroundKind, Grid};
    use crate::heat::{solve, Direction, HeatProblem};

    #[test]
    fn serialized_names_match_display_names() {
        for id in IdentityId::ALL {
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
            assert_eq!(serde_json::from_str::<IdentityId>(&json).unwrap(), id);
        }
    }

    fn run(
        kind: BackgroundKind,
        flow_kind: FlowKind,
        n: usize,
        points: usize,
        phi0: Option<fn(f64) -> f64>,
        t_end: f64,
        steps: usize,
        direction: Direction,
        q: f64,
        f0: fn(f64) -> f64,
    ) -> (FlowTrajectory, HeatTrajectory) {
        let g = Grid::new(kind, n, points).unwrap();
        let mut cfg = FlowConfig::new(flow_kind, g.clone()).with_t_end(t_end).with_steps(steps);
        if let Some(p) = phi0 {
            cfg = cfg.with_initial_phi(g.nodes().iter().map(|&x| p(x)).collect());
        }
        let flow = build_trajectory(&cfg).unwrap();
        let data = ScalarField::from_fn(g, f0);
        let heat = solve(&HeatProblem::new(direction, q, 1.0, data), &flow).unwrap();
        (flow, heat)
    }

    fn flat(points: usize, steps: usize, direction: Direction, q: f64) -> (FlowTrajectory, HeatTrajectory) {
        run(
            BackgroundKind::FlatTorus,
            FlowKind::StaticFlat,
            2,
            points,
            None,
            0.2,
            steps,
            direction,
            q,
            |x| (-(1.5 + 0.3 * x.sin())).exp(),
        )
    }

    /// Residual at the midpoint of the schedule for constant data on the flat
    /// torus, at `steps` and `2 * steps`.
    fn constant_flat_pair(id: IdentityId, q: f64, dir: Direction, steps: usize) -> (f64, f64) {
        let e = |steps: usize| {
            let (flow, heat) = run(
                BackgroundKind::FlatTorus,
                FlowKind::StaticFlat,
                2,
                16,
                None,
                0.5,
                steps,
                dir,
                q,
                |_| 0.5,
            );
            identity_residual(id, &flow, &heat, steps / 2).unwrap().max_abs()
        };
        (e(steps), e(2 * steps))
    }

    #[test]
    fn constant_data_leaves_only_time_truncation() {
        for (id, q, dir) in [
            (IdentityId::H2REvolution, 2.0, Direction::ForwardInTau),
            (IdentityId::HREvolution, 1.0, Direction::ForwardInTau),
            (IdentityId::PEvolution, 1.0, Direction::ForwardInTau),
            (IdentityId::GradBackwardEvolution, 0.0, Direction::ForwardInTau),
            (IdentityId::GradForwardEvolution, 0.0, Direction::ForwardInT),
        ] {
            let (coarse, fine) = constant_flat_pair(id, q, dir, 200);
            assert!(fine < 1e-12 || coarse / fine > 3.9, "{id:?}: {coarse} {fine}");
            assert!(coarse < 1e-2, "{id:?}: {coarse}");
        }
    }

    #[test]
    fn flat_identities_converge_at_second_order() {
        for (id, q, dir) in [
            (IdentityId::GradForwardEvolution, 0.0, Direction::ForwardInT),
            (IdentityId::H2REvolution, 2.0, Direction::ForwardInTau),
        ] {
            let mut norms = Vec::new();
            for l in 0..3 {
                let (flow, heat) = flat(16 << l, 40 << (2 * l), dir, q);
                let k = heat.num_steps() / 2;
                norms.push(identity_residual(id, &flow, &heat, k).unwrap().max_abs());
            }
            let orders = observed_orders(&norms);
            assert!(orders.iter().all(|&p| p > 1.8), "{id:?}: {norms:?} {orders:?}");
        }
    }

    #[test]
    fn shrinking_sphere_constant_data_balances() {
        let (flow, heat) = run(
            BackgroundKind::RoundSphere,
            FlowKind::ShrinkingSphere { n: 3 },
            3,
            16,
            None,
            0.2,
            400,
            Direction::ForwardInTau,
            2.0,
            |_| 0.4,
        );
        let (_, fine) = run(
            BackgroundKind::RoundSphere,
            FlowKind::ShrinkingSphere { n: 3 },
            3,
            16,
            None,
            0.2,
            800,
            Direction::ForwardInTau,
            2.0,
            |_| 0.4,
        );
        let fine_flow = build_trajectory(
            &FlowConfig::new(FlowKind::ShrinkingSphere { n: 3 }, flow.grid().clone())
                .with_t_end(0.2)
                .with_steps(800),
        )
        .unwrap();
        let coarse = identity_residual(IdentityId::H2REvolution, &flow, &heat, 200).unwrap().max_abs();
        let fine = identity_residual(IdentityId::H2REvolution, &fine_flow, &fine, 400).unwrap().max_abs();
        assert!(coarse / fine > 3.9, "{coarse} {fine}");
    }

    #[test]
    fn heps_identity_on_static_round_sphere() {
        let (flow, heat) = run(
            BackgroundKind::RotSymSphere,
            FlowKind::EpsilonSurface { epsilon: 0.0 },
            2,
            64,
            Some(|_| 0.0),
            0.2,
            600,
            Direction::ForwardInT,
            0.0,
            |x| (-(1.2 + 0.2 * x.cos())).exp(),
        );
        let e = identity_residual(IdentityId::HepsEvolution, &flow, &heat, 300).unwrap().max_abs();
        assert!(e < 1e-2, "{e}");
    }

    #[test]
    fn unsupported_background_is_reported() {
        let (flow, heat) = run(
            BackgroundKind::RotSymSphere,
            FlowKind::EpsilonSurface { epsilon: 0.5 },
            2,
            16,
            Some(|x| 0.1 * x.cos()),
            0.1,
            200,
            Direction::ForwardInTau,
            0.0,
            |_| 0.5,
        );
        assert!(matches!(
            identity_residual(IdentityId::GradBackwardEvolution, &flow, &heat, 50),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn endpoints_are_rejected() {
        let (flow, heat) = flat(16, 40, Direction::ForwardInT, 0.0);
        assert!(identity_residual(IdentityId::GradForwardEvolution, &flow, &heat, 0).is_err());
        assert!(identity_residual(IdentityId::GradForwardEvolution, &flow, &heat, 40).is_err());
    }
}
