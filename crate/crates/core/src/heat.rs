//! Nonlinear heat equations in the log variable `u = -ln f`.
//!
//! The equations `f_t = Δf - a f ln f + qRf` (forward) and
//! `f_t = -Δf + a f ln f + qRf` (backward) are never integrated in `f`.
//! With `u = -ln f` both become
//!
//! ```text
//! ∂u/∂s = Δu - |∇u|² + σ q R - a u
//! ```
//!
//! where `s` is `t` (σ = -1) for forward problems and `τ = T - t` (σ = +1)
//! for backward problems, which run forward in τ over the flow replayed in
//! reverse.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::geometry::{same_grid, scalar_curvature_values, Grid, MetricState, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ForwardInT,
    ForwardInTau,
}

impl Direction {
    /// Sign multiplying `qR` in the u-equation.
    pub fn potential_sign(self) -> f64 {
        match self {
            Direction::ForwardInT => -1.0,
            Direction::ForwardInTau => 1.0,
        }
    }
}

/// Order in which a backward problem visits the flow states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Replay {
    /// τ-step k uses the state at `t = T - τ_k` (the physical choice).
    #[default]
    Reversed,
    /// τ-step k uses the state at `t = τ_k`; only meaningful for static metrics.
    Forward,
}

#[derive(Debug, Clone)]
pub struct HeatProblem {
    pub direction: Direction,
    /// Coefficient `q` of the potential `qR`.
    pub potential: f64,
    /// Coefficient `a` of the `-a u` term.
    pub decay: f64,
    /// Initial (forward) or terminal (backward) data `f₀ > 0`.
    pub data: ScalarField,
    pub replay: Replay,
}

impl HeatProblem {
    pub fn new(direction: Direction, potential: f64, decay: f64, data: ScalarField) -> Self {
        Self {
            direction,
            potential,
            decay,
            data,
            replay: Replay::Reversed,
        }
    }
}

/// Right-hand side `Δu - |∇u|² + σ q R - a u` on the metric `m`.
pub(crate) fn u_rhs_values(m: &MetricState, u: &[f64], signed_q: f64, a: f64) -> Vec<f64> {
    let grid = m.grid();
    let s = m.inverse_scale();
    let w = grid.radial_weight();
    let r = (signed_q != 0.0).then(|| scalar_curvature_values(m));
    (0..u.len())
        .map(|j| {
            let (d1, d2) = grid.derivs_at(u, j);
            let pot = r.as_ref().map_or(0.0, |r| signed_q * r[j]);
            s[j] * (d2 + w[j] * d1) - s[j] * d1 * d1 + pot - a * u[j]
        })
        .collect()
}

pub fn u_rhs(
    m: &MetricState,
    u: &ScalarField,
    direction: Direction,
    potential: f64,
    decay: f64,
) -> Result<ScalarField> {
    m.check_field(u)?;
    ScalarField::new(
        m.grid().clone(),
        u_rhs_values(m, u.values(), direction.potential_sign() * potential, decay),
    )
}

/// Solution `u` of a heat problem at every schedule time.
#[derive(Debug, Clone)]
pub struct HeatTrajectory {
    direction: Direction,
    potential: f64,
    decay: f64,
    replay: Replay,
    grid: Arc<Grid>,
    dt: f64,
    u: Vec<Vec<f64>>,
}

impl HeatTrajectory {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn potential(&self) -> f64 {
        self.potential
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn num_steps(&self) -> usize {
        self.u.len() - 1
    }

    /// Value of the solver's own clock (t or τ) at index `k`.
    pub fn clock(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn u(&self, k: usize) -> &[f64] {
        &self.u[k]
    }

    pub fn u_field(&self, k: usize) -> ScalarField {
        ScalarField::new(self.grid.clone(), self.u[k].clone()).expect("same grid")
    }

    pub fn f_field(&self, k: usize) -> ScalarField {
        self.u_field(k).map(|u| (-u).exp())
    }

    /// Flow schedule index holding the metric of heat index `k`.
    pub fn flow_index(&self, k: usize) -> usize {
        match (self.direction, self.replay) {
            (Direction::ForwardInTau, Replay::Reversed) => self.num_steps() - k,
            _ => k,
        }
    }

    /// Metric at heat index `k`.
    pub fn metric<'a>(&self, flow: &'a FlowTrajectory, k: usize) -> &'a MetricState {
        flow.state(self.flow_index(k))
    }

    /// `∂u/∂s` from the analytic u-equation at index `k`.
    pub fn rate(&self, flow: &FlowTrajectory, k: usize) -> Vec<f64> {
        u_rhs_values(
            self.metric(flow, k),
            &self.u[k],
            self.direction.potential_sign() * self.potential,
            self.decay,
        )
    }
}

fn check_heat_stability(m: &MetricState, dt: f64, cfl: f64, clock: f64) -> Result<()> {
    let h = m.grid().spacing();
    let limit = cfl * h * h * m.min_scale();
    if dt > limit {
        return Err(Error::Instability {
            module: "heat",
            time: clock,
            detail: format!("dt = {dt:.3e} exceeds the stability bound {limit:.3e}"),
        });
    }
    Ok(())
}

/// RK4 integration of the u-equation on the flow's schedule.
pub fn solve(problem: &HeatProblem, flow: &FlowTrajectory) -> Result<HeatTrajectory> {
    let grid = flow.grid().clone();
    same_grid(&grid, problem.data.grid())?;
    if let Some((j, v)) = problem
        .data
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::Domain(format!(
            "heat data must be positive and finite, got f₀ = {v} at node {j}"
        )));
    }

    let steps = flow.num_steps();
    let dt = flow.dt();
    let signed_q = problem.direction.potential_sign() * problem.potential;
    let a = problem.decay;
    let reversed = problem.direction == Direction::ForwardInTau && problem.replay == Replay::Reversed;

    // (start, midpoint, end) metrics of heat step k
    let stage_metrics = |k: usize| -> (&MetricState, &MetricState, &MetricState) {
        if reversed {
            let i = steps - k;
            (flow.state(i), flow.midpoint(i - 1), flow.state(i - 1))
        } else {
            (flow.state(k), flow.midpoint(k), flow.state(k + 1))
        }
    };

    let mut u: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    u.push(problem.data.values().iter().map(|f| -f.ln()).collect());
    let len = grid.len();
    let mut tmp = vec![0.0; len];
    for k in 0..steps {
        let (m1, m2, m4) = stage_metrics(k);
        check_heat_stability(m1, dt, flow.cfl(), k as f64 * dt)?;
        let cur = &u[k];
        let k1 = u_rhs_values(m1, cur, signed_q, a);
        for j in 0..len {
            tmp[j] = cur[j] + 0.5 * dt * k1[j];
        }
        let k2 = u_rhs_values(m2, &tmp, signed_q, a);
        for j in 0..len {
            tmp[j] = cur[j] + 0.5 * dt * k2[j];
        }
        let k3 = u_rhs_values(m2, &tmp, signed_q, a);
        for j in 0..len {
            tmp[j] = cur[j] + dt * k3[j];
        }
        let k4 = u_rhs_values(m4, &tmp, signed_q, a);
        let next: Vec<f64> = (0..len)
            .map(|j| cur[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        if let Some(j) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::Instability {
                module: "heat",
                time: (k + 1) as f64 * dt,
                detail: format!("u is not finite at node {j}"),
            });
        }
        u.push(next);
    }

    Ok(HeatTrajectory {
        direction: problem.direction,
        potential: problem.potential,
        decay: problem.decay,
        replay: problem.replay,
        grid,
        dt,
        u,
    })
}

/// Bounds on `f = e^{-u}` over a whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub inf_initial: f64,
    pub sup_initial: f64,
    pub min_f: f64,
    pub max_f: f64,
    /// Largest drop of `min f` between consecutive times (zero when monotone).
    pub worst_min_decrease: f64,
    pub tolerance: f64,
    pub lower_bound_holds: bool,
    pub upper_bound_holds: bool,
    pub monotone_min_holds: bool,
}

impl PositivityReport {
    pub fn holds(&self) -> bool {
        self.lower_bound_holds && self.upper_bound_holds && self.monotone_min_holds
    }
}

/// Checks `inf f₀ ≤ f < 1` and monotonicity of `min f` along the run.
pub fn positivity_report(ht: &HeatTrajectory) -> PositivityReport {
    let h = ht.grid().spacing();
    let tolerance = 1e-8 + h * h;
    let min_f_at = |k: usize| (-ht.u(k).iter().copied().fold(f64::NEG_INFINITY, f64::max)).exp();
    let max_f_at = |k: usize| (-ht.u(k).iter().copied().fold(f64::INFINITY, f64::min)).exp();
    let inf_initial = min_f_at(0);
    let sup_initial = max_f_at(0);
    let mut min_f = f64::INFINITY;
    let mut max_f = f64::NEG_INFINITY;
    let mut worst_min_decrease: f64 = 0.0;
    let mut prev = inf_initial;
    for k in 0..=ht.num_steps() {
        let lo = min_f_at(k);
        min_f = min_f.min(lo);
        max_f = max_f.max(max_f_at(k));
        worst_min_decrease = worst_min_decrease.max(prev - lo);
        prev = lo;
    }
    PositivityReport {
        inf_initial,
        sup_initial,
        min_f,
        max_f,
        worst_min_decrease,
        tolerance,
        lower_bound_holds: min_f >= inf_initial * (1.0 - tolerance),
        upper_bound_holds: max_f < 1.0 + tolerance,
        monotone_min_holds: worst_min_decrease <= tolerance,
    }
}
