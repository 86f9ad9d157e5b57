use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::geometry::{meridian_path_energy, scalar_curvature_values, simpson_weight, MetricState};
use crate::heat::{Direction, HeatTrajectory};

/// Integrated Harnack inequalities along space-time paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathTheorem {
    /// Integrand `|γ̇|² + 2R + n/2 + 2n/(T-t)`, heat equation with q = 2.
    TwoR,
    /// Integrand `|γ̇|² + R + n/4 + 2n/(T-t)`, heat equation with q = 1.
    OneR,
}

impl PathTheorem {
    fn coefficients(self, n: f64) -> (f64, f64) {
        match self {
            PathTheorem::TwoR => (2.0, n / 2.0),
            PathTheorem::OneR => (1.0, n / 4.0),
        }
    }

    fn potential(self) -> f64 {
        match self {
            PathTheorem::TwoR => 2.0,
            PathTheorem::OneR => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathHarnackCheck {
    pub theorem: PathTheorem,
    pub x1: f64,
    pub t1: f64,
    pub x2: f64,
    pub t2: f64,
    /// `e^{t2} ln f(x2,t2) - e^{t1} ln f(x1,t1)`.
    pub lhs: f64,
    /// `½ ∫ e^{T-t} (|γ̇|² + αR + β + 2n/(T-t)) dt` along the constant-speed path.
    pub rhs: f64,
    pub slack: f64,
    /// `e^{T-t2} ln f(x2,t2) - e^{T-t1} ln f(x1,t1)`.
    pub lhs_reweighted: f64,
    pub slack_reweighted: f64,
    /// Unweighted `∫ |γ̇|² dt`.
    pub path_energy: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Compares both sides of a path Harnack inequality between two schedule
/// points of a terminal-value problem solved backward from `T = flow.t_end()`.
#[allow(clippy::too_many_arguments)]
pub fn path_harnack_check(
    theorem: PathTheorem,
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
    x1: f64,
    t1: f64,
    x2: f64,
    t2: f64,
    tolerance: f64,
) -> Result<PathHarnackCheck> {
    if t2 <= t1 || t1 < 0.0 {
        return Err(Error::Ordering(format!("path needs 0 <= t1 < t2, got t1 = {t1}, t2 = {t2}")));
    }
    let big_t = flow.t_end();
    let (k1, k2) = match (flow.index_of(t1), flow.index_of(t2)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Domain(format!(
                "path endpoints {t1}, {t2} are not on the schedule (dt = {})",
                flow.dt()
            )))
        }
    };
    if k2 >= flow.num_steps() {
        return Err(Error::Ordering(format!("path needs t2 < T = {big_t}, got {t2}")));
    }
    if heat.direction() != Direction::ForwardInTau || heat.flow_index(0) != flow.num_steps() {
        return Err(Error::Unsupported(
            "path checks need a terminal-value problem replayed backward along the flow".into(),
        ));
    }
    if heat.potential() != theorem.potential() || heat.decay() != 1.0 {
        return Err(Error::Domain(format!(
            "{theorem:?} needs q = {}, a = 1; got q = {}, a = {}",
            theorem.potential(),
            heat.potential(),
            heat.decay()
        )));
    }
    let grid = flow.grid();
    let n = grid.dim() as f64;
    let (alpha, beta) = theorem.coefficients(n);
    let log_f = |k: usize, x: f64| -grid.interpolate(heat.u(flow.num_steps() - k), x);
    let (t1, t2) = (flow.time(k1), flow.time(k2));
    let (lf1, lf2) = (log_f(k1, x1), log_f(k2, x2));
    let lhs = t2.exp() * lf2 - t1.exp() * lf1;
    let lhs_reweighted = (big_t - t2).exp() * lf2 - (big_t - t1).exp() * lf1;

    // Sample at schedule points and stored midpoints: 2(k2 - k1) intervals.
    let intervals = 2 * (k2 - k1);
    let half = 0.5 * flow.dt();
    let metric_at_half = |i: usize| -> &MetricState {
        let s = 2 * k1 + i;
        if s.is_multiple_of(2) {
            flow.state(s / 2)
        } else {
            flow.midpoint(s / 2)
        }
    };
    let speed = (x2 - x1) / (t2 - t1);
    let mut acc = 0.0;
    for i in 0..=intervals {
        let t = t1 + i as f64 * half;
        let x = x1 + (t - t1) * speed;
        let m = metric_at_half(i);
        let r = grid.interpolate(&scalar_curvature_values(m), x);
        let integrand = (big_t - t).exp()
            * (m.coordinate_scale_at(x) * speed * speed + alpha * r + beta + 2.0 * n / (big_t - t));
        acc += simpson_weight(i, intervals) * integrand;
    }
    let rhs = 0.5 * acc * half / 3.0;
    let path_energy = meridian_path_energy(
        |t| metric_at_half(((t - t1) / half).round() as usize),
        x1,
        t1,
        x2,
        t2,
        intervals,
    )?;
    let slack = rhs - lhs;
    let slack_reweighted = rhs - lhs_reweighted;
    Ok(PathHarnackCheck {
        theorem,
        x1,
        t1,
        x2,
        t2,
        lhs,
        rhs,
        slack,
        lhs_reweighted,
        slack_reweighted,
        path_energy,
        tolerance,
        holds: slack >= -tolerance && slack_reweighted >= -tolerance,
    })
}
