//! Metric evolutions sharing one uniform step schedule.
//!
//! The ε-Ricci flow on a conformal 2-sphere is integrated with classical RK4
//! on the conformal factor; the shrinking round sphere and the static flat
//! torus are exact Ricci flows evaluated in closed form. Every trajectory
//! stores the metric at each schedule time and at each step midpoint, which
//! is what the heat solvers' RK4 stages consume.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    laplacian_values, scalar_curvature_values, volume, BackgroundKind, Grid, MetricForm,
    MetricState,
};

/// Default parabolic stability constant σ in `dt ≤ σ h² min(scale)`.
pub const DEFAULT_CFL: f64 = 0.2;

/// Fraction of the singular time used as the default end time.
pub const DEFAULT_END_FRACTION: f64 = 0.9;

// headroom applied to the predicted end-of-run metric scale when picking dt
const SCALE_HEADROOM: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FlowKind {
    /// `∂g/∂t = -εRg` on the conformal 2-sphere.
    EpsilonSurface { epsilon: f64 },
    /// Round n-sphere with `c(t) = 1 - 2(n-1)t`.
    ShrinkingSphere { n: usize },
    StaticFlat,
}

impl FlowKind {
    /// Whether the family is a (non-normalized) Ricci flow `∂g/∂t = -2Ric`.
    pub fn is_ricci_flow(&self) -> bool {
        match self {
            FlowKind::EpsilonSurface { epsilon } => *epsilon == 1.0,
            FlowKind::ShrinkingSphere { .. } | FlowKind::StaticFlat => true,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            FlowKind::EpsilonSurface { epsilon } => Some(*epsilon),
            _ => None,
        }
    }
}

/// Constants of a type-I bound `|Rm| ≤ d0 / (T - t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeIBound {
    pub d0: f64,
    pub blow_up_time: f64,
}

/// Everything needed to build a trajectory.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub grid: Arc<Grid>,
    /// Initial conformal factor; required for `EpsilonSurface`.
    pub initial_phi: Option<Vec<f64>>,
    /// End time; defaults to 0.9 of the singular time where one exists.
    pub t_end: Option<f64>,
    /// Exact number of steps; overrides the stability-derived choice.
    pub steps: Option<usize>,
    pub cfl: f64,
    pub max_steps: Option<usize>,
}

impl FlowConfig {
    pub fn new(kind: FlowKind, grid: Arc<Grid>) -> Self {
        Self {
            kind,
            grid,
            initial_phi: None,
            t_end: None,
            steps: None,
            cfl: DEFAULT_CFL,
            max_steps: None,
        }
    }

    pub fn with_initial_phi(mut self, phi: Vec<f64>) -> Self {
        self.initial_phi = Some(phi);
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = Some(t_end);
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = Some(steps);
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    kind: FlowKind,
    grid: Arc<Grid>,
    dt: f64,
    cfl: f64,
    states: Vec<MetricState>,
    midpoints: Vec<MetricState>,
    singular_time: Option<f64>,
}

impl FlowTrajectory {
    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    /// Number of steps K; states are indexed `0..=K`.
    pub fn num_steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.num_steps())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| self.time(k)).collect()
    }

    pub fn state(&self, k: usize) -> &MetricState {
        &self.states[k]
    }

    pub fn states(&self) -> &[MetricState] {
        &self.states
    }

    /// Metric at `t_k + dt/2`.
    pub fn midpoint(&self, k: usize) -> &MetricState {
        &self.midpoints[k]
    }

    pub fn singular_time(&self) -> Option<f64> {
        self.singular_time
    }

    /// Stored state closest to time `t`.
    pub fn state_nearest(&self, t: f64) -> &MetricState {
        let k = (t / self.dt).round().clamp(0.0, self.num_steps() as f64) as usize;
        &self.states[k]
    }

    /// Schedule index of time `t`, if `t` lies on the schedule.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let s = t / self.dt;
        let k = s.round();
        ((s - k).abs() < 1e-6 && k >= 0.0 && k <= self.num_steps() as f64).then_some(k as usize)
    }
}

fn surface_velocity(grid: &Arc<Grid>, phi: &[f64], epsilon: f64) -> Vec<f64> {
    // ∂φ/∂t = -(ε/2) R = -ε e^{-2φ} (1 - Δ₀φ)
    let m = MetricState::conformal_shared(grid.clone(), phi.into(), 0.0);
    scalar_curvature_values(&m)
        .into_iter()
        .map(|r| -0.5 * epsilon * r)
        .collect()
}

fn rk4_surface(grid: &Arc<Grid>, phi: &[f64], dt: f64, epsilon: f64) -> Vec<f64> {
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> {
        phi.iter().zip(k).map(|(p, d)| p + a * d).collect()
    };
    let k1 = surface_velocity(grid, phi, epsilon);
    let k2 = surface_velocity(grid, &axpy(0.5 * dt, &k1), epsilon);
    let k3 = surface_velocity(grid, &axpy(0.5 * dt, &k2), epsilon);
    let k4 = surface_velocity(grid, &axpy(dt, &k3), epsilon);
    (0..phi.len())
        .map(|j| phi[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect()
}

fn check_stability(module: &'static str, m: &MetricState, dt: f64, cfl: f64) -> Result<()> {
    let h = m.grid().spacing();
    let limit = cfl * h * h * m.min_scale();
    if dt > limit {
        return Err(Error::Instability {
            module,
            time: m.time(),
            detail: format!("dt = {dt:.3e} exceeds the stability bound {limit:.3e}"),
        });
    }
    Ok(())
}

fn check_curvature(m: &MetricState, require_positive: bool) -> Result<()> {
    let r = scalar_curvature_values(m);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Instability {
            module: "flow",
            time: m.time(),
            detail: "scalar curvature is not finite".into(),
        });
    }
    if require_positive {
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::Instability {
                module: "flow",
                time: m.time(),
                detail: format!("scalar curvature lost positivity (min R = {min:.3e})"),
            });
        }
    }
    Ok(())
}

/// One RK4 step of the ε-Ricci flow on a conformal sphere.
pub fn step_surface_flow(state: &MetricState, dt: f64, epsilon: f64, cfl: f64) -> Result<MetricState> {
    let MetricForm::Conformal { phi } = state.form() else {
        return Err(Error::Unsupported("the surface flow needs a conformal metric".into()));
    };
    if epsilon < 0.0 {
        return Err(Error::Domain(format!("ε must be nonnegative, got {epsilon}")));
    }
    check_stability("flow", state, dt, cfl)?;
    let was_positive = scalar_curvature_values(state).iter().all(|&r| r > 0.0);
    let next = if epsilon == 0.0 {
        MetricState::conformal_shared(state.grid().clone(), phi.clone(), state.time() + dt)
    } else {
        let phi = rk4_surface(state.grid(), phi, dt, epsilon);
        MetricState::conformal_shared(state.grid().clone(), phi.into(), state.time() + dt)
    };
    check_curvature(&next, was_positive)?;
    Ok(next)
}

/// Exact round shrinking sphere `g(t) = (1 - 2(n-1)t) g_round`.
pub fn shrinking_sphere_state(grid: &Arc<Grid>, t: f64) -> Result<MetricState> {
    let n = grid.dim();
    let blow_up = 1.0 / (2.0 * (n as f64 - 1.0));
    if t >= blow_up {
        return Err(Error::Singularity {
            time: t,
            singular_time: blow_up,
        });
    }
    MetricState::scaled(grid.clone(), 1.0 - 2.0 * (n as f64 - 1.0) * t, t)
}

/// `|Rm|²` of a constant-curvature scaled sphere, `2n(n-1)/c²`.
pub fn riemann_norm_sq(m: &MetricState) -> Option<f64> {
    match m.form() {
        MetricForm::Scaled { c } => {
            let n = m.dim() as f64;
            Some(2.0 * n * (n - 1.0) / (c * c))
        }
        MetricForm::Flat => Some(0.0),
        MetricForm::Conformal { .. } => None,
    }
}

/// Singular time of the surface flow estimated from Gauss–Bonnet,
/// `Area(0) / (8πε)`.
pub fn surface_singular_time(initial: &MetricState, epsilon: f64) -> Option<f64> {
    (epsilon > 0.0).then(|| volume(initial) / (8.0 * PI * epsilon))
}

fn predicted_min_scale(config: &FlowConfig, initial: Option<&MetricState>, t_end: f64) -> f64 {
    match config.kind {
        FlowKind::StaticFlat => 1.0,
        FlowKind::ShrinkingSphere { n } => 1.0 - 2.0 * (n as f64 - 1.0) * t_end,
        FlowKind::EpsilonSurface { epsilon } => {
            // d/dt e^{2φ} = -ε R e^{2φ}: freeze R at t = 0, then cap by the
            // area ratio 1 - t/T, which is exact for the round sphere.
            let m = initial.expect("surface flows have an initial state");
            let phi = m.phi().expect("conformal");
            let r = scalar_curvature_values(m);
            let shrink = match surface_singular_time(m, epsilon) {
                Some(ts) => 1.0 - t_end / ts,
                None => 1.0,
            };
            phi.iter()
                .zip(r)
                .map(|(p, r)| {
                    let s = (2.0 * p).exp();
                    s * (-epsilon * t_end * r.max(0.0)).exp().min(shrink)
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Integrate or evaluate the configured flow on a uniform schedule.
pub fn build_trajectory(config: &FlowConfig) -> Result<FlowTrajectory> {
    let grid = config.grid.clone();
    if !(config.cfl > 0.0) {
        return Err(Error::Config(format!("cfl must be positive, got {}", config.cfl)));
    }
    let initial = match config.kind {
        FlowKind::EpsilonSurface { epsilon } => {
            if epsilon < 0.0 || !epsilon.is_finite() {
                return Err(Error::Config(format!("ε must be a finite nonnegative number, got {epsilon}")));
            }
            if grid.kind() != BackgroundKind::RotSymSphere {
                return Err(Error::Config("the ε-flow runs on the conformal sphere".into()));
            }
            let phi = config
                .initial_phi
                .clone()
                .unwrap_or_else(|| vec![0.0; grid.len()]);
            Some(MetricState::conformal(grid.clone(), phi, 0.0)?)
        }
        FlowKind::ShrinkingSphere { n } => {
            if grid.kind() != BackgroundKind::RoundSphere || grid.dim() != n {
                return Err(Error::Config(format!(
                    "the shrinking sphere needs a round-sphere grid of dimension {n}"
                )));
            }
            None
        }
        FlowKind::StaticFlat => {
            if grid.kind() != BackgroundKind::FlatTorus {
                return Err(Error::Config("the static flat flow runs on the torus".into()));
            }
            None
        }
    };

    let singular_time = match config.kind {
        FlowKind::EpsilonSurface { epsilon } => {
            surface_singular_time(initial.as_ref().expect("surface"), epsilon)
        }
        FlowKind::ShrinkingSphere { n } => Some(1.0 / (2.0 * (n as f64 - 1.0))),
        FlowKind::StaticFlat => None,
    };
    let t_end = match (config.t_end, singular_time) {
        (Some(t), _) => t,
        (None, Some(ts)) => DEFAULT_END_FRACTION * ts,
        (None, None) => {
            return Err(Error::Config("flows without a singular time need an explicit t_end".into()))
        }
    };
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
    }
    if let Some(ts) = singular_time {
        if t_end >= ts {
            return Err(Error::Config(format!(
                "t_end = {t_end} is not before the singular time {ts:.6}"
            )));
        }
    }

    let h = grid.spacing();
    let steps = match config.steps {
        Some(k) if k > 0 => k,
        Some(_) => return Err(Error::Config("steps must be positive".into())),
        None => {
            let scale = predicted_min_scale(config, initial.as_ref(), t_end) * SCALE_HEADROOM;
            if !(scale > 0.0) {
                return Err(Error::Config(format!(
                    "t_end = {t_end} leaves no positive metric scale for a stable schedule"
                )));
            }
            let dt_max = config.cfl * h * h * scale;
            (t_end / dt_max).ceil() as usize
        }
    };
    if let Some(cap) = config.max_steps {
        if steps > cap {
            return Err(Error::Config(format!(
                "the schedule needs {steps} steps, more than the allowed {cap}"
            )));
        }
    }
    let dt = t_end / steps as f64;

    let mut states = Vec::with_capacity(steps + 1);
    let mut midpoints = Vec::with_capacity(steps);
    match config.kind {
        FlowKind::EpsilonSurface { epsilon } => {
            let first = initial.expect("surface");
            let positive = scalar_curvature_values(&first).iter().all(|&r| r > 0.0);
            check_curvature(&first, false)?;
            let mut phi: Arc<[f64]> = first.phi().expect("conformal").into();
            states.push(first);
            for k in 0..steps {
                let current = &states[k];
                check_stability("flow", current, dt, config.cfl)?;
                let t = k as f64 * dt;
                let (mid, next) = if epsilon == 0.0 {
                    (phi.clone(), phi.clone())
                } else {
                    let mid: Arc<[f64]> = rk4_surface(&grid, &phi, 0.5 * dt, epsilon).into();
                    let next: Arc<[f64]> = rk4_surface(&grid, &mid, 0.5 * dt, epsilon).into();
                    (mid, next)
                };
                let mid = MetricState::conformal_shared(grid.clone(), mid, t + 0.5 * dt);
                let next_state =
                    MetricState::conformal_shared(grid.clone(), next.clone(), (k + 1) as f64 * dt);
                check_curvature(&mid, positive)?;
                check_curvature(&next_state, positive)?;
                midpoints.push(mid);
                states.push(next_state);
                phi = next;
            }
            check_stability("flow", &states[steps], dt, config.cfl)?;
        }
        FlowKind::ShrinkingSphere { .. } => {
            for k in 0..=steps {
                let s = shrinking_sphere_state(&grid, k as f64 * dt)?;
                check_stability("flow", &s, dt, config.cfl)?;
                states.push(s);
                if k < steps {
                    midpoints.push(shrinking_sphere_state(&grid, (k as f64 + 0.5) * dt)?);
                }
            }
        }
        FlowKind::StaticFlat => {
            for k in 0..=steps {
                let s = MetricState::flat(grid.clone(), k as f64 * dt)?;
                check_stability("flow", &s, dt, config.cfl)?;
                states.push(s);
                if k < steps {
                    midpoints.push(MetricState::flat(grid.clone(), (k as f64 + 0.5) * dt)?);
                }
            }
        }
    }

    Ok(FlowTrajectory {
        kind: config.kind,
        grid,
        dt,
        cfl: config.cfl,
        states,
        midpoints,
        singular_time,
    })
}

/// Type-I constants of the shrinking sphere, from `|Rm|² = 2n(n-1)/c²`.
pub fn type_one_constant(traj: &FlowTrajectory) -> Result<TypeIBound> {
    match traj.kind() {
        FlowKind::ShrinkingSphere { n } => {
            let n = n as f64;
            Ok(TypeIBound {
                d0: (2.0 * n * (n - 1.0)).sqrt() / (2.0 * (n - 1.0)),
                blow_up_time: 1.0 / (2.0 * (n - 1.0)),
            })
        }
        other => Err(Error::Unsupported(format!(
            "type-I constants are only available for the shrinking sphere, not {other:?}"
        ))),
    }
}

/// `max_k |Rm|(t_k) (T - t_k)` over the stored schedule.
pub fn sampled_type_one_ratio(traj: &FlowTrajectory, bound: &TypeIBound) -> f64 {
    traj.states()
        .iter()
        .filter_map(|m| riemann_norm_sq(m).map(|r| r.sqrt() * (bound.blow_up_time - m.time())))
        .fold(0.0, f64::max)
}

/// Max-norm mismatch between the centered time difference of R and
/// `ε(ΔR + R²)` at interior schedule index `k`.
pub fn curvature_evolution_residual(traj: &FlowTrajectory, k: usize) -> Result<f64> {
    let FlowKind::EpsilonSurface { epsilon } = traj.kind() else {
        return Err(Error::Unsupported("curvature evolution check needs a surface flow".into()));
    };
    if k == 0 || k >= traj.num_steps() {
        return Err(Error::Domain(format!("index {k} has no centered neighbours")));
    }
    let before = scalar_curvature_values(traj.state(k - 1));
    let after = scalar_curvature_values(traj.state(k + 1));
    let m = traj.state(k);
    let r = scalar_curvature_values(m);
    let lap = laplacian_values(m, &r);
    let dt = traj.dt();
    Ok((0..r.len())
        .map(|j| ((after[j] - before[j]) / (2.0 * dt) - epsilon * (lap[j] + r[j] * r[j])).abs())
        .fold(0.0, f64::max))
}

/// Worst value of `ε(Δ ln R + R) + 1/t` over all stored states with `t > 0`.
pub fn trace_harnack_margin(traj: &FlowTrajectory) -> Result<f64> {
    let FlowKind::EpsilonSurface { epsilon } = traj.kind() else {
        return Err(Error::Unsupported("the trace Harnack check needs a surface flow".into()));
    };
    let mut worst = f64::INFINITY;
    for m in traj.states().iter().skip(1) {
        let r = scalar_curvature_values(m);
        if r.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "the trace Harnack quantity needs R > 0 (violated at t = {})",
                m.time()
            )));
        }
        let ln_r: Vec<f64> = r.iter().map(|v| v.ln()).collect();
        let lap = laplacian_values(m, &ln_r);
        for j in 0..r.len() {
            worst = worst.min(epsilon * (lap[j] + r[j]) + 1.0 / m.time());
        }
    }
    Ok(worst)
}
