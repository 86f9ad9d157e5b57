use std::collections::BTreeMap;

use serde::Serialize;

use super::quantity::{HarnackQuantity, QuantityKind};
use crate::error::{Error, Result};
use crate::flow::{FlowKind, FlowTrajectory};
use crate::geometry::scalar_curvature_values;
use crate::heat::HeatTrajectory;

/// Grid-dependent slack allowed above the bound: `base + coefficient · h²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub base: f64,
    pub coefficient: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { base: 1e-6, coefficient: 1.0 }
    }
}

impl Tolerance {
    pub fn at_spacing(&self, h: f64) -> f64 {
        self.base + self.coefficient * h * h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorOptions {
    pub tolerance: Tolerance,
    /// Added to the bound before comparing; negative values tighten it.
    pub bound_shift: f64,
    /// Optional `(lo, hi]` on the quantity's clock, intersected with the
    /// validity window.
    pub window: Option<(f64, f64)>,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self { tolerance: Tolerance::default(), bound_shift: 0.0, window: None }
    }
}

/// One schedule point of a monitored quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorRecord {
    /// Quantity clock (t or τ).
    pub clock: f64,
    /// Flow time t of the metric used.
    pub time: f64,
    pub sup: f64,
    pub location: f64,
    pub bound: f64,
    /// `bound - sup`; negative means the bound is exceeded.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated { clock: f64, location: f64, magnitude: f64 },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Side condition checked alongside a quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideCheck {
    pub name: String,
    /// Smallest `value - lower_bound` over the monitored states.
    pub worst_margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackReport {
    pub quantity: String,
    pub n: usize,
    pub tolerance: f64,
    pub bound_shift: f64,
    pub records: Vec<MonitorRecord>,
    pub verdict: Verdict,
    pub side_checks: Vec<SideCheck>,
    /// Extra scalars attached by the caller, e.g. the chosen type-I `d`.
    pub metadata: BTreeMap<String, f64>,
}

impl HarnackReport {
    pub fn holds(&self) -> bool {
        self.verdict.holds() && self.side_checks.iter().all(|c| c.holds)
    }

    /// Smallest margin over all records.
    pub fn min_margin(&self) -> f64 {
        self.records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    /// Largest value of the quantity over all records.
    pub fn sup(&self) -> f64 {
        self.records.iter().map(|r| r.sup).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates `quantity` at every schedule point strictly inside its window
/// and compares the spatial supremum with the bound.
pub fn monitor(
    quantity: &HarnackQuantity,
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
    options: &MonitorOptions,
) -> Result<HarnackReport> {
    quantity.check_compatible(flow, heat)?;
    let (mut lo, mut hi) = quantity.validity_window(flow.t_end());
    if let Some((a, b)) = options.window {
        if b <= a {
            return Err(Error::Ordering(format!("monitor window ({a}, {b}] is empty")));
        }
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let slack = 1e-12 * hi.max(1.0);
    let tol = options.tolerance.at_spacing(flow.grid().spacing());
    let nodes = flow.grid().nodes();
    let mut records = Vec::new();
    let mut verdict = Verdict::Holds;
    let mut curvature_floor = f64::INFINITY;
    for k in 0..=heat.num_steps() {
        let clock = heat.clock(k);
        if clock <= lo + slack || clock > hi + slack {
            continue;
        }
        let field = quantity.evaluate(flow, heat, k)?;
        let j = field.argmax();
        let sup = field.values()[j];
        let bound = quantity.bound(clock) + options.bound_shift;
        let margin = bound - sup;
        let time = flow.time(heat.flow_index(k));
        if !sup.is_finite() {
            return Err(Error::Instability {
                module: "harnack",
                time,
                detail: format!("{} is not finite", quantity.name()),
            });
        }
        if margin < -tol && verdict.holds() {
            verdict = Verdict::Violated { clock, location: nodes[j], magnitude: -margin };
        }
        if quantity.kind == QuantityKind::PShifted && time > 0.0 {
            let n = quantity.n as f64;
            let r_min = scalar_curvature_values(heat.metric(flow, k))
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            curvature_floor = curvature_floor.min(r_min + n / (2.0 * time));
        }
        records.push(MonitorRecord { clock, time, sup, location: nodes[j], bound, margin });
    }
    if records.is_empty() {
        return Err(Error::Domain(format!(
            "no schedule point of {} lies in ({lo}, {hi}]",
            quantity.name()
        )));
    }
    let mut side_checks = Vec::new();
    if quantity.kind == QuantityKind::PShifted {
        side_checks.push(SideCheck {
            name: "R >= -n/(2t)".into(),
            worst_margin: curvature_floor,
            holds: curvature_floor >= -tol,
        });
    }
    Ok(HarnackReport {
        quantity: quantity.name(),
        n: quantity.n,
        tolerance: tol,
        bound_shift: options.bound_shift,
        records,
        verdict,
        side_checks,
        metadata: BTreeMap::new(),
    })
}

/// Which type-I Harnack family to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TypeOneFamily {
    /// `2Δu - |∇u|² + 2R - dn/τ`, searched from d = 2.
    H2R,
    /// `2Δu - |∇u|² + R - dn/τ`, searched from d = 1.
    HR,
}

pub const TYPE_ONE_MAX_D: u32 = 64;
const TYPE_ONE_PROBE_INDEX: usize = 5;

/// Smallest integer `d` for which the type-I quantity is negative everywhere
/// at the probe time `τ = 5·dt`.
///
/// τ is measured from the end of the supplied trajectory.
pub fn choose_type_one_d(
    family: TypeOneFamily,
    flow: &FlowTrajectory,
    heat: &HeatTrajectory,
) -> Result<u32> {
    match flow.kind() {
        FlowKind::ShrinkingSphere { .. } | FlowKind::StaticFlat => {}
        other => {
            return Err(Error::Unsupported(format!(
                "type-I constant search needs a shrinking sphere or a flat torus, got {other:?}"
            )))
        }
    }
    if heat.num_steps() < TYPE_ONE_PROBE_INDEX {
        return Err(Error::Search("schedule too short to reach the probe time".into()));
    }
    let n = flow.grid().dim();
    let start = match family {
        TypeOneFamily::H2R => 2,
        TypeOneFamily::HR => 1,
    };
    for d in start..=TYPE_ONE_MAX_D {
        let kind = match family {
            TypeOneFamily::H2R => QuantityKind::H2RTypeOne { d: d as f64 },
            TypeOneFamily::HR => QuantityKind::HRTypeOne { d: d as f64 },
        };
        let q = HarnackQuantity::new(kind, n);
        if q.evaluate(flow, heat, TYPE_ONE_PROBE_INDEX)?.max() < 0.0 {
            return Ok(d);
        }
    }
    Err(Error::Search(format!(
        "no d in [{start}, {TYPE_ONE_MAX_D}] makes the type-I quantity negative at the probe time"
    )))
}
