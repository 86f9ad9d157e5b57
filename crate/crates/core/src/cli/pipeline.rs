use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{FlowSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::flow::{build_trajectory, type_one_constant, FlowConfig, FlowKind, FlowTrajectory};
use crate::harnack::{
    choose_type_one_d, identity_residual, monitor, path_harnack_check, HarnackQuantity,
    HarnackReport, IdentityId, MonitorOptions, PathHarnackCheck, QuantityKind, Tolerance,
    TypeOneFamily,
};
use crate::heat::{positivity_report, solve, HeatProblem, HeatTrajectory, PositivityReport};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    /// Replaces the constant part of the monitor tolerance.
    pub tolerance: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub id: String,
    pub kind: FlowKind,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub singular_time: Option<f64>,
    /// `d0` of `|Rm| ≤ d0/(T - t)` where known in closed form.
    pub type_one_d0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorEntry {
    pub heat: String,
    pub flow: String,
    pub series_file: String,
    pub report: HarnackReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub clock: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityEntry {
    pub id: IdentityId,
    pub heat: String,
    pub rows: Vec<IdentityRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEntry {
    pub heat: String,
    pub check: PathHarnackCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityEntry {
    pub heat: String,
    pub report: PositivityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub holds: bool,
    pub checks: usize,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: String,
    pub theorems: Vec<String>,
    pub assumptions: Vec<String>,
    pub config: ScenarioConfig,
    pub flows: Vec<FlowSummary>,
    pub monitors: Vec<MonitorEntry>,
    pub identities: Vec<IdentityEntry>,
    pub paths: Vec<PathEntry>,
    pub positivity: Vec<PositivityEntry>,
    pub summary: Summary,
    /// Seconds spent in [`run_config`]; never written to report files.
    #[serde(skip)]
    pub wall_clock: f64,
}

impl RunReport {
    pub fn holds(&self) -> bool {
        self.summary.holds
    }
}

/// Built trajectories of a scenario.
pub struct Solved {
    pub flows: BTreeMap<String, FlowTrajectory>,
    pub heats: BTreeMap<String, HeatTrajectory>,
}

pub(crate) fn flow_config(
    config: &ScenarioConfig,
    spec: &FlowSpec,
    grid: &std::sync::Arc<crate::geometry::Grid>,
    overrides: &Overrides,
) -> Result<FlowConfig> {
    let mut fc = FlowConfig::new(spec.flow_kind(config.background.n)?, grid.clone());
    if let Some(p) = spec.initial {
        fc = fc.with_initial_phi(p.sample(grid)?.into_values());
    }
    if let Some(t) = spec.t_end {
        fc = fc.with_t_end(t);
    }
    if let Some(k) = spec.steps {
        fc = fc.with_steps(k);
    }
    if let Some(c) = spec.cfl {
        fc = fc.with_cfl(c);
    }
    fc.max_steps = overrides.max_steps;
    Ok(fc)
}

/// Builds every flow and solves every heat problem of a validated scenario.
pub fn solve_scenario(
    config: &ScenarioConfig,
    overrides: &Overrides,
    steps: Option<&dyn Fn(&FlowSpec) -> Option<usize>>,
) -> Result<Solved> {
    let grid = config.grid()?;
    let mut flows = BTreeMap::new();
    for spec in &config.flows {
        let mut fc = flow_config(config, spec, &grid, overrides)?;
        if let Some(k) = steps.and_then(|f| f(spec)) {
            fc = fc.with_steps(k);
        }
        flows.insert(spec.id.clone(), build_trajectory(&fc)?);
    }
    let mut heats = BTreeMap::new();
    for spec in &config.heats {
        let flow = &flows[&spec.flow];
        let data = spec.data.sample(&grid)?;
        let problem = HeatProblem::new(spec.direction, spec.q, spec.a, data);
        heats.insert(spec.id.clone(), solve(&problem, flow)?);
    }
    Ok(Solved { flows, heats })
}

/// Heat indices of the probe fractions, kept away from both ends.
pub(crate) fn probe_indices(probes: &[f64], steps: usize) -> Vec<usize> {
    probes
        .iter()
        .map(|p| ((p * steps as f64).round() as usize).clamp(2, steps.saturating_sub(1)))
        .collect()
}

/// Runs a scenario end to end without touching the filesystem.
pub fn run_config(config: &ScenarioConfig, overrides: &Overrides) -> Result<RunReport> {
    let started = std::time::Instant::now();
    config.validate()?;
    let solved = solve_scenario(config, overrides, None)?;
    let tolerance = Tolerance {
        base: overrides.tolerance.unwrap_or(config.tolerance.base),
        coefficient: config.tolerance.coefficient,
    };
    let mut violations = Vec::new();
    let mut checks = 0;

    let flows = config
        .flows
        .iter()
        .map(|spec| {
            let t = &solved.flows[&spec.id];
            FlowSummary {
                id: spec.id.clone(),
                kind: t.kind(),
                steps: t.num_steps(),
                dt: t.dt(),
                t_end: t.t_end(),
                singular_time: t.singular_time(),
                type_one_d0: type_one_constant(t).ok().map(|b| b.d0),
            }
        })
        .collect();

    let mut monitors = Vec::new();
    let mut used_names = BTreeMap::<String, usize>::new();
    for spec in &config.monitors {
        let heat_spec = config.heat(&spec.heat)?;
        let flow = &solved.flows[&heat_spec.flow];
        let heat = &solved.heats[&spec.heat];
        let mut kind = config.quantity_kind(spec)?;
        let mut metadata = BTreeMap::new();
        if let (QuantityKind::H2RTypeOne { d } | QuantityKind::HRTypeOne { d }, None) = (&mut kind, spec.d) {
            let family = if matches!(spec.quantity, super::config::QuantityName::H2rTypeOne) {
                TypeOneFamily::H2R
            } else {
                TypeOneFamily::HR
            };
            *d = choose_type_one_d(family, flow, heat)? as f64;
            metadata.insert("d_searched".to_string(), 1.0);
        }
        if let QuantityKind::H2RTypeOne { d } | QuantityKind::HRTypeOne { d } = kind {
            metadata.insert("d".to_string(), d);
            if let Ok(b) = type_one_constant(flow) {
                metadata.insert("d0".to_string(), b.d0);
            }
        }
        let quantity = HarnackQuantity::new(kind, config.background.n);
        let options = MonitorOptions {
            tolerance,
            bound_shift: spec.bound_shift,
            window: spec.window.map(|[a, b]| (a, b)),
        };
        let mut report = monitor(&quantity, flow, heat, &options)?;
        report.metadata = metadata;
        checks += 1;
        if !report.holds() {
            violations.push(format!("monitor {} on '{}'", report.quantity, spec.heat));
        }
        let count = used_names.entry(report.quantity.clone()).or_insert(0);
        *count += 1;
        let series_file = if *count == 1 {
            format!("series_{}.csv", report.quantity)
        } else {
            format!("series_{}_{}.csv", report.quantity, spec.heat)
        };
        monitors.push(MonitorEntry {
            heat: spec.heat.clone(),
            flow: heat_spec.flow.clone(),
            series_file,
            report,
        });
    }

    let mut identities = Vec::new();
    for spec in &config.identities {
        let heat_spec = config.heat(&spec.heat)?;
        let flow = &solved.flows[&heat_spec.flow];
        let heat = &solved.heats[&spec.heat];
        let rows = probe_indices(&spec.probes, heat.num_steps())
            .into_iter()
            .map(|k| {
                Ok(IdentityRow {
                    clock: heat.clock(k),
                    max_residual: identity_residual(spec.id, flow, heat, k)?.max_abs(),
                })
            })
            .collect::<Result<_>>()?;
        identities.push(IdentityEntry { id: spec.id, heat: spec.heat.clone(), rows });
    }

    let mut paths = Vec::new();
    for spec in &config.paths {
        let heat_spec = config.heat(&spec.heat)?;
        let flow = &solved.flows[&heat_spec.flow];
        let heat = &solved.heats[&spec.heat];
        let check = path_harnack_check(
            spec.theorem,
            flow,
            heat,
            spec.x1,
            spec.t1,
            spec.x2,
            spec.t2,
            config.tolerance.path,
        )?;
        checks += 1;
        if !check.holds {
            violations.push(format!("path check {:?} on '{}'", spec.theorem, spec.heat));
        }
        paths.push(PathEntry { heat: spec.heat.clone(), check });
    }

    let mut positivity = Vec::new();
    for spec in config.heats.iter().filter(|h| h.check_bounds) {
        let report = positivity_report(&solved.heats[&spec.id]);
        checks += 1;
        if !report.holds() {
            violations.push(format!("bounds on f for '{}'", spec.id));
        }
        positivity.push(PositivityEntry { heat: spec.id.clone(), report });
    }

    let mut assumptions = Vec::new();
    if config.identities.iter().any(|i| i.id == IdentityId::PEvolution) {
        assumptions.push(
            "p-evolution: the coefficient of -2(Δv - |∇v|²) is taken as 1".to_string(),
        );
    }
    if config.monitors.iter().any(|m| m.d.is_none() && m.quantity.is_type_one()) {
        assumptions.push(
            "type-I d: smallest integer with sup H < 0 at the fifth schedule point, \
             τ measured from the end of the simulated flow"
                .to_string(),
        );
    }

    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: config.name.clone(),
        theorems: config.theorems.clone(),
        assumptions,
        config: config.clone(),
        flows,
        monitors,
        identities,
        paths,
        positivity,
        summary: Summary { holds: violations.is_empty(), checks, violations },
        wall_clock: started.elapsed().as_secs_f64(),
    })
}

impl super::config::QuantityName {
    pub fn is_type_one(self) -> bool {
        matches!(
            self,
            super::config::QuantityName::H2rTypeOne | super::config::QuantityName::HrTypeOne
        )
    }
}

/// Time series of one monitor: `time,sup_quantity,bound,margin`.
pub fn series_csv(report: &HarnackReport) -> String {
    let mut out = String::from("time,sup_quantity,bound,margin\n");
    for r in &report.records {
        let _ = writeln!(out, "{},{},{},{}", r.time, r.sup, r.bound, r.margin);
    }
    out
}

/// Human-readable summary.
pub fn report_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", report.scenario);
    let _ = writeln!(out, "report schema: {}", report.schema_version);
    if !report.theorems.is_empty() {
        let _ = writeln!(out, "exercises: {}", report.theorems.join(", "));
    }
    for a in &report.assumptions {
        let _ = writeln!(out, "assumption: {a}");
    }
    let _ = writeln!(out);
    for f in &report.flows {
        let _ = writeln!(
            out,
            "flow {}: {:?}, {} steps, dt = {:.6e}, t_end = {}",
            f.id, f.kind, f.steps, f.dt, f.t_end
        );
    }
    if !report.monitors.is_empty() {
        let _ = writeln!(out, "\nmonitors:");
    }
    for m in &report.monitors {
        let r = &m.report;
        let status = if r.holds() { "holds" } else { "VIOLATED" };
        let _ = write!(
            out,
            "  {:<24} heat {:<10} {:>6} records  sup {:>14.6e}  min margin {:>14.6e}  tol {:.2e}  {status}",
            r.quantity,
            m.heat,
            r.records.len(),
            r.sup(),
            r.min_margin(),
            r.tolerance
        );
        for (k, v) in &r.metadata {
            let _ = write!(out, "  {k} = {v}");
        }
        let _ = writeln!(out);
        for c in &r.side_checks {
            let _ = writeln!(
                out,
                "    side condition {}: worst margin {:.6e} {}",
                c.name,
                c.worst_margin,
                if c.holds { "holds" } else { "VIOLATED" }
            );
        }
    }
    if !report.identities.is_empty() {
        let _ = writeln!(out, "\nidentity residuals:");
    }
    for i in &report.identities {
        for row in &i.rows {
            let _ = writeln!(
                out,
                "  {:<24} heat {:<10} clock {:>10.6}  max |residual| {:.6e}",
                i.id.name(),
                i.heat,
                row.clock,
                row.max_residual
            );
        }
    }
    if !report.paths.is_empty() {
        let _ = writeln!(out, "\npath checks:");
    }
    for p in &report.paths {
        let c = &p.check;
        let _ = writeln!(
            out,
            "  {:?} heat {} ({}, {}) -> ({}, {}): lhs {:.6e} rhs {:.6e} slack {:.6e}; \
             reweighted lhs {:.6e} slack {:.6e}  {}",
            c.theorem,
            p.heat,
            c.x1,
            c.t1,
            c.x2,
            c.t2,
            c.lhs,
            c.rhs,
            c.slack,
            c.lhs_reweighted,
            c.slack_reweighted,
            if c.holds { "holds" } else { "VIOLATED" }
        );
    }
    if !report.positivity.is_empty() {
        let _ = writeln!(out, "\nbounds on f:");
    }
    for p in &report.positivity {
        let r = &p.report;
        let _ = writeln!(
            out,
            "  heat {}: inf f0 {:.6e}, min f {:.6e}, max f {:.6e}, worst drop of min f {:.3e}  {}",
            p.heat,
            r.inf_initial,
            r.min_f,
            r.max_f,
            r.worst_min_decrease,
            if r.holds() { "holds" } else { "VIOLATED" }
        );
    }
    let _ = writeln!(
        out,
        "\nverdict: {} ({} checks{})",
        if report.summary.holds { "all hold" } else { "violation" },
        report.summary.checks,
        if report.summary.violations.is_empty() {
            String::new()
        } else {
            format!("; violated: {}", report.summary.violations.join(", "))
        }
    );
    out
}

/// Writes `report.json`, `report.txt` and one CSV per monitor into `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let write = |name: &str, contents: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
    };
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Io(format!("cannot serialize report: {e}")))?;
    write("report.json", &(json + "\n"))?;
    write("report.txt", &report_text(report))?;
    for m in &report.monitors {
        write(&m.series_file, &series_csv(&m.report))?;
    }
    Ok(())
}
