//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! schema_version = 1
//! name = "torus-constant"
//! theorems = ["thm1.5"]
//!
//! [background]
//! kind = "flat-torus"      # or "round-sphere", "rot-sym-sphere"
//! n = 2
//! points = 64
//!
//! [[flow]]
//! id = "g"
//! kind = "static-flat"     # or "shrinking-sphere", "epsilon-surface"
//! t_end = 1.0
//!
//! [[heat]]
//! id = "f"
//! flow = "g"
//! direction = "forward-in-tau"
//! q = 2.0
//! data = { profile = "constant", value = 0.5 }
//!
//! [[monitor]]
//! quantity = "h2r"
//! heat = "f"
//! ```
//!
//! See the README for every table and key.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowKind;
use crate::geometry::{
    ricci_eigenvalue_values, scalar_curvature_values, BackgroundKind, Grid, MetricState,
    ScalarField,
};
use crate::harnack::{IdentityId, PathTheorem, QuantityKind};
use crate::heat::Direction;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    /// Labels of the results the scenario exercises.
    #[serde(default)]
    pub theorems: Vec<String>,
    #[serde(default)]
    pub description: String,
    pub background: BackgroundSpec,
    #[serde(rename = "flow")]
    pub flows: Vec<FlowSpec>,
    #[serde(rename = "heat", default)]
    pub heats: Vec<HeatSpec>,
    #[serde(rename = "monitor", default)]
    pub monitors: Vec<MonitorSpec>,
    #[serde(rename = "identity", default)]
    pub identities: Vec<IdentitySpec>,
    #[serde(rename = "path", default)]
    pub paths: Vec<PathSpec>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub kind: BackgroundKind,
    pub n: usize,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowName {
    EpsilonSurface,
    ShrinkingSphere,
    StaticFlat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub id: String,
    pub kind: FlowName,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub cfl: Option<f64>,
    /// Initial conformal factor φ for the ε-flow; zero when absent.
    #[serde(default)]
    pub initial: Option<Profile>,
}

impl FlowSpec {
    pub fn flow_kind(&self, n: usize) -> Result<FlowKind> {
        match (self.kind, self.epsilon) {
            (FlowName::EpsilonSurface, Some(epsilon)) => Ok(FlowKind::EpsilonSurface { epsilon }),
            (FlowName::EpsilonSurface, None) => {
                Err(Error::Config(format!("flow '{}' needs an epsilon", self.id)))
            }
            (_, Some(_)) => Err(Error::Config(format!(
                "flow '{}': epsilon only applies to the epsilon-surface flow",
                self.id
            ))),
            (FlowName::ShrinkingSphere, None) => Ok(FlowKind::ShrinkingSphere { n }),
            (FlowName::StaticFlat, None) => Ok(FlowKind::StaticFlat),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSpec {
    pub id: String,
    pub flow: String,
    pub direction: Direction,
    pub q: f64,
    #[serde(default = "one")]
    pub a: f64,
    /// Initial data (forward) or terminal data (backward) for `f`.
    pub data: Profile,
    /// Also check `inf f₀ ≤ f < 1` and monotone `min f` over the run.
    #[serde(default)]
    pub check_bounds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityName {
    Heps,
    H2r,
    H2rTypeOne,
    Hr,
    HrTypeOne,
    PShifted,
    GradForward,
    GradBackward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    pub quantity: QuantityName,
    pub heat: String,
    /// `[lo, hi]` on the quantity's own clock; the validity window when absent.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub bound_shift: f64,
    /// Type-I constant; searched for when absent.
    #[serde(default)]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySpec {
    pub id: IdentityId,
    pub heat: String,
    /// Probe positions as fractions of the schedule, each in (0, 1).
    #[serde(default = "default_probes")]
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub theorem: PathTheorem,
    pub heat: String,
    pub x1: f64,
    pub t1: f64,
    pub x2: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_base")]
    pub base: f64,
    /// Coefficient of h² added to `base`.
    #[serde(default = "one")]
    pub coefficient: f64,
    /// Allowed negative slack of path checks.
    #[serde(default = "default_base")]
    pub path: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self { base: default_base(), coefficient: 1.0, path: default_base() }
    }
}

fn one() -> f64 {
    1.0
}

fn default_base() -> f64 {
    1e-6
}

fn default_probes() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    #[default]
    Cos,
    Sin,
}

/// Named analytic profiles in the grid coordinate (θ or x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `offset + amplitude · cos(mode · x)`
    CosMode {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
    /// `offset + amplitude · sin(mode · x)`
    SinMode {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
    /// `exp(-(offset + amplitude · basis(mode · x)))`
    ExpAffine {
        offset: f64,
        amplitude: f64,
        #[serde(default)]
        basis: Basis,
        #[serde(default = "one_u32")]
        mode: u32,
    },
}

fn one_u32() -> u32 {
    1
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        let basis = |b: Basis, m: u32| match b {
            Basis::Cos => (m as f64 * x).cos(),
            Basis::Sin => (m as f64 * x).sin(),
        };
        match *self {
            Profile::Constant { value } => value,
            Profile::CosMode { offset, amplitude, mode } => offset + amplitude * basis(Basis::Cos, mode),
            Profile::SinMode { offset, amplitude, mode } => offset + amplitude * basis(Basis::Sin, mode),
            Profile::ExpAffine { offset, amplitude, basis: b, mode } => {
                (-(offset + amplitude * basis(b, mode))).exp()
            }
        }
    }

    fn uses_sine(&self) -> bool {
        matches!(
            self,
            Profile::SinMode { .. } | Profile::ExpAffine { basis: Basis::Sin, .. }
        )
    }

    /// Samples the profile, rejecting forms that are not smooth on the grid.
    pub fn sample(&self, grid: &std::sync::Arc<Grid>) -> Result<ScalarField> {
        if grid.kind().is_sphere() && self.uses_sine() {
            return Err(Error::Config(
                "sine profiles are not smooth at the poles; use a cosine form on spheres".into(),
            ));
        }
        let field = ScalarField::from_fn(grid.clone(), |x| self.eval(x));
        if !field.is_finite() {
            return Err(Error::Config("profile produced non-finite values".into()));
        }
        Ok(field)
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("cannot parse scenario: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    pub fn flow(&self, id: &str) -> Result<&FlowSpec> {
        self.flows
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::Config(format!("unknown flow '{id}'")))
    }

    pub fn heat(&self, id: &str) -> Result<&HeatSpec> {
        self.heats
            .iter()
            .find(|h| h.id == id)
            .ok_or_else(|| Error::Config(format!("unknown heat problem '{id}'")))
    }

    pub fn grid(&self) -> Result<std::sync::Arc<Grid>> {
        Grid::new(self.background.kind, self.background.n, self.background.points)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks references, equation parameters and the hypotheses each
    /// monitor, identity and path check relies on.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        unique_ids(self.flows.iter().map(|f| f.id.as_str()), "flow")?;
        unique_ids(self.heats.iter().map(|h| h.id.as_str()), "heat problem")?;
        if self.flows.is_empty() {
            return Err(Error::Config("a scenario needs at least one [[flow]]".into()));
        }
        let tol = &self.tolerance;
        if !(tol.base >= 0.0 && tol.coefficient >= 0.0 && tol.path >= 0.0) {
            return Err(Error::Config("tolerances must be nonnegative".into()));
        }
        let facts: Vec<FlowFacts> = self
            .flows
            .iter()
            .map(|f| FlowFacts::new(f, &grid))
            .collect::<Result<_>>()?;
        let facts_of = |id: &str| -> Result<&FlowFacts> {
            let i = self.flows.iter().position(|f| f.id == id).ok_or_else(|| {
                Error::Config(format!("unknown flow '{id}'"))
            })?;
            Ok(&facts[i])
        };
        for h in &self.heats {
            facts_of(&h.flow)?;
            let f0 = h.data.sample(&grid)?;
            if f0.min() <= 0.0 {
                return Err(Error::Config(format!(
                    "heat problem '{}' needs positive data, min f0 = {}",
                    h.id,
                    f0.min()
                )));
            }
        }
        for m in &self.monitors {
            let heat = self.heat(&m.heat)?;
            let facts = facts_of(&heat.flow)?;
            let kind = self.quantity_kind(m)?;
            let label = format!("monitor '{:?}' on '{}'", m.quantity, m.heat).to_lowercase();
            check_equation(&label, heat, expected_equation(kind, facts))?;
            check_quantity_hypotheses(&label, kind, facts, heat, &grid)?;
            if let Some([lo, hi]) = m.window {
                if !(hi > lo && lo >= 0.0) {
                    return Err(Error::Config(format!("{label}: window [{lo}, {hi}] is empty")));
                }
            }
        }
        for i in &self.identities {
            let heat = self.heat(&i.heat)?;
            let facts = facts_of(&heat.flow)?;
            let label = format!("identity '{}' on '{}'", i.id.name(), i.heat);
            let (direction, q) = match i.id {
                IdentityId::HepsEvolution => {
                    if !matches!(facts.kind, FlowKind::EpsilonSurface { .. }) {
                        return Err(Error::Config(format!(
                            "{label} needs the ε-flow on a conformal surface"
                        )));
                    }
                    (Direction::ForwardInT, facts.kind.epsilon().unwrap_or(1.0))
                }
                other => {
                    if !facts.kind.is_ricci_flow() {
                        return Err(Error::Config(format!("{label} needs a solution to the Ricci flow")));
                    }
                    match other {
                        IdentityId::H2REvolution => (Direction::ForwardInTau, 2.0),
                        IdentityId::HREvolution | IdentityId::PEvolution => (Direction::ForwardInTau, 1.0),
                        IdentityId::GradForwardEvolution => (Direction::ForwardInT, 0.0),
                        _ => (Direction::ForwardInTau, 0.0),
                    }
                }
            };
            check_equation(&label, heat, (direction, q, 1.0))?;
            if i.probes.is_empty() || i.probes.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
                return Err(Error::Config(format!("{label}: probes must lie in (0, 1)")));
            }
        }
        for p in &self.paths {
            let heat = self.heat(&p.heat)?;
            let facts = facts_of(&heat.flow)?;
            let label = format!("path check on '{}'", p.heat);
            if !facts.kind.is_ricci_flow() {
                return Err(Error::Config(format!("{label} needs a solution to the Ricci flow")));
            }
            let q = match p.theorem {
                PathTheorem::TwoR => 2.0,
                PathTheorem::OneR => {
                    require_nonnegative_r(&label, facts)?;
                    1.0
                }
            };
            check_equation(&label, heat, (Direction::ForwardInTau, q, 1.0))?;
            if !(p.t1 >= 0.0 && p.t2 > p.t1) {
                return Err(Error::Config(format!("{label} needs 0 <= t1 < t2")));
            }
        }
        Ok(())
    }

    pub fn quantity_kind(&self, m: &MonitorSpec) -> Result<QuantityKind> {
        let heat = self.heat(&m.heat)?;
        let flow = self.flow(&heat.flow)?;
        let kind = match m.quantity {
            QuantityName::Heps => QuantityKind::Heps {
                epsilon: match flow.flow_kind(self.background.n)? {
                    FlowKind::EpsilonSurface { epsilon } => epsilon,
                    _ => 1.0,
                },
            },
            QuantityName::H2r => QuantityKind::H2R,
            QuantityName::H2rTypeOne => QuantityKind::H2RTypeOne { d: m.d.unwrap_or(f64::NAN) },
            QuantityName::Hr => QuantityKind::HR,
            QuantityName::HrTypeOne => QuantityKind::HRTypeOne { d: m.d.unwrap_or(f64::NAN) },
            QuantityName::PShifted => QuantityKind::PShifted,
            QuantityName::GradForward => QuantityKind::GradForward,
            QuantityName::GradBackward => QuantityKind::GradBackward,
        };
        if m.d.is_some()
            && !matches!(m.quantity, QuantityName::H2rTypeOne | QuantityName::HrTypeOne)
        {
            return Err(Error::Config(format!(
                "monitor on '{}': d only applies to type-I quantities",
                m.heat
            )));
        }
        Ok(kind)
    }
}

fn unique_ids<'a>(ids: impl Iterator<Item = &'a str>, what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Config(format!("duplicate {what} id '{id}'")));
        }
    }
    Ok(())
}

/// Curvature facts about a configured flow at t = 0.
struct FlowFacts {
    kind: FlowKind,
    min_r: f64,
    min_ricci: f64,
}

impl FlowFacts {
    fn new(spec: &FlowSpec, grid: &std::sync::Arc<Grid>) -> Result<Self> {
        let kind = spec.flow_kind(grid.dim())?;
        let expected = match kind {
            FlowKind::EpsilonSurface { .. } => BackgroundKind::RotSymSphere,
            FlowKind::ShrinkingSphere { .. } => BackgroundKind::RoundSphere,
            FlowKind::StaticFlat => BackgroundKind::FlatTorus,
        };
        if grid.kind() != expected {
            return Err(Error::Config(format!(
                "flow '{}' runs on a {expected:?} background, not {:?}",
                spec.id,
                grid.kind()
            )));
        }
        if spec.initial.is_some() && expected != BackgroundKind::RotSymSphere {
            return Err(Error::Config(format!(
                "flow '{}': an initial conformal factor only applies to the epsilon-surface flow",
                spec.id
            )));
        }
        let m = match kind {
            FlowKind::EpsilonSurface { .. } => {
                let phi = match spec.initial {
                    Some(p) => p.sample(grid)?.into_values(),
                    None => vec![0.0; grid.len()],
                };
                MetricState::conformal(grid.clone(), phi, 0.0)?
            }
            FlowKind::ShrinkingSphere { .. } => MetricState::scaled(grid.clone(), 1.0, 0.0)?,
            FlowKind::StaticFlat => MetricState::flat(grid.clone(), 0.0)?,
        };
        let min = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
        Ok(Self {
            kind,
            min_r: min(scalar_curvature_values(&m)),
            min_ricci: min(ricci_eigenvalue_values(&m)),
        })
    }
}

fn expected_equation(kind: QuantityKind, facts: &FlowFacts) -> (Direction, f64, f64) {
    match kind {
        QuantityKind::Heps { .. } => (Direction::ForwardInT, facts.kind.epsilon().unwrap_or(1.0), 1.0),
        QuantityKind::H2R | QuantityKind::H2RTypeOne { .. } => (Direction::ForwardInTau, 2.0, 1.0),
        QuantityKind::HR | QuantityKind::HRTypeOne { .. } | QuantityKind::PShifted => {
            (Direction::ForwardInTau, 1.0, 1.0)
        }
        QuantityKind::GradForward => (Direction::ForwardInT, 0.0, 1.0),
        QuantityKind::GradBackward => (Direction::ForwardInTau, 0.0, 1.0),
    }
}

fn check_equation(label: &str, heat: &HeatSpec, (direction, q, a): (Direction, f64, f64)) -> Result<()> {
    if heat.direction != direction || heat.q != q || heat.a != a {
        return Err(Error::Config(format!(
            "{label} needs a {direction:?} heat equation with q = {q}, a = {a}; \
             '{}' is {:?} with q = {}, a = {}",
            heat.id, heat.direction, heat.q, heat.a
        )));
    }
    Ok(())
}

fn require_ricci_flow(label: &str, facts: &FlowFacts) -> Result<()> {
    if facts.kind.is_ricci_flow() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{label} requires a solution to the Ricci flow; {:?} is not one",
            facts.kind
        )))
    }
}

fn require_nonnegative_r(label: &str, facts: &FlowFacts) -> Result<()> {
    if facts.min_r < 0.0 {
        return Err(Error::Config(format!(
            "{label} requires a closed manifold with nonnegative scalar curvature, \
             but min R = {:.6e} at t = 0",
            facts.min_r
        )));
    }
    Ok(())
}

fn require_type_one(label: &str, facts: &FlowFacts) -> Result<()> {
    match facts.kind {
        FlowKind::ShrinkingSphere { .. } | FlowKind::StaticFlat => Ok(()),
        other => Err(Error::Config(format!(
            "{label} requires a type-I Ricci flow (|Rm| <= d0/(T - t)); {other:?} is not known to be one"
        ))),
    }
}

fn require_f_below_one(label: &str, heat: &HeatSpec, grid: &std::sync::Arc<Grid>) -> Result<()> {
    let sup = heat.data.sample(grid)?.max();
    if sup >= 1.0 {
        return Err(Error::Config(format!(
            "{label} requires a positive solution with f < 1, but max f0 = {sup}"
        )));
    }
    Ok(())
}

fn check_quantity_hypotheses(
    label: &str,
    kind: QuantityKind,
    facts: &FlowFacts,
    heat: &HeatSpec,
    grid: &std::sync::Arc<Grid>,
) -> Result<()> {
    match kind {
        QuantityKind::Heps { epsilon } => {
            let on_surface = match facts.kind {
                FlowKind::EpsilonSurface { .. } => true,
                FlowKind::ShrinkingSphere { n } => n == 2,
                FlowKind::StaticFlat => false,
            };
            if !on_surface {
                return Err(Error::Config(format!("{label} requires the ε-flow on a closed surface")));
            }
            if !(0.0..=1.0).contains(&epsilon) {
                return Err(Error::Config(format!("{label} requires ε in [0, 1], got {epsilon}")));
            }
            if facts.min_r <= 0.0 {
                return Err(Error::Config(format!(
                    "{label} requires a closed surface with R > 0, but min R = {:.6e} at t = 0",
                    facts.min_r
                )));
            }
        }
        QuantityKind::H2R | QuantityKind::PShifted => require_ricci_flow(label, facts)?,
        QuantityKind::H2RTypeOne { .. } => {
            require_ricci_flow(label, facts)?;
            require_type_one(label, facts)?;
        }
        QuantityKind::HR => {
            require_ricci_flow(label, facts)?;
            require_nonnegative_r(label, facts)?;
        }
        QuantityKind::HRTypeOne { .. } => {
            require_ricci_flow(label, facts)?;
            require_type_one(label, facts)?;
            require_nonnegative_r(label, facts)?;
        }
        QuantityKind::GradForward => {
            require_ricci_flow(label, facts)?;
            require_f_below_one(label, heat, grid)?;
        }
        QuantityKind::GradBackward => {
            require_ricci_flow(label, facts)?;
            require_f_below_one(label, heat, grid)?;
            if facts.min_ricci < -0.25 {
                return Err(Error::Config(format!(
                    "{label} requires Ricci curvature >= -K with 0 <= K <= 1/4, \
                     but the smallest Ricci eigenvalue is {:.6e}",
                    facts.min_ricci
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = r#"
        schema_version = 1
        name = "t"
        [background]
        kind = "flat-torus"
        n = 2
        points = 16
        [[flow]]
        id = "g"
        kind = "static-flat"
        t_end = 0.5
        [[heat]]
        id = "f"
        flow = "g"
        direction = "forward-in-tau"
        q = 2.0
        data = { profile = "exp-affine", offset = 1.5, amplitude = 0.3, basis = "sin" }
        [[monitor]]
        quantity = "h2r"
        heat = "f"
    "#;

    #[test]
    fn parses_and_validates() {
        let c = ScenarioConfig::from_toml(TORUS).unwrap();
        c.validate().unwrap();
        assert_eq!(c.heats[0].a, 1.0);
        assert_eq!(c.tolerance, ToleranceSpec::default());
        let back = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = TORUS.replace("points = 16", "points = 16\ncolour = 3");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn wrong_equation_is_rejected() {
        let text = TORUS.replace("q = 2.0", "q = 1.0");
        let err = ScenarioConfig::from_toml(&text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("q = 2"));
    }

    #[test]
    fn sine_profiles_are_rejected_on_spheres() {
        let g = Grid::new(BackgroundKind::RoundSphere, 2, 16).unwrap();
        let p = Profile::SinMode { offset: 0.5, amplitude: 0.1, mode: 1 };
        assert!(p.sample(&g).is_err());
    }

    #[test]
    fn negative_curvature_blocks_hr() {
        let text = r#"
            schema_version = 1
            name = "neg"
            [background]
            kind = "rot-sym-sphere"
            n = 2
            points = 32
            [[flow]]
            id = "g"
            kind = "epsilon-surface"
            epsilon = 1.0
            t_end = 0.01
            initial = { profile = "cos-mode", amplitude = 0.9, mode = 2 }
            [[heat]]
            id = "f"
            flow = "g"
            direction = "forward-in-tau"
            q = 1.0
            data = { profile = "constant", value = 0.5 }
            [[monitor]]
            quantity = "hr"
            heat = "f"
        "#;
        let err = ScenarioConfig::from_toml(text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("nonnegative scalar curvature"), "{err}");
    }

    #[test]
    fn gradient_estimates_need_f_below_one() {
        let text = TORUS
            .replace("q = 2.0", "q = 0.0")
            .replace("\"h2r\"", "\"grad-backward\"")
            .replace("offset = 1.5", "offset = -0.1");
        let err = ScenarioConfig::from_toml(&text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("f < 1"), "{err}");
    }
}
