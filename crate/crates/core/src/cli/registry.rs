use super::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Scenario files shipped with the binary, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("identities-torus", include_str!("../../scenarios/identities-torus.toml")),
    ("identities-torus-constant", include_str!("../../scenarios/identities-torus-constant.toml")),
    ("identity-heps-sphere", include_str!("../../scenarios/identity-heps-sphere.toml")),
    ("sphere-eps-family", include_str!("../../scenarios/sphere-eps-family.toml")),
    ("shrinking-sphere-h2r", include_str!("../../scenarios/shrinking-sphere-h2r.toml")),
    ("torus-h2r", include_str!("../../scenarios/torus-h2r.toml")),
    ("torus3-h2r", include_str!("../../scenarios/torus3-h2r.toml")),
    ("shrinking-sphere-type-one", include_str!("../../scenarios/shrinking-sphere-type-one.toml")),
    ("shrinking-sphere-hr", include_str!("../../scenarios/shrinking-sphere-hr.toml")),
    ("torus-hr", include_str!("../../scenarios/torus-hr.toml")),
    ("torus-p-halfwindow", include_str!("../../scenarios/torus-p-halfwindow.toml")),
    ("torus-path", include_str!("../../scenarios/torus-path.toml")),
    ("shrinking-sphere-path", include_str!("../../scenarios/shrinking-sphere-path.toml")),
    ("torus-grad-forward", include_str!("../../scenarios/torus-grad-forward.toml")),
    ("torus-grad-backward", include_str!("../../scenarios/torus-grad-backward.toml")),
    ("torus-constant", include_str!("../../scenarios/torus-constant.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn load_bundled(name: &str) -> Result<ScenarioConfig> {
    let text = bundled(name).ok_or_else(|| Error::Config(format!("no bundled scenario named '{name}'")))?;
    ScenarioConfig::from_toml(text)
}

/// One line per bundled scenario: name, exercised results, description.
pub fn list_scenarios() -> String {
    let mut out = String::new();
    for (name, text) in BUNDLED {
        let config = ScenarioConfig::from_toml(text).expect("bundled scenarios parse");
        out.push_str(&format!("{:<28} {:<20} {}\n", name, config.theorems.join(","), config.description));
    }
    out
}
