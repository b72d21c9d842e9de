//! Committed scenario files, embedded at build time.

use crate::config::ScenarioConfig;
use crate::error::ConfigError;

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, TOML text)` of every preset.
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".toml")))),*
        ];
    };
}

presets!(
    "fig1",
    "fig2",
    "fig2_offset",
    "fig3",
    "fig7a",
    "fig7b",
    "fig7c",
    "fig7d",
    "fig7e",
    "fig8a",
    "fig8b",
    "surrogate_a",
    "surrogate_b",
    "surrogate_c",
    "surrogate_cold",
);

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let t = text(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_owned()))?;
    ScenarioConfig::from_toml_str(t).map_err(|e| ConfigError::invalid(format!("preset {name}"), e.to_string()))
}
