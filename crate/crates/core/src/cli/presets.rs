//! Built-in scenarios.

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

macro_rules! preset {
    ($name:literal) => {
        (
            $name,
            include_str!(concat!("../../presets/", $name, ".cfg")),
        )
    };
}

pub const PRESETS: &[(&str, &str)] = &[
    preset!("fig1-converge"),
    preset!("fig1-no-drag"),
    preset!("table1-defaults"),
    preset!("fig2-step"),
    preset!("fig3-disturbance"),
    preset!("fig4-desat"),
    preset!("fig5-square"),
    preset!("fig5-line"),
    preset!("fig6-station-keep"),
    preset!("k-sweep"),
    preset!("ten-turns"),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::config(format!("no preset named `{name}`")))
}

pub fn load(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::parse(source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for name in names() {
            let cfg = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
            for p in cfg.points().unwrap() {
                p.scenario
                    .validate()
                    .unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
        assert!(load("nope").is_err());
    }
}
