//! Built-in scenarios.

use crate::sim::Scenario;

pub const CASE1_TOML: &str = include_str!("../../../presets/case1.toml");
pub const CASE2_TOML: &str = include_str!("../../../presets/case2.toml");
pub const CASE3_TOML: &str = include_str!("../../../presets/case3.toml");

/// Looks up a preset by name (`case1`, `case2`, `case3`).
pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "case1" => Some(CASE1_TOML),
        "case2" => Some(CASE2_TOML),
        "case3" => Some(CASE3_TOML),
        _ => None,
    }
}

pub fn case1() -> Scenario {
    Scenario::from_toml_str(CASE1_TOML).expect("case1 preset parses")
}

pub fn case2() -> Scenario {
    Scenario::from_toml_str(CASE2_TOML).expect("case2 preset parses")
}

pub fn case3() -> Scenario {
    Scenario::from_toml_str(CASE3_TOML).expect("case3 preset parses")
}
