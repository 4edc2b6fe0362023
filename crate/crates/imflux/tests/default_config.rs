//! The commented example configuration shipped in docs/ must stay in
//! lockstep with the built-in defaults, or `imflux print-config` and the
//! documentation drift apart.

use imflux::scenario::ScenarioConfig;

#[test]
fn documented_default_scenario_matches_builtin_defaults() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/scenario.default.toml"
    );
    let text = std::fs::read_to_string(path).expect("docs/scenario.default.toml must exist");
    let documented = ScenarioConfig::from_toml_str(&text).expect("documented config must parse");
    let builtin = ScenarioConfig::default();
    assert_eq!(
        documented.to_toml_string().unwrap(),
        builtin.to_toml_string().unwrap(),
        "docs/scenario.default.toml no longer matches ScenarioConfig::default()"
    );
}

#[test]
fn documented_default_validates() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/scenario.default.toml"
    );
    let text = std::fs::read_to_string(path).unwrap();
    let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
    cfg.validate().expect("documented config must validate");
}
