use std::path::Path;

use pswe_core::io::config::{parse_config, BedSource, InitialSpec, ThetaSource};
use proptest::prelude::*;

const FULL: &str = r#"
[mesh]
kind = "hex"
nx = 6
ny = 5
spacing = 2.0
origin = [1.0, 1.0]

[terrain]
plane = { slope = [0.01, 0.0], z0 = 1.0 }
theta = 0.7
boundary = "free"

[physics]
g = 9.81
alpha_p = 0.1
alpha_s = 0.02
viscosity = false
h_dry = 1e-9

[sources]
rain = 1e-6
infiltration = { kind = "constant", rate = 1e-7 }

[step]
safety = 0.8
bound = "cfl"
dt_max = 0.5
dt_min = 1e-10

[initial]
kind = "uniform_flow"
h = 0.5

[output]
t_end = 10.0
snapshot_every = 5.0
series_every = 1.0
"#;

/// Keys whose removal must make the file invalid.
const MANDATORY: [(&str, &str); 8] = [
    ("mesh", "nx"),
    ("mesh", "ny"),
    ("mesh", "spacing"),
    ("terrain", "plane"),
    ("terrain", "theta"),
    ("initial", "kind"),
    ("initial", "h"),
    ("output", "t_end"),
];

fn without(section: &str, key: &str) -> String {
    let mut doc: toml::Table = FULL.parse().unwrap();
    doc[section].as_table_mut().unwrap().remove(key).expect("key present");
    toml::to_string(&doc).unwrap()
}

fn all_keys() -> Vec<(String, String)> {
    let doc: toml::Table = FULL.parse().unwrap();
    doc.iter()
        .flat_map(|(s, t)| t.as_table().unwrap().keys().map(move |k| (s.clone(), k.clone())))
        .collect()
}

#[test]
fn full_config_parses() {
    let c = parse_config(FULL, Path::new(".")).unwrap();
    assert!(matches!(c.bed, BedSource::Plane { .. }));
    assert_eq!(c.theta, ThetaSource::Constant(0.7));
    assert_eq!(c.initial, InitialSpec::UniformFlow { h: 0.5 });
    let s = c.build().unwrap();
    assert_eq!(s.model.n_cells(), 30);
}

proptest! {
    #[test]
    fn deleting_a_mandatory_key_is_rejected(k in 0usize..MANDATORY.len()) {
        let (section, key) = MANDATORY[k];
        prop_assert!(parse_config(&without(section, key), Path::new(".")).is_err());
    }

    #[test]
    fn deleting_an_optional_key_is_accepted(k in 0usize..64) {
        let keys = all_keys();
        let (section, key) = &keys[k % keys.len()];
        prop_assume!(!MANDATORY.contains(&(section.as_str(), key.as_str())));
        parse_config(&without(section, key), Path::new(".")).unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected(section in 0usize..7, name in "[a-z]{3,8}_x") {
        let mut doc: toml::Table = FULL.parse().unwrap();
        let s = doc.keys().nth(section).unwrap().clone();
        doc[&s].as_table_mut().unwrap().insert(name, toml::Value::Integer(1));
        prop_assert!(parse_config(&toml::to_string(&doc).unwrap(), Path::new(".")).is_err());
    }
}

#[test]
fn every_mandatory_key_is_in_the_full_config() {
    let keys = all_keys();
    for (s, k) in MANDATORY {
        assert!(keys.iter().any(|(a, b)| a == s && b == k), "{s}.{k}");
    }
}
