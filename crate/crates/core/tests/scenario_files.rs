use std::path::Path;

use samadyn_core::model::RobotParams;
use samadyn_core::sim::Scenario;

fn repo(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn shipped_scenarios_load() {
    let mut n = 0;
    for entry in std::fs::read_dir(repo("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn benchmark_file_matches_builtin() {
    assert_eq!(Scenario::load(repo("scenarios/benchmark.json")).unwrap(), Scenario::benchmark());
}

#[test]
fn shipped_params_are_the_defaults() {
    let from_file = RobotParams::load(repo("params/default.json")).unwrap();
    assert_eq!(from_file.digest(), RobotParams::default_params().digest());
    assert!(from_file.validate().is_empty());
}
