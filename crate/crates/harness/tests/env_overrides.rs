//! Kept in its own binary: it mutates the process environment.

use std::path::{Path, PathBuf};

use l1ilc_harness::scenario::{OUT_ENV, SEED_ENV};
use l1ilc_harness::ScenarioConfig;

#[test]
fn environment_overrides_seed_and_output() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/slow_l1.toml");
    std::env::remove_var(SEED_ENV);
    std::env::remove_var(OUT_ENV);
    let cfg = ScenarioConfig::load(&path).unwrap();
    assert_eq!(cfg.seed, 1);
    assert_eq!(cfg.default_out_dir(), PathBuf::from("results/slow_l1"));

    std::env::set_var(SEED_ENV, "99");
    std::env::set_var(OUT_ENV, "/tmp/elsewhere");
    let cfg = ScenarioConfig::load(&path).unwrap();
    assert_eq!(cfg.seed, 99);
    assert_eq!(cfg.default_out_dir(), PathBuf::from("/tmp/elsewhere"));

    std::env::set_var(SEED_ENV, "many");
    assert!(ScenarioConfig::load(&path).is_err());
    std::env::remove_var(SEED_ENV);
    std::env::remove_var(OUT_ENV);
}
