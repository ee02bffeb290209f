use std::path::{Path, PathBuf};

use l1ilc_core::experiment::{Framework, Trajectory, TimingLaw};
use l1ilc_harness::scenario::{ControllerConfig, InitConfig, PlantSource, PresetPlant};
use l1ilc_harness::{HarnessError, ScenarioConfig};

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn shipped_scenarios_load_and_validate() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if path.extension().is_none_or(|e| e != "toml") || name == "l1_controller.toml" {
            continue;
        }
        let cfg = ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(format!("{}.toml", cfg.name), name);
        count += 1;
    }
    assert!(count >= 10);
}

#[test]
fn wind_schedule_switches_at_iteration_eleven() {
    let cfg = ScenarioConfig::load(&scenario_dir().join("wind_pd.toml")).unwrap();
    assert_eq!(cfg.framework().unwrap(), Framework::Pd);
    assert!(cfg.disturbance_at(10).wind.is_empty());
    let gust = cfg.disturbance_at(11);
    assert_eq!(gust.wind.len(), 1);
    assert_eq!(gust.wind[0].axis, 1);
    // Fields left out of a schedule entry keep their defaults.
    assert_eq!(gust.l, cfg.disturbance.l);
    assert_eq!(cfg.disturbance_at(20), gust);
}

#[test]
fn controller_defaults_come_from_the_preset() {
    let cfg = ScenarioConfig::load(&scenario_dir().join("fast_l1.toml")).unwrap();
    let exp = cfg.experiment().unwrap();
    let l1ilc_core::experiment::ControllerSpec::L1(axes) = exp.controller else { panic!() };
    assert!(axes.iter().all(|a| a.omega == 10.0 && a.gamma == 5000.0));
    assert_eq!(axes[2].m, 1.75);
}

#[test]
fn sim_plant_is_perturbed_and_noiseless() {
    let cfg = ScenarioConfig::load(&scenario_dir().join("sim_l1.toml")).unwrap();
    let plant = cfg.plant.resolve().unwrap();
    let nominal = l1ilc_core::plant::slow_preset();
    assert_eq!(plant.vel_noise_std, 0.0);
    assert_eq!(plant.pos_noise_std, 0.0);
    let (a, b) = (&plant.axes[0].den.coeffs()[0], &nominal.axes[0].den.coeffs()[0]);
    assert!((a / b - 1.05).abs() < 1e-12);
}

#[test]
fn inline_transfer_path_resolves_next_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.toml");
    std::fs::write(
        &path,
        r#"
name = "t"
plant = "slow"
init = { transfer = { path = "donor/state.json" } }
[controller]
kind = "l1"
"#,
    )
    .unwrap();
    let cfg = ScenarioConfig::load(&path).unwrap();
    match cfg.init {
        InitConfig::Transfer { path: p, allow_mismatch } => {
            assert_eq!(p, dir.path().join("donor/state.json"));
            assert!(!allow_mismatch);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn infeasible_trajectories_are_rejected_at_load() {
    let mut cfg = ScenarioConfig::new("steep", PlantSource::Preset("slow".into()), ControllerConfig::l1());
    cfg.trajectory = Trajectory::line(vec![0.0; 3], vec![10.0, 0.0, 0.0], TimingLaw::Smootherstep, 50, 0.02);
    assert!(matches!(cfg.validate(), Err(HarnessError::InfeasibleTrajectory { axis: 0, .. })));
    cfg.accel_bounds = None;
    cfg.validate().unwrap();
}

#[test]
fn malformed_scenarios_are_errors() {
    let origin = Path::new("inline.toml");
    let unknown = "name = \"x\"\nplant = \"slow\"\ncolour = 3\n[controller]\nkind = \"l1\"\n";
    assert!(matches!(ScenarioConfig::from_toml(unknown, origin), Err(HarnessError::Toml { .. })));
    let cfg = ScenarioConfig::from_toml("name = \"x\"\nplant = \"heavy\"\n[controller]\nkind = \"pd\"\n", origin).unwrap();
    assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
    let mut cfg = ScenarioConfig::new("x", PlantSource::Preset("slow".into()), ControllerConfig::pd());
    cfg.init = InitConfig::ReferenceModel;
    assert!(cfg.validate().is_err());
}

#[test]
fn inline_plants_need_explicit_cutoffs() {
    let plant = PlantSource::Inline(l1ilc_core::plant::fast_preset());
    let cfg = ScenarioConfig::new("inline", plant.clone(), ControllerConfig::l1());
    assert!(cfg.validate().is_err());
    let cfg = ScenarioConfig::new(
        "inline",
        plant,
        ControllerConfig::L1 {
            cutoffs: Some([10.0; 3]),
            adaptation_rate: 5000.0,
            sigma_bound: 10.0,
        },
    );
    cfg.validate().unwrap();
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = ScenarioConfig::new(
        "rt",
        PlantSource::Modified(PresetPlant {
            preset: "fast".into(),
            perturb: -0.1,
            noiseless: true,
        }),
        ControllerConfig::pid(),
    );
    cfg.accel_bounds = None;
    let text = toml::to_string(&cfg).unwrap();
    let back = ScenarioConfig::from_toml(&text, Path::new("rt.toml")).unwrap();
    assert_eq!(back, cfg);
}
