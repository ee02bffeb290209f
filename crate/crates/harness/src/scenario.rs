//! Declarative scenario files.
//!
//! A scenario is a TOML document naming the plant, controller, desired
//! trajectory and learning schedule of one experiment. `L1ILC_SEED` and
//! `L1ILC_OUT` override the seed and the output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use l1ilc_core::baselines::{PdConfig, PidConfig};
use l1ilc_core::experiment::{
    filter_cutoffs, ControllerSpec, Experiment, Framework, InitMode, Trajectory, ADAPTATION_RATE, OUTER_GAIN,
    REFERENCE_POLES,
};
use l1ilc_core::ilc::{Constraints, IlcWeights};
use l1ilc_core::l1::L1AxisConfig;
use l1ilc_core::plant::{preset, DisturbanceSpec, PlantConfig};

use crate::error::{io_err, HarnessError, Result};

pub const SEED_ENV: &str = "L1ILC_SEED";
pub const OUT_ENV: &str = "L1ILC_OUT";

/// A vehicle preset with optional modifications, or a full inline plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlantSource {
    Preset(String),
    Modified(PresetPlant),
    Inline(PlantConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetPlant {
    pub preset: String,
    /// Relative change of every non-leading transfer-function coefficient.
    #[serde(default)]
    pub perturb: f64,
    /// Drops the measurement noise.
    #[serde(default)]
    pub noiseless: bool,
}

impl PlantSource {
    pub fn resolve(&self) -> Result<PlantConfig> {
        let lookup = |name: &str| preset(name).ok_or_else(|| HarnessError::Config(format!("unknown plant preset `{name}`")));
        match self {
            Self::Preset(name) => lookup(name),
            Self::Modified(p) => {
                let mut cfg = lookup(&p.preset)?;
                if p.perturb != 0.0 {
                    cfg = cfg.perturbed(p.perturb);
                }
                if p.noiseless {
                    cfg.vel_noise_std = 0.0;
                    cfg.pos_noise_std = 0.0;
                }
                Ok(cfg)
            }
            Self::Inline(cfg) => Ok(cfg.clone()),
        }
    }

    /// Preset the plant derives from, used to pick tuned filter cutoffs.
    pub fn preset_name(&self) -> Option<&str> {
        match self {
            Self::Preset(name) => Some(name),
            Self::Modified(p) => Some(&p.preset),
            Self::Inline(_) => None,
        }
    }
}

fn default_sigma_bound() -> f64 {
    10.0
}

fn default_gamma() -> f64 {
    ADAPTATION_RATE
}

fn default_tau() -> f64 {
    PdConfig::default().tau
}

fn default_zeta() -> f64 {
    PdConfig::default().zeta
}

fn default_u_max() -> f64 {
    2.0
}

/// Controller family with its tuning; unspecified values take the defaults
/// shared by all scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    L1 {
        /// Per-axis filter cutoffs; defaults to the plant preset's tuning.
        #[serde(default)]
        cutoffs: Option<[f64; 3]>,
        #[serde(default = "default_gamma")]
        adaptation_rate: f64,
        #[serde(default = "default_sigma_bound")]
        sigma_bound: f64,
    },
    Pd {
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_zeta")]
        zeta: f64,
    },
    Pid {
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_zeta")]
        zeta: f64,
        #[serde(default = "default_u_max")]
        u_max: f64,
    },
    /// Fully specified per-axis configuration.
    Custom { spec: ControllerSpec },
}

impl ControllerConfig {
    pub fn l1() -> Self {
        Self::L1 {
            cutoffs: None,
            adaptation_rate: default_gamma(),
            sigma_bound: default_sigma_bound(),
        }
    }

    pub fn pd() -> Self {
        Self::Pd {
            tau: default_tau(),
            zeta: default_zeta(),
        }
    }

    pub fn pid() -> Self {
        Self::Pid {
            tau: default_tau(),
            zeta: default_zeta(),
            u_max: default_u_max(),
        }
    }

    pub fn for_framework(fw: Framework) -> Self {
        match fw {
            Framework::L1 => Self::l1(),
            Framework::Pd => Self::pd(),
            Framework::Pid => Self::pid(),
        }
    }

    /// Per-axis controller for `n_axes` axes; `preset_name` selects the
    /// default L1 cutoffs.
    pub fn build(&self, n_axes: usize, preset_name: Option<&str>, dt: f64) -> Result<ControllerSpec> {
        let spec = match self {
            Self::L1 {
                cutoffs,
                adaptation_rate,
                sigma_bound,
            } => {
                if n_axes != 3 {
                    return Err(HarnessError::Config("the L1 defaults describe three axes; use `custom`".into()));
                }
                let w = cutoffs.or_else(|| preset_name.and_then(filter_cutoffs)).ok_or_else(|| {
                    HarnessError::Config("L1 cutoffs are required for plants without a preset".into())
                })?;
                let axes = (0..3)
                    .map(|i| L1AxisConfig::new(REFERENCE_POLES[i], w[i], OUTER_GAIN, *adaptation_rate, *sigma_bound, dt))
                    .collect::<l1ilc_core::Result<Vec<_>>>()?;
                ControllerSpec::L1(axes)
            }
            Self::Pd { tau, zeta } => ControllerSpec::Pd(vec![PdConfig::new(*tau, *zeta)?; n_axes]),
            Self::Pid { tau, zeta, u_max } => {
                ControllerSpec::Pid(vec![PidConfig::from_time_constant(*tau, *zeta, *u_max)?; n_axes])
            }
            Self::Custom { spec } => spec.clone(),
        };
        Ok(spec)
    }
}

/// Where the first iteration's learning state comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitConfig {
    Naive,
    ReferenceModel,
    Transfer {
        path: PathBuf,
        /// Accept a state learned on a different model.
        #[serde(default)]
        allow_mismatch: bool,
    },
}

impl InitConfig {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::ReferenceModel => "reference_model",
            Self::Transfer { .. } => "transfer",
        }
    }

    /// Locally computed initialization, if any.
    pub fn local_mode(&self) -> Option<InitMode> {
        match self {
            Self::Naive => Some(InitMode::Naive),
            Self::ReferenceModel => Some(InitMode::ReferenceModel),
            Self::Transfer { .. } => None,
        }
    }
}

/// Disturbance applied over an inclusive one-based iteration range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub from: usize,
    #[serde(default)]
    pub to: Option<usize>,
    #[serde(flatten)]
    pub disturbance: DisturbanceSpec,
}

fn default_iterations() -> usize {
    10
}

fn default_repetitions() -> usize {
    1
}

fn default_control_dt() -> f64 {
    1e-3
}

fn default_accel_bounds() -> Option<[f64; 2]> {
    Some([-2.0, 2.0])
}

fn default_p0() -> f64 {
    1.0
}

fn default_naive() -> InitConfig {
    InitConfig::Naive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub plant: PlantSource,
    pub controller: ControllerConfig,
    #[serde(default = "Trajectory::default_line")]
    pub trajectory: Trajectory,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Disturbance of iterations not covered by the schedule.
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    /// Later entries take precedence where ranges overlap.
    #[serde(default)]
    pub schedule: Vec<ScheduleEntry>,
    #[serde(default = "default_naive")]
    pub init: InitConfig,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weights: IlcWeights,
    /// Bounds on the reference's second difference; `[]` disables them.
    #[serde(default = "default_accel_bounds", with = "opt_bounds")]
    pub accel_bounds: Option<[f64; 2]>,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default = "default_control_dt")]
    pub control_dt: f64,
    /// Learning model of baseline controllers when it differs from the plant.
    #[serde(default)]
    pub model_plant: Option<PlantSource>,
    /// Keep per-step traces of every iteration.
    #[serde(default)]
    pub traces: bool,
}

mod opt_bounds {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<[f64; 2]>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => b.serialize(s),
            None => Vec::<f64>::new().serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[f64; 2]>, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        match v.as_slice() {
            [] => Ok(None),
            [lo, hi] => Ok(Some([*lo, *hi])),
            _ => Err(serde::de::Error::custom("expected [] or [lower, upper]")),
        }
    }
}

impl ScenarioConfig {
    /// Scenario with the shared defaults on `plant` under `controller`.
    pub fn new(name: impl Into<String>, plant: PlantSource, controller: ControllerConfig) -> Self {
        Self {
            name: name.into(),
            plant,
            controller,
            trajectory: Trajectory::default_line(),
            iterations: default_iterations(),
            disturbance: DisturbanceSpec::default(),
            schedule: Vec::new(),
            init: InitConfig::Naive,
            repetitions: 1,
            seed: 0,
            weights: IlcWeights::default(),
            accel_bounds: default_accel_bounds(),
            p0: default_p0(),
            control_dt: default_control_dt(),
            model_plant: None,
            traces: false,
        }
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| HarnessError::Toml {
            path: origin.to_path_buf(),
            source,
        })
    }

    /// Reads, applies environment overrides, resolves relative transfer
    /// paths against the file's directory and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_toml(&text, path)?;
        if let InitConfig::Transfer { path: p, .. } = &mut cfg.init {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.apply_env()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Disturbance of one-based iteration `j`.
    pub fn disturbance_at(&self, j: usize) -> &DisturbanceSpec {
        self.schedule
            .iter()
            .rev()
            .find(|e| j >= e.from && e.to.is_none_or(|t| j <= t))
            .map_or(&self.disturbance, |e| &e.disturbance)
    }

    pub fn framework(&self) -> Result<Framework> {
        Ok(self.experiment()?.controller.framework())
    }

    pub fn experiment(&self) -> Result<Experiment> {
        let plant = self.plant.resolve()?;
        let controller = self
            .controller
            .build(plant.n_axes(), self.plant.preset_name(), self.control_dt)?;
        let model_axes = match &self.model_plant {
            Some(p) => Some(p.resolve()?.axes),
            None => None,
        };
        Ok(Experiment {
            plant,
            controller,
            control_dt: self.control_dt,
            trajectory: self.trajectory.clone(),
            weights: self.weights,
            accel_bounds: self.accel_bounds.map(|[lo, hi]| (lo, hi)),
            p0: self.p0,
            model_axes,
        })
    }

    /// Structural checks plus feasibility of the desired trajectory under
    /// the acceleration bounds, so that zero tracking error is attainable.
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(HarnessError::Config("at least one iteration is required".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Config("at least one repetition is required".into()));
        }
        for e in &self.schedule {
            if e.from == 0 || e.to.is_some_and(|t| t < e.from) {
                return Err(HarnessError::Config(format!("bad schedule range {}..{:?}", e.from, e.to)));
            }
        }
        let exp = self.experiment()?;
        exp.validate()?;
        if matches!(self.init, InitConfig::ReferenceModel) && exp.controller.framework() != Framework::L1 {
            return Err(HarnessError::Config("reference-model initialization needs the L1 controller".into()));
        }
        if let Some([lo, hi]) = self.accel_bounds {
            let traj = &self.trajectory;
            let c = Constraints::new(traj.n, traj.dt, lo, hi)?;
            for (axis, y) in traj.desired_output().iter().enumerate() {
                let excess = c.violation(y);
                if excess > 1e-9 {
                    return Err(HarnessError::InfeasibleTrajectory { axis, excess });
                }
            }
        }
        Ok(())
    }

    /// Output directory: `L1ILC_OUT` when set, else `results/<name>`.
    pub fn default_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => PathBuf::from("results").join(&self.name),
        }
    }
}
