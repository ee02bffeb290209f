//! Trials and the iteration-domain learning loop.
//!
//! A trial runs the controller at its own period and the plant in finer
//! substeps. Learning works in deviation form around the desired output
//! `y*`: the total reference of a trial is `r₂ = y* + r̄` and the Kalman
//! filter observes the error `y₂ - y*`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineMimo, PdConfig, PidConfig};
use crate::error::{ensure_len, invalid};
use crate::ilc::constraints::{backward_difference, Constraints};
use crate::ilc::init::{reference_model_input, ReferenceModel};
use crate::ilc::kalman::{kalman_update_with_prediction, IlcWeights, LearningState};
use crate::ilc::lifted::{axis_slice, interleave, LiftedSystem};
use crate::ilc::metrics::tracking_error;
use crate::ilc::nominal::{baseline_lifted, BaselineLaw};
use crate::ilc::update::IlcUpdater;
use crate::l1::{L1AxisConfig, L1MimoController};
use crate::plant::{DisturbanceSpec, PlantConfig, PlantState};
use crate::{Error, Result};

/// Progress profile `s(τ)`, `τ ∈ [0, 1]`, of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimingLaw {
    Linear,
    /// Cubic `3τ² - 2τ³`; zero velocity at both ends.
    Smoothstep,
    /// Quintic `6τ⁵ - 15τ⁴ + 10τ³`; zero velocity and acceleration at both ends.
    #[default]
    Smootherstep,
}

impl TimingLaw {
    pub fn progress(self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        match self {
            Self::Linear => t,
            Self::Smoothstep => t * t * (3.0 - 2.0 * t),
            Self::Smootherstep => t * t * t * (t * (6.0 * t - 15.0) + 10.0),
        }
    }
}

/// Piecewise path through waypoints sampled on the trial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Vec<f64>>,
    /// Duration of each segment; one fewer entry than waypoints.
    pub segment_durations: Vec<f64>,
    #[serde(default)]
    pub law: TimingLaw,
    pub n: usize,
    pub dt: f64,
}

impl Trajectory {
    /// Single segment from `start` to `end` over the whole trial.
    pub fn line(start: Vec<f64>, end: Vec<f64>, law: TimingLaw, n: usize, dt: f64) -> Self {
        Self {
            waypoints: vec![start, end],
            segment_durations: vec![n as f64 * dt],
            law,
            n,
            dt,
        }
    }

    /// `(0, 0, 1)` to `(1, 1, 2)` in 8 s, 400 samples.
    pub fn default_line() -> Self {
        Self::line(vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 2.0], TimingLaw::Smootherstep, 400, 0.02)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(invalid("waypoints", "at least two waypoints are required"));
        }
        let d = self.n_axes();
        if d == 0 || self.waypoints.iter().any(|w| w.len() != d) {
            return Err(invalid("waypoints", "all waypoints need the same nonzero dimension"));
        }
        ensure_len(self.waypoints.len() - 1, self.segment_durations.len())?;
        if self.segment_durations.iter().any(|t| !(*t > 0.0)) {
            return Err(invalid("segment_durations", "must be positive"));
        }
        if self.n < 3 {
            return Err(invalid("n", "at least three samples are required"));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        Ok(())
    }

    pub fn n_axes(&self) -> usize {
        self.waypoints.first().map_or(0, Vec::len)
    }

    pub fn start(&self) -> &[f64] {
        &self.waypoints[0]
    }

    /// Position at time `t`; held at the last waypoint afterwards.
    pub fn position(&self, t: f64) -> Vec<f64> {
        let mut t0 = 0.0;
        for (s, &dur) in self.segment_durations.iter().enumerate() {
            if t < t0 + dur || s + 1 == self.segment_durations.len() {
                let p = self.law.progress((t - t0) / dur);
                let (a, b) = (&self.waypoints[s], &self.waypoints[s + 1]);
                return a.iter().zip(b).map(|(a, b)| a + p * (b - a)).collect();
            }
            t0 += dur;
        }
        self.waypoints[0].clone()
    }

    /// Desired output per axis at the sample instants `(k + 1) dt`.
    pub fn desired_output(&self) -> Vec<Vec<f64>> {
        let d = self.n_axes();
        let mut out = vec![Vec::with_capacity(self.n); d];
        for k in 0..self.n {
            let p = self.position((k + 1) as f64 * self.dt);
            for (o, v) in out.iter_mut().zip(p) {
                o.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framework {
    L1,
    Pd,
    Pid,
}

impl Framework {
    pub fn name(self) -> &'static str {
        match self {
            Self::L1 => "l1",
            Self::Pd => "pd",
            Self::Pid => "pid",
        }
    }
}

/// Per-axis configuration of the inner controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "axes", rename_all = "snake_case")]
pub enum ControllerSpec {
    L1(Vec<L1AxisConfig>),
    Pd(Vec<PdConfig>),
    Pid(Vec<PidConfig>),
}

impl ControllerSpec {
    pub fn framework(&self) -> Framework {
        match self {
            Self::L1(_) => Framework::L1,
            Self::Pd(_) => Framework::Pd,
            Self::Pid(_) => Framework::Pid,
        }
    }

    pub fn n_axes(&self) -> usize {
        match self {
            Self::L1(v) => v.len(),
            Self::Pd(v) => v.len(),
            Self::Pid(v) => v.len(),
        }
    }

    fn build(&self) -> Controller {
        match self {
            Self::L1(c) => Controller::L1(L1MimoController::new(c.clone())),
            Self::Pd(c) => Controller::Baseline(BaselineMimo::Pd(c.clone())),
            Self::Pid(c) => {
                let mut b = BaselineMimo::Pid(c.clone());
                b.reset();
                Controller::Baseline(b)
            }
        }
    }
}

enum Controller {
    L1(L1MimoController),
    Baseline(BaselineMimo),
}

/// Reference-model poles of the x, y and z axes.
pub const REFERENCE_POLES: [f64; 3] = [1.1, 1.1, 1.75];
/// Outer position-loop gain shared by all axes.
pub const OUTER_GAIN: f64 = 0.4;
pub const ADAPTATION_RATE: f64 = 5000.0;

/// Low-pass cutoffs tuned per vehicle preset.
pub fn filter_cutoffs(preset: &str) -> Option<[f64; 3]> {
    match preset {
        "slow" => Some([40.0; 3]),
        "fast" => Some([10.0; 3]),
        _ => None,
    }
}

/// L1 axes with the shared reference model and the given cutoffs.
pub fn l1_axes(cutoffs: [f64; 3], sigma_bound: f64, dt: f64) -> Result<Vec<L1AxisConfig>> {
    (0..3)
        .map(|i| L1AxisConfig::new(REFERENCE_POLES[i], cutoffs[i], OUTER_GAIN, ADAPTATION_RATE, sigma_bound, dt))
        .collect()
}

/// Plant, controller and trial grid shared by every iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub plant: PlantConfig,
    pub controller: ControllerSpec,
    /// Controller period; must divide the sampling period.
    pub control_dt: f64,
    pub trajectory: Trajectory,
    pub weights: IlcWeights,
    /// Bounds on the second difference of the total reference.
    pub accel_bounds: Option<(f64, f64)>,
    /// Initial Kalman covariance.
    pub p0: f64,
    /// Velocity model for baseline learning; defaults to `plant.axes`.
    #[serde(default)]
    pub model_axes: Option<Vec<crate::lti::RationalTF>>,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate()?;
        self.plant.validate(self.control_dt)?;
        let d = self.trajectory.n_axes();
        ensure_len(d, self.plant.n_axes())?;
        ensure_len(d, self.controller.n_axes())?;
        self.weights.validate()?;
        if !(self.p0 > 0.0) {
            return Err(invalid("p0", "must be positive"));
        }
        self.steps_per_sample()?;
        if let ControllerSpec::L1(cfgs) = &self.controller {
            for c in cfgs {
                c.validate()?;
                if (c.dt - self.control_dt).abs() > 1e-12 {
                    return Err(invalid("dt", "L1 period must equal the controller period"));
                }
            }
        }
        if let Some(axes) = &self.model_axes {
            ensure_len(d, axes.len())?;
        }
        Ok(())
    }

    fn steps_per_sample(&self) -> Result<usize> {
        let ratio = self.trajectory.dt / self.control_dt;
        let steps = libm::round(ratio);
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 {
            return Err(invalid("control_dt", "must divide the sampling period"));
        }
        Ok(steps as usize)
    }
}

/// Sampled signals of one trial, per axis, at `(k + 1) dt`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialOutput {
    /// Measured positions.
    pub y2: Vec<Vec<f64>>,
    /// Noise-free positions.
    pub y2_true: Vec<Vec<f64>>,
    /// Last control applied in each sample interval.
    pub u: Vec<Vec<f64>>,
    /// `sup |ŷ₁ - y₁|` over the trial and all axes; zero for baselines.
    pub sup_y_tilde: f64,
}

/// Runs one trial from rest at the trajectory start with the total
/// reference `r2` (per axis, held per sample).
pub fn run_trial(
    exp: &Experiment,
    dist: &DisturbanceSpec,
    r2: &[Vec<f64>],
    mut rng: ChaCha8Rng,
) -> Result<TrialOutput> {
    let d = exp.trajectory.n_axes();
    let n = exp.trajectory.n;
    ensure_len(d, r2.len())?;
    for r in r2 {
        ensure_len(n, r.len())?;
    }
    let steps = exp.steps_per_sample()?;
    let dist = dist.realize(&mut rng);
    let mut plant = PlantState::new(&exp.plant, rng)?;
    plant.reset(exp.trajectory.start())?;
    let mut ctrl = exp.controller.build();
    let r2_dot: Vec<Vec<f64>> = r2.iter().map(|r| backward_difference(r, exp.trajectory.dt)).collect();

    let mut out = TrialOutput {
        y2: vec![Vec::with_capacity(n); d],
        y2_true: vec![Vec::with_capacity(n); d],
        u: vec![Vec::with_capacity(n); d],
        sup_y_tilde: 0.0,
    };
    let (mut y1, mut y2) = (vec![0.0; d], vec![0.0; d]);
    let (mut r, mut rd, mut u) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for k in 0..n {
        for i in 0..d {
            r[i] = r2[i][k];
            rd[i] = r2_dot[i][k];
        }
        for _ in 0..steps {
            plant.measure_into(&mut y1, &mut y2);
            match &mut ctrl {
                Controller::L1(c) => {
                    for (i, axis) in c.axes.iter_mut().enumerate() {
                        let tel = axis.step(r[i], y1[i], y2[i]);
                        u[i] = tel.u;
                        out.sup_y_tilde = out.sup_y_tilde.max(tel.y_tilde.abs());
                    }
                }
                Controller::Baseline(b) => b.step_into(&r, &rd, &y1, &y2, exp.control_dt, &mut u)?,
            }
            plant.advance(&dist, &u, exp.control_dt)?;
        }
        for i in 0..d {
            out.u[i].push(u[i]);
        }
        // The sample at (k + 1) dt is the measurement the next step would see.
        plant.measure_into(&mut y1, &mut y2);
        let truth = plant.true_y2();
        for i in 0..d {
            out.y2[i].push(y2[i]);
            out.y2_true[i].push(truth[i]);
        }
    }
    Ok(out)
}

/// How the first trial's reference is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `r₂ = y*`.
    Naive,
    /// Inverse of the discrete L1 reference model (L1 only).
    ReferenceModel,
}

/// Outcome of one learning iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// One-based trial index.
    pub iteration: usize,
    pub error: f64,
    pub sup_y_tilde: f64,
    /// Largest acceleration-bound violation of the applied reference.
    pub accel_violation: f64,
    /// Filled by callers that time iterations.
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<TrialOutput>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<Vec<Vec<f64>>>,
}

/// Per-axis lifted models, QP updaters and the desired output of an
/// experiment.
#[derive(Debug, Clone)]
pub struct IlcPipeline {
    pub experiment: Experiment,
    pub y_star: Vec<Vec<f64>>,
    pub systems: Vec<LiftedSystem>,
    pub constraints: Option<Constraints>,
    pub fingerprint: String,
    pub keep_traces: bool,
    updaters: Vec<IlcUpdater>,
    reference_models: Vec<ReferenceModel>,
}

impl IlcPipeline {
    pub fn new(experiment: Experiment) -> Result<Self> {
        experiment.validate()?;
        let traj = &experiment.trajectory;
        let (n, dt) = (traj.n, traj.dt);
        let y_star = traj.desired_output();
        let mut systems = Vec::new();
        let mut reference_models = Vec::new();
        let mut ids = Vec::new();
        match &experiment.controller {
            ControllerSpec::L1(cfgs) => {
                for c in cfgs {
                    let rm = ReferenceModel::new(c.m, c.k, dt, n)?;
                    ids.push(rm.fingerprint());
                    systems.push(rm.lifted.clone());
                    reference_models.push(rm);
                }
            }
            spec => {
                let axes = experiment.model_axes.as_ref().unwrap_or(&experiment.plant.axes);
                for (i, a) in axes.iter().enumerate() {
                    let law = match spec {
                        ControllerSpec::Pd(c) => BaselineLaw::pd(&c[i]),
                        ControllerSpec::Pid(c) => BaselineLaw::pid(&c[i]),
                        ControllerSpec::L1(_) => unreachable!(),
                    };
                    ids.push(alloc::format!(
                        "{}:kp={:.6}:kd={:.6}:ki={:.6}:a={:?}/{:?}:dt={dt:.6}:n={n}",
                        spec.framework().name(),
                        law.kp,
                        law.kd,
                        law.ki,
                        a.num.coeffs(),
                        a.den.coeffs()
                    ));
                    systems.push(baseline_lifted(a, &law, dt, n)?);
                }
            }
        }
        let constraints = match experiment.accel_bounds {
            Some((lo, hi)) => Some(Constraints::new(n, dt, lo, hi)?),
            None => None,
        };
        let updaters = systems
            .iter()
            .zip(&y_star)
            .map(|(s, ys)| IlcUpdater::new(s, &experiment.weights, constraints.as_ref(), ys))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            experiment,
            y_star,
            systems,
            constraints,
            fingerprint: ids.join(";"),
            keep_traces: false,
            updaters,
            reference_models,
        })
    }

    pub fn n_axes(&self) -> usize {
        self.y_star.len()
    }

    pub fn n(&self) -> usize {
        self.experiment.trajectory.n
    }

    /// Fresh learning state for `mode`, tagged with this pipeline's model.
    pub fn initial_state(&self, mode: InitMode) -> Result<LearningState> {
        let (d, n) = (self.n_axes(), self.n());
        let mut s = LearningState::new(d * n, d * n, self.experiment.p0);
        s.model_id.clone_from(&self.fingerprint);
        if mode == InitMode::ReferenceModel {
            if self.reference_models.is_empty() {
                return Err(invalid("init_mode", "reference-model initialization needs the L1 controller"));
            }
            let start = self.experiment.trajectory.start();
            let mut r_bar = Vec::with_capacity(d);
            let mut d_hat = Vec::with_capacity(d);
            for (i, rm) in self.reference_models.iter().enumerate() {
                let (r21, d1) = reference_model_input(rm, &self.y_star[i], &[start[i], 0.0])?;
                r_bar.push(r21.iter().zip(&self.y_star[i]).map(|(r, y)| r - y).collect::<Vec<_>>());
                d_hat.push(d1.iter().map(|v| -v).collect::<Vec<_>>());
            }
            s.r_bar = interleave(&r_bar);
            s.d_hat = interleave(&d_hat);
        }
        Ok(s)
    }

    /// Checks that `state` fits this pipeline's dimensions.
    pub fn check_state(&self, state: &LearningState) -> Result<()> {
        let len = self.n_axes() * self.n();
        ensure_len(len, state.r_bar.len())?;
        ensure_len(len, state.d_hat.len())?;
        ensure_len(len, state.p_cov.len())?;
        if state.p_cov.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("p_cov", "covariance entries must be non-negative"));
        }
        Ok(())
    }

    /// Total reference `y* + r̄` per axis.
    pub fn reference(&self, state: &LearningState) -> Vec<Vec<f64>> {
        let d = self.n_axes();
        (0..d)
            .map(|i| {
                axis_slice(&state.r_bar, d, i)
                    .iter()
                    .zip(&self.y_star[i])
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect()
    }

    /// One trial with the current input followed by the Kalman and QP
    /// updates of `state`.
    pub fn run_iteration(
        &mut self,
        state: &mut LearningState,
        dist: &DisturbanceSpec,
        rng: ChaCha8Rng,
    ) -> Result<IterationRecord> {
        self.check_state(state)?;
        let d = self.n_axes();
        let r2 = self.reference(state);
        let accel_violation = self
            .constraints
            .as_ref()
            .map_or(0.0, |c| r2.iter().map(|r| c.violation(r)).fold(0.0, f64::max));
        let trial = run_trial(&self.experiment, dist, &r2, rng)?;
        let error = tracking_error(&self.y_star, &trial.y2)?;
        if !error.is_finite() {
            return Err(Error::NonFinite("tracking error"));
        }

        let mut predicted = Vec::with_capacity(d);
        let mut measured = Vec::with_capacity(d);
        for i in 0..d {
            predicted.push(self.systems[i].apply(&axis_slice(&state.r_bar, d, i)));
            measured.push(
                trial.y2[i]
                    .iter()
                    .zip(&self.y_star[i])
                    .map(|(y, s)| y - s)
                    .collect::<Vec<_>>(),
            );
        }
        kalman_update_with_prediction(state, &self.experiment.weights, &interleave(&predicted), &interleave(&measured))?;

        let mut r_bar = Vec::with_capacity(d);
        for (i, up) in self.updaters.iter_mut().enumerate() {
            r_bar.push(up.solve(&axis_slice(&state.d_hat, d, i))?.x);
        }
        state.r_bar = interleave(&r_bar);
        state.iteration += 1;

        Ok(IterationRecord {
            iteration: state.iteration,
            error,
            sup_y_tilde: trial.sup_y_tilde,
            accel_violation,
            wall_time_s: 0.0,
            reference: self.keep_traces.then_some(r2),
            trial: self.keep_traces.then_some(trial),
        })
    }
}
