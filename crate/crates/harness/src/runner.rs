//! Repetitions of a scenario, run in parallel, and their on-disk outputs.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use l1ilc_core::experiment::{Framework, IlcPipeline, IterationRecord};
use l1ilc_core::ilc::LearningState;
use l1ilc_core::plant::trial_rng;

use crate::error::{io_err, HarnessError, Result};
use crate::scenario::{InitConfig, ScenarioConfig};
use crate::transfer::{check_fingerprint, export_learning, read_transfer_file, DonorInfo};

/// Tolerance on acceleration-bound violations of QP-produced references.
pub const ACCEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRun {
    pub rep: usize,
    pub records: Vec<IterationRecord>,
    pub final_state: LearningState,
}

/// Across-repetition statistics of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub mean: f64,
    /// Population standard deviation; zero for a single repetition.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub framework: Framework,
    pub init: String,
    pub plant: String,
    pub n: usize,
    pub fingerprint: String,
    pub summary: Vec<IterationSummary>,
    pub wall_time_s: f64,
    /// Whether a disturbance schedule changed conditions between iterations.
    #[serde(default)]
    pub scheduled: bool,
    #[serde(default)]
    pub donor: Option<DonorInfo>,
    #[serde(skip)]
    pub repetitions: Vec<RepetitionRun>,
    #[serde(skip)]
    pub y_star: Vec<Vec<f64>>,
}

impl ScenarioResult {
    /// Mean error per iteration.
    pub fn errors(&self) -> Vec<f64> {
        self.summary.iter().map(|s| s.mean).collect()
    }

    pub fn stds(&self) -> Vec<f64> {
        self.summary.iter().map(|s| s.std).collect()
    }

    pub fn first_error(&self) -> f64 {
        self.summary.first().map_or(f64::NAN, |s| s.mean)
    }

    /// Mean error of iterations 8 to 10, or of the last three when the
    /// scenario ran fewer than ten.
    pub fn converged_error(&self) -> f64 {
        converged(&self.errors())
    }

    /// Broken invariants: non-finite or negative errors, and references
    /// produced by the learning update that leave the acceleration bounds.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for run in &self.repetitions {
            for r in &run.records {
                if !(r.error >= 0.0) {
                    out.push(format!("rep {} iteration {}: error {}", run.rep, r.iteration, r.error));
                }
                if r.iteration > 1 && r.accel_violation > ACCEL_TOL {
                    out.push(format!(
                        "rep {} iteration {}: reference leaves the acceleration bounds by {:.3e}",
                        run.rep, r.iteration, r.accel_violation
                    ));
                }
            }
        }
        out
    }
}

pub fn converged(errors: &[f64]) -> f64 {
    let window = if errors.len() >= 10 { &errors[7..10] } else { &errors[errors.len().saturating_sub(3)..] };
    window.iter().sum::<f64>() / window.len().max(1) as f64
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs `cfg`, reading a transferred state from disk when its init mode
/// asks for one.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    match &cfg.init {
        InitConfig::Transfer { path, allow_mismatch } => {
            let file = read_transfer_file(path)?;
            let pipeline = IlcPipeline::new(cfg.experiment()?)?;
            check_fingerprint(&file.state, &pipeline.fingerprint, *allow_mismatch)?;
            let mut result = run_with_pipeline(cfg, pipeline, Some(file.state))?;
            result.donor = file.donor;
            Ok(result)
        }
        _ => run_scenario_from(cfg, None),
    }
}

/// Runs `cfg` starting every repetition from `initial` when given, else
/// from the scenario's local init mode. No fingerprint check is made.
pub fn run_scenario_from(cfg: &ScenarioConfig, initial: Option<LearningState>) -> Result<ScenarioResult> {
    let pipeline = IlcPipeline::new(cfg.experiment()?)?;
    run_with_pipeline(cfg, pipeline, initial)
}

fn run_with_pipeline(cfg: &ScenarioConfig, pipeline: IlcPipeline, initial: Option<LearningState>) -> Result<ScenarioResult> {
    cfg.validate()?;
    let start = Instant::now();
    let state = match initial {
        Some(mut s) => {
            pipeline.check_state(&s)?;
            // The recipient counts its own trials.
            s.iteration = 0;
            s.model_id.clone_from(&pipeline.fingerprint);
            s
        }
        None => {
            let mode = cfg
                .init
                .local_mode()
                .ok_or_else(|| HarnessError::Config("transfer init needs a learning state".into()))?;
            pipeline.initial_state(mode)?
        }
    };
    let runs = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(cfg, pipeline.clone(), state.clone(), rep))
        .collect::<Result<Vec<_>>>()?;

    let summary = (0..cfg.iterations)
        .map(|j| {
            let e: Vec<f64> = runs.iter().map(|r| r.records[j].error).collect();
            let (mean, std) = mean_std(&e);
            IterationSummary { iteration: j + 1, mean, std }
        })
        .collect();
    let exp = &pipeline.experiment;
    Ok(ScenarioResult {
        name: cfg.name.clone(),
        framework: exp.controller.framework(),
        init: cfg.init.label().to_string(),
        plant: exp.plant.name.clone(),
        n: exp.trajectory.n,
        fingerprint: pipeline.fingerprint.clone(),
        summary,
        wall_time_s: start.elapsed().as_secs_f64(),
        scheduled: !cfg.schedule.is_empty(),
        donor: None,
        repetitions: runs,
        y_star: pipeline.y_star.clone(),
    })
}

fn run_repetition(cfg: &ScenarioConfig, mut pipeline: IlcPipeline, mut state: LearningState, rep: usize) -> Result<RepetitionRun> {
    let mut records = Vec::with_capacity(cfg.iterations);
    for j in 0..cfg.iterations {
        // The last trial's traces are always kept for the trace output.
        pipeline.keep_traces = cfg.traces || j + 1 == cfg.iterations;
        let t0 = Instant::now();
        let mut rec = pipeline
            .run_iteration(&mut state, cfg.disturbance_at(j + 1), trial_rng(cfg.seed, rep as u64, j as u64))
            .map_err(|source| HarnessError::Iteration {
                rep,
                iteration: j + 1,
                source,
            })?;
        rec.wall_time_s = t0.elapsed().as_secs_f64();
        log::debug!("{} rep {rep} iteration {}: e = {:.6}", cfg.name, j + 1, rec.error);
        records.push(rec);
    }
    Ok(RepetitionRun {
        rep,
        records,
        final_state: state,
    })
}

/// Writes `iterations.csv`, `repetitions.csv`, `traces.csv`,
/// `state.json` and `result.json` into `dir`.
pub fn write_outputs(result: &ScenarioResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut w = csv::Writer::from_path(dir.join("iterations.csv"))?;
    w.write_record(["iteration", "error", "std"])?;
    for s in &result.summary {
        w.write_record([s.iteration.to_string(), s.mean.to_string(), s.std.to_string()])?;
    }
    w.flush().map_err(io_err(dir.join("iterations.csv")))?;

    let mut w = csv::Writer::from_path(dir.join("repetitions.csv"))?;
    w.write_record(["rep", "iteration", "error", "sup_y_tilde", "accel_violation", "wall_time_s"])?;
    for run in &result.repetitions {
        for r in &run.records {
            w.write_record([
                run.rep.to_string(),
                r.iteration.to_string(),
                r.error.to_string(),
                r.sup_y_tilde.to_string(),
                r.accel_violation.to_string(),
                r.wall_time_s.to_string(),
            ])?;
        }
    }
    w.flush().map_err(io_err(dir.join("repetitions.csv")))?;

    let mut w = csv::Writer::from_path(dir.join("traces.csv"))?;
    w.write_record(["rep", "iteration", "axis", "sample", "y_star", "reference", "y2", "y2_true", "u"])?;
    for run in &result.repetitions {
        for r in &run.records {
            let (Some(trial), Some(reference)) = (&r.trial, &r.reference) else {
                continue;
            };
            for (axis, ys) in result.y_star.iter().enumerate() {
                for (k, y) in ys.iter().enumerate() {
                    w.write_record([
                        run.rep.to_string(),
                        r.iteration.to_string(),
                        axis.to_string(),
                        k.to_string(),
                        y.to_string(),
                        reference[axis][k].to_string(),
                        trial.y2[axis][k].to_string(),
                        trial.y2_true[axis][k].to_string(),
                        trial.u[axis][k].to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush().map_err(io_err(dir.join("traces.csv")))?;

    if let Some(run) = result.repetitions.first() {
        let donor = DonorInfo {
            scenario: result.name.clone(),
            framework: result.framework.name().to_string(),
            converged_error: result.converged_error(),
        };
        export_learning(&run.final_state, &result.fingerprint, Some(donor), &dir.join("state.json"))?;
    }
    let path = dir.join("result.json");
    std::fs::write(&path, serde_json::to_string_pretty(result)?).map_err(io_err(&path))?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ScenarioResult> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}
