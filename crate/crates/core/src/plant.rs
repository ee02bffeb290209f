//! Simulated per-axis plants `y₁ = A(s)(u + f(t, y₁))`, `y₂ = ∫ y₁`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, invalid};
use crate::lti::{routh_hurwitz_stable, RationalTF, Rk4, StateSpace};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub name: String,
    /// Velocity dynamics per axis; strictly proper and Hurwitz.
    pub axes: Vec<RationalTF>,
    /// Standard deviation of the additive noise on measured `y₁`.
    pub vel_noise_std: f64,
    /// Standard deviation of the additive noise on measured `y₂`.
    pub pos_noise_std: f64,
    pub sim_dt: f64,
    pub seed: u64,
}

impl PlantConfig {
    pub fn validate(&self, controller_dt: f64) -> Result<()> {
        if self.axes.is_empty() {
            return Err(invalid("axes", "at least one axis is required"));
        }
        for a in &self.axes {
            if !a.is_strictly_proper() || a.den.degree() == 0 {
                return Err(Error::NotStrictlyProper);
            }
            if !routh_hurwitz_stable(&a.den)? {
                return Err(Error::Unstable);
            }
        }
        if !(self.vel_noise_std >= 0.0 && self.pos_noise_std >= 0.0) {
            return Err(invalid("noise_std", "must be non-negative"));
        }
        if !(self.sim_dt > 0.0) || self.sim_dt > controller_dt / 5.0 + 1e-15 {
            return Err(invalid("sim_dt", "must be positive and at most a fifth of the controller period"));
        }
        Ok(())
    }

    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    /// Same configuration with every numerator and denominator coefficient
    /// except the monic leading one scaled by `1 + rel`.
    pub fn perturbed(&self, rel: f64) -> Self {
        let mut out = self.clone();
        for a in out.axes.iter_mut() {
            let n = a.num.coeffs().iter().map(|c| c * (1.0 + rel)).collect::<Vec<_>>();
            let mut d = a.den.coeffs().to_vec();
            let last = d.len() - 1;
            for c in d[..last].iter_mut() {
                *c *= 1.0 + rel;
            }
            *a = RationalTF::from_coeffs(&n, &d).unwrap_or_else(|_| a.clone());
        }
        out.name = alloc::format!("{}+{:.0}%", self.name, rel * 100.0);
        out
    }
}

fn axis_tf(gain: f64, a0: f64, a1: f64) -> RationalTF {
    RationalTF::from_coeffs(&[gain], &[a0, a1, 1.0]).expect("nonzero denominator")
}

/// Sluggish vehicle: first-order lag with pole at -0.8, DC gain 0.45.
pub fn slow_preset() -> PlantConfig {
    PlantConfig {
        name: "slow".into(),
        axes: vec![RationalTF::from_coeffs(&[0.36], &[0.8, 1.0]).expect("nonzero denominator"); 3],
        vel_noise_std: 0.01,
        pos_noise_std: 0.002,
        sim_dt: 1e-4,
        seed: 1,
    }
}

/// Agile vehicle: poles near -3.2 and -7.8, DC gain 2.5.
pub fn fast_preset() -> PlantConfig {
    PlantConfig {
        name: "fast".into(),
        axes: vec![axis_tf(62.5, 25.0, 11.0); 3],
        vel_noise_std: 0.005,
        pos_noise_std: 0.001,
        sim_dt: 1e-4,
        seed: 2,
    }
}

pub fn vehicle_presets() -> (PlantConfig, PlantConfig) {
    (slow_preset(), fast_preset())
}

pub fn preset(name: &str) -> Option<PlantConfig> {
    match name {
        "slow" => Some(slow_preset()),
        "fast" => Some(fast_preset()),
        _ => None,
    }
}

/// Constant wind acceleration on one axis over `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wind {
    pub axis: usize,
    pub magnitude: f64,
    pub start: f64,
    pub end: f64,
    /// Per-trial standard deviation of the magnitude.
    #[serde(default)]
    pub magnitude_std: f64,
}

/// `f(t, y₁) = -L tanh(y₁) + L0 + wind(t)`; L-Lipschitz in `y₁` with
/// `|f| <= L |y₁| + |L0| + |wind|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DisturbanceSpec {
    pub l: f64,
    pub l0: f64,
    #[serde(default)]
    pub wind: Vec<Wind>,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            l: 0.2,
            l0: 0.05,
            wind: Vec::new(),
        }
    }
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        Self {
            l: 0.0,
            l0: 0.0,
            wind: Vec::new(),
        }
    }

    #[inline]
    pub fn eval(&self, axis: usize, t: f64, y1: f64) -> f64 {
        let mut f = -self.l * math::tanh(y1) + self.l0;
        for w in &self.wind {
            if w.axis == axis && t >= w.start && t < w.end {
                f += w.magnitude;
            }
        }
        f
    }

    /// Largest `|f|` over the state-independent part; sizes the σ̂ bound.
    pub fn max_magnitude(&self) -> f64 {
        let wind = self.wind.iter().map(|w| w.magnitude.abs() + 3.0 * w.magnitude_std).fold(0.0, f64::max);
        self.l + self.l0.abs() + wind
    }

    /// Draws the per-trial wind magnitudes.
    pub fn realize(&self, rng: &mut ChaCha8Rng) -> Self {
        let mut out = self.clone();
        for w in out.wind.iter_mut() {
            if w.magnitude_std > 0.0 {
                if let Ok(n) = Normal::new(0.0, w.magnitude_std) {
                    w.magnitude += n.sample(rng);
                }
            }
        }
        out
    }
}

/// Random stream for repetition `rep`, trial `trial` of a seeded run.
pub fn trial_rng(seed: u64, rep: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((rep << 32) | (trial & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone)]
struct AxisSim {
    ss: StateSpace,
    /// Realization state followed by the position `y₂`.
    x: Vec<f64>,
    rk: Rk4,
}

/// Mutable plant: per-axis states, clock and noise generator.
#[derive(Debug, Clone)]
pub struct PlantState {
    axes: Vec<AxisSim>,
    pub t: f64,
    rng: ChaCha8Rng,
    vel_noise: Option<Normal<f64>>,
    pos_noise: Option<Normal<f64>>,
    sim_dt: f64,
}

impl PlantState {
    pub fn new(cfg: &PlantConfig, rng: ChaCha8Rng) -> Result<Self> {
        let axes = cfg
            .axes
            .iter()
            .map(|a| {
                let ss = StateSpace::from_tf(a)?;
                let n = ss.order();
                Ok(AxisSim {
                    ss,
                    x: vec![0.0; n + 1],
                    rk: Rk4::new(n + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let noise = |s: f64| if s > 0.0 { Normal::new(0.0, s).ok() } else { None };
        Ok(Self {
            axes,
            t: 0.0,
            rng,
            vel_noise: noise(cfg.vel_noise_std),
            pos_noise: noise(cfg.pos_noise_std),
            sim_dt: cfg.sim_dt,
        })
    }

    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    /// At rest at position `y2`.
    pub fn reset(&mut self, y2: &[f64]) -> Result<()> {
        ensure_len(self.axes.len(), y2.len())?;
        for (ax, &p) in self.axes.iter_mut().zip(y2) {
            ax.x.iter_mut().for_each(|v| *v = 0.0);
            let n = ax.ss.order();
            ax.x[n] = p;
        }
        self.t = 0.0;
        Ok(())
    }

    /// Places axis `i` on the equilibrium with velocity `v`.
    pub fn set_velocity(&mut self, i: usize, v: f64) {
        let ax = &mut self.axes[i];
        let c0 = ax.ss.c[0];
        if c0 != 0.0 {
            ax.x[0] = v / c0;
        }
    }

    pub fn true_y1(&self) -> Vec<f64> {
        self.axes.iter().map(|ax| ax.ss.output(&ax.x, 0.0)).collect()
    }

    pub fn true_y2(&self) -> Vec<f64> {
        self.axes.iter().map(|ax| ax.x[ax.ss.order()]).collect()
    }

    /// Integrates every axis over `dt` with `u` held, in `sim_dt` substeps.
    pub fn advance(&mut self, dist: &DisturbanceSpec, u: &[f64], dt: f64) -> Result<()> {
        ensure_len(self.axes.len(), u.len())?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control input"));
        }
        let steps = libm::round(dt / self.sim_dt).max(1.0) as usize;
        let h = dt / steps as f64;
        for s in 0..steps {
            let t0 = self.t + s as f64 * h;
            for (i, ax) in self.axes.iter_mut().enumerate() {
                let ss = &ax.ss;
                let n = ss.order();
                let ui = u[i];
                ax.rk.step(
                    |t, x, dx| {
                        let y1 = ss.output(&x[..n], 0.0);
                        ss.deriv_into(&x[..n], ui + dist.eval(i, t, y1), &mut dx[..n]);
                        dx[n] = y1;
                    },
                    t0,
                    &mut ax.x,
                    h,
                );
                if ax.x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Diverged { time: t0, axis: i });
                }
            }
        }
        self.t += dt;
        Ok(())
    }

    /// Noisy `(y₁, y₂)` measurements written into the given buffers.
    pub fn measure_into(&mut self, y1: &mut [f64], y2: &mut [f64]) {
        for (i, ax) in self.axes.iter().enumerate() {
            let n = ax.ss.order();
            y1[i] = ax.ss.output(&ax.x[..n], 0.0);
            y2[i] = ax.x[n];
        }
        if let Some(nv) = self.vel_noise {
            for v in y1.iter_mut() {
                *v += nv.sample(&mut self.rng);
            }
        }
        if let Some(np) = self.pos_noise {
            for v in y2.iter_mut() {
                *v += np.sample(&mut self.rng);
            }
        }
    }
}

/// Advances the plant by `dt` and returns noisy `(y₁, y₂)`.
pub fn plant_step(
    state: &mut PlantState,
    dist: &DisturbanceSpec,
    u: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    state.advance(dist, u, dt)?;
    let n = state.n_axes();
    let (mut y1, mut y2) = (vec![0.0; n], vec![0.0; n]);
    state.measure_into(&mut y1, &mut y2);
    Ok((y1, y2))
}

/// Time for the unit step response of `a` to first reach 90% of its DC gain.
pub fn rise_time_90(a: &RationalTF, dt: f64, t_max: f64) -> Option<f64> {
    let mut sim = crate::lti::TfSimulator::from_tf(a).ok()?;
    let target = 0.9 * a.dc_gain();
    let mut t = 0.0;
    while t < t_max {
        let y = sim.step(1.0, dt);
        t += dt;
        if y >= target {
            return Some(t);
        }
    }
    None
}
