//! Closed-loop reference systems the L1 loop is compared against.

use alloc::vec;
use alloc::vec::Vec;

use super::L1AxisConfig;
use crate::lti::{compose_g, compose_h, tf_mul, RationalTF, Rk4, StateSpace};
use crate::lti::rational::DEFAULT_CANCEL_TOL;
use crate::plant::DisturbanceSpec;
use crate::Result;

/// Non-adaptive reference loop of one axis:
/// `y₁ = H C r₁ + G f(t, y₁)`, `r₁ = K (r₂ - y₂)`, `y₂ = ∫ y₁`.
#[derive(Debug, Clone)]
pub struct ReferenceSystem {
    hc: StateSpace,
    g: StateSpace,
    k: f64,
}

impl ReferenceSystem {
    pub fn new(a: &RationalTF, cfg: &L1AxisConfig) -> Result<Self> {
        let c = cfg.filter();
        let h = compose_h(a, &cfg.reference_model(), &c, DEFAULT_CANCEL_TOL)?;
        let hc = tf_mul(&h, &c)?;
        let g = compose_g(&h, &c)?;
        Ok(Self {
            hc: StateSpace::from_tf(&hc)?,
            g: StateSpace::from_tf(&g)?,
            k: cfg.k,
        })
    }

    /// Ideal loop with `y₁ = M r₁` exactly (no disturbance path).
    pub fn model_reference(cfg: &L1AxisConfig) -> Result<Self> {
        Ok(Self {
            hc: StateSpace::from_tf(&cfg.reference_model())?,
            g: StateSpace::from_tf(&RationalTF::constant(0.0))?,
            k: cfg.k,
        })
    }

    /// Positions at `t = (k + 1) dt` for `r₂` held on each interval
    /// `[k dt, (k + 1) dt)`, starting at rest at `y2_0`.
    pub fn simulate(
        &self,
        dist: &DisturbanceSpec,
        axis: usize,
        r2: &[f64],
        dt: f64,
        y2_0: f64,
        sim_dt: f64,
    ) -> Vec<f64> {
        let (nh, ng) = (self.hc.order(), self.g.order());
        let dim = nh + ng + 1;
        let mut x = vec![0.0; dim];
        x[dim - 1] = y2_0;
        let mut rk = Rk4::new(dim);
        let steps = libm::round(dt / sim_dt).max(1.0) as usize;
        let h = dt / steps as f64;
        let mut out = Vec::with_capacity(r2.len());
        let mut t = 0.0;
        for &r in r2 {
            for _ in 0..steps {
                rk.step(
                    |t, x, dx| {
                        let (xh, rest) = x.split_at(nh);
                        let (xg, y2) = rest.split_at(ng);
                        let y1 = self.hc.output(xh, 0.0) + self.g.output(xg, 0.0);
                        let r1 = self.k * (r - y2[0]);
                        let (dh, drest) = dx.split_at_mut(nh);
                        let (dg, dy2) = drest.split_at_mut(ng);
                        self.hc.deriv_into(xh, r1, dh);
                        self.g.deriv_into(xg, dist.eval(axis, t, y1), dg);
                        dy2[0] = y1;
                    },
                    t,
                    &mut x,
                    h,
                );
                t += h;
            }
            out.push(x[dim - 1]);
        }
        out
    }
}
