use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::math;

pub type C64 = Complex<f64>;

/// Real polynomial in `s`, coefficients in ascending powers.
///
/// Trailing (highest-power) zeros are trimmed on construction so the leading
/// coefficient is nonzero unless the polynomial is identically zero, in which
/// case it is stored as `[0.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `s + a`
    pub fn linear(a: f64) -> Self {
        Self::new(vec![a, 1.0])
    }

    /// Monic polynomial with the given roots. Complex roots must come in
    /// conjugate pairs; only the real part of the product is kept.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut acc: Vec<C64> = vec![C64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![C64::new(0.0, 0.0); acc.len() + 1];
            for (i, c) in acc.iter().enumerate() {
                next[i + 1] += *c;
                next[i] -= *c * *r;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        math::norm_inf(&self.coeffs)
    }

    /// Drops leading coefficients that are negligible relative to the largest
    /// one. Needed after subtraction, where cancellation leaves round-off.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().unwrap().abs() <= rel_tol * scale {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    pub fn monic(&self) -> Self {
        self.scale(1.0 / self.leading())
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect::<Vec<_>>(),
        )
    }

    /// `p(s + a)`, by repeated synthetic division (Taylor shift).
    pub fn shift(&self, a: f64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += a * c[j + 1];
            }
        }
        Self::new(c)
    }

    /// Polynomial long division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dn = divisor.degree();
        if self.degree() < dn {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let lead = divisor.leading();
        let mut quot = vec![0.0; self.degree() - dn + 1];
        for i in (0..quot.len()).rev() {
            let q = rem[i + dn] / lead;
            quot[i] = q;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= q * d;
            }
            rem[i + dn] = 0.0;
        }
        rem.truncate(dn.max(1));
        (Self::new(quot), Self::new(rem))
    }

    /// All complex roots via Aberth–Ehrlich simultaneous iteration.
    ///
    /// Roots that coincide to within `1e-5` relative are replaced by their
    /// centroid: a root of multiplicity `k` is only resolved to about
    /// `eps^(1/k)` individually, but the mean of its cluster is accurate.
    pub fn roots(&self) -> Vec<C64> {
        let p = self.trimmed(0.0);
        let n = p.degree();
        if n == 0 {
            return Vec::new();
        }
        // Factor out roots at the origin exactly.
        let zeros_at_origin = p.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let core = Polynomial::new(p.coeffs[zeros_at_origin..].to_vec()).monic();
        let mut roots = vec![C64::new(0.0, 0.0); zeros_at_origin];
        roots.extend(aberth(&core));
        cluster_multiple_roots(&mut roots);
        roots.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(core::cmp::Ordering::Equal))
        });
        roots
    }
}

fn abs_c(z: C64) -> f64 {
    math::hypot(z.re, z.im)
}

fn aberth(p: &Polynomial) -> Vec<C64> {
    let n = p.degree();
    match n {
        0 => return Vec::new(),
        1 => return vec![C64::new(-p.coeffs[0] / p.coeffs[1], 0.0)],
        _ => {}
    }
    let dp = p.derivative();
    // Initial guesses on a circle whose radius is the geometric mean of the
    // root magnitudes, rotated off the real axis to break symmetry.
    let radius = libm::pow(p.coeffs[0].abs().max(1e-300), 1.0 / n as f64).max(1e-3);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C64::new(radius * libm::cos(theta), radius * libm::sin(theta))
        })
        .collect();
    for _ in 0..1000 {
        let mut max_step = 0.0_f64;
        for k in 0..n {
            let pk = p.eval_complex(z[k]);
            if pk.re == 0.0 && pk.im == 0.0 {
                continue;
            }
            let w = pk / dp.eval_complex(z[k]);
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.re != 0.0 || diff.im != 0.0 {
                        sum += C64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let step = w / (C64::new(1.0, 0.0) - w * sum);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                max_step = max_step.max(abs_c(step) / (1.0 + abs_c(z[k])));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // Snap nearly-real roots and enforce conjugate symmetry.
    for r in z.iter_mut() {
        if r.im.abs() <= 1e-10 * (1.0 + r.re.abs()) {
            r.im = 0.0;
        }
    }
    z
}

fn cluster_multiple_roots(roots: &mut [C64]) {
    let n = roots.len();
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut members = vec![i];
        for j in (i + 1)..n {
            if !assigned[j] && abs_c(roots[i] - roots[j]) <= 1e-5 * (1.0 + abs_c(roots[i])) {
                members.push(j);
            }
        }
        if members.len() > 1 {
            let mut centroid = C64::new(0.0, 0.0);
            for &m in &members {
                centroid += roots[m];
            }
            centroid /= members.len() as f64;
            // A real polynomial's cluster straddling the real axis is real.
            if centroid.im.abs() <= 1e-5 * (1.0 + centroid.re.abs()) {
                centroid.im = 0.0;
            }
            for &m in &members {
                roots[m] = centroid;
                assigned[m] = true;
            }
        }
        assigned[i] = true;
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Polynomial::new(out)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}
