use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::polynomial::{Polynomial, C64};
use crate::math;
use crate::{Error, Result};

/// Default relative tolerance for pairing numerator and denominator roots.
pub const DEFAULT_CANCEL_TOL: f64 = 1e-8;

/// Rational transfer function `num(s) / den(s)`.
///
/// Values produced by the arithmetic in this module are normalized: the
/// denominator is monic and common root pairs have been cancelled.
/// Serializes as `{"num": [...], "den": [...]}` in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTF {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl RationalTF {
    /// Builds and normalizes `num / den` without cancelling common factors.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Degenerate("zero denominator"));
        }
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn constant(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::constant(1.0),
        }
    }

    /// First-order low-pass `a / (s + a)`, unit DC gain.
    pub fn first_order(a: f64) -> Self {
        Self {
            num: Polynomial::constant(a),
            den: Polynomial::linear(a),
        }
    }

    /// Pure integrator `1/s`.
    pub fn integrator() -> Self {
        Self {
            num: Polynomial::constant(1.0),
            den: Polynomial::new(alloc::vec![0.0, 1.0]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn relative_degree(&self) -> isize {
        self.den.degree() as isize - self.num.degree() as isize
    }

    pub fn dc_gain(&self) -> f64 {
        self.num.eval(0.0) / self.den.eval(0.0)
    }

    pub fn eval(&self, s: C64) -> C64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn poles(&self) -> Vec<C64> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Vec<C64> {
        self.num.roots()
    }

    /// Removes numerator/denominator root pairs closer than `rel_tol`
    /// (relative to the root magnitude, floored at 1) and renormalizes.
    pub fn cancel(&self, rel_tol: f64) -> Self {
        let num = self.num.trimmed(1e-13);
        if num.is_zero() {
            return Self {
                num: Polynomial::zero(),
                den: Polynomial::constant(1.0),
            };
        }
        let den = self.den.trimmed(1e-13);
        let zs = num.roots();
        let ps = den.roots();
        let mut used = alloc::vec![false; ps.len()];
        let mut factors: Vec<Polynomial> = Vec::new();
        for z in zs.iter().filter(|z| z.im >= 0.0) {
            let best = ps
                .iter()
                .enumerate()
                .filter(|(i, p)| !used[*i] && p.im >= 0.0)
                .map(|(i, p)| (i, math::hypot(p.re - z.re, p.im - z.im)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
            if let Some((i, dist)) = best {
                let p = ps[i];
                if dist <= rel_tol * math::hypot(p.re, p.im).max(1.0) {
                    used[i] = true;
                    let root = C64::new(0.5 * (p.re + z.re), 0.5 * (p.im + z.im));
                    factors.push(if root.im == 0.0 {
                        Polynomial::linear(-root.re)
                    } else {
                        Polynomial::new(alloc::vec![
                            root.re * root.re + root.im * root.im,
                            -2.0 * root.re,
                            1.0
                        ])
                    });
                }
            }
        }
        let mut num = num;
        let mut den = den;
        for f in &factors {
            num = num.div_rem(f).0;
            den = den.div_rem(f).0;
        }
        // Never fails: den is a nonzero quotient of a nonzero polynomial.
        Self::new(num, den).unwrap_or_else(|_| self.clone())
    }

    pub fn normalized(&self) -> Self {
        self.cancel(DEFAULT_CANCEL_TOL)
    }

    /// True when both transfer functions have equal normalized coefficients
    /// to within `tol`.
    pub fn approx_eq(&self, other: &RationalTF, tol: f64) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        coeffs_close(&a.num, &b.num, tol) && coeffs_close(&a.den, &b.den, tol)
    }
}

fn coeffs_close(a: &Polynomial, b: &Polynomial, tol: f64) -> bool {
    let n = a.coeffs().len().max(b.coeffs().len());
    (0..n).all(|i| {
        let x = a.coeffs().get(i).copied().unwrap_or(0.0);
        let y = b.coeffs().get(i).copied().unwrap_or(0.0);
        (x - y).abs() <= tol
    })
}

fn same_denominator(a: &Polynomial, b: &Polynomial) -> bool {
    a.degree() == b.degree()
        && a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).abs() <= 1e-14 * (1.0 + x.abs()))
}

pub fn tf_add(a: &RationalTF, b: &RationalTF) -> Result<RationalTF> {
    let tf = if same_denominator(&a.den, &b.den) {
        RationalTF::new(&a.num + &b.num, a.den.clone())?
    } else {
        RationalTF::new(&(&a.num * &b.den) + &(&b.num * &a.den), &a.den * &b.den)?
    };
    Ok(tf.normalized())
}

pub fn tf_sub(a: &RationalTF, b: &RationalTF) -> Result<RationalTF> {
    let neg = RationalTF {
        num: -&b.num,
        den: b.den.clone(),
    };
    tf_add(a, &neg)
}

pub fn tf_mul(a: &RationalTF, b: &RationalTF) -> Result<RationalTF> {
    Ok(RationalTF::new(&a.num * &b.num, &a.den * &b.den)?.normalized())
}

pub fn tf_div(a: &RationalTF, b: &RationalTF) -> Result<RationalTF> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(RationalTF::new(&a.num * &b.den, &a.den * &b.num)?.normalized())
}

/// `H = A M / (C A + (1 - C) M)`, formed at the polynomial level so the
/// `den(A) den(M)` factor shared by numerator and denominator never appears.
pub fn compose_h(
    a: &RationalTF,
    m: &RationalTF,
    c: &RationalTF,
    cancel_tol: f64,
) -> Result<RationalTF> {
    if !a.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    let num = &(&a.num * &m.num) * &c.den;
    let den = &(&(&c.num * &a.num) * &m.den) + &(&(&(&c.den - &c.num) * &m.num) * &a.den);
    let den = den.trimmed(1e-13);
    if den.is_zero() {
        return Err(Error::Degenerate("H(s) denominator vanishes"));
    }
    Ok(RationalTF::new(num, den)?.cancel(cancel_tol))
}

/// `G = H (1 - C)`.
pub fn compose_g(h: &RationalTF, c: &RationalTF) -> Result<RationalTF> {
    let one_minus_c = RationalTF::new(&c.den - &c.num, c.den.clone())?;
    tf_mul(h, &one_minus_c)
}

/// `F = 1 / (s + K H C)`.
pub fn compose_f(h: &RationalTF, c: &RationalTF, k: f64) -> Result<RationalTF> {
    let hc_num = &h.num * &c.num;
    let hc_den = &h.den * &c.den;
    let s = Polynomial::new(alloc::vec![0.0, 1.0]);
    let den = &(&s * &hc_den) + &hc_num.scale(k);
    if den.trimmed(1e-13).is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(RationalTF::new(hc_den, den)?.normalized())
}
