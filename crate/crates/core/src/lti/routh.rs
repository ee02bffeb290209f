use alloc::vec;
use alloc::vec::Vec;

use super::polynomial::Polynomial;
use crate::{Error, Result};

/// Entries below this fraction of the row scale are treated as zero.
const ZERO_TOL: f64 = 1e-12;
const EPSILON_SUBSTITUTE: f64 = 1e-9;

/// Routh array of a polynomial together with the diagnostics needed for a
/// stability verdict.
#[derive(Debug, Clone)]
pub struct RouthTable {
    pub rows: Vec<Vec<f64>>,
    /// A first-column entry was zero and replaced by a small positive value.
    pub epsilon_used: bool,
    /// A whole row vanished; it was replaced by the derivative of the
    /// auxiliary polynomial formed from the row above.
    pub zero_row: bool,
}

impl RouthTable {
    pub fn build(p: &Polynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let n = p.degree();
        // Descending-power coefficients.
        let desc: Vec<f64> = p.coeffs().iter().rev().copied().collect();
        let width = n / 2 + 1;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut r0 = vec![0.0; width];
        let mut r1 = vec![0.0; width];
        for (i, c) in desc.iter().enumerate() {
            if i % 2 == 0 {
                r0[i / 2] = *c;
            } else {
                r1[i / 2] = *c;
            }
        }
        rows.push(r0);
        if n >= 1 {
            rows.push(r1);
        }
        let mut epsilon_used = false;
        let mut zero_row = false;
        let scale = p.max_abs_coeff();
        for k in 2..=n {
            let (prev2, prev1) = (&rows[k - 2], &rows[k - 1]);
            let row_scale = prev1.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            let mut prev1 = prev1.clone();
            if row_scale <= ZERO_TOL * scale {
                // Zero row: use d/ds of the auxiliary polynomial from prev2,
                // whose power is n - (k - 2).
                zero_row = true;
                let power = n - (k - 2);
                for (j, slot) in prev1.iter_mut().enumerate() {
                    let pw = power as isize - 2 * j as isize;
                    *slot = if pw > 0 { prev2[j] * pw as f64 } else { 0.0 };
                }
                rows[k - 1] = prev1.clone();
            }
            if prev1[0].abs() <= ZERO_TOL * scale {
                epsilon_used = true;
                prev1[0] = EPSILON_SUBSTITUTE * scale.max(1.0);
                rows[k - 1][0] = prev1[0];
            }
            let prev2 = &rows[k - 2];
            let mut row = vec![0.0; width];
            for j in 0..width - 1 {
                row[j] = (prev1[0] * prev2[j + 1] - prev2[0] * prev1[j + 1]) / prev1[0];
            }
            rows.push(row);
        }
        Ok(Self {
            rows,
            epsilon_used,
            zero_row,
        })
    }

    pub fn first_column(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    /// Sign changes in the first column; equals the number of open right
    /// half-plane roots when no zero row occurred.
    pub fn sign_changes(&self) -> usize {
        let col = self.first_column();
        col.windows(2)
            .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
            .count()
    }

    /// Hurwitz iff every first-column entry is strictly of one sign. An
    /// epsilon substitution or a zero row both imply roots on or to the
    /// right of the imaginary axis.
    pub fn is_stable(&self) -> bool {
        !self.epsilon_used && !self.zero_row && self.sign_changes() == 0
    }
}

/// True iff every root of `p` has strictly negative real part.
pub fn routh_hurwitz_stable(p: &Polynomial) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() < 1 {
        return Err(Error::DegreeTooLow(p.degree()));
    }
    Ok(RouthTable::build(p)?.is_stable())
}

/// Smallest decay rate `min |Re(root)|` of a Hurwitz polynomial, found by
/// bisecting on the shift `a` for which `p(s - a)` stays Hurwitz.
pub fn slowest_decay_rate(p: &Polynomial) -> Result<f64> {
    if !routh_hurwitz_stable(p)? {
        return Err(Error::Unstable);
    }
    let stable_shift = |a: f64| -> bool {
        RouthTable::build(&p.shift(-a))
            .map(|t| t.is_stable())
            .unwrap_or(false)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while stable_shift(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(lo);
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if stable_shift(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desc(c: &[f64]) -> Polynomial {
        Polynomial::new(c.iter().rev().copied().collect::<Vec<_>>())
    }

    #[test]
    fn textbook_cases() {
        assert!(routh_hurwitz_stable(&desc(&[1.0, 3.0, 2.0])).unwrap());
        assert!(!routh_hurwitz_stable(&desc(&[1.0, -1.0, 2.0])).unwrap());
        let p = desc(&[1.0, 1.0, 2.0, 8.0]);
        let t = RouthTable::build(&p).unwrap();
        assert_eq!(t.first_column()[2], -6.0);
        assert_eq!(t.sign_changes(), 2);
        assert!(!routh_hurwitz_stable(&p).unwrap());
    }

    #[test]
    fn imaginary_axis_roots_are_unstable() {
        // (s^2 + 1)(s + 1): zero row at s^1.
        let p = desc(&[1.0, 1.0, 1.0, 1.0]);
        let t = RouthTable::build(&p).unwrap();
        assert!(t.zero_row);
        assert!(!routh_hurwitz_stable(&p).unwrap());
        // s^2 + 1 alone.
        assert!(!routh_hurwitz_stable(&desc(&[1.0, 0.0, 1.0])).unwrap());
        // Root at the origin.
        assert!(!routh_hurwitz_stable(&desc(&[1.0, 1.0, 0.0])).unwrap());
    }

    #[test]
    fn epsilon_rule_counts_rhp_roots() {
        // s^4 + s^3 + 2 s^2 + 2 s + 3: zero first-column entry, two RHP roots.
        let p = desc(&[1.0, 1.0, 2.0, 2.0, 3.0]);
        let t = RouthTable::build(&p).unwrap();
        assert!(t.epsilon_used);
        assert_eq!(t.sign_changes(), 2);
        assert!(!t.is_stable());
    }

    #[test]
    fn errors() {
        assert_eq!(
            routh_hurwitz_stable(&Polynomial::zero()),
            Err(Error::ZeroPolynomial)
        );
        assert_eq!(
            routh_hurwitz_stable(&Polynomial::constant(2.0)),
            Err(Error::DegreeTooLow(0))
        );
    }

    #[test]
    fn decay_rate_bisection() {
        // (s + 0.5)(s + 3)
        let p = desc(&[1.0, 3.5, 1.5]);
        let a = slowest_decay_rate(&p).unwrap();
        assert!((a - 0.5).abs() < 1e-9);
        // complex pair -0.2 +- 4j with a real pole at -7
        let q = &desc(&[1.0, 0.4, 16.04]) * &Polynomial::linear(7.0);
        assert!((slowest_decay_rate(&q).unwrap() - 0.2).abs() < 1e-9);
    }
}
