//! Matrix-valued Laurent series in the spectral variable `z`.

use std::ops::{Add, Mul, Sub};

use super::matrix::Matrix;
use super::tseries::TSeries;
use crate::error::{Error, Result};
use crate::scalar::{rat, Scalar};

/// Marks a series with no truncation in `z` (a Laurent polynomial).
pub const POLYNOMIAL: i32 = i32::MAX;

/// `Σ_{k=low}^{high} A_k z^k`; coefficients beyond the stored ones but not
/// above `high` are zero, anything above `high` is unknown.
#[derive(Clone, Debug)]
pub struct ZSeries {
    low: i32,
    high: i32,
    rows: usize,
    cols: usize,
    coeffs: Vec<Matrix>,
}

impl ZSeries {
    /// Series known exactly through `z^{low + coeffs.len() - 1}`.
    pub fn new(low: i32, coeffs: Vec<Matrix>) -> Self {
        let high = low + coeffs.len() as i32 - 1;
        Self::with_high(low, high, coeffs)
    }

    pub fn with_high(low: i32, high: i32, coeffs: Vec<Matrix>) -> Self {
        let (rows, cols) = coeffs
            .first()
            .map(|m| (m.rows(), m.cols()))
            .expect("a z-series needs at least one coefficient to fix its shape");
        assert!(coeffs.iter().all(|m| m.rows() == rows && m.cols() == cols));
        ZSeries {
            low,
            high,
            rows,
            cols,
            coeffs,
        }
    }

    pub fn identity(n: usize, high: i32) -> Self {
        Self::with_high(0, high, vec![Matrix::identity(n, 0)])
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    pub fn high(&self) -> i32 {
        self.high
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Coefficient of `z^k`.  Panics above the truncation.
    pub fn coeff(&self, k: i32) -> Matrix {
        assert!(
            k <= self.high,
            "z^{k} is beyond the truncation z^{}",
            self.high
        );
        if k < self.low {
            return Matrix::zero(self.rows, self.cols, 0);
        }
        self.coeffs
            .get((k - self.low) as usize)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.rows, self.cols, 0))
    }

    fn coeff_ref(&self, k: i32) -> Option<&Matrix> {
        if k < self.low || k > self.high {
            return None;
        }
        self.coeffs.get((k - self.low) as usize)
    }

    pub fn truncated(&self, high: i32) -> Self {
        let high = high.min(self.high);
        let keep = (high - self.low + 1).max(1) as usize;
        let mut coeffs: Vec<Matrix> = self.coeffs.iter().take(keep).cloned().collect();
        if coeffs.is_empty() {
            coeffs.push(Matrix::zero(self.rows, self.cols, 0));
        }
        ZSeries {
            low: self.low,
            high,
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }

    pub fn transpose(&self) -> Self {
        ZSeries {
            low: self.low,
            high: self.high,
            rows: self.cols,
            cols: self.rows,
            coeffs: self.coeffs.iter().map(Matrix::transpose).collect(),
        }
    }

    /// Substitute `z ↦ −z`.
    pub fn neg_z(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if (self.low + i as i32).rem_euclid(2) == 1 {
                    -m
                } else {
                    m.clone()
                }
            })
            .collect();
        ZSeries {
            coeffs,
            ..self.clone()
        }
    }

    pub fn map(&self, f: impl Fn(&Matrix) -> Matrix) -> Self {
        let coeffs: Vec<Matrix> = self.coeffs.iter().map(f).collect();
        let (rows, cols) = (coeffs[0].rows(), coeffs[0].cols());
        ZSeries {
            low: self.low,
            high: self.high,
            rows,
            cols,
            coeffs,
        }
    }

    /// Exponential of a series whose coefficients vanish in degrees ≤ 0.
    pub fn exp(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Series("exp of a non-square series".into()));
        }
        for k in self.low..=0.min(self.high) {
            if let Some(m) = self.coeff_ref(k) {
                if !m.is_zero() {
                    return Err(Error::Series(format!(
                        "exp needs vanishing coefficients in degrees <= 0; z^{k} is nonzero"
                    )));
                }
            }
        }
        if self.high == POLYNOMIAL {
            return Err(Error::Series("exp of an untruncated series".into()));
        }
        let n = self.rows;
        let mut out = Self::identity(n, self.high);
        let mut term = Self::identity(n, self.high);
        for k in 1..=self.high as i64 {
            term = (&term * self)
                .truncated(self.high)
                .map(|m| m.scale_scalar(&Scalar::from_rational(rat(1, k))));
            out = &out + &term;
        }
        Ok(out)
    }

    /// Coefficientwise equality through `z^{min(high)}`.
    pub fn agrees_with(&self, other: &ZSeries) -> bool {
        let high = self.high.min(other.high);
        let low = self.low.min(other.low);
        let top = if high == POLYNOMIAL {
            (self.low + self.coeffs.len() as i32).max(other.low + other.coeffs.len() as i32)
        } else {
            high
        };
        (low..=top).all(|k| self.coeff(k) == other.coeff(k))
    }

    /// First order `k ≤ high` at which `Rᵀ(−z)·R(z) ≠ I`, if any.
    pub fn unitarity_defect(&self) -> Option<i32> {
        let prod = &self.transpose().neg_z() * self;
        let id = Self::identity(self.rows, prod.high);
        let top = prod.high;
        (prod.low.min(0)..=top).find(|&k| prod.coeff(k) != id.coeff(k))
    }
}

impl<'a> Mul<&'a ZSeries> for &'a ZSeries {
    type Output = ZSeries;
    fn mul(self, rhs: &ZSeries) -> ZSeries {
        assert_eq!(self.cols, rhs.rows, "z-series shape mismatch");
        let low = self.low + rhs.low;
        let high = self
            .high
            .saturating_add(rhs.low)
            .min(rhs.high.saturating_add(self.low));
        let top_a = self.low + self.coeffs.len() as i32 - 1;
        let top_b = rhs.low + rhs.coeffs.len() as i32 - 1;
        let top = (top_a + top_b).min(high);
        let mut coeffs = Vec::new();
        for k in low..=top.max(low) {
            let mut acc: Option<Matrix> = None;
            for i in self.low..=top_a {
                let j = k - i;
                if j < rhs.low || j > top_b {
                    continue;
                }
                let p = &self.coeffs[(i - self.low) as usize] * &rhs.coeffs[(j - rhs.low) as usize];
                acc = Some(match acc {
                    None => p,
                    Some(a) => &a + &p,
                });
            }
            coeffs.push(acc.unwrap_or_else(|| Matrix::zero(self.rows, rhs.cols, 0)));
        }
        ZSeries {
            low,
            high,
            rows: self.rows,
            cols: rhs.cols,
            coeffs,
        }
    }
}

fn combine(a: &ZSeries, b: &ZSeries, f: impl Fn(&Matrix, &Matrix) -> Matrix) -> ZSeries {
    assert_eq!(a.dims(), b.dims(), "z-series shape mismatch");
    let low = a.low.min(b.low);
    let high = a.high.min(b.high);
    let top_a = a.low + a.coeffs.len() as i32 - 1;
    let top_b = b.low + b.coeffs.len() as i32 - 1;
    let top = top_a.max(top_b).min(high);
    let zero = Matrix::zero(a.rows, a.cols, 0);
    let coeffs = (low..=top.max(low))
        .map(|k| {
            let x = a.coeff_ref(k).unwrap_or(&zero);
            let y = b.coeff_ref(k).unwrap_or(&zero);
            f(x, y)
        })
        .collect();
    ZSeries {
        low,
        high,
        rows: a.rows,
        cols: a.cols,
        coeffs,
    }
}

impl<'a> Add<&'a ZSeries> for &'a ZSeries {
    type Output = ZSeries;
    fn add(self, rhs: &ZSeries) -> ZSeries {
        combine(self, rhs, |x, y| x + y)
    }
}

impl<'a> Sub<&'a ZSeries> for &'a ZSeries {
    type Output = ZSeries;
    fn sub(self, rhs: &ZSeries) -> ZSeries {
        combine(self, rhs, |x, y| x - y)
    }
}

/// Scalar-valued convenience: a 1×1 series from scalar coefficients.
pub fn scalar_zseries(low: i32, coeffs: &[Scalar]) -> ZSeries {
    ZSeries::new(
        low,
        coeffs
            .iter()
            .map(|c| Matrix::from_fn(1, 1, |_, _| TSeries::constant(0, c.clone())))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn sc(n: i64, d: i64) -> Scalar {
        Scalar::from_frac(n, d)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let a = ZSeries::new(0, vec![Matrix::zero(2, 2, 0); 5]);
        let e = a.exp().unwrap();
        assert!(e.agrees_with(&ZSeries::identity(2, 4)));
    }

    #[test]
    fn exp_scalar() {
        let c = sc(3, 2);
        let a = scalar_zseries(
            0,
            &[Scalar::zero(), c.clone(), Scalar::zero(), Scalar::zero()],
        );
        let e = a.exp().unwrap();
        let mut f = Scalar::one();
        for k in 0..=3 {
            assert_eq!(e.coeff(k).get(0, 0).constant_term(), f);
            f = &(&f * &c) * &sc(1, k as i64 + 1);
        }
    }

    #[test]
    fn exp_nilpotent() {
        let n = Matrix::from_scalars(2, 2, |i, j| {
            if (i, j) == (0, 1) {
                Scalar::from_int(5)
            } else {
                Scalar::zero()
            }
        });
        let a = ZSeries::new(
            0,
            vec![Matrix::zero(2, 2, 0), n.clone(), Matrix::zero(2, 2, 0)],
        );
        let e = a.exp().unwrap();
        assert_eq!(e.coeff(0), Matrix::identity(2, 0));
        assert_eq!(e.coeff(1), n);
        assert!(e.coeff(2).is_zero());
    }

    #[test]
    fn exp_rejects_constant_part() {
        let a = scalar_zseries(0, &[Scalar::one(), Scalar::one()]);
        assert!(a.exp().is_err());
        let b = scalar_zseries(-1, &[Scalar::one(), Scalar::zero(), Scalar::one()]);
        assert!(b.exp().is_err());
    }

    #[test]
    fn neg_z_flips_odd() {
        let a = scalar_zseries(-1, &[sc(1, 1), sc(2, 1), sc(3, 1)]);
        let b = a.neg_z();
        assert_eq!(b.coeff(-1).get(0, 0).constant_term(), sc(-1, 1));
        assert_eq!(b.coeff(0).get(0, 0).constant_term(), sc(2, 1));
        assert_eq!(b.coeff(1).get(0, 0).constant_term(), sc(-3, 1));
    }

    #[test]
    fn product_truncation() {
        let a = scalar_zseries(0, &[sc(1, 1), sc(1, 1), sc(1, 1)]);
        let b = scalar_zseries(1, &[sc(1, 1), sc(1, 1)]);
        let p = &a * &b;
        assert_eq!(p.low(), 1);
        assert_eq!(p.high(), 2);
        assert_eq!(p.coeff(2).get(0, 0).constant_term(), sc(2, 1));
    }
}
