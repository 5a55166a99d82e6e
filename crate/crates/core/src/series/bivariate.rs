//! Series in two spectral variables `z, w`, truncated in total degree.

use std::collections::BTreeMap;

use super::tseries::{TSeries, EXACT};
use crate::error::{Error, Result};

/// `Σ_{a+b ≤ total} c_{ab} z^a w^b` with [`TSeries`] coefficients.
#[derive(Clone, Debug)]
pub struct BiSeries {
    total: u32,
    coeffs: BTreeMap<(u32, u32), TSeries>,
}

impl BiSeries {
    pub fn new(total: u32) -> Self {
        BiSeries {
            total,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn get(&self, a: u32, b: u32) -> TSeries {
        assert!(
            a + b <= self.total,
            "z^{a} w^{b} beyond total degree {}",
            self.total
        );
        self.coeffs
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(|| TSeries::zero(0, EXACT))
    }

    pub fn set(&mut self, a: u32, b: u32, v: TSeries) {
        if a + b <= self.total {
            self.coeffs.insert((a, b), v);
        }
    }

    pub fn add_to(&mut self, a: u32, b: u32, v: &TSeries) {
        if a + b > self.total {
            return;
        }
        let cur = self.get(a, b);
        self.coeffs.insert((a, b), &cur + v);
    }

    /// The quotient by `z + w`, known through total degree `total − 1`.
    ///
    /// Fails unless the numerator vanishes on `w = −z` at every degree.
    pub fn divide_by_z_plus_w(&self) -> Result<BiSeries> {
        if !self.get(0, 0).is_zero() {
            return Err(Error::NotDivisible(0));
        }
        let mut q = BiSeries::new(self.total.saturating_sub(1));
        // num_{a,b} = q_{a-1,b} + q_{a,b-1}; solve along each anti-diagonal.
        for d in 1..=self.total {
            let mut prev = self.get(d, 0);
            q.set(d - 1, 0, prev.clone());
            for b in 1..d {
                let next = &self.get(d - b, b) - &prev;
                q.set(d - 1 - b, b, next.clone());
                prev = next;
            }
            if self.get(0, d) != prev {
                return Err(Error::NotDivisible(d));
            }
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn c(n: i64) -> TSeries {
        TSeries::constant(0, Scalar::from_int(n))
    }

    fn from(total: u32, terms: &[((u32, u32), i64)]) -> BiSeries {
        let mut s = BiSeries::new(total);
        for &((a, b), v) in terms {
            s.set(a, b, c(v));
        }
        s
    }

    #[test]
    fn z_plus_w() {
        let q = from(3, &[((1, 0), 1), ((0, 1), 1)])
            .divide_by_z_plus_w()
            .unwrap();
        assert_eq!(q.get(0, 0), c(1));
        assert!(q.get(1, 0).is_zero() && q.get(0, 1).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let q = from(3, &[((2, 0), 1), ((0, 2), -1)])
            .divide_by_z_plus_w()
            .unwrap();
        assert_eq!(q.get(1, 0), c(1));
        assert_eq!(q.get(0, 1), c(-1));
        assert!(q.get(0, 0).is_zero());
    }

    #[test]
    fn rejects_indivisible() {
        let err = from(2, &[((1, 0), 1)]).divide_by_z_plus_w().unwrap_err();
        assert!(err.to_string().contains("not unitary"));
        assert!(from(2, &[((0, 0), 1)]).divide_by_z_plus_w().is_err());
    }
}
