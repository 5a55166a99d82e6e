use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::tseries::{TSeries, EXACT};
use crate::scalar::Scalar;

/// Dense matrix with [`TSeries`] entries.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<TSeries>,
}

impl Matrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> TSeries) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize, nvars: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| TSeries::zero(nvars, EXACT))
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                TSeries::one(nvars)
            } else {
                TSeries::zero(nvars, EXACT)
            }
        })
    }

    pub fn from_scalars(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Scalar) -> Self {
        Self::from_fn(rows, cols, |i, j| TSeries::constant(0, f(i, j)))
    }

    pub fn diagonal(entries: Vec<TSeries>) -> Self {
        let n = entries.len();
        let nvars = entries.first().map_or(0, TSeries::nvars);
        let mut m = Self::zero(n, n, nvars);
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TSeries {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TSeries) {
        self.data[i * self.cols + j] = v;
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut TSeries {
        &mut self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> impl Iterator<Item = &TSeries> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&TSeries) -> TSeries) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &TSeries) -> Self {
        self.map(|x| x * c)
    }

    pub fn scale_scalar(&self, c: &Scalar) -> Self {
        self.map(|x| x.scale(c))
    }

    pub fn truncated(&self, prec: i32) -> Self {
        self.map(|x| x.truncated(prec))
    }

    pub fn min_prec(&self) -> i32 {
        self.data.iter().map(TSeries::prec).min().unwrap_or(EXACT)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(TSeries::is_zero)
    }

    /// Entrywise constant terms.
    pub fn at_origin(&self) -> Self {
        self.map(|x| TSeries::constant(0, x.constant_term()))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_constant() && e.constant_term().is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = TSeries::zero(0, EXACT);
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = rhs.get(k, j);
                if a.is_zero() && a.prec() == EXACT || b.is_zero() && b.prec() == EXACT {
                    continue;
                }
                acc += &(a * b);
            }
            acc
        })
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.map(|x| -x)
    }
}
