//! Truncated power series in the coordinate and Novikov variables.
//!
//! Each series carries its own precision: every monomial of total degree
//! strictly below `prec` is known exactly, everything at or above is unknown.
//! Products, derivatives and integrals propagate precision, so quantities that
//! lose a degree per step (like the R-matrix coefficients) stay honest.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::{int, Scalar};

/// Precision of a series known to all orders.
pub const EXACT: i32 = i32::MAX;

pub type Monomial = Vec<u8>;

fn degree(m: &[u8]) -> i32 {
    m.iter().map(|&e| e as i32).sum()
}

#[derive(Clone)]
pub struct TSeries {
    nvars: usize,
    prec: i32,
    terms: BTreeMap<Monomial, Scalar>,
}

impl TSeries {
    pub fn zero(nvars: usize, prec: i32) -> Self {
        TSeries {
            nvars,
            prec,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Scalar::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::monomial(nvars, m, Scalar::one())
    }

    pub fn monomial(nvars: usize, exps: Monomial, c: Scalar) -> Self {
        assert_eq!(exps.len(), nvars, "monomial arity");
        let mut s = Self::zero(nvars, EXACT);
        s.add_term(exps, &c);
        s
    }

    pub fn from_terms(
        nvars: usize,
        prec: i32,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Self {
        let mut s = Self::zero(nvars, prec);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial arity");
            s.add_term(m, &c);
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn prec(&self) -> i32 {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c·x^m`; silently dropped beyond the precision.
    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() || degree(&m) >= self.prec {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff(&self, m: &[u8]) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    /// Smallest degree of a nonzero term ([`EXACT`] for zero).
    pub fn valuation(&self) -> i32 {
        self.terms.keys().map(|m| degree(m)).min().unwrap_or(EXACT)
    }

    /// Lower bound on the degree of anything nonzero, known or not.
    fn val_bound(&self) -> i32 {
        self.valuation().min(self.prec)
    }

    pub fn truncated(&self, prec: i32) -> Self {
        let prec = prec.min(self.prec);
        TSeries {
            nvars: self.nvars,
            prec,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| degree(m) < prec)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of degree `d`.
    pub fn degree_part(&self, d: i32) -> Self {
        TSeries {
            nvars: self.nvars,
            prec: EXACT,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| degree(m) == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Keep only the terms selected by `keep`; precision is unchanged.
    pub fn filter(&self, keep: impl Fn(&[u8]) -> bool) -> Self {
        TSeries {
            nvars: self.nvars,
            prec: self.prec,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Lift a constant over zero variables to `nvars` variables.
    pub fn broadcast(&self, nvars: usize) -> Self {
        if self.nvars == nvars {
            return self.clone();
        }
        assert_eq!(self.nvars, 0, "cannot broadcast a non-constant series");
        let mut s = Self::zero(nvars, self.prec);
        if let Some(c) = self.terms.get(&Vec::new()) {
            s.add_term(vec![0; nvars], c);
        }
        s
    }

    fn align<'a>(
        a: &'a TSeries,
        b: &'a TSeries,
    ) -> (std::borrow::Cow<'a, TSeries>, std::borrow::Cow<'a, TSeries>) {
        use std::borrow::Cow;
        if a.nvars == b.nvars {
            (Cow::Borrowed(a), Cow::Borrowed(b))
        } else if a.nvars == 0 {
            (Cow::Owned(a.broadcast(b.nvars)), Cow::Borrowed(b))
        } else {
            (Cow::Borrowed(a), Cow::Owned(b.broadcast(a.nvars)))
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.prec);
        }
        TSeries {
            nvars: self.nvars,
            prec: self.prec,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let mut s = Self::zero(self.nvars, self.prec);
        for (m, c) in &self.terms {
            s.add_term(m.clone(), &f(c));
        }
        s
    }

    fn mul_ref(&self, other: &TSeries) -> TSeries {
        let (a, b) = Self::align(self, other);
        let prec = a
            .prec
            .saturating_add(b.val_bound())
            .min(b.prec.saturating_add(a.val_bound()));
        let mut out = TSeries::zero(a.nvars, prec);
        for (ma, ca) in &a.terms {
            let da = degree(ma);
            for (mb, cb) in &b.terms {
                if da + degree(mb) >= prec {
                    continue;
                }
                let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                out.add_term(m, &(ca * cb));
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let prec = if self.prec == EXACT {
            EXACT
        } else {
            (self.prec - 1).max(0)
        };
        let mut out = Self::zero(self.nvars, prec);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            out.add_term(m2, &c.scale(&int(m[i] as i64)));
        }
        out
    }

    /// Termwise antiderivative along variable `i` with zero integration constant.
    pub fn integrate(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.prec.saturating_add(1));
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2[i] += 1;
            let k = m2[i] as i64;
            out.add_term(m2, &c.scale(&crate::scalar::rat(1, k)));
        }
        out
    }

    /// `Σ_k coeffs[k]·self^k` where `self` has zero constant term.
    ///
    /// Terms the truncated coefficient list cannot determine are cut off by
    /// lowering the precision.
    pub fn compose(&self, coeffs: &[Scalar]) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Series(
                "substitution needs a series with zero constant term".into(),
            ));
        }
        let mut out = Self::zero(self.nvars, EXACT);
        let mut power = Self::one(self.nvars);
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                power = &power * self;
            }
            out += &power.scale(c);
        }
        let tail = (coeffs.len() as i32).saturating_mul(self.val_bound());
        Ok(out.truncated(tail))
    }

    fn default_len(&self, cap: i32) -> usize {
        let p = self.prec.min(cap);
        assert!(p != EXACT, "series operation needs a finite precision cap");
        p.max(0) as usize + 1
    }

    /// Multiplicative inverse, to precision `min(prec, cap)`.
    pub fn inv(&self, cap: i32) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ic0 = c0.inv()?;
        if self.is_constant() {
            return Ok(Self::constant(self.nvars, ic0).truncated(self.prec));
        }
        let x = &self.scale(&ic0) - &Self::one(self.nvars);
        let n = self.default_len(cap);
        let coeffs: Vec<Scalar> = (0..n)
            .map(|k| Scalar::from_int(if k % 2 == 0 { 1 } else { -1 }))
            .collect();
        Ok(x.compose(&coeffs)?
            .truncated(self.prec.min(cap))
            .scale(&ic0))
    }

    pub fn exp(&self, cap: i32) -> Result<Self> {
        let n = self.default_len(cap);
        let mut f = Scalar::one();
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                f = f.scale(&crate::scalar::rat(1, k as i64));
            }
            coeffs.push(f.clone());
        }
        Ok(self.compose(&coeffs)?.truncated(self.prec.min(cap)))
    }

    /// Square root of a series with constant term 1, with constant term 1.
    pub fn sqrt_unit(&self, cap: i32) -> Result<Self> {
        if !self.constant_term().is_one() {
            return Err(Error::Series("sqrt_unit needs constant term 1".into()));
        }
        let x = &self.clone() - &Self::one(self.nvars);
        let n = self.default_len(cap);
        // binomial(1/2, k)
        let mut c = crate::scalar::int(1);
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            if k > 0 {
                let k = k as i64;
                c *= crate::scalar::rat(3 - 2 * k, 2 * k);
            }
            coeffs.push(Scalar::from_rational(c.clone()));
        }
        Ok(x.compose(&coeffs)?.truncated(self.prec.min(cap)))
    }

    /// Substitute every variable with zero.
    pub fn at_origin(&self) -> Scalar {
        self.constant_term()
    }

    /// Render with the given variable names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    let n = names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
                    if e == 1 {
                        n
                    } else {
                        format!("{n}^{e}")
                    }
                })
                .collect();
            let cs = c.to_string();
            let cs = if cs.contains(' ') {
                format!("({cs})")
            } else {
                cs
            };
            if mono.is_empty() {
                parts.push(cs);
            } else {
                parts.push(format!("{cs}*{}", mono.join("*")));
            }
        }
        parts.join(" + ")
    }
}

impl PartialEq for TSeries {
    /// Equality of the parts both sides know.
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = TSeries::align(self, other);
        if a.nvars != b.nvars {
            return false;
        }
        let p = a.prec.min(b.prec);
        let ka = a.terms.iter().filter(|(m, _)| degree(m) < p);
        let kb = b.terms.iter().filter(|(m, _)| degree(m) < p);
        ka.eq(kb)
    }
}

impl fmt::Debug for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.prec == EXACT {
            "exact".to_string()
        } else {
            format!("O({})", self.prec)
        };
        write!(f, "TSeries[{}; {}]", self.display_with(&[]), p)
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl<'a> Add<&'a TSeries> for &'a TSeries {
    type Output = TSeries;
    fn add(self, rhs: &TSeries) -> TSeries {
        let (a, b) = TSeries::align(self, rhs);
        let mut out = a.truncated(b.prec);
        for (m, c) in &b.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl<'a> Sub<&'a TSeries> for &'a TSeries {
    type Output = TSeries;
    fn sub(self, rhs: &TSeries) -> TSeries {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a TSeries> for &'a TSeries {
    type Output = TSeries;
    fn mul(self, rhs: &TSeries) -> TSeries {
        self.mul_ref(rhs)
    }
}

impl Neg for &TSeries {
    type Output = TSeries;
    fn neg(self) -> TSeries {
        TSeries {
            nvars: self.nvars,
            prec: self.prec,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl AddAssign<&TSeries> for TSeries {
    fn add_assign(&mut self, rhs: &TSeries) {
        if self.nvars == rhs.nvars {
            self.prec = self.prec.min(rhs.prec);
            let p = self.prec;
            self.terms.retain(|m, _| degree(m) < p);
            for (m, c) in &rhs.terms {
                self.add_term(m.clone(), c);
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&TSeries> for TSeries {
    fn sub_assign(&mut self, rhs: &TSeries) {
        *self += &(-rhs);
    }
}
