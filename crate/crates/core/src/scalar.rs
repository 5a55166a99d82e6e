//! Exact arithmetic in cyclotomic fields.
//!
//! Every scalar lives in some `Q(ζ_L)` and is stored in the power basis
//! `1, ζ, …, ζ^{φ(L)-1}`.  Mixed-order operands are embedded into
//! `Q(ζ_lcm)`.  Square roots of rationals are realised through Gauss sums, so
//! one representation covers roots of unity and radicals alike and equality is
//! always decidable.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// cyclotomic tables

struct CycloTable {
    order: u32,
    phi: usize,
    /// `rows[k]` expresses `ζ^k` (0 ≤ k < order) in the power basis.
    rows: Vec<Vec<i64>>,
}

fn table_cache() -> &'static Mutex<HashMap<u32, Arc<CycloTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycloTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Integer coefficients of Φ_n, lowest degree first.
fn cyclotomic_poly(n: u32) -> Vec<i128> {
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i128; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let den = cyclotomic_poly(d);
        num = poly_div_exact(&num, &den);
    }
    num
}

fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = num.len() - 1;
    let mut q = vec![0i128; nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        let c = rem[i + dd] / den[dd];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn table(order: u32) -> Arc<CycloTable> {
    let mut cache = table_cache().lock().expect("cyclotomic cache poisoned");
    if let Some(t) = cache.get(&order) {
        return t.clone();
    }
    let poly = cyclotomic_poly(order);
    let phi = poly.len() - 1;
    let mut rows = Vec::with_capacity(order as usize);
    let mut cur = vec![0i128; phi];
    cur[0] = 1;
    for _ in 0..order {
        rows.push(
            cur.iter()
                .map(|&c| i64::try_from(c).expect("cyclotomic coefficient overflow"))
                .collect(),
        );
        // multiply by ζ and reduce with the monic Φ
        let top = cur[phi - 1];
        let mut next = vec![0i128; phi];
        for i in (1..phi).rev() {
            next[i] = cur[i - 1];
        }
        for i in 0..phi {
            next[i] -= top * poly[i];
        }
        cur = next;
    }
    let t = Arc::new(CycloTable { order, phi, rows });
    cache.insert(order, t.clone());
    t
}

// ---------------------------------------------------------------------------
// Scalar

#[derive(Clone)]
pub struct Scalar {
    order: u32,
    coeffs: Vec<Rational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            order: 1,
            coeffs: vec![Rational::zero()],
        }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        Scalar {
            order: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rational(rat(n, d))
    }

    /// `ζ_n^k` with `ζ_n = exp(2πi/n)`.
    pub fn root_of_unity(n: u32, k: i64) -> Self {
        assert!(n > 0, "root of unity of order 0");
        let k = k.rem_euclid(n as i64) as usize;
        let t = table(n);
        let coeffs = t.rows[k].iter().map(|&c| int(c)).collect();
        Scalar { order: n, coeffs }.normalized()
    }

    pub fn i() -> Self {
        Self::root_of_unity(4, 1)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.order == 1 && self.coeffs[0].is_one()
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(Zero::is_zero)
    }

    /// The rational value, if the scalar is rational.
    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    fn normalized(mut self) -> Self {
        if self.order > 1 && self.coeffs.iter().skip(1).all(Zero::is_zero) {
            let c = self.coeffs.swap_remove(0);
            return Scalar {
                order: 1,
                coeffs: vec![c],
            };
        }
        self
    }

    fn embed(&self, target: u32) -> Vec<Rational> {
        debug_assert_eq!(target % self.order, 0);
        if target == self.order {
            return self.coeffs.clone();
        }
        let t = table(target);
        let step = (target / self.order) as usize;
        let mut out = vec![Rational::zero(); t.phi];
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(&t.rows[j * step]) {
                if r != 0 {
                    *o += c * int(r);
                }
            }
        }
        out
    }

    fn common(a: &Scalar, b: &Scalar) -> (u32, Vec<Rational>, Vec<Rational>) {
        let l = a.order.lcm(&b.order);
        (l, a.embed(l), b.embed(l))
    }

    pub fn scale(&self, q: &Rational) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    fn mul_ref(&self, other: &Scalar) -> Scalar {
        if self.order == 1 {
            return other.scale(&self.coeffs[0]);
        }
        if other.order == 1 {
            return self.scale(&other.coeffs[0]);
        }
        let (l, a, b) = Self::common(self, other);
        let t = table(l);
        let mut acc = vec![Rational::zero(); 2 * t.phi - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                acc[i + j] += ai * bj;
            }
        }
        Scalar {
            order: l,
            coeffs: reduce(&t, &acc),
        }
        .normalized()
    }

    /// Multiplication by `ζ_L^k` as a linear map on the coefficient vector.
    fn shifted(t: &CycloTable, a: &[Rational], k: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); t.phi];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(&t.rows[(i + k) % t.order as usize]) {
                if r != 0 {
                    *o += ai * int(r);
                }
            }
        }
        out
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.order == 1 {
            return Ok(Scalar::from_rational(self.coeffs[0].recip()));
        }
        let t = table(self.order);
        // columns: self * ζ^j
        let cols: Vec<Vec<Rational>> = (0..t.phi)
            .map(|j| Self::shifted(&t, &self.coeffs, j))
            .collect();
        let mut rhs = vec![Rational::zero(); t.phi];
        rhs[0] = Rational::one();
        let x = solve(&cols, &rhs).ok_or(Error::DivisionByZero)?;
        Ok(Scalar {
            order: self.order,
            coeffs: x,
        }
        .normalized())
    }

    /// Apply the Galois automorphism `ζ_L ↦ ζ_L^k` (k coprime to L).
    fn galois(&self, k: u32) -> Scalar {
        if self.order == 1 {
            return self.clone();
        }
        let t = table(self.order);
        let l = self.order as usize;
        let mut out = vec![Rational::zero(); t.phi];
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(&t.rows[(j * k as usize) % l]) {
                if r != 0 {
                    *o += c * int(r);
                }
            }
        }
        Scalar {
            order: self.order,
            coeffs: out,
        }
        .normalized()
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Scalar {
        if self.order <= 2 {
            return self.clone();
        }
        self.galois(self.order - 1)
    }

    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Square root of a rational number; negative arguments give `i·√|q|`.
    pub fn sqrt_rational(q: &Rational) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        let n = q.numer() * q.denom();
        let (square, free) = square_part(&n);
        let free = free.to_i64().expect("square-free part too large");
        let root = sqrt_int_squarefree(free);
        root.scale(&Rational::new(square, q.denom().clone()))
    }

    /// Reduce to the smallest cyclotomic field that contains the value.
    pub fn canonical(&self) -> Scalar {
        if self.order == 1 {
            return self.clone();
        }
        let l = self.order;
        for d in divisors(l) {
            if d == l {
                return self.clone();
            }
            // fixed by all σ_k with k ≡ 1 (mod d)?
            let fixed = (1..l)
                .filter(|k| k.gcd(&l) == 1 && k % d == 1 % d)
                .all(|k| self.galois(k) == *self);
            if !fixed {
                continue;
            }
            let sub = table(d);
            let big = table(l);
            let step = (l / d) as usize;
            let cols: Vec<Vec<Rational>> = (0..sub.phi)
                .map(|j| big.rows[j * step].iter().map(|&r| int(r)).collect())
                .collect();
            if let Some(y) = solve(&cols, &self.coeffs) {
                return Scalar {
                    order: d,
                    coeffs: y,
                }
                .normalized();
            }
        }
        self.clone()
    }

    /// If the value is a root of unity `ζ_n^k`, return `(n, k)` with `n` minimal.
    pub fn as_root_of_unity(&self) -> Option<(u32, u32)> {
        let c = self.canonical();
        if c.order == 1 {
            let q = &c.coeffs[0];
            return if q.is_one() {
                Some((1, 0))
            } else if *q == -Rational::one() {
                Some((2, 1))
            } else {
                None
            };
        }
        // ζ_n^k with k coprime to n is primitive and generates Q(ζ_n); the
        // minimal field order is then n or n/2.
        for n in [c.order, 2 * c.order] {
            for k in 0..n {
                if k.gcd(&n) != 1 {
                    continue;
                }
                if Scalar::root_of_unity(n, k as i64) == c {
                    return Some((n, k));
                }
            }
        }
        None
    }

    /// Coefficients in the canonical field, as `(order, coeffs)`.
    pub fn canonical_parts(&self) -> (u32, Vec<Rational>) {
        let c = self.canonical();
        (c.order, c.coeffs)
    }
}

fn reduce(t: &CycloTable, acc: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); t.phi];
    for (k, a) in acc.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        if k < t.phi {
            out[k] += a;
            continue;
        }
        for (o, &r) in out.iter_mut().zip(&t.rows[k % t.order as usize]) {
            if r != 0 {
                *o += a * int(r);
            }
        }
    }
    out
}

/// Solve `Σ_j x_j cols[j] = rhs` exactly.  Returns `None` if inconsistent or
/// if the columns are dependent.
pub(crate) fn solve(cols: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = cols.len();
    let m = rhs.len();
    // augmented row-major matrix m × (n+1)
    let mut a: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row: Vec<Rational> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(n);
    for col in 0..n {
        let p = (pivot_row..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot_row, p);
        let inv = a[pivot_row][col].recip();
        for v in a[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m {
            if r != pivot_row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let sub = &f * &a[pivot_row][c];
                    a[r][c] -= sub;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if a[pivot_row..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&r| a[r][n].clone()).collect())
}

/// Split `n = s² · f` with `f` square-free and carrying the sign of `n`.
fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut m = n.abs();
    let mut s = BigInt::one();
    let mut f = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut e = 0u32;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            s *= &p;
        }
        if e % 2 == 1 {
            f *= &p;
        }
        p += 1;
    }
    f *= m;
    (s, f * sign)
}

pub fn is_square_free(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    let (s, _) = square_part(&BigInt::from(n));
    s.is_one()
}

fn sqrt_int_squarefree(f: i64) -> Scalar {
    if f == 1 {
        return Scalar::one();
    }
    if f == -1 {
        return Scalar::i();
    }
    if f < 0 {
        return &Scalar::i() * &sqrt_int_squarefree(-f);
    }
    let mut acc = Scalar::one();
    let mut m = f as u64;
    let mut p = 2u64;
    while m > 1 {
        if m.is_multiple_of(p) {
            acc = &acc * &sqrt_prime(p as u32);
            m /= p;
        }
        p += 1;
    }
    acc
}

fn sqrt_prime(p: u32) -> Scalar {
    if p == 2 {
        return &Scalar::root_of_unity(8, 1) + &Scalar::root_of_unity(8, 7);
    }
    // quadratic Gauss sum g = Σ (a/p) ζ_p^a; g² = (-1)^{(p-1)/2} p
    let mut g = Scalar::zero();
    for a in 1..p {
        let leg = legendre(a as u64, p as u64);
        let term = Scalar::root_of_unity(p, a as i64);
        g = if leg == 1 { &g + &term } else { &g - &term };
    }
    if p % 4 == 1 {
        g
    } else {
        -(&Scalar::i() * &g)
    }
}

fn legendre(a: u64, p: u64) -> i32 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (_, a, b) = Self::common(self, other);
        a == b
    }
}

impl Eq for Scalar {}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::from_rational(q)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if self.order == rhs.order {
            let coeffs = self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect();
            return Scalar {
                order: self.order,
                coeffs,
            }
            .normalized();
        }
        let (l, a, b) = Scalar::common(self, rhs);
        Scalar {
            order: l,
            coeffs: a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        }
        .normalized()
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.mul_ref(rhs)
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    /// Panics on division by zero; use [`Scalar::inv`] for a fallible version.
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv().expect("division by zero scalar")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        if self.order == rhs.order {
            for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *a += b;
            }
            let s = std::mem::take(self);
            *self = s.normalized();
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self += &(-rhs);
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        let mut acc = Scalar::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        let (o, c) = self.canonical_parts();
        o.hash(state);
        for q in c {
            q.hash(state);
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (order, coeffs) = self.canonical_parts();
        if order == 1 {
            return write!(f, "{}", coeffs[0]);
        }
        let mut first = true;
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "zeta{order}")?,
                1 => write!(f, "{a}*zeta{order}")?,
                _ if a.is_one() => write!(f, "zeta{order}^{k}")?,
                _ => write!(f, "{a}*zeta{order}^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

// ---------------------------------------------------------------------------
// context and literals

/// Declares the root of unity and radicals a computation may refer to.
#[derive(Clone, Debug)]
pub struct ScalarContext {
    order: u32,
    radicands: Vec<i64>,
}

impl ScalarContext {
    pub fn new(order: u32, radicands: &[i64]) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("root-of-unity order must be positive".into()));
        }
        for &m in radicands {
            if !is_square_free(m) {
                return Err(Error::NotSquareFree(m));
            }
        }
        let mut radicands = radicands.to_vec();
        radicands.sort_unstable();
        radicands.dedup();
        Ok(ScalarContext { order, radicands })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn radicands(&self) -> &[i64] {
        &self.radicands
    }

    pub fn zeta(&self, k: i64) -> Scalar {
        Scalar::root_of_unity(self.order, k)
    }

    pub fn sqrt(&self, m: i64) -> Result<Scalar> {
        if !self.radicands.contains(&m) {
            if !is_square_free(m) {
                return Err(Error::NotSquareFree(m));
            }
            return Err(Error::UndeclaredRadicand(m));
        }
        Ok(Scalar::sqrt_rational(&int(m)))
    }

    /// Parse a literal such as `1/2`, `zeta^3`, `-2*zeta12^5 + 1/3*sqrt(2)`.
    ///
    /// `zeta` without an explicit order refers to the context's root of unity.
    /// `sqrt(m)` accepts only declared radicands.
    pub fn parse(&self, s: &str) -> Result<Scalar> {
        Parser {
            ctx: self,
            src: s,
            pos: 0,
        }
        .expr()
    }
}

struct Parser<'a> {
    ctx: &'a ScalarContext,
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::ScalarLiteral {
            literal: self.src.to_string(),
            reason: reason.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(mut self) -> Result<Scalar> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Err(self.err("empty literal"));
        }
        let mut acc = Scalar::zero();
        let mut sign = 1;
        if self.eat('-') {
            sign = -1;
        } else {
            self.eat('+');
        }
        loop {
            let t = self.term()?;
            if sign < 0 {
                acc -= &t;
            } else {
                acc += &t;
            }
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else {
                break;
            }
        }
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err(format!("unexpected input at byte {}", self.pos)));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.src[start..self.pos].parse().expect("digits"))
    }

    fn signed_int(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        let n = self
            .integer()
            .and_then(|n| n.to_i64())
            .ok_or_else(|| self.err("expected integer"))?;
        Ok(if neg { -n } else { n })
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn factor(&mut self) -> Result<Scalar> {
        self.skip_ws();
        if let Some(n) = self.integer() {
            let mut q = Rational::from_integer(n);
            if self.eat('/') {
                let d = self
                    .integer()
                    .ok_or_else(|| self.err("expected denominator"))?;
                if d.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                q /= Rational::from_integer(d);
            }
            return Ok(Scalar::from_rational(q));
        }
        if self.keyword("zeta") {
            let order = match self.integer() {
                Some(n) => n
                    .to_u32()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| self.err("bad root-of-unity order"))?,
                None => self.ctx.order,
            };
            let k = if self.eat('^') { self.signed_int()? } else { 1 };
            return Ok(Scalar::root_of_unity(order, k));
        }
        if self.keyword("sqrt") {
            if !self.eat('(') {
                return Err(self.err("expected `(` after sqrt"));
            }
            let m = self.signed_int()?;
            if !self.eat(')') {
                return Err(self.err("expected `)`"));
            }
            return self.ctx.sqrt(m);
        }
        if self.keyword("i") {
            return Ok(Scalar::i());
        }
        if self.eat('(') {
            let start = self.pos;
            let mut depth = 1;
            while let Some(c) = self.peek() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                self.pos += c.len_utf8();
            }
            if depth != 0 {
                return Err(self.err("unbalanced parentheses"));
            }
            let inner = &self.src[start..self.pos];
            self.pos += 1;
            return self.ctx.parse(inner);
        }
        Err(self.err(format!("unexpected input at byte {}", self.pos)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_close_up() {
        for n in 1..=24u32 {
            let z = Scalar::root_of_unity(n, 1);
            assert!(z.pow(n as i64).unwrap().is_one(), "ζ_{n}^{n} != 1");
            if n > 1 {
                let s: Scalar = (0..n as i64).map(|k| Scalar::root_of_unity(n, k)).sum();
                assert!(s.is_zero(), "sum of {n}th roots");
            }
        }
    }

    #[test]
    fn square_roots() {
        for m in [2i64, 3, 5, 6, 7, 10, 11, 13, 15, 30, -1, -2, -3, -7] {
            let r = Scalar::sqrt_rational(&int(m));
            assert_eq!(&r * &r, Scalar::from_int(m), "sqrt({m})");
        }
        let r = Scalar::sqrt_rational(&rat(3, 8));
        assert_eq!(&r * &r, Scalar::from_frac(3, 8));
        let r = Scalar::sqrt_rational(&int(12));
        assert_eq!(r, Scalar::sqrt_rational(&int(3)).scale(&int(2)));
    }

    #[test]
    fn i_is_zeta4() {
        assert_eq!(Scalar::i(), Scalar::root_of_unity(8, 2));
        assert_eq!(Scalar::i() * Scalar::i(), Scalar::from_int(-1));
    }

    #[test]
    fn canonical_descends() {
        let a = Scalar::root_of_unity(12, 3);
        let c = a.canonical();
        assert_eq!(c.order(), 4);
        let minus_one = Scalar::root_of_unity(6, 3);
        assert!(minus_one.is_rational());
        // ζ_3 lives in Q(ζ_6) as well; canonical picks 3
        let z6 = Scalar::root_of_unity(6, 2);
        assert_eq!(z6.canonical().order(), 3);
    }

    #[test]
    fn root_of_unity_recognition() {
        assert_eq!(
            Scalar::root_of_unity(12, 5).as_root_of_unity(),
            Some((12, 5))
        );
        assert_eq!(Scalar::root_of_unity(6, 1).as_root_of_unity(), Some((6, 1)));
        assert_eq!(Scalar::from_int(-1).as_root_of_unity(), Some((2, 1)));
        assert_eq!(Scalar::from_int(2).as_root_of_unity(), None);
        assert_eq!(Scalar::sqrt_rational(&int(2)).as_root_of_unity(), None);
    }

    #[test]
    fn parse_and_display() {
        let ctx = ScalarContext::new(3, &[2]).unwrap();
        assert_eq!(ctx.parse("1/2").unwrap(), Scalar::from_frac(1, 2));
        assert_eq!(ctx.parse("zeta^3").unwrap(), Scalar::one());
        let z = ctx.parse("zeta").unwrap();
        let sum = ctx.parse("1 + zeta + zeta^2").unwrap();
        assert!(sum.is_zero());
        assert_eq!(z.to_string(), "zeta3");
        let s = ctx.parse("sqrt(2)*sqrt(2)").unwrap();
        assert_eq!(s, Scalar::from_int(2));
        assert!(ctx.parse("sqrt(3)").is_err());
        assert!(ctx.parse("").is_err());
        assert!(ctx.parse("1/0").is_err());
        let w = ctx.parse("-2*zeta12^5 + 1/3").unwrap();
        assert_eq!(ctx.parse(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn context_rejects_non_square_free() {
        assert!(matches!(
            ScalarContext::new(2, &[4]),
            Err(Error::NotSquareFree(4))
        ));
        assert!(matches!(
            ScalarContext::new(2, &[0]),
            Err(Error::NotSquareFree(0))
        ));
        assert!(ScalarContext::new(2, &[-2, 6]).is_ok());
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        let orders = prop::sample::select(vec![1u32, 2, 3, 4, 5, 6, 8, 12]);
        (
            orders,
            prop::collection::vec((-5i64..=5, 1i64..=4), 0..4),
            prop::option::of(prop::sample::select(vec![2i64, 3, -1, 5])),
        )
            .prop_map(|(n, cs, rad)| {
                let mut s = Scalar::zero();
                for (k, (num, den)) in cs.into_iter().enumerate() {
                    s += &Scalar::root_of_unity(n, k as i64).scale(&rat(num, den));
                }
                if let Some(m) = rad {
                    s = &s * &Scalar::sqrt_rational(&int(m));
                }
                s
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
            if !a.is_zero() {
                prop_assert!((&a * &a.inv().unwrap()).is_one());
            }
        }

        #[test]
        fn conjugation_is_a_ring_map(a in arb_scalar(), b in arb_scalar()) {
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            prop_assert_eq!(a.conj().conj(), a.clone());
        }

        #[test]
        fn canonical_preserves_value(a in arb_scalar()) {
            let c = a.canonical();
            prop_assert_eq!(&c, &a);
            prop_assert!(a.order() % c.order() == 0);
        }

        #[test]
        fn display_roundtrips(a in arb_scalar()) {
            let ctx = ScalarContext::new(1, &[]).unwrap();
            prop_assert_eq!(ctx.parse(&a.to_string()).unwrap(), a);
        }
    }
}
