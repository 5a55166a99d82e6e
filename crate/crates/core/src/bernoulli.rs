//! Bernoulli numbers and polynomials, `t·e^{tx}/(e^t − 1) = Σ B_m(x) t^m/m!`.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::Rational;

fn cache() -> &'static Mutex<Vec<Rational>> {
    static C: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(vec![Rational::one()]))
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// `B_m = B_m(0)`, from inverting `(e^t − 1)/t` coefficientwise:
/// `Σ_{k≤m} C(m+1, k) B_k = 0`.
pub fn bernoulli_number(m: usize) -> Rational {
    let mut b = cache().lock().expect("bernoulli cache poisoned");
    while b.len() <= m {
        let n = b.len() as u64;
        let mut s = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            s += Rational::from_integer(binomial(n + 1, k as u64)) * bk;
        }
        let next = -s / Rational::from_integer(BigInt::from(n + 1));
        b.push(next);
    }
    b[m].clone()
}

/// `B_m(x) = Σ_k C(m, k) B_k x^{m−k}`.
pub fn bernoulli_polynomial(m: usize, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut xp = Rational::one();
    // accumulate from k = m down so x's power rises
    for k in (0..=m).rev() {
        acc += Rational::from_integer(binomial(m as u64, k as u64)) * bernoulli_number(k) * &xp;
        xp *= x;
    }
    acc
}
