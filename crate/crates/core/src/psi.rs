//! ψ-class intersection numbers `⟨τ_{a_1}⋯τ_{a_n}⟩_g` on `M̄_{g,n}`.
//!
//! The main path shortcuts through the string and dilaton equations and falls
//! back to the DVV recursion on the largest exponent.  A second, pure-DVV path
//! (recursing on the smallest nonzero exponent) exists for cross-checking.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::{int, rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PsiKey {
    pub genus: u32,
    /// sorted, largest first
    pub exponents: Vec<u32>,
}

impl PsiKey {
    pub fn new(genus: u32, exponents: &[u32]) -> Self {
        let mut e = exponents.to_vec();
        e.sort_unstable_by(|a, b| b.cmp(a));
        PsiKey {
            genus,
            exponents: e,
        }
    }

    pub fn is_stable(&self) -> bool {
        2 * self.genus as i64 - 2 + self.exponents.len() as i64 > 0
    }

    /// `Σ a_i = 3g − 3 + n`
    pub fn dimension_matches(&self) -> bool {
        let s: i64 = self.exponents.iter().map(|&a| a as i64).sum();
        s == 3 * self.genus as i64 - 3 + self.exponents.len() as i64
    }

    pub fn value(&self) -> Rational {
        psi_intersection(self.genus, &self.exponents)
    }
}

type Memo = Mutex<HashMap<PsiKey, Rational>>;

fn memo(which: usize) -> &'static Memo {
    static M: OnceLock<[Memo; 2]> = OnceLock::new();
    &M.get_or_init(|| [Mutex::new(HashMap::new()), Mutex::new(HashMap::new())])[which]
}

/// `(2m − 1)!!` with `(−1)!! = 1`.
fn dfact_odd(m: i64) -> BigInt {
    let mut r = BigInt::one();
    let mut k = 2 * m - 1;
    while k > 1 {
        r *= k;
        k -= 2;
    }
    r
}

fn r(b: BigInt) -> Rational {
    Rational::from_integer(b)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Path {
    Shortcut = 0,
    Dvv = 1,
}

pub fn psi_intersection(genus: u32, exponents: &[u32]) -> Rational {
    eval(Path::Shortcut, PsiKey::new(genus, exponents))
}

/// Same numbers through DVV alone.
pub fn psi_intersection_dvv(genus: u32, exponents: &[u32]) -> Rational {
    eval(Path::Dvv, PsiKey::new(genus, exponents))
}

fn eval(path: Path, key: PsiKey) -> Rational {
    if !key.is_stable() || !key.dimension_matches() {
        return Rational::zero();
    }
    let g = key.genus;
    let n = key.exponents.len();
    if g == 0 && n == 3 {
        return Rational::one();
    }
    if g == 1 && n == 1 {
        return rat(1, 24);
    }
    if let Some(v) = memo(path as usize).lock().expect("psi memo").get(&key) {
        return v.clone();
    }
    let v = match path {
        Path::Shortcut => shortcut(&key),
        Path::Dvv => {
            let pos = key
                .exponents
                .iter()
                .rposition(|&a| a > 0)
                .expect("dimension forces a positive exponent");
            dvv(path, &key, pos)
        }
    };
    memo(path as usize)
        .lock()
        .expect("psi memo")
        .insert(key, v.clone());
    v
}

fn shortcut(key: &PsiKey) -> Rational {
    let g = key.genus;
    let e = &key.exponents;
    if let Some(p) = e.iter().position(|&a| a == 0) {
        // string equation
        let mut rest = e.clone();
        rest.remove(p);
        let mut acc = Rational::zero();
        for j in 0..rest.len() {
            if rest[j] == 0 {
                continue;
            }
            let mut k = rest.clone();
            k[j] -= 1;
            acc += eval(Path::Shortcut, PsiKey::new(g, &k));
        }
        return acc;
    }
    if let Some(p) = e.iter().position(|&a| a == 1) {
        // dilaton equation
        let mut rest = e.clone();
        rest.remove(p);
        let factor = int(2 * g as i64 - 2 + rest.len() as i64);
        return factor * eval(Path::Shortcut, PsiKey::new(g, &rest));
    }
    dvv(Path::Shortcut, key, 0)
}

/// DVV, removing `τ_{k+1}` at position `pos`.
fn dvv(path: Path, key: &PsiKey, pos: usize) -> Rational {
    let g = key.genus;
    let k = key.exponents[pos] as i64 - 1;
    let mut s = key.exponents.clone();
    s.remove(pos);
    let mut acc = Rational::zero();
    for j in 0..s.len() {
        let dj = s[j] as i64;
        let coeff = r(dfact_odd(k + dj + 1)) / r(dfact_odd(dj));
        let mut t = s.clone();
        t[j] = (dj + k) as u32;
        acc += coeff * eval(path, PsiKey::new(g, &t));
    }
    let half = rat(1, 2);
    for rr in 0..k {
        let ss = k - 1 - rr;
        let c = r(dfact_odd(rr + 1) * dfact_odd(ss + 1));
        if g >= 1 {
            let mut t = s.clone();
            t.push(rr as u32);
            t.push(ss as u32);
            acc += &half * &c * eval(path, PsiKey::new(g - 1, &t));
        }
        let m = s.len();
        let mut split = Rational::zero();
        for mask in 0u64..(1u64 << m) {
            let mut left = vec![rr as u32];
            let mut right = vec![ss as u32];
            for (i, &x) in s.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    left.push(x);
                } else {
                    right.push(x);
                }
            }
            for g1 in 0..=g {
                let a = eval(path, PsiKey::new(g1, &left));
                if a.is_zero() {
                    continue;
                }
                split += a * eval(path, PsiKey::new(g - g1, &right));
            }
        }
        acc += &half * &c * split;
    }
    acc / r(dfact_odd(k + 2))
}
