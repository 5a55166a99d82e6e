//! Quantum-product data over the formal neighbourhood of the origin:
//! validation, idempotent lifting, canonical coordinates, Ψ and Δ.
//!
//! Flat coordinates `t^μ` run along the normalized canonical basis `φ̃_μ` of
//! the classical algebra, where the pairing is the identity.  A data set has
//! either no variables at all (the classical point `t = 0, q = 0`) or the `N`
//! coordinate variables first, followed by Novikov-type parameters `q_j`.

use std::path::Path;

use serde::Deserialize;

use crate::chen_ruan::CRAlgebra;
use crate::error::{Error, Result};
use crate::rmatrix::SOperator;
use crate::scalar::{Rational, Scalar, ScalarContext};
use crate::series::{Matrix, Monomial, TSeries, EXACT};

/// `C[μ][ν][ρ] = C_{μν}^ρ`
pub type Structure = Vec<Vec<Vec<TSeries>>>;

#[derive(Clone, Debug)]
pub struct FrobeniusData {
    algebra: CRAlgebra,
    var_names: Vec<String>,
    /// number of coordinate variables: `N` or 0
    t_vars: usize,
    prec: i32,
    c: Structure,
    s_operator: Option<SOperator>,
    divisor_directions: Vec<usize>,
    idempotents: Vec<Vec<TSeries>>,
    delta: Vec<TSeries>,
    sqrt_delta: Vec<TSeries>,
    psi: Matrix,
    /// `du[i][μ] = ∂_μ u^i`
    du: Vec<Vec<TSeries>>,
    u: Vec<TSeries>,
}

fn kron(n: usize, mu: usize) -> Vec<TSeries> {
    (0..n)
        .map(|i| {
            if i == mu {
                TSeries::one(0)
            } else {
                TSeries::zero(0, EXACT)
            }
        })
        .collect()
}

/// Termwise antiderivative of a closed 1-form `f_μ dt^μ` (μ < `t_vars`),
/// vanishing on `t = 0`: each monomial `x^m` of `f_μ` contributes
/// `t^μ x^m / (deg_t(m) + 1)`.
pub(crate) fn integrate_closed(f: &[TSeries], t_vars: usize, nvars: usize) -> TSeries {
    let prec = f.iter().map(TSeries::prec).min().unwrap_or(EXACT);
    let mut out = TSeries::zero(nvars, prec.saturating_add(1));
    for (mu, fm) in f.iter().enumerate().take(t_vars) {
        let fm = fm.broadcast(nvars);
        for (m, c) in fm.terms() {
            let dt: i64 = m[..t_vars].iter().map(|&e| e as i64).sum();
            let mut m2 = m.clone();
            m2[mu] += 1;
            out.add_term(m2, &c.scale(&crate::scalar::rat(1, dt + 1)));
        }
    }
    out
}

/// `(a ⋆ b)^ρ = Σ C_{μν}^ρ a^μ b^ν`.
pub(crate) fn star(c: &Structure, a: &[TSeries], b: &[TSeries]) -> Vec<TSeries> {
    let n = a.len();
    let mut out: Vec<TSeries> = (0..n).map(|_| TSeries::zero(0, EXACT)).collect();
    for mu in 0..n {
        if a[mu].is_zero() && a[mu].prec() == EXACT {
            continue;
        }
        for nu in 0..n {
            if b[nu].is_zero() && b[nu].prec() == EXACT {
                continue;
            }
            let ab = &a[mu] * &b[nu];
            for (rho, o) in out.iter_mut().enumerate() {
                let k = &c[mu][nu][rho];
                if k.is_zero() && k.prec() == EXACT {
                    continue;
                }
                *o += &(&ab * k);
            }
        }
    }
    out
}

fn vec_is_zero(v: &[TSeries]) -> bool {
    v.iter().all(TSeries::is_zero)
}

fn vec_sub(a: &[TSeries], b: &[TSeries]) -> Vec<TSeries> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl FrobeniusData {
    /// The classical product at the origin, with no variables.
    pub fn classical(algebra: &CRAlgebra) -> Self {
        let c = classical_structure(algebra);
        Self::from_parts(algebra, Vec::new(), 0, c, None, Vec::new())
            .expect("classical data is valid by construction")
    }

    /// Validate and derive from structure constants in the φ̃ frame.
    pub fn from_parts(
        algebra: &CRAlgebra,
        var_names: Vec<String>,
        t_degree: u32,
        c: Structure,
        s_operator: Option<SOperator>,
        divisor_directions: Vec<usize>,
    ) -> Result<Self> {
        let n = algebra.rank();
        let nvars = var_names.len();
        if nvars != 0 && nvars < n {
            return Err(Error::GenusZero(format!(
                "{nvars} variables declared; need the {n} coordinates t^μ first"
            )));
        }
        let t_vars = if nvars == 0 { 0 } else { n };
        let prec = if nvars == 0 {
            EXACT
        } else {
            t_degree as i32 + 1
        };
        let c: Structure = c
            .into_iter()
            .map(|a| {
                a.into_iter()
                    .map(|b| {
                        b.into_iter()
                            .map(|x| x.broadcast(nvars).truncated(prec))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut dirs = algebra.divisor_directions().to_vec();
        dirs.extend(divisor_directions);
        dirs.sort_unstable();
        dirs.dedup();
        let mut data = FrobeniusData {
            algebra: algebra.clone(),
            var_names,
            t_vars,
            prec,
            c,
            s_operator,
            divisor_directions: dirs,
            idempotents: Vec::new(),
            delta: Vec::new(),
            sqrt_delta: Vec::new(),
            psi: Matrix::identity(n, 0),
            du: Vec::new(),
            u: Vec::new(),
        };
        data.validate()?;
        data.derive()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        let n = self.rank();
        let classical = classical_structure(&self.algebra);
        for mu in 0..n {
            for nu in 0..n {
                for rho in 0..n {
                    let got = self.c[mu][nu][rho].constant_term();
                    let want = classical[mu][nu][rho].constant_term();
                    if got != want {
                        return Err(Error::ClassicalLimit(format!(
                            "C_({mu},{nu})^{rho}(0) = {got}, classical value {want}"
                        )));
                    }
                }
            }
        }
        for mu in 0..n {
            for nu in 0..n {
                for rho in 0..n {
                    if self.c[mu][nu][rho] != self.c[nu][mu][rho] {
                        return Err(Error::GenusZero(format!(
                            "product not commutative at ({mu}, {nu}, {rho})"
                        )));
                    }
                    // pairing is the identity: C_{μν}^ρ = C_{μρ}^ν
                    if self.c[mu][nu][rho] != self.c[mu][rho][nu] {
                        return Err(Error::GenusZero(format!(
                            "product not Frobenius for the pairing at ({mu}, {nu}, {rho})"
                        )));
                    }
                }
            }
        }
        self.check_associativity()?;
        for lam in 0..self.t_vars {
            for mu in 0..lam {
                for nu in 0..n {
                    for rho in 0..n {
                        let a = self.c[mu][nu][rho].derivative(lam);
                        let b = self.c[lam][nu][rho].derivative(mu);
                        if a != b {
                            return Err(Error::GenusZero(format!(
                                "structure constants are not third derivatives of a potential \
                                 (∂_{lam} C_({mu},{nu},{rho}) ≠ ∂_{mu} C_({lam},{nu},{rho}))"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_associativity(&self) -> Result<()> {
        let n = self.rank();
        let mut worst: Option<(i32, usize, usize, usize)> = None;
        for mu in 0..n {
            for nu in 0..n {
                let ab = star(&self.c, &kron(n, mu), &kron(n, nu));
                for rho in 0..n {
                    let l = star(&self.c, &ab, &kron(n, rho));
                    let bc = star(&self.c, &kron(n, nu), &kron(n, rho));
                    let r = star(&self.c, &kron(n, mu), &bc);
                    let d = vec_sub(&l, &r);
                    if !vec_is_zero(&d) {
                        let deg = d.iter().map(TSeries::valuation).min().unwrap_or(EXACT);
                        if worst.is_none_or(|w| deg < w.0) {
                            worst = Some((deg, mu, nu, rho));
                        }
                    }
                }
            }
        }
        match worst {
            None => Ok(()),
            Some((degree, a, b, c)) => Err(Error::Associativity {
                a,
                b,
                c,
                degree: degree as u32,
            }),
        }
    }

    fn derive(&mut self) -> Result<()> {
        let n = self.rank();
        let nvars = self.nvars();
        let sqrt0 = self.algebra.sqrt_delta0_all().to_vec();
        // classical idempotents ε_i = φ̃_i/√Δ_i(0), lifted by e ← 3e² − 2e³
        let mut eps: Vec<Vec<TSeries>> = (0..n)
            .map(|i| {
                let inv = sqrt0[i].inv().expect("nonzero √Δ(0)");
                (0..n)
                    .map(|mu| {
                        if mu == i {
                            TSeries::constant(nvars, inv.clone())
                        } else {
                            TSeries::zero(nvars, EXACT)
                        }
                    })
                    .collect()
            })
            .collect();
        if nvars > 0 {
            let three = Scalar::from_int(3);
            let two = Scalar::from_int(2);
            let mut steps = 0;
            loop {
                let mut changed = false;
                for e in eps.iter_mut() {
                    let e2 = star(&self.c, e, e);
                    let e3 = star(&self.c, &e2, e);
                    let next: Vec<TSeries> = e2
                        .iter()
                        .zip(&e3)
                        .map(|(a, b)| &a.scale(&three) - &b.scale(&two))
                        .map(|x| x.truncated(self.prec))
                        .collect();
                    changed |= next != *e;
                    *e = next;
                }
                steps += 1;
                if !changed || steps > 64 {
                    break;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let p = star(&self.c, &eps[i], &eps[j]);
                let want: Vec<TSeries> = if i == j {
                    eps[i].clone()
                } else {
                    vec![TSeries::zero(nvars, EXACT); n]
                };
                if p != want {
                    return Err(Error::Internal(format!(
                        "idempotent lifting failed at ({i}, {j})"
                    )));
                }
            }
        }
        let mut delta = Vec::with_capacity(n);
        let mut sqrt_delta = Vec::with_capacity(n);
        for (i, e) in eps.iter().enumerate() {
            let norm = e
                .iter()
                .fold(TSeries::zero(nvars, EXACT), |acc, x| &acc + &(x * x));
            let d = norm.inv(self.prec)?;
            let d0 = Scalar::from_rational(self.algebra.delta0(i).clone());
            let ratio = d.scale(&d0.inv()?);
            let s = if nvars == 0 {
                TSeries::constant(0, sqrt0[i].clone())
            } else {
                ratio.sqrt_unit(self.prec)?.scale(&sqrt0[i])
            };
            delta.push(d);
            sqrt_delta.push(s);
        }
        let psi = Matrix::from_fn(n, n, |mu, i| &eps[i][mu] * &sqrt_delta[i]);
        let mut du = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        for i in 0..n {
            let row: Vec<TSeries> = (0..self.t_vars).map(|mu| &eps[i][mu] * &delta[i]).collect();
            for a in 0..self.t_vars {
                for b in 0..a {
                    if row[a].derivative(b) != row[b].derivative(a) {
                        return Err(Error::Internal(format!(
                            "du^{i} is not closed in directions ({a}, {b})"
                        )));
                    }
                }
            }
            u.push(integrate_closed(&row, self.t_vars, nvars).truncated(self.prec));
            du.push(row);
        }
        self.idempotents = eps;
        self.delta = delta;
        self.sqrt_delta = sqrt_delta;
        self.psi = psi;
        self.du = du;
        self.u = u;
        Ok(())
    }

    pub fn algebra(&self) -> &CRAlgebra {
        &self.algebra
    }

    pub fn rank(&self) -> usize {
        self.algebra.rank()
    }

    pub fn nvars(&self) -> usize {
        self.var_names.len()
    }

    pub fn t_vars(&self) -> usize {
        self.t_vars
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    /// Series precision: terms of degree below this are exact.
    pub fn prec(&self) -> i32 {
        self.prec
    }

    /// Truncation degree `D` (`None` for data at the origin).
    pub fn t_degree(&self) -> Option<u32> {
        (self.prec != EXACT).then(|| (self.prec - 1) as u32)
    }

    pub fn structure(&self) -> &Structure {
        &self.c
    }

    pub fn s_operator(&self) -> Option<&SOperator> {
        self.s_operator.as_ref()
    }

    pub fn divisor_directions(&self) -> &[usize] {
        &self.divisor_directions
    }

    /// `ε_i` in φ̃ coordinates.
    pub fn idempotent(&self, i: usize) -> &[TSeries] {
        &self.idempotents[i]
    }

    pub fn delta(&self, i: usize) -> &TSeries {
        &self.delta[i]
    }

    pub fn sqrt_delta(&self, i: usize) -> &TSeries {
        &self.sqrt_delta[i]
    }

    /// `Ψ[μ][i] = Ψ_μ^i`
    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    pub fn du(&self, i: usize) -> &[TSeries] {
        &self.du[i]
    }

    pub fn u(&self, i: usize) -> &TSeries {
        &self.u[i]
    }

    /// Product of two φ̃-coordinate vectors.
    pub fn star(&self, a: &[TSeries], b: &[TSeries]) -> Vec<TSeries> {
        star(&self.c, a, b)
    }

    /// The unit `Σ_μ φ̃_μ/√Δ_μ(0)` in φ̃ coordinates.
    pub fn classical_unit(&self) -> Vec<TSeries> {
        (0..self.rank())
            .map(|mu| TSeries::constant(0, self.algebra.sqrt_delta0(mu).inv().expect("nonzero")))
            .collect()
    }

    /// `ε_i(f) = Σ_μ ε_i^μ ∂_μ f`, the derivative along `∂/∂u^i`.
    pub fn canonical_derivative(&self, i: usize, f: &TSeries) -> TSeries {
        let mut acc = TSeries::zero(self.nvars(), EXACT);
        for mu in 0..self.t_vars {
            acc += &(&self.idempotents[i][mu] * &f.broadcast(self.nvars()).derivative(mu));
        }
        acc
    }

    /// `Ψ^T dΨ` in direction `μ`.
    pub fn connection(&self, mu: usize) -> Matrix {
        let dpsi = self.psi.map(|x| x.broadcast(self.nvars()).derivative(mu));
        &self.psi.transpose() * &dpsi
    }

    // -------------------------------------------------------------- checks

    pub fn check_idempotents(&self) -> bool {
        let n = self.rank();
        let mut total: Vec<TSeries> = vec![TSeries::zero(0, EXACT); n];
        for i in 0..n {
            for j in 0..n {
                let p = self.star(&self.idempotents[i], &self.idempotents[j]);
                let want: Vec<TSeries> = if i == j {
                    self.idempotents[i].clone()
                } else {
                    vec![TSeries::zero(0, EXACT); n]
                };
                if p != want {
                    return false;
                }
            }
            for (t, x) in total.iter_mut().zip(&self.idempotents[i]) {
                *t += x;
            }
        }
        total == self.classical_unit()
    }

    pub fn check_psi_orthogonal(&self) -> bool {
        let n = self.rank();
        let p = &self.psi * &self.psi.transpose();
        p == Matrix::identity(n, 0)
    }

    /// `⟨ε_i, ε_j⟩ = δ_ij/Δ_i`.
    pub fn check_canonical_pairing(&self) -> bool {
        let n = self.rank();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let p = self.idempotents[i]
                    .iter()
                    .zip(&self.idempotents[j])
                    .fold(TSeries::zero(0, EXACT), |acc, (a, b)| &acc + &(a * b));
                if i == j {
                    &p * &self.delta[i] == TSeries::one(0)
                } else {
                    p.is_zero()
                }
            })
        })
    }

    /// `1/√Δ_j = Σ_β Ψ_β^j / √Δ_β(0)` for every `j`; returns the first index
    /// where it fails.
    pub fn inverse_sqrt_delta_check(&self) -> std::result::Result<(), usize> {
        let n = self.rank();
        for j in 0..n {
            let lhs = self.sqrt_delta[j].inv(self.prec).map_err(|_| j)?;
            let mut rhs = TSeries::zero(0, EXACT);
            for beta in 0..n {
                let s = self.algebra.sqrt_delta0(beta).inv().map_err(|_| j)?;
                rhs += &self.psi.get(beta, j).scale(&s);
            }
            if lhs != rhs {
                return Err(j);
            }
        }
        Ok(())
    }

    // ----------------------------------------------------------- operations

    /// Substitute `q_j ↦ q_j·exp(c_j t^{μ'})` along a flagged divisor direction.
    pub fn divisor_rescale(&self, direction: usize, pairings: &[Rational]) -> Result<Self> {
        if !self.divisor_directions.contains(&direction) || direction >= self.t_vars {
            return Err(Error::NotDivisorDirection(direction));
        }
        let nq = self.nvars() - self.t_vars;
        if pairings.len() != nq {
            return Err(Error::Config(format!(
                "{} pairing values for {nq} Novikov variables",
                pairings.len()
            )));
        }
        let sub = |x: &TSeries| rescale_series(x, self.t_vars, direction, pairings, self.prec);
        let c: Structure = self
            .c
            .iter()
            .map(|a| a.iter().map(|b| b.iter().map(sub).collect()).collect())
            .collect();
        let s = self.s_operator.as_ref().map(|s| s.map_entries(sub));
        Self::from_parts(
            &self.algebra,
            self.var_names.clone(),
            (self.prec - 1) as u32,
            c,
            s,
            self.divisor_directions.clone(),
        )
    }

    // ---------------------------------------------------------------- files

    pub fn load_file(algebra: &CRAlgebra, path: &Path, t_degree: u32) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        load_genus_zero(algebra, &text, t_degree)
    }
}

fn rescale_series(
    x: &TSeries,
    t_vars: usize,
    dir: usize,
    pairings: &[Rational],
    prec: i32,
) -> TSeries {
    let nvars = x.nvars();
    let mut out = TSeries::zero(nvars, x.prec());
    for (m, c) in x.terms() {
        // exp(λ t^{μ'}) with λ = Σ_j m_{q_j} c_j
        let lambda: Rational = m[t_vars..]
            .iter()
            .zip(pairings)
            .map(|(&e, c)| crate::scalar::int(e as i64) * c)
            .sum();
        let base = TSeries::monomial(nvars, m.clone(), c.clone());
        if lambda == Rational::from_integer(0.into()) {
            out += &base;
            continue;
        }
        let arg = TSeries::var(nvars, dir).scale(&Scalar::from_rational(lambda));
        let e = arg.exp(prec).expect("zero constant term");
        out += &(&base * &e);
    }
    out.truncated(prec)
}

/// `C_{μν}^ρ = δ_{μνρ} √Δ_μ(0)` with no variables.
pub fn classical_structure(algebra: &CRAlgebra) -> Structure {
    let n = algebra.rank();
    (0..n)
        .map(|mu| {
            (0..n)
                .map(|nu| {
                    (0..n)
                        .map(|rho| {
                            if mu == nu && nu == rho {
                                TSeries::constant(0, algebra.sqrt_delta0(mu).clone())
                            } else {
                                TSeries::zero(0, EXACT)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

// ------------------------------------------------------------------ JSON

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenusZeroFile {
    #[serde(default)]
    variables: Vec<String>,
    structure_constants: Vec<ConstantEntry>,
    #[serde(default)]
    s_operator: Option<Vec<SMatrixEntry>>,
    #[serde(default)]
    divisor_directions: Vec<usize>,
    #[serde(default)]
    cyclotomic_order: Option<u32>,
    #[serde(default)]
    radicands: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantEntry {
    mu: usize,
    nu: usize,
    rho: usize,
    series: Vec<TermEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TermEntry {
    exponents: Vec<u8>,
    value: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SMatrixEntry {
    k: usize,
    entries: Vec<SEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SEntry {
    row: usize,
    col: usize,
    series: Vec<TermEntry>,
}

pub(crate) fn parse_series(
    ctx: &ScalarContext,
    nvars: usize,
    prec: i32,
    terms: &[TermEntry],
) -> Result<TSeries> {
    let mut s = TSeries::zero(nvars, prec);
    for t in terms {
        if t.exponents.len() != nvars {
            return Err(Error::GenusZero(format!(
                "monomial {:?} has {} exponents for {nvars} variables",
                t.exponents,
                t.exponents.len()
            )));
        }
        let m: Monomial = t.exponents.clone();
        s.add_term(m, &ctx.parse(&t.value)?);
    }
    Ok(s)
}

/// Read a genus-zero data file against the basis of `algebra`.
pub fn load_genus_zero(algebra: &CRAlgebra, text: &str, t_degree: u32) -> Result<FrobeniusData> {
    let file: GenusZeroFile = serde_json::from_str(text)?;
    let n = algebra.rank();
    let nvars = file.variables.len();
    let prec = if nvars == 0 {
        EXACT
    } else {
        t_degree as i32 + 1
    };
    let order = file.cyclotomic_order.unwrap_or(1);
    let ctx = ScalarContext::new(order, &file.radicands)?;
    let mut c: Structure = vec![vec![vec![TSeries::zero(nvars, EXACT); n]; n]; n];
    for e in &file.structure_constants {
        if e.mu >= n || e.nu >= n || e.rho >= n {
            return Err(Error::GenusZero(format!(
                "index ({}, {}, {}) outside a basis of size {n}",
                e.mu, e.nu, e.rho
            )));
        }
        let s = parse_series(&ctx, nvars, prec, &e.series)?;
        c[e.mu][e.nu][e.rho] = &c[e.mu][e.nu][e.rho] + &s;
    }
    let s_operator = match &file.s_operator {
        None => None,
        Some(blocks) => {
            let kmax = blocks.iter().map(|b| b.k).max().unwrap_or(0);
            let mut mats = vec![Matrix::zero(n, n, nvars); kmax];
            for b in blocks {
                if b.k == 0 {
                    return Err(Error::GenusZero("S-operator blocks start at k = 1".into()));
                }
                for e in &b.entries {
                    if e.row >= n || e.col >= n {
                        return Err(Error::GenusZero("S-operator index out of range".into()));
                    }
                    let s = parse_series(&ctx, nvars, prec, &e.series)?;
                    let cur = mats[b.k - 1].get(e.row, e.col).clone();
                    mats[b.k - 1].set(e.row, e.col, &cur + &s);
                }
            }
            Some(SOperator::new(mats))
        }
    };
    for &d in &file.divisor_directions {
        if d >= n {
            return Err(Error::GenusZero(format!(
                "divisor direction {d} out of range"
            )));
        }
    }
    FrobeniusData::from_parts(
        algebra,
        file.variables,
        t_degree,
        c,
        s_operator,
        file.divisor_directions,
    )
}
