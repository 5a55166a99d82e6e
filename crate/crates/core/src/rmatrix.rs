//! R-matrices: quantum Riemann–Roch boundary values, the order-by-order QDE
//! solver, unitarity, and the S-operator plus-part.
//!
//! Index convention: `R[j][i] = R_j^i`, rows carry the lower index.  All
//! matrices live in the normalized canonical frame, where the pairing is the
//! identity and "adjoint" means transpose.

use num_traits::{One, Zero};

use crate::bernoulli::bernoulli_polynomial;
use crate::chen_ruan::GKMTarget;
use crate::error::{Error, Result};
use crate::frobenius::{integrate_closed, FrobeniusData};
use crate::group::{GroupData, SectorAction};
use crate::scalar::{int, rat, Rational, Scalar};
use crate::series::{Matrix, TSeries, ZSeries, EXACT};

/// `R(z) = Σ_{k=0}^{K} R_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    coeffs: Vec<Matrix>,
}

impl RMatrix {
    pub fn new(coeffs: Vec<Matrix>) -> Self {
        assert!(!coeffs.is_empty(), "an R-matrix needs R_0");
        RMatrix { coeffs }
    }

    pub fn identity(n: usize, order: usize) -> Self {
        let mut coeffs = vec![Matrix::identity(n, 0)];
        coeffs.extend((0..order).map(|_| Matrix::zero(n, n, 0)));
        RMatrix { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn rank(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn coeff(&self, k: usize) -> &Matrix {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    pub fn truncated(&self, order: usize) -> Self {
        RMatrix {
            coeffs: self.coeffs.iter().take(order + 1).cloned().collect(),
        }
    }

    pub fn at_origin(&self) -> Self {
        RMatrix {
            coeffs: self.coeffs.iter().map(Matrix::at_origin).collect(),
        }
    }

    pub fn to_zseries(&self) -> ZSeries {
        ZSeries::new(0, self.coeffs.clone())
    }

    /// `R(−z)`
    pub fn neg_z(&self) -> Self {
        RMatrix {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, m)| if k % 2 == 1 { -m } else { m.clone() })
                .collect(),
        }
    }

    /// First order `k ≤ K` with `[z^k] Rᵀ(−z)R(z) ≠ δ_{k0}`.
    pub fn unitarity_check(&self) -> std::result::Result<(), usize> {
        let n = self.rank();
        for k in 0..=self.order() {
            let mut acc = Matrix::zero(n, n, 0);
            for a in 0..=k {
                let mut t = &self.coeffs[a].transpose() * &self.coeffs[k - a];
                if a % 2 == 1 {
                    t = -&t;
                }
                acc = &acc + &t;
            }
            let ok = if k == 0 {
                acc == Matrix::identity(n, 0)
            } else {
                acc.is_zero()
            };
            if !ok {
                return Err(k);
            }
        }
        Ok(())
    }
}

/// Truncated exponential of a power series in `z` with zero constant term.
fn exp_poly(a: &[Rational], order: usize) -> Vec<Rational> {
    // e' = a' e  ⇒  k e_k = Σ_{m=1}^{k} m a_m e_{k−m}
    let mut e = vec![Rational::zero(); order + 1];
    e[0] = Rational::one();
    for k in 1..=order {
        let mut s = Rational::zero();
        for m in 1..=k {
            if let Some(am) = a.get(m) {
                s += int(m as i64) * am * &e[k - m];
            }
        }
        e[k] = s / int(k as i64);
    }
    e
}

/// `∏_k exp(Σ_m (−1)^m/(m(m+1)) B_{m+1}(c_k) (z/w_k)^m)` through `z^order`.
fn qrr_factor(action: &SectorAction, class: usize, order: usize) -> Vec<Rational> {
    let mut log = vec![Rational::zero(); order + 1];
    for (k, w) in action.weights().iter().enumerate() {
        let c = action.c_value(class, k);
        let mut wpow = Rational::one();
        for (m, slot) in log.iter_mut().enumerate().skip(1) {
            wpow *= w;
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let coef = rat(sign, (m * (m + 1)) as i64) * bernoulli_polynomial(m + 1, c);
            *slot += coef / &wpow;
        }
    }
    exp_poly(&log, order)
}

/// Quantum Riemann–Roch boundary matrix of one local model, in the φ̃ order
/// of its characters:
/// `P_j^i = Σ_(h) χ_j(h) χ_i(h⁻¹)/|C(h)| · ∏_k exp(…)`.
pub fn qrr_pmatrix(group: &GroupData, action: &SectorAction, order: usize) -> RMatrix {
    let k = group.num_classes();
    let factors: Vec<Vec<Rational>> = (0..k).map(|h| qrr_factor(action, h, order)).collect();
    let coeffs = (0..=order)
        .map(|m| {
            Matrix::from_scalars(k, k, |j, i| {
                let mut acc = Scalar::zero();
                for (h, f) in factors.iter().enumerate() {
                    if f[m].is_zero() {
                        continue;
                    }
                    let w = rat(1, group.class(h).centralizer as i64) * &f[m];
                    let chi = group.character(j, h) * group.character(i, group.inverse(h));
                    acc += &chi.scale(&w);
                }
                acc
            })
        })
        .collect();
    RMatrix { coeffs }
}

/// Block-diagonal boundary over all fixed points of a target.
pub fn target_pmatrix(target: &GKMTarget, order: usize) -> RMatrix {
    let blocks: Vec<RMatrix> = target
        .fixed_points
        .iter()
        .map(|m| qrr_pmatrix(&m.group, &m.action, order))
        .collect();
    block_diagonal(&blocks)
}

pub fn block_diagonal(blocks: &[RMatrix]) -> RMatrix {
    let n: usize = blocks.iter().map(RMatrix::rank).sum();
    let order = blocks.iter().map(RMatrix::order).min().unwrap_or(0);
    let coeffs = (0..=order)
        .map(|m| {
            let mut out = Matrix::zero(n, n, 0);
            let mut off = 0;
            for b in blocks {
                let r = b.rank();
                for j in 0..r {
                    for i in 0..r {
                        out.set(off + j, off + i, b.coeff(m).get(j, i).clone());
                    }
                }
                off += r;
            }
            out
        })
        .collect();
    RMatrix { coeffs }
}

/// How the integration constants of the QDE recursion are fixed at the origin.
#[derive(Clone, Debug)]
pub enum Boundary {
    /// `R|_{t=0,q=0} = P`.  Off-diagonal origin values are forced by the QDE
    /// when there are coordinate variables, and must agree with `P`.
    Matrix(RMatrix),
    /// Diagonal constants of odd orders: entry `m` holds the diagonal of
    /// `R_{2m+1}` at the origin (missing entries are zero).  Even orders are
    /// fixed by unitarity.
    OddDiagonal(Vec<Vec<Scalar>>),
}

impl Boundary {
    /// The odd-order diagonal constants of a boundary matrix.
    pub fn odd_diagonal_of(p: &RMatrix) -> Self {
        let n = p.rank();
        let v = (1..=p.order())
            .step_by(2)
            .map(|k| {
                (0..n)
                    .map(|i| p.coeff(k).get(i, i).constant_term())
                    .collect()
            })
            .collect();
        Boundary::OddDiagonal(v)
    }
}

/// Solve `Ψᵀ∂_μΨ·R_k + ∂_μR_k = [dU_μ, R_{k+1}]` for `R_1, …, R_K`.
pub fn solve_qde(data: &FrobeniusData, boundary: &Boundary, order: usize) -> Result<RMatrix> {
    let n = data.rank();
    let nvars = data.nvars();
    let tv = data.t_vars();
    if let Boundary::Matrix(p) = boundary {
        if p.rank() != n {
            return Err(Error::Config(format!(
                "boundary matrix of rank {} for an algebra of rank {n}",
                p.rank()
            )));
        }
        if p.order() < order {
            return Err(Error::ZOrderTooLow {
                have: p.order(),
                need: order,
            });
        }
    }
    if tv == 0 {
        return match boundary {
            Boundary::Matrix(p) => Ok(p.truncated(order)),
            Boundary::OddDiagonal(_) => Err(Error::Config(
                "odd-diagonal boundary needs coordinate variables".into(),
            )),
        };
    }
    let conn: Vec<Matrix> = (0..tv).map(|mu| data.connection(mu)).collect();
    let du = |i: usize, mu: usize| data.du(i)[mu].clone();
    // 1/(du^i_i − du^j_i), constant term √Δ_i(0)
    let mut gap_inv = vec![vec![TSeries::zero(0, EXACT); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let g = &du(i, i) - &du(j, i);
            gap_inv[i][j] = g
                .inv(data.prec())
                .map_err(|_| Error::DegenerateCoordinates)?;
        }
    }
    let mut coeffs = vec![Matrix::identity(n, nvars)];
    for k in 0..order {
        let rk = &coeffs[k];
        // rhs_μ = A_μ R_k + ∂_μ R_k
        let rhs: Vec<Matrix> = (0..tv)
            .map(|mu| &(&conn[mu] * rk) + &rk.map(|x| x.broadcast(nvars).derivative(mu)))
            .collect();
        let mut next = Matrix::zero(n, n, nvars);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    next.set(i, j, rhs[i].get(i, j) * &gap_inv[i][j]);
                }
            }
        }
        for mu in 0..tv {
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        if !rhs[mu].get(i, i).is_zero() {
                            return Err(Error::Internal(format!(
                                "diagonal of the QDE at z^{} fails in direction {mu}",
                                k + 1
                            )));
                        }
                        continue;
                    }
                    let lhs = &(&du(i, mu) - &du(j, mu)) * next.get(i, j);
                    if &lhs != rhs[mu].get(i, j) {
                        return Err(Error::Internal(format!(
                            "QDE inconsistent at z^{}, entry ({i}, {j}), direction {mu}",
                            k + 1
                        )));
                    }
                }
            }
        }
        // ∂_μ R_ii = −Σ_p A_μ[i][p] R[p][i]
        for i in 0..n {
            let form: Vec<TSeries> = (0..tv)
                .map(|mu| {
                    let mut acc = TSeries::zero(nvars, EXACT);
                    for p in 0..n {
                        if p != i {
                            acc -= &(conn[mu].get(i, p) * next.get(p, i));
                        }
                    }
                    acc
                })
                .collect();
            for a in 0..tv {
                for b in 0..a {
                    if form[a].derivative(b) != form[b].derivative(a) {
                        return Err(Error::Internal(format!(
                            "diagonal equation for R_{} not integrable at index {i}",
                            k + 1
                        )));
                    }
                }
            }
            next.set(i, i, integrate_closed(&form, tv, nvars));
        }
        let m = k + 1;
        let constants: Vec<Scalar> = match boundary {
            Boundary::Matrix(p) => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j
                            && next.get(i, j).constant_term()
                                != p.coeff(m).get(i, j).constant_term()
                        {
                            return Err(Error::BoundaryConflict {
                                order: m,
                                row: i,
                                col: j,
                            });
                        }
                    }
                }
                (0..n)
                    .map(|i| p.coeff(m).get(i, i).constant_term())
                    .collect()
            }
            Boundary::OddDiagonal(v) => {
                if m % 2 == 1 {
                    v.get(m / 2)
                        .cloned()
                        .unwrap_or_else(|| vec![Scalar::zero(); n])
                } else {
                    // 2 R_m[i][i] = −Σ_{0<a<m} (−1)^a (R_aᵀ R_{m−a})_ii at the origin
                    let mut rs: Vec<Matrix> = coeffs.iter().map(Matrix::at_origin).collect();
                    rs.push(next.at_origin());
                    (0..n)
                        .map(|i| {
                            let mut s = Scalar::zero();
                            for a in 1..m {
                                let mut t = Scalar::zero();
                                for p in 0..n {
                                    t += &(&rs[a].get(p, i).constant_term()
                                        * &rs[m - a].get(p, i).constant_term());
                                }
                                if a % 2 == 1 {
                                    s -= &t;
                                } else {
                                    s += &t;
                                }
                            }
                            s.scale(&rat(-1, 2))
                        })
                        .collect()
                }
            }
        };
        if constants.len() != n {
            return Err(Error::Config(format!(
                "{} boundary constants at z^{m} for rank {n}",
                constants.len()
            )));
        }
        for (i, c) in constants.iter().enumerate() {
            let mut d = next.get(i, i).clone();
            d.add_term(vec![0; nvars], c);
            next.set(i, i, d);
        }
        coeffs.push(next);
    }
    Ok(RMatrix { coeffs })
}

/// `S(z) = I + Σ_{k≥1} S_k z^{−k}`; `S_k[ν][μ] = (S_k)^ν_μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SOperator {
    mats: Vec<Matrix>,
}

impl SOperator {
    pub fn new(mats: Vec<Matrix>) -> Self {
        SOperator { mats }
    }

    pub fn identity() -> Self {
        SOperator { mats: Vec::new() }
    }

    /// Highest stored `k`.
    pub fn depth(&self) -> usize {
        self.mats.len()
    }

    pub fn coeff(&self, k: usize) -> Option<&Matrix> {
        if k == 0 {
            None
        } else {
            self.mats.get(k - 1)
        }
    }

    pub fn map_entries(&self, f: impl Fn(&TSeries) -> TSeries) -> Self {
        SOperator {
            mats: self.mats.iter().map(|m| m.map(&f)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mats.iter().all(Matrix::is_zero)
    }
}

/// `[S(z) t̄(z)]_+` for `t̄(z) = Σ_a tbar[a] z^a` (vectors over the basis).
pub fn s_plus_transform(s: &SOperator, tbar: &[Vec<TSeries>]) -> Vec<Vec<TSeries>> {
    let mut out: Vec<Vec<TSeries>> = tbar.to_vec();
    for (a, slot) in out.iter_mut().enumerate() {
        for k in 1..=s.depth() {
            let Some(v) = tbar.get(a + k) else { break };
            let sk = s.coeff(k).expect("k ≤ depth");
            for (nu, x) in slot.iter_mut().enumerate() {
                for (mu, t) in v.iter().enumerate() {
                    let e = sk.get(nu, mu);
                    if !e.is_zero() {
                        *x += &(e * t);
                    }
                }
            }
        }
    }
    out
}
