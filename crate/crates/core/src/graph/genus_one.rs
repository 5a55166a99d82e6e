//! The genus-one potential: closed form of `dF_{1,0}` against the three
//! graphs that carry weight in `F̄_{1,1}`.
//!
//! 1-forms are written in the coframe `du^j`: entry `j` is the value on
//! `∂/∂u^j`.

use crate::error::Result;
use crate::frobenius::FrobeniusData;
use crate::rmatrix::RMatrix;
use crate::scalar::{rat, Scalar};
use crate::series::{TSeries, EXACT};

use super::potential::{EvalOptions, GraphSum, Mode};
use super::weights::LeafInput;

pub type OneForm = Vec<TSeries>;

fn r1(r: &RMatrix, p: usize, q: usize) -> TSeries {
    if r.order() == 0 {
        TSeries::zero(0, EXACT)
    } else {
        r.coeff(1).get(p, q).clone()
    }
}

fn inv_sqrt(data: &FrobeniusData, i: usize) -> Result<TSeries> {
    data.sqrt_delta(i).inv(data.prec())
}

/// `∂_{u^j} log Δ_i`.  With coordinate variables this is a derivative of
/// the loaded data; at the bare origin it is read off `R_1` through
/// `Ψ⁻¹dΨ = [dU, R_1]` and `1/√Δ_j = Σ_β Ψ_β^j/√Δ_β(0)`.
pub fn log_delta_derivative(
    data: &FrobeniusData,
    r: &RMatrix,
    i: usize,
    j: usize,
) -> Result<TSeries> {
    if data.t_vars() > 0 {
        let d = data.canonical_derivative(j, data.delta(i));
        return Ok(&d * &data.delta(i).inv(data.prec())?);
    }
    let mut s = TSeries::zero(0, EXACT);
    for beta in 0..data.rank() {
        let coef = (beta == j) as i64 - (i == j) as i64;
        if coef == 0 {
            continue;
        }
        let t = &r1(r, beta, i) * &inv_sqrt(data, beta)?;
        s += &t.scale(&Scalar::from_int(coef));
    }
    Ok((&s * data.sqrt_delta(i)).scale(&Scalar::from_int(-2)))
}

/// `dF_{1,0} = Σ_i (1/48) d log Δ_i + Σ_i (1/2)(R_1)_i^i du^i`.
pub fn f10_closed_form(data: &FrobeniusData, r: &RMatrix) -> Result<OneForm> {
    let n = data.rank();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut s = TSeries::zero(0, EXACT);
        for i in 0..n {
            s += &log_delta_derivative(data, r, i, j)?.scale(&Scalar::from_rational(rat(1, 48)));
        }
        s += &r1(r, j, j).scale(&Scalar::from_rational(rat(1, 2)));
        out.push(s);
    }
    Ok(out)
}

/// The three nonzero genus-one graph contributions at `∂/∂u^j` for every `j`:
/// the bare genus-one vertex, the vertex with a dilaton leaf, and the loop.
pub fn three_graph_contributions(data: &FrobeniusData, r: &RMatrix) -> Result<Vec<[TSeries; 3]>> {
    let n = data.rank();
    let inv: Vec<TSeries> = (0..n).map(|i| inv_sqrt(data, i)).collect::<Result<_>>()?;
    let c24 = Scalar::from_rational(rat(1, 24));
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut g1 = TSeries::zero(0, EXACT);
        for i in 0..n {
            g1 -= &(&(data.sqrt_delta(i) * &r1(r, j, i)) * &inv[j]);
        }
        let g1 = g1.scale(&c24);
        let mut g2 = TSeries::zero(0, EXACT);
        for (p, ip) in inv.iter().enumerate() {
            g2 += &(&r1(r, p, j) * ip);
        }
        let g2 = (&g2 * data.sqrt_delta(j)).scale(&c24);
        let g3 = r1(r, j, j).scale(&Scalar::from_rational(rat(1, 2)));
        out.push([g1, g2, g3]);
    }
    Ok(out)
}

pub fn f10_graph_check(data: &FrobeniusData, r: &RMatrix) -> Result<OneForm> {
    Ok(three_graph_contributions(data, r)?
        .into_iter()
        .map(|[a, b, c]| &(&a + &b) + &c)
        .collect())
}

/// `∂/∂u^j = ε_j` as a height-zero insertion.
pub fn canonical_insertion(data: &FrobeniusData, j: usize) -> LeafInput {
    vec![data.idempotent(j).to_vec()]
}

/// `F̄_{1,1}(∂/∂u^j)` for every `j`, by the full graph sum.
pub fn genus_one_ancestor(
    data: &FrobeniusData,
    r: &RMatrix,
    opts: &EvalOptions,
) -> Result<OneForm> {
    let sum = GraphSum::new(1, 1, data, r)?;
    (0..data.rank())
        .map(|j| sum.evaluate(&[canonical_insertion(data, j)], Mode::Ancestor, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::chen_ruan::gkm_assemble;
    use crate::rmatrix::{solve_qde, target_pmatrix, Boundary};

    #[test]
    fn classical_targets_agree() {
        for name in ["point", "c-z2", "c3-z3", "c2-klein"] {
            let t = builtins::target(name).unwrap();
            let data = FrobeniusData::classical(&gkm_assemble(&t).unwrap());
            let r = solve_qde(&data, &Boundary::Matrix(target_pmatrix(&t, 3)), 3).unwrap();
            let closed = f10_closed_form(&data, &r).unwrap();
            assert_eq!(closed, f10_graph_check(&data, &r).unwrap(), "{name}");
            assert_eq!(
                closed,
                genus_one_ancestor(&data, &r, &EvalOptions::default()).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn deformed_rank_two_agrees() {
        let (t, data) = builtins::genus_zero("rank2-deformed", 4).unwrap();
        let p = target_pmatrix(&t, 4);
        let r = solve_qde(&data, &Boundary::odd_diagonal_of(&p), 4).unwrap();
        let closed = f10_closed_form(&data, &r).unwrap();
        let graphs = f10_graph_check(&data, &r).unwrap();
        assert_eq!(closed, graphs);
        assert!(closed.iter().all(|f| f.prec() >= 4));
        let anc = genus_one_ancestor(&data, &r, &EvalOptions::default()).unwrap();
        assert_eq!(anc, graphs);
    }
}
