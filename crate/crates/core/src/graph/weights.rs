//! Leaf, edge and vertex weights of the graph sum.

use crate::error::{Error, Result};
use crate::frobenius::FrobeniusData;
use crate::psi::psi_intersection;
use crate::rmatrix::RMatrix;
use crate::scalar::Scalar;
use crate::series::{BiSeries, Matrix, TSeries, EXACT};

use super::enumerate::StableGraph;

/// An insertion `t̄(z) = Σ_b v_b z^b`: `by_height[b][μ]` in φ̃ coordinates.
pub type LeafInput = Vec<Vec<TSeries>>;

/// Precomputed per-(data, R) quantities.
pub struct WeightContext<'a> {
    data: &'a FrobeniusData,
    r: &'a RMatrix,
    /// `(ΨR_m)[μ][i]`
    psi_r: Vec<Matrix>,
    inv_sqrt_delta: Vec<TSeries>,
    /// `[z^a w^b] (δ_ij − Σ_p R_p^i(−z) R_p^j(−w))/(z + w)` per `(i, j)`
    edges: Vec<Vec<BiSeries>>,
    /// `(√Δ_i)^e`
    powers: Vec<Vec<TSeries>>,
}

impl<'a> WeightContext<'a> {
    pub fn new(data: &'a FrobeniusData, r: &'a RMatrix, max_power: usize) -> Result<Self> {
        let n = data.rank();
        let k = r.order();
        let psi_r = r.coeffs().iter().map(|m| data.psi() * m).collect();
        let inv_sqrt_delta = (0..n)
            .map(|i| data.sqrt_delta(i).inv(data.prec()))
            .collect::<Result<Vec<_>>>()?;
        let rm = r.neg_z();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut num = BiSeries::new(k as u32);
                if i == j {
                    num.set(0, 0, TSeries::one(0));
                }
                for a in 0..=k {
                    for b in 0..=(k - a) {
                        let mut s = TSeries::zero(0, EXACT);
                        for p in 0..n {
                            s += &(rm.coeff(a).get(p, i) * rm.coeff(b).get(p, j));
                        }
                        num.add_to(a as u32, b as u32, &-&s);
                    }
                }
                row.push(num.divide_by_z_plus_w()?);
            }
            edges.push(row);
        }
        let powers = (0..n)
            .map(|i| {
                let mut v = vec![TSeries::one(0)];
                for e in 1..=max_power {
                    let next = &v[e - 1] * data.sqrt_delta(i);
                    v.push(next);
                }
                v
            })
            .collect();
        Ok(WeightContext {
            data,
            r,
            psi_r,
            inv_sqrt_delta,
            edges,
            powers,
        })
    }

    pub fn data(&self) -> &FrobeniusData {
        self.data
    }

    pub fn r(&self) -> &RMatrix {
        self.r
    }

    /// `E^{ij}_{ab}`
    pub fn edge(&self, i: usize, j: usize, a: u32, b: u32) -> Result<TSeries> {
        let q = &self.edges[i][j];
        if a + b > q.total() {
            return Err(Error::ZOrderTooLow {
                have: self.r.order(),
                need: (a + b + 1) as usize,
            });
        }
        Ok(q.get(a, b))
    }

    /// `[z^{a−1}](−Σ_j R_j^i(−z)/√Δ_j)`
    pub fn dilaton(&self, i: usize, a: u32) -> Result<TSeries> {
        if a < 2 {
            return Err(Error::DilatonHeight(a));
        }
        let m = (a - 1) as usize;
        if m > self.r.order() {
            return Err(Error::ZOrderTooLow {
                have: self.r.order(),
                need: m,
            });
        }
        let mut s = TSeries::zero(0, EXACT);
        for (j, inv) in self.inv_sqrt_delta.iter().enumerate() {
            s += &(inv * self.r.coeff(m).get(j, i));
        }
        // −(−1)^m
        Ok(if m % 2 == 1 { s } else { -&s })
    }

    /// `[z^a] Σ_μ t̄^μ(z) Ψ_μ^j R_j^i(−z)`
    pub fn ordinary(&self, input: &LeafInput, i: usize, a: u32) -> Result<TSeries> {
        let mut s = TSeries::zero(0, EXACT);
        for (b, v) in input.iter().enumerate().take(a as usize + 1) {
            let m = a as usize - b;
            if v.iter().all(TSeries::is_zero) {
                continue;
            }
            if m > self.r.order() {
                return Err(Error::ZOrderTooLow {
                    have: self.r.order(),
                    need: m,
                });
            }
            let mut t = TSeries::zero(0, EXACT);
            for (mu, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    t += &(x * self.psi_r[m].get(mu, i));
                }
            }
            if m % 2 == 1 {
                s -= &t;
            } else {
                s += &t;
            }
        }
        Ok(s)
    }

    /// `(√Δ_i)^{2g−2+val} ∫ ψ^{heights}`
    pub fn vertex(&self, i: usize, genus: u32, heights: &[u32]) -> Result<TSeries> {
        let e = (2 * genus as i64 - 2 + heights.len() as i64) as usize;
        let p = self.powers[i].get(e).ok_or_else(|| {
            Error::Internal(format!("vertex power {e} beyond the precomputed range"))
        })?;
        let v = psi_intersection(genus, heights);
        Ok(p.scale(&Scalar::from_rational(v)))
    }

    /// `w(Γ)/|Aut Γ|` with leaf `l` carrying `inputs[l]`.
    pub fn graph(&self, g: &StableGraph, inputs: &[LeafInput]) -> Result<TSeries> {
        let mut w = TSeries::one(0);
        for (l, leaf) in g.leaves.iter().enumerate() {
            let i = g.vertices[leaf.vertex].marking;
            let f = self.ordinary(&inputs[l], i, leaf.height)?;
            if f.is_zero() {
                return Ok(TSeries::zero(0, EXACT));
            }
            w = &w * &f;
        }
        for d in &g.dilatons {
            let f = self.dilaton(g.vertices[d.vertex].marking, d.height)?;
            if f.is_zero() {
                return Ok(TSeries::zero(0, EXACT));
            }
            w = &w * &f;
        }
        for e in &g.edges {
            let [(v, a), (u, b)] = e.ends;
            let f = self.edge(g.vertices[v].marking, g.vertices[u].marking, a, b)?;
            if f.is_zero() {
                return Ok(TSeries::zero(0, EXACT));
            }
            w = &w * &f;
        }
        for (v, vx) in g.vertices.iter().enumerate() {
            let f = self.vertex(vx.marking, vx.genus, &g.heights_at(v))?;
            w = &w * &f;
        }
        let aut = Scalar::from_frac(1, g.automorphism_order() as i64);
        Ok(w.scale(&aut))
    }
}

/// The smallest `K` with which every weight of `graphs` is determined.
pub fn required_order(graphs: &[StableGraph]) -> usize {
    let mut need = 0u32;
    for g in graphs {
        for e in &g.edges {
            need = need.max(e.ends[0].1 + e.ends[1].1 + 1);
        }
        for d in &g.dilatons {
            need = need.max(d.height - 1);
        }
        for l in &g.leaves {
            need = need.max(l.height);
        }
    }
    need as usize
}

/// `E^{ij}_{ab} = E^{ji}_{ba}` over every stored edge coefficient.
pub fn edge_symmetry_holds(ctx: &WeightContext<'_>) -> bool {
    let n = ctx.data.rank();
    let k = ctx.r.order() as u32;
    (0..n).all(|i| {
        (0..n).all(|j| {
            (0..k)
                .all(|a| (0..k - a).all(|b| ctx.edge(i, j, a, b).ok() == ctx.edge(j, i, b, a).ok()))
        })
    })
}
