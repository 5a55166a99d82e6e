//! Equivariant Chen–Ruan algebras of local models `[C^r/G]` and their direct
//! sum over the fixed points of a GKM target.
//!
//! Everything is stored in the rescaled sector basis `1̄_(h)`, where pairing
//! and product have rational coefficients.  The plain sector basis differs by
//! fractional weight powers, which are kept as exponent vectors only.

use std::path::{Path, PathBuf};

use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::{AxisChar, GroupData, SectorAction};
use crate::scalar::{int, Rational, Scalar};

#[derive(Clone, Debug)]
pub struct LocalModel {
    pub group: GroupData,
    pub action: SectorAction,
}

impl LocalModel {
    pub fn new(group: GroupData, action: SectorAction) -> Self {
        LocalModel { group, action }
    }
}

#[derive(Clone, Debug)]
pub struct GKMTarget {
    pub dimension: usize,
    pub fixed_points: Vec<LocalModel>,
    /// Basis indices flagged as untwisted degree-2 (divisor) directions.
    pub divisor_directions: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorLabel {
    pub fixed_point: usize,
    pub class: usize,
}

impl GKMTarget {
    pub fn new(fixed_points: Vec<LocalModel>) -> Result<Self> {
        let dimension = fixed_points
            .first()
            .map(|m| m.action.rank())
            .ok_or_else(|| Error::Target("no fixed points".into()))?;
        if let Some(i) = fixed_points
            .iter()
            .position(|m| m.action.rank() != dimension)
        {
            return Err(Error::Target(format!(
                "fixed point {i} has {} axes, expected {dimension}",
                fixed_points[i].action.rank()
            )));
        }
        Ok(GKMTarget {
            dimension,
            fixed_points,
            divisor_directions: Vec::new(),
        })
    }

    pub fn single(group: GroupData, action: SectorAction) -> Self {
        Self::new(vec![LocalModel::new(group, action)]).expect("one fixed point")
    }

    pub fn involution(&self, s: SectorLabel) -> SectorLabel {
        SectorLabel {
            fixed_point: s.fixed_point,
            class: self.fixed_points[s.fixed_point].group.inverse(s.class),
        }
    }

    /// Whether weights along distinct axes differ at every fixed point.
    pub fn weights_distinct(&self) -> bool {
        self.fixed_points.iter().all(|m| {
            let w = m.action.weights();
            (0..w.len()).all(|i| (i + 1..w.len()).all(|j| w[i] != w[j]))
        })
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent())
    }

    /// Parse a target description; relative table paths resolve against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let file: TargetFile = serde_json::from_str(text)?;
        let mut models = Vec::with_capacity(file.fixed_points.len());
        for (i, fp) in file.fixed_points.into_iter().enumerate() {
            let group = match fp.group {
                GroupSpec::Cyclic { cyclic } => GroupData::abelian(&cyclic)?,
                GroupSpec::Table { table } => match table {
                    TableRef::Path(p) => {
                        let p = PathBuf::from(p);
                        let p = match base {
                            Some(b) if p.is_relative() => b.join(p),
                            _ => p,
                        };
                        GroupData::from_table_file(&p)?
                    }
                    TableRef::Inline(v) => GroupData::from_table_json(&v.to_string())?,
                },
            };
            let axes = fp
                .action_chars
                .into_iter()
                .map(|v| {
                    if group.is_abelian_builtin() {
                        AxisChar::Exponents(v)
                    } else {
                        match v.as_slice() {
                            [a] => AxisChar::Character(*a as usize),
                            _ => AxisChar::Exponents(v),
                        }
                    }
                })
                .collect();
            let weights = fp
                .weights
                .iter()
                .map(|w| w.to_rational())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Target(format!("fixed point {i}: {e}")))?;
            let action = SectorAction::new(&group, axes, weights)
                .map_err(|e| Error::Target(format!("fixed point {i}: {e}")))?;
            models.push(LocalModel::new(group, action));
        }
        let mut t = GKMTarget::new(models)?;
        if t.dimension != file.dimension {
            return Err(Error::Target(format!(
                "declared dimension {} but local models have {} axes",
                file.dimension, t.dimension
            )));
        }
        let n: usize = t.fixed_points.iter().map(|m| m.group.num_classes()).sum();
        if let Some(&d) = file.divisor_directions.iter().find(|&&d| d >= n) {
            return Err(Error::Target(format!("divisor direction {d} out of range")));
        }
        t.divisor_directions = file.divisor_directions;
        Ok(t)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    dimension: usize,
    fixed_points: Vec<FixedPointSpec>,
    #[serde(default)]
    divisor_directions: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedPointSpec {
    group: GroupSpec,
    action_chars: Vec<Vec<u32>>,
    weights: Vec<WeightLit>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GroupSpec {
    Cyclic { cyclic: Vec<u32> },
    Table { table: TableRef },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TableRef {
    Path(String),
    Inline(serde_json::Value),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightLit {
    Int(i64),
    Text(String),
}

impl WeightLit {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            WeightLit::Int(n) => Ok(int(*n)),
            WeightLit::Text(s) => s
                .trim()
                .parse::<Rational>()
                .map_err(|e| Error::Target(format!("bad weight `{s}`: {e}"))),
        }
    }
}

/// Which of the four bases a coordinate vector refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Sector,
    SectorBar,
    PhiBar,
    PhiTilde,
}

#[derive(Clone, Debug)]
pub struct CRAlgebra {
    sectors: Vec<SectorLabel>,
    sector_names: Vec<String>,
    /// canonical index → (fixed point, character)
    canonical: Vec<(usize, usize)>,
    canonical_names: Vec<String>,
    ages: Vec<Rational>,
    /// `1_(h) = (∏_i w_i^{c_i(h)}) 1̄_(h)`: the exponent vectors and weights.
    sector_exponents: Vec<Vec<Rational>>,
    sector_weights: Vec<Vec<Rational>>,
    inverse: Vec<usize>,
    gram_bar: Vec<Vec<Rational>>,
    /// `1̄_a ⋆ 1̄_b = Σ_c product_bar[a][b][c] 1̄_c`
    product_bar: Vec<Vec<Vec<Rational>>>,
    /// `1_a ⋆ 1_b = Σ_c product_one[a][b][c] 1_c` (integer weight exponents)
    product_one: Vec<Vec<Vec<Rational>>>,
    gram_one: Vec<Vec<Rational>>,
    /// φ̄_μ in 1̄ coordinates
    phibar: Vec<Vec<Scalar>>,
    nu: Vec<Rational>,
    weight_products: Vec<Rational>,
    delta0: Vec<Rational>,
    sqrt_delta0: Vec<Scalar>,
    block_of: Vec<usize>,
    divisor_directions: Vec<usize>,
}

/// Algebra of one local model, as a single-point target.
pub fn local_cr_algebra(group: &GroupData, action: &SectorAction) -> Result<CRAlgebra> {
    gkm_assemble(&GKMTarget::single(group.clone(), action.clone()))
}

/// Block-diagonal algebra over all fixed points.
pub fn gkm_assemble(target: &GKMTarget) -> Result<CRAlgebra> {
    let n: usize = target
        .fixed_points
        .iter()
        .map(|m| m.group.num_classes())
        .sum();
    let mut alg = CRAlgebra {
        sectors: Vec::with_capacity(n),
        sector_names: Vec::with_capacity(n),
        canonical: Vec::with_capacity(n),
        canonical_names: Vec::with_capacity(n),
        ages: Vec::with_capacity(n),
        sector_exponents: Vec::with_capacity(n),
        sector_weights: Vec::with_capacity(n),
        inverse: Vec::with_capacity(n),
        gram_bar: vec![vec![Rational::zero(); n]; n],
        product_bar: vec![vec![vec![Rational::zero(); n]; n]; n],
        product_one: vec![vec![vec![Rational::zero(); n]; n]; n],
        gram_one: vec![vec![Rational::zero(); n]; n],
        phibar: Vec::with_capacity(n),
        nu: Vec::with_capacity(n),
        weight_products: Vec::with_capacity(n),
        delta0: Vec::with_capacity(n),
        sqrt_delta0: Vec::with_capacity(n),
        block_of: Vec::with_capacity(n),
        divisor_directions: target.divisor_directions.clone(),
    };
    let mut offset = 0;
    for (s, m) in target.fixed_points.iter().enumerate() {
        let g = &m.group;
        let act = &m.action;
        let k = g.num_classes();
        let wprod = act.weight_product();
        if wprod.is_zero() {
            return Err(Error::DegeneratePairing);
        }
        let order = g.order() as i64;
        for h in 0..k {
            alg.sectors.push(SectorLabel {
                fixed_point: s,
                class: h,
            });
            alg.sector_names
                .push(format!("p{s}:({})", g.class(h).label));
            alg.ages.push(act.age(h));
            alg.sector_exponents.push(act.c_values(h).to_vec());
            alg.sector_weights.push(act.weights().to_vec());
            alg.inverse.push(offset + g.inverse(h));
            alg.block_of.push(s);
            // ⟨1̄_h, 1̄_{h⁻¹}⟩ = 1/(|C(h)| ∏w)
            let c = int(g.class(h).centralizer as i64);
            alg.gram_bar[offset + h][offset + g.inverse(h)] = Rational::one() / (c * &wprod);
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let v = g.class_constant(a, b, c).clone();
                    if v.is_zero() {
                        continue;
                    }
                    // exponents c(a) + c(b) − c(c) are integers
                    let mut f = Rational::one();
                    for (i, w) in act.weights().iter().enumerate() {
                        let e = act.c_value(a, i) + act.c_value(b, i) - act.c_value(c, i);
                        if !e.is_integer() {
                            return Err(Error::Internal(
                                "fractional weight exponent in sector product".into(),
                            ));
                        }
                        f *= pow_rational(w, e.to_integer().try_into().expect("small"));
                    }
                    alg.product_one[offset + a][offset + b][offset + c] = &v * f;
                    alg.product_bar[offset + a][offset + b][offset + c] = v;
                }
            }
            let ainv = g.inverse(a);
            let mut f = Rational::one();
            for (i, w) in act.weights().iter().enumerate() {
                let e = act.c_value(a, i) + act.c_value(ainv, i);
                f *= pow_rational(w, e.to_integer().try_into().expect("small"));
            }
            alg.gram_one[offset + a][offset + ainv] =
                f / (int(g.class(a).centralizer as i64) * &wprod);
        }
        for alpha in 0..k {
            let dim = g.dim(alpha) as i64;
            let mut v = vec![Scalar::zero(); n];
            for h in 0..k {
                v[offset + h] = g
                    .character(alpha, g.inverse(h))
                    .scale(&crate::scalar::rat(dim, order));
            }
            alg.phibar.push(v);
            alg.canonical.push((s, alpha));
            alg.canonical_names
                .push(format!("p{s}:{}", g.character_label(alpha)));
            let nu = crate::scalar::rat(dim * dim, order * order);
            // Δ(0) = ∏w/ν ;  √Δ(0) = (|G|/dim)·√∏w
            let delta0 = &wprod / &nu;
            let sqrt = Scalar::sqrt_rational(&wprod).scale(&crate::scalar::rat(order, dim));
            alg.nu.push(nu);
            alg.weight_products.push(wprod.clone());
            alg.delta0.push(delta0);
            alg.sqrt_delta0.push(sqrt);
        }
        offset += k;
    }
    Ok(alg)
}

fn pow_rational(w: &Rational, e: i64) -> Rational {
    let mut r = Rational::one();
    for _ in 0..e.unsigned_abs() {
        r *= w;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

impl CRAlgebra {
    pub fn rank(&self) -> usize {
        self.sectors.len()
    }

    pub fn sectors(&self) -> &[SectorLabel] {
        &self.sectors
    }

    pub fn sector_name(&self, i: usize) -> &str {
        &self.sector_names[i]
    }

    pub fn canonical_name(&self, mu: usize) -> &str {
        &self.canonical_names[mu]
    }

    /// `(fixed point, character index)` of canonical basis element `μ`.
    pub fn canonical_label(&self, mu: usize) -> (usize, usize) {
        self.canonical[mu]
    }

    pub fn age(&self, i: usize) -> &Rational {
        &self.ages[i]
    }

    /// Real degree `2·age`.
    pub fn degree(&self, i: usize) -> Rational {
        &self.ages[i] * int(2)
    }

    pub fn involution_index(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn block(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn divisor_directions(&self) -> &[usize] {
        &self.divisor_directions
    }

    pub fn nu(&self, mu: usize) -> &Rational {
        &self.nu[mu]
    }

    pub fn delta0(&self, mu: usize) -> &Rational {
        &self.delta0[mu]
    }

    pub fn sqrt_delta0(&self, mu: usize) -> &Scalar {
        &self.sqrt_delta0[mu]
    }

    pub fn sqrt_delta0_all(&self) -> &[Scalar] {
        &self.sqrt_delta0
    }

    /// `∏_j w_j` at the fixed point of canonical index `μ`.
    pub fn weight_product(&self, mu: usize) -> &Rational {
        &self.weight_products[mu]
    }

    /// Exponents `c_i(h)` with `1_(h) = ∏ w_i^{c_i(h)} · 1̄_(h)`.
    pub fn sector_exponents(&self, i: usize) -> (&[Rational], &[Rational]) {
        (&self.sector_exponents[i], &self.sector_weights[i])
    }

    pub fn gram_bar(&self) -> &[Vec<Rational>] {
        &self.gram_bar
    }

    pub fn gram_sector(&self) -> &[Vec<Rational>] {
        &self.gram_one
    }

    pub fn product_bar(&self, a: usize, b: usize, c: usize) -> &Rational {
        &self.product_bar[a][b][c]
    }

    pub fn product_sector(&self, a: usize, b: usize, c: usize) -> &Rational {
        &self.product_one[a][b][c]
    }

    /// φ̄_μ in 1̄ coordinates.
    pub fn phibar(&self, mu: usize) -> &[Scalar] {
        &self.phibar[mu]
    }

    /// φ̃_μ in 1̄ coordinates.
    pub fn phitilde(&self, mu: usize) -> Vec<Scalar> {
        self.phibar[mu]
            .iter()
            .map(|x| x * &self.sqrt_delta0[mu])
            .collect()
    }

    /// The unit `1_(e)` summed over fixed points, in 1̄ coordinates.
    pub fn unit_bar(&self) -> Vec<Scalar> {
        let mut u = vec![Scalar::zero(); self.rank()];
        for (i, s) in self.sectors.iter().enumerate() {
            if s.class == 0 {
                u[i] = Scalar::one();
            }
        }
        u
    }

    /// Product of two vectors in 1̄ coordinates.
    pub fn mul_bar(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let n = self.rank();
        let mut out = vec![Scalar::zero(); n];
        for a in 0..n {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..n {
                if y[b].is_zero() || self.block_of[a] != self.block_of[b] {
                    continue;
                }
                let xy = &x[a] * &y[b];
                for (c, o) in out.iter_mut().enumerate() {
                    let k = &self.product_bar[a][b][c];
                    if !k.is_zero() {
                        *o += &xy.scale(k);
                    }
                }
            }
        }
        out
    }

    /// Pairing of two vectors in 1̄ coordinates.
    pub fn pair_bar(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        let n = self.rank();
        let mut s = Scalar::zero();
        for a in 0..n {
            if x[a].is_zero() {
                continue;
            }
            let b = self.inverse[a];
            if !y[b].is_zero() {
                s += &(&x[a] * &y[b]).scale(&self.gram_bar[a][b]);
            }
        }
        s
    }

    /// Pairing Gram matrix in the chosen basis.  The plain sector basis is
    /// excluded here since its 1̄-coordinates involve fractional powers; use
    /// [`CRAlgebra::gram_sector`].
    pub fn gram(&self, basis: Basis) -> Vec<Vec<Scalar>> {
        let n = self.rank();
        match basis {
            Basis::Sector => self
                .gram_one
                .iter()
                .map(|r| r.iter().cloned().map(Scalar::from_rational).collect())
                .collect(),
            Basis::SectorBar => self
                .gram_bar
                .iter()
                .map(|r| r.iter().cloned().map(Scalar::from_rational).collect())
                .collect(),
            Basis::PhiBar => (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| self.pair_bar(&self.phibar[i], &self.phibar[j]))
                        .collect()
                })
                .collect(),
            Basis::PhiTilde => {
                let t: Vec<Vec<Scalar>> = (0..n).map(|i| self.phitilde(i)).collect();
                (0..n)
                    .map(|i| (0..n).map(|j| self.pair_bar(&t[i], &t[j])).collect())
                    .collect()
            }
        }
    }

    /// Run every structural check; the first failure is reported.
    pub fn verify(&self) -> Result<()> {
        let n = self.rank();
        let e = |i: usize| -> Vec<Scalar> {
            let mut v = vec![Scalar::zero(); n];
            v[i] = Scalar::one();
            v
        };
        let fail = |m: String| Err(Error::Internal(m));
        for a in 0..n {
            for b in 0..n {
                if self.gram_bar[a][b] != self.gram_bar[b][a] {
                    return fail(format!("pairing not symmetric at ({a}, {b})"));
                }
            }
            if self.gram_bar[a][self.inverse[a]].is_zero() {
                return Err(Error::DegeneratePairing);
            }
        }
        let unit = self.unit_bar();
        for a in 0..n {
            if self.mul_bar(&unit, &e(a)) != e(a) || self.mul_bar(&e(a), &unit) != e(a) {
                return fail(format!("unit fails on basis element {a}"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = self.mul_bar(&e(a), &e(b));
                if ab != self.mul_bar(&e(b), &e(a)) {
                    return fail(format!("product not commutative at ({a}, {b})"));
                }
                for c in 0..n {
                    if self.pair_bar(&ab, &e(c))
                        != self.pair_bar(&e(a), &self.mul_bar(&e(b), &e(c)))
                    {
                        return fail(format!("Frobenius property fails at ({a}, {b}, {c})"));
                    }
                    let l = self.mul_bar(&ab, &e(c));
                    let r = self.mul_bar(&e(a), &self.mul_bar(&e(b), &e(c)));
                    if l != r {
                        return fail(format!("product not associative at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        let mut total = vec![Scalar::zero(); n];
        for mu in 0..n {
            for nu in 0..n {
                let p = self.mul_bar(&self.phibar[mu], &self.phibar[nu]);
                let expect = if mu == nu {
                    self.phibar[mu].clone()
                } else {
                    vec![Scalar::zero(); n]
                };
                if p != expect {
                    return fail(format!("canonical idempotency fails at ({mu}, {nu})"));
                }
            }
            for (t, x) in total.iter_mut().zip(&self.phibar[mu]) {
                *t += x;
            }
        }
        if total != unit {
            return fail("canonical idempotents do not sum to the unit".into());
        }
        let g = self.gram(Basis::PhiTilde);
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != Scalar::from_int((i == j) as i64) {
                    return fail(format!("normalized basis not orthonormal at ({i}, {j})"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn cyclic(factors: &[u32], axes: Vec<Vec<u32>>, w: &[i64]) -> (GroupData, SectorAction) {
        let g = GroupData::abelian(factors).unwrap();
        let a = SectorAction::new(
            &g,
            axes.into_iter().map(AxisChar::Exponents).collect(),
            w.iter().map(|&x| int(x)).collect(),
        )
        .unwrap();
        (g, a)
    }

    #[test]
    fn trivial_group_weight_five() {
        let (g, a) = cyclic(&[], vec![vec![]], &[5]);
        let alg = local_cr_algebra(&g, &a).unwrap();
        assert_eq!(alg.rank(), 1);
        assert_eq!(alg.gram_bar()[0][0], rat(1, 5));
        assert_eq!(alg.phibar(0), &[Scalar::one()]);
        alg.verify().unwrap();
    }

    #[test]
    fn sign_action() {
        let (g, a) = cyclic(&[2], vec![vec![1]], &[1]);
        let alg = local_cr_algebra(&g, &a).unwrap();
        assert_eq!(alg.product_bar(1, 1, 0), &int(1));
        assert_eq!(alg.gram_bar()[1][1], rat(1, 2));
        alg.verify().unwrap();
    }

    #[test]
    fn diagonal_z3() {
        let (g, a) = cyclic(&[3], vec![vec![1]; 3], &[1, 2, 3]);
        let alg = local_cr_algebra(&g, &a).unwrap();
        for mu in 0..3 {
            assert_eq!(alg.nu(mu), &rat(1, 9));
        }
        assert_eq!(alg.age(1), &int(1));
        alg.verify().unwrap();
    }

    #[test]
    fn two_points_opposite_weights() {
        let (g1, a1) = cyclic(&[], vec![vec![]], &[1]);
        let (g2, a2) = cyclic(&[], vec![vec![]], &[-1]);
        let t = GKMTarget::new(vec![LocalModel::new(g1, a1), LocalModel::new(g2, a2)]).unwrap();
        let alg = gkm_assemble(&t).unwrap();
        assert_eq!(alg.rank(), 2);
        let gram = alg.gram(Basis::SectorBar);
        assert_eq!(gram[0][0], Scalar::one());
        assert_eq!(gram[1][1], Scalar::from_int(-1));
        assert!(gram[0][1].is_zero());
        alg.verify().unwrap();
    }

    #[test]
    fn class_count_assembly() {
        let (g1, a1) = cyclic(&[3], vec![vec![1]], &[1]);
        let (g2, a2) = cyclic(&[], vec![vec![]], &[2]);
        let (g3, a3) = cyclic(&[2], vec![vec![1]], &[3]);
        let t = GKMTarget::new(vec![
            LocalModel::new(g1, a1),
            LocalModel::new(g2, a2),
            LocalModel::new(g3, a3),
        ])
        .unwrap();
        assert_eq!(gkm_assemble(&t).unwrap().rank(), 6);
    }

    #[test]
    fn involution_on_sectors() {
        let (g, a) = cyclic(&[3], vec![vec![1]], &[1]);
        let t = GKMTarget::single(g, a);
        let s = |c| SectorLabel {
            fixed_point: 0,
            class: c,
        };
        assert_eq!(t.involution(s(0)), s(0));
        assert_eq!(t.involution(s(1)), s(2));
    }

    #[test]
    fn target_json() {
        let j = r#"{"dimension": 3, "fixed_points": [
            {"group": {"cyclic": [3]}, "action_chars": [[1],[1],[1]], "weights": ["1", 2, "3/1"]}
        ]}"#;
        let t = GKMTarget::from_json(j, None).unwrap();
        assert_eq!(t.dimension, 3);
        let bad = j.replace("\"1\", 2", "\"0\", 2");
        assert!(GKMTarget::from_json(&bad, None).is_err());
    }
}
