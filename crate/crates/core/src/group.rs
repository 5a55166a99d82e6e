//! Finite isotropy groups: classes, characters, class-algebra constants and
//! the sector data (`c`-values, ages) of a linear action.

use std::path::Path;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::{int, rat, Rational, Scalar, ScalarContext};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassInfo {
    pub label: String,
    pub size: u64,
    pub centralizer: u64,
    pub inverse: usize,
}

#[derive(Clone, Debug)]
pub struct GroupData {
    order: u64,
    factors: Option<Vec<u32>>,
    /// Element tuples of the built-in abelian group, one per class.
    elements: Vec<Vec<u32>>,
    classes: Vec<ClassInfo>,
    char_labels: Vec<String>,
    /// `characters[α][class]`
    characters: Vec<Vec<Scalar>>,
    /// `constants[a][b][c]`: number of ways an element of class `c` is a
    /// product of an element of class `a` and one of class `b`.
    constants: Vec<Vec<Vec<Rational>>>,
}

fn tuples(factors: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &n in factors {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

fn tuple_label(t: &[u32]) -> String {
    t.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// `∏_j ζ_{n_j}^{m_j e_j}` as the fraction `Σ m_j e_j / n_j mod 1`.
fn abelian_phase(factors: &[u32], m: &[u32], e: &[u32]) -> Rational {
    let mut c = Rational::zero();
    for ((&n, &mj), &ej) in factors.iter().zip(m).zip(e) {
        c += rat((mj as i64 * ej as i64) % n as i64, n as i64);
    }
    c.clone() - c.floor()
}

fn phase_to_scalar(c: &Rational) -> Scalar {
    let n: i64 = c.denom().try_into().expect("root of unity order");
    let k: i64 = c.numer().try_into().expect("root of unity exponent");
    Scalar::root_of_unity(n as u32, k)
}

impl GroupData {
    /// `Z_{n_1} × ⋯ × Z_{n_k}`; the empty list is the trivial group.
    pub fn abelian(factors: &[u32]) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::Config("cyclic factor of order 0".into()));
        }
        let elements = tuples(factors);
        let order = elements.len() as u64;
        let index = |t: &[u32]| elements.iter().position(|e| e == t).expect("element");
        let classes = elements
            .iter()
            .map(|e| {
                let inv: Vec<u32> = e.iter().zip(factors).map(|(&x, &n)| (n - x) % n).collect();
                ClassInfo {
                    label: tuple_label(e),
                    size: 1,
                    centralizer: order,
                    inverse: index(&inv),
                }
            })
            .collect::<Vec<_>>();
        let characters = elements
            .iter()
            .map(|m| {
                elements
                    .iter()
                    .map(|e| phase_to_scalar(&abelian_phase(factors, m, e)))
                    .collect()
            })
            .collect();
        let char_labels = elements
            .iter()
            .map(|m| format!("chi[{}]", tuple_label(m)))
            .collect();
        let n = elements.len();
        let mut constants = vec![vec![vec![Rational::zero(); n]; n]; n];
        for (a, ea) in elements.iter().enumerate() {
            for (b, eb) in elements.iter().enumerate() {
                let prod: Vec<u32> = ea
                    .iter()
                    .zip(eb)
                    .zip(factors)
                    .map(|((&x, &y), &n)| (x + y) % n)
                    .collect();
                constants[a][b][index(&prod)] = Rational::one();
            }
        }
        let g = GroupData {
            order,
            factors: Some(factors.to_vec()),
            elements,
            classes,
            char_labels,
            characters,
            constants,
        };
        g.check_orthogonality()?;
        Ok(g)
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_json(&text)
    }

    /// Ingest a character table.  The identity class must come first; in
    /// character literals `zeta` means `ζ_{|G|}`.
    pub fn from_table_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        let order = file.order;
        if order == 0 {
            return Err(Error::CharacterTable("group order 0".into()));
        }
        let k = file.classes.len();
        if k == 0 {
            return Err(Error::CharacterTable("no classes".into()));
        }
        let ctx = ScalarContext::new(order as u32, &file.radicands)?;
        let labels: Vec<String> = file.classes.iter().map(|c| c.label.clone()).collect();
        let mut classes = Vec::with_capacity(k);
        for c in &file.classes {
            let inverse = match &c.inverse {
                InverseRef::Index(i) => *i,
                InverseRef::Label(l) => labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| Error::CharacterTable(format!("unknown inverse class `{l}`")))?,
            };
            if inverse >= k {
                return Err(Error::CharacterTable(format!(
                    "inverse index {inverse} out of range"
                )));
            }
            classes.push(ClassInfo {
                label: c.label.clone(),
                size: c.size,
                centralizer: c.centralizer,
                inverse,
            });
        }
        if file.characters.len() != k {
            return Err(Error::CharacterTable(format!(
                "{} characters for {k} classes",
                file.characters.len()
            )));
        }
        let mut characters = Vec::with_capacity(k);
        for (a, row) in file.characters.iter().enumerate() {
            if row.len() != k {
                return Err(Error::CharacterTable(format!(
                    "character {a} has {} values for {k} classes",
                    row.len()
                )));
            }
            let vals = row
                .iter()
                .map(|s| ctx.parse(s))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::CharacterTable(format!("character {a}: {e}")))?;
            characters.push(vals);
        }
        let char_labels = match file.character_labels {
            Some(l) if l.len() == k => l,
            Some(_) => {
                return Err(Error::CharacterTable(
                    "character_labels length mismatch".into(),
                ))
            }
            None => (0..k).map(|a| format!("chi{a}")).collect(),
        };
        let mut g = GroupData {
            order,
            factors: None,
            elements: Vec::new(),
            classes,
            char_labels,
            characters,
            constants: Vec::new(),
        };
        g.validate_table()?;
        g.constants = g.constants_from_characters()?;
        Ok(g)
    }

    fn validate_table(&self) -> Result<()> {
        let bad = |m: String| Err(Error::CharacterTable(m));
        let sizes: u64 = self.classes.iter().map(|c| c.size).sum();
        if sizes != self.order {
            return bad(format!(
                "class sizes sum to {sizes}, group order {}",
                self.order
            ));
        }
        for c in &self.classes {
            if c.size * c.centralizer != self.order {
                return bad(format!("class `{}`: size × centralizer ≠ |G|", c.label));
            }
        }
        if self.classes[0].size != 1 {
            return bad("the first class must be the identity".into());
        }
        for (i, c) in self.classes.iter().enumerate() {
            if self.classes[c.inverse].inverse != i {
                return bad("inverse map is not an involution".into());
            }
            if self.classes[c.inverse].size != c.size {
                return bad(format!(
                    "class `{}` and its inverse differ in size",
                    c.label
                ));
            }
        }
        if self.classes[0].inverse != 0 {
            return bad("the identity class must be self-inverse".into());
        }
        for (a, row) in self.characters.iter().enumerate() {
            match row[0].to_rational() {
                Some(d) if d.is_integer() && d > Rational::zero() => {}
                _ => return bad(format!("character {a} has a non-positive-integer degree")),
            }
            for (i, c) in self.classes.iter().enumerate() {
                if row[c.inverse] != row[i].conj() {
                    return bad(format!(
                        "character {a} is not conjugated by the inverse map at `{}`",
                        c.label
                    ));
                }
            }
        }
        self.check_orthogonality()
    }

    /// Both orthogonality relations, exactly.
    pub fn check_orthogonality(&self) -> Result<()> {
        let k = self.classes.len();
        if self.characters.len() != k {
            return Err(Error::CharacterTable(
                "number of characters differs from number of classes".into(),
            ));
        }
        let g = Scalar::from_int(self.order as i64);
        for a in 0..k {
            for b in 0..k {
                let s: Scalar = (0..k)
                    .map(|h| {
                        (&self.characters[a][h] * &self.characters[b][h].conj())
                            .scale(&int(self.classes[h].size as i64))
                    })
                    .sum();
                let expect = if a == b { g.clone() } else { Scalar::zero() };
                if s != expect {
                    return Err(Error::CharacterTable(format!(
                        "row orthogonality fails for characters {a}, {b}"
                    )));
                }
            }
        }
        for x in 0..k {
            for y in 0..k {
                let s: Scalar = (0..k)
                    .map(|a| &self.characters[a][x] * &self.characters[a][y].conj())
                    .sum();
                let expect = if x == y {
                    Scalar::from_int(self.classes[x].centralizer as i64)
                } else {
                    Scalar::zero()
                };
                if s != expect {
                    return Err(Error::CharacterTable(format!(
                        "column orthogonality fails for classes `{}`, `{}`",
                        self.classes[x].label, self.classes[y].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// `N_{ab}^c = (|a||b|/|G|) Σ_χ χ(a)χ(b)conj(χ(c))/χ(1)`.
    fn constants_from_characters(&self) -> Result<Vec<Vec<Vec<Rational>>>> {
        let k = self.classes.len();
        let mut out = vec![vec![vec![Rational::zero(); k]; k]; k];
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let mut s = Scalar::zero();
                    for chi in &self.characters {
                        let t = &(&chi[a] * &chi[b]) * &chi[c].conj();
                        s += &(&t / &chi[0]);
                    }
                    let f = rat(
                        (self.classes[a].size * self.classes[b].size) as i64,
                        self.order as i64,
                    );
                    let v = s.scale(&f).to_rational().ok_or_else(|| {
                        Error::CharacterTable("class-algebra constant is not rational".into())
                    })?;
                    if !v.is_integer() || v < Rational::zero() {
                        return Err(Error::CharacterTable(format!(
                            "class-algebra constant ({a},{b},{c}) = {v} is not a count"
                        )));
                    }
                    out[a][b][c] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_abelian_builtin(&self) -> bool {
        self.factors.is_some()
    }

    pub fn factors(&self) -> Option<&[u32]> {
        self.factors.as_deref()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &ClassInfo {
        &self.classes[i]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.classes[i].inverse
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.label == label)
    }

    /// Element tuple of a class of a built-in abelian group.
    pub fn element(&self, i: usize) -> Option<&[u32]> {
        self.elements.get(i).map(Vec::as_slice)
    }

    pub fn characters(&self) -> &[Vec<Scalar>] {
        &self.characters
    }

    pub fn character_label(&self, a: usize) -> &str {
        &self.char_labels[a]
    }

    pub fn character(&self, a: usize, class: usize) -> &Scalar {
        &self.characters[a][class]
    }

    /// `dim V_α = χ_α(1)`.
    pub fn dim(&self, a: usize) -> u64 {
        let d = self.characters[a][0]
            .to_rational()
            .expect("validated degree");
        d.to_integer().try_into().expect("character degree")
    }

    pub fn class_constant(&self, a: usize, b: usize, c: usize) -> &Rational {
        &self.constants[a][b][c]
    }

    /// The least common multiple of the orders of all character values.
    pub fn cyclotomic_order(&self) -> u32 {
        let mut l = 1u32;
        for row in &self.characters {
            for v in row {
                l = l.lcm(&v.canonical().order());
            }
        }
        l
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    order: u64,
    classes: Vec<TableClass>,
    characters: Vec<Vec<String>>,
    #[serde(default)]
    character_labels: Option<Vec<String>>,
    #[serde(default)]
    radicands: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableClass {
    label: String,
    size: u64,
    centralizer: u64,
    inverse: InverseRef,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InverseRef {
    Index(usize),
    Label(String),
}

/// How a coordinate axis transforms: an exponent vector over the cyclic
/// factors of a built-in abelian group, or the index of a linear character of
/// an ingested table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxisChar {
    Exponents(Vec<u32>),
    Character(usize),
}

/// `r` one-dimensional characters with nonzero weights.
#[derive(Clone, Debug)]
pub struct SectorAction {
    axes: Vec<AxisChar>,
    weights: Vec<Rational>,
    /// `c[class][axis] ∈ [0, 1)`
    c: Vec<Vec<Rational>>,
}

impl SectorAction {
    pub fn new(group: &GroupData, axes: Vec<AxisChar>, weights: Vec<Rational>) -> Result<Self> {
        if axes.len() != weights.len() {
            return Err(Error::Target(format!(
                "{} axis characters but {} weights",
                axes.len(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(Zero::is_zero) {
            return Err(Error::Target(format!("weight {i} is zero")));
        }
        let k = group.num_classes();
        let mut c = vec![Vec::with_capacity(axes.len()); k];
        for (i, ax) in axes.iter().enumerate() {
            match (ax, group.factors()) {
                (AxisChar::Exponents(m), Some(f)) => {
                    if m.len() != f.len() {
                        return Err(Error::Target(format!(
                            "axis {i}: {} exponents for {} cyclic factors",
                            m.len(),
                            f.len()
                        )));
                    }
                    for (h, row) in c.iter_mut().enumerate() {
                        row.push(abelian_phase(f, m, group.element(h).expect("element")));
                    }
                }
                (AxisChar::Character(a), _) => {
                    if *a >= group.characters.len() {
                        return Err(Error::Target(format!("axis {i}: no character {a}")));
                    }
                    if group.dim(*a) != 1 {
                        return Err(Error::Target(format!(
                            "axis {i}: character {a} is not one-dimensional"
                        )));
                    }
                    for (h, row) in c.iter_mut().enumerate() {
                        let (n, e) =
                            group.characters[*a][h].as_root_of_unity().ok_or_else(|| {
                                Error::Target(format!(
                                    "axis {i}: character value is not a root of unity"
                                ))
                            })?;
                        row.push(rat(e as i64, n as i64));
                    }
                }
                (AxisChar::Exponents(_), None) => {
                    return Err(Error::Target(format!(
                        "axis {i}: exponent vectors need a built-in cyclic group; \
                         name a character index for tables"
                    )))
                }
            }
        }
        Ok(SectorAction { axes, weights, c })
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn axes(&self) -> &[AxisChar] {
        &self.axes
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight_product(&self) -> Rational {
        self.weights.iter().fold(Rational::one(), |a, w| a * w)
    }

    /// The `c ∈ [0,1)` with `χ_i(h) = e^{2πic}`.
    pub fn c_value(&self, class: usize, axis: usize) -> &Rational {
        &self.c[class][axis]
    }

    pub fn c_values(&self, class: usize) -> &[Rational] {
        &self.c[class]
    }

    pub fn age(&self, class: usize) -> Rational {
        self.c[class].iter().fold(Rational::zero(), |a, c| a + c)
    }

    /// `χ_i(h)` as a scalar.
    pub fn axis_value(&self, class: usize, axis: usize) -> Scalar {
        phase_to_scalar(&self.c[class][axis])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_three() {
        let g = GroupData::abelian(&[3]).unwrap();
        assert_eq!(g.num_classes(), 3);
        assert!(g
            .classes()
            .iter()
            .all(|c| c.size == 1 && c.centralizer == 3));
        assert_eq!(g.inverse(1), 2);
        assert_eq!(g.inverse(0), 0);
        assert_eq!(g.character(1, 1), &Scalar::root_of_unity(3, 1));
    }

    #[test]
    fn trivial_and_klein() {
        assert_eq!(GroupData::abelian(&[]).unwrap().num_classes(), 1);
        assert_eq!(GroupData::abelian(&[2, 2]).unwrap().num_classes(), 4);
    }

    #[test]
    fn c_values_and_ages() {
        let g = GroupData::abelian(&[3]).unwrap();
        let act = SectorAction::new(
            &g,
            vec![AxisChar::Exponents(vec![1]); 3],
            vec![int(1), int(2), int(3)],
        )
        .unwrap();
        assert_eq!(act.c_value(1, 0), &rat(1, 3));
        assert_eq!(act.c_value(0, 2), &int(0));
        assert_eq!(act.age(1), int(1));
        assert_eq!(act.age(2), int(2));
    }

    #[test]
    fn sign_character() {
        let g = GroupData::abelian(&[2]).unwrap();
        let act = SectorAction::new(&g, vec![AxisChar::Exponents(vec![1])], vec![int(1)]).unwrap();
        assert_eq!(act.c_value(1, 0), &rat(1, 2));
    }

    #[test]
    fn zero_weight_rejected() {
        let g = GroupData::abelian(&[2]).unwrap();
        assert!(SectorAction::new(&g, vec![AxisChar::Exponents(vec![1])], vec![int(0)]).is_err());
    }

    const KLEIN: &str = r#"{
        "order": 4,
        "classes": [
            {"label": "e", "size": 1, "centralizer": 4, "inverse": "e"},
            {"label": "a", "size": 1, "centralizer": 4, "inverse": "a"},
            {"label": "b", "size": 1, "centralizer": 4, "inverse": 2},
            {"label": "ab", "size": 1, "centralizer": 4, "inverse": 3}
        ],
        "characters": [
            ["1", "1", "1", "1"],
            ["1", "-1", "1", "-1"],
            ["1", "1", "-1", "-1"],
            ["1", "-1", "-1", "1"]
        ]
    }"#;

    #[test]
    fn ingested_table() {
        let g = GroupData::from_table_json(KLEIN).unwrap();
        assert_eq!(g.class_constant(1, 2, 3), &int(1));
        assert_eq!(g.class_constant(1, 1, 0), &int(1));
        assert_eq!(g.class_constant(1, 1, 1), &int(0));
        let act = SectorAction::new(
            &g,
            vec![AxisChar::Character(1), AxisChar::Character(2)],
            vec![int(1), int(2)],
        )
        .unwrap();
        assert_eq!(act.c_value(1, 0), &rat(1, 2));
        assert_eq!(act.c_value(1, 1), &int(0));
        assert_eq!(act.age(3), int(1));
    }

    #[test]
    fn broken_table_rejected() {
        let bad = KLEIN.replace(r#"["1", "-1", "-1", "1"]"#, r#"["1", "-1", "1", "1"]"#);
        let err = GroupData::from_table_json(&bad).unwrap_err();
        assert!(err.to_string().contains("inconsistent character table"));
    }

    #[test]
    fn nonabelian_s3() {
        let s3 = r#"{
            "order": 6,
            "classes": [
                {"label": "1", "size": 1, "centralizer": 6, "inverse": 0},
                {"label": "(12)", "size": 3, "centralizer": 2, "inverse": 1},
                {"label": "(123)", "size": 2, "centralizer": 3, "inverse": 2}
            ],
            "characters": [["1","1","1"], ["1","-1","1"], ["2","0","-1"]]
        }"#;
        let g = GroupData::from_table_json(s3).unwrap();
        // transpositions square into the identity class three ways
        assert_eq!(g.class_constant(1, 1, 0), &int(3));
        assert_eq!(g.class_constant(1, 1, 2), &int(3));
        assert_eq!(g.class_constant(2, 2, 2), &int(1));
        assert_eq!(g.class_constant(2, 2, 0), &int(2));
    }
}
