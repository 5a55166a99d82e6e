//! Ancestor and descendent potentials as tables of correlators.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frobenius::FrobeniusData;
use crate::rmatrix::{s_plus_transform, RMatrix, SOperator};
use crate::scalar::ScalarContext;
use crate::series::{TSeries, EXACT};

use super::enumerate::{enumerate_stable_graphs, StableGraph};
use super::weights::{required_order, LeafInput, WeightContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Ancestor,
    Descendent,
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Evaluate and sum graphs in a seeded random order.
    pub shuffle_seed: Option<u64>,
    /// Assign the insertions of each key to leaves in this order.
    pub leaf_permutation: Option<Vec<usize>>,
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("GKM_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

/// Graph sum set up for one `(g, k)` on fixed data.
pub struct GraphSum<'a> {
    genus: u32,
    k: usize,
    graphs: Vec<StableGraph>,
    ctx: WeightContext<'a>,
    s: Option<SOperator>,
}

impl<'a> GraphSum<'a> {
    pub fn new(genus: u32, k: usize, data: &'a FrobeniusData, r: &'a RMatrix) -> Result<Self> {
        let graphs = enumerate_stable_graphs(genus, k, data.rank())?;
        let need = required_order(&graphs);
        if r.order() < need {
            return Err(Error::ZOrderTooLow {
                have: r.order(),
                need,
            });
        }
        let max_power = graphs
            .iter()
            .flat_map(|g| {
                (0..g.vertices.len()).map(move |v| {
                    (2 * g.vertices[v].genus as usize + g.valence(v)).saturating_sub(2)
                })
            })
            .max()
            .unwrap_or(0);
        let ctx = WeightContext::new(data, r, max_power)?;
        let s = match data.s_operator() {
            Some(s) => Some(s.clone()),
            None if data.nvars() == 0 => Some(SOperator::identity()),
            None => None,
        };
        Ok(GraphSum {
            genus,
            k,
            graphs,
            ctx,
            s,
        })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn graphs(&self) -> &[StableGraph] {
        &self.graphs
    }

    pub fn context(&self) -> &WeightContext<'a> {
        &self.ctx
    }

    /// `Σ_Γ w(Γ)/|Aut Γ|` with leaf `l` carrying `inputs[l]`.
    pub fn evaluate(
        &self,
        inputs: &[LeafInput],
        mode: Mode,
        opts: &EvalOptions,
    ) -> Result<TSeries> {
        if inputs.len() != self.k {
            return Err(Error::Config(format!(
                "{} insertions for k = {}",
                inputs.len(),
                self.k
            )));
        }
        let transformed;
        let inputs = match mode {
            Mode::Ancestor => inputs,
            Mode::Descendent => {
                let s = self.s.as_ref().ok_or(Error::MissingSOperator)?;
                transformed = inputs
                    .iter()
                    .map(|x| s_plus_transform(s, x))
                    .collect::<Vec<_>>();
                &transformed[..]
            }
        };
        let mut order: Vec<usize> = (0..self.graphs.len()).collect();
        if let Some(seed) = opts.shuffle_seed {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let parts: Vec<Result<TSeries>> = pool().install(|| {
            order
                .par_iter()
                .map(|&i| self.ctx.graph(&self.graphs[i], inputs))
                .collect()
        });
        let mut total = TSeries::zero(0, EXACT);
        for p in parts {
            total += &p?;
        }
        Ok(total)
    }
}

/// Insertion `φ̃_μ z^b`.
pub fn basis_input(rank: usize, mu: usize, b: u32) -> LeafInput {
    let mut v = vec![vec![TSeries::zero(0, EXACT); rank]; b as usize + 1];
    v[b as usize][mu] = TSeries::one(0);
    v
}

/// Insertion key: `(μ, b)` per leaf, sorted.
pub type Key = Vec<(usize, u32)>;

fn keys(rank: usize, k: usize, max_height: u32) -> Vec<Key> {
    let items: Vec<(usize, u32)> = (0..=max_height)
        .flat_map(|b| (0..rank).map(move |mu| (mu, b)))
        .collect();
    let mut items = items;
    items.sort_unstable();
    fn go(items: &[(usize, u32)], k: usize, start: usize, cur: &mut Key, out: &mut Vec<Key>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&items, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Correlators `⟨τ_{b_1}φ̃_{μ_1} ⋯ τ_{b_k}φ̃_{μ_k}⟩_g` (ancestor or descendent),
/// as series in the coordinate and Novikov variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTable {
    pub genus: u32,
    pub k: usize,
    pub max_height: u32,
    pub mode: Mode,
    pub variables: Vec<String>,
    pub entries: BTreeMap<Key, TSeries>,
}

pub fn potential(
    genus: u32,
    k: usize,
    data: &FrobeniusData,
    r: &RMatrix,
    max_height: u32,
    mode: Mode,
    opts: &EvalOptions,
) -> Result<PotentialTable> {
    let sum = GraphSum::new(genus, k, data, r)?;
    let n = data.rank();
    let perm: Vec<usize> = match &opts.leaf_permutation {
        Some(p) => {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted != (0..k).collect::<Vec<_>>() {
                return Err(Error::Config(format!(
                    "{p:?} is not a permutation of {k} leaves"
                )));
            }
            p.clone()
        }
        None => (0..k).collect(),
    };
    let mut entries = BTreeMap::new();
    for key in keys(n, k, max_height) {
        let inputs: Vec<LeafInput> = perm
            .iter()
            .map(|&l| basis_input(n, key[l].0, key[l].1))
            .collect();
        let v = sum.evaluate(&inputs, mode, opts)?;
        entries.insert(key, v);
    }
    Ok(PotentialTable {
        genus,
        k,
        max_height,
        mode,
        variables: data.var_names().to_vec(),
        entries,
    })
}

pub fn ancestor_potential(
    genus: u32,
    k: usize,
    data: &FrobeniusData,
    r: &RMatrix,
    max_height: u32,
    opts: &EvalOptions,
) -> Result<PotentialTable> {
    potential(genus, k, data, r, max_height, Mode::Ancestor, opts)
}

pub fn descendent_potential(
    genus: u32,
    k: usize,
    data: &FrobeniusData,
    r: &RMatrix,
    max_height: u32,
    opts: &EvalOptions,
) -> Result<PotentialTable> {
    potential(genus, k, data, r, max_height, Mode::Descendent, opts)
}

fn series_json(s: &TSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(m, c)| json!({"exponents": m, "value": c.to_string()}))
        .collect();
    let prec = if s.prec() == EXACT {
        Value::Null
    } else {
        json!(s.prec())
    };
    json!({"precision": prec, "terms": terms})
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Ancestor => "ancestor",
        Mode::Descendent => "descendent",
    }
}

impl PotentialTable {
    pub fn get(&self, key: &[(usize, u32)]) -> Option<&TSeries> {
        let mut k = key.to_vec();
        k.sort_unstable();
        self.entries.get(&k)
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(k, v)| {
                let ins: Vec<Value> = k.iter().map(|&(mu, b)| json!([mu, b])).collect();
                json!({"insertions": ins, "series": series_json(v)})
            })
            .collect();
        let v = json!({
            "genus": self.genus,
            "k": self.k,
            "max_height": self.max_height,
            "mode": mode_name(self.mode),
            "variables": self.variables,
            "entries": entries,
        });
        serde_json::to_string_pretty(&v).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |what: &str| Error::Config(format!("potential table: bad or missing `{what}`"));
        let genus = v["genus"].as_u64().ok_or_else(|| bad("genus"))? as u32;
        let k = v["k"].as_u64().ok_or_else(|| bad("k"))? as usize;
        let max_height = v["max_height"].as_u64().ok_or_else(|| bad("max_height"))? as u32;
        let mode = match v["mode"].as_str() {
            Some("ancestor") => Mode::Ancestor,
            Some("descendent") => Mode::Descendent,
            _ => return Err(bad("mode")),
        };
        let variables: Vec<String> = serde_json::from_value(v["variables"].clone())?;
        let nvars = variables.len();
        let ctx = ScalarContext::new(1, &[])?;
        let mut entries = BTreeMap::new();
        for e in v["entries"].as_array().ok_or_else(|| bad("entries"))? {
            let key: Key = serde_json::from_value(e["insertions"].clone())?;
            let s = &e["series"];
            let prec = match &s["precision"] {
                Value::Null => EXACT,
                p => p.as_i64().ok_or_else(|| bad("precision"))? as i32,
            };
            let mut t = TSeries::zero(nvars, prec);
            for term in s["terms"].as_array().ok_or_else(|| bad("terms"))? {
                let m: Vec<u8> = serde_json::from_value(term["exponents"].clone())?;
                if m.len() != nvars {
                    return Err(bad("exponents"));
                }
                let c = ctx.parse(term["value"].as_str().ok_or_else(|| bad("value"))?)?;
                t.add_term(m, &c);
            }
            entries.insert(key, t);
        }
        Ok(PotentialTable {
            genus,
            k,
            max_height,
            mode,
            variables,
            entries,
        })
    }

    /// One row per term: `insertions,exponents,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("insertions,exponents,value,precision\n");
        for (k, v) in &self.entries {
            let ins: Vec<String> = k.iter().map(|(mu, b)| format!("{mu}:{b}")).collect();
            let prec = if v.prec() == EXACT {
                "exact".to_string()
            } else {
                v.prec().to_string()
            };
            for (m, c) in v.terms() {
                let ex: Vec<String> = m.iter().map(u8::to_string).collect();
                let _ = writeln!(out, "{},{},\"{}\",{}", ins.join(";"), ex.join(";"), c, prec);
            }
        }
        out
    }

    pub fn to_pretty(&self, names: &dyn Fn(usize) -> String) -> String {
        let mut out = format!(
            "{} potential, g = {}, k = {}\n",
            mode_name(self.mode),
            self.genus,
            self.k
        );
        for (k, v) in &self.entries {
            let ins: Vec<String> = k
                .iter()
                .map(|&(mu, b)| format!("tau_{b}({})", names(mu)))
                .collect();
            let _ = writeln!(
                out,
                "<{}> = {}",
                ins.join(" "),
                v.display_with(&self.variables)
            );
        }
        out
    }
}
