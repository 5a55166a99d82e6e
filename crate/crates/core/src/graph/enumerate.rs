//! Stable labeled graphs: enumeration up to isomorphism and automorphisms.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub genus: u32,
    /// canonical index `i(v)`
    pub marking: usize,
}

/// Two half-edges `(vertex, height)`, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub ends: [(usize, u32); 2],
}

impl Edge {
    pub fn new(a: (usize, u32), b: (usize, u32)) -> Self {
        Edge {
            ends: if a <= b { [a, b] } else { [b, a] },
        }
    }

    pub fn is_loop(&self) -> bool {
        self.ends[0].0 == self.ends[1].0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    pub vertex: usize,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// ordinary leaves; leaf `l` carries insertion `l`
    pub leaves: Vec<Leaf>,
    pub dilatons: Vec<Leaf>,
    aut: u64,
}

type Canon = (Vec<(u32, usize, Vec<(usize, u32)>, Vec<u32>)>, Vec<Edge>);

impl StableGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        leaves: Vec<Leaf>,
        dilatons: Vec<Leaf>,
    ) -> Self {
        let mut g = StableGraph {
            vertices,
            edges,
            leaves,
            dilatons,
            aut: 1,
        };
        g.aut = g.compute_automorphisms();
        g
    }

    /// `Σ_v (g(v) − 1) + |E| + 1`
    pub fn genus(&self) -> u32 {
        let s: i64 = self.vertices.iter().map(|v| v.genus as i64 - 1).sum();
        (s + self.edges.len() as i64 + 1) as u32
    }

    pub fn valence(&self, v: usize) -> usize {
        let e: usize = self
            .edges
            .iter()
            .map(|e| e.ends.iter().filter(|h| h.0 == v).count())
            .sum();
        e + self.leaves.iter().filter(|l| l.vertex == v).count()
            + self.dilatons.iter().filter(|l| l.vertex == v).count()
    }

    /// Heights of all half-edges and leaves at `v`.
    pub fn heights_at(&self, v: usize) -> Vec<u32> {
        let mut h = Vec::new();
        for e in &self.edges {
            for end in &e.ends {
                if end.0 == v {
                    h.push(end.1);
                }
            }
        }
        h.extend(
            self.leaves
                .iter()
                .filter(|l| l.vertex == v)
                .map(|l| l.height),
        );
        h.extend(
            self.dilatons
                .iter()
                .filter(|l| l.vertex == v)
                .map(|l| l.height),
        );
        h
    }

    pub fn is_stable(&self) -> bool {
        (0..self.vertices.len())
            .all(|v| 2 * self.vertices[v].genus as i64 - 2 + self.valence(v) as i64 > 0)
    }

    /// Heights at every vertex add up to `3g(v) − 3 + val(v)`.
    pub fn dimensions_match(&self) -> bool {
        (0..self.vertices.len()).all(|v| {
            let s: i64 = self.heights_at(v).iter().map(|&a| a as i64).sum();
            s == 3 * self.vertices[v].genus as i64 - 3 + self.valence(v) as i64
        })
    }

    pub fn automorphism_order(&self) -> u64 {
        self.aut
    }

    fn canon_under(&self, perm: &[usize]) -> Canon {
        let n = self.vertices.len();
        let mut verts = vec![(0, 0, Vec::new(), Vec::new()); n];
        for (v, vx) in self.vertices.iter().enumerate() {
            let mut leaves: Vec<(usize, u32)> = self
                .leaves
                .iter()
                .enumerate()
                .filter(|(_, l)| l.vertex == v)
                .map(|(i, l)| (i, l.height))
                .collect();
            leaves.sort_unstable();
            let mut dil: Vec<u32> = self
                .dilatons
                .iter()
                .filter(|l| l.vertex == v)
                .map(|l| l.height)
                .collect();
            dil.sort_unstable();
            verts[perm[v]] = (vx.genus, vx.marking, leaves, dil);
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| {
                Edge::new(
                    (perm[e.ends[0].0], e.ends[0].1),
                    (perm[e.ends[1].0], e.ends[1].1),
                )
            })
            .collect();
        edges.sort_unstable();
        (verts, edges)
    }

    fn canonical(&self) -> Canon {
        let mut best: Option<Canon> = None;
        for_each_permutation(self.vertices.len(), |p| {
            let c = self.canon_under(p);
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        });
        best.expect("at least one vertex")
    }

    fn compute_automorphisms(&self) -> u64 {
        let id: Vec<usize> = (0..self.vertices.len()).collect();
        let own = self.canon_under(&id);
        let mut vertex_perms = 0u64;
        for_each_permutation(self.vertices.len(), |p| {
            if self.canon_under(p) == own {
                vertex_perms += 1;
            }
        });
        let mut aut = vertex_perms;
        // identical parallel edges, flippable loops, identical dilaton leaves
        let mut counts: BTreeMap<Edge, u64> = BTreeMap::new();
        for e in &self.edges {
            *counts.entry(*e).or_default() += 1;
            if e.is_loop() && e.ends[0].1 == e.ends[1].1 {
                aut *= 2;
            }
        }
        let mut dil: BTreeMap<Leaf, u64> = BTreeMap::new();
        for d in &self.dilatons {
            *dil.entry(*d).or_default() += 1;
        }
        for m in counts.values().chain(dil.values()) {
            aut *= factorial(*m);
        }
        aut
    }

    /// Relabel vertices into canonical order.
    fn canonicalized(&self) -> StableGraph {
        let (verts, edges) = self.canonical();
        let mut vertices = Vec::with_capacity(verts.len());
        let mut leaves = vec![
            Leaf {
                vertex: 0,
                height: 0
            };
            self.leaves.len()
        ];
        let mut dilatons = Vec::new();
        for (v, (genus, marking, ls, ds)) in verts.into_iter().enumerate() {
            vertices.push(Vertex { genus, marking });
            for (i, h) in ls {
                leaves[i] = Leaf {
                    vertex: v,
                    height: h,
                };
            }
            dilatons.extend(ds.into_iter().map(|h| Leaf {
                vertex: v,
                height: h,
            }));
        }
        StableGraph {
            vertices,
            edges,
            leaves,
            dilatons,
            aut: self.aut,
        }
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Heap's algorithm over permutations of `0..n` (as "old index → new index").
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Undecorated shape: genera, leaf placement, dilaton counts, edge multiset.
#[derive(Clone, Debug)]
struct Shape {
    genera: Vec<u32>,
    leaf_at: Vec<usize>,
    dil: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

type ShapeCanon = (Vec<(u32, Vec<usize>, usize)>, Vec<(usize, usize)>);

impl Shape {
    fn canon_under(&self, perm: &[usize]) -> ShapeCanon {
        let n = self.genera.len();
        let mut verts = vec![(0, Vec::new(), 0); n];
        for v in 0..n {
            let leaves: Vec<usize> = (0..self.leaf_at.len())
                .filter(|&l| self.leaf_at[l] == v)
                .collect();
            verts[perm[v]] = (self.genera[v], leaves, self.dil[v]);
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        (verts, edges)
    }

    fn canonical(&self) -> ShapeCanon {
        let mut best: Option<ShapeCanon> = None;
        for_each_permutation(self.genera.len(), |p| {
            let c = self.canon_under(p);
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        });
        best.expect("at least one vertex")
    }

    fn valence(&self, v: usize) -> usize {
        let e: usize = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum();
        e + self.leaf_at.iter().filter(|&&x| x == v).count() + self.dil[v]
    }

    fn dim(&self, v: usize) -> i64 {
        3 * self.genera[v] as i64 - 3 + self.valence(v) as i64
    }
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// All vectors in `0..=max` of length `n` summing to at most `total`.
fn bounded_vectors(n: usize, max: &[u32], total: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() == n {
        out.push(cur.clone());
        return;
    }
    let used: u32 = cur.iter().sum();
    let cap = max[cur.len()].min(total - used);
    for x in 0..=cap {
        cur.push(x);
        bounded_vectors(n, max, total, out, cur);
        cur.pop();
    }
}

/// Multisets of size `k` from `0..m`, as nondecreasing sequences.
fn multisets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..m {
            cur.push(x);
            go(m, k, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, k, 0, &mut Vec::new(), &mut out);
    out
}

fn shapes(g: u32, k: usize) -> Vec<Shape> {
    let max_dil = (3 * g as i64 - 3 + k as i64).max(0) as usize;
    // a dilaton takes height ≥ 2 but adds only 1 to the dimension, so every
    // vertex is already stable without its dilatons: Σ(2g_v − 2 + n_v) = 2g − 2 + k
    let max_vertices = (2 * g as i64 - 2 + k as i64) as usize;
    let mut found: BTreeMap<ShapeCanon, Shape> = BTreeMap::new();
    for nv in 1..=max_vertices {
        let mut genera_list = Vec::new();
        bounded_vectors(nv, &vec![g; nv], g, &mut genera_list, &mut Vec::new());
        for genera in genera_list {
            let gs: i64 = genera.iter().map(|&x| x as i64).sum();
            let ne = g as i64 - gs + nv as i64 - 1;
            if ne < nv as i64 - 1 {
                continue;
            }
            let pairs: Vec<(usize, usize)> =
                (0..nv).flat_map(|a| (a..nv).map(move |b| (a, b))).collect();
            for choice in multisets(pairs.len(), ne as usize) {
                let edges: Vec<(usize, usize)> = choice.iter().map(|&c| pairs[c]).collect();
                if !connected(nv, &edges) {
                    continue;
                }
                let nleaf = nv.pow(k as u32);
                for code in 0..nleaf {
                    let mut leaf_at = Vec::with_capacity(k);
                    let mut c = code;
                    for _ in 0..k {
                        leaf_at.push(c % nv);
                        c /= nv;
                    }
                    let mut base = Shape {
                        genera: genera.clone(),
                        leaf_at,
                        dil: vec![0; nv],
                        edges: edges.clone(),
                    };
                    // each dilaton leaf adds 1 to the dimension and takes ≥ 2
                    let caps: Vec<u32> = (0..nv).map(|v| base.dim(v).max(0) as u32).collect();
                    let mut dils = Vec::new();
                    bounded_vectors(nv, &caps, max_dil as u32, &mut dils, &mut Vec::new());
                    for d in dils {
                        base.dil = d.iter().map(|&x| x as usize).collect();
                        let ok = (0..nv).all(|v| {
                            let stable = 2 * base.genera[v] as i64 - 2 + base.valence(v) as i64 > 0;
                            let dim = base.dim(v);
                            stable && dim >= 2 * base.dil[v] as i64
                        });
                        if ok {
                            found
                                .entry(base.canonical())
                                .or_insert_with(|| base.clone());
                        }
                    }
                }
            }
        }
    }
    found.into_values().collect()
}

/// Height assignments at one vertex: `slots` entries summing to `dim`, the
/// last `ndil` of them at least 2 and nondecreasing.
fn vertex_heights(slots: usize, ndil: usize, dim: u32) -> Vec<Vec<u32>> {
    fn go(
        i: usize,
        slots: usize,
        ndil: usize,
        left: u32,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == slots {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let first_dil = slots - ndil;
        let lo = if i >= first_dil {
            if i > first_dil {
                cur[i - 1]
            } else {
                2
            }
        } else {
            0
        };
        for h in lo..=left {
            cur.push(h);
            go(i + 1, slots, ndil, left - h, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, slots, ndil, dim, &mut Vec::new(), &mut out);
    out
}

/// Half-edges `(edge, side)` and leaves meeting one vertex.
type SlotLayout = (Vec<(usize, usize)>, Vec<usize>);

fn decorate(shape: &Shape, markings: usize, out: &mut BTreeMap<Canon, StableGraph>) {
    let nv = shape.genera.len();
    // per vertex: half-edge slots (edge, side), then leaves, then dilatons
    let mut per_vertex: Vec<Vec<Vec<u32>>> = Vec::with_capacity(nv);
    let mut slot_layout: Vec<SlotLayout> = Vec::with_capacity(nv);
    for v in 0..nv {
        let mut halves = Vec::new();
        for (e, &(a, b)) in shape.edges.iter().enumerate() {
            if a == v {
                halves.push((e, 0));
            }
            if b == v {
                halves.push((e, 1));
            }
        }
        let leaves: Vec<usize> = (0..shape.leaf_at.len())
            .filter(|&l| shape.leaf_at[l] == v)
            .collect();
        let slots = halves.len() + leaves.len() + shape.dil[v];
        per_vertex.push(vertex_heights(slots, shape.dil[v], shape.dim(v) as u32));
        slot_layout.push((halves, leaves));
    }
    if per_vertex.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; nv];
    loop {
        let mut edge_h = vec![[0u32; 2]; shape.edges.len()];
        let mut leaf_h = vec![0u32; shape.leaf_at.len()];
        let mut dil = Vec::new();
        for v in 0..nv {
            let hs = &per_vertex[v][idx[v]];
            let (halves, leaves) = &slot_layout[v];
            let mut it = hs.iter();
            for &(e, side) in halves {
                edge_h[e][side] = *it.next().expect("slot");
            }
            for &l in leaves {
                leaf_h[l] = *it.next().expect("slot");
            }
            dil.extend(it.map(|&h| Leaf {
                vertex: v,
                height: h,
            }));
        }
        let edges: Vec<Edge> = shape
            .edges
            .iter()
            .zip(&edge_h)
            .map(|(&(a, b), h)| Edge::new((a, h[0]), (b, h[1])))
            .collect();
        let leaves: Vec<Leaf> = shape
            .leaf_at
            .iter()
            .zip(&leaf_h)
            .map(|(&v, &h)| Leaf {
                vertex: v,
                height: h,
            })
            .collect();
        let total = markings.pow(nv as u32);
        for code in 0..total {
            let mut c = code;
            let vertices: Vec<Vertex> = shape
                .genera
                .iter()
                .map(|&genus| {
                    let m = c % markings;
                    c /= markings;
                    Vertex { genus, marking: m }
                })
                .collect();
            let g = StableGraph {
                vertices,
                edges: edges.clone(),
                leaves: leaves.clone(),
                dilatons: dil.clone(),
                aut: 1,
            };
            let key = g.canonical();
            out.entry(key).or_insert_with(|| {
                let mut g = g.canonicalized();
                g.aut = g.compute_automorphisms();
                g
            });
        }
        // advance the mixed-radix counter
        let mut v = 0;
        loop {
            if v == nv {
                return;
            }
            idx[v] += 1;
            if idx[v] < per_vertex[v].len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
}

/// Every stable graph of genus `g` with `k` ordinary leaves whose weight can
/// be nonzero: vertex heights fill the dimension, dilaton heights are ≥ 2.
/// Markings range over `0..markings`.  Sorted canonically.
pub fn enumerate_stable_graphs(g: u32, k: usize, markings: usize) -> Result<Vec<StableGraph>> {
    if 2 * g as i64 - 2 + k as i64 <= 0 {
        return Err(Error::Unstable(g, k as u32));
    }
    let mut out = BTreeMap::new();
    if markings == 0 {
        return Ok(Vec::new());
    }
    for s in shapes(g, k) {
        decorate(&s, markings, &mut out);
    }
    Ok(out.into_values().collect())
}

/// Distinct shapes (ignoring markings and heights), for diagnostics.
pub fn shape_count(g: u32, k: usize) -> usize {
    let set: BTreeSet<ShapeCanon> = shapes(g, k).iter().map(Shape::canonical).collect();
    set.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus_one_one_leaf() {
        let gs = enumerate_stable_graphs(1, 1, 1).unwrap();
        assert_eq!(gs.len(), 3);
        for g in &gs {
            assert!(g.is_stable() && g.dimensions_match());
            assert_eq!(g.genus(), 1);
        }
        let looped = gs.iter().find(|g| g.edges.len() == 1).unwrap();
        assert_eq!(looped.automorphism_order(), 2);
    }

    #[test]
    fn genus_zero_three_leaves() {
        let gs = enumerate_stable_graphs(0, 3, 1).unwrap();
        assert_eq!(gs.len(), 1);
        assert!(gs[0].leaves.iter().all(|l| l.height == 0));
        assert!(gs[0].dilatons.is_empty() && gs[0].edges.is_empty());
    }

    #[test]
    fn unstable_rejected() {
        assert!(matches!(
            enumerate_stable_graphs(0, 2, 1),
            Err(Error::Unstable(0, 2))
        ));
        assert!(enumerate_stable_graphs(1, 0, 1).is_err());
    }

    #[test]
    fn automorphisms() {
        let v = |m| Vertex {
            genus: 0,
            marking: m,
        };
        let asym = StableGraph::new(
            vec![v(0), v(1)],
            vec![Edge::new((0, 0), (1, 0))],
            vec![
                Leaf {
                    vertex: 0,
                    height: 0,
                },
                Leaf {
                    vertex: 0,
                    height: 0,
                },
                Leaf {
                    vertex: 1,
                    height: 0,
                },
                Leaf {
                    vertex: 1,
                    height: 0,
                },
            ],
            vec![],
        );
        assert_eq!(asym.automorphism_order(), 1);
        let two_dil = StableGraph::new(
            vec![Vertex {
                genus: 2,
                marking: 0,
            }],
            vec![],
            vec![],
            vec![
                Leaf {
                    vertex: 0,
                    height: 2,
                },
                Leaf {
                    vertex: 0,
                    height: 2,
                },
            ],
        );
        assert_eq!(two_dil.automorphism_order(), 2);
        // two vertices exchanged by the symmetry, joined by a double edge
        let sym = StableGraph::new(
            vec![v(0), v(0)],
            vec![
                Edge::new((0, 0), (1, 0)),
                Edge::new((0, 0), (1, 0)),
                Edge::new((0, 0), (1, 0)),
            ],
            vec![],
            vec![],
        );
        assert_eq!(sym.automorphism_order(), 12);
    }

    #[test]
    fn genus_two_vacuum_is_stable() {
        let gs = enumerate_stable_graphs(2, 0, 1).unwrap();
        assert!(!gs.is_empty());
        for g in &gs {
            assert!(g.is_stable() && g.dimensions_match() && g.genus() == 2);
            assert!(g.dilatons.iter().all(|d| d.height >= 2));
        }
    }
}
