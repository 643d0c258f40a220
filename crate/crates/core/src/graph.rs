//! Stable graphs: validation, canonical labeling, isomorphisms, enumeration,
//! and morphisms of stable graphs (A-structures and generic (A,B)-structures).
//!
//! Internally edge `k` owns half-edges `2k` (at `edges[k].0`) and `2k+1`
//! (at `edges[k].1`). Flags are numbered half-edges first, then legs in the
//! order of `legs`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    pub genera: Vec<u32>,
    /// `(label, vertex)`.
    pub legs: Vec<(u32, usize)>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RawLeg {
    pub label: u32,
    pub vertex: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RawHalfEdge {
    pub id: i64,
    pub vertex: usize,
}

/// JSON shape of a stable graph.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RawGraph {
    pub genera: Vec<u32>,
    #[serde(default)]
    pub legs: Vec<RawLeg>,
    #[serde(default)]
    pub edges: Vec<[RawHalfEdge; 2]>,
}

impl StableGraph {
    /// Build and validate.
    pub fn new(genera: Vec<u32>, legs: Vec<(u32, usize)>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = StableGraph { genera, legs, edges };
        g.validate()?;
        Ok(g)
    }

    /// Build without checking stability or connectivity.
    pub fn unchecked(genera: Vec<u32>, legs: Vec<(u32, usize)>, edges: Vec<(usize, usize)>) -> Self {
        StableGraph { genera, legs, edges }
    }

    pub fn smooth(g: u32, labels: &[u32]) -> Self {
        StableGraph { genera: vec![g], legs: labels.iter().map(|&l| (l, 0)).collect(), edges: vec![] }
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_half_edges(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn num_flags(&self) -> usize {
        2 * self.edges.len() + self.legs.len()
    }

    pub fn half_vertex(&self, h: usize) -> usize {
        let (a, b) = self.edges[h / 2];
        if h % 2 == 0 { a } else { b }
    }

    pub fn flag_vertex(&self, f: usize) -> usize {
        let nh = self.num_half_edges();
        if f < nh { self.half_vertex(f) } else { self.legs[f - nh].1 }
    }

    pub fn leg_flag(&self, label: u32) -> Option<usize> {
        self.legs.iter().position(|&(l, _)| l == label).map(|i| self.num_half_edges() + i)
    }

    pub fn labels(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.legs.iter().map(|l| l.0).collect();
        v.sort_unstable();
        v
    }

    /// Flags attached to `v`, half-edges first.
    pub fn flags_at(&self, v: usize) -> Vec<usize> {
        (0..self.num_flags()).filter(|&f| self.flag_vertex(f) == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum::<usize>()
            + self.legs.iter().filter(|l| l.1 == v).count()
    }

    pub fn h1(&self) -> i64 {
        self.edges.len() as i64 - self.genera.len() as i64 + 1
    }

    pub fn total_genus(&self) -> u32 {
        (self.genera.iter().map(|&g| g as i64).sum::<i64>() + self.h1()) as u32
    }

    /// Dimension `3g-3+n` of the moduli space the graph lives on.
    pub fn space_dim(&self) -> i64 {
        3 * self.total_genus() as i64 - 3 + self.legs.len() as i64
    }

    pub fn vertex_dim(&self, v: usize) -> i64 {
        3 * self.genera[v] as i64 - 3 + self.valence(v) as i64
    }

    pub fn is_connected(&self) -> bool {
        let n = self.genera.len();
        if n == 0 {
            return false;
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        (0..n).all(|v| uf.find(v) == uf.find(0))
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.genera.len();
        if n == 0 {
            out.push("no vertices".into());
            return out;
        }
        for &(l, v) in &self.legs {
            if v >= n {
                out.push(format!("leg {l} attached to missing vertex {v}"));
            }
        }
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= n || b >= n {
                out.push(format!("edge {k} attached to missing vertex"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut seen = HashSet::new();
        for &(l, _) in &self.legs {
            if !seen.insert(l) {
                out.push(format!("duplicate leg label {l}"));
            }
        }
        if !self.is_connected() {
            out.push("graph is disconnected".into());
        }
        for v in 0..n {
            if 2 * self.genera[v] as i64 - 2 + self.valence(v) as i64 <= 0 {
                out.push(format!("vertex {v} is unstable"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() { Ok(()) } else { Err(Error::InvalidGraph(v)) }
    }

    pub fn from_raw(raw: &RawGraph) -> Result<Self> {
        let g = Self::from_raw_unchecked(raw)?;
        g.validate()?;
        Ok(g)
    }

    /// Convert without checking stability, connectivity or leg labels.
    pub fn from_raw_unchecked(raw: &RawGraph) -> Result<Self> {
        let mut errs = Vec::new();
        let mut ids = HashSet::new();
        for e in &raw.edges {
            for h in e {
                if !ids.insert(h.id) {
                    errs.push(format!("half-edge id {} reused", h.id));
                }
            }
        }
        if !errs.is_empty() {
            return Err(Error::InvalidGraph(errs));
        }
        let g = StableGraph {
            genera: raw.genera.clone(),
            legs: raw.legs.iter().map(|l| (l.label, l.vertex)).collect(),
            edges: raw.edges.iter().map(|e| (e[0].vertex, e[1].vertex)).collect(),
        };
        let nv = g.genera.len();
        if g.legs.iter().any(|l| l.1 >= nv) || g.edges.iter().any(|e| e.0 >= nv || e.1 >= nv) {
            return Err(Error::InvalidGraph(vec!["vertex index out of range".into()]));
        }
        Ok(g)
    }

    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            genera: self.genera.clone(),
            legs: self.legs.iter().map(|&(label, vertex)| RawLeg { label, vertex }).collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| {
                    [RawHalfEdge { id: 2 * k as i64, vertex: a }, RawHalfEdge { id: 2 * k as i64 + 1, vertex: b }]
                })
                .collect(),
        }
    }

    /// Drop all legs (the result need not be stable).
    pub fn without_legs(&self) -> Self {
        StableGraph { genera: self.genera.clone(), legs: vec![], edges: self.edges.clone() }
    }

    pub fn relabel_legs(&self, map: &dyn Fn(u32) -> u32) -> Self {
        let mut g = self.clone();
        for l in g.legs.iter_mut() {
            l.0 = map(l.0);
        }
        g
    }
}

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

// ---------------------------------------------------------------------------
// Canonical labeling

/// Result of the canonical labeling search.
#[derive(Clone, Debug)]
pub struct CanonSearch {
    pub key: Vec<u32>,
    /// Every vertex ordering (position -> vertex) attaining `key`.
    pub leaves: Vec<Vec<usize>>,
}

fn refine(g: &StableGraph, fw: &[u32], colors: &mut Vec<u32>) {
    let n = g.num_vertices();
    let mut adj: Vec<Vec<(usize, u32, u32)>> = vec![Vec::new(); n];
    for (k, &(a, b)) in g.edges.iter().enumerate() {
        adj[a].push((b, fw[2 * k], fw[2 * k + 1]));
        adj[b].push((a, fw[2 * k + 1], fw[2 * k]));
    }
    let mut classes = colors.iter().collect::<HashSet<_>>().len();
    loop {
        let sigs: Vec<(u32, Vec<(u32, u32, u32)>)> = (0..n)
            .map(|v| {
                let mut s: Vec<(u32, u32, u32)> = adj[v].iter().map(|&(w, x, y)| (colors[w], x, y)).collect();
                s.sort_unstable();
                (colors[v], s)
            })
            .collect();
        let mut uniq = sigs.clone();
        uniq.sort();
        uniq.dedup();
        for v in 0..n {
            colors[v] = uniq.binary_search(&sigs[v]).unwrap() as u32;
        }
        if uniq.len() == classes {
            break;
        }
        classes = uniq.len();
    }
}

fn serialize(g: &StableGraph, vdata: &[Vec<u32>], fw: &[u32], order: &[usize]) -> Vec<u32> {
    let n = g.num_vertices();
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let nh = g.num_half_edges();
    let mut out = Vec::new();
    out.push(n as u32);
    for &v in order {
        out.push(g.genera[v]);
        out.push(vdata[v].len() as u32);
        out.extend_from_slice(&vdata[v]);
        let mut legs: Vec<(u32, u32)> =
            g.legs.iter().enumerate().filter(|(_, l)| l.1 == v).map(|(i, l)| (l.0, fw[nh + i])).collect();
        legs.sort_unstable();
        out.push(legs.len() as u32);
        for (a, b) in legs {
            out.push(a);
            out.push(b);
        }
    }
    let mut es: Vec<[u32; 4]> = edge_tuples(g, fw, &pos).into_iter().map(|(t, _)| t).collect();
    es.sort_unstable();
    out.push(es.len() as u32);
    for e in es {
        out.extend_from_slice(&e);
    }
    out
}

/// Per edge: sorted tuple `(pos, weight, pos, weight)` and whether the
/// stored orientation was flipped to obtain it.
fn edge_tuples(g: &StableGraph, fw: &[u32], pos: &[usize]) -> Vec<([u32; 4], bool)> {
    g.edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let t1 = (pos[a] as u32, fw[2 * k]);
            let t2 = (pos[b] as u32, fw[2 * k + 1]);
            if t1 <= t2 { ([t1.0, t1.1, t2.0, t2.1], false) } else { ([t2.0, t2.1, t1.0, t1.1], true) }
        })
        .collect()
}

/// Full individualization-refinement search. `vdata` is extra per-vertex
/// data (kappa monomials, colors); `fw` is a weight per flag.
pub fn canon_search(g: &StableGraph, vdata: &[Vec<u32>], fw: &[u32]) -> CanonSearch {
    let n = g.num_vertices();
    let nh = g.num_half_edges();
    let init: Vec<(u32, Vec<u32>, Vec<(u32, u32)>, usize)> = (0..n)
        .map(|v| {
            let mut legs: Vec<(u32, u32)> =
                g.legs.iter().enumerate().filter(|(_, l)| l.1 == v).map(|(i, l)| (l.0, fw[nh + i])).collect();
            legs.sort_unstable();
            (g.genera[v], vdata[v].clone(), legs, g.valence(v))
        })
        .collect();
    let mut uniq = init.clone();
    uniq.sort();
    uniq.dedup();
    let mut colors: Vec<u32> = init.iter().map(|x| uniq.binary_search(x).unwrap() as u32).collect();
    refine(g, fw, &mut colors);
    let mut best: Option<Vec<u32>> = None;
    let mut leaves = Vec::new();
    search(g, vdata, fw, colors, &mut best, &mut leaves);
    CanonSearch { key: best.unwrap_or_default(), leaves }
}

fn search(
    g: &StableGraph,
    vdata: &[Vec<u32>],
    fw: &[u32],
    colors: Vec<u32>,
    best: &mut Option<Vec<u32>>,
    leaves: &mut Vec<Vec<usize>>,
) {
    let n = colors.len();
    let mut counts: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        counts.entry(colors[v]).or_default().push(v);
    }
    let cell = counts.iter().find(|(_, vs)| vs.len() > 1).map(|(c, vs)| (*c, vs.clone()));
    match cell {
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| colors[v]);
            let key = serialize(g, vdata, fw, &order);
            match best {
                Some(b) if key > *b => {}
                Some(b) if key == *b => leaves.push(order),
                _ => {
                    *best = Some(key);
                    leaves.clear();
                    leaves.push(order);
                }
            }
        }
        Some((c, vs)) => {
            for &v in &vs {
                let mut col = colors.clone();
                for w in 0..n {
                    if col[w] > c || (col[w] == c && w != v) {
                        col[w] += 1;
                    }
                }
                refine(g, fw, &mut col);
                search(g, vdata, fw, col, best, leaves);
            }
        }
    }
}

/// Canonical relabeling of a graph carrying per-vertex data and flag weights.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub graph: StableGraph,
    pub vdata: Vec<Vec<u32>>,
    pub fw: Vec<u32>,
    pub key: Vec<u32>,
    pub aut: u64,
    /// old vertex -> new vertex
    pub vmap: Vec<usize>,
    /// old flag -> new flag
    pub fmap: Vec<usize>,
}

pub fn canonicalize(g: &StableGraph, vdata: &[Vec<u32>], fw: &[u32]) -> Canonical {
    let cs = canon_search(g, vdata, fw);
    let order = &cs.leaves[0];
    let n = g.num_vertices();
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let tuples = edge_tuples(g, fw, &pos);
    let mut eidx: Vec<usize> = (0..g.num_edges()).collect();
    eidx.sort_by(|&a, &b| tuples[a].0.cmp(&tuples[b].0));
    let nh = g.num_half_edges();
    let mut fmap = vec![0usize; g.num_flags()];
    let mut edges = Vec::with_capacity(g.num_edges());
    for (newk, &k) in eidx.iter().enumerate() {
        let (t, flipped) = tuples[k];
        edges.push((t[0] as usize, t[2] as usize));
        let (h0, h1) = if flipped { (2 * k + 1, 2 * k) } else { (2 * k, 2 * k + 1) };
        fmap[h0] = 2 * newk;
        fmap[h1] = 2 * newk + 1;
    }
    let mut lidx: Vec<usize> = (0..g.legs.len()).collect();
    lidx.sort_by_key(|&i| g.legs[i].0);
    let mut legs = Vec::with_capacity(g.legs.len());
    for (newi, &i) in lidx.iter().enumerate() {
        legs.push((g.legs[i].0, pos[g.legs[i].1]));
        fmap[nh + i] = nh + newi;
    }
    let genera = order.iter().map(|&v| g.genera[v]).collect();
    let new_vdata = order.iter().map(|&v| vdata[v].clone()).collect();
    let mut new_fw = vec![0u32; fw.len()];
    for f in 0..fw.len() {
        new_fw[fmap[f]] = fw[f];
    }
    // edge multiplicities and symmetric loops
    let mut aut = cs.leaves.len() as u64;
    let mut sorted: Vec<[u32; 4]> = tuples.iter().map(|t| t.0).collect();
    sorted.sort_unstable();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        aut *= (1..=(j - i) as u64).product::<u64>();
        if sorted[i][0] == sorted[i][2] && sorted[i][1] == sorted[i][3] {
            aut *= 1u64 << (j - i);
        }
        i = j;
    }
    Canonical {
        graph: StableGraph { genera, legs, edges },
        vdata: new_vdata,
        fw: new_fw,
        key: cs.key,
        aut,
        vmap: pos,
        fmap,
    }
}

/// Canonical relabeling and automorphism count of an undecorated graph.
pub fn canonical_form(g: &StableGraph) -> (StableGraph, u64) {
    let c = canonicalize(g, &vec![vec![]; g.num_vertices()], &vec![0; g.num_flags()]);
    (c.graph, c.aut)
}

pub fn graph_key(g: &StableGraph) -> Vec<u32> {
    canon_search(g, &vec![vec![]; g.num_vertices()], &vec![0; g.num_flags()]).key
}

pub fn automorphism_count(g: &StableGraph) -> u64 {
    canonical_form(g).1
}

pub fn is_isomorphic(a: &StableGraph, b: &StableGraph) -> bool {
    a.num_vertices() == b.num_vertices() && a.num_edges() == b.num_edges() && graph_key(a) == graph_key(b)
}

/// An explicit isomorphism: vertex map and half-edge map (legs go by label).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Iso {
    pub vmap: Vec<usize>,
    pub hmap: Vec<usize>,
}

/// All isomorphisms `a -> b` preserving genera and leg labels.
pub fn isomorphisms(a: &StableGraph, b: &StableGraph) -> Vec<Iso> {
    if a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() || a.legs.len() != b.legs.len() {
        return vec![];
    }
    let za = vec![vec![]; a.num_vertices()];
    let sa = canon_search(a, &za, &vec![0; a.num_flags()]);
    let sb = canon_search(b, &za, &vec![0; b.num_flags()]);
    if sa.key != sb.key {
        return vec![];
    }
    let target = &sb.leaves[0];
    let mut out = Vec::new();
    for leaf in &sa.leaves {
        let mut vmap = vec![0usize; a.num_vertices()];
        for (p, &v) in leaf.iter().enumerate() {
            vmap[v] = target[p];
        }
        out.extend(half_edge_matchings(a, b, &vmap));
    }
    out
}

/// Every half-edge bijection lying over a given vertex bijection.
pub fn half_edge_matchings(a: &StableGraph, b: &StableGraph, vmap: &[usize]) -> Vec<Iso> {
    let key = |x: usize, y: usize| (x.min(y), x.max(y));
    let mut groups_a: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, &(x, y)) in a.edges.iter().enumerate() {
        groups_a.entry(key(vmap[x], vmap[y])).or_default().push(k);
    }
    let mut groups_b: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, &(x, y)) in b.edges.iter().enumerate() {
        groups_b.entry(key(x, y)).or_default().push(k);
    }
    if groups_a.len() != groups_b.len() {
        return vec![];
    }
    let mut partial: Vec<Vec<usize>> = vec![vec![usize::MAX; a.num_half_edges()]];
    for (k, ea) in &groups_a {
        let Some(eb) = groups_b.get(k) else { return vec![] };
        if ea.len() != eb.len() {
            return vec![];
        }
        let is_loop = k.0 == k.1;
        let mut next = Vec::new();
        for perm in permutations(ea.len()) {
            // orientation choices for loops
            let nflip = if is_loop { 1usize << ea.len() } else { 1 };
            for mask in 0..nflip {
                for base in &partial {
                    let mut h = base.clone();
                    for (i, &e) in ea.iter().enumerate() {
                        let f = eb[perm[i]];
                        let straight = if is_loop {
                            mask >> i & 1 == 0
                        } else {
                            vmap[a.edges[e].0] == b.edges[f].0
                        };
                        if straight {
                            h[2 * e] = 2 * f;
                            h[2 * e + 1] = 2 * f + 1;
                        } else {
                            h[2 * e] = 2 * f + 1;
                            h[2 * e + 1] = 2 * f;
                        }
                    }
                    next.push(h);
                }
            }
        }
        partial = next;
    }
    partial.into_iter().map(|hmap| Iso { vmap: vmap.to_vec(), hmap }).collect()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Contraction and A-structures

/// Result of contracting every edge not in `keep`.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub graph: StableGraph,
    /// old vertex -> new vertex
    pub comp: Vec<usize>,
    /// new edge index -> old edge index
    pub kept: Vec<usize>,
}

pub fn contract(g: &StableGraph, keep: &[bool]) -> Contraction {
    let n = g.num_vertices();
    let mut uf = UnionFind::new(n);
    for (k, &(a, b)) in g.edges.iter().enumerate() {
        if !keep[k] {
            uf.union(a, b);
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in &roots {
        let next = ids.len();
        ids.entry(r).or_insert(next);
    }
    for r in roots.iter_mut() {
        *r = ids[r];
    }
    let m = ids.len();
    let mut genus = vec![0i64; m];
    let mut nv = vec![0i64; m];
    let mut ne = vec![0i64; m];
    for v in 0..n {
        genus[roots[v]] += g.genera[v] as i64;
        nv[roots[v]] += 1;
    }
    for (k, &(a, _)) in g.edges.iter().enumerate() {
        if !keep[k] {
            ne[roots[a]] += 1;
        }
    }
    let genera = (0..m).map(|c| (genus[c] + ne[c] - nv[c] + 1) as u32).collect();
    let kept: Vec<usize> = (0..g.num_edges()).filter(|&k| keep[k]).collect();
    let edges = kept.iter().map(|&k| (roots[g.edges[k].0], roots[g.edges[k].1])).collect();
    let legs = g.legs.iter().map(|&(l, v)| (l, roots[v])).collect();
    Contraction { graph: StableGraph { genera, legs, edges }, comp: roots, kept }
}

/// An A-structure on Γ: `alpha: V(Γ) -> V(A)`, `beta: H(A) -> H(Γ)` and
/// `gamma: H(Γ) \ im(beta) -> V(A)` (stored as `None` on `im(beta)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphMorphism {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<Option<usize>>,
}

impl GraphMorphism {
    pub fn image_edges(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.beta.iter().step_by(2).map(|&h| h / 2).collect();
        v.sort_unstable();
        v
    }

    /// Transport along an automorphism (or isomorphism) `s` of the source.
    pub fn transport(&self, s: &Iso) -> GraphMorphism {
        let mut alpha = vec![0; self.alpha.len()];
        for (v, &a) in self.alpha.iter().enumerate() {
            alpha[s.vmap[v]] = a;
        }
        let beta = self.beta.iter().map(|&h| s.hmap[h]).collect();
        let mut gamma = vec![None; self.gamma.len()];
        for (h, &c) in self.gamma.iter().enumerate() {
            gamma[s.hmap[h]] = c;
        }
        GraphMorphism { alpha, beta, gamma }
    }
}

fn morphisms_from(gamma: &StableGraph, c: &Contraction, a: &StableGraph, ignore_legs: bool) -> Vec<GraphMorphism> {
    let (q, t) = if ignore_legs { (c.graph.without_legs(), a.without_legs()) } else { (c.graph.clone(), a.clone()) };
    let mut out = Vec::new();
    for iso in isomorphisms(&q, &t) {
        let alpha: Vec<usize> = c.comp.iter().map(|&x| iso.vmap[x]).collect();
        let mut beta = vec![0usize; a.num_half_edges()];
        let mut gam = vec![None; gamma.num_half_edges()];
        for h in 0..gamma.num_half_edges() {
            gam[h] = Some(alpha[gamma.half_vertex(h)]);
        }
        for (newk, &oldk) in c.kept.iter().enumerate() {
            for s in 0..2 {
                let target = iso.hmap[2 * newk + s];
                beta[target] = 2 * oldk + s;
                gam[2 * oldk + s] = None;
            }
        }
        out.push(GraphMorphism { alpha, beta, gamma: gam });
    }
    out
}

/// All A-structures on Γ. With `ignore_legs` the leg assignment is not
/// compared (used when legs are forgotten).
pub fn a_structures_filtered(
    gamma: &StableGraph,
    a: &StableGraph,
    ignore_legs: bool,
    accept: &dyn Fn(&[usize]) -> bool,
) -> Vec<GraphMorphism> {
    let (ea, eg) = (a.num_edges(), gamma.num_edges());
    if eg < ea || gamma.total_genus() != a.total_genus() || gamma.num_vertices() < a.num_vertices() {
        return vec![];
    }
    if !ignore_legs && gamma.labels() != a.labels() {
        return vec![];
    }
    let mut tgen = a.genera.clone();
    tgen.sort_unstable();
    let tkey = if ignore_legs { graph_key(&a.without_legs()) } else { graph_key(a) };
    let mut out = Vec::new();
    for subset in combinations(eg, ea) {
        if !accept(&subset) {
            continue;
        }
        let mut keep = vec![false; eg];
        for &k in &subset {
            keep[k] = true;
        }
        let c = contract(gamma, &keep);
        if c.graph.num_vertices() != a.num_vertices() {
            continue;
        }
        let mut cg = c.graph.genera.clone();
        cg.sort_unstable();
        if cg != tgen {
            continue;
        }
        let key = if ignore_legs { graph_key(&c.graph.without_legs()) } else { graph_key(&c.graph) };
        if key != tkey {
            continue;
        }
        out.extend(morphisms_from(gamma, &c, a, ignore_legs));
    }
    out.sort();
    out
}

pub fn enumerate_a_structures(gamma: &StableGraph, a: &StableGraph) -> Vec<GraphMorphism> {
    a_structures_filtered(gamma, a, false, &|_| true)
}

// ---------------------------------------------------------------------------
// Enumeration

/// Every way to split vertex `v` by one new edge (unstable results dropped).
pub fn splittings(g: &StableGraph, v: usize) -> Vec<StableGraph> {
    let mut out = Vec::new();
    if g.genera[v] >= 1 {
        let mut h = g.clone();
        h.genera[v] -= 1;
        h.edges.push((v, v));
        out.push(h);
    }
    let flags = g.flags_at(v);
    let nh = g.num_half_edges();
    let gv = g.genera[v];
    let w = g.num_vertices();
    for mask in 0u64..(1u64 << flags.len()) {
        let moved: Vec<usize> = (0..flags.len()).filter(|&i| mask >> i & 1 == 1).map(|i| flags[i]).collect();
        let k2 = moved.len() as i64;
        let k1 = flags.len() as i64 - k2;
        for g1 in 0..=gv {
            let g2 = gv - g1;
            if 2 * g1 as i64 - 2 + k1 + 1 <= 0 || 2 * g2 as i64 - 2 + k2 + 1 <= 0 {
                continue;
            }
            let mut h = g.clone();
            h.genera[v] = g1;
            h.genera.push(g2);
            for &f in &moved {
                if f < nh {
                    let e = &mut h.edges[f / 2];
                    if f % 2 == 0 { e.0 = w } else { e.1 = w }
                } else {
                    h.legs[f - nh].1 = w;
                }
            }
            h.edges.push((v, w));
            out.push(h);
        }
    }
    out
}

/// All graphs obtained from `base` by at most `k` vertex splittings, up to
/// isomorphism, grouped by number of added edges.
pub fn degenerations(base: &StableGraph, k: usize) -> Vec<Vec<StableGraph>> {
    let mut levels = vec![vec![canonical_form(base).0]];
    for _ in 0..k {
        let mut seen: HashMap<Vec<u32>, StableGraph> = HashMap::new();
        for g in levels.last().unwrap() {
            for v in 0..g.num_vertices() {
                for h in splittings(g, v) {
                    let (c, _) = canonical_form(&h);
                    seen.entry(graph_key(&c)).or_insert(c);
                }
            }
        }
        let mut next: Vec<(Vec<u32>, StableGraph)> = seen.into_iter().collect();
        next.sort_by(|a, b| a.0.cmp(&b.0));
        levels.push(next.into_iter().map(|x| x.1).collect());
        if levels.last().unwrap().is_empty() {
            break;
        }
    }
    levels
}

/// Stable graphs of type (g,n) (legs `1..=n`) with at most `max_edges`
/// edges, up to isomorphism, sorted by edge count then canonical key.
pub fn enumerate_graphs(g: u32, n: u32, max_edges: usize) -> Result<Vec<StableGraph>> {
    if (3 * g as i64 - 3 + n as i64) < 0 || (g == 0 && n < 3) || (g == 1 && n == 0) {
        return Err(Error::Unstable { g, n });
    }
    let labels: Vec<u32> = (1..=n).collect();
    let base = StableGraph::smooth(g, &labels);
    Ok(degenerations(&base, max_edges).into_iter().flatten().collect())
}

/// The set of leg additions: every distribution of the new labels onto the
/// vertices of `a`, up to isomorphism.
pub fn enumerate_leg_additions(a: &StableGraph, extra: &[u32]) -> Vec<StableGraph> {
    let nv = a.num_vertices();
    let mut seen: BTreeMap<Vec<u32>, StableGraph> = BTreeMap::new();
    let total = nv.pow(extra.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut b = a.clone();
        for &l in extra {
            b.legs.push((l, c % nv));
            c /= nv;
        }
        let (cf, _) = canonical_form(&b);
        seen.entry(graph_key(&cf)).or_insert(cf);
    }
    seen.into_values().collect()
}

// ---------------------------------------------------------------------------
// Generic (A,B)-structures

#[derive(Clone, Debug)]
pub struct GenericAB {
    pub graph: StableGraph,
    pub f: GraphMorphism,
    pub g: GraphMorphism,
}

/// Every candidate Γ together with all generic pairs on it (not reduced
/// modulo automorphisms) and `|Aut Γ|`.
#[derive(Clone, Debug)]
pub struct GenericPairs {
    pub graph: StableGraph,
    pub aut: u64,
    pub pairs: Vec<(GraphMorphism, GraphMorphism)>,
}

pub fn generic_pairs(a: &StableGraph, b: &StableGraph) -> Result<Vec<GenericPairs>> {
    if a.total_genus() != b.total_genus() || a.labels() != b.labels() {
        return Err(Error::Space("graphs live on different moduli spaces".into()));
    }
    let (base, other) = if a.num_edges() >= b.num_edges() { (a, b) } else { (b, a) };
    let mut out = Vec::new();
    for gamma in degenerations(base, other.num_edges()).into_iter().flatten() {
        let fa = enumerate_a_structures(&gamma, a);
        if fa.is_empty() {
            continue;
        }
        let fb = enumerate_a_structures(&gamma, b);
        let nh = gamma.num_half_edges();
        let mut pairs = Vec::new();
        for f in &fa {
            for g in &fb {
                let mut cov = vec![false; nh];
                for &h in f.beta.iter().chain(g.beta.iter()) {
                    cov[h] = true;
                }
                if cov.iter().all(|&x| x) {
                    pairs.push((f.clone(), g.clone()));
                }
            }
        }
        if !pairs.is_empty() {
            let aut = automorphism_count(&gamma);
            out.push(GenericPairs { graph: gamma, aut, pairs });
        }
    }
    Ok(out)
}

/// Isomorphism classes of generic (A,B)-structures.
pub fn enumerate_generic_ab(a: &StableGraph, b: &StableGraph) -> Result<Vec<GenericAB>> {
    let mut out = Vec::new();
    for gp in generic_pairs(a, b)? {
        let auts = isomorphisms(&gp.graph, &gp.graph);
        let mut reps: HashSet<(GraphMorphism, GraphMorphism)> = HashSet::new();
        for (f, g) in &gp.pairs {
            let rep = auts.iter().map(|s| (f.transport(s), g.transport(s))).min().unwrap();
            reps.insert(rep);
        }
        let mut reps: Vec<_> = reps.into_iter().collect();
        reps.sort();
        for (f, g) in reps {
            out.push(GenericAB { graph: gp.graph.clone(), f, g });
        }
    }
    Ok(out)
}
