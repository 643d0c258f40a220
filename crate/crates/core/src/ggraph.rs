//! Admissible G-graphs and the generic A-structures on them.
//!
//! A G-graph is a stable graph with an action of a finite group on its
//! vertices, half-edges and legs, together with a generator `h_l` of the
//! stabilizer of every flag. Admissibility asks that the action never swaps
//! the two halves of an edge, that `h_{ι(l)} = h_l^{-1}`, and that every
//! vertex carries a nonempty local Hurwitz space.
//!
//! Enumeration of the triples `(Γ, G, f)` with `f` a generic A-structure
//! proceeds in three steps. Leg-free quotient skeletons are decorated with
//! vertex stabilizers, half-edge monodromy and edge gluing elements, which
//! determines a leg-free G-graph by induction. A-structures on it are found
//! by edge contraction and deduplicated up to equivariant isomorphism.
//! Finally the markings `p_{i,a}` are placed on vertices.

use crate::covers::{self, Group, HurwitzSpec};
use crate::error::{Error, Result};
use crate::graph::{self, GraphMorphism, RawGraph, StableGraph, UnionFind};
use crate::rational::Q;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Default cap on the number of candidate configurations examined.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// A stable graph with a group action and stabilizer generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GGraph {
    pub graph: StableGraph,
    pub group: Arc<Group>,
    /// `vact[t][v] = t·v`
    pub vact: Vec<Vec<usize>>,
    /// `hact[t][h] = t·h` on half-edges
    pub hact: Vec<Vec<usize>>,
    /// `lact[t][i] = t·i` on leg indices
    pub lact: Vec<Vec<usize>>,
    /// generator of the stabilizer of each half-edge
    pub hstab: Vec<usize>,
    /// generator of the stabilizer of each leg
    pub lstab: Vec<usize>,
}

/// The local monodromy datum at a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDatum {
    pub vertex: usize,
    pub genus: u32,
    /// elements of G fixing the vertex
    pub stabilizer: Vec<usize>,
    /// one flag per orbit of the stabilizer on the flags at the vertex
    pub flags: Vec<usize>,
    /// stabilizer generators of those flags (elements of G)
    pub xi: Vec<usize>,
    /// genus of the quotient curve, when Riemann–Hurwitz allows one
    pub gprime: Option<u32>,
}

impl LocalDatum {
    /// Degree of the local branch morphism; zero when the local space is
    /// empty.
    pub fn degree(&self, group: &Group) -> Result<Q> {
        let Some(gp) = self.gprime else { return Ok(Q::zero()) };
        local_degree(group, &self.stabilizer, gp, &self.xi)
    }
}

type DegreeKey = (Vec<Vec<usize>>, Vec<usize>, u32, Vec<usize>);
static DEGREE_CACHE: Lazy<Mutex<HashMap<DegreeKey, Q>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// `deg δ` for the Hurwitz space of the subgroup `stab` with monodromy `xi`
/// (elements of the ambient group).
pub fn local_degree(group: &Group, stab: &[usize], gprime: u32, xi: &[usize]) -> Result<Q> {
    let mut sorted = xi.to_vec();
    sorted.sort_unstable();
    let key = (group.table.clone(), stab.to_vec(), gprime, sorted);
    if let Some(d) = DEGREE_CACHE.lock().get(&key) {
        return Ok(d.clone());
    }
    let (sub, map) = group.subgroup(stab);
    let local: Vec<usize> = xi
        .iter()
        .map(|&h| map.iter().position(|&x| x == h).ok_or_else(|| Error::Precondition("monodromy outside stabilizer".into())))
        .collect::<Result<_>>()?;
    let d = covers::degree_delta(gprime, &sub, &local)?;
    DEGREE_CACHE.lock().insert(key, d.clone());
    Ok(d)
}

/// Riemann–Hurwitz for a vertex of genus `g` with stabilizer of order `n`
/// and total ramification `ram`.
fn quotient_genus(g: u32, n: usize, ram: i64) -> Option<u32> {
    let n = n as i64;
    let num = 2 * g as i64 - 2 - ram + 2 * n;
    if num < 0 || num % (2 * n) != 0 {
        return None;
    }
    Some((num / (2 * n)) as u32)
}

/// The quotient graph `Γ/G` with the orbit maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub graph: StableGraph,
    pub vmap: Vec<usize>,
    /// half-edge of Γ to half-edge of the quotient
    pub hmap: Vec<usize>,
    /// leg index of Γ to leg index of the quotient
    pub lmap: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawGGraph {
    pub graph: RawGraph,
    pub group: covers::RawGroup,
    /// one row per group element
    pub vertex_action: Vec<Vec<usize>>,
    /// half-edges numbered `2k`, `2k+1` for the two ends of edge `k`
    pub half_edge_action: Vec<Vec<usize>>,
    pub leg_action: Vec<Vec<usize>>,
    pub half_edge_stabilizers: Vec<usize>,
    pub leg_stabilizers: Vec<usize>,
}

impl GGraph {
    /// The trivial action of the trivial group.
    pub fn trivial(graph: StableGraph) -> GGraph {
        let nh = graph.num_half_edges();
        let nl = graph.legs.len();
        GGraph {
            vact: vec![(0..graph.num_vertices()).collect()],
            hact: vec![(0..nh).collect()],
            lact: vec![(0..nl).collect()],
            hstab: vec![0; nh],
            lstab: vec![0; nl],
            group: Group::cyclic(1),
            graph,
        }
    }

    fn nh(&self) -> usize {
        self.graph.num_half_edges()
    }

    /// Action on flags (half-edges first, then legs).
    pub fn flag_act(&self, t: usize, f: usize) -> usize {
        let nh = self.nh();
        if f < nh { self.hact[t][f] } else { nh + self.lact[t][f - nh] }
    }

    pub fn flag_stab(&self, f: usize) -> usize {
        let nh = self.nh();
        if f < nh { self.hstab[f] } else { self.lstab[f - nh] }
    }

    pub fn vertex_stabilizer(&self, v: usize) -> Vec<usize> {
        (0..self.group.order()).filter(|&t| self.vact[t][v] == v).collect()
    }

    pub fn vertex_orbit(&self, v: usize) -> Vec<usize> {
        let s: BTreeSet<usize> = (0..self.group.order()).map(|t| self.vact[t][v]).collect();
        s.into_iter().collect()
    }

    pub fn local_datum(&self, v: usize) -> LocalDatum {
        let stabilizer = self.vertex_stabilizer(v);
        let mut seen = vec![false; self.graph.num_flags()];
        let (mut flags, mut xi) = (Vec::new(), Vec::new());
        let mut ram = 0i64;
        let n = stabilizer.len();
        for f in self.graph.flags_at(v) {
            if seen[f] {
                continue;
            }
            for &t in &stabilizer {
                seen[self.flag_act(t, f)] = true;
            }
            let h = self.flag_stab(f);
            ram += (n - n / self.group.elem_order(h)) as i64;
            flags.push(f);
            xi.push(h);
        }
        let genus = self.graph.genera[v];
        LocalDatum { vertex: v, genus, gprime: quotient_genus(genus, n, ram), stabilizer, flags, xi }
    }

    /// Every failed admissibility condition, as readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.graph.violations();
        let gr = &self.group;
        let n = gr.order();
        let (nv, nh, nl) = (self.graph.num_vertices(), self.nh(), self.graph.legs.len());
        let is_perm = |row: &Vec<usize>, m: usize| {
            let s: BTreeSet<usize> = row.iter().copied().collect();
            row.len() == m && s.len() == m && s.iter().all(|&x| x < m)
        };
        let shape_ok = self.vact.len() == n
            && self.hact.len() == n
            && self.lact.len() == n
            && self.vact.iter().all(|r| is_perm(r, nv))
            && self.hact.iter().all(|r| is_perm(r, nh))
            && self.lact.iter().all(|r| is_perm(r, nl))
            && self.hstab.len() == nh
            && self.lstab.len() == nl
            && self.hstab.iter().chain(&self.lstab).all(|&h| h < n);
        if !shape_ok {
            out.push("action tables have the wrong shape or are not permutations".into());
            return out;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = gr.mul(a, b);
                let bad = (0..nv).any(|v| self.vact[ab][v] != self.vact[a][self.vact[b][v]])
                    || (0..nh).any(|h| self.hact[ab][h] != self.hact[a][self.hact[b][h]])
                    || (0..nl).any(|i| self.lact[ab][i] != self.lact[a][self.lact[b][i]]);
                if bad {
                    out.push(format!("action is not a homomorphism at ({a}, {b})"));
                    return out;
                }
            }
        }
        for t in 0..n {
            for v in 0..nv {
                if self.graph.genera[self.vact[t][v]] != self.graph.genera[v] {
                    out.push(format!("element {t} does not preserve the genus of vertex {v}"));
                }
            }
            for h in 0..nh {
                if self.graph.half_vertex(self.hact[t][h]) != self.vact[t][self.graph.half_vertex(h)] {
                    out.push(format!("element {t} does not respect the vertex of half-edge {h}"));
                }
                if self.hact[t][h ^ 1] != self.hact[t][h] ^ 1 {
                    out.push(format!("element {t} does not respect the edge of half-edge {h}"));
                }
                if self.hact[t][h] == h ^ 1 {
                    out.push(format!("element {t} swaps the ends of edge {}", h / 2));
                }
            }
            for i in 0..nl {
                if self.graph.legs[self.lact[t][i]].1 != self.vact[t][self.graph.legs[i].1] {
                    out.push(format!("element {t} does not respect the vertex of leg {i}"));
                }
            }
        }
        for f in 0..nh + nl {
            let stab: Vec<usize> = (0..n).filter(|&t| self.flag_act(t, f) == f).collect();
            let h = self.flag_stab(f);
            if gr.closure(&[h]) != stab {
                out.push(format!("flag {f}: h does not generate the stabilizer"));
            }
            for t in 0..n {
                if self.flag_stab(self.flag_act(t, f)) != gr.conj(t, h) {
                    out.push(format!("flag {f}: stabilizer generators are not equivariant"));
                    break;
                }
            }
        }
        for h in (0..nh).step_by(2) {
            if self.hstab[h + 1] != gr.inv(self.hstab[h]) {
                out.push(format!("edge {}: generators are not mutually inverse", h / 2));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for v in 0..nv {
            let d = self.local_datum(v);
            match d.degree(gr) {
                Ok(x) if x > Q::zero() => {}
                Ok(_) => out.push(format!("vertex {v}: local Hurwitz space is empty")),
                Err(e) => out.push(format!("vertex {v}: {e}")),
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() { Ok(()) } else { Err(Error::InvalidGraph(v)) }
    }

    /// `Γ/G`. Quotient legs are labeled `1, 2, ...` in the order of the
    /// smallest label in each leg orbit.
    pub fn quotient(&self) -> Result<Quotient> {
        let n = self.group.order();
        let nv = self.graph.num_vertices();
        let mut vmap = vec![usize::MAX; nv];
        let mut reps = Vec::new();
        for v in 0..nv {
            if vmap[v] == usize::MAX {
                for t in 0..n {
                    vmap[self.vact[t][v]] = reps.len();
                }
                reps.push(v);
            }
        }
        let mut genera = Vec::new();
        for &v in &reps {
            let d = self.local_datum(v);
            genera.push(d.gprime.ok_or_else(|| Error::Precondition(format!("vertex {v} has no quotient genus")))?);
        }
        let nh = self.nh();
        let mut hmap = vec![usize::MAX; nh];
        let mut edges = Vec::new();
        for k in 0..self.graph.num_edges() {
            if hmap[2 * k] != usize::MAX {
                continue;
            }
            let qk = edges.len();
            for t in 0..n {
                hmap[self.hact[t][2 * k]] = 2 * qk;
                hmap[self.hact[t][2 * k + 1]] = 2 * qk + 1;
            }
            edges.push((vmap[self.graph.edges[k].0], vmap[self.graph.edges[k].1]));
        }
        let nl = self.graph.legs.len();
        let mut order: Vec<usize> = (0..nl).collect();
        order.sort_by_key(|&i| self.graph.legs[i].0);
        let mut lmap = vec![usize::MAX; nl];
        let mut legs = Vec::new();
        for i in order {
            if lmap[i] == usize::MAX {
                for t in 0..n {
                    lmap[self.lact[t][i]] = legs.len();
                }
                legs.push((legs.len() as u32 + 1, vmap[self.graph.legs[i].1]));
            }
        }
        Ok(Quotient { graph: StableGraph::unchecked(genera, legs, edges), vmap, hmap, lmap })
    }

    /// Product of the local degrees over vertex orbits.
    pub fn degree(&self) -> Result<Q> {
        let mut d = Q::one();
        let mut seen = vec![false; self.graph.num_vertices()];
        for v in 0..self.graph.num_vertices() {
            if seen[v] {
                continue;
            }
            for w in self.vertex_orbit(v) {
                seen[w] = true;
            }
            d *= self.local_datum(v).degree(&self.group)?;
        }
        Ok(d)
    }

    /// Number of graph automorphisms commuting with the action and
    /// preserving the stabilizer generators.
    pub fn aut_count_equivariant(&self) -> u64 {
        let n = self.group.order();
        graph::isomorphisms(&self.graph, &self.graph)
            .into_iter()
            .filter(|s| {
                (0..n).all(|t| {
                    (0..self.graph.num_vertices()).all(|v| s.vmap[self.vact[t][v]] == self.vact[t][s.vmap[v]])
                        && (0..self.nh()).all(|h| s.hmap[self.hact[t][h]] == self.hact[t][s.hmap[h]])
                }) && (0..self.nh()).all(|h| self.hstab[s.hmap[h]] == self.hstab[h])
            })
            .count() as u64
    }

    pub fn to_raw(&self) -> RawGGraph {
        RawGGraph {
            graph: self.graph.to_raw(),
            group: covers::RawGroup {
                order: self.group.order(),
                names: self.group.names.clone(),
                table: self.group.table.clone(),
            },
            vertex_action: self.vact.clone(),
            half_edge_action: self.hact.clone(),
            leg_action: self.lact.clone(),
            half_edge_stabilizers: self.hstab.clone(),
            leg_stabilizers: self.lstab.clone(),
        }
    }

    /// Parse without checking admissibility (see [`GGraph::violations`]).
    pub fn from_raw(raw: &RawGGraph) -> Result<GGraph> {
        let graph = StableGraph::from_raw(&raw.graph)?;
        let group = Group::from_raw(&raw.group)?;
        let gg = GGraph {
            graph,
            group,
            vact: raw.vertex_action.clone(),
            hact: raw.half_edge_action.clone(),
            lact: raw.leg_action.clone(),
            hstab: raw.half_edge_stabilizers.clone(),
            lstab: raw.leg_stabilizers.clone(),
        };
        let n = gg.group.order();
        if gg.vact.len() != n || gg.hact.len() != n || gg.lact.len() != n {
            return Err(Error::Parse("action needs one row per group element".into()));
        }
        Ok(gg)
    }
}

/// For each A-edge orbit meeting `im β` in `k` edges, the `k - 1` surplus
/// A-edges; returned as the Γ half-edge pairs carrying `−ψ_h − ψ_{h'}`.
pub fn excess_factors(gg: &GGraph, f: &GraphMorphism) -> Vec<(usize, usize)> {
    let n = gg.group.order();
    let orbit = |k: usize| (0..n).map(|t| gg.hact[t][2 * k] / 2).min().unwrap();
    let mut by_orbit: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in 0..f.beta.len() / 2 {
        by_orbit.entry(orbit(f.beta[2 * x] / 2)).or_default().push(x);
    }
    let mut out = Vec::new();
    let mut orbits: Vec<_> = by_orbit.into_iter().collect();
    orbits.sort();
    for (_, mut xs) in orbits {
        xs.sort_unstable();
        for &x in &xs[1..] {
            out.push((f.beta[2 * x], f.beta[2 * x + 1]));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Enumeration

/// A leg-free admissible G-graph with a generic A-structure.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub gg: GGraph,
    pub f: GraphMorphism,
}

/// A class of marking placements on a skeleton. Branch points that are
/// interchangeable (same monodromy, no kept marking) are grouped, and
/// `multiplicity` counts the labeled placements in the class.
#[derive(Clone, Debug)]
pub struct Placement {
    /// vertex carrying `p_{i,e}`, for a representative labeled placement
    pub vertices: Vec<usize>,
    pub multiplicity: BigInt,
    /// `deg δ` of the resulting G-graph
    pub degree: Q,
    groups: Vec<(Vec<usize>, Vec<(usize, usize)>)>,
}

impl Placement {
    /// Every labeled placement in the class.
    pub fn expand(&self) -> Vec<Vec<usize>> {
        let mut out = vec![self.vertices.clone()];
        for (members, counts) in &self.groups {
            let mut slots = Vec::new();
            for &(w, c) in counts {
                slots.extend(std::iter::repeat(w).take(c));
            }
            let arrangements = multiset_permutations(&slots);
            let mut next = Vec::with_capacity(out.len() * arrangements.len());
            for base in &out {
                for arr in &arrangements {
                    let mut v = base.clone();
                    for (&i, &w) in members.iter().zip(arr) {
                        v[i] = w;
                    }
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }
}

fn multiset_permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut v = items.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    loop {
        let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else { break };
        let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
        v.swap(i - 1, j);
        v[i..].reverse();
        out.push(v.clone());
    }
    out
}

/// The generic A-structures for one Hurwitz space and one target graph.
/// The legs of `a` are the kept markings; the other markings are
/// forgotten and may sit on any vertex.
#[derive(Clone, Debug)]
pub struct HEnumeration {
    pub spec: HurwitzSpec,
    pub a: StableGraph,
    pub skeletons: Vec<Skeleton>,
    pub placements: Vec<Vec<Placement>>,
}

/// One element `(Γ, G, f)` with its markings placed.
#[derive(Clone, Debug)]
pub struct HStructure {
    pub gg: GGraph,
    pub f: GraphMorphism,
    pub degree: Q,
}

impl HEnumeration {
    /// Number of isomorphism classes of `(Γ, G, f)` with labeled markings.
    pub fn count(&self) -> BigInt {
        self.placements.iter().flatten().map(|p| p.multiplicity.clone()).sum()
    }

    /// Every structure with labeled markings.
    pub fn structures(&self) -> Vec<HStructure> {
        let mut out = Vec::new();
        for (s, ps) in self.skeletons.iter().zip(&self.placements) {
            for p in ps {
                for vs in p.expand() {
                    out.push(HStructure { gg: realize(&self.spec, &s.gg, &vs), f: s.f.clone(), degree: p.degree.clone() });
                }
            }
        }
        out
    }

    /// One representative structure per placement class, with its
    /// multiplicity.
    pub fn representatives(&self) -> Vec<(HStructure, BigInt)> {
        let mut out = Vec::new();
        for (s, ps) in self.skeletons.iter().zip(&self.placements) {
            for p in ps {
                let h = HStructure { gg: realize(&self.spec, &s.gg, &p.vertices), f: s.f.clone(), degree: p.degree.clone() };
                out.push((h, p.multiplicity.clone()));
            }
        }
        out
    }
}

/// Attach the markings to a leg-free G-graph: `p_{i,a}` sits on
/// `a·vertices[i]`.
pub fn realize(spec: &HurwitzSpec, g0: &GGraph, vertices: &[usize]) -> GGraph {
    let gr = &spec.group;
    let n = gr.order();
    let layout = spec.marking_layout();
    let mut legs = Vec::new();
    let mut lstab = Vec::new();
    let mut index_of: Vec<Vec<usize>> = Vec::new();
    let mut pos = 0;
    for (i, &h) in spec.xi.iter().enumerate() {
        let cosets = spec.cosets(h);
        let mut idx = vec![0usize; n];
        for (c, elems) in cosets.iter().enumerate() {
            for &x in elems {
                idx[x] = pos + c;
            }
        }
        for elems in &cosets {
            let a = elems[0];
            let m = &layout[legs.len()];
            debug_assert_eq!(m.coset, a);
            legs.push((m.label, g0.vact[a][vertices[i]]));
            lstab.push(gr.conj(a, h));
        }
        pos += cosets.len();
        index_of.push(idx);
    }
    let lact = (0..n)
        .map(|t| (0..layout.len()).map(|j| index_of[layout[j].branch][gr.mul(t, layout[j].coset)]).collect())
        .collect();
    let mut graph = g0.graph.clone();
    graph.legs = legs;
    GGraph { graph, group: g0.group.clone(), vact: g0.vact.clone(), hact: g0.hact.clone(), lact, hstab: g0.hstab.clone(), lstab }
}

struct Budget {
    left: u64,
}

impl Budget {
    fn spend(&mut self, k: u64) -> Result<()> {
        if self.left < k {
            return Err(Error::Budget("enumeration of G-structures".into()));
        }
        self.left -= k;
        Ok(())
    }
}

/// Connected leg-free multigraphs with `e` edges and genus labels of total
/// arithmetic genus `gprime`, up to isomorphism.
pub fn quotient_skeletons(gprime: u32, e: usize) -> Vec<StableGraph> {
    static CACHE: Lazy<Mutex<HashMap<(u32, usize), Vec<StableGraph>>>> = Lazy::new(|| Mutex::new(HashMap::new()));
    if let Some(v) = CACHE.lock().get(&(gprime, e)) {
        return v.clone();
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 1..=e + 1 {
        let h1 = e as i64 - k as i64 + 1;
        if h1 < 0 || h1 > gprime as i64 {
            continue;
        }
        let free = gprime - h1 as u32;
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a..k).map(move |b| (a, b))).collect();
        let mut multisets = Vec::new();
        multisets_rec(pairs.len(), e, 0, &mut Vec::new(), &mut multisets);
        let genus_vectors = compositions(free as usize, k);
        for ms in multisets {
            let edges: Vec<(usize, usize)> = ms.iter().map(|&p| pairs[p]).collect();
            let mut uf = UnionFind::new(k);
            for &(a, b) in &edges {
                uf.union(a, b);
            }
            if (0..k).any(|v| uf.find(v) != uf.find(0)) {
                continue;
            }
            for gv in &genus_vectors {
                let g = StableGraph::unchecked(gv.iter().map(|&x| x as u32).collect(), vec![], edges.clone());
                if seen.insert(graph::graph_key(&g)) {
                    out.push(g);
                }
            }
        }
    }
    CACHE.lock().insert((gprime, e), out.clone());
    out
}

fn multisets_rec(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..m {
        cur.push(i);
        multisets_rec(m, k, i, cur, out);
        cur.pop();
    }
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative
/// integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(left - x, parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Quotient-level choices from which a leg-free G-graph is induced.
struct Induction<'a> {
    group: &'a Group,
    q: &'a StableGraph,
    /// vertex stabilizer of the representative vertex over each Q-vertex
    stab: Vec<Vec<usize>>,
    /// stabilizer generator of the representative half-edge over each Q-half-edge
    hq: Vec<usize>,
    /// gluing element of each Q-edge
    s: Vec<usize>,
}

/// The leg-free G-graph induced from quotient data, with genera to be set.
struct Induced {
    genera_orbit: Vec<usize>,
    vact: Vec<Vec<usize>>,
    hact: Vec<Vec<usize>>,
    hstab: Vec<usize>,
    edges: Vec<(usize, usize)>,
    /// per Q-vertex: the number of half-edges at each Γ-vertex above it and
    /// the ramification they contribute
    he_count: Vec<usize>,
    he_ram: Vec<i64>,
}

fn coset_index(group: &Group, sub: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = group.order();
    let mut idx = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for t in 0..n {
        if idx[t] == usize::MAX {
            for &x in sub {
                idx[group.mul(t, x)] = reps.len();
            }
            reps.push(t);
        }
    }
    (idx, reps)
}

impl Induction<'_> {
    fn build(&self) -> Option<Induced> {
        let gr = self.group;
        let n = gr.order();
        let q = self.q;
        let mut voff = Vec::new();
        let mut vidx = Vec::new();
        let mut nv = 0;
        let mut genera_orbit = Vec::new();
        for (u, st) in self.stab.iter().enumerate() {
            let (idx, reps) = coset_index(gr, st);
            voff.push(nv);
            nv += reps.len();
            genera_orbit.extend(std::iter::repeat(u).take(reps.len()));
            vidx.push(idx);
        }
        // half-edges over each Q-half-edge: cosets of ⟨h_q⟩
        let mut hidx = Vec::new();
        let mut hreps = Vec::new();
        for &h in &self.hq {
            let (idx, reps) = coset_index(gr, &gr.closure(&[h]));
            hidx.push(idx);
            hreps.push(reps);
        }
        // edges of Γ: for Q-edge k, pair t⟨h_{2k}⟩ with ts⟨h_{2k+1}⟩
        let mut edges = Vec::new();
        let mut hid: Vec<Vec<usize>> = vec![vec![usize::MAX; 0]; 2 * q.num_edges()];
        for k in 0..q.num_edges() {
            let (q0, q1) = (2 * k, 2 * k + 1);
            hid[q0] = vec![usize::MAX; hreps[q0].len()];
            hid[q1] = vec![usize::MAX; hreps[q1].len()];
            for (c, &t) in hreps[q0].iter().enumerate() {
                let other = hidx[q1][gr.mul(t, self.s[k])];
                let e = edges.len();
                hid[q0][c] = 2 * e;
                hid[q1][other] = 2 * e + 1;
                let (u0, u1) = q.edges[k];
                let v0 = voff[u0] + vidx[u0][t];
                let v1 = voff[u1] + vidx[u1][gr.mul(t, self.s[k])];
                edges.push((v0, v1));
            }
        }
        let nh = 2 * edges.len();
        let mut hact = vec![vec![0usize; nh]; n];
        let mut hstab = vec![0usize; nh];
        for qh in 0..hreps.len() {
            for (c, &a) in hreps[qh].iter().enumerate() {
                let id = hid[qh][c];
                hstab[id] = gr.conj(a, self.hq[qh]);
                for t in 0..n {
                    hact[t][id] = hid[qh][hidx[qh][gr.mul(t, a)]];
                }
            }
        }
        let mut vact = vec![vec![0usize; nv]; n];
        for u in 0..q.num_vertices() {
            let (_, reps) = coset_index(gr, &self.stab[u]);
            for (c, &a) in reps.iter().enumerate() {
                for t in 0..n {
                    vact[t][voff[u] + c] = voff[u] + vidx[u][gr.mul(t, a)];
                }
            }
        }
        let mut uf = UnionFind::new(nv);
        for &(a, b) in &edges {
            uf.union(a, b);
        }
        if (0..nv).any(|v| uf.find(v) != uf.find(0)) {
            return None;
        }
        let mut he_count = vec![0usize; q.num_vertices()];
        let mut he_ram = vec![0i64; q.num_vertices()];
        for (qh, &h) in self.hq.iter().enumerate() {
            let u = q.half_vertex(qh);
            let m = self.stab[u].len();
            let o = gr.elem_order(h);
            he_count[u] += m / o;
            he_ram[u] += (m - m / o) as i64;
        }
        Some(Induced { genera_orbit, vact, hact, hstab, edges, he_count, he_ram })
    }
}

/// Canonical key of `(Γ, G, f)` up to equivariant isomorphism: every
/// half-edge is named by the smallest `(x, t)` with `t·β(x)` equal to it.
fn structure_key(gg: &GGraph, f: &GraphMorphism) -> Vec<usize> {
    let n = gg.group.order();
    let nh = gg.graph.num_half_edges();
    if nh == 0 {
        return vec![usize::MAX, gg.graph.genera[0] as usize];
    }
    let mut name = vec![usize::MAX; nh];
    for (x, &y) in f.beta.iter().enumerate() {
        for t in 0..n {
            let z = gg.hact[t][y];
            name[z] = name[z].min(x * n + t);
        }
    }
    let mut vname = vec![usize::MAX; gg.graph.num_vertices()];
    for h in 0..nh {
        let v = gg.graph.half_vertex(h);
        vname[v] = vname[v].min(name[h]);
    }
    let mut order: Vec<usize> = (0..nh).collect();
    order.sort_by_key(|&h| name[h]);
    let mut key = Vec::with_capacity(nh * (5 + n));
    for &h in &order {
        let v = gg.graph.half_vertex(h);
        key.extend([name[h], name[h ^ 1], gg.hstab[h], vname[v], gg.graph.genera[v] as usize, f.alpha[v]]);
        for t in 0..n {
            key.push(name[gg.hact[t][h]]);
        }
    }
    key
}

/// Enumerate the generic A-structures on admissible G-graphs of type
/// `spec`. Markings that are not legs of `a` are forgotten.
pub fn enumerate_generic_a_structures(spec: &HurwitzSpec, a: &StableGraph) -> Result<HEnumeration> {
    enumerate_with_budget(spec, a, budget())
}

static BUDGET: AtomicU64 = AtomicU64::new(DEFAULT_BUDGET);

/// Candidate cap used by [`enumerate_generic_a_structures`] and everything
/// built on it.
pub fn set_budget(b: u64) {
    BUDGET.store(b, Ordering::Relaxed);
}

pub fn budget() -> u64 {
    BUDGET.load(Ordering::Relaxed)
}

type SkeletonKey = (HurwitzSpec, StableGraph);
static SKELETON_CACHE: Lazy<Mutex<HashMap<SkeletonKey, Arc<Vec<Skeleton>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub fn enumerate_with_budget(spec: &HurwitzSpec, a: &StableGraph, budget: u64) -> Result<HEnumeration> {
    let layout = spec.marking_layout();
    for &(l, _) in &a.legs {
        if !layout.iter().any(|m| m.label == l) {
            return Err(Error::Precondition(format!("leg {l} of the target graph is not a marking")));
        }
    }
    if a.total_genus() != spec.g {
        return Err(Error::Space(format!("target graph has genus {}, covers have genus {}", a.total_genus(), spec.g)));
    }
    let mut budget = Budget { left: budget };
    let a0 = a.without_legs();
    let key = (spec.clone(), a0.clone());
    let cached = SKELETON_CACHE.lock().get(&key).cloned();
    let skeletons = match cached {
        Some(s) => s,
        None => {
            let s = Arc::new(skeletons(spec, &a0, &mut budget)?);
            SKELETON_CACHE.lock().insert(key, s.clone());
            s
        }
    };
    let mut placements = Vec::new();
    for s in skeletons.iter() {
        placements.push(place_markings(spec, a, s, &mut budget)?);
    }
    let keep: Vec<bool> = placements.iter().map(|p| !p.is_empty()).collect();
    let skeletons: Vec<Skeleton> = skeletons.iter().zip(&keep).filter(|(_, &k)| k).map(|(s, _)| s.clone()).collect();
    placements.retain(|p| !p.is_empty());
    Ok(HEnumeration { spec: spec.clone(), a: a.clone(), skeletons, placements })
}

fn skeletons(spec: &HurwitzSpec, a0: &StableGraph, budget: &mut Budget) -> Result<Vec<Skeleton>> {
    let gr = &*spec.group;
    let n = gr.order();
    let ea = a0.num_edges();
    let edge_range: Vec<usize> = if ea == 0 { vec![0] } else { (1..=ea).collect() };
    let sub_reps = gr.subgroup_class_reps();
    // branch classes: (representative element, count)
    let mut classes: Vec<(usize, usize)> = Vec::new();
    for &h in &spec.xi {
        let c = gr.conj_class(h)[0];
        match classes.iter_mut().find(|x| x.0 == c) {
            Some(x) => x.1 += 1,
            None => classes.push((c, 1)),
        }
    }
    let mut found: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut out = Vec::new();
    for e in edge_range {
        for q in quotient_skeletons(spec.gprime, e) {
            let k = q.num_vertices();
            let need: usize = (0..k)
                .map(|u| {
                    let val = q.valence(u) as i64;
                    let g = q.genera[u] as i64;
                    (3 - 2 * g - val).max(0) as usize
                })
                .sum();
            if need > spec.b() {
                continue;
            }
            let mut choice = vec![0usize; k];
            loop {
                budget.spend(1)?;
                let stab: Vec<Vec<usize>> = choice.iter().map(|&c| sub_reps[c].clone()).collect();
                for (hq, s) in edge_choices(gr, &q, &stab, budget)? {
                    let ind = Induction { group: gr, q: &q, stab: stab.clone(), hq, s };
                    let Some(built) = ind.build() else { continue };
                    for genus in orbit_genera(spec, &q, &stab, &built, &classes) {
                        budget.spend(1)?;
                        let genera: Vec<u32> = built.genera_orbit.iter().map(|&u| genus[u]).collect();
                        let g0 = StableGraph::unchecked(genera, vec![], built.edges.clone());
                        if g0.total_genus() != spec.g {
                            continue;
                        }
                        let gg = GGraph {
                            graph: g0,
                            group: spec.group.clone(),
                            vact: built.vact.clone(),
                            hact: built.hact.clone(),
                            lact: vec![vec![]; n],
                            hstab: built.hstab.clone(),
                            lstab: vec![],
                        };
                        let eorb: Vec<usize> = (0..gg.graph.num_edges())
                            .map(|kk| (0..n).map(|t| gg.hact[t][2 * kk] / 2).min().unwrap())
                            .collect();
                        let norb = eorb.iter().collect::<BTreeSet<_>>().len();
                        let accept = |subset: &[usize]| subset.iter().map(|&x| eorb[x]).collect::<BTreeSet<_>>().len() == norb;
                        for f in graph::a_structures_filtered(&gg.graph, a0, true, &accept) {
                            budget.spend(1)?;
                            let key = structure_key(&gg, &f);
                            if let std::collections::hash_map::Entry::Vacant(v) = found.entry(key) {
                                v.insert(out.len());
                                out.push(Skeleton { gg: gg.clone(), f });
                            }
                        }
                    }
                }
                let mut i = 0;
                while i < k {
                    choice[i] += 1;
                    if choice[i] < sub_reps.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == k {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Enumerate half-edge monodromy and gluing elements for every Q-edge.
fn edge_choices(
    gr: &Group,
    q: &StableGraph,
    stab: &[Vec<usize>],
    budget: &mut Budget,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let ne = q.num_edges();
    let abelian = gr.is_abelian();
    let mut options: Vec<Vec<(usize, usize, usize)>> = Vec::new();
    for k in 0..ne {
        let (u0, u1) = q.edges[k];
        let mut opts = Vec::new();
        let mut seen = BTreeSet::new();
        for &h0 in &stab[u0] {
            for &h1 in &stab[u1] {
                for s in 0..gr.order() {
                    if gr.conj(s, h1) != gr.inv(h0) {
                        continue;
                    }
                    if abelian {
                        // s only matters up to the double coset G_{u0} s G_{u1}
                        let dc: BTreeSet<usize> =
                            stab[u0].iter().flat_map(|&x| stab[u1].iter().map(move |&y| gr.mul(gr.mul(x, s), y))).collect();
                        let rep = *dc.iter().next().unwrap();
                        if !seen.insert((h0, h1, rep)) {
                            continue;
                        }
                    }
                    opts.push((h0, h1, s));
                }
            }
        }
        if opts.is_empty() {
            return Ok(vec![]);
        }
        options.push(opts);
    }
    let mut idx = vec![0usize; ne];
    let mut out = Vec::new();
    loop {
        budget.spend(1)?;
        let mut hq = vec![0usize; 2 * ne];
        let mut s = vec![0usize; ne];
        for k in 0..ne {
            let (h0, h1, sk) = options[k][idx[k]];
            hq[2 * k] = h0;
            hq[2 * k + 1] = h1;
            s[k] = sk;
        }
        out.push((hq, s));
        let mut i = 0;
        while i < ne {
            idx[i] += 1;
            if idx[i] < options[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == ne {
            return Ok(out);
        }
    }
}

/// Possible genera of the Γ-vertices over each Q-vertex, from distributing
/// the branch classes.
fn orbit_genera(
    spec: &HurwitzSpec,
    q: &StableGraph,
    stab: &[Vec<usize>],
    built: &Induced,
    classes: &[(usize, usize)],
) -> BTreeSet<Vec<u32>> {
    let gr = &*spec.group;
    let k = q.num_vertices();
    let eligible: Vec<Vec<usize>> = classes
        .iter()
        .map(|&(c, _)| {
            let cc = gr.conj_class(c);
            (0..k).filter(|&u| cc.iter().any(|x| stab[u].contains(x))).collect()
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut counts = vec![vec![0usize; k]; classes.len()];
    fn rec(
        ci: usize,
        spec: &HurwitzSpec,
        q: &StableGraph,
        stab: &[Vec<usize>],
        built: &Induced,
        classes: &[(usize, usize)],
        eligible: &[Vec<usize>],
        counts: &mut Vec<Vec<usize>>,
        out: &mut BTreeSet<Vec<u32>>,
    ) {
        let gr = &*spec.group;
        let k = q.num_vertices();
        if ci == classes.len() {
            let mut genus = Vec::with_capacity(k);
            for u in 0..k {
                let m = stab[u].len() as i64;
                let mut ram = built.he_ram[u];
                let mut legs = built.he_count[u] as i64;
                for (c, &(h, _)) in classes.iter().enumerate() {
                    let o = gr.elem_order(h) as i64;
                    ram += counts[c][u] as i64 * (m - m / o);
                    legs += counts[c][u] as i64 * (m / o);
                }
                let twice = m * (2 * q.genera[u] as i64 - 2) + ram + 2;
                if twice < 0 || twice % 2 != 0 {
                    return;
                }
                let g = twice / 2;
                if 2 * g - 2 + legs <= 0 {
                    return;
                }
                genus.push(g as u32);
            }
            out.insert(genus);
            return;
        }
        let el = &eligible[ci];
        if el.is_empty() {
            return;
        }
        for comp in compositions(classes[ci].1, el.len()) {
            for (j, &u) in el.iter().enumerate() {
                counts[ci][u] = comp[j];
            }
            rec(ci + 1, spec, q, stab, built, classes, eligible, counts, out);
            for &u in el {
                counts[ci][u] = 0;
            }
        }
    }
    rec(0, spec, q, stab, built, classes, &eligible, &mut counts, &mut out);
    out
}

/// Enumerate placements of the markings on a skeleton.
fn place_markings(spec: &HurwitzSpec, a: &StableGraph, s: &Skeleton, budget: &mut Budget) -> Result<Vec<Placement>> {
    let gr = &*spec.group;
    let n = gr.order();
    let gg = &s.gg;
    let nv = gg.graph.num_vertices();
    let layout = spec.marking_layout();
    let kept: HashMap<u32, usize> = a.legs.iter().copied().collect();
    // vertex orbits
    let mut orbit = vec![usize::MAX; nv];
    let mut reps = Vec::new();
    for v in 0..nv {
        if orbit[v] == usize::MAX {
            for w in gg.vertex_orbit(v) {
                orbit[w] = reps.len();
            }
            reps.push(v);
        }
    }
    let no = reps.len();
    let stabs: Vec<Vec<usize>> = reps.iter().map(|&v| gg.vertex_stabilizer(v)).collect();
    let locals: Vec<LocalDatum> = reps.iter().map(|&v| gg.local_datum(v)).collect();
    let he_ram: Vec<i64> = (0..no)
        .map(|u| {
            let m = stabs[u].len();
            locals[u].xi.iter().map(|&h| (m - m / gr.elem_order(h)) as i64).sum()
        })
        .collect();
    let he_count: Vec<usize> = reps.iter().map(|&v| gg.graph.valence(v)).collect();
    let q_edges = {
        let mut orbs = BTreeSet::new();
        for k in 0..gg.graph.num_edges() {
            orbs.insert((0..n).map(|t| gg.hact[t][2 * k] / 2).min().unwrap());
        }
        orbs.len() as i64
    };
    let h1q = q_edges - no as i64 + 1;
    let free_genus = spec.gprime as i64 - h1q;
    if free_genus < 0 {
        return Ok(vec![]);
    }
    // candidate vertices per branch point
    let mut cand: Vec<Vec<usize>> = Vec::new();
    let mut has_kept = vec![false; spec.b()];
    for (i, &h) in spec.xi.iter().enumerate() {
        let ms: Vec<&covers::Marking> = layout.iter().filter(|m| m.branch == i).collect();
        let mut c = Vec::new();
        for w in 0..nv {
            if !gg.vertex_stabilizer(w).contains(&h) {
                continue;
            }
            let ok = ms.iter().all(|m| match kept.get(&m.label) {
                Some(&av) => s.f.alpha[gg.vact[m.coset][w]] == av,
                None => true,
            });
            if ok {
                c.push(w);
            }
        }
        for m in &ms {
            if kept.contains_key(&m.label) {
                has_kept[i] = true;
            }
        }
        if c.is_empty() {
            return Ok(vec![]);
        }
        cand.push(c);
    }
    // groups of interchangeable branch points
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..spec.b() {
        if !has_kept[i] {
            if let Some(g) = groups.iter_mut().find(|g| !has_kept[g[0]] && spec.xi[g[0]] == spec.xi[i]) {
                g.push(i);
                continue;
            }
        }
        groups.push(vec![i]);
    }
    // per candidate vertex: (orbit, ramification, legs per vertex, local element)
    let contrib = |i: usize, w: usize| -> (usize, i64, usize, usize) {
        let u = orbit[w];
        let m = stabs[u].len();
        let h = spec.xi[i];
        let o = gr.elem_order(h);
        let t = (0..n).find(|&t| gg.vact[t][reps[u]] == w).unwrap();
        (u, (m - m / o) as i64, m / o, gr.conj(gr.inv(t), h))
    };
    let limit: Vec<i64> = (0..no)
        .map(|u| 2 * gg.graph.genera[reps[u]] as i64 - 2 - he_ram[u] + 2 * stabs[u].len() as i64)
        .collect();
    struct State {
        ram: Vec<i64>,
        legs: Vec<usize>,
        xi: Vec<Vec<usize>>,
        vertices: Vec<usize>,
        counts: Vec<Vec<(usize, usize)>>,
    }
    let mut st = State {
        ram: vec![0; no],
        legs: vec![0; no],
        xi: vec![vec![]; no],
        vertices: vec![usize::MAX; spec.b()],
        counts: vec![vec![]; groups.len()],
    };
    let mut out = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        gi: usize,
        groups: &[Vec<usize>],
        cand: &[Vec<usize>],
        contrib: &dyn Fn(usize, usize) -> (usize, i64, usize, usize),
        limit: &[i64],
        st: &mut State,
        finish: &mut dyn FnMut(&State) -> Result<()>,
        budget: &mut Budget,
    ) -> Result<()> {
        budget.spend(1)?;
        if gi == groups.len() {
            return finish(st);
        }
        let members = &groups[gi];
        let cs = &cand[members[0]];
        let nm = members.len();
        for comp in compositions(nm, cs.len()) {
            let mut ok = true;
            let mut applied = Vec::new();
            let mut next_member = 0;
            let mut counts = Vec::new();
            for (j, &c) in comp.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let w = cs[j];
                counts.push((w, c));
                for _ in 0..c {
                    let i = members[next_member];
                    next_member += 1;
                    let (u, r, l, x) = contrib(i, w);
                    st.ram[u] += r;
                    st.legs[u] += l;
                    st.xi[u].push(x);
                    st.vertices[i] = w;
                    applied.push(u);
                    if st.ram[u] > limit[u] {
                        ok = false;
                    }
                }
            }
            if ok {
                st.counts[gi] = counts;
                rec(gi + 1, groups, cand, contrib, limit, st, finish, budget)?;
            }
            for (idx, &u) in applied.iter().enumerate().rev() {
                let i = members[idx];
                let (_, r, l, _) = contrib(i, st.vertices[i]);
                st.ram[u] -= r;
                st.legs[u] -= l;
                st.xi[u].pop();
            }
        }
        Ok(())
    }
    let mut finish = |st: &State| -> Result<()> {
        let mut total = 0i64;
        let mut gprimes = Vec::with_capacity(no);
        for u in 0..no {
            let m = stabs[u].len() as i64;
            let slack = limit[u] - st.ram[u];
            if slack < 0 || slack % (2 * m) != 0 {
                return Ok(());
            }
            let gp = slack / (2 * m);
            let g = gg.graph.genera[reps[u]] as i64;
            if 2 * g - 2 + he_count[u] as i64 + st.legs[u] as i64 <= 0 {
                return Ok(());
            }
            total += gp;
            gprimes.push(gp as u32);
        }
        if total != free_genus {
            return Ok(());
        }
        let mut degree = Q::one();
        for u in 0..no {
            let mut xi = locals[u].xi.clone();
            xi.extend(st.xi[u].iter().copied());
            degree *= local_degree(gr, &stabs[u], gprimes[u], &xi)?;
            if degree.is_zero() {
                return Ok(());
            }
        }
        let mut multiplicity = BigInt::one();
        let mut gs = Vec::new();
        for (gi, members) in groups.iter().enumerate() {
            if members.len() > 1 {
                let mut m = crate::rational::factorial(members.len() as u32);
                for &(_, c) in &st.counts[gi] {
                    m /= crate::rational::factorial(c as u32);
                }
                multiplicity *= m;
                gs.push((members.clone(), st.counts[gi].clone()));
            }
        }
        out.push(Placement { vertices: st.vertices.clone(), multiplicity, degree, groups: gs });
        Ok(())
    };
    rec(0, &groups, &cand, &contrib, &limit, &mut st, &mut finish, budget)?;
    Ok(out)
}
