//! Decorated stratum classes on M̄_{g,n} and the ring operations on them:
//! products, boundary pullback and pushforward, forgetful pullback and
//! pushforward, and top-degree evaluation.
//!
//! A term `(A, θ)` stands for the unnormalized pushforward `ξ_{A*}θ`.

use crate::error::{Error, Result};
use crate::graph::{self, canonicalize, GenericPairs, GraphMorphism, RawGraph, StableGraph};
use crate::rational::{fmt_q, parse_q, Q};
use crate::witten;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Leg labels at least this large name the half-edges of a base graph in
/// the factors of a Künneth class: half-edge `h` becomes `NODE_LABEL + h`.
pub const NODE_LABEL: u32 = 1_000_000;

/// A stable graph with a κ-monomial per vertex (as a multiset of indices)
/// and a ψ-exponent per flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub graph: StableGraph,
    pub kappa: Vec<Vec<u32>>,
    pub psi: Vec<u32>,
}

impl Term {
    pub fn bare(graph: StableGraph) -> Term {
        let (nv, nf) = (graph.num_vertices(), graph.num_flags());
        Term { graph, kappa: vec![vec![]; nv], psi: vec![0; nf] }
    }

    pub fn degree(&self) -> u32 {
        self.graph.num_edges() as u32
            + self.psi.iter().sum::<u32>()
            + self.kappa.iter().flatten().sum::<u32>()
    }

    /// Whether some vertex carries more ψ and κ degree than its dimension,
    /// which makes the term zero.
    pub fn vanishes_by_dimension(&self) -> bool {
        (0..self.graph.num_vertices()).any(|v| {
            let d: u32 = self.graph.flags_at(v).iter().map(|&f| self.psi[f]).sum::<u32>() + self.kappa[v].iter().sum::<u32>();
            d as i64 > self.graph.vertex_dim(v)
        })
    }

    pub fn is_undecorated(&self) -> bool {
        self.psi.iter().all(|&x| x == 0) && self.kappa.iter().all(|k| k.is_empty())
    }

    /// Canonical representative together with its isomorphism key.
    pub fn canonical(&self) -> (Term, Vec<u32>) {
        let mut kappa = self.kappa.clone();
        for k in kappa.iter_mut() {
            k.sort_unstable();
        }
        let c = canonicalize(&self.graph, &kappa, &self.psi);
        (Term { graph: c.graph, kappa: c.vdata, psi: c.fw }, c.key)
    }

    /// Number of automorphisms of the decorated graph.
    pub fn decorated_aut(&self) -> u64 {
        let mut kappa = self.kappa.clone();
        for k in kappa.iter_mut() {
            k.sort_unstable();
        }
        canonicalize(&self.graph, &kappa, &self.psi).aut
    }

    /// The same term relabeled onto the canonical form of its bare graph.
    pub fn on_canonical_graph(&self) -> Term {
        let (nv, nf) = (self.graph.num_vertices(), self.graph.num_flags());
        let c = canonicalize(&self.graph, &vec![vec![]; nv], &vec![0; nf]);
        let mut kappa = vec![vec![]; nv];
        for v in 0..nv {
            kappa[c.vmap[v]] = self.kappa[v].clone();
        }
        let mut psi = vec![0; nf];
        for f in 0..nf {
            psi[c.fmap[f]] = self.psi[f];
        }
        Term { graph: c.graph, kappa, psi }
    }

    /// Product of vertex integrals; zero when some vertex is not of top
    /// degree.
    pub fn integral(&self) -> Result<Q> {
        let mut val = Q::one();
        for v in 0..self.graph.num_vertices() {
            let flags = self.graph.flags_at(v);
            let psi: Vec<u32> = flags.iter().map(|&f| self.psi[f]).collect();
            let deg = psi.iter().sum::<u32>() as i64 + self.kappa[v].iter().sum::<u32>() as i64;
            if deg != self.graph.vertex_dim(v) {
                return Ok(Q::zero());
            }
            val *= witten::vertex_integral(self.graph.genera[v], flags.len(), &psi, &self.kappa[v])?;
        }
        Ok(val)
    }

    pub fn relabel_legs(&self, map: &dyn Fn(u32) -> u32) -> Term {
        Term { graph: self.graph.relabel_legs(map), kappa: self.kappa.clone(), psi: self.psi.clone() }
    }
}

// ---------------------------------------------------------------------------
// Term construction

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FlagRef {
    Half(usize, usize),
    Leg(usize),
}

#[derive(Clone, Debug, Default)]
struct Builder {
    genera: Vec<u32>,
    kappa: Vec<Vec<u32>>,
    /// `[(vertex, ψ), (vertex, ψ)]`
    edges: Vec<[(usize, u32); 2]>,
    /// `(label, vertex, ψ)`
    legs: Vec<(u32, usize, u32)>,
}

impl Builder {
    fn from_term(t: &Term) -> Builder {
        let nh = t.graph.num_half_edges();
        Builder {
            genera: t.graph.genera.clone(),
            kappa: t.kappa.clone(),
            edges: t
                .graph
                .edges
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| [(a, t.psi[2 * k]), (b, t.psi[2 * k + 1])])
                .collect(),
            legs: t.graph.legs.iter().enumerate().map(|(i, &(l, v))| (l, v, t.psi[nh + i])).collect(),
        }
    }

    fn add_vertex(&mut self, g: u32) -> usize {
        self.genera.push(g);
        self.kappa.push(vec![]);
        self.genera.len() - 1
    }

    fn flags_at(&self, v: usize) -> Vec<FlagRef> {
        let mut out = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            for s in 0..2 {
                if e[s].0 == v {
                    out.push(FlagRef::Half(k, s));
                }
            }
        }
        for (i, l) in self.legs.iter().enumerate() {
            if l.1 == v {
                out.push(FlagRef::Leg(i));
            }
        }
        out
    }

    fn psi(&self, f: FlagRef) -> u32 {
        match f {
            FlagRef::Half(k, s) => self.edges[k][s].1,
            FlagRef::Leg(i) => self.legs[i].2,
        }
    }

    fn set(&mut self, f: FlagRef, vertex: usize, psi: u32) {
        match f {
            FlagRef::Half(k, s) => self.edges[k][s] = (vertex, psi),
            FlagRef::Leg(i) => {
                self.legs[i].1 = vertex;
                self.legs[i].2 = psi;
            }
        }
    }

    fn build(self) -> Term {
        let graph = StableGraph::unchecked(
            self.genera,
            self.legs.iter().map(|&(l, v, _)| (l, v)).collect(),
            self.edges.iter().map(|e| (e[0].0, e[1].0)).collect(),
        );
        let mut psi: Vec<u32> = self.edges.iter().flat_map(|e| [e[0].1, e[1].1]).collect();
        psi.extend(self.legs.iter().map(|l| l.2));
        Term { graph, kappa: self.kappa, psi }
    }

    /// Remove vertex `v` (which must carry no flags) and renumber.
    fn remove_vertex(&mut self, v: usize) {
        self.genera.remove(v);
        self.kappa.remove(v);
        let fix = |x: &mut usize| {
            if *x > v {
                *x -= 1
            }
        };
        for e in self.edges.iter_mut() {
            fix(&mut e[0].0);
            fix(&mut e[1].0);
        }
        for l in self.legs.iter_mut() {
            fix(&mut l.1);
        }
    }
}

// ---------------------------------------------------------------------------
// Decoration polynomials on a fixed graph

#[derive(Clone, Debug)]
pub(crate) struct Dec {
    pub(crate) kappa: Vec<Vec<u32>>,
    pub(crate) psi: Vec<u32>,
}

pub(crate) type Poly = Vec<(Q, Dec)>;

pub(crate) fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, da) in a {
        for (cb, db) in b {
            let kappa = da.kappa.iter().zip(&db.kappa).map(|(x, y)| x.iter().chain(y).copied().collect()).collect();
            let psi = da.psi.iter().zip(&db.psi).map(|(x, y)| x + y).collect();
            out.push((ca * cb, Dec { kappa, psi }));
        }
    }
    out
}

pub(crate) fn poly_one(g: &StableGraph) -> Poly {
    vec![(Q::one(), Dec { kappa: vec![vec![]; g.num_vertices()], psi: vec![0; g.num_flags()] })]
}

/// `f^*θ` for an A-structure `f` on `gamma`: κ at a vertex of A becomes the
/// sum over its preimages, ψ moves along the flag correspondence.
pub(crate) fn pull_decoration(gamma: &StableGraph, a: &StableGraph, f: &GraphMorphism, t: &Term) -> Poly {
    let nh = a.num_half_edges();
    let mut psi = vec![0u32; gamma.num_flags()];
    for x in 0..a.num_flags() {
        let e = t.psi[x];
        if e == 0 {
            continue;
        }
        let y = if x < nh { f.beta[x] } else { gamma.leg_flag(a.legs[x - nh].0).expect("leg present") };
        psi[y] += e;
    }
    let mut poly = vec![(Q::one(), Dec { kappa: vec![vec![]; gamma.num_vertices()], psi })];
    for v in 0..a.num_vertices() {
        let pre: Vec<usize> = (0..gamma.num_vertices()).filter(|&w| f.alpha[w] == v).collect();
        for &k in &t.kappa[v] {
            let mut next = Vec::with_capacity(poly.len() * pre.len());
            for (c, d) in &poly {
                for &w in &pre {
                    let mut d2 = d.clone();
                    d2.kappa[w].push(k);
                    next.push((c.clone(), d2));
                }
            }
            poly = next;
        }
    }
    poly
}

/// `∏ (−ψ_h − ψ_{h'})` over edges in the image of both structures.
fn excess(gamma: &StableGraph, f: &GraphMorphism, g: &GraphMorphism) -> Poly {
    let ig = g.image_edges();
    let mut poly = poly_one(gamma);
    for k in f.image_edges() {
        if ig.binary_search(&k).is_ok() {
            let mut fac = Vec::new();
            for h in [2 * k, 2 * k + 1] {
                let mut d = poly_one(gamma).pop().unwrap().1;
                d.psi[h] = 1;
                fac.push((-Q::one(), d));
            }
            poly = poly_mul(&poly, &fac);
        }
    }
    poly
}

type PairKey = (StableGraph, StableGraph);
static PAIR_CACHE: Lazy<Mutex<HashMap<PairKey, Arc<Vec<GenericPairs>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn cached_pairs(a: &StableGraph, b: &StableGraph) -> Result<Arc<Vec<GenericPairs>>> {
    let key = (a.clone(), b.clone());
    if let Some(v) = PAIR_CACHE.lock().get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(graph::generic_pairs(a, b)?);
    PAIR_CACHE.lock().insert(key, v.clone());
    Ok(v)
}

fn product_terms(x: &Term, y: &Term) -> Result<Vec<(Term, Q)>> {
    let (x, y) = (x.on_canonical_graph(), y.on_canonical_graph());
    let gps = cached_pairs(&x.graph, &y.graph)?;
    let mut out = Vec::new();
    for gp in gps.iter() {
        let w = Q::new(BigInt::one(), BigInt::from(gp.aut));
        for (f, g) in &gp.pairs {
            let p = poly_mul(&pull_decoration(&gp.graph, &x.graph, f, &x), &pull_decoration(&gp.graph, &y.graph, g, &y));
            for (c, d) in poly_mul(&p, &excess(&gp.graph, f, g)) {
                out.push((Term { graph: gp.graph.clone(), kappa: d.kappa, psi: d.psi }, c * &w));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Classes

/// A rational combination of decorated strata on M̄_{g,n}, with legs
/// carrying the labels `labels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TautClass {
    pub g: u32,
    pub labels: Vec<u32>,
    terms: BTreeMap<Vec<u32>, (Term, Q)>,
}

impl TautClass {
    pub fn zero(g: u32, labels: &[u32]) -> TautClass {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        TautClass { g, labels, terms: BTreeMap::new() }
    }

    /// Space with legs `1..=n`.
    pub fn zero_n(g: u32, n: u32) -> TautClass {
        Self::zero(g, &(1..=n).collect::<Vec<_>>())
    }

    pub fn fundamental(g: u32, labels: &[u32]) -> TautClass {
        let mut c = Self::zero(g, labels);
        let t = Term::bare(StableGraph::smooth(g, &c.labels));
        c.add_term(&t, Q::one());
        c
    }

    /// The unnormalized stratum `ξ_{A*}1`.
    pub fn stratum(a: &StableGraph) -> TautClass {
        Self::from_term(&Term::bare(a.clone()), Q::one())
    }

    /// The stratum class `ξ_{A*}1 / |Aut A|`.
    pub fn normalized_stratum(a: &StableGraph) -> TautClass {
        Self::from_term(&Term::bare(a.clone()), Q::new(BigInt::one(), BigInt::from(graph::automorphism_count(a))))
    }

    pub fn from_term(t: &Term, c: Q) -> TautClass {
        let mut x = Self::zero(t.graph.total_genus(), &t.graph.labels());
        x.add_term(t, c);
        x
    }

    pub fn psi(g: u32, labels: &[u32], label: u32, exp: u32) -> TautClass {
        let mut t = Term::bare(StableGraph::smooth(g, labels));
        let f = t.graph.leg_flag(label).expect("label present");
        t.psi[f] = exp;
        Self::from_term(&t, Q::one())
    }

    pub fn kappa(g: u32, labels: &[u32], index: u32) -> TautClass {
        let mut t = Term::bare(StableGraph::smooth(g, labels));
        t.kappa[0].push(index);
        Self::from_term(&t, Q::one())
    }

    pub fn n(&self) -> u32 {
        self.labels.len() as u32
    }

    pub fn dim(&self) -> i64 {
        3 * self.g as i64 - 3 + self.labels.len() as i64
    }

    pub fn add_term(&mut self, t: &Term, c: Q) {
        if c.is_zero() || t.vanishes_by_dimension() {
            return;
        }
        let (ct, key) = t.canonical();
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().1 += c;
                if o.get().1.is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert((ct, c));
            }
        }
    }

    fn check_space(&self, other: &TautClass) -> Result<()> {
        if self.g != other.g || self.labels != other.labels {
            return Err(Error::Space(format!(
                "(g={}, legs {:?}) vs (g={}, legs {:?})",
                self.g, self.labels, other.g, other.labels
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, other: &TautClass) -> Result<()> {
        self.check_space(other)?;
        for (t, c) in other.terms.values() {
            self.add_term(t, c.clone());
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &TautClass, s: &Q) -> Result<()> {
        self.check_space(other)?;
        for (t, c) in other.terms.values() {
            self.add_term(t, c * s);
        }
        Ok(())
    }

    pub fn scaled(&self, s: &Q) -> TautClass {
        let mut out = Self::zero(self.g, &self.labels);
        for (t, c) in self.terms.values() {
            out.add_term(t, c * s);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Q)> {
        self.terms.values().map(|(t, c)| (t, c))
    }

    pub fn keys(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.terms.keys()
    }

    /// The common degree of all terms, if homogeneous and nonzero.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.values().map(|(t, _)| t.degree());
        let d = it.next()?;
        if it.all(|e| e == d) { Some(d) } else { None }
    }

    pub fn homogeneous_part(&self, d: u32) -> TautClass {
        let mut out = Self::zero(self.g, &self.labels);
        for (t, c) in self.terms.values() {
            if t.degree() == d {
                out.add_term(t, c.clone());
            }
        }
        out
    }

    pub fn product(&self, other: &TautClass) -> Result<TautClass> {
        self.check_space(other)?;
        let pairs: Vec<(&(Term, Q), &(Term, Q))> =
            self.terms.values().flat_map(|a| other.terms.values().map(move |b| (a, b))).collect();
        let parts: Vec<Result<Vec<(Term, Q)>>> = pairs
            .par_iter()
            .map(|((ta, ca), (tb, cb))| {
                let dim = self.dim();
                if (ta.degree() + tb.degree()) as i64 > dim {
                    return Ok(vec![]);
                }
                if ta.graph.num_edges() == 0 && ta.is_undecorated() {
                    return Ok(vec![(tb.clone(), ca * cb)]);
                }
                if tb.graph.num_edges() == 0 && tb.is_undecorated() {
                    return Ok(vec![(ta.clone(), ca * cb)]);
                }
                let c = ca * cb;
                Ok(product_terms(ta, tb)?.into_iter().map(|(t, x)| (t, x * &c)).collect())
            })
            .collect();
        let mut out = Self::zero(self.g, &self.labels);
        for p in parts {
            for (t, c) in p? {
                out.add_term(&t, c);
            }
        }
        Ok(out)
    }

    /// Intersection number of a class of top degree.
    pub fn evaluate(&self) -> Result<Q> {
        let dim = self.dim();
        let mut total = Q::zero();
        for (t, c) in self.terms.values() {
            let d = t.degree() as i64;
            if d != dim {
                return Err(Error::NotTopDegree { expected: dim.max(0) as u32, found: d as u32 });
            }
            total += c * t.integral()?;
        }
        Ok(total)
    }

    /// `ξ_A^* x` as a Künneth class on M̄_A.
    pub fn pullback_boundary(&self, a: &StableGraph) -> Result<KunnethClass> {
        if a.total_genus() != self.g || a.labels() != self.labels {
            return Err(Error::Space("graph does not live on the class's moduli space".into()));
        }
        let mut out = KunnethClass::zero(a);
        for (t, c) in self.terms.values() {
            let y = t.on_canonical_graph();
            let gps = cached_pairs(a, &y.graph)?;
            for gp in gps.iter() {
                let w = Q::new(BigInt::one(), BigInt::from(gp.aut)) * c;
                for (f, g) in &gp.pairs {
                    let p = poly_mul(&pull_decoration(&gp.graph, &y.graph, g, &y), &excess(&gp.graph, f, g));
                    for (pc, d) in p {
                        let whole = Term { graph: gp.graph.clone(), kappa: d.kappa, psi: d.psi };
                        out.add_term(split_along(&whole, a, f), pc * &w);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pullback along the map forgetting the new leg `label`.
    pub fn pullback_forgetful(&self, label: u32) -> Result<TautClass> {
        if self.labels.contains(&label) {
            return Err(Error::Precondition(format!("label {label} already present")));
        }
        let mut labels = self.labels.clone();
        labels.push(label);
        let mut out = Self::zero(self.g, &labels);
        for (t, c) in self.terms.values() {
            for (nt, nc) in pull_forget_term(t, label) {
                out.add_term(&nt, nc * c);
            }
        }
        Ok(out)
    }

    /// Pushforward along the map forgetting the leg `label`.
    pub fn pushforward_forgetful(&self, label: u32) -> Result<TautClass> {
        if !self.labels.contains(&label) {
            return Err(Error::Precondition(format!("label {label} not present")));
        }
        let labels: Vec<u32> = self.labels.iter().copied().filter(|&l| l != label).collect();
        let n = labels.len() as u32;
        if 2 * self.g as i64 - 2 + n as i64 <= 0 {
            return Err(Error::Unstable { g: self.g, n });
        }
        let mut out = Self::zero(self.g, &labels);
        for (t, c) in self.terms.values() {
            for (nt, nc) in push_forget_term(t, label) {
                out.add_term(&nt, nc * c);
            }
        }
        Ok(out)
    }

    pub fn relabel_legs(&self, map: &dyn Fn(u32) -> u32) -> TautClass {
        let labels: Vec<u32> = self.labels.iter().map(|&l| map(l)).collect();
        let mut out = Self::zero(self.g, &labels);
        for (t, c) in self.terms.values() {
            out.add_term(&t.relabel_legs(map), c.clone());
        }
        out
    }

    /// Sum over all permutations of the labels in `subset`.
    pub fn symmetrize(&self, subset: &[u32]) -> Result<TautClass> {
        for l in subset {
            if !self.labels.contains(l) {
                return Err(Error::Precondition(format!("label {l} not present")));
            }
        }
        let mut out = Self::zero(self.g, &self.labels);
        for perm in graph::permutations(subset.len()) {
            let map = |l: u32| match subset.iter().position(|&x| x == l) {
                Some(i) => subset[perm[i]],
                None => l,
            };
            out.add(&self.relabel_legs(&map))?;
        }
        Ok(out)
    }

    /// `λ_1 = (κ_1 + δ_irr + Σ δ_i)/12` on M̄_g.
    pub fn lambda1(g: u32) -> Result<TautClass> {
        if g < 2 {
            return Err(Error::Precondition("λ_1 is provided for g ≥ 2 only".into()));
        }
        let mut x = Self::kappa(g, &[], 1);
        x.add(&Self::normalized_stratum(&StableGraph::unchecked(vec![g - 1], vec![], vec![(0, 0)])))?;
        for i in 1..=g / 2 {
            x.add(&Self::normalized_stratum(&StableGraph::unchecked(vec![i, g - i], vec![], vec![(0, 1)])))?;
        }
        Ok(x.scaled(&Q::new(BigInt::one(), BigInt::from(12))))
    }

    pub fn to_json(&self, normalized: bool) -> serde_json::Value {
        let terms: Vec<RawTerm> = self
            .terms
            .values()
            .map(|(t, c)| {
                let coeff = if normalized { c * Q::from_integer(BigInt::from(graph::automorphism_count(&t.graph))) } else { c.clone() };
                RawTerm::from_term(t, &coeff)
            })
            .collect();
        serde_json::to_value(RawClass { g: self.g, n: self.n(), normalized, terms }).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TautClass> {
        let raw: RawClass = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let labels: Vec<u32> = (1..=raw.n).collect();
        let mut out = Self::zero(raw.g, &labels);
        for rt in &raw.terms {
            let (t, mut c) = rt.to_term()?;
            if t.graph.total_genus() != raw.g || t.graph.labels() != labels {
                return Err(Error::Space(format!("term graph does not live on M̄_{{{},{}}}", raw.g, raw.n)));
            }
            if raw.normalized {
                c /= Q::from_integer(BigInt::from(graph::automorphism_count(&t.graph)));
            }
            out.add_term(&t, c);
        }
        Ok(out)
    }

    /// Human-readable listing in normalized form.
    pub fn pretty(&self) -> String {
        let mut s = String::new();
        for (t, c) in self.terms.values() {
            let aut = graph::automorphism_count(&t.graph);
            let nc = c * Q::from_integer(BigInt::from(aut));
            s.push_str(&format!("{} · {}\n", fmt_q(&nc), describe_term(t)));
        }
        if s.is_empty() {
            s.push_str("0\n");
        }
        s
    }
}

fn describe_term(t: &Term) -> String {
    let g = &t.graph;
    let mut parts = vec![format!("genera {:?}", g.genera)];
    if !g.edges.is_empty() {
        parts.push(format!("edges {:?}", g.edges));
    }
    if !g.legs.is_empty() {
        parts.push(format!("legs {:?}", g.legs));
    }
    for (v, k) in t.kappa.iter().enumerate() {
        if !k.is_empty() {
            parts.push(format!("κ{k:?}@v{v}"));
        }
    }
    let nh = g.num_half_edges();
    for (f, &e) in t.psi.iter().enumerate() {
        if e > 0 {
            if f < nh {
                parts.push(format!("ψ^{e}@h{f}"));
            } else {
                parts.push(format!("ψ^{e}@leg{}", g.legs[f - nh].0));
            }
        }
    }
    format!("[{}]", parts.join(", "))
}

/// Cut `whole` (a term on Γ) along the image of the A-structure `f` into one
/// factor per vertex of A.
fn split_along(whole: &Term, a: &StableGraph, f: &GraphMorphism) -> Vec<Term> {
    let gamma = &whole.graph;
    let nh = gamma.num_half_edges();
    let mut is_image = vec![false; gamma.num_edges()];
    let mut node_label: HashMap<usize, u32> = HashMap::new();
    for (h, &gh) in f.beta.iter().enumerate() {
        is_image[gh / 2] = true;
        node_label.insert(gh, NODE_LABEL + h as u32);
    }
    (0..a.num_vertices())
        .map(|v| {
            let ws: Vec<usize> = (0..gamma.num_vertices()).filter(|&w| f.alpha[w] == v).collect();
            let local = |w: usize| ws.iter().position(|&x| x == w).unwrap();
            let mut b = Builder {
                genera: ws.iter().map(|&w| gamma.genera[w]).collect(),
                kappa: ws.iter().map(|&w| whole.kappa[w].clone()).collect(),
                ..Default::default()
            };
            for (k, &(x, y)) in gamma.edges.iter().enumerate() {
                if is_image[k] {
                    for (s, z) in [(0, x), (1, y)] {
                        if f.alpha[z] == v {
                            b.legs.push((node_label[&(2 * k + s)], local(z), whole.psi[2 * k + s]));
                        }
                    }
                } else if f.alpha[x] == v {
                    b.edges.push([(local(x), whole.psi[2 * k]), (local(y), whole.psi[2 * k + 1])]);
                }
            }
            for (i, &(l, w)) in gamma.legs.iter().enumerate() {
                if f.alpha[w] == v {
                    b.legs.push((l, local(w), whole.psi[nh + i]));
                }
            }
            b.build()
        })
        .collect()
}

/// Expand `∏_j (κ_{b_j} − ψ^{b_j})` at one vertex: returns
/// `(sign, ψ exponent, remaining κ)` for every subset.
fn kappa_pullback_expansion(kappa: &[u32]) -> Vec<(bool, u32, Vec<u32>)> {
    let m = kappa.len();
    (0u64..(1u64 << m))
        .map(|mask| {
            let mut e = 0;
            let mut rest = Vec::new();
            for (j, &b) in kappa.iter().enumerate() {
                if mask >> j & 1 == 1 { e += b } else { rest.push(b) }
            }
            (mask.count_ones() % 2 == 1, e, rest)
        })
        .collect()
}

fn pull_forget_term(t: &Term, label: u32) -> Vec<(Term, Q)> {
    let mut out = Vec::new();
    let base = Builder::from_term(t);
    for v in 0..t.graph.num_vertices() {
        for (neg, e, rest) in kappa_pullback_expansion(&t.kappa[v]) {
            let mut b = base.clone();
            b.kappa[v] = rest;
            b.legs.push((label, v, e));
            out.push((b.build(), if neg { -Q::one() } else { Q::one() }));
        }
        for fl in base.flags_at(v) {
            let a = base.psi(fl);
            if a == 0 {
                continue;
            }
            let mut b = base.clone();
            let u = b.add_vertex(0);
            b.set(fl, u, 0);
            b.edges.push([(v, a - 1), (u, 0)]);
            b.legs.push((label, u, 0));
            out.push((b.build(), -Q::one()));
        }
    }
    out
}

fn push_forget_term(t: &Term, label: u32) -> Vec<(Term, Q)> {
    let mut base = Builder::from_term(t);
    let li = base.legs.iter().position(|l| l.0 == label).expect("label present");
    let (_, v, c) = base.legs.remove(li);
    let gv = base.genera[v];
    let flags = base.flags_at(v);
    let mut out = Vec::new();
    if 2 * gv as i64 - 2 + flags.len() as i64 > 0 {
        let k0 = Q::from_integer(BigInt::from(2 * gv as i64 - 2 + flags.len() as i64));
        for (_, e, rest) in kappa_pullback_expansion(&t.kappa[v]) {
            let m = c + e;
            if m == 0 {
                continue;
            }
            let mut b = base.clone();
            b.kappa[v] = rest;
            if m == 1 {
                out.push((b.build(), k0.clone()));
            } else {
                b.kappa[v].push(m - 1);
                out.push((b.build(), Q::one()));
            }
        }
        if c == 0 {
            for fl in flags {
                let a = base.psi(fl);
                if a == 0 {
                    continue;
                }
                let mut b = base.clone();
                b.set(fl, v, a - 1);
                out.push((b.build(), Q::one()));
            }
        }
        return out;
    }
    // v becomes unstable: genus 0 with two remaining flags
    if c > 0 || !t.kappa[v].is_empty() || flags.iter().any(|&f| base.psi(f) > 0) {
        return out;
    }
    let (x, y) = (flags[0], flags[1]);
    let mut b = base;
    match (x, y) {
        (FlagRef::Half(k1, s1), FlagRef::Half(k2, s2)) => {
            if k1 == k2 {
                return out;
            }
            let p1 = b.edges[k1][1 - s1];
            let p2 = b.edges[k2][1 - s2];
            let (hi, lo) = if k1 > k2 { (k1, k2) } else { (k2, k1) };
            b.edges.remove(hi);
            b.edges.remove(lo);
            b.edges.push([p1, p2]);
        }
        (FlagRef::Half(k, s), FlagRef::Leg(i)) | (FlagRef::Leg(i), FlagRef::Half(k, s)) => {
            let p = b.edges[k][1 - s];
            b.legs[i].1 = p.0;
            b.legs[i].2 = p.1;
            b.edges.remove(k);
        }
        (FlagRef::Leg(_), FlagRef::Leg(_)) => return out,
    }
    b.remove_vertex(v);
    out.push((b.build(), Q::one()));
    out
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawTerm {
    pub coeff: String,
    pub graph: RawGraph,
    /// `[vertex, [[index, exponent], ...]]`
    #[serde(default)]
    pub kappa: Vec<(usize, Vec<(u32, u32)>)>,
    /// `[flag, exponent]` with flag `"L<label>"` for a leg and `"H<id>"` for
    /// a half-edge id of `graph`.
    #[serde(default)]
    pub psi: Vec<(String, u32)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawClass {
    pub g: u32,
    pub n: u32,
    #[serde(default)]
    pub normalized: bool,
    pub terms: Vec<RawTerm>,
}

impl RawTerm {
    pub fn from_term(t: &Term, c: &Q) -> RawTerm {
        let nh = t.graph.num_half_edges();
        let kappa = t
            .kappa
            .iter()
            .enumerate()
            .filter(|(_, k)| !k.is_empty())
            .map(|(v, k)| {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for &a in k {
                    *counts.entry(a).or_default() += 1;
                }
                (v, counts.into_iter().collect())
            })
            .collect();
        let psi = t
            .psi
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(f, &e)| (if f < nh { format!("H{f}") } else { format!("L{}", t.graph.legs[f - nh].0) }, e))
            .collect();
        RawTerm { coeff: fmt_q(c), graph: t.graph.to_raw(), kappa, psi }
    }

    pub fn to_term(&self) -> Result<(Term, Q)> {
        let graph = StableGraph::from_raw(&self.graph)?;
        let mut t = Term::bare(graph);
        for (v, ks) in &self.kappa {
            if *v >= t.graph.num_vertices() {
                return Err(Error::Parse(format!("κ on missing vertex {v}")));
            }
            for &(a, b) in ks {
                if a == 0 {
                    return Err(Error::Parse("κ index must be positive".into()));
                }
                t.kappa[*v].extend(std::iter::repeat(a).take(b as usize));
            }
        }
        for (key, e) in &self.psi {
            let bad = || Error::Parse(format!("bad ψ reference {key:?}"));
            let num: i64 = key.get(1..).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let f = match key.chars().next() {
                Some('L') => t.graph.leg_flag(num as u32).ok_or_else(bad)?,
                Some('H') => {
                    let mut found = None;
                    for (k, e) in self.graph.edges.iter().enumerate() {
                        for s in 0..2 {
                            if e[s].id == num {
                                found = Some(2 * k + s);
                            }
                        }
                    }
                    found.ok_or_else(bad)?
                }
                _ => return Err(bad()),
            };
            t.psi[f] += e;
        }
        Ok((t, parse_q(&self.coeff)?))
    }
}

// ---------------------------------------------------------------------------
// Künneth classes on M̄_A = ∏_v M̄_{g(v), n(v)}

/// A combination of tensor products of terms, one factor per vertex of a
/// base graph A. The factor at `v` has legs labeled by the legs of A at `v`
/// and `NODE_LABEL + h` for the half-edges `h` of A at `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KunnethClass {
    pub base: StableGraph,
    terms: BTreeMap<Vec<Vec<u32>>, (Vec<Term>, Q)>,
}

impl KunnethClass {
    pub fn zero(base: &StableGraph) -> KunnethClass {
        KunnethClass { base: base.clone(), terms: BTreeMap::new() }
    }

    pub fn factor_labels(&self, v: usize) -> Vec<u32> {
        factor_labels(&self.base, v)
    }

    pub fn fundamental(base: &StableGraph) -> KunnethClass {
        let mut k = Self::zero(base);
        let factors =
            (0..base.num_vertices()).map(|v| Term::bare(StableGraph::smooth(base.genera[v], &factor_labels(base, v)))).collect();
        k.add_term(factors, Q::one());
        k
    }

    pub fn add_term(&mut self, factors: Vec<Term>, c: Q) {
        if c.is_zero() || factors.iter().any(|t| t.vanishes_by_dimension()) {
            return;
        }
        let (cf, keys): (Vec<Term>, Vec<Vec<u32>>) = factors.iter().map(|t| t.canonical()).unzip();
        match self.terms.entry(keys) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().1 += c;
                if o.get().1.is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert((cf, c));
            }
        }
    }

    pub fn add(&mut self, other: &KunnethClass) {
        for (t, c) in other.terms.values() {
            self.add_term(t.clone(), c.clone());
        }
    }

    pub fn scaled(&self, s: &Q) -> KunnethClass {
        let mut out = Self::zero(&self.base);
        for (t, c) in self.terms.values() {
            out.add_term(t.clone(), c * s);
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Term>, &Q)> {
        self.terms.values().map(|(t, c)| (t, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `x_1 ⊗ ... ⊗ x_k` for classes on the factor spaces.
    pub fn tensor(base: &StableGraph, factors: &[TautClass]) -> Result<KunnethClass> {
        if factors.len() != base.num_vertices() {
            return Err(Error::Dimension("one factor per vertex required".into()));
        }
        for (v, x) in factors.iter().enumerate() {
            if x.g != base.genera[v] || x.labels != factor_labels(base, v) {
                return Err(Error::Space(format!("factor {v} lives on the wrong space")));
            }
        }
        let mut acc: Vec<(Vec<Term>, Q)> = vec![(vec![], Q::one())];
        for x in factors {
            let mut next = Vec::new();
            for (ts, c) in &acc {
                for (t, d) in x.terms() {
                    let mut ts2 = ts.clone();
                    ts2.push(t.clone());
                    next.push((ts2, c * d));
                }
            }
            acc = next;
        }
        let mut out = Self::zero(base);
        for (ts, c) in acc {
            out.add_term(ts, c);
        }
        Ok(out)
    }

    /// The factor of a single tensor term as a class.
    fn factor_class(&self, v: usize, t: &Term) -> TautClass {
        let mut x = TautClass::zero(self.base.genera[v], &factor_labels(&self.base, v));
        x.add_term(t, Q::one());
        x
    }

    pub fn product(&self, other: &KunnethClass) -> Result<KunnethClass> {
        if self.base != other.base {
            return Err(Error::Space("Künneth classes over different graphs".into()));
        }
        let mut out = Self::zero(&self.base);
        for (ta, ca) in self.terms.values() {
            for (tb, cb) in other.terms.values() {
                let mut factors = Vec::new();
                for v in 0..self.base.num_vertices() {
                    factors.push(self.factor_class(v, &ta[v]).product(&other.factor_class(v, &tb[v]))?);
                }
                out.add(&Self::tensor(&self.base, &factors)?.scaled(&(ca * cb)));
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> i64 {
        (0..self.base.num_vertices()).map(|v| self.base.vertex_dim(v)).sum()
    }

    pub fn evaluate(&self) -> Result<Q> {
        let dim = self.dim();
        let mut total = Q::zero();
        for (ts, c) in self.terms.values() {
            let d: i64 = ts.iter().map(|t| t.degree() as i64).sum();
            if d != dim {
                return Err(Error::NotTopDegree { expected: dim.max(0) as u32, found: d as u32 });
            }
            let mut val = c.clone();
            for (v, t) in ts.iter().enumerate() {
                if t.degree() as i64 != self.base.vertex_dim(v) {
                    val = Q::zero();
                    break;
                }
                val *= t.integral()?;
            }
            total += val;
        }
        Ok(total)
    }

    /// `ξ_{A*}` of the class: graft every factor into A.
    pub fn pushforward(&self) -> TautClass {
        let mut out = TautClass::zero(self.base.total_genus(), &self.base.labels());
        for (ts, c) in self.terms.values() {
            out.add_term(&graft(&self.base, ts), c.clone());
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<RawKunnethTerm> = self
            .terms
            .values()
            .map(|(ts, c)| RawKunnethTerm {
                coeff: fmt_q(c),
                factors: ts.iter().map(|t| RawTerm::from_term(t, &Q::one())).collect(),
            })
            .collect();
        serde_json::to_value(RawKunnethClass { base: self.base.to_raw(), node_label: NODE_LABEL, terms }).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<KunnethClass> {
        let raw: RawKunnethClass = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.node_label != NODE_LABEL {
            return Err(Error::Parse(format!("node labels start at {}, expected {NODE_LABEL}", raw.node_label)));
        }
        let base = if raw.base.edges.is_empty() {
            let b = StableGraph::from_raw_unchecked(&raw.base)?;
            if let Some(v) = (0..b.num_vertices()).find(|&v| b.vertex_dim(v) < 0) {
                return Err(Error::InvalidGraph(vec![format!("vertex {v} is unstable")]));
            }
            b
        } else {
            StableGraph::from_raw(&raw.base)?
        };
        let mut out = Self::zero(&base);
        for rt in &raw.terms {
            if rt.factors.len() != base.num_vertices() {
                return Err(Error::Dimension("one factor per vertex required".into()));
            }
            let mut factors = Vec::new();
            for (v, f) in rt.factors.iter().enumerate() {
                let (t, c) = f.to_term()?;
                if t.graph.total_genus() != base.genera[v] || t.graph.labels() != factor_labels(&base, v) || !c.is_one() {
                    return Err(Error::Space(format!("factor {v} lives on the wrong space")));
                }
                factors.push(t);
            }
            out.add_term(factors, parse_q(&rt.coeff)?);
        }
        Ok(out)
    }
}

/// JSON shape of a Künneth class: factor terms carry coefficient 1 and the
/// half-edge `h` of the base appears as the leg `node_label + h`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawKunnethClass {
    pub base: RawGraph,
    pub node_label: u32,
    pub terms: Vec<RawKunnethTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawKunnethTerm {
    pub coeff: String,
    pub factors: Vec<RawTerm>,
}

pub fn factor_labels(base: &StableGraph, v: usize) -> Vec<u32> {
    let mut labels: Vec<u32> = base.legs.iter().filter(|l| l.1 == v).map(|l| l.0).collect();
    for h in 0..base.num_half_edges() {
        if base.half_vertex(h) == v {
            labels.push(NODE_LABEL + h as u32);
        }
    }
    labels.sort_unstable();
    labels
}

/// Glue one factor term per vertex of `base` along the edges of `base`.
pub fn graft(base: &StableGraph, factors: &[Term]) -> Term {
    let mut b = Builder::default();
    let mut offsets = Vec::new();
    let mut node_legs: HashMap<u32, (usize, u32)> = HashMap::new();
    for t in factors {
        let off = b.genera.len();
        offsets.push(off);
        let fb = Builder::from_term(t);
        b.genera.extend(fb.genera);
        b.kappa.extend(fb.kappa);
        for e in fb.edges {
            b.edges.push([(e[0].0 + off, e[0].1), (e[1].0 + off, e[1].1)]);
        }
        for (l, w, p) in fb.legs {
            if l >= NODE_LABEL {
                node_legs.insert(l - NODE_LABEL, (w + off, p));
            } else {
                b.legs.push((l, w + off, p));
            }
        }
    }
    for k in 0..base.num_edges() {
        let x = node_legs[&(2 * k as u32)];
        let y = node_legs[&(2 * k as u32 + 1)];
        b.edges.push([x, y]);
    }
    b.build()
}

/// Evaluate `∫ x · y` for classes of complementary degree.
pub fn pairing(x: &TautClass, y: &TautClass) -> Result<Q> {
    x.product(y)?.evaluate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn faber_strata() -> Vec<(StableGraph, u64)> {
        vec![
            (StableGraph::new(vec![0, 0, 0], vec![], vec![(0, 0), (0, 1), (1, 2), (1, 2), (2, 2)]).unwrap(), 8),
            (StableGraph::new(vec![0, 0, 0], vec![], vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]).unwrap(), 16),
            (StableGraph::new(vec![1, 0, 0, 0], vec![], vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 3)]).unwrap(), 4),
        ]
    }

    fn dhat(j: usize) -> TautClass {
        let (g, aut) = &faber_strata()[j];
        assert_eq!(graph::automorphism_count(g), *aut);
        TautClass::normalized_stratum(g)
    }

    fn delta0(g: u32) -> TautClass {
        TautClass::normalized_stratum(&StableGraph::unchecked(vec![g - 1], vec![], vec![(0, 0)]))
    }

    fn delta1(g: u32) -> TautClass {
        TautClass::normalized_stratum(&StableGraph::unchecked(vec![1, g - 1], vec![], vec![(0, 1)]))
    }

    #[test]
    fn faber_pairing_table() {
        let lambda = TautClass::lambda1(3).unwrap();
        let expected = [
            [qi(0), qi(0), q(1, 96)],
            [q(-1, 4), qi(0), q(1, 8)],
            [q(1, 8), q(-1, 16), q(-1, 96)],
        ];
        for (i, x) in [lambda, delta0(3), delta1(3)].iter().enumerate() {
            for j in 0..3 {
                assert_eq!(pairing(x, &dhat(j)).unwrap(), expected[i][j], "row {i} column {j}");
            }
        }
    }

    #[test]
    fn hyperelliptic_genus_three() {
        let mut h = TautClass::kappa(3, &[], 1).scaled(&q(3, 4));
        h.add_scaled(&delta0(3), &q(-1, 4)).unwrap();
        h.add_scaled(&delta1(3), &q(-9, 4)).unwrap();
        assert_eq!(pairing(&h, &dhat(0)).unwrap(), q(-1, 8));
        assert_eq!(pairing(&h, &dhat(1)).unwrap(), q(3, 16));
        assert_eq!(pairing(&h, &dhat(2)).unwrap(), qi(0));
    }

    #[test]
    fn basic_integrals() {
        assert_eq!(TautClass::psi(1, &[1], 1, 1).evaluate().unwrap(), q(1, 24));
        assert_eq!(TautClass::kappa(1, &[1], 1).evaluate().unwrap(), q(1, 24));
        assert!(TautClass::fundamental(1, &[1]).evaluate().is_err());
        assert_eq!(TautClass::fundamental(0, &[1, 2, 3]).evaluate().unwrap(), qi(1));
    }

    #[test]
    fn forgetful_rules() {
        // π^*ψ_1 = ψ_1 − D_{1,2} on M̄_{1,2}
        let x = TautClass::psi(1, &[1], 1, 1).pullback_forgetful(2).unwrap();
        assert_eq!(x.len(), 2);
        let d = StableGraph::new(vec![1, 0], vec![(1, 1), (2, 1)], vec![(0, 1)]).unwrap();
        let mut expect = TautClass::psi(1, &[1, 2], 1, 1);
        expect.add_scaled(&TautClass::stratum(&d), &-Q::one()).unwrap();
        assert_eq!(x, expect);
        // π^*κ_1 = κ_1 − ψ_1
        let k = TautClass::kappa(2, &[], 1).pullback_forgetful(1).unwrap();
        let mut expect = TautClass::kappa(2, &[1], 1);
        expect.add_scaled(&TautClass::psi(2, &[1], 1, 1), &-Q::one()).unwrap();
        assert_eq!(k, expect);
        // π_*ψ_2^2 = κ_1 on M̄_{1,1}
        let p = TautClass::psi(1, &[1, 2], 2, 2).pushforward_forgetful(2).unwrap();
        assert_eq!(p, TautClass::kappa(1, &[1], 1));
        // π_* of the section D_{1,2} is the fundamental class
        let s = TautClass::stratum(&d).pushforward_forgetful(2).unwrap();
        assert_eq!(s, TautClass::fundamental(1, &[1]));
    }

    #[test]
    fn push_pull_vanishes_and_dilaton() {
        for x in [TautClass::psi(1, &[1], 1, 1), TautClass::kappa(2, &[], 1), delta0(2), delta1(2)] {
            let label = x.labels.iter().max().map_or(1, |m| m + 1);
            let pulled = x.pullback_forgetful(label).unwrap();
            assert!(pulled.pushforward_forgetful(label).unwrap().is_zero());
            let mut ls = x.labels.clone();
            ls.push(label);
            let with_psi = TautClass::psi(x.g, &ls, label, 1).product(&pulled).unwrap();
            let factor = Q::from_integer(BigInt::from(2 * x.g as i64 - 2 + x.n() as i64));
            assert_eq!(with_psi.pushforward_forgetful(label).unwrap(), x.scaled(&factor));
        }
    }

    #[test]
    fn lambda_termwise() {
        let l = TautClass::lambda1(3).unwrap().scaled(&qi(12));
        let mut e = TautClass::kappa(3, &[], 1);
        e.add(&delta0(3)).unwrap();
        e.add(&delta1(3)).unwrap();
        assert_eq!(l, e);
    }

    #[test]
    fn boundary_pull_push() {
        let a = StableGraph::new(vec![1, 1], vec![], vec![(0, 1)]).unwrap();
        let k = TautClass::stratum(&a).pullback_boundary(&a).unwrap();
        // both sheets over the self-intersection carry −ψ_h − ψ_h'
        assert_eq!(k.len(), 2);
        assert!(k.terms().all(|(ts, c)| *c == -qi(2) && ts.iter().map(|t| t.degree()).sum::<u32>() == 1));
        let fund = KunnethClass::fundamental(&a);
        assert_eq!(fund.pushforward(), TautClass::stratum(&a));
        assert_eq!(TautClass::fundamental(2, &[]).pullback_boundary(&a).unwrap(), fund);
    }

    #[test]
    fn kappa_pullback_splits_over_vertices() {
        let a = StableGraph::new(vec![1, 1], vec![], vec![(0, 1)]).unwrap();
        let k = TautClass::kappa(2, &[], 1).pullback_boundary(&a).unwrap();
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn symmetrize_chain() {
        let chain = StableGraph::new(
            vec![0, 0, 0],
            vec![(1, 0), (2, 0), (3, 1), (4, 1), (5, 1), (6, 1), (7, 2), (8, 2)],
            vec![(0, 1), (1, 2)],
        )
        .unwrap();
        let x = TautClass::stratum(&chain);
        let labels: Vec<u32> = (1..=8).collect();
        let s = x.symmetrize(&labels).unwrap();
        assert_eq!(s.len(), 210);
        assert_eq!(x.symmetrize(&[]).unwrap(), x);
    }

    #[test]
    fn json_roundtrip() {
        let mut h = TautClass::kappa(3, &[], 1).scaled(&q(3, 4));
        h.add_scaled(&delta0(3), &q(-1, 4)).unwrap();
        for norm in [false, true] {
            let j = h.to_json(norm);
            assert_eq!(TautClass::from_json(&j).unwrap(), h);
        }
        let a = StableGraph::new(vec![1, 2], vec![], vec![(0, 1)]).unwrap();
        let k = h.pullback_boundary(&a).unwrap();
        assert!(!k.is_zero());
        assert_eq!(KunnethClass::from_json(&k.to_json()).unwrap(), k);
    }
}
