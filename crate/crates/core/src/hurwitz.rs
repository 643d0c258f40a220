//! Cycles of admissible G-covers on M̄_{g,n}: their pullback to boundary
//! strata, the δ-pull-push of tautological classes to M̄_{g′,b},
//! Künneth decompositions of diagonals and the solver that recovers a
//! cycle from its intersection numbers.

use crate::covers::{Group, HurwitzSpec, RawGroup};
use crate::error::{Error, Result};
use crate::ggraph::{self, GGraph, HStructure};
use crate::graph::StableGraph;
use crate::rational::{self, factorial, fmt_q, parse_q, RatMatrix, SolveResult, Q};
use crate::strata;
use crate::taut::{factor_labels, graft, poly_mul, poly_one, pull_decoration, KunnethClass, Poly, TautClass, Term, NODE_LABEL};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::{Mutex, RwLock};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

/// Temporary leg labels used while grafting a fiber of an A-structure.
const IMAGE_LABEL: u32 = NODE_LABEL / 2;
const FORGET_LABEL: u32 = NODE_LABEL / 2 + NODE_LABEL / 4;

// ---------------------------------------------------------------------------
// Cycle references

/// The cycle `norm · π_* φ_* [H̄_{g,G,ξ}]` on M̄_{g,n}, where π forgets
/// every marking outside `keep`. The `k`-th kept marking becomes leg `k+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HurwitzCycleRef {
    pub name: String,
    pub spec: HurwitzSpec,
    pub keep: Vec<u32>,
    pub norm: Q,
}

impl HurwitzCycleRef {
    pub fn new(name: &str, spec: HurwitzSpec, keep: Vec<u32>, norm: Option<Q>) -> Result<Self> {
        let r = spec.r() as u32;
        let distinct: BTreeSet<u32> = keep.iter().copied().collect();
        if distinct.len() != keep.len() || keep.iter().any(|&l| l == 0 || l > r) {
            return Err(Error::Precondition(format!("kept markings {keep:?} must be distinct labels in 1..={r}")));
        }
        let norm = norm.unwrap_or_else(|| Self::default_norm(&spec, &keep));
        if norm <= Q::zero() {
            return Err(Error::Precondition("normalization must be positive".into()));
        }
        Ok(HurwitzCycleRef { name: name.to_string(), spec, keep, norm })
    }

    /// `1/∏ k!` over groups of `k` completely forgotten branch points with
    /// equal monodromy.
    pub fn default_norm(spec: &HurwitzSpec, keep: &[u32]) -> Q {
        let layout = spec.marking_layout();
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for (i, &h) in spec.xi.iter().enumerate() {
            if !layout.iter().any(|m| m.branch == i && keep.contains(&m.label)) {
                *counts.entry(h).or_default() += 1;
            }
        }
        let den: BigInt = counts.values().map(|&k| factorial(k)).product();
        Q::new(BigInt::one(), den)
    }

    /// Parse `Name:g:group:xi[:keep=l1,l2,..][:norm=p/q]`, where the group
    /// is `Z<m>`, `cyclic:<m>` or `table:<json file>` and `xi` lists
    /// element names with optional repetition counts, as in `1^6,0`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("cycle {s:?}: {m}"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 4 {
            return Err(bad("expected Name:g:group:xi"));
        }
        let name = parts[0];
        let g: u32 = parts[1].trim().parse().map_err(|_| bad("genus is not a nonnegative integer"))?;
        let (group, next) = match parts[2] {
            "cyclic" | "table" => (parse_group(&format!("{}:{}", parts[2], parts[3]))?, 4),
            t if t.starts_with('Z') => (parse_group(t)?, 3),
            _ => return Err(bad("unknown group token")),
        };
        let xi_tok = parts.get(next).ok_or_else(|| bad("missing monodromy"))?;
        let xi = parse_xi(&group, xi_tok)?;
        let mut keep = Vec::new();
        let mut norm = None;
        for opt in &parts[next + 1..] {
            if let Some(v) = opt.strip_prefix("keep=") {
                for x in v.split(',').filter(|x| !x.trim().is_empty()) {
                    keep.push(x.trim().parse().map_err(|_| bad("bad kept label"))?);
                }
            } else if let Some(v) = opt.strip_prefix("norm=") {
                norm = Some(parse_q(v)?);
            } else {
                return Err(bad(&format!("unknown option {opt:?}")));
            }
        }
        let spec = HurwitzSpec::new(g, group, xi)?;
        Self::new(name, spec, keep, norm)
    }

    pub fn n(&self) -> u32 {
        self.keep.len() as u32
    }

    pub fn labels(&self) -> Vec<u32> {
        (1..=self.n()).collect()
    }

    /// Complex codimension of the cycle in M̄_{g,n}.
    pub fn codim(&self) -> i64 {
        3 * self.spec.g as i64 - 3 + self.n() as i64 - self.spec.dim()
    }

    pub fn forgotten(&self) -> Vec<u32> {
        (1..=self.spec.r() as u32).filter(|l| !self.keep.contains(l)).collect()
    }

    /// Leg label on M̄_{g,n} of a kept marking.
    pub fn user_label(&self, marking: u32) -> Option<u32> {
        self.keep.iter().position(|&m| m == marking).map(|i| i as u32 + 1)
    }

    /// The same graph with legs renamed from `1..=n` to kept markings.
    pub fn marking_graph(&self, a: &StableGraph) -> Result<StableGraph> {
        if a.total_genus() != self.spec.g || a.labels() != self.labels() {
            return Err(Error::Space(format!(
                "graph must live on M̄_{{{},{}}} with legs 1..={}",
                self.spec.g,
                self.n(),
                self.n()
            )));
        }
        Ok(a.relabel_legs(&|l| self.keep[(l - 1) as usize]))
    }

    fn check_class(&self, x: &TautClass) -> Result<()> {
        if x.g != self.spec.g || x.labels != self.labels() {
            return Err(Error::Space(format!(
                "class on M̄_{{{},{}}}, cycle on M̄_{{{},{}}}",
                x.g,
                x.n(),
                self.spec.g,
                self.n()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for HurwitzCycleRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let gr = &self.spec.group;
        let group = match gr.cyclic {
            Some(m) => format!("Z{m}"),
            None => format!("table[{}]", gr.names.join(",")),
        };
        let keep: Vec<String> = self.keep.iter().map(|l| l.to_string()).collect();
        write!(f, "{}:{}:{}:{}", self.name, self.spec.g, group, format_xi(gr, &self.spec.xi))?;
        if !keep.is_empty() {
            write!(f, ":keep={}", keep.join(","))?;
        }
        write!(f, ":norm={}", fmt_q(&self.norm))
    }
}

fn cyclic_group(m: usize) -> Option<Arc<Group>> {
    (m > 0).then(|| Group::cyclic(m))
}

/// A group token `Z<m>`, `cyclic:<m>` or `table:<json file>`.
pub fn parse_group(tok: &str) -> Result<Arc<Group>> {
    let bad = |m: &str| Error::Parse(format!("group {tok:?}: {m}"));
    if let Some(m) = tok.strip_prefix("cyclic:").or_else(|| tok.strip_prefix('Z')) {
        let m: usize = m.trim().parse().map_err(|_| bad("bad cyclic order"))?;
        return cyclic_group(m).ok_or_else(|| bad("cyclic order must be positive"));
    }
    if let Some(path) = tok.strip_prefix("table:") {
        let text = std::fs::read_to_string(path).map_err(|e| bad(&format!("cannot read group table: {e}")))?;
        let raw: RawGroup = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
        return Group::from_raw(&raw);
    }
    Err(bad("unknown group token"))
}

/// Monodromy such as `1^6,0`: element names with optional repetition
/// counts; `-` or the empty string is the empty datum.
pub fn parse_xi(group: &Group, tok: &str) -> Result<Vec<usize>> {
    let mut xi = Vec::new();
    let tok = tok.trim();
    if tok.is_empty() || tok == "-" {
        return Ok(xi);
    }
    for entry in tok.split(',') {
        let (name, count) = match entry.split_once('^') {
            Some((n, c)) => (n, c.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad repetition in {entry:?}")))?),
            None => (entry, 1),
        };
        let h = group.element(name)?;
        xi.extend(std::iter::repeat(h).take(count));
    }
    Ok(xi)
}

fn format_xi(group: &Group, xi: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < xi.len() {
        let mut j = i;
        while j < xi.len() && xi[j] == xi[i] {
            j += 1;
        }
        let name = &group.names[xi[i]];
        parts.push(if j - i > 1 { format!("{name}^{}", j - i) } else { name.clone() });
        i = j;
    }
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(",")
    }
}

// ---------------------------------------------------------------------------
// Cycle database

/// A known class `norm · π_* φ_* [H̄]` with the source it was taken from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleRecord {
    pub cycle: HurwitzCycleRef,
    pub class: TautClass,
    pub provenance: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawRecord {
    pub name: String,
    pub g: u32,
    pub group: RawGroup,
    pub xi: Vec<String>,
    pub keep: Vec<u32>,
    pub norm: String,
    pub class: serde_json::Value,
    pub provenance: String,
}

impl CycleRecord {
    pub fn new(cycle: HurwitzCycleRef, class: TautClass, provenance: &str) -> Result<Self> {
        cycle.check_class(&class)?;
        if let Some(d) = class.degree() {
            if d as i64 != cycle.codim() {
                return Err(Error::Dimension(format!("class of degree {d} for a cycle of codimension {}", cycle.codim())));
            }
        }
        Ok(CycleRecord { cycle, class, provenance: provenance.to_string() })
    }

    pub fn to_raw(&self) -> RawRecord {
        let gr = &self.cycle.spec.group;
        RawRecord {
            name: self.cycle.name.clone(),
            g: self.cycle.spec.g,
            group: RawGroup { order: gr.order(), names: gr.names.clone(), table: gr.table.clone() },
            xi: self.cycle.spec.xi.iter().map(|&h| gr.names[h].clone()).collect(),
            keep: self.cycle.keep.clone(),
            norm: fmt_q(&self.cycle.norm),
            class: self.class.to_json(true),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_raw(raw: &RawRecord) -> Result<Self> {
        let mut group = Group::from_raw(&raw.group)?;
        if let Some(m) = cyclic_names(&raw.group) {
            group = Group::cyclic(m);
        }
        let xi = raw.xi.iter().map(|n| group.element(n)).collect::<Result<Vec<_>>>()?;
        let spec = HurwitzSpec::new(raw.g, group, xi)?;
        let cycle = HurwitzCycleRef::new(&raw.name, spec, raw.keep.clone(), Some(parse_q(&raw.norm)?))?;
        Self::new(cycle, TautClass::from_json(&raw.class)?, &raw.provenance)
    }

    /// File stem used when the database is written to a directory.
    pub fn file_stem(&self) -> String {
        let s = self.cycle.to_string();
        s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
    }
}

/// Recognize the table of `Z/m` written by [`Group::cyclic`].
fn cyclic_names(raw: &RawGroup) -> Option<usize> {
    let m = raw.order;
    let c = Group::cyclic(m);
    (raw.table == c.table && raw.names == c.names).then_some(m)
}

/// Known cycle classes, shared between threads.
#[derive(Debug, Default)]
pub struct CycleDb {
    records: RwLock<Vec<CycleRecord>>,
    solve_missing: AtomicBool,
}

impl CycleDb {
    pub fn empty() -> CycleDb {
        CycleDb::default()
    }

    /// The database holding the classes of [`seeds`].
    pub fn seeded() -> CycleDb {
        let db = CycleDb::empty();
        for r in seeds() {
            db.insert(r);
        }
        db
    }

    /// When set, a local class that is not stored is computed with
    /// [`solve_cycle`] and stored, provided the cohomology of its moduli
    /// space is tautological.
    pub fn set_solve_missing(&self, on: bool) {
        self.solve_missing.store(on, Ordering::Relaxed);
    }

    pub fn solves_missing(&self) -> bool {
        self.solve_missing.load(Ordering::Relaxed)
    }

    /// Insert, replacing a record for the same cycle.
    pub fn insert(&self, rec: CycleRecord) {
        let mut w = self.records.write();
        w.retain(|r| !same_cycle(&r.cycle, &rec.cycle));
        w.push(rec);
    }

    pub fn records(&self) -> Vec<CycleRecord> {
        self.records.read().clone()
    }

    pub fn len(&self) -> usize {
        self.records.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.read().is_empty()
    }

    pub fn find(&self, cycle: &HurwitzCycleRef) -> Option<CycleRecord> {
        self.records.read().iter().find(|r| same_cycle(&r.cycle, cycle)).cloned()
    }

    /// Read every `*.json` record in `dir`; returns the number read.
    pub fn load_dir(&self, dir: &Path) -> Result<usize> {
        let rd = std::fs::read_dir(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        let mut count = 0;
        for p in paths.into_iter().filter(|p| p.extension().is_some_and(|x| x == "json")) {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            let raw: RawRecord = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            self.insert(CycleRecord::from_raw(&raw)?);
            count += 1;
        }
        Ok(count)
    }

    /// Write one JSON file per record into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<usize> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
        let recs = self.records();
        for r in &recs {
            let p = dir.join(format!("{}.json", r.file_stem()));
            let text = serde_json::to_string_pretty(&r.to_raw()).expect("serializable");
            std::fs::write(&p, text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
        }
        Ok(recs.len())
    }
}

fn same_cycle(a: &HurwitzCycleRef, b: &HurwitzCycleRef) -> bool {
    a.spec.g == b.spec.g && a.spec.group.table == b.spec.group.table && a.spec.xi == b.spec.xi && a.keep == b.keep
}

fn z2_cycle(name: &str, g: u32, xi: Vec<usize>, keep: Vec<u32>) -> HurwitzCycleRef {
    let spec = HurwitzSpec::new(g, Group::cyclic(2), xi).expect("valid seed");
    HurwitzCycleRef::new(name, spec, keep, None).expect("valid seed")
}

fn seed_class(g: u32, n: u32, terms: &[(Q, StableGraph, Vec<(u32, u32)>)]) -> TautClass {
    let mut x = TautClass::zero_n(g, n);
    for (c, gr, psi) in terms {
        let mut t = Term::bare(gr.clone());
        for &(flag, e) in psi {
            t.psi[flag as usize] = e;
        }
        let aut = Q::from_integer(BigInt::from(crate::graph::automorphism_count(gr)));
        x.add_term(&t, c / aut);
    }
    x
}

/// Classes quoted from the literature, as normalized decorated strata.
pub fn seeds() -> Vec<CycleRecord> {
    let q = rational::q;
    let sg = StableGraph::unchecked;
    let mut out = Vec::new();

    let wp = seed_class(
        2,
        1,
        &[
            (q(3, 1), sg(vec![2], vec![(1, 0)], vec![]), vec![(0, 1)]),
            (q(-6, 5), sg(vec![1, 1], vec![(1, 1)], vec![(0, 1)]), vec![]),
            (q(-1, 10), sg(vec![1], vec![(1, 0)], vec![(0, 0)]), vec![]),
        ],
    );
    out.push(CycleRecord::new(z2_cycle("Wp", 2, vec![1; 6], vec![1]), wp, "Weierstrass divisor on M̄_{2,1} (Eisenbud–Harris)").unwrap());

    // flags: half-edges 2k, 2k+1 come before legs
    let conj = seed_class(
        2,
        2,
        &[
            (q(1, 1), sg(vec![2], vec![(1, 0), (2, 0)], vec![]), vec![(0, 1)]),
            (q(1, 1), sg(vec![2], vec![(1, 0), (2, 0)], vec![]), vec![(1, 1)]),
            (q(-3, 1), sg(vec![2, 0], vec![(1, 1), (2, 1)], vec![(0, 1)]), vec![]),
            (q(-6, 5), sg(vec![1, 1], vec![(1, 1), (2, 1)], vec![(0, 1)]), vec![]),
            (q(-1, 5), sg(vec![1, 1], vec![(1, 1), (2, 0)], vec![(0, 1)]), vec![]),
            (q(-1, 10), sg(vec![1], vec![(1, 0), (2, 0)], vec![(0, 0)]), vec![]),
        ],
    );
    let mut xi = vec![1; 6];
    xi.push(0);
    out.push(
        CycleRecord::new(z2_cycle("Conj", 2, xi, vec![7, 8]), conj, "pairs of conjugate points on genus-2 curves (Belorousski)").unwrap(),
    );

    // legs at vertex 0 unless stated; ψ on a half-edge uses its flag index
    let h310 = seed_class(
        3,
        1,
        &[
            (q(6, 1), sg(vec![3], vec![(1, 0)], vec![]), vec![(0, 2)]),
            (q(-24, 7), sg(vec![2, 1], vec![(1, 0)], vec![(0, 1)]), vec![(2, 1)]),
            (q(-1, 7), sg(vec![2, 1], vec![(1, 0)], vec![(0, 1)]), vec![(0, 1)]),
            (q(-10, 7), sg(vec![1, 2], vec![(1, 0)], vec![(0, 1)]), vec![(1, 1)]),
            (q(-53, 7), sg(vec![0, 2, 1], vec![(1, 0)], vec![(0, 1), (0, 2)]), vec![]),
            (q(48, 35), sg(vec![1, 1, 1], vec![(1, 0)], vec![(0, 1), (0, 2)]), vec![]),
            (q(54, 35), sg(vec![1, 1, 1], vec![(1, 0)], vec![(0, 1), (1, 2)]), vec![]),
            (q(-2, 7), sg(vec![2], vec![(1, 0)], vec![(0, 0)]), vec![(2, 1)]),
            (q(-6, 7), sg(vec![0, 2], vec![(1, 0)], vec![(0, 1), (0, 1)]), vec![]),
            (q(1, 84), sg(vec![2, 0], vec![(1, 0)], vec![(0, 1), (1, 1)]), vec![]),
            (q(-53, 84), sg(vec![0, 2], vec![(1, 0)], vec![(0, 1), (0, 0)]), vec![]),
            (q(4, 35), sg(vec![1, 1], vec![(1, 0)], vec![(0, 1), (0, 0)]), vec![]),
            (q(9, 70), sg(vec![1, 1], vec![(1, 0)], vec![(0, 1), (1, 1)]), vec![]),
            (q(-1, 35), sg(vec![1, 1], vec![(1, 0)], vec![(0, 1), (0, 1)]), vec![]),
            (q(1, 105), sg(vec![1], vec![(1, 0)], vec![(0, 0), (0, 0)]), vec![]),
        ],
    );
    out.push(
        CycleRecord::new(z2_cycle("H310", 3, vec![1; 8], vec![1]), h310, "hyperelliptic genus-3 curves with a marked Weierstrass point; the genus-1/genus-2 term with ψ on the genus-2 branch has coefficient −10/7, fixed by the intersection numbers of the covers").unwrap(),
    );

    out.push(
        CycleRecord::new(z2_cycle("H110", 1, vec![1; 4], vec![1]), TautClass::fundamental(1, &[1]), "every elliptic curve is a double cover")
            .unwrap(),
    );

    let mut h3 = TautClass::kappa(3, &[], 1).scaled(&q(3, 4));
    h3.add(&seed_class(3, 0, &[(q(-1, 4), sg(vec![2], vec![], vec![(0, 0)]), vec![])])).unwrap();
    h3.add(&seed_class(3, 0, &[(q(-9, 4), sg(vec![1, 2], vec![], vec![(0, 1)]), vec![])])).unwrap();
    out.push(CycleRecord::new(z2_cycle("H", 3, vec![1; 8], vec![]), h3, "9λ − δ_0 − 3δ_1 with 12λ = κ_1 + δ_0 + δ_1").unwrap());
    out
}

// ---------------------------------------------------------------------------
// δ-pull-push

/// How decorated classes are carried to the Hurwitz space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Undecorated strata are pulled back directly, summing over the
    /// positions of forgotten markings; decorated ones use `Forgetful`.
    Direct,
    /// Every class is first pulled back along the forgetful map to the
    /// space with all markings, then to the Hurwitz space.
    Forgetful,
}

/// `∏ (−ψ_h − ψ_{h'})` over the excess pairs of a structure.
fn excess_poly(s: &HStructure) -> Poly {
    let gam = &s.gg.graph;
    let mut poly = poly_one(gam);
    for (h, h2) in ggraph::excess_factors(&s.gg, &s.f) {
        let mut fac = Vec::new();
        for x in [h, h2] {
            let mut d = poly_one(gam).pop().unwrap().1;
            d.psi[x] = 1;
            fac.push((-Q::one(), d));
        }
        poly = poly_mul(&poly, &fac);
    }
    poly
}

/// Add `coef · ξ_{Γ/G *} F(poly)` to `out`. F sends ψ at a flag with
/// stabilizer of order e to ψ/e on the quotient and κ at a vertex with
/// stabilizer of order s to s·κ.
fn push_structure(out: &mut TautClass, s: &HStructure, poly: &Poly, coef: &Q) -> Result<()> {
    let quo = s.gg.quotient()?;
    let gam = &s.gg.graph;
    let gr = &s.gg.group;
    let nh = gam.num_half_edges();
    let nqh = quo.graph.num_half_edges();
    let stab: Vec<usize> = (0..gam.num_vertices()).map(|w| s.gg.vertex_stabilizer(w).len()).collect();
    for (pc, d) in poly {
        let mut c = coef * pc;
        let mut t = Term::bare(quo.graph.clone());
        for (w, ks) in d.kappa.iter().enumerate() {
            for &k in ks {
                t.kappa[quo.vmap[w]].push(k);
                c *= Q::from_integer(BigInt::from(stab[w]));
            }
        }
        for (f, &e) in d.psi.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let qf = if f < nh { quo.hmap[f] } else { nqh + quo.lmap[f - nh] };
            t.psi[qf] += e;
            let ord = BigInt::from(gr.elem_order(s.gg.flag_stab(f)));
            c /= Q::from_integer(num_traits::pow(ord, e as usize));
        }
        out.add_term(&t, c);
    }
    Ok(())
}

/// `δ_* φ^* π^* x` on M̄_{g′,b} (legs are the branch points), without the
/// normalization of the cycle.
pub fn pullpush_delta(cycle: &HurwitzCycleRef, x: &TautClass) -> Result<TautClass> {
    pullpush_impl(cycle, x, Route::Direct, true)
}

pub fn pullpush_delta_via(cycle: &HurwitzCycleRef, x: &TautClass, route: Route) -> Result<TautClass> {
    pullpush_impl(cycle, x, route, true)
}

/// With `expand == false` interchangeable forgotten branch points are not
/// relabeled, which leaves every intersection number unchanged.
fn pullpush_impl(cycle: &HurwitzCycleRef, x: &TautClass, route: Route, expand: bool) -> Result<TautClass> {
    cycle.check_class(x)?;
    let spec = &cycle.spec;
    let mut out = TautClass::zero_n(spec.gprime, spec.b() as u32);
    let forgotten = cycle.forgotten();
    for (t, c) in x.terms() {
        let tm = t.relabel_legs(&|l| cycle.keep[(l - 1) as usize]);
        if t.is_undecorated() && route == Route::Direct {
            let en = ggraph::enumerate_generic_a_structures(spec, &tm.graph)?;
            let items: Vec<(HStructure, BigInt)> =
                if expand { en.structures().into_iter().map(|s| (s, BigInt::one())).collect() } else { en.representatives() };
            for (s, mult) in items {
                let coef = c * &s.degree * Q::from_integer(mult);
                push_structure(&mut out, &s, &excess_poly(&s), &coef)?;
            }
        } else {
            let mut y = TautClass::from_term(&tm, c.clone());
            for &l in &forgotten {
                y = y.pullback_forgetful(l)?;
            }
            for (t2, c2) in y.terms() {
                let en = ggraph::enumerate_generic_a_structures(spec, &t2.graph)?;
                for s in en.structures() {
                    let poly = poly_mul(&pull_decoration(&s.gg.graph, &t2.graph, &s.f, t2), &excess_poly(&s));
                    push_structure(&mut out, &s, &poly, &(c2 * &s.degree))?;
                }
            }
        }
    }
    Ok(out)
}

/// `∫ [cycle] · x_j` for classes `x_j` of the complementary degree.
pub fn pairing_vector(cycle: &HurwitzCycleRef, strata: &[TautClass]) -> Result<Vec<Q>> {
    let dim = cycle.spec.dim();
    for x in strata {
        cycle.check_class(x)?;
        if let Some(d) = x.degree() {
            if d as i64 != dim {
                return Err(Error::Dimension(format!("stratum of degree {d}, cycle of dimension {dim}")));
            }
        }
    }
    strata
        .par_iter()
        .map(|x| {
            if x.is_zero() {
                return Ok(Q::zero());
            }
            Ok(pullpush_impl(cycle, x, Route::Direct, false)?.evaluate()? * &cycle.norm)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Solving by the intersection pairing

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    /// the unique solution, or a particular one when `kernel` is nonempty
    pub class: TautClass,
    pub coefficients: Vec<Q>,
    pub generators: Vec<TautClass>,
    pub complementary: Vec<TautClass>,
    /// `matrix[j][i] = ∫ generators[i] · complementary[j]`
    pub matrix: RatMatrix,
    pub rhs: Vec<Q>,
    pub kernel: Vec<Vec<Q>>,
}

impl SolveOutcome {
    pub fn is_unique(&self) -> bool {
        self.kernel.is_empty()
    }
}

/// Write the cycle as `Σ a_i generators[i]` by matching its intersection
/// numbers with `complementary`.
pub fn solve_by_pairing(
    cycle: &HurwitzCycleRef,
    k: u32,
    generators: &[TautClass],
    complementary: &[TautClass],
) -> Result<SolveOutcome> {
    if k as i64 != cycle.codim() {
        return Err(Error::Dimension(format!("cycle has codimension {}, asked for degree {k}", cycle.codim())));
    }
    let (g, labels) = (cycle.spec.g, cycle.labels());
    let empty = cycle.spec.degree_delta()?.is_zero();
    let cols = strata::pairing_matrix(complementary, generators)?;
    let matrix = RatMatrix::from_rows(cols)?;
    let rhs = if empty { vec![Q::zero(); complementary.len()] } else { pairing_vector(cycle, complementary)? };
    let (coefficients, kernel) = if generators.is_empty() {
        if rhs.iter().any(|x| !x.is_zero()) {
            return Err(Error::Inconsistent);
        }
        (vec![], vec![])
    } else {
        match rational::solve_linear(&matrix, &rhs)? {
            SolveResult::Unique(a) => (a, vec![]),
            SolveResult::Underdetermined { particular, kernel } => (particular, kernel),
            SolveResult::Inconsistent => return Err(Error::Inconsistent),
        }
    };
    let mut class = TautClass::zero(g, &labels);
    for (a, x) in coefficients.iter().zip(generators) {
        class.add_scaled(x, a)?;
    }
    Ok(SolveOutcome {
        class,
        coefficients,
        generators: generators.to_vec(),
        complementary: complementary.to_vec(),
        matrix,
        rhs,
        kernel,
    })
}

/// Choose generators of degree `k` and complementary strata automatically
/// from the decorated strata and solve.
pub fn solve_cycle(cycle: &HurwitzCycleRef, k: u32) -> Result<SolveOutcome> {
    let (g, labels) = (cycle.spec.g, cycle.labels());
    let dim = 3 * g as i64 - 3 + labels.len() as i64;
    if k as i64 > dim {
        return Err(Error::Dimension(format!("degree {k} exceeds dim M̄ = {dim}")));
    }
    let gens = strata::decorated_strata(g, &labels, k)?;
    let comps = strata::undecorated_first(strata::decorated_strata(g, &labels, (dim - k as i64) as u32)?);
    let (gens, comps) = choose_system(&gens, &comps)?;
    solve_by_pairing(cycle, k, &gens, &comps)
}

/// A square subsystem of full rank: complementary strata are added while
/// they raise the rank, then a maximal independent set of generators is
/// kept.
pub fn choose_system(gens: &[TautClass], comps: &[TautClass]) -> Result<(Vec<TautClass>, Vec<TautClass>)> {
    let mut cols: Vec<Vec<Q>> = Vec::new();
    let mut chosen = Vec::new();
    const CHUNK: usize = 16;
    'outer: for chunk in comps.chunks(CHUNK) {
        let block = strata::pairing_matrix(chunk, gens)?;
        for (c, col) in chunk.iter().zip(block) {
            let mut trial = cols.clone();
            trial.push(col.clone());
            if strata::independent_rows(&trial).len() == trial.len() {
                cols = trial;
                chosen.push(c.clone());
                if cols.len() == gens.len() {
                    break 'outer;
                }
            }
        }
    }
    let rows: Vec<Vec<Q>> = (0..gens.len()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    let keep = strata::independent_rows(&rows);
    Ok((keep.iter().map(|&i| gens[i].clone()).collect(), chosen))
}

/// The range `k ≤ d(g,n)` in which pullback to the boundary is injective
/// on classes of degree `k`.
pub fn injectivity_range(g: u32, n: u32) -> i64 {
    let (g, n) = (g as i64, n as i64);
    if g == 0 {
        n - 4
    } else if n == 0 {
        2 * g - 2
    } else {
        2 * g - 3 + n
    }
}

// ---------------------------------------------------------------------------
// Diagonals

/// `(g, n)` for which all cohomology of M̄_{g,n} is known to be
/// tautological.
pub fn cohomology_is_tautological(g: u32, n: u32) -> bool {
    match g {
        0 => true,
        1 => n <= 10,
        2 => n <= 3,
        3 => n == 0,
        _ => false,
    }
}

/// `[Δ] = Σ c · e ⊗ f` on M̄_{g,n} × M̄_{g,n}.
#[derive(Clone, Debug)]
pub struct Diagonal {
    pub g: u32,
    pub labels: Vec<u32>,
    pub terms: Vec<(Q, TautClass, TautClass)>,
}

type DiagKey = (u32, Vec<u32>);
static DIAG_CACHE: Lazy<Mutex<HashMap<DiagKey, Arc<Diagonal>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub fn diagonal(g: u32, labels: &[u32]) -> Result<Arc<Diagonal>> {
    let mut labels = labels.to_vec();
    labels.sort_unstable();
    let key = (g, labels.clone());
    if let Some(d) = DIAG_CACHE.lock().get(&key) {
        return Ok(d.clone());
    }
    let n = labels.len() as u32;
    if !cohomology_is_tautological(g, n) {
        return Err(Error::DegeneratePairing(format!(
            "the cohomology of M̄_{{{g},{n}}} is not known to be tautological, so its diagonal has no tautological Künneth decomposition here"
        )));
    }
    let dim = (3 * g as i64 - 3 + n as i64).max(0) as u32;
    let mut terms = Vec::new();
    let mut ranks = Vec::new();
    for d in 0..=dim {
        let xs = strata::decorated_strata(g, &labels, d)?;
        let ys = strata::decorated_strata(g, &labels, dim - d)?;
        let b = strata::paired_bases(&xs, &ys)?;
        ranks.push(b.rows.len());
        if b.rows.len() != b.cols.len() {
            return Err(Error::DegeneratePairing(format!("degree {d}: pairing ranks differ")));
        }
        if b.rows.is_empty() {
            continue;
        }
        let inv = rational::inverse(&b.matrix)
            .ok_or_else(|| Error::DegeneratePairing(format!("degree {d}: singular pairing matrix")))?;
        for (i, e) in b.rows.iter().enumerate() {
            for (j, f) in b.cols.iter().enumerate() {
                let c = inv[(j, i)].clone();
                if !c.is_zero() {
                    terms.push((c, e.clone(), f.clone()));
                }
            }
        }
    }
    for d in 0..=dim as usize {
        if ranks[d] != ranks[dim as usize - d] {
            return Err(Error::DegeneratePairing(format!(
                "rank {} in degree {d} but {} in degree {}",
                ranks[d],
                ranks[dim as usize - d],
                dim as usize - d
            )));
        }
    }
    let diag = Arc::new(Diagonal { g, labels, terms });
    DIAG_CACHE.lock().insert(key, diag.clone());
    Ok(diag)
}

/// `Δ_* x` for the diagonal into the `m`-fold product, as a list of
/// tensor terms.
pub fn push_diagonal(x: &TautClass, m: usize) -> Result<Vec<(Q, Vec<TautClass>)>> {
    if m == 1 {
        return Ok(vec![(Q::one(), vec![x.clone()])]);
    }
    let diag = diagonal(x.g, &x.labels)?;
    let mut out = Vec::new();
    for (c, e, f) in &diag.terms {
        let xe = x.product(e)?;
        if xe.is_zero() {
            continue;
        }
        for (c2, mut rest) in push_diagonal(f, m - 1)? {
            rest.insert(0, xe.clone());
            out.push((c * c2, rest));
        }
    }
    Ok(out)
}

/// `m` disjoint copies of the smooth graph of type `(g, labels)`.
pub fn product_base(g: u32, labels: &[u32], m: usize) -> StableGraph {
    let legs = (0..m).flat_map(|v| labels.iter().map(move |&l| (l, v))).collect();
    StableGraph::unchecked(vec![g; m], legs, vec![])
}

/// The class of the small diagonal in the `m`-fold product of M̄_{g,n}.
pub fn diagonal_class(g: u32, n: u32, m: usize) -> Result<KunnethClass> {
    if m == 0 {
        return Err(Error::Precondition("at least one copy is needed".into()));
    }
    let labels: Vec<u32> = (1..=n).collect();
    let base = product_base(g, &labels, m);
    let mut out = KunnethClass::zero(&base);
    for (c, fs) in push_diagonal(&TautClass::fundamental(g, &labels), m)? {
        out.add(&KunnethClass::tensor(&base, &fs)?.scaled(&c));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Boundary pullback

/// One summand of `ξ_A^*[cycle]`: a structure `(Γ, G, f)` with its excess
/// pairs and the number of labeled placements it stands for.
#[derive(Clone, Debug)]
pub struct HurwitzTerm {
    pub structure: HStructure,
    pub excess: Vec<(usize, usize)>,
    pub multiplicity: BigInt,
    /// normalization of the cycle times the multiplicity
    pub coefficient: Q,
}

/// The summands of `ξ_A^*[cycle]` for a graph `a` with legs `1..=n`.
pub fn boundary_pullback(cycle: &HurwitzCycleRef, a: &StableGraph) -> Result<Vec<HurwitzTerm>> {
    let am = cycle.marking_graph(a)?;
    let en = ggraph::enumerate_generic_a_structures(&cycle.spec, &am)?;
    Ok(en
        .representatives()
        .into_iter()
        .map(|(s, mult)| HurwitzTerm {
            excess: ggraph::excess_factors(&s.gg, &s.f),
            coefficient: &cycle.norm * Q::from_integer(mult.clone()),
            multiplicity: mult,
            structure: s,
        })
        .collect())
}

/// `ξ_A^*[cycle]` as a Künneth class on M̄_A.
pub fn pullback_class(cycle: &HurwitzCycleRef, a: &StableGraph, db: &CycleDb) -> Result<KunnethClass> {
    let terms = boundary_pullback(cycle, a)?;
    resolve_terms(cycle, a, &terms, db)
}

/// Substitute known classes for the vertex cycles of every term.
pub fn resolve_terms(cycle: &HurwitzCycleRef, a: &StableGraph, terms: &[HurwitzTerm], db: &CycleDb) -> Result<KunnethClass> {
    cycle.marking_graph(a)?;
    let parts: Vec<KunnethClass> = terms
        .par_iter()
        .map(|t| match resolve_direct(cycle, a, t, db)? {
            Some(k) => Ok(k),
            None => resolve_general(cycle, a, t, db),
        })
        .collect::<Result<_>>()?;
    let mut out = KunnethClass::zero(a);
    for p in &parts {
        out.add(p);
    }
    Ok(out)
}

/// A vertex of Γ as a Hurwitz problem of its own: the local space and, for
/// each of its markings, the flag of Γ it corresponds to.
struct LocalProblem {
    spec: HurwitzSpec,
    flags: Vec<usize>,
}

fn local_problem(gg: &GGraph, w: usize) -> Result<LocalProblem> {
    let gr = &gg.group;
    let datum = gg.local_datum(w);
    let stab = &datum.stabilizer;
    let (group, to_ambient): (Arc<Group>, Vec<usize>) = match gr.cyclic {
        Some(m) => {
            let step = m / stab.len();
            (Group::cyclic(stab.len()), (0..stab.len()).map(|k| k * step).collect())
        }
        None => gr.subgroup(stab),
    };
    let local = |x: usize| to_ambient.iter().position(|&y| y == x).expect("element of the stabilizer");
    let xi: Vec<usize> = datum.xi.iter().map(|&h| local(h)).collect();
    let spec = HurwitzSpec::new(datum.genus, group, xi)?;
    let flags = spec.marking_layout().iter().map(|m| gg.flag_act(to_ambient[m.coset], datum.flags[m.branch])).collect();
    Ok(LocalProblem { spec, flags })
}

fn local_cycle(p: &LocalProblem, kept: &[bool]) -> HurwitzCycleRef {
    let kept_labels: Vec<u32> = (0..kept.len()).filter(|&i| kept[i]).map(|i| i as u32 + 1).collect();
    HurwitzCycleRef { name: "?".into(), spec: p.spec.clone(), keep: kept_labels, norm: Q::one() }
}

fn describe_local(p: &LocalProblem, kept: &[bool]) -> String {
    format!("{} (g={}, |G|={})", local_cycle(p, kept), p.spec.g, p.spec.group.order())
}

fn solve_local(db: &CycleDb, p: &LocalProblem, kept: &[bool]) -> Result<()> {
    let mut cycle = local_cycle(p, kept);
    if !cohomology_is_tautological(cycle.spec.g, cycle.n()) || cycle.codim() < 0 {
        return Ok(());
    }
    cycle.name = format!("L{}", cycle.spec.g);
    let s = solve_cycle(&cycle, cycle.codim() as u32)?;
    if !s.is_unique() {
        return Err(Error::DegeneratePairing(format!("{cycle} is not determined by its intersection numbers")));
    }
    db.insert(CycleRecord::new(cycle, s.class, "solved by pairing against decorated strata")?);
    Ok(())
}

/// The database record whose cycle agrees with the local problem, with the
/// local marking matched to each of its legs.
fn match_record(db: &CycleDb, p: &LocalProblem, kept: &[bool]) -> Option<(CycleRecord, Vec<usize>)> {
    let layout = p.spec.marking_layout();
    let pattern = |spec: &HurwitzSpec, kept: &dyn Fn(u32) -> bool| -> Vec<(usize, Vec<bool>)> {
        let lay = spec.marking_layout();
        (0..spec.b()).map(|i| (spec.xi[i], lay.iter().filter(|m| m.branch == i).map(|m| kept(m.label)).collect())).collect()
    };
    let local_pat = pattern(&p.spec, &|l| kept[(l - 1) as usize]);
    for rec in db.records.read().iter() {
        let rs = &rec.cycle.spec;
        if rs.g != p.spec.g || rs.group.table != p.spec.group.table || rs.b() != p.spec.b() {
            continue;
        }
        let rec_pat = pattern(rs, &|l| rec.cycle.keep.contains(&l));
        let mut used = vec![false; p.spec.b()];
        let mut sigma = Vec::new();
        for rp in &rec_pat {
            match (0..p.spec.b()).find(|&j| !used[j] && local_pat[j] == *rp) {
                Some(j) => {
                    used[j] = true;
                    sigma.push(j);
                }
                None => break,
            }
        }
        if sigma.len() != rs.b() {
            continue;
        }
        let rlay = rs.marking_layout();
        let legs = rec
            .cycle
            .keep
            .iter()
            .map(|&l| {
                let m = &rlay[(l - 1) as usize];
                let c = rlay.iter().filter(|x| x.branch == m.branch && x.coset < m.coset).count();
                let local: Vec<usize> = (0..layout.len()).filter(|&i| layout[i].branch == sigma[m.branch]).collect();
                local[c]
            })
            .collect();
        return Some((rec.clone(), legs));
    }
    None
}

/// A class of top degree with integral 1.
pub fn point_class(g: u32, labels: &[u32]) -> Result<TautClass> {
    let dim = 3 * g as i64 - 3 + labels.len() as i64;
    if dim < 0 {
        return Err(Error::Unstable { g, n: labels.len() as u32 });
    }
    let x = match labels.iter().min() {
        Some(&l) => TautClass::psi(g, labels, l, dim as u32),
        None => {
            let mut t = Term::bare(StableGraph::smooth(g, &[]));
            t.kappa[0] = vec![1; dim as usize];
            TautClass::from_term(&t, Q::one())
        }
    };
    let v = x.evaluate()?;
    Ok(x.scaled(&(Q::one() / v)))
}

/// `π_* φ_* [H̄]` of the local problem at `w`, on the labels of the kept
/// flags, when it is known.
fn local_class(gg: &GGraph, w: usize, kept_flag: &dyn Fn(usize) -> bool, label_of: &dyn Fn(usize) -> u32, db: &CycleDb) -> Result<Option<TautClass>> {
    let p = local_problem(gg, w)?;
    let kept: Vec<bool> = p.flags.iter().map(|&f| kept_flag(f)).collect();
    let labels: Vec<u32> = p.flags.iter().zip(&kept).filter(|(_, &k)| k).map(|(&f, _)| label_of(f)).collect();
    let all_kept = kept.iter().all(|&k| k);
    let g = p.spec.g;
    if all_kept && p.spec.group.order() == 1 {
        return Ok(Some(TautClass::fundamental(g, &labels)));
    }
    if all_kept && p.spec.dim() == 0 {
        return Ok(Some(point_class(g, &labels)?.scaled(&p.spec.degree_delta()?)));
    }
    if match_record(db, &p, &kept).is_none() && db.solves_missing() {
        solve_local(db, &p, &kept)?;
    }
    let Some((rec, legs)) = match_record(db, &p, &kept) else { return Ok(None) };
    let map: HashMap<u32, u32> = legs.iter().enumerate().map(|(k, &m)| (k as u32 + 1, label_of(p.flags[m]))).collect();
    Ok(Some(rec.class.relabel_legs(&|l| map[&l]).scaled(&(Q::one() / &rec.cycle.norm))))
}

fn missing(gg: &GGraph, w: usize, kept_flag: &dyn Fn(usize) -> bool) -> Error {
    match local_problem(gg, w) {
        Ok(p) => {
            let kept: Vec<bool> = p.flags.iter().map(|&f| kept_flag(f)).collect();
            Error::MissingDb(describe_local(&p, &kept))
        }
        Err(e) => e,
    }
}

/// Terms in which every vertex of A is the image of a single vertex of Γ
/// fixed by G, without excess: each factor is a database class with the
/// forgotten markings already forgotten.
fn resolve_direct(cycle: &HurwitzCycleRef, a: &StableGraph, t: &HurwitzTerm, db: &CycleDb) -> Result<Option<KunnethClass>> {
    let gg = &t.structure.gg;
    let f = &t.structure.f;
    let gam = &gg.graph;
    let nh = gam.num_half_edges();
    let mut pre = vec![usize::MAX; nh];
    for (x, &h) in f.beta.iter().enumerate() {
        pre[h] = x;
    }
    let excess: BTreeSet<usize> = t.excess.iter().flat_map(|&(h, h2)| [h, h2]).collect();
    let mut factors = Vec::new();
    for v in 0..a.num_vertices() {
        let fiber: Vec<usize> = (0..gam.num_vertices()).filter(|&w| f.alpha[w] == v).collect();
        if fiber.len() != 1 {
            return Ok(None);
        }
        let w = fiber[0];
        let flags = gam.flags_at(w);
        if gg.vertex_orbit(w).len() != 1 || flags.iter().any(|&x| x < nh && (pre[x] == usize::MAX || excess.contains(&x))) {
            return Ok(None);
        }
        let kept = |x: usize| x < nh || cycle.user_label(gam.legs[x - nh].0).is_some();
        let label = |x: usize| {
            if x < nh {
                NODE_LABEL + pre[x] as u32
            } else {
                cycle.user_label(gam.legs[x - nh].0).expect("kept marking")
            }
        };
        match local_class(gg, w, &kept, &label, db)? {
            Some(c) => factors.push(c),
            None => return Ok(None),
        }
    }
    Ok(Some(KunnethClass::tensor(a, &factors)?.scaled(&t.coefficient)))
}

/// The general case: vertex classes with all markings kept, diagonals for
/// vertex orbits, excess, gluing along the contracted edges and forgetting
/// markings.
fn resolve_general(cycle: &HurwitzCycleRef, a: &StableGraph, t: &HurwitzTerm, db: &CycleDb) -> Result<KunnethClass> {
    let gg = &t.structure.gg;
    let gam = &gg.graph;
    let nh = gam.num_half_edges();
    let nv = gam.num_vertices();
    let gl = |x: usize| if x < nh { NODE_LABEL + x as u32 } else { gam.legs[x - nh].0 };
    let mut done = vec![false; nv];
    let mut expansions: Vec<(Q, Vec<Option<TautClass>>)> = vec![(Q::one(), vec![None; nv])];
    for w in 0..nv {
        if done[w] {
            continue;
        }
        let orbit = gg.vertex_orbit(w);
        for &u in &orbit {
            done[u] = true;
        }
        let cw = local_class(gg, w, &|_| true, &gl, db)?.ok_or_else(|| missing(gg, w, &|_| true))?;
        let copies = push_diagonal(&cw, orbit.len())?;
        let mut next = Vec::new();
        for (c, fs) in &expansions {
            for (c2, parts) in &copies {
                let mut fs2 = fs.clone();
                for (k, &u) in orbit.iter().enumerate() {
                    let tr = (0..gg.group.order()).find(|&s| gg.vact[s][w] == u).expect("orbit element");
                    let mut map = HashMap::new();
                    for x in gam.flags_at(w) {
                        map.insert(gl(x), gl(gg.flag_act(tr, x)));
                    }
                    fs2[u] = Some(parts[k].relabel_legs(&|l| map[&l]));
                }
                next.push((c * c2, fs2));
            }
        }
        expansions = next;
    }
    let mut k = KunnethClass::zero(gam);
    for (c, fs) in expansions {
        let fs: Vec<TautClass> = fs.into_iter().map(|x| x.expect("every vertex covered")).collect();
        k.add(&KunnethClass::tensor(gam, &fs)?.scaled(&c));
    }
    for &(h, h2) in &t.excess {
        let mut fac = KunnethClass::zero(gam);
        for x in [h, h2] {
            let mut factors: Vec<Term> = (0..nv).map(|v| Term::bare(StableGraph::smooth(gam.genera[v], &factor_labels(gam, v)))).collect();
            let v = gam.half_vertex(x);
            let fl = factors[v].graph.leg_flag(NODE_LABEL + x as u32).expect("half-edge leg");
            factors[v].psi[fl] = 1;
            fac.add_term(factors, -Q::one());
        }
        k = k.product(&fac)?;
    }
    let mut out = KunnethClass::zero(a);
    for (ts, c) in k.terms() {
        let mut factors = Vec::new();
        for v in 0..a.num_vertices() {
            factors.push(graft_fiber(cycle, t, a, v, ts)?);
        }
        out.add(&KunnethClass::tensor(a, &factors)?.scaled(&(c * &t.coefficient)));
    }
    Ok(out)
}

/// Glue the factors over the fiber of `v` along the contracted edges and
/// forget the markings that are not kept.
fn graft_fiber(cycle: &HurwitzCycleRef, t: &HurwitzTerm, a: &StableGraph, v: usize, ts: &[Term]) -> Result<TautClass> {
    let gam = &t.structure.gg.graph;
    let f = &t.structure.f;
    let nh = gam.num_half_edges();
    let mut pre = vec![usize::MAX; nh];
    for (x, &h) in f.beta.iter().enumerate() {
        pre[h] = x;
    }
    let fiber: Vec<usize> = (0..gam.num_vertices()).filter(|&w| f.alpha[w] == v).collect();
    let local = |w: usize| fiber.iter().position(|&u| u == w);
    let mut edges = Vec::new();
    let mut half_local = HashMap::new();
    for (k, &(x, y)) in gam.edges.iter().enumerate() {
        if pre[2 * k] == usize::MAX && local(x).is_some() {
            half_local.insert(2 * k, 2 * edges.len());
            half_local.insert(2 * k + 1, 2 * edges.len() + 1);
            edges.push((local(x).unwrap(), local(y).expect("contracted edge inside the fiber")));
        }
    }
    let mut legs: Vec<(u32, usize)> = gam.legs.iter().filter_map(|&(l, w)| local(w).map(|i| (l, i))).collect();
    for h in 0..nh {
        if pre[h] != usize::MAX {
            if let Some(i) = local(gam.half_vertex(h)) {
                legs.push((IMAGE_LABEL + pre[h] as u32, i));
            }
        }
    }
    let sub = StableGraph::unchecked(fiber.iter().map(|&w| gam.genera[w]).collect(), legs, edges);
    let rename = |l: u32| -> u32 {
        if l < NODE_LABEL {
            return l;
        }
        let h = (l - NODE_LABEL) as usize;
        match half_local.get(&h) {
            Some(&hl) => NODE_LABEL + hl as u32,
            None => IMAGE_LABEL + pre[h] as u32,
        }
    };
    let parts: Vec<Term> = fiber.iter().map(|&w| ts[w].relabel_legs(&rename)).collect();
    let glued = graft(&sub, &parts);
    let forgotten: Vec<u32> = gam.legs.iter().filter(|(l, w)| f.alpha[*w] == v && cycle.user_label(*l).is_none()).map(|(l, _)| *l).collect();
    let finalize = |l: u32| -> u32 {
        if l >= IMAGE_LABEL && l < FORGET_LABEL {
            NODE_LABEL + (l - IMAGE_LABEL)
        } else {
            cycle.user_label(l).unwrap_or(FORGET_LABEL + l)
        }
    };
    let mut x = TautClass::from_term(&glued.relabel_legs(&finalize), Q::one());
    for l in forgotten {
        x = x.pushforward_forgetful(FORGET_LABEL + l)?;
    }
    if x.labels != factor_labels(a, v) {
        return Err(Error::Space(format!("fiber over vertex {v} does not carry the legs of A")));
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Boundary constraints

/// One linear equation `Σ coefficients[i] · a_i = rhs` on the coordinates
/// of a cycle in a spanning set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    /// index of the boundary graph the equation comes from
    pub graph: usize,
    pub coefficients: Vec<Q>,
    pub rhs: Q,
}

/// Equations expressing `ξ_A^*(Σ a_i generators[i]) = ξ_A^*[cycle]` for
/// each graph, tested against products of decorated strata on the vertex
/// factors of the complementary degree.
pub fn boundary_constraints(
    cycle: &HurwitzCycleRef,
    k: u32,
    graphs: &[StableGraph],
    generators: &[TautClass],
    db: &CycleDb,
) -> Result<Vec<Constraint>> {
    if k as i64 != cycle.codim() {
        return Err(Error::Dimension(format!("cycle has codimension {}, asked for degree {k}", cycle.codim())));
    }
    let mut out = Vec::new();
    for (gi, a) in graphs.iter().enumerate() {
        let target = pullback_class(cycle, a, db)?;
        let pulled: Vec<KunnethClass> = generators.iter().map(|x| x.pullback_boundary(a)).collect::<Result<_>>()?;
        let dims: Vec<u32> = (0..a.num_vertices()).map(|v| a.vertex_dim(v).max(0) as u32).collect();
        let total: i64 = dims.iter().map(|&d| d as i64).sum::<i64>() - k as i64;
        if total < 0 {
            continue;
        }
        let mut tests: Vec<KunnethClass> = Vec::new();
        let splits = strata::compositions(total as u32, a.num_vertices());
        for split in splits {
            if split.iter().zip(&dims).any(|(s, d)| s > d) {
                continue;
            }
            let per: Vec<Vec<TautClass>> = (0..a.num_vertices())
                .map(|v| strata::decorated_strata(a.genera[v], &factor_labels(a, v), split[v]))
                .collect::<Result<_>>()?;
            let mut combos: Vec<Vec<TautClass>> = vec![vec![]];
            for options in &per {
                combos = combos.into_iter().flat_map(|c| options.iter().map(move |o| [c.clone(), vec![o.clone()]].concat())).collect();
            }
            for c in combos {
                tests.push(KunnethClass::tensor(a, &c)?);
            }
        }
        let rows: Vec<Constraint> = tests
            .par_iter()
            .map(|tc| {
                let coefficients = pulled.iter().map(|p| p.product(tc)?.evaluate()).collect::<Result<Vec<Q>>>()?;
                let rhs = target.product(tc)?.evaluate()?;
                Ok(Constraint { graph: gi, coefficients, rhs })
            })
            .collect::<Result<_>>()?;
        out.extend(rows.into_iter().filter(|r| !(r.rhs.is_zero() && r.coefficients.iter().all(|c| c.is_zero()))));
    }
    Ok(out)
}

/// Solve a list of constraints for the coordinates.
pub fn solve_constraints(constraints: &[Constraint], unknowns: usize) -> Result<SolveResult> {
    if constraints.is_empty() {
        return Ok(SolveResult::Underdetermined {
            particular: vec![Q::zero(); unknowns],
            kernel: (0..unknowns).map(|i| (0..unknowns).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect(),
        });
    }
    let m = RatMatrix::from_rows(constraints.iter().map(|c| c.coefficients.clone()).collect())?;
    let b: Vec<Q> = constraints.iter().map(|c| c.rhs.clone()).collect();
    rational::solve_linear(&m, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn sg(genera: Vec<u32>, legs: Vec<(u32, usize)>, edges: Vec<(usize, usize)>) -> StableGraph {
        StableGraph::new(genera, legs, edges).unwrap()
    }

    fn dhat() -> Vec<TautClass> {
        vec![
            TautClass::normalized_stratum(&sg(vec![0, 0, 0], vec![], vec![(0, 0), (0, 1), (1, 2), (1, 2), (2, 2)])),
            TautClass::normalized_stratum(&sg(vec![0, 0, 0], vec![], vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)])),
            TautClass::normalized_stratum(&sg(vec![1, 0, 0, 0], vec![], vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 3)])),
        ]
    }

    #[test]
    fn parse_and_display() {
        let c = HurwitzCycleRef::parse("H:3:Z2:1^8").unwrap();
        assert_eq!(c.spec.gprime, 0);
        assert_eq!(c.norm, Q::new(BigInt::one(), factorial(8)));
        let w = HurwitzCycleRef::parse("Wp:2:cyclic:2:1^6:keep=1").unwrap();
        assert_eq!(w.norm, q(1, 120));
        assert_eq!(w.codim(), 1);
        let again = HurwitzCycleRef::parse(&w.to_string()).unwrap();
        assert_eq!(again, w);
        assert!(HurwitzCycleRef::parse("H:3:Z2:1^7").is_err());
        assert!(HurwitzCycleRef::parse("H:3:Q8:1").is_err());
        assert!(HurwitzCycleRef::parse("H:2:Z2:1^6:keep=9").is_err());
    }

    #[test]
    fn hyperelliptic_pairings() {
        let c = HurwitzCycleRef::parse("H:3:Z2:1^8").unwrap();
        assert_eq!(pairing_vector(&c, &dhat()).unwrap(), vec![q(-1, 8), q(3, 16), Q::zero()]);
    }

    #[test]
    fn ring_side_and_cover_side_agree_for_seeds() {
        let c = HurwitzCycleRef::parse("H:3:Z2:1^8").unwrap();
        let rec = CycleDb::seeded().find(&c).unwrap();
        for x in dhat() {
            assert_eq!(crate::taut::pairing(&rec.class, &x).unwrap(), pairing_vector(&c, &[x]).unwrap()[0]);
        }
    }

    #[test]
    fn fundamental_class_pushes_to_degree() {
        let c = HurwitzCycleRef::parse("W:2:Z2:1^6:keep=1").unwrap();
        let p = pullpush_delta(&c, &TautClass::fundamental(2, &[1])).unwrap();
        let mut expect = TautClass::fundamental(0, &[1, 2, 3, 4, 5, 6]);
        expect = expect.scaled(&q(1, 2));
        assert_eq!(p, expect);
    }

    #[test]
    fn wrong_degree_is_rejected() {
        let c = HurwitzCycleRef::parse("H:3:Z2:1^8").unwrap();
        let x = TautClass::kappa(3, &[], 1);
        assert!(matches!(pairing_vector(&c, &[x]), Err(Error::Dimension(_))));
    }

    #[test]
    fn injectivity_examples() {
        assert_eq!(injectivity_range(3, 0), 4);
        assert_eq!(injectivity_range(0, 5), 1);
        assert_eq!(injectivity_range(2, 1), 2);
    }

    #[test]
    fn diagonal_of_m11() {
        let d = diagonal_class(1, 1, 2).unwrap();
        // ∫_Δ ψ⊗1 = ∫ ψ
        let base = product_base(1, &[1], 2);
        let t = KunnethClass::tensor(&base, &[TautClass::psi(1, &[1], 1, 1), TautClass::fundamental(1, &[1])]).unwrap();
        assert_eq!(d.product(&t).unwrap().evaluate().unwrap(), q(1, 24));
    }

    #[test]
    fn point_classes() {
        assert_eq!(point_class(0, &[1, 2, 3]).unwrap(), TautClass::fundamental(0, &[1, 2, 3]));
        assert_eq!(point_class(2, &[]).unwrap().evaluate().unwrap(), Q::one());
    }
}
