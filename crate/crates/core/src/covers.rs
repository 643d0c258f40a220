//! Finite groups, Riemann–Hurwitz arithmetic and the degree of the target
//! map δ from a space of admissible G-covers.

use crate::error::{Error, Result};
use crate::rational::{q, qi, Q};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    pub names: Vec<String>,
    /// `table[a][b] = a*b`
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<usize>,
    /// `Some(m)` when built as Z/m with element k standing for k.
    pub cyclic: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawGroup {
    pub order: usize,
    pub names: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl Group {
    pub fn cyclic(m: usize) -> Arc<Group> {
        let table = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        let inverse = (0..m).map(|a| (m - a) % m).collect();
        Arc::new(Group { names: (0..m).map(|k| k.to_string()).collect(), table, identity: 0, inverse, cyclic: Some(m) })
    }

    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Arc<Group>> {
        let n = table.len();
        let bad = |s: &str| Error::Parse(format!("group table: {s}"));
        if n == 0 || names.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(bad("shape"));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| bad("no identity"))?;
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n).find(|&b| table[a][b] == identity).ok_or_else(|| bad("missing inverse"))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(bad("not associative"));
                    }
                }
            }
        }
        Ok(Arc::new(Group { names, table, identity, inverse, cyclic: None }))
    }

    pub fn from_raw(raw: &RawGroup) -> Result<Arc<Group>> {
        if raw.order != raw.table.len() {
            return Err(Error::Parse("group order does not match table".into()));
        }
        Self::from_table(raw.names.clone(), raw.table.clone())
    }

    /// Symmetric group on three letters (used in tests and examples).
    pub fn s3() -> Arc<Group> {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|&x| x == p).unwrap();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let names = ["e", "(01)", "(12)", "(02)", "(012)", "(021)"].iter().map(|s| s.to_string()).collect();
        Self::from_table(names, table).unwrap()
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// `g h g^{-1}`
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn elem_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn centralizer(&self, h: usize) -> Vec<usize> {
        (0..self.order()).filter(|&g| self.mul(g, h) == self.mul(h, g)).collect()
    }

    pub fn center_size(&self) -> usize {
        (0..self.order()).filter(|&g| self.centralizer(g).len() == self.order()).count()
    }

    pub fn conj_class(&self, h: usize) -> Vec<usize> {
        let s: BTreeSet<usize> = (0..self.order()).map(|g| self.conj(g, h)).collect();
        s.into_iter().collect()
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        if let Some(m) = self.cyclic {
            let k: i64 = name.trim().parse().map_err(|_| Error::Parse(format!("bad element {name:?}")))?;
            return Ok(k.rem_euclid(m as i64) as usize);
        }
        self.names.iter().position(|n| n == name.trim()).ok_or_else(|| Error::Parse(format!("unknown element {name:?}")))
    }

    /// Subgroup generated by `gens`, as a sorted element list.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::new();
        set.insert(self.identity);
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    /// Every subgroup, sorted by (order, elements).
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: BTreeSet<Vec<usize>> = (0..self.order()).map(|g| self.closure(&[g])).collect();
        loop {
            let cur: Vec<Vec<usize>> = found.iter().cloned().collect();
            let mut added = false;
            for a in &cur {
                for b in &cur {
                    let gens: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
                    if found.insert(self.closure(&gens)) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        let mut v: Vec<Vec<usize>> = found.into_iter().collect();
        v.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        v
    }

    pub fn conjugate_subgroup(&self, g: usize, h: &[usize]) -> Vec<usize> {
        let mut v: Vec<usize> = h.iter().map(|&x| self.conj(g, x)).collect();
        v.sort_unstable();
        v
    }

    /// One representative per conjugacy class of subgroups (the first in
    /// the order of `subgroups`).
    pub fn subgroup_class_reps(&self) -> Vec<Vec<usize>> {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        for h in self.subgroups() {
            if seen.contains(&h) {
                continue;
            }
            for g in 0..self.order() {
                seen.insert(self.conjugate_subgroup(g, &h));
            }
            out.push(h);
        }
        out
    }

    /// The subgroup `elems` as a group in its own right, with the map from
    /// its indices back to ours.
    pub fn subgroup(&self, elems: &[usize]) -> (Arc<Group>, Vec<usize>) {
        let pos = |x: usize| elems.iter().position(|&y| y == x).unwrap();
        let table = elems.iter().map(|&a| elems.iter().map(|&b| pos(self.mul(a, b))).collect()).collect();
        let names = elems.iter().map(|&a| self.names[a].clone()).collect();
        let identity = pos(self.identity);
        let inverse = elems.iter().map(|&a| pos(self.inv(a))).collect();
        (Arc::new(Group { names, table, identity, inverse, cyclic: None }), elems.to_vec())
    }

    pub fn is_cyclic(&self) -> Option<usize> {
        let n = self.order();
        (0..n).find(|&g| self.elem_order(g) == n)
    }
}

/// Riemann–Hurwitz: the genus of the quotient, if it is a nonnegative integer.
pub fn target_genus(g: u32, group: &Group, xi: &[usize]) -> Option<u32> {
    let n = group.order() as i64;
    let ram: i64 = xi.iter().map(|&h| n - n / group.elem_order(h) as i64).sum();
    let num = 2 * g as i64 - 2 - ram;
    if num % n != 0 {
        return None;
    }
    let t = num / n + 2;
    if t < 0 || t % 2 != 0 {
        return None;
    }
    Some((t / 2) as u32)
}

/// Closed formula for Z/m.
pub fn degree_delta_cyclic(gprime: u32, m: u64, xi: &[i64]) -> Q {
    let mi = m as i64;
    if xi.iter().sum::<i64>().rem_euclid(mi) != 0 {
        return Q::zero();
    }
    let m0 = xi.iter().fold(m, |acc, &h| acc.gcd(&(h.rem_euclid(mi) as u64)));
    if gprime == 0 && m0 > 1 {
        return Q::zero();
    }
    let mut val = if gprime == 0 { q(1, mi) } else { qi(mi).pow(2 * gprime as i32 - 1) };
    let mut rest = m0;
    let mut p = 2u64;
    while rest > 1 {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            val *= Q::one() - q(1, p as i64).pow(2 * gprime as i32);
        }
        p += 1;
    }
    for &h in xi {
        val *= qi(m.gcd(&(h.rem_euclid(mi) as u64)) as i64);
    }
    val
}

/// Exhaustive count over generator images; `budget` caps the number of
/// tuples examined.
pub fn degree_delta_bruteforce(gprime: u32, group: &Group, xi: &[usize], budget: u64) -> Result<Q> {
    let n = group.order();
    let classes: Vec<Vec<usize>> = xi.iter().map(|&h| group.conj_class(h)).collect();
    let mut work: f64 = (n as f64).powi(2 * gprime as i32);
    for c in classes.iter().take(classes.len().saturating_sub(1)) {
        work *= c.len() as f64;
    }
    if work > budget as f64 {
        return Err(Error::Budget(format!("{work} tuples exceed budget {budget}")));
    }
    let slots = 2 * gprime as usize;
    let count_from = |first: Option<usize>| -> u64 {
        let mut total = 0u64;
        let mut imgs: Vec<usize> = Vec::new();
        rec_ab(group, slots, &classes, first, &mut imgs, group.identity, &mut total);
        total
    };
    let total: u64 = if slots > 0 {
        (0..n).into_par_iter().map(|a| count_from(Some(a))).sum()
    } else {
        count_from(None)
    };
    let mut val = Q::new(total.into(), (n as u64).into());
    for &h in xi {
        val *= q(group.centralizer(h).len() as i64, group.elem_order(h) as i64);
    }
    Ok(val)
}

fn rec_ab(
    group: &Group,
    slots: usize,
    classes: &[Vec<usize>],
    first: Option<usize>,
    imgs: &mut Vec<usize>,
    prod: usize,
    total: &mut u64,
) {
    let n = group.order();
    if imgs.len() < slots {
        // pairs (a_j, b_j) contribute the commutator once both are chosen
        let choices: Vec<usize> = match (imgs.len(), first) {
            (0, Some(a)) => vec![a],
            _ => (0..n).collect(),
        };
        for x in choices {
            imgs.push(x);
            let p = if imgs.len() % 2 == 0 {
                let (a, b) = (imgs[imgs.len() - 2], x);
                let comm = group.mul(group.mul(a, b), group.mul(group.inv(a), group.inv(b)));
                group.mul(prod, comm)
            } else {
                prod
            };
            rec_ab(group, slots, classes, first, imgs, p, total);
            imgs.pop();
        }
        return;
    }
    let k = imgs.len() - slots;
    if k + 1 == classes.len() || classes.is_empty() {
        let last = if classes.is_empty() {
            if prod != group.identity {
                return;
            }
            None
        } else {
            let s = group.inv(prod);
            if !classes[k].contains(&s) {
                return;
            }
            Some(s)
        };
        let mut gens = imgs.clone();
        gens.extend(last);
        if group.closure(&gens).len() == n {
            *total += 1;
        }
        return;
    }
    for &s in &classes[k] {
        imgs.push(s);
        rec_ab(group, slots, classes, first, imgs, group.mul(prod, s), total);
        imgs.pop();
    }
}

/// Degree of δ for any group: the closed formula when the group is cyclic,
/// otherwise exhaustive enumeration.
pub fn degree_delta(gprime: u32, group: &Group, xi: &[usize]) -> Result<Q> {
    if let Some(m) = group.cyclic {
        let v: Vec<i64> = xi.iter().map(|&h| h as i64).collect();
        return Ok(degree_delta_cyclic(gprime, m as u64, &v));
    }
    if let Some(gen) = group.is_cyclic() {
        // transport to Z/m through a generator
        let m = group.order();
        let mut log = vec![0usize; m];
        let mut x = group.identity;
        for k in 0..m {
            log[x] = k;
            x = group.mul(x, gen);
        }
        let v: Vec<i64> = xi.iter().map(|&h| log[h] as i64).collect();
        return Ok(degree_delta_cyclic(gprime, m as u64, &v));
    }
    degree_delta_bruteforce(gprime, group, xi, 50_000_000)
}

/// A marking `p_{i,a}` of an admissible cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marking {
    pub label: u32,
    pub branch: usize,
    /// smallest element of the coset `a⟨h_i⟩`
    pub coset: usize,
    pub stabilizer_order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HurwitzSpec {
    pub g: u32,
    pub group: Arc<Group>,
    pub xi: Vec<usize>,
    pub gprime: u32,
}

impl HurwitzSpec {
    pub fn new(g: u32, group: Arc<Group>, xi: Vec<usize>) -> Result<Self> {
        let gprime = target_genus(g, &group, &xi)
            .ok_or_else(|| Error::Precondition("Riemann–Hurwitz gives no nonnegative integer target genus".into()))?;
        Ok(HurwitzSpec { g, group, xi, gprime })
    }

    pub fn b(&self) -> usize {
        self.xi.len()
    }

    pub fn r(&self) -> usize {
        self.xi.iter().map(|&h| self.group.order() / self.group.elem_order(h)).sum()
    }

    pub fn dim(&self) -> i64 {
        3 * self.gprime as i64 - 3 + self.b() as i64
    }

    /// Left cosets of `⟨h⟩`, each as its sorted element list, ordered by
    /// smallest element.
    pub fn cosets(&self, h: usize) -> Vec<Vec<usize>> {
        let cyc = self.group.closure(&[h]);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in 0..self.group.order() {
            if seen.contains(&a) {
                continue;
            }
            let mut c: Vec<usize> = cyc.iter().map(|&x| self.group.mul(a, x)).collect();
            c.sort_unstable();
            for &x in &c {
                seen.insert(x);
            }
            out.push(c);
        }
        out
    }

    pub fn marking_layout(&self) -> Vec<Marking> {
        let mut out = Vec::new();
        for (i, &h) in self.xi.iter().enumerate() {
            let ord = self.group.elem_order(h);
            for c in self.cosets(h) {
                out.push(Marking { label: out.len() as u32 + 1, branch: i, coset: c[0], stabilizer_order: ord });
            }
        }
        out
    }

    pub fn degree_delta(&self) -> Result<Q> {
        degree_delta(self.gprime, &self.group, &self.xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_hurwitz_examples() {
        let z2 = Group::cyclic(2);
        assert_eq!(target_genus(2, &z2, &[1; 6]), Some(0));
        assert_eq!(target_genus(4, &z2, &[1; 6]), Some(1));
        assert_eq!(target_genus(3, &z2, &[]), Some(2));
        assert_eq!(target_genus(2, &z2, &[1; 5]), None);
    }

    #[test]
    fn cyclic_degrees() {
        assert_eq!(degree_delta_cyclic(0, 2, &[1; 6]), q(1, 2));
        assert_eq!(degree_delta_cyclic(2, 2, &[]), q(15, 2));
        assert_eq!(degree_delta_cyclic(1, 2, &[]), q(3, 2));
        assert_eq!(degree_delta_cyclic(1, 2, &[1; 6]), qi(2));
        assert_eq!(degree_delta_cyclic(0, 2, &[1; 5]), Q::zero());
    }

    #[test]
    fn s3_four_transpositions() {
        let s3 = Group::s3();
        let t = s3.element("(01)").unwrap();
        assert_eq!(degree_delta_bruteforce(0, &s3, &[t; 4], 1_000_000).unwrap(), qi(4));
        assert_eq!(degree_delta_bruteforce(0, &s3, &[], 10).unwrap(), Q::zero());
        assert!(degree_delta_bruteforce(2, &s3, &[t; 4], 10).is_err());
    }

    #[test]
    fn group_basics() {
        let s3 = Group::s3();
        assert!(!s3.is_abelian());
        assert_eq!(s3.center_size(), 1);
        assert_eq!(s3.subgroups().len(), 6);
        assert_eq!(s3.subgroup_class_reps().len(), 4);
        assert!(Group::from_table(vec!["a".into(), "b".into()], vec![vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn layouts() {
        let z2 = Group::cyclic(2);
        assert_eq!(HurwitzSpec::new(2, z2.clone(), vec![1; 6]).unwrap().r(), 6);
        let mut xi = vec![1; 8];
        xi.push(0);
        let s = HurwitzSpec::new(3, z2.clone(), xi).unwrap();
        assert_eq!(s.r(), 10);
        let lay = s.marking_layout();
        assert_eq!(lay[8].branch, 8);
        assert_eq!(lay[9].coset, 1);
        let mut xi = vec![1; 6];
        xi.extend([0, 0]);
        assert_eq!(HurwitzSpec::new(4, z2, xi).unwrap().r(), 10);
    }
}
