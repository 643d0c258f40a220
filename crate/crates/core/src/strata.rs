//! Spanning sets of decorated stratum classes of a fixed degree and the
//! selection of bases through the intersection pairing.

use crate::error::Result;
use crate::graph::{self, StableGraph};
use crate::rational::{self, RatMatrix, Q};
use crate::taut::{pairing, TautClass, Term};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeSet;

/// Partitions of `n` into positive parts, largest part first.
pub fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            rec(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Weak compositions of `n` into `k` parts.
pub fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every decoration of total degree `r` on `gr` that does not exceed the
/// dimension of any vertex.
pub fn decorations(gr: &StableGraph, r: u32) -> Vec<Term> {
    fn rec(gr: &StableGraph, v: usize, left: u32, t: &mut Term, out: &mut Vec<Term>) {
        if v == gr.num_vertices() {
            if left == 0 {
                out.push(t.clone());
            }
            return;
        }
        let cap = gr.vertex_dim(v).max(0) as u32;
        let flags = gr.flags_at(v);
        for dv in 0..=left.min(cap) {
            for p in 0..=dv {
                for comp in compositions(p, flags.len()) {
                    for part in partitions(dv - p) {
                        for (&f, &e) in flags.iter().zip(&comp) {
                            t.psi[f] = e;
                        }
                        t.kappa[v] = part;
                        rec(gr, v + 1, left - dv, t, out);
                    }
                }
            }
        }
        for &f in &flags {
            t.psi[f] = 0;
        }
        t.kappa[v].clear();
    }
    let mut out = Vec::new();
    rec(gr, 0, r, &mut Term::bare(gr.clone()), &mut out);
    out
}

fn category(t: &Term) -> u8 {
    let smooth = t.graph.num_edges() == 0;
    let has_kappa = t.kappa.iter().any(|k| !k.is_empty());
    let has_psi = t.psi.iter().any(|&e| e > 0);
    match (smooth, has_kappa, has_psi) {
        (true, false, _) => 0,
        (false, false, false) => 1,
        (true, true, _) => 2,
        _ => 3,
    }
}

/// Decorated strata of degree `d` on M̄_{g, labels}, each divided by the
/// automorphism count of its graph, without duplicates. Pure ψ monomials
/// come first, then undecorated boundary strata, then κ monomials, then
/// everything else.
pub fn decorated_strata(g: u32, labels: &[u32], d: u32) -> Result<Vec<TautClass>> {
    let mut labels = labels.to_vec();
    labels.sort_unstable();
    let n = labels.len() as u32;
    if d as i64 > 3 * g as i64 - 3 + n as i64 {
        return Ok(vec![]);
    }
    let graphs = graph::enumerate_graphs(g, n, d as usize)?;
    let mut seen = BTreeSet::new();
    let mut buckets: [Vec<TautClass>; 4] = Default::default();
    for gr in graphs {
        let gr = gr.relabel_legs(&|l| labels[(l - 1) as usize]);
        let e = gr.num_edges() as u32;
        if e > d {
            continue;
        }
        let aut = Q::new(BigInt::one(), BigInt::from(graph::automorphism_count(&gr)));
        for t in decorations(&gr, d - e) {
            let (_, key) = t.canonical();
            if !seen.insert(key) {
                continue;
            }
            buckets[category(&t) as usize].push(TautClass::from_term(&t, aut.clone()));
        }
    }
    Ok(buckets.into_iter().flatten().collect())
}

/// Undecorated strata first, otherwise in the given order.
pub fn undecorated_first(mut v: Vec<TautClass>) -> Vec<TautClass> {
    v.sort_by_key(|x| !x.terms().all(|(t, _)| t.is_undecorated()));
    v
}

/// Indices of a maximal set of linearly independent rows, chosen greedily
/// in order.
pub fn independent_rows(rows: &[Vec<Q>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..rows.len() {
        if rows[i].iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut trial: Vec<Vec<Q>> = chosen.iter().map(|&j| rows[j].clone()).collect();
        trial.push(rows[i].clone());
        let m = RatMatrix::from_rows(trial).expect("rows of equal length");
        if rational::rank(&m) == chosen.len() + 1 {
            chosen.push(i);
        }
    }
    chosen
}

/// The pairing matrix `∫ xs[i] · ys[j]`.
pub fn pairing_matrix(xs: &[TautClass], ys: &[TautClass]) -> Result<Vec<Vec<Q>>> {
    xs.par_iter().map(|x| ys.iter().map(|y| pairing(x, y)).collect::<Result<Vec<Q>>>()).collect()
}

/// Bases of degree `d` and of the complementary degree, chosen from the
/// spanning sets so that their pairing matrix is square and invertible.
#[derive(Clone, Debug)]
pub struct PairedBases {
    pub rows: Vec<TautClass>,
    pub cols: Vec<TautClass>,
    pub matrix: RatMatrix,
}

pub fn paired_bases(xs: &[TautClass], ys: &[TautClass]) -> Result<PairedBases> {
    let p = pairing_matrix(xs, ys)?;
    let ri = independent_rows(&p);
    let sub: Vec<Vec<Q>> = ri.iter().map(|&i| p[i].clone()).collect();
    let ncols = ys.len();
    let cols_as_rows: Vec<Vec<Q>> = (0..ncols).map(|j| sub.iter().map(|r| r[j].clone()).collect()).collect();
    let ci = independent_rows(&cols_as_rows);
    let matrix = RatMatrix::from_rows(ri.iter().map(|&i| ci.iter().map(|&j| p[i][j].clone()).collect()).collect())?;
    Ok(PairedBases {
        rows: ri.iter().map(|&i| xs[i].clone()).collect(),
        cols: ci.iter().map(|&j| ys[j].clone()).collect(),
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..8).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(2, 0).len(), 0);
    }

    #[test]
    fn divisors_on_m11_and_m04() {
        // ψ_1 and the boundary point on M̄_{1,1}, plus κ_1
        assert_eq!(decorated_strata(1, &[1], 1).unwrap().len(), 3);
        // ψ_1..ψ_4, κ_1 and the three boundary points on M̄_{0,4}
        assert_eq!(decorated_strata(0, &[1, 2, 3, 4], 1).unwrap().len(), 8);
        assert_eq!(decorated_strata(0, &[1, 2, 3], 1).unwrap().len(), 0);
    }

    #[test]
    fn m04_has_one_dimensional_divisor_pairing() {
        let xs = decorated_strata(0, &[1, 2, 3, 4], 1).unwrap();
        let ys = decorated_strata(0, &[1, 2, 3, 4], 0).unwrap();
        let b = paired_bases(&xs, &ys).unwrap();
        assert_eq!(b.rows.len(), 1);
        assert_eq!(b.matrix[(0, 0)], Q::one());
    }
}
