//! Intersection numbers of ψ and κ classes on M̄_{g,n}.
//!
//! ψ-integrals follow the DVV form of the Virasoro constraints; κ classes are
//! removed one at a time by adding a marking. Both tables are memoized in a
//! process-wide map that can be saved to and loaded from JSON.

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, q, Q};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

type Key = (u32, Vec<u32>, Vec<u32>);

static MEMO: Lazy<RwLock<HashMap<Key, Q>>> = Lazy::new(|| RwLock::new(HashMap::new()));

fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

fn df(n: i64) -> Q {
    Q::from_integer(double_factorial(n))
}

fn stable(g: u32, n: usize) -> bool {
    2 * g as i64 - 2 + n as i64 > 0
}

/// ⟨τ_{a_1} ⋯ τ_{a_n}⟩_g. Zero on unstable input and on degree mismatch.
pub fn psi_integral(g: u32, exps: &[u32]) -> Q {
    let mut a = exps.to_vec();
    a.sort_unstable();
    psi_sorted(g, a)
}

fn psi_sorted(g: u32, a: Vec<u32>) -> Q {
    let n = a.len();
    if !stable(g, n) {
        return Q::zero();
    }
    let deg: i64 = a.iter().map(|&x| x as i64).sum();
    if deg != 3 * g as i64 - 3 + n as i64 {
        return Q::zero();
    }
    let key = (g, a.clone(), vec![]);
    if let Some(v) = MEMO.read().get(&key) {
        return v.clone();
    }
    let val = psi_compute(g, &a);
    MEMO.write().insert(key, val.clone());
    val
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v
}

fn psi_compute(g: u32, a: &[u32]) -> Q {
    if g == 0 && a == [0, 0, 0] {
        return Q::one();
    }
    if g == 1 && a == [1] {
        return q(1, 24);
    }
    if a[0] == 0 {
        // string equation
        let rest = &a[1..];
        let mut acc = Q::zero();
        for j in 0..rest.len() {
            if rest[j] >= 1 {
                let mut b = rest.to_vec();
                b[j] -= 1;
                acc += psi_sorted(g, sorted(b));
            }
        }
        return acc;
    }
    // DVV with the largest exponent as τ_{k+1}
    let n = a.len();
    let k = a[n - 1] as i64 - 1;
    let d = &a[..n - 1];
    let mut acc = Q::zero();
    for j in 0..d.len() {
        let dj = d[j] as i64;
        let coef = df(2 * k + 2 * dj + 1) / df(2 * dj - 1);
        let mut b = d.to_vec();
        b[j] = (dj + k) as u32;
        acc += coef * psi_sorted(g, sorted(b));
    }
    let half = q(1, 2);
    for r in 0..k {
        let s = k - 1 - r;
        let coef = df(2 * r + 1) * df(2 * s + 1) * &half;
        if g >= 1 {
            let mut b = d.to_vec();
            b.push(r as u32);
            b.push(s as u32);
            acc += &coef * psi_sorted(g - 1, sorted(b));
        }
        let m = d.len();
        for mask in 0u64..(1u64 << m) {
            let (mut i1, mut i2) = (vec![r as u32], vec![s as u32]);
            for (i, &x) in d.iter().enumerate() {
                if mask >> i & 1 == 1 { i1.push(x) } else { i2.push(x) }
            }
            for g1 in 0..=g {
                let g2 = g - g1;
                let v1 = psi_sorted(g1, sorted(i1.clone()));
                if v1.is_zero() {
                    continue;
                }
                let v2 = psi_sorted(g2, sorted(i2.clone()));
                acc += &coef * v1 * v2;
            }
        }
    }
    acc / df(2 * k + 3)
}

/// ∫_{M̄_{g,n}} ∏ψ_i^{a_i} ∏κ_{b_j}.
pub fn kappa_psi_integral(g: u32, psi: &[u32], kappa: &[u32]) -> Result<Q> {
    let n = psi.len();
    if !stable(g, n) {
        return Err(Error::Unstable { g, n: n as u32 });
    }
    Ok(kp_sorted(g, sorted(psi.to_vec()), sorted(kappa.to_vec())))
}

fn kp_sorted(g: u32, psi: Vec<u32>, kappa: Vec<u32>) -> Q {
    if kappa.is_empty() {
        return psi_sorted(g, psi);
    }
    let n = psi.len();
    let deg: i64 = psi.iter().chain(kappa.iter()).map(|&x| x as i64).sum();
    if deg != 3 * g as i64 - 3 + n as i64 {
        return Q::zero();
    }
    let key = (g, psi.clone(), kappa.clone());
    if let Some(v) = MEMO.read().get(&key) {
        return v.clone();
    }
    // κ_{b_1} = π_*(ψ_{n+1}^{b_1+1}); the remaining κ pull back as κ - ψ_{n+1}^b
    let b1 = kappa[0];
    let rest = &kappa[1..];
    let m = rest.len();
    let mut acc = Q::zero();
    for mask in 0u64..(1u64 << m) {
        let mut e = b1 + 1;
        let mut keep = Vec::new();
        for (j, &b) in rest.iter().enumerate() {
            if mask >> j & 1 == 1 { e += b } else { keep.push(b) }
        }
        let mut p = psi.clone();
        p.push(e);
        let v = kp_sorted(g, sorted(p), keep);
        if mask.count_ones() % 2 == 1 { acc -= v } else { acc += v }
    }
    MEMO.write().insert(key, acc.clone());
    acc
}

/// Integral of a single-vertex monomial: ψ exponents on the `n` flags and a
/// κ multiset.
pub fn vertex_integral(g: u32, n: usize, psi: &[u32], kappa: &[u32]) -> Result<Q> {
    if psi.len() != n {
        return Err(Error::Dimension(format!("{} ψ exponents for {n} flags", psi.len())));
    }
    let deg: i64 = psi.iter().map(|&x| x as i64).sum::<i64>() + kappa.iter().map(|&x| x as i64).sum::<i64>();
    let dim = 3 * g as i64 - 3 + n as i64;
    if deg != dim {
        return Err(Error::NotTopDegree { expected: dim.max(0) as u32, found: deg as u32 });
    }
    kappa_psi_integral(g, psi, kappa)
}

/// Snapshot of every memoized ψ-only value.
pub fn cached_psi_keys() -> Vec<(u32, Vec<u32>)> {
    let mut v: Vec<(u32, Vec<u32>)> =
        MEMO.read().keys().filter(|k| k.2.is_empty()).map(|k| (k.0, k.1.clone())).collect();
    v.sort();
    v
}

fn key_string(k: &Key) -> String {
    let j = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    format!("{}|{}|{}", k.0, j(&k.1), j(&k.2))
}

fn parse_key(s: &str) -> Result<Key> {
    let bad = || Error::Parse(format!("bad cache key {s:?}"));
    let parts: Vec<&str> = s.split('|').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let list = |p: &str| -> Result<Vec<u32>> {
        if p.is_empty() {
            return Ok(vec![]);
        }
        p.split(',').map(|x| x.parse::<u32>().map_err(|_| bad())).collect()
    };
    Ok((parts[0].parse().map_err(|_| bad())?, list(parts[1])?, list(parts[2])?))
}

pub fn save_cache(path: &Path) -> Result<()> {
    let map: BTreeMap<String, String> = MEMO.read().iter().map(|(k, v)| (key_string(k), fmt_q(v))).collect();
    let s = serde_json::to_string_pretty(&map).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_cache(path: &Path) -> Result<usize> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Parse(e.to_string()))?;
    let map: BTreeMap<String, String> = serde_json::from_str(&s).map_err(|e| Error::Parse(e.to_string()))?;
    let mut memo = MEMO.write();
    for (k, v) in &map {
        memo.insert(parse_key(k)?, parse_q(v)?);
    }
    Ok(map.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn base_values() {
        assert_eq!(psi_integral(0, &[0, 0, 0]), qi(1));
        assert_eq!(psi_integral(1, &[1]), q(1, 24));
        assert_eq!(psi_integral(0, &[1, 0, 0, 0]), qi(1));
        assert_eq!(psi_integral(2, &[4]), q(1, 1152));
        assert_eq!(psi_integral(1, &[2, 0]), q(1, 24));
        assert_eq!(psi_integral(3, &[7]), q(1, 82944));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa_psi_integral(1, &[0], &[1]).unwrap(), q(1, 24));
        assert_eq!(kappa_psi_integral(0, &[0, 0, 0, 0], &[1]).unwrap(), qi(1));
        assert_eq!(kappa_psi_integral(2, &[0], &[1, 1, 1, 1]).unwrap(), kappa_psi_integral(2, &[0], &[1, 1, 1, 1]).unwrap());
        assert!(kappa_psi_integral(0, &[0, 0], &[]).is_err());
        // known value ∫_{M̄_2} κ_3 = 1/1152
        assert_eq!(kappa_psi_integral(2, &[], &[3]).unwrap(), q(1, 1152));
    }

    #[test]
    fn vertex_integrals() {
        assert_eq!(vertex_integral(0, 3, &[0, 0, 0], &[]).unwrap(), qi(1));
        assert_eq!(vertex_integral(1, 1, &[1], &[]).unwrap(), q(1, 24));
        assert_eq!(vertex_integral(2, 1, &[4], &[]).unwrap(), q(1, 1152));
        assert!(vertex_integral(2, 1, &[3], &[]).is_err());
    }

    #[test]
    fn cache_roundtrip() {
        psi_integral(2, &[2, 2]);
        let dir = std::env::temp_dir().join(format!("witten-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("cache.json");
        save_cache(&p).unwrap();
        assert!(load_cache(&p).unwrap() > 0);
        assert_eq!(parse_key("2|1,3|").unwrap(), (2, vec![1, 3], vec![]));
    }
}
