//! Exact rationals and dense linear algebra over them.
//!
//! Elimination is fraction-free: every row is scaled to integers and the
//! Bareiss recurrence keeps intermediate entries exact determinants.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qzero() -> Q {
    Q::zero()
}

pub fn qone() -> Q {
    Q::one()
}

/// `p/q`, or `p` when the denominator is one.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        None => Ok(Q::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| fmt_q(&self[(r, c)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        &mut self.data[r * self.cols + c]
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Q]) -> Result<Vec<Q>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!("{} columns, vector of {}", self.cols, x.len())));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).fold(Q::zero(), |acc, (a, b)| acc + a * b))
            .collect())
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension("inner dimensions differ".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self[(r, k)].is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let v = &self[(r, k)] * &other[(k, c)];
                    out[(r, c)] += v;
                }
            }
        }
        Ok(out)
    }
}

/// Scale a rational row to a primitive integer row.
fn integer_row(row: &[Q]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

/// Bareiss forward elimination. Returns the echelon rows and pivot columns.
fn bareiss(mut a: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..ncols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        // columns left of c in lower rows are already zero
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(nrows);
    (a, pivots)
}

pub fn rank(m: &RatMatrix) -> usize {
    let rows: Vec<Vec<BigInt>> = (0..m.rows).map(|r| integer_row(m.row(r))).collect();
    bareiss(rows, m.cols).1.len()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Unique(Vec<Q>),
    Inconsistent,
    /// A particular solution together with a basis of the kernel.
    Underdetermined { particular: Vec<Q>, kernel: Vec<Vec<Q>> },
}

pub fn solve_linear(m: &RatMatrix, b: &[Q]) -> Result<SolveResult> {
    if b.len() != m.rows {
        return Err(Error::Dimension(format!("{} rows, right-hand side of {}", m.rows, b.len())));
    }
    let n = m.cols;
    let rows: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|r| {
            let mut row: Vec<Q> = m.row(r).to_vec();
            row.push(b[r].clone());
            integer_row(&row)
        })
        .collect();
    let (ech, pivots) = bareiss(rows, n + 1);
    if pivots.last() == Some(&n) {
        return Ok(SolveResult::Inconsistent);
    }
    // reduced row echelon form over Q from the integer echelon form
    let k = pivots.len();
    let mut red: Vec<Vec<Q>> = ech[..k]
        .iter()
        .map(|row| row.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();
    for i in (0..k).rev() {
        let p = red[i][pivots[i]].clone();
        for x in red[i].iter_mut() {
            *x /= &p;
        }
        for i2 in 0..i {
            let f = red[i2][pivots[i]].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..=n {
                let v = &f * &red[i][j];
                red[i2][j] -= v;
            }
        }
    }
    let mut x = vec![Q::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = red[i][n].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return Ok(SolveResult::Unique(x));
    }
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -red[i][f].clone();
            }
            v
        })
        .collect();
    Ok(SolveResult::Underdetermined { particular: x, kernel })
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    if m.rows != m.cols {
        return None;
    }
    let n = m.rows;
    let mut out = RatMatrix::zeros(n, n);
    for c in 0..n {
        let e: Vec<Q> = (0..n).map(|r| if r == c { Q::one() } else { Q::zero() }).collect();
        match solve_linear(m, &e).ok()? {
            SolveResult::Unique(x) => {
                for r in 0..n {
                    out[(r, c)] = x[r].clone();
                }
            }
            _ => return None,
        }
    }
    Some(out)
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_and_parses() {
        assert_eq!(fmt_q(&q(-2, 4)), "-1/2");
        assert_eq!(fmt_q(&qi(3)), "3");
        assert_eq!(parse_q("6/-4").unwrap(), q(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn scalar_solve() {
        let m = RatMatrix::from_rows(vec![vec![qi(2)]]).unwrap();
        assert_eq!(solve_linear(&m, &[qi(1)]).unwrap(), SolveResult::Unique(vec![q(1, 2)]));
    }

    #[test]
    fn identity_solve() {
        let m = RatMatrix::identity(2);
        let b = vec![qi(3), q(-1, 4)];
        assert_eq!(solve_linear(&m, &b).unwrap(), SolveResult::Unique(b.clone()));
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&RatMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&RatMatrix::identity(4)), 4);
        let m = RatMatrix::from_rows(vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]).unwrap();
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn inconsistent_and_kernel() {
        let m = RatMatrix::from_rows(vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]).unwrap();
        assert_eq!(solve_linear(&m, &[qi(1), qi(3)]).unwrap(), SolveResult::Inconsistent);
        match solve_linear(&m, &[qi(1), qi(2)]).unwrap() {
            SolveResult::Underdetermined { particular, kernel } => {
                assert_eq!(m.mul_vec(&particular).unwrap(), vec![qi(1), qi(2)]);
                assert_eq!(kernel.len(), 1);
                assert!(m.mul_vec(&kernel[0]).unwrap().iter().all(|x| x.is_zero()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(solve_linear(&RatMatrix::identity(2), &[qi(1)]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = RatMatrix::from_rows(vec![vec![q(1, 2), qi(3)], vec![qi(-1), q(2, 7)]]).unwrap();
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RatMatrix::identity(2));
    }
}
