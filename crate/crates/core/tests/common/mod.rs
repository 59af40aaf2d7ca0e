//! Reference implementations shared by the integration tests. None of this
//! goes through the library's matrix builder or elimination engine.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use spdp_core::algebra::{Polynomial, Rational};

/// Prime for the modular oracle; unrelated to the library's default.
pub const ORACLE_P: u64 = 2_305_843_009_213_693_951; // 2^61 - 1

/// Multilinear polynomial as `bitmask -> coefficient`.
pub type MaskPoly = BTreeMap<u32, BigRational>;

pub fn to_mask_poly(p: &Polynomial<Rational>) -> MaskPoly {
    p.terms()
        .map(|(m, c)| {
            let mask = m.indices().iter().fold(0u32, |acc, &i| {
                assert!(acc & (1 << i) == 0, "oracle expects squarefree monomials");
                acc | (1 << i)
            });
            (mask, c.clone())
        })
        .collect()
}

pub fn masks_up_to(n: usize, d: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize <= d).collect()
}

pub fn masks_of_size(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

fn degree(p: &MaskPoly) -> usize {
    p.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
}

/// Rows `m * d_S p` (Boolean product) over the multilinear ambient basis
/// of degree `<= max(0, deg p - kappa + ell)`, with `|S| = kappa` and
/// `deg m <= ell`. Returns `(rows, ambient basis)`.
pub fn spdp_rows(p: &MaskPoly, n: usize, kappa: usize, ell: usize) -> (Vec<Vec<BigRational>>, Vec<u32>) {
    let d = (degree(p) + ell).saturating_sub(kappa);
    let basis = masks_up_to(n, d);
    let index: BTreeMap<u32, usize> = basis.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut rows = Vec::new();
    for s in masks_of_size(n, kappa) {
        let deriv: MaskPoly = p.iter().filter(|(m, _)| *m & s == s).map(|(m, c)| (m & !s, c.clone())).collect();
        for shift in masks_up_to(n, ell) {
            let mut row = vec![BigRational::zero(); basis.len()];
            for (m, c) in &deriv {
                let col = index[&(m | shift)];
                row[col] += c;
            }
            rows.push(row);
        }
    }
    (rows, basis)
}

/// Rank over Q by dense Gauss-Jordan elimination.
pub fn rank_rational(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = &row[c] / &pivot[c];
                for (x, y) in row.iter_mut().zip(&pivot).skip(c) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    r
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % ORACLE_P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    acc
}

pub fn reduce(q: &BigRational) -> u64 {
    let p = BigInt::from(ORACLE_P);
    let num = q.numer().mod_floor(&p).to_u64().unwrap();
    let den = q.denom().mod_floor(&p).to_u64().unwrap();
    assert!(den != 0, "denominator divisible by the oracle prime");
    mulmod(num, powmod(den, ORACLE_P - 2))
}

/// Rank over GF(2^61 - 1) by dense elimination. A lower bound for the
/// rank over Q of the same integer matrix.
pub fn rank_mod_p(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(reduce).collect()).collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = powmod(m[r][c], ORACLE_P - 2);
        let pivot: Vec<u64> = m[r].iter().map(|&x| mulmod(x, inv)).collect();
        for row in m.iter_mut().skip(r + 1) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for k in c..ncols {
                row[k] = (row[k] + ORACLE_P - mulmod(f, pivot[k])) % ORACLE_P;
            }
        }
        m[r] = pivot;
        r += 1;
    }
    r
}

/// Brute-force satisfiability of a DIMACS-style clause list.
pub fn brute_sat(n: usize, clauses: &[Vec<i64>]) -> bool {
    assert!(n <= 24);
    (0u32..1 << n).any(|a| satisfies(a, clauses))
}

pub fn satisfies(assignment: u32, clauses: &[Vec<i64>]) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&l| {
            let v = (assignment >> (l.unsigned_abs() - 1)) & 1 == 1;
            v == (l > 0)
        })
    })
}

/// All weak compositions of `r` into `bins` parts.
pub fn histograms(r: usize, bins: usize) -> Vec<Vec<usize>> {
    if bins == 0 {
        return if r == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=r {
        for mut rest in histograms(r - first, bins - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `ceil(sqrt(n))` by search.
pub fn ceil_sqrt(n: usize) -> usize {
    (0..).find(|t| t * t >= n).unwrap()
}

/// `C(n, k)` by Pascal's rule.
pub fn choose(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = vec![BigInt::one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = &row[i - 1] + &row[i];
        }
        row = next;
    }
    row[k].clone()
}
