//! Exact sparse rank.
//!
//! One elimination engine serves both fields. Rows are normalized and
//! deduplicated up front, then pivots are chosen Markowitz-style: the live
//! row with the fewest nonzeros, and within it the column that occurs in
//! the fewest live rows. Over Q the rows are scaled to primitive integer
//! vectors and eliminated fraction-free (`a*s - b*r`, then divided by the
//! content), so no rational ever appears and entries stay small.

use std::collections::{BTreeSet, HashSet};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::algebra::field::{Field, Rational, SparseRow};

/// Scalar operations the elimination engine needs.
pub(crate) trait PivotScalar: Clone + Eq + Hash {
    fn is_zero_scalar(&self) -> bool;

    /// Scales a nonzero row to a canonical representative of its line.
    fn normalize(row: &mut Vec<(usize, Self)>);

    /// Eliminates column `col` from `target` using `pivot`. Both rows hold
    /// a nonzero at `col`; the result has none there.
    fn eliminate(pivot: &[(usize, Self)], target: &[(usize, Self)], col: usize) -> Vec<(usize, Self)>;
}

fn entry<T>(row: &[(usize, T)], col: usize) -> Option<&T> {
    row.binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|i| &row[i].1)
}

/// Merges `x*a + y*b` over sorted sparse rows, dropping zeros.
fn combine<T, FA, FB, FS>(a: &[(usize, T)], b: &[(usize, T)], fa: FA, fb: FB, sum: FS, zero: impl Fn(&T) -> bool) -> Vec<(usize, T)>
where
    FA: Fn(&T) -> T,
    FB: Fn(&T) -> T,
    FS: Fn(T, T) -> T,
{
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        let (col, v) = if ca < cb {
            i += 1;
            (ca, fa(&a[i - 1].1))
        } else if cb < ca {
            j += 1;
            (cb, fb(&b[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ca, sum(fa(&a[i - 1].1), fb(&b[j - 1].1)))
        };
        if !zero(&v) {
            out.push((col, v));
        }
    }
    out
}

impl PivotScalar for BigInt {
    fn is_zero_scalar(&self) -> bool {
        self.is_zero()
    }

    fn normalize(row: &mut Vec<(usize, Self)>) {
        let mut g = BigInt::zero();
        for (_, v) in row.iter() {
            g = g.gcd(v);
            if g.is_one() {
                break;
            }
        }
        let flip = row.first().is_some_and(|(_, v)| v.is_negative());
        if g.is_zero() {
            return;
        }
        if flip {
            g = -g;
        }
        if !g.is_one() {
            for (_, v) in row.iter_mut() {
                *v = &*v / &g;
            }
        }
    }

    fn eliminate(pivot: &[(usize, Self)], target: &[(usize, Self)], col: usize) -> Vec<(usize, Self)> {
        let a = entry(pivot, col).expect("pivot entry");
        let b = entry(target, col).expect("target entry");
        let g = a.gcd(b);
        let sa = a / &g;
        let sb = -(b / &g);
        // sa * target + sb * pivot cancels column `col`.
        let mut out = combine(target, pivot, |t| &sa * t, |p| &sb * p, |x, y| x + y, |v| v.is_zero());
        Self::normalize(&mut out);
        out
    }
}

impl<F: Field> PivotScalar for FieldScalar<F> {
    fn is_zero_scalar(&self) -> bool {
        self.0.is_zero()
    }

    fn normalize(row: &mut Vec<(usize, Self)>) {
        if let Some((_, lead)) = row.first() {
            let inv = lead.0.inv().expect("nonzero lead");
            for (_, v) in row.iter_mut() {
                v.0 = v.0.mul(&inv);
            }
        }
    }

    fn eliminate(pivot: &[(usize, Self)], target: &[(usize, Self)], col: usize) -> Vec<(usize, Self)> {
        let a = &entry(pivot, col).expect("pivot entry").0;
        let b = &entry(target, col).expect("target entry").0;
        let factor = b.mul(&a.inv().expect("nonzero pivot")).neg();
        combine(
            target,
            pivot,
            |t| t.clone(),
            |p| FieldScalar(p.0.mul(&factor)),
            |x, y| FieldScalar(x.0.add(&y.0)),
            |v| v.0.is_zero(),
        )
    }
}

/// Adapter so any [`Field`] can run through the engine with plain division.
#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) struct FieldScalar<F>(pub F);

/// Multiplies a rational row by the lcm of its denominators.
pub(crate) fn clear_denominators(row: SparseRow<Rational>) -> Vec<(usize, BigInt)> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    row.into_iter()
        .map(|(c, v)| {
            let scaled = v.numer() * (&lcm / v.denom());
            (c, scaled)
        })
        .collect()
}

/// Rank over Q of an integer matrix, fraction-free.
pub(crate) fn fraction_free_rank(rows: Vec<Vec<(usize, BigInt)>>, ncols: usize) -> usize {
    sparse_rank(rows, ncols)
}

/// Rank over a field by plain row reduction.
pub(crate) fn field_rank<F: Field>(rows: Vec<SparseRow<F>>, ncols: usize) -> usize {
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|(c, v)| (c, FieldScalar(v))).collect())
        .collect();
    sparse_rank(rows, ncols)
}

fn sparse_rank<T: PivotScalar>(rows: Vec<Vec<(usize, T)>>, ncols: usize) -> usize {
    // Normalize, drop zero rows and exact duplicates.
    let mut seen = HashSet::new();
    let mut live: Vec<Option<Vec<(usize, T)>>> = Vec::new();
    for mut r in rows {
        r.retain(|(_, v)| !v.is_zero_scalar());
        if r.is_empty() {
            continue;
        }
        debug_assert!(r.windows(2).all(|w| w[0].0 < w[1].0), "unsorted row");
        T::normalize(&mut r);
        if seen.insert(r.clone()) {
            live.push(Some(r));
        }
    }
    drop(seen);

    let width = live
        .iter()
        .flatten()
        .flat_map(|r| r.iter().map(|e| e.0 + 1))
        .max()
        .unwrap_or(0)
        .max(ncols);
    let mut col_count = vec![0usize; width];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); width];
    let mut queue: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (id, r) in live.iter().enumerate() {
        let r = r.as_ref().unwrap();
        for (c, _) in r {
            col_count[*c] += 1;
            col_rows[*c].push(id);
        }
        queue.insert((r.len(), id));
    }

    // Rank never exceeds the number of columns actually used.
    let limit = col_count.iter().filter(|&&c| c > 0).count();
    let mut stamp = vec![0usize; live.len()];
    let mut rank = 0;
    let mut round = 0;
    while let Some((_, pid)) = queue.pop_first() {
        if rank >= limit {
            break;
        }
        round += 1;
        let pivot = live[pid].take().unwrap();
        for (c, _) in &pivot {
            col_count[*c] -= 1;
        }
        let col = pivot
            .iter()
            .map(|(c, _)| *c)
            .min_by_key(|&c| (col_count[c], c))
            .unwrap();
        rank += 1;

        let candidates = std::mem::take(&mut col_rows[col]);
        for sid in candidates {
            if stamp[sid] == round {
                continue;
            }
            stamp[sid] = round;
            let Some(target) = live[sid].as_ref() else {
                continue;
            };
            if entry(target, col).is_none() {
                continue;
            }
            let target = live[sid].take().unwrap();
            queue.remove(&(target.len(), sid));
            for (c, _) in &target {
                col_count[*c] -= 1;
            }
            let reduced = T::eliminate(&pivot, &target, col);
            if reduced.is_empty() {
                continue;
            }
            for (c, _) in &reduced {
                col_count[*c] += 1;
                // Columns the row already had are still listed.
                if entry(&target, *c).is_none() {
                    col_rows[*c].push(sid);
                }
            }
            queue.insert((reduced.len(), sid));
            live[sid] = Some(reduced);
        }
    }
    rank
}
