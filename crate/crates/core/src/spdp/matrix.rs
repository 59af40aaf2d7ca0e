use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{ambient_basis, check_cap, count_monomials, AmbientBasis, Budget, Convention, SpdpParams};
use crate::algebra::{monomials_of_degree, monomials_up_to, Field, Monomial, Polynomial, SparseRow};
use crate::error::{Error, Result};

/// Row label `(S, m)`. In standard mode `S` is a multi-index, so a
/// derivative `d^2/dx1^2` is the monomial `x1^2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowLabel {
    pub deriv: Monomial,
    pub shift: Monomial,
}

#[derive(Debug, Clone)]
pub struct Generator<F: Field> {
    pub label: RowLabel,
    pub poly: Polynomial<F>,
}

#[derive(Debug, Clone)]
pub struct MatrixRow<F: Field> {
    pub label: RowLabel,
    /// Sorted by column position.
    pub entries: SparseRow<F>,
}

#[derive(Debug, Clone)]
pub struct SpdpMatrix<F: Field> {
    params: SpdpParams,
    basis: Arc<AmbientBasis>,
    /// Basis positions kept as columns, increasing. Every basis position
    /// unless the matrix was cut down.
    columns: Vec<usize>,
    rows: Vec<MatrixRow<F>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub gamma: usize,
    pub ambient_dim: usize,
    pub codim: usize,
    pub rows: usize,
    pub cols: usize,
    pub field: String,
}

/// Derivative sets in canonical order: by size, then lexicographic.
pub fn derivative_sets(n_vars: usize, params: &SpdpParams, mode: crate::algebra::RingMode) -> Vec<Monomial> {
    let lo = match params.convention {
        Convention::Exact => params.kappa,
        Convention::Cumulative => 0,
    };
    (lo..=params.kappa)
        .flat_map(|k| monomials_of_degree(n_vars, k, mode))
        .collect()
}

fn derivative_count(n_vars: usize, params: &SpdpParams, mode: crate::algebra::RingMode) -> BigUint {
    let upto = count_monomials(n_vars, params.kappa, mode);
    match params.convention {
        Convention::Cumulative => upto,
        Convention::Exact if params.kappa == 0 => upto,
        Convention::Exact => upto - count_monomials(n_vars, params.kappa - 1, mode),
    }
}

/// Every `(S, m, m * d_S p)` in row order: shift-major, then derivative.
/// Zero rows are skipped only when `drop_zero_rows` is set.
pub fn generators<F: Field>(p: &Polynomial<F>, params: &SpdpParams) -> impl Iterator<Item = Generator<F>> {
    let mode = p.mode();
    let derived: Vec<(Monomial, Polynomial<F>)> = derivative_sets(p.n_vars(), params, mode)
        .into_iter()
        .map(|s| {
            let d = p.derive_multi(&s);
            (s, d)
        })
        .collect();
    let drop_zero = params.drop_zero_rows;
    monomials_up_to(p.n_vars(), params.ell, mode)
        .into_iter()
        .flat_map(move |m| {
            derived
                .iter()
                .filter(|(_, d)| !(drop_zero && d.is_zero()))
                .map(|(s, d)| Generator {
                    label: RowLabel {
                        deriv: s.clone(),
                        shift: m.clone(),
                    },
                    poly: d.mul_monomial_unchecked(&m),
                })
                .collect::<Vec<_>>()
        })
}

fn row_entries<F: Field>(poly: &Polynomial<F>, basis: &AmbientBasis) -> SparseRow<F> {
    // Canonical term order is basis order, so positions come out sorted.
    poly.terms()
        .map(|(mono, c)| {
            let col = basis
                .position(mono)
                .expect("generator monomial outside the ambient basis");
            (col, c.clone())
        })
        .collect()
}

/// Assembles `M_{kappa,ell}(p)`. Rows are built in parallel; order is
/// deterministic.
pub fn build_matrix<F: Field>(p: &Polynomial<F>, params: &SpdpParams, budget: &Budget) -> Result<SpdpMatrix<F>> {
    let mode = p.mode();
    let n = p.n_vars();
    let basis = Arc::new(ambient_basis(p, params, budget)?);
    let nominal = derivative_count(n, params, mode) * count_monomials(n, params.ell, mode);
    if !params.drop_zero_rows {
        check_cap("matrix rows", &nominal, budget.max_rows)?;
    }

    let derivs = derivative_sets(n, params, mode);
    let derived: Vec<(Monomial, Polynomial<F>)> = derivs
        .into_par_iter()
        .map(|s| {
            let d = p.derive_multi(&s);
            (s, d)
        })
        .filter(|(_, d)| !(params.drop_zero_rows && d.is_zero()))
        .collect();
    if params.drop_zero_rows {
        let kept = BigUint::from(derived.len()) * count_monomials(n, params.ell, mode);
        check_cap("matrix rows", &kept, budget.max_rows)?;
    }

    let shifts = monomials_up_to(n, params.ell, mode);
    let rows: Vec<MatrixRow<F>> = shifts
        .par_iter()
        .flat_map_iter(|m| {
            let basis = &basis;
            derived.iter().map(move |(s, d)| MatrixRow {
                label: RowLabel {
                    deriv: s.clone(),
                    shift: m.clone(),
                },
                entries: row_entries(&d.mul_monomial_unchecked(m), basis),
            })
        })
        .collect();

    Ok(SpdpMatrix {
        params: *params,
        columns: (0..basis.len()).collect(),
        basis,
        rows,
    })
}

impl<F: Field> SpdpMatrix<F> {
    pub fn params(&self) -> &SpdpParams {
        &self.params
    }

    pub fn basis(&self) -> &AmbientBasis {
        &self.basis
    }

    pub fn rows(&self) -> &[MatrixRow<F>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    /// Basis positions of the retained columns.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Column monomials, in column order.
    pub fn column_monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.columns.iter().map(|&c| &self.basis.monomials()[c])
    }

    /// Rows with entries renumbered to `0..column_count()`.
    pub fn compact_rows(&self) -> Vec<SparseRow<F>> {
        if self.columns.len() == self.basis.len() {
            return self.rows.iter().map(|r| r.entries.clone()).collect();
        }
        let mut local = vec![usize::MAX; self.basis.len()];
        for (i, &c) in self.columns.iter().enumerate() {
            local[c] = i;
        }
        self.rows
            .iter()
            .map(|r| {
                r.entries
                    .iter()
                    .filter(|(c, _)| local[*c] != usize::MAX)
                    .map(|(c, v)| (local[*c], v.clone()))
                    .collect()
            })
            .collect()
    }

    /// Row-major dense copy, mostly for inspection of small cases.
    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let width = self.column_count();
        self.compact_rows()
            .into_iter()
            .map(|r| {
                let mut dense = vec![F::zero(); width];
                for (c, v) in r {
                    dense[c] = v;
                }
                dense
            })
            .collect()
    }

    /// Keeps the listed rows and columns (indices into this matrix).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.rows.len()) {
            return Err(Error::LengthMismatch {
                expected: self.rows.len(),
                got: bad,
            });
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.columns.len()) {
            return Err(Error::LengthMismatch {
                expected: self.columns.len(),
                got: bad,
            });
        }
        let mut keep: Vec<usize> = cols.iter().map(|&c| self.columns[c]).collect();
        keep.sort_unstable();
        keep.dedup();
        Ok(self.select(|i, _| rows.contains(&i), keep))
    }

    fn select(&self, mut row_ok: impl FnMut(usize, &RowLabel) -> bool, columns: Vec<usize>) -> Self {
        let kept: HashSet<usize> = columns.iter().copied().collect();
        let full = columns.len() == self.basis.len();
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, r)| row_ok(*i, &r.label))
            .map(|(_, r)| MatrixRow {
                label: r.label.clone(),
                entries: if full {
                    r.entries.clone()
                } else {
                    r.entries
                        .iter()
                        .filter(|(c, _)| kept.contains(c))
                        .cloned()
                        .collect()
                },
            })
            .collect();
        SpdpMatrix {
            params: self.params,
            basis: Arc::clone(&self.basis),
            columns,
            rows,
        }
    }

    /// Exact rank over `F`.
    pub fn rank(&self) -> RankReport {
        let gamma = F::rank(self.compact_rows(), self.column_count());
        let ambient_dim = self.column_count();
        RankReport {
            gamma,
            ambient_dim,
            codim: ambient_dim - gamma,
            rows: self.row_count(),
            cols: self.column_count(),
            field: F::MODE.tag(),
        }
    }

    /// Sparse triplet text: header `spdp <rows> <cols> <field>`, then one
    /// `row col value` line per nonzero, 0-based.
    pub fn to_triplets(&self) -> String {
        let mut out = format!(
            "spdp {} {} {}\n",
            self.row_count(),
            self.column_count(),
            F::MODE.tag()
        );
        for (i, row) in self.compact_rows().iter().enumerate() {
            for (c, v) in row {
                let _ = writeln!(out, "{i} {c} {v}");
            }
        }
        out
    }
}

/// Free-function form of [`SpdpMatrix::rank`].
pub fn rank<F: Field>(m: &SpdpMatrix<F>) -> RankReport {
    m.rank()
}

/// Builds the matrix and ranks it.
pub fn codimension<F: Field>(p: &Polynomial<F>, params: &SpdpParams, budget: &Budget) -> Result<RankReport> {
    Ok(build_matrix(p, params, budget)?.rank())
}

/// Disjoint blocks covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    owner: Vec<usize>,
}

impl BlockPartition {
    pub fn new(n_vars: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; n_vars];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            for &v in block {
                if v >= n_vars {
                    return Err(Error::InvalidPartition(format!("variable x{} out of range", v + 1)));
                }
                if owner[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("x{} is in two blocks", v + 1)));
                }
                owner[v] = b;
            }
        }
        if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("x{} is in no block", v + 1)));
        }
        Ok(BlockPartition { blocks, owner })
    }

    pub fn singletons(n_vars: usize) -> Self {
        Self::new(n_vars, (0..n_vars).map(|v| vec![v]).collect()).expect("singletons partition")
    }

    /// Consecutive blocks of `size` (the last may be shorter).
    pub fn contiguous(n_vars: usize, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidPartition("block size 0".into()));
        }
        let blocks = (0..n_vars).collect::<Vec<_>>().chunks(size).map(<[usize]>::to_vec).collect();
        Self::new(n_vars, blocks)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn block_of(&self, var: usize) -> Option<usize> {
        self.owner.get(var).copied()
    }

    /// Number of distinct blocks a monomial's support meets.
    pub fn blocks_touched(&self, m: &Monomial) -> usize {
        let mut seen: Vec<usize> = m.support().filter_map(|v| self.block_of(v)).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

type RowPredicate = dyn Fn(&RowLabel, &BlockPartition) -> bool + Send + Sync;
type ColumnPredicate = dyn Fn(&Monomial, &BlockPartition) -> bool + Send + Sync;

/// Which rows and columns survive blocking.
pub struct Admissibility {
    rows: Box<RowPredicate>,
    columns: Box<ColumnPredicate>,
}

impl Admissibility {
    pub fn new(
        rows: impl Fn(&RowLabel, &BlockPartition) -> bool + Send + Sync + 'static,
        columns: impl Fn(&Monomial, &BlockPartition) -> bool + Send + Sync + 'static,
    ) -> Self {
        Admissibility {
            rows: Box::new(rows),
            columns: Box::new(columns),
        }
    }

    /// Rows whose derivative set lies in a single block; all columns.
    pub fn block_local() -> Self {
        Self::new(|l, b| b.blocks_touched(&l.deriv) <= 1, |_, _| true)
    }

    pub fn everything() -> Self {
        Self::new(|_, _| true, |_, _| true)
    }

    pub fn nothing() -> Self {
        Self::new(|_, _| false, |_, _| false)
    }
}

impl Default for Admissibility {
    fn default() -> Self {
        Self::block_local()
    }
}

/// `M^B_{kappa,ell}(p)`: the admissible rows and columns of `m`.
pub fn blocked_matrix<F: Field>(m: &SpdpMatrix<F>, partition: &BlockPartition, admissible: &Admissibility) -> Result<SpdpMatrix<F>> {
    if partition.owner.len() != m.basis.n_vars() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} variables, polynomial has {}",
            partition.owner.len(),
            m.basis.n_vars()
        )));
    }
    let columns = m
        .columns
        .iter()
        .copied()
        .filter(|&c| (admissible.columns)(&m.basis.monomials()[c], partition))
        .collect();
    Ok(m.select(|_, label| (admissible.rows)(label, partition), columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_polynomial, Fp, Gf62, Rational, RingMode};

    fn toy() -> Polynomial<Rational> {
        parse_polynomial("x1*x2 + x2*x3", None, RingMode::Multilinear).unwrap()
    }

    #[test]
    fn toy_matrix_shape_and_rank() {
        let m = build_matrix(&toy(), &SpdpParams::new(1, 1), &Budget::default()).unwrap();
        assert_eq!((m.row_count(), m.column_count()), (12, 7));
        let r = m.rank();
        assert_eq!((r.gamma, r.codim, r.ambient_dim), (6, 1, 7));
        assert_eq!(r.field, "q");
    }

    #[test]
    fn row_order_is_shift_major() {
        let m = build_matrix(&toy(), &SpdpParams::new(1, 1), &Budget::default()).unwrap();
        let labels: Vec<String> = m
            .rows()
            .iter()
            .take(4)
            .map(|r| format!("{}|{}", r.label.shift, r.label.deriv))
            .collect();
        assert_eq!(labels, ["1|x1", "1|x2", "1|x3", "x1|x1"]);
        // x1 * d/dx2 (x1x2 + x2x3) = x1 + x1x3
        let row = &m.rows()[4];
        assert_eq!(row.entries.iter().map(|e| e.0).collect::<Vec<_>>(), [1, 5]);
    }

    #[test]
    fn trivial_cases() {
        let p: Polynomial<Rational> = parse_polynomial("x1", None, RingMode::Multilinear).unwrap();
        let m = build_matrix(&p, &SpdpParams::new(1, 0), &Budget::default()).unwrap();
        assert_eq!(m.to_dense(), vec![vec![Rational::from_i64(1)]]);

        let zero = Polynomial::<Rational>::zero(3, RingMode::Multilinear);
        let r = codimension(&zero, &SpdpParams::new(0, 2), &Budget::default()).unwrap();
        assert_eq!((r.gamma, r.codim, r.ambient_dim), (0, 7, 7));

        let id = build_matrix(&toy(), &SpdpParams::new(0, 0), &Budget::default()).unwrap();
        assert_eq!(id.row_count(), 1);

        let over = build_matrix(&toy(), &SpdpParams::new(3, 1), &Budget::default()).unwrap();
        assert!(over.rows().iter().all(|r| r.entries.is_empty()));
    }

    #[test]
    fn dropping_zero_rows_keeps_rank() {
        let p: Polynomial<Rational> = parse_polynomial("x1*x2 + x3", Some(4), RingMode::Multilinear).unwrap();
        let keep = build_matrix(&p, &SpdpParams::new(1, 1), &Budget::default()).unwrap();
        let drop = build_matrix(&p, &SpdpParams::new(1, 1).dropping_zero_rows(), &Budget::default()).unwrap();
        assert!(drop.row_count() < keep.row_count());
        assert_eq!(keep.rank().gamma, drop.rank().gamma);
    }

    #[test]
    fn generator_stream_matches_rows() {
        let params = SpdpParams::new(1, 1);
        let m = build_matrix(&toy(), &params, &Budget::default()).unwrap();
        let gens: Vec<_> = generators(&toy(), &params).collect();
        assert_eq!(gens.len(), m.row_count());
        for (g, r) in gens.iter().zip(m.rows()) {
            assert_eq!(g.label, r.label);
            assert_eq!(row_entries(&g.poly, m.basis()), r.entries);
        }
    }

    #[test]
    fn standard_mode_uses_multi_indices() {
        let p: Polynomial<Rational> = parse_polynomial("x1^4 + x2^4", None, RingMode::Standard).unwrap();
        let m = build_matrix(&p, &SpdpParams::new(2, 0), &Budget::default()).unwrap();
        // d^2 over {x1^2, x1x2, x2^2}: 12x1^2, 0, 12x2^2
        assert_eq!(m.row_count(), 3);
        assert_eq!(m.rank().gamma, 2);
    }

    #[test]
    fn row_budget() {
        let p: Polynomial<Rational> = parse_polynomial("x1*x2", Some(30), RingMode::Multilinear).unwrap();
        let tight = Budget {
            max_columns: 1_000_000,
            max_rows: 100,
        };
        assert!(matches!(
            build_matrix(&p, &SpdpParams::new(1, 1), &tight),
            Err(Error::BudgetExceeded { what: "matrix rows", .. })
        ));
    }

    #[test]
    fn blocking() {
        let m = build_matrix(&toy(), &SpdpParams::new(1, 1), &Budget::default()).unwrap();
        let single = blocked_matrix(&m, &BlockPartition::singletons(3), &Admissibility::everything()).unwrap();
        assert_eq!(single.to_dense(), m.to_dense());
        let none = blocked_matrix(&m, &BlockPartition::singletons(3), &Admissibility::nothing()).unwrap();
        assert_eq!(none.rank().gamma, 0);
        let b = BlockPartition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let blocked = blocked_matrix(&m, &b, &Admissibility::default()).unwrap();
        assert!(blocked.rank().gamma <= m.rank().gamma);
    }

    #[test]
    fn partition_validation() {
        assert!(BlockPartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(BlockPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(BlockPartition::new(3, vec![vec![0, 3], vec![1, 2]]).is_err());
        let c = BlockPartition::contiguous(5, 2).unwrap();
        assert_eq!(c.blocks().len(), 3);
        assert_eq!(c.max_block_size(), 2);
        assert_eq!(c.blocks_touched(&Monomial::from_indices([0, 1, 4])), 2);
    }

    #[test]
    fn triplet_export() {
        let m = build_matrix(&toy(), &SpdpParams::new(1, 0), &Budget::default()).unwrap();
        let text = m.to_triplets();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("spdp 3 4 q"));
        // d/dx2 = x1 + x3 sits in row 1
        assert_eq!(lines.collect::<Vec<_>>(), ["0 2 1", "1 1 1", "1 3 1", "2 2 1"]);
    }

    #[test]
    fn prime_field_agrees_on_toy() {
        let p: Polynomial<Gf62> = parse_polynomial("x1*x2 + x2*x3", None, RingMode::Multilinear).unwrap();
        let r = codimension(&p, &SpdpParams::new(1, 1), &Budget::default()).unwrap();
        assert_eq!(r.gamma, 6);
        assert!(r.field.starts_with("gf"));
        let small: Polynomial<Fp<2>> = p.map_field(|c| Ok(Fp::<2>::new(c.value()))).unwrap();
        assert!(codimension(&small, &SpdpParams::new(1, 1), &Budget::default()).unwrap().gamma <= 6);
    }

    #[test]
    fn submatrix_indices_checked() {
        let m = build_matrix(&toy(), &SpdpParams::new(1, 1), &Budget::default()).unwrap();
        assert!(m.submatrix(&[0, 99], &[0]).is_err());
        let s = m.submatrix(&[0, 1, 2], &[2, 4]).unwrap();
        assert_eq!((s.row_count(), s.column_count()), (3, 2));
    }
}
