use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{monomials_up_to, Field, Monomial, Polynomial, RingMode};
use crate::error::{Error, Result};

/// Which derivative orders enter the generating family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// |S| = kappa
    #[default]
    Exact,
    /// |S| <= kappa
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpdpParams {
    pub kappa: usize,
    pub ell: usize,
    #[serde(default)]
    pub convention: Convention,
    /// Skip rows whose derivative vanishes. Rank is unaffected; row counts
    /// then no longer match the combinatorial definition.
    #[serde(default)]
    pub drop_zero_rows: bool,
}

impl SpdpParams {
    pub fn new(kappa: usize, ell: usize) -> Self {
        SpdpParams {
            kappa,
            ell,
            convention: Convention::Exact,
            drop_zero_rows: false,
        }
    }

    pub fn cumulative(mut self) -> Self {
        self.convention = Convention::Cumulative;
        self
    }

    pub fn dropping_zero_rows(mut self) -> Self {
        self.drop_zero_rows = true;
        self
    }

    /// Smallest derivative order in the family.
    fn min_order(&self) -> usize {
        match self.convention {
            Convention::Exact => self.kappa,
            Convention::Cumulative => 0,
        }
    }

    /// Degree cutoff `max{0, deg(p) - kappa + ell}` (with kappa replaced by
    /// the smallest order used, zero for the cumulative family).
    pub fn degree_cutoff(&self, degree: usize) -> usize {
        (degree + self.ell).saturating_sub(self.min_order())
    }
}

/// Size caps checked before anything large is materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_columns: u64,
    pub max_rows: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_columns: 5_000_000,
            max_rows: 20_000_000,
        }
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of monomials of degree <= `d` in `n` variables.
pub fn count_monomials(n: usize, d: usize, mode: RingMode) -> BigUint {
    match mode {
        RingMode::Multilinear => (0..=d.min(n)).map(|j| binomial(n as u64, j as u64)).sum(),
        RingMode::Standard => binomial((n + d) as u64, d as u64),
    }
}

pub(crate) fn check_cap(what: &'static str, required: &BigUint, cap: u64) -> Result<()> {
    if required.to_u64().is_none_or(|r| r > cap) {
        return Err(Error::BudgetExceeded {
            what,
            required: required.to_string(),
            cap,
        });
    }
    Ok(())
}

/// The canonical column basis: every monomial of degree <= D in graded
/// order, with a reverse index.
#[derive(Debug, Clone)]
pub struct AmbientBasis {
    n_vars: usize,
    mode: RingMode,
    degree_cutoff: usize,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl AmbientBasis {
    pub fn new(n_vars: usize, mode: RingMode, degree_cutoff: usize, budget: &Budget) -> Result<Self> {
        check_cap(
            "ambient basis",
            &count_monomials(n_vars, degree_cutoff, mode),
            budget.max_columns,
        )?;
        let monomials = monomials_up_to(n_vars, degree_cutoff, mode);
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Ok(AmbientBasis {
            n_vars,
            mode,
            degree_cutoff,
            monomials,
            index,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn mode(&self) -> RingMode {
        self.mode
    }

    pub fn degree_cutoff(&self) -> usize {
        self.degree_cutoff
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// Ambient basis for `p` at the given parameters.
pub fn ambient_basis<F: Field>(p: &Polynomial<F>, params: &SpdpParams, budget: &Budget) -> Result<AmbientBasis> {
    AmbientBasis::new(
        p.n_vars(),
        p.mode(),
        params.degree_cutoff(p.degree()),
        budget,
    )
}
