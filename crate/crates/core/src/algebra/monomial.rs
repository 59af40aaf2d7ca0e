use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Whether polynomials live in the quotient by the Boolean ideal
/// (squarefree monomials) or in the plain polynomial ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingMode {
    Multilinear,
    Standard,
}

/// A monomial stored as the sorted multiset of its variable indices
/// (0-based), so `x1^2*x3` is `[0, 0, 2]`.
///
/// Squarefree monomials have strictly increasing indices. The total degree
/// is the length. Ordering is graded: degree first, then lexicographic on
/// the index list, which lists `x1x2` before `x1x3` before `x2x3`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u32; 6]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(i: usize) -> Self {
        Monomial(SmallVec::from_slice(&[i as u32]))
    }

    /// Builds a monomial from any list of variable indices (repeats allowed).
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: SmallVec<[u32; 6]> = indices.into_iter().map(|i| i as u32).collect();
        v.sort_unstable();
        Monomial(v)
    }

    /// Builds a monomial from an exponent vector.
    pub fn from_exponents(exps: &[u32]) -> Self {
        let mut v = SmallVec::new();
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                v.push(i as u32);
            }
        }
        Monomial(v)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&v| v as usize)
    }

    pub fn exponent(&self, var: usize) -> u32 {
        let var = var as u32;
        let start = self.0.partition_point(|&v| v < var);
        let end = self.0.partition_point(|&v| v <= var);
        (end - start) as u32
    }

    /// `(variable, exponent)` pairs in increasing variable order.
    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0
            .iter()
            .dedup_with_count()
            .map(|(c, &v)| (v as usize, c as u32))
    }

    /// Distinct variables in the support.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().dedup().map(|&v| v as usize)
    }

    /// Squarefree part: every exponent clamped to one.
    pub fn squarefree_part(&self) -> Self {
        let mut v = self.0.clone();
        v.dedup();
        Monomial(v)
    }

    /// Plain product (exponents add).
    pub fn mul(&self, other: &Self) -> Self {
        let mut v = SmallVec::with_capacity(self.0.len() + other.0.len());
        v.extend(self.0.iter().copied().merge(other.0.iter().copied()));
        Monomial(v)
    }

    /// Product modulo the Boolean ideal (`x*x = x`).
    pub fn mul_multilinear(&self, other: &Self) -> Self {
        let mut v: SmallVec<[u32; 6]> = SmallVec::with_capacity(self.0.len() + other.0.len());
        for x in self.0.iter().copied().merge(other.0.iter().copied()) {
            if v.last() != Some(&x) {
                v.push(x);
            }
        }
        Monomial(v)
    }

    /// Formal derivative with respect to `var`: `(exponent, x^{a-1}...)`.
    /// Returns `None` when `var` does not divide the monomial.
    pub fn derive(&self, var: usize) -> Option<(u32, Monomial)> {
        let var32 = var as u32;
        let pos = self.0.iter().position(|&v| v == var32)?;
        let e = self.exponent(var);
        let mut v = self.0.clone();
        v.remove(pos);
        Some((e, Monomial(v)))
    }

    /// Applies a variable map to every index.
    pub fn map_vars(&self, f: impl Fn(usize) -> usize) -> Self {
        Monomial::from_indices(self.0.iter().map(|&v| f(v as usize)))
    }

    /// Falling-factorial coefficient and quotient for `d^alpha / d x^alpha`.
    /// `None` if some exponent of `alpha` exceeds the exponent here.
    pub fn derive_multi(&self, alpha: &Monomial) -> Option<(u64, Monomial)> {
        let mut coeff: u64 = 1;
        let mut rest = self.clone();
        for (var, k) in alpha.exponents() {
            let e = self.exponent(var);
            if k > e {
                return None;
            }
            for j in 0..k {
                coeff = coeff.checked_mul((e - j) as u64)?;
            }
            for _ in 0..k {
                let pos = rest.0.iter().position(|&v| v as usize == var)?;
                rest.0.remove(pos);
            }
        }
        Some((coeff, rest))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let parts = self.exponents().map(|(v, e)| {
            if e == 1 {
                format!("x{}", v + 1)
            } else {
                format!("x{}^{}", v + 1, e)
            }
        });
        f.write_str(&parts.collect::<Vec<_>>().join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All monomials in `n` variables of degree at most `max_degree`, in the
/// canonical graded order. Multilinear mode lists squarefree monomials only.
pub fn monomials_up_to(n: usize, max_degree: usize, mode: RingMode) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        out.extend(monomials_of_degree(n, d, mode));
    }
    out
}

/// Monomials of exactly degree `d`, lexicographic on the index list.
pub fn monomials_of_degree(n: usize, d: usize, mode: RingMode) -> Vec<Monomial> {
    if d == 0 {
        return vec![Monomial::one()];
    }
    match mode {
        RingMode::Multilinear => {
            if d > n {
                return Vec::new();
            }
            (0..n).combinations(d).map(Monomial::from_indices).collect()
        }
        RingMode::Standard => {
            if n == 0 {
                return Vec::new();
            }
            (0..n)
                .combinations_with_replacement(d)
                .map(Monomial::from_indices)
                .collect()
        }
    }
}
