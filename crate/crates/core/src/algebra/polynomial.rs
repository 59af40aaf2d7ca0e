use std::collections::BTreeMap;
use std::fmt;

use super::field::Field;
use super::monomial::{Monomial, RingMode};
use crate::error::{Error, Result};

/// Sparse polynomial over an exact field.
///
/// Terms are kept in canonical monomial order with no zero coefficients.
/// In multilinear mode every monomial is squarefree: products and
/// constructors reduce modulo `x_i^2 - x_i` on the way in.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial<F: Field> {
    n_vars: usize,
    mode: RingMode,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Field> Polynomial<F> {
    pub fn zero(n_vars: usize, mode: RingMode) -> Self {
        Polynomial {
            n_vars,
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, mode: RingMode, c: F) -> Self {
        let mut p = Self::zero(n_vars, mode);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(n_vars: usize, mode: RingMode, i: usize) -> Result<Self> {
        if i >= n_vars {
            return Err(Error::InvalidVariable { index: i, n_vars });
        }
        let mut p = Self::zero(n_vars, mode);
        p.add_term(Monomial::var(i), F::one());
        Ok(p)
    }

    /// Collects terms, summing repeats. Multilinear mode reduces each
    /// monomial to its squarefree part first.
    pub fn from_terms<I>(n_vars: usize, mode: RingMode, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, F)>,
    {
        let mut p = Self::zero(n_vars, mode);
        for (m, c) in terms {
            if let Some(v) = m.max_var() {
                if v >= n_vars {
                    return Err(Error::InvalidVariable { index: v, n_vars });
                }
            }
            let m = match mode {
                RingMode::Multilinear => m.squarefree_part(),
                RingMode::Standard => m,
            };
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn mode(&self) -> RingMode {
        self.mode
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        // Graded order puts the highest degree last.
        self.terms.keys().next_back().map_or(0, Monomial::degree)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> F {
        self.terms.get(m).cloned().unwrap_or_else(F::zero)
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    fn add_term(&mut self, m: Monomial, c: F) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::IncompatibleRing(format!(
                "{:?} vs {:?}",
                self.mode, other.mode
            )));
        }
        if self.n_vars != other.n_vars {
            return Err(Error::IncompatibleRing(format!(
                "{} vs {} variables",
                self.n_vars, other.n_vars
            )));
        }
        Ok(())
    }

    fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Monomial {
        match self.mode {
            RingMode::Multilinear => a.mul_multilinear(b),
            RingMode::Standard => a.mul(b),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&F::one().neg())
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(self.n_vars, self.mode);
        }
        Polynomial {
            n_vars: self.n_vars,
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.n_vars, self.mode);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(self.mul_monomials(a, b), ca.mul(cb));
            }
        }
        Ok(out)
    }

    /// Multiplies by a single monomial. In multilinear mode the product is
    /// reduced by `x*x = x`, so distinct terms can collapse and sum.
    pub fn mul_monomial(&self, m: &Monomial) -> Result<Self> {
        if let Some(v) = m.max_var() {
            if v >= self.n_vars {
                return Err(Error::InvalidVariable {
                    index: v,
                    n_vars: self.n_vars,
                });
            }
        }
        if self.mode == RingMode::Multilinear && !m.is_squarefree() {
            return Err(Error::IncompatibleRing(format!(
                "non-squarefree shift {m} in multilinear mode"
            )));
        }
        Ok(self.mul_monomial_unchecked(m))
    }

    pub(crate) fn mul_monomial_unchecked(&self, m: &Monomial) -> Self {
        let mut out = Self::zero(self.n_vars, self.mode);
        match self.mode {
            RingMode::Standard => {
                // Plain products of distinct monomials stay distinct.
                out.terms = self
                    .terms
                    .iter()
                    .map(|(a, c)| (a.mul(m), c.clone()))
                    .collect();
            }
            RingMode::Multilinear => {
                for (a, c) in &self.terms {
                    out.add_term(a.mul_multilinear(m), c.clone());
                }
            }
        }
        out
    }

    /// Iterated partial derivative, one `d/dx_i` per listed index.
    /// Repeating an index differentiates again, which is zero on a
    /// multilinear polynomial.
    pub fn derive(&self, vars: &[usize]) -> Result<Self> {
        if let Some(&bad) = vars.iter().find(|&&v| v >= self.n_vars) {
            return Err(Error::InvalidVariable {
                index: bad,
                n_vars: self.n_vars,
            });
        }
        Ok(self.derive_multi(&Monomial::from_indices(vars.iter().copied())))
    }

    /// `d^alpha p` for a multi-index written as a monomial.
    pub fn derive_multi(&self, alpha: &Monomial) -> Self {
        if alpha.is_one() {
            return self.clone();
        }
        let mut out = Self::zero(self.n_vars, self.mode);
        for (m, c) in &self.terms {
            if let Some((k, rest)) = m.derive_multi(alpha) {
                out.add_term(rest, c.mul(&F::from_i64(k as i64)));
            }
        }
        out
    }

    pub fn evaluate(&self, point: &[F]) -> Result<F> {
        if point.len() != self.n_vars {
            return Err(Error::LengthMismatch {
                expected: self.n_vars,
                got: point.len(),
            });
        }
        let mut acc = F::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &v in m.indices() {
                t = t.mul(&point[v as usize]);
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Reduces modulo the Boolean ideal `(x_i^2 - x_i)`: every positive
    /// exponent becomes one and colliding terms are summed.
    pub fn reduce_boolean(&self) -> Self {
        let mut out = Self::zero(self.n_vars, RingMode::Multilinear);
        for (m, c) in &self.terms {
            out.add_term(m.squarefree_part(), c.clone());
        }
        out
    }

    /// Reinterprets a multilinear polynomial in the standard ring (no-op on
    /// the coefficients; the monomials are already squarefree).
    pub fn into_mode(self, mode: RingMode) -> Self {
        match (self.mode, mode) {
            (a, b) if a == b => self,
            (RingMode::Standard, RingMode::Multilinear) => self.reduce_boolean(),
            (RingMode::Multilinear, RingMode::Standard) => Polynomial {
                mode,
                ..self
            },
            _ => unreachable!(),
        }
    }

    /// Renames variables through `map` (old index -> new index) into a ring
    /// with `new_n` variables. Non-injective maps identify variables; in
    /// multilinear mode the result is reduced again.
    pub fn substitute_vars(&self, map: &[usize], new_n: usize) -> Result<Self> {
        if map.len() != self.n_vars {
            return Err(Error::LengthMismatch {
                expected: self.n_vars,
                got: map.len(),
            });
        }
        if let Some(&bad) = map.iter().find(|&&v| v >= new_n) {
            return Err(Error::InvalidVariable {
                index: bad,
                n_vars: new_n,
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.map_vars(|v| map[v]), c.clone()));
        Self::from_terms(new_n, self.mode, terms)
    }

    /// `p ∘ π`: variable `i` of the result plays the role of `perm[i]` here.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_vars;
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut inverse = vec![usize::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::IncompatibleRing("not a permutation".into()));
            }
            inverse[p] = i;
        }
        self.substitute_vars(&inverse, n)
    }

    /// Substitutes constants for the given variables, keeping the ring size.
    pub fn restrict(&self, values: &BTreeMap<usize, F>) -> Self {
        let mut out = Self::zero(self.n_vars, self.mode);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut kept = Vec::with_capacity(m.degree());
            for &v in m.indices() {
                match values.get(&(v as usize)) {
                    Some(val) => coeff = coeff.mul(val),
                    None => kept.push(v as usize),
                }
            }
            out.add_term(Monomial::from_indices(kept), coeff);
        }
        out
    }

    /// Variables that occur in some term, ascending.
    pub fn used_vars(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n_vars];
        for m in self.terms.keys() {
            for v in m.support() {
                seen[v] = true;
            }
        }
        (0..self.n_vars).filter(|&v| seen[v]).collect()
    }

    /// Maps every coefficient into another field.
    pub fn map_field<G: Field>(&self, f: impl Fn(&F) -> Result<G>) -> Result<Polynomial<G>> {
        let mut out = Polynomial::<G>::zero(self.n_vars, self.mode);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }
}

impl<F: Field> fmt::Display for Polynomial<F> {
    /// Terms joined by ` + ` (or ` - ` for negative rationals), in
    /// canonical order; a unit coefficient is omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_negative() {
                (true, c.neg())
            } else {
                (false, c.clone())
            };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag == F::one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl<F: Field> fmt::Debug for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{:?}; n={}]({})", self.mode, self.n_vars, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{Gf62, Rational};
    use crate::algebra::parse::parse_polynomial;

    fn q(s: &str, n: usize) -> Polynomial<Rational> {
        parse_polynomial(s, Some(n), RingMode::Multilinear).unwrap()
    }

    fn std_q(s: &str, n: usize) -> Polynomial<Rational> {
        parse_polynomial(s, Some(n), RingMode::Standard).unwrap()
    }

    #[test]
    fn reduce_boolean_examples() {
        assert_eq!(std_q("x1^2", 1).reduce_boolean(), q("x1", 1));
        assert_eq!(std_q("x1^2*x2 + x1*x2", 2).reduce_boolean(), q("2*x1*x2", 2));
        assert!(std_q("0", 2).reduce_boolean().is_zero());
    }

    #[test]
    fn derive_examples() {
        let p = q("x1*x2 + x2*x3", 3);
        assert_eq!(p.derive(&[0]).unwrap(), q("x2", 3));
        assert_eq!(p.derive(&[1]).unwrap(), q("x1 + x3", 3));
        assert_eq!(p.derive(&[]).unwrap(), p);
        assert!(p.derive(&[0, 0]).unwrap().is_zero());
        assert_eq!(
            p.derive(&[3]).unwrap_err(),
            Error::InvalidVariable { index: 3, n_vars: 3 }
        );
    }

    #[test]
    fn standard_derivative_uses_exponents() {
        let p = std_q("x1^4 + x2^4", 2);
        assert_eq!(p.derive(&[0]).unwrap(), std_q("4*x1^3", 2));
        assert_eq!(p.derive(&[0, 0, 0]).unwrap(), std_q("24*x1", 2));
        assert!(p.derive(&[0, 1]).unwrap().is_zero());
    }

    #[test]
    fn multiply_examples() {
        let x2 = q("x2", 3);
        assert_eq!(x2.mul_monomial(&Monomial::var(1)).unwrap(), x2);
        let p = q("x1 + x3", 3);
        assert_eq!(p.mul_monomial(&Monomial::var(0)).unwrap(), q("x1 + x1*x3", 3));
        assert_eq!(p.mul_monomial(&Monomial::one()).unwrap(), p);
        let s = std_q("x1", 3);
        assert!(p.mul(&s).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let p = q("x1*x2 + x2*x3", 3);
        let pt = |v: [i64; 3]| v.map(Rational::from_i64).to_vec();
        assert_eq!(p.evaluate(&pt([1, 1, 0])).unwrap(), Rational::from_i64(1));
        assert_eq!(p.evaluate(&pt([1, 1, 1])).unwrap(), Rational::from_i64(2));
        assert!(q("0", 3).evaluate(&pt([5, 6, 7])).unwrap().is_zero());
        assert!(p.evaluate(&pt([1, 1, 1])[..2]).is_err());
    }

    #[test]
    fn permute_and_identify() {
        let p = q("x1*x2 + x3", 3);
        // result variable i plays the role of perm[i]
        let r = p.permute(&[2, 0, 1]).unwrap();
        assert_eq!(r, q("x2*x3 + x1", 3));
        let merged = p.substitute_vars(&[0, 0, 1], 2).unwrap();
        assert_eq!(merged, q("x1 + x2", 2));
    }

    #[test]
    fn prime_field_matches_rational_image() {
        let p = q("3*x1*x2 - 5*x2*x3 + 7", 3);
        let img: Polynomial<Gf62> = p.map_field(Gf62::from_rational).unwrap();
        let d = img.derive(&[1]).unwrap();
        let expect: Polynomial<Gf62> = p.derive(&[1]).unwrap().map_field(Gf62::from_rational).unwrap();
        assert_eq!(d, expect);
    }
}
