//! Text format for polynomials: `x1*x2 + x2*x3`, `3*x1^2 - 1/2*x2 + 4`.
//!
//! Variables are written `x<i>` with 1-based indices. The printer in
//! `Polynomial`'s `Display` emits exactly this grammar, so printing and
//! parsing round-trip.

use super::field::Field;
use super::monomial::{Monomial, RingMode};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Parses a polynomial. With `n_vars = None` the ring size is the largest
/// variable index that occurs (at least zero variables for constants).
pub fn parse_polynomial<F: Field>(
    text: &str,
    n_vars: Option<usize>,
    mode: RingMode,
) -> Result<Polynomial<F>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::parse("empty polynomial"));
    }
    let mut terms = Vec::new();
    let mut max_var = 0usize;
    for (negative, body) in split_terms(&compact)? {
        let (m, mut c) = parse_term::<F>(body)?;
        if negative {
            c = c.neg();
        }
        if let Some(v) = m.max_var() {
            max_var = max_var.max(v + 1);
        }
        terms.push((m, c));
    }
    let n = match n_vars {
        Some(n) if n < max_var => {
            return Err(Error::InvalidVariable {
                index: max_var - 1,
                n_vars: n,
            })
        }
        Some(n) => n,
        None => max_var,
    };
    Polynomial::from_terms(n, mode, terms)
}

fn split_terms(s: &str) -> Result<Vec<(bool, &str)>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let mut negative = false;
        let mut saw_sign = false;
        while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            if bytes[i] == b'-' {
                negative = !negative;
            }
            saw_sign = true;
            i += 1;
        }
        if !saw_sign && !out.is_empty() {
            return Err(Error::parse(format!("missing operator near `{}`", &s[i..])));
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            // `^` binds an exponent, never a signed one
            i += 1;
        }
        if start == i {
            return Err(Error::parse(format!("dangling sign in `{s}`")));
        }
        out.push((negative, &s[start..i]));
    }
    Ok(out)
}

fn parse_term<F: Field>(body: &str) -> Result<(Monomial, F)> {
    let mut coeff = F::one();
    let mut vars = Vec::new();
    for factor in body.split('*') {
        if factor.is_empty() {
            return Err(Error::parse(format!("empty factor in `{body}`")));
        }
        if let Some(rest) = factor.strip_prefix('x') {
            let (idx, exp) = match rest.split_once('^') {
                Some((i, e)) => (i, e),
                None => (rest, "1"),
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(format!("bad variable `{factor}`")))?;
            if idx == 0 {
                return Err(Error::parse("variables are numbered from x1"));
            }
            let exp: usize = exp
                .parse()
                .map_err(|_| Error::parse(format!("bad exponent `{factor}`")))?;
            vars.extend(std::iter::repeat_n(idx - 1, exp));
        } else {
            coeff = coeff.mul(&F::parse_scalar(factor)?);
        }
    }
    Ok((Monomial::from_indices(vars), coeff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::field::{Gf62, Rational};
    use proptest::prelude::*;

    #[test]
    fn parses_toy_polynomial() {
        let p: Polynomial<Rational> = parse_polynomial("x1*x2 + x2*x3", None, RingMode::Multilinear).unwrap();
        assert_eq!(p.n_vars(), 3);
        assert_eq!(p.len(), 2);
        assert_eq!(p.to_string(), "x1*x2 + x2*x3");
    }

    #[test]
    fn signs_and_fractions() {
        let p: Polynomial<Rational> =
            parse_polynomial("-x1 + -3/2*x2 - 4", Some(2), RingMode::Standard).unwrap();
        assert_eq!(p.to_string(), "-4 - x1 - 3/2*x2");
        let z: Polynomial<Rational> = parse_polynomial("x1 - x1", None, RingMode::Standard).unwrap();
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x0", "x1 x2", "x1*", "y2", "x1+", "x1^a"] {
            assert!(
                parse_polynomial::<Rational>(bad, None, RingMode::Standard).is_err(),
                "{bad:?} should not parse"
            );
        }
        assert!(parse_polynomial::<Rational>("x4", Some(3), RingMode::Standard).is_err());
    }

    #[test]
    fn prime_field_prints_residues() {
        let p: Polynomial<Gf62> = parse_polynomial("x1 - x2", None, RingMode::Multilinear).unwrap();
        let back: Polynomial<Gf62> = parse_polynomial(&p.to_string(), Some(2), RingMode::Multilinear).unwrap();
        assert_eq!(p, back);
    }

    fn arb_poly(mode: RingMode) -> impl Strategy<Value = Polynomial<Rational>> {
        let max_exp = if mode == RingMode::Standard { 3usize } else { 1 };
        let term = (
            prop::collection::vec(0usize..5, 0..4),
            -20i64..20,
            1i64..4,
        );
        prop::collection::vec(term, 0..8).prop_map(move |ts| {
            let terms = ts.into_iter().map(|(vars, n, d)| {
                let mut vs = vars;
                vs.truncate(max_exp * 3);
                let c = Rational::new(n.into(), d.into());
                (Monomial::from_indices(vs), c)
            });
            Polynomial::from_terms(5, mode, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_poly(RingMode::Standard)) {
            let text = p.to_string();
            let back = parse_polynomial::<Rational>(&text, Some(5), RingMode::Standard).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
