use proptest::prelude::*;

use spdp_core::algebra::{parse_polynomial, Field, Gf62, Monomial, Polynomial, Rational, RingMode};

const N: usize = 6;

fn terms(n: usize, max_exp: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, n), -9i64..=9), 0..8)
}

fn build<F: Field>(n: usize, mode: RingMode, t: &[(Vec<u32>, i64)]) -> Polynomial<F> {
    Polynomial::from_terms(n, mode, t.iter().map(|(e, c)| (Monomial::from_exponents(e), F::from_i64(*c)))).unwrap()
}

fn boolean_points(n: usize) -> impl Iterator<Item = Vec<Rational>> {
    (0u32..1 << n).map(move |a| (0..n).map(|i| Rational::from_i64((a >> i & 1) as i64)).collect())
}

proptest! {
    #[test]
    fn derivative_is_linear(a in terms(N, 2), b in terms(N, 2), s in prop::collection::vec(0..N, 0..3)) {
        for mode in [RingMode::Standard, RingMode::Multilinear] {
            let p = build::<Rational>(N, mode, &a);
            let q = build::<Rational>(N, mode, &b);
            let lhs = p.add(&q).unwrap().derive(&s).unwrap();
            let rhs = p.derive(&s).unwrap().add(&q.derive(&s).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn partials_commute(a in terms(N, 3), s in prop::collection::vec(0..N, 0..4)) {
        let p = build::<Rational>(N, RingMode::Standard, &a);
        let forward = s.iter().fold(p.clone(), |acc, &v| acc.derive(&[v]).unwrap());
        let backward = s.iter().rev().fold(p.clone(), |acc, &v| acc.derive(&[v]).unwrap());
        prop_assert_eq!(&forward, &backward);
        prop_assert_eq!(&forward, &p.derive(&s).unwrap());
        prop_assert!(forward.len() <= p.len());
    }

    #[test]
    fn boolean_reduction_agrees_on_the_cube(a in terms(10, 3)) {
        let p = build::<Rational>(10, RingMode::Standard, &a);
        let r = p.reduce_boolean();
        prop_assert!(r.monomials().all(Monomial::is_squarefree));
        for x in boolean_points(10) {
            prop_assert_eq!(p.evaluate(&x).unwrap(), r.evaluate(&x).unwrap());
        }
    }

    #[test]
    fn multilinear_product_evaluates_pointwise(a in terms(8, 1), b in terms(8, 1)) {
        let p = build::<Rational>(8, RingMode::Multilinear, &a);
        let q = build::<Rational>(8, RingMode::Multilinear, &b);
        let pq = p.mul(&q).unwrap();
        for x in boolean_points(8) {
            let lhs = pq.evaluate(&x).unwrap();
            let rhs = p.evaluate(&x).unwrap().mul(&q.evaluate(&x).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn prime_field_is_the_rational_image(a in terms(N, 2), b in terms(N, 2)) {
        let p = build::<Rational>(N, RingMode::Standard, &a);
        let q = build::<Rational>(N, RingMode::Standard, &b);
        let image = |r: &Polynomial<Rational>| r.map_field(Gf62::from_rational).unwrap();
        prop_assert_eq!(image(&p.mul(&q).unwrap()), image(&p).mul(&image(&q)).unwrap());
        prop_assert_eq!(image(&p.add(&q).unwrap()), build::<Gf62>(N, RingMode::Standard, &[a, b].concat()));
    }

    #[test]
    fn printing_round_trips(a in terms(N, 2)) {
        for mode in [RingMode::Standard, RingMode::Multilinear] {
            let p = build::<Rational>(N, mode, &a);
            let back = parse_polynomial::<Rational>(&p.to_string(), Some(N), mode).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
