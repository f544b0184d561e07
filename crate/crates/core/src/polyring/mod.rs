//! Exact multivariate polynomial arithmetic: monomials, monomial orders, and
//! polynomials over arbitrary-precision rationals.
//!
//! Everything downstream (basis computation, certificate search, moment
//! relaxations) builds on this ring. Coefficients are exact; there is no
//! floating point anywhere in this module except the explicit `evaluate_f64`
//! escape hatch.

mod monomial;
mod poly;

pub use monomial::{Monomial, MonomialOrder};
pub use poly::{parse_polynomial, ratio, Polynomial, Rational};

pub(crate) use poly::rational_to_f64;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("point has {got} coordinates but the polynomial has {nvars} variables")]
    PointLength { nvars: usize, got: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[cfg(test)]
mod proptests {
    use super::*;
    use num::traits::One;
    use proptest::prelude::*;
    use std::cmp::Ordering;

    const NVARS: usize = 3;

    fn arb_monomial() -> impl Strategy<Value = Monomial> {
        proptest::collection::vec(0u32..5, NVARS).prop_map(Monomial::new)
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=9).prop_map(|(n, d)| ratio(n, d))
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec((arb_monomial(), arb_rational()), 0..6)
            .prop_map(|ts| Polynomial::from_terms(NVARS, ts))
    }

    fn arb_order() -> impl Strategy<Value = MonomialOrder> {
        prop_oneof![
            Just(MonomialOrder::Lex),
            Just(MonomialOrder::GrLex),
            Just(MonomialOrder::GrevLex),
        ]
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), (&a * &b) + (&a * &c));
            prop_assert_eq!(&a - &a, Polynomial::zero(NVARS));
            prop_assert_eq!(&a * &Polynomial::one(NVARS), a.clone());
        }

        #[test]
        fn orders_are_total_and_multiplicative(
            ord in arb_order(),
            a in arb_monomial(),
            b in arb_monomial(),
            c in arb_monomial(),
        ) {
            // Antisymmetry and totality.
            let ab = ord.compare(&a, &b);
            let ba = ord.compare(&b, &a);
            prop_assert_eq!(ab, ba.reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
            // Multiplication by c preserves the comparison.
            prop_assert_eq!(ord.compare(&a.mul(&c), &b.mul(&c)), ab);
            // 1 is the minimum.
            let one = Monomial::constant(NVARS);
            prop_assert_ne!(ord.compare(&one, &a), Ordering::Greater);
            // Well-ordering sanity: divisor never exceeds multiple.
            if a.divides(&b) {
                prop_assert_ne!(ord.compare(&a, &b), Ordering::Greater);
            }
        }

        #[test]
        fn leading_term_of_product(ord in arb_order(), a in arb_poly(), b in arb_poly()) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let (ma, ca) = a.leading(ord).unwrap();
            let (mb, cb) = b.leading(ord).unwrap();
            let prod = &a * &b;
            let (mp, cp) = prod.leading(ord).unwrap();
            prop_assert_eq!(mp, &ma.mul(mb));
            prop_assert_eq!(cp.clone(), ca * cb);
        }

        #[test]
        fn evaluation_is_a_ring_homomorphism(
            a in arb_poly(),
            b in arb_poly(),
            pt in proptest::collection::vec(arb_rational(), NVARS),
        ) {
            let lhs = (&a * &b + &a).evaluate(&pt).unwrap();
            let va = a.evaluate(&pt).unwrap();
            let vb = b.evaluate(&pt).unwrap();
            prop_assert_eq!(lhs, &va * &vb + &va);
        }

        #[test]
        fn serde_round_trip(p in arb_poly()) {
            let json = serde_json::to_string(&p).unwrap();
            let back: Polynomial = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, p);
        }

        #[test]
        fn primitive_is_idempotent_and_proportional(p in arb_poly()) {
            prop_assume!(!p.is_zero());
            let prim = p.primitive();
            prop_assert_eq!(prim.primitive(), prim.clone());
            // Same monomial support, integer coprime coefficients.
            prop_assert_eq!(prim.num_terms(), p.num_terms());
            let mut g = num::BigInt::ZERO;
            for (_, c) in prim.terms() {
                prop_assert!(c.denom().is_one());
                g = num::integer::gcd(g, c.numer().clone());
            }
            prop_assert!(g.is_one());
        }
    }
}
