//! Field and order laws of `Q(a, t, g)`.

use num_rational::BigRational;
use proptest::prelude::*;

use nap_core::hyperreal::{CompareResult, HyperReal, Magnitude};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `c0 + c1*x + c2*x*y` over small integers, with `x, y` generators.
fn poly() -> impl Strategy<Value = HyperReal> {
    (-4i64..=4, -4i64..=4, -3i64..=3, 0usize..3, 0usize..3).prop_map(|(c0, c1, c2, i, j)| {
        let gens = [HyperReal::alpha(), HyperReal::tau(), HyperReal::gamma()];
        let x = &gens[i];
        let y = &gens[j];
        &(&HyperReal::from_int(c0) + &(&HyperReal::from_int(c1) * x)) + &(&(&HyperReal::from_int(c2) * x) * y)
    })
}

fn hyper() -> impl Strategy<Value = HyperReal> {
    (poly(), poly()).prop_map(|(n, d)| n.checked_div(&d).unwrap_or(n))
}

/// Generators are positive and infinite, so large positive samples agree with
/// every determined sign.
fn sample(x: &HyperReal) -> Option<BigRational> {
    x.eval(&q(1_000_003, 1), &q(999_983, 1), &q(1_000_033, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_laws(x in hyper(), y in hyper(), z in hyper()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x + &HyperReal::zero(), x.clone());
        prop_assert_eq!(&x * &HyperReal::one(), x.clone());
        prop_assert!((&x - &x).is_zero());
        prop_assert_eq!(&x + &(-&x), HyperReal::zero());
    }

    #[test]
    fn inverses(x in hyper(), y in hyper()) {
        if x.is_zero() {
            prop_assert!(x.recip().is_err());
        } else {
            prop_assert_eq!(&x * &x.recip().unwrap(), HyperReal::one());
            prop_assert_eq!(&y.checked_div(&x).unwrap() * &x, y.clone());
        }
    }

    #[test]
    fn evaluation_is_a_homomorphism(x in hyper(), y in hyper()) {
        if let (Some(a), Some(b)) = (sample(&x), sample(&y)) {
            prop_assert_eq!(sample(&(&x + &y)), Some(&a + &b));
            prop_assert_eq!(sample(&(&x * &y)), Some(&a * &b));
        }
    }

    #[test]
    fn order_is_consistent(x in hyper(), y in hyper(), z in hyper()) {
        let c = x.compare(&y);
        prop_assert_eq!(y.compare(&x), c.reverse());
        prop_assert_eq!(c == CompareResult::Equal, x == y);
        if c != CompareResult::Undetermined {
            prop_assert_eq!((&x + &z).compare(&(&y + &z)), c);
            if let (Some(a), Some(b)) = (sample(&x), sample(&y)) {
                let expected = match a.cmp(&b) {
                    std::cmp::Ordering::Less => CompareResult::Less,
                    std::cmp::Ordering::Equal => CompareResult::Equal,
                    std::cmp::Ordering::Greater => CompareResult::Greater,
                };
                prop_assert_eq!(c, expected);
            }
        }
    }

    #[test]
    fn display_round_trips(x in hyper()) {
        let parsed: HyperReal = x.to_string().parse().unwrap();
        prop_assert_eq!(parsed, x);
    }

    #[test]
    fn standard_parts_are_additive(x in hyper(), y in hyper()) {
        if let (Ok(Magnitude::Appreciable(_) | Magnitude::Infinitesimal), Ok(Magnitude::Appreciable(_) | Magnitude::Infinitesimal)) =
            (x.magnitude(), y.magnitude())
        {
            let (a, b) = (x.standard_part().unwrap(), y.standard_part().unwrap());
            prop_assert_eq!((&x + &y).standard_part().unwrap(), &a + &b);
            prop_assert_eq!((&x * &y).standard_part().unwrap(), &a * &b);
            prop_assert!((&x - &HyperReal::from_rational(a)).is_infinitesimal().unwrap());
        }
    }
}

#[test]
fn generators_are_infinite() {
    for g in [HyperReal::alpha(), HyperReal::tau(), HyperReal::gamma()] {
        assert_eq!(g.magnitude().unwrap(), Magnitude::Infinite);
        assert!(g.recip().unwrap().is_infinitesimal().unwrap());
        assert_eq!(g.compare(&HyperReal::from_int(1_000_000_000)), CompareResult::Greater);
    }
}
