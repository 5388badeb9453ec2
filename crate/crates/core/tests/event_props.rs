//! Counting and probability laws on randomized events.

use proptest::prelude::*;

use nap_core::engine::{NapSpace, ProbabilityValue};
use nap_core::eventual::DirectedFamily::{self, AllN, FactorialN, QGrid};
use nap_core::events::expr::EventExpr;
use nap_core::events::{GridIndex, Point, SpaceKind};
use nap_core::hyperreal::HyperReal;
use nap_core::oracle::{enumerate_grid, Caps};

fn nat_expr() -> impl Strategy<Value = EventExpr> {
    let atom = prop_oneof![
        (1u64..7).prop_flat_map(|k| (Just(k), 0..k)).prop_map(|(k, l)| EventExpr::Prog(k, l)),
        prop::collection::vec(1i64..30, 1..4).prop_map(|xs| {
            EventExpr::Fin(xs.into_iter().map(nap_core::surd::Quadratic::from_int).collect())
        }),
        Just(EventExpr::Nat),
        Just(EventExpr::Empty),
    ];
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| EventExpr::union(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| EventExpr::inter(a, b)),
            inner.prop_map(EventExpr::not),
        ]
    })
}

fn exact(v: ProbabilityValue) -> HyperReal {
    v.exact().cloned().unwrap_or_else(|| panic!("not exact: {v}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn counts_match_enumeration(e in nat_expr(), n in 1u64..200) {
        let event = e.compile(SpaceKind::Nat).unwrap();
        let brute = (1..=n).filter(|&k| e.contains(SpaceKind::Nat, &Point::nat(k))).count() as u128;
        prop_assert_eq!(event.count_at(&GridIndex::Nat(n)).unwrap(), brute);
    }

    #[test]
    fn rational_counts_match_enumeration(e in nat_expr(), n in 1u64..9) {
        let event = e.compile(SpaceKind::Rational).unwrap();
        let index = GridIndex::Rational(n);
        let grid = enumerate_grid(QGrid, &index, &Caps::default());
        if let Ok(grid) = grid {
            let brute = grid.par_count(|x| e.contains(SpaceKind::Rational, x));
            prop_assert_eq!(event.count_at(&index).unwrap(), brute);
        }
    }

    #[test]
    fn complements_sum_to_one(e in nat_expr()) {
        let space = NapSpace::new(SpaceKind::Nat, FactorialN).unwrap();
        let a = e.compile(SpaceKind::Nat).unwrap();
        let p = exact(space.probability(&a).unwrap());
        let q = exact(space.probability(&a.complement()).unwrap());
        prop_assert_eq!(&p + &q, HyperReal::one());
    }

    #[test]
    fn additivity_on_aligned_branches(e in nat_expr(), f in nat_expr(), family in prop_oneof![Just(FactorialN), Just(AllN), Just(DirectedFamily::OddN)]) {
        let space = NapSpace::new(SpaceKind::Nat, family).unwrap();
        let a = e.compile(SpaceKind::Nat).unwrap();
        let b = f.compile(SpaceKind::Nat).unwrap().difference(&a).unwrap();
        let u = a.union(&b).unwrap();
        let m = space.branch_modulus(&[a.clone(), b.clone(), u.clone()]).unwrap();
        let pa = space.probability_branches(&a, m).unwrap();
        let pb = space.probability_branches(&b, m).unwrap();
        let pu = space.probability_branches(&u, m).unwrap();
        for ((x, y), z) in pa.iter().zip(&pb).zip(&pu) {
            prop_assert_eq!(x.0, z.0);
            prop_assert_eq!(&x.1 + &y.1, z.1.clone());
        }
    }

    #[test]
    fn product_rule(e in nat_expr(), f in nat_expr()) {
        let space = NapSpace::new(SpaceKind::Nat, FactorialN).unwrap();
        let a = e.compile(SpaceKind::Nat).unwrap();
        let b = f.compile(SpaceKind::Nat).unwrap();
        prop_assume!(!b.is_empty());
        let ab = a.intersect(&b).unwrap();
        let cond = exact(space.conditional(&a, &b).unwrap());
        let pb = exact(space.probability(&b).unwrap());
        prop_assert_eq!(&cond * &pb, exact(space.probability(&ab).unwrap()));
    }

    #[test]
    fn probabilities_are_monotone(e in nat_expr(), f in nat_expr()) {
        let space = NapSpace::new(SpaceKind::Nat, FactorialN).unwrap();
        let a = e.compile(SpaceKind::Nat).unwrap();
        let u = a.union(&f.compile(SpaceKind::Nat).unwrap()).unwrap();
        let d = &exact(space.probability(&u).unwrap()) - &exact(space.probability(&a).unwrap());
        prop_assert!(d.is_zero() || d.sign() == nap_core::hyperreal::CompareResult::Greater);
    }
}
