use proptest::prelude::*;

use regint::acycle::{delta, delta_primitive};
use regint::coeff::{int, CoeffMono, CoeffPoly};
use regint::expr::{expr_equal, recommended_order, Expr, Weight};
use regint::forests::{forest_to_permutation, permutation_to_forest};
use regint::regint::{hae_residual, permutations, reg_all, reg_default};
use regint::residue::{residue, s_op};
use regint::samples::{samples, SampleKind, SampleSpec};
use regint::{ordered_acycle, parse};

fn draw(kind: SampleKind, n: usize, max_degree: u32, seed: u64) -> Expr {
    samples(&SampleSpec { kind, n, max_degree }, 1, seed).pop().unwrap()
}

fn same(a: &Expr, b: &Expr) -> bool {
    expr_equal(a, b, recommended_order(a, b)).unwrap()
}

fn coeff_poly() -> impl Strategy<Value = CoeffPoly> {
    let mono = (-2i32..=6, 0u32..=2, 0u32..=1, 0u32..=1, 0u32..=2, -4i64..=4, 1i64..=3).prop_map(
        |(iota, e2, e4, e6, y, n, d)| {
            CoeffPoly::term(CoeffMono { iota, e2, e4, e6, y }, regint::coeff::rat(n, d))
        },
    );
    prop::collection::vec(mono, 0..4).prop_map(|ms| ms.into_iter().fold(CoeffPoly::zero(), |a, m| a + m))
}

/// Polynomials in `I`, `E2hat`, `E4`, `E6` with `E2hat` in the `e2` slot.
fn hat_poly() -> impl Strategy<Value = CoeffPoly> {
    coeff_poly().prop_map(|p| p.map_terms(|m, c| CoeffPoly::term(CoeffMono { y: 0, ..*m }, c.clone())))
}

fn kind() -> impl Strategy<Value = SampleKind> {
    prop_oneof![Just(SampleKind::Elliptic), Just(SampleKind::QuasiElliptic), Just(SampleKind::AlmostElliptic)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in coeff_poly(), b in coeff_poly(), c in coeff_poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn almost_holomorphic_round_trip(h in hat_poly()) {
        prop_assert_eq!(h.from_almost_holomorphic().to_almost_holomorphic().unwrap(), h);
    }

    #[test]
    fn limit_of_y_derivative(p in coeff_poly()) {
        prop_assert_eq!(p.partial_y().holomorphic_limit(), p.y_coefficient(1));
    }

    #[test]
    fn parse_render_round_trip(k in kind(), n in 2usize..=4, seed in any::<u64>()) {
        let e = draw(k, n, 3, seed).canonical();
        let back = regint::parse_with_arity(&e.render(), Some(n)).unwrap();
        prop_assert!(same(&back, &e), "{} -> {}", e.render(), back.render());
    }

    #[test]
    fn reanchor_round_trip(n in 2usize..=4, seed in any::<u64>(), m in 1u8..=4) {
        let e = draw(SampleKind::AlmostElliptic, n, 3, seed);
        let m = m.min(n as u8);
        let r = e.reanchor(m);
        prop_assert_eq!(r.anchor(), m);
        prop_assert_eq!(r.canonical(), e.canonical());
    }

    #[test]
    fn normalize_idempotent(k in kind(), seed in any::<u64>()) {
        let e = draw(k, 3, 3, seed).normalize();
        prop_assert_eq!(e.normalize(), e);
    }

    #[test]
    fn derivative_raises_weight(k in kind(), seed in any::<u64>(), a in 1u8..=3) {
        let e = draw(k, 3, 3, seed);
        let Weight::Pure(w) = e.weight() else { unreachable!() };
        match e.d_z(a).weight() {
            Weight::Zero => {}
            dw => prop_assert_eq!(dw, Weight::Pure(w + 1)),
        }
    }

    #[test]
    fn derivations_commute(seed in any::<u64>(), b in 1u8..=2) {
        let e = draw(SampleKind::AlmostElliptic, 3, 3, seed);
        prop_assert!(same(&e.d_y().d_a(b), &e.d_a(b).d_y()));
    }

    #[test]
    fn almost_elliptic_closed(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = draw(SampleKind::AlmostElliptic, 3, 2, s1);
        let b = draw(SampleKind::AlmostElliptic, 3, 2, s2);
        prop_assert!((&a * &b).almost_elliptic_check());
        prop_assert!((&a + &b).almost_elliptic_check());
    }

    #[test]
    fn residue_weights(k in kind(), seed in any::<u64>(), a in 1u8..=3, b in 1u8..=3) {
        prop_assume!(a != b);
        let e = draw(k, 3, 3, seed);
        let Weight::Pure(w) = e.weight() else { unreachable!() };
        match residue(&e, a, b).weight() {
            Weight::Zero => {}
            rw => prop_assert_eq!(rw, Weight::Pure(w - 1)),
        }
        match s_op(&e, a, b).weight() {
            Weight::Zero => {}
            sw => prop_assert_eq!(sw, Weight::Pure(w - 2)),
        }
    }

    #[test]
    fn global_residue_theorem(seed in any::<u64>(), a in 1u8..=3) {
        let e = draw(SampleKind::Elliptic, 3, 3, seed);
        let mut s = Expr::zero(e.live().without(a));
        for b in e.live().iter().filter(|&b| b != a) {
            s += &residue(&e, a, b);
        }
        prop_assert!(same(&s, &Expr::zero(s.live())), "{}", s.render());
    }

    #[test]
    fn fubini(k in prop_oneof![Just(SampleKind::Elliptic), Just(SampleKind::AlmostElliptic)], seed in any::<u64>()) {
        let e = draw(k, 3, 3, seed);
        let perms = permutations(&e.live().to_vec());
        let first = reg_all(&e, &perms[0]).unwrap();
        for p in &perms[1..] {
            prop_assert_eq!(reg_all(&e, p).unwrap(), first.clone());
        }
    }

    #[test]
    fn anomaly_residual_vanishes(seed in any::<u64>()) {
        let e = draw(SampleKind::AlmostElliptic, 3, 3, seed);
        prop_assert!(hae_residual(&e).unwrap().is_zero());
    }

    #[test]
    fn pure_weight_output(seed in any::<u64>()) {
        let e = draw(SampleKind::Elliptic, 3, 3, seed);
        let Weight::Pure(w) = e.weight() else { unreachable!() };
        let v = reg_default(&e).unwrap();
        prop_assert!(v.weights().iter().all(|&x| x == w));
        prop_assert!(v.to_almost_holomorphic().is_ok());
    }

    #[test]
    fn primitive_inverts_delta(seed in any::<u64>(), a in 1u8..=3, p in 1u8..=3) {
        prop_assume!(a != p);
        let e = draw(SampleKind::QuasiElliptic, 3, 3, seed);
        let g = delta_primitive(&e, a, p).unwrap();
        prop_assert!(same(&delta(&g, a).unwrap(), &e));
    }

    #[test]
    fn acycle_pivot_independent(seed in any::<u64>()) {
        let e = draw(SampleKind::QuasiElliptic, 3, 3, seed);
        let via = |p: u8| {
            let g = delta_primitive(&e, 1, p).unwrap();
            let mut out = Expr::zero(e.live().without(1));
            for b in [2u8, 3] {
                out += &residue(&g, 1, b);
            }
            out
        };
        prop_assert!(same(&via(2), &via(3)));
    }

    #[test]
    fn acycle_weight_bound(seed in any::<u64>()) {
        let e = draw(SampleKind::QuasiElliptic, 3, 3, seed);
        let w = e.weight().max().unwrap();
        for s in permutations(&e.live().to_vec()) {
            prop_assert!(ordered_acycle(&e, &s).unwrap().weights().iter().all(|&x| x <= w));
        }
    }

    #[test]
    fn forest_bijection(perm in Just((1usize..=8).collect::<Vec<_>>()).prop_shuffle()) {
        let f = permutation_to_forest(&perm).unwrap();
        prop_assert_eq!(forest_to_permutation(&f), perm);
    }
}

#[test]
fn scaling_is_linear() {
    let e = parse("wp(1,2)*wp(2,3)").unwrap();
    let v = reg_default(&e).unwrap();
    assert_eq!(reg_default(&e.scale_rat(&int(-3))).unwrap(), v.scale(&int(-3)));
}
