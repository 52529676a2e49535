use proptest::prelude::*;
use radnet::activation::{Activation, ActivationKind};
use radnet::document;
use radnet::hard::{make_bump, signs_from_mask, PackingFamily};
use radnet::learning::{truncate, F64Net};
use radnet::numeric::{finite_diff, stream_rng, GridSpec, Precision};
use radnet::poly::PolyBridge;
use radnet::tree::{param_count, param_count_enumerated};

fn kind() -> impl Strategy<Value = ActivationKind> {
    prop::sample::select(ActivationKind::ALL.to_vec())
}

fn widths() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 2..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_derivatives_match_finite_differences(k in kind(), order in 1usize..4, t in -6.0f64..6.0) {
        let act = Activation::new(k);
        let prec = Precision::new(192).unwrap();
        let x = prec.real(t);
        let h = prec.real(1e-12);
        let fd = finite_diff(|u| Ok(act.eval(u)), order, &x, &h).unwrap().to_f64();
        let exact = act.derivative_f64(order, t).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-9 * (1.0 + exact.abs()), "fd {fd} exact {exact}");
    }

    #[test]
    fn closed_form_count_matches_enumeration(w in widths()) {
        prop_assert_eq!(param_count(&w), param_count_enumerated(&w));
    }

    #[test]
    fn doubling_the_grid_never_lowers_the_sup(count in 2usize..200, lo in -2.0f64..0.0, span in 0.1f64..3.0) {
        let f = |t: f64| (7.3 * t).sin() + t * t;
        let coarse = GridSpec::uniform(lo, lo + span, count);
        let fine = GridSpec::uniform(lo, lo + span, 2 * count - 1);
        let sup = |g: &GridSpec| g.points().into_iter().map(|t| f(t).abs()).fold(0.0, f64::max);
        prop_assert!(sup(&fine) >= sup(&coarse));
    }

    #[test]
    fn truncation_is_idempotent_and_contracting(a in -10.0f64..10.0, b in -10.0f64..10.0, m in 0.0f64..5.0) {
        prop_assert_eq!(truncate(truncate(a, m), m), truncate(a, m));
        prop_assert!((truncate(a, m) - truncate(b, m)).abs() <= (a - b).abs());
        prop_assert!(truncate(a, m).abs() <= m);
    }

    #[test]
    fn documents_round_trip(w in widths(), seed in any::<u64>(), k in kind()) {
        let mut rng = stream_rng(seed, 0);
        let net = F64Net::random(&w, Activation::new(k), 3.0, &mut rng).unwrap().to_tree_net().unwrap();
        let back = document::from_json(&document::to_json(&net).unwrap()).unwrap();
        prop_assert!(back == net);
        let x: Vec<f64> = (0..net.arch().input_dim()).map(|i| 0.1 * i as f64 - 0.2).collect();
        prop_assert_eq!(back.eval_point(&x).unwrap(), net.eval_point(&x).unwrap());
    }

    #[test]
    fn flipping_every_sign_negates_the_member(n_star in 1usize..10, mask in any::<u64>(), x in -1.0f64..1.0, y in -1.0f64..1.0, s in 0usize..2) {
        let fam = PackingFamily::new(n_star, make_bump(s, 1.0, 1.0).unwrap()).unwrap();
        let signs = signs_from_mask(mask, n_star);
        let flipped: Vec<i8> = signs.iter().map(|e| -e).collect();
        let p = [x * 0.7, y * 0.7];
        let a = fam.member(&signs, &p).unwrap();
        let b = fam.member(&flipped, &p).unwrap();
        prop_assert!((a + b).abs() <= 1e-15 * (1.0 + a.abs()));
    }

    #[test]
    fn bump_supports_are_disjoint(n_star in 1usize..40) {
        let fam = PackingFamily::new(n_star, make_bump(0, 1.0, 1.0).unwrap()).unwrap();
        prop_assert!(fam.max_overlap(2000) <= 1);
    }
}

#[test]
fn enumeration_has_full_cardinality() {
    for n_star in 1..=10 {
        let fam = PackingFamily::new(n_star, make_bump(0, 1.0, 1.0).unwrap()).unwrap();
        let mut all = fam.enumerate().unwrap();
        assert_eq!(all.len(), 1 << n_star);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 1 << n_star);
    }
}

#[test]
fn product_gate_respects_its_tolerance() {
    let prec = Precision::DEFAULT;
    let act = Activation::new(ActivationKind::TanhShifted);
    let theta0 = act.find_theta0(3, 0.05).unwrap();
    let bridge = PolyBridge::new(act, theta0, act.profile(3).unwrap(), prec).unwrap();
    let eps = 1e-2;
    let gate = bridge.product_gate(&prec.real(eps)).unwrap();
    let mut rng = stream_rng(3, 0);
    use rand::Rng;
    for _ in 0..500 {
        let (u, v) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let got = gate.combine(&prec.real(u), &prec.real(v)).to_f64();
        assert!((got - u * v).abs() <= eps, "{u} {v} {got}");
    }
}
