use cann::datagen::{solve_ratio_path, ProtocolSpec};
use cann::discovery::{prune, r_squared, DEFAULT_THRESHOLD};
use cann::energy::psi;
use cann::kinematics::{invariants, pullback_point, push_forward};
use cann::stress::stress;
use cann::training::{fit_restart, Objective};
use cann::{reference, Curve, Dataset, NetworkWeights, StretchPair, TrainConfig, N_WEIGHTS};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = NetworkWeights> {
    proptest::collection::vec(0.0..2.0f64, N_WEIGHTS).prop_map(|v| {
        let flat: [f64; N_WEIGHTS] = v.try_into().unwrap();
        NetworkWeights::from_flat(&flat).unwrap()
    })
}

fn stretch() -> impl Strategy<Value = StretchPair> {
    (0.8..1.4f64, 0.8..1.4f64).prop_map(|(a, b)| StretchPair::new(a, b).unwrap())
}

proptest! {
    #[test]
    fn energy_is_non_negative(w in weights(), s in stretch()) {
        prop_assert!(psi(&invariants(s), &w).unwrap() >= 0.0);
    }

    #[test]
    fn fifth_invariants_square_the_fourth(s in stretch()) {
        let inv = invariants(s);
        prop_assert_eq!(inv.i5_11, inv.i4_11 * inv.i4_11);
        prop_assert_eq!(inv.i5_22, inv.i4_22 * inv.i4_22);
    }

    #[test]
    fn swapping_axes_and_fibers_swaps_stress(w in weights(), s in stretch()) {
        let p = stress(s, &w).unwrap();
        let q = stress(s.swapped(), &w.mirrored()).unwrap();
        prop_assert_eq!(q, p.swapped());
    }

    #[test]
    fn pullback_round_trips(l1 in 0.7..1.5f64, l2 in 0.7..1.5f64, p1 in -50.0..50.0f64, p2 in -50.0..50.0f64) {
        let q = push_forward(&cann::BiaxialPoint::new(l1, l2, p1, p2).unwrap());
        let back = pullback_point(q.e11, q.e22, q.s11, q.s22).unwrap();
        prop_assert!((back.lambda1() - l1).abs() <= 1e-12);
        prop_assert!((back.lambda2() - l2).abs() <= 1e-12);
        prop_assert!((back.p1 - p1).abs() <= 1e-12 * p1.abs().max(1.0));
        prop_assert!((back.p2 - p2).abs() <= 1e-12 * p2.abs().max(1.0));
    }

    #[test]
    fn r_squared_ignores_point_order(seed in 0u64..1000) {
        let w = reference::left_atrium();
        let mut spec = ProtocolSpec::from_label("1:0.75").unwrap();
        spec.noise_std = 0.5;
        spec.seed = seed;
        let points = solve_ratio_path(&w, &spec).unwrap();
        let mut reversed = points.clone();
        reversed.reverse();
        let fitted = reference::left_atrium().with_term(5, 1.0, 1.2).unwrap();
        let a = r_squared(&Dataset::new(vec![Curve { label: "x".into(), points }]), &fitted).unwrap();
        let b = r_squared(&Dataset::new(vec![Curve { label: "x".into(), points: reversed }]), &fitted).unwrap();
        for (x, y) in a.per_curve.iter().zip(&b.per_curve) {
            prop_assert!((x.r2.unwrap() - y.r2.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn pruning_is_idempotent(w in weights()) {
        let spec = ProtocolSpec::from_label("1:1").unwrap();
        let mut points = solve_ratio_path(&reference::left_atrium(), &spec).unwrap();
        points.truncate(8);
        let data = Dataset::new(vec![Curve { label: "1:1".into(), points }]);
        let once = prune(&w, &data, DEFAULT_THRESHOLD, 1.0).unwrap();
        let twice = prune(&once.weights(), &data, DEFAULT_THRESHOLD, 1.0).unwrap();
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn pruned_model_tracks_full_model() {
    let data = Dataset::new(vec![Curve {
        label: "1:1".into(),
        points: solve_ratio_path(&reference::left_atrium(), &ProtocolSpec::from_label("1:1").unwrap()).unwrap(),
    }]);
    let w = reference::left_atrium()
        .with_term(1, 1.0, 1e-4)
        .and_then(|w| w.with_term(11, 1e-3, 1e-3))
        .unwrap();
    let model = prune(&w, &data, DEFAULT_THRESHOLD, 1.0).unwrap();
    let max = data.max_abs_stress();
    for (_, p) in data.rows() {
        let full = stress(p.stretch, &w).unwrap();
        let sparse = stress(p.stretch, &model.weights()).unwrap();
        assert!((full.p1 - sparse.p1).abs() <= 5e-3 * max);
        assert!((full.p2 - sparse.p2).abs() <= 5e-3 * max);
    }
}

#[test]
fn weights_stay_non_negative_every_epoch() {
    let w = reference::right_atrium();
    let mut points = Vec::new();
    for label in ["1:0.5", "1:1", "0.5:1"] {
        points.extend(solve_ratio_path(&w, &ProtocolSpec::from_label(label).unwrap()).unwrap());
    }
    for alpha in [0.0, 1.0, 10.0] {
        let config = TrainConfig { alpha, max_epochs: 2_000, restarts: 1, ..Default::default() };
        let objective = Objective::new(&points, alpha, 1).unwrap();
        let mut epochs = 0;
        fit_restart(&objective, &config, 0, |_, w| {
            epochs += 1;
            assert!(w.iter().all(|&x| x >= 0.0));
        })
        .unwrap();
        assert!(epochs > 0);
    }
}
