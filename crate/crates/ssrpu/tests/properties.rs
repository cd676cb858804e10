//! Randomized invariants over the public surface: things that must hold for
//! every input, not just the hand-computed cases in the unit tests.

use ndarray::{Array1, Array2};
use proptest::prelude::*;

use ssrpu::dataset::ObservedDataset;
use ssrpu::datagen::{generate, SynthConfig};
use ssrpu::io::{load_jsonl, save_jsonl};
use ssrpu::loss::{LossFamily, LossForm, LossSpec, Sign};
use ssrpu::metrics::{evaluate_scores, micro_prf, na_metric};
use ssrpu::model::{predict_from_scores, schedule_multiplier};
use ssrpu::prior::{build_prior_config, derive_unlabeled_prior};
use ssrpu::risk::{assemble_risk, RiskEstimator, RiskSpec};

fn finite_score() -> impl Strategy<Value = f64> {
    -50.0..50.0f64
}

fn loss_spec_strategy() -> impl Strategy<Value = LossSpec> {
    let family = prop_oneof![Just(LossFamily::Squared), Just(LossFamily::LogSigmoid)];
    let margin = prop_oneof![0.05..2.0f64, (-2.0..-0.05f64)];
    (family, proptest::option::of(margin)).prop_map(|(family, margin)| match margin {
        Some(m) => LossSpec::ranking(family, m).expect("nonzero margin"),
        None => LossSpec::plain(family),
    })
}

fn sign_strategy() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Pos), Just(Sign::Neg)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn losses_are_nonnegative_and_finite(
        spec in loss_spec_strategy(),
        score in finite_score(),
        none_score in finite_score(),
        sign in sign_strategy(),
    ) {
        let eval = spec.eval(score, none_score, sign);
        prop_assert!(eval.value.is_finite());
        prop_assert!(eval.value >= 0.0);
        prop_assert!(eval.grad_score.is_finite());
        prop_assert!(eval.grad_none.is_finite());
    }

    #[test]
    fn plain_losses_are_label_antisymmetric(score in finite_score()) {
        prop_assert_eq!(
            ssrpu::loss::squared_loss(score, Sign::Pos),
            ssrpu::loss::squared_loss(-score, Sign::Neg)
        );
        prop_assert_eq!(
            ssrpu::loss::log_sigmoid_loss(score, Sign::Pos),
            ssrpu::loss::log_sigmoid_loss(-score, Sign::Neg)
        );
    }

    #[test]
    fn ranking_losses_depend_only_on_the_gap(
        spec in loss_spec_strategy().prop_filter("ranking only", |s| s.form() == LossForm::Ranking),
        gap in finite_score(),
        base in finite_score(),
        sign in sign_strategy(),
    ) {
        let at_zero = spec.eval(gap, 0.0, sign);
        let shifted = spec.eval(base + gap, base, sign);
        // base + gap - base need not be bitwise gap, so compare loosely.
        let tol = 1e-9 * (1.0 + at_zero.value.abs());
        prop_assert!((at_zero.value - shifted.value).abs() <= tol);
    }

    #[test]
    fn unlabeled_prior_stays_between_zero_and_pi(
        pi in 0.01..0.99f64,
        frac in 0.0..1.0f64,
    ) {
        let pi_labeled = pi * frac;
        let pi_u = derive_unlabeled_prior(pi, pi_labeled).unwrap();
        prop_assert!(pi_u >= 0.0);
        prop_assert!(pi_u <= pi + 1e-15);
    }

    #[test]
    fn built_prior_configs_are_internally_consistent(
        labeled in proptest::collection::vec(0.0..0.3f64, 1..5),
        multiplier in 1.0..10.0f64,
    ) {
        let cfg = build_prior_config(&labeled, multiplier, 0.01).unwrap();
        for class in 0..cfg.class_count() {
            let pi = cfg.pi()[class];
            let pi_l = cfg.pi_labeled()[class];
            let pi_u = cfg.pi_unlabeled()[class];
            prop_assert!(pi >= pi_l);
            prop_assert!(pi <= 0.99);
            prop_assert!(pi > 0.0);
            prop_assert!((0.0..=pi).contains(&pi_u));
        }
    }

    #[test]
    fn schedule_is_a_fraction_and_warms_up_linearly(
        step in 0usize..5000,
        total in 1usize..5000,
        warmup in 0.0..0.5f64,
    ) {
        let step = step.min(total.saturating_sub(1));
        let m = schedule_multiplier(step, total, warmup);
        prop_assert!((0.0..=1.0).contains(&m));
    }

    #[test]
    fn predictions_agree_with_score_comparisons(
        rows in proptest::collection::vec(
            proptest::collection::vec(-5.0..5.0f64, 4),
            1..20,
        ),
    ) {
        let n = rows.len();
        let scores = Array2::from_shape_vec((n, 4), rows.concat()).unwrap();
        let plain = predict_from_scores(scores.view(), LossForm::Plain);
        let ranking = predict_from_scores(scores.view(), LossForm::Ranking);
        for r in 0..n {
            for c in 0..3 {
                prop_assert_eq!(plain[(r, c)], scores[(r, c + 1)] > 0.0);
                prop_assert_eq!(ranking[(r, c)], scores[(r, c + 1)] > scores[(r, 0)]);
            }
        }
    }

    #[test]
    fn micro_metrics_stay_in_range_and_f1_is_harmonic(
        pred_bits in proptest::collection::vec(proptest::bool::ANY, 30),
        gold_bits in proptest::collection::vec(proptest::bool::ANY, 30),
    ) {
        let pred = Array2::from_shape_vec((10, 3), pred_bits).unwrap();
        let gold = Array2::from_shape_vec((10, 3), gold_bits).unwrap();
        let (p, r, f1, counts) = micro_prf(pred.view(), gold.view()).unwrap();
        for v in [p, r, f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if p + r > 0.0 {
            prop_assert!((f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
        } else {
            prop_assert_eq!(f1, 0.0);
        }
        let tp: usize = counts.iter().map(|c| c.true_pos).sum();
        let fp: usize = counts.iter().map(|c| c.false_pos).sum();
        let fn_: usize = counts.iter().map(|c| c.false_neg).sum();
        let predicted = pred.iter().filter(|&&b| b).count();
        let actual = gold.iter().filter(|&&b| b).count();
        prop_assert_eq!(tp + fp, predicted);
        prop_assert_eq!(tp + fn_, actual);
    }

    #[test]
    fn ranking_error_is_bounded_by_class_count(
        scores_flat in proptest::collection::vec(-3.0..3.0f64, 24),
        gold_bits in proptest::collection::vec(proptest::bool::ANY, 18),
    ) {
        let scores = Array2::from_shape_vec((6, 4), scores_flat).unwrap();
        let gold = Array2::from_shape_vec((6, 3), gold_bits).unwrap();
        let l_na = na_metric(scores.view(), gold.view()).unwrap();
        prop_assert!((0.0..=3.0).contains(&l_na));
        let report = evaluate_scores(scores.view(), gold.view(), LossForm::Ranking).unwrap();
        prop_assert!((report.mean_l_na - l_na).abs() < 1e-15);
    }

    #[test]
    fn every_estimator_risk_is_nonnegative(
        seed in 0u64..1000,
        estimator_idx in 0usize..3,
        weighting in proptest::bool::ANY,
    ) {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(4..12);
        let k = rng.random_range(1..4);
        let scores = Array2::from_shape_fn((n, k + 1), |_| rng.random_range(-3.0..3.0));
        let mut observed = Array2::from_shape_fn((n, k), |_| rng.random_bool(0.4));
        for class in 0..k {
            observed[(0, class)] = true;
            observed[(n - 1, class)] = false;
        }
        let labeled = vec![0.2; k];
        let priors = build_prior_config(&labeled, 2.0, 0.01).unwrap();
        let estimator = [RiskEstimator::Pn, RiskEstimator::NnPu, RiskEstimator::NnSpu][estimator_idx];
        let spec = RiskSpec {
            estimator,
            loss: LossSpec::ranking(LossFamily::Squared, 0.25).unwrap(),
            class_weighting: weighting,
        };
        let (breakdown, grad) = assemble_risk(scores.view(), observed.view(), &priors, &spec).unwrap();
        prop_assert!(breakdown.total >= 0.0);
        prop_assert!(breakdown.total.is_finite());
        prop_assert_eq!(grad.dim(), (n, k + 1));
        for class in 0..k {
            prop_assert!(breakdown.per_class_positive_term[class] >= 0.0);
            prop_assert_eq!(
                breakdown.clamp_active[class],
                breakdown.per_class_negative_term_raw[class] < 0.0
                    && estimator != RiskEstimator::Pn
            );
        }
    }

    #[test]
    fn observed_labels_must_be_a_subset_of_gold(
        bits in proptest::collection::vec(proptest::bool::ANY, 12),
    ) {
        let n = 6;
        let observed = Array2::from_shape_vec((n, 2), bits).unwrap();
        let gold = Array2::from_elem((n, 2), false);
        let features = Array2::zeros((n, 3));
        let result = ObservedDataset::new(features, observed.clone(), Some(gold));
        if observed.iter().any(|&b| b) {
            prop_assert!(result.is_err(), "a label outside gold must be rejected");
        } else {
            prop_assert!(result.is_ok());
        }
    }

    #[test]
    fn generated_datasets_respect_their_config(
        n in 50usize..300,
        seed in 0u64..500,
        pi in 0.05..0.45f64,
        keep in 0.0..1.0f64,
    ) {
        let cfg = SynthConfig {
            n,
            d: 3,
            class_priors: vec![pi],
            label_keep_prob: vec![keep],
            separation: 4.0,
            cap_per_class: None,
            seed,
        };
        let data = generate(&cfg).unwrap();
        let gold = data.gold().unwrap();
        let gold_count = gold.column(0).iter().filter(|&&b| b).count();
        prop_assert_eq!(gold_count, (pi * n as f64).round() as usize);
        for row in 0..n {
            prop_assert!(!data.observed()[(row, 0)] || gold[(row, 0)]);
        }
    }
}

proptest! {
    // File round trips are slower; fewer cases keep the suite quick.
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dataset_files_round_trip_exactly(
        values in proptest::collection::vec(
            prop_oneof![
                -1e6..1e6f64,
                Just(0.1 + 0.2),
                Just(-0.0),
                Just(1e-300),
            ],
            8,
        ),
        observed_bits in proptest::collection::vec(proptest::bool::ANY, 8),
    ) {
        let features = Array2::from_shape_vec((4, 2), values).unwrap();
        let gold_col: Array1<bool> = Array1::from_vec(observed_bits[..4].to_vec());
        let observed_col: Array1<bool> = Array1::from_vec(
            observed_bits[4..]
                .iter()
                .zip(gold_col.iter())
                .map(|(&o, &g)| o && g)
                .collect(),
        );
        let gold = gold_col.insert_axis(ndarray::Axis(1));
        let observed = observed_col.insert_axis(ndarray::Axis(1));
        let data = ObservedDataset::new(features, observed, Some(gold)).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.jsonl");
        save_jsonl(&data, &path, None).unwrap();
        let loaded = load_jsonl(&path).unwrap();
        prop_assert_eq!(loaded.features(), data.features());
        prop_assert_eq!(loaded.observed(), data.observed());
        prop_assert_eq!(loaded.gold(), data.gold());
    }
}
