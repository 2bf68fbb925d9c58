mod common;

use common::*;
use proptest::prelude::*;
use queue_resampling::eval::Prequential;
use queue_resampling::harness::{
    run_single, AggregateSeries, ExperimentConfig, RunResult, RunSeeds,
};
use queue_resampling::methods::{
    Baseline, BoundedClassQueues, CostSensitive, DecayedClassSizes, MethodSpec, OobSingle,
    QueueResampling, SlidingWindow, Strategy as OnlineStrategy,
};
use queue_resampling::net::{Network, WeightedBatch};
use queue_resampling::streams::{Dataset, Label, LabeledExample, PriorSchedule, Stream};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_label() -> impl Strategy<Value = Label> {
    any::<bool>().prop_map(Label::from_bool)
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    prop_oneof![Just(Dataset::Sine), Just(Dataset::Circle)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stream_labels_match_concept(dataset in arb_dataset(), p in 0.01f64..0.99, seed in any::<u64>()) {
        let mut s = Stream::new(dataset, PriorSchedule::constant(p).unwrap(), seed);
        for _ in 0..200 {
            let e = s.next_example().unwrap();
            prop_assert!(e.x.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(dataset.label(e.x).unwrap(), e.y);
            match dataset {
                Dataset::Circle => {
                    let d2 = (e.x[0] - 0.4).powi(2) + (e.x[1] - 0.5).powi(2);
                    prop_assert_eq!(e.y.is_positive(), d2 <= 0.04 + 1e-12);
                }
                Dataset::Sine => {
                    let below = 2.0 * e.x[1] - 1.0 < (2.0 * std::f64::consts::PI * e.x[0]).sin();
                    if e.y.is_positive() {
                        prop_assert!(below);
                    }
                }
            }
        }
    }

    #[test]
    fn queues_match_two_list_oracle(
        cap in 1usize..=50,
        arrivals in prop::collection::vec((0.0f64..1.0, arb_label()), 1..300),
    ) {
        let mut q = BoundedClassQueues::new(cap).unwrap();
        let mut oracle = QueueOracle::default();
        for (i, (v, y)) in arrivals.into_iter().enumerate() {
            let x = [v, i as f64 / 1000.0];
            q.append(LabeledExample::new(x, y));
            oracle.push(x, y, cap);
            prop_assert!(q.positives().len() <= cap && q.negatives().len() <= cap);
            prop_assert!(q.positives().iter().all(|e| e.y == Label::Positive));
            prop_assert!(q.negatives().iter().all(|e| e.y == Label::Negative));
            prop_assert!(q.positives().iter().map(|e| (e.x, e.y)).eq(oracle.positives.iter().copied()));
            prop_assert!(q.negatives().iter().map(|e| (e.x, e.y)).eq(oracle.negatives.iter().copied()));
            prop_assert_eq!(q.union().count(), q.len());
        }
    }

    #[test]
    fn decayed_sizes_sum_and_closed_form(theta in 0.5f64..0.999, labels in prop::collection::vec(arb_label(), 1..500)) {
        let mut s = DecayedClassSizes::new(theta).unwrap();
        for y in &labels {
            s.update(*y);
        }
        let t = labels.len() as i32;
        let total = s.size(Label::Positive) + s.size(Label::Negative);
        prop_assert!((total - (1.0 - theta.powi(t))).abs() < 1e-12);
        let pos: Vec<bool> = labels.iter().map(|y| y.is_positive()).collect();
        prop_assert!((s.size(Label::Positive) - (1.0 - theta) * faded_sum(theta, &pos)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&s.size(Label::Positive)));
    }

    #[test]
    fn prequential_bounds(alpha in 0.5f64..0.999, trace in prop::collection::vec((arb_label(), arb_label()), 1..600)) {
        let mut p = Prequential::new(alpha).unwrap();
        let bound = 1.0 / (1.0 - alpha) + 1e-9;
        for (y, yh) in trace {
            p.update(y, yh);
            let (tp, pos, tn, neg) = p.accumulators();
            prop_assert!(0.0 <= tp && tp <= pos && pos <= bound);
            prop_assert!(0.0 <= tn && tn <= neg && neg <= bound);
            prop_assert!((0.0..=1.0).contains(&p.gmean()));
        }
    }

    #[test]
    fn parameters_stay_finite(seed in any::<u64>(), weight in 0.1f64..50.0) {
        let mut net = Network::init(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for step in 1..=200u64 {
            let e = LabeledExample::new([rng.gen(), rng.gen()], Label::from_bool(rng.gen()));
            net.train_step(&WeightedBatch::single(&e, weight).unwrap());
            prop_assert_eq!(net.adam_steps(), step);
        }
        prop_assert!(net.params().is_finite());
    }
}

#[test]
fn prior_fidelity_at_fixed_seeds() {
    let n = 4000u32;
    for (dataset, p) in [
        (Dataset::Circle, 0.01),
        (Dataset::Circle, 0.1),
        (Dataset::Sine, 0.5),
        (Dataset::Sine, 0.9),
    ] {
        for seed in 0..5 {
            let mut s = Stream::new(dataset, PriorSchedule::constant(p).unwrap(), seed);
            let pos = (0..n)
                .filter(|_| s.next_example().unwrap().y.is_positive())
                .count() as f64;
            let expected = n as f64 * p;
            let slack = 4.0 * (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (pos - expected).abs() <= slack,
                "{dataset} p={p} seed={seed}: {pos}"
            );
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let (net, batch) = random_pair(&mut rng);
        let analytic = net.gradients(&batch).to_flat();
        let numeric = finite_difference_gradient(&net, &batch, FD_STEP);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!(relative_error(*a, *n) < 1e-5, "analytic {a} numeric {n}");
        }
    }
}

#[test]
fn training_trajectory_is_deterministic() {
    let run = || {
        let mut s = Stream::new(Dataset::Sine, PriorSchedule::constant(0.3).unwrap(), 5);
        let mut q = QueueResampling::new(Network::init(6), 4).unwrap();
        for _ in 0..300 {
            let e = s.next_example().unwrap();
            q.train(&e);
        }
        q.network().params().to_flat()
    };
    let a = run();
    let b = run();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

fn sample_examples(n: usize, seed: u64, p: f64) -> Vec<LabeledExample> {
    let mut s = Stream::new(Dataset::Circle, PriorSchedule::constant(p).unwrap(), seed);
    (0..n).map(|_| s.next_example().unwrap()).collect()
}

#[test]
fn baseline_step_reduces_loss_and_matches_degenerate_strategies() {
    let e = LabeledExample::new([0.45, 0.55], Label::Positive);
    let net = Network::init(12);
    let batch = WeightedBatch::single(&e, 1.0).unwrap();
    let before = net.loss(&batch);

    let mut base = Baseline::new(net.clone());
    assert_eq!(base.train(&e), 1);
    assert!(base.network().loss(&batch) < before);

    let mut window = SlidingWindow::new(net.clone(), 1).unwrap();
    let mut queue = QueueResampling::new(net.clone(), 3).unwrap();
    queue.train(&e);
    assert_eq!(queue.network(), base.network());

    // W = 1 keeps tracking the baseline over a whole stream
    let mut base = Baseline::new(net.clone());
    for ex in sample_examples(200, 1, 0.3) {
        base.train(&ex);
        window.train(&ex);
    }
    assert_eq!(window.network(), base.network());
}

#[test]
fn cost_sensitive_negative_update_equals_baseline() {
    let net = Network::init(21);
    let mut base = Baseline::new(net.clone());
    let mut cs = CostSensitive::new(net, 19.0).unwrap();
    for ex in sample_examples(100, 2, 0.0001)
        .into_iter()
        .filter(|e| !e.y.is_positive())
    {
        base.train(&ex);
        cs.train(&ex);
    }
    assert_eq!(base.network(), cs.network());
}

#[test]
fn single_update_per_step_for_non_bagging_strategies() {
    let specs = [
        MethodSpec::Baseline,
        MethodSpec::CostSensitive { cost_ratio: 19.0 },
        MethodSpec::SlidingWindow { window: 7 },
        MethodSpec::Queue { len: 1 },
        MethodSpec::Queue { len: 25 },
    ];
    let examples = sample_examples(300, 3, 0.05);
    for spec in specs {
        let mut s = spec.build(Network::init(4), 0).unwrap();
        for (t, ex) in examples.iter().enumerate() {
            assert_eq!(s.train(ex), 1);
            assert_eq!(s.network().adam_steps(), t as u64 + 1, "{spec}");
        }
    }
}

#[test]
fn queue_batches_follow_class_queues() {
    let mut q = QueueResampling::new(Network::init(0), 1).unwrap();
    let examples = sample_examples(400, 9, 0.2);
    let mut seen_pos = false;
    let mut seen_neg = false;
    for ex in &examples {
        q.train(ex);
        seen_pos |= ex.y.is_positive();
        seen_neg |= !ex.y.is_positive();
        let expected = usize::from(seen_pos) + usize::from(seen_neg);
        assert_eq!(q.queues().len(), expected);
        assert!(q.queues().union().any(|e| e == ex));
    }
}

#[test]
fn sliding_window_may_hold_one_class() {
    let mut w = SlidingWindow::new(Network::init(0), 50).unwrap();
    for ex in sample_examples(50, 4, 0.0001) {
        w.train(&ex);
    }
    assert!(w.buffer().iter().all(|e| e.y == Label::Negative));
    assert_eq!(w.buffer().len(), 50);
}

#[test]
fn oob_replica_counts() {
    let mut oob = OobSingle::new(Network::init(0), 0.99, 100, 42).unwrap();
    let n = 10_000;
    for lambda in [1.0, 5.0] {
        let mean = (0..n)
            .map(|_| oob.draw_replicas(lambda) as f64)
            .sum::<f64>()
            / n as f64;
        let stderr = (lambda / n as f64).sqrt();
        assert!(
            (mean - lambda).abs() <= 3.0 * stderr,
            "lambda {lambda}: mean {mean}"
        );
    }
    assert!((0..100).all(|_| oob.draw_replicas(500.0) == 100));

    // majority-only arrivals run at rate 1, and K = 0 means no update
    let mut oob = OobSingle::new(Network::init(0), 0.99, 100, 7).unwrap();
    let mut total = 0;
    let mut zero_draws = 0;
    for ex in sample_examples(10_000, 5, 0.0001)
        .iter()
        .filter(|e| !e.y.is_positive())
    {
        let before = oob.network().adam_steps();
        let k = oob.train(ex);
        assert_eq!(oob.network().adam_steps(), before + k);
        zero_draws += usize::from(k == 0);
        total += k;
    }
    let mean = total as f64 / 10_000.0;
    assert!(
        (mean - 1.0).abs() <= 3.0 * (1.0f64 / 10_000.0).sqrt() + 1e-3,
        "mean {mean}"
    );
    assert!(zero_draws > 0);
}

#[test]
fn oob_minority_rate_uses_updated_sizes() {
    let mut oob = OobSingle::new(Network::init(0), 0.99, 100, 1).unwrap();
    let neg = LabeledExample::new([0.9, 0.9], Label::Negative);
    let pos = LabeledExample::new([0.4, 0.5], Label::Positive);
    for _ in 0..200 {
        oob.train(&neg);
    }
    oob.train(&pos);
    let s = oob.sizes();
    let expected = s.size(Label::Negative) / s.size(Label::Positive);
    assert!((s.size(Label::Positive) - 0.01).abs() < 1e-12);
    assert!((s.oversampling_rate(Label::Positive) - expected).abs() < 1e-12);
    assert!(expected > 80.0);
}

#[test]
fn recall_ignores_arrangement_of_negative_outcomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let trace: Vec<(Label, Label)> = (0..300)
            .map(|_| {
                (
                    Label::from_bool(rng.gen_bool(0.3)),
                    Label::from_bool(rng.gen()),
                )
            })
            .collect();
        let neg_slots: Vec<usize> = (0..trace.len())
            .filter(|&i| !trace[i].0.is_positive())
            .collect();
        let mut preds: Vec<Label> = neg_slots.iter().map(|&i| trace[i].1).collect();
        preds.shuffle(&mut rng);
        let mut shuffled = trace.clone();
        for (&slot, p) in neg_slots.iter().zip(preds) {
            shuffled[slot].1 = p;
        }
        let mut a = Prequential::new(0.99).unwrap();
        let mut b = Prequential::new(0.99).unwrap();
        for (&(y, yh), &(y2, yh2)) in trace.iter().zip(&shuffled) {
            a.update(y, yh);
            b.update(y2, yh2);
        }
        assert_eq!(a.recall(), b.recall());
        // trailing negatives rescale both positive accumulators equally
        let r = a.recall();
        for _ in 0..20 {
            a.update(Label::Negative, Label::Positive);
        }
        assert!((a.recall() - r).abs() < 1e-12);
    }
}

fn drift_config(method: MethodSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: method.label(),
        dataset: Dataset::Sine,
        schedule: PriorSchedule::new(vec![(0, 0.1), (400, 0.9)]).unwrap(),
        method,
        alpha: 0.99,
        steps: 800,
        runs: 4,
        base_seed: 2024,
        reset_at: vec![400],
    }
}

/// Replays a run by hand from the library pieces.
fn manual_run(config: &ExperimentConfig, run: u64, eval_from: usize) -> (Vec<f64>, Vec<Label>) {
    let seeds = RunSeeds::derive(config.base_seed, run);
    let mut stream = Stream::new(config.dataset, config.schedule.clone(), seeds.stream);
    let mut strategy = config
        .method
        .build(Network::init(seeds.network), seeds.strategy)
        .unwrap();
    let mut eval = Prequential::new(config.alpha).unwrap();
    let mut gmean = Vec::new();
    let mut preds = Vec::new();
    for t in 0..config.steps as usize {
        let ex = stream.next_example().unwrap();
        let before = strategy.network().clone();
        let yh = strategy.predict(ex.x);
        assert_eq!(yh, before.predict(ex.x));
        if t >= eval_from {
            eval.update(ex.y, yh);
            gmean.push(eval.gmean());
        }
        preds.push(yh);
        strategy.train(&ex);
    }
    (gmean, preds)
}

#[test]
fn reset_scores_only_post_drift_outcomes() {
    for method in [
        MethodSpec::Queue { len: 5 },
        MethodSpec::OobSingle {
            theta: 0.99,
            max_replicas: 100,
        },
    ] {
        let config = drift_config(method);
        let run = run_single(&config, 1).unwrap();
        let (tail, _) = manual_run(&config, 1, 400);
        assert_eq!(&run.gmean[400..], &tail[..]);
    }
}

#[test]
fn strategies_share_stream_and_initial_weights() {
    let a = RunSeeds::derive(10, 3);
    assert_eq!(a, RunSeeds::derive(10, 3));
    let cs = drift_config(MethodSpec::CostSensitive { cost_ratio: 19.0 });
    let q = drift_config(MethodSpec::Queue { len: 2 });
    let mut s1 = Stream::new(cs.dataset, cs.schedule.clone(), a.stream);
    let mut s2 = Stream::new(q.dataset, q.schedule.clone(), a.stream);
    for _ in 0..100 {
        assert_eq!(s1.next_example().unwrap(), s2.next_example().unwrap());
    }
    let n1 = cs
        .method
        .build(Network::init(a.network), a.strategy)
        .unwrap();
    let n2 = q
        .method
        .build(Network::init(a.network), a.strategy)
        .unwrap();
    assert_eq!(n1.network(), n2.network());
}

#[test]
fn aggregate_is_recomputable_and_bounded() {
    let config = drift_config(MethodSpec::Baseline);
    let runs: Vec<RunResult> = (0..config.runs)
        .map(|r| run_single(&config, r).unwrap())
        .collect();
    let agg = AggregateSeries::from_runs(&runs);
    let n = runs.len() as f64;
    for t in 0..agg.len() {
        let vals: Vec<f64> = runs.iter().map(|r| r.gmean[t]).collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(agg.mean[t] >= min - 1e-12 && agg.mean[t] <= max + 1e-12);
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((agg.mean[t] - mean).abs() < 1e-12);
        assert!((agg.stderr[t] - (var / n).sqrt()).abs() < 1e-12);
        assert!(agg.stderr[t] >= 0.0);
    }
}
