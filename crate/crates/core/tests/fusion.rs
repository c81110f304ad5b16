use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ds_triplet::fusion::{
    self, FusionConfig, Method, NoiseModel, ScoreItem, ScoreMatrix, SynthConfig,
};
use ds_triplet::triplet::{self, TripletMass};
use ds_triplet::Frame;

#[test]
fn synthetic_classifiers_hit_their_accuracy() {
    for noise in [NoiseModel::Uniform, NoiseModel::Exponential] {
        let (matrix, labels) = fusion::synth_workload(&SynthConfig {
            noise,
            seed: 21,
            ..SynthConfig::default()
        })
        .unwrap();
        let report =
            fusion::evaluate(&matrix, &labels, Method::Triplet, &FusionConfig::default()).unwrap();
        for (name, acc) in report.individual_accuracy.unwrap() {
            assert!((acc - 0.7).abs() <= 0.03, "{noise:?} {name}: {acc}");
        }
    }
}

#[test]
fn synthetic_workloads_are_deterministic() {
    let config = SynthConfig {
        items: 50,
        seed: 5,
        ..SynthConfig::default()
    };
    assert_eq!(
        fusion::synth_workload(&config).unwrap(),
        fusion::synth_workload(&config).unwrap()
    );
    let a = fusion::fuse_matrix(
        &fusion::synth_workload(&config).unwrap().0,
        Method::Triplet,
        &FusionConfig::default(),
    )
    .unwrap();
    let b = fusion::fuse_matrix(
        &fusion::synth_workload(&config).unwrap().0,
        Method::Triplet,
        &FusionConfig::default(),
    )
    .unwrap();
    assert_eq!(a.decisions, b.decisions);
    assert_eq!(a.combinations, b.combinations);
}

#[test]
fn three_weak_classifiers_beat_their_mean() {
    let config = FusionConfig::default();
    let mut wins = 0;
    for seed in 0..100 {
        let (matrix, labels) = fusion::synth_workload(&SynthConfig {
            classifiers: 3,
            accuracy: 0.5,
            items: 300,
            seed,
            ..SynthConfig::default()
        })
        .unwrap();
        let report = fusion::evaluate(&matrix, &labels, Method::Triplet, &config).unwrap();
        if report.accuracy.unwrap() >= report.mean_individual_accuracy().unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 90, "{wins}/100");
}

#[test]
fn perfect_classifiers_are_perfect() {
    let (matrix, labels) = fusion::synth_workload(&SynthConfig {
        accuracy: 1.0,
        items: 200,
        seed: 2,
        ..SynthConfig::default()
    })
    .unwrap();
    for method in Method::ALL {
        let report = fusion::evaluate(&matrix, &labels, method, &FusionConfig::default()).unwrap();
        assert_eq!(report.accuracy, Some(1.0), "{method}");
    }
}

#[test]
fn unanimous_tops_give_one_decision_for_every_method() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let frame = Frame::indexed(6).unwrap();
    let items: Vec<ScoreItem> = (0..200)
        .map(|n| {
            let top = rng.gen_range(0..6);
            let scores = (0..4)
                .map(|_| {
                    let mut s: Vec<f64> = (0..6).map(|_| rng.gen_range(0.01..1.0)).collect();
                    s[top] = s.iter().cloned().fold(0.0, f64::max) * rng.gen_range(1.05..2.0);
                    s
                })
                .collect();
            ScoreItem {
                id: format!("i{n}"),
                scores,
            }
        })
        .collect();
    let classifiers = (0..4).map(|c| format!("c{c}")).collect();
    let matrix = ScoreMatrix::new(frame, classifiers, items).unwrap();
    let config = FusionConfig::default();
    let reports: Vec<_> = Method::ALL
        .iter()
        .map(|&m| fusion::fuse_matrix(&matrix, m, &config).unwrap())
        .collect();
    for i in 0..matrix.items().len() {
        let want = fusion::fuse_item(
            &matrix.items()[i].scores[..1],
            matrix.categories(),
            Method::Triplet,
            &config,
        )
        .unwrap()
        .category;
        for r in &reports {
            assert_eq!(
                r.decisions[i].category(),
                Some(want),
                "{} item {i}",
                r.method
            );
        }
    }
}

#[test]
fn agreeing_classifiers_reinforce() {
    let frame = Frame::indexed(3).unwrap();
    let scores = vec![vec![0.5, 0.3, 0.2]; 2];
    let single = fusion::scores_to_triplet(&scores[0], &frame).unwrap();
    for method in Method::ALL {
        let fused = fusion::fuse_item(&scores, &frame, method, &FusionConfig::default()).unwrap();
        assert_eq!(fused.category, 0);
        assert!(fused.summary.m1() > single.m1(), "{method}");
    }
}

/// Triplets sharing focus 0 with distinct runner-ups and a clear leader.
fn confident_shared_focus(rng: &mut ChaCha8Rng, frame: &Frame, l: usize) -> Vec<TripletMass> {
    let mut seconds: Vec<usize> = (1..frame.len()).collect();
    seconds.shuffle(rng);
    seconds[..l]
        .iter()
        .map(|&second| {
            let p = rng.gen_range(0.6..0.9);
            let c = rng.gen_range(0.0..(1.0 - p) * 0.5);
            TripletMass::new(frame.clone(), 0, p, second, c).unwrap()
        })
        .collect()
}

#[test]
fn approximation_tracks_the_fold_on_confident_evidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let frame = Frame::indexed(rng.gen_range(4..=8)).unwrap();
        let ts = confident_shared_focus(&mut rng, &frame, 3);
        let approx = triplet::approx_combine(&ts, 0.0).unwrap();
        let fold = triplet::fold_combine(&ts).unwrap();
        worst = worst.max(approx.to_general().max_abs_diff(&fold.to_general()));
    }
    assert!(worst <= 0.05, "max gap {worst}");
}

/// Refocusing makes the fold order-dependent; equal-focus chains never refocus.
#[test]
fn fold_order_matters_only_through_refocusing() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut changed, mut worst) = (0, 0.0f64);
    for _ in 0..1000 {
        let frame = Frame::indexed(rng.gen_range(3..=8)).unwrap();
        let ts: Vec<_> = (0..6)
            .map(|_| {
                let a = rng.gen_range(0..frame.len());
                let b = (a + rng.gen_range(1..frame.len())) % frame.len();
                let (m1, m2) = (rng.gen_range(0.3..0.6), rng.gen_range(0.0..0.3));
                TripletMass::new(frame.clone(), a, m1, b, m2).unwrap()
            })
            .collect();
        let reversed: Vec<_> = ts.iter().rev().cloned().collect();
        let (a, b) = (
            triplet::fold_combine(&ts).unwrap(),
            triplet::fold_combine(&reversed).unwrap(),
        );
        worst = worst.max(a.to_general().max_abs_diff(&b.to_general()));
        if a.a1() != b.a1() {
            changed += 1;
        }

        let aligned: Vec<_> = ts
            .iter()
            .map(|t| TripletMass::new(frame.clone(), 0, t.m1(), 1, t.m2()).unwrap())
            .collect();
        let back: Vec<_> = aligned.iter().rev().cloned().collect();
        let (x, y) = (
            triplet::fold_combine(&aligned).unwrap(),
            triplet::fold_combine(&back).unwrap(),
        );
        assert!(x.to_general().max_abs_diff(&y.to_general()) <= 1e-12);
    }
    println!(
        "reversal changed the decision in {changed}/1000 mixed chains, max mass gap {worst:.3}"
    );
    assert!(
        worst > 0.0,
        "mixed chains should show some order dependence"
    );
}
