mod common;

use common::{ex, primal_oracle, random_instance};
use tcm_core::data::SyntheticRng;
use tcm_core::svm::{solve_soft_margin, Kernel, SolverConfig};
use tcm_core::transduction::{
    classify_region, confidence_for, svm_predict_with_confidence, transduce_joint, RegionLabel,
};
use tcm_core::{transduce, Label, LabeledExample, MeasureConfig, Prediction, TransductiveResult};

fn random_point(rng: &mut SyntheticRng, n: usize, spread: f64) -> Vec<f64> {
    (0..n).map(|_| spread * rng.next_normal()).collect()
}

/// Prediction rebuilt from the support-vector counts of the two pictures.
fn rule_from_counts(r: &TransductiveResult, picture_len: usize) -> (Prediction, f64) {
    let [neg, pos] = r.pictures;
    let m = picture_len as f64;
    match (neg.new_point_is_sv, pos.new_point_is_sv) {
        (true, false) => (Prediction::Label(Label::Positive), neg.sv_count as f64 / m),
        (false, true) => (Prediction::Label(Label::Negative), pos.sv_count as f64 / m),
        (true, true) => {
            let low = neg.sv_count.min(pos.sv_count) as f64 / m;
            let p = match neg.sv_count.cmp(&pos.sv_count) {
                std::cmp::Ordering::Less => Prediction::Label(Label::Positive),
                std::cmp::Ordering::Greater => Prediction::Label(Label::Negative),
                std::cmp::Ordering::Equal => Prediction::Undecided,
            };
            (p, low)
        }
        (false, false) => panic!("new point is a support vector in neither picture"),
    }
}

#[test]
fn new_point_is_a_support_vector_in_some_picture() {
    let cfg = MeasureConfig::default();
    let mut rng = SyntheticRng::new(31);
    for case in 0..200 {
        let l = 4 + case % 27;
        let n = 1 + case % 5;
        let training = random_instance(&mut rng, l, n, 1.0 + (case % 3) as f64);
        let x = random_point(&mut rng, n, 2.0);
        let r = transduce(&training, &x, &cfg).unwrap();
        assert!(r.pictures.iter().any(|p| p.new_point_is_sv), "case {case}");
    }
}

#[test]
fn prediction_follows_the_counting_rules() {
    let cfg = MeasureConfig::default();
    let mut rng = SyntheticRng::new(32);
    for case in 0..100 {
        let l = 4 + case % 12;
        let n = 1 + case % 3;
        let training = random_instance(&mut rng, l, n, 1.5);
        let x = random_point(&mut rng, n, 1.5);
        let r = transduce(&training, &x, &cfg).unwrap();
        let (prediction, incertitude) = rule_from_counts(&r, l + 1);
        assert_eq!(r.prediction, prediction, "case {case}");
        assert!((r.incertitude - incertitude).abs() <= 1e-15, "case {case}");
        assert_eq!(r.confidence, 1.0 - r.incertitude);
        assert!(r.incertitude > 0.0 && r.incertitude <= 1.0);
        assert!(r.possibility > 0.0 && r.possibility <= 1.0);
    }
}

#[test]
fn y_points_are_predicted_their_label() {
    let cfg = MeasureConfig::default();
    let mut rng = SyntheticRng::new(33);
    let mut checked = 0;
    let mut case = 0;
    while checked < 100 {
        case += 1;
        let n = 1 + case % 3;
        let training = random_instance(&mut rng, 6 + case % 10, n, 0.6);
        let sol = solve_soft_margin(&training, Kernel::Linear, &cfg.solver).unwrap();
        let x = random_point(&mut rng, n, 2.5);
        let Some(y) = classify_region(&sol, &x).unwrap().label() else {
            continue;
        };
        checked += 1;
        let r = transduce(&training, &x, &cfg).unwrap();
        assert_eq!(r.prediction, Prediction::Label(y), "case {case}");
        assert!(r.picture(y).mu().is_infinite());
        let other = r.picture(y.opposite());
        let want = other.sv_count as f64 / (training.len() + 1) as f64;
        assert!((r.incertitude - want).abs() <= 1e-15, "case {case}");
        assert_eq!(r.possibility, 1.0);
    }
}

#[test]
fn mirror_symmetric_point_is_undecided() {
    let training = vec![ex(&[-1.0], -1), ex(&[1.0], 1)];
    let r = transduce(&training, &[0.0], &MeasureConfig::default()).unwrap();
    assert_eq!(r.prediction, Prediction::Undecided);
    assert_eq!(r.mu_neg, r.mu_pos);
    assert_eq!(r.incertitude, r.possibility);
    for y in Label::BOTH {
        let mut picture = training.clone();
        picture.push(LabeledExample::new(vec![0.0], y));
        let oracle = primal_oracle(&picture, 1.0);
        assert_eq!(
            r.picture(y).sv_count,
            oracle.support_vectors(&picture).len()
        );
    }
}

#[test]
fn deep_positive_point() {
    let training = vec![
        ex(&[-3.0], -1),
        ex(&[-2.0], -1),
        ex(&[2.0], 1),
        ex(&[3.0], 1),
    ];
    let cfg = MeasureConfig {
        solver: SolverConfig::with_c(100.0),
        ..MeasureConfig::default()
    };
    let x = [10.0];
    let r = transduce(&training, &x, &cfg).unwrap();
    assert_eq!(r.prediction, Prediction::Label(Label::Positive));
    assert!(r.mu_pos.is_infinite());
    assert_eq!(r.possibility, 1.0);
    let mut picture = training.clone();
    picture.push(LabeledExample::new(x.to_vec(), Label::Negative));
    let svs = primal_oracle(&picture, 100.0)
        .support_vectors(&picture)
        .len();
    assert!((r.incertitude - svs as f64 / 5.0).abs() < 1e-15);
    assert_eq!(
        confidence_for(&training, &x, Label::Positive, &cfg).unwrap(),
        r.mu_neg
    );
    assert!(confidence_for(&training, &x, Label::Negative, &cfg)
        .unwrap()
        .is_infinite());
}

#[test]
fn inductive_prediction_always_gets_finite_incertitude() {
    let cfg = MeasureConfig::default();
    let mut rng = SyntheticRng::new(34);
    for _ in 0..40 {
        let training = random_instance(&mut rng, 8, 2, 1.2);
        let sol = solve_soft_margin(&training, Kernel::Linear, &cfg.solver).unwrap();
        let x = random_point(&mut rng, 2, 2.0);
        let p = svm_predict_with_confidence(&sol, &x, &cfg).unwrap();
        assert!(p.incertitude.is_finite());
        assert_eq!(p.label, Label::from_decision(p.decision_value));
    }
}

#[test]
fn joint_prediction_of_one_point_matches_transduce() {
    let cfg = MeasureConfig::default();
    let mut rng = SyntheticRng::new(35);
    for case in 0..50 {
        let n = 1 + case % 3;
        let training = random_instance(&mut rng, 4 + case % 9, n, 1.3);
        let x = random_point(&mut rng, n, 1.5);
        let single = transduce(&training, &x, &cfg).unwrap();
        let joint = transduce_joint(&training, &[x], &cfg).unwrap();
        assert_eq!(joint.incertitude.value(), single.incertitude, "case {case}");
        match single.prediction {
            Prediction::Label(y) => {
                assert!(!joint.tied);
                assert_eq!(joint.assignment, vec![y]);
            }
            Prediction::Undecided => assert!(joint.tied),
        }
    }
}

#[test]
fn joint_prediction_of_two_deep_points() {
    let training = vec![
        ex(&[-3.0, 0.5], -1),
        ex(&[-2.0, -0.5], -1),
        ex(&[-2.5, 1.0], -1),
        ex(&[2.0, 0.0], 1),
        ex(&[3.0, -1.0], 1),
        ex(&[2.5, 0.7], 1),
    ];
    let points = vec![vec![-8.0, 0.3], vec![7.0, -0.2]];
    let c = 10.0;
    let cfg = MeasureConfig {
        solver: SolverConfig::with_c(c),
        ..MeasureConfig::default()
    };
    let joint = transduce_joint(&training, &points, &cfg).unwrap();

    // Oracle: sign-weighted tail share of each completion from primal support vectors.
    let completions = [
        [Label::Negative, Label::Negative],
        [Label::Negative, Label::Positive],
        [Label::Positive, Label::Negative],
        [Label::Positive, Label::Positive],
    ];
    let p: Vec<f64> = completions
        .iter()
        .map(|labels| {
            let mut seq = training.clone();
            seq.extend(
                points
                    .iter()
                    .zip(labels)
                    .map(|(x, &y)| LabeledExample::new(x.clone(), y)),
            );
            let svs = primal_oracle(&seq, c).support_vectors(&seq);
            let tail = svs.iter().filter(|&&i| i >= training.len()).count();
            tail as f64 * seq.len() as f64 / (svs.len() as f64 * 2.0)
        })
        .collect();
    for (got, want) in joint.impossibilities.iter().zip(&p) {
        assert!((got.value() - want).abs() < 1e-12, "{got} vs {want}");
    }
    let best = (0..4)
        .max_by(|&a, &b| {
            let worst = |i: usize| {
                (0..4)
                    .filter(|&j| j != i)
                    .map(|j| p[j])
                    .fold(f64::INFINITY, f64::min)
            };
            worst(a).total_cmp(&worst(b)).then(b.cmp(&a))
        })
        .unwrap();
    assert_eq!(joint.assignment, completions[best].to_vec());

    let per_point: Vec<Label> = points
        .iter()
        .map(|x| {
            transduce(&training, x, &cfg)
                .unwrap()
                .prediction
                .label()
                .unwrap()
        })
        .collect();
    assert_eq!(joint.assignment, per_point);
    assert_eq!(per_point, vec![Label::Negative, Label::Positive]);
}

#[test]
fn region_boundaries() {
    assert_eq!(
        RegionLabel::from_decision(0.0, 1e-6),
        RegionLabel::Borderland
    );
    assert_eq!(
        RegionLabel::from_decision(-1.0, 1e-6),
        RegionLabel::Borderland
    );
    assert_eq!(
        RegionLabel::from_decision(1.0, 1e-6),
        RegionLabel::Borderland
    );
    assert_eq!(
        RegionLabel::from_decision(1.5, 1e-6),
        RegionLabel::YPointPos
    );
    assert_eq!(
        RegionLabel::from_decision(-1.5, 1e-6),
        RegionLabel::YPointNeg
    );
}
