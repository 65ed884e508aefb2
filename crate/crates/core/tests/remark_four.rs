//! The 100-point planar configuration in which every example is a support
//! vector yet none is essential.

use tcm_core::impossibility::measure_from_solution;
use tcm_core::svm::{is_essential_support_vector, solve_soft_margin, Kernel, SolverConfig};
use tcm_core::MeasureKind;
use tcm_core::{Label, LabeledExample};

fn configuration() -> Vec<LabeledExample> {
    let mut v = Vec::with_capacity(100);
    for i in 1..=50 {
        v.push(LabeledExample::new(vec![i as f64, -1.0], Label::Negative));
    }
    for i in 51..=100 {
        v.push(LabeledExample::new(
            vec![(i - 50) as f64, 1.0],
            Label::Positive,
        ));
    }
    v
}

#[test]
fn all_hundred_points_are_support_vectors() {
    let data = configuration();
    let c = 1.0;
    let sol = solve_soft_margin(&data, Kernel::Linear, &SolverConfig::with_c(c)).unwrap();
    assert_eq!(sol.support_vector_set().len(), 100);

    // Symmetry reduces the problem to ½w₂² + 100C(1 − w₂)².
    let w2 = 200.0 * c / (1.0 + 200.0 * c);
    let w = sol.weight_vector().unwrap();
    assert!(w[0].abs() < 1e-7, "w1 = {}", w[0]);
    assert!((w[1] - w2).abs() < 1e-7, "w2 = {} vs {w2}", w[1]);
    for xi in &sol.slacks {
        assert!((xi - 1.0 / (1.0 + 200.0 * c)).abs() < 1e-7);
    }
    assert!(sol.decision_value(&[25.0, 0.0]).unwrap().abs() < 1e-6);

    // Every point is a support vector, so the count measure is 100/100.
    let p = measure_from_solution(MeasureKind::SvCount, &sol).unwrap();
    assert_eq!(p.value(), 1.0);
}

#[test]
fn no_point_is_essential() {
    let data = configuration();
    let cfg = SolverConfig::default();
    for j in 0..data.len() {
        assert!(!is_essential_support_vector(&data, Kernel::Linear, &cfg, j).unwrap());
    }
}
