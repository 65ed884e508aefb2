//! Independent reference computations shared by the integration tests.
//!
//! The oracle works on the primal problem directly and never touches the dual:
//! minimize `½|w|² + C Σ max(0, 1 − y_i(w·x_i + b))²` over `(w, b)`.
//! For a fixed active set `S` the objective is a strictly convex quadratic whose
//! minimizer solves a small linear system. The true optimum is the minimizer for
//! its own active set, so the smallest objective over all candidates is optimal.

#![allow(dead_code, clippy::needless_range_loop)]

use tcm_core::data::SyntheticRng;
use tcm_core::{Label, LabeledExample};

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub w: Vec<f64>,
    pub b: f64,
    pub objective: f64,
    pub c: f64,
}

impl OracleSolution {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b
    }

    pub fn slack(&self, e: &LabeledExample) -> f64 {
        (1.0 - e.label.sign() * self.decision(&e.features)).max(0.0)
    }

    /// Lagrange multipliers recovered from stationarity in `ξ`: `α_i = 2Cξ_i`.
    pub fn alphas(&self, examples: &[LabeledExample]) -> Vec<f64> {
        examples
            .iter()
            .map(|e| 2.0 * self.c * self.slack(e))
            .collect()
    }

    /// Indices with `y_i f(x_i) ≤ 1`, i.e. equality in the margin constraint.
    pub fn support_vectors(&self, examples: &[LabeledExample]) -> Vec<usize> {
        (0..examples.len())
            .filter(|&i| examples[i].label.sign() * self.decision(&examples[i].features) <= 1.0)
            .collect()
    }

    /// Distance of the closest example from the margin boundary.
    pub fn margin_gap(&self, examples: &[LabeledExample]) -> f64 {
        examples
            .iter()
            .map(|e| (e.label.sign() * self.decision(&e.features) - 1.0).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn primal_objective(examples: &[LabeledExample], c: f64, w: &[f64], b: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = examples
        .iter()
        .map(|e| {
            let f = w.iter().zip(&e.features).map(|(a, x)| a * x).sum::<f64>() + b;
            (1.0 - e.label.sign() * f).max(0.0).powi(2)
        })
        .sum();
    reg + c * loss
}

/// Exhaustive active-set minimizer for the linear-kernel problem.
pub fn primal_oracle(examples: &[LabeledExample], c: f64) -> OracleSolution {
    let m = examples.len();
    assert!(m <= 16, "oracle enumerates 2^m active sets");
    let n = examples[0].dim();
    let mut best: Option<OracleSolution> = None;
    for mask in 1u32..(1 << m) {
        let active: Vec<&LabeledExample> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &examples[i])
            .collect();
        let Some((w, b)) = solve_active(&active, c, n) else {
            continue;
        };
        let objective = primal_objective(examples, c, &w, b);
        if best.as_ref().is_none_or(|s| objective < s.objective) {
            best = Some(OracleSolution { w, b, objective, c });
        }
    }
    best.expect("at least one active set is solvable")
}

/// Stationarity of `½|w|² + C Σ_S (y_i − (w·x_i + b))²`:
/// `w + 2C Σ_S x_i(x_i·w + b) = 2C Σ_S y_i x_i` and `Σ_S (x_i·w + b) = Σ_S y_i`.
fn solve_active(active: &[&LabeledExample], c: f64, n: usize) -> Option<(Vec<f64>, f64)> {
    let d = n + 1;
    let mut a = vec![vec![0.0; d + 1]; d];
    for r in 0..n {
        a[r][r] = 1.0;
    }
    for e in active {
        let x = &e.features;
        let y = e.label.sign();
        for r in 0..n {
            for s in 0..n {
                a[r][s] += 2.0 * c * x[r] * x[s];
            }
            a[r][n] += 2.0 * c * x[r];
            a[r][d] += 2.0 * c * y * x[r];
            a[n][r] += x[r];
        }
        a[n][n] += 1.0;
        a[n][d] += y;
    }
    let sol = gauss(a)?;
    Some((sol[..n].to_vec(), sol[n]))
}

fn gauss(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let d = a.len();
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in 0..d {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for k in col..=d {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    Some((0..d).map(|i| a[i][d] / a[i][i]).collect())
}

pub fn ex(features: &[f64], label: i64) -> LabeledExample {
    LabeledExample::new(features.to_vec(), Label::from_i64(label).unwrap())
}

/// Random two-class instance with coordinates rounded to a 1/64 grid,
/// spread by `scale`.
pub fn random_instance(
    rng: &mut SyntheticRng,
    m: usize,
    n: usize,
    scale: f64,
) -> Vec<LabeledExample> {
    loop {
        let sample: Vec<LabeledExample> = (0..m)
            .map(|_| {
                let label = if rng.next_uniform() < 0.5 {
                    Label::Negative
                } else {
                    Label::Positive
                };
                let features = (0..n)
                    .map(|j| {
                        let shift = if j == 0 { label.sign() } else { 0.0 };
                        ((shift + scale * rng.next_normal()) * 64.0).round() / 64.0
                    })
                    .collect();
                LabeledExample::new(features, label)
            })
            .collect();
        let both = sample.iter().any(|e| e.label == Label::Negative)
            && sample.iter().any(|e| e.label == Label::Positive);
        if both && !tcm_core::example::has_duplicates(&sample) {
            return sample;
        }
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
