//! Soft-margin SVM with squared slacks.
//!
//! Primal problem:
//!
//! ```text
//! minimize    ½ w·w + C Σ ξ_i²
//! subject to  y_i (w·φ(x_i) + b) ≥ 1 − ξ_i,   ξ_i ≥ 0
//! ```
//!
//! With the squared penalty the constraint `ξ_i ≥ 0` is never binding, and the
//! dual is the hard-margin dual over the shifted kernel `K̃ = K + I/(2C)`:
//!
//! ```text
//! minimize    ½ αᵀ Q α − Σ α_i,   Q_ij = y_i y_j K̃(x_i, x_j)
//! subject to  Σ α_i y_i = 0,   α_i ≥ 0
//! ```
//!
//! `Q` is strictly positive definite, so the optimum is unique. It is found by
//! pairwise coordinate descent (SMO) with second-order working-set selection.
//! At the optimum `ξ_i = α_i / (2C)`. The returned slacks are those of the
//! returned hyperplane, `max(0, 1 − y_i f(x_i))`.

use crate::error::{Error, Result};
use crate::example::{common_dim, has_both_classes, LabeledExample};
use crate::svm::kernel::{Gram, Kernel};

/// Solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Slack penalty `C`.
    pub c: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub kkt_tolerance: f64,
    /// Tolerance for support-vector membership (margin residual and multiplier).
    pub sv_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            kkt_tolerance: 1e-8,
            sv_tolerance: 1e-6,
            max_iterations: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_c(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.c) {
            return Err(Error::InvalidConfig(format!(
                "C must be > 0, got {}",
                self.c
            )));
        }
        if !positive(self.kkt_tolerance) || !positive(self.sv_tolerance) {
            return Err(Error::InvalidConfig("tolerances must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which test decides support-vector membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvCriterion {
    /// The margin constraint holds with equality (within `sv_tolerance`).
    Residual,
    /// The dual multiplier exceeds `sv_tolerance`.
    Multiplier,
}

/// Optimum of the squared-slack soft-margin problem.
#[derive(Debug, Clone)]
pub struct SvmSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub slacks: Vec<f64>,
    /// Primal objective `½ w·w + C Σ ξ²`.
    pub objective: f64,
    pub examples: Vec<LabeledExample>,
    pub kernel: Kernel,
    pub config: SolverConfig,
    /// SMO iterations used.
    pub iterations: usize,
    /// Maximal KKT violation at termination.
    pub kkt_violation: f64,
    /// `y_i f(x_i)` for each training example.
    margins: Vec<f64>,
}

impl SvmSolution {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.examples[0].dim()
    }

    /// `y_i f(x_i)` for training example `i`.
    pub fn margin(&self, i: usize) -> f64 {
        self.margins[i]
    }

    /// Whether constraint `i` is tight: `y_i f(x_i) = 1 − ξ_i`.
    pub fn is_tight(&self, i: usize) -> bool {
        let residual = self.margins[i] - (1.0 - self.slacks[i]);
        residual.abs() <= self.config.sv_tolerance * (1.0 + self.margins[i].abs())
    }

    pub fn is_support_vector(&self, i: usize, criterion: SvCriterion) -> bool {
        match criterion {
            SvCriterion::Residual => self.is_tight(i),
            SvCriterion::Multiplier => self.alphas[i] > self.config.sv_tolerance,
        }
    }

    /// Indices of support vectors under `criterion`, ascending.
    pub fn support_vectors(&self, criterion: SvCriterion) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.is_support_vector(i, criterion))
            .collect()
    }

    /// Indices whose margin constraint holds as equality.
    pub fn support_vector_set(&self) -> Vec<usize> {
        self.support_vectors(SvCriterion::Residual)
    }

    /// `Σ α_i y_i K(x_i, x) + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let sum: f64 = self
            .examples
            .iter()
            .zip(&self.alphas)
            .filter(|(_, &a)| a != 0.0)
            .map(|(ex, &a)| a * ex.label.sign() * self.kernel.eval(&ex.features, x))
            .sum();
        Ok(sum + self.bias)
    }

    /// Explicit weight vector, available for the linear kernel only.
    pub fn weight_vector(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.dim()];
        for (ex, &a) in self.examples.iter().zip(&self.alphas) {
            let coef = a * ex.label.sign();
            for (wk, xk) in w.iter_mut().zip(&ex.features) {
                *wk += coef * xk;
            }
        }
        Some(w)
    }

    /// `Σ α_i y_i`, zero at a feasible dual point.
    pub fn label_balance(&self) -> f64 {
        self.examples
            .iter()
            .zip(&self.alphas)
            .map(|(ex, a)| a * ex.label.sign())
            .sum()
    }
}

/// Solves the squared-slack soft-margin problem on `examples`.
pub fn solve_soft_margin(
    examples: &[LabeledExample],
    kernel: Kernel,
    config: &SolverConfig,
) -> Result<SvmSolution> {
    config.validate()?;
    kernel.validate()?;
    common_dim(examples)?;
    if !has_both_classes(examples) {
        return Err(Error::SingleClassInput);
    }

    let m = examples.len();
    let y: Vec<f64> = examples.iter().map(|e| e.label.sign()).collect();
    let kernel_only = Gram::new(&kernel, examples.iter().map(|e| e.features.as_slice()));
    let shift = 1.0 / (2.0 * config.c);
    let mut gram = kernel_only.clone();
    gram.add_diagonal(shift);

    let mut smo = Smo::new(&gram, &y);
    let mut iterations = 0;
    let violation = loop {
        iterations += smo.run(config.kkt_tolerance, config.max_iterations - iterations);
        // Incremental gradient updates drift; confirm on a fresh gradient.
        smo.refresh_gradient();
        let (_, _, violation) = smo.extremes();
        if violation <= config.kkt_tolerance {
            break violation;
        }
        if iterations >= config.max_iterations {
            return Err(Error::ConvergenceFailure {
                iterations,
                violation,
            });
        }
    };

    let (up, low, _) = smo.extremes();
    let alphas = smo.alpha;
    let grad = smo.grad;

    // b = y_i(1 − ξ_i) − Σ_j α_j y_j K_ij = −y_i G_i for every i with α_i > 0.
    let (sum, count) = (0..m)
        .filter(|&i| alphas[i] > config.sv_tolerance)
        .fold((0.0, 0usize), |(s, c), i| (s - y[i] * grad[i], c + 1));
    let bias = if count > 0 {
        sum / count as f64
    } else {
        0.5 * (up + low)
    };

    let kernel_part: Vec<f64> = (0..m)
        .map(|i| {
            kernel_only
                .row(i)
                .iter()
                .zip(&alphas)
                .zip(&y)
                .map(|((k, a), yj)| k * a * yj)
                .sum()
        })
        .collect();
    let w_norm2: f64 = (0..m).map(|i| alphas[i] * y[i] * kernel_part[i]).sum();
    let margins: Vec<f64> = (0..m).map(|i| y[i] * (kernel_part[i] + bias)).collect();
    // Slacks of the returned hyperplane; they agree with α_i/(2C) up to the KKT
    // tolerance, and the objective evaluated here is accurate to second order.
    let slacks: Vec<f64> = margins.iter().map(|mg| (1.0 - mg).max(0.0)).collect();
    let objective = 0.5 * w_norm2 + config.c * slacks.iter().map(|s| s * s).sum::<f64>();

    Ok(SvmSolution {
        alphas,
        bias,
        slacks,
        objective,
        examples: examples.to_vec(),
        kernel,
        config: *config,
        iterations,
        kkt_violation: violation,
        margins,
    })
}

/// Indices of support vectors (equality in the margin constraint).
pub fn support_vector_set(solution: &SvmSolution) -> Vec<usize> {
    solution.support_vector_set()
}

pub fn decision_value(solution: &SvmSolution, x: &[f64]) -> Result<f64> {
    solution.decision_value(x)
}

/// Whether removing example `j` (its slack term and its constraints) leaves the
/// optimal value unchanged.
pub fn is_essential_support_vector(
    examples: &[LabeledExample],
    kernel: Kernel,
    config: &SolverConfig,
    j: usize,
) -> Result<bool> {
    if j >= examples.len() {
        return Err(Error::InvalidConfig(format!(
            "index {j} out of range for {} examples",
            examples.len()
        )));
    }
    let reduced: Vec<LabeledExample> = examples
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, e)| e.clone())
        .collect();
    if !has_both_classes(&reduced) {
        return Err(Error::SingleClassInput);
    }
    let full = solve_soft_margin(examples, kernel, config)?;
    let without = solve_soft_margin(&reduced, kernel, config)?;
    let gap = (full.objective - without.objective).abs();
    Ok(gap <= config.kkt_tolerance * (1.0 + full.objective.abs()))
}

/// SMO state over a precomputed shifted Gram matrix.
struct Smo<'a> {
    gram: &'a Gram,
    y: &'a [f64],
    alpha: Vec<f64>,
    /// `G = Qα − 1`.
    grad: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(gram: &'a Gram, y: &'a [f64]) -> Self {
        let m = y.len();
        Self {
            gram,
            y,
            alpha: vec![0.0; m],
            grad: vec![-1.0; m],
        }
    }

    // With no upper bound on α:
    //   I_up  = {y = +1} ∪ {y = −1, α > 0}   (α may move so that −yG grows)
    //   I_low = {y = −1} ∪ {y = +1, α > 0}
    #[inline]
    fn in_up(&self, i: usize) -> bool {
        self.y[i] > 0.0 || self.alpha[i] > 0.0
    }

    #[inline]
    fn in_low(&self, i: usize) -> bool {
        self.y[i] < 0.0 || self.alpha[i] > 0.0
    }

    /// `(max_{I_up} −yG, min_{I_low} −yG, violation)`.
    fn extremes(&self) -> (f64, f64, f64) {
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for i in 0..self.y.len() {
            let v = -self.y[i] * self.grad[i];
            if self.in_up(i) && v > up {
                up = v;
            }
            if self.in_low(i) && v < low {
                low = v;
            }
        }
        (up, low, (up - low).max(0.0))
    }

    fn refresh_gradient(&mut self) {
        let m = self.y.len();
        for i in 0..m {
            let row = self.gram.row(i);
            let s: f64 = (0..m).map(|j| row[j] * self.alpha[j] * self.y[j]).sum();
            self.grad[i] = self.y[i] * s - 1.0;
        }
    }

    /// Runs until the violation is below `tol` or `budget` iterations pass.
    /// Returns the number of iterations used.
    #[allow(clippy::needless_range_loop)]
    fn run(&mut self, tol: f64, budget: usize) -> usize {
        let m = self.y.len();
        let mut iter = 0;
        while iter < budget {
            // First index: maximal violator in I_up.
            let mut i = usize::MAX;
            let mut up = f64::NEG_INFINITY;
            for t in 0..m {
                let v = -self.y[t] * self.grad[t];
                if self.in_up(t) && v > up {
                    up = v;
                    i = t;
                }
            }
            // Second index: largest guaranteed decrease among violating partners.
            let mut j = usize::MAX;
            let mut low = f64::INFINITY;
            let mut best_gain = 0.0;
            let kii = self.gram.get(i, i);
            let row_i = self.gram.row(i);
            for t in 0..m {
                if !self.in_low(t) {
                    continue;
                }
                let v = -self.y[t] * self.grad[t];
                if v < low {
                    low = v;
                }
                let diff = up - v;
                if diff > 0.0 {
                    let curvature = kii + self.gram.get(t, t) - 2.0 * row_i[t];
                    let gain = diff * diff / curvature;
                    if gain > best_gain {
                        best_gain = gain;
                        j = t;
                    }
                }
            }
            if up - low <= tol || j == usize::MAX {
                break;
            }

            let curvature = kii + self.gram.get(j, j) - 2.0 * row_i[j];
            let mut step = (up - (-self.y[j] * self.grad[j])) / curvature;
            // α_i += y_i·step and α_j −= y_j·step must stay nonnegative.
            if self.y[i] < 0.0 {
                step = step.min(self.alpha[i]);
            }
            if self.y[j] > 0.0 {
                step = step.min(self.alpha[j]);
            }
            let zero_i = self.y[i] < 0.0 && step == self.alpha[i];
            let zero_j = self.y[j] > 0.0 && step == self.alpha[j];
            self.alpha[i] = if zero_i {
                0.0
            } else {
                self.alpha[i] + self.y[i] * step
            };
            self.alpha[j] = if zero_j {
                0.0
            } else {
                self.alpha[j] - self.y[j] * step
            };

            let row_j = self.gram.row(j);
            for t in 0..m {
                self.grad[t] += self.y[t] * step * (row_i[t] - row_j[t]);
            }
            iter += 1;
        }
        iter
    }
}
