//! Measures of impossibility.
//!
//! A measure of impossibility `p` maps a sequence of labeled examples to a
//! value in `[0, ∞]` whose expectation under the data-generating distribution
//! is at most 1. A *permutation* measure averages to exactly 1 over all
//! orderings of any tie-free sample and is `∞` on samples with ties. An
//! *exchangeable* measure averages to 1 over all distinct orderings of any
//! multiset.
//!
//! The SV-based measures here read the dual multipliers of one solve on the
//! whole sequence. The multipliers belong to examples rather than positions, so
//! averaging over orderings telescopes to 1.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::example::{has_duplicates, LabeledExample};
use crate::svm::{solve_soft_margin, Kernel, SolverConfig, SvmSolution};

/// Largest sample for which the validity oracles enumerate orderings.
pub const MAX_ENUMERATION: usize = 7;

/// A value in `[0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: Self = ExtendedReal(0.0);
    pub const INFINITY: Self = ExtendedReal(f64::INFINITY);

    /// `None` for negative or NaN input.
    pub fn new(value: f64) -> Option<Self> {
        (value >= 0.0).then_some(ExtendedReal(value))
    }

    pub fn finite(value: f64) -> Self {
        assert!(
            value >= 0.0 && value.is_finite(),
            "expected a finite nonnegative value, got {value}"
        );
        ExtendedReal(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/x` with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(self) -> Self {
        if self.0 == 0.0 {
            Self::INFINITY
        } else {
            ExtendedReal(1.0 / self.0)
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Anything that assigns an impossibility value to a sequence of examples.
pub trait ImpossibilityMeasure {
    fn evaluate(&self, sequence: &[LabeledExample]) -> Result<ExtendedReal>;
}

impl<F> ImpossibilityMeasure for F
where
    F: Fn(&[LabeledExample]) -> Result<ExtendedReal>,
{
    fn evaluate(&self, sequence: &[LabeledExample]) -> Result<ExtendedReal> {
        self(sequence)
    }
}

/// Monotone non-decreasing weight `f` with `f(0) = 0`, applied to multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFn {
    /// 1 for a support vector, 0 otherwise.
    Sign,
    Identity,
    /// `α^q` for `q > 0`.
    Power(f64),
}

impl WeightFn {
    /// Multipliers at or below `threshold` count as zero.
    pub fn apply(&self, alpha: f64, threshold: f64) -> f64 {
        if alpha <= threshold {
            return 0.0;
        }
        match *self {
            WeightFn::Sign => 1.0,
            WeightFn::Identity => alpha,
            WeightFn::Power(q) => alpha.powf(q),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightFn::Power(q) if !(q > 0.0 && q.is_finite()) => Err(Error::InvalidConfig(
                format!("power weight needs an exponent > 0, got {q}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFn::Sign => write!(f, "sign"),
            WeightFn::Identity => write!(f, "identity"),
            WeightFn::Power(q) => write!(f, "power({q})"),
        }
    }
}

/// Which SV-based measure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    /// `m / #SV` if the last example is a support vector, else 0.
    SvCount,
    /// `m f(α_m) / Σ f(α_i)`.
    Weighted(WeightFn),
    /// `(Σ_{last k} f(α_i) / Σ f(α_i)) · m / k`.
    MultiExample { k: usize, weight: WeightFn },
}

impl MeasureKind {
    /// Number of trailing examples the measure treats as new.
    pub fn tail_len(&self) -> usize {
        match *self {
            MeasureKind::MultiExample { k, .. } => k,
            _ => 1,
        }
    }
}

impl FromStr for WeightFn {
    type Err = Error;

    /// `sign`, `identity`, `power(q)` or `power:q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown weight function {s:?}"));
        let w = match s {
            "sign" => WeightFn::Sign,
            "identity" => WeightFn::Identity,
            _ => {
                let q = s
                    .strip_prefix("power(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("power:"))
                    .ok_or_else(bad)?;
                WeightFn::Power(q.parse().map_err(|_| bad())?)
            }
        };
        w.validate()?;
        Ok(w)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::SvCount => write!(f, "sv-count"),
            MeasureKind::Weighted(w) => write!(f, "weighted:{w}"),
            MeasureKind::MultiExample { k, weight } => write!(f, "multi:{k}:{weight}"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    /// `sv-count`, `weighted:<f>` or `multi:<k>:<f>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "sv-count" {
            return Ok(MeasureKind::SvCount);
        }
        if let Some(w) = s.strip_prefix("weighted:") {
            return Ok(MeasureKind::Weighted(w.parse()?));
        }
        if let Some((k, w)) = s.strip_prefix("multi:").and_then(|r| r.split_once(':')) {
            let k: usize = k
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::InvalidConfig(format!("bad tail length in {s:?}")))?;
            return Ok(MeasureKind::MultiExample {
                k,
                weight: w.parse()?,
            });
        }
        Err(Error::InvalidConfig(format!("unknown measure {s:?}")))
    }
}

/// An SV-based measure together with the solver that feeds it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureConfig {
    pub kind: MeasureKind,
    pub kernel: Kernel,
    pub solver: SolverConfig,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            kind: MeasureKind::SvCount,
            kernel: Kernel::Linear,
            solver: SolverConfig::default(),
        }
    }
}

impl MeasureConfig {
    pub fn new(kind: MeasureKind, kernel: Kernel, solver: SolverConfig) -> Self {
        Self {
            kind,
            kernel,
            solver,
        }
    }

    pub fn with_kind(self, kind: MeasureKind) -> Self {
        Self { kind, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.solver.validate()?;
        match self.kind {
            MeasureKind::SvCount => Ok(()),
            MeasureKind::Weighted(w) => w.validate(),
            MeasureKind::MultiExample { k, weight } => {
                if k == 0 {
                    return Err(Error::InvalidConfig("k must be >= 1".into()));
                }
                weight.validate()
            }
        }
    }
}

impl ImpossibilityMeasure for MeasureConfig {
    fn evaluate(&self, sequence: &[LabeledExample]) -> Result<ExtendedReal> {
        self.validate()?;
        let k = self.kind.tail_len();
        if sequence.len() < 2 || k >= sequence.len() {
            return Err(Error::InvalidConfig(format!(
                "sequence of length {} is too short for {}",
                sequence.len(),
                self.kind
            )));
        }
        if has_duplicates(sequence) {
            return Ok(ExtendedReal::INFINITY);
        }
        let solution = solve_soft_margin(sequence, self.kernel, &self.solver)?;
        measure_from_solution(self.kind, &solution)
    }
}

/// Evaluates `kind` on a solution already computed for the whole sequence.
///
/// Membership follows the multiplier criterion: example `i` counts as a
/// support vector when `α_i > sv_tolerance`. Ties are not checked here.
pub fn measure_from_solution(kind: MeasureKind, solution: &SvmSolution) -> Result<ExtendedReal> {
    let (num, den) = measure_ratio(kind, solution)?;
    Ok(ExtendedReal::finite(num / den))
}

/// `1 / p` from the same solution, formed as `(den·k)/(num·m)` so that the
/// count measure gives exactly `#SV/m`.
pub fn reciprocal_from_solution(kind: MeasureKind, solution: &SvmSolution) -> Result<ExtendedReal> {
    let (num, den) = measure_ratio(kind, solution)?;
    Ok(if num == 0.0 {
        ExtendedReal::INFINITY
    } else {
        ExtendedReal::finite(den / num)
    })
}

/// The measure as a fraction `(num·m, den·k)` with a positive denominator.
fn measure_ratio(kind: MeasureKind, solution: &SvmSolution) -> Result<(f64, f64)> {
    let m = solution.len();
    let threshold = solution.config.sv_tolerance;
    let (weight, k) = match kind {
        MeasureKind::SvCount => (WeightFn::Sign, 1),
        MeasureKind::Weighted(w) => (w, 1),
        MeasureKind::MultiExample { k, weight } => (weight, k),
    };
    if k == 0 || k >= m {
        return Err(Error::InvalidConfig(format!(
            "tail of {k} examples does not fit a sequence of {m}"
        )));
    }
    let weights: Vec<f64> = solution
        .alphas
        .iter()
        .map(|&a| weight.apply(a, threshold))
        .collect();
    let den: f64 = weights.iter().sum();
    let num: f64 = weights[m - k..].iter().sum();
    if den == 0.0 {
        if num == 0.0 && !matches!(kind, MeasureKind::SvCount) {
            return Ok((0.0, 1.0));
        }
        return Err(Error::Internal(format!(
            "{kind}: all weights vanish on a two-class sample"
        )));
    }
    // Written as (num·m)/(den·k) so the sign weight reproduces m/#SV bit for bit.
    Ok((num * m as f64, den * k as f64))
}

fn evaluate_kind(
    kind: MeasureKind,
    sequence: &[LabeledExample],
    config: &MeasureConfig,
) -> Result<ExtendedReal> {
    config.with_kind(kind).evaluate(sequence)
}

/// `m / #SV` when the last example is a support vector, 0 otherwise, `∞` on ties.
pub fn sv_count_measure(
    sequence: &[LabeledExample],
    config: &MeasureConfig,
) -> Result<ExtendedReal> {
    evaluate_kind(MeasureKind::SvCount, sequence, config)
}

/// `m f(α_m) / Σ f(α_i)`, `∞` on ties.
pub fn weighted_alpha_measure(
    sequence: &[LabeledExample],
    weight: WeightFn,
    config: &MeasureConfig,
) -> Result<ExtendedReal> {
    evaluate_kind(MeasureKind::Weighted(weight), sequence, config)
}

/// Share of the total weight carried by the last `k` examples, scaled by `m/k`.
pub fn multi_example_measure(
    sequence: &[LabeledExample],
    k: usize,
    weight: WeightFn,
    config: &MeasureConfig,
) -> Result<ExtendedReal> {
    evaluate_kind(MeasureKind::MultiExample { k, weight }, sequence, config)
}

/// A critical region of probability `delta`: `1/delta` inside, 0 outside.
pub struct CriticalRegion<F> {
    region: F,
    delta: f64,
}

impl<F> CriticalRegion<F>
where
    F: Fn(&[LabeledExample]) -> bool,
{
    pub fn new(region: F, delta: f64) -> Result<Self> {
        if delta > 0.0 && delta < 1.0 {
            Ok(Self { region, delta })
        } else {
            Err(Error::InvalidDelta(delta))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl<F> ImpossibilityMeasure for CriticalRegion<F>
where
    F: Fn(&[LabeledExample]) -> bool,
{
    fn evaluate(&self, sequence: &[LabeledExample]) -> Result<ExtendedReal> {
        Ok(if (self.region)(sequence) {
            ExtendedReal::finite(1.0 / self.delta)
        } else {
            ExtendedReal::ZERO
        })
    }
}

/// Shorthand for [`CriticalRegion::new`].
pub fn critical_region_measure<F>(region: F, delta: f64) -> Result<CriticalRegion<F>>
where
    F: Fn(&[LabeledExample]) -> bool,
{
    CriticalRegion::new(region, delta)
}

/// A multiset of examples: distinct elements with positive arities.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperset {
    elements: Vec<LabeledExample>,
    arities: Vec<usize>,
}

impl Hyperset {
    pub fn new(elements: Vec<LabeledExample>, arities: Vec<usize>) -> Result<Self> {
        if elements.len() != arities.len() {
            return Err(Error::InvalidConfig(
                "hyperset needs one arity per element".into(),
            ));
        }
        if arities.contains(&0) {
            return Err(Error::InvalidConfig("arities must be positive".into()));
        }
        if has_duplicates(&elements) {
            return Err(Error::DuplicateExamples);
        }
        Ok(Self { elements, arities })
    }

    /// The signature of a sequence: its distinct elements in order of first
    /// occurrence, each with its number of occurrences.
    pub fn signature(sequence: &[LabeledExample]) -> Self {
        let mut elements: Vec<LabeledExample> = Vec::new();
        let mut arities = Vec::new();
        for ex in sequence {
            match elements.iter().position(|e| e == ex) {
                Some(i) => arities[i] += 1,
                None => {
                    elements.push(ex.clone());
                    arities.push(1);
                }
            }
        }
        Self { elements, arities }
    }

    pub fn elements(&self) -> &[LabeledExample] {
        &self.elements
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    /// Sum of the arities.
    pub fn cardinality(&self) -> usize {
        self.arities.iter().sum()
    }

    /// `(Σ b_j)! / Π b_j!`
    pub fn distinct_orderings_count(&self) -> u128 {
        let mut count = factorial(self.cardinality());
        for &a in &self.arities {
            count /= factorial(a);
        }
        count
    }

    /// Every distinct sequence with this signature, in a fixed order.
    pub fn orderings(&self) -> Vec<Vec<LabeledExample>> {
        let ids: Vec<usize> = self
            .arities
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| std::iter::repeat_n(i, a))
            .collect();
        let n = ids.len();
        ids.into_iter()
            .permutations(n)
            .unique()
            .map(|p| p.into_iter().map(|i| self.elements[i].clone()).collect())
            .collect()
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn average_over<M>(measure: &M, sequences: &[Vec<LabeledExample>]) -> Result<f64>
where
    M: ImpossibilityMeasure + Sync + ?Sized,
{
    let values = sequences
        .par_iter()
        .map(|s| measure.evaluate(s).map(ExtendedReal::value))
        .collect::<Result<Vec<f64>>>()?;
    // Summed sequentially in enumeration order for reproducibility.
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Average of `measure` over all `m!` orderings of a tie-free `sample`.
///
/// Returns 1 (up to rounding) for a valid permutation measure.
pub fn permutation_validity_oracle<M>(measure: &M, sample: &[LabeledExample]) -> Result<f64>
where
    M: ImpossibilityMeasure + Sync + ?Sized,
{
    let m = sample.len();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    if m > MAX_ENUMERATION {
        return Err(Error::TooLarge {
            size: m,
            max: MAX_ENUMERATION,
        });
    }
    if has_duplicates(sample) {
        return Err(Error::DuplicateExamples);
    }
    let orderings: Vec<Vec<LabeledExample>> = sample.iter().cloned().permutations(m).collect();
    average_over(measure, &orderings)
}

/// Average of `measure` over all distinct sequences of signature `hyperset`.
///
/// Returns 1 (up to rounding) for a valid exchangeable measure.
pub fn exchangeable_validity_oracle<M>(measure: &M, hyperset: &Hyperset) -> Result<f64>
where
    M: ImpossibilityMeasure + Sync + ?Sized,
{
    let m = hyperset.cardinality();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    if m > MAX_ENUMERATION {
        return Err(Error::TooLarge {
            size: m,
            max: MAX_ENUMERATION,
        });
    }
    average_over(measure, &hyperset.orderings())
}
