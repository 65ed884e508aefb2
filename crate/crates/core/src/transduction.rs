//! Transductive prediction with incertitude, confidence and possibility.
//!
//! Given a training set and a new object `x`, two "pictures" are formed: the
//! training set extended by `(x, −1)` and by `(x, +1)`. With `p` a permutation
//! measure of impossibility, `μ_y = 1/p(picture_y)`. The prediction is the
//! label with the larger `μ`, its incertitude is `min(μ_−1, μ_+1)` and the
//! possibility of the data is `max(μ_−1, μ_+1)` truncated at 1.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::example::{common_dim, has_both_classes, has_duplicates, Label, LabeledExample};
use crate::impossibility::{
    measure_from_solution, reciprocal_from_solution, ExtendedReal, MeasureConfig, MeasureKind,
    WeightFn,
};
use crate::svm::{solve_soft_margin, SvCriterion, SvmSolution};

/// Largest number of new points accepted by [`transduce_joint`].
pub const MAX_JOINT_POINTS: usize = 8;

/// A prediction, or `Undecided` when both pictures are equally plausible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    Label(Label),
    Undecided,
}

impl Prediction {
    pub fn label(self) -> Option<Label> {
        match self {
            Prediction::Label(l) => Some(l),
            Prediction::Undecided => None,
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Label(l) => write!(f, "{l}"),
            Prediction::Undecided => write!(f, "undecided"),
        }
    }
}

/// What one picture looked like after solving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PictureDiagnostics {
    pub label_tried: Label,
    /// Support vectors among the `l + 1` examples of the picture.
    pub sv_count: usize,
    pub new_point_is_sv: bool,
    /// `sv_count / (l + 1)`.
    pub sv_fraction: f64,
    /// Value of the measure on this picture.
    pub impossibility: ExtendedReal,
    /// `1/impossibility`, formed from the same fraction so that it is exact
    /// for the count measure.
    pub reciprocal: ExtendedReal,
}

impl PictureDiagnostics {
    /// `μ_y = 1/p(picture_y)`.
    pub fn mu(&self) -> ExtendedReal {
        self.reciprocal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransductiveResult {
    pub prediction: Prediction,
    /// `min(μ_−1, μ_+1)`.
    pub incertitude: f64,
    /// `1 − incertitude`.
    pub confidence: f64,
    /// `min(1, max(μ_−1, μ_+1))`.
    pub possibility: f64,
    pub mu_neg: ExtendedReal,
    pub mu_pos: ExtendedReal,
    /// Negative picture first.
    pub pictures: [PictureDiagnostics; 2],
}

impl TransductiveResult {
    /// Applies the decision rule to the two pictures.
    pub fn from_pictures(neg: PictureDiagnostics, pos: PictureDiagnostics) -> Result<Self> {
        debug_assert_eq!(neg.label_tried, Label::Negative);
        debug_assert_eq!(pos.label_tried, Label::Positive);
        let mu_neg = neg.mu();
        let mu_pos = pos.mu();
        if mu_neg.is_infinite() && mu_pos.is_infinite() {
            return Err(Error::LemmaTwoViolation);
        }
        let prediction = if mu_neg < mu_pos {
            Prediction::Label(Label::Positive)
        } else if mu_neg > mu_pos {
            Prediction::Label(Label::Negative)
        } else {
            Prediction::Undecided
        };
        let incertitude = mu_neg.min(mu_pos).value();
        Ok(Self {
            prediction,
            incertitude,
            confidence: 1.0 - incertitude,
            possibility: mu_neg.max(mu_pos).value().min(1.0),
            mu_neg,
            mu_pos,
            pictures: [neg, pos],
        })
    }

    pub fn picture(&self, label: Label) -> &PictureDiagnostics {
        match label {
            Label::Negative => &self.pictures[0],
            Label::Positive => &self.pictures[1],
        }
    }
}

fn check_inputs(training: &[LabeledExample], x_new: &[f64], config: &MeasureConfig) -> Result<()> {
    config.validate()?;
    let dim = common_dim(training)?;
    if !has_both_classes(training) {
        return Err(Error::SingleClassInput);
    }
    if x_new.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x_new.len(),
        });
    }
    Ok(())
}

fn single_point_kind(kind: MeasureKind) -> Result<MeasureKind> {
    match kind {
        MeasureKind::MultiExample { k: 1, weight } => Ok(MeasureKind::Weighted(weight)),
        MeasureKind::MultiExample { k, .. } => Err(Error::InvalidConfig(format!(
            "single-point transduction needs a one-example measure, got k = {k}"
        ))),
        other => Ok(other),
    }
}

/// Solves the picture `training + (x_new, label)` and evaluates the measure.
pub fn solve_picture(
    training: &[LabeledExample],
    x_new: &[f64],
    label: Label,
    config: &MeasureConfig,
) -> Result<(PictureDiagnostics, SvmSolution)> {
    let kind = single_point_kind(config.kind)?;
    let mut picture = Vec::with_capacity(training.len() + 1);
    picture.extend_from_slice(training);
    picture.push(LabeledExample::new(x_new.to_vec(), label));

    let solution = solve_soft_margin(&picture, config.kernel, &config.solver)?;
    let (impossibility, reciprocal) = if has_duplicates(&picture) {
        (ExtendedReal::INFINITY, ExtendedReal::ZERO)
    } else {
        (
            measure_from_solution(kind, &solution)?,
            reciprocal_from_solution(kind, &solution)?,
        )
    };
    let sv = solution.support_vectors(SvCriterion::Multiplier);
    let last = picture.len() - 1;
    let diagnostics = PictureDiagnostics {
        label_tried: label,
        sv_count: sv.len(),
        new_point_is_sv: sv.last() == Some(&last),
        sv_fraction: sv.len() as f64 / picture.len() as f64,
        impossibility,
        reciprocal,
    };
    Ok((diagnostics, solution))
}

/// Predicts the label of `x_new` from both pictures.
pub fn transduce(
    training: &[LabeledExample],
    x_new: &[f64],
    config: &MeasureConfig,
) -> Result<TransductiveResult> {
    check_inputs(training, x_new, config)?;
    let (neg, pos) = rayon::join(
        || solve_picture(training, x_new, Label::Negative, config),
        || solve_picture(training, x_new, Label::Positive, config),
    );
    TransductiveResult::from_pictures(neg?.0, pos?.0)
}

/// Incertitude of an externally made prediction `predicted`: `μ` of the
/// opposite picture.
pub fn confidence_for(
    training: &[LabeledExample],
    x_new: &[f64],
    predicted: Label,
    config: &MeasureConfig,
) -> Result<ExtendedReal> {
    check_inputs(training, x_new, config)?;
    let (picture, _) = solve_picture(training, x_new, predicted.opposite(), config)?;
    Ok(picture.mu())
}

/// `min(1, max(μ_−1, μ_+1))`, a property of the data alone.
pub fn possibility_of(
    training: &[LabeledExample],
    x_new: &[f64],
    config: &MeasureConfig,
) -> Result<f64> {
    transduce(training, x_new, config).map(|r| r.possibility)
}

/// Prediction of the inductive SVM trained on `training`, with the incertitude
/// assigned by [`confidence_for`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductivePrediction {
    pub label: Label,
    pub decision_value: f64,
    pub incertitude: ExtendedReal,
    pub possibility: f64,
    pub pictures: [PictureDiagnostics; 2],
}

/// Predicts with the sign of the training-set decision function and attaches
/// transductive incertitude and possibility.
pub fn svm_predict_with_confidence(
    training_solution: &SvmSolution,
    x_new: &[f64],
    config: &MeasureConfig,
) -> Result<InductivePrediction> {
    let decision_value = training_solution.decision_value(x_new)?;
    let label = Label::from_decision(decision_value);
    let result = transduce(&training_solution.examples, x_new, config)?;
    let incertitude = result.picture(label.opposite()).mu();
    Ok(InductivePrediction {
        label,
        decision_value,
        incertitude,
        possibility: result.possibility,
        pictures: result.pictures,
    })
}

/// Result of predicting `k` new labels at once.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPrediction {
    pub assignment: Vec<Label>,
    /// `1 / min p` over the competing completions.
    pub incertitude: ExtendedReal,
    /// Another assignment reaches the same incertitude.
    pub tied: bool,
    /// Measure of every completion, indexed in binary order with the first new
    /// point as the most significant bit (0 = −1, 1 = +1).
    pub impossibilities: Vec<ExtendedReal>,
}

fn completion(index: usize, k: usize) -> Vec<Label> {
    (0..k)
        .map(|i| {
            if index >> (k - 1 - i) & 1 == 1 {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect()
}

/// Predicts the labels of all `new_points` jointly with the multi-example
/// measure, choosing the assignment whose strongest competitor is least
/// plausible.
pub fn transduce_joint(
    training: &[LabeledExample],
    new_points: &[Vec<f64>],
    config: &MeasureConfig,
) -> Result<JointPrediction> {
    let k = new_points.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    if k > MAX_JOINT_POINTS {
        return Err(Error::TooManyNewPoints {
            k,
            max: MAX_JOINT_POINTS,
        });
    }
    for x in new_points {
        check_inputs(training, x, config)?;
    }
    let weight = match config.kind {
        MeasureKind::SvCount => WeightFn::Sign,
        MeasureKind::Weighted(w) => w,
        MeasureKind::MultiExample { weight, .. } => weight,
    };
    let kind = MeasureKind::MultiExample { k, weight };

    let measures = (0..1usize << k)
        .into_par_iter()
        .map(|c| {
            let mut seq = Vec::with_capacity(training.len() + k);
            seq.extend_from_slice(training);
            seq.extend(
                new_points
                    .iter()
                    .zip(completion(c, k))
                    .map(|(x, y)| LabeledExample::new(x.clone(), y)),
            );
            if has_duplicates(&seq) {
                return Ok((ExtendedReal::INFINITY, ExtendedReal::ZERO));
            }
            let solution = solve_soft_margin(&seq, config.kernel, &config.solver)?;
            Ok((
                measure_from_solution(kind, &solution)?,
                reciprocal_from_solution(kind, &solution)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (impossibilities, reciprocals): (Vec<ExtendedReal>, Vec<ExtendedReal>) =
        measures.into_iter().unzip();

    let n = impossibilities.len();
    // Index of the least impossible competitor of each assignment.
    let strongest: Vec<usize> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&c| c != a)
                .min_by(|&c, &d| {
                    impossibilities[c]
                        .value()
                        .total_cmp(&impossibilities[d].value())
                })
                .unwrap_or(a)
        })
        .collect();
    let strongest_competitor: Vec<ExtendedReal> =
        strongest.iter().map(|&c| impossibilities[c]).collect();
    // Largest competitor impossibility wins; the lowest index wins ties.
    let mut best = 0;
    for a in 1..n {
        if strongest_competitor[a] > strongest_competitor[best] {
            best = a;
        }
    }
    let tied = (0..n).any(|a| a != best && strongest_competitor[a] == strongest_competitor[best]);
    Ok(JointPrediction {
        assignment: completion(best, k),
        incertitude: reciprocals[strongest[best]],
        tied,
        impossibilities,
    })
}

/// Position of a point relative to the margin of the training-set solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// `f(x) > 1`: transduction always predicts +1 here.
    YPointPos,
    /// `f(x) < −1`
    YPointNeg,
    /// `|f(x)| ≤ 1`
    Borderland,
}

impl RegionLabel {
    pub fn from_decision(value: f64, tolerance: f64) -> Self {
        if value > 1.0 + tolerance {
            RegionLabel::YPointPos
        } else if value < -1.0 - tolerance {
            RegionLabel::YPointNeg
        } else {
            RegionLabel::Borderland
        }
    }

    /// The label guaranteed for a y-point.
    pub fn label(self) -> Option<Label> {
        match self {
            RegionLabel::YPointPos => Some(Label::Positive),
            RegionLabel::YPointNeg => Some(Label::Negative),
            RegionLabel::Borderland => None,
        }
    }
}

pub fn classify_region(training_solution: &SvmSolution, x: &[f64]) -> Result<RegionLabel> {
    let value = training_solution.decision_value(x)?;
    Ok(RegionLabel::from_decision(
        value,
        training_solution.config.sv_tolerance,
    ))
}
