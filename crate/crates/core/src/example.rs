//! Labeled examples and the binary label space.

use std::fmt;

use crate::error::{Error, Result};

/// A binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Negative, Label::Positive];

    /// The label as `-1.0` / `+1.0`.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_i64(value: i64) -> Result<Self> {
        match value {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    /// Label of the sign of `value`; zero maps to `Positive`.
    pub fn from_decision(value: f64) -> Self {
        if value < 0.0 {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// A feature vector paired with its label.
#[derive(Debug, Clone)]
pub struct LabeledExample {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Exact equality: identical label and bitwise-identical features.
    pub fn same_as(&self, other: &LabeledExample) -> bool {
        self.label == other.label
            && self.features.len() == other.features.len()
            && self
                .features
                .iter()
                .zip(&other.features)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl PartialEq for LabeledExample {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl Eq for LabeledExample {}

impl std::hash::Hash for LabeledExample {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        for v in &self.features {
            v.to_bits().hash(state);
        }
    }
}

/// Checks that all examples share one feature length and returns it.
pub(crate) fn common_dim(examples: &[LabeledExample]) -> Result<usize> {
    let first = examples.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    for ex in examples {
        if ex.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: ex.dim(),
            });
        }
    }
    Ok(dim)
}

pub(crate) fn has_both_classes(examples: &[LabeledExample]) -> bool {
    let pos = examples.iter().any(|e| e.label == Label::Positive);
    let neg = examples.iter().any(|e| e.label == Label::Negative);
    pos && neg
}

/// True when two positions of the sequence hold the same example.
pub fn has_duplicates(examples: &[LabeledExample]) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(examples.len());
    examples.iter().any(|e| !seen.insert(e))
}
