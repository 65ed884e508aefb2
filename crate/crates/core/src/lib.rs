//! Transductive confidence machine.
//!
//! Predicts binary labels with an incertitude (`μ`), a confidence (`1 − μ`) and
//! a possibility, all derived from permutation measures of impossibility built
//! on a squared-slack soft-margin SVM.
//!
//! ```
//! use tcm_core::{transduce, Label, LabeledExample, MeasureConfig};
//!
//! let training = vec![
//!     LabeledExample::new(vec![-2.0], Label::Negative),
//!     LabeledExample::new(vec![-1.0], Label::Negative),
//!     LabeledExample::new(vec![1.0], Label::Positive),
//!     LabeledExample::new(vec![2.0], Label::Positive),
//! ];
//! let r = transduce(&training, &[4.0], &MeasureConfig::default()).unwrap();
//! assert_eq!(r.prediction.label(), Some(Label::Positive));
//! assert_eq!(r.possibility, 1.0);
//! ```

pub mod data;
pub mod error;
pub mod eval;
pub mod example;
pub mod impossibility;
pub mod svm;
pub mod transduction;

pub use error::{Error, ErrorCategory, Result};
pub use example::{Label, LabeledExample};
pub use impossibility::{ExtendedReal, ImpossibilityMeasure, MeasureConfig, MeasureKind, WeightFn};
pub use svm::{Kernel, SolverConfig, SvmSolution};
pub use transduction::{transduce, Prediction, TransductiveResult};
