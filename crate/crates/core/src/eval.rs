//! Batch evaluation, calibration experiments and report output.
//!
//! Reals are written with six significant digits so that reports and scatter
//! files diff cleanly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::data::{generate_synthetic, Dataset, SynthConfig, SyntheticRng, TestPoint};
use crate::error::{Error, Result};
use crate::example::{Label, LabeledExample};
use crate::impossibility::{
    exchangeable_validity_oracle, permutation_validity_oracle, Hyperset, MeasureConfig,
};
use crate::svm::solve_soft_margin;
use crate::transduction::{svm_predict_with_confidence, transduce, PictureDiagnostics, Prediction};

/// Formats like C's `%.6g`; infinities print as `inf`/`-inf`.
pub fn fmt_real(value: f64) -> String {
    const DIGITS: i32 = 6;
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if value == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s.to_owned()
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(&format!("{value:.decimals$}"))
    }
}

/// Which rule produces the reported label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Predictor {
    /// Larger `μ` of the two pictures.
    #[default]
    Transductive,
    /// Sign of the inductive SVM trained on the training set.
    Svm,
}

/// One predicted test point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub id: usize,
    pub true_label: Option<Label>,
    pub prediction: Prediction,
    pub incertitude: f64,
    pub confidence: f64,
    pub possibility: f64,
    /// Negative picture first.
    pub pictures: [PictureDiagnostics; 2],
}

/// How a prediction compares with the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Correct,
    Incorrect,
    Undecided,
}

impl Outcome {
    /// `O` correct, `X` incorrect, `U` undecided.
    pub fn mark(self) -> char {
        match self {
            Outcome::Correct => 'O',
            Outcome::Incorrect => 'X',
            Outcome::Undecided => 'U',
        }
    }

    fn from_mark(mark: &str) -> Option<Self> {
        match mark {
            "O" => Some(Outcome::Correct),
            "X" => Some(Outcome::Incorrect),
            "U" => Some(Outcome::Undecided),
            _ => None,
        }
    }
}

impl PointOutcome {
    pub fn outcome(&self) -> Option<Outcome> {
        let truth = self.true_label?;
        Some(match self.prediction {
            Prediction::Undecided => Outcome::Undecided,
            Prediction::Label(l) if l == truth => Outcome::Correct,
            Prediction::Label(_) => Outcome::Incorrect,
        })
    }
}

/// Statistics for the points of one possibility cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub name: &'static str,
    pub size: usize,
    pub min_confidence: Option<f64>,
    pub max_confidence: Option<f64>,
    pub mean_confidence: Option<f64>,
    pub mean_possibility: Option<f64>,
    pub n_correct: usize,
    pub n_incorrect: usize,
    pub n_undecided: usize,
}

impl ClusterStats {
    fn collect(name: &'static str, points: &[&PointOutcome]) -> Result<Self> {
        let mut stats = ClusterStats {
            name,
            size: points.len(),
            min_confidence: None,
            max_confidence: None,
            mean_confidence: None,
            mean_possibility: None,
            n_correct: 0,
            n_incorrect: 0,
            n_undecided: 0,
        };
        for p in points {
            match p.outcome().ok_or(Error::MissingLabel { id: p.id })? {
                Outcome::Correct => stats.n_correct += 1,
                Outcome::Incorrect => stats.n_incorrect += 1,
                Outcome::Undecided => stats.n_undecided += 1,
            }
        }
        if !points.is_empty() {
            let n = points.len() as f64;
            let conf = points.iter().map(|p| p.confidence);
            stats.min_confidence = Some(conf.clone().fold(f64::INFINITY, f64::min));
            stats.max_confidence = Some(conf.clone().fold(f64::NEG_INFINITY, f64::max));
            stats.mean_confidence = Some(conf.sum::<f64>() / n);
            stats.mean_possibility = Some(points.iter().map(|p| p.possibility).sum::<f64>() / n);
        }
        Ok(stats)
    }
}

/// Error and undecided counts plus the two possibility clusters
/// (`possibility = 1` and `possibility < 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub n_test: usize,
    pub n_errors: usize,
    pub n_undecided: usize,
    pub clusters: [ClusterStats; 2],
}

impl EvaluationReport {
    pub fn from_points(points: &[PointOutcome]) -> Result<Self> {
        let (full, partial): (Vec<&PointOutcome>, Vec<&PointOutcome>) =
            points.iter().partition(|p| p.possibility == 1.0);
        let clusters = [
            ClusterStats::collect("possibility=1", &full)?,
            ClusterStats::collect("possibility<1", &partial)?,
        ];
        Ok(Self {
            n_test: points.len(),
            n_errors: clusters.iter().map(|c| c.n_incorrect).sum(),
            n_undecided: clusters.iter().map(|c| c.n_undecided).sum(),
            clusters,
        })
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), fmt_real);
        let mut s = String::new();
        let _ = writeln!(s, "test points      {}", self.n_test);
        let _ = writeln!(s, "errors           {}", self.n_errors);
        let _ = writeln!(s, "undecided        {}", self.n_undecided);
        let _ = writeln!(s);
        let [a, b] = &self.clusters;
        let _ = writeln!(s, "{:<20}{:>16}{:>16}", "cluster", a.name, b.name);
        let mut row = |name: &str, x: String, y: String| {
            let _ = writeln!(s, "{name:<20}{x:>16}{y:>16}");
        };
        row("size", a.size.to_string(), b.size.to_string());
        row("correct", a.n_correct.to_string(), b.n_correct.to_string());
        row(
            "incorrect",
            a.n_incorrect.to_string(),
            b.n_incorrect.to_string(),
        );
        row(
            "undecided",
            a.n_undecided.to_string(),
            b.n_undecided.to_string(),
        );
        row(
            "min confidence",
            opt(a.min_confidence),
            opt(b.min_confidence),
        );
        row(
            "max confidence",
            opt(a.max_confidence),
            opt(b.max_confidence),
        );
        row(
            "mean confidence",
            opt(a.mean_confidence),
            opt(b.mean_confidence),
        );
        row(
            "mean possibility",
            opt(a.mean_possibility),
            opt(b.mean_possibility),
        );
        s
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, fmt_real);
        let mut s = String::from(
            "scope,size,n_errors,n_undecided,n_correct,min_confidence,max_confidence,mean_confidence,mean_possibility\n",
        );
        let n_correct: usize = self.clusters.iter().map(|c| c.n_correct).sum();
        let _ = writeln!(
            s,
            "all,{},{},{},{},,,,",
            self.n_test, self.n_errors, self.n_undecided, n_correct
        );
        for c in &self.clusters {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                c.name,
                c.size,
                c.n_incorrect,
                c.n_undecided,
                c.n_correct,
                opt(c.min_confidence),
                opt(c.max_confidence),
                opt(c.mean_confidence),
                opt(c.mean_possibility)
            );
        }
        s
    }
}

/// Predicts every test point independently.
pub fn predict_points(
    train: &Dataset,
    test: &[TestPoint],
    config: &MeasureConfig,
    predictor: Predictor,
) -> Result<Vec<PointOutcome>> {
    let inductive = match predictor {
        Predictor::Svm => Some(solve_soft_margin(
            &train.examples,
            config.kernel,
            &config.solver,
        )?),
        Predictor::Transductive => None,
    };
    test.par_iter()
        .enumerate()
        .map(|(id, point)| {
            let x = &point.features;
            let (prediction, incertitude, possibility, pictures) = match &inductive {
                None => {
                    let r = transduce(&train.examples, x, config)?;
                    (r.prediction, r.incertitude, r.possibility, r.pictures)
                }
                Some(solution) => {
                    let r = svm_predict_with_confidence(solution, x, config)?;
                    (
                        Prediction::Label(r.label),
                        r.incertitude.value(),
                        r.possibility,
                        r.pictures,
                    )
                }
            };
            Ok(PointOutcome {
                id,
                true_label: point.label,
                prediction,
                incertitude,
                confidence: 1.0 - incertitude,
                possibility,
                pictures,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub points: Vec<PointOutcome>,
    pub report: EvaluationReport,
}

/// Predicts a labeled test set and summarizes errors, undecided points and
/// the possibility clusters.
pub fn evaluate_testset(
    train: &Dataset,
    test: &Dataset,
    config: &MeasureConfig,
    predictor: Predictor,
) -> Result<Evaluation> {
    let points: Vec<TestPoint> = test
        .examples
        .iter()
        .map(|e| TestPoint {
            features: e.features.clone(),
            label: Some(e.label),
        })
        .collect();
    let points = predict_points(train, &points, config, predictor)?;
    let report = EvaluationReport::from_points(&points)?;
    Ok(Evaluation { points, report })
}

pub const POINT_HEADER: &str = "id,true_label,prediction,incertitude,confidence,possibility,\
sv_count_neg_picture,sv_count_pos_picture,new_is_sv_neg,new_is_sv_pos";

pub fn write_points<W: Write>(points: &[PointOutcome], mut out: W) -> Result<()> {
    writeln!(out, "{POINT_HEADER}")?;
    for p in points {
        let [neg, pos] = &p.pictures;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.id,
            p.true_label.map_or_else(String::new, |l| l.to_string()),
            p.prediction,
            fmt_real(p.incertitude),
            fmt_real(p.confidence),
            fmt_real(p.possibility),
            neg.sv_count,
            pos.sv_count,
            neg.new_point_is_sv,
            pos.new_point_is_sv
        )?;
    }
    out.flush()?;
    Ok(())
}

/// One row of a confidence/possibility scatter plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRow {
    pub confidence: f64,
    pub possibility: f64,
    pub outcome: Outcome,
}

pub fn scatter_rows(points: &[PointOutcome]) -> Result<Vec<ScatterRow>> {
    points
        .iter()
        .map(|p| {
            Ok(ScatterRow {
                confidence: p.confidence,
                possibility: p.possibility,
                outcome: p.outcome().ok_or(Error::MissingLabel { id: p.id })?,
            })
        })
        .collect()
}

pub fn write_scatter<W: Write>(rows: &[ScatterRow], mut out: W) -> Result<()> {
    writeln!(out, "confidence,possibility,outcome")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            fmt_real(r.confidence),
            fmt_real(r.possibility),
            r.outcome.mark()
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `confidence,possibility,outcome` rows for external plotting.
pub fn export_scatter(points: &[PointOutcome], path: impl AsRef<Path>) -> Result<()> {
    let rows = scatter_rows(points)?;
    write_scatter(&rows, io::BufWriter::new(File::create(path)?))
}

/// Reads a per-point file written by [`write_points`] back into scatter rows.
pub fn read_point_file(path: impl AsRef<Path>) -> Result<Vec<ScatterRow>> {
    let path = path.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column {name:?}")))
    };
    let (truth, pred, conf, poss) = (
        column("true_label")?,
        column("prediction")?,
        column("confidence")?,
        column("possibility")?,
    );
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let real = |idx: usize| -> Result<f64> {
            record[idx]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad number {:?}", &record[idx])))
        };
        let outcome = match (&record[truth], &record[pred]) {
            ("", _) => return Err(Error::MissingLabel { id: i }),
            (_, "undecided") => Outcome::Undecided,
            (t, p) if t == p => Outcome::Correct,
            _ => Outcome::Incorrect,
        };
        rows.push(ScatterRow {
            confidence: real(conf)?,
            possibility: real(poss)?,
            outcome,
        });
    }
    Ok(rows)
}

/// Parses a scatter file back (used to check round trips).
pub fn read_scatter(path: impl AsRef<Path>) -> Result<Vec<ScatterRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let bad = |line: usize| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: "malformed scatter row".into(),
    };
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad(i + 1));
            }
            Ok(ScatterRow {
                confidence: f[0].parse().map_err(|_| bad(i + 1))?,
                possibility: f[1].parse().map_err(|_| bad(i + 1))?,
                outcome: Outcome::from_mark(f[2]).ok_or_else(|| bad(i + 1))?,
            })
        })
        .collect()
}

/// Frequency of confident mistakes at one significance level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub epsilon: f64,
    pub n_trials: usize,
    /// Trials whose prediction was wrong (or undecided) with `μ ≤ ε`.
    pub n_wrong_and_confident: usize,
    pub empirical_rate: f64,
}

impl CalibrationRow {
    /// `ε + sigmas · sqrt(ε(1 − ε)/n)`.
    pub fn binomial_bound(&self, sigmas: f64) -> f64 {
        let e = self.epsilon;
        e + sigmas * (e * (1.0 - e) / self.n_trials as f64).sqrt()
    }
}

/// Outcome of one leave-one-out calibration trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTrial {
    pub incertitude: f64,
    /// Undecided predictions count as wrong.
    pub wrong: bool,
}

/// Runs `trials` independent trials: draw a fresh synthetic dataset, hold out
/// a uniformly chosen example, transduce it from the rest.
pub fn calibration_trials(
    synth: &SynthConfig,
    trials: usize,
    seed: u64,
    config: &MeasureConfig,
) -> Result<Vec<CalibrationTrial>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    synth.validate()?;
    if synth.n_per_class < 2 {
        return Err(Error::InvalidConfig(
            "calibration needs n_per_class >= 2".into(),
        ));
    }
    let mut rng = SyntheticRng::new(seed);
    let n = 2 * synth.n_per_class;
    let plan: Vec<(u64, usize)> = (0..trials)
        .map(|_| {
            let data_seed = rng.next_u64();
            let held_out = ((rng.next_uniform() * n as f64) as usize).min(n - 1);
            (data_seed, held_out)
        })
        .collect();
    plan.par_iter()
        .map(|&(data_seed, held_out)| {
            let data = generate_synthetic(&SynthConfig {
                seed: data_seed,
                ..*synth
            })?;
            let mut training = data.examples;
            let target = training.remove(held_out);
            let r = transduce(&training, &target.features, config)?;
            Ok(CalibrationTrial {
                incertitude: r.incertitude,
                wrong: r.prediction != Prediction::Label(target.label),
            })
        })
        .collect()
}

pub fn calibration_rows(trials: &[CalibrationTrial], epsilons: &[f64]) -> Vec<CalibrationRow> {
    epsilons
        .iter()
        .map(|&epsilon| {
            let n_wrong_and_confident = trials
                .iter()
                .filter(|t| t.wrong && t.incertitude <= epsilon)
                .count();
            CalibrationRow {
                epsilon,
                n_trials: trials.len(),
                n_wrong_and_confident,
                empirical_rate: n_wrong_and_confident as f64 / trials.len() as f64,
            }
        })
        .collect()
}

/// Empirical frequency of `{wrong and μ ≤ ε}` for each `ε`.
pub fn calibration_experiment(
    synth: &SynthConfig,
    epsilons: &[f64],
    trials: usize,
    seed: u64,
    config: &MeasureConfig,
) -> Result<Vec<CalibrationRow>> {
    let outcomes = calibration_trials(synth, trials, seed, config)?;
    Ok(calibration_rows(&outcomes, epsilons))
}

pub fn write_calibration<W: Write>(rows: &[CalibrationRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "epsilon,n_trials,n_wrong_and_confident,empirical_rate,bound_3sigma"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(r.epsilon),
            r.n_trials,
            r.n_wrong_and_confident,
            fmt_real(r.empirical_rate),
            fmt_real(r.binomial_bound(3.0))
        )?;
    }
    out.flush()?;
    Ok(())
}

/// `m` Gaussian points in `dim` dimensions with fair-coin labels, redrawn
/// until both classes appear.
pub fn random_sample(rng: &mut SyntheticRng, m: usize, dim: usize) -> Vec<LabeledExample> {
    assert!(m >= 2, "a two-class sample needs at least two points");
    loop {
        let sample: Vec<LabeledExample> = (0..m)
            .map(|_| {
                let features = (0..dim).map(|_| rng.next_normal()).collect();
                let label = if rng.next_uniform() < 0.5 {
                    Label::Negative
                } else {
                    Label::Positive
                };
                LabeledExample::new(features, label)
            })
            .collect();
        if crate::example::has_both_classes(&sample) {
            return sample;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityRow {
    pub sample: usize,
    pub permutation_average: f64,
    pub exchangeable_average: f64,
}

/// Checks `measure` with both enumeration oracles on `samples` random samples
/// of size `size`.
pub fn validate_measure(
    measure: &MeasureConfig,
    size: usize,
    samples: usize,
    dim: usize,
    seed: u64,
) -> Result<Vec<ValidityRow>> {
    measure.validate()?;
    if size < 2 {
        return Err(Error::InvalidConfig("sample size must be >= 2".into()));
    }
    if size > crate::impossibility::MAX_ENUMERATION {
        return Err(Error::TooLarge {
            size,
            max: crate::impossibility::MAX_ENUMERATION,
        });
    }
    let mut rng = SyntheticRng::new(seed);
    (0..samples)
        .map(|sample| {
            let data = random_sample(&mut rng, size, dim);
            Ok(ValidityRow {
                sample,
                permutation_average: permutation_validity_oracle(measure, &data)?,
                exchangeable_average: exchangeable_validity_oracle(
                    measure,
                    &Hyperset::signature(&data),
                )?,
            })
        })
        .collect()
}

pub fn write_validity<W: Write>(rows: &[ValidityRow], mut out: W) -> Result<()> {
    writeln!(out, "sample,permutation_average,exchangeable_average")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.12},{:.12}",
            r.sample, r.permutation_average, r.exchangeable_average
        )?;
    }
    out.flush()?;
    Ok(())
}
