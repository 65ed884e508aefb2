//! Dataset ingestion, synthetic data and deterministic splitting.
//!
//! CSV dialect: comma separated, optional header row, plain decimal numerals.
//! By default the label is the last column.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::example::{has_both_classes, Label, LabeledExample};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub feature_names: Option<Vec<String>>,
    /// Where the examples came from (file path, generator parameters, ...).
    pub source: String,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>, source: impl Into<String>) -> Self {
        Self {
            examples,
            feature_names: None,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.examples.first().map(LabeledExample::dim)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    pub positive_token: String,
    pub negative_token: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            positive_token: "1".into(),
            negative_token: "-1".into(),
        }
    }
}

impl CsvSchema {
    fn label_of(&self, token: &str) -> Option<Label> {
        if token == self.positive_token {
            Some(Label::Positive)
        } else if token == self.negative_token {
            Some(Label::Negative)
        } else {
            None
        }
    }

    fn token(&self, label: Label) -> &str {
        match label {
            Label::Positive => &self.positive_token,
            Label::Negative => &self.negative_token,
        }
    }
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, "file contains no rows"));
    }
    Ok(rows)
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => parse_error(path, line, &format!("{other:?}")),
    }
}

fn parse_error(path: &Path, line: usize, message: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.to_owned(),
    }
}

fn resolve_label_column(
    schema: &CsvSchema,
    header: Option<&[String]>,
    width: usize,
    path: &Path,
) -> Result<usize> {
    let idx = match &schema.label_column {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(name) => {
            let header = header.ok_or_else(|| {
                parse_error(
                    path,
                    1,
                    "label column given by name but the file has no header",
                )
            })?;
            header.iter().position(|h| h == name)
        }
    };
    idx.filter(|&i| i < width)
        .ok_or_else(|| parse_error(path, 1, "label column out of range"))
}

fn looks_like_header(row: &[String], schema: &CsvSchema) -> bool {
    row.iter()
        .any(|f| f.parse::<f64>().is_err() && schema.label_of(f).is_none())
}

/// Loads a labeled dataset; every data row becomes one example.
pub fn load_examples(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let has_header =
        looks_like_header(&rows[0], schema) || matches!(schema.label_column, LabelColumn::Name(_));
    let header = has_header.then(|| rows[0].clone());
    let body = &rows[usize::from(has_header)..];
    if body.is_empty() {
        return Err(parse_error(path, 1, "file contains a header but no data"));
    }
    let width = header.as_ref().map_or(body[0].len(), Vec::len);
    let label_col = resolve_label_column(schema, header.as_deref(), width, path)?;

    let mut examples = Vec::with_capacity(body.len());
    for (offset, row) in body.iter().enumerate() {
        let line = offset + 1 + usize::from(has_header);
        if row.len() != width {
            return Err(parse_error(
                path,
                line,
                &format!("expected {width} fields, found {}", row.len()),
            ));
        }
        let label = schema.label_of(&row[label_col]).ok_or_else(|| {
            parse_error(
                path,
                line,
                &format!("unknown label token {:?}", row[label_col]),
            )
        })?;
        let features = parse_features(row, Some(label_col), path, line)?;
        examples.push(LabeledExample::new(features, label));
    }

    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|&(i, _)| i != label_col)
            .map(|(_, name)| name)
            .collect()
    });
    Ok(Dataset {
        examples,
        feature_names,
        source: path.display().to_string(),
    })
}

fn parse_features(
    row: &[String],
    skip: Option<usize>,
    path: &Path,
    line: usize,
) -> Result<Vec<f64>> {
    row.iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != skip)
        .map(|(_, field)| {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_error(path, line, &format!("non-numeric feature {field:?}")))
        })
        .collect()
}

/// A point to be predicted, with its label when the file provides one.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPoint {
    pub features: Vec<f64>,
    pub label: Option<Label>,
}

/// Loads points of dimension `dim`. Rows with `dim + 1` fields carry a label
/// (located as in `schema`); rows with `dim` fields are unlabeled.
pub fn load_points(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
    dim: usize,
) -> Result<Vec<TestPoint>> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let has_header = looks_like_header(&rows[0], schema);
    let header = has_header.then(|| rows[0].clone());
    let mut points = Vec::new();
    for (offset, row) in rows.iter().enumerate().skip(usize::from(has_header)) {
        let line = offset + 1;
        let point = if row.len() == dim + 1 {
            let label_col = resolve_label_column(schema, header.as_deref(), row.len(), path)?;
            let label = schema.label_of(&row[label_col]).ok_or_else(|| {
                parse_error(
                    path,
                    line,
                    &format!("unknown label token {:?}", row[label_col]),
                )
            })?;
            TestPoint {
                features: parse_features(row, Some(label_col), path, line)?,
                label: Some(label),
            }
        } else if row.len() == dim {
            TestPoint {
                features: parse_features(row, None, path, line)?,
                label: None,
            }
        } else {
            return Err(parse_error(
                path,
                line,
                &format!("expected {dim} or {} fields, found {}", dim + 1, row.len()),
            ));
        };
        points.push(point);
    }
    Ok(points)
}

/// Writes features followed by the label column.
pub fn write_examples<W: Write>(dataset: &Dataset, schema: &CsvSchema, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().from_writer(out);
    let io = |e: csv::Error| Error::Io(io::Error::other(e));
    if let Some(names) = &dataset.feature_names {
        let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
        header.push("label");
        writer.write_record(&header).map_err(io)?;
    }
    for ex in &dataset.examples {
        let mut record: Vec<String> = ex.features.iter().map(|v| v.to_string()).collect();
        record.push(schema.token(ex.label).to_owned());
        writer.write_record(&record).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_examples(dataset: &Dataset, schema: &CsvSchema, path: impl AsRef<Path>) -> Result<()> {
    write_examples(dataset, schema, File::create(path)?)
}

/// Parameters of two isotropic Gaussian clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_per_class: usize,
    pub dimension: usize,
    /// Distance between the class means, placed at `±separation/2` on the
    /// first axis.
    pub separation: f64,
    /// Standard deviation of each coordinate.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_per_class: 50,
            dimension: 2,
            separation: 2.0,
            noise: 1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 || self.dimension == 0 {
            return Err(Error::InvalidConfig(
                "n_per_class and dimension must be >= 1".into(),
            ));
        }
        if !self.separation.is_finite() || !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidConfig(
                "separation must be finite and noise > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Portable random stream behind the synthetic generator.
///
/// * state: xoshiro256++ seeded from the `u64` seed through SplitMix64;
/// * uniform: `(next_u64 >> 11) · 2⁻⁵³`, in `[0, 1)`;
/// * normal: Box–Muller from two consecutive uniforms `u1, u2`,
///   `sqrt(−2 ln(1 − u1)) · cos(2π u2)`; the sine branch is discarded.
#[derive(Debug, Clone)]
pub struct SyntheticRng(Xoshiro256PlusPlus);

impl SyntheticRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn next_uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Draws `n_per_class` negatives followed by `n_per_class` positives. Each
/// example consumes `dimension` normals in coordinate order.
pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = SyntheticRng::new(config.seed);
    let mut examples = Vec::with_capacity(2 * config.n_per_class);
    for label in Label::BOTH {
        let shift = label.sign() * config.separation / 2.0;
        for _ in 0..config.n_per_class {
            let features = (0..config.dimension)
                .map(|j| {
                    let z = config.noise * rng.next_normal();
                    if j == 0 {
                        z + shift
                    } else {
                        z
                    }
                })
                .collect();
            examples.push(LabeledExample::new(features, label));
        }
    }
    Ok(Dataset::new(
        examples,
        format!(
            "synthetic(n_per_class={}, dim={}, separation={}, noise={}, seed={})",
            config.n_per_class, config.dimension, config.separation, config.noise, config.seed
        ),
    ))
}

/// Shuffles with a seeded generator and cuts at `round(train_fraction · n)`.
pub fn split_dataset(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::Split("dataset is empty".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = dataset.len();
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut Xoshiro256PlusPlus::seed_from_u64(seed));

    let pick = |idx: &[usize]| -> Vec<LabeledExample> {
        idx.iter().map(|&i| dataset.examples[i].clone()).collect()
    };
    let train = pick(&order[..n_train]);
    if !has_both_classes(&train) {
        return Err(Error::Split("training part contains a single class".into()));
    }
    let test = pick(&order[n_train..]);
    let part = |examples, tag: &str| Dataset {
        examples,
        feature_names: dataset.feature_names.clone(),
        source: format!("{} [{tag}, seed={seed}]", dataset.source),
    };
    Ok((part(train, "train"), part(test, "test")))
}
