//! Kernel functions and Gram matrices.

use crate::error::{Error, Result};

/// Kernel used to implicitly map examples into feature space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Kernel {
    /// `x · x'`
    #[default]
    Linear,
    /// `(x · x' + coef0)^degree`
    Polynomial { degree: u32, coef0: f64 },
    /// `exp(-gamma |x - x'|²)`
    Rbf { gamma: f64 },
}

impl Kernel {
    /// Degree-2 polynomial with `coef0 = 1`.
    pub fn quadratic() -> Self {
        Kernel::Polynomial {
            degree: 2,
            coef0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Polynomial { degree, coef0 } => {
                if degree == 0 {
                    return Err(Error::InvalidConfig(
                        "polynomial degree must be >= 1".into(),
                    ));
                }
                if !coef0.is_finite() {
                    return Err(Error::InvalidConfig(
                        "polynomial coef0 must be finite".into(),
                    ));
                }
                Ok(())
            }
            Kernel::Rbf { gamma } => {
                if gamma > 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "rbf gamma must be > 0, got {gamma}"
                    )))
                }
            }
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Polynomial { degree, coef0 } => (dot(a, b) + coef0).powi(degree as i32),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense symmetric Gram matrix stored row-major.
#[derive(Debug, Clone)]
pub struct Gram {
    size: usize,
    values: Vec<f64>,
}

impl Gram {
    pub fn new<'a, I>(kernel: &Kernel, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let size = rows.len();
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            for j in i..size {
                let k = kernel.eval(rows[i], rows[j]);
                values[i * size + j] = k;
                values[j * size + i] = k;
            }
        }
        Self { size, values }
    }

    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.size {
            self.values[i * self.size + i] += shift;
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    pub fn size(&self) -> usize {
        self.size
    }
}
