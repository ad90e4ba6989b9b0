//! Standardized tabular data: the space every explanation lives in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-feature affine transform recorded at fit time (`z = (x - mean) / std`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScale {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    /// m × d standardized samples.
    pub x: Matrix,
    pub labels: Vec<i64>,
    pub feature_names: Vec<String>,
    pub standardization: Vec<FeatureScale>,
}

impl Dataset {
    /// Standardizes `raw` column-wise (population std) and wraps it.
    pub fn standardize(raw: Matrix, labels: Vec<i64>, feature_names: Vec<String>) -> Result<Self> {
        let (m, d) = (raw.rows(), raw.cols());
        if d < 1 {
            return Err(Error::input("dataset needs at least one feature"));
        }
        if m < 2 {
            return Err(Error::input("dataset needs at least two samples"));
        }
        Error::check_dim(m, labels.len())?;
        Error::check_dim(d, feature_names.len())?;
        for (i, row) in raw.iter_rows().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data {
                    row: i,
                    column: j,
                    message: "non-finite value".into(),
                });
            }
        }

        let means = raw.column_means();
        let mut vars = vec![0.0; d];
        for row in raw.iter_rows() {
            for j in 0..d {
                let c = row[j] - means[j];
                vars[j] += c * c;
            }
        }
        let mut scales = Vec::with_capacity(d);
        for j in 0..d {
            let std = (vars[j] / m as f64).sqrt();
            if std <= f64::EPSILON * (1.0 + means[j].abs()) {
                return Err(Error::Data {
                    row: 0,
                    column: j,
                    message: format!("feature '{}' is constant", feature_names[j]),
                });
            }
            scales.push(FeatureScale { mean: means[j], std });
        }

        let mut x = raw;
        for i in 0..m {
            for (v, s) in x.row_mut(i).iter_mut().zip(&scales) {
                *v = (*v - s.mean) / s.std;
            }
        }
        Ok(Self {
            x,
            labels,
            feature_names,
            standardization: scales,
        })
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    #[inline]
    pub fn sample(&self, i: usize) -> &[f64] {
        self.x.row(i)
    }

    /// Maps a standardized vector back to the raw feature scale.
    pub fn to_raw(&self, z: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.n_features(), z.len())?;
        Ok(z
            .iter()
            .zip(&self.standardization)
            .map(|(v, s)| v * s.std + s.mean)
            .collect())
    }

    pub fn from_raw(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.n_features(), raw.len())?;
        Ok(raw
            .iter()
            .zip(&self.standardization)
            .map(|(v, s)| (v - s.mean) / s.std)
            .collect())
    }
}
