//! Self-organizing map: online Kohonen training and best-matching-unit lookup.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

/// Learning rate reached at the end of training.
pub const FINAL_LEARNING_RATE: f64 = 0.01;
/// Neighborhood radius reached at the end of training.
pub const FINAL_RADIUS: f64 = 0.25;

/// Position on the map grid. Ordered lexicographically by (row, col).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridIndex {
    pub row: usize,
    pub col: usize,
}

impl GridIndex {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn distance(&self, other: &GridIndex) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

impl std::fmt::Display for GridIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomTraining {
    pub epochs: usize,
    pub final_learning_rate: f64,
    pub final_radius: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Som {
    pub height: usize,
    pub width: usize,
    /// One prototype per grid cell, in row-major cell order (0,0), (0,1), ...
    pub prototypes: Matrix,
    pub training: Option<SomTraining>,
}

impl Som {
    /// Wraps explicit prototypes; `prototypes` must have `height * width` rows.
    pub fn from_prototypes(height: usize, width: usize, prototypes: Matrix) -> Result<Self> {
        if height * width < 2 {
            return Err(Error::input("SOM grid needs at least two cells"));
        }
        Error::check_dim(height * width, prototypes.rows())?;
        if !prototypes.is_finite() {
            return Err(Error::input("SOM prototypes must be finite"));
        }
        Ok(Self {
            height,
            width,
            prototypes,
            training: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.prototypes.cols()
    }

    pub fn n_cells(&self) -> usize {
        self.height * self.width
    }

    pub fn cell(&self, flat: usize) -> GridIndex {
        GridIndex::new(flat / self.width, flat % self.width)
    }

    pub fn flat_index(&self, idx: GridIndex) -> Result<usize> {
        if idx.row >= self.height || idx.col >= self.width {
            return Err(Error::input(format!(
                "grid index {idx} outside {}x{} map",
                self.height, self.width
            )));
        }
        Ok(idx.row * self.width + idx.col)
    }

    pub fn prototype(&self, idx: GridIndex) -> Result<&[f64]> {
        Ok(self.prototypes.row(self.flat_index(idx)?))
    }

    pub fn cells(&self) -> impl Iterator<Item = GridIndex> + '_ {
        (0..self.n_cells()).map(|k| self.cell(k))
    }

    /// Best-matching unit; ties go to the lexicographically smallest index.
    pub fn project(&self, x: &[f64]) -> Result<GridIndex> {
        Error::check_dim(self.input_dim(), x.len())?;
        Ok(self.cell(self.bmu_flat(x)))
    }

    fn bmu_flat(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in self.prototypes.iter_rows().enumerate() {
            let d = squared_distance(x, p);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    /// Nearest grid cell to a continuous (row, col) position, clamped to the map.
    pub fn snap(&self, position: [f64; 2]) -> GridIndex {
        let clamp = |v: f64, n: usize| v.round().clamp(0.0, (n - 1) as f64) as usize;
        GridIndex::new(clamp(position[0], self.height), clamp(position[1], self.width))
    }
}

/// Classic online SOM training.
///
/// Prototypes start at randomly drawn training samples. For each presented
/// sample every prototype moves toward it with weight
/// `lr(t) * exp(-|z - bmu|² / (2 σ(t)²))`; both `lr` and `σ` decay
/// exponentially to [`FINAL_LEARNING_RATE`] and [`FINAL_RADIUS`].
pub fn fit_som(
    x: &Matrix,
    height: usize,
    width: usize,
    epochs: usize,
    lr0: f64,
    radius0: f64,
    seed: u64,
) -> Result<Som> {
    let (m, d) = (x.rows(), x.cols());
    if m == 0 || d == 0 {
        return Err(Error::input("cannot fit a SOM on empty data"));
    }
    if height * width < 2 {
        return Err(Error::input("SOM grid needs at least two cells"));
    }
    if epochs == 0 {
        return Err(Error::input("SOM training needs at least one epoch"));
    }
    if !(lr0 > 0.0 && lr0.is_finite()) || !(radius0 > 0.0 && radius0.is_finite()) {
        return Err(Error::input("learning rate and radius must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cells = height * width;
    let mut rows: Vec<usize> = (0..m).collect();
    rows.shuffle(&mut rng);
    let mut prototypes = Matrix::zeros(n_cells, d);
    for k in 0..n_cells {
        let src = rows.get(k).copied().unwrap_or_else(|| rng.random_range(0..m));
        prototypes.row_mut(k).copy_from_slice(x.row(src));
    }
    let mut som = Som {
        height,
        width,
        prototypes,
        training: None,
    };

    let total = (epochs * m) as f64;
    let lr_ratio = FINAL_LEARNING_RATE / lr0;
    let radius_ratio = FINAL_RADIUS / radius0;
    let mut order: Vec<usize> = (0..m).collect();
    let mut step = 0usize;
    let (mut lr, mut radius) = (lr0, radius0);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let frac = if total > 1.0 { step as f64 / (total - 1.0) } else { 1.0 };
            lr = lr0 * lr_ratio.powf(frac);
            radius = radius0 * radius_ratio.powf(frac);
            let sample = x.row(i);
            let bmu = som.cell(som.bmu_flat(sample));
            let denom = 2.0 * radius * radius;
            for k in 0..n_cells {
                let z = som.cell(k);
                let g2 = z.distance(&bmu).powi(2);
                let h = (-g2 / denom).exp();
                let w = lr * h;
                if w < 1e-300 {
                    continue;
                }
                for (p, s) in som.prototypes.row_mut(k).iter_mut().zip(sample) {
                    *p += w * (s - *p);
                }
            }
            step += 1;
        }
    }
    som.training = Some(SomTraining {
        epochs,
        final_learning_rate: lr,
        final_radius: radius,
        seed,
    });
    Ok(som)
}
