//! Benchmark datasets: the seeded Gaussian toy generator and CSV ingestion.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

/// Lloyd iterations used by [`gen_toy`].
pub const TOY_KMEANS_ITERATIONS: usize = 100;

/// `n` samples in `d` dimensions; feature `j` is `N(μ_j, 1)` with `μ_j`
/// uniform in `[-5, 5]`. The result is standardized and labeled by 2-means.
pub fn gen_toy(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::input("toy data needs at least 4 samples"));
    }
    if d < 1 {
        return Err(Error::input("toy data needs at least one feature"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..=5.0)).collect();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut raw = Matrix::zeros(n, d);
    for i in 0..n {
        for (v, mu) in raw.row_mut(i).iter_mut().zip(&means) {
            *v = mu + unit.sample(&mut rng);
        }
    }
    let names = (0..d).map(|j| format!("f{j}")).collect();
    let mut data = Dataset::standardize(raw, vec![0; n], names)?;
    let clusters = kmeans(&data.x, 2, TOY_KMEANS_ITERATIONS, &mut rng)?;
    data.labels = clusters.into_iter().map(|c| c as i64).collect();
    Ok(data)
}

/// Lloyd's algorithm with k-means++ seeding. Returns the cluster of each row.
/// An emptied cluster keeps its previous center.
pub fn kmeans<R: Rng>(x: &Matrix, k: usize, iterations: usize, rng: &mut R) -> Result<Vec<usize>> {
    let (m, d) = (x.rows(), x.cols());
    if k == 0 || k > m {
        return Err(Error::input(format!("k-means needs 1 <= k <= {m}, got {k}")));
    }
    let mut centers = Matrix::zeros(k, d);
    centers.row_mut(0).copy_from_slice(x.row(rng.random_range(0..m)));
    let mut nearest: Vec<f64> = x.iter_rows().map(|r| squared_distance(r, centers.row(0))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random_range(0.0..total);
            nearest
                .iter()
                .position(|w| {
                    u -= w;
                    u < 0.0
                })
                .unwrap_or(m - 1)
        } else {
            rng.random_range(0..m)
        };
        centers.row_mut(c).copy_from_slice(x.row(pick));
        for (i, r) in x.iter_rows().enumerate() {
            nearest[i] = nearest[i].min(squared_distance(r, centers.row(c)));
        }
    }

    let mut assign = vec![usize::MAX; m];
    for _ in 0..iterations {
        let mut changed = false;
        for (i, r) in x.iter_rows().enumerate() {
            let mut best = (f64::INFINITY, 0);
            for c in 0..k {
                let dist = squared_distance(r, centers.row(c));
                if dist < best.0 {
                    best = (dist, c);
                }
            }
            if assign[i] != best.1 {
                assign[i] = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, r) in x.iter_rows().enumerate() {
            counts[assign[i]] += 1;
            for (s, v) in sums.row_mut(assign[i]).iter_mut().zip(r) {
                *s += v;
            }
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                for (ctr, s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *ctr = s / count as f64;
                }
            }
        }
    }
    Ok(assign)
}

/// Reads a numeric CSV file with a header row; see [`load_csv_reader`].
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, label_column)
}

/// Parses a header-led CSV, takes `label_column` out as labels and
/// standardizes every other column.
///
/// Labels that are all integers (or integral reals) are used as-is; any other
/// label text is coded by its rank among the distinct sorted values. Error
/// coordinates are 0-based data rows (header excluded) and 0-based columns.
pub fn load_csv_reader<R: Read>(reader: R, label_column: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| data_err(0, 0, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let label_idx = header.iter().position(|h| h == label_column).ok_or_else(|| {
        data_err(0, header.len(), format!("label column '{label_column}' not found in header"))
    })?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let width = header.len();

    let mut values = Vec::new();
    let mut label_text = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| data_err(row, 0, e.to_string()))?;
        if rec.len() != width {
            return Err(data_err(
                row,
                rec.len().min(width),
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (col, cell) in rec.iter().enumerate() {
            if col == label_idx {
                label_text.push(cell.to_owned());
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| data_err(row, col, format!("non-numeric cell '{cell}'")))?;
            if !v.is_finite() {
                return Err(data_err(row, col, format!("non-finite cell '{cell}'")));
            }
            values.push(v);
        }
    }
    let m = label_text.len();
    let raw = Matrix::from_vec(m, names.len(), values)?;
    Dataset::standardize(raw, encode_labels(&label_text), names)
}

fn data_err(row: usize, column: usize, message: String) -> Error {
    Error::Data { row, column, message }
}

fn encode_labels(text: &[String]) -> Vec<i64> {
    let numeric: Option<Vec<i64>> = text
        .iter()
        .map(|t| {
            t.parse::<i64>().ok().or_else(|| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
                    .map(|v| v as i64)
            })
        })
        .collect();
    numeric.unwrap_or_else(|| {
        let levels: Vec<&String> = text.iter().collect::<BTreeSet<_>>().into_iter().collect();
        text.iter()
            .map(|t| levels.binary_search(&t).expect("level present") as i64)
            .collect()
    })
}
