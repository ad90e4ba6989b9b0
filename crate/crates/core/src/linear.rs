//! Linear projection `φ(x) = A x + b`, fitted by PCA.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProjector {
    /// d' × d, rows are the principal axes for PCA fits.
    pub a: Matrix,
    pub b: Vec<f64>,
}

impl LinearProjector {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        Error::check_dim(a.rows(), b.len())?;
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("linear projector parameters must be finite"));
        }
        Ok(Self { a, b })
    }

    pub fn input_dim(&self) -> usize {
        self.a.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.a.mul_vec(x)?;
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        Ok(y)
    }
}

/// Principal component analysis via SVD of the centered data matrix.
///
/// Each component is oriented so its largest-magnitude entry is positive.
pub fn fit_pca(x: &Matrix, d_out: usize) -> Result<LinearProjector> {
    let (m, d) = (x.rows(), x.cols());
    if d_out == 0 || d_out >= d {
        return Err(Error::input(format!(
            "output dimension must be in [1, {d}), got {d_out}"
        )));
    }
    if m <= d_out {
        return Err(Error::input(format!(
            "need more than {d_out} samples, got {m}"
        )));
    }
    let mean = x.column_means();
    let centered = DMatrix::from_fn(m, d, |i, j| x[(i, j)] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Fit("SVD did not return right singular vectors".into()))?;
    let sv = &svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let largest = order.first().map_or(0.0, |&i| sv[i]);
    let tol = largest * (m.max(d) as f64) * f64::EPSILON;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    if rank < d_out {
        return Err(Error::Fit(format!(
            "data has rank {rank}, cannot extract {d_out} components"
        )));
    }

    let mut a = Matrix::zeros(d_out, d);
    for (r, &k) in order.iter().take(d_out).enumerate() {
        let row = a.row_mut(r);
        for j in 0..d {
            row[j] = v_t[(k, j)];
        }
        let pivot = row
            .iter()
            .copied()
            .reduce(|best, v| if v.abs() > best.abs() { v } else { best })
            .unwrap_or(0.0);
        if pivot < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let am = a.mul_vec(&mean)?;
    let b = am.into_iter().map(|v| -v).collect();
    LinearProjector::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::linalg::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn standardized(rows: &[Vec<f64>]) -> Matrix {
        let raw = Matrix::from_rows(rows).unwrap();
        let d = raw.cols();
        let names = (0..d).map(|j| j.to_string()).collect();
        Dataset::standardize(raw, vec![0; rows.len()], names).unwrap().x
    }

    #[test]
    fn project_examples() {
        let p = LinearProjector::new(Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(), vec![0.0]).unwrap();
        assert_eq!(p.project(&[7.0, 9.0]).unwrap(), vec![7.0]);
        let p = LinearProjector::new(Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(), vec![1.0]).unwrap();
        assert_eq!(p.project(&[1.0, 2.0]).unwrap(), vec![4.0]);
        let p = LinearProjector::new(
            Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        assert_eq!(p.project(&[3.0, 4.0, 5.0]).unwrap(), vec![3.0, 4.0]);
        assert!(p.project(&[1.0]).is_err());
    }

    #[test]
    fn pca_single_axis() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![2.0, 0.0],
            vec![-2.0, 0.0],
        ])
        .unwrap();
        let p = fit_pca(&x, 1).unwrap();
        assert!((p.a[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(p.a[(0, 1)].abs() < 1e-12);
        assert!(p.b[0].abs() < 1e-12);
    }

    #[test]
    fn pca_diagonal_line() {
        // covariance of the standardized points is [[s, s], [s, s]]: top eigenvector (1, 1)/√2
        let x = standardized(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let p = fit_pca(&x, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.a[(0, 0)] - h).abs() < 1e-10);
        assert!((p.a[(0, 1)] - h).abs() < 1e-10);
        assert!(fit_pca(&x, 2).is_err());
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let x = Matrix::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![2.0, 2.0, 1.0],
            vec![3.0, 3.0, 1.0],
        ])
        .unwrap();
        match fit_pca(&x, 2) {
            Err(Error::Fit(msg)) => assert!(msg.contains("rank 1"), "{msg}"),
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn random_pca_is_orthonormal_and_centers_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..5).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let p = fit_pca(&x, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(p.a.row(i), p.a.row(j)) - expect).abs() <= 1e-8);
            }
        }
        let y = p.project(&x.column_means()).unwrap();
        assert!(y.iter().all(|v| v.abs() <= 1e-8));

        // naive double loop oracle
        let probe: Vec<f64> = (0..5).map(|_| rng.random_range(-5.0..5.0)).collect();
        let got = p.project(&probe).unwrap();
        for i in 0..3 {
            let mut acc = p.b[i];
            for j in 0..5 {
                acc += p.a[(i, j)] * probe[j];
            }
            assert!((got[i] - acc).abs() <= 1e-12);
        }
    }
}
