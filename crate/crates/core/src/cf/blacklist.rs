use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How black-listed features are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlacklistMode {
    /// `M x_cf = m`: the coordinates are fixed to their original values and
    /// excluded from optimization (convex solvers).
    EqualityConstraint,
    /// `x ↦ M x + m`: whatever the optimizer does to the coordinates is undone
    /// before the mapping is evaluated (gradient solvers).
    AffineRemap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlacklistConstraint {
    pub features: Vec<usize>,
    pub mode: BlacklistMode,
    /// Original values of `features`, in the same order.
    pub anchor: Vec<f64>,
}

impl BlacklistConstraint {
    pub fn new(features: &[usize], x_orig: &[f64], mode: BlacklistMode) -> Result<Self> {
        let anchor = features
            .iter()
            .map(|&j| {
                x_orig
                    .get(j)
                    .copied()
                    .ok_or_else(|| Error::input(format!("black-listed feature {j} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            features: features.to_vec(),
            mode,
            anchor,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// `M x + m`: copies `x` and overwrites the black-listed coordinates with their anchors.
    pub fn apply_remap(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.pin(&mut out);
        out
    }

    pub fn pin(&self, x: &mut [f64]) {
        for (&j, &a) in self.features.iter().zip(&self.anchor) {
            x[j] = a;
        }
    }

    /// `Mᵀ g`: zeroes gradient entries of black-listed coordinates.
    pub fn mask_gradient(&self, g: &mut [f64]) {
        for &j in &self.features {
            g[j] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remap_examples() {
        let x_orig = [9.0, 9.0, 9.0];
        let none = BlacklistConstraint::new(&[], &x_orig, BlacklistMode::AffineRemap).unwrap();
        assert_eq!(none.apply_remap(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        let one = BlacklistConstraint::new(&[1], &x_orig, BlacklistMode::AffineRemap).unwrap();
        let once = one.apply_remap(&[1.0, 2.0, 3.0]);
        assert_eq!(once, vec![1.0, 9.0, 3.0]);
        assert_eq!(one.apply_remap(&once), once);
        assert!(BlacklistConstraint::new(&[3], &x_orig, BlacklistMode::AffineRemap).is_err());
    }

    proptest::proptest! {
        #[test]
        fn remap_reads_back_anchor(
            x in proptest::collection::vec(-5.0f64..5.0, 6),
            orig in proptest::collection::vec(-5.0f64..5.0, 6),
            mask in proptest::collection::vec(proptest::bool::ANY, 6),
        ) {
            let f: Vec<usize> = (0..6).filter(|&j| mask[j]).collect();
            let bl = BlacklistConstraint::new(&f, &orig, BlacklistMode::AffineRemap).unwrap();
            let r = bl.apply_remap(&x);
            for j in 0..6 {
                let expect = if mask[j] { orig[j] } else { x[j] };
                proptest::prop_assert_eq!(r[j].to_bits(), expect.to_bits());
            }
        }
    }
}
