//! Evaluation metrics: variance explained over masked rows, and the mean
//! number of components used per encoded sample.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance-explained report: `value = 100 * (1 - numerator / denominator)`
/// with both norms taken over masked-true rows only.
///
/// The value can be negative when a reconstruction is worse than zero; it is
/// reported as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VeReport {
    pub value: f64,
    /// Squared Frobenius norm of the residual over included rows.
    pub numerator: f64,
    /// Squared Frobenius norm of the original over included rows.
    pub denominator: f64,
    pub rows_used: usize,
}

/// Percent of squared Frobenius norm explained by `reconstruction`,
/// restricted to rows where `row_mask` is true.
pub fn variance_explained(
    original: &Array2<f64>,
    reconstruction: &Array2<f64>,
    row_mask: &[bool],
) -> Result<VeReport> {
    if original.dim() != reconstruction.dim() {
        return Err(Error::Shape(format!(
            "original {:?} vs reconstruction {:?}",
            original.dim(),
            reconstruction.dim()
        )));
    }
    if row_mask.len() != original.nrows() {
        return Err(Error::Mask(format!(
            "mask of {} entries for {} rows",
            row_mask.len(),
            original.nrows()
        )));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut rows_used = 0;
    for (r, &keep) in row_mask.iter().enumerate() {
        if !keep {
            continue;
        }
        rows_used += 1;
        for (o, re) in original.row(r).iter().zip(reconstruction.row(r)) {
            numerator += (o - re) * (o - re);
            denominator += o * o;
        }
    }
    if denominator == 0.0 {
        return Err(Error::Degenerate(
            "variance explained undefined: masked original is all zero".into(),
        ));
    }
    Ok(VeReport {
        value: 100.0 * (1.0 - numerator / denominator),
        numerator,
        denominator,
        rows_used,
    })
}

/// Average number of nonzero weights per column.
///
/// An entry counts as zero iff it is stored as exactly zero; the path
/// encoder produces exact zeros for inactive atoms, so no thresholding is
/// applied.
pub fn mean_components(weights: &Array2<f64>) -> Result<f64> {
    let m = weights.ncols();
    if m == 0 {
        return Err(Error::InvalidInput("mean components of an empty matrix".into()));
    }
    let nonzeros: usize = weights.iter().filter(|&&v| v != 0.0).count();
    Ok(nonzeros as f64 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    #[test]
    fn perfect_reconstruction_scores_100() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let report = variance_explained(&x, &x, &[true, true]).unwrap();
        assert_eq!(report.value, 100.0);
        assert_eq!(report.rows_used, 2);
    }

    #[test]
    fn zero_reconstruction_scores_0() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let zero = Array2::zeros((2, 2));
        let report = variance_explained(&x, &zero, &[true, true]).unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn hand_computed_case() {
        let original = array![[3.0], [4.0]];
        let reconstruction = array![[3.0], [0.0]];
        let report = variance_explained(&original, &reconstruction, &[true, true]).unwrap();
        assert_eq!(report.numerator, 16.0);
        assert_eq!(report.denominator, 25.0);
        assert_eq!(report.value, 36.0);
    }

    #[test]
    fn masked_rows_are_excluded() {
        let original = array![[3.0], [4.0]];
        let reconstruction = array![[3.0], [999.0]];
        let report = variance_explained(&original, &reconstruction, &[true, false]).unwrap();
        assert_eq!(report.value, 100.0);
        assert_eq!(report.rows_used, 1);
    }

    #[test]
    fn zero_denominator_is_an_error() {
        let original = array![[0.0], [4.0]];
        let reconstruction = array![[0.0], [4.0]];
        assert!(variance_explained(&original, &reconstruction, &[true, false]).is_err());
    }

    #[test]
    fn dense_matrix_counts_every_row() {
        let w = Array2::from_elem((5, 3), 1.5);
        assert_eq!(mean_components(&w).unwrap(), 5.0);
    }

    #[test]
    fn zero_matrix_counts_nothing() {
        let w = Array2::zeros((5, 3));
        assert_eq!(mean_components(&w).unwrap(), 0.0);
    }

    #[test]
    fn mixed_counts_average() {
        let mut w = Array2::zeros((3, 3));
        w[(0, 0)] = 1.0;
        w[(0, 1)] = 1.0;
        w[(1, 1)] = 1.0;
        w[(0, 2)] = 1.0;
        w[(1, 2)] = 1.0;
        w[(2, 2)] = 1.0;
        assert_eq!(mean_components(&w).unwrap(), 2.0);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let w = Array2::zeros((3, 0));
        assert!(mean_components(&w).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ve_is_scale_invariant(
            entries in proptest::collection::vec(-5.0..5.0f64, 12),
            recon in proptest::collection::vec(-5.0..5.0f64, 12),
            scale in proptest::sample::select(vec![-3.0, 0.25, 1.0, 7.5]),
        ) {
            let x = Array2::from_shape_vec((4, 3), entries).unwrap();
            let y = Array2::from_shape_vec((4, 3), recon).unwrap();
            prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-6);
            let mask = [true, true, true, true];
            let base = variance_explained(&x, &y, &mask).unwrap();
            let scaled =
                variance_explained(&(&x * scale), &(&y * scale), &mask).unwrap();
            prop_assert!((base.value - scaled.value).abs() < 1e-9);
        }
    }
}
