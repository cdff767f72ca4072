use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Write a dense matrix as comma-separated rows, no header.
///
/// Values are printed in Rust's shortest round-trip form, so
/// [`read_matrix_csv`] recovers them bit for bit.
pub fn write_matrix_csv(matrix: &Array2<f64>, path: &Path) -> Result<()> {
    if let Some(bad) = matrix.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "refusing to write non-finite entry {bad} to {}",
            path.display()
        )));
    }
    let mut out = String::with_capacity(matrix.len() * 8);
    for row in matrix.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|field| {
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(path, lineno + 1, format!("bad number: {e}")))
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("ragged row: expected {w} fields, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    let nrows = rows.len();
    let ncols = width.ok_or_else(|| {
        Error::InvalidInput(format!("empty matrix file {}", path.display()))
    })?;
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::Shape(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eye.csv");
        let m = array![[1.0, 0.0], [0.0, 1.0]];
        write_matrix_csv(&m, &path).unwrap();
        assert_eq!(read_matrix_csv(&path).unwrap(), m);
    }

    #[test]
    fn seeded_random_matrix_round_trips_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = Array2::from_shape_fn((136, 3), |_| rng.random_range(-10.0..10.0_f64));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_csv(&m, &path).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        let max_diff = m
            .iter()
            .zip(back.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert_eq!(max_diff, 0.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1,2,3\n4,5\n").unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        assert!(err.to_string().contains("ragged row"), "{err}");
    }

    #[test]
    fn non_finite_write_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.csv");
        let m = array![[f64::NAN]];
        assert!(write_matrix_csv(&m, &path).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_is_exact(values in proptest::collection::vec(-1e12..1e12_f64, 1..40)) {
            let n = values.len();
            let m = Array2::from_shape_vec((1, n), values).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.csv");
            write_matrix_csv(&m, &path).unwrap();
            let back = read_matrix_csv(&path).unwrap();
            proptest::prop_assert_eq!(m, back);
        }
    }
}
