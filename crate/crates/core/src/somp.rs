//! Simultaneous orthogonal matching pursuit: greedy joint-sparse recovery
//! used as the comparison baseline and as an exact-recovery oracle on easy
//! instances. The caller supplies the sparsity order.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::signal::{Measurement, SpectrumMatrix};

#[derive(Debug, Clone)]
pub struct SompResult {
    /// Selected row indices, sorted ascending.
    pub support: Vec<usize>,
    /// Recovered spectrum, exactly zero outside the support.
    pub spectrum: SpectrumMatrix,
    /// Frobenius norm of the final residual Y − A·X̂.
    pub residual_norm: f64,
    /// Residual norm after each greedy step.
    pub residual_history: Vec<f64>,
}

/// Solve (A^H A + ridge·I) X = A^H B by Gaussian elimination with partial
/// pivoting; the ridge tolerates near-collinear coset patterns.
fn ridge_least_squares(
    a: &Array2<Complex64>,
    b: &Array2<Complex64>,
    ridge: f64,
) -> Result<Array2<Complex64>> {
    let cols = a.ncols();
    let rhs_cols = b.ncols();

    let mut gram = Array2::from_elem((cols, cols), Complex64::ZERO);
    for i in 0..cols {
        for j in 0..cols {
            let mut acc = Complex64::ZERO;
            for p in 0..a.nrows() {
                acc += a[[p, i]].conj() * a[[p, j]];
            }
            if i == j {
                acc += Complex64::new(ridge, 0.0);
            }
            gram[[i, j]] = acc;
        }
    }
    let mut rhs = Array2::from_elem((cols, rhs_cols), Complex64::ZERO);
    for i in 0..cols {
        for n in 0..rhs_cols {
            let mut acc = Complex64::ZERO;
            for p in 0..a.nrows() {
                acc += a[[p, i]].conj() * b[[p, n]];
            }
            rhs[[i, n]] = acc;
        }
    }

    for col in 0..cols {
        let pivot = (col..cols)
            .max_by(|&x, &y| {
                gram[[x, col]]
                    .norm_sqr()
                    .partial_cmp(&gram[[y, col]].norm_sqr())
                    .expect("finite pivots")
            })
            .expect("non-empty pivot range");
        if gram[[pivot, col]].norm_sqr() == 0.0 {
            return Err(CoreError::Dimension(
                "singular system in least squares".to_string(),
            ));
        }
        if pivot != col {
            for j in 0..cols {
                gram.swap([pivot, j], [col, j]);
            }
            for n in 0..rhs_cols {
                rhs.swap([pivot, n], [col, n]);
            }
        }
        let diag = gram[[col, col]];
        for row in (col + 1)..cols {
            let factor = gram[[row, col]] / diag;
            if factor == Complex64::ZERO {
                continue;
            }
            for j in col..cols {
                let upper = gram[[col, j]];
                gram[[row, j]] -= factor * upper;
            }
            for n in 0..rhs_cols {
                let upper = rhs[[col, n]];
                rhs[[row, n]] -= factor * upper;
            }
        }
    }
    let mut solution = Array2::from_elem((cols, rhs_cols), Complex64::ZERO);
    for row in (0..cols).rev() {
        for n in 0..rhs_cols {
            let mut acc = rhs[[row, n]];
            for j in (row + 1)..cols {
                acc -= gram[[row, j]] * solution[[j, n]];
            }
            solution[[row, n]] = acc / gram[[row, row]];
        }
    }
    Ok(solution)
}

fn frobenius(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Run SOMP for exactly `sparsity` iterations: pick the column of A with
/// the largest summed correlation magnitude against the residual, then
/// jointly re-solve least squares on the selected support.
pub fn somp(measurement: &Measurement, sparsity: usize) -> Result<SompResult> {
    let a = &measurement.sensing;
    let y = &measurement.observed;
    let (p, l) = a.dim();
    let n = y.ncols();
    if sparsity == 0 || sparsity > p {
        return Err(CoreError::Config(format!(
            "sparsity must lie in [1, {p}], got {sparsity}"
        )));
    }

    let mut support: Vec<usize> = Vec::with_capacity(sparsity);
    let mut residual = y.clone();
    let mut residual_history = Vec::with_capacity(sparsity);
    let mut coeffs = Array2::from_elem((0, 0), Complex64::ZERO);

    for _ in 0..sparsity {
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for col in 0..l {
            if support.contains(&col) {
                continue;
            }
            let mut score = 0.0;
            for nn in 0..n {
                let mut acc = Complex64::ZERO;
                for row in 0..p {
                    acc += a[[row, col]].conj() * residual[[row, nn]];
                }
                score += acc.norm();
            }
            if score > best_score {
                best_score = score;
                best = Some(col);
            }
        }
        support.push(best.expect("at least one unselected column remains"));

        let sub = Array2::from_shape_fn((p, support.len()), |(row, j)| a[[row, support[j]]]);
        coeffs = ridge_least_squares(&sub, y, 1e-12)?;
        residual = y - &sub.dot(&coeffs);
        residual_history.push(frobenius(&residual));
    }

    let mut spectrum = Array2::from_elem((l, n), Complex64::ZERO);
    for (j, &row) in support.iter().enumerate() {
        for nn in 0..n {
            spectrum[[row, nn]] = coeffs[[j, nn]];
        }
    }
    support.sort_unstable();

    Ok(SompResult {
        support,
        spectrum,
        residual_norm: *residual_history.last().expect("sparsity >= 1"),
        residual_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::signal::{measure, sensing_matrix, synthesize_signal, BandSpec, CosetSampler};

    fn instance(p: usize, bands: &[BandSpec], seed: u64) -> Measurement {
        let sampler = CosetSampler::random(40, p, 16, &mut RngStream::new(seed, 0)).unwrap();
        let sig = synthesize_signal(bands, &sampler, &mut RngStream::new(seed, 1)).unwrap();
        measure(&sig, &sampler, None, &mut RngStream::new(seed, 2)).unwrap()
    }

    #[test]
    fn recovers_single_active_row() {
        let bands = [BandSpec { start_bin: 13, end_bin: 13, power_dbm: -70.0 }];
        let m = instance(16, &bands, 41);
        let result = somp(&m, 1).unwrap();
        assert_eq!(result.support, vec![13]);
        assert!(result.residual_norm < 1e-9 * frobenius(&m.observed).max(1.0));
    }

    #[test]
    fn recovers_three_band_support() {
        let bands = [
            BandSpec { start_bin: 5, end_bin: 5, power_dbm: -70.0 },
            BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
            BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
        ];
        let m = instance(16, &bands, 42);
        let result = somp(&m, 3).unwrap();
        assert_eq!(result.support, vec![5, 18, 33]);
    }

    #[test]
    fn zero_measurement_stays_zero() {
        let m = instance(16, &[], 43);
        let result = somp(&m, 4).unwrap();
        assert!(result.residual_norm == 0.0);
        assert!(result.spectrum.iter().all(|v| v.norm() == 0.0));
        assert_eq!(result.support.len(), 4);
    }

    #[test]
    fn residual_is_non_increasing_per_step() {
        let bands = [
            BandSpec { start_bin: 2, end_bin: 3, power_dbm: -70.0 },
            BandSpec { start_bin: 20, end_bin: 20, power_dbm: -71.0 },
        ];
        let m = instance(10, &bands, 44);
        let result = somp(&m, 6).unwrap();
        for w in result.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "history {:?}", result.residual_history);
        }
    }

    #[test]
    fn residual_is_orthogonal_to_selected_columns() {
        let bands = [
            BandSpec { start_bin: 8, end_bin: 8, power_dbm: -70.0 },
            BandSpec { start_bin: 25, end_bin: 25, power_dbm: -73.0 },
        ];
        let m = instance(10, &bands, 45);
        let result = somp(&m, 4).unwrap();

        let residual = &m.observed - &m.sensing.dot(&result.spectrum);
        let scale = frobenius(&m.observed).max(1.0);
        for &col in &result.support {
            for nn in 0..m.observed.ncols() {
                let mut acc = Complex64::ZERO;
                for row in 0..m.observed.nrows() {
                    acc += m.sensing[[row, col]].conj() * residual[[row, nn]];
                }
                assert!(acc.norm() / scale < 1e-10, "column {col}: {acc}");
            }
        }
    }

    #[test]
    fn sparsity_above_coset_count_rejected() {
        let m = instance(10, &[], 46);
        assert!(matches!(somp(&m, 11), Err(CoreError::Config(_))));
        assert!(matches!(somp(&m, 0), Err(CoreError::Config(_))));
    }

    #[test]
    fn square_sensing_matrix_least_squares_is_exact() {
        // With all L cosets the gram system is well conditioned; the ridge
        // must not disturb the solution beyond 1e-10.
        let sampler = CosetSampler::new(12, (0..12).collect(), 6).unwrap();
        let a = sensing_matrix(&sampler);
        let mut rng = RngStream::new(47, 0);
        let x = Array2::from_shape_fn((12, 6), |_| Complex64::new(rng.normal(), rng.normal()));
        let y = a.dot(&x);
        let solved = ridge_least_squares(&a, &y, 1e-12).unwrap();
        let max_err = solved
            .iter()
            .zip(x.iter())
            .map(|(s, t)| (s - t).norm())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-10, "max err {max_err}");
    }
}
