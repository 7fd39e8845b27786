//! Mode-n unfolding, Kronecker and modal products, and a singular-value
//! helper for third-order tensors.
//!
//! Unfolding layout (0-based indices, extents I×J×K):
//!   mode 1: row i, column k*J + j
//!   mode 2: row j, column k*I + i
//!   mode 3: row k, column i*J + j
//! This is the unique layout under which the three matrix identities
//! X_(1) = U1 G_(1) (U3 ⊗ U2)^T, X_(2) = U2 G_(2) (U3 ⊗ U1)^T and
//! X_(3) = U3 G_(3) (U1 ⊗ U2)^T all hold exactly.

use ndarray::{Array2, Array3, ArrayView2, ArrayView3, ArrayViewD};

use crate::error::{CoreError, Result};

/// A tensor flattened along one mode, remembering which mode it was.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedMatrix {
    pub mode: usize,
    pub data: Array2<f64>,
}

fn check_mode(mode: usize) -> Result<()> {
    if (1..=3).contains(&mode) {
        Ok(())
    } else {
        Err(CoreError::Dimension(format!(
            "mode must be 1, 2 or 3, got {mode}"
        )))
    }
}

/// Axis permutation that brings `mode` to the front with the remaining
/// axes ordered so that a C-order reshape yields the documented columns.
fn mode_permutation(mode: usize) -> [usize; 3] {
    match mode {
        1 => [0, 2, 1],
        2 => [1, 2, 0],
        3 => [2, 0, 1],
        _ => unreachable!(),
    }
}

fn inverse_permutation(perm: [usize; 3]) -> [usize; 3] {
    let mut inv = [0usize; 3];
    for (new_axis, &old_axis) in perm.iter().enumerate() {
        inv[old_axis] = new_axis;
    }
    inv
}

/// Unfold a third-order tensor along `mode` (1, 2 or 3).
pub fn unfold(t: ArrayView3<'_, f64>, mode: usize) -> Result<UnfoldedMatrix> {
    check_mode(mode)?;
    let dims = t.dim();
    let extents = [dims.0, dims.1, dims.2];
    let rows = extents[mode - 1];
    let cols = extents.iter().product::<usize>() / rows;

    let perm = mode_permutation(mode);
    let permuted = t.permuted_axes(perm).as_standard_layout().to_owned();
    let data = permuted
        .into_shape_with_order((rows, cols))
        .expect("permuted tensor always reshapes to (rows, cols)");
    Ok(UnfoldedMatrix { mode, data })
}

/// Unfold a dynamic-dimensional tensor, rejecting anything that is not 3-D.
pub fn unfold_dyn(t: ArrayViewD<'_, f64>, mode: usize) -> Result<UnfoldedMatrix> {
    let t3: ArrayView3<'_, f64> = t.into_dimensionality().map_err(|_| {
        CoreError::Dimension("unfold requires a 3-dimensional tensor".to_string())
    })?;
    unfold(t3, mode)
}

/// Fold an unfolded matrix back into a tensor with the given extents.
/// Exact inverse of [`unfold`].
pub fn fold(m: &UnfoldedMatrix, dims: (usize, usize, usize)) -> Result<Array3<f64>> {
    check_mode(m.mode)?;
    let extents = [dims.0, dims.1, dims.2];
    let rows = extents[m.mode - 1];
    let cols = extents.iter().product::<usize>() / rows;
    if m.data.dim() != (rows, cols) {
        return Err(CoreError::Dimension(format!(
            "fold: matrix is {:?} but mode-{} unfolding of {:?} is {:?}",
            m.data.dim(),
            m.mode,
            dims,
            (rows, cols)
        )));
    }

    let perm = mode_permutation(m.mode);
    let permuted_dims = (extents[perm[0]], extents[perm[1]], extents[perm[2]]);
    let permuted = m
        .data
        .clone()
        .into_shape_with_order(permuted_dims)
        .expect("checked shape above");
    let restored = permuted.permuted_axes(inverse_permutation(perm));
    Ok(restored.as_standard_layout().to_owned())
}

/// Kronecker product of two matrices.
pub fn kron(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ia in 0..ar {
        for ja in 0..ac {
            let scale = a[[ia, ja]];
            for ib in 0..br {
                for jb in 0..bc {
                    out[[ia * br + ib, ja * bc + jb]] = scale * b[[ib, jb]];
                }
            }
        }
    }
    out
}

/// Multiply tensor `t` by matrix `u` along `mode`; satisfies
/// `unfold(result, mode) == u · unfold(t, mode)`.
pub fn modal_product(
    t: ArrayView3<'_, f64>,
    u: ArrayView2<'_, f64>,
    mode: usize,
) -> Result<Array3<f64>> {
    check_mode(mode)?;
    let dims = t.dim();
    let extents = [dims.0, dims.1, dims.2];
    if u.ncols() != extents[mode - 1] {
        return Err(CoreError::Dimension(format!(
            "modal product: matrix has {} columns but tensor extent along mode {} is {}",
            u.ncols(),
            mode,
            extents[mode - 1]
        )));
    }
    let unfolded = unfold(t, mode)?;
    let product = u.dot(&unfolded.data);
    let mut new_extents = extents;
    new_extents[mode - 1] = u.nrows();
    fold(
        &UnfoldedMatrix {
            mode,
            data: product,
        },
        (new_extents[0], new_extents[1], new_extents[2]),
    )
}

/// Core tensor expanded through all three factor matrices.
pub fn tucker_to_full(
    core: ArrayView3<'_, f64>,
    u1: ArrayView2<'_, f64>,
    u2: ArrayView2<'_, f64>,
    u3: ArrayView2<'_, f64>,
) -> Result<Array3<f64>> {
    let t = modal_product(core, u1, 1)?;
    let t = modal_product(t.view(), u2, 2)?;
    modal_product(t.view(), u3, 3)
}

/// Singular values of a real matrix, sorted descending.
pub fn svd_singular_values(m: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite(
            "svd input contains NaN or infinity".to_string(),
        ));
    }
    let (rows, cols) = m.dim();
    let na = nalgebra::DMatrix::from_fn(rows, cols, |i, j| m[[i, j]]);
    let mut sv: Vec<f64> = na.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use ndarray::{arr2, Array1};

    fn random_tensor(dims: (usize, usize, usize), rng: &mut RngStream) -> Array3<f64> {
        Array3::from_shape_fn(dims, |_| rng.normal())
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.normal())
    }

    fn max_abs_diff(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn unfold_rank_one_mode_1_is_outer_product() {
        // u∘v∘w unfolded along mode 1 equals u · (w ⊗ v)^T.
        let u = Array1::from_vec(vec![1.0, -2.0, 0.5]);
        let v = Array1::from_vec(vec![3.0, 4.0]);
        let w = Array1::from_vec(vec![-1.0, 2.0, 5.0, 0.25]);
        let t = Array3::from_shape_fn((3, 2, 4), |(i, j, k)| u[i] * v[j] * w[k]);

        let unfolded = unfold(t.view(), 1).unwrap();
        let wv = kron(
            w.view().insert_axis(ndarray::Axis(1)),
            v.view().insert_axis(ndarray::Axis(1)),
        );
        let expected = u
            .view()
            .insert_axis(ndarray::Axis(1))
            .dot(&wv.t());
        assert_eq!(unfolded.data.dim(), (3, 8));
        for (a, b) in unfolded.data.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn unfold_matches_index_formula_oracle() {
        // Brute-force placement of every (i,j,k) through the column formulas.
        let t = Array3::from_shape_fn((2, 2, 2), |(i, j, k)| (4 * i + 2 * j + k + 1) as f64);
        let (big_i, big_j, big_k) = (2usize, 2usize, 2usize);

        let m1 = unfold(t.view(), 1).unwrap();
        let m2 = unfold(t.view(), 2).unwrap();
        let m3 = unfold(t.view(), 3).unwrap();
        for i in 0..big_i {
            for j in 0..big_j {
                for k in 0..big_k {
                    let v = t[[i, j, k]];
                    assert_eq!(m1.data[[i, k * big_j + j]], v);
                    assert_eq!(m2.data[[j, k * big_i + i]], v);
                    assert_eq!(m3.data[[k, i * big_j + j]], v);
                }
            }
        }
    }

    #[test]
    fn fold_unfold_round_trip_all_modes() {
        let mut rng = RngStream::new(11, 0);
        let t = random_tensor((4, 3, 2), &mut rng);
        for mode in 1..=3 {
            let m = unfold(t.view(), mode).unwrap();
            let back = fold(&m, (4, 3, 2)).unwrap();
            assert_eq!(back, t, "mode {mode} round trip");
        }
    }

    #[test]
    fn fold_single_element_round_trip() {
        let t = Array3::from_elem((1, 1, 1), 42.0);
        let m = unfold(t.view(), 2).unwrap();
        assert_eq!(fold(&m, (1, 1, 1)).unwrap(), t);
    }

    #[test]
    fn fold_rejects_mismatched_dims() {
        let t = Array3::<f64>::zeros((2, 3, 4));
        let m = unfold(t.view(), 1).unwrap();
        assert!(matches!(
            fold(&m, (3, 2, 4)),
            Err(CoreError::Dimension(_))
        ));
    }

    #[test]
    fn unfold_dyn_rejects_non_3d() {
        let t = ndarray::ArrayD::<f64>::zeros(ndarray::IxDyn(&[2, 2]));
        assert!(matches!(
            unfold_dyn(t.view(), 1),
            Err(CoreError::Dimension(_))
        ));
    }

    #[test]
    fn kron_identities() {
        let i2 = Array2::<f64>::eye(2);
        let i3 = Array2::<f64>::eye(3);
        assert_eq!(kron(i2.view(), i3.view()), Array2::<f64>::eye(6));

        let b = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let scalar = arr2(&[[2.0]]);
        assert_eq!(kron(scalar.view(), b.view()), &b * 2.0);
    }

    #[test]
    fn kron_matches_four_index_definition() {
        let mut rng = RngStream::new(5, 1);
        let a = random_matrix(2, 3, &mut rng);
        let b = random_matrix(3, 2, &mut rng);
        let k = kron(a.view(), b.view());
        for ia in 0..2 {
            for ja in 0..3 {
                for ib in 0..3 {
                    for jb in 0..2 {
                        let expect = a[[ia, ja]] * b[[ib, jb]];
                        assert_eq!(k[[ia * 3 + ib, ja * 2 + jb]], expect);
                    }
                }
            }
        }
    }

    #[test]
    fn modal_product_identity_and_zero() {
        let mut rng = RngStream::new(6, 2);
        let t = random_tensor((3, 4, 2), &mut rng);
        for (mode, n) in [(1, 3), (2, 4), (3, 2)] {
            let eye = Array2::eye(n);
            let same = modal_product(t.view(), eye.view(), mode).unwrap();
            assert_eq!(same, t);

            let zero = Array2::zeros((n, n));
            let z = modal_product(t.view(), zero.view(), mode).unwrap();
            assert!(z.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn modal_product_rejects_bad_shape() {
        let t = Array3::<f64>::zeros((3, 4, 2));
        let u = Array2::<f64>::zeros((5, 7));
        assert!(matches!(
            modal_product(t.view(), u.view(), 1),
            Err(CoreError::Dimension(_))
        ));
    }

    /// Independent oracle: expand the Tucker model through the mode-n matrix
    /// identities instead of modal products.
    fn tucker_via_matrix_form(
        core: &Array3<f64>,
        u1: &Array2<f64>,
        u2: &Array2<f64>,
        u3: &Array2<f64>,
        mode: usize,
    ) -> Array3<f64> {
        let g = unfold(core.view(), mode).unwrap();
        let (product, v) = match mode {
            1 => (u1, kron(u3.view(), u2.view())),
            2 => (u2, kron(u3.view(), u1.view())),
            3 => (u3, kron(u1.view(), u2.view())),
            _ => unreachable!(),
        };
        let x_mode = product.dot(&g.data).dot(&v.t());
        fold(
            &UnfoldedMatrix {
                mode,
                data: x_mode,
            },
            (u1.nrows(), u2.nrows(), u3.nrows()),
        )
        .unwrap()
    }

    #[test]
    fn tucker_reconstruction_matches_all_matrix_forms() {
        let mut rng = RngStream::new(17, 3);
        let core = random_tensor((2, 3, 2), &mut rng);
        let u1 = random_matrix(4, 2, &mut rng);
        let u2 = random_matrix(5, 3, &mut rng);
        let u3 = random_matrix(3, 2, &mut rng);

        let full = tucker_to_full(core.view(), u1.view(), u2.view(), u3.view()).unwrap();
        for mode in 1..=3 {
            let alt = tucker_via_matrix_form(&core, &u1, &u2, &u3, mode);
            assert!(
                max_abs_diff(&full, &alt) < 1e-12,
                "matrix form disagrees on mode {mode}"
            );
        }
    }

    #[test]
    fn svd_identity_and_diag() {
        let sv = svd_singular_values(Array2::eye(5).view()).unwrap();
        assert_eq!(sv.len(), 5);
        for v in &sv {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let d = arr2(&[[3.0, 0.0], [0.0, 1.0]]);
        let sv = svd_singular_values(d.view()).unwrap();
        assert!((sv[0] - 3.0).abs() < 1e-12 && (sv[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_frobenius_identity() {
        let mut rng = RngStream::new(23, 4);
        let m = random_matrix(6, 4, &mut rng);
        let sv = svd_singular_values(m.view()).unwrap();
        assert_eq!(sv.len(), 4);
        let sum_sq: f64 = sv.iter().map(|v| v * v).sum();
        let frob_sq: f64 = m.iter().map(|v| v * v).sum();
        assert!((sum_sq - frob_sq).abs() <= 1e-10 * frob_sq);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let m = arr2(&[[1.0, f64::NAN]]);
        assert!(matches!(
            svd_singular_values(m.view()),
            Err(CoreError::NonFinite(_))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn tensor_strategy() -> impl Strategy<Value = Array3<f64>> {
            ((1usize..=8, 1usize..=8, 1usize..=8), any::<u64>()).prop_map(|(dims, seed)| {
                let mut rng = RngStream::new(seed, 0);
                Array3::from_shape_fn(dims, |_| rng.uniform() * 20.0 - 10.0)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn fold_unfold_identity(t in tensor_strategy(), mode in 1usize..=3) {
                let dims = t.dim();
                let m = unfold(t.view(), mode).unwrap();
                prop_assert_eq!(fold(&m, dims).unwrap(), t);
            }

            #[test]
            fn modal_product_matches_unfolded_definition(t in tensor_strategy(), mode in 1usize..=3, seed in any::<u64>()) {
                let dims = [t.dim().0, t.dim().1, t.dim().2];
                let mut rng = RngStream::new(seed, 1);
                let u = Array2::from_shape_fn((3, dims[mode - 1]), |_| rng.normal());
                let direct = modal_product(t.view(), u.view(), mode).unwrap();
                let via_unfold = u.dot(&unfold(t.view(), mode).unwrap().data);
                let unfolded_direct = unfold(direct.view(), mode).unwrap().data;
                for (a, b) in unfolded_direct.iter().zip(via_unfold.iter()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
