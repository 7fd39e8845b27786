//! Evaluation suite: MSE/NMSE, PSNR over the truth's dynamic range, SSIM
//! with uniform 8×8 windows, and the cumulative singular-value energy curve.

use ndarray::{ArrayView2, ArrayView3, ArrayViewD};
use serde::Serialize;

use crate::error::{CoreError, Result};

pub const SSIM_WINDOW: usize = 8;

/// Aggregate quality of a reconstruction against its ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    pub mse: f64,
    pub nmse: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    /// (slice index, psnr_db, ssim) per horizontal slice for 3-D inputs.
    pub per_slice: Vec<SliceQuality>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceQuality {
    pub slice: usize,
    pub psnr_db: f64,
    pub ssim: f64,
}

impl QualityReport {
    pub fn csv_header() -> &'static str {
        "mse,nmse,psnr_db,ssim"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.mse, self.nmse, self.psnr_db, self.ssim)
    }
}

fn check_same_dims(a: &ArrayViewD<'_, f64>, b: &ArrayViewD<'_, f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(CoreError::Dimension(format!(
            "shape {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Mean of squared elementwise differences.
pub fn mse(a: ArrayViewD<'_, f64>, b: ArrayViewD<'_, f64>) -> Result<f64> {
    check_same_dims(&a, &b)?;
    let n = a.len() as f64;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n)
}

/// MSE normalized by the mean squared magnitude of the reference `b`.
pub fn nmse(a: ArrayViewD<'_, f64>, b: ArrayViewD<'_, f64>) -> Result<f64> {
    let raw = mse(a.view(), b.view())?;
    let denom = b.iter().map(|v| v * v).sum::<f64>() / b.len() as f64;
    if denom == 0.0 {
        return Err(CoreError::Config("reference tensor is identically zero".to_string()));
    }
    Ok(raw / denom)
}

/// 10·log10(DR²/mse) with DR the truth's max−min; +∞ iff mse is zero.
pub fn psnr(recon: ArrayViewD<'_, f64>, truth: ArrayViewD<'_, f64>) -> Result<f64> {
    check_same_dims(&recon, &truth)?;
    let max = truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = truth.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range == 0.0 {
        return Err(CoreError::Config(
            "psnr undefined for a constant ground truth".to_string(),
        ));
    }
    let err = mse(recon, truth)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (range * range / err).log10())
}

/// Mean local SSIM over sliding 8×8 windows (stride 1), with the usual
/// C1 = (0.01·DR)², C2 = (0.03·DR)² constants; DR comes from the truth.
pub fn ssim(recon: ArrayView2<'_, f64>, truth: ArrayView2<'_, f64>) -> Result<f64> {
    if recon.dim() != truth.dim() {
        return Err(CoreError::Dimension(format!(
            "shape {:?} vs {:?}",
            recon.dim(),
            truth.dim()
        )));
    }
    let (rows, cols) = truth.dim();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(CoreError::Dimension(format!(
            "slice {rows}×{cols} smaller than the {SSIM_WINDOW}×{SSIM_WINDOW} window"
        )));
    }

    let max = truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = truth.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    let c1 = (0.01 * range) * (0.01 * range);
    let c2 = (0.03 * range) * (0.03 * range);

    let win = SSIM_WINDOW;
    let inv_n = 1.0 / (win * win) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=(rows - win) {
        for c0 in 0..=(cols - win) {
            let mut sum_a = 0.0;
            let mut sum_b = 0.0;
            let mut sum_aa = 0.0;
            let mut sum_bb = 0.0;
            let mut sum_ab = 0.0;
            for r in r0..r0 + win {
                for c in c0..c0 + win {
                    let a = recon[[r, c]];
                    let b = truth[[r, c]];
                    sum_a += a;
                    sum_b += b;
                    sum_aa += a * a;
                    sum_bb += b * b;
                    sum_ab += a * b;
                }
            }
            let mu_a = sum_a * inv_n;
            let mu_b = sum_b * inv_n;
            let var_a = sum_aa * inv_n - mu_a * mu_a;
            let var_b = sum_bb * inv_n - mu_b * mu_b;
            let cov = sum_ab * inv_n - mu_a * mu_b;
            let value = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2))
                / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            total += value;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// 3-D tensors score as the mean SSIM over horizontal (mode-3) slices.
pub fn ssim_3d(recon: ArrayView3<'_, f64>, truth: ArrayView3<'_, f64>) -> Result<f64> {
    if recon.dim() != truth.dim() {
        return Err(CoreError::Dimension(format!(
            "shape {:?} vs {:?}",
            recon.dim(),
            truth.dim()
        )));
    }
    let k = truth.dim().2;
    let mut total = 0.0;
    for slice in 0..k {
        total += ssim(
            recon.index_axis(ndarray::Axis(2), slice),
            truth.index_axis(ndarray::Axis(2), slice),
        )?;
    }
    Ok(total / k as f64)
}

/// Partial-sum ratios T_i = Σ_{k≤i} σ_k / Σ σ_k of a descending
/// nonnegative singular-value list.
pub fn cumulative_energy(singular_values: &[f64]) -> Result<Vec<f64>> {
    if singular_values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(CoreError::NonFinite(
            "singular values must be finite and nonnegative".to_string(),
        ));
    }
    if singular_values.windows(2).any(|w| w[0] < w[1]) {
        return Err(CoreError::Config("singular values must be descending".to_string()));
    }
    let total: f64 = singular_values.iter().sum();
    if total == 0.0 {
        return Err(CoreError::Config("all singular values are zero".to_string()));
    }
    let mut acc = 0.0;
    Ok(singular_values
        .iter()
        .map(|v| {
            acc += v;
            acc / total
        })
        .collect())
}

/// Full report for a 3-D reconstruction: overall metrics plus per-slice
/// PSNR/SSIM down the vertical axis.
pub fn quality_report(recon: ArrayView3<'_, f64>, truth: ArrayView3<'_, f64>) -> Result<QualityReport> {
    let mse_v = mse(recon.view().into_dyn(), truth.view().into_dyn())?;
    let nmse_v = nmse(recon.view().into_dyn(), truth.view().into_dyn())?;
    let psnr_v = psnr(recon.view().into_dyn(), truth.view().into_dyn())?;
    let ssim_v = ssim_3d(recon.view(), truth.view())?;

    let mut per_slice = Vec::with_capacity(truth.dim().2);
    for slice in 0..truth.dim().2 {
        let r2 = recon.index_axis(ndarray::Axis(2), slice);
        let t2 = truth.index_axis(ndarray::Axis(2), slice);
        per_slice.push(SliceQuality {
            slice,
            psnr_db: psnr(r2.into_dyn(), t2.into_dyn())?,
            ssim: ssim(r2, t2)?,
        });
    }
    Ok(QualityReport {
        mse: mse_v,
        nmse: nmse_v,
        psnr_db: psnr_v,
        ssim: ssim_v,
        per_slice,
    })
}
