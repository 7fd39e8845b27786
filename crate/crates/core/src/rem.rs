//! Ground-truth radio-map simulation: per-beam power-law path loss with
//! height-dependent correlated log-normal shadowing, plus sparse sensor
//! masks and the orthogonal projection they induce.
//!
//! Shadowing fields are stationary Gaussian with exponential
//! autocovariance σ²·exp(−d/X_c), sampled exactly (up to the eigenvalue
//! clamp) by circulant embedding on a doubled grid.

use ndarray::{Array2, Array3, ArrayView3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::drmt::DenseTensor;
use crate::error::{CoreError, Result};
use crate::rng::RngStream;

/// One satellite narrow beam: grid-coordinate footprint center, power-law
/// exponent, peak level, and the frequency bin it occupies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BeamSpec {
    pub center: (f64, f64),
    pub path_loss_exponent: f64,
    pub peak_rss_dbm: f64,
    pub band_index: usize,
}

/// Vertical shadowing schedule: σ interpolates linearly from the top
/// slice down to the bottom slice; X_c is shared.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShadowSpec {
    pub sigma_top_db: f64,
    pub sigma_bottom_db: f64,
    pub decorrelation_cells: f64,
}

/// Observed-index set Ω over an I×J×K grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMask {
    indices: Vec<(usize, usize, usize)>,
    dims: (usize, usize, usize),
}

impl SampleMask {
    pub fn new(mut indices: Vec<(usize, usize, usize)>, dims: (usize, usize, usize)) -> Result<Self> {
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(CoreError::Config("mask indices must be unique".to_string()));
        }
        if indices
            .iter()
            .any(|&(i, j, k)| i >= dims.0 || j >= dims.1 || k >= dims.2)
        {
            return Err(CoreError::Config("mask index out of range".to_string()));
        }
        Ok(Self { indices, dims })
    }

    pub fn indices(&self) -> &[(usize, usize, usize)] {
        &self.indices
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// 0/1 indicator tensor, the persistence form of the mask.
    pub fn to_indicator(&self) -> Array3<f64> {
        let mut m = Array3::zeros(self.dims);
        for &(i, j, k) in &self.indices {
            m[[i, j, k]] = 1.0;
        }
        m
    }

    pub fn from_indicator(indicator: ArrayView3<'_, f64>) -> Result<Self> {
        let mut indices = Vec::new();
        for ((i, j, k), &v) in indicator.indexed_iter() {
            if v == 1.0 {
                indices.push((i, j, k));
            } else if v != 0.0 {
                return Err(CoreError::Config(format!(
                    "indicator entries must be 0 or 1, found {v}"
                )));
            }
        }
        Self::new(indices, indicator.dim())
    }

    pub fn to_dense_tensor(&self) -> DenseTensor {
        DenseTensor::from_array3(self.to_indicator().view())
    }
}

/// Stack of per-frequency 3-D RSS maps (dBm).
#[derive(Debug, Clone, PartialEq)]
pub struct Rem4D {
    maps: Vec<Array3<f64>>,
}

impl Rem4D {
    pub fn new(maps: Vec<Array3<f64>>) -> Result<Self> {
        if maps.is_empty() {
            return Err(CoreError::Config("need at least one frequency bin".to_string()));
        }
        let dims = maps[0].dim();
        if maps.iter().any(|m| m.dim() != dims) {
            return Err(CoreError::Dimension(
                "all frequency bins must share spatial dims".to_string(),
            ));
        }
        Ok(Self { maps })
    }

    pub fn num_bins(&self) -> usize {
        self.maps.len()
    }

    pub fn spatial_dims(&self) -> (usize, usize, usize) {
        self.maps[0].dim()
    }

    pub fn bin(&self, index: usize) -> &Array3<f64> {
        &self.maps[index]
    }

    pub fn bins(&self) -> &[Array3<f64>] {
        &self.maps
    }

    /// Pack as an N_f×I×J×K real tensor.
    pub fn to_dense_tensor(&self) -> DenseTensor {
        let (i, j, k) = self.spatial_dims();
        let mut flat = Vec::with_capacity(self.maps.len() * i * j * k);
        for m in &self.maps {
            flat.extend(m.iter());
        }
        DenseTensor::from_real(vec![self.maps.len(), i, j, k], flat)
            .expect("dims match construction")
    }

    pub fn from_dense_tensor(t: &DenseTensor) -> Result<Self> {
        let arr = t.to_real_array()?;
        let dims = arr.shape().to_vec();
        if dims.len() != 4 {
            return Err(CoreError::Dimension(format!(
                "expected a 4-D tensor, found {dims:?}"
            )));
        }
        let maps = (0..dims[0])
            .map(|f| {
                arr.index_axis(Axis(0), f)
                    .to_owned()
                    .into_dimensionality()
                    .expect("sliced to 3-D")
            })
            .collect();
        Self::new(maps)
    }
}

fn fft2_inplace(data: &mut Array2<Complex64>, inverse: bool) {
    let (rows, cols) = data.dim();
    let mut planner = FftPlanner::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(cols)
    } else {
        planner.plan_fft_forward(cols)
    };
    let mut buf = vec![Complex64::ZERO; cols];
    for mut row in data.rows_mut() {
        buf.iter_mut().zip(row.iter()).for_each(|(b, v)| *b = *v);
        row_fft.process(&mut buf);
        row.iter_mut().zip(buf.iter()).for_each(|(v, b)| *v = *b);
    }
    let col_fft = if inverse {
        planner.plan_fft_inverse(rows)
    } else {
        planner.plan_fft_forward(rows)
    };
    let mut buf = vec![Complex64::ZERO; rows];
    for j in 0..cols {
        for i in 0..rows {
            buf[i] = data[[i, j]];
        }
        col_fft.process(&mut buf);
        for i in 0..rows {
            data[[i, j]] = buf[i];
        }
    }
}

/// Zero-mean stationary Gaussian field with covariance σ²·exp(−d/X_c) on
/// an I×J grid, via circulant embedding on the doubled torus. Negative
/// embedding eigenvalues are clamped to zero (warned when material).
pub fn gaussian_field(
    dims: (usize, usize),
    sigma: f64,
    decorrelation: f64,
    rng: &mut RngStream,
) -> Result<Array2<f64>> {
    if sigma < 0.0 {
        return Err(CoreError::Config("sigma must be nonnegative".to_string()));
    }
    if decorrelation <= 0.0 {
        return Err(CoreError::Config("decorrelation distance must be positive".to_string()));
    }
    let (rows, cols) = dims;
    if rows == 0 || cols == 0 {
        return Err(CoreError::Config("field dims must be positive".to_string()));
    }
    if sigma == 0.0 {
        return Ok(Array2::zeros(dims));
    }

    let tr = 2 * rows;
    let tc = 2 * cols;
    let mut kernel = Array2::from_elem((tr, tc), Complex64::ZERO);
    for i in 0..tr {
        for j in 0..tc {
            let di = i.min(tr - i) as f64;
            let dj = j.min(tc - j) as f64;
            let d = (di * di + dj * dj).sqrt();
            kernel[[i, j]] = Complex64::new(sigma * sigma * (-d / decorrelation).exp(), 0.0);
        }
    }
    fft2_inplace(&mut kernel, false);

    let lambda_max = kernel.iter().map(|v| v.re).fold(0.0, f64::max);
    let lambda_min = kernel.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    if lambda_min < -1e-6 * lambda_max {
        eprintln!(
            "warning: circulant embedding produced negative eigenvalues (min {lambda_min:.3e}); clamping"
        );
    }

    let total = (tr * tc) as f64;
    let mut spectral = Array2::from_elem((tr, tc), Complex64::ZERO);
    for i in 0..tr {
        for j in 0..tc {
            let lambda = kernel[[i, j]].re.max(0.0);
            let noise = Complex64::new(rng.normal(), rng.normal());
            spectral[[i, j]] = noise * (lambda / total).sqrt();
        }
    }
    fft2_inplace(&mut spectral, false);

    Ok(Array2::from_shape_fn(dims, |(i, j)| spectral[[i, j]].re))
}

/// Per-bin RSS maps: linear-domain sum over the bin's beams of
/// scale·d^(−γ)·10^(v/10), then converted to dBm. The path-loss scale puts
/// each beam center at `peak_rss_dbm` before shadowing; distance is
/// clamped to one grid cell at the singularity.
pub fn generate_rem(
    beams: &[BeamSpec],
    shadow: &ShadowSpec,
    dims: (usize, usize, usize),
    num_bins: usize,
    rng_master: u64,
) -> Result<Rem4D> {
    if beams.is_empty() {
        return Err(CoreError::Config("need at least one beam".to_string()));
    }
    if num_bins == 0 {
        return Err(CoreError::Config("need at least one frequency bin".to_string()));
    }
    let (rows, cols, height) = dims;
    if rows == 0 || cols == 0 || height == 0 {
        return Err(CoreError::Config("map dims must be positive".to_string()));
    }
    for (idx, beam) in beams.iter().enumerate() {
        if beam.path_loss_exponent <= 0.0 {
            return Err(CoreError::Config(format!(
                "beam {idx}: path-loss exponent must be positive"
            )));
        }
        if beam.center.0 < 0.0
            || beam.center.1 < 0.0
            || beam.center.0 >= rows as f64
            || beam.center.1 >= cols as f64
        {
            return Err(CoreError::Config(format!("beam {idx}: center outside grid")));
        }
        if beam.band_index >= num_bins {
            return Err(CoreError::Config(format!(
                "beam {idx}: band index {} out of {num_bins} bins",
                beam.band_index
            )));
        }
    }
    if shadow.sigma_top_db < 0.0 || shadow.sigma_bottom_db < 0.0 {
        return Err(CoreError::Config("shadowing sigma must be nonnegative".to_string()));
    }

    let mut maps = Vec::with_capacity(num_bins);
    for bin in 0..num_bins {
        let bin_beams: Vec<(usize, &BeamSpec)> = beams
            .iter()
            .enumerate()
            .filter(|(_, b)| b.band_index == bin)
            .collect();
        if bin_beams.is_empty() {
            return Err(CoreError::Config(format!("frequency bin {bin} has no beams")));
        }

        let mut map = Array3::zeros(dims);
        for k in 0..height {
            // Top slice (k = 0) is the highest altitude with the weakest
            // shadowing; σ grows linearly toward the bottom slice.
            let frac = if height == 1 { 0.0 } else { k as f64 / (height - 1) as f64 };
            let sigma = shadow.sigma_top_db + (shadow.sigma_bottom_db - shadow.sigma_top_db) * frac;

            let mut linear = Array2::<f64>::zeros((rows, cols));
            for (beam_idx, beam) in &bin_beams {
                let stream_id = ((bin * height + k) * beams.len() + beam_idx) as u64;
                let mut rng = RngStream::new(rng_master, stream_id);
                let field = gaussian_field((rows, cols), sigma, shadow.decorrelation_cells, &mut rng)?;
                let scale = 10f64.powf(beam.peak_rss_dbm / 10.0);
                for i in 0..rows {
                    for j in 0..cols {
                        let di = i as f64 - beam.center.0;
                        let dj = j as f64 - beam.center.1;
                        let dist = (di * di + dj * dj).sqrt().max(1.0);
                        let shadow_factor = 10f64.powf(field[[i, j]] / 10.0);
                        linear[[i, j]] +=
                            scale * dist.powf(-beam.path_loss_exponent) * shadow_factor;
                    }
                }
            }
            for i in 0..rows {
                for j in 0..cols {
                    map[[i, j, k]] = 10.0 * linear[[i, j]].log10();
                }
            }
        }
        maps.push(map);
    }
    Rem4D::new(maps)
}

/// Uniform random subset of exactly round((1−missing_rate)·I·J·K) indices.
pub fn sample_mask(
    dims: (usize, usize, usize),
    missing_rate: f64,
    rng: &mut RngStream,
) -> Result<SampleMask> {
    if !(0.0..1.0).contains(&missing_rate) {
        return Err(CoreError::Config(format!(
            "missing rate must lie in [0, 1), got {missing_rate}"
        )));
    }
    let total = dims.0 * dims.1 * dims.2;
    let keep = ((1.0 - missing_rate) * total as f64).round() as usize;
    let flat = rng.sample_indices(total, keep);
    let indices = flat
        .into_iter()
        .map(|f| {
            let i = f / (dims.1 * dims.2);
            let j = (f / dims.2) % dims.1;
            let k = f % dims.2;
            (i, j, k)
        })
        .collect();
    SampleMask::new(indices, dims)
}

/// Orthogonal projection onto the observed set: entries outside Ω are zeroed.
pub fn project(t: ArrayView3<'_, f64>, mask: &SampleMask) -> Result<Array3<f64>> {
    if t.dim() != mask.dims() {
        return Err(CoreError::Dimension(format!(
            "tensor dims {:?} do not match mask dims {:?}",
            t.dim(),
            mask.dims()
        )));
    }
    let mut out = Array3::zeros(t.dim());
    for &(i, j, k) in mask.indices() {
        out[[i, j, k]] = t[[i, j, k]];
    }
    Ok(out)
}

/// Scenario description consumed by the simulator and the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub dims: [usize; 3],
    pub num_freq_bins: usize,
    pub beams: Vec<BeamSpec>,
    pub shadow: ShadowSpec,
    pub missing_rate: f64,
    /// Physical cell size, metadata only.
    pub cell_size_m: [f64; 3],
}

impl ScenarioConfig {
    /// Desk-scale default: 100×100×12 grid at 250 m × 250 m × 10 m,
    /// three frequency bins with two beams each.
    pub fn default_demo() -> Self {
        let mut beams = Vec::new();
        let centers = [
            [(30.0, 35.0), (68.0, 62.0)],
            [(25.0, 70.0), (72.0, 30.0)],
            [(50.0, 20.0), (45.0, 75.0)],
        ];
        for (bin, pair) in centers.iter().enumerate() {
            for &(ci, cj) in pair {
                beams.push(BeamSpec {
                    center: (ci, cj),
                    path_loss_exponent: 2.0,
                    peak_rss_dbm: -70.0,
                    band_index: bin,
                });
            }
        }
        Self {
            dims: [100, 100, 12],
            num_freq_bins: 3,
            beams,
            shadow: ShadowSpec {
                sigma_top_db: 2.0,
                sigma_bottom_db: 8.0,
                decorrelation_cells: 5.0,
            },
            missing_rate: 0.98,
            cell_size_m: [250.0, 250.0, 10.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(CoreError::Config("scenario dims must be positive".to_string()));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(CoreError::Config("missing rate must lie in [0, 1)".to_string()));
        }
        if self.beams.is_empty() {
            return Err(CoreError::Config("scenario needs at least one beam".to_string()));
        }
        Ok(())
    }

    pub fn spatial_dims(&self) -> (usize, usize, usize) {
        (self.dims[0], self.dims[1], self.dims[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_gives_zero_field() {
        let f = gaussian_field((8, 8), 0.0, 5.0, &mut RngStream::new(1, 0)).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn field_moments_match_sigma() {
        let sigma = 3.0;
        let n = 10_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for t in 0..n {
            let f = gaussian_field((12, 12), sigma, 4.0, &mut RngStream::new(2, t)).unwrap();
            let v = f[[5, 7]];
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.05 * sigma, "mean {mean}");
        assert!((var - sigma * sigma).abs() < 0.05 * sigma * sigma, "var {var}");
    }

    #[test]
    fn field_autocorrelation_at_decorrelation_distance() {
        let sigma = 2.0;
        let xc = 3.0;
        let dims = (24, 24);
        let fields: Vec<Array2<f64>> = (0..500)
            .map(|t| gaussian_field(dims, sigma, xc, &mut RngStream::new(3, t)).unwrap())
            .collect();

        // Average E[v(y) v(y+d)] over all horizontal pairs at lag d = X_c.
        let lag = xc as usize;
        let mut acc = 0.0;
        let mut var_acc = 0.0;
        let mut count = 0usize;
        for f in &fields {
            for i in 0..dims.0 {
                for j in 0..(dims.1 - lag) {
                    acc += f[[i, j]] * f[[i, j + lag]];
                    var_acc += f[[i, j]] * f[[i, j]];
                    count += 1;
                }
            }
        }
        let corr = (acc / count as f64) / (var_acc / count as f64);
        let expected = (-1.0f64).exp();
        assert!((corr - expected).abs() < 0.05, "corr {corr} vs {expected}");
    }

    #[test]
    fn path_loss_follows_power_law_without_shadowing() {
        let beams = [BeamSpec {
            center: (40.0, 40.0),
            path_loss_exponent: 2.0,
            peak_rss_dbm: -70.0,
            band_index: 0,
        }];
        let shadow = ShadowSpec {
            sigma_top_db: 0.0,
            sigma_bottom_db: 0.0,
            decorrelation_cells: 5.0,
        };
        let rem = generate_rem(&beams, &shadow, (80, 80, 2), 1, 7).unwrap();
        let map = rem.bin(0);
        let at = |d: usize| map[[40 + d, 40, 0]];
        let drop = at(10) - at(20);
        assert!((drop - 10.0 * 2.0 * 2f64.log10()).abs() < 1e-9, "drop {drop}");
    }

    #[test]
    fn beam_center_hits_peak_without_shadowing() {
        let beams = [BeamSpec {
            center: (12.0, 20.0),
            path_loss_exponent: 2.5,
            peak_rss_dbm: -70.0,
            band_index: 0,
        }];
        let shadow = ShadowSpec {
            sigma_top_db: 0.0,
            sigma_bottom_db: 0.0,
            decorrelation_cells: 5.0,
        };
        let rem = generate_rem(&beams, &shadow, (30, 30, 1), 1, 8).unwrap();
        let map = rem.bin(0);
        let center = map[[12, 20, 0]];
        assert!((center - (-70.0)).abs() < 1e-12);
        let max = map.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((max - (-70.0)).abs() < 1e-12);
    }

    fn small_beams() -> Vec<BeamSpec> {
        vec![
            BeamSpec { center: (4.0, 5.0), path_loss_exponent: 2.0, peak_rss_dbm: -70.0, band_index: 0 },
            BeamSpec { center: (7.0, 2.0), path_loss_exponent: 2.2, peak_rss_dbm: -71.0, band_index: 1 },
        ]
    }

    #[test]
    fn rem_is_deterministic_and_bins_differ() {
        let shadow = ShadowSpec {
            sigma_top_db: 2.0,
            sigma_bottom_db: 8.0,
            decorrelation_cells: 5.0,
        };
        let dims = (10, 10, 4);
        let a = generate_rem(&small_beams(), &shadow, dims, 2, 9).unwrap();
        let b = generate_rem(&small_beams(), &shadow, dims, 2, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.bin(0), a.bin(1));
    }

    #[test]
    fn mask_counts_are_exact() {
        let mask = sample_mask((100, 100, 12), 0.98, &mut RngStream::new(10, 0)).unwrap();
        assert_eq!(mask.len(), 2400);

        let full = sample_mask((5, 4, 3), 0.0, &mut RngStream::new(11, 0)).unwrap();
        assert_eq!(full.len(), 60);

        assert!(sample_mask((5, 4, 3), 1.0, &mut RngStream::new(12, 0)).is_err());
    }

    #[test]
    fn masks_differ_between_seeds() {
        let a = sample_mask((10, 10, 4), 0.9, &mut RngStream::new(13, 0)).unwrap();
        let b = sample_mask((10, 10, 4), 0.9, &mut RngStream::new(14, 0)).unwrap();
        assert_ne!(a.indices(), b.indices());
    }

    #[test]
    fn project_identity_zero_and_idempotent() {
        let mut rng = RngStream::new(15, 0);
        let t = Array3::from_shape_fn((6, 5, 4), |_| rng.normal());

        let full = sample_mask((6, 5, 4), 0.0, &mut rng).unwrap();
        assert_eq!(project(t.view(), &full).unwrap(), t);

        let empty = SampleMask::new(vec![], (6, 5, 4)).unwrap();
        let zeroed = project(t.view(), &empty).unwrap();
        assert!(zeroed.iter().all(|&v| v == 0.0));

        let partial = sample_mask((6, 5, 4), 0.7, &mut rng).unwrap();
        let once = project(t.view(), &partial).unwrap();
        let twice = project(once.view(), &partial).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn project_is_linear() {
        let mut rng = RngStream::new(16, 0);
        let a = Array3::from_shape_fn((4, 4, 3), |_| rng.normal());
        let b = Array3::from_shape_fn((4, 4, 3), |_| rng.normal());
        let mask = sample_mask((4, 4, 3), 0.5, &mut rng).unwrap();
        let lhs = project((&a * 2.0 + &b * -3.0).view(), &mask).unwrap();
        let rhs = project(a.view(), &mask).unwrap() * 2.0 + project(b.view(), &mask).unwrap() * -3.0;
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn project_rejects_dim_mismatch() {
        let t = Array3::<f64>::zeros((3, 3, 3));
        let mask = SampleMask::new(vec![], (3, 3, 2)).unwrap();
        assert!(project(t.view(), &mask).is_err());
    }

    #[test]
    fn mask_round_trips_through_indicator() {
        let mut rng = RngStream::new(17, 0);
        let mask = sample_mask((7, 6, 5), 0.8, &mut rng).unwrap();
        let back = SampleMask::from_indicator(mask.to_indicator().view()).unwrap();
        assert_eq!(mask, back);
    }

    #[test]
    fn rem4d_round_trips_through_dense_tensor() {
        let shadow = ShadowSpec {
            sigma_top_db: 1.0,
            sigma_bottom_db: 4.0,
            decorrelation_cells: 3.0,
        };
        let rem = generate_rem(&small_beams(), &shadow, (10, 10, 3), 2, 18).unwrap();
        let t = rem.to_dense_tensor();
        assert_eq!(t.dims(), &[2, 10, 10, 3]);
        let back = Rem4D::from_dense_tensor(&t).unwrap();
        assert_eq!(rem, back);
    }

    #[test]
    fn default_scenario_svd_energy_ordering() {
        // Top slice is near-low-rank (T5 > 0.9); the heavily shadowed
        // bottom slice is strictly less compressible.
        let cfg = ScenarioConfig::default_demo();
        let rem = generate_rem(
            &cfg.beams,
            &cfg.shadow,
            cfg.spatial_dims(),
            cfg.num_freq_bins,
            42,
        )
        .unwrap();
        let map = rem.bin(0);
        let top = map.index_axis(Axis(2), 0).to_owned();
        let bottom = map.index_axis(Axis(2), map.dim().2 - 1).to_owned();

        let t5 = |slice: &Array2<f64>| {
            let sv = crate::tensor::svd_singular_values(slice.view()).unwrap();
            crate::metrics::cumulative_energy(&sv).unwrap()[4]
        };
        let t5_top = t5(&top);
        let t5_bottom = t5(&bottom);
        assert!(t5_top > 0.9, "top T5 {t5_top}");
        assert!(t5_bottom < t5_top, "bottom {t5_bottom} vs top {t5_top}");
    }
}
