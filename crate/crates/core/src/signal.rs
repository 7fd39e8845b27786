//! Multiband signal synthesis and multi-coset sub-Nyquist measurement.
//!
//! Index conventions (0-based storage):
//!   - the Nyquist grid holds s[i] = x((i+1)·T), i = 0..L·N;
//!   - spectrum matrix entry X[l, n] is DFT bin k = l·N + n + 1 of the
//!     L·N-point transform, so row l covers sub-band l of width B/L
//!     starting at DC;
//!   - coset stream r takes s at τ = n·L + c_r for n = 1..N, with the
//!     L·N-periodic extension implied by the DFT model.
//! With those conventions a noiseless measurement satisfies Y == A·X
//! exactly (the common physical scalar T is absorbed on both sides).

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CoreError, Result};
use crate::rng::RngStream;

/// Complex spectrum matrix X (L×N), row-sparse when few sub-bands are occupied.
pub type SpectrumMatrix = Array2<Complex64>;

/// One occupied sub-band: inclusive bin range and its power level.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BandSpec {
    pub start_bin: usize,
    pub end_bin: usize,
    pub power_dbm: f64,
}

/// Band-limited test signal on the Nyquist grid.
#[derive(Debug, Clone)]
pub struct WidebandSignal {
    pub nyquist_samples: Vec<Complex64>,
    /// Sensing bandwidth B in Hz (metadata; the math is unit-free).
    pub bandwidth_hz: f64,
    /// Nyquist interval T = 1/(2B) in seconds.
    pub nyquist_interval_s: f64,
    pub band_plan: Vec<BandSpec>,
}

pub const DEFAULT_BANDWIDTH_HZ: f64 = 2.0e9;

/// Multi-coset sampler configuration: P delayed ADCs at 1/L of the
/// Nyquist rate, N samples each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetSampler {
    compression: usize,
    cosets: Vec<usize>,
    samples_per_coset: usize,
}

impl CosetSampler {
    pub fn new(compression: usize, mut cosets: Vec<usize>, samples_per_coset: usize) -> Result<Self> {
        if compression == 0 || samples_per_coset == 0 {
            return Err(CoreError::Config(
                "compression factor and samples per coset must be positive".to_string(),
            ));
        }
        if cosets.is_empty() || cosets.len() > compression {
            return Err(CoreError::Config(format!(
                "need between 1 and {} cosets, got {}",
                compression,
                cosets.len()
            )));
        }
        cosets.sort_unstable();
        if cosets.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::Config("coset offsets must be distinct".to_string()));
        }
        if *cosets.last().unwrap() >= compression {
            return Err(CoreError::Config(format!(
                "coset offsets must lie in [0, {compression})"
            )));
        }
        Ok(Self {
            compression,
            cosets,
            samples_per_coset,
        })
    }

    /// Draw `num_cosets` distinct offsets uniformly from [0, L).
    pub fn random(
        compression: usize,
        num_cosets: usize,
        samples_per_coset: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if num_cosets == 0 || num_cosets > compression {
            return Err(CoreError::Config(format!(
                "need between 1 and {compression} cosets, got {num_cosets}"
            )));
        }
        let cosets = rng.sample_indices(compression, num_cosets);
        Self::new(compression, cosets, samples_per_coset)
    }

    pub fn compression(&self) -> usize {
        self.compression
    }

    pub fn cosets(&self) -> &[usize] {
        &self.cosets
    }

    pub fn num_cosets(&self) -> usize {
        self.cosets.len()
    }

    pub fn samples_per_coset(&self) -> usize {
        self.samples_per_coset
    }

    pub fn grid_len(&self) -> usize {
        self.compression * self.samples_per_coset
    }
}

/// Sub-Nyquist measurement Y with its sensing matrix A.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub observed: Array2<Complex64>,
    pub sensing: Array2<Complex64>,
    pub snr_db: Option<f64>,
    pub noise_seed: u64,
}

impl Measurement {
    pub fn num_cosets(&self) -> usize {
        self.observed.nrows()
    }

    pub fn compression(&self) -> usize {
        self.sensing.ncols()
    }

    pub fn samples_per_coset(&self) -> usize {
        self.observed.ncols()
    }
}

fn check_band_plan(band_plan: &[BandSpec], compression: usize) -> Result<()> {
    let mut sorted: Vec<&BandSpec> = band_plan.iter().collect();
    sorted.sort_by_key(|b| b.start_bin);
    for b in &sorted {
        if b.end_bin < b.start_bin || b.end_bin >= compression {
            return Err(CoreError::Config(format!(
                "band [{}, {}] outside [0, {compression})",
                b.start_bin, b.end_bin
            )));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start_bin <= pair[0].end_bin {
            return Err(CoreError::Config(format!(
                "bands [{}, {}] and [{}, {}] overlap",
                pair[0].start_bin, pair[0].end_bin, pair[1].start_bin, pair[1].end_bin
            )));
        }
    }
    Ok(())
}

/// Sum of random-phase components filling each planned sub-band, built in
/// the frequency domain so the occupancy is exact. Deterministic per seed.
pub fn synthesize_signal(
    band_plan: &[BandSpec],
    sampler: &CosetSampler,
    rng: &mut RngStream,
) -> Result<WidebandSignal> {
    let l = sampler.compression();
    let n = sampler.samples_per_coset();
    check_band_plan(band_plan, l)?;

    let grid = l * n;
    let mut freq = vec![Complex64::ZERO; grid];
    for band in band_plan {
        let amplitude = 10f64.powf(band.power_dbm / 20.0);
        for row in band.start_bin..=band.end_bin {
            for col in 0..n {
                let k = (row * n + col + 1) % grid;
                let phase = std::f64::consts::TAU * rng.uniform();
                freq[k] = Complex64::from_polar(amplitude, phase);
            }
        }
    }

    // s[i] = (1/LN) Σ_k F_k e^{+j2πk(i+1)/LN}: inverse FFT, then shift by one.
    let mut buf = freq;
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    let scale = 1.0 / grid as f64;
    let samples: Vec<Complex64> = (0..grid).map(|i| buf[(i + 1) % grid] * scale).collect();

    let bandwidth = DEFAULT_BANDWIDTH_HZ;
    Ok(WidebandSignal {
        nyquist_samples: samples,
        bandwidth_hz: bandwidth,
        nyquist_interval_s: 1.0 / (2.0 * bandwidth),
        band_plan: band_plan.to_vec(),
    })
}

/// Reindex the L·N-point DFT of the Nyquist samples into the L×N spectrum
/// matrix: X[l, n] = Σ_τ x(τT) e^{−j2π(l·N+n+1)τ/(L·N)}.
pub fn spectrum_of(samples: &[Complex64], l: usize, n: usize) -> Result<SpectrumMatrix> {
    let grid = l * n;
    if samples.len() != grid {
        return Err(CoreError::Dimension(format!(
            "signal length {} does not match L·N = {grid}",
            samples.len()
        )));
    }
    // F_k = Σ_i s[i] e^{−j2πki/LN}; with s[i] = x((i+1)T) the target bin is
    // X_k = e^{−j2πk/LN} F_k.
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);

    Ok(Array2::from_shape_fn((l, n), |(row, col)| {
        let k = row * n + col + 1;
        let twiddle = Complex64::from_polar(1.0, -std::f64::consts::TAU * k as f64 / grid as f64);
        buf[k % grid] * twiddle
    }))
}

/// Sensing matrix A with A[r, l] = e^{j2π c_r l / L} (unit modulus).
pub fn sensing_matrix(sampler: &CosetSampler) -> Array2<Complex64> {
    let l = sampler.compression();
    Array2::from_shape_fn((sampler.num_cosets(), l), |(r, col)| {
        let angle = std::f64::consts::TAU * sampler.cosets()[r] as f64 * col as f64 / l as f64;
        Complex64::from_polar(1.0, angle)
    })
}

/// Per-coset N-point DFT measurement; complex white Gaussian noise is added
/// in the measurement domain to meet `snr_db` when given.
pub fn measure(
    signal: &WidebandSignal,
    sampler: &CosetSampler,
    snr_db: Option<f64>,
    rng: &mut RngStream,
) -> Result<Measurement> {
    let l = sampler.compression();
    let n = sampler.samples_per_coset();
    let grid = l * n;
    if signal.nyquist_samples.len() != grid {
        return Err(CoreError::Dimension(format!(
            "signal length {} does not match L·N = {grid}",
            signal.nyquist_samples.len()
        )));
    }

    let p = sampler.num_cosets();
    let mut observed = Array2::from_elem((p, n), Complex64::ZERO);
    for (r, &coset) in sampler.cosets().iter().enumerate() {
        // x_r[i] = x((i·L + c_r)·T) for i = 1..N, periodic in L·N.
        let stream: Vec<Complex64> = (1..=n)
            .map(|i| signal.nyquist_samples[(i * l + coset + grid - 1) % grid])
            .collect();
        for col in 0..n {
            let freq = (col + 1) as f64;
            let mut acc = Complex64::ZERO;
            for (i0, value) in stream.iter().enumerate() {
                let angle = -std::f64::consts::TAU * freq * (i0 + 1) as f64 / n as f64;
                acc += value * Complex64::from_polar(1.0, angle);
            }
            let twiddle = Complex64::from_polar(
                1.0,
                -std::f64::consts::TAU * coset as f64 * freq / grid as f64,
            );
            observed[[r, col]] = acc * twiddle * l as f64;
        }
    }

    let noise_seed = rng.next_u64();
    if let Some(snr) = snr_db {
        let energy: f64 = observed.iter().map(|v| v.norm_sqr()).sum();
        let noise_var = energy / (p * n) as f64 / 10f64.powf(snr / 10.0);
        let sigma = (noise_var / 2.0).sqrt();
        let mut noise_rng = RngStream::new(noise_seed, 0);
        for v in observed.iter_mut() {
            *v += Complex64::new(sigma * noise_rng.normal(), sigma * noise_rng.normal());
        }
    }

    Ok(Measurement {
        observed,
        sensing: sensing_matrix(sampler),
        snr_db,
        noise_seed,
    })
}

/// Relative Frobenius distance ‖a − b‖_F / ‖b‖_F.
pub fn relative_frobenius(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
