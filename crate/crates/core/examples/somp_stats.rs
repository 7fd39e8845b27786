//! Dev scratch: SOMP support-failure rate and MSE over many trials.

use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, BandSpec, CosetSampler};
use neurem_core::somp::somp;
use rayon::prelude::*;

fn row_power_normalized(x: &ndarray::Array2<num_complex::Complex64>) -> Vec<f64> {
    let e: Vec<f64> = (0..x.nrows())
        .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let peak = e.iter().cloned().fold(0.0, f64::max).max(1e-300);
    e.iter().map(|v| v / peak).collect()
}

fn main() {
    let trials: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(500);
    let plan = [
        BandSpec { start_bin: 5, end_bin: 5, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ];
    for p in [16usize, 10] {
        for snr in [0.0f64, 10.0, 20.0] {
            let stats: Vec<(bool, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let sampler =
                        CosetSampler::random(40, p, 16, &mut RngStream::new(5000 + t, 0)).unwrap();
                    let sig =
                        synthesize_signal(&plan, &sampler, &mut RngStream::new(5000 + t, 1)).unwrap();
                    let m =
                        measure(&sig, &sampler, Some(snr), &mut RngStream::new(5000 + t, 2)).unwrap();
                    let res = somp(&m, 3).unwrap();
                    let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
                    let tp = row_power_normalized(&exact);
                    let sp = row_power_normalized(&res.spectrum);
                    let mse = tp
                        .iter()
                        .zip(sp.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        / 40.0;
                    (res.support == vec![5, 18, 33], mse)
                })
                .collect();
            let fails = stats.iter().filter(|s| !s.0).count();
            let mean_mse: f64 = stats.iter().map(|s| s.1).sum::<f64>() / trials as f64;
            println!(
                "P={p} SNR={snr}: support failures {fails}/{trials}, mean MSE {mean_mse:.3e}"
            );
        }
    }
}
