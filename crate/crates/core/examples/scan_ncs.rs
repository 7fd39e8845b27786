//! Dev scratch: scan NCS schedules for occupancy margin and MSE floor.

use neurem_core::ncs::{ncs_solve, power_spectrum, NcsConfig};
use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, BandSpec, CosetSampler};
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
        .unwrap_or(12);
    let plan = [
        BandSpec { start_bin: 5, end_bin: 5, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ];
    let truth: Vec<bool> = (0..40).map(|l| [5, 18, 33].contains(&l)).collect();

    // (label, tj, tr, decay, width)
    let schedules: Vec<(&str, usize, usize, f64, usize)> = vec![
        ("A tj1500 tr500 d0.996 w128", 1500, 500, 0.996, 128),
        ("B tj2000 tr1000 d0.9975 w128", 2000, 1000, 0.9975, 128),
        ("C tj1000 tr500 d0.994 w128", 1000, 500, 0.994, 128),
        ("D tj2000 tr500 d0.997 w128", 2000, 500, 0.997, 128),
        ("E tj1500 tr500 d0.996 w96", 1500, 500, 0.996, 96),
    ];

    for (label, tj, tr, decay, width) in schedules {
        for (p, snr) in [(10usize, 20.0f64), (10, 0.0), (16, 20.0)] {
            let start = std::time::Instant::now();
            let rows: Vec<(bool, f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let sampler =
                        CosetSampler::random(40, p, 16, &mut RngStream::new(7000 + t, 0)).unwrap();
                    let sig = synthesize_signal(&plan, &sampler, &mut RngStream::new(7000 + t, 1))
                        .unwrap();
                    let m = measure(&sig, &sampler, Some(snr), &mut RngStream::new(7000 + t, 2))
                        .unwrap();
                    let cfg = NcsConfig {
                        iters_joint: tj,
                        iters_recon: tr,
                        lr_decay: decay,
                        hidden: vec![width, width, width],
                        seed: 7000 + t,
                        ..NcsConfig::default()
                    };
                    let sol = ncs_solve(&m, &cfg).unwrap();
                    let ps = power_spectrum(&sol.spectrum, -20.0).unwrap();
                    let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
                    let tp = row_power_normalized(&exact);
                    let np = row_power_normalized(&sol.spectrum);
                    let mse = tp
                        .iter()
                        .zip(np.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        / 40.0;
                    // worst spurious row in dB
                    let spurious = np
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| ![5usize, 18, 33].contains(i))
                        .map(|(_, v)| 10.0 * v.log10())
                        .fold(f64::NEG_INFINITY, f64::max);
                    (ps.occupancy == truth, mse, spurious)
                })
                .collect();
            let ok = rows.iter().filter(|r| r.0).count();
            let mean_mse: f64 = rows.iter().map(|r| r.1).sum::<f64>() / trials as f64;
            let worst_spur = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
            println!(
                "{label} P={p} SNR={snr}: occ {ok}/{trials} mse {mean_mse:.2e} worst-spur {worst_spur:+.1} dB [{:.0}s]",
                start.elapsed().as_secs_f64()
            );
        }
    }
}
