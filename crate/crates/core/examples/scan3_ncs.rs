//! Dev scratch: schedule scan on the 1-row-band scenario, both MSE norms.

use neurem_core::ncs::{ncs_solve, power_spectrum, NcsConfig};
use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, BandSpec, CosetSampler};
use neurem_core::somp::somp;
use rayon::prelude::*;

fn plan() -> Vec<BandSpec> {
    vec![
        BandSpec { start_bin: 5, end_bin: 5, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ]
}

fn powers(x: &ndarray::Array2<num_complex::Complex64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum())
        .collect()
}

fn mse_norm(a: &[f64], b: &[f64], by_sum: bool) -> f64 {
    let na = if by_sum { a.iter().sum::<f64>() } else { a.iter().cloned().fold(0.0, f64::max) }.max(1e-300);
    let nb = if by_sum { b.iter().sum::<f64>() } else { b.iter().cloned().fold(0.0, f64::max) }.max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x / na - y / nb).powi(2)).sum::<f64>() / a.len() as f64
}

fn main() {
    let trials: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(16);
    let truth: Vec<bool> = (0..40).map(|l| [5usize, 18, 33].contains(&l)).collect();
    let schedules: Vec<(&str, usize, usize, f64)> = vec![
        ("S2 1000/300 d.995", 1000, 300, 0.995),
        ("S4 1500/500 d.9965", 1500, 500, 0.9965),
        ("C  1000/500 d.994", 1000, 500, 0.994),
    ];
    for (label, tj, tr, decay) in schedules {
        for (p, snr) in [(10usize, 20.0f64), (10, 10.0), (10, 0.0), (16, 20.0)] {
            let start = std::time::Instant::now();
            let rows: Vec<(bool, f64, f64, f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let sampler = CosetSampler::random(40, p, 16, &mut RngStream::new(9000 + t, 0)).unwrap();
                    let sig = synthesize_signal(&plan(), &sampler, &mut RngStream::new(9000 + t, 1)).unwrap();
                    let m = measure(&sig, &sampler, Some(snr), &mut RngStream::new(9000 + t, 2)).unwrap();
                    let cfg = NcsConfig {
                        iters_joint: tj, iters_recon: tr, lr_decay: decay,
                        hidden: vec![128, 128, 128], seed: 9000 + t,
                        ..NcsConfig::default()
                    };
                    let sol = ncs_solve(&m, &cfg).unwrap();
                    let ps = power_spectrum(&sol.spectrum, -20.0).unwrap();
                    let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
                    let tp = powers(&exact);
                    let np = powers(&sol.spectrum);
                    let sp = powers(&somp(&m, 3).unwrap().spectrum);
                    (
                        ps.occupancy == truth,
                        mse_norm(&np, &tp, false),
                        mse_norm(&sp, &tp, false),
                        mse_norm(&np, &tp, true),
                        mse_norm(&sp, &tp, true),
                    )
                })
                .collect();
            let ok = rows.iter().filter(|r| r.0).count();
            let m = |f: fn(&(bool, f64, f64, f64, f64)) -> f64| {
                rows.iter().map(f).sum::<f64>() / trials as f64
            };
            println!(
                "{label} P={p} SNR={snr}: occ {ok}/{trials} | peak: ncs {:.2e} somp {:.2e} | sum: ncs {:.2e} somp {:.2e} [{:.0}s]",
                m(|r| r.1), m(|r| r.2), m(|r| r.3), m(|r| r.4),
                start.elapsed().as_secs_f64()
            );
        }
    }
}
