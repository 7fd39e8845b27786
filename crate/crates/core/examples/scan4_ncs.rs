//! Dev scratch: band-width/power variants for the acceptance scenario.

use neurem_core::ncs::{auc, ncs_solve, power_spectrum, roc_curve, NcsConfig};
use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, BandSpec, CosetSampler};
use neurem_core::somp::somp;
use rayon::prelude::*;

fn norm_power(x: &ndarray::Array2<num_complex::Complex64>) -> Vec<f64> {
    let e: Vec<f64> = (0..x.nrows())
        .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let peak = e.iter().cloned().fold(0.0, f64::max).max(1e-300);
    e.iter().map(|v| v / peak).collect()
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn main() {
    let trials: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(16);
    let graded = vec![
        BandSpec { start_bin: 5, end_bin: 6, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ];
    let equal = vec![
        BandSpec { start_bin: 5, end_bin: 6, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -70.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -70.0 },
    ];
    let variants: Vec<(&str, Vec<BandSpec>, usize, usize, f64)> = vec![
        ("W1 graded C", graded.clone(), 1000, 500, 0.994),
        ("W2 graded short", graded.clone(), 800, 300, 0.992),
        ("W3 equal C", equal.clone(), 1000, 500, 0.994),
        ("W4 equal short", equal.clone(), 800, 300, 0.992),
    ];
    for (label, plan, tj, tr, decay) in variants {
        let occupied: Vec<usize> = plan
            .iter()
            .flat_map(|b| (b.start_bin..=b.end_bin).collect::<Vec<_>>())
            .collect();
        let truth: Vec<bool> = (0..40).map(|l| occupied.contains(&l)).collect();
        for (p, snr) in [(10usize, 20.0f64), (16, 20.0), (10, 10.0), (10, 0.0)] {
            let start = std::time::Instant::now();
            let rows: Vec<(bool, f64, f64, Vec<f64>, Vec<f64>)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let sampler = CosetSampler::random(40, p, 16, &mut RngStream::new(9000 + t, 0)).unwrap();
                    let sig = synthesize_signal(&plan, &sampler, &mut RngStream::new(9000 + t, 1)).unwrap();
                    let m = measure(&sig, &sampler, Some(snr), &mut RngStream::new(9000 + t, 2)).unwrap();
                    let cfg = NcsConfig {
                        iters_joint: tj, iters_recon: tr, lr_decay: decay,
                        hidden: vec![128, 128, 128], seed: 9000 + t,
                        ..NcsConfig::default()
                    };
                    let sol = ncs_solve(&m, &cfg).unwrap();
                    let ps = power_spectrum(&sol.spectrum, -20.0).unwrap();
                    let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
                    let tp = norm_power(&exact);
                    let np = norm_power(&sol.spectrum);
                    let sp = norm_power(&somp(&m, 3).unwrap().spectrum);
                    (ps.occupancy == truth, mse(&np, &tp), mse(&sp, &tp), np, sp)
                })
                .collect();
            let ok = rows.iter().filter(|r| r.0).count();
            let ncs_mse: f64 = rows.iter().map(|r| r.1).sum::<f64>() / trials as f64;
            let somp_mse: f64 = rows.iter().map(|r| r.2).sum::<f64>() / trials as f64;
            let ncs_auc = auc(&roc_curve(&rows.iter().map(|r| (r.3.clone(), truth.clone())).collect::<Vec<_>>()).unwrap());
            let somp_auc = auc(&roc_curve(&rows.iter().map(|r| (r.4.clone(), truth.clone())).collect::<Vec<_>>()).unwrap());
            println!(
                "{label} P={p} SNR={snr}: occ {ok}/{trials} | MSE ncs {ncs_mse:.2e} somp {somp_mse:.2e} | AUC ncs {ncs_auc:.3} somp {somp_auc:.3} [{:.0}s]",
                start.elapsed().as_secs_f64()
            );
        }
    }
}
