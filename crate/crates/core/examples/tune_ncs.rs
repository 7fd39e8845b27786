//! Dev scratch: measure NCS occupancy accuracy and MSE vs SOMP.

use neurem_core::ncs::{auc, ncs_solve, power_spectrum, roc_curve, NcsConfig};
use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, BandSpec, CosetSampler};
use neurem_core::somp::somp;
use rayon::prelude::*;

fn band_plan() -> Vec<BandSpec> {
    vec![
        BandSpec { start_bin: 5, end_bin: 5, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ]
}

fn row_power_normalized(x: &ndarray::Array2<num_complex::Complex64>) -> Vec<f64> {
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
    let args: Vec<String> = std::env::args().collect();
    let trials: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(20);
    let tj: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(2000);
    let tr: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let decay: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let width: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(256);

    let plan = band_plan();
    let truth: Vec<bool> = (0..40).map(|l| [5, 18, 33].contains(&l)).collect();

    for p in [16usize, 10] {
        let start = std::time::Instant::now();
        let results: Vec<(bool, f64, f64, Vec<f64>)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let sampler =
                    CosetSampler::random(40, p, 16, &mut RngStream::new(1000 + t, 0)).unwrap();
                let sig = synthesize_signal(&plan, &sampler, &mut RngStream::new(1000 + t, 1)).unwrap();
                let m = measure(&sig, &sampler, Some(20.0), &mut RngStream::new(1000 + t, 2)).unwrap();
                let cfg = NcsConfig {
                    iters_joint: tj,
                    iters_recon: tr,
                    lr_decay: decay,
                    hidden: vec![width, width, width],
                    seed: 1000 + t,
                    ..NcsConfig::default()
                };
                let sol = ncs_solve(&m, &cfg).unwrap();
                let ps = power_spectrum(&sol.spectrum, -20.0).unwrap();
                let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
                let true_p = row_power_normalized(&exact);
                let ncs_p = row_power_normalized(&sol.spectrum);
                let somp_res = somp(&m, 3).unwrap();
                let somp_p = row_power_normalized(&somp_res.spectrum);
                (
                    ps.occupancy == truth,
                    mse(&ncs_p, &true_p),
                    mse(&somp_p, &true_p),
                    ncs_p,
                )
            })
            .collect();
        let ok = results.iter().filter(|r| r.0).count();
        let mean_ncs: f64 = results.iter().map(|r| r.1).sum::<f64>() / trials as f64;
        let mean_somp: f64 = results.iter().map(|r| r.2).sum::<f64>() / trials as f64;
        println!(
            "P={p}: occupancy {ok}/{trials}, MSE ncs {mean_ncs:.3e} somp {mean_somp:.3e}  [{:.1}s]",
            start.elapsed().as_secs_f64()
        );
    }

    // MSE vs SNR at P=10 and pooled ROC at SNR 10.
    for snr in [0.0f64, 10.0, 20.0] {
        let start = std::time::Instant::now();
        let results: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let sampler =
                    CosetSampler::random(40, 10, 16, &mut RngStream::new(2000 + t, 0)).unwrap();
                let sig = synthesize_signal(&plan, &sampler, &mut RngStream::new(2000 + t, 1)).unwrap();
                let m = measure(&sig, &sampler, Some(snr), &mut RngStream::new(2000 + t, 2)).unwrap();
                let cfg = NcsConfig {
                    iters_joint: tj,
                    iters_recon: tr,
                    lr_decay: decay,
                    hidden: vec![width, width, width],
                    seed: 2000 + t,
                    ..NcsConfig::default()
                };
                let sol = ncs_solve(&m, &cfg).unwrap();
                let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
                let true_p = row_power_normalized(&exact);
                let ncs_p = row_power_normalized(&sol.spectrum);
                let somp_res = somp(&m, 3).unwrap();
                let somp_p = row_power_normalized(&somp_res.spectrum);
                (mse(&ncs_p, &true_p), mse(&somp_p, &true_p), ncs_p, somp_p)
            })
            .collect();
        let mean_ncs: f64 = results.iter().map(|r| r.0).sum::<f64>() / trials as f64;
        let mean_somp: f64 = results.iter().map(|r| r.1).sum::<f64>() / trials as f64;
        let ncs_trials: Vec<(Vec<f64>, Vec<bool>)> = results
            .iter()
            .map(|r| (r.2.clone(), truth.clone()))
            .collect();
        let somp_trials: Vec<(Vec<f64>, Vec<bool>)> = results
            .iter()
            .map(|r| (r.3.clone(), truth.clone()))
            .collect();
        let ncs_auc = auc(&roc_curve(&ncs_trials).unwrap());
        let somp_auc = auc(&roc_curve(&somp_trials).unwrap());
        println!(
            "SNR={snr}: MSE ncs {mean_ncs:.3e} somp {mean_somp:.3e}, AUC ncs {ncs_auc:.4} somp {somp_auc:.4}  [{:.1}s]",
            start.elapsed().as_secs_f64()
        );
    }
}
