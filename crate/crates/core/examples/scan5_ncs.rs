//! Dev scratch: spurious-floor at checkpoint vs final across stage-2 budgets.

use neurem_core::ncs::{ncs_solve, power_spectrum, NcsConfig};
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

fn spur_db(p: &[f64], occupied: &[usize]) -> f64 {
    p.iter()
        .enumerate()
        .filter(|(i, _)| !occupied.contains(i))
        .map(|(_, v)| 10.0 * v.max(1e-30).log10())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn main() {
    let trials: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(24);
    let plan = vec![
        BandSpec { start_bin: 5, end_bin: 6, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ];
    let occupied = vec![5usize, 6, 18, 33];
    let truth: Vec<bool> = (0..40).map(|l| occupied.contains(&l)).collect();

    let schedules: Vec<(&str, usize, usize, f64)> = vec![
        ("a 1000/500 d.994", 1000, 500, 0.994),
        ("b 1500/150 d.995", 1500, 150, 0.995),
        ("c 2000/100 d.996", 2000, 100, 0.996),
        ("d 1500/300 d.9945", 1500, 300, 0.9945),
    ];
    for (label, tj, tr, decay) in schedules {
        for (p, snr) in [(10usize, 20.0f64), (10, 0.0)] {
            let start = std::time::Instant::now();
            let rows: Vec<(bool, f64, f64, f64, f64)> = (0..trials)
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
                    let cp = norm_power(&sol.spectrum_checkpoint);
                    let sp = norm_power(&somp(&m, 3).unwrap().spectrum);
                    (
                        ps.occupancy == truth,
                        mse(&np, &tp),
                        mse(&sp, &tp),
                        spur_db(&np, &occupied),
                        spur_db(&cp, &occupied),
                    )
                })
                .collect();
            let ok = rows.iter().filter(|r| r.0).count();
            let ncs_mse: f64 = rows.iter().map(|r| r.1).sum::<f64>() / trials as f64;
            let somp_mse: f64 = rows.iter().map(|r| r.2).sum::<f64>() / trials as f64;
            let mut final_spurs: Vec<f64> = rows.iter().map(|r| r.3).collect();
            final_spurs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let med = final_spurs[trials as usize / 2];
            let worst = final_spurs[trials as usize - 1];
            let worst_cp = rows.iter().map(|r| r.4).fold(f64::NEG_INFINITY, f64::max);
            println!(
                "{label} P={p} SNR={snr}: occ {ok}/{trials} | mse ncs {ncs_mse:.2e} somp {somp_mse:.2e} | spur fin med {med:+.1} worst {worst:+.1} / ckpt worst {worst_cp:+.1} dB [{:.0}s]",
                start.elapsed().as_secs_f64()
            );
        }
    }
}
