//! Dev scratch: inspect one NCS run in detail.

use neurem_core::ncs::{ncs_solve, NcsConfig};
use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, BandSpec, CosetSampler};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let tj: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(2000);
    let tr: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let lambda: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let omega0: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(10.0);
    let width: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(128);
    let lr: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let decay: f64 = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(1.0);

    let plan = [
        BandSpec { start_bin: 5, end_bin: 5, power_dbm: -70.0 },
        BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
        BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
    ];
    let sampler = CosetSampler::random(40, 16, 16, &mut RngStream::new(1001, 0)).unwrap();
    let sig = synthesize_signal(&plan, &sampler, &mut RngStream::new(1001, 1)).unwrap();
    let m = measure(&sig, &sampler, Some(20.0), &mut RngStream::new(1001, 2)).unwrap();

    let cfg = NcsConfig {
        sparsity_weight: lambda,
        learning_rate: lr,
        iters_joint: tj,
        iters_recon: tr,
        omega0,
        hidden: vec![width, width, width],
        lr_decay: decay,
        seed: 1001,
    };
    let sol = ncs_solve(&m, &cfg).unwrap();

    println!("loss_joint samples:");
    for i in (0..tj).step_by((tj / 10).max(1)) {
        println!("  iter {i}: {:.6}", sol.loss_joint[i]);
    }
    println!("  last: {:.6}", sol.loss_joint.last().unwrap());
    println!("loss_recon samples:");
    for i in (0..tr).step_by((tr / 10).max(1)) {
        println!("  iter {i}: {:.6}", sol.loss_recon[i]);
    }
    println!("  last: {:.6}", sol.loss_recon.last().unwrap());

    let y_norm = m.observed.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    println!(
        "residual checkpoint {:.3e}, final {:.3e}, |Y| {:.3e}",
        sol.residual_checkpoint, sol.residual_final, y_norm
    );

    let exact = spectrum_of(&sig.nyquist_samples, 40, 16).unwrap();
    let powers = |x: &ndarray::Array2<num_complex::Complex64>| -> Vec<(usize, f64)> {
        let e: Vec<f64> = (0..40)
            .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum())
            .collect();
        let peak = e.iter().cloned().fold(0.0, f64::max).max(1e-300);
        let mut idx: Vec<(usize, f64)> = e
            .iter()
            .enumerate()
            .map(|(i, v)| (i, 10.0 * (v / peak).log10()))
            .collect();
        idx.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        idx.truncate(8);
        idx
    };
    println!("true top rows (dB): {:?}", powers(&exact));
    println!("ncs  top rows (dB): {:?}", powers(&sol.spectrum));
}
