//! The four pipeline stages. Every stochastic step draws from a stream
//! derived from the master seed and a fixed domain offset, so repeated
//! runs are bitwise identical regardless of the worker pool.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Axis;
use rayon::prelude::*;

use neurem_core::drmt::{read_tensor, write_tensor, DenseTensor};
use neurem_core::metrics::{quality_report, QualityReport};
use neurem_core::ncs::{auc, ncs_solve, power_spectrum, roc_curve, NcsConfig};
use neurem_core::ntd::ntd_solve;
use neurem_core::rem::{generate_rem, project, sample_mask, Rem4D, SampleMask};
use neurem_core::rng::RngStream;
use neurem_core::signal::{measure, spectrum_of, synthesize_signal, CosetSampler, SpectrumMatrix};
use neurem_core::somp::somp;
use neurem_core::CoreError;

use crate::config::PipelineConfig;
use crate::output::{write_csv, write_manifest, write_ppm, write_slice_csv};

/// Anything that should abort the process, tagged with its exit code.
#[derive(Debug)]
pub struct CmdError {
    pub exit_code: u8,
    pub message: String,
}

impl CmdError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            exit_code: 2,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            exit_code: 3,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::config(format!("io error: {e}"))
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NumericalAbort { .. } => CmdError::numerical(e.to_string()),
            other => CmdError::config(other.to_string()),
        }
    }
}

type CmdResult<T> = Result<T, CmdError>;

// Seed-domain offsets; a trial index is added within each domain.
const DOMAIN_MASK: u64 = 0x0100_0000;
const DOMAIN_COSETS: u64 = 0x0200_0000;
const DOMAIN_SIGNAL: u64 = 0x0300_0000;
const DOMAIN_NOISE: u64 = 0x0400_0000;
const SEED_NCS: u64 = 0x5000_0000;

/// Write the ground-truth 4-D map, the sensor mask and the band plan.
pub fn cmd_simulate(config: &PipelineConfig, out: &Path) -> CmdResult<()> {
    config.validate().map_err(CmdError::config)?;
    fs::create_dir_all(out)?;
    write_manifest(out, "simulate", config)?;

    let scenario = &config.scenario;
    let rem = generate_rem(
        &scenario.beams,
        &scenario.shadow,
        scenario.spatial_dims(),
        scenario.num_freq_bins,
        config.master_seed,
    )?;
    write_tensor(&rem.to_dense_tensor(), &out.join("ground_truth.drmt"))?;

    let mask = sample_mask(
        scenario.spatial_dims(),
        scenario.missing_rate,
        &mut RngStream::new(config.master_seed, DOMAIN_MASK),
    )?;
    write_tensor(&mask.to_dense_tensor(), &out.join("mask.drmt"))?;
    let rows: Vec<String> = mask
        .indices()
        .iter()
        .map(|&(i, j, k)| format!("{i},{j},{k}"))
        .collect();
    write_csv(&out.join("mask.csv"), "i,j,k", &rows)?;

    let plan = serde_json::to_string_pretty(&config.sampler.band_plan).expect("plan serializes");
    fs::write(out.join("band_plan.json"), plan)?;
    println!(
        "simulate: {} bins of {:?} written to {}",
        rem.num_bins(),
        scenario.spatial_dims(),
        out.display()
    );
    Ok(())
}

struct TrialOutcome {
    trial: usize,
    spectrum: SpectrumMatrix,
    power_db: Vec<f64>,
    occupied: Vec<bool>,
    scores: Vec<f64>,
    mse: f64,
    somp: Option<(SpectrumMatrix, Vec<f64>, f64)>,
}

fn normalized_row_power(x: &SpectrumMatrix) -> Vec<f64> {
    let energies: Vec<f64> = (0..x.nrows())
        .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let peak = energies.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    energies.iter().map(|e| e / peak).collect()
}

fn spectrum_mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Per-trial measure → solve → detect; writes recovered spectra, power
/// CSVs, pooled ROC points and the per-trial MSE table.
pub fn cmd_spectrum(
    config: &PipelineConfig,
    out: &Path,
    baseline_somp: bool,
    trials_override: Option<usize>,
) -> CmdResult<()> {
    config.validate().map_err(CmdError::config)?;
    let dir = out.join("spectrum");
    fs::create_dir_all(dir.join("xhat"))?;
    if baseline_somp {
        fs::create_dir_all(dir.join("somp"))?;
    }
    write_manifest(&dir, "spectrum", config)?;

    let trials = trials_override.unwrap_or(config.trials);
    let sampler_cfg = &config.sampler;
    let truth = config.occupancy_truth();
    let sparsity = config.sampler.band_plan.len();

    // The coset pattern models fixed hardware delays: drawn once per run
    // seed (or taken verbatim from the config), shared by all trials.
    let sampler = match &sampler_cfg.cosets {
        Some(c) => CosetSampler::new(
            sampler_cfg.compression_factor,
            c.clone(),
            sampler_cfg.samples_per_coset,
        )?,
        None => CosetSampler::random(
            sampler_cfg.compression_factor,
            sampler_cfg.num_cosets,
            sampler_cfg.samples_per_coset,
            &mut RngStream::new(config.master_seed, DOMAIN_COSETS),
        )?,
    };

    let outcomes: Vec<CmdResult<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> CmdResult<TrialOutcome> {
            let master = config.master_seed;
            let t = trial as u64;
            let sampler = sampler.clone();
            let signal = synthesize_signal(
                &sampler_cfg.band_plan,
                &sampler,
                &mut RngStream::new(master, DOMAIN_SIGNAL + t),
            )?;
            let measurement = measure(
                &signal,
                &sampler,
                sampler_cfg.snr_db,
                &mut RngStream::new(master, DOMAIN_NOISE + t),
            )?;

            let ncs_cfg = NcsConfig {
                seed: master.wrapping_add(SEED_NCS + t),
                ..config.ncs.clone()
            };
            let solution = ncs_solve(&measurement, &ncs_cfg)?;
            let ps = power_spectrum(&solution.spectrum, config.metrics.occupancy_threshold_db)?;

            let exact = spectrum_of(
                &signal.nyquist_samples,
                sampler.compression(),
                sampler.samples_per_coset(),
            )?;
            let truth_power = normalized_row_power(&exact);
            let scores = normalized_row_power(&solution.spectrum);
            let mse = spectrum_mse(&scores, &truth_power);

            let somp_out = if baseline_somp {
                let result = somp(&measurement, sparsity)?;
                let somp_scores = normalized_row_power(&result.spectrum);
                let somp_mse = spectrum_mse(&somp_scores, &truth_power);
                Some((result.spectrum, somp_scores, somp_mse))
            } else {
                None
            };

            Ok(TrialOutcome {
                trial,
                spectrum: solution.spectrum,
                power_db: ps.power_db,
                occupied: ps.occupancy,
                scores,
                mse,
                somp: somp_out,
            })
        })
        .collect();

    let mut results_rows = Vec::new();
    let mut ncs_trials = Vec::new();
    let mut somp_trials = Vec::new();
    for outcome in outcomes {
        let o = outcome?;
        write_tensor(
            &DenseTensor::from_complex_matrix(o.spectrum.view()),
            &dir.join(format!("xhat/trial_{:03}.drmt", o.trial)),
        )?;
        let rows: Vec<String> = o
            .power_db
            .iter()
            .zip(o.occupied.iter())
            .enumerate()
            .map(|(band, (p, occ))| format!("{band},{p},{occ}"))
            .collect();
        write_csv(
            &dir.join(format!("spectrum_trial_{:03}.csv", o.trial)),
            "band_index,power_db,occupied",
            &rows,
        )?;
        results_rows.push(format!("{},ncs,{}", o.trial, o.mse));
        ncs_trials.push((o.scores, truth.clone()));
        if let Some((spectrum, scores, mse)) = o.somp {
            write_tensor(
                &DenseTensor::from_complex_matrix(spectrum.view()),
                &dir.join(format!("somp/trial_{:03}.drmt", o.trial)),
            )?;
            results_rows.push(format!("{},somp,{}", o.trial, mse));
            somp_trials.push((scores, truth.clone()));
        }
    }
    write_csv(&dir.join("results.csv"), "trial,method,mse", &results_rows)?;

    let roc = roc_curve(&ncs_trials)?;
    let rows: Vec<String> = roc.iter().map(|(f, t)| format!("{f},{t}")).collect();
    write_csv(&dir.join("roc_ncs.csv"), "fpr,tpr", &rows)?;
    let mut log = format!("spectrum: {trials} trials, ncs auc {:.4}", auc(&roc));
    if !somp_trials.is_empty() {
        let roc = roc_curve(&somp_trials)?;
        let rows: Vec<String> = roc.iter().map(|(f, t)| format!("{f},{t}")).collect();
        write_csv(&dir.join("roc_somp.csv"), "fpr,tpr", &rows)?;
        log.push_str(&format!(", somp auc {:.4}", auc(&roc)));
    }
    println!("{log}");
    Ok(())
}

/// Per-frequency tensor completion from the simulated truth and mask.
pub fn cmd_complete(config: &PipelineConfig, out: &Path) -> CmdResult<()> {
    config.validate().map_err(CmdError::config)?;
    let truth_tensor = read_tensor(&out.join("ground_truth.drmt"))
        .map_err(|e| CmdError::config(format!("missing simulate outputs: {e}")))?;
    let rem = Rem4D::from_dense_tensor(&truth_tensor)?;
    let mask_tensor = read_tensor(&out.join("mask.drmt"))?;
    let mask = SampleMask::from_indicator(mask_tensor.to_array3()?.view())?;
    if mask.dims() != rem.spatial_dims() {
        return Err(CmdError::config(format!(
            "mask dims {:?} do not match map dims {:?}",
            mask.dims(),
            rem.spatial_dims()
        )));
    }

    let dir = out.join("complete");
    fs::create_dir_all(dir.join("heatmaps"))?;
    write_manifest(&dir, "complete", config)?;

    let bins: Vec<CmdResult<(usize, QualityReport)>> = (0..rem.num_bins())
        .into_par_iter()
        .map(|bin| -> CmdResult<(usize, QualityReport)> {
            let truth = rem.bin(bin);
            let observed = project(truth.view(), &mask)?;
            let cfg = neurem_core::ntd::NtdConfig {
                seed: config.master_seed.wrapping_add(0x6000_0000 + bin as u64),
                ..config.ntd.clone()
            };
            let solution = ntd_solve(&observed, &mask, &cfg).map_err(|e| match &e {
                CoreError::NumericalAbort { loss_history, .. } => {
                    let path = dir.join(format!("loss_f{bin}_abort.csv"));
                    let rows: Vec<String> =
                        loss_history.iter().map(|l| format!("{l}")).collect();
                    let _ = write_csv(&path, "loss", &rows);
                    CmdError::numerical(format!("{e}; history at {}", path.display()))
                }
                _ => CmdError::from(e),
            })?;

            write_tensor(
                &DenseTensor::from_array3(solution.reconstruction.view()),
                &dir.join(format!("recon_f{bin}.drmt")),
            )?;
            let rows: Vec<String> = solution.loss_history.iter().map(|l| format!("{l}")).collect();
            write_csv(&dir.join(format!("loss_f{bin}.csv")), "loss", &rows)?;

            for k in 0..solution.reconstruction.dim().2 {
                write_slice_csv(
                    &dir.join(format!("heatmaps/recon_f{bin}_slice{k:02}.csv")),
                    solution.reconstruction.index_axis(Axis(2), k),
                )?;
            }

            let report = quality_report(solution.reconstruction.view(), truth.view())?;
            fs::write(
                dir.join(format!("quality_f{bin}.json")),
                serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            Ok((bin, report))
        })
        .collect();

    let mut rows = Vec::new();
    let mut summary = String::new();
    for bin in bins {
        let (index, report) = bin?;
        rows.push(format!("{index},{}", report.csv_row()));
        summary.push_str(&format!(
            " f{index}: psnr {:.2} dB ssim {:.3};",
            report.psnr_db, report.ssim
        ));
    }
    write_csv(
        &dir.join("quality.csv"),
        &format!("freq_bin,{}", QualityReport::csv_header()),
        &rows,
    )?;
    println!("complete:{summary}");
    Ok(())
}

/// Aggregate per-trial and per-frequency results; render PPM heatmaps.
pub fn cmd_report(config: &PipelineConfig, out: &Path) -> CmdResult<()> {
    let spectrum_dir = out.join("spectrum");
    let complete_dir = out.join("complete");
    if !spectrum_dir.exists() && !complete_dir.exists() {
        return Err(CmdError::config(format!(
            "{} holds no spectrum/ or complete/ outputs to report on",
            out.display()
        )));
    }
    let dir = out.join("report");
    fs::create_dir_all(dir.join("ppm"))?;
    write_manifest(&dir, "report", config)?;

    // Per-trial, per-band summary of the spectrum stage.
    if spectrum_dir.exists() {
        let truth = config.occupancy_truth();
        let mut rows = Vec::new();
        let mut trial = 0usize;
        loop {
            let path = spectrum_dir.join(format!("spectrum_trial_{trial:03}.csv"));
            if !path.exists() {
                break;
            }
            let text = fs::read_to_string(&path)?;
            for line in text.lines().skip(1) {
                let fields: Vec<&str> = line.split(',').collect();
                let band: usize = fields[0].parse().map_err(|_| {
                    CmdError::config(format!("malformed row in {}", path.display()))
                })?;
                if truth[band] {
                    rows.push(format!("{trial},{band},{},{}", fields[1], fields[2]));
                }
            }
            trial += 1;
        }
        if trial == 0 {
            return Err(CmdError::config("spectrum directory holds no trials".to_string()));
        }
        write_csv(
            &dir.join("summary.csv"),
            "trial,band_index,power_db,detected",
            &rows,
        )?;
    }

    // Heatmaps for the truth and every reconstructed bin.
    if complete_dir.exists() {
        let truth_tensor = read_tensor(&out.join("ground_truth.drmt"))?;
        let rem = Rem4D::from_dense_tensor(&truth_tensor)?;
        for bin in 0..rem.num_bins() {
            let recon_path = complete_dir.join(format!("recon_f{bin}.drmt"));
            if !recon_path.exists() {
                return Err(CmdError::config(format!(
                    "incomplete run: {} is missing",
                    recon_path.display()
                )));
            }
            let recon = read_tensor(&recon_path)?.to_array3()?;
            let truth = rem.bin(bin);
            for k in 0..truth.dim().2 {
                write_ppm(
                    &dir.join(format!("ppm/truth_f{bin}_slice{k:02}.ppm")),
                    truth.index_axis(Axis(2), k),
                )?;
                write_ppm(
                    &dir.join(format!("ppm/recon_f{bin}_slice{k:02}.ppm")),
                    recon.index_axis(Axis(2), k),
                )?;
            }
        }
    }
    println!("report: written to {}", dir.display());
    Ok(())
}

/// simulate → spectrum → complete → report.
pub fn cmd_pipeline(
    config: &PipelineConfig,
    out: &Path,
    baseline_somp: bool,
    trials_override: Option<usize>,
) -> CmdResult<()> {
    cmd_simulate(config, out)?;
    cmd_spectrum(config, out, baseline_somp, trials_override)?;
    cmd_complete(config, out)?;
    cmd_report(config, out)?;
    Ok(())
}

pub fn load_config(path: Option<&PathBuf>) -> CmdResult<PipelineConfig> {
    let config = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CmdError::config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CmdError::config(format!("invalid config {}: {e}", p.display())))?
        }
        None => PipelineConfig::default_demo(),
    };
    Ok(config)
}
