//! Pipeline configuration: one JSON document describing the scenario,
//! the sampler, both solvers and the metrics options.

use neurem_core::ncs::NcsConfig;
use neurem_core::ntd::NtdConfig;
use neurem_core::rem::ScenarioConfig;
use neurem_core::signal::BandSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Compression factor L.
    pub compression_factor: usize,
    /// Number of cosets P (must be < L).
    pub num_cosets: usize,
    /// Explicit coset offsets; when absent they are drawn per trial.
    #[serde(default)]
    pub cosets: Option<Vec<usize>>,
    /// Samples per ADC, N.
    pub samples_per_coset: usize,
    #[serde(default)]
    pub snr_db: Option<f64>,
    /// Occupied sub-bands; entry i is the signal content of frequency bin i.
    pub band_plan: Vec<BandSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsConfig {
    pub occupancy_threshold_db: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            occupancy_threshold_db: -20.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub master_seed: u64,
    /// Monte-Carlo trials for the spectrum stage.
    pub trials: usize,
    pub scenario: ScenarioConfig,
    pub sampler: SamplerConfig,
    pub ncs: NcsConfig,
    pub ntd: NtdConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl PipelineConfig {
    /// Desk-scale demo: 100×100×12 maps over three bands, L=40 multi-coset
    /// sampling with P=10 ADCs at 20 dB SNR.
    pub fn default_demo() -> Self {
        Self {
            master_seed: 7,
            trials: 100,
            scenario: ScenarioConfig::default_demo(),
            sampler: SamplerConfig {
                compression_factor: 40,
                num_cosets: 10,
                cosets: None,
                samples_per_coset: 16,
                snr_db: Some(20.0),
                band_plan: vec![
                    BandSpec { start_bin: 5, end_bin: 6, power_dbm: -70.0 },
                    BandSpec { start_bin: 18, end_bin: 18, power_dbm: -72.0 },
                    BandSpec { start_bin: 33, end_bin: 33, power_dbm: -74.0 },
                ],
            },
            ncs: NcsConfig {
                hidden: vec![128, 128, 128],
                iters_joint: 1000,
                iters_recon: 500,
                lr_decay: 0.994,
                ..NcsConfig::default()
            },
            ntd: NtdConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.scenario.validate().map_err(|e| e.to_string())?;
        let s = &self.sampler;
        if s.num_cosets >= s.compression_factor {
            return Err(format!(
                "sampler: num_cosets ({}) must be < compression_factor ({})",
                s.num_cosets, s.compression_factor
            ));
        }
        if s.samples_per_coset == 0 {
            return Err("sampler: samples_per_coset must be positive".to_string());
        }
        if let Some(cosets) = &s.cosets {
            if cosets.len() != s.num_cosets {
                return Err(format!(
                    "sampler: {} explicit cosets but num_cosets = {}",
                    cosets.len(),
                    s.num_cosets
                ));
            }
            if cosets.iter().any(|&c| c >= s.compression_factor) {
                return Err("sampler: coset offset out of range".to_string());
            }
        }
        if s.band_plan.is_empty() {
            return Err("sampler: band plan must not be empty".to_string());
        }
        if s.band_plan.len() != self.scenario.num_freq_bins {
            return Err(format!(
                "band plan has {} bands but the scenario has {} frequency bins",
                s.band_plan.len(),
                self.scenario.num_freq_bins
            ));
        }
        for band in &s.band_plan {
            if band.end_bin < band.start_bin || band.end_bin >= s.compression_factor {
                return Err(format!(
                    "band [{}, {}] outside [0, {})",
                    band.start_bin, band.end_bin, s.compression_factor
                ));
            }
        }
        if self.metrics.occupancy_threshold_db >= 0.0 {
            return Err("metrics: occupancy threshold must be negative".to_string());
        }
        if self.trials == 0 {
            return Err("trials must be >= 1".to_string());
        }
        Ok(())
    }

    /// Ground-truth occupancy over the L sub-bands.
    pub fn occupancy_truth(&self) -> Vec<bool> {
        let mut truth = vec![false; self.sampler.compression_factor];
        for band in &self.sampler.band_plan {
            for row in band.start_bin..=band.end_bin {
                truth[row] = true;
            }
        }
        truth
    }
}
