//! Unsupervised spectrum recovery: a sine-activated network with a
//! complex-split head is trained so that its output X = f_θ(z) explains
//! the sub-Nyquist measurement, in two stages — a joint stage minimizing
//! ‖Y − A·X‖_F + λ·Σ_l ‖X_l‖_2 over θ and z, then a refinement stage
//! minimizing the residual term alone from the stage-one checkpoint.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::nn::{init_mlp, AdamState, HeadKind, Mlp, MlpOutput, MlpSpec};
use crate::rng::RngStream;
use crate::signal::{Measurement, SpectrumMatrix};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NcsConfig {
    /// Sparsity weight λ of the row-norm penalty.
    pub sparsity_weight: f64,
    pub learning_rate: f64,
    pub iters_joint: usize,
    pub iters_recon: usize,
    pub omega0: f64,
    /// Hidden widths of the trunk; sine activation on the first two layers.
    pub hidden: Vec<usize>,
    /// Per-iteration multiplicative learning-rate decay (1.0 = constant).
    pub lr_decay: f64,
    pub seed: u64,
}

impl Default for NcsConfig {
    fn default() -> Self {
        Self {
            sparsity_weight: 1.0,
            learning_rate: 0.01,
            iters_joint: 2000,
            iters_recon: 1000,
            omega0: 10.0,
            hidden: vec![256, 256, 256],
            lr_decay: 1.0,
            seed: 0,
        }
    }
}

impl NcsConfig {
    fn validate(&self) -> Result<()> {
        if self.sparsity_weight < 0.0 {
            return Err(CoreError::Config("sparsity weight must be >= 0".to_string()));
        }
        if self.iters_joint == 0 || self.iters_recon == 0 {
            return Err(CoreError::Config("iteration counts must be >= 1".to_string()));
        }
        if self.learning_rate <= 0.0 || self.omega0 <= 0.0 {
            return Err(CoreError::Config(
                "learning rate and omega0 must be positive".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.lr_decay) || self.lr_decay == 0.0 {
            return Err(CoreError::Config("lr_decay must lie in (0, 1]".to_string()));
        }
        if self.hidden.is_empty() {
            return Err(CoreError::Config("need at least one hidden layer".to_string()));
        }
        Ok(())
    }
}

/// Relative per-sub-band power (dB, 0 at the peak) and the thresholded
/// occupancy decisions derived from it.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerSpectrum {
    pub power_db: Vec<f64>,
    pub occupancy: Vec<bool>,
}

/// Recovered spectrum plus training diagnostics.
#[derive(Debug, Clone)]
pub struct NcsSolution {
    pub spectrum: SpectrumMatrix,
    /// Network output at the stage-one checkpoint, before refinement.
    pub spectrum_checkpoint: SpectrumMatrix,
    /// Full loss per joint-stage iteration.
    pub loss_joint: Vec<f64>,
    /// Residual-only loss per refinement iteration.
    pub loss_recon: Vec<f64>,
    /// ‖Y − A·X‖_F at the stage-one checkpoint (original scale).
    pub residual_checkpoint: f64,
    /// ‖Y − A·X‖_F of the returned spectrum (original scale).
    pub residual_final: f64,
}

/// ‖Y − A·X‖_F + λ·Σ_l ‖X_l‖_2 with complex row norms.
pub fn ncs_loss(
    x_pred: &SpectrumMatrix,
    a: &Array2<Complex64>,
    y: &Array2<Complex64>,
    lambda: f64,
) -> f64 {
    let residual = y - &a.dot(x_pred);
    let fro = residual.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    fro + lambda * row_norm_sum(x_pred)
}

/// Σ_l ‖X_l‖_2, the block-sparsity surrogate for the number of non-zero rows.
pub fn row_norm_sum(x: &SpectrumMatrix) -> f64 {
    (0..x.nrows())
        .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .sum()
}

struct Objective<'a> {
    sensing: &'a Array2<Complex64>,
    target: Array2<Complex64>,
    lambda: f64,
    rows: usize,
    cols: usize,
}

struct Evaluation {
    loss: f64,
    residual_norm: f64,
    grad_re: Array1<f64>,
    grad_im: Array1<f64>,
}

impl Objective<'_> {
    /// Loss and its gradient with respect to the real and imaginary parts
    /// of X, flattened row-major to match the network heads.
    fn evaluate(&self, re: &Array1<f64>, im: &Array1<f64>) -> Evaluation {
        let x = Array2::from_shape_fn((self.rows, self.cols), |(l, n)| {
            Complex64::new(re[l * self.cols + n], im[l * self.cols + n])
        });
        let residual = &self.target - &self.sensing.dot(&x);
        let res_norm = residual.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();

        let mut grad_re = Array1::zeros(self.rows * self.cols);
        let mut grad_im = Array1::zeros(self.rows * self.cols);
        if res_norm > 0.0 {
            // d‖R‖_F/dX = −AᴴR / ‖R‖_F, split into real and imaginary parts.
            let correlation = hermitian_dot(self.sensing, &residual);
            for l in 0..self.rows {
                for n in 0..self.cols {
                    let g = correlation[[l, n]] / res_norm;
                    grad_re[l * self.cols + n] = -g.re;
                    grad_im[l * self.cols + n] = -g.im;
                }
            }
        }

        let mut penalty = 0.0;
        if self.lambda > 0.0 {
            for l in 0..self.rows {
                let norm = x.row(l).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                penalty += norm;
                if norm > 0.0 {
                    for n in 0..self.cols {
                        let idx = l * self.cols + n;
                        grad_re[idx] += self.lambda * re[idx] / norm;
                        grad_im[idx] += self.lambda * im[idx] / norm;
                    }
                }
            }
        }

        Evaluation {
            loss: res_norm + self.lambda * penalty,
            residual_norm: res_norm,
            grad_re,
            grad_im,
        }
    }
}

/// AᴴB for complex matrices.
fn hermitian_dot(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows_a, cols_a) = a.dim();
    let cols_b = b.ncols();
    let mut out = Array2::from_elem((cols_a, cols_b), Complex64::ZERO);
    for l in 0..cols_a {
        for n in 0..cols_b {
            let mut acc = Complex64::ZERO;
            for p in 0..rows_a {
                acc += a[[p, l]].conj() * b[[p, n]];
            }
            out[[l, n]] = acc;
        }
    }
    out
}

fn network_output(mlp: &Mlp, z: &Array1<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    match mlp.forward(z)? {
        MlpOutput::Complex(re, im) => Ok((re, im)),
        MlpOutput::Real(_) => Err(CoreError::Config(
            "spectrum network must have a complex-split head".to_string(),
        )),
    }
}

fn to_spectrum(re: &Array1<f64>, im: &Array1<f64>, rows: usize, cols: usize) -> SpectrumMatrix {
    Array2::from_shape_fn((rows, cols), |(l, n)| {
        Complex64::new(re[l * cols + n], im[l * cols + n])
    })
}

/// Recover the spectrum matrix from a measurement. Deterministic per
/// config seed; aborts with the loss history if training diverges.
pub fn ncs_solve(measurement: &Measurement, cfg: &NcsConfig) -> Result<NcsSolution> {
    cfg.validate()?;
    let p = measurement.num_cosets();
    let l = measurement.compression();
    let n = measurement.samples_per_coset();
    if measurement.observed.nrows() != p || measurement.sensing.nrows() != p {
        return Err(CoreError::Dimension("measurement shapes disagree".to_string()));
    }

    // Work on a unit-norm copy of Y; the row-norm penalty scales the same
    // way as the residual, so λ keeps its meaning.
    let scale = measurement.observed.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(NcsSolution {
            spectrum: Array2::from_elem((l, n), Complex64::ZERO),
            spectrum_checkpoint: Array2::from_elem((l, n), Complex64::ZERO),
            loss_joint: vec![0.0; cfg.iters_joint],
            loss_recon: vec![0.0; cfg.iters_recon],
            residual_checkpoint: 0.0,
            residual_final: 0.0,
        });
    }
    let target = measurement.observed.mapv(|v| v / scale);

    let mut sizes = Vec::with_capacity(cfg.hidden.len() + 2);
    sizes.push(l);
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(l * n);
    let sine: Vec<bool> = (0..cfg.hidden.len()).map(|i| i < 2).collect();
    let spec = MlpSpec {
        layer_sizes: sizes,
        sine,
        omega0: cfg.omega0,
        head: HeadKind::ComplexSplit,
    };
    let mut mlp = init_mlp(&spec, &mut RngStream::new(cfg.seed, 0))?;
    let mut latent_rng = RngStream::new(cfg.seed, 1);
    let mut z = Array1::from_shape_fn(l, |_| latent_rng.normal());

    let objective = Objective {
        sensing: &measurement.sensing,
        target,
        lambda: cfg.sparsity_weight,
        rows: l,
        cols: n,
    };

    let param_count = mlp.param_count() + z.len();
    let mut params = Vec::with_capacity(param_count);
    let mut grads = Vec::with_capacity(param_count);

    // One geometric learning-rate schedule spans both stages; the
    // refinement stage continues where the joint stage left off.
    let mut run_stage = |mlp: &mut Mlp,
                         z: &mut Array1<f64>,
                         iters: usize,
                         lambda: f64,
                         start_lr: f64,
                         track_best: bool|
     -> Result<(Vec<f64>, Option<(Vec<f64>, f64)>, f64)> {
        let mut adam = AdamState::new(param_count, start_lr);
        let mut history = Vec::with_capacity(iters);
        let mut best: Option<(Vec<f64>, f64)> = None;
        let stage = Objective {
            sensing: objective.sensing,
            target: objective.target.clone(),
            lambda,
            rows: objective.rows,
            cols: objective.cols,
        };
        for iter in 0..iters {
            let (out, trace) = mlp.forward_traced(z)?;
            let (re, im) = match out {
                MlpOutput::Complex(re, im) => (re, im),
                MlpOutput::Real(_) => unreachable!("head is complex-split"),
            };
            let eval = stage.evaluate(&re, &im);
            if !eval.loss.is_finite() {
                return Err(CoreError::NumericalAbort {
                    iteration: iter,
                    loss_history: history,
                });
            }
            history.push(eval.loss);
            if track_best && best.as_ref().is_none_or(|(_, b)| eval.residual_norm < *b) {
                params.clear();
                mlp.write_params(&mut params);
                params.extend(z.iter());
                best = Some((params.clone(), eval.residual_norm));
            }

            let upstream = MlpOutput::Complex(eval.grad_re, eval.grad_im);
            let mlp_grads = mlp.backward(&trace, &upstream)?;

            params.clear();
            mlp.write_params(&mut params);
            params.extend(z.iter());
            grads.clear();
            mlp_grads.write_flat(&mut grads);
            grads.extend(mlp_grads.input.iter());

            adam.step(&mut params, &grads)?;
            adam.learning_rate *= cfg.lr_decay;

            let consumed = mlp.read_params(&params);
            for (dst, src) in z.iter_mut().zip(params[consumed..].iter()) {
                *dst = *src;
            }
        }
        let end_lr = adam.learning_rate;
        Ok((history, best, end_lr))
    };

    let (loss_joint, _, joint_end_lr) = run_stage(
        &mut mlp,
        &mut z,
        cfg.iters_joint,
        cfg.sparsity_weight,
        cfg.learning_rate,
        false,
    )?;

    let (checkpoint_eval, spectrum_checkpoint) = {
        let (re, im) = network_output(&mlp, &z)?;
        let eval = objective.evaluate(&re, &im);
        let spectrum = to_spectrum(&re, &im, l, n).mapv(|v| v * scale);
        (eval, spectrum)
    };

    let (loss_recon, best, _) = run_stage(&mut mlp, &mut z, cfg.iters_recon, 0.0, joint_end_lr, true)?;

    // The refinement stage returns its best-residual iterate, so the final
    // residual can never exceed the checkpoint's.
    let final_eval = {
        let (re, im) = network_output(&mlp, &z)?;
        let end = objective.evaluate(&re, &im);
        match best {
            Some((best_params, best_residual)) if best_residual < end.residual_norm => {
                let consumed = mlp.read_params(&best_params);
                for (dst, src) in z.iter_mut().zip(best_params[consumed..].iter()) {
                    *dst = *src;
                }
                let (re, im) = network_output(&mlp, &z)?;
                objective.evaluate(&re, &im)
            }
            _ => end,
        }
    };

    let (re, im) = network_output(&mlp, &z)?;
    let spectrum = to_spectrum(&re, &im, l, n).mapv(|v| v * scale);

    Ok(NcsSolution {
        spectrum,
        spectrum_checkpoint,
        loss_joint,
        loss_recon,
        residual_checkpoint: checkpoint_eval.residual_norm * scale,
        residual_final: final_eval.residual_norm * scale,
    })
}

/// Per-sub-band power relative to the peak, plus thresholded occupancy.
pub fn power_spectrum(x: &SpectrumMatrix, threshold_db: f64) -> Result<PowerSpectrum> {
    if threshold_db >= 0.0 {
        return Err(CoreError::Config(
            "occupancy threshold must be negative (dB relative to peak)".to_string(),
        ));
    }
    let energies: Vec<f64> = (0..x.nrows())
        .map(|l| x.row(l).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let peak = energies.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(PowerSpectrum {
            power_db: vec![f64::NEG_INFINITY; x.nrows()],
            occupancy: vec![false; x.nrows()],
        });
    }
    let power_db: Vec<f64> = energies
        .iter()
        .map(|&e| {
            if e == 0.0 {
                f64::NEG_INFINITY
            } else {
                10.0 * (e / peak).log10()
            }
        })
        .collect();
    let occupancy = power_db.iter().map(|&p| p > threshold_db).collect();
    Ok(PowerSpectrum { power_db, occupancy })
}

/// Pooled ROC curve: sweep every distinct score as a strict threshold,
/// compute (FPR, TPR) against the truth labels, sort by FPR and pin the
/// (0,0) and (1,1) endpoints.
pub fn roc_curve(trials: &[(Vec<f64>, Vec<bool>)]) -> Result<Vec<(f64, f64)>> {
    if trials.is_empty() {
        return Err(CoreError::Config("roc_curve needs at least one trial".to_string()));
    }
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (s, t) in trials {
        if s.len() != t.len() {
            return Err(CoreError::Dimension(
                "scores and truth must have equal length".to_string(),
            ));
        }
        scores.extend_from_slice(s);
        labels.extend_from_slice(t);
    }
    let positives = labels.iter().filter(|&&t| t).count();
    let negatives = labels.len() - positives;

    let mut thresholds = scores.clone();
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    thresholds.dedup();

    let mut points = Vec::with_capacity(thresholds.len() + 2);
    points.push((0.0, 0.0));
    for threshold in thresholds {
        let mut tp = 0usize;
        let mut fp = 0usize;
        for (score, label) in scores.iter().zip(labels.iter()) {
            if *score > threshold {
                if *label {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        let tpr = if positives > 0 { tp as f64 / positives as f64 } else { 0.0 };
        let fpr = if negatives > 0 { fp as f64 / negatives as f64 } else { 0.0 };
        points.push((fpr, tpr));
    }
    points.push((1.0, 1.0));
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    points.dedup();
    Ok(points)
}

/// Area under an ROC curve by the trapezoid rule.
pub fn auc(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}
