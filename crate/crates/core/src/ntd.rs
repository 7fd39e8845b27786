//! Tensor completion by neural Tucker decomposition: a free core tensor
//! plus three sine-activated two-layer factor networks U_i = f_i(z_i),
//! all trained jointly by Adam (with decoupled weight decay) on the
//! squared masked residual. Regularization lives in the optimizer, not
//! the loss.

use ndarray::{Array1, Array2, Array3};

use crate::error::{CoreError, Result};
use crate::nn::{init_mlp, AdamState, HeadKind, Mlp, MlpOutput, MlpSpec};
use crate::rem::SampleMask;
use crate::rng::RngStream;
use crate::tensor::{modal_product, tucker_to_full};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NtdConfig {
    pub ranks: (usize, usize, usize),
    pub omega0: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub iters: usize,
    /// Hidden width of each factor network.
    pub hidden: usize,
    /// Per-iteration multiplicative learning-rate decay (1.0 = constant).
    pub lr_decay: f64,
    pub seed: u64,
}

impl Default for NtdConfig {
    fn default() -> Self {
        Self {
            ranks: (25, 25, 12),
            omega0: 2.0,
            learning_rate: 0.01,
            weight_decay: 1e-4,
            iters: 3000,
            hidden: 256,
            lr_decay: 1.0,
            seed: 0,
        }
    }
}

/// Core tensor plus factor networks; factor matrices are always network
/// outputs, never free parameters.
#[derive(Debug, Clone)]
pub struct TuckerModel {
    pub core: Array3<f64>,
    pub factor_nets: [Mlp; 3],
    pub latents: [Array1<f64>; 3],
    pub dims: (usize, usize, usize),
    pub ranks: (usize, usize, usize),
}

impl TuckerModel {
    pub fn init(
        dims: (usize, usize, usize),
        ranks: (usize, usize, usize),
        hidden: usize,
        omega0: f64,
        seed: u64,
    ) -> Result<Self> {
        let extents = [dims.0, dims.1, dims.2];
        let rank_list = [ranks.0, ranks.1, ranks.2];
        for (axis, (&extent, &rank)) in extents.iter().zip(rank_list.iter()).enumerate() {
            if rank == 0 || rank > extent {
                return Err(CoreError::Config(format!(
                    "rank {rank} along mode {} must lie in [1, {extent}]",
                    axis + 1
                )));
            }
        }

        let mut nets = Vec::with_capacity(3);
        let mut latents = Vec::with_capacity(3);
        for i in 0..3 {
            let spec = MlpSpec {
                layer_sizes: vec![extents[i], hidden, extents[i] * rank_list[i]],
                sine: vec![true],
                omega0,
                head: HeadKind::Real,
            };
            nets.push(init_mlp(&spec, &mut RngStream::new(seed, 10 + i as u64))?);
            let mut z_rng = RngStream::new(seed, 20 + i as u64);
            latents.push(Array1::from_shape_fn(extents[i], |_| z_rng.normal()));
        }
        let mut core_rng = RngStream::new(seed, 30);
        let core = Array3::from_shape_fn(ranks, |_| core_rng.normal() * 0.3);

        let nets: [Mlp; 3] = nets.try_into().expect("three nets");
        let latents: [Array1<f64>; 3] = latents.try_into().expect("three latents");
        Ok(Self {
            core,
            factor_nets: nets,
            latents,
            dims,
            ranks,
        })
    }

    /// U_i, the i-th factor matrix (dim_i × R_i), from its network.
    pub fn factor(&self, mode: usize) -> Result<Array2<f64>> {
        let extents = [self.dims.0, self.dims.1, self.dims.2];
        let ranks = [self.ranks.0, self.ranks.1, self.ranks.2];
        let out = self.factor_nets[mode].forward(&self.latents[mode])?;
        let flat = match out {
            MlpOutput::Real(v) => v,
            MlpOutput::Complex(..) => {
                return Err(CoreError::Config("factor networks are real-valued".to_string()))
            }
        };
        Ok(Array2::from_shape_vec((extents[mode], ranks[mode]), flat.to_vec())
            .expect("network output length matches dim·rank"))
    }

    fn param_count(&self) -> usize {
        let nets: usize = self.factor_nets.iter().map(|n| n.param_count()).sum();
        let latents: usize = self.latents.iter().map(|z| z.len()).sum();
        nets + latents + self.core.len()
    }

    fn write_params(&self, out: &mut Vec<f64>) {
        for i in 0..3 {
            self.factor_nets[i].write_params(out);
            out.extend(self.latents[i].iter());
        }
        out.extend(self.core.iter());
    }

    fn read_params(&mut self, src: &[f64]) {
        let mut pos = 0;
        for i in 0..3 {
            pos += self.factor_nets[i].read_params(&src[pos..]);
            for z in self.latents[i].iter_mut() {
                *z = src[pos];
                pos += 1;
            }
        }
        for c in self.core.iter_mut() {
            *c = src[pos];
            pos += 1;
        }
        debug_assert_eq!(pos, src.len());
    }
}

/// Dense reconstruction 𝒢 ×₁ U₁ ×₂ U₂ ×₃ U₃.
pub fn reconstruct(model: &TuckerModel) -> Result<Array3<f64>> {
    let u1 = model.factor(0)?;
    let u2 = model.factor(1)?;
    let u3 = model.factor(2)?;
    tucker_to_full(model.core.view(), u1.view(), u2.view(), u3.view())
}

/// Squared Frobenius norm of the masked residual; no explicit
/// regularization term.
pub fn ntd_loss(model: &TuckerModel, observed: &Array3<f64>, mask: &SampleMask) -> Result<f64> {
    if observed.dim() != model.dims {
        return Err(CoreError::Dimension(format!(
            "observed dims {:?} do not match model dims {:?}",
            observed.dim(),
            model.dims
        )));
    }
    let recon = reconstruct(model)?;
    let mut loss = 0.0;
    for &(i, j, k) in mask.indices() {
        let d = observed[[i, j, k]] - recon[[i, j, k]];
        loss += d * d;
    }
    Ok(loss)
}

/// Reconstruction plus training diagnostics.
#[derive(Debug, Clone)]
pub struct NtdSolution {
    pub reconstruction: Array3<f64>,
    pub loss_history: Vec<f64>,
}

/// Complete a tensor from its masked observations. Deterministic per seed;
/// aborts with the loss history if training diverges.
pub fn ntd_solve(observed: &Array3<f64>, mask: &SampleMask, cfg: &NtdConfig) -> Result<NtdSolution> {
    if mask.is_empty() {
        return Err(CoreError::Config("mask must observe at least one entry".to_string()));
    }
    if cfg.iters == 0 {
        return Err(CoreError::Config("iteration count must be >= 1".to_string()));
    }
    if observed.dim() != mask.dims() {
        return Err(CoreError::Dimension(format!(
            "observed dims {:?} do not match mask dims {:?}",
            observed.dim(),
            mask.dims()
        )));
    }

    // Normalize to zero mean, unit std over the observed entries only;
    // dBm magnitudes would otherwise dominate the sine-network dynamics.
    let values: Vec<f64> = mask
        .indices()
        .iter()
        .map(|&(i, j, k)| observed[[i, j, k]])
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    let std = var.sqrt().max(1e-12);
    let target = observed.mapv(|v| (v - mean) / std);

    let mut model = TuckerModel::init(
        observed.dim(),
        cfg.ranks,
        cfg.hidden,
        cfg.omega0,
        cfg.seed,
    )?;

    let param_count = model.param_count();
    let mut adam = AdamState::new(param_count, cfg.learning_rate).with_weight_decay(cfg.weight_decay);
    let mut params = Vec::with_capacity(param_count);
    let mut grads = Vec::with_capacity(param_count);
    let mut history = Vec::with_capacity(cfg.iters);

    for iter in 0..cfg.iters {
        // Forward through the three factor networks.
        let mut traces = Vec::with_capacity(3);
        let mut factors = Vec::with_capacity(3);
        let extents = [model.dims.0, model.dims.1, model.dims.2];
        let ranks = [model.ranks.0, model.ranks.1, model.ranks.2];
        for i in 0..3 {
            let (out, trace) = model.factor_nets[i].forward_traced(&model.latents[i])?;
            let flat = match out {
                MlpOutput::Real(v) => v,
                MlpOutput::Complex(..) => unreachable!("factor heads are real"),
            };
            factors.push(
                Array2::from_shape_vec((extents[i], ranks[i]), flat.to_vec())
                    .expect("output length matches"),
            );
            traces.push(trace);
        }

        let recon = tucker_to_full(
            model.core.view(),
            factors[0].view(),
            factors[1].view(),
            factors[2].view(),
        )?;

        // Masked residual and loss.
        let mut residual = Array3::zeros(model.dims);
        let mut loss = 0.0;
        for &(i, j, k) in mask.indices() {
            let d = recon[[i, j, k]] - target[[i, j, k]];
            residual[[i, j, k]] = 2.0 * d;
            loss += d * d;
        }
        if !loss.is_finite() {
            return Err(CoreError::NumericalAbort {
                iteration: iter,
                loss_history: history,
            });
        }
        history.push(loss);

        // ∇𝒢 = D ×₁ U₁ᵀ ×₂ U₂ᵀ ×₃ U₃ᵀ with D = 2·masked residual.
        let u1t = factors[0].t().to_owned();
        let u2t = factors[1].t().to_owned();
        let u3t = factors[2].t().to_owned();
        let d1 = modal_product(residual.view(), u1t.view(), 1)?;
        let core_grad = {
            let d12 = modal_product(d1.view(), u2t.view(), 2)?;
            modal_product(d12.view(), u3t.view(), 3)?
        };

        // ∇U_i = (D contracted along the other two modes)_(i) · 𝒢_(i)ᵀ.
        let core_unf = |mode: usize| crate::tensor::unfold(model.core.view(), mode).map(|m| m.data);
        let grad_u1 = {
            let w = modal_product(
                modal_product(residual.view(), u2t.view(), 2)?.view(),
                u3t.view(),
                3,
            )?;
            crate::tensor::unfold(w.view(), 1)?.data.dot(&core_unf(1)?.t())
        };
        let grad_u2 = {
            let w = modal_product(d1.view(), u3t.view(), 3)?;
            crate::tensor::unfold(w.view(), 2)?.data.dot(&core_unf(2)?.t())
        };
        let grad_u3 = {
            let w = modal_product(d1.view(), u2t.view(), 2)?;
            crate::tensor::unfold(w.view(), 3)?.data.dot(&core_unf(3)?.t())
        };

        // Chain through each factor network.
        let mut net_grads = Vec::with_capacity(3);
        for (i, grad_u) in [grad_u1, grad_u2, grad_u3].into_iter().enumerate() {
            let flat = Array1::from_vec(grad_u.into_raw_vec_and_offset().0);
            net_grads.push(model.factor_nets[i].backward(&traces[i], &MlpOutput::Real(flat))?);
        }

        params.clear();
        model.write_params(&mut params);
        grads.clear();
        for g in &net_grads {
            g.write_flat(&mut grads);
            grads.extend(g.input.iter());
        }
        grads.extend(core_grad.iter());

        adam.step(&mut params, &grads)?;
        adam.learning_rate *= cfg.lr_decay;
        model.read_params(&params);
    }

    let reconstruction = reconstruct(&model)?.mapv(|v| v * std + mean);
    Ok(NtdSolution {
        reconstruction,
        loss_history: history,
    })
}
