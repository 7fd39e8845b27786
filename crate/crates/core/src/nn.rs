//! Minimal fully-connected network kernel with sine activation, exact
//! reverse-mode gradients, and an Adam optimizer with decoupled weight
//! decay. Everything is f64 and bitwise deterministic given a seed.

use ndarray::{Array1, Array2};

use crate::error::{CoreError, Result};
use crate::rng::RngStream;

/// One fully-connected layer; `weight` is (out × in).
#[derive(Debug, Clone)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    /// Apply sin(omega0 · preactivation) after this layer.
    pub sine: bool,
}

impl Layer {
    fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    fn in_dim(&self) -> usize {
        self.weight.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    /// Single linear output layer.
    Real,
    /// Two parallel linear output layers of identical shape, interpreted
    /// as the real and imaginary parts of a complex output.
    ComplexSplit,
}

#[derive(Debug, Clone)]
pub enum Head {
    Real(Layer),
    ComplexSplit { re: Layer, im: Layer },
}

/// Network architecture: sizes chain input → hidden… → output; `sine`
/// holds one flag per hidden layer.
#[derive(Debug, Clone)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub sine: Vec<bool>,
    pub omega0: f64,
    pub head: HeadKind,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    pub omega0: f64,
    pub trunk: Vec<Layer>,
    pub head: Head,
}

#[derive(Debug, Clone)]
pub enum MlpOutput {
    Real(Array1<f64>),
    /// Real branch and imaginary branch; the complex output is re + i·im.
    Complex(Array1<f64>, Array1<f64>),
}

/// Activations recorded during a forward pass, needed for backprop.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    input: Array1<f64>,
    pre: Vec<Array1<f64>>,
    act: Vec<Array1<f64>>,
}

impl ForwardTrace {
    fn last_act(&self) -> &Array1<f64> {
        self.act.last().unwrap_or(&self.input)
    }
}

#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone)]
pub enum HeadGrads {
    Real(LayerGrads),
    ComplexSplit { re: LayerGrads, im: LayerGrads },
}

#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub trunk: Vec<LayerGrads>,
    pub head: HeadGrads,
    /// Gradient with respect to the latent input z.
    pub input: Array1<f64>,
}

/// Initialize weights for sine networks: uniform ±1/fan_in on the first
/// layer, uniform ±sqrt(6/fan_in)/omega0 everywhere else, zero biases.
pub fn init_mlp(spec: &MlpSpec, rng: &mut RngStream) -> Result<Mlp> {
    if spec.layer_sizes.len() < 2 {
        return Err(CoreError::Config(
            "network needs at least input and output sizes".to_string(),
        ));
    }
    if spec.omega0 <= 0.0 {
        return Err(CoreError::Config("omega0 must be positive".to_string()));
    }
    let n_hidden = spec.layer_sizes.len() - 2;
    if spec.sine.len() != n_hidden {
        return Err(CoreError::Config(format!(
            "expected {} activation flags, got {}",
            n_hidden,
            spec.sine.len()
        )));
    }

    let init_layer = |rng: &mut RngStream, out: usize, inp: usize, first: bool| -> Layer {
        let bound = if first {
            1.0 / inp as f64
        } else {
            (6.0 / inp as f64).sqrt() / spec.omega0
        };
        let weight =
            Array2::from_shape_fn((out, inp), |_| (rng.uniform() * 2.0 - 1.0) * bound);
        Layer {
            weight,
            bias: Array1::zeros(out),
            sine: false,
        }
    };

    let mut trunk = Vec::with_capacity(n_hidden);
    for i in 0..n_hidden {
        let mut layer = init_layer(rng, spec.layer_sizes[i + 1], spec.layer_sizes[i], i == 0);
        layer.sine = spec.sine[i];
        trunk.push(layer);
    }

    let head_in = spec.layer_sizes[spec.layer_sizes.len() - 2];
    let head_out = *spec.layer_sizes.last().unwrap();
    // A head directly on the input counts as the first layer.
    let head_is_first = n_hidden == 0;
    let head = match spec.head {
        HeadKind::Real => Head::Real(init_layer(rng, head_out, head_in, head_is_first)),
        HeadKind::ComplexSplit => Head::ComplexSplit {
            re: init_layer(rng, head_out, head_in, head_is_first),
            im: init_layer(rng, head_out, head_in, head_is_first),
        },
    };

    Ok(Mlp {
        omega0: spec.omega0,
        trunk,
        head,
    })
}

impl Mlp {
    pub fn input_dim(&self) -> usize {
        match self.trunk.first() {
            Some(l) => l.in_dim(),
            None => match &self.head {
                Head::Real(l) => l.in_dim(),
                Head::ComplexSplit { re, .. } => re.in_dim(),
            },
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.head {
            Head::Real(l) => l.out_dim(),
            Head::ComplexSplit { re, .. } => re.out_dim(),
        }
    }

    pub fn forward(&self, z: &Array1<f64>) -> Result<MlpOutput> {
        Ok(self.forward_traced(z)?.0)
    }

    /// Forward pass that also returns the activation trace for [`Mlp::backward`].
    pub fn forward_traced(&self, z: &Array1<f64>) -> Result<(MlpOutput, ForwardTrace)> {
        if z.len() != self.input_dim() {
            return Err(CoreError::Dimension(format!(
                "input length {} does not match first layer input {}",
                z.len(),
                self.input_dim()
            )));
        }
        let mut trace = ForwardTrace {
            input: z.clone(),
            pre: Vec::with_capacity(self.trunk.len()),
            act: Vec::with_capacity(self.trunk.len()),
        };
        let mut h = z.clone();
        for layer in &self.trunk {
            let pre = layer.weight.dot(&h) + &layer.bias;
            let act = if layer.sine {
                pre.mapv(|a| (self.omega0 * a).sin())
            } else {
                pre.clone()
            };
            trace.pre.push(pre);
            trace.act.push(act.clone());
            h = act;
        }
        let out = match &self.head {
            Head::Real(l) => MlpOutput::Real(l.weight.dot(&h) + &l.bias),
            Head::ComplexSplit { re, im } => MlpOutput::Complex(
                re.weight.dot(&h) + &re.bias,
                im.weight.dot(&h) + &im.bias,
            ),
        };
        Ok((out, trace))
    }

    /// Exact reverse-mode gradients for all weights, biases and the input,
    /// given the gradient of the loss with respect to the output.
    pub fn backward(&self, trace: &ForwardTrace, upstream: &MlpOutput) -> Result<MlpGrads> {
        let feature = trace.last_act();
        let outer = |g: &Array1<f64>, h: &Array1<f64>| -> Array2<f64> {
            g.view()
                .insert_axis(ndarray::Axis(1))
                .dot(&h.view().insert_axis(ndarray::Axis(0)))
        };

        let (head_grads, mut g_h): (HeadGrads, Array1<f64>) = match (&self.head, upstream) {
            (Head::Real(l), MlpOutput::Real(g)) => {
                if g.len() != l.out_dim() {
                    return Err(CoreError::Dimension(
                        "upstream gradient does not match output shape".to_string(),
                    ));
                }
                let grads = LayerGrads {
                    weight: outer(g, feature),
                    bias: g.clone(),
                };
                (HeadGrads::Real(grads), l.weight.t().dot(g))
            }
            (Head::ComplexSplit { re, im }, MlpOutput::Complex(g_re, g_im)) => {
                if g_re.len() != re.out_dim() || g_im.len() != im.out_dim() {
                    return Err(CoreError::Dimension(
                        "upstream gradient does not match output shape".to_string(),
                    ));
                }
                let grads_re = LayerGrads {
                    weight: outer(g_re, feature),
                    bias: g_re.clone(),
                };
                let grads_im = LayerGrads {
                    weight: outer(g_im, feature),
                    bias: g_im.clone(),
                };
                let g_h = re.weight.t().dot(g_re) + im.weight.t().dot(g_im);
                (
                    HeadGrads::ComplexSplit {
                        re: grads_re,
                        im: grads_im,
                    },
                    g_h,
                )
            }
            _ => {
                return Err(CoreError::Dimension(
                    "upstream gradient kind does not match head kind".to_string(),
                ))
            }
        };

        let mut trunk_grads = vec![
            LayerGrads {
                weight: Array2::zeros((0, 0)),
                bias: Array1::zeros(0),
            };
            self.trunk.len()
        ];
        for (i, layer) in self.trunk.iter().enumerate().rev() {
            let g_pre = if layer.sine {
                let pre = &trace.pre[i];
                Array1::from_shape_fn(g_h.len(), |j| {
                    g_h[j] * self.omega0 * (self.omega0 * pre[j]).cos()
                })
            } else {
                g_h.clone()
            };
            let below = if i == 0 {
                &trace.input
            } else {
                &trace.act[i - 1]
            };
            trunk_grads[i] = LayerGrads {
                weight: outer(&g_pre, below),
                bias: g_pre.clone(),
            };
            g_h = layer.weight.t().dot(&g_pre);
        }

        Ok(MlpGrads {
            trunk: trunk_grads,
            head: head_grads,
            input: g_h,
        })
    }

    pub fn param_count(&self) -> usize {
        let layer_count = |l: &Layer| l.weight.len() + l.bias.len();
        let trunk: usize = self.trunk.iter().map(layer_count).sum();
        let head = match &self.head {
            Head::Real(l) => layer_count(l),
            Head::ComplexSplit { re, im } => layer_count(re) + layer_count(im),
        };
        trunk + head
    }

    /// Append all parameters to `out` in a fixed order (trunk weights
    /// row-major then bias, per layer; then head, re before im).
    pub fn write_params(&self, out: &mut Vec<f64>) {
        let push_layer = |l: &Layer, out: &mut Vec<f64>| {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        };
        for l in &self.trunk {
            push_layer(l, out);
        }
        match &self.head {
            Head::Real(l) => push_layer(l, out),
            Head::ComplexSplit { re, im } => {
                push_layer(re, out);
                push_layer(im, out);
            }
        }
    }

    /// Load parameters from a flat slice written by [`Mlp::write_params`];
    /// returns how many values were consumed.
    pub fn read_params(&mut self, src: &[f64]) -> usize {
        let mut pos = 0usize;
        let load_layer = |l: &mut Layer, pos: &mut usize| {
            for w in l.weight.iter_mut() {
                *w = src[*pos];
                *pos += 1;
            }
            for b in l.bias.iter_mut() {
                *b = src[*pos];
                *pos += 1;
            }
        };
        for l in &mut self.trunk {
            load_layer(l, &mut pos);
        }
        match &mut self.head {
            Head::Real(l) => load_layer(l, &mut pos),
            Head::ComplexSplit { re, im } => {
                load_layer(re, &mut pos);
                load_layer(im, &mut pos);
            }
        }
        pos
    }
}

impl MlpGrads {
    /// Append gradients in the exact order of [`Mlp::write_params`].
    pub fn write_flat(&self, out: &mut Vec<f64>) {
        let push = |l: &LayerGrads, out: &mut Vec<f64>| {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        };
        for l in &self.trunk {
            push(l, out);
        }
        match &self.head {
            HeadGrads::Real(l) => push(l, out),
            HeadGrads::ComplexSplit { re, im } => {
                push(re, out);
                push(im, out);
            }
        }
    }
}

/// Adam with bias correction and decoupled weight decay (applied to the
/// parameters before the moment update).
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Self {
        self.weight_decay = weight_decay;
        self
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(CoreError::Dimension(format!(
                "adam state holds {} parameters, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(CoreError::NonFinite(
                "gradient contains NaN or infinity".to_string(),
            ));
        }

        if self.weight_decay > 0.0 {
            let shrink = self.learning_rate * self.weight_decay;
            for p in params.iter_mut() {
                *p -= shrink * *p;
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Max relative error between analytic gradients and central finite
/// differences of `loss` at the current `params`.
pub fn finite_difference_check<F>(
    mut loss: F,
    params: &mut [f64],
    analytic: &[f64],
    step: f64,
) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(params.len(), analytic.len());
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let saved = params[i];
        params[i] = saved + step;
        let up = loss(params);
        params[i] = saved - step;
        let down = loss(params);
        params[i] = saved;
        let fd = (up - down) / (2.0 * step);
        let denom = fd.abs().max(analytic[i].abs()).max(1.0);
        worst = worst.max((fd - analytic[i]).abs() / denom);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn spec(sizes: &[usize], sine: &[bool], omega0: f64, head: HeadKind) -> MlpSpec {
        MlpSpec {
            layer_sizes: sizes.to_vec(),
            sine: sine.to_vec(),
            omega0,
            head,
        }
    }

    fn random_input(len: usize, rng: &mut RngStream) -> Array1<f64> {
        Array1::from_shape_fn(len, |_| rng.normal())
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let s = spec(&[6, 4, 3], &[true], 1.0, HeadKind::Real);
        let a = init_mlp(&s, &mut RngStream::new(5, 5)).unwrap();
        let b = init_mlp(&s, &mut RngStream::new(5, 5)).unwrap();

        let mut pa = Vec::new();
        let mut pb = Vec::new();
        a.write_params(&mut pa);
        b.write_params(&mut pb);
        assert_eq!(
            pa.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            pb.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );

        // fan_in 4, omega0 1 → non-first-layer weights within ±sqrt(6/4) ⊂ [−2, 2];
        // with fan_in 6 first layer within ±1/6.
        for w in a.trunk[0].weight.iter() {
            assert!(w.abs() <= 1.0 / 6.0);
        }
        if let Head::Real(l) = &a.head {
            for w in l.weight.iter() {
                assert!(w.abs() <= (6.0f64 / 4.0).sqrt());
            }
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
        assert!(a.trunk[0].bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn zero_network_outputs_zero() {
        let s = spec(&[3, 4, 2], &[true], 10.0, HeadKind::ComplexSplit);
        let mut m = init_mlp(&s, &mut RngStream::new(0, 0)).unwrap();
        for l in &mut m.trunk {
            l.weight.fill(0.0);
            l.bias.fill(0.0);
        }
        if let Head::ComplexSplit { re, im } = &mut m.head {
            re.weight.fill(0.0);
            im.weight.fill(0.0);
        }
        let out = m.forward(&Array1::from_vec(vec![1.0, -2.0, 3.0])).unwrap();
        match out {
            MlpOutput::Complex(re, im) => {
                assert!(re.iter().all(|&v| v == 0.0));
                assert!(im.iter().all(|&v| v == 0.0));
            }
            _ => panic!("expected complex output"),
        }
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let s = spec(&[3, 3], &[], 1.0, HeadKind::Real);
        let mut m = init_mlp(&s, &mut RngStream::new(1, 0)).unwrap();
        if let Head::Real(l) = &mut m.head {
            l.weight.assign(&Array2::eye(3));
            l.bias.fill(0.0);
        }
        let z = Array1::from_vec(vec![0.5, -1.5, 2.0]);
        match m.forward(&z).unwrap() {
            MlpOutput::Real(out) => assert_eq!(out, z),
            _ => panic!("expected real output"),
        }
    }

    #[test]
    fn forward_matches_naive_loop_oracle() {
        let s = spec(&[4, 5, 3], &[true], 7.0, HeadKind::Real);
        let m = init_mlp(&s, &mut RngStream::new(77, 0)).unwrap();
        let mut rng = RngStream::new(78, 0);
        let z = random_input(4, &mut rng);

        // Independent naive loops.
        let l0 = &m.trunk[0];
        let mut hidden = vec![0.0f64; 5];
        for i in 0..5 {
            let mut acc = l0.bias[i];
            for j in 0..4 {
                acc += l0.weight[[i, j]] * z[j];
            }
            hidden[i] = (7.0 * acc).sin();
        }
        let head = match &m.head {
            Head::Real(l) => l,
            _ => unreachable!(),
        };
        let mut expected = vec![0.0f64; 3];
        for i in 0..3 {
            let mut acc = head.bias[i];
            for j in 0..5 {
                acc += head.weight[[i, j]] * hidden[j];
            }
            expected[i] = acc;
        }

        match m.forward(&z).unwrap() {
            MlpOutput::Real(out) => {
                for (a, b) in out.iter().zip(expected.iter()) {
                    assert!((a - b).abs() < 1e-14);
                }
            }
            _ => panic!("expected real output"),
        }
    }

    #[test]
    fn complex_head_is_re_plus_i_im() {
        let s = spec(&[3, 4, 6], &[true], 2.0, HeadKind::ComplexSplit);
        let m = init_mlp(&s, &mut RngStream::new(13, 0)).unwrap();
        let z = random_input(3, &mut RngStream::new(14, 0));
        match m.forward(&z).unwrap() {
            MlpOutput::Complex(re, im) => {
                for i in 0..6 {
                    let c = Complex64::new(re[i], im[i]);
                    assert_eq!(c.re, re[i]);
                    assert_eq!(c.im, im[i]);
                }
            }
            _ => panic!("expected complex output"),
        }
    }

    /// Scalar probe loss: fixed random linear functional of the outputs.
    fn probe_loss(m: &Mlp, z: &Array1<f64>, w_re: &Array1<f64>, w_im: &Array1<f64>) -> f64 {
        match m.forward(z).unwrap() {
            MlpOutput::Real(out) => out.dot(w_re),
            MlpOutput::Complex(re, im) => re.dot(w_re) + im.dot(w_im),
        }
    }

    fn check_gradients(s: &MlpSpec, seed: u64) -> f64 {
        let m = init_mlp(s, &mut RngStream::new(seed, 0)).unwrap();
        let mut rng = RngStream::new(seed, 1);
        let z = random_input(s.layer_sizes[0], &mut rng);
        let out_dim = *s.layer_sizes.last().unwrap();
        let w_re = random_input(out_dim, &mut rng);
        let w_im = random_input(out_dim, &mut rng);

        let (_, trace) = m.forward_traced(&z).unwrap();
        let upstream = match s.head {
            HeadKind::Real => MlpOutput::Real(w_re.clone()),
            HeadKind::ComplexSplit => MlpOutput::Complex(w_re.clone(), w_im.clone()),
        };
        let grads = m.backward(&trace, &upstream).unwrap();

        let mut params = Vec::new();
        m.write_params(&mut params);
        params.extend(z.iter());
        let mut analytic = Vec::new();
        grads.write_flat(&mut analytic);
        analytic.extend(grads.input.iter());

        let mut probe = m.clone();
        let z_len = z.len();
        finite_difference_check(
            |p: &[f64]| {
                let consumed = probe.read_params(&p[..p.len() - z_len]);
                assert_eq!(consumed, p.len() - z_len);
                let z_probe = Array1::from_vec(p[p.len() - z_len..].to_vec());
                probe_loss(&probe, &z_probe, &w_re, &w_im)
            },
            &mut params,
            &analytic,
            1e-6,
        )
    }

    #[test]
    fn gradients_match_finite_differences() {
        // Architectures used by both solvers, at reduced widths.
        let cases = [
            spec(&[8, 16, 16, 16, 24], &[true, true, false], 10.0, HeadKind::ComplexSplit),
            spec(&[10, 16, 20], &[true], 2.0, HeadKind::Real),
            spec(&[5, 8, 8, 4], &[true, true], 3.0, HeadKind::Real),
        ];
        for (i, s) in cases.iter().enumerate() {
            for seed in 0..3u64 {
                let err = check_gradients(s, 100 + 17 * i as u64 + seed);
                assert!(err < 1e-5, "architecture {i} seed {seed}: max rel err {err}");
            }
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let s = spec(&[4, 6, 5], &[true], 2.0, HeadKind::Real);
        let m = init_mlp(&s, &mut RngStream::new(3, 0)).unwrap();
        let z = random_input(4, &mut RngStream::new(4, 0));
        let (_, trace) = m.forward_traced(&z).unwrap();
        let grads = m
            .backward(&trace, &MlpOutput::Real(Array1::zeros(5)))
            .unwrap();
        let mut flat = Vec::new();
        grads.write_flat(&mut flat);
        flat.extend(grads.input.iter());
        assert!(flat.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn two_layer_sine_net_matches_closed_form_input_gradient() {
        // For out = W2 sin(omega0 (W1 z + b1)) + b2 and upstream g, the
        // closed form is dz = W1^T (omega0 cos(omega0 (W1 z + b1)) ⊙ (W2^T g)).
        let s = spec(&[6, 9, 12], &[true], 2.0, HeadKind::Real);
        let m = init_mlp(&s, &mut RngStream::new(21, 0)).unwrap();
        let mut rng = RngStream::new(22, 0);
        let z = random_input(6, &mut rng);
        let g = random_input(12, &mut rng);

        let (_, trace) = m.forward_traced(&z).unwrap();
        let grads = m.backward(&trace, &MlpOutput::Real(g.clone())).unwrap();

        let w1 = &m.trunk[0].weight;
        let b1 = &m.trunk[0].bias;
        let w2 = match &m.head {
            Head::Real(l) => &l.weight,
            _ => unreachable!(),
        };
        let pre = w1.dot(&z) + b1;
        let inner = Array1::from_shape_fn(9, |j| {
            2.0 * (2.0 * pre[j]).cos() * w2.t().dot(&g)[j]
        });
        let expected = w1.t().dot(&inner);
        for (a, b) in grads.input.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        let mut adam = AdamState::new(3, 0.05);
        let mut params = vec![0.0, 0.0, 0.0];
        let grads = vec![2.0, -0.5, 1e-3];
        adam.step(&mut params, &grads).unwrap();
        for (p, g) in params.iter().zip(grads.iter()) {
            let expected = -0.05 * g / (g.abs() + 1e-8);
            assert!((p - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_zero_gradient_is_noop_without_decay() {
        let mut adam = AdamState::new(2, 0.1);
        let mut params = vec![1.5, -2.5];
        adam.step(&mut params, &[0.0, 0.0]).unwrap();
        assert_eq!(params, vec![1.5, -2.5]);
    }

    #[test]
    fn adam_converges_on_scalar_quadratic() {
        let mut adam = AdamState::new(1, 0.1);
        let mut w = vec![0.0f64];
        for _ in 0..100 {
            let g = 2.0 * (w[0] - 3.0);
            adam.step(&mut w, &[g]).unwrap();
        }
        assert!((w[0] - 3.0).abs() < 0.05, "w = {}", w[0]);
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let mut adam = AdamState::new(1, 0.1);
        let mut params = vec![0.0];
        assert!(matches!(
            adam.step(&mut params, &[f64::NAN]),
            Err(CoreError::NonFinite(_))
        ));
    }

    #[test]
    fn weight_decay_shrinks_before_update() {
        let mut adam = AdamState::new(1, 0.1).with_weight_decay(0.5);
        let mut params = vec![2.0];
        adam.step(&mut params, &[0.0]).unwrap();
        // p ← p − lr·wd·p = 2 − 0.1·0.5·2; zero gradient adds nothing.
        assert!((params[0] - 1.9).abs() < 1e-12);
    }
}
