use super::network::Parameters;
use super::tensor::{Scalar, Tensor};

/// Adam with bias-corrected moment estimates.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub lr: f64,
    /// Per-element multipliers of `lr`, one entry per tensor in
    /// [`Parameters::params`] order; `None` means 1 everywhere.
    lr_scales: Vec<Option<Vec<T>>>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new<P: Parameters<T>>(params: &P, lr: f64) -> Self {
        let zeros: Vec<Tensor<T>> = params.params().iter().map(|p| Tensor::zeros(p.shape())).collect();
        Self {
            lr,
            lr_scales: vec![None; zeros.len()],
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    /// Multiplies the learning rate of the given elements of tensor `tensor`.
    pub fn scale_lr(&mut self, tensor: usize, elements: impl IntoIterator<Item = usize>, factor: f64) {
        let len = self.m[tensor].len();
        let f = T::from_f64(factor).expect("finite factor");
        let scales = self.lr_scales[tensor].get_or_insert_with(|| vec![T::one(); len]);
        for i in elements {
            scales[i] = scales[i] * f;
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step<P: Parameters<T>>(&mut self, params: &mut P, grads: &P) {
        self.step += 1;
        let t = self.step as i32;
        let c = |x: f64| T::from_f64(x).expect("finite hyperparameter");
        let (b1, b2) = (c(self.beta1), c(self.beta2));
        let (one_b1, one_b2) = (c(1.0 - self.beta1), c(1.0 - self.beta2));
        // Bias corrections folded into the step size.
        let step_size = c(self.lr / (1.0 - self.beta1.powi(t)));
        let v_corr = c(1.0 / (1.0 - self.beta2.powi(t)));
        let eps = c(self.eps);
        for ((((p, g), m), v), scales) in params
            .params_mut()
            .into_iter()
            .zip(grads.params())
            .zip(&mut self.m)
            .zip(&mut self.v)
            .zip(&self.lr_scales)
        {
            for (i, (((pi, &gi), mi), vi)) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
                .enumerate()
            {
                *mi = b1 * *mi + one_b1 * gi;
                *vi = b2 * *vi + one_b2 * gi * gi;
                let lr = scales.as_ref().map_or(step_size, |s| step_size * s[i]);
                *pi = *pi - lr * *mi / ((*vi * v_corr).sqrt() + eps);
            }
        }
    }
}
