//! Layer primitives with explicit forward and backward passes.
//!
//! Images are `[channels, height, width]`. Convolutions are stride 1 with no
//! padding; pooling windows are square, non-overlapping and drop any ragged
//! edge (floor division).

use rand::Rng as _;

use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// `y += a * x`
#[inline]
fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 8];
    let chunks = n / 8;
    for i in 0..chunks {
        let (ca, cb) = (&a[i * 8..i * 8 + 8], &b[i * 8..i * 8 + 8]);
        for l in 0..8 {
            acc[l] = acc[l] + ca[l] * cb[l];
        }
    }
    let mut tail = T::zero();
    for i in chunks * 8..n {
        tail = tail + a[i] * b[i];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

fn uniform<T: Scalar>(rng: &mut Rng, len: usize, bound: f64) -> Vec<T> {
    (0..len)
        .map(|_| T::from_f64(rng.random_range(-bound..bound)).expect("finite init"))
        .collect()
}

/// Initial weight scale for a layer.
#[derive(Clone, Copy, Debug)]
pub enum Init {
    /// Uniform in `±sqrt(6 / fan_in)`, for layers followed by ReLU.
    He,
    /// Uniform in `±sqrt(3 / fan_in)`, for the linear output layer.
    Lecun,
}

impl Init {
    fn bound(self, fan_in: usize) -> f64 {
        match self {
            Init::He => (6.0 / fan_in as f64).sqrt(),
            Init::Lecun => (3.0 / fan_in as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d<T> {
    /// `[out, in, k, k]`
    pub weight: Tensor<T>,
    /// `[out]`
    pub bias: Tensor<T>,
}

impl<T: Scalar> Conv2d<T> {
    pub fn zeros(in_ch: usize, out_ch: usize, k: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[out_ch, in_ch, k, k]),
            bias: Tensor::zeros(&[out_ch]),
        }
    }

    pub fn init(in_ch: usize, out_ch: usize, k: usize, init: Init, rng: &mut Rng) -> Self {
        let fan_in = in_ch * k * k;
        let w = uniform(rng, out_ch * fan_in, init.bound(fan_in));
        Self {
            weight: Tensor::from_vec(&[out_ch, in_ch, k, k], w).expect("sized"),
            bias: Tensor::zeros(&[out_ch]),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    pub fn output_shape(&self, input: &[usize]) -> Vec<usize> {
        let k = self.kernel();
        vec![self.out_channels(), input[1] + 1 - k, input[2] + 1 - k]
    }

    /// Unfolds `input` into `[in*k*k, oh*ow]` patch columns.
    fn im2col(&self, input: &Tensor<T>) -> Vec<T> {
        let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let k = self.kernel();
        let (oh, ow) = (h + 1 - k, w + 1 - k);
        let p = oh * ow;
        let x = input.data();
        let mut cols = vec![T::zero(); c * k * k * p];
        for ic in 0..c {
            for ky in 0..k {
                for kx in 0..k {
                    let j = (ic * k + ky) * k + kx;
                    for oy in 0..oh {
                        let src = ic * h * w + (oy + ky) * w + kx;
                        let dst = j * p + oy * ow;
                        cols[dst..dst + ow].copy_from_slice(&x[src..src + ow]);
                    }
                }
            }
        }
        cols
    }

    pub fn forward(&self, input: &Tensor<T>, branch: &'static str) -> Result<Tensor<T>> {
        let s = input.shape();
        let k = self.kernel();
        if s.len() != 3 || s[0] != self.in_channels() || s[1] < k || s[2] < k {
            return Err(Error::Shape {
                branch,
                expected: vec![self.in_channels(), k, k],
                actual: s.to_vec(),
            });
        }
        let out_shape = self.output_shape(s);
        let p = out_shape[1] * out_shape[2];
        let cols = self.im2col(input);
        let jn = self.in_channels() * k * k;
        let wt = self.weight.data();
        let mut out = Tensor::zeros(&out_shape);
        for (oc, row) in out.data_mut().chunks_mut(p).enumerate() {
            row.fill(self.bias.data()[oc]);
            for j in 0..jn {
                axpy(row, wt[oc * jn + j], &cols[j * p..(j + 1) * p]);
            }
        }
        Ok(out)
    }

    /// Accumulates parameter gradients into `grad` and, if requested, returns
    /// the gradient with respect to `input`.
    pub fn backward(
        &self,
        input: &Tensor<T>,
        dout: &Tensor<T>,
        grad: &mut Conv2d<T>,
        want_input_grad: bool,
    ) -> Option<Tensor<T>> {
        let k = self.kernel();
        let jn = self.in_channels() * k * k;
        let p = dout.shape()[1] * dout.shape()[2];
        let cols = self.im2col(input);
        let dy = dout.data();
        for oc in 0..self.out_channels() {
            let drow = &dy[oc * p..(oc + 1) * p];
            let db = &mut grad.bias.data_mut()[oc];
            *db = *db + drow.iter().copied().sum::<T>();
            let gw = &mut grad.weight.data_mut()[oc * jn..(oc + 1) * jn];
            for (j, g) in gw.iter_mut().enumerate() {
                *g = *g + dot(drow, &cols[j * p..(j + 1) * p]);
            }
        }
        if !want_input_grad {
            return None;
        }
        let mut dcols = vec![T::zero(); jn * p];
        let wt = self.weight.data();
        for oc in 0..self.out_channels() {
            let drow = &dy[oc * p..(oc + 1) * p];
            for j in 0..jn {
                axpy(&mut dcols[j * p..(j + 1) * p], wt[oc * jn + j], drow);
            }
        }
        let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
        let (oh, ow) = (dout.shape()[1], dout.shape()[2]);
        let mut dx = Tensor::zeros(input.shape());
        let dxd = dx.data_mut();
        for ic in 0..c {
            for ky in 0..k {
                for kx in 0..k {
                    let j = (ic * k + ky) * k + kx;
                    for oy in 0..oh {
                        let dst = ic * h * w + (oy + ky) * w + kx;
                        let src = j * p + oy * ow;
                        for (d, &s) in dxd[dst..dst + ow].iter_mut().zip(&dcols[src..src + ow]) {
                            *d = *d + s;
                        }
                    }
                }
            }
        }
        Some(dx)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    /// `[out, in]`
    pub weight: Tensor<T>,
    /// `[out]`
    pub bias: Tensor<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[outputs, inputs]),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn init(inputs: usize, outputs: usize, init: Init, rng: &mut Rng) -> Self {
        let w = uniform(rng, outputs * inputs, init.bound(inputs));
        Self {
            weight: Tensor::from_vec(&[outputs, inputs], w).expect("sized"),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn forward(&self, x: &Tensor<T>, branch: &'static str) -> Result<Tensor<T>> {
        if x.len() != self.inputs() {
            return Err(Error::Shape {
                branch,
                expected: vec![self.inputs()],
                actual: x.shape().to_vec(),
            });
        }
        let n = self.inputs();
        let w = self.weight.data();
        let out = (0..self.outputs())
            .map(|o| self.bias.data()[o] + dot(&w[o * n..(o + 1) * n], x.data()))
            .collect();
        Tensor::from_vec(&[self.outputs()], out)
    }

    pub fn backward(
        &self,
        x: &Tensor<T>,
        dy: &Tensor<T>,
        grad: &mut Dense<T>,
        want_input_grad: bool,
    ) -> Option<Tensor<T>> {
        let n = self.inputs();
        for (o, &g) in dy.data().iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            let b = &mut grad.bias.data_mut()[o];
            *b = *b + g;
            axpy(&mut grad.weight.data_mut()[o * n..(o + 1) * n], g, x.data());
        }
        if !want_input_grad {
            return None;
        }
        let mut dx = Tensor::zeros(&[n]);
        let w = self.weight.data();
        for (o, &g) in dy.data().iter().enumerate() {
            if g != T::zero() {
                axpy(dx.data_mut(), g, &w[o * n..(o + 1) * n]);
            }
        }
        Some(dx)
    }
}

pub fn relu_inplace<T: Scalar>(t: &mut Tensor<T>) {
    for v in t.data_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Masks `dout` by the positive entries of the ReLU output.
pub fn relu_backward<T: Scalar>(dout: &mut Tensor<T>, out: &Tensor<T>) {
    for (d, &o) in dout.data_mut().iter_mut().zip(out.data()) {
        if o <= T::zero() {
            *d = T::zero();
        }
    }
}

/// Non-overlapping square max pooling with the winning input index per output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxPool {
    pub size: usize,
}

impl MaxPool {
    pub fn output_shape(&self, input: &[usize]) -> Vec<usize> {
        vec![input[0], input[1] / self.size, input[2] / self.size]
    }

    pub fn forward<T: Scalar>(&self, input: &Tensor<T>) -> (Tensor<T>, Vec<u32>) {
        let s = input.shape();
        let (c, h, w) = (s[0], s[1], s[2]);
        let out_shape = self.output_shape(s);
        let (oh, ow) = (out_shape[1], out_shape[2]);
        let mut out = Tensor::zeros(&out_shape);
        let mut argmax = vec![0u32; c * oh * ow];
        let x = input.data();
        let od = out.data_mut();
        for ch in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = ch * h * w + oy * self.size * w + ox * self.size;
                    for dy in 0..self.size {
                        let row = ch * h * w + (oy * self.size + dy) * w + ox * self.size;
                        for i in row..row + self.size {
                            if x[i] > x[best] {
                                best = i;
                            }
                        }
                    }
                    let o = (ch * oh + oy) * ow + ox;
                    od[o] = x[best];
                    argmax[o] = best as u32;
                }
            }
        }
        (out, argmax)
    }

    pub fn backward<T: Scalar>(&self, dout: &Tensor<T>, argmax: &[u32], input_shape: &[usize]) -> Tensor<T> {
        let mut dx = Tensor::zeros(input_shape);
        let d = dx.data_mut();
        for (&g, &i) in dout.data().iter().zip(argmax) {
            d[i as usize] = d[i as usize] + g;
        }
        dx
    }
}

/// Flattens and joins tensors end to end.
pub fn concat<T: Scalar>(parts: &[&Tensor<T>]) -> Tensor<T> {
    let mut data = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        data.extend_from_slice(p.data());
    }
    let n = data.len();
    Tensor::from_vec(&[n], data).expect("sized")
}

/// Inverse of [`concat`] for gradients: cuts `grad` back into the given shapes.
pub fn split<T: Scalar>(grad: &Tensor<T>, shapes: &[&[usize]]) -> Vec<Tensor<T>> {
    let mut offset = 0;
    shapes
        .iter()
        .map(|s| {
            let n: usize = s.iter().product();
            let t = Tensor::from_vec(s, grad.data()[offset..offset + n].to_vec()).expect("sized");
            offset += n;
            t
        })
        .collect()
}
