//! The fixed multi-branch Q-network.
//!
//! Shape ledger (channels x height x width):
//!
//! | branch                         | layers                                         | output     |
//! |--------------------------------|------------------------------------------------|------------|
//! | explored, unexplored, own pos, other pos (1x32x32 each) | conv 1x1 x32, ReLU, maxpool 2 | 32x16x16   |
//! | walls (1x64x64)                | conv 5x5 x32, ReLU (32x60x60), maxpool 4 (32x15x15), conv 5x5 x64, ReLU (64x11x11), maxpool 4 | 64x2x2 |
//! | local (18)                     | dense 62, ReLU, dense 32, ReLU                 | 32         |
//! | head                           | concat (33056), dense 32, ReLU, dense 6        | 6          |

use super::layers::{concat, relu_backward, relu_inplace, split, Conv2d, Dense, Init, MaxPool};
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const ACTIONS: usize = 6;
pub const MAP_SIDE: usize = 32;
pub const WALL_SIDE: usize = 64;
pub const LOCAL_FEATURES: usize = 18;
pub const MAP_CHANNELS: usize = 32;
pub const LOCAL_HIDDEN: usize = 62;
pub const LOCAL_OUT: usize = 32;
pub const HEAD_HIDDEN: usize = 32;

const MAP_POOL: MaxPool = MaxPool { size: 2 };
const WALL_POOL: MaxPool = MaxPool { size: 4 };

pub const MAP_BRANCH_NAMES: [&str; 4] = ["explored", "unexplored", "own_pos", "other_pos"];

/// Flattened width of the concatenated features fed to the head.
pub const JOINT_FEATURES: usize = 4 * MAP_CHANNELS * 16 * 16 + 64 * 2 * 2 + LOCAL_OUT;

/// Total number of trainable scalars.
pub const PARAM_COUNT: usize = 4 * (MAP_CHANNELS + MAP_CHANNELS)
    + (32 * 25 + 32)
    + (64 * 32 * 25 + 64)
    + (LOCAL_FEATURES * LOCAL_HIDDEN + LOCAL_HIDDEN)
    + (LOCAL_HIDDEN * LOCAL_OUT + LOCAL_OUT)
    + (JOINT_FEATURES * HEAD_HIDDEN + HEAD_HIDDEN)
    + (HEAD_HIDDEN * ACTIONS + ACTIONS);

/// Anything with an ordered list of parameter tensors.
pub trait Parameters<T: Scalar> {
    fn params(&self) -> Vec<&Tensor<T>>;
    fn params_mut(&mut self) -> Vec<&mut Tensor<T>>;

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

/// A differentiable action-value function.
pub trait QFunction<T: Scalar>: Parameters<T> + Clone {
    type Input;
    type Cache;

    fn forward(&self, input: &Self::Input) -> Result<(Tensor<T>, Self::Cache)>;

    /// Accumulates parameter gradients for output gradient `dq` into `grads`.
    fn backward(&self, cache: &Self::Cache, dq: &Tensor<T>, grads: &mut Self) -> Result<()>;

    fn zeros_like(&self) -> Self;
}

/// Network inputs as tensors: four `1x32x32` maps, the `1x64x64` wall image
/// and the 18 local features.
#[derive(Clone, Debug, PartialEq)]
pub struct NetInput<T> {
    pub maps: [Tensor<T>; 4],
    pub walls: Tensor<T>,
    pub local: Tensor<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    pub maps: [Conv2d<T>; 4],
    pub walls1: Conv2d<T>,
    pub walls2: Conv2d<T>,
    pub local1: Dense<T>,
    pub local2: Dense<T>,
    pub head1: Dense<T>,
    pub head2: Dense<T>,
}

/// Activations kept from a forward pass for the matching backward pass.
#[derive(Clone, Debug, Default)]
pub struct ForwardCache<T> {
    map_in: Vec<Tensor<T>>,
    map_act: Vec<Tensor<T>>,
    map_idx: Vec<Vec<u32>>,
    walls_in: Option<Tensor<T>>,
    walls_act1: Option<Tensor<T>>,
    walls_idx1: Vec<u32>,
    walls_pool1: Option<Tensor<T>>,
    walls_act2: Option<Tensor<T>>,
    walls_idx2: Vec<u32>,
    local_in: Option<Tensor<T>>,
    local_h1: Option<Tensor<T>>,
    local_h2: Option<Tensor<T>>,
    joint: Option<Tensor<T>>,
    head_h1: Option<Tensor<T>>,
}

/// Intermediate shapes observed during a forward pass, per branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeLedger {
    pub map_conv: Vec<usize>,
    pub map_pool: Vec<usize>,
    pub walls_conv1: Vec<usize>,
    pub walls_pool1: Vec<usize>,
    pub walls_conv2: Vec<usize>,
    pub walls_pool2: Vec<usize>,
    pub local: Vec<usize>,
    pub joint: Vec<usize>,
    pub output: Vec<usize>,
}

fn missing() -> Error {
    Error::Invariant("backward called without a matching forward cache".into())
}

impl<T: Scalar> Network<T> {
    pub fn zeros() -> Self {
        Self {
            maps: std::array::from_fn(|_| Conv2d::zeros(1, MAP_CHANNELS, 1)),
            walls1: Conv2d::zeros(1, 32, 5),
            walls2: Conv2d::zeros(32, 64, 5),
            local1: Dense::zeros(LOCAL_FEATURES, LOCAL_HIDDEN),
            local2: Dense::zeros(LOCAL_HIDDEN, LOCAL_OUT),
            head1: Dense::zeros(JOINT_FEATURES, HEAD_HIDDEN),
            head2: Dense::zeros(HEAD_HIDDEN, ACTIONS),
        }
    }

    /// Fan-in scaled uniform weights and zero biases.
    pub fn init(rng: &mut Rng) -> Self {
        Self {
            maps: std::array::from_fn(|_| Conv2d::init(1, MAP_CHANNELS, 1, Init::He, rng)),
            walls1: Conv2d::init(1, 32, 5, Init::He, rng),
            walls2: Conv2d::init(32, 64, 5, Init::He, rng),
            local1: Dense::init(LOCAL_FEATURES, LOCAL_HIDDEN, Init::He, rng),
            local2: Dense::init(LOCAL_HIDDEN, LOCAL_OUT, Init::He, rng),
            head1: Dense::init(JOINT_FEATURES, HEAD_HIDDEN, Init::He, rng),
            head2: Dense::init(HEAD_HIDDEN, ACTIONS, Init::Lecun, rng),
        }
    }

    /// Parameter names in manifest order, matching [`Parameters::params`].
    pub fn param_names() -> Vec<String> {
        let mut layers: Vec<String> = MAP_BRANCH_NAMES.iter().map(|b| format!("{b}.conv")).collect();
        layers.extend(
            ["walls.conv1", "walls.conv2", "local.dense1", "local.dense2", "head.dense1", "head.dense2"]
                .map(String::from),
        );
        layers
            .into_iter()
            .flat_map(|l| [format!("{l}.weight"), format!("{l}.bias")])
            .collect()
    }

    pub fn cast<U: Scalar>(&self) -> Network<U> {
        let conv = |c: &Conv2d<T>| Conv2d { weight: c.weight.cast(), bias: c.bias.cast() };
        let dense = |d: &Dense<T>| Dense { weight: d.weight.cast(), bias: d.bias.cast() };
        Network {
            maps: std::array::from_fn(|i| conv(&self.maps[i])),
            walls1: conv(&self.walls1),
            walls2: conv(&self.walls2),
            local1: dense(&self.local1),
            local2: dense(&self.local2),
            head1: dense(&self.head1),
            head2: dense(&self.head2),
        }
    }

    /// Q-values only.
    pub fn predict(&self, input: &NetInput<T>) -> Result<[T; ACTIONS]> {
        let (q, _) = self.forward(input)?;
        let mut out = [T::zero(); ACTIONS];
        out.copy_from_slice(q.data());
        Ok(out)
    }

    /// Runs a forward pass and reports every intermediate shape.
    pub fn shape_ledger(&self, input: &NetInput<T>) -> Result<ShapeLedger> {
        let (q, c) = self.forward(input)?;
        let shape = |t: &Option<Tensor<T>>| t.as_ref().map(|t| t.shape().to_vec()).unwrap_or_default();
        Ok(ShapeLedger {
            map_conv: c.map_act[0].shape().to_vec(),
            map_pool: MAP_POOL.output_shape(c.map_act[0].shape()),
            walls_conv1: shape(&c.walls_act1),
            walls_pool1: shape(&c.walls_pool1),
            walls_conv2: shape(&c.walls_act2),
            walls_pool2: WALL_POOL.output_shape(&shape(&c.walls_act2)),
            local: shape(&c.local_h2),
            joint: shape(&c.joint),
            output: q.shape().to_vec(),
        })
    }
}

impl<T: Scalar> Parameters<T> for Network<T> {
    fn params(&self) -> Vec<&Tensor<T>> {
        let mut v = Vec::with_capacity(20);
        for c in &self.maps {
            v.push(&c.weight);
            v.push(&c.bias);
        }
        for c in [&self.walls1, &self.walls2] {
            v.push(&c.weight);
            v.push(&c.bias);
        }
        for d in [&self.local1, &self.local2, &self.head1, &self.head2] {
            v.push(&d.weight);
            v.push(&d.bias);
        }
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut v = Vec::with_capacity(20);
        for c in &mut self.maps {
            v.push(&mut c.weight);
            v.push(&mut c.bias);
        }
        for c in [&mut self.walls1, &mut self.walls2] {
            v.push(&mut c.weight);
            v.push(&mut c.bias);
        }
        for d in [&mut self.local1, &mut self.local2, &mut self.head1, &mut self.head2] {
            v.push(&mut d.weight);
            v.push(&mut d.bias);
        }
        v
    }
}

impl<T: Scalar> QFunction<T> for Network<T> {
    type Input = NetInput<T>;
    type Cache = ForwardCache<T>;

    fn forward(&self, input: &NetInput<T>) -> Result<(Tensor<T>, ForwardCache<T>)> {
        let mut cache = ForwardCache::default();
        let mut pooled_maps = Vec::with_capacity(4);
        for (i, conv) in self.maps.iter().enumerate() {
            let x = &input.maps[i];
            x.expect_shape(MAP_BRANCH_NAMES[i], &[1, MAP_SIDE, MAP_SIDE])?;
            let mut a = conv.forward(x, MAP_BRANCH_NAMES[i])?;
            relu_inplace(&mut a);
            let (p, idx) = MAP_POOL.forward(&a);
            cache.map_in.push(x.clone());
            cache.map_act.push(a);
            cache.map_idx.push(idx);
            pooled_maps.push(p);
        }

        input.walls.expect_shape("walls", &[1, WALL_SIDE, WALL_SIDE])?;
        let mut a1 = self.walls1.forward(&input.walls, "walls")?;
        relu_inplace(&mut a1);
        let (p1, idx1) = WALL_POOL.forward(&a1);
        let mut a2 = self.walls2.forward(&p1, "walls")?;
        relu_inplace(&mut a2);
        let (p2, idx2) = WALL_POOL.forward(&a2);

        input.local.expect_shape("local", &[LOCAL_FEATURES])?;
        let mut h1 = self.local1.forward(&input.local, "local")?;
        relu_inplace(&mut h1);
        let mut h2 = self.local2.forward(&h1, "local")?;
        relu_inplace(&mut h2);

        let mut parts: Vec<&Tensor<T>> = pooled_maps.iter().collect();
        parts.push(&p2);
        parts.push(&h2);
        let joint = concat(&parts);
        let mut g1 = self.head1.forward(&joint, "head")?;
        relu_inplace(&mut g1);
        let q = self.head2.forward(&g1, "head")?;
        if !q.all_finite() {
            return Err(Error::NonFinite("network output".into()));
        }

        cache.walls_in = Some(input.walls.clone());
        cache.walls_act1 = Some(a1);
        cache.walls_idx1 = idx1;
        cache.walls_pool1 = Some(p1);
        cache.walls_act2 = Some(a2);
        cache.walls_idx2 = idx2;
        cache.local_in = Some(input.local.clone());
        cache.local_h1 = Some(h1);
        cache.local_h2 = Some(h2);
        cache.joint = Some(joint);
        cache.head_h1 = Some(g1);
        Ok((q, cache))
    }

    fn backward(&self, cache: &ForwardCache<T>, dq: &Tensor<T>, grads: &mut Self) -> Result<()> {
        dq.expect_shape("head", &[ACTIONS])?;
        if cache.map_act.len() != 4 {
            return Err(missing());
        }
        let joint = cache.joint.as_ref().ok_or_else(missing)?;
        let g1 = cache.head_h1.as_ref().ok_or_else(missing)?;

        let mut dg1 = self.head2.backward(g1, dq, &mut grads.head2, true).expect("input grad");
        relu_backward(&mut dg1, g1);
        let djoint = self.head1.backward(joint, &dg1, &mut grads.head1, true).expect("input grad");

        let map_pooled = MAP_POOL.output_shape(cache.map_act[0].shape());
        let a2 = cache.walls_act2.as_ref().ok_or_else(missing)?;
        let walls_pooled = WALL_POOL.output_shape(a2.shape());
        let mut shapes: Vec<&[usize]> = vec![&map_pooled; 4];
        shapes.push(&walls_pooled);
        let local_shape = [LOCAL_OUT];
        shapes.push(&local_shape);
        let mut pieces = split(&djoint, &shapes).into_iter();

        for i in 0..4 {
            let dp = pieces.next().expect("four map pieces");
            let act = &cache.map_act[i];
            let mut da = MAP_POOL.backward(&dp, &cache.map_idx[i], act.shape());
            relu_backward(&mut da, act);
            self.maps[i].backward(&cache.map_in[i], &da, &mut grads.maps[i], false);
        }

        let dp2 = pieces.next().expect("walls piece");
        let mut da2 = WALL_POOL.backward(&dp2, &cache.walls_idx2, a2.shape());
        relu_backward(&mut da2, a2);
        let p1 = cache.walls_pool1.as_ref().ok_or_else(missing)?;
        let dp1 = self.walls2.backward(p1, &da2, &mut grads.walls2, true).expect("input grad");
        let a1 = cache.walls_act1.as_ref().ok_or_else(missing)?;
        let mut da1 = WALL_POOL.backward(&dp1, &cache.walls_idx1, a1.shape());
        relu_backward(&mut da1, a1);
        let wall_in = cache.walls_in.as_ref().ok_or_else(missing)?;
        self.walls1.backward(wall_in, &da1, &mut grads.walls1, false);

        let mut dh2 = pieces.next().expect("local piece");
        let h2 = cache.local_h2.as_ref().ok_or_else(missing)?;
        let h1 = cache.local_h1.as_ref().ok_or_else(missing)?;
        relu_backward(&mut dh2, h2);
        let mut dh1 = self.local2.backward(h1, &dh2, &mut grads.local2, true).expect("input grad");
        relu_backward(&mut dh1, h1);
        let local_in = cache.local_in.as_ref().ok_or_else(missing)?;
        self.local1.backward(local_in, &dh1, &mut grads.local1, false);
        Ok(())
    }

    fn zeros_like(&self) -> Self {
        Self::zeros()
    }
}

/// A two-layer perceptron: dense, ReLU, dense. Used to probe the optimizer and
/// training loop on small problems.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    pub hidden: Dense<T>,
    pub out: Dense<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn init(inputs: usize, hidden: usize, outputs: usize, rng: &mut Rng) -> Self {
        Self {
            hidden: Dense::init(inputs, hidden, Init::He, rng),
            out: Dense::init(hidden, outputs, Init::Lecun, rng),
        }
    }
}

impl<T: Scalar> Parameters<T> for Mlp<T> {
    fn params(&self) -> Vec<&Tensor<T>> {
        vec![&self.hidden.weight, &self.hidden.bias, &self.out.weight, &self.out.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![
            &mut self.hidden.weight,
            &mut self.hidden.bias,
            &mut self.out.weight,
            &mut self.out.bias,
        ]
    }
}

impl<T: Scalar> QFunction<T> for Mlp<T> {
    type Input = Tensor<T>;
    type Cache = (Tensor<T>, Tensor<T>);

    fn forward(&self, input: &Tensor<T>) -> Result<(Tensor<T>, Self::Cache)> {
        let mut h = self.hidden.forward(input, "mlp")?;
        relu_inplace(&mut h);
        let y = self.out.forward(&h, "mlp")?;
        Ok((y, (input.clone(), h)))
    }

    fn backward(&self, cache: &Self::Cache, dq: &Tensor<T>, grads: &mut Self) -> Result<()> {
        let (x, h) = cache;
        let mut dh = self.out.backward(h, dq, &mut grads.out, true).expect("input grad");
        relu_backward(&mut dh, h);
        self.hidden.backward(x, &dh, &mut grads.hidden, false);
        Ok(())
    }

    fn zeros_like(&self) -> Self {
        Self {
            hidden: Dense::zeros(self.hidden.inputs(), self.hidden.outputs()),
            out: Dense::zeros(self.out.inputs(), self.out.outputs()),
        }
    }
}
