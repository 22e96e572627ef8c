//! A small fixed-architecture neural engine: tensors, convolution, pooling and
//! dense layers with hand-written backward passes, Adam, and checkpoints.

pub mod checkpoint;
pub mod layers;
pub mod network;
pub mod optim;
pub mod tensor;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use network::{ForwardCache, Mlp, NetInput, Network, Parameters, QFunction, ACTIONS, PARAM_COUNT};
pub use optim::Adam;
pub use tensor::{Scalar, Tensor};
pub use train::{train_batch, Sample};
