use super::network::QFunction;
use super::optim::Adam;
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};
use crate::rl::q_target;

/// One transition as seen by the learner.
#[derive(Clone, Copy, Debug)]
pub struct Sample<'a, I> {
    pub state: &'a I,
    pub action: usize,
    pub reward: f64,
    pub next_state: &'a I,
    pub terminal: bool,
}

/// One optimizer step on the mean squared error between `Q(s, a)` and the
/// bootstrapped target. Targets are computed with the pre-update parameters
/// and treated as constants. Returns the batch loss.
pub fn train_batch<T: Scalar, Q: QFunction<T>>(
    net: &mut Q,
    opt: &mut Adam<T>,
    batch: &[Sample<'_, Q::Input>],
    gamma: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Config("train_batch needs at least one sample".into()));
    }
    let mut grads = net.zeros_like();
    let scale = 2.0 / batch.len() as f64;
    let mut loss = 0.0;
    for s in batch {
        let target = q_target(s.reward, s.next_state, s.terminal, net, gamma)?;
        let (q, cache) = net.forward(s.state)?;
        let predicted = q.data()[s.action].to_f64().expect("finite");
        let err = predicted - target;
        loss += err * err;
        let mut dq = Tensor::zeros(q.shape());
        dq.data_mut()[s.action] = T::from_f64(scale * err).expect("finite");
        net.backward(&cache, &dq, &mut grads)?;
    }
    loss /= batch.len() as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("training loss {loss}")));
    }
    opt.step(net, &grads);
    if net.params().iter().any(|p| !p.all_finite()) {
        return Err(Error::NonFinite("parameters after optimizer step".into()));
    }
    Ok(loss)
}
