//! Adaptive-moment gradient descent over a [`ParamStore`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::ParamStore;

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig { lr, ..AdamConfig::default() }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 3e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First/second moment accumulators, aligned with the store's entry order.
pub struct OptimizerState {
    cfg: AdamConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    step: u64,
}

impl OptimizerState {
    pub fn new(store: &ParamStore, cfg: AdamConfig) -> Self {
        let first = store.iter().map(|(_, t)| vec![0.0; t.data().len()]).collect();
        let second = store.iter().map(|(_, t)| vec![0.0; t.data().len()]).collect();
        OptimizerState { cfg, first, second, step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update. Every parameter must have a gradient of matching length;
    /// a non-finite gradient aborts, naming the parameter.
    pub fn step(
        &mut self,
        params: &mut ParamStore,
        grads: &HashMap<String, Vec<f64>>,
    ) -> Result<()> {
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - self.cfg.beta1.powf(t);
        let c2 = 1.0 - self.cfg.beta2.powf(t);
        let names: Vec<String> = params.iter().map(|(n, _)| n.to_string()).collect();
        for (i, name) in names.iter().enumerate() {
            let g = grads
                .get(name)
                .ok_or_else(|| Error::Gradient(format!("missing gradient for {name}")))?;
            let tensor = params.tensor_mut(name)?;
            if g.len() != tensor.data().len() {
                return Err(Error::shape(format!("gradient length mismatch for {name}")));
            }
            if let Some(bad) = g.iter().find(|x| !x.is_finite()) {
                return Err(Error::Gradient(format!("non-finite gradient {bad} for {name}")));
            }
            let (m, v) = (&mut self.first[i], &mut self.second[i]);
            for (j, gj) in g.iter().enumerate() {
                m[j] = self.cfg.beta1 * m[j] + (1.0 - self.cfg.beta1) * gj;
                v[j] = self.cfg.beta2 * v[j] + (1.0 - self.cfg.beta2) * gj * gj;
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                tensor.data_mut()[j] -= self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Tensor;

    fn store_with(w: f64) -> ParamStore {
        let mut s = ParamStore::new();
        s.insert("w", Tensor::scalar(w));
        s
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut params = store_with(1.5);
        let mut state = OptimizerState::new(&params, AdamConfig::default());
        let mut grads = HashMap::new();
        grads.insert("w".to_string(), vec![0.0]);
        state.step(&mut params, &grads).unwrap();
        assert_eq!(params.tensor("w").unwrap().data(), &[1.5]);
    }

    #[test]
    fn one_step_descends_on_square() {
        let mut params = store_with(1.0);
        let mut state = OptimizerState::new(&params, AdamConfig::with_lr(0.05));
        let mut grads = HashMap::new();
        grads.insert("w".to_string(), vec![2.0]); // d(w²)/dw at w=1
        state.step(&mut params, &grads).unwrap();
        let w = params.tensor("w").unwrap().data()[0];
        assert!(w < 1.0 && w * w < 1.0);
    }

    #[test]
    fn updates_are_deterministic() {
        let run = || {
            let mut params = store_with(0.7);
            let mut state = OptimizerState::new(&params, AdamConfig::default());
            for k in 0..10 {
                let w = params.tensor("w").unwrap().data()[0];
                let mut grads = HashMap::new();
                grads.insert("w".to_string(), vec![2.0 * w + (k as f64) * 0.01]);
                state.step(&mut params, &grads).unwrap();
            }
            params.tensor("w").unwrap().data()[0]
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn nan_gradient_aborts_with_parameter_name() {
        let mut params = store_with(1.0);
        let mut state = OptimizerState::new(&params, AdamConfig::default());
        let mut grads = HashMap::new();
        grads.insert("w".to_string(), vec![f64::NAN]);
        let err = state.step(&mut params, &grads).unwrap_err();
        assert!(err.to_string().contains("w"));
    }
}
