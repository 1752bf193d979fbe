use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::tape::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn new(lr: f64, beta1: f64, beta2: f64) -> Self {
        AdamConfig {
            lr,
            beta1,
            beta2,
            ..AdamConfig::default()
        }
    }
}

/// First and second moments for a fixed list of parameter arrays.
#[derive(Clone, Debug)]
pub struct AdamState {
    cfg: AdamConfig,
    step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(cfg: AdamConfig, params: &[&Tensor]) -> Self {
        AdamState {
            cfg,
            step: 0,
            m: params.iter().map(|p| Tensor::zeros(p.raw_dim())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.raw_dim())).collect(),
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.cfg
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[Tensor] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Tensor] {
        &self.v
    }

    /// One bias-corrected descent step. Nothing is modified when a gradient
    /// is non-finite or shapes disagree.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        adam_step(self, params, grads)
    }
}

/// Applies `θ ← θ − lr · m̂ / (√v̂ + ε)` to every parameter array.
pub fn adam_step(state: &mut AdamState, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::Shape(format!(
            "optimizer tracks {} arrays, got {} parameters and {} gradients",
            state.m.len(),
            params.len(),
            grads.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.dim() != state.m[i].dim() || g.dim() != state.m[i].dim() {
            return Err(Error::Shape(format!("parameter {i} changed shape")));
        }
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of parameter {i}")));
        }
    }
    state.step += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = state.cfg;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        Zip::from(&mut **p)
            .and(g)
            .and(m)
            .and(v)
            .for_each(|p, &g, m, v| {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
    }
    Ok(())
}
