use serde::Serialize;

use crate::error::{Error, Result};

/// Linear warmup over the first tenth of training, then linear decay to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WarmupSchedule {
    pub base_lr: f64,
    pub warmup_steps: u64,
    pub total_steps: u64,
}

impl WarmupSchedule {
    pub fn new(base_lr: f64, total_steps: u64) -> Self {
        let warmup_steps = total_steps.div_ceil(10).max(1).min(total_steps.max(1));
        Self {
            base_lr,
            warmup_steps,
            total_steps,
        }
    }

    pub fn lr(&self, t: u64) -> f64 {
        if t <= self.warmup_steps {
            return self.base_lr * t as f64 / self.warmup_steps as f64;
        }
        if t >= self.total_steps {
            return 0.0;
        }
        self.base_lr * (self.total_steps - t) as f64 / (self.total_steps - self.warmup_steps) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zeroed moments shaped like `params`.
    pub fn new(params: &[&[f64]]) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| vec![0.0; p.len()]).collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update with bias correction and decoupled weight decay
/// (`p <- p (1 - lr wd)` before the moment step). Returns the learning rate
/// used.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    sched: &WarmupSchedule,
    weight_decay: f64,
) -> Result<f64> {
    let shapes_ok = params.len() == grads.len()
        && params.len() == state.m.len()
        && params
            .iter()
            .zip(grads)
            .zip(&state.m)
            .all(|((p, g), m)| p.len() == g.len() && p.len() == m.len());
    if !shapes_ok {
        return Err(Error::Shape(
            "parameters, gradients and Adam state disagree".into(),
        ));
    }

    state.t += 1;
    let lr = sched.lr(state.t);
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let decay = 1.0 - lr * weight_decay;

    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for i in 0..p.len() {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] = p[i] * decay - lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(lr)
}
