use serde::{Deserialize, Serialize};

use super::LstmError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates for a fixed list of parameter tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, tensor_lens: &[usize]) -> Self {
        Self {
            config,
            first_moment: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
        }
    }
}

/// One bias-corrected Adam update:
///
/// ```text
/// m <- b1 m + (1 - b1) g          v <- b2 v + (1 - b2) g^2
/// p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
/// ```
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
) -> Result<(), LstmError> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(LstmError::ShapeMismatch(format!(
            "adam: {} parameter tensors, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[k].len() {
            return Err(LstmError::ShapeMismatch(format!(
                "adam: tensor {k} has {} parameters, {} gradients, {} moments",
                p.len(),
                g.len(),
                state.first_moment[k].len()
            )));
        }
    }

    state.step_count += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step_count as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);

    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first_moment[k];
        let v = &mut state.second_moment[k];
        for i in 0..p.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![1.0, -2.0, 3.0];
        let g = [0.0; 3];
        let mut state = AdamState::new(AdamConfig::default(), &[3]);
        adam_step(&mut [&mut p[..]], &[&g[..]], &mut state).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_is_learning_rate_sized() {
        // t = 1: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
        let mut p = [0.0];
        let mut state = AdamState::new(AdamConfig::default(), &[1]);
        adam_step(&mut [&mut p[..]], &[&[0.5][..]], &mut state).unwrap();
        let expected = -0.001 * 0.5 / (0.5 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.001).abs() < 1e-10);
    }

    #[test]
    fn constant_gradient_moves_monotonically() {
        let mut p = [1.0];
        let mut state = AdamState::new(AdamConfig::default(), &[1]);
        let mut trace = vec![p[0]];
        for _ in 0..2 {
            adam_step(&mut [&mut p[..]], &[&[0.3][..]], &mut state).unwrap();
            trace.push(p[0]);
        }
        assert!(trace[0] > trace[1] && trace[1] > trace[2]);
        assert_eq!(state.step_count, 2);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = [0.0; 2];
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        assert!(adam_step(&mut [&mut p[..]], &[&[1.0][..]], &mut state).is_err());
        assert!(adam_step(&mut [&mut p[..]], &[], &mut state).is_err());
        assert_eq!(state.step_count, 0);
    }
}
