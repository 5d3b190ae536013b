use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hyperparameters of the Adam update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    config: AdamConfig,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(shapes: &[usize], config: AdamConfig) -> Self {
        Self {
            config,
            m: shapes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: shapes.iter().map(|&n| vec![T::zero(); n]).collect(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> AdamConfig {
        self.config
    }

    pub fn first_moments(&self) -> &[Vec<T>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<T>] {
        &self.v
    }
}

/// One bias-corrected Adam update over every parameter tensor.
pub fn adam_step<T: Scalar, G: AsRef<[T]>>(
    params: &mut [&mut [T]],
    grads: &[G],
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Shape {
            context: "adam gradient tensors",
            expected: params.len(),
            actual: grads.len(),
        });
    }
    if params.len() != state.m.len() {
        return Err(Error::Shape {
            context: "adam state tensors",
            expected: state.m.len(),
            actual: params.len(),
        });
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        let g = g.as_ref();
        if p.len() != g.len() || p.len() != m.len() {
            return Err(Error::Shape {
                context: "adam tensor length",
                expected: p.len(),
                actual: if p.len() != g.len() { g.len() } else { m.len() },
            });
        }
    }

    state.step += 1;
    let AdamConfig { beta1, beta2, eps } = state.config;
    let t = state.step as i32;
    let b1 = T::of(beta1);
    let b2 = T::of(beta2);
    let one = T::one();
    let c1 = T::of(1.0 - beta1.powi(t));
    let c2 = T::of(1.0 - beta2.powi(t));
    let lr = T::of(lr);
    let eps = T::of(eps);

    for (i, p) in params.iter_mut().enumerate() {
        let g = grads[i].as_ref();
        let m = &mut state.m[i];
        let v = &mut state.v[i];
        for j in 0..p.len() {
            m[j] = b1 * m[j] + (one - b1) * g[j];
            v[j] = b2 * v[j] + (one - b2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn run(grads: &[f64], lr: f64) -> (Vec<f64>, AdamState<f64>) {
        let mut p = vec![0.5f64];
        let mut st = AdamState::new(&[1], AdamConfig::default());
        let mut trace = Vec::new();
        for &g in grads {
            let before = p[0];
            adam_step(&mut [&mut p[..]], &[vec![g]], &mut st, lr).unwrap();
            trace.push(p[0] - before);
        }
        (trace, st)
    }

    #[test]
    fn zero_gradient_is_a_noop() {
        let (deltas, st) = run(&[0.0; 25], 0.01);
        assert!(deltas.iter().all(|&d| d == 0.0));
        assert_eq!(st.step(), 25);
    }

    #[test]
    fn first_and_second_steps_move_by_lr() {
        let (deltas, _) = run(&[1.0, 1.0], 0.01);
        assert_abs_diff_eq!(deltas[0], -0.01, epsilon = 1e-6);
        assert_abs_diff_eq!(deltas[1], -0.01, epsilon = 1e-4);
    }

    #[test]
    fn second_moments_stay_nonnegative() {
        let (_, st) = run(&[3.0, -2.0, 0.5, -7.0], 0.1);
        assert!(st.second_moments().iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut p = vec![0.0f64; 3];
        let mut st = AdamState::new(&[3], AdamConfig::default());
        assert!(adam_step(&mut [&mut p[..]], &[vec![0.0; 2]], &mut st, 0.01).is_err());
        assert!(adam_step::<f64, Vec<f64>>(&mut [&mut p[..]], &[], &mut st, 0.01).is_err());
        assert_eq!(st.step(), 0);
    }
}
