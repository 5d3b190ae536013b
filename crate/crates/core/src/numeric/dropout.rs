use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::tensor::DenseVector;
use crate::scalar::Scalar;

/// Inverted-dropout configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutSpec {
    rate: f64,
    seed: u64,
}

impl DropoutSpec {
    pub fn new(rate: f64, seed: u64) -> Result<Self> {
        validate_rate(rate)?;
        Ok(Self { rate, seed })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub(crate) fn validate_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")))
    }
}

/// Per-entry multipliers: `0` for dropped entries, `1/(1-p)` for survivors.
pub fn dropout_mask<T: Scalar, R: Rng + ?Sized>(dim: usize, rate: f64, rng: &mut R) -> Vec<T> {
    if rate == 0.0 {
        return vec![T::one(); dim];
    }
    let keep = T::of(1.0 / (1.0 - rate));
    (0..dim)
        .map(|_| {
            if rng.random::<f64>() < rate {
                T::zero()
            } else {
                keep
            }
        })
        .collect()
}

/// Identity outside training; seeded inverted dropout during training.
pub fn dropout_apply<T: Scalar>(x: &DenseVector<T>, spec: &DropoutSpec, training: bool) -> DenseVector<T> {
    if !training || spec.rate == 0.0 {
        return x.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mask: Vec<T> = dropout_mask(x.dim(), spec.rate, &mut rng);
    x.iter().zip(mask).map(|(&v, m)| v * m).collect::<Vec<_>>().into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_mode_and_zero_rate_are_identity() {
        let x = DenseVector::<f64>::from_f64(&[1.5, -2.0, 0.25]);
        let spec = DropoutSpec::new(0.2, 9).unwrap();
        assert_eq!(dropout_apply(&x, &spec, false), x);
        let zero = DropoutSpec::new(0.0, 9).unwrap();
        assert_eq!(dropout_apply(&x, &zero, true), x);
    }

    #[test]
    fn rejects_rates_outside_unit_interval() {
        assert!(DropoutSpec::new(1.0, 0).is_err());
        assert!(DropoutSpec::new(-0.1, 0).is_err());
    }

    #[test]
    fn train_mode_preserves_expectation() {
        let n = 100_000;
        let x = DenseVector::<f64>::new(vec![1.0; n]);
        let spec = DropoutSpec::new(0.2, 42).unwrap();
        let y = dropout_apply(&x, &spec, true);
        let mean = y.iter().sum::<f64>() / n as f64;
        // each entry is 1.25 w.p. 0.8: sd of the mean = sqrt(0.25)/sqrt(n)
        let sigma = (0.8f64 * 0.2).sqrt() * 1.25 / (n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sigma, "mean {mean}");
        assert!((mean - 1.0).abs() < 0.01);
        assert!(y.iter().all(|&v| v == 0.0 || v == 1.25));
    }

    #[test]
    fn same_seed_same_mask() {
        let x = DenseVector::<f64>::new(vec![1.0; 64]);
        let spec = DropoutSpec::new(0.5, 3).unwrap();
        assert_eq!(dropout_apply(&x, &spec, true), dropout_apply(&x, &spec, true));
    }
}
