use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before taking logs.
pub const BCE_CLAMP: f64 = 1e-7;

fn check_label<T: Scalar>(y: T) -> Result<()> {
    if y == T::zero() || y == T::one() {
        Ok(())
    } else {
        Err(Error::Label(y.as_f64()))
    }
}

fn clamp_prob<T: Scalar>(p: T) -> T {
    let eps = T::of(BCE_CLAMP);
    p.max(eps).min(T::one() - eps)
}

/// Binary cross-entropy of a single prediction.
pub fn bce_loss<T: Scalar>(y_hat: T, y: T) -> Result<T> {
    check_label(y)?;
    if !y_hat.is_finite() {
        return Err(Error::NonFinite("bce prediction"));
    }
    let p = clamp_prob(y_hat);
    Ok(-(y * p.ln() + (T::one() - y) * (T::one() - p).ln()))
}

/// `dL/dŷ` of [`bce_loss`]; zero where the clamp is active.
pub fn bce_grad<T: Scalar>(y_hat: T, y: T) -> Result<T> {
    check_label(y)?;
    let eps = T::of(BCE_CLAMP);
    if y_hat < eps || y_hat > T::one() - eps {
        return Ok(T::zero());
    }
    Ok(-y / y_hat + (T::one() - y) / (T::one() - y_hat))
}

/// Mean binary cross-entropy over `(ŷ, y)` pairs.
pub fn bce_batch<T: Scalar>(pairs: &[(T, T)]) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    let mut total = T::zero();
    for &(p, y) in pairs {
        total += bce_loss(p, y)?;
    }
    Ok(total / T::of(pairs.len() as f64))
}

pub fn squared_error<T: Scalar>(pred: T, target: T) -> Result<T> {
    if !pred.is_finite() || !target.is_finite() {
        return Err(Error::NonFinite("squared error operands"));
    }
    let d = pred - target;
    Ok(d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::activation::sigmoid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn bce_examples() {
        let perfect = bce_loss(1.0 - BCE_CLAMP, 1.0f64).unwrap();
        assert!((0.0..=2.0 * BCE_CLAMP).contains(&perfect));
        assert_abs_diff_eq!(bce_loss(0.5, 1.0f64).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            bce_batch(&[(0.5, 1.0f64), (0.5, 0.0)]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert!(matches!(bce_loss(0.5, 0.5f64), Err(Error::Label(_))));
    }

    #[test]
    fn saturated_predictions_stay_finite() {
        assert!(bce_loss(0.0, 1.0f64).unwrap().is_finite());
        assert!(bce_loss(1.0, 0.0f64).unwrap().is_finite());
        assert_eq!(bce_grad(0.0, 1.0f64).unwrap(), 0.0);
    }

    #[test]
    fn squared_error_examples() {
        assert_eq!(squared_error(0.7, 0.7f64).unwrap(), 0.0);
        assert_eq!(squared_error(1.0, -1.0f64).unwrap(), 4.0);
        assert_eq!(squared_error(0.25, 0.5f64).unwrap(), 0.0625);
        assert!(squared_error(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn bce_through_sigmoid_has_canonical_gradient() {
        // d/dz bce(sigmoid(z), y) = sigmoid(z) - y
        let z = 0.0f64;
        let p = sigmoid(z);
        let dz = bce_grad(p, 1.0).unwrap() * p * (1.0 - p);
        assert_abs_diff_eq!(dz, -0.5, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn bce_is_nonnegative(p in 0.0f64..=1.0, y in 0u8..=1) {
            prop_assert!(bce_loss(p, y as f64).unwrap() >= 0.0);
        }
    }
}
