use crate::error::{Error, Result};
use crate::numeric::{check_dim, DenseVector};
use crate::scalar::Scalar;

/// Elementwise arithmetic mean of equal-dimension vectors.
pub fn mean_pool<T: Scalar>(vectors: &[DenseVector<T>]) -> Result<DenseVector<T>> {
    let first = vectors.first().ok_or(Error::EmptySequence)?;
    let mut acc = vec![T::zero(); first.dim()];
    for v in vectors {
        check_dim("mean pooling", first.dim(), v.dim())?;
        for (a, &x) in acc.iter_mut().zip(v.iter()) {
            *a += x;
        }
    }
    let n = T::of(vectors.len() as f64);
    Ok(acc.into_iter().map(|a| a / n).collect::<Vec<_>>().into())
}
