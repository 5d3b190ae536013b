use rand::Rng;

use crate::numeric::tensor::DenseMatrix;
use crate::scalar::Scalar;

/// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix<T> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let entries = (0..rows * cols)
        .map(|_| T::of(rng.random_range(-limit..limit)))
        .collect();
    DenseMatrix::from_rows_major(rows, cols, entries).expect("entry count matches shape")
}
