use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::tensor::{DenseMatrix, DenseVector};
use crate::scalar::Scalar;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    pub fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => a * (T::one() - a),
            Activation::Tanh => T::one() - a * a,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

pub fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Result of one affine layer: the output plus the cached pre-activation.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOutput<T> {
    pub output: DenseVector<T>,
    pub pre_activation: DenseVector<T>,
}

/// `act(W·x + b)`; with `act = None` the layer is purely affine.
pub fn affine_forward<T: Scalar>(
    weights: &DenseMatrix<T>,
    bias: &DenseVector<T>,
    x: &[T],
    act: Option<Activation>,
) -> Result<AffineOutput<T>> {
    if bias.dim() != weights.rows() {
        return Err(Error::Shape {
            context: "affine bias",
            expected: weights.rows(),
            actual: bias.dim(),
        });
    }
    let mut pre = weights.matvec(x)?;
    for (z, &b) in pre.iter_mut().zip(bias.iter()) {
        *z += b;
    }
    let output = match act {
        Some(a) => pre.iter().map(|&z| a.apply(z)).collect::<Vec<_>>().into(),
        None => pre.clone(),
    };
    Ok(AffineOutput {
        output,
        pre_activation: pre,
    })
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax<T: Scalar>(z: &[T]) -> Result<DenseVector<T>> {
    if z.is_empty() {
        return Err(Error::Shape {
            context: "softmax input",
            expected: 1,
            actual: 0,
        });
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("softmax input"));
    }
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = z.iter().map(|&x| (x - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    Ok(exps.into_iter().map(|e| e / total).collect::<Vec<_>>().into())
}
