//! JSON checkpoint container: config plus every parameter tensor.
//!
//! Values are written with shortest round-trip formatting and parsed with
//! correctly rounded float parsing, so save/load is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::config::ModelConfig;
use crate::model::network::{Dense, MultiMdModel};
use crate::numeric::{DenseMatrix, DenseVector};
use crate::scalar::Scalar;

const FORMAT: &str = "multimd-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorRecord {
    name: String,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Container {
    format: String,
    version: u32,
    scalar: String,
    config: ModelConfig,
    layers: Vec<TensorRecord>,
}

pub fn write_checkpoint<T: Scalar, W: Write>(model: &MultiMdModel<T>, out: W) -> Result<()> {
    let layers = model
        .layers()
        .into_iter()
        .map(|(name, l)| TensorRecord {
            name: name.to_owned(),
            rows: l.weights.rows(),
            cols: l.weights.cols(),
            weights: l.weights.entries().iter().map(|x| x.as_f64()).collect(),
            bias: l.bias.iter().map(|x| x.as_f64()).collect(),
        })
        .collect();
    let c = Container {
        format: FORMAT.into(),
        version: VERSION,
        scalar: T::NAME.into(),
        config: model.config().clone(),
        layers,
    };
    serde_json::to_writer(out, &c)?;
    Ok(())
}

pub fn read_checkpoint<T: Scalar, R: Read>(input: R) -> Result<MultiMdModel<T>> {
    let c: Container = serde_json::from_reader(input)?;
    if c.format != FORMAT || c.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported container {} v{}",
            c.format, c.version
        )));
    }
    if c.scalar != T::NAME {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds {} parameters, expected {}",
            c.scalar,
            T::NAME
        )));
    }
    // a freshly built model fixes the expected layout and shapes
    let mut model = MultiMdModel::<T>::new(c.config.clone())?;
    let expected = model.layers().len();
    if c.layers.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} layers, found {}",
            c.layers.len()
        )));
    }
    for ((name, layer), rec) in model.layers_mut().into_iter().zip(c.layers) {
        if rec.name != name || rec.rows != layer.weights.rows() || rec.cols != layer.weights.cols() {
            return Err(Error::Checkpoint(format!(
                "layer '{}' ({}x{}) does not match '{name}' ({}x{})",
                rec.name,
                rec.rows,
                rec.cols,
                layer.weights.rows(),
                layer.weights.cols()
            )));
        }
        if rec.bias.len() != layer.bias.dim() {
            return Err(Error::Checkpoint(format!("layer '{name}' bias length mismatch")));
        }
        *layer = Dense {
            weights: DenseMatrix::from_rows_major(rec.rows, rec.cols, rec.weights.iter().map(|&x| T::of(x)).collect())?,
            bias: DenseVector::from_f64(&rec.bias),
        };
        if !layer.weights.is_finite() || !layer.bias.is_finite() {
            return Err(Error::Checkpoint(format!("layer '{name}' has non-finite parameters")));
        }
    }
    Ok(model)
}

pub fn save_checkpoint<T: Scalar>(model: &MultiMdModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint(model, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<MultiMdModel<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(file))
}
