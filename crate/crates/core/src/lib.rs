//! Multimodal misinformation detection through cross-modal entity consistency.
//!
//! A video post is represented by text, image, and audio embeddings plus the
//! named-entity embeddings found in each modality. The model fuses the three
//! embeddings, learns a consistency feature with an auxiliary regression task
//! whose target is a hierarchical max-cosine entity similarity, and classifies
//! the enhanced representation as fake or real.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the double-precision variants used by the command-line tool.

pub mod consistency;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod model;
pub mod numeric;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Model = model::MultiMdModel<f64>;
pub type Model32 = model::MultiMdModel<f32>;
pub type Dataset = dataset::Dataset<f64>;
pub type Dataset32 = dataset::Dataset<f32>;
pub type Record = dataset::SmcRecord<f64>;
pub type Sample = model::Sample<f64>;
pub type ConsistencyScores = consistency::ConsistencyScores<f64>;
pub type Vector = numeric::DenseVector<f64>;
pub type Matrix = numeric::DenseMatrix<f64>;
