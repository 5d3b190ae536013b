//! The MultiMD network: modality fusion, consistency feature extractor,
//! enhanced representation, classifier and consistency heads, and the
//! combined dual-learning loss.

mod checkpoint;
mod config;
mod network;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use config::{Ablation, Component, ModelConfig};
pub use network::{
    enhance, fuse, sample_loss, total_loss, Dense, ForwardOutput, Gradients, MultiMdModel, Sample, Trace,
};

#[cfg(test)]
mod tests;
