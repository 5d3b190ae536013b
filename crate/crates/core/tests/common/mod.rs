#![allow(dead_code)]

use multimd::consistency::EntitySet;
use multimd::dataset::{Dataset, FeatureManifest, Label, Modality, ModalityFeatures, SmcRecord};
use multimd::model::{ModelConfig, Sample};
use multimd::numeric::{Activation, DenseVector};
use rand::Rng;

pub fn gaussianish<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn entity_set<R: Rng>(rng: &mut R, m: Modality, count: usize, dim: usize) -> EntitySet<f64> {
    EntitySet::new(m, (0..count).map(|_| DenseVector::new(gaussianish(rng, dim))).collect())
}

/// A record with one-dimensional embeddings and no entities.
pub fn scalar_record(id: String, label: Label, x: f64) -> SmcRecord<f64> {
    SmcRecord {
        id,
        label,
        text_emb: DenseVector::new(vec![x]),
        image: ModalityFeatures::Pooled(DenseVector::new(vec![x])),
        audio: ModalityFeatures::Pooled(DenseVector::new(vec![x])),
        entities_text: EntitySet::new(Modality::Text, vec![]),
        entities_image: EntitySet::new(Modality::Image, vec![]),
        entities_audio: EntitySet::new(Modality::Audio, vec![]),
    }
}

pub fn scalar_dataset(fake: usize, real: usize) -> Dataset<f64> {
    let records = (0..fake + real)
        .map(|i| {
            let label = if i < fake { Label::Fake } else { Label::Real };
            scalar_record(format!("rec-{i}"), label, i as f64)
        })
        .collect();
    Dataset::new(FeatureManifest::new(1, 1, 1, 1), records).unwrap()
}

/// The gradient-check configuration: d_T=8, d_I=8, d_A=4, classifier hidden 6, d_c=6.
pub fn toy_config(activation: Activation, lambda_aux: f64, seed: u64) -> ModelConfig {
    ModelConfig {
        hidden: 6,
        consistency_dim: 6,
        extractor_hidden: 6,
        activation,
        lambda_aux,
        seed,
        ..ModelConfig::for_manifest(&FeatureManifest::new(8, 8, 4, 5))
    }
}

pub fn toy_samples<R: Rng>(rng: &mut R, n: usize) -> Vec<Sample<f64>> {
    (0..n)
        .map(|i| Sample {
            id: format!("toy-{i}"),
            text: DenseVector::new(gaussianish(rng, 8)),
            image: DenseVector::new(gaussianish(rng, 8)),
            audio: DenseVector::new(gaussianish(rng, 4)),
            label: if rng.random_bool(0.5) { Label::Fake } else { Label::Real },
            consistency_target: rng.random_range(-0.2..1.0),
        })
        .collect()
}
