//! Synthetic records with planted per-modality label signals and a planted
//! cross-modal entity-consistency structure.
//!
//! A fixed set of topic centroids lives in entity space. Every record picks a
//! topic and draws its entities around that centroid, so real records are
//! cross-modally aligned. Fake records draw one randomly chosen modality's
//! entities around a different topic. Each modality embedding carries
//!
//! * `signal[m] * (±1) * u_m` along a fixed unit direction (sign = label),
//! * `consistency_signal * P · mean(entities_m)/‖mean‖` in its leading block,
//!   where `P` is a fixed projection shared by all modalities,
//! * isotropic Gaussian noise of scale `noise`.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consistency::EntitySet;
use crate::dataset::record::{Dataset, FeatureManifest, Label, Modality, ModalityFeatures, SmcRecord};
use crate::error::{Error, Result};
use crate::numeric::DenseVector;
use crate::scalar::Scalar;


#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub manifest: FeatureManifest,
    /// Entity count range for text, image, audio.
    pub entity_counts: [RangeInclusive<usize>; 3],
    /// Label signal strength for text, image, audio.
    pub signal: [f64; 3],
    pub consistency_signal: f64,
    /// Number of topic centroids, at least 2.
    pub topics: usize,
    /// Scale of entity scatter around its topic centroid.
    pub entity_spread: f64,
    pub noise: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Small-dimension defaults suited to laptop-scale cross-validation.
    pub fn desk(n: usize, seed: u64) -> Self {
        Self {
            n,
            manifest: FeatureManifest::new(32, 32, 16, 16),
            entity_counts: [1..=4, 1..=4, 1..=4],
            signal: [0.7, 0.7, 0.7],
            consistency_signal: 2.0,
            topics: 4,
            entity_spread: 0.5,
            noise: 0.7,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.manifest.validate()?;
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "synthetic record count must be even and >= 2, got {}",
                self.n
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!("noise scale {} must be >= 0", self.noise)));
        }
        if !(self.entity_spread >= 0.0 && self.entity_spread.is_finite()) {
            return Err(Error::Config(format!("entity spread {} must be >= 0", self.entity_spread)));
        }
        if self.topics < 2 {
            return Err(Error::Config(format!("need at least 2 topics, got {}", self.topics)));
        }
        if self.signal.iter().chain([&self.consistency_signal]).any(|s| !s.is_finite()) {
            return Err(Error::Config("signal strengths must be finite".into()));
        }
        if self.entity_counts.iter().any(|r| r.is_empty()) {
            return Err(Error::Config("entity count ranges must be nonempty".into()));
        }
        Ok(())
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

/// Generates an exactly balanced synthetic dataset.
pub fn generate_synthetic<T: Scalar>(cfg: &SynthConfig) -> Result<Dataset<T>> {
    cfg.validate()?;
    let m = cfg.manifest;
    let dims = [m.d_text, m.d_image, m.d_audio];
    let block = dims.iter().copied().min().unwrap().min(m.d_entity);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let directions: Vec<Vec<f64>> = dims.iter().map(|&d| unit(gaussian(&mut rng, d, 1.0))).collect();
    let projection: Vec<Vec<f64>> = (0..block).map(|_| gaussian(&mut rng, m.d_entity, 1.0)).collect();

    let mut labels: Vec<Label> = (0..cfg.n)
        .map(|i| if i < cfg.n / 2 { Label::Fake } else { Label::Real })
        .collect();
    labels.shuffle(&mut rng);

    let centroids: Vec<Vec<f64>> = (0..cfg.topics).map(|_| gaussian(&mut rng, m.d_entity, 1.0)).collect();

    let mut records = Vec::with_capacity(cfg.n);
    for (i, &label) in labels.iter().enumerate() {
        let topic = rng.random_range(0..cfg.topics);
        let odd = match label {
            Label::Fake => Some(rng.random_range(0..3)),
            Label::Real => None,
        };

        let mut entity_sets: Vec<Vec<Vec<f64>>> = Vec::with_capacity(3);
        for (mi, range) in cfg.entity_counts.iter().enumerate() {
            let count = rng.random_range(range.clone());
            let t = if odd == Some(mi) {
                (topic + rng.random_range(1..cfg.topics)) % cfg.topics
            } else {
                topic
            };
            let set = (0..count)
                .map(|_| {
                    centroids[t]
                        .iter()
                        .map(|c| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            c + cfg.entity_spread * z
                        })
                        .collect()
                })
                .collect();
            entity_sets.push(set);
        }

        let sign = if label == Label::Fake { 1.0 } else { -1.0 };
        let mut embeddings: Vec<Vec<f64>> = Vec::with_capacity(3);
        for (mi, &dim) in dims.iter().enumerate() {
            let mut emb = gaussian(&mut rng, dim, cfg.noise);
            for (e, u) in emb.iter_mut().zip(&directions[mi]) {
                *e += cfg.signal[mi] * sign * u;
            }
            let set = &entity_sets[mi];
            if !set.is_empty() && cfg.consistency_signal != 0.0 {
                let mut mean = vec![0.0; m.d_entity];
                for v in set {
                    for (a, x) in mean.iter_mut().zip(v) {
                        *a += x / set.len() as f64;
                    }
                }
                let mean = unit(mean);
                for (e, row) in emb.iter_mut().zip(&projection) {
                    *e += cfg.consistency_signal * row.iter().zip(&mean).map(|(p, x)| p * x).sum::<f64>();
                }
            }
            embeddings.push(emb);
        }

        let to_set = |modality: Modality, vs: &[Vec<f64>]| {
            EntitySet::new(modality, vs.iter().map(|v| DenseVector::from_f64(v)).collect())
        };
        records.push(SmcRecord {
            id: format!("synth-{i:05}"),
            label,
            text_emb: DenseVector::from_f64(&embeddings[0]),
            image: ModalityFeatures::Pooled(DenseVector::from_f64(&embeddings[1])),
            audio: ModalityFeatures::Pooled(DenseVector::from_f64(&embeddings[2])),
            entities_text: to_set(Modality::Text, &entity_sets[0]),
            entities_image: to_set(Modality::Image, &entity_sets[1]),
            entities_audio: to_set(Modality::Audio, &entity_sets[2]),
        });
    }
    Dataset::new(m, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::compute_pseudo_truth;

    #[test]
    fn exactly_balanced() {
        let d: Dataset<f64> = generate_synthetic(&SynthConfig::desk(100, 1)).unwrap();
        assert_eq!(d.class_counts(), (50, 50));
    }

    #[test]
    fn rejects_invalid_configs() {
        assert!(generate_synthetic::<f64>(&SynthConfig::desk(7, 1)).is_err());
        assert!(generate_synthetic::<f64>(&SynthConfig::desk(0, 1)).is_err());
        let mut cfg = SynthConfig::desk(10, 1);
        cfg.noise = -1.0;
        assert!(generate_synthetic::<f64>(&cfg).is_err());
        let mut cfg = SynthConfig::desk(10, 1);
        cfg.topics = 1;
        assert!(generate_synthetic::<f64>(&cfg).is_err());
    }

    #[test]
    fn seeded() {
        let cfg = SynthConfig::desk(20, 5);
        assert_eq!(generate_synthetic::<f64>(&cfg).unwrap(), generate_synthetic::<f64>(&cfg).unwrap());
    }

    #[test]
    fn real_items_are_more_consistent() {
        let d: Dataset<f64> = generate_synthetic(&SynthConfig::desk(200, 11)).unwrap();
        let (mut real, mut fake) = (Vec::new(), Vec::new());
        for r in d.records() {
            let s = compute_pseudo_truth(r).unwrap().smc_level;
            match r.label {
                Label::Real => real.push(s),
                Label::Fake => fake.push(s),
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&real) > mean(&fake), "{} vs {}", mean(&real), mean(&fake));
    }
}
