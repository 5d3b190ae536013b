//! Feature files, validation, pooling, class balancing, fold planning, and
//! synthetic data.

mod balance;
mod folds;
mod io;
mod pool;
mod record;
mod synth;

pub use balance::balance_undersample;
pub use folds::{make_folds, FoldPlan};
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset};
pub use pool::mean_pool;
pub use record::{Dataset, FeatureManifest, Label, Modality, ModalityFeatures, SmcRecord, SCHEMA_VERSION};
pub use synth::{generate_synthetic, SynthConfig};

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::consistency::EntitySet;
    use crate::numeric::DenseVector;

    /// `fake + real` one-dimensional records, fakes first.
    pub fn tiny_dataset(fake: usize, real: usize) -> Dataset<f64> {
        let records = (0..fake + real)
            .map(|i| SmcRecord {
                id: format!("r{i}"),
                label: if i < fake { Label::Fake } else { Label::Real },
                text_emb: DenseVector::from_f64(&[i as f64]),
                image: ModalityFeatures::Pooled(DenseVector::from_f64(&[0.0])),
                audio: ModalityFeatures::Pooled(DenseVector::from_f64(&[0.0])),
                entities_text: EntitySet::new(Modality::Text, vec![]),
                entities_image: EntitySet::new(Modality::Image, vec![]),
                entities_audio: EntitySet::new(Modality::Audio, vec![]),
            })
            .collect();
        Dataset::new(FeatureManifest::new(1, 1, 1, 1), records).unwrap()
    }
}
