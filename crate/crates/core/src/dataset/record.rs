use std::fmt;

use serde::{Deserialize, Serialize};

use crate::consistency::EntitySet;
use crate::dataset::pool::mean_pool;
use crate::error::{Error, Result};
use crate::numeric::DenseVector;
use crate::scalar::Scalar;

/// Embedding dimensions every record in a feature file must honor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureManifest {
    #[serde(rename = "d_T")]
    pub d_text: usize,
    #[serde(rename = "d_I")]
    pub d_image: usize,
    #[serde(rename = "d_A")]
    pub d_audio: usize,
    #[serde(rename = "d_E")]
    pub d_entity: usize,
    pub schema_version: u32,
}

pub const SCHEMA_VERSION: u32 = 1;

impl Default for FeatureManifest {
    /// BERT text, 1024-d pooled frames, VGGish audio, word2vec entities.
    fn default() -> Self {
        Self {
            d_text: 768,
            d_image: 1024,
            d_audio: 128,
            d_entity: 300,
            schema_version: SCHEMA_VERSION,
        }
    }
}

impl FeatureManifest {
    pub fn new(d_text: usize, d_image: usize, d_audio: usize, d_entity: usize) -> Self {
        Self {
            d_text,
            d_image,
            d_audio,
            d_entity,
            schema_version: SCHEMA_VERSION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.d_text, self.d_image, self.d_audio, self.d_entity].contains(&0) {
            return Err(Error::Config("manifest dimensions must be >= 1".into()));
        }
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        Ok(())
    }
}

/// The three content channels of a video post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
    Audio,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Text, Modality::Image, Modality::Audio];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::Audio => "audio",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ground-truth class; fake is the positive class (index 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Real = 0,
    Fake = 1,
}

impl Label {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: u64) -> Option<Self> {
        match i {
            0 => Some(Label::Real),
            1 => Some(Label::Fake),
            _ => None,
        }
    }

    pub fn as_scalar<T: Scalar>(self) -> T {
        T::of(self.index() as f64)
    }
}

/// Image or audio features as stored: per-second vectors or an already pooled one.
#[derive(Debug, Clone, PartialEq)]
pub enum ModalityFeatures<T> {
    Sequence(Vec<DenseVector<T>>),
    Pooled(DenseVector<T>),
}

impl<T: Scalar> ModalityFeatures<T> {
    /// Mean-pooled representation.
    pub fn pooled(&self) -> Result<DenseVector<T>> {
        match self {
            ModalityFeatures::Sequence(v) => mean_pool(v),
            ModalityFeatures::Pooled(v) => Ok(v.clone()),
        }
    }

    pub fn sequence_len(&self) -> Option<usize> {
        match self {
            ModalityFeatures::Sequence(v) => Some(v.len()),
            ModalityFeatures::Pooled(_) => None,
        }
    }
}

/// One social-media content item.
#[derive(Debug, Clone, PartialEq)]
pub struct SmcRecord<T> {
    pub id: String,
    pub label: Label,
    pub text_emb: DenseVector<T>,
    pub image: ModalityFeatures<T>,
    pub audio: ModalityFeatures<T>,
    pub entities_text: EntitySet<T>,
    pub entities_image: EntitySet<T>,
    pub entities_audio: EntitySet<T>,
}

impl<T: Scalar> SmcRecord<T> {
    pub fn entities(&self, modality: Modality) -> &EntitySet<T> {
        match modality {
            Modality::Text => &self.entities_text,
            Modality::Image => &self.entities_image,
            Modality::Audio => &self.entities_audio,
        }
    }

    /// Pooled `(h_T, h_I, h_A)`.
    pub fn pooled(&self) -> Result<[DenseVector<T>; 3]> {
        Ok([self.text_emb.clone(), self.image.pooled()?, self.audio.pooled()?])
    }

    /// Checks every dimension and structural rule against `manifest`.
    pub fn validate(&self, manifest: &FeatureManifest) -> Result<()> {
        let dim_err = |field: String, expected: usize, actual: usize| Error::DimMismatch {
            id: self.id.clone(),
            field,
            expected,
            actual,
        };
        let finite = |v: &DenseVector<T>, field: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidRecord {
                    id: self.id.clone(),
                    message: format!("non-finite value in {field}"),
                })
            }
        };

        if self.text_emb.dim() != manifest.d_text {
            return Err(dim_err("text_emb".into(), manifest.d_text, self.text_emb.dim()));
        }
        finite(&self.text_emb, "text_emb")?;

        for (feat, seq_name, pooled_name, dim) in [
            (&self.image, "image_frames", "image_emb", manifest.d_image),
            (&self.audio, "audio_chunks", "audio_emb", manifest.d_audio),
        ] {
            match feat {
                ModalityFeatures::Sequence(vs) => {
                    if vs.is_empty() {
                        return Err(Error::InvalidRecord {
                            id: self.id.clone(),
                            message: format!("{seq_name} is empty"),
                        });
                    }
                    for (i, v) in vs.iter().enumerate() {
                        if v.dim() != dim {
                            return Err(dim_err(format!("{seq_name}[{i}]"), dim, v.dim()));
                        }
                        finite(v, seq_name)?;
                    }
                }
                ModalityFeatures::Pooled(v) => {
                    if v.dim() != dim {
                        return Err(dim_err(pooled_name.into(), dim, v.dim()));
                    }
                    finite(v, pooled_name)?;
                }
            }
        }

        if let (Some(frames), Some(chunks)) = (self.image.sequence_len(), self.audio.sequence_len()) {
            if frames.abs_diff(chunks) > 1 {
                return Err(Error::InvalidRecord {
                    id: self.id.clone(),
                    message: format!(
                        "{frames} image frames and {chunks} audio chunks are not synchronized"
                    ),
                });
            }
        }

        for m in Modality::ALL {
            for (i, v) in self.entities(m).vectors().iter().enumerate() {
                if v.dim() != manifest.d_entity {
                    return Err(dim_err(format!("entities.{m}[{i}]"), manifest.d_entity, v.dim()));
                }
                finite(v, "entities")?;
            }
        }
        Ok(())
    }
}

/// Validated collection of records sharing one manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    manifest: FeatureManifest,
    records: Vec<SmcRecord<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(manifest: FeatureManifest, records: Vec<SmcRecord<T>>) -> Result<Self> {
        manifest.validate()?;
        let mut seen = std::collections::HashSet::with_capacity(records.len());
        for r in &records {
            r.validate(&manifest)?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::InvalidRecord {
                    id: r.id.clone(),
                    message: "duplicate id".into(),
                });
            }
        }
        Ok(Self { manifest, records })
    }

    pub fn manifest(&self) -> &FeatureManifest {
        &self.manifest
    }

    pub fn records(&self) -> &[SmcRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let fake = self.records.iter().filter(|r| r.label == Label::Fake).count();
        (fake, self.records.len() - fake)
    }

    /// Keeps the records at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            manifest: self.manifest,
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}
