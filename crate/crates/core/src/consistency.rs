//! Hierarchical cross-modal entity consistency.
//!
//! At the modality level, the consistency of two entity sets is the largest
//! cosine similarity over all cross pairs. At the content level, the three
//! modality-pair scores are averaged; that average is the regression target
//! of the auxiliary task.
//!
//! A pair whose set is empty (or holds only zero vectors) is undefined and
//! resolves to `0.0`; [`ConsistencyScores::defined_pairs`] records how many
//! pairs were actually measured.

use crate::dataset::{Modality, SmcRecord};
use crate::error::{Error, Result};
use crate::numeric::{check_dim, dot, DenseVector};
use crate::scalar::Scalar;

/// Entity embeddings extracted from one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct EntitySet<T> {
    modality: Modality,
    vectors: Vec<DenseVector<T>>,
}

impl<T: Scalar> EntitySet<T> {
    pub fn new(modality: Modality, vectors: Vec<DenseVector<T>>) -> Self {
        Self { modality, vectors }
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn vectors(&self) -> &[DenseVector<T>] {
        &self.vectors
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn push(&mut self, v: DenseVector<T>) {
        self.vectors.push(v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyScores<T> {
    pub text_image: T,
    pub text_audio: T,
    pub image_audio: T,
    /// Mean of the three resolved pair scores.
    pub smc_level: T,
    pub defined_pairs: usize,
}

impl<T: Scalar> ConsistencyScores<T> {
    /// Resolves undefined pairs to zero and averages.
    pub fn from_pairs(text_image: Option<T>, text_audio: Option<T>, image_audio: Option<T>) -> Self {
        let pairs = [text_image, text_audio, image_audio];
        let (smc_level, defined_pairs) = smc_consistency(pairs);
        let r = |p: Option<T>| p.unwrap_or_else(T::zero);
        Self {
            text_image: r(text_image),
            text_audio: r(text_audio),
            image_audio: r(image_audio),
            smc_level,
            defined_pairs,
        }
    }
}

/// Cosine similarity clamped to `[-1, 1]`; `None` if either vector has zero norm.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> Result<Option<T>> {
    check_dim("cosine", a.len(), b.len())?;
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == T::zero() || nb == T::zero() {
        return Ok(None);
    }
    if !(na.is_finite() && nb.is_finite()) {
        return Err(Error::NonFinite("cosine operand"));
    }
    let c = dot(a, b) / (na * nb);
    Ok(Some(c.max(-T::one()).min(T::one())))
}

/// Maximum cosine over every cross pair; `None` when no pair is measurable.
pub fn pair_consistency<T: Scalar>(m1: &EntitySet<T>, m2: &EntitySet<T>) -> Result<Option<T>> {
    if let (Some(a), Some(b)) = (m1.vectors.first(), m2.vectors.first()) {
        check_dim("entity dimensions", a.dim(), b.dim())?;
    }
    let mut best: Option<T> = None;
    for a in &m1.vectors {
        for b in &m2.vectors {
            if let Some(c) = cosine(a, b)? {
                best = Some(best.map_or(c, |x| x.max(c)));
            }
        }
    }
    Ok(best)
}

/// Mean of the three pair scores with undefined pairs counted as zero.
/// Returns the mean and the number of defined pairs.
pub fn smc_consistency<T: Scalar>(pairs: [Option<T>; 3]) -> (T, usize) {
    let defined = pairs.iter().filter(|p| p.is_some()).count();
    let total: T = pairs.iter().map(|p| p.unwrap_or_else(T::zero)).sum();
    let mean = total / T::of(3.0);
    (mean.max(-T::one()).min(T::one()), defined)
}

/// Pseudo ground truth for one record.
pub fn compute_pseudo_truth<T: Scalar>(r: &SmcRecord<T>) -> Result<ConsistencyScores<T>> {
    Ok(ConsistencyScores::from_pairs(
        pair_consistency(&r.entities_text, &r.entities_image)?,
        pair_consistency(&r.entities_text, &r.entities_audio)?,
        pair_consistency(&r.entities_image, &r.entities_audio)?,
    ))
}
