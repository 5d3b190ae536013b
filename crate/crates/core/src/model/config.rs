use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureManifest, Modality};
use crate::error::{Error, Result};
use crate::numeric::{validate_rate, Activation};

/// A part of the network that an ablation can remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Text,
    Image,
    Audio,
    Consistency,
}

impl Component {
    /// Row order of the ablation table.
    pub const ABLATION_ORDER: [Component; 4] =
        [Component::Image, Component::Text, Component::Audio, Component::Consistency];

    pub fn name(self) -> &'static str {
        match self {
            Component::Text => "text",
            Component::Image => "image",
            Component::Audio => "audio",
            Component::Consistency => "consistency",
        }
    }
}

impl From<Modality> for Component {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Text => Component::Text,
            Modality::Image => Component::Image,
            Modality::Audio => Component::Audio,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Component {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Component::Text),
            "image" => Ok(Component::Image),
            "audio" => Ok(Component::Audio),
            "consistency" => Ok(Component::Consistency),
            other => Err(Error::Config(format!("unknown component '{other}'"))),
        }
    }
}

/// Set of removed components.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ablation(BTreeSet<Component>);

impl Ablation {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn removing(components: impl IntoIterator<Item = Component>) -> Self {
        Self(components.into_iter().collect())
    }

    pub fn removes(&self, c: Component) -> bool {
        self.0.contains(&c)
    }

    pub fn keeps_modality(&self, m: Modality) -> bool {
        !self.removes(m.into())
    }

    pub fn uses_consistency(&self) -> bool {
        !self.removes(Component::Consistency)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = Component> + '_ {
        self.0.iter().copied()
    }
}

/// Architecture and loss weighting of a MultiMD network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d_text: usize,
    pub d_image: usize,
    pub d_audio: usize,
    /// Width of the classifier's hidden layer.
    pub hidden: usize,
    /// Width of the learned consistency feature.
    pub consistency_dim: usize,
    /// Hidden width of the consistency extractor.
    pub extractor_hidden: usize,
    pub activation: Activation,
    pub dropout: f64,
    pub lambda_aux: f64,
    pub seed: u64,
    #[serde(default)]
    pub ablation: Ablation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::for_manifest(&FeatureManifest::default())
    }
}

impl ModelConfig {
    /// 1024-wide classifier and extractor over the given input dims.
    pub fn for_manifest(m: &FeatureManifest) -> Self {
        Self {
            d_text: m.d_text,
            d_image: m.d_image,
            d_audio: m.d_audio,
            hidden: 1024,
            consistency_dim: 1024,
            extractor_hidden: 1024,
            activation: Activation::Relu,
            dropout: 0.2,
            lambda_aux: 1.0,
            seed: 0,
            ablation: Ablation::none(),
        }
    }

    /// Narrow layers for laptop-scale experiments.
    pub fn desk(m: &FeatureManifest) -> Self {
        Self {
            hidden: 32,
            consistency_dim: 16,
            extractor_hidden: 32,
            ..Self::for_manifest(m)
        }
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn modality_dim(&self, m: Modality) -> usize {
        match m {
            Modality::Text => self.d_text,
            Modality::Image => self.d_image,
            Modality::Audio => self.d_audio,
        }
    }

    /// Dimension of the fused content representation.
    pub fn fused_dim(&self) -> usize {
        Modality::ALL
            .into_iter()
            .filter(|&m| self.ablation.keeps_modality(m))
            .map(|m| self.modality_dim(m))
            .sum()
    }

    /// Dimension of the classifier input.
    pub fn classifier_input_dim(&self) -> usize {
        self.fused_dim()
            + if self.ablation.uses_consistency() {
                self.consistency_dim
            } else {
                0
            }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.d_text,
            self.d_image,
            self.d_audio,
            self.hidden,
            self.consistency_dim,
            self.extractor_hidden,
        ];
        if dims.contains(&0) {
            return Err(Error::Config("all model dimensions must be >= 1".into()));
        }
        if Modality::ALL.iter().all(|&m| !self.ablation.keeps_modality(m)) {
            return Err(Error::Config("ablation must keep at least one modality".into()));
        }
        validate_rate(self.dropout)?;
        if !(self.lambda_aux >= 0.0 && self.lambda_aux.is_finite()) {
            return Err(Error::Config(format!("lambda_aux {} must be >= 0", self.lambda_aux)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dims() {
        let c = ModelConfig::default();
        assert_eq!(c.fused_dim(), 1920);
        assert_eq!(c.classifier_input_dim(), 2944);
    }

    #[test]
    fn ablations_shrink_dims() {
        let c = ModelConfig::default().with_ablation(Ablation::removing([Component::Image]));
        assert_eq!(c.fused_dim(), 896);
        let c = ModelConfig::default().with_ablation(Ablation::removing([Component::Consistency]));
        assert_eq!(c.classifier_input_dim(), 1920);
    }

    #[test]
    fn removing_every_modality_is_a_config_error() {
        let c = ModelConfig::default().with_ablation(Ablation::removing([
            Component::Text,
            Component::Image,
            Component::Audio,
        ]));
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = ModelConfig::default();
        c.dropout = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn parses_component_names() {
        assert_eq!("Consistency".parse::<Component>().unwrap(), Component::Consistency);
        assert!("video".parse::<Component>().is_err());
    }
}
