use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::consistency::compute_pseudo_truth;
use crate::dataset::{Label, Modality, SmcRecord};
use crate::error::{Error, Result};
use crate::model::config::ModelConfig;
use crate::numeric::{
    affine_forward, bce_grad, bce_loss, check_dim, dropout_mask, glorot_uniform, softmax, squared_error,
    Activation, DenseMatrix, DenseVector,
};
use crate::scalar::Scalar;

/// Weights and bias of one fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weights: DenseMatrix<T>,
    pub bias: DenseVector<T>,
}

impl<T: Scalar> Dense<T> {
    fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        Self {
            weights: glorot_uniform(outputs, inputs, rng),
            bias: DenseVector::zeros(outputs),
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            weights: DenseMatrix::zeros(self.weights.rows(), self.weights.cols()),
            bias: DenseVector::zeros(self.bias.dim()),
        }
    }

    fn accumulate(&mut self, grad_out: &[T], input: &[T]) -> Result<()> {
        self.weights.add_outer(grad_out, input)?;
        for (b, &g) in self.bias.iter_mut().zip(grad_out) {
            *b += g;
        }
        Ok(())
    }
}

/// All parameter tensors. Optional layers are absent under the consistency ablation.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layers<T> {
    pub extractor_in: Option<Dense<T>>,
    pub extractor_out: Option<Dense<T>>,
    pub head: Option<Dense<T>>,
    pub hidden: Dense<T>,
    pub output: Dense<T>,
}

impl<T: Scalar> Layers<T> {
    pub(crate) fn named(&self) -> Vec<(&'static str, &Dense<T>)> {
        let mut out = Vec::with_capacity(5);
        if let Some(l) = &self.extractor_in {
            out.push(("extractor_in", l));
        }
        if let Some(l) = &self.extractor_out {
            out.push(("extractor_out", l));
        }
        if let Some(l) = &self.head {
            out.push(("consistency_head", l));
        }
        out.push(("classifier_hidden", &self.hidden));
        out.push(("classifier_output", &self.output));
        out
    }

    pub(crate) fn named_mut(&mut self) -> Vec<(&'static str, &mut Dense<T>)> {
        let mut out = Vec::with_capacity(5);
        if let Some(l) = &mut self.extractor_in {
            out.push(("extractor_in", l));
        }
        if let Some(l) = &mut self.extractor_out {
            out.push(("extractor_out", l));
        }
        if let Some(l) = &mut self.head {
            out.push(("consistency_head", l));
        }
        out.push(("classifier_hidden", &mut self.hidden));
        out.push(("classifier_output", &mut self.output));
        out
    }

    fn zeros_like(&self) -> Self {
        Self {
            extractor_in: self.extractor_in.as_ref().map(Dense::zeros_like),
            extractor_out: self.extractor_out.as_ref().map(Dense::zeros_like),
            head: self.head.as_ref().map(Dense::zeros_like),
            hidden: self.hidden.zeros_like(),
            output: self.output.zeros_like(),
        }
    }

    fn tensors(&self) -> Vec<&[T]> {
        self.named()
            .into_iter()
            .flat_map(|(_, l)| [l.weights.entries(), &l.bias[..]])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.named_mut()
            .into_iter()
            .flat_map(|(_, l)| {
                let Dense { weights, bias } = l;
                [weights.entries_mut(), &mut bias[..]]
            })
            .collect()
    }
}

/// A record reduced to what the network consumes: pooled embeddings, the
/// label, and the precomputed consistency target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub id: String,
    pub text: DenseVector<T>,
    pub image: DenseVector<T>,
    pub audio: DenseVector<T>,
    pub label: Label,
    pub consistency_target: T,
}

impl<T: Scalar> Sample<T> {
    pub fn from_record(r: &SmcRecord<T>) -> Result<Self> {
        let [text, image, audio] = r.pooled()?;
        Ok(Self {
            id: r.id.clone(),
            text,
            image,
            audio,
            label: r.label,
            consistency_target: compute_pseudo_truth(r)?.smc_level,
        })
    }

    pub fn modality(&self, m: Modality) -> &DenseVector<T> {
        match m {
            Modality::Text => &self.text,
            Modality::Image => &self.image,
            Modality::Audio => &self.audio,
        }
    }
}

/// Everything a forward pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput<T> {
    /// `[p_real, p_fake]`
    pub y_hat: DenseVector<T>,
    /// `W_c · h_consistency + b_c`; absent when consistency is ablated.
    pub consistency_pred: Option<T>,
    pub h_smc: DenseVector<T>,
    pub h_consistency: Option<DenseVector<T>>,
    /// Classifier input: `[h_smc; h_consistency]`, or `h_smc` alone when ablated.
    pub h_smc_enhanced: DenseVector<T>,
}

impl<T: Scalar> ForwardOutput<T> {
    pub fn fake_probability(&self) -> T {
        self.y_hat[Label::Fake.index()]
    }

    pub fn predicted(&self) -> Label {
        if self.y_hat[Label::Fake.index()] > self.y_hat[Label::Real.index()] {
            Label::Fake
        } else {
            Label::Real
        }
    }
}

#[derive(Debug, Clone)]
struct LayerTrace<T> {
    pre: DenseVector<T>,
    out: DenseVector<T>,
}

/// Intermediates cached by a training forward pass.
#[derive(Debug, Clone, Default)]
pub struct Trace<T> {
    inner: Option<TraceData<T>>,
}

#[derive(Debug, Clone)]
struct TraceData<T> {
    output: ForwardOutput<T>,
    extractor: Option<(LayerTrace<T>, LayerTrace<T>)>,
    hidden: LayerTrace<T>,
    mask: Vec<T>,
    dropped: DenseVector<T>,
}

impl<T> Trace<T> {
    pub fn output(&self) -> Option<&ForwardOutput<T>> {
        self.inner.as_ref().map(|d| &d.output)
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_none()
    }
}

/// Gradient of the loss with respect to every parameter, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    layers: Layers<T>,
}

impl<T: Scalar> Gradients<T> {
    pub fn tensors(&self) -> Vec<&[T]> {
        self.layers.tensors()
    }

    pub fn named(&self) -> Vec<(&'static str, &Dense<T>)> {
        self.layers.named()
    }

    pub fn scale(&mut self, factor: T) {
        for t in self.layers.tensors_mut() {
            for g in t {
                *g *= factor;
            }
        }
    }
}

/// Concatenates modality representations in text, image, audio order.
pub fn fuse<T: Scalar>(parts: &[&DenseVector<T>]) -> DenseVector<T> {
    DenseVector::concat(parts)
}

/// `[h_smc; h_consistency]`
pub fn enhance<T: Scalar>(h_smc: &DenseVector<T>, h_consistency: &DenseVector<T>) -> DenseVector<T> {
    DenseVector::concat(&[h_smc, h_consistency])
}

/// The dual-learning misinformation classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiMdModel<T> {
    config: ModelConfig,
    pub(crate) layers: Layers<T>,
}

impl<T: Scalar> MultiMdModel<T> {
    /// Glorot-uniform weights and zero biases drawn from `config.seed`.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let fused = config.fused_dim();
        let with_consistency = config.ablation.uses_consistency();
        let extractor_in = with_consistency.then(|| Dense::glorot(fused, config.extractor_hidden, &mut rng));
        let extractor_out =
            with_consistency.then(|| Dense::glorot(config.extractor_hidden, config.consistency_dim, &mut rng));
        let head = with_consistency.then(|| Dense::glorot(config.consistency_dim, 1, &mut rng));
        let hidden = Dense::glorot(config.classifier_input_dim(), config.hidden, &mut rng);
        let output = Dense::glorot(config.hidden, 2, &mut rng);
        Ok(Self {
            config,
            layers: Layers {
                extractor_in,
                extractor_out,
                head,
                hidden,
                output,
            },
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> Vec<(&'static str, &Dense<T>)> {
        self.layers.named()
    }

    pub fn layers_mut(&mut self) -> Vec<(&'static str, &mut Dense<T>)> {
        self.layers.named_mut()
    }

    /// Flattened parameter tensors in a fixed order shared with [`Gradients::tensors`].
    pub fn tensors(&self) -> Vec<&[T]> {
        self.layers.tensors()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.layers.tensors_mut()
    }

    pub fn tensor_lens(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.len()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensor_lens().iter().sum()
    }

    pub fn zero_gradients(&self) -> Gradients<T> {
        Gradients {
            layers: self.layers.zeros_like(),
        }
    }

    fn activation(&self) -> Activation {
        self.config.activation
    }

    /// Fused representation of the modalities this model keeps.
    pub fn fuse_sample(&self, s: &Sample<T>) -> Result<DenseVector<T>> {
        let mut parts = Vec::with_capacity(3);
        for m in Modality::ALL {
            if self.config.ablation.keeps_modality(m) {
                let v = s.modality(m);
                check_dim(
                    match m {
                        Modality::Text => "text embedding",
                        Modality::Image => "image embedding",
                        Modality::Audio => "audio embedding",
                    },
                    self.config.modality_dim(m),
                    v.dim(),
                )?;
                parts.push(v);
            }
        }
        Ok(fuse(&parts))
    }

    fn extract(&self, h_smc: &[T]) -> Result<Option<(LayerTrace<T>, LayerTrace<T>)>> {
        let (Some(l1), Some(l2)) = (&self.layers.extractor_in, &self.layers.extractor_out) else {
            return Ok(None);
        };
        let act = Some(self.activation());
        let a = affine_forward(&l1.weights, &l1.bias, h_smc, act)?;
        let b = affine_forward(&l2.weights, &l2.bias, &a.output, act)?;
        Ok(Some((
            LayerTrace {
                pre: a.pre_activation,
                out: a.output,
            },
            LayerTrace {
                pre: b.pre_activation,
                out: b.output,
            },
        )))
    }

    /// Consistency features of a fused representation.
    pub fn extract_consistency(&self, h_smc: &DenseVector<T>) -> Result<DenseVector<T>> {
        check_dim("consistency extractor input", self.config.fused_dim(), h_smc.dim())?;
        self.extract(h_smc)?
            .map(|(_, out)| out.out)
            .ok_or(Error::State("consistency extractor is ablated"))
    }

    fn run<R: Rng + ?Sized>(&self, s: &Sample<T>, dropout: Option<&mut R>) -> Result<TraceData<T>> {
        let h_smc = self.fuse_sample(s)?;
        let extractor = self.extract(&h_smc)?;
        let h_consistency = extractor.as_ref().map(|(_, second)| second.out.clone());
        let consistency_pred = match (&self.layers.head, &h_consistency) {
            (Some(head), Some(hc)) => Some(affine_forward(&head.weights, &head.bias, hc, None)?.output[0]),
            _ => None,
        };
        let h_smc_enhanced = match &h_consistency {
            Some(hc) => enhance(&h_smc, hc),
            None => h_smc.clone(),
        };

        let hidden = affine_forward(
            &self.layers.hidden.weights,
            &self.layers.hidden.bias,
            &h_smc_enhanced,
            Some(self.activation()),
        )?;
        let mask = match dropout {
            Some(rng) => dropout_mask(hidden.output.dim(), self.config.dropout, rng),
            None => vec![T::one(); hidden.output.dim()],
        };
        let dropped: DenseVector<T> = hidden
            .output
            .iter()
            .zip(&mask)
            .map(|(&a, &m)| a * m)
            .collect::<Vec<_>>()
            .into();
        let logits = affine_forward(&self.layers.output.weights, &self.layers.output.bias, &dropped, None)?;
        let y_hat = softmax(&logits.output)?;

        Ok(TraceData {
            output: ForwardOutput {
                y_hat,
                consistency_pred,
                h_smc,
                h_consistency,
                h_smc_enhanced,
            },
            extractor,
            hidden: LayerTrace {
                pre: hidden.pre_activation,
                out: hidden.output,
            },
            mask,
            dropped,
        })
    }

    /// Inference-mode forward pass (dropout disabled).
    pub fn forward(&self, s: &Sample<T>) -> Result<ForwardOutput<T>> {
        Ok(self.run::<ChaCha8Rng>(s, None)?.output)
    }

    /// Forward pass on a raw record; pools modalities first.
    pub fn forward_record(&self, r: &SmcRecord<T>) -> Result<ForwardOutput<T>> {
        let [text, image, audio] = r.pooled()?;
        self.forward(&Sample {
            id: r.id.clone(),
            text,
            image,
            audio,
            label: r.label,
            consistency_target: T::zero(),
        })
    }

    /// Forward pass that records intermediates for [`Self::backward`].
    /// With `dropout = Some(rng)` the hidden layer is masked as in training.
    pub fn forward_traced<R: Rng + ?Sized>(&self, s: &Sample<T>, dropout: Option<&mut R>) -> Result<Trace<T>> {
        Ok(Trace {
            inner: Some(self.run(s, dropout)?),
        })
    }

    /// Dual-learning loss of one sample.
    pub fn sample_loss(&self, out: &ForwardOutput<T>, label: Label, consistency_target: T) -> Result<T> {
        sample_loss(out, label, consistency_target, self.config.lambda_aux)
    }

    /// Accumulates `scale · ∂loss/∂θ` for the traced sample into `grads`.
    pub fn backward(
        &self,
        trace: &Trace<T>,
        label: Label,
        consistency_target: T,
        scale: T,
        grads: &mut Gradients<T>,
    ) -> Result<()> {
        let t = trace
            .inner
            .as_ref()
            .ok_or(Error::State("backward called before a forward pass"))?;
        let act = self.activation();
        let out = &t.output;
        let y = label.as_scalar::<T>();

        // softmax + BCE on the fake probability
        let p = out.y_hat[Label::Fake.index()];
        let dp = bce_grad(p, y)? * scale;
        let d_logits: Vec<T> = (0..2)
            .map(|j| {
                let delta = if j == Label::Fake.index() { T::one() } else { T::zero() };
                dp * p * (delta - out.y_hat[j])
            })
            .collect();
        grads.layers.output.accumulate(&d_logits, &t.dropped)?;

        let d_dropped = self.layers.output.weights.matvec_transposed(&d_logits)?;
        let d_pre_hidden: Vec<T> = d_dropped
            .iter()
            .zip(&t.mask)
            .zip(t.hidden.pre.iter().zip(t.hidden.out.iter()))
            .map(|((&g, &m), (&z, &a))| g * m * act.derivative(z, a))
            .collect();
        grads.layers.hidden.accumulate(&d_pre_hidden, &out.h_smc_enhanced)?;

        let (Some(hc), Some(pred)) = (&out.h_consistency, out.consistency_pred) else {
            return Ok(());
        };
        let (Some(l2), Some(head), Some((first, second))) =
            (&self.layers.extractor_out, &self.layers.head, &t.extractor)
        else {
            return Err(Error::State("trace does not match model layout"));
        };

        let d_input = self.layers.hidden.weights.matvec_transposed(&d_pre_hidden)?;
        let fused = out.h_smc.dim();
        let mut d_hc: Vec<T> = d_input[fused..].to_vec();

        let lambda = T::of(self.config.lambda_aux);
        let d_pred = T::of(2.0) * lambda * (pred - consistency_target) * scale;
        if let Some(g) = grads.layers.head.as_mut() {
            g.accumulate(&[d_pred], hc)?;
        }
        for (d, &w) in d_hc.iter_mut().zip(head.weights.row(0)) {
            *d += w * d_pred;
        }

        let d_z2: Vec<T> = d_hc
            .iter()
            .zip(second.pre.iter().zip(hc.iter()))
            .map(|(&g, (&z, &a))| g * act.derivative(z, a))
            .collect();
        if let Some(g) = grads.layers.extractor_out.as_mut() {
            g.accumulate(&d_z2, &first.out)?;
        }
        let d_a1 = l2.weights.matvec_transposed(&d_z2)?;
        let d_z1: Vec<T> = d_a1
            .iter()
            .zip(first.pre.iter().zip(first.out.iter()))
            .map(|(&g, (&z, &a))| g * act.derivative(z, a))
            .collect();
        if let Some(g) = grads.layers.extractor_in.as_mut() {
            g.accumulate(&d_z1, &out.h_smc)?;
        }
        Ok(())
    }
}

/// `BCE(ŷ_fake, y) + λ·(pred − target)²`; the auxiliary term is dropped when
/// the output carries no consistency prediction.
pub fn sample_loss<T: Scalar>(
    out: &ForwardOutput<T>,
    label: Label,
    consistency_target: T,
    lambda_aux: f64,
) -> Result<T> {
    let cls = bce_loss(out.fake_probability(), label.as_scalar())?;
    let aux = match out.consistency_pred {
        Some(pred) => T::of(lambda_aux) * squared_error(pred, consistency_target)?,
        None => T::zero(),
    };
    Ok(cls + aux)
}

/// Batch mean of [`sample_loss`].
pub fn total_loss<T: Scalar>(batch: &[(&ForwardOutput<T>, Label, T)], lambda_aux: f64) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::Training("empty batch".into()));
    }
    let mut sum = T::zero();
    for &(out, label, target) in batch {
        sum += sample_loss(out, label, target, lambda_aux)?;
    }
    Ok(sum / T::of(batch.len() as f64))
}
