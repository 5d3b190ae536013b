use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dataset::{FeatureManifest, Label};
use crate::error::Error;
use crate::numeric::{Activation, DenseMatrix, DenseVector, BCE_CLAMP};

fn toy_config(d: (usize, usize, usize)) -> ModelConfig {
    ModelConfig {
        d_text: d.0,
        d_image: d.1,
        d_audio: d.2,
        hidden: 2,
        consistency_dim: 1,
        extractor_hidden: 2,
        activation: Activation::Relu,
        dropout: 0.0,
        lambda_aux: 1.0,
        seed: 0,
        ablation: Ablation::none(),
    }
}

fn sample(t: &[f64], i: &[f64], a: &[f64], label: Label, target: f64) -> Sample<f64> {
    Sample {
        id: "s".into(),
        text: DenseVector::from_f64(t),
        image: DenseVector::from_f64(i),
        audio: DenseVector::from_f64(a),
        label,
        consistency_target: target,
    }
}

fn set_layer(model: &mut MultiMdModel<f64>, name: &str, rows: &[&[f64]], bias: &[f64]) {
    for (n, l) in model.layers_mut() {
        if n == name {
            l.weights = DenseMatrix::from_f64_rows(rows).unwrap();
            l.bias = DenseVector::from_f64(bias);
            return;
        }
    }
    panic!("no layer {name}");
}

#[test]
fn fuse_and_enhance_concatenate_in_order() {
    let (t, i, a) = (
        DenseVector::<f64>::from_f64(&[1.0]),
        DenseVector::from_f64(&[2.0]),
        DenseVector::from_f64(&[3.0]),
    );
    let h = fuse(&[&t, &i, &a]);
    assert_eq!(&*h, &[1.0, 2.0, 3.0]);
    assert_eq!(h.slice(0, 1).unwrap(), t);
    assert_eq!(h.slice(1, 1).unwrap(), i);
    assert_eq!(h.slice(2, 1).unwrap(), a);

    let e = enhance(&DenseVector::<f64>::from_f64(&[1.0, 2.0]), &DenseVector::from_f64(&[3.0]));
    assert_eq!(&*e, &[1.0, 2.0, 3.0]);
}

#[test]
fn fused_dim_matches_defaults() {
    let model = MultiMdModel::<f32>::new(ModelConfig::for_manifest(&FeatureManifest::default())).unwrap();
    assert_eq!(model.config().fused_dim(), 1920);
    assert_eq!(model.config().classifier_input_dim(), 2944);
    assert_eq!(model.config().consistency_dim, 1024);
}

#[test]
fn zero_extractor_outputs_zero_features() {
    let mut cfg = toy_config((1, 1, 1));
    cfg.consistency_dim = 3;
    let mut model = MultiMdModel::<f64>::new(cfg).unwrap();
    for (name, l) in model.layers_mut() {
        if name.starts_with("extractor") {
            l.weights.entries_mut().fill(0.0);
        }
    }
    let f = model.extract_consistency(&DenseVector::from_f64(&[0.4, -2.0, 7.0])).unwrap();
    assert_eq!(&*f, &[0.0, 0.0, 0.0]);
}

#[test]
fn identity_extractor_by_hand() {
    let mut cfg = toy_config((1, 1, 0));
    cfg.d_audio = 1;
    cfg.consistency_dim = 2;
    cfg.ablation = Ablation::removing([Component::Audio]);
    let mut model = MultiMdModel::<f64>::new(cfg).unwrap();
    set_layer(&mut model, "extractor_in", &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
    set_layer(&mut model, "extractor_out", &[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
    let f = model.extract_consistency(&DenseVector::from_f64(&[1.0, -1.0])).unwrap();
    assert_eq!(&*f, &[1.0, 0.0]);
    assert!(model.extract_consistency(&DenseVector::from_f64(&[1.0])).is_err());
}

#[test]
fn symmetric_logits_give_even_odds() {
    let mut model = MultiMdModel::<f64>::new(toy_config((2, 2, 2))).unwrap();
    for (name, l) in model.layers_mut() {
        if name == "classifier_output" {
            l.weights.entries_mut().fill(0.0);
        }
    }
    let out = model.forward(&sample(&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], Label::Fake, 0.0)).unwrap();
    assert_eq!(&*out.y_hat, &[0.5, 0.5]);
}

#[test]
fn end_to_end_matches_hand_chain() {
    let mut model = MultiMdModel::<f64>::new(toy_config((1, 1, 1))).unwrap();
    set_layer(&mut model, "extractor_in", &[&[1.0, 0.0, 0.0], &[0.0, 1.0, -1.0]], &[0.0, 0.5]);
    set_layer(&mut model, "extractor_out", &[&[1.0, 2.0]], &[-0.5]);
    set_layer(&mut model, "consistency_head", &[&[3.0]], &[0.25]);
    set_layer(
        &mut model,
        "classifier_hidden",
        &[&[1.0, 0.0, 0.0, 1.0], &[0.0, 1.0, 1.0, -1.0]],
        &[0.0, -0.5],
    );
    set_layer(&mut model, "classifier_output", &[&[1.0, -1.0], &[-1.0, 2.0]], &[0.0, 0.1]);

    let s = sample(&[1.0], &[2.0], &[0.5], Label::Fake, 0.6);
    let out = model.forward(&s).unwrap();

    // extractor: z1 = [1, 2 - 0.5 + 0.5] = [1, 2]; relu -> [1, 2]
    // z2 = 1 + 4 - 0.5 = 4.5 -> h_c = [4.5]; pred = 3 * 4.5 + 0.25 = 13.75
    assert_eq!(out.h_consistency.as_deref(), Some(&[4.5][..]));
    assert_eq!(out.consistency_pred, Some(13.75));
    assert_eq!(&*out.h_smc_enhanced, &[1.0, 2.0, 0.5, 4.5]);
    // hidden: [1 + 4.5, 2 + 0.5 - 4.5 - 0.5] = [5.5, -2.5] -> relu [5.5, 0]
    // logits: [5.5, -5.5 + 0.1] = [5.5, -5.4]
    let (l0, l1) = (5.5f64, -5.4f64);
    let p_fake = l1.exp() / (l0.exp() + l1.exp());
    assert_abs_diff_eq!(out.y_hat[1], p_fake, epsilon = 1e-15);
    assert_abs_diff_eq!(out.y_hat[0] + out.y_hat[1], 1.0, epsilon = 1e-12);
    assert_eq!(out.predicted(), Label::Real);
}

fn output(p_fake: f64, pred: Option<f64>) -> ForwardOutput<f64> {
    ForwardOutput {
        y_hat: DenseVector::from_f64(&[1.0 - p_fake, p_fake]),
        consistency_pred: pred,
        h_smc: DenseVector::zeros(1),
        h_consistency: pred.map(|_| DenseVector::zeros(1)),
        h_smc_enhanced: DenseVector::zeros(1),
    }
}

#[test]
fn total_loss_examples() {
    let o = output(0.5, Some(0.9));
    assert_abs_diff_eq!(
        total_loss(&[(&o, Label::Fake, 0.4)], 0.0).unwrap(),
        2f64.ln(),
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        total_loss(&[(&o, Label::Fake, 0.4)], 1.0).unwrap(),
        0.943147,
        epsilon = 1e-6
    );
    let perfect = output(1.0, Some(0.3));
    let l = total_loss(&[(&perfect, Label::Fake, 0.3)], 1.0).unwrap();
    assert!((0.0..=2.0 * BCE_CLAMP).contains(&l));
    let ablated = output(0.5, None);
    assert_abs_diff_eq!(
        total_loss(&[(&ablated, Label::Fake, 0.99)], 1.0).unwrap(),
        2f64.ln(),
        epsilon = 1e-15
    );
    assert!(total_loss::<f64>(&[], 1.0).is_err());
}

#[test]
fn backward_requires_a_forward_pass() {
    let model = MultiMdModel::<f64>::new(toy_config((1, 1, 1))).unwrap();
    let mut g = model.zero_gradients();
    let err = model.backward(&Trace::default(), Label::Fake, 0.0, 1.0, &mut g).unwrap_err();
    assert!(matches!(err, Error::State(_)));
}

#[test]
fn ablated_modality_is_ignored() {
    let cfg = toy_config((2, 2, 2)).with_ablation(Ablation::removing([Component::Image]));
    let model = MultiMdModel::<f64>::new(cfg).unwrap();
    assert_eq!(model.config().fused_dim(), 4);
    let a = model.forward(&sample(&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], Label::Real, 0.0)).unwrap();
    let b = model.forward(&sample(&[1.0, 2.0], &[-30.0, 9.0], &[5.0, 6.0], Label::Real, 0.0)).unwrap();
    assert_eq!(a.y_hat, b.y_hat);
}

#[test]
fn consistency_ablation_drops_the_auxiliary_path() {
    let cfg = toy_config((2, 2, 2)).with_ablation(Ablation::removing([Component::Consistency]));
    let model = MultiMdModel::<f64>::new(cfg).unwrap();
    assert_eq!(model.config().classifier_input_dim(), 6);
    assert_eq!(model.layers().len(), 2);
    let a = model.forward(&sample(&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], Label::Real, 0.0)).unwrap();
    let b = model.forward(&sample(&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], Label::Real, 0.9)).unwrap();
    assert_eq!(a, b);
    assert!(a.consistency_pred.is_none());
    assert_eq!(a.h_smc_enhanced, a.h_smc);
}

#[test]
fn empty_ablation_equals_plain_forward() {
    let s = sample(&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], Label::Real, 0.0);
    let plain = MultiMdModel::<f64>::new(toy_config((2, 2, 2))).unwrap();
    let masked = MultiMdModel::<f64>::new(toy_config((2, 2, 2)).with_ablation(Ablation::none())).unwrap();
    assert_eq!(plain.forward(&s).unwrap(), masked.forward(&s).unwrap());
}

#[test]
fn same_seed_same_model() {
    let a = MultiMdModel::<f64>::new(toy_config((3, 3, 3))).unwrap();
    let b = MultiMdModel::<f64>::new(toy_config((3, 3, 3))).unwrap();
    assert_eq!(a, b);
    let mut cfg = toy_config((3, 3, 3));
    cfg.seed = 1;
    assert_ne!(a, MultiMdModel::<f64>::new(cfg).unwrap());
}

#[test]
fn training_trace_output_sums_to_one() {
    let mut cfg = toy_config((2, 2, 2));
    cfg.dropout = 0.5;
    cfg.hidden = 8;
    let model = MultiMdModel::<f64>::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = sample(&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], Label::Real, 0.0);
    let trace = model.forward_traced(&s, Some(&mut rng)).unwrap();
    let y = &trace.output().unwrap().y_hat;
    assert!((y[0] + y[1] - 1.0).abs() <= 1e-12);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let mut cfg = toy_config((3, 2, 2));
    cfg.seed = 17;
    cfg.activation = Activation::Tanh;
    let model = MultiMdModel::<f64>::new(cfg.clone()).unwrap();
    let mut buf = Vec::new();
    write_checkpoint(&model, &mut buf).unwrap();
    let back: MultiMdModel<f64> = read_checkpoint(buf.as_slice()).unwrap();
    assert_eq!(back, model);
    for (a, b) in model.tensors().iter().zip(back.tensors()) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert!(read_checkpoint::<f32, _>(buf.as_slice()).is_err());

    let small = MultiMdModel::<f32>::new(cfg).unwrap();
    let mut buf = Vec::new();
    write_checkpoint(&small, &mut buf).unwrap();
    assert_eq!(read_checkpoint::<f32, _>(buf.as_slice()).unwrap(), small);
}
