use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_folds, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::experiment::metrics::{evaluate_metrics, MeanMetrics, Metrics};
use crate::experiment::train::{train, TrainConfig};
use crate::model::{ModelConfig, MultiMdModel, Sample};
use crate::scalar::Scalar;

/// Everything a cross-validated run needs besides the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub k: usize,
    /// Seeds the fold plan; fold `i` trains with `model.seed + i` and `train.seed + i`.
    pub seed: u64,
    /// Run folds on the rayon pool. Results are identical either way.
    #[serde(default)]
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, train: TrainConfig, k: usize, seed: u64) -> Self {
        Self {
            model,
            train,
            k,
            seed,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub metrics: Metrics,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean: MeanMetrics,
}

impl CvReport {
    pub fn from_folds(folds: Vec<FoldResult>) -> Self {
        let mean = MeanMetrics::of(folds.iter().map(|f| &f.metrics));
        Self { folds, mean }
    }

    /// Per-fold series of measure `m` (index into [`Metrics::values`]).
    pub fn series(&self, m: usize) -> Vec<f64> {
        self.folds.iter().map(|f| f.metrics.values()[m]).collect()
    }
}

/// Pools every record and precomputes its consistency target.
pub fn prepare_samples<T: Scalar>(d: &Dataset<T>) -> Result<Vec<Sample<T>>> {
    d.records().iter().map(Sample::from_record).collect()
}

fn run_fold<T: Scalar>(samples: &[Sample<T>], plan: &FoldPlan, cfg: &ExperimentConfig, fold: usize) -> Result<FoldResult> {
    let pick = |idx: Vec<usize>| idx.into_iter().map(|i| samples[i].clone()).collect::<Vec<_>>();
    let train_set = pick(plan.train_indices(fold));
    let test_set = pick(plan.test_indices(fold));

    let mut model_cfg = cfg.model.clone();
    model_cfg.seed = cfg.model.seed.wrapping_add(fold as u64);
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed = cfg.train.seed.wrapping_add(fold as u64);

    let mut model = MultiMdModel::<T>::new(model_cfg)?;
    let report = train(&mut model, &train_set, &train_cfg)?;
    Ok(FoldResult {
        fold,
        metrics: evaluate_metrics(&model, &test_set)?,
        final_loss: report.final_loss(),
    })
}

/// Trains a fresh model per fold on the other `k − 1` folds and scores it on the held-out one.
pub fn cross_validate_with_plan<T: Scalar>(
    samples: &[Sample<T>],
    plan: &FoldPlan,
    cfg: &ExperimentConfig,
) -> Result<CvReport> {
    cfg.validate()?;
    if plan.len() != samples.len() {
        return Err(Error::Fold(format!(
            "plan covers {} records but {} samples were given",
            plan.len(),
            samples.len()
        )));
    }
    let folds: Vec<FoldResult> = if cfg.parallel {
        (0..plan.k())
            .into_par_iter()
            .map(|f| run_fold(samples, plan, cfg, f))
            .collect::<Result<_>>()?
    } else {
        (0..plan.k())
            .map(|f| run_fold(samples, plan, cfg, f))
            .collect::<Result<_>>()?
    };
    Ok(CvReport::from_folds(folds))
}

/// k-fold cross-validation with a plan seeded from `cfg.seed`.
pub fn cross_validate<T: Scalar>(d: &Dataset<T>, cfg: &ExperimentConfig) -> Result<(FoldPlan, CvReport)> {
    cfg.validate()?;
    let plan = make_folds(d, cfg.k, cfg.seed)?;
    let samples = prepare_samples(d)?;
    let report = cross_validate_with_plan(&samples, &plan, cfg)?;
    Ok((plan, report))
}
