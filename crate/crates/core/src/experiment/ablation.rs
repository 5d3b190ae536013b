use crate::dataset::{make_folds, Dataset, FoldPlan};
use crate::error::Result;
use crate::experiment::cv::{cross_validate_with_plan, prepare_samples, CvReport, ExperimentConfig};
use crate::experiment::ttest::{paired_ttest, TTestResult};
use crate::model::{Ablation, Component, Sample};
use crate::scalar::Scalar;

/// One ablated variant compared against the full model on the same folds.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub ablation: Ablation,
    pub ablated: CvReport,
    /// `full − ablated` mean difference per measure.
    pub mean_diff: [f64; 4],
    /// Paired over folds, full vs ablated, per measure.
    pub tests: [TTestResult; 4],
}

impl AblationRow {
    pub fn label(&self) -> String {
        if self.ablation.is_empty() {
            "none".to_owned()
        } else {
            self.ablation.components().map(|c| c.name()).collect::<Vec<_>>().join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub full: CvReport,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, c: Component) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.ablation == Ablation::removing([c]))
    }
}

/// Compares a variant against an already computed full-model run.
pub fn compare_variant<T: Scalar>(
    samples: &[Sample<T>],
    plan: &FoldPlan,
    cfg: &ExperimentConfig,
    full: &CvReport,
    ablation: Ablation,
) -> Result<AblationRow> {
    let mut variant = cfg.clone();
    variant.model.ablation = ablation.clone();
    let ablated = cross_validate_with_plan(samples, plan, &variant)?;
    let full_means = full.mean.values();
    let ablated_means = ablated.mean.values();
    let mut mean_diff = [0.0; 4];
    let mut tests = Vec::with_capacity(4);
    for m in 0..4 {
        mean_diff[m] = full_means[m] - ablated_means[m];
        tests.push(paired_ttest(&full.series(m), &ablated.series(m))?);
    }
    Ok(AblationRow {
        ablation,
        ablated,
        mean_diff,
        tests: tests.try_into().expect("four measures"),
    })
}

/// Full model plus each single-component ablation, all on one fold plan.
pub fn ablation_suite<T: Scalar>(
    d: &Dataset<T>,
    cfg: &ExperimentConfig,
    components: &[Component],
) -> Result<AblationTable> {
    cfg.validate()?;
    let plan = make_folds(d, cfg.k, cfg.seed)?;
    let samples = prepare_samples(d)?;
    let mut base = cfg.clone();
    base.model.ablation = Ablation::none();
    let full = cross_validate_with_plan(&samples, &plan, &base)?;
    let rows = components
        .iter()
        .map(|&c| compare_variant(&samples, &plan, &base, &full, Ablation::removing([c])))
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationTable { full, rows })
}

