use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::record::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Deterministic k-fold partition of a dataset's records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    ids: Vec<String>,
    /// `assignment[i]` is the test fold of record `i`.
    assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.assignment[i])
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Record positions held out in `fold`.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    /// Record positions used for training when `fold` is held out.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle followed by round-robin assignment.
pub fn make_folds<T: Scalar>(d: &Dataset<T>, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Fold(format!("k must be >= 2, got {k}")));
    }
    if d.len() < k {
        return Err(Error::Fold(format!("{} records cannot fill {k} folds", d.len())));
    }
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; d.len()];
    for (slot, &i) in order.iter().enumerate() {
        assignment[i] = slot % k;
    }
    Ok(FoldPlan {
        k,
        seed,
        ids: d.records().iter().map(|r| r.id.clone()).collect(),
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::test_support::tiny_dataset;

    #[test]
    fn split_of_1288_into_ten() {
        let plan = make_folds(&tiny_dataset(644, 644), 10, 7).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, [128, 128, 129, 129, 129, 129, 129, 129, 129, 129]);
    }

    #[test]
    fn singleton_folds() {
        let plan = make_folds(&tiny_dataset(5, 5), 10, 0).unwrap();
        assert_eq!(plan.fold_sizes(), vec![1; 10]);
    }

    #[test]
    fn partition_law_and_lookup() {
        let d = tiny_dataset(12, 11);
        let plan = make_folds(&d, 4, 99).unwrap();
        let mut seen = vec![0; d.len()];
        for f in 0..4 {
            let test = plan.test_indices(f);
            let train = plan.train_indices(f);
            assert_eq!(test.len() + train.len(), d.len());
            for i in test {
                seen[i] += 1;
                assert_eq!(plan.fold_of(&d.records()[i].id), Some(f));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(plan, make_folds(&d, 4, 99).unwrap());
    }

    #[test]
    fn rejects_bad_k() {
        let d = tiny_dataset(2, 2);
        assert!(matches!(make_folds(&d, 1, 0), Err(Error::Fold(_))));
        assert!(matches!(make_folds(&d, 5, 0), Err(Error::Fold(_))));
    }
}
