use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mix_seed, FeatureMatrix, ModelSpec};
use crate::error::{Error, Result};

/// Assign each sample to one of `k` folds so every class is spread as evenly
/// as possible. Returns the fold index per sample.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 folds, got {k}")));
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; y.len()];
    let mut offset = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: c,
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            folds[i] = (offset + j) % k;
        }
        // continue dealing where this class stopped so fold sizes stay level
        offset = (offset + members.len()) % k;
    }
    Ok(folds)
}

/// Out-of-fold accuracies for one model on one feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation across folds.
    pub std: f64,
    pub folds: Vec<usize>,
    pub seed: u64,
}

impl CvReport {
    fn from_accuracies(fold_accuracies: Vec<f64>, folds: Vec<usize>, seed: u64) -> Self {
        let k = fold_accuracies.len() as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / k;
        let std = (fold_accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / k).sqrt();
        CvReport {
            fold_accuracies,
            mean,
            std,
            folds,
            seed,
        }
    }
}

/// Stratified k-fold cross-validation. The same `seed` gives the same folds
/// for any feature matrix with the same labels.
pub fn cross_validate(spec: &ModelSpec, data: &FeatureMatrix, k: usize, seed: u64) -> Result<CvReport> {
    let y = data.labels();
    let folds = stratified_kfold(y, k, seed)?;
    if y.iter().all(|&c| c == y[0]) {
        log::warn!("cross-validation on single-class data; accuracy is trivially 1");
    }
    let accuracies = (0..k)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| folds[i] == f);
            let model = spec.fit(data, &train, mix_seed(seed, f as u64))?;
            let correct = model
                .predict(data, &test)
                .iter()
                .zip(&test)
                .filter(|(p, &i)| **p == y[i])
                .count();
            Ok(correct as f64 / test.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CvReport::from_accuracies(accuracies, folds, seed))
}
