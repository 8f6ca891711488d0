//! Stratified k-fold classification, grid search and Monte-Carlo
//! regression. Folds and splits run in parallel; every random stream is
//! derived from the caller's seed and the fold or split index, so results do
//! not depend on the thread count.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{classwise_f1, rmse, spearman, weighted_f1, Confusion};
use super::{derive_seed, Classifier, GbtParams, GradientBoosting, ModelParams, ModelSpec};
use crate::corpus::ClassLabel;
use crate::diversity::ConceptSample;
use crate::error::{Error, Result};

const CLASSES: [ClassLabel; 2] = [ClassLabel::Abstract, ClassLabel::Concrete];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub lemma: String,
    pub truth: ClassLabel,
    pub predicted: ClassLabel,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: ModelSpec,
    pub folds: usize,
    pub seed: u64,
    pub weighted_f1: f64,
    pub per_class_f1: BTreeMap<ClassLabel, f64>,
    /// Weighted F1 of each fold's held-out predictions.
    pub fold_scores: Vec<f64>,
    /// Out-of-fold counts, rows = true class, columns = predicted, in the
    /// order abstract, concrete.
    pub confusion: Confusion,
    /// Set by grid search to the winning configuration.
    pub best_params: Option<ModelParams>,
    pub predictions: Vec<Prediction>,
}

fn class_index(lemma: &str, label: Option<ClassLabel>) -> Result<usize> {
    match label {
        Some(ClassLabel::Abstract) => Ok(0),
        Some(ClassLabel::Concrete) => Ok(1),
        other => Err(Error::validation(format!(
            "`{lemma}` has no abstract/concrete label ({other:?})"
        ))),
    }
}

fn check_dims(samples: &[ConceptSample]) -> Result<()> {
    let d = samples[0].vector.len();
    if d == 0 {
        return Err(Error::validation("sample vectors are empty"));
    }
    match samples.iter().find(|s| s.vector.len() != d) {
        Some(s) => Err(Error::validation(format!(
            "`{}` has {} features but `{}` has {d}",
            s.lemma,
            s.vector.len(),
            samples[0].lemma
        ))),
        None => Ok(()),
    }
}

/// Fold index of every sample: each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            fold[i] = j % k;
        }
    }
    fold
}

/// Stratified k-fold cross-validation; scores are computed on the pooled
/// out-of-fold predictions.
pub fn kfold_classify(samples: &[ConceptSample], spec: &ModelSpec, k: usize, seed: u64) -> Result<EvalReport> {
    if k < 2 {
        return Err(Error::validation(format!("need at least 2 folds, got {k}")));
    }
    if samples.is_empty() {
        return Err(Error::validation("no samples to classify"));
    }
    check_dims(samples)?;
    let labels: Vec<usize> = samples
        .iter()
        .map(|s| class_index(&s.lemma, s.class_label))
        .collect::<Result<_>>()?;
    let counts = [labels.iter().filter(|&&l| l == 0).count(), labels.len() - labels.iter().filter(|&&l| l == 0).count()];
    if counts.iter().any(|&c| c < k) {
        return Err(Error::validation(format!(
            "{k}-fold cross-validation needs at least {k} concepts per class; available: abstract {}, concrete {}",
            counts[0], counts[1]
        )));
    }
    let x: Vec<Vec<f64>> = samples.iter().map(|s| s.vector.clone()).collect();
    let fold_of = stratified_folds(&labels, k, seed);

    let per_fold: Vec<Vec<(usize, usize)>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..x.len()).filter(|&i| fold_of[i] != f).collect();
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
            let fold_spec = ModelSpec::new(spec.params, derive_seed(spec.seed, f as u64));
            let model = Classifier::fit(&tx, &ty, &fold_spec);
            (0..x.len())
                .filter(|&i| fold_of[i] == f)
                .map(|i| (i, model.predict(&x[i])))
                .collect()
        })
        .collect();

    let mut confusion = Confusion::new(2);
    let mut fold_scores = Vec::with_capacity(k);
    let mut predicted = vec![0; x.len()];
    for preds in &per_fold {
        let truth: Vec<usize> = preds.iter().map(|&(i, _)| labels[i]).collect();
        let guess: Vec<usize> = preds.iter().map(|&(_, p)| p).collect();
        let c = Confusion::from_pairs(2, &truth, &guess);
        fold_scores.push(weighted_f1(&c)?);
        confusion.add(&c);
        for &(i, p) in preds {
            predicted[i] = p;
        }
    }
    let f1 = classwise_f1(&confusion);
    let predictions = samples
        .iter()
        .enumerate()
        .map(|(i, s)| Prediction {
            lemma: s.lemma.clone(),
            truth: CLASSES[labels[i]],
            predicted: CLASSES[predicted[i]],
            fold: fold_of[i],
        })
        .collect();
    Ok(EvalReport {
        spec: *spec,
        folds: k,
        seed,
        weighted_f1: weighted_f1(&confusion)?,
        per_class_f1: CLASSES.iter().copied().zip(f1).collect(),
        fold_scores,
        confusion,
        best_params: None,
        predictions,
    })
}

/// Score every configuration with the same folds and keep the best weighted
/// F1; ties keep the earlier configuration.
pub fn grid_search(
    samples: &[ConceptSample],
    grid: &[ModelParams],
    k: usize,
    seed: u64,
) -> Result<(ModelSpec, EvalReport)> {
    if grid.is_empty() {
        return Err(Error::validation("hyper-parameter grid is empty"));
    }
    let reports: Vec<EvalReport> = grid
        .par_iter()
        .map(|p| kfold_classify(samples, &ModelSpec::new(*p, seed), k, seed))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.weighted_f1 > reports[best].weighted_f1 {
            best = i;
        }
    }
    let mut report = reports.into_iter().nth(best).expect("grid is non-empty");
    report.best_params = Some(grid[best]);
    Ok((report.spec, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    /// `None` when the held-out targets or predictions are constant.
    pub spearman_rho: Option<f64>,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub params: GbtParams,
    pub splits: usize,
    pub train_ratio: f64,
    pub seed: u64,
    /// Mean over the splits where rho is defined; 0 if none is.
    pub spearman_rho: f64,
    pub rho_undefined: bool,
    pub rmse: f64,
    pub split_scores: Vec<SplitScore>,
}

/// Repeated random train/test splits with a boosted regressor on the
/// concreteness ratings.
pub fn mc_regress(
    samples: &[ConceptSample],
    params: &GbtParams,
    splits: usize,
    train_ratio: f64,
    seed: u64,
) -> Result<RegressionReport> {
    if samples.len() < 10 {
        return Err(Error::validation(format!(
            "regression needs at least 10 concepts, got {}",
            samples.len()
        )));
    }
    if splits == 0 || !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::validation(format!(
            "need splits > 0 and a train ratio in (0, 1), got {splits} and {train_ratio}"
        )));
    }
    check_dims(samples)?;
    let y: Vec<f64> = samples
        .iter()
        .map(|s| {
            s.rating
                .ok_or_else(|| Error::validation(format!("`{}` has no concreteness rating", s.lemma)))
        })
        .collect::<Result<_>>()?;
    let n = samples.len();
    let n_train = ((n as f64 * train_ratio).round() as usize).clamp(1, n - 1);

    let split_scores: Vec<SplitScore> = (0..splits)
        .into_par_iter()
        .map(|s| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, s as u64)));
            let (train, test) = order.split_at(n_train);
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| samples[i].vector.clone()).collect();
            let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = GradientBoosting::fit(&tx, &ty, params);
            let pred: Vec<f64> = test.iter().map(|&i| model.predict(&samples[i].vector)).collect();
            let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            Ok(SplitScore {
                spearman_rho: match spearman(&pred, &truth) {
                    Ok(r) => Some(r),
                    Err(Error::Undefined(_) | Error::Validation(_)) => None,
                    Err(e) => return Err(e),
                },
                rmse: rmse(&pred, &truth)?,
            })
        })
        .collect::<Result<_>>()?;

    let defined: Vec<f64> = split_scores.iter().filter_map(|s| s.spearman_rho).collect();
    let rho_undefined = defined.is_empty();
    Ok(RegressionReport {
        params: *params,
        splits,
        train_ratio,
        seed,
        spearman_rho: if rho_undefined {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        },
        rho_undefined,
        rmse: split_scores.iter().map(|s| s.rmse).sum::<f64>() / splits as f64,
        split_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{ForestParams, LogisticParams};

    fn sample(i: usize, label: ClassLabel, v: Vec<f64>) -> ConceptSample {
        ConceptSample {
            lemma: format!("w{i:03}"),
            class_label: Some(label),
            rating: None,
            vector: v,
            attribute_manifest: Vec::new(),
        }
    }

    fn line_data(n: usize) -> Vec<ConceptSample> {
        (0..n)
            .map(|i| {
                let label = if i % 2 == 0 { ClassLabel::Abstract } else { ClassLabel::Concrete };
                let base = if i % 2 == 0 { 0.0 } else { 10.0 };
                sample(i, label, vec![base + (i % 5) as f64, (i % 3) as f64])
            })
            .collect()
    }

    fn small_forest() -> ModelParams {
        ModelParams::RandomForest(ForestParams {
            n_estimators: 15,
            ..ForestParams::default()
        })
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..23).map(|i| usize::from(i < 13)).collect();
        let f = stratified_folds(&labels, 5, 1);
        for fold in 0..5 {
            let ones = (0..23).filter(|&i| f[i] == fold && labels[i] == 1).count();
            let zeros = (0..23).filter(|&i| f[i] == fold && labels[i] == 0).count();
            assert!((2..=3).contains(&ones) && (2..=2).contains(&zeros), "fold {fold}: {ones} {zeros}");
        }
    }

    #[test]
    fn separable_and_deterministic() {
        let data = line_data(30);
        let spec = ModelSpec::new(small_forest(), 3);
        let a = kfold_classify(&data, &spec, 5, 3).unwrap();
        assert_eq!(a.weighted_f1, 1.0);
        assert_eq!(a.confusion.total(), 30);
        assert_eq!(a.fold_scores.len(), 5);
        assert_eq!(a, kfold_classify(&data, &spec, 5, 3).unwrap());
        let lr = ModelSpec::new(ModelParams::LogisticRegression(LogisticParams::default()), 3);
        assert_eq!(kfold_classify(&data, &lr, 5, 3).unwrap().weighted_f1, 1.0);
    }

    #[test]
    fn reported_f1_matches_confusion() {
        let data: Vec<ConceptSample> = (0..40)
            .map(|i| {
                let label = if i % 2 == 0 { ClassLabel::Abstract } else { ClassLabel::Concrete };
                sample(i, label, vec![((i * 37) % 17) as f64, ((i * 11) % 7) as f64])
            })
            .collect();
        let r = kfold_classify(&data, &ModelSpec::new(small_forest(), 1), 5, 1).unwrap();
        assert_eq!(r.weighted_f1, weighted_f1(&r.confusion).unwrap());
        let total: f64 = r.per_class_f1[&ClassLabel::Abstract] * r.confusion.support(0) as f64
            + r.per_class_f1[&ClassLabel::Concrete] * r.confusion.support(1) as f64;
        assert!((total / 40.0 - r.weighted_f1).abs() < 1e-15);
    }

    #[test]
    fn too_few_per_class() {
        let mut data = line_data(30);
        data.retain(|s| s.class_label == Some(ClassLabel::Concrete) || s.lemma < "w008".into());
        let err = kfold_classify(&data, &ModelSpec::new(small_forest(), 0), 5, 0).unwrap_err();
        assert!(err.to_string().contains("abstract 4"), "{err}");
        let single: Vec<ConceptSample> = line_data(30).into_iter().filter(|s| s.class_label == Some(ClassLabel::Abstract)).collect();
        assert!(kfold_classify(&single, &ModelSpec::new(small_forest(), 0), 5, 0).is_err());
    }

    #[test]
    fn grid_single_config_and_ties() {
        let data = line_data(20);
        let (spec, r) = grid_search(&data, &[small_forest()], 5, 2).unwrap();
        assert_eq!(spec.params, small_forest());
        assert_eq!(r.best_params, Some(small_forest()));
        let other = ModelParams::RandomForest(ForestParams {
            n_estimators: 20,
            ..ForestParams::default()
        });
        let (spec, _) = grid_search(&data, &[other, small_forest()], 5, 2).unwrap();
        assert_eq!(spec.params, other);
        assert!(grid_search(&data, &[], 5, 2).is_err());
    }

    #[test]
    fn regression_on_constant_targets() {
        let data: Vec<ConceptSample> = (0..20)
            .map(|i| ConceptSample {
                rating: Some(3.0),
                ..sample(i, ClassLabel::Abstract, vec![i as f64])
            })
            .collect();
        let r = mc_regress(&data, &GbtParams::default(), 4, 0.8, 1).unwrap();
        assert!(r.rho_undefined);
        assert_eq!(r.spearman_rho, 0.0);
        assert!(r.rmse < 1e-12);
        assert!(mc_regress(&data[..9], &GbtParams::default(), 4, 0.8, 1).is_err());
    }
}
