//! Supervised-learning harness: stratified k-fold splits, the argmax decision
//! rule, accuracy, and one-vs-rest ROC/AUC with vertical curve averaging.

use crate::circuit::{povm_elements, PovmCircuitSpec};
use crate::encoding::{feature_map, rescale, EncodingFunction, IrisDataset};
use crate::error::{Error, Result};
use crate::qmath::PureState;
use crate::rng::SplitMix64;
use crate::training::{best_trace, train_restarts, LabeledStateSet, TrainConfig, TrainTrace};

/// Number of fixed false-positive-rate grid points for mean ROC curves.
pub const MEAN_ROC_GRID: usize = 101;

/// One train/test split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Stratified k-fold assignment: a seeded shuffle within each class followed
/// by round-robin placement, so per-class proportions are preserved within
/// one sample. Deterministic for a fixed seed.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidArgument("need at least two folds".into()));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no labels to split".into()));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (idx, &label) in labels.iter().enumerate() {
        per_class[label].push(idx);
    }
    let mut rng = SplitMix64::new(seed);
    let mut fold_members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (class, members) in per_class.iter_mut().enumerate() {
        if members.len() < k {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} members, fewer than {k} folds",
                members.len()
            )));
        }
        rng.shuffle(members);
        for (i, &idx) in members.iter().enumerate() {
            fold_members[i % k].push(idx);
        }
    }
    let mut splits = Vec::with_capacity(k);
    for f in 0..k {
        let mut test_indices = fold_members[f].clone();
        test_indices.sort_unstable();
        let mut train_indices: Vec<usize> = (0..labels.len())
            .filter(|i| !test_indices.contains(i))
            .collect();
        train_indices.sort_unstable();
        splits.push(FoldSplit {
            train_indices,
            test_indices,
        });
    }
    Ok(splits)
}

/// Argmax over the first `n_labels` outcome probabilities; unused circuit
/// outcomes are never selectable and ties break toward the smallest index.
pub fn predict_label(probabilities: &[f64], n_labels: usize) -> usize {
    let mut best = 0;
    for m in 1..n_labels.min(probabilities.len()) {
        if probabilities[m] > probabilities[best] {
            best = m;
        }
    }
    best
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let hits = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Receiver operating characteristic curve with its area.
#[derive(Debug, Clone)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` pairs from the strictest
    /// threshold to the loosest; starts at (0,0), ends at (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// One-vs-rest ROC for `positive_class`, sweeping a threshold over the
/// per-sample probability vectors. Samples with equal scores enter at one
/// threshold together, and the area comes from the trapezoidal rule.
pub fn roc_auc_ovr(
    scores: &[Vec<f64>],
    truth: &[usize],
    positive_class: usize,
) -> Result<RocCurve> {
    if scores.len() != truth.len() || scores.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} score vectors vs {} labels",
            scores.len(),
            truth.len()
        )));
    }
    let binary: Vec<(f64, bool)> = scores
        .iter()
        .zip(truth)
        .map(|(s, &t)| {
            let score = s.get(positive_class).copied().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "score vector shorter than class index {positive_class}"
                ))
            })?;
            Ok((score, t == positive_class))
        })
        .collect::<Result<_>>()?;
    let positives = binary.iter().filter(|(_, p)| *p).count();
    let negatives = binary.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidArgument(
            "one-vs-rest truth contains a single class".into(),
        ));
    }

    let mut order: Vec<usize> = (0..binary.len()).collect();
    order.sort_by(|&a, &b| binary[b].0.partial_cmp(&binary[a].0).unwrap());

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = binary[order[i]].0;
        while i < order.len() && binary[order[i]].0 == threshold {
            if binary[order[i]].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }

    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// True-positive rate of a curve at the queried false-positive rate, linearly
/// interpolated; vertical jumps resolve to their upper end.
fn tpr_at(curve: &RocCurve, fpr: f64) -> f64 {
    let points = &curve.points;
    let mut last_le = 0;
    for (i, p) in points.iter().enumerate() {
        if p.0 <= fpr {
            last_le = i;
        } else {
            break;
        }
    }
    let (f1, t1) = points[last_le];
    if (f1 - fpr).abs() < 1e-15 || last_le + 1 >= points.len() {
        return t1;
    }
    let (f2, t2) = points[last_le + 1];
    t1 + (t2 - t1) * (fpr - f1) / (f2 - f1)
}

/// Vertical averaging of ROC curves on a fixed false-positive-rate grid.
pub fn mean_roc(curves: &[RocCurve], grid_size: usize) -> RocCurve {
    assert!(grid_size >= 2 && !curves.is_empty());
    let points: Vec<(f64, f64)> = (0..grid_size)
        .map(|i| {
            let fpr = i as f64 / (grid_size - 1) as f64;
            let tpr =
                curves.iter().map(|c| tpr_at(c, fpr)).sum::<f64>() / curves.len() as f64;
            (fpr, tpr)
        })
        .collect();
    let auc = trapezoid(&points);
    RocCurve { points, auc }
}

/// Classification quality of one evaluation.
#[derive(Debug, Clone)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class_auc: Vec<f64>,
    pub mean_auc: f64,
}

impl Metrics {
    fn new(accuracy: f64, per_class_auc: Vec<f64>) -> Self {
        let mean_auc = per_class_auc.iter().sum::<f64>() / per_class_auc.len() as f64;
        Self {
            accuracy,
            per_class_auc,
            mean_auc,
        }
    }
}

/// Data-to-state pipeline settings: which encoding, how many layers.
pub struct FeatureMapConfig {
    pub encoder: &'static dyn EncodingFunction,
    pub layers: usize,
}

/// A scored test sample.
#[derive(Debug, Clone)]
pub struct PredictionRecord {
    pub index: usize,
    pub truth: usize,
    pub predicted: usize,
    /// Outcome probabilities over all simulated outcomes.
    pub probabilities: Vec<f64>,
}

/// Per-fold training/evaluation results.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub split: FoldSplit,
    pub metrics: Metrics,
    pub rocs: Vec<RocCurve>,
    pub predictions: Vec<PredictionRecord>,
    pub trace: TrainTrace,
}

/// Cross-validation results with their aggregates.
pub struct CrossValidationOutcome {
    pub folds: Vec<FoldOutcome>,
    pub mean_metrics: Metrics,
    /// Per-class mean ROC on the fixed grid.
    pub mean_rocs: Vec<RocCurve>,
}

/// Stratified k-fold cross-validation of the full pipeline: rescale, encode,
/// train per fold (best of `restarts`), score held-out samples.
///
/// Rescaling uses the min/max of the full dataset before splitting. Fold `f`
/// trains with seed `train_config.seed ^ f`.
pub fn cross_validate(
    data: &IrisDataset,
    feature_config: &FeatureMapConfig,
    circuit: &PovmCircuitSpec,
    train_config: &TrainConfig,
    restarts: usize,
    k: usize,
    seed: u64,
) -> Result<CrossValidationOutcome> {
    let scaled = rescale(data)?;
    let states: Vec<PureState> = scaled
        .points()
        .iter()
        .map(|p| {
            feature_config
                .encoder
                .coefficients(p)
                .map(|c| feature_map(&c, feature_config.layers))
        })
        .collect::<Result<_>>()?;
    let labels = scaled.labels();
    let n_classes = labels.iter().max().copied().unwrap_or(0) + 1;
    let splits = stratified_kfold(labels, k, seed)?;

    let mut folds = Vec::with_capacity(k);
    for (fold_index, split) in splits.into_iter().enumerate() {
        let fold = run_fold(
            fold_index,
            split,
            &states,
            labels,
            n_classes,
            circuit,
            train_config,
            restarts,
        )
        .map_err(|e| Error::TrainingFailed(format!("fold {fold_index}: {e}")))?;
        folds.push(fold);
    }

    let accuracy_mean =
        folds.iter().map(|f| f.metrics.accuracy).sum::<f64>() / folds.len() as f64;
    let per_class_auc: Vec<f64> = (0..n_classes)
        .map(|c| {
            folds.iter().map(|f| f.metrics.per_class_auc[c]).sum::<f64>() / folds.len() as f64
        })
        .collect();
    let mean_metrics = Metrics::new(accuracy_mean, per_class_auc);
    let mean_rocs: Vec<RocCurve> = (0..n_classes)
        .map(|c| {
            let curves: Vec<RocCurve> =
                folds.iter().map(|f| f.rocs[c].clone()).collect();
            mean_roc(&curves, MEAN_ROC_GRID)
        })
        .collect();

    Ok(CrossValidationOutcome {
        folds,
        mean_metrics,
        mean_rocs,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    fold_index: usize,
    split: FoldSplit,
    states: &[PureState],
    labels: &[usize],
    n_classes: usize,
    circuit: &PovmCircuitSpec,
    train_config: &TrainConfig,
    restarts: usize,
) -> Result<FoldOutcome> {
    let train_states: Vec<PureState> = split
        .train_indices
        .iter()
        .map(|&i| states[i].clone())
        .collect();
    let train_labels: Vec<usize> = split.train_indices.iter().map(|&i| labels[i]).collect();
    let train_set = LabeledStateSet::try_new(train_states, train_labels)?;

    let mut config = train_config.clone();
    config.circuit = circuit.clone();
    config.seed = train_config.seed ^ fold_index as u64;
    let traces = train_restarts(&train_set, &config, restarts)?;
    let best = best_trace(&traces).clone();

    let povm = povm_elements(circuit, &best.final_theta)?;
    let mut predictions = Vec::with_capacity(split.test_indices.len());
    for &idx in &split.test_indices {
        let reduced = states[idx].reduced_density(circuit.target_qubits())?;
        let probabilities: Vec<f64> = povm
            .elements()
            .iter()
            .map(|e| reduced.matrix().trace_product_re(e))
            .collect();
        predictions.push(PredictionRecord {
            index: idx,
            truth: labels[idx],
            predicted: predict_label(&probabilities, n_classes),
            probabilities,
        });
    }

    let predicted: Vec<usize> = predictions.iter().map(|p| p.predicted).collect();
    let truth: Vec<usize> = predictions.iter().map(|p| p.truth).collect();
    let scores: Vec<Vec<f64>> = predictions.iter().map(|p| p.probabilities.clone()).collect();
    let acc = accuracy(&predicted, &truth)?;
    let rocs: Vec<RocCurve> = (0..n_classes)
        .map(|c| roc_auc_ovr(&scores, &truth, c))
        .collect::<Result<_>>()?;
    let per_class_auc: Vec<f64> = rocs.iter().map(|r| r.auc).collect();

    Ok(FoldOutcome {
        split,
        metrics: Metrics::new(acc, per_class_auc),
        rocs,
        predictions,
        trace: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_split_on_iris_shaped_labels() {
        let labels: Vec<usize> = (0..150).map(|i| i / 50).collect();
        let splits = stratified_kfold(&labels, 5, 13).unwrap();
        assert_eq!(splits.len(), 5);
        let mut seen = vec![0usize; 150];
        for split in &splits {
            assert_eq!(split.test_indices.len(), 30);
            for class in 0..3 {
                let count = split
                    .test_indices
                    .iter()
                    .filter(|&&i| labels[i] == class)
                    .count();
                assert_eq!(count, 10);
            }
            for &i in &split.test_indices {
                seen[i] += 1;
            }
            assert_eq!(split.train_indices.len(), 120);
            for &i in &split.train_indices {
                assert!(!split.test_indices.contains(&i));
            }
        }
        // Test folds partition the dataset.
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn stratified_split_tiny_and_deterministic() {
        let labels = vec![0, 0, 1, 1];
        let splits = stratified_kfold(&labels, 2, 7).unwrap();
        for split in &splits {
            assert_eq!(split.test_indices.len(), 2);
            let classes: Vec<usize> = split.test_indices.iter().map(|&i| labels[i]).collect();
            assert!(classes.contains(&0) && classes.contains(&1));
        }
        let again = stratified_kfold(&labels, 2, 7).unwrap();
        assert_eq!(splits, again);

        assert!(stratified_kfold(&[0, 0, 1], 2, 7).is_err());
        assert!(stratified_kfold(&labels, 1, 7).is_err());
    }

    #[test]
    fn predict_label_rules() {
        assert_eq!(predict_label(&[0.1, 0.7, 0.2, 0.0], 3), 1);
        // tie breaks toward the smaller index
        assert_eq!(predict_label(&[0.4, 0.4, 0.2, 0.0], 3), 0);
        // outcome 3 is not a valid label
        assert_eq!(predict_label(&[0.1, 0.2, 0.3, 0.4], 3), 2);
    }

    #[test]
    fn predict_label_scale_invariant() {
        let p = [0.2, 0.5, 0.3];
        let scaled: Vec<f64> = p.iter().map(|x| x * 7.3).collect();
        assert_eq!(predict_label(&p, 3), predict_label(&scaled, 3));
    }

    #[test]
    fn accuracy_basics() {
        assert_eq!(accuracy(&[1, 2, 0], &[1, 2, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2, 0], &[0, 1, 2]).unwrap(), 0.0);
        let preds: Vec<usize> = (0..30).map(|i| usize::from(i >= 27)).collect();
        let truth = vec![0usize; 30];
        assert!((accuracy(&preds, &truth).unwrap() - 0.9).abs() < 1e-15);
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    fn one_hot_scores(labels: &[usize], n: usize) -> Vec<Vec<f64>> {
        labels
            .iter()
            .map(|&l| (0..n).map(|c| if c == l { 0.9 } else { 0.05 }).collect())
            .collect()
    }

    #[test]
    fn roc_perfect_separation() {
        let truth = vec![0, 0, 1, 1, 2];
        let scores = one_hot_scores(&truth, 3);
        for class in 0..3 {
            let roc = roc_auc_ovr(&scores, &truth, class).unwrap();
            assert!((roc.auc - 1.0).abs() < 1e-12, "class {class}: {}", roc.auc);
            assert_eq!(*roc.points.first().unwrap(), (0.0, 0.0));
            assert_eq!(*roc.points.last().unwrap(), (1.0, 1.0));
        }
    }

    #[test]
    fn roc_constant_scores_is_diagonal() {
        let truth = vec![0, 0, 1, 1];
        let scores = vec![vec![0.5, 0.5]; 4];
        let roc = roc_auc_ovr(&scores, &truth, 0).unwrap();
        assert!((roc.auc - 0.5).abs() < 1e-12);
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn roc_random_scores_near_half() {
        // Monte Carlo oracle: uniform scores on balanced binary truth.
        let mut rng = SplitMix64::new(2718);
        let n = 1000;
        let truth: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let scores: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let s = rng.next_f64();
                vec![s, 1.0 - s]
            })
            .collect();
        let roc = roc_auc_ovr(&scores, &truth, 0).unwrap();
        assert!((roc.auc - 0.5).abs() < 0.05, "auc {}", roc.auc);
    }

    #[test]
    fn roc_rejects_single_class_truth() {
        let truth = vec![1, 1, 1];
        let scores = one_hot_scores(&truth, 2);
        assert!(roc_auc_ovr(&scores, &truth, 1).is_err());
    }

    #[test]
    fn roc_monotone_and_bounded() {
        let mut rng = SplitMix64::new(99);
        let truth: Vec<usize> = (0..40).map(|_| rng.below(2)).collect();
        let scores: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let s = rng.next_f64();
                vec![s, 1.0 - s]
            })
            .collect();
        let roc = roc_auc_ovr(&scores, &truth, 0).unwrap();
        for w in roc.points.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
        for &(f, t) in &roc.points {
            assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = SplitMix64::new(5150);
        let truth: Vec<usize> = (0..60).map(|_| rng.below(2)).collect();
        if truth.iter().all(|&t| t == 0) || truth.iter().all(|&t| t == 1) {
            panic!("degenerate draw");
        }
        let raw: Vec<f64> = (0..60).map(|_| rng.next_f64()).collect();
        let scores: Vec<Vec<f64>> = raw.iter().map(|&s| vec![s, 1.0 - s]).collect();
        let transformed: Vec<Vec<f64>> = raw
            .iter()
            .map(|&s| vec![s * s * s + s, 1.0 - s])
            .collect();
        let a = roc_auc_ovr(&scores, &truth, 0).unwrap().auc;
        let b = roc_auc_ovr(&transformed, &truth, 0).unwrap().auc;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mean_roc_of_identical_curves_is_the_curve() {
        let truth = vec![0, 0, 1, 1, 0, 1];
        let scores = vec![
            vec![0.9],
            vec![0.8],
            vec![0.7],
            vec![0.3],
            vec![0.65],
            vec![0.2],
        ];
        let roc = roc_auc_ovr(&scores, &truth, 0).unwrap();
        let averaged = mean_roc(&[roc.clone(), roc.clone()], MEAN_ROC_GRID);
        assert_eq!(averaged.points.len(), MEAN_ROC_GRID);
        assert!((averaged.auc - roc.auc).abs() < 0.02);
        // The averaged curve starts at the TPR attainable at zero FPR
        // (2/3 here: two of three positives outrank every negative).
        let first = averaged.points.first().unwrap();
        assert!(first.0 == 0.0 && (first.1 - 2.0 / 3.0).abs() < 1e-12);
        let last = averaged.points.last().unwrap();
        assert!((last.0 - 1.0).abs() < 1e-12 && (last.1 - 1.0).abs() < 1e-12);
        for w in averaged.points.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }
}
