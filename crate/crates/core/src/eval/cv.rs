use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, ClassMetrics, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::forest::{ForestModel, ForestParams};

/// Generator for stream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Forest seed for one (repeat, fold) cell.
fn cell_seed(seed: u64, repeat: usize, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((repeat as u64) << 32 | fold as u64)
}

/// Sorted distinct labels and each row's index into them.
pub fn encode_labels<S: AsRef<str>>(labels: &[S]) -> (Vec<String>, Vec<usize>) {
    let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    classes.sort();
    classes.dedup();
    let y = labels
        .iter()
        .map(|l| classes.binary_search_by(|c| c.as_str().cmp(l.as_ref())).unwrap())
        .collect();
    (classes, y)
}

fn members(y: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![Vec::new(); k];
    for (i, &c) in y.iter().enumerate() {
        m[c].push(i);
    }
    m
}

/// Fold index per row. Each class is shuffled and dealt round-robin, the
/// deal continuing where the previous class stopped, so per-class and total
/// fold sizes differ by at most one.
pub fn stratified_folds(y: &[usize], n_classes: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for mut rows in members(y, n_classes) {
        rows.shuffle(rng);
        for i in rows {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    fold
}

/// Row indices down-sampled so every present class has as many rows as the
/// smallest one; returned in ascending order.
pub fn balance_indices(y: &[usize], n_classes: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let groups: Vec<Vec<usize>> = members(y, n_classes).into_iter().filter(|g| !g.is_empty()).collect();
    let Some(min) = groups.iter().map(Vec::len).min() else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(min * groups.len());
    for mut g in groups {
        if g.len() > min {
            g.shuffle(rng);
            g.truncate(min);
        }
        out.extend(g);
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Down-sample each training split to its minority class.
    pub balance: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 10,
            repeats: 10,
            seed: 0,
            balance: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatScores {
    pub repeat: usize,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub fold_micro_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classes: Vec<String>,
    /// Rates from the confusion matrix pooled over every repeat.
    pub per_class: Vec<ClassMetrics>,
    pub micro_f1: f64,
    pub micro_f1_std: f64,
    pub macro_f1: f64,
    pub macro_f1_std: f64,
    pub repeats: Vec<RepeatScores>,
    pub confusion: ConfusionMatrix,
    pub undefined: Vec<String>,
    pub options: CvOptions,
    pub forest: ForestParams,
    /// Effective run configuration, filled in by callers that have one.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub config: serde_json::Value,
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fits on `train` (optionally balanced) and returns predicted class indices
/// for `test`.
pub(crate) fn train_and_predict(
    table: &FeatureTable,
    y: &[usize],
    classes: &[String],
    train: &[usize],
    test: &[usize],
    params: &ForestParams,
    balance: Option<&mut ChaCha8Rng>,
) -> Result<Vec<usize>> {
    let train: Vec<usize> = match balance {
        Some(rng) => {
            let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
            balance_indices(&ty, classes.len(), rng).into_iter().map(|j| train[j]).collect()
        }
        None => train.to_vec(),
    };
    let x: Vec<Vec<f64>> = train.iter().map(|&i| table.rows[i].clone()).collect();
    let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let model = ForestModel::fit_indexed(&x, &ty, classes.to_vec(), &table.columns, params)?;
    let tx: Vec<Vec<f64>> = test.iter().map(|&i| table.rows[i].clone()).collect();
    model.predict_rows(&tx)
}

/// Repeated stratified k-fold cross-validation.
pub fn kfold_cv(table: &FeatureTable, params: &ForestParams, opts: &CvOptions) -> Result<EvaluationReport> {
    let labels = table.require_labels()?;
    let (classes, y) = encode_labels(labels);
    if opts.folds < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    if opts.repeats == 0 {
        return Err(Error::Config("cross-validation needs at least 1 repeat".into()));
    }
    if classes.len() < 2 {
        return Err(Error::InvalidInput("cross-validation needs at least two classes".into()));
    }
    for (c, rows) in classes.iter().zip(members(&y, classes.len())) {
        if rows.len() < opts.folds {
            return Err(Error::InvalidInput(format!(
                "class {c} has {} members, fewer than {} folds",
                rows.len(),
                opts.folds
            )));
        }
    }

    let assignments: Vec<Vec<usize>> = (0..opts.repeats)
        .map(|r| stratified_folds(&y, classes.len(), opts.folds, &mut seeded_rng(opts.seed, r as u64)))
        .collect();
    let cells: Vec<(usize, usize)> =
        (0..opts.repeats).flat_map(|r| (0..opts.folds).map(move |f| (r, f))).collect();
    let results: Vec<ConfusionMatrix> = cells
        .par_iter()
        .map(|&(r, f)| {
            let fold = &assignments[r];
            let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| fold[i] == f);
            let p = ForestParams {
                seed: cell_seed(params.seed, r, f),
                ..params.clone()
            };
            let mut brng = seeded_rng(cell_seed(opts.seed, r, f), u64::MAX);
            let pred = train_and_predict(
                table,
                &y,
                &classes,
                &train,
                &test,
                &p,
                opts.balance.then_some(&mut brng),
            )?;
            let mut cm = ConfusionMatrix::new(classes.clone());
            for (&i, &p) in test.iter().zip(&pred) {
                cm.add(y[i], p);
            }
            Ok(cm)
        })
        .collect::<Result<_>>()?;

    let mut pooled = ConfusionMatrix::new(classes.clone());
    let mut repeats = Vec::with_capacity(opts.repeats);
    for (r, chunk) in results.chunks(opts.folds).enumerate() {
        let mut cm = ConfusionMatrix::new(classes.clone());
        let mut fold_scores = Vec::with_capacity(opts.folds);
        for fcm in chunk {
            cm.merge(fcm);
            fold_scores.push(compute_metrics(fcm).micro_f1);
        }
        pooled.merge(&cm);
        let m = compute_metrics(&cm);
        repeats.push(RepeatScores {
            repeat: r,
            micro_f1: m.micro_f1,
            macro_f1: m.macro_f1,
            fold_micro_f1: fold_scores,
        });
    }
    let (micro_f1, micro_f1_std) = mean_std(&repeats.iter().map(|r| r.micro_f1).collect::<Vec<_>>());
    let (macro_f1, macro_f1_std) = mean_std(&repeats.iter().map(|r| r.macro_f1).collect::<Vec<_>>());
    let pooled_metrics = compute_metrics(&pooled);
    Ok(EvaluationReport {
        classes,
        per_class: pooled_metrics.per_class,
        micro_f1,
        micro_f1_std,
        macro_f1,
        macro_f1_std,
        repeats,
        confusion: pooled,
        undefined: pooled_metrics.undefined,
        options: opts.clone(),
        forest: params.clone(),
        config: serde_json::Value::Null,
    })
}
