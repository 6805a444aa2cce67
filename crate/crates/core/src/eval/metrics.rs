use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput(format!("confusion matrix must be {k}x{k}")));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.classes.iter().cloned());
        out.write_record(&header)?;
        for (c, row) in self.classes.iter().zip(&self.counts) {
            let mut rec = vec![c.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub tpr: f64,
    pub tnr: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// Ratios whose denominator was zero and were reported as 0, as
    /// `<class>.<metric>`.
    pub undefined: Vec<String>,
}

fn ratio(num: usize, den: usize, name: &str, class: &str, flags: &mut Vec<String>) -> f64 {
    if den == 0 {
        flags.push(format!("{class}.{name}"));
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64, name: &str, class: &str, flags: &mut Vec<String>) -> f64 {
    if p + r == 0.0 {
        flags.push(format!("{class}.{name}"));
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// One-vs-rest rates per class plus pooled (micro) and averaged (macro)
/// F1.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Metrics {
    let k = cm.classes.len();
    let total = cm.total();
    let mut flags = Vec::new();
    let mut per_class = Vec::with_capacity(k);
    let (mut sum_tp, mut sum_fp, mut sum_fn) = (0, 0, 0);
    for (i, class) in cm.classes.iter().enumerate() {
        let tp = cm.counts[i][i];
        let fn_ = cm.counts[i].iter().sum::<usize>() - tp;
        let fp = (0..k).map(|r| cm.counts[r][i]).sum::<usize>() - tp;
        let tn = total - tp - fn_ - fp;
        sum_tp += tp;
        sum_fp += fp;
        sum_fn += fn_;
        let tpr = ratio(tp, tp + fn_, "tpr", class, &mut flags);
        let fnr = ratio(fn_, tp + fn_, "fnr", class, &mut flags);
        let tnr = ratio(tn, tn + fp, "tnr", class, &mut flags);
        let fpr = ratio(fp, tn + fp, "fpr", class, &mut flags);
        let precision = ratio(tp, tp + fp, "precision", class, &mut flags);
        let f1 = harmonic(precision, tpr, "f1", class, &mut flags);
        per_class.push(ClassMetrics {
            class: class.clone(),
            tp,
            fp,
            fn_,
            tn,
            tpr,
            tnr,
            fpr,
            fnr,
            precision,
            recall: tpr,
            f1,
        });
    }
    let micro_precision = ratio(sum_tp, sum_tp + sum_fp, "precision", "micro", &mut flags);
    let micro_recall = ratio(sum_tp, sum_tp + sum_fn, "recall", "micro", &mut flags);
    let micro_f1 = harmonic(micro_precision, micro_recall, "f1", "micro", &mut flags);
    let macro_f1 = if k == 0 {
        0.0
    } else {
        per_class.iter().map(|c| c.f1).sum::<f64>() / k as f64
    };
    let accuracy = ratio(cm.correct(), total, "accuracy", "all", &mut flags);
    Metrics {
        per_class,
        micro_precision,
        micro_recall,
        micro_f1,
        macro_f1,
        accuracy,
        undefined: flags,
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn binary_fixture() {
        let cm = ConfusionMatrix::from_counts(classes(2), vec![vec![9, 1], vec![3, 7]]).unwrap();
        let m = compute_metrics(&cm);
        assert!((m.per_class[0].tpr - 0.9).abs() < 1e-15);
        assert!((m.per_class[0].precision - 0.75).abs() < 1e-15);
        assert!((m.accuracy - 0.8).abs() < 1e-15);
        assert!(m.undefined.is_empty());
    }

    #[test]
    fn harmonic_mean() {
        assert!((f1_score(0.5, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn perfect_classifier() {
        let cm = ConfusionMatrix::from_counts(
            classes(3),
            vec![vec![4, 0, 0], vec![0, 5, 0], vec![0, 0, 6]],
        )
        .unwrap();
        let m = compute_metrics(&cm);
        for c in &m.per_class {
            assert_eq!((c.tpr, c.tnr, c.precision, c.f1), (1.0, 1.0, 1.0, 1.0));
            assert_eq!((c.fpr, c.fnr), (0.0, 0.0));
        }
        assert_eq!(m.micro_f1, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn empty_class_is_flagged() {
        let cm = ConfusionMatrix::from_counts(classes(2), vec![vec![5, 0], vec![0, 0]]).unwrap();
        let m = compute_metrics(&cm);
        assert_eq!(m.per_class[1].tpr, 0.0);
        assert!(m.undefined.iter().any(|f| f == "c1.tpr"));
    }

    #[test]
    fn confusion_csv() {
        let cm = ConfusionMatrix::from_counts(classes(2), vec![vec![1, 2], vec![3, 4]]).unwrap();
        let mut buf = Vec::new();
        cm.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "true\\predicted,c0,c1\nc0,1,2\nc1,3,4\n");
    }
}
