use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{encode_labels, mean_std, seeded_rng, train_and_predict};
use super::metrics::{compute_metrics, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::forest::ForestParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Training rows per class.
    pub size: usize,
    pub repeats: usize,
    pub micro_f1: f64,
    pub micro_f1_std: f64,
    pub accuracy: f64,
    /// Mean held-out recall per class, in `classes` order.
    pub recall: Vec<f64>,
    pub mean_test_rows: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub classes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> =
            ["size", "repeats", "micro_f1", "micro_f1_std", "accuracy", "mean_test_rows"]
                .map(String::from)
                .to_vec();
        header.extend(self.classes.iter().map(|c| format!("recall_{c}")));
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.size.to_string(),
                r.repeats.to_string(),
                r.micro_f1.to_string(),
                r.micro_f1_std.to_string(),
                r.accuracy.to_string(),
                r.mean_test_rows.to_string(),
            ];
            rec.extend(r.recall.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// For each size `s`, trains on `s` random rows per class and scores the
/// held-out rest, averaged over `repeats` draws.
pub fn sample_efficiency_sweep(
    table: &FeatureTable,
    sizes: &[usize],
    repeats: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<SweepTable> {
    let (classes, y) = encode_labels(table.require_labels()?);
    if repeats == 0 {
        return Err(Error::Config("sweep needs at least 1 repeat".into()));
    }
    let mut by_class = vec![Vec::new(); classes.len()];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    for &s in sizes {
        if s == 0 {
            return Err(Error::InvalidInput("sweep sizes must be positive".into()));
        }
        for (c, rows) in classes.iter().zip(&by_class) {
            if s > rows.len() {
                return Err(Error::InvalidInput(format!(
                    "size {s} exceeds the {} available {c} rows",
                    rows.len()
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(sizes.len());
    for (si, &s) in sizes.iter().enumerate() {
        let cells: Vec<ConfusionMatrix> = (0..repeats)
            .into_par_iter()
            .map(|r| {
                let stream = (si as u64) << 32 | r as u64;
                let mut rng = seeded_rng(seed, stream);
                let (mut train, mut test) = (Vec::new(), Vec::new());
                for rows in &by_class {
                    let mut rows = rows.clone();
                    rows.shuffle(&mut rng);
                    train.extend_from_slice(&rows[..s]);
                    test.extend_from_slice(&rows[s..]);
                }
                if test.is_empty() {
                    return Err(Error::InvalidInput(format!("size {s} leaves no held-out rows")));
                }
                let p = ForestParams {
                    seed: params.seed ^ stream,
                    ..params.clone()
                };
                let pred = train_and_predict(table, &y, &classes, &train, &test, &p, None)?;
                let mut cm = ConfusionMatrix::new(classes.clone());
                for (&i, &p) in test.iter().zip(&pred) {
                    cm.add(y[i], p);
                }
                Ok(cm)
            })
            .collect::<Result<_>>()?;
        let metrics: Vec<_> = cells.iter().map(compute_metrics).collect();
        let (micro_f1, micro_f1_std) = mean_std(&metrics.iter().map(|m| m.micro_f1).collect::<Vec<_>>());
        let accuracy = mean_std(&metrics.iter().map(|m| m.accuracy).collect::<Vec<_>>()).0;
        let recall = (0..classes.len())
            .map(|c| mean_std(&metrics.iter().map(|m| m.per_class[c].recall).collect::<Vec<_>>()).0)
            .collect();
        let mean_test_rows = cells.iter().map(|c| c.total() as f64).sum::<f64>() / repeats as f64;
        out.push(SweepRow {
            size: s,
            repeats,
            micro_f1,
            micro_f1_std,
            accuracy,
            recall,
            mean_test_rows,
        });
    }
    Ok(SweepTable { classes, rows: out })
}
