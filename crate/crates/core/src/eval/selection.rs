use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::forest::{ForestModel, ForestParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDrop {
    pub kept: String,
    pub dropped: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub feature: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub dropped_by_correlation: Vec<CorrelationDrop>,
    pub elimination_order: Vec<EliminationStep>,
    pub selected: Vec<String>,
}

/// Sample Pearson correlation; `None` when either column is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Drops one feature of every pair with `|r| >= threshold`, the one later
/// in column order. Pairs are visited by decreasing `|r|` and skipped once
/// either side is gone. Never leaves fewer than `min_keep` features.
pub fn correlation_prune(
    table: &FeatureTable,
    threshold: f64,
    min_keep: usize,
) -> Result<(Vec<String>, Vec<CorrelationDrop>)> {
    let m = table.columns.len();
    if m < 2 {
        return Err(Error::InvalidInput("correlation pruning needs at least two features".into()));
    }
    if table.len() < 3 {
        return Err(Error::InvalidInput("correlation pruning needs at least three rows".into()));
    }
    let cols: Vec<Vec<f64>> = (0..m).map(|j| table.column(j)).collect();
    for (j, c) in cols.iter().enumerate() {
        if c.iter().all(|&v| v == c[0]) {
            log::warn!("feature {} is constant; its correlation is taken as 0", table.columns[j]);
        }
    }
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let r = pearson(&cols[i], &cols[j]).unwrap_or(0.0);
            if r.abs() >= threshold {
                pairs.push((i, j, r));
            }
        }
    }
    pairs.sort_by(|a, b| b.2.abs().total_cmp(&a.2.abs()).then((a.0, a.1).cmp(&(b.0, b.1))));
    let mut dropped = vec![false; m];
    let mut remaining = m;
    let mut drops = Vec::new();
    for (i, j, r) in pairs {
        if dropped[i] || dropped[j] {
            continue;
        }
        if remaining <= min_keep {
            log::warn!(
                "keeping {} despite |r| = {:.3} with {}: only {min_keep} features would remain",
                table.columns[j],
                r.abs(),
                table.columns[i]
            );
            continue;
        }
        dropped[j] = true;
        remaining -= 1;
        drops.push(CorrelationDrop {
            kept: table.columns[i].clone(),
            dropped: table.columns[j].clone(),
            r,
        });
    }
    let kept = (0..m).filter(|&j| !dropped[j]).map(|j| table.columns[j].clone()).collect();
    Ok((kept, drops))
}

/// Recursive elimination: refit and drop the least important feature
/// (the later one on ties) until `k` remain.
pub fn rfe_to_k(table: &FeatureTable, k: usize, params: &ForestParams) -> Result<SelectionTrace> {
    let labels = table.require_labels()?;
    if k == 0 {
        return Err(Error::Config("target feature count must be at least 1".into()));
    }
    if table.columns.len() < k {
        return Err(Error::InvalidInput(format!(
            "cannot select {k} features from {}",
            table.columns.len()
        )));
    }
    let mut current = table.columns.clone();
    let mut order = Vec::new();
    while current.len() > k {
        let sub = table.select(&current)?;
        let p = ForestParams {
            p_features: params.p_features.map(|p| p.min(current.len())),
            ..params.clone()
        };
        let model = ForestModel::fit(&sub.rows, labels, &sub.columns, &p)?;
        let mut worst = 0;
        for (j, &v) in model.importances.iter().enumerate() {
            if v <= model.importances[worst] {
                worst = j;
            }
        }
        log::debug!("eliminating {} (importance {:.4})", current[worst], model.importances[worst]);
        order.push(EliminationStep {
            feature: current.remove(worst),
            importance: model.importances[worst],
        });
    }
    Ok(SelectionTrace {
        dropped_by_correlation: Vec::new(),
        elimination_order: order,
        selected: current,
    })
}

/// Correlation pruning followed by elimination down to `k`.
pub fn select_features(
    table: &FeatureTable,
    threshold: f64,
    k: usize,
    params: &ForestParams,
) -> Result<SelectionTrace> {
    if table.columns.len() < k {
        return Err(Error::InvalidInput(format!(
            "cannot select {k} features from {}",
            table.columns.len()
        )));
    }
    let (kept, drops) = if table.columns.len() >= 2 {
        correlation_prune(table, threshold, k)?
    } else {
        (table.columns.clone(), Vec::new())
    };
    let mut trace = rfe_to_k(&table.select(&kept)?, k, params)?;
    trace.dropped_by_correlation = drops;
    Ok(trace)
}
