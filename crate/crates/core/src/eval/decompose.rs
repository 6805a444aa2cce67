use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::forest::ForestModel;

/// Classes a decomposition model must be trained on.
pub const SIMPLE_CLASSES: [&str; 3] = ["slide", "flow", "fall"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordProbabilities {
    pub id: String,
    pub group: String,
    /// In the model's class order.
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    /// Linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Quartiles {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            if v.is_empty() {
                return 0.0;
            }
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Quartiles {
            min: q(0.0),
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: q(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub n: usize,
    /// One entry per model class.
    pub per_class: Vec<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub classes: Vec<String>,
    pub records: Vec<RecordProbabilities>,
    pub groups: Vec<GroupSummary>,
}

impl Decomposition {
    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    /// `group,class,n,min,q1,median,q3,max`, one row per group and class.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["group", "class", "n", "min", "q1", "median", "q3", "max"])?;
        for g in &self.groups {
            for (c, q) in self.classes.iter().zip(&g.per_class) {
                out.write_record([
                    g.group.clone(),
                    c.clone(),
                    g.n.to_string(),
                    q.min.to_string(),
                    q.q1.to_string(),
                    q.median.to_string(),
                    q.q3.to_string(),
                    q.max.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// `id,group,p_<class>...`, one row per record.
    pub fn write_records_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string(), "group".to_string()];
        header.extend(self.classes.iter().map(|c| format!("p_{c}")));
        out.write_record(&header)?;
        for r in &self.records {
            let mut rec = vec![r.id.clone(), r.group.clone()];
            rec.extend(r.probabilities.iter().map(|p| p.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Scores records with a slide/flow/fall model and summarizes the class
/// probabilities per group. Without `groups` every record is in group
/// `all`.
pub fn decompose_complex(
    model: &ForestModel,
    table: &FeatureTable,
    groups: Option<&[String]>,
) -> Result<Decomposition> {
    let mut got: Vec<&str> = model.classes.iter().map(String::as_str).collect();
    got.sort_unstable();
    let mut want = SIMPLE_CLASSES.to_vec();
    want.sort_unstable();
    if got != want {
        return Err(Error::ModelMismatch(format!(
            "decomposition needs a model over {{slide, flow, fall}}, got {{{}}}",
            model.classes.join(", ")
        )));
    }
    if let Some(g) = groups {
        if g.len() != table.len() {
            return Err(Error::InvalidInput("group count differs from record count".into()));
        }
    }
    let proba = model.predict_proba(table)?;
    let records: Vec<RecordProbabilities> = proba
        .into_iter()
        .enumerate()
        .map(|(i, p)| RecordProbabilities {
            id: table.ids[i].clone(),
            group: groups.map_or_else(|| "all".to_string(), |g| g[i].clone()),
            probabilities: p,
        })
        .collect();
    let mut grouped: BTreeMap<&str, Vec<&RecordProbabilities>> = BTreeMap::new();
    for r in &records {
        grouped.entry(r.group.as_str()).or_default().push(r);
    }
    let groups = grouped
        .into_iter()
        .map(|(g, rs)| GroupSummary {
            group: g.to_string(),
            n: rs.len(),
            per_class: (0..model.classes.len())
                .map(|c| Quartiles::of(&rs.iter().map(|r| r.probabilities[c]).collect::<Vec<_>>()))
                .collect(),
        })
        .collect();
    Ok(Decomposition {
        classes: model.classes.clone(),
        records,
        groups,
    })
}
