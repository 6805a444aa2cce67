use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Named descriptor values of one landslide.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub id: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(id: impl Into<String>, names: Vec<String>, values: Vec<f64>) -> Self {
        debug_assert_eq!(names.len(), values.len());
        FeatureVector {
            id: id.into(),
            names,
            values,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn extend<'a>(&mut self, names: impl IntoIterator<Item = &'a str>, values: &[f64]) {
        self.names.extend(names.into_iter().map(str::to_string));
        self.values.extend_from_slice(values);
    }
}

/// Rows of descriptor values with a shared column schema and optional
/// class labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl FeatureTable {
    /// Builds a table from vectors that must all share the same names.
    pub fn from_vectors(vectors: &[FeatureVector], labels: Option<Vec<String>>) -> Result<Self> {
        let columns = vectors.first().map(|v| v.names.clone()).unwrap_or_default();
        if let Some(bad) = vectors.iter().find(|v| v.names != columns) {
            return Err(Error::InvalidInput(format!(
                "record {} has a different descriptor schema",
                bad.id
            )));
        }
        if let Some(l) = &labels {
            if l.len() != vectors.len() {
                return Err(Error::InvalidInput("label count differs from row count".into()));
            }
        }
        Ok(FeatureTable {
            columns,
            ids: vectors.iter().map(|v| v.id.clone()).collect(),
            rows: vectors.iter().map(|v| v.values.clone()).collect(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Labels, or an error naming the operation that needed them.
    pub fn require_labels(&self) -> Result<&[String]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("feature table has no label column".into()))
    }

    /// Projection onto `names`, in that order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureTable> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref()).ok_or_else(|| {
                    Error::ModelMismatch(format!("feature {:?} is not in the table", n.as_ref()))
                })
            })
            .collect::<Result<_>>()?;
        Ok(FeatureTable {
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            ids: self.ids.clone(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
        })
    }

    /// Rows at `indices`, in that order.
    pub fn subset_rows(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            columns: self.columns.clone(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
        }
    }

    /// CSV with header `id,<columns...>[,label]`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string()];
        header.extend(self.columns.iter().cloned());
        if self.labels.is_some() {
            header.push("label".into());
        }
        out.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec = Vec::with_capacity(header.len());
            rec.push(self.ids[i].clone());
            rec.extend(row.iter().map(|v| v.to_string()));
            if let Some(l) = &self.labels {
                rec.push(l[i].clone());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<FeatureTable> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("id") {
            return Err(Error::InvalidInput("feature CSV must start with an id column".into()));
        }
        let has_label = header.last().map(String::as_str) == Some("label");
        let end = if has_label { header.len() - 1 } else { header.len() };
        let columns: Vec<String> = header[1..end].to_vec();
        let mut table = FeatureTable {
            columns,
            labels: has_label.then(Vec::new),
            ..Default::default()
        };
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            table.ids.push(rec[0].to_string());
            let row = (1..end)
                .map(|j| {
                    rec[j].trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "row {}: column {} has non-finite value {:?}",
                            line + 1,
                            header[j],
                            &rec[j]
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            table.rows.push(row);
            if let Some(l) = table.labels.as_mut() {
                l.push(rec[end].to_string());
            }
        }
        Ok(table)
    }
}
