use std::collections::{BTreeMap, HashMap};

use landtopo::config::RunConfig;
use landtopo::eval::{
    decompose_complex, encode_labels, balance_indices, kfold_cv, sample_efficiency_sweep, seeded_rng,
    select_features, CvOptions, SelectionTrace,
};
use landtopo::features::FeatureTable;
use landtopo::forest::ForestModel;
use landtopo::geo::{write_inventory, CoordMode, InventoryRecord, GEOMETRIC_NAMES};
use landtopo::pipeline::{featurize_inventory, FailedRecord, FeatureMeta, FeaturizeOptions, Featurized};
use landtopo::synth::{gen_inventory, DemKind, SynthClass, SynthOptions};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::io::{read_grid, read_inventory, read_model, read_table, sidecar, write_atomic, write_json};
use crate::{Command, Common, FeaturizeArgs, ForestArgs};

/// Stream of the training-set down-sampling draw under the master seed.
const BALANCE_STREAM: u64 = 0xBA1A;

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Featurize {
            common,
            feat,
            inventory,
            dem,
            out,
            with_geometry,
            label_level,
        } => {
            let cfg = config(&common, |c| apply_featurize(c, &feat))?;
            let inv = read_inventory(&inventory, &cfg)?;
            let grid = read_grid(&dem)?;
            let mut opts = FeaturizeOptions::from_config(&cfg, inv.coords);
            opts.with_geometry = with_geometry;
            opts.label_level = label_level.into();
            let f = featurize(&inv.records, &grid, &opts, inv.rejected.len())?;
            write_atomic(&out, |w| f.table.write_csv(w))?;
            let rejected: Vec<FailedRecord> = inv
                .rejected
                .iter()
                .map(|r| FailedRecord {
                    id: r.id.clone(),
                    reason: r.reason.clone(),
                })
                .collect();
            write_json(
                &sidecar(&out, ".meta.json"),
                &FeaturizeReport {
                    meta: &f.meta,
                    rejected,
                    config: cfg.to_json(),
                },
            )
        }

        Command::Select {
            common,
            forest,
            features,
            out,
            k,
            threshold,
        } => {
            let cfg = config(&common, |c| {
                apply_forest(c, &forest);
                set(&mut c.selected_k, k);
                set(&mut c.correlation_threshold, threshold);
                Ok(())
            })?;
            let table = training_rows(&read_table(&features)?, &cfg)?;
            let trace = select_features(&table, cfg.correlation_threshold, cfg.selected_k, &cfg.forest_params())?;
            log::info!("selected {}", trace.selected.join(", "));
            write_json(
                &out,
                &SelectionReport {
                    rows: table.len(),
                    trace,
                    config: cfg.to_json(),
                },
            )
        }

        Command::Train {
            common,
            forest,
            features,
            model,
            select,
            no_balance,
            trace,
        } => {
            let cfg = config(&common, |c| {
                apply_forest(c, &forest);
                if let Some(Some(k)) = select {
                    c.selected_k = k;
                }
                if no_balance {
                    c.balance_classes = false;
                }
                Ok(())
            })?;
            let table = read_table(&features)?;
            let (classes, _) = encode_labels(table.require_labels()?);
            if classes.len() < 2 {
                return Err(CliError::Invalid(format!(
                    "training needs at least two classes, found {}",
                    classes.join(", ")
                )));
            }
            let table = training_rows(&table, &cfg)?;
            let sel = match select {
                Some(_) => select_features(&table, cfg.correlation_threshold, cfg.selected_k, &cfg.forest_params())?,
                None => SelectionTrace {
                    dropped_by_correlation: Vec::new(),
                    elimination_order: Vec::new(),
                    selected: table.columns.clone(),
                },
            };
            let fitted = ForestModel::fit_table(&table.select(&sel.selected)?, &cfg.forest_params())?;
            log::info!(
                "trained {} trees on {} rows, {} features; OOB accuracy {:.3}",
                fitted.trees.len(),
                table.len(),
                sel.selected.len(),
                fitted.oob_accuracy.unwrap_or(f64::NAN)
            );
            write_atomic(&model, |w| fitted.save(w))?;
            let trace_path = trace.unwrap_or_else(|| sidecar(&model, ".selection.json"));
            write_json(
                &trace_path,
                &SelectionReport {
                    rows: table.len(),
                    trace: sel,
                    config: cfg.to_json(),
                },
            )
        }

        Command::Evaluate {
            common,
            forest,
            features,
            folds,
            repeats,
            report,
            confusion,
            columns,
            no_balance,
        } => {
            let cfg = config(&common, |c| {
                apply_forest(c, &forest);
                set(&mut c.folds, folds);
                set(&mut c.repeats, repeats);
                if no_balance {
                    c.balance_classes = false;
                }
                Ok(())
            })?;
            let table = with_columns(read_table(&features)?, columns.as_deref())?;
            let opts = CvOptions {
                folds: cfg.folds,
                repeats: cfg.repeats,
                seed: cfg.seed,
                balance: cfg.balance_classes,
            };
            let mut r = kfold_cv(&table, &cfg.forest_params(), &opts)?;
            r.config = cfg.to_json();
            log::info!(
                "micro-F1 {:.4} (sd {:.4}), macro-F1 {:.4} over {} x {}-fold",
                r.micro_f1,
                r.micro_f1_std,
                r.macro_f1,
                opts.repeats,
                opts.folds
            );
            for flag in &r.undefined {
                log::warn!("undefined metric (division by zero): {flag}");
            }
            write_json(&report, &r)?;
            let cm_path = confusion.unwrap_or_else(|| sidecar(&report, ".confusion.csv"));
            write_atomic(&cm_path, |w| r.confusion.write_csv(w))
        }

        Command::Predict {
            common,
            feat,
            model,
            inventory,
            dem,
            out,
        } => {
            let cfg = config(&common, |c| apply_featurize(c, &feat))?;
            let model = read_model(&model)?;
            let inv = read_inventory(&inventory, &cfg)?;
            let grid = read_grid(&dem)?;
            let opts = options_for(&model, &cfg, inv.coords)?;
            let f = featurize(&inv.records, &grid, &opts, inv.rejected.len())?;
            let proba = model.predict_proba(&f.table)?;
            let predicted = model.predict(&f.table)?;
            let scored: HashMap<&str, usize> = f.table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
            let failed: HashMap<&str, &str> =
                f.meta.failed.iter().map(|r| (r.id.as_str(), r.reason.as_str())).collect();
            let labeled: Vec<InventoryRecord> = inv
                .records
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    match scored.get(r.id.as_str()) {
                        Some(&i) => {
                            r.properties.insert("predicted_class".into(), Value::String(predicted[i].clone()));
                            for (c, p) in model.classes.iter().zip(&proba[i]) {
                                r.properties.insert(format!("p_{c}"), serde_json::json!(p));
                            }
                        }
                        None => {
                            r.properties.insert("predicted_class".into(), Value::Null);
                            let reason = failed.get(r.id.as_str()).copied().unwrap_or("not featurized");
                            r.properties.insert("prediction_error".into(), Value::String(reason.into()));
                        }
                    }
                    r
                })
                .collect();
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for p in &predicted {
                *counts.entry(p.as_str()).or_default() += 1;
            }
            log::info!("predicted {counts:?}");
            write_atomic(&out, |w| write_inventory(w, &labeled, &cfg.label_key, inv.coords))
        }

        Command::Decompose {
            common,
            feat,
            model,
            inventory,
            dem,
            group_key,
            out,
            records,
            all,
        } => {
            let cfg = config(&common, |c| apply_featurize(c, &feat))?;
            let model = read_model(&model)?;
            let inv = read_inventory(&inventory, &cfg)?;
            let chosen: Vec<InventoryRecord> = inv
                .records
                .into_iter()
                .filter(|r| all || r.label.as_deref() == Some("complex"))
                .collect();
            if chosen.is_empty() {
                return Err(CliError::Empty(
                    "no records labeled complex; pass --all to score every record".into(),
                ));
            }
            let grid = read_grid(&dem)?;
            let opts = options_for(&model, &cfg, inv.coords)?;
            let f = featurize(&chosen, &grid, &opts, inv.rejected.len())?;
            let groups: Option<Vec<String>> = group_key.as_ref().map(|key| {
                let by_id: HashMap<&str, &InventoryRecord> = chosen.iter().map(|r| (r.id.as_str(), r)).collect();
                f.table
                    .ids
                    .iter()
                    .map(|id| group_name(by_id[id.as_str()].properties.get(key)))
                    .collect()
            });
            let d = decompose_complex(&model, &f.table, groups.as_deref())?;
            for g in &d.groups {
                let medians: Vec<String> = d
                    .classes
                    .iter()
                    .zip(&g.per_class)
                    .map(|(c, q)| format!("{c} {:.3}", q.median))
                    .collect();
                log::info!("group {} (n={}): median {}", g.group, g.n, medians.join(", "));
            }
            write_atomic(&out, |w| d.write_summary_csv(w))?;
            let rec_path = records.unwrap_or_else(|| sidecar(&out, ".records.csv"));
            write_atomic(&rec_path, |w| d.write_records_csv(w))?;
            write_json(
                &sidecar(&out, ".meta.json"),
                &serde_json::json!({ "group_key": group_key, "failed": f.meta.failed, "config": cfg.to_json() }),
            )
        }

        Command::Sweep {
            common,
            forest,
            features,
            sizes,
            repeats,
            columns,
            out,
        } => {
            let cfg = config(&common, |c| {
                apply_forest(c, &forest);
                set(&mut c.repeats, repeats);
                Ok(())
            })?;
            let table = with_columns(read_table(&features)?, columns.as_deref())?;
            let sweep = sample_efficiency_sweep(&table, &sizes, cfg.repeats, &cfg.forest_params(), cfg.seed)?;
            for r in &sweep.rows {
                log::info!("{} per class: accuracy {:.3} (sd {:.3})", r.size, r.accuracy, r.micro_f1_std);
            }
            write_atomic(&out, |w| sweep.write_csv(w))?;
            write_json(
                &sidecar(&out, ".meta.json"),
                &serde_json::json!({ "sweep": sweep, "config": cfg.to_json() }),
            )
        }

        Command::Synth {
            out,
            n,
            seed,
            classes,
            tile_size,
            cell_size,
            dem_kinds,
        } => {
            let classes = classes.iter().map(|c| c.parse()).collect::<landtopo::Result<Vec<SynthClass>>>()?;
            let mut kinds = BTreeMap::new();
            for spec in &dem_kinds {
                let (c, k) = spec
                    .split_once('=')
                    .ok_or_else(|| CliError::Invalid(format!("--dem-kind {spec:?} is not CLASS=KIND")))?;
                kinds.insert(c.parse::<SynthClass>()?, k.parse::<DemKind>()?);
            }
            let opts = SynthOptions {
                n_per_class: n,
                seed,
                classes,
                tile_size,
                cell_size,
                dem_kinds: kinds,
            };
            let inv = gen_inventory(&opts)?;
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            write_atomic(&out.join("inventory.geojson"), |w| {
                write_inventory(w, &inv.records, "failure_type", Some(CoordMode::Projected))
            })?;
            write_atomic(&out.join("dem.asc"), |w| inv.grid.write_ascii(w))?;
            write_json(&out.join("manifest.json"), &inv.manifest)?;
            log::info!(
                "wrote {} records on a {} x {} grid to {}",
                inv.records.len(),
                inv.grid.n_cols,
                inv.grid.n_rows,
                out.display()
            );
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FeaturizeReport<'a> {
    #[serde(flatten)]
    meta: &'a FeatureMeta,
    /// Records dropped while reading the inventory.
    rejected: Vec<FailedRecord>,
    config: Value,
}

#[derive(Serialize)]
struct SelectionReport {
    rows: usize,
    #[serde(flatten)]
    trace: SelectionTrace,
    config: Value,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Config file (or defaults), then `tweak` for command-line flags, then
/// validation of the result.
fn config(common: &Common, tweak: impl FnOnce(&mut RunConfig) -> CliResult<()>) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, common.seed);
    tweak(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_forest(cfg: &mut RunConfig, f: &ForestArgs) {
    set(&mut cfg.forest.n_trees, f.n_trees);
    if f.p_features.is_some() {
        cfg.forest.p_features = f.p_features;
    }
    if f.max_depth.is_some() {
        cfg.forest.max_depth = f.max_depth;
    }
    set(&mut cfg.forest.min_leaf, f.min_leaf);
}

fn apply_featurize(cfg: &mut RunConfig, f: &FeaturizeArgs) -> CliResult<()> {
    set(&mut cfg.n_points, f.n_points);
    set(&mut cfg.curve_bins, f.curve_bins);
    if f.coords.is_some() {
        cfg.coords = f.coords;
    }
    set(&mut cfg.engine, f.engine.clone());
    set(&mut cfg.label_key, f.label_key.clone());
    if let Some(rule) = &f.sigma_rule {
        cfg.sigma_rule = rule.parse()?;
    }
    Ok(())
}

fn featurize(
    records: &[InventoryRecord],
    grid: &landtopo::geo::ElevationGrid,
    opts: &FeaturizeOptions,
    rejected: usize,
) -> CliResult<Featurized> {
    if records.is_empty() {
        return Err(CliError::Empty("the inventory has no usable polygons".into()));
    }
    let f = featurize_inventory(records, grid, opts)?;
    log::info!(
        "featurized {} of {} records ({} failed, {} rejected while reading)",
        f.table.len(),
        records.len(),
        f.meta.failed.len(),
        rejected
    );
    for r in &f.meta.failed {
        log::warn!("  {}: {}", r.id, r.reason);
    }
    if f.table.is_empty() {
        return Err(CliError::Empty("no record could be featurized".into()));
    }
    Ok(f)
}

/// Featurization options producing the model's columns, or a mismatch
/// naming the first column that cannot be produced.
fn options_for(model: &ForestModel, cfg: &RunConfig, declared: Option<CoordMode>) -> CliResult<FeaturizeOptions> {
    let mut opts = FeaturizeOptions::from_config(cfg, declared);
    opts.with_geometry = model.feature_names.iter().any(|n| GEOMETRIC_NAMES.contains(&n.as_str()));
    let available = opts.columns();
    if let Some(missing) = model.feature_names.iter().find(|n| !available.contains(n)) {
        return Err(landtopo::Error::ModelMismatch(format!(
            "model feature {missing:?} is missing from the input features"
        ))
        .into());
    }
    Ok(opts)
}

/// Rows a model is trained on: each class down-sampled to the minority
/// count when balancing is on.
fn training_rows(table: &FeatureTable, cfg: &RunConfig) -> CliResult<FeatureTable> {
    if !cfg.balance_classes {
        return Ok(table.clone());
    }
    let (classes, y) = encode_labels(table.require_labels()?);
    let keep = balance_indices(&y, classes.len(), &mut seeded_rng(cfg.seed, BALANCE_STREAM));
    if keep.len() < table.len() {
        log::info!("balanced {} rows down to {}", table.len(), keep.len());
    }
    Ok(table.subset_rows(&keep))
}

fn with_columns(table: FeatureTable, columns: Option<&[String]>) -> CliResult<FeatureTable> {
    match columns {
        Some(c) => Ok(table.select(c)?),
        None => Ok(table),
    }
}

fn group_name(v: Option<&Value>) -> String {
    match v {
        Some(Value::String(s)) => s.clone(),
        None | Some(Value::Null) => "unknown".into(),
        Some(other) => other.to_string(),
    }
}

