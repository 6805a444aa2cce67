//! File helpers: every output is written to a temp file in the target
//! directory and renamed into place.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use landtopo::config::RunConfig;
use landtopo::features::FeatureTable;
use landtopo::forest::ForestModel;
use landtopo::geo::{load_grid, parse_inventory, ElevationGrid, ParsedInventory};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn write_atomic<F>(path: &Path, fill: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> landtopo::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// `features.csv` -> `features.csv.meta.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn read_table(path: &Path) -> CliResult<FeatureTable> {
    let t = FeatureTable::read_csv(open(path)?)?;
    if t.is_empty() {
        return Err(CliError::Empty(format!("{} has no rows", path.display())));
    }
    Ok(t)
}

pub fn read_model(path: &Path) -> CliResult<ForestModel> {
    Ok(ForestModel::load(open(path)?)?)
}

pub fn read_grid(path: &Path) -> CliResult<ElevationGrid> {
    Ok(load_grid(open(path)?)?)
}

pub fn read_inventory(path: &Path, cfg: &RunConfig) -> CliResult<ParsedInventory> {
    let inv = parse_inventory(open(path)?, &cfg.label_key, &cfg.label_map()?)?;
    for w in &inv.warnings {
        log::warn!("{w}");
    }
    for r in &inv.rejected {
        log::warn!("rejected {}: {}", r.id, r.reason);
    }
    Ok(inv)
}
