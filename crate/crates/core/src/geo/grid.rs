use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

/// Raster of elevations in meters. `values` is row-major with the top
/// (northernmost) row first, exactly as stored in an ESRI ASCII grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationGrid {
    pub n_cols: usize,
    pub n_rows: usize,
    /// Lower-left corner of the lower-left cell.
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub nodata_value: f64,
    pub values: Vec<f64>,
}

impl ElevationGrid {
    pub fn new(
        n_cols: usize,
        n_rows: usize,
        origin_x: f64,
        origin_y: f64,
        cell_size: f64,
        nodata_value: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if n_cols < 2 || n_rows < 2 {
            return Err(Error::Grid(format!(
                "grid must be at least 2x2, got {n_cols}x{n_rows}"
            )));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::Grid(format!("cell size must be positive, got {cell_size}")));
        }
        if values.len() != n_cols * n_rows {
            return Err(Error::Grid(format!(
                "value count mismatch: header declares {}x{} = {} values, found {}",
                n_cols,
                n_rows,
                n_cols * n_rows,
                values.len()
            )));
        }
        Ok(ElevationGrid {
            n_cols,
            n_rows,
            origin_x,
            origin_y,
            cell_size,
            nodata_value,
            values,
        })
    }

    /// Value at column `col`, row `row` counted from the top.
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata_value || v.is_nan()
    }

    pub fn x_max(&self) -> f64 {
        self.origin_x + self.n_cols as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.origin_y + self.n_rows as f64 * self.cell_size
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.origin_x && x <= self.x_max() && y >= self.origin_y && y <= self.y_max()
    }

    /// Centre of cell (`col`, `row` from top) in grid units.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.cell_size,
            self.origin_y + ((self.n_rows - 1 - row) as f64 + 0.5) * self.cell_size,
        )
    }

    /// Bilinear interpolation between the four surrounding cell centres.
    /// Points in the outer half-cell ring clamp to the border cells. When
    /// any of the four is nodata, the nearest valid one of the four is used.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() || !y.is_finite() || !self.contains(x, y) {
            return Err(Error::OutsideGrid { x, y });
        }
        let fx = ((x - self.origin_x) / self.cell_size - 0.5).clamp(0.0, (self.n_cols - 1) as f64);
        let fy = ((y - self.origin_y) / self.cell_size - 0.5).clamp(0.0, (self.n_rows - 1) as f64);
        let c0 = (fx.floor() as usize).min(self.n_cols - 2);
        let b0 = (fy.floor() as usize).min(self.n_rows - 2);
        let tx = fx - c0 as f64;
        let ty = fy - b0 as f64;
        // rows counted from the bottom -> top-based index
        let row_of = |b: usize| self.n_rows - 1 - b;
        let corners = [
            (self.at(c0, row_of(b0)), (1.0 - tx) * (1.0 - ty), tx.hypot(ty)),
            (self.at(c0 + 1, row_of(b0)), tx * (1.0 - ty), (1.0 - tx).hypot(ty)),
            (self.at(c0, row_of(b0 + 1)), (1.0 - tx) * ty, tx.hypot(1.0 - ty)),
            (self.at(c0 + 1, row_of(b0 + 1)), tx * ty, (1.0 - tx).hypot(1.0 - ty)),
        ];
        if corners.iter().all(|(v, _, _)| !self.is_nodata(*v)) {
            return Ok(corners.iter().map(|(v, w, _)| v * w).sum());
        }
        corners
            .iter()
            .filter(|(v, _, _)| !self.is_nodata(*v))
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .map(|(v, _, _)| *v)
            .ok_or(Error::NoData { x, y })
    }

    /// Writes the grid as an ESRI ASCII raster.
    pub fn write_ascii<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ncols {}", self.n_cols)?;
        writeln!(w, "nrows {}", self.n_rows)?;
        writeln!(w, "xllcorner {}", self.origin_x)?;
        writeln!(w, "yllcorner {}", self.origin_y)?;
        writeln!(w, "cellsize {}", self.cell_size)?;
        writeln!(w, "NODATA_value {}", self.nodata_value)?;
        for row in self.values.chunks(self.n_cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

const REQUIRED_KEYS: [&str; 5] = ["ncols", "nrows", "xll", "yll", "cellsize"];

/// Parses an ESRI ASCII grid. `xllcenter`/`yllcenter` headers are accepted
/// and converted to corner origin. `NODATA_value` defaults to -9999.
pub fn load_grid<R: Read>(source: R) -> Result<ElevationGrid> {
    let reader = std::io::BufReader::new(source);
    let mut header: Vec<(String, String)> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut in_body = false;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !in_body {
            let mut parts = trimmed.split_whitespace();
            let key = parts.next().unwrap_or_default();
            if key.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let value = parts
                    .next()
                    .ok_or_else(|| Error::Grid(format!("header key {key} has no value")))?;
                header.push((key.to_ascii_lowercase(), value.to_string()));
                continue;
            }
            in_body = true;
        }
        for tok in trimmed.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Grid(format!("non-numeric token {tok:?}")))?;
            values.push(v);
        }
    }

    let get = |key: &str| -> Option<&str> {
        header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    };
    let num = |key: &str| -> Result<Option<f64>> {
        get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Grid(format!("header {key} is not numeric: {v:?}")))
            })
            .transpose()
    };
    for key in REQUIRED_KEYS {
        let present = match key {
            "xll" => get("xllcorner").or(get("xllcenter")).is_some(),
            "yll" => get("yllcorner").or(get("yllcenter")).is_some(),
            k => get(k).is_some(),
        };
        if !present {
            return Err(Error::Grid(format!("missing header key {key}")));
        }
    }
    let count = |key: &str| -> Result<usize> {
        get(key)
            .unwrap_or_default()
            .parse::<usize>()
            .map_err(|_| Error::Grid(format!("header {key} is not a count")))
    };
    let n_cols = count("ncols")?;
    let n_rows = count("nrows")?;
    let cell = num("cellsize")?.unwrap_or_default();
    let half = cell / 2.0;
    let origin_x = match num("xllcorner")? {
        Some(v) => v,
        None => num("xllcenter")?.unwrap_or_default() - half,
    };
    let origin_y = match num("yllcorner")? {
        Some(v) => v,
        None => num("yllcenter")?.unwrap_or_default() - half,
    };
    let nodata = num("nodata_value")?.unwrap_or(-9999.0);
    ElevationGrid::new(n_cols, n_rows, origin_x, origin_y, cell, nodata, values)
}
