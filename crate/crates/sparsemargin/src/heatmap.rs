//! Electrode-grid heat maps of classifier weights.
//!
//! Channels live on a physical 10x10 electrode array; mapping the fitted
//! weights back onto that grid shows where the responsible units sit. Cells
//! without a channel (a 96-channel array leaves 4 corners of the layout
//! unused) carry no value and export as empty CSV fields or black PGM
//! pixels.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const GRID_SIZE: usize = 10;

/// A 10x10 weight grid; `None` marks cells without a mapped channel.
pub type WeightGrid = [[Option<f64>; GRID_SIZE]; GRID_SIZE];

/// Physical placement of channels on the array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectrodeMap {
    grid: [[Option<usize>; GRID_SIZE]; GRID_SIZE],
}

impl ElectrodeMap {
    /// Validates that no channel index appears twice.
    pub fn new(grid: [[Option<usize>; GRID_SIZE]; GRID_SIZE]) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for row in &grid {
            for &cell in row {
                if let Some(ch) = cell {
                    if !seen.insert(ch) {
                        return Err(Error::ElectrodeMap(format!(
                            "channel {ch} appears twice in the map"
                        )));
                    }
                }
            }
        }
        Ok(ElectrodeMap { grid })
    }

    /// Row-major placement of channels 0..=95 with the final four cells
    /// (9,6)..(9,9) left empty. Stand-in layout for a 96-channel array.
    pub fn default_96() -> Self {
        let mut grid = [[None; GRID_SIZE]; GRID_SIZE];
        for (idx, cell) in grid.iter_mut().flatten().enumerate() {
            if idx < 96 {
                *cell = Some(idx);
            }
        }
        ElectrodeMap { grid }
    }

    pub fn grid(&self) -> &[[Option<usize>; GRID_SIZE]; GRID_SIZE] {
        &self.grid
    }

    pub fn mapped_channels(&self) -> usize {
        self.grid.iter().flatten().filter(|c| c.is_some()).count()
    }

    /// Load a custom layout from a 10x10 CSV of channel indices; blank
    /// fields mark empty cells.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut grid = [[None; GRID_SIZE]; GRID_SIZE];
        let rows: Vec<&str> = text.lines().collect();
        if rows.len() != GRID_SIZE {
            return Err(Error::ElectrodeMap(format!(
                "map file has {} rows, expected {GRID_SIZE}",
                rows.len()
            )));
        }
        for (r, line) in rows.iter().enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != GRID_SIZE {
                return Err(Error::ElectrodeMap(format!(
                    "map row {r} has {} fields, expected {GRID_SIZE}",
                    fields.len()
                )));
            }
            for (c, field) in fields.iter().enumerate() {
                let field = field.trim();
                if field.is_empty() {
                    continue;
                }
                let ch: usize = field.parse().map_err(|_| {
                    Error::ElectrodeMap(format!("map cell ({r},{c}) is not a channel index: `{field}`"))
                })?;
                grid[r][c] = Some(ch);
            }
        }
        ElectrodeMap::new(grid)
    }
}

impl Default for ElectrodeMap {
    fn default() -> Self {
        ElectrodeMap::default_96()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTransform {
    Raw,
    Abs,
    /// `log10(|w| + 1e-16)`, for weights spanning orders of magnitude.
    LogAbs,
}

impl WeightTransform {
    fn apply(self, w: f64) -> f64 {
        match self {
            WeightTransform::Raw => w,
            WeightTransform::Abs => w.abs(),
            WeightTransform::LogAbs => (w.abs() + 1e-16).log10(),
        }
    }
}

/// Place transformed weights onto the electrode grid.
pub fn map_weights(w: &[f64], map: &ElectrodeMap, transform: WeightTransform) -> Result<WeightGrid> {
    let mut out: WeightGrid = [[None; GRID_SIZE]; GRID_SIZE];
    for (r, (out_row, map_row)) in out.iter_mut().zip(map.grid.iter()).enumerate() {
        for (c, (out_cell, map_cell)) in out_row.iter_mut().zip(map_row.iter()).enumerate() {
            if let Some(ch) = *map_cell {
                let value = w.get(ch).ok_or_else(|| {
                    Error::ElectrodeMap(format!(
                        "map cell ({r},{c}) references channel {ch} but w has {} entries",
                        w.len()
                    ))
                })?;
                *out_cell = Some(transform.apply(*value));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    Csv,
    Pgm,
}

/// Export a grid as CSV (empty fields for unmapped cells) or binary PGM
/// (8-bit, min-max scaled over mapped cells, unmapped cells black).
pub fn export_grid(grid: &WeightGrid, format: GridFormat, path: &Path) -> Result<()> {
    match format {
        GridFormat::Csv => write_grid_csv(grid, path),
        GridFormat::Pgm => write_grid_pgm(grid, path),
    }
}

fn write_grid_csv(grid: &WeightGrid, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in grid {
        let line: Vec<String> = row
            .iter()
            .map(|cell| cell.map_or(String::new(), |v| format!("{v}")))
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_grid_pgm(grid: &WeightGrid, path: &Path) -> Result<()> {
    let mapped: Vec<f64> = grid.iter().flatten().filter_map(|c| *c).collect();
    let (min, max) = mapped.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let span = max - min;
    let mut file = std::fs::File::create(path)?;
    write!(file, "P5\n{GRID_SIZE} {GRID_SIZE}\n255\n")?;
    let mut pixels = [0u8; GRID_SIZE * GRID_SIZE];
    for (idx, cell) in grid.iter().flatten().enumerate() {
        pixels[idx] = match cell {
            // All-equal grids map to full brightness rather than 0/0.
            Some(_) if span == 0.0 => 255,
            Some(v) => ((v - min) / span * 255.0).round() as u8,
            None => 0,
        };
    }
    file.write_all(&pixels)?;
    Ok(())
}

/// Re-read a CSV grid written by [`export_grid`].
pub fn parse_grid_csv(path: &Path) -> Result<WeightGrid> {
    let text = std::fs::read_to_string(path)?;
    let mut grid: WeightGrid = [[None; GRID_SIZE]; GRID_SIZE];
    let rows: Vec<&str> = text.lines().collect();
    if rows.len() != GRID_SIZE {
        return Err(Error::ElectrodeMap(format!(
            "grid file has {} rows, expected {GRID_SIZE}",
            rows.len()
        )));
    }
    for (r, line) in rows.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != GRID_SIZE {
            return Err(Error::ElectrodeMap(format!(
                "grid row {r} has {} fields, expected {GRID_SIZE}",
                fields.len()
            )));
        }
        for (c, field) in fields.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            grid[r][c] = Some(field.parse().map_err(|_| {
                Error::ElectrodeMap(format!("grid cell ({r},{c}) is not numeric: `{field}`"))
            })?);
        }
    }
    Ok(grid)
}
