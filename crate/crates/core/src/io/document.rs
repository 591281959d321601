//! Versioned JSON pattern documents.
//!
//! Fields are written in a fixed order, grid cells are run-length encoded as
//! `[state, count]` pairs in row-major order, and floats use the shortest
//! representation that parses back to the identical `f64`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::automata::{evolve, EvolutionConfig, GridMeta, PatternGrid, RuleSpec};
use crate::draft::{default_palette, Drawdown, Rgb};
use crate::error::{Error, Result};
use crate::metrics::RuleMetrics;
use crate::raster::RasterConfig;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleRecord {
    pub id: String,
    pub k: u8,
    pub r: usize,
    pub w: usize,
    /// Full table, present for non-elementary rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<u8>>,
}

impl RuleRecord {
    pub fn from_rule(rule: &RuleSpec) -> Self {
        Self {
            id: rule.id().to_string(),
            k: rule.k(),
            r: rule.radius(),
            w: rule.window(),
            table: (!rule.is_elementary()).then(|| rule.table().to_vec()),
        }
    }

    pub fn to_rule(&self) -> Result<RuleSpec> {
        let rule = match &self.table {
            Some(table) => RuleSpec::from_table(self.k, self.r, self.w, table.clone())?,
            None => RuleSpec::from_id(self.k, self.r, self.w, &self.id)?,
        };
        if rule.id() != self.id {
            return Err(Error::Schema {
                path: "rule.id".into(),
                message: format!("id `{}` does not match the table (expected `{}`)", self.id, rule.id()),
            });
        }
        Ok(rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRecord {
    pub width: usize,
    pub height: usize,
    pub k: u8,
    pub init_rows: usize,
    pub cells: Vec<[u64; 2]>,
}

impl GridRecord {
    pub fn from_grid(grid: &PatternGrid) -> Self {
        let mut cells: Vec<[u64; 2]> = Vec::new();
        for &s in grid.cells() {
            match cells.last_mut() {
                Some([state, count]) if *state == s as u64 => *count += 1,
                _ => cells.push([s as u64, 1]),
            }
        }
        Self { width: grid.width(), height: grid.height(), k: grid.k(), init_rows: grid.meta().init_rows, cells }
    }

    pub fn decode_cells(&self) -> Result<Vec<u8>> {
        let expected = self.width.checked_mul(self.height).ok_or_else(|| schema("grid", "dimensions overflow"))?;
        let mut cells = Vec::with_capacity(expected.min(1 << 26));
        for (i, &[state, count]) in self.cells.iter().enumerate() {
            if state >= self.k as u64 {
                return Err(schema(&format!("grid.cells[{i}]"), &format!("state {state} >= k={}", self.k)));
            }
            if count == 0 || cells.len() as u64 + count > expected as u64 {
                return Err(schema(&format!("grid.cells[{i}]"), "run overflows the grid"));
            }
            cells.resize(cells.len() + count as usize, state as u8);
        }
        if cells.len() != expected {
            return Err(schema("grid.cells", &format!("runs cover {} cells, grid has {expected}", cells.len())));
        }
        Ok(cells)
    }
}

/// Yarn colors by palette index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Colorway {
    pub palette: Vec<Rgb>,
    pub warp_colors: Vec<usize>,
    pub weft_colors: Vec<usize>,
}

impl Default for Colorway {
    fn default() -> Self {
        Self { palette: default_palette(), warp_colors: vec![0], weft_colors: vec![1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDocument {
    pub format_version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<EvolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raster: Option<RasterConfig>,
    pub grid: GridRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<RuleMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colorway: Option<Colorway>,
}

fn schema(path: &str, message: &str) -> Error {
    Error::Schema { path: path.to_string(), message: message.to_string() }
}

impl PatternDocument {
    /// Document for an evolved grid.
    pub fn from_evolution(rule: &RuleSpec, config: &EvolutionConfig, grid: &PatternGrid) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            rule: Some(RuleRecord::from_rule(rule)),
            config: Some(config.clone()),
            raster: None,
            grid: GridRecord::from_grid(grid),
            metrics: None,
            colorway: None,
        }
    }

    /// Document for a grid with no generating rule.
    pub fn from_grid(grid: &PatternGrid) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            rule: None,
            config: None,
            raster: None,
            grid: GridRecord::from_grid(grid),
            metrics: None,
            colorway: None,
        }
    }

    pub fn rule_spec(&self) -> Result<Option<RuleSpec>> {
        self.rule.as_ref().map(RuleRecord::to_rule).transpose()
    }

    /// Rebuilds the grid with provenance taken from rule and config.
    pub fn pattern_grid(&self) -> Result<PatternGrid> {
        let cells = self.grid.decode_cells()?;
        let meta = GridMeta {
            rule_id: self.rule.as_ref().map(|r| r.id.clone()),
            seed: self.config.as_ref().and_then(|c| c.init.seed()),
            boundary: self.config.as_ref().map(|c| c.boundary),
            init_rows: self.grid.init_rows,
        };
        Ok(PatternGrid::new(self.grid.width, self.grid.k, cells)?.with_meta(meta))
    }

    /// Structural checks beyond the JSON schema.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion { found: self.format_version, expected: FORMAT_VERSION });
        }
        let grid = self.pattern_grid()?;
        if grid.meta().init_rows > grid.height() {
            return Err(schema("grid.init_rows", "exceeds the grid height"));
        }
        let rule = self.rule_spec()?;
        if let Some(rule) = &rule {
            if rule.k() != self.grid.k {
                return Err(schema("grid.k", &format!("grid has k={}, rule has k={}", self.grid.k, rule.k())));
            }
        }
        if let Some(config) = &self.config {
            if config.width != self.grid.width {
                return Err(schema(
                    "grid.width",
                    &format!("grid width {} differs from config width {}", self.grid.width, config.width),
                ));
            }
            if self.grid.init_rows + config.steps != self.grid.height {
                return Err(schema(
                    "grid.height",
                    &format!(
                        "height {} is not init rows {} plus {} steps",
                        self.grid.height, self.grid.init_rows, config.steps
                    ),
                ));
            }
            if let Some(rule) = &rule {
                let init = config.initial_rows(rule)?;
                if init.len() != self.grid.init_rows {
                    return Err(schema("grid.init_rows", "does not match the configured initial condition"));
                }
            }
        }
        if let Some(colorway) = &self.colorway {
            if grid.k() == 2 {
                self.drawdown_with(grid, colorway)?;
            }
        }
        Ok(())
    }

    fn drawdown_with(&self, grid: PatternGrid, colorway: &Colorway) -> Result<Drawdown> {
        Drawdown::new(grid, colorway.warp_colors.clone(), colorway.weft_colors.clone(), colorway.palette.clone())
    }

    /// The document's grid as cloth, colored by its colorway or the default
    /// one. Multi-state grids are color-separated first.
    pub fn drawdown(&self) -> Result<Drawdown> {
        let grid = self.pattern_grid()?;
        if grid.k() == 2 {
            let colorway = self.colorway.clone().unwrap_or_default();
            return self.drawdown_with(grid, &colorway);
        }
        let (structure, weft_colors) = crate::draft::color_separate(&grid, None)?;
        match &self.colorway {
            Some(c) => Drawdown::new(structure, c.warp_colors.clone(), weft_colors, c.palette.clone()),
            None => {
                let palette = spread_palette(grid.k());
                Drawdown::new(structure, vec![grid.k() as usize - 1], weft_colors, palette)
            }
        }
    }

    /// Re-runs the evolution recorded in the document and checks it against
    /// the stored cells.
    pub fn verify_evolution(&self) -> Result<bool> {
        match (self.rule_spec()?, &self.config) {
            (Some(rule), Some(config)) => Ok(evolve(&rule, config)?.cells() == self.grid.decode_cells()?),
            _ => Ok(true),
        }
    }
}

/// Gray ramp from light to dark, one entry per state.
fn spread_palette(k: u8) -> Vec<Rgb> {
    (0..k)
        .map(|s| {
            let v = 235 - (s as u32 * 200 / (k as u32 - 1)) as u8;
            Rgb::new(v, v, v)
        })
        .collect()
}

/// Canonical JSON bytes, newline-terminated.
pub fn encode_pattern_json(doc: &PatternDocument) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(doc).map_err(|e| schema("", &e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn decode_pattern_json(bytes: &[u8]) -> Result<PatternDocument> {
    #[derive(Deserialize)]
    struct VersionProbe {
        format_version: Option<serde_json::Value>,
    }
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| schema("", &e.to_string()))?;
    match probe.format_version {
        None => return Err(schema("format_version", "missing field")),
        Some(v) => match v.as_u64() {
            Some(FORMAT_VERSION) => {}
            Some(found) => return Err(Error::UnsupportedVersion { found, expected: FORMAT_VERSION }),
            None => return Err(schema("format_version", "must be a non-negative integer")),
        },
    }
    let doc: PatternDocument = decode_json(bytes)?;
    doc.validate()?;
    Ok(doc)
}

/// Deserializes JSON, reporting failures with the dotted path of the
/// offending field.
pub fn decode_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "" } else { &path }, &e.into_inner().to_string())
    })?;
    de.end().map_err(|e| schema("", &e.to_string()))?;
    Ok(value)
}
