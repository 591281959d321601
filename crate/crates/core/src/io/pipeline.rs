//! Whole-document workflows shared by every front end.

use crate::automata::{evolve, EvolutionConfig, RuleSpec};
use crate::draft::{factorize, render, LoomDraft};
use crate::error::{Error, Result};
use crate::io::document::{Colorway, PatternDocument};
use crate::io::image::export_png;
use crate::metrics::{MetricsOptions, RuleMetrics, WeavabilityConfig};
use crate::raster::{load_image, weavable_rasterize, ImageFormat, LumaMatrix, RasterConfig, RasterOutcome};

/// Evolves `rule` and wraps the grid in a document with metrics attached.
pub fn generate_document(
    rule: &RuleSpec,
    config: &EvolutionConfig,
    colorway: Option<Colorway>,
) -> Result<PatternDocument> {
    let grid = evolve(rule, config)?;
    let mut doc = PatternDocument::from_evolution(rule, config, &grid);
    doc.colorway = colorway;
    if config.steps > 0 {
        doc.metrics = Some(RuleMetrics::measure(&grid, &MetricsOptions::default())?);
    }
    doc.validate()?;
    Ok(doc)
}

/// Decodes an image of any supported format.
pub fn decode_image(bytes: &[u8]) -> Result<LumaMatrix> {
    let format = ImageFormat::detect(bytes).ok_or_else(|| Error::ImageParse {
        offset: 0,
        message: "unrecognized image signature (expected PGM, PPM or PNG)".into(),
    })?;
    load_image(bytes, format)
}

/// Rasterizes a luminance matrix into a document. Binary rasters get float
/// checks (and the repair when `repair` is set) plus metrics.
pub fn raster_document(
    matrix: &LumaMatrix,
    config: &RasterConfig,
    cfg: &WeavabilityConfig,
    repair: bool,
) -> Result<(PatternDocument, RasterOutcome)> {
    let outcome = weavable_rasterize(matrix, config, cfg, repair)?;
    let mut doc = PatternDocument::from_grid(&outcome.grid);
    doc.raster = Some(*config);
    doc.metrics =
        Some(RuleMetrics::measure(&outcome.grid, &MetricsOptions { weavability: *cfg, ..MetricsOptions::default() })?);
    Ok((doc, outcome))
}

/// Metrics of the document's grid with default options.
pub fn document_metrics(doc: &PatternDocument) -> Result<RuleMetrics> {
    let grid = doc.pattern_grid()?;
    if grid.meta().init_rows >= grid.height() {
        return Err(Error::Domain("document has no generated rows to measure".into()));
    }
    RuleMetrics::measure(&grid, &MetricsOptions::default())
}

pub fn document_draft(doc: &PatternDocument, capacity: usize) -> Result<LoomDraft> {
    factorize(&doc.drawdown()?, capacity)
}

pub fn document_png(doc: &PatternDocument, cell_px: usize) -> Result<Vec<u8>> {
    export_png(&render(&doc.drawdown()?, cell_px)?)
}
