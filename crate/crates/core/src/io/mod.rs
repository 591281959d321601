//! Serialization: pattern documents, WIF drafts, PBM/PNG images and sweep
//! tables.

mod document;
mod image;
mod pipeline;
mod table;
mod wif;

pub use document::{
    decode_json, decode_pattern_json, encode_pattern_json, Colorway, GridRecord, PatternDocument, RuleRecord,
    FORMAT_VERSION,
};
pub use image::{export_pbm, export_png};
pub use pipeline::{decode_image, document_draft, document_metrics, document_png, generate_document, raster_document};
pub use table::{run_sweep, sweep_csv, sweep_json, SweepParams, SweepReport, CSV_HEADER};
pub use wif::{export_wif, parse_wif};
