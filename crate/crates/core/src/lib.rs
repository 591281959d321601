//! Weaving automata and the tooling around them.
//!
//! A pattern is a lattice of cell states where each row is a weft pick and
//! each column is a warp end. Rows are produced by a time-windowed cellular
//! automaton ([`automata`]), scored by entropy and warp/weft balance
//! ([`metrics`]), interpreted as cloth and factorized into a loom draft
//! ([`draft`]), or obtained from a photograph ([`raster`]). [`io`] holds
//! every on-disk and on-wire format.
//!
//! Binary grids use one convention throughout: state `1` is warp-up (the
//! warp end passes over the weft pick) and state `0` is weft-up.

pub mod automata;
pub mod draft;
mod error;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod rng;

pub use automata::{evolve, step, Boundary, EvolutionConfig, GridMeta, InitSpec, PatternGrid, RuleSpec};
pub use draft::{Drawdown, FloatReport, LoomDraft, Rgb, RgbImage};
pub use error::{Error, ErrorKind, Result};
pub use metrics::{Ratio, RuleMetrics, Scope, Verdict, Violation, WeavabilityConfig};
pub use raster::{LumaMatrix, RasterConfig, RasterMethod};
