//! The elementary rule-space sweep as a shareable table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automata::{Boundary, EvolutionConfig, InitSpec};
use crate::error::Result;
use crate::metrics::{
    rule_space_plot, sweep_elementary, MetricsOptions, RuleMetrics, RuleSpacePlot, Scope, WeavabilityConfig,
};

pub const CSV_HEADER: &str = "rule,h,H,H_block,max_warp_float,max_weft_float,weaveable";

/// Inputs of a sweep. Every sweep front end goes through [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub width: usize,
    pub steps: usize,
    pub seed: u64,
    pub density: f64,
    pub boundary: Boundary,
    pub h_max: f64,
    pub max_float: usize,
    pub block_len: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            width: 101,
            steps: 50,
            seed: 1,
            density: 0.5,
            boundary: Boundary::Wrap,
            h_max: 4.0,
            max_float: 5,
            block_len: 3,
        }
    }
}

impl SweepParams {
    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            width: self.width,
            steps: self.steps,
            boundary: self.boundary,
            init: InitSpec::Random { seed: self.seed, density: self.density },
        }
    }

    pub fn options(&self) -> MetricsOptions {
        MetricsOptions {
            scope: Scope::GeneratedRows,
            block_len: self.block_len,
            weavability: WeavabilityConfig::symmetric(self.h_max, self.max_float),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub params: SweepParams,
    /// One entry per rule, ordered by rule number.
    pub rows: Vec<RuleMetrics>,
    pub plot: RuleSpacePlot,
}

pub fn run_sweep(params: &SweepParams) -> Result<SweepReport> {
    let rows = sweep_elementary(&params.evolution(), &params.options())?;
    let plot = rule_space_plot(&rows);
    Ok(SweepReport { params: *params, rows, plot })
}

/// CSV in rule order. Ratios print as shortest round-trip decimals or `inf`.
pub fn sweep_csv(rows: &[RuleMetrics]) -> Vec<u8> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for m in rows {
        let h = m.ratio.map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{h},{},{},{},{},{}",
            m.rule.as_deref().unwrap_or(""),
            m.entropy,
            m.block_entropy,
            m.max_warp_float,
            m.max_weft_float,
            m.weaveable
        );
    }
    out.into_bytes()
}

pub fn sweep_json(report: &SweepReport) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("sweep report serializes");
    out.push(b'\n');
    out
}
