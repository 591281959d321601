//! Entropy and warp/weft balance of evolved patterns, the weaveability gate,
//! and the 256-rule elementary sweep.
//!
//! For binary grids the ratio is `h = P(1) / P(0)`, warp-up over weft-up.
//! Symbol entropy of a binary grid depends on `h` alone; block entropy over
//! horizontal windows is reported alongside it as an extension so that
//! structured and noisy patterns with equal balance can be told apart.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::automata::{evolve, EvolutionConfig, PatternGrid, RuleSpec};
use crate::draft::FloatReport;
use crate::error::{Error, Result};

/// Which rows of a grid are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Rows produced by the rule; initial rows are excluded.
    #[default]
    GeneratedRows,
    AllRows,
}

fn scoped_cells(grid: &PatternGrid, scope: Scope) -> Result<&[u8]> {
    let cells = match scope {
        Scope::GeneratedRows => grid.generated_cells(),
        Scope::AllRows => grid.cells(),
    };
    if cells.is_empty() {
        return Err(Error::Domain("the measured scope contains no cells".into()));
    }
    Ok(cells)
}

fn scoped_grid(grid: &PatternGrid, scope: Scope) -> Result<PatternGrid> {
    scoped_cells(grid, scope)?;
    match scope {
        Scope::AllRows => Ok(grid.clone()),
        Scope::GeneratedRows => grid.slice_rows(grid.meta().init_rows, grid.height()),
    }
}

/// Shannon entropy in bits of a distribution given by counts, `0 log 0 = 0`.
fn entropy_of_counts<'a>(counts: impl IntoIterator<Item = &'a u64>, total: u64) -> f64 {
    let n = total as f64;
    counts
        .into_iter()
        .filter(|&&c| c > 0 && c < total)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .fold(0.0, |acc, x| acc + x)
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Cell count per state over the scope.
pub fn state_counts(grid: &PatternGrid, scope: Scope) -> Result<Vec<u64>> {
    let cells = scoped_cells(grid, scope)?;
    let mut counts = vec![0u64; grid.k() as usize];
    for &s in cells {
        counts[s as usize] += 1;
    }
    Ok(counts)
}

/// Empirical state frequencies and their entropy in bits.
pub fn symbol_entropy(grid: &PatternGrid, scope: Scope) -> Result<(Vec<f64>, f64)> {
    let counts = state_counts(grid, scope)?;
    let total: u64 = counts.iter().sum();
    let freqs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok((freqs, entropy_of_counts(&counts, total)))
}

/// Warp-up to weft-up ratio. Serialized as a number, or the string `"inf"`
/// when no weft-up cell exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn from_counts(a: u64, b: u64) -> Self {
        if b == 0 {
            Ratio::Infinite
        } else {
            Ratio::Finite(a as f64 / b as f64)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(h) => Some(h),
            Ratio::Infinite => None,
        }
    }

    /// Zero and infinity cannot be placed on a log axis.
    pub fn is_log_plottable(self) -> bool {
        matches!(self, Ratio::Finite(h) if h > 0.0)
    }

    /// `h / (1 + h)`, the warp-up share implied by the ratio.
    pub fn share(self) -> f64 {
        match self {
            Ratio::Finite(h) => h / (1.0 + h),
            Ratio::Infinite => 1.0,
        }
    }

    /// Total order with infinity last.
    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Ratio::Finite(a), Ratio::Finite(b)) => a.total_cmp(b),
            (Ratio::Finite(_), Ratio::Infinite) => std::cmp::Ordering::Less,
            (Ratio::Infinite, Ratio::Finite(_)) => std::cmp::Ordering::Greater,
            (Ratio::Infinite, Ratio::Infinite) => std::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(h) => write!(f, "{h}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(h) => s.serialize_f64(*h),
            Ratio::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RatioVisitor;

        impl Visitor<'_> for RatioVisitor {
            type Value = Ratio;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Ratio, E> {
                if v.is_finite() && v >= 0.0 {
                    Ok(Ratio::Finite(v))
                } else {
                    Err(E::custom(format!("ratio {v} is not a non-negative finite number")))
                }
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Ratio, E> {
                Ok(Ratio::Finite(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Ratio, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Ratio, E> {
                if v == "inf" {
                    Ok(Ratio::Infinite)
                } else {
                    Err(E::custom(format!("unexpected ratio string `{v}`")))
                }
            }
        }

        d.deserialize_any(RatioVisitor)
    }
}

/// `h = count(1) / count(0)` over the scope of a binary grid.
pub fn state_ratio(grid: &PatternGrid, scope: Scope) -> Result<Ratio> {
    if grid.k() != 2 {
        return Err(Error::Unsupported(format!("the state ratio needs k=2, grid has k={}", grid.k())));
    }
    let counts = state_counts(grid, scope)?;
    Ok(Ratio::from_counts(counts[1], counts[0]))
}

/// Entropy in bits of horizontal `len`-cell windows, wrapping within each row.
pub fn block_entropy(grid: &PatternGrid, len: usize, scope: Scope) -> Result<f64> {
    if len == 0 || len > grid.width() {
        return Err(Error::Domain(format!("block length {len} must be in 1..={}", grid.width())));
    }
    let cells = scoped_cells(grid, scope)?;
    let width = grid.width();
    let k = grid.k() as u64;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    let mut owned_words: HashMap<Vec<u8>, u64> = HashMap::new();
    let packable = u32::try_from(len).ok().and_then(|l| k.checked_pow(l)).is_some();
    for row in cells.chunks_exact(width) {
        for start in 0..width {
            if packable {
                let word = (0..len).fold(0u64, |acc, j| acc * k + row[(start + j) % width] as u64);
                *counts.entry(word).or_default() += 1;
            } else {
                let word = (0..len).map(|j| row[(start + j) % width]).collect();
                *owned_words.entry(word).or_default() += 1;
            }
        }
    }
    let total = cells.len() as u64;
    let mut values: Vec<u64> = counts.into_values().chain(owned_words.into_values()).collect();
    values.sort_unstable();
    Ok(entropy_of_counts(&values, total))
}

/// Thresholds of the weaveability gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeavabilityConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub max_float: usize,
}

impl Default for WeavabilityConfig {
    fn default() -> Self {
        Self::symmetric(4.0, 5)
    }
}

impl WeavabilityConfig {
    /// Band `[1/h_max, h_max]`.
    pub fn symmetric(h_max: f64, max_float: usize) -> Self {
        Self { h_min: 1.0 / h_max, h_max, max_float }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_min.is_finite() && self.h_max.is_finite()) {
            return Err(Error::Validation("h_min and h_max must be positive and finite".into()));
        }
        if !(self.h_min <= 1.0 && 1.0 <= self.h_max) {
            return Err(Error::Validation(format!("ratio band [{}, {}] must contain 1", self.h_min, self.h_max)));
        }
        if self.max_float == 0 {
            return Err(Error::Validation("max_float must be at least 1".into()));
        }
        Ok(())
    }
}

/// A failed clause of the weaveability gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    Ratio,
    WarpFloat,
    WeftFloat,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::Ratio => "ratio",
            Violation::WarpFloat => "warp-float",
            Violation::WeftFloat => "weft-float",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub weaveable: bool,
    pub reasons: Vec<Violation>,
}

/// Evaluates every clause: `h_min <= h <= h_max` and both float maxima at
/// most `max_float`. Grids without a ratio (k != 2) skip the ratio clause.
pub fn check_weaveability(
    ratio: Option<Ratio>,
    max_warp_float: usize,
    max_weft_float: usize,
    cfg: &WeavabilityConfig,
) -> Verdict {
    let mut reasons = Vec::new();
    let ratio_ok = match ratio {
        None => true,
        Some(Ratio::Infinite) => false,
        Some(Ratio::Finite(h)) => cfg.h_min <= h && h <= cfg.h_max,
    };
    if !ratio_ok {
        reasons.push(Violation::Ratio);
    }
    if max_warp_float > cfg.max_float {
        reasons.push(Violation::WarpFloat);
    }
    if max_weft_float > cfg.max_float {
        reasons.push(Violation::WeftFloat);
    }
    Verdict { weaveable: reasons.is_empty(), reasons }
}

pub fn weaveability(metrics: &RuleMetrics, cfg: &WeavabilityConfig) -> Verdict {
    check_weaveability(metrics.ratio, metrics.max_warp_float, metrics.max_weft_float, cfg)
}

/// Everything measured about one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleMetrics {
    pub rule: Option<String>,
    pub frequencies: Vec<f64>,
    #[serde(rename = "H")]
    pub entropy: f64,
    /// Absent for grids with more than two states.
    #[serde(rename = "h")]
    pub ratio: Option<Ratio>,
    pub block_len: usize,
    /// Entropy of horizontal windows.
    #[serde(rename = "H_block")]
    pub block_entropy: f64,
    pub max_warp_float: usize,
    pub max_weft_float: usize,
    pub weaveable: bool,
    pub reasons: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub scope: Scope,
    pub block_len: usize,
    pub weavability: WeavabilityConfig,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        Self { scope: Scope::GeneratedRows, block_len: 3, weavability: WeavabilityConfig::default() }
    }
}

impl RuleMetrics {
    /// Measures `grid` over `opts.scope`. Floats are taken on the scoped rows
    /// with every nonzero state counted as warp-up. The block length is
    /// clamped to the grid width.
    pub fn measure(grid: &PatternGrid, opts: &MetricsOptions) -> Result<Self> {
        let (frequencies, entropy) = symbol_entropy(grid, opts.scope)?;
        let ratio = (grid.k() == 2).then(|| state_ratio(grid, opts.scope)).transpose()?;
        let block_len = opts.block_len.clamp(1, grid.width());
        let block_entropy = block_entropy(grid, block_len, opts.scope)?;
        let floats = FloatReport::of_grid(&scoped_grid(grid, opts.scope)?);
        let verdict = check_weaveability(ratio, floats.max_warp_float, floats.max_weft_float, &opts.weavability);
        Ok(Self {
            rule: grid.meta().rule_id.clone(),
            frequencies,
            entropy,
            ratio,
            block_len,
            block_entropy,
            max_warp_float: floats.max_warp_float,
            max_weft_float: floats.max_weft_float,
            weaveable: verdict.weaveable,
            reasons: verdict.reasons,
        })
    }

    /// Rule number for elementary sweeps.
    pub fn rule_number(&self) -> Option<u8> {
        self.rule.as_deref().and_then(|r| r.parse().ok())
    }
}

/// Measures all 256 elementary rules from the same initial rows.
///
/// Rules are evaluated in parallel; the result is ordered by rule number.
pub fn sweep_elementary(config: &EvolutionConfig, opts: &MetricsOptions) -> Result<Vec<RuleMetrics>> {
    if config.steps == 0 {
        return Err(Error::Domain("a sweep needs at least one step".into()));
    }
    opts.weavability.validate()?;
    (0..=255u32)
        .into_par_iter()
        .map(|n| {
            let rule = RuleSpec::from_wolfram(n)?;
            RuleMetrics::measure(&evolve(&rule, config)?, opts)
        })
        .collect()
}

/// One point of the entropy-versus-ratio plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub rule: String,
    #[serde(rename = "h")]
    pub ratio: Ratio,
    #[serde(rename = "H")]
    pub entropy: f64,
    pub weaveable: bool,
}

/// Plot data: log-plottable rows sorted by `h`, and the rows at `h = 0` or
/// `h = inf` that belong in the gutters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpacePlot {
    pub plottable: Vec<PlotRow>,
    pub unplottable: Vec<PlotRow>,
}

impl RuleSpacePlot {
    pub fn len(&self) -> usize {
        self.plottable.len() + self.unplottable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn rule_space_plot(sweep: &[RuleMetrics]) -> RuleSpacePlot {
    let mut rows: Vec<(Option<u8>, PlotRow)> = sweep
        .iter()
        .filter_map(|m| {
            let ratio = m.ratio?;
            Some((
                m.rule_number(),
                PlotRow { rule: m.rule.clone().unwrap_or_default(), ratio, entropy: m.entropy, weaveable: m.weaveable },
            ))
        })
        .collect();
    rows.sort_by(|(na, a), (nb, b)| a.ratio.total_cmp(&b.ratio).then(na.cmp(nb)));
    let (plottable, unplottable) = rows.into_iter().map(|(_, row)| row).partition(|row| row.ratio.is_log_plottable());
    RuleSpacePlot { plottable, unplottable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Boundary, GridMeta, InitSpec};

    fn binary(width: usize, cells: Vec<u8>) -> PatternGrid {
        PatternGrid::new(width, 2, cells).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let zero = binary(4, vec![0; 16]);
        assert_eq!(symbol_entropy(&zero, Scope::AllRows).unwrap().1, 0.0);
        let half = binary(4, vec![0, 1, 0, 1, 1, 0, 1, 0]);
        assert_eq!(symbol_entropy(&half, Scope::AllRows).unwrap().1, 1.0);
        let quarter = binary(4, vec![1, 0, 0, 0]);
        let (f, h) = symbol_entropy(&quarter, Scope::AllRows).unwrap();
        assert_eq!(f, vec![0.75, 0.25]);
        // -(0.25 log2 0.25 + 0.75 log2 0.75) = 0.5 + 0.311278...
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15, "{h}");
    }

    #[test]
    fn entropy_empty_scope() {
        let g = binary(3, vec![0, 1, 0]).with_meta(GridMeta { init_rows: 1, ..GridMeta::default() });
        assert!(matches!(symbol_entropy(&g, Scope::GeneratedRows), Err(Error::Domain(_))));
        assert!(symbol_entropy(&g, Scope::AllRows).is_ok());
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(state_ratio(&binary(2, vec![0, 1]), Scope::AllRows).unwrap(), Ratio::Finite(1.0));
        assert_eq!(state_ratio(&binary(4, vec![1, 1, 0, 1]), Scope::AllRows).unwrap(), Ratio::Finite(3.0));
        assert_eq!(state_ratio(&binary(4, vec![1; 4]), Scope::AllRows).unwrap(), Ratio::Infinite);
        let three = PatternGrid::new(3, 3, vec![0, 1, 2]).unwrap();
        assert!(matches!(state_ratio(&three, Scope::AllRows), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ratio_serde() {
        assert_eq!(serde_json::to_string(&Ratio::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Ratio::Finite(0.5)).unwrap(), "0.5");
        assert_eq!(serde_json::from_str::<Ratio>("\"inf\"").unwrap(), Ratio::Infinite);
        assert_eq!(serde_json::from_str::<Ratio>("2").unwrap(), Ratio::Finite(2.0));
        assert!(serde_json::from_str::<Ratio>("-1").is_err());
        assert!(serde_json::from_str::<Ratio>("\"nan\"").is_err());
    }

    #[test]
    fn block_entropy_examples() {
        let zero = binary(5, vec![0; 15]);
        assert_eq!(block_entropy(&zero, 3, Scope::AllRows).unwrap(), 0.0);

        // Checkerboard rows 0101 / 1010: every window of two is 01 or 10,
        // four of each.
        let checker = binary(4, vec![0, 1, 0, 1, 1, 0, 1, 0]);
        assert_eq!(block_entropy(&checker, 2, Scope::AllRows).unwrap(), 1.0);

        assert!(matches!(block_entropy(&checker, 5, Scope::AllRows), Err(Error::Domain(_))));
        assert!(block_entropy(&checker, 0, Scope::AllRows).is_err());
    }

    #[test]
    fn block_entropy_of_fair_noise_approaches_two_bits() {
        let rows = crate::rng::BernoulliRows::new(11, 0.5).next_row(512 * 200);
        let g = binary(512, rows);
        let h = block_entropy(&g, 2, Scope::AllRows).unwrap();
        assert!((h - 2.0).abs() < 0.05, "{h}");
    }

    #[test]
    fn block_len_one_is_symbol_entropy() {
        let rows = crate::rng::BernoulliRows::new(2, 0.3).next_row(30 * 10);
        let g = binary(30, rows);
        let h1 = block_entropy(&g, 1, Scope::AllRows).unwrap();
        let (_, h) = symbol_entropy(&g, Scope::AllRows).unwrap();
        assert!((h1 - h).abs() < 1e-12);
    }

    #[test]
    fn block_entropy_multistate_long_words() {
        let cells: Vec<u8> = (0..64 * 4).map(|i| (i % 7) as u8).collect();
        let g = PatternGrid::new(64, 7, cells).unwrap();
        // 64 cells of period 7 on a ring of 64: every window is distinct.
        let h = block_entropy(&g, 40, Scope::AllRows).unwrap();
        assert!(h > 0.0);
    }

    fn metrics(ratio: Ratio, warp: usize, weft: usize) -> RuleMetrics {
        RuleMetrics {
            rule: None,
            frequencies: vec![],
            entropy: binary_entropy(ratio.share()),
            ratio: Some(ratio),
            block_len: 1,
            block_entropy: 0.0,
            max_warp_float: warp,
            max_weft_float: weft,
            weaveable: false,
            reasons: vec![],
        }
    }

    #[test]
    fn gate_examples() {
        let cfg = WeavabilityConfig::default();
        let v = weaveability(&metrics(Ratio::Finite(1.0), 1, 1), &cfg);
        assert!(v.weaveable && v.reasons.is_empty());

        let v = weaveability(&metrics(Ratio::Infinite, 8, 8), &cfg);
        assert!(!v.weaveable);
        assert_eq!(v.reasons, vec![Violation::Ratio, Violation::WarpFloat, Violation::WeftFloat]);

        let cfg = WeavabilityConfig::symmetric(2.0, 5);
        let v = weaveability(&metrics(Ratio::Finite(3.0), 4, 4), &cfg);
        assert_eq!(v.reasons, vec![Violation::Ratio]);
    }

    #[test]
    fn all_warp_up_grid_measured() {
        let g = binary(8, vec![1; 64]);
        let opts = MetricsOptions { scope: Scope::AllRows, ..MetricsOptions::default() };
        let m = RuleMetrics::measure(&g, &opts).unwrap();
        assert_eq!(m.ratio, Some(Ratio::Infinite));
        assert_eq!((m.max_warp_float, m.max_weft_float), (8, 0));
        assert_eq!(m.reasons, vec![Violation::Ratio, Violation::WarpFloat]);
    }

    #[test]
    fn config_validation() {
        assert!(WeavabilityConfig::default().validate().is_ok());
        assert!(WeavabilityConfig { h_min: 2.0, h_max: 4.0, max_float: 5 }.validate().is_err());
        assert!(WeavabilityConfig { h_min: 0.0, h_max: 4.0, max_float: 5 }.validate().is_err());
        assert!(WeavabilityConfig::symmetric(4.0, 0).validate().is_err());
    }

    fn sweep_default(seed: u64) -> Vec<RuleMetrics> {
        sweep_elementary(&EvolutionConfig::random(101, 50, seed), &MetricsOptions::default()).unwrap()
    }

    #[test]
    fn sweep_special_rules() {
        let sweep = sweep_default(1);
        assert_eq!(sweep.len(), 256);
        for (n, m) in sweep.iter().enumerate() {
            assert_eq!(m.rule_number(), Some(n as u8));
        }
        assert_eq!(sweep[0].entropy, 0.0);
        assert_eq!(sweep[0].ratio, Some(Ratio::Finite(0.0)));
        assert_eq!(sweep[255].ratio, Some(Ratio::Infinite));
    }

    #[test]
    fn sweep_rule_51_balances_for_any_seed() {
        for seed in [1, 2, 99, 12345] {
            let m = &sweep_default(seed)[51];
            assert_eq!(m.ratio, Some(Ratio::Finite(1.0)));
            assert_eq!(m.entropy, 1.0);
        }
    }

    #[test]
    fn sweep_identity_rule_keeps_init_density() {
        let cfg = EvolutionConfig::random(101, 50, 1);
        let rule = RuleSpec::from_wolfram(204).unwrap();
        let init = cfg.initial_rows(&rule).unwrap();
        let ones = init[0].iter().filter(|&&c| c == 1).count() as f64 / 101.0;
        let m = &sweep_default(1)[204];
        assert_eq!(m.frequencies, vec![1.0 - ones, ones]);
    }

    #[test]
    fn sweep_is_deterministic() {
        assert_eq!(sweep_default(7), sweep_default(7));
    }

    #[test]
    fn sweep_needs_steps() {
        let cfg = EvolutionConfig::random(10, 0, 1);
        assert!(sweep_elementary(&cfg, &MetricsOptions::default()).is_err());
    }

    #[test]
    fn plot_layout() {
        let sweep = sweep_default(1);
        let plot = rule_space_plot(&sweep);
        assert_eq!(plot.len(), 256);
        assert!(plot.plottable.windows(2).all(|w| w[0].ratio.total_cmp(&w[1].ratio).is_le()));
        let gutter: Vec<&str> = plot.unplottable.iter().map(|r| r.rule.as_str()).collect();
        assert!(gutter.contains(&"0") && gutter.contains(&"255"));
        for row in &plot.plottable {
            let h = row.ratio.finite().unwrap();
            assert!((row.entropy - binary_entropy(h / (1.0 + h))).abs() <= 1e-12);
        }
        // Highest entropy sits where warp and weft balance.
        let best = plot.plottable.iter().map(|r| r.entropy).fold(0.0, f64::max);
        for row in plot.plottable.iter().filter(|r| r.entropy == best) {
            let h = row.ratio.finite().unwrap();
            assert!((0.8..=1.25).contains(&h), "rule {} h={h}", row.rule);
        }
    }

    #[test]
    fn complement_pairs_have_reciprocal_ratios() {
        // First half random, second half its complement: the complemented
        // row is a half-turn rotation, so R and comp(R) see mirrored counts.
        let half = crate::rng::BernoulliRows::new(5, 0.5).next_row(50);
        let row: Vec<u8> = half.iter().copied().chain(half.iter().map(|&c| 1 - c)).collect();
        let cfg = EvolutionConfig {
            width: 100,
            steps: 50,
            boundary: Boundary::Wrap,
            init: InitSpec::Explicit { rows: vec![row] },
        };
        let sweep = sweep_elementary(&cfg, &MetricsOptions::default()).unwrap();
        for n in 0..256usize {
            let comp = RuleSpec::from_wolfram(n as u32).unwrap().complemented();
            let c = comp.wolfram_number().unwrap() as usize;
            let (a, b) = (sweep[n].ratio.unwrap(), sweep[c].ratio.unwrap());
            match (a, b) {
                (Ratio::Finite(x), Ratio::Finite(y)) if x > 0.0 => assert!((x * y - 1.0).abs() < 1e-12),
                (Ratio::Finite(x), Ratio::Infinite) | (Ratio::Infinite, Ratio::Finite(x)) => assert_eq!(x, 0.0),
                other => panic!("rule {n} vs {c}: {other:?}"),
            }
            assert!((sweep[n].entropy - sweep[c].entropy).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_band_matches_entropy_threshold() {
        let cfg = WeavabilityConfig::default();
        let threshold = binary_entropy(cfg.h_max / (1.0 + cfg.h_max));
        for m in sweep_default(3) {
            let clause = !weaveability(&m, &cfg).reasons.contains(&Violation::Ratio);
            assert_eq!(clause, m.entropy >= threshold - 1e-12, "rule {:?}", m.rule);
        }
    }
}
