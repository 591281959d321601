use proptest::prelude::*;
use tenun_core::draft::{factorize, float_report};
use tenun_core::metrics::{check_weaveability, state_ratio, MetricsOptions};
use tenun_core::raster::{rasterize, repair_floats, weavable_rasterize};
use tenun_core::{
    evolve, Drawdown, EvolutionConfig, LumaMatrix, PatternGrid, RasterConfig, RasterMethod, Ratio, RuleMetrics,
    RuleSpec, Scope, Violation, WeavabilityConfig,
};

/// Longest vertical run of 1 and horizontal run of 0, no wraparound.
fn naive_floats(grid: &PatternGrid) -> (usize, usize) {
    let (w, h) = (grid.width(), grid.height());
    let mut warp = 0;
    for c in 0..w {
        let mut run = 0;
        for r in 0..h {
            run = if grid.get(r, c) == 1 { run + 1 } else { 0 };
            warp = warp.max(run);
        }
    }
    let mut weft = 0;
    for r in 0..h {
        let mut run = 0;
        for c in 0..w {
            run = if grid.get(r, c) == 0 { run + 1 } else { 0 };
            weft = weft.max(run);
        }
    }
    (warp, weft)
}

fn binary_grid(width: usize, bits: &[bool]) -> PatternGrid {
    PatternGrid::new(width, 2, bits.iter().map(|&b| u8::from(b)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn float_clause_matches_drawdown_report(bits in prop::collection::vec(prop::bool::weighted(0.6), 12 * 10), max_float in 1usize..8) {
        let grid = binary_grid(12, &bits);
        let drawdown = Drawdown::plain(grid.clone()).unwrap();
        let report = float_report(&drawdown);
        let cfg = WeavabilityConfig { h_min: 0.0, h_max: f64::INFINITY, max_float };
        let verdict = check_weaveability(None, report.max_warp_float, report.max_weft_float, &cfg);
        let (warp, weft) = naive_floats(&grid);
        prop_assert_eq!(verdict.weaveable, warp <= max_float && weft <= max_float);
        prop_assert_eq!(verdict.reasons.contains(&Violation::WarpFloat), warp > max_float);
        prop_assert_eq!(verdict.reasons.contains(&Violation::WeftFloat), weft > max_float);
    }

    #[test]
    fn metrics_agree_with_cloth_view(rule in 0u32..256, seed in any::<u64>()) {
        let grid = evolve(&RuleSpec::from_wolfram(rule).unwrap(), &EvolutionConfig::random(31, 20, seed)).unwrap();
        let opts = MetricsOptions::default();
        let metrics = RuleMetrics::measure(&grid, &opts).unwrap();
        let generated = grid.slice_rows(1, grid.height()).unwrap();
        let report = float_report(&Drawdown::plain(generated.clone()).unwrap());
        prop_assert_eq!((metrics.max_warp_float, metrics.max_weft_float), naive_floats(&generated));
        prop_assert_eq!(metrics.max_warp_float, report.max_warp_float);
        prop_assert_eq!(metrics.max_weft_float, report.max_weft_float);
        let ratio = state_ratio(&grid, Scope::GeneratedRows).unwrap();
        let verdict = check_weaveability(Some(ratio), report.max_warp_float, report.max_weft_float, &opts.weavability);
        prop_assert_eq!(metrics.weaveable, verdict.weaveable);
        prop_assert_eq!(&metrics.reasons, &verdict.reasons);
    }

    #[test]
    fn repaired_raster_is_weaveable_on_floats(data in prop::collection::vec(0.0f64..=1.0, 16 * 16), max_float in 2usize..6) {
        let m = LumaMatrix::new(16, 16, data).unwrap();
        let config = RasterConfig::new(24, 20, RasterMethod::ErrorDiffusion);
        let cfg = WeavabilityConfig::symmetric(1e9, max_float);
        let outcome = weavable_rasterize(&m, &config, &cfg, true).unwrap();
        let (warp, weft) = naive_floats(&outcome.grid);
        prop_assert!(warp <= max_float && weft <= max_float);
        prop_assert!(!outcome.verdict.reasons.contains(&Violation::WarpFloat));
        prop_assert!(!outcome.verdict.reasons.contains(&Violation::WeftFloat));
        let raw = rasterize(&m, &config).unwrap();
        let differing = raw.cells().iter().zip(outcome.grid.cells()).filter(|(a, b)| a != b).count();
        let mut flips = std::collections::HashMap::new();
        for cell in &outcome.flipped {
            *flips.entry(*cell).or_insert(0usize) += 1;
        }
        prop_assert_eq!(differing, flips.values().filter(|&&n| n % 2 == 1).count());
    }
}

#[test]
fn all_white_raster_flags_and_repairs() {
    let m = LumaMatrix::from_fn(30, 30, |_, _| 1.0).unwrap();
    let config = RasterConfig::new(30, 30, RasterMethod::Otsu);
    let cfg = WeavabilityConfig::default();
    let raw = weavable_rasterize(&m, &config, &cfg, false).unwrap();
    assert!(!raw.verdict.weaveable);
    assert!(raw.verdict.reasons.contains(&Violation::WeftFloat));
    assert!(raw.flipped.is_empty());

    let (fixed, flipped) = repair_floats(&raw.grid, cfg.max_float).unwrap();
    let (warp, weft) = naive_floats(&fixed);
    assert!(warp <= 5 && weft <= 5);
    assert!(!flipped.is_empty());
    assert_eq!(factorize(&Drawdown::plain(fixed.clone()).unwrap(), 32).unwrap().reconstruct(), fixed.cells());
    assert!(matches!(state_ratio(&fixed, Scope::AllRows).unwrap(), Ratio::Finite(_)));
}
