use std::fs;
use std::io::Write;
use std::path::Path;

use tenun_core::io::{
    decode_image, decode_pattern_json, document_draft, document_metrics, document_png, encode_pattern_json, export_wif,
    generate_document, raster_document, run_sweep, sweep_csv, sweep_json, PatternDocument, SweepParams,
};
use tenun_core::raster::{Polarity, RasterConfig, RasterMethod};
use tenun_core::{Boundary, EvolutionConfig, InitSpec, Ratio, RuleSpec, WeavabilityConfig};
use tenun_service::ServiceConfig;

use crate::error::CliError;
use crate::{
    DraftArgs, GenerateArgs, InitKind, MethodKind, MetricsArgs, PolarityArg, RasterizeArgs, ServeArgs, SweepArgs,
    TableFormat,
};

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Writes `bytes` to `out`, or stdout when `out` is `None`. Refuses to
/// overwrite any of `inputs`.
fn emit(out: Option<&Path>, bytes: &[u8], inputs: &[&Path]) -> Result<()> {
    match out {
        Some(path) => {
            if inputs.iter().any(|input| same_file(input, path)) {
                return Err(CliError::Usage(format!("refusing to overwrite input file {}", path.display())));
            }
            fs::write(path, bytes).map_err(|e| CliError::io(path, e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn load_document(path: &Path) -> Result<PatternDocument> {
    Ok(decode_pattern_json(&read(path)?)?)
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let rule = match (&args.rule, &args.table) {
        (Some(n), _) => RuleSpec::from_wolfram(*n)?,
        (None, Some(hex)) => RuleSpec::from_id(args.states, args.radius, args.window, hex)?,
        (None, None) => return Err(CliError::Usage("one of --rule or --table is required".into())),
    };
    let init = match args.init {
        InitKind::Center => InitSpec::SingleCenter { state: 1 },
        InitKind::Random => InitSpec::Random { seed: args.seed, density: args.density },
    };
    let config =
        EvolutionConfig { width: args.width, steps: args.steps, boundary: args.boundary.parse::<Boundary>()?, init };
    let doc = generate_document(&rule, &config, None)?;
    emit(args.out.as_deref(), &encode_pattern_json(&doc)?, &[])
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let params = SweepParams {
        width: args.width,
        steps: args.steps,
        seed: args.seed,
        h_max: args.h_max,
        max_float: args.max_float,
        block_len: args.block_len,
        ..SweepParams::default()
    };
    let format =
        args.format.unwrap_or_else(|| match args.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        });
    let report = run_sweep(&params)?;
    let bytes = match format {
        TableFormat::Csv => sweep_csv(&report.rows),
        TableFormat::Json => sweep_json(&report),
    };
    emit(args.out.as_deref(), &bytes, &[])
}

pub fn metrics(args: MetricsArgs) -> Result<()> {
    let doc = load_document(&args.document)?;
    let m = document_metrics(&doc)?;
    let text = if args.json {
        let mut s = serde_json::to_string_pretty(&m).expect("metrics serialize");
        s.push('\n');
        s
    } else {
        let ratio = match m.ratio {
            Some(Ratio::Finite(h)) => h.to_string(),
            Some(Ratio::Infinite) => "inf".to_string(),
            None => "n/a".to_string(),
        };
        let reasons: Vec<String> = m.reasons.iter().map(|r| r.to_string()).collect();
        format!(
            "rule            {}\nH               {}\nh               {ratio}\nH_block         {} (len {})\nmax_warp_float  {}\nmax_weft_float  {}\nweaveable       {}\nreasons         {}\n",
            m.rule.as_deref().unwrap_or("-"),
            m.entropy,
            m.block_entropy,
            m.block_len,
            m.max_warp_float,
            m.max_weft_float,
            m.weaveable,
            if reasons.is_empty() { "-".to_string() } else { reasons.join(", ") },
        )
    };
    emit(None, text.as_bytes(), &[])
}

pub fn rasterize(args: RasterizeArgs) -> Result<()> {
    let method = match args.method {
        MethodKind::FixedThreshold => RasterMethod::FixedThreshold { threshold: args.threshold },
        MethodKind::Otsu => RasterMethod::Otsu,
        MethodKind::OrderedDither => RasterMethod::OrderedDither { size: args.matrix },
        MethodKind::ErrorDiffusion => RasterMethod::ErrorDiffusion,
    };
    let config = RasterConfig {
        polarity: match args.polarity {
            PolarityArg::DarkWarpUp => Polarity::DarkWarpUp,
            PolarityArg::LightWarpUp => Polarity::LightWarpUp,
        },
        palette_size: args.levels,
        ..RasterConfig::new(args.width, args.height, method)
    };
    let cfg = WeavabilityConfig::symmetric(args.h_max, args.max_float);
    let matrix = decode_image(&read(&args.image)?)?;
    let (doc, outcome) = raster_document(&matrix, &config, &cfg, args.repair)?;
    emit(args.out.as_deref(), &encode_pattern_json(&doc)?, &[&args.image])?;
    if args.out.is_some() {
        eprintln!(
            "max floats warp {} / weft {}, {} cells stitched, weaveable {}",
            outcome.floats.max_warp_float,
            outcome.floats.max_weft_float,
            outcome.flipped.len(),
            outcome.verdict.weaveable
        );
    }
    Ok(())
}

pub fn draft(args: DraftArgs) -> Result<()> {
    if args.wif.is_none() && args.png.is_none() {
        return Err(CliError::Usage("nothing to do: pass --wif and/or --png".into()));
    }
    let doc = load_document(&args.document)?;
    let input = args.document.as_path();
    let wif = match &args.wif {
        Some(_) => Some(export_wif(&document_draft(&doc, args.capacity)?)),
        None => None,
    };
    let png = match &args.png {
        Some(_) => Some(document_png(&doc, args.cellpx)?),
        None => None,
    };
    if let (Some(path), Some(bytes)) = (&args.wif, &wif) {
        emit(Some(path), bytes, &[input])?;
    }
    if let (Some(path), Some(bytes)) = (&args.png, &png) {
        emit(Some(path), bytes, &[input])?;
    }
    Ok(())
}

pub fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let config = ServiceConfig { state_dir: args.state_dir, cors_origin: args.cors_origin, ..ServiceConfig::default() };
    let addr = format!("{}:{}", args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io("<runtime>", e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| CliError::io(&addr, e))?;
        tenun_service::serve(listener, config).await.map_err(|e| CliError::io(&addr, e))
    })
}
