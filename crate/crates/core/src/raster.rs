//! Photograph to pattern: decode, resample to loom dimensions, quantize, and
//! optionally insert stitch points so no float exceeds the limit.

use serde::{Deserialize, Serialize};

use crate::automata::PatternGrid;
use crate::draft::{float_runs, FloatDirection, FloatReport, FloatRun, WARP_UP, WEFT_UP};
use crate::error::{Error, Result};
use crate::metrics::{check_weaveability, state_ratio, Scope, Verdict, WeavabilityConfig};

/// Rec. 709 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Luminance in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaMatrix {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl LumaMatrix {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain(format!("image dimensions {width}x{height} must be positive")));
        }
        if data.len() != width * height {
            return Err(Error::Validation(format!("{} samples do not form a {width}x{height} image", data.len())));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Validation(format!("luminance {} at sample {i} is outside [0, 1]", data[i])));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Pgm,
    Ppm,
    Png,
}

impl ImageFormat {
    /// Sniffs the magic number.
    pub fn detect(bytes: &[u8]) -> Option<Self> {
        match bytes {
            [b'P', b'2' | b'5', ..] => Some(ImageFormat::Pgm),
            [b'P', b'3' | b'6', ..] => Some(ImageFormat::Ppm),
            [0x89, b'P', b'N', b'G', ..] => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

/// Decodes an image into luminance. Color pixels are weighted with
/// [`LUMA_WEIGHTS`] on the normalized channel values.
pub fn load_image(bytes: &[u8], format: ImageFormat) -> Result<LumaMatrix> {
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => load_pnm(bytes, format),
        ImageFormat::Png => load_png(bytes),
    }
}

/// Width and height from the image header, without decoding pixels.
pub fn image_dimensions(bytes: &[u8], format: ImageFormat) -> Result<(usize, usize)> {
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => {
            let mut r = PnmReader { bytes, pos: 2 };
            Ok((r.number("width")?, r.number("height")?))
        }
        ImageFormat::Png => {
            let reader = png::Decoder::new(std::io::Cursor::new(bytes))
                .read_info()
                .map_err(|e| parse_err(0, format!("PNG header: {e}")))?;
            let info = reader.info();
            Ok((info.width as usize, info.height as usize))
        }
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::ImageParse { offset, message: message.into() }
}

struct PnmReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl PnmReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| parse_err(start, format!("{what} is too large")))
    }
}

fn load_pnm(bytes: &[u8], format: ImageFormat) -> Result<LumaMatrix> {
    let (plain, channels) = match (format, bytes.get(..2)) {
        (ImageFormat::Pgm, Some(b"P2")) => (true, 1),
        (ImageFormat::Pgm, Some(b"P5")) => (false, 1),
        (ImageFormat::Ppm, Some(b"P3")) => (true, 3),
        (ImageFormat::Ppm, Some(b"P6")) => (false, 3),
        _ => return Err(parse_err(0, format!("missing {format:?} magic number"))),
    };
    let mut r = PnmReader { bytes, pos: 2 };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval_at = r.pos;
    let maxval = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(parse_err(2, format!("image dimensions {width}x{height} must be positive")));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(parse_err(maxval_at, format!("maxval {maxval} is outside 1..=65535")));
    }
    let samples = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| parse_err(2, "image dimensions overflow"))?;
    let mut raw = Vec::with_capacity(samples.min(1 << 26));
    if plain {
        for _ in 0..samples {
            let at = r.pos;
            let v = r.number("sample").map_err(|_| parse_err(at, "truncated or malformed sample data"))?;
            if v > maxval {
                return Err(parse_err(at, format!("sample {v} exceeds maxval {maxval}")));
            }
            raw.push(v);
        }
    } else {
        // Exactly one whitespace byte separates the header from the raster.
        if !bytes.get(r.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(parse_err(r.pos, "expected whitespace after maxval"));
        }
        let start = r.pos + 1;
        let bps = if maxval > 255 { 2 } else { 1 };
        let need = samples * bps;
        let body = &bytes[start.min(bytes.len())..];
        if body.len() < need {
            return Err(parse_err(bytes.len(), format!("truncated raster: {} of {need} bytes", body.len())));
        }
        for (i, chunk) in body[..need].chunks_exact(bps).enumerate() {
            let v = chunk.iter().fold(0usize, |acc, &b| (acc << 8) | b as usize);
            if v > maxval {
                return Err(parse_err(start + i * bps, format!("sample {v} exceeds maxval {maxval}")));
            }
            raw.push(v);
        }
    }
    let scale = maxval as f64;
    luma_from_samples(width, height, channels, raw.into_iter().map(|v| v as f64 / scale))
}

fn luma_from_samples(
    width: usize,
    height: usize,
    channels: usize,
    norm: impl Iterator<Item = f64>,
) -> Result<LumaMatrix> {
    let norm: Vec<f64> = norm.collect();
    let data = if channels == 1 {
        norm
    } else {
        norm.chunks_exact(channels)
            .map(|px| {
                let y = LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2];
                y.clamp(0.0, 1.0)
            })
            .collect()
    };
    LumaMatrix::new(width, height, data)
}

/// 8-bit grayscale or RGB, non-interlaced.
fn load_png(bytes: &[u8]) -> Result<LumaMatrix> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| parse_err(0, format!("PNG header: {e}")))?;
    let info = reader.info();
    if info.interlaced {
        return Err(Error::Unsupported("interlaced PNG".into()));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Unsupported(format!("PNG bit depth {:?}; only 8-bit is accepted", info.bit_depth)));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(Error::Unsupported(format!("PNG color type {other:?}; only grayscale and RGB"))),
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let size = reader.output_buffer_size().ok_or_else(|| parse_err(0, "PNG dimensions overflow"))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| parse_err(bytes.len(), format!("PNG data: {e}")))?;
    let mut samples = Vec::with_capacity(width * height * channels);
    for line in buf[..frame.buffer_size()].chunks_exact(frame.line_size) {
        samples.extend(line[..width * channels].iter().map(|&b| b as f64 / 255.0));
    }
    luma_from_samples(width, height, channels, samples.into_iter())
}

/// Weights of source cells `[0, src)` overlapping target cell `t` of `dst`.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|t| {
            let lo = t as f64 * scale;
            let hi = (t + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            let mut weights: Vec<(usize, f64)> = (first..last)
                .map(|s| (s, (hi.min((s + 1) as f64) - lo.max(s as f64)).max(0.0)))
                .filter(|&(_, w)| w > 0.0)
                .collect();
            let total: f64 = weights.iter().map(|(_, w)| w).sum();
            weights.iter_mut().for_each(|(_, w)| *w /= total);
            weights
        })
        .collect()
}

/// Area-weighted box resampling to `width x height`.
pub fn resample(matrix: &LumaMatrix, width: usize, height: usize) -> Result<LumaMatrix> {
    if width == 0 || height == 0 {
        return Err(Error::Domain(format!("target dimensions {width}x{height} must be positive")));
    }
    if (width, height) == (matrix.width, matrix.height) {
        return Ok(matrix.clone());
    }
    let wx = box_weights(matrix.width, width);
    let wy = box_weights(matrix.height, height);
    let mut rows = Vec::with_capacity(matrix.height * width);
    for y in 0..matrix.height {
        let src = &matrix.data[y * matrix.width..(y + 1) * matrix.width];
        rows.extend(wx.iter().map(|ws| ws.iter().map(|&(s, w)| src[s] * w).sum::<f64>()));
    }
    let mut data = Vec::with_capacity(width * height);
    for ws in &wy {
        for x in 0..width {
            let v: f64 = ws.iter().map(|&(s, w)| rows[s * width + x] * w).sum();
            data.push(v.clamp(0.0, 1.0));
        }
    }
    LumaMatrix::new(width, height, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RasterMethod {
    FixedThreshold {
        threshold: f64,
    },
    Otsu,
    /// Bayer matrix of side `size` (a power of two up to 16).
    OrderedDither {
        size: usize,
    },
    /// Floyd-Steinberg.
    ErrorDiffusion,
}

/// Which luminance extreme becomes warp-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    #[default]
    DarkWarpUp,
    LightWarpUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterConfig {
    pub target_width: usize,
    pub target_height: usize,
    pub method: RasterMethod,
    #[serde(default)]
    pub polarity: Polarity,
    #[serde(default = "default_palette_size")]
    pub palette_size: u8,
}

fn default_palette_size() -> u8 {
    2
}

impl RasterConfig {
    pub fn new(target_width: usize, target_height: usize, method: RasterMethod) -> Self {
        Self { target_width, target_height, method, polarity: Polarity::DarkWarpUp, palette_size: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_width == 0 || self.target_height == 0 {
            return Err(Error::Validation("target dimensions must be at least 1".into()));
        }
        if self.palette_size < 2 {
            return Err(Error::Validation("palette_size must be at least 2".into()));
        }
        match self.method {
            RasterMethod::FixedThreshold { threshold } if !(0.0..=1.0).contains(&threshold) => {
                Err(Error::Validation(format!("threshold {threshold} is outside [0, 1]")))
            }
            RasterMethod::OrderedDither { size } if !(2..=16).contains(&size) || !size.is_power_of_two() => {
                Err(Error::Validation(format!("Bayer size {size} must be a power of two in 2..=16")))
            }
            _ => Ok(()),
        }
    }
}

/// Otsu threshold over a 256-bin histogram. When several cut points tie for
/// the largest between-class variance the midpoint of the tied range is
/// returned, so two separated levels get a threshold halfway between them.
pub fn otsu_threshold(matrix: &LumaMatrix) -> f64 {
    let mut hist = [0u64; 256];
    for &v in matrix.data() {
        hist[((v * 255.0).round() as usize).min(255)] += 1;
    }
    let total = matrix.data().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    let mut best_cuts: Vec<usize> = Vec::new();
    // Cut `c` puts bins 0..=c in the dark class.
    for (c, &count) in hist.iter().enumerate().take(255) {
        w0 += count as f64;
        sum0 += c as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = sum0 / w0 - (sum_all - sum0) / w1;
        let between = w0 * w1 * diff * diff;
        if between > best * (1.0 + 1e-12) {
            best = between;
            best_cuts.clear();
            best_cuts.push(c);
        } else if (between - best).abs() <= best * 1e-12 {
            best_cuts.push(c);
        }
    }
    if best_cuts.is_empty() {
        // Single-level image: everything falls on one side.
        return 0.5;
    }
    let lo = *best_cuts.first().expect("nonempty") as f64;
    let hi = *best_cuts.last().expect("nonempty") as f64;
    // Bin c covers values rounding to c; the boundary above it is c + 0.5.
    ((lo + hi) / 2.0 + 0.5) / 255.0
}

fn bayer(size: usize) -> Vec<u32> {
    let mut m = vec![0u32];
    let mut n = 1;
    while n < size {
        let mut next = vec![0u32; 4 * n * n];
        for y in 0..n {
            for x in 0..n {
                let v = 4 * m[y * n + x];
                next[y * 2 * n + x] = v;
                next[y * 2 * n + x + n] = v + 2;
                next[(y + n) * 2 * n + x] = v + 3;
                next[(y + n) * 2 * n + x + n] = v + 1;
            }
        }
        m = next;
        n *= 2;
    }
    m
}

/// Quantizes to a `palette_size`-state grid at the target dimensions.
///
/// Binary output marks a cell *dark* when its luminance falls below the
/// method's threshold; dark cells become warp-up under
/// [`Polarity::DarkWarpUp`]. Larger palettes use uniform luminance bands,
/// band 0 being the darkest.
pub fn rasterize(matrix: &LumaMatrix, config: &RasterConfig) -> Result<PatternGrid> {
    config.validate()?;
    let img = resample(matrix, config.target_width, config.target_height)?;
    let (w, h) = (img.width, img.height);
    let k = config.palette_size;
    if k > 2 {
        let top = k - 1;
        let cells = img
            .data
            .iter()
            .map(|&v| {
                let band = ((v * k as f64) as u8).min(top);
                match config.polarity {
                    Polarity::DarkWarpUp => top - band,
                    Polarity::LightWarpUp => band,
                }
            })
            .collect();
        return PatternGrid::new(w, k, cells);
    }
    let dark: Vec<bool> = match config.method {
        RasterMethod::FixedThreshold { threshold } => img.data.iter().map(|&v| v < threshold).collect(),
        RasterMethod::Otsu => {
            let t = otsu_threshold(&img);
            img.data.iter().map(|&v| v < t).collect()
        }
        RasterMethod::OrderedDither { size } => {
            let m = bayer(size);
            let n2 = (size * size) as f64;
            (0..w * h)
                .map(|i| {
                    let (x, y) = (i % w, i / w);
                    img.data[i] < (m[(y % size) * size + x % size] as f64 + 0.5) / n2
                })
                .collect()
        }
        RasterMethod::ErrorDiffusion => floyd_steinberg(&img),
    };
    let cells = dark
        .into_iter()
        .map(|d| match config.polarity {
            Polarity::DarkWarpUp => u8::from(d),
            Polarity::LightWarpUp => u8::from(!d),
        })
        .collect();
    PatternGrid::new(w, 2, cells)
}

/// Left-to-right, top-to-bottom scan with weights 7/16, 3/16, 5/16, 1/16.
fn floyd_steinberg(img: &LumaMatrix) -> Vec<bool> {
    let (w, h) = (img.width, img.height);
    let mut buf = img.data.clone();
    let mut dark = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let old = buf[i];
            let new = if old < 0.5 { 0.0 } else { 1.0 };
            dark[i] = new == 0.0;
            let err = old - new;
            if x + 1 < w {
                buf[i + 1] += err * 7.0 / 16.0;
            }
            if y + 1 < h {
                if x > 0 {
                    buf[i + w - 1] += err * 3.0 / 16.0;
                }
                buf[i + w] += err * 5.0 / 16.0;
                if x + 1 < w {
                    buf[i + w + 1] += err * 1.0 / 16.0;
                }
            }
        }
    }
    dark
}

/// Result of [`weavable_rasterize`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasterOutcome {
    #[serde(skip)]
    pub grid: PatternGrid,
    pub floats: FloatReport,
    pub verdict: Verdict,
    /// `(row, col)` of every cell flipped by the repair, in flip order.
    pub flipped: Vec<(usize, usize)>,
}

/// Breaks every float longer than `max_float` with stitch points.
///
/// Each pass rescans the grid and handles every over-long run that is still
/// intact. The stitch goes at the cell nearest index `start + len / 2` whose
/// flip keeps the float it creates across the run within `max_float`.
///
/// Runs with no such cell are then broken on a fixed lattice: weft floats at
/// cells with `(row - col) % (max_float + 1) == 0` (raised), warp floats at
/// cells with `(row - col) % (max_float + 1) == 1` (lowered). The result
/// never holds a float longer than `max_float`.
pub fn repair_floats(grid: &PatternGrid, max_float: usize) -> Result<(PatternGrid, Vec<(usize, usize)>)> {
    if max_float == 0 {
        return Err(Error::Validation("max_float must be at least 1".into()));
    }
    if grid.k() != 2 {
        return Err(Error::Unsupported("float repair needs a binary grid".into()));
    }
    let width = grid.width();
    let height = grid.height();
    let mut cells = grid.cells().to_vec();
    let mut flipped = Vec::new();
    let bound = width * height;
    let period = max_float + 1;
    let mut lattice = false;
    for _ in 0..=2 * bound {
        let current = PatternGrid::new(width, 2, cells.clone())?;
        let long: Vec<FloatRun> = float_runs(&current).into_iter().filter(|r| r.len > max_float).collect();
        if long.is_empty() {
            return Ok((current.with_meta(grid.meta().clone()), flipped));
        }
        let mut progressed = false;
        for run in long {
            let state = match run.direction {
                FloatDirection::Warp => WARP_UP,
                FloatDirection::Weft => WEFT_UP,
            };
            let intact = (0..run.len).all(|i| {
                let (r, c) = run.cell(i);
                cells[r * width + c] == state
            });
            if !intact {
                continue;
            }
            let center = run.len / 2;
            let nearest =
                (0..run.len).flat_map(|d| [center.checked_sub(d), Some(center + d)]).flatten().filter(|&i| i < run.len);
            let pick = if lattice {
                let phase = match run.direction {
                    FloatDirection::Weft => 0,
                    FloatDirection::Warp => 1,
                };
                nearest.into_iter().find(|&i| {
                    let (r, c) = run.cell(i);
                    (r + period - c % period) % period == phase
                })
            } else {
                nearest.into_iter().find(|&i| {
                    let (r, c) = run.cell(i);
                    crossing_run(&cells, width, height, r, c) <= max_float
                })
            };
            if let Some(i) = pick {
                let (row, col) = run.cell(i);
                cells[row * width + col] ^= 1;
                flipped.push((row, col));
                progressed = true;
            }
        }
        if !progressed {
            if lattice {
                break;
            }
            lattice = true;
        }
    }
    Err(Error::RepairDiverged(bound))
}

/// Length of the float that flipping `(row, col)` would create: a vertical
/// warp float when the cell becomes warp-up, a horizontal weft float when it
/// becomes weft-up.
fn crossing_run(cells: &[u8], width: usize, height: usize, row: usize, col: usize) -> usize {
    let new = cells[row * width + col] ^ 1;
    let at = |r: usize, c: usize| cells[r * width + c] == new;
    if new == WARP_UP {
        let up = (0..row).rev().take_while(|&r| at(r, col)).count();
        let down = (row + 1..height).take_while(|&r| at(r, col)).count();
        up + down + 1
    } else {
        let left = (0..col).rev().take_while(|&c| at(row, c)).count();
        let right = (col + 1..width).take_while(|&c| at(row, c)).count();
        left + right + 1
    }
}

/// [`rasterize`], then the float and ratio checks; with `repair` set,
/// over-long floats are broken by [`repair_floats`] before the checks.
pub fn weavable_rasterize(
    matrix: &LumaMatrix,
    config: &RasterConfig,
    cfg: &WeavabilityConfig,
    repair: bool,
) -> Result<RasterOutcome> {
    cfg.validate()?;
    let mut grid = rasterize(matrix, config)?;
    let mut flipped = Vec::new();
    if grid.k() != 2 {
        return Err(Error::Unsupported(format!(
            "weavability checks need a binary raster, palette_size is {}",
            grid.k()
        )));
    }
    if repair {
        let floats = FloatReport::of_grid(&grid);
        if floats.max_warp_float > cfg.max_float || floats.max_weft_float > cfg.max_float {
            (grid, flipped) = repair_floats(&grid, cfg.max_float)?;
        }
    }
    let floats = FloatReport::of_grid(&grid);
    let ratio = state_ratio(&grid, Scope::AllRows)?;
    let verdict = check_weaveability(Some(ratio), floats.max_warp_float, floats.max_weft_float, cfg);
    Ok(RasterOutcome { grid, floats, verdict, flipped })
}
