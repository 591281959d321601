//! Cloth interpretation of binary grids and loom draft factorization.
//!
//! State `1` is warp-up, state `0` is weft-up. A warp float is a vertical
//! run of warp-up cells in one column; a weft float is a horizontal run of
//! weft-up cells in one row. Runs never join across the grid edge: cloth is
//! cut flat even when the pattern was evolved on a ring.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::automata::PatternGrid;
use crate::error::{Error, Result};

pub const WARP_UP: u8 = 1;
pub const WEFT_UP: u8 = 0;

/// Shafts on a common dobby loom.
pub const DEFAULT_SHAFT_CAPACITY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb([r, g, b])
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.0;
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

impl FromStr for Rgb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Validation(format!("`{s}` is not a #rrggbb color")));
        }
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).expect("hex checked");
        Ok(Rgb([channel(0), channel(2), channel(4)]))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Indigo warp over undyed weft.
pub fn default_palette() -> Vec<Rgb> {
    vec![Rgb::new(0x23, 0x2f, 0x5c), Rgb::new(0xf3, 0xe9, 0xd2)]
}

/// Binary grid plus the yarn colors of every end and pick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drawdown {
    grid: PatternGrid,
    warp_colors: Vec<usize>,
    weft_colors: Vec<usize>,
    palette: Vec<Rgb>,
}

impl Drawdown {
    /// Validates a colorway against `grid`. Color arrays either match the
    /// grid dimensions or hold a single entry that is applied everywhere.
    pub fn new(grid: PatternGrid, warp_colors: Vec<usize>, weft_colors: Vec<usize>, palette: Vec<Rgb>) -> Result<Self> {
        if grid.k() != 2 {
            return Err(Error::Unsupported(format!(
                "a drawdown needs a binary grid, got k={}; color-separate it first",
                grid.k()
            )));
        }
        if palette.is_empty() {
            return Err(Error::Validation("palette is empty".into()));
        }
        let warp_colors = broadcast("warp", warp_colors, grid.width())?;
        let weft_colors = broadcast("weft", weft_colors, grid.height())?;
        for (side, colors) in [("warp", &warp_colors), ("weft", &weft_colors)] {
            if let Some(i) = colors.iter().position(|&c| c >= palette.len()) {
                return Err(Error::Validation(format!(
                    "{side} color {} at index {i} is outside the {}-entry palette",
                    colors[i],
                    palette.len()
                )));
            }
        }
        Ok(Self { grid, warp_colors, weft_colors, palette })
    }

    /// Single warp color and single weft color from [`default_palette`].
    pub fn plain(grid: PatternGrid) -> Result<Self> {
        Self::new(grid, vec![0], vec![1], default_palette())
    }

    pub fn grid(&self) -> &PatternGrid {
        &self.grid
    }

    pub fn warp_colors(&self) -> &[usize] {
        &self.warp_colors
    }

    pub fn weft_colors(&self) -> &[usize] {
        &self.weft_colors
    }

    pub fn palette(&self) -> &[Rgb] {
        &self.palette
    }

    pub fn ends(&self) -> usize {
        self.grid.width()
    }

    pub fn picks(&self) -> usize {
        self.grid.height()
    }

    pub fn is_warp_up(&self, pick: usize, end: usize) -> bool {
        self.grid.get(pick, end) == WARP_UP
    }
}

fn broadcast(side: &str, colors: Vec<usize>, len: usize) -> Result<Vec<usize>> {
    match colors.len() {
        n if n == len => Ok(colors),
        1 => Ok(vec![colors[0]; len]),
        n => Err(Error::Validation(format!("{side} colors have {n} entries, expected 1 or {len}"))),
    }
}

/// How one state of a multi-state grid is woven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateMapping {
    pub warp_up: bool,
    pub color: usize,
}

/// State 0 is weft-up in color 0, every other state `s` is warp-up in color
/// `s`. A binary grid is already a structure grid, so for `k = 2` both
/// states keep color 0.
pub fn default_mapping(k: u8) -> Vec<StateMapping> {
    (0..k as usize).map(|s| StateMapping { warp_up: s > 0, color: if k == 2 { 0 } else { s } }).collect()
}

/// Splits a multi-state grid into a binary interlacement grid and one weft
/// color per pick.
///
/// A pick takes the color of its most frequent state, ignoring state 0
/// unless the pick holds nothing else; ties go to the lower state.
pub fn color_separate(grid: &PatternGrid, mapping: Option<&[StateMapping]>) -> Result<(PatternGrid, Vec<usize>)> {
    let owned;
    let mapping = match mapping {
        Some(m) => m,
        None => {
            owned = default_mapping(grid.k());
            &owned
        }
    };
    if mapping.len() < grid.k() as usize {
        return Err(Error::Validation(format!(
            "mapping covers {} states, grid has k={}; state {} is missing",
            mapping.len(),
            grid.k(),
            mapping.len()
        )));
    }
    let cells = grid.cells().iter().map(|&s| u8::from(mapping[s as usize].warp_up)).collect();
    let mut weft_colors = Vec::with_capacity(grid.height());
    let mut counts = vec![0usize; grid.k() as usize];
    for row in grid.rows() {
        counts.iter_mut().for_each(|c| *c = 0);
        row.iter().for_each(|&s| counts[s as usize] += 1);
        let dominant = (1..counts.len())
            .filter(|&s| counts[s] > 0)
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        weft_colors.push(mapping[dominant].color);
    }
    let structure = PatternGrid::new(grid.width(), 2, cells)?.with_meta(grid.meta().clone());
    Ok((structure, weft_colors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloatDirection {
    /// Vertical warp-up run inside one column.
    Warp,
    /// Horizontal weft-up run inside one row.
    Weft,
}

/// One maximal float. `line` is the column for warp floats and the row for
/// weft floats; `start` indexes along that line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloatRun {
    pub direction: FloatDirection,
    pub line: usize,
    pub start: usize,
    pub len: usize,
}

impl FloatRun {
    /// `(row, col)` of the cell at offset `i` along the run.
    pub fn cell(&self, i: usize) -> (usize, usize) {
        match self.direction {
            FloatDirection::Warp => (self.start + i, self.line),
            FloatDirection::Weft => (self.line, self.start + i),
        }
    }
}

/// Every maximal float in the grid. Nonzero states count as warp-up.
pub fn float_runs(grid: &PatternGrid) -> Vec<FloatRun> {
    let mut runs = Vec::new();
    for (line, row) in grid.rows().enumerate() {
        scan_line(row.iter().map(|&s| s == WEFT_UP), FloatDirection::Weft, line, &mut runs);
    }
    for col in 0..grid.width() {
        scan_line(grid.column(col).map(|s| s != WEFT_UP), FloatDirection::Warp, col, &mut runs);
    }
    runs
}

fn scan_line(cells: impl Iterator<Item = bool>, direction: FloatDirection, line: usize, out: &mut Vec<FloatRun>) {
    let mut start = None;
    let mut i = 0;
    for on in cells {
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(FloatRun { direction, line, start: s, len: i - s });
                start = None;
            }
            _ => {}
        }
        i += 1;
    }
    if let Some(s) = start {
        out.push(FloatRun { direction, line, start: s, len: i - s });
    }
}

/// Float statistics in both directions. A direction with no runs at all
/// reports a maximum of 0.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FloatReport {
    pub max_warp_float: usize,
    pub max_weft_float: usize,
    /// Run length to number of runs.
    pub warp_histogram: BTreeMap<usize, usize>,
    pub weft_histogram: BTreeMap<usize, usize>,
}

impl FloatReport {
    pub fn of_grid(grid: &PatternGrid) -> Self {
        let mut report = FloatReport::default();
        for run in float_runs(grid) {
            let (max, hist) = match run.direction {
                FloatDirection::Warp => (&mut report.max_warp_float, &mut report.warp_histogram),
                FloatDirection::Weft => (&mut report.max_weft_float, &mut report.weft_histogram),
            };
            *max = (*max).max(run.len);
            *hist.entry(run.len).or_default() += 1;
        }
        report
    }
}

pub fn float_report(drawdown: &Drawdown) -> FloatReport {
    FloatReport::of_grid(drawdown.grid())
}

/// Threading and liftplan for a dobby loom, plus the drawdown they weave.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoomDraft {
    shaft_count: usize,
    threading: Vec<usize>,
    liftplan: Vec<Vec<usize>>,
    drawdown: Drawdown,
}

impl LoomDraft {
    /// Assembles a draft from loom controls (0-based shafts) and rebuilds
    /// its drawdown. Colors follow [`Drawdown::new`].
    pub fn from_parts(
        shaft_count: usize,
        threading: Vec<usize>,
        mut liftplan: Vec<Vec<usize>>,
        warp_colors: Vec<usize>,
        weft_colors: Vec<usize>,
        palette: Vec<Rgb>,
    ) -> Result<Self> {
        if threading.is_empty() || liftplan.is_empty() {
            return Err(Error::Validation("a draft needs at least one end and one pick".into()));
        }
        if let Some(e) = threading.iter().position(|&s| s >= shaft_count) {
            return Err(Error::Validation(format!(
                "end {} is threaded on shaft {} but the loom has {shaft_count}",
                e + 1,
                threading[e] + 1
            )));
        }
        for (p, lifted) in liftplan.iter_mut().enumerate() {
            if let Some(&s) = lifted.iter().find(|&&s| s >= shaft_count) {
                return Err(Error::Validation(format!(
                    "pick {} lifts shaft {} but the loom has {shaft_count}",
                    p + 1,
                    s + 1
                )));
            }
            lifted.sort_unstable();
            lifted.dedup();
        }
        let cells = reconstruct_cells(&threading, &liftplan, shaft_count);
        let grid = PatternGrid::new(threading.len(), 2, cells)?;
        let drawdown = Drawdown::new(grid, warp_colors, weft_colors, palette)?;
        Ok(Self { shaft_count, threading, liftplan, drawdown })
    }

    pub fn shaft_count(&self) -> usize {
        self.shaft_count
    }

    /// Shaft (0-based) of every warp end.
    pub fn threading(&self) -> &[usize] {
        &self.threading
    }

    /// Sorted lifted shafts (0-based) of every pick.
    pub fn liftplan(&self) -> &[Vec<usize>] {
        &self.liftplan
    }

    pub fn drawdown(&self) -> &Drawdown {
        &self.drawdown
    }

    /// Drawdown cells implied by threading and liftplan alone.
    pub fn reconstruct(&self) -> Vec<u8> {
        reconstruct_cells(&self.threading, &self.liftplan, self.shaft_count)
    }
}

fn reconstruct_cells(threading: &[usize], liftplan: &[Vec<usize>], shaft_count: usize) -> Vec<u8> {
    let mut cells = Vec::with_capacity(threading.len() * liftplan.len());
    let mut raised = vec![false; shaft_count];
    for lifted in liftplan {
        raised.iter_mut().for_each(|r| *r = false);
        lifted.iter().for_each(|&s| raised[s] = true);
        cells.extend(threading.iter().map(|&s| u8::from(raised[s])));
    }
    cells
}

/// One shaft per distinct drawdown column, numbered by first occurrence from
/// the left.
pub fn factorize(drawdown: &Drawdown, capacity: usize) -> Result<LoomDraft> {
    let grid = drawdown.grid();
    let mut classes: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut representatives = Vec::new();
    let mut threading = Vec::with_capacity(grid.width());
    for end in 0..grid.width() {
        let column: Vec<u8> = grid.column(end).collect();
        let next = classes.len();
        let shaft = *classes.entry(column).or_insert_with(|| {
            representatives.push(end);
            next
        });
        threading.push(shaft);
    }
    let shaft_count = representatives.len();
    if shaft_count > capacity {
        return Err(Error::Capacity { required: shaft_count, capacity });
    }
    let liftplan = (0..grid.height())
        .map(|pick| {
            representatives
                .iter()
                .enumerate()
                .filter(|&(_, &end)| grid.get(pick, end) == WARP_UP)
                .map(|(shaft, _)| shaft)
                .collect()
        })
        .collect();
    Ok(LoomDraft { shaft_count, threading, liftplan, drawdown: drawdown.clone() })
}

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!("image dimensions {width}x{height} must be positive")));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::Validation(format!("{} bytes do not form a {width}x{height} RGB image", pixels.len())));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        Rgb([self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]])
    }
}

/// Paints each cell as a `cell_px` square: warp color where warp-up, weft
/// color where weft-up.
pub fn render(drawdown: &Drawdown, cell_px: usize) -> Result<RgbImage> {
    if cell_px == 0 {
        return Err(Error::Domain("cell size must be at least 1 pixel".into()));
    }
    let (ends, picks) = (drawdown.ends(), drawdown.picks());
    let width = ends * cell_px;
    let mut pixels = Vec::with_capacity(width * picks * cell_px * 3);
    let mut line = Vec::with_capacity(width * 3);
    for pick in 0..picks {
        line.clear();
        for end in 0..ends {
            let color = if drawdown.is_warp_up(pick, end) {
                drawdown.palette[drawdown.warp_colors[end]]
            } else {
                drawdown.palette[drawdown.weft_colors[pick]]
            };
            for _ in 0..cell_px {
                line.extend_from_slice(&color.0);
            }
        }
        for _ in 0..cell_px {
            pixels.extend_from_slice(&line);
        }
    }
    RgbImage::new(width, picks * cell_px, pixels)
}
