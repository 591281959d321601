//! Time-windowed one-dimensional cellular automata ("weaving automata").
//!
//! A rule reads, for every cell, the `2r+1` cells centred on it in each of
//! the last `w` rows. The concatenation of those cells, oldest row first and
//! left to right inside a row, forms the *neighborhood word*; the rule table
//! maps each word to the cell's next state. With `k = 2`, `r = 1`, `w = 1`
//! this is exactly the elementary cellular automaton and the table is the
//! binary expansion of the Wolfram number.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::BernoulliRows;

/// Largest table we are willing to materialise.
pub const MAX_TABLE_LEN: usize = 1 << 24;

/// Number of neighborhood words for `(k, r, w)`, i.e. `k^((2r+1)·w)`.
pub fn table_len(k: u8, radius: usize, window: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::Rule(format!("state count must be at least 2, got {k}")));
    }
    if window == 0 {
        return Err(Error::Rule("temporal window must be at least 1".into()));
    }
    let word_len =
        (2 * radius + 1).checked_mul(window).ok_or_else(|| Error::Rule("neighborhood word length overflows".into()))?;
    let exp = u32::try_from(word_len).map_err(|_| Error::Rule("neighborhood too large".into()))?;
    match (k as usize).checked_pow(exp) {
        Some(n) if n <= MAX_TABLE_LEN => Ok(n),
        _ => Err(Error::Rule(format!("rule table for k={k}, r={radius}, w={window} exceeds {MAX_TABLE_LEN} entries"))),
    }
}

/// A rule of the generalized weaving automaton. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleSpec {
    k: u8,
    radius: usize,
    window: usize,
    table: Vec<u8>,
    id: String,
}

impl RuleSpec {
    /// Elementary rule `n` (0..=255): neighborhood `(l, c, r)` maps to bit
    /// `4l + 2c + r` of `n`.
    pub fn from_wolfram(n: u32) -> Result<Self> {
        if n > 255 {
            return Err(Error::Domain(format!("Wolfram rule number must be in 0..=255, got {n}")));
        }
        let table = (0..8).map(|bit| ((n >> bit) & 1) as u8).collect();
        Ok(Self { k: 2, radius: 1, window: 1, table, id: n.to_string() })
    }

    /// Builds a rule from its full lookup table, indexed by the neighborhood
    /// word read as a big-endian base-`k` number.
    pub fn from_table(k: u8, radius: usize, window: usize, table: Vec<u8>) -> Result<Self> {
        let expected = table_len(k, radius, window)?;
        if table.len() != expected {
            return Err(Error::RuleTable {
                index: table.len().min(expected),
                reason: format!("expected {expected} entries, got {}", table.len()),
            });
        }
        if let Some(index) = table.iter().position(|&s| s >= k) {
            return Err(Error::RuleTable {
                index,
                reason: format!("output {} is not a state below k={k}", table[index]),
            });
        }
        let id = canonical_id(k, radius, window, &table);
        Ok(Self { k, radius, window, table, id })
    }

    /// Inverse of [`RuleSpec::id`]: decimal Wolfram number for elementary
    /// rules, hex table encoding otherwise.
    pub fn from_id(k: u8, radius: usize, window: usize, id: &str) -> Result<Self> {
        if (k, radius, window) == (2, 1, 1) {
            let n: u32 =
                id.trim().parse().map_err(|_| Error::Rule(format!("`{id}` is not an elementary rule number")))?;
            return Self::from_wolfram(n);
        }
        let table = decode_hex_table(k, radius, window, id)?;
        Self::from_table(k, radius, window, table)
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// Canonical identifier: the Wolfram number for elementary rules, the
    /// hex-encoded table for everything else.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Cells per neighborhood word, `(2r+1)·w`.
    pub fn word_len(&self) -> usize {
        (2 * self.radius + 1) * self.window
    }

    pub fn is_elementary(&self) -> bool {
        (self.k, self.radius, self.window) == (2, 1, 1)
    }

    pub fn wolfram_number(&self) -> Option<u8> {
        self.is_elementary().then(|| self.table.iter().rev().fold(0u8, |acc, &b| (acc << 1) | b))
    }

    /// Next state for an explicit neighborhood word.
    pub fn output(&self, word: &[u8]) -> u8 {
        debug_assert_eq!(word.len(), self.word_len());
        let k = self.k as usize;
        self.table[word.iter().fold(0usize, |acc, &d| acc * k + d as usize)]
    }

    /// Spatial mirror: each row segment of every word is reversed.
    pub fn mirrored(&self) -> RuleSpec {
        let span = 2 * self.radius + 1;
        let table = (0..self.table.len())
            .map(|index| {
                let mut word = self.decode_word(index);
                word.chunks_mut(span).for_each(|seg| seg.reverse());
                self.table[self.encode_word(&word)]
            })
            .collect();
        self.rebuilt(table)
    }

    /// State complement: `comp(R)(word) = (k-1) - R(complement of word)`.
    pub fn complemented(&self) -> RuleSpec {
        let top = self.k - 1;
        let table = (0..self.table.len())
            .map(|index| {
                let word: Vec<u8> = self.decode_word(index).iter().map(|&d| top - d).collect();
                top - self.table[self.encode_word(&word)]
            })
            .collect();
        self.rebuilt(table)
    }

    fn rebuilt(&self, table: Vec<u8>) -> RuleSpec {
        Self::from_table(self.k, self.radius, self.window, table).expect("table derived from a valid rule is valid")
    }

    fn decode_word(&self, mut index: usize) -> Vec<u8> {
        let k = self.k as usize;
        let mut word = vec![0u8; self.word_len()];
        for d in word.iter_mut().rev() {
            *d = (index % k) as u8;
            index /= k;
        }
        word
    }

    fn encode_word(&self, word: &[u8]) -> usize {
        let k = self.k as usize;
        word.iter().fold(0usize, |acc, &d| acc * k + d as usize)
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_elementary() {
            write!(f, "rule {}", self.id)
        } else {
            write!(f, "k={} r={} w={} table {}", self.k, self.radius, self.window, self.id)
        }
    }
}

fn bits_per_state(k: u8) -> usize {
    (u8::BITS - (k - 1).leading_zeros()) as usize
}

fn canonical_id(k: u8, radius: usize, window: usize, table: &[u8]) -> String {
    if (k, radius, window) == (2, 1, 1) {
        let n = table.iter().rev().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        return n.to_string();
    }
    encode_hex_table(k, table)
}

/// Outputs from the highest word down to word 0, `ceil(log2 k)` bits each,
/// most significant first, left-padded with zero bits to whole hex digits.
fn encode_hex_table(k: u8, table: &[u8]) -> String {
    let per = bits_per_state(k);
    let total = per * table.len();
    let pad = (4 - total % 4) % 4;
    let mut bits = Vec::with_capacity(total + pad);
    bits.resize(pad, 0u8);
    for &out in table.iter().rev() {
        for b in (0..per).rev() {
            bits.push((out >> b) & 1);
        }
    }
    bits.chunks(4)
        .map(|nib| {
            let v = nib.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

fn decode_hex_table(k: u8, radius: usize, window: usize, hex: &str) -> Result<Vec<u8>> {
    let len = table_len(k, radius, window)?;
    let per = bits_per_state(k);
    let total = per * len;
    let digits = total.div_ceil(4);
    let hex = hex.trim();
    if hex.len() != digits {
        return Err(Error::Rule(format!(
            "hex id for k={k}, r={radius}, w={window} must have {digits} digits, got {}",
            hex.len()
        )));
    }
    let mut bits = Vec::with_capacity(digits * 4);
    for (pos, c) in hex.chars().enumerate() {
        let v = c.to_digit(16).ok_or_else(|| Error::Rule(format!("invalid hex digit `{c}` at position {pos}")))?;
        bits.extend((0..4).rev().map(|b| ((v >> b) & 1) as u8));
    }
    let pad = digits * 4 - total;
    if bits[..pad].iter().any(|&b| b != 0) {
        return Err(Error::Rule("non-zero padding bits in hex id".into()));
    }
    let mut table: Vec<u8> =
        bits[pad..].chunks(per).map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b)).collect();
    table.reverse();
    Ok(table)
}

/// How neighborhoods are completed beyond the first and last column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Columns wrap around (tubular weave).
    #[default]
    Wrap,
    /// Cells outside the row read as this constant state.
    Fixed(u8),
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Wrap => f.write_str("wrap"),
            Boundary::Fixed(s) => write!(f, "fixed{s}"),
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    /// Accepts `wrap`, `fixed` (state 0), `fixed1`, `fixed:1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "wrap" {
            return Ok(Boundary::Wrap);
        }
        if let Some(rest) = s.strip_prefix("fixed") {
            let rest = rest.trim_start_matches([':', '=', '-']);
            if rest.is_empty() {
                return Ok(Boundary::Fixed(0));
            }
            if let Ok(state) = rest.parse() {
                return Ok(Boundary::Fixed(state));
            }
        }
        Err(Error::Validation(format!("unknown boundary `{s}` (expected wrap or fixedN)")))
    }
}

/// Initial condition of an evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Bernoulli(density) cells from the seeded generator in [`crate::rng`].
    /// Produces `w` rows for a rule with window `w`.
    Random { seed: u64, density: f64 },
    /// A zero row with `state` in the centre column. For `w > 1` it is
    /// preceded by `w - 1` all-zero rows.
    SingleCenter { state: u8 },
    /// Caller-supplied rows; at least `w` of them.
    Explicit { rows: Vec<Vec<u8>> },
}

impl InitSpec {
    pub fn seed(&self) -> Option<u64> {
        match self {
            InitSpec::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub width: usize,
    pub steps: usize,
    #[serde(default)]
    pub boundary: Boundary,
    pub init: InitSpec,
}

impl EvolutionConfig {
    /// Wrap boundary, fair-coin random init.
    pub fn random(width: usize, steps: usize, seed: u64) -> Self {
        Self { width, steps, boundary: Boundary::Wrap, init: InitSpec::Random { seed, density: 0.5 } }
    }

    /// The rows the evolution starts from, checked against `rule`.
    pub fn initial_rows(&self, rule: &RuleSpec) -> Result<Vec<Vec<u8>>> {
        if self.width == 0 {
            return Err(Error::Domain("width must be at least 1".into()));
        }
        let k = rule.k();
        let w = rule.window();
        if let Boundary::Fixed(s) = self.boundary {
            if s >= k {
                return Err(Error::Validation(format!("boundary state {s} is not below k={k}")));
            }
        }
        let rows = match &self.init {
            InitSpec::Random { seed, density } => {
                if !(0.0..=1.0).contains(density) {
                    return Err(Error::Validation(format!("density {density} is outside [0, 1]")));
                }
                let mut gen = BernoulliRows::new(*seed, *density);
                (0..w).map(|_| gen.next_row(self.width)).collect()
            }
            InitSpec::SingleCenter { state } => {
                if *state >= k {
                    return Err(Error::Validation(format!("seed state {state} is not below k={k}")));
                }
                let mut rows = vec![vec![0u8; self.width]; w];
                rows[w - 1][self.width / 2] = *state;
                rows
            }
            InitSpec::Explicit { rows } => {
                if rows.len() < w {
                    return Err(Error::Validation(format!(
                        "explicit init has {} rows, the rule's window needs {w}",
                        rows.len()
                    )));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != self.width {
                        return Err(Error::Validation(format!(
                            "explicit init row {i} has width {}, expected {}",
                            row.len(),
                            self.width
                        )));
                    }
                    if let Some(j) = row.iter().position(|&s| s >= k) {
                        return Err(Error::Validation(format!(
                            "explicit init cell ({i}, {j}) has state {} >= k={k}",
                            row[j]
                        )));
                    }
                }
                rows.clone()
            }
        };
        Ok(rows)
    }
}

/// Provenance carried with a grid.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMeta {
    pub rule_id: Option<String>,
    pub seed: Option<u64>,
    pub boundary: Option<Boundary>,
    /// Leading rows that were given rather than generated.
    pub init_rows: usize,
}

/// Row-major lattice of cell states. Rows are weft picks, columns warp ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGrid {
    width: usize,
    k: u8,
    cells: Vec<u8>,
    meta: GridMeta,
}

impl PatternGrid {
    pub fn new(width: usize, k: u8, cells: Vec<u8>) -> Result<Self> {
        if width == 0 {
            return Err(Error::Domain("grid width must be at least 1".into()));
        }
        if k < 2 {
            return Err(Error::Validation(format!("state count must be at least 2, got {k}")));
        }
        if cells.is_empty() || !cells.len().is_multiple_of(width) {
            return Err(Error::Validation(format!("{} cells do not form whole rows of width {width}", cells.len())));
        }
        if let Some(i) = cells.iter().position(|&s| s >= k) {
            return Err(Error::Validation(format!(
                "cell ({}, {}) has state {} >= k={k}",
                i / width,
                i % width,
                cells[i]
            )));
        }
        Ok(Self { width, k, cells, meta: GridMeta::default() })
    }

    pub fn from_rows(k: u8, rows: &[Vec<u8>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Validation(format!("row {i} has width {}, expected {width}", rows[i].len())));
        }
        Self::new(width, k, rows.concat())
    }

    pub fn with_meta(mut self, meta: GridMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.cells.len() / self.width
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, u8> {
        self.cells.chunks_exact(self.width)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = u8> + '_ {
        self.rows().map(move |r| r[col])
    }

    /// Cells of rows past the initial condition.
    pub fn generated_cells(&self) -> &[u8] {
        let start = (self.meta.init_rows * self.width).min(self.cells.len());
        &self.cells[start..]
    }

    /// Rows `start..end` as a grid with no init rows.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<PatternGrid> {
        if start >= end || end > self.height() {
            return Err(Error::Domain(format!(
                "row range {start}..{end} is empty or exceeds height {}",
                self.height()
            )));
        }
        let meta = GridMeta { init_rows: 0, ..self.meta.clone() };
        Ok(PatternGrid {
            width: self.width,
            k: self.k,
            cells: self.cells[start * self.width..end * self.width].to_vec(),
            meta,
        })
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> PatternGrid {
        let mut cells = self.cells.clone();
        cells.chunks_exact_mut(self.width).for_each(|r| r.reverse());
        PatternGrid { cells, ..self.clone() }
    }

    /// Every state `s` replaced by `k - 1 - s`.
    pub fn complemented(&self) -> PatternGrid {
        let top = self.k - 1;
        let cells = self.cells.iter().map(|&s| top - s).collect();
        PatternGrid { cells, ..self.clone() }
    }
}

impl fmt::Display for PatternGrid {
    /// One line per row; binary grids use `#` for warp-up and `.` for weft-up.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            for &s in row {
                let c = match (self.k, s) {
                    (2, 0) => '.',
                    (2, _) => '#',
                    _ => char::from_digit(s as u32, 36).unwrap_or('?'),
                };
                write!(f, "{c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Computes one row from `window` contiguous history rows (oldest first).
fn step_into(history: &[u8], width: usize, rule: &RuleSpec, boundary: Boundary, out: &mut [u8]) {
    let k = rule.k as usize;
    let r = rule.radius as isize;
    let w_rows = rule.window;
    let n = width as isize;
    for (i, slot) in out.iter_mut().enumerate() {
        let mut index = 0usize;
        for row in history.chunks_exact(width).take(w_rows) {
            for off in -r..=r {
                let j = i as isize + off;
                let cell = if (0..n).contains(&j) {
                    row[j as usize]
                } else {
                    match boundary {
                        Boundary::Wrap => row[j.rem_euclid(n) as usize],
                        Boundary::Fixed(s) => s,
                    }
                };
                index = index * k + cell as usize;
            }
        }
        *slot = rule.table[index];
    }
}

/// Next row from exactly `w` history rows, oldest first.
pub fn step<R: AsRef<[u8]>>(history: &[R], rule: &RuleSpec, boundary: Boundary) -> Result<Vec<u8>> {
    if history.len() != rule.window() {
        return Err(Error::Contract(format!(
            "step needs exactly {} history rows, got {}",
            rule.window(),
            history.len()
        )));
    }
    let width = history[0].as_ref().len();
    if width == 0 {
        return Err(Error::Domain("row width must be at least 1".into()));
    }
    if let Boundary::Fixed(s) = boundary {
        if s >= rule.k() {
            return Err(Error::Validation(format!("boundary state {s} is not below k={}", rule.k())));
        }
    }
    let mut flat = Vec::with_capacity(width * history.len());
    for (i, row) in history.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::Contract(format!("history row {i} has width {}, expected {width}", row.len())));
        }
        if row.iter().any(|&s| s >= rule.k()) {
            return Err(Error::Validation(format!("history row {i} holds a state >= k={}", rule.k())));
        }
        flat.extend_from_slice(row);
    }
    let mut out = vec![0u8; width];
    step_into(&flat, width, rule, boundary, &mut out);
    Ok(out)
}

/// Runs `rule` from the configured initial rows for `config.steps` steps.
///
/// The result holds the initial rows followed by the generated ones and is a
/// pure function of `(rule, config)`.
pub fn evolve(rule: &RuleSpec, config: &EvolutionConfig) -> Result<PatternGrid> {
    let init = config.initial_rows(rule)?;
    let width = config.width;
    let window = rule.window();
    let init_rows = init.len();
    let mut cells = Vec::with_capacity((init_rows + config.steps) * width);
    for row in &init {
        cells.extend_from_slice(row);
    }
    let mut next = vec![0u8; width];
    for _ in 0..config.steps {
        let start = cells.len() - window * width;
        step_into(&cells[start..], width, rule, config.boundary, &mut next);
        cells.extend_from_slice(&next);
    }
    let meta = GridMeta {
        rule_id: Some(rule.id().to_string()),
        seed: config.init.seed(),
        boundary: Some(config.boundary),
        init_rows,
    };
    Ok(PatternGrid::new(width, rule.k(), cells)?.with_meta(meta))
}
