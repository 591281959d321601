//! WIF 1.1 subset: liftplan drafts with warp and weft colors.
//!
//! Written with LF line endings and 1-based indices. The reader accepts CRLF,
//! `;` comments, any key or section case, and ignores sections it does not
//! use.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::draft::{LoomDraft, Rgb};
use crate::error::{Error, Result};

fn wif_err(msg: impl Into<String>) -> Error {
    Error::Wif(msg.into())
}

pub fn export_wif(draft: &LoomDraft) -> Vec<u8> {
    let dd = draft.drawdown();
    let mut s = String::new();
    let mut line = |text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line("[WIF]".into());
    line("Version=1.1".into());
    line("Date=April 20, 1997".into());
    line("Developers=wif@mhsoft.com".into());
    line(format!("Source Program=tenun {}", env!("CARGO_PKG_VERSION")));
    line(String::new());
    line("[CONTENTS]".into());
    for section in [
        "COLOR PALETTE",
        "WEAVING",
        "WARP",
        "WEFT",
        "COLOR TABLE",
        "THREADING",
        "LIFTPLAN",
        "WARP COLORS",
        "WEFT COLORS",
    ] {
        line(format!("{section}=true"));
    }
    line(String::new());
    line("[COLOR PALETTE]".into());
    line(format!("Entries={}", dd.palette().len()));
    line("Range=0,255".into());
    line("Form=RGB".into());
    line(String::new());
    line("[WEAVING]".into());
    line(format!("Shafts={}", draft.shaft_count()));
    line("Treadles=0".into());
    line("Rising Shed=true".into());
    line(String::new());
    line("[WARP]".into());
    line(format!("Threads={}", dd.ends()));
    line(format!("Color={}", dd.warp_colors()[0] + 1));
    line(String::new());
    line("[WEFT]".into());
    line(format!("Threads={}", dd.picks()));
    line(format!("Color={}", dd.weft_colors()[0] + 1));
    line(String::new());
    line("[COLOR TABLE]".into());
    for (i, Rgb([r, g, b])) in dd.palette().iter().enumerate() {
        line(format!("{}={r},{g},{b}", i + 1));
    }
    line(String::new());
    line("[THREADING]".into());
    for (end, shaft) in draft.threading().iter().enumerate() {
        line(format!("{}={}", end + 1, shaft + 1));
    }
    line(String::new());
    line("[LIFTPLAN]".into());
    for (pick, lifted) in draft.liftplan().iter().enumerate() {
        if lifted.is_empty() {
            continue;
        }
        let mut entry = format!("{}=", pick + 1);
        for (i, shaft) in lifted.iter().enumerate() {
            if i > 0 {
                entry.push(',');
            }
            let _ = write!(entry, "{}", shaft + 1);
        }
        line(entry);
    }
    line(String::new());
    line("[WARP COLORS]".into());
    for (end, c) in dd.warp_colors().iter().enumerate() {
        line(format!("{}={}", end + 1, c + 1));
    }
    line(String::new());
    line("[WEFT COLORS]".into());
    for (pick, c) in dd.weft_colors().iter().enumerate() {
        line(format!("{}={}", pick + 1, c + 1));
    }
    s.into_bytes()
}

type Section = Vec<(String, String)>;

fn split_sections(text: &str) -> Result<HashMap<String, Section>> {
    let mut sections: HashMap<String, Section> = HashMap::new();
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| wif_err(format!("line {}: unterminated section header", n + 1)))?;
            let name = name.trim().to_ascii_uppercase();
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some(section) = &current else {
            return Err(wif_err(format!("line {}: entry outside any section", n + 1)));
        };
        let (key, value) =
            line.split_once('=').ok_or_else(|| wif_err(format!("line {}: expected key=value", n + 1)))?;
        // Trailing `;` comments are allowed on values.
        let value = value.split(';').next().unwrap_or("").trim();
        sections
            .get_mut(section)
            .expect("section registered")
            .push((key.trim().to_ascii_lowercase(), value.to_string()));
    }
    Ok(sections)
}

fn section<'a>(sections: &'a HashMap<String, Section>, name: &str) -> Result<&'a Section> {
    sections.get(name).ok_or_else(|| wif_err(format!("missing mandatory section [{name}]")))
}

fn lookup<'a>(sec: &'a Section, key: &str) -> Option<&'a str> {
    sec.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn number(value: &str, what: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| wif_err(format!("{what}: `{value}` is not a number")))
}

/// `index=value` entries of a 1-based indexed section.
fn indexed<'a>(sec: &'a Section, name: &str, len: usize) -> Result<Vec<(usize, &'a str)>> {
    sec.iter()
        .map(|(k, v)| {
            let i = number(k, name)?;
            if i == 0 || i > len {
                return Err(wif_err(format!("[{name}] index {i} is outside 1..={len}")));
            }
            Ok((i - 1, v.as_str()))
        })
        .collect()
}

pub fn parse_wif(bytes: &[u8]) -> Result<LoomDraft> {
    let text = std::str::from_utf8(bytes).map_err(|e| wif_err(format!("not UTF-8: {e}")))?;
    let sections = split_sections(text)?;
    section(&sections, "WIF")?;

    let weaving = section(&sections, "WEAVING")?;
    let shafts = number(lookup(weaving, "shafts").ok_or_else(|| wif_err("[WEAVING] lacks Shafts"))?, "Shafts")?;
    if let Some(rising) = lookup(weaving, "rising shed") {
        if !matches!(rising.to_ascii_lowercase().as_str(), "true" | "yes" | "on" | "1") {
            return Err(Error::Unsupported("sinking-shed WIF drafts".into()));
        }
    }
    let warp = section(&sections, "WARP")?;
    let weft = section(&sections, "WEFT")?;
    let ends = number(lookup(warp, "threads").ok_or_else(|| wif_err("[WARP] lacks Threads"))?, "Threads")?;
    let picks = number(lookup(weft, "threads").ok_or_else(|| wif_err("[WEFT] lacks Threads"))?, "Threads")?;

    let mut threading = vec![None; ends];
    for (end, v) in indexed(section(&sections, "THREADING")?, "THREADING", ends)? {
        // Multi-shaft threading is not part of our subset; take the first.
        let first = v.split(',').next().unwrap_or("");
        let shaft = number(first, "THREADING")?;
        if shaft == 0 || shaft > shafts {
            return Err(Error::Validation(format!("end {} is threaded on shaft {shaft} but Shafts={shafts}", end + 1)));
        }
        threading[end] = Some(shaft - 1);
    }
    let threading = threading
        .into_iter()
        .enumerate()
        .map(|(e, s)| s.ok_or_else(|| wif_err(format!("end {} has no threading", e + 1))))
        .collect::<Result<Vec<_>>>()?;

    let mut liftplan = vec![Vec::new(); picks];
    for (pick, v) in indexed(section(&sections, "LIFTPLAN")?, "LIFTPLAN", picks)? {
        for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let shaft = number(part, "LIFTPLAN")?;
            if shaft == 0 || shaft > shafts {
                return Err(Error::Validation(format!("pick {} lifts shaft {shaft} but Shafts={shafts}", pick + 1)));
            }
            liftplan[pick].push(shaft - 1);
        }
    }

    let palette = parse_palette(&sections)?;
    let default_color = |sec: &Section, fallback: usize| -> Result<usize> {
        match lookup(sec, "color") {
            Some(v) => Ok(number(v, "Color")?.saturating_sub(1)),
            None => Ok(fallback),
        }
    };
    let warp_colors = per_thread_colors(&sections, "WARP COLORS", ends, default_color(warp, 0)?)?;
    let weft_colors =
        per_thread_colors(&sections, "WEFT COLORS", picks, default_color(weft, 1.min(palette.len() - 1))?)?;
    LoomDraft::from_parts(shafts, threading, liftplan, warp_colors, weft_colors, palette)
}

fn parse_palette(sections: &HashMap<String, Section>) -> Result<Vec<Rgb>> {
    let Some(table) = sections.get("COLOR TABLE") else {
        return Ok(crate::draft::default_palette());
    };
    let range_max = sections
        .get("COLOR PALETTE")
        .and_then(|p| lookup(p, "range"))
        .and_then(|r| r.split(',').nth(1))
        .map(|m| number(m, "Range"))
        .transpose()?
        .unwrap_or(255);
    if range_max == 0 {
        return Err(wif_err("color range maximum is 0"));
    }
    let len = table.len();
    let mut palette = vec![None; len];
    for (i, v) in indexed(table, "COLOR TABLE", len)? {
        let channels: Vec<usize> = v.split(',').map(|c| number(c, "COLOR TABLE")).collect::<Result<_>>()?;
        let [r, g, b] = channels[..] else {
            return Err(wif_err(format!("color {} needs three channels", i + 1)));
        };
        let scale = |c: usize| ((c.min(range_max) * 255 + range_max / 2) / range_max) as u8;
        palette[i] = Some(Rgb::new(scale(r), scale(g), scale(b)));
    }
    palette
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| wif_err(format!("color table lacks entry {}", i + 1))))
        .collect()
}

fn per_thread_colors(
    sections: &HashMap<String, Section>,
    name: &str,
    len: usize,
    fallback: usize,
) -> Result<Vec<usize>> {
    let mut colors = vec![fallback; len];
    if let Some(sec) = sections.get(name) {
        for (i, v) in indexed(sec, name, len)? {
            let c = number(v, name)?;
            if c == 0 {
                return Err(wif_err(format!("[{name}] entry {} uses color 0", i + 1)));
            }
            colors[i] = c - 1;
        }
    }
    Ok(colors)
}
