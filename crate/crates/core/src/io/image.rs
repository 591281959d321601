//! PBM and PNG writers.

use crate::automata::PatternGrid;
use crate::draft::RgbImage;
use crate::error::{Error, Result};

/// Plain PBM (P1), one grid row per line; warp-up cells are black (`1`).
pub fn export_pbm(grid: &PatternGrid) -> Result<Vec<u8>> {
    if grid.k() != 2 {
        return Err(Error::Unsupported(format!("PBM holds binary grids, got k={}", grid.k())));
    }
    let mut out = format!("P1\n{} {}\n", grid.width(), grid.height()).into_bytes();
    for row in grid.rows() {
        for (i, &s) in row.iter().enumerate() {
            if i > 0 {
                out.push(b' ');
            }
            out.push(b'0' + s);
        }
        out.push(b'\n');
    }
    Ok(out)
}

/// 8-bit RGB PNG with fixed encoder settings, so equal images give equal
/// bytes.
pub fn export_png(image: &RgbImage) -> Result<Vec<u8>> {
    if image.width() == 0 || image.height() == 0 {
        return Err(Error::Validation("cannot encode a zero-dimension image".into()));
    }
    let (w, h) = (
        u32::try_from(image.width()).map_err(|_| Error::Validation("image too wide".into()))?,
        u32::try_from(image.height()).map_err(|_| Error::Validation("image too tall".into()))?,
    );
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, w, h);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_compression(png::Compression::Balanced);
    encoder.set_filter(png::Filter::NoFilter);
    let mut writer = encoder.write_header().map_err(|e| Error::Validation(format!("PNG encoder: {e}")))?;
    writer.write_image_data(image.pixels()).map_err(|e| Error::Validation(format!("PNG encoder: {e}")))?;
    writer.finish().map_err(|e| Error::Validation(format!("PNG encoder: {e}")))?;
    Ok(out)
}
