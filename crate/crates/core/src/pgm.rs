//! ASCII PGM ("P2") ingestion and emission, restricted to the square
//! power-of-two shapes the codec accepts: width = height = 2^n and
//! maxval = 2^q - 1.

use crate::error::{Error, Result};
use crate::neqr::{GrayscaleImage, SampledImage};

/// Parses a P2 file. `#` starts a comment that runs to end of line.
pub fn parse(text: &str) -> Result<GrayscaleImage> {
    let mut tokens = tokens(text);
    let magic = tokens.next().ok_or_else(|| Error::Pgm("empty file".into()))?;
    if magic != "P2" {
        return Err(Error::Pgm(format!("expected magic P2, got {magic:?}")));
    }
    let width = next_number(&mut tokens, "width")?;
    let height = next_number(&mut tokens, "height")?;
    let maxval = next_number(&mut tokens, "maxval")?;

    if width != height {
        return Err(Error::Pgm(format!(
            "dimensions must be 2^n by 2^n (square), got {width}x{height}"
        )));
    }
    if width < 2 || !width.is_power_of_two() {
        return Err(Error::Pgm(format!(
            "dimensions must be 2^n with n >= 1, got {width}x{height}"
        )));
    }
    if maxval == 0 || !(maxval + 1).is_power_of_two() {
        return Err(Error::Pgm(format!(
            "maxval must be 2^q - 1 with q >= 1, got {maxval}"
        )));
    }
    let n = width.trailing_zeros() as usize;
    let q = (maxval + 1).trailing_zeros() as usize;
    if q > 14 {
        return Err(Error::Pgm(format!("maxval {maxval} exceeds the supported bit depth")));
    }

    let mut pixels = Vec::with_capacity(width * height);
    for i in 0..width * height {
        let v = next_number(&mut tokens, "pixel")?;
        if v > maxval {
            return Err(Error::Pgm(format!(
                "pixel {i} has value {v} above maxval {maxval}"
            )));
        }
        pixels.push(v as u16);
    }
    if tokens.next().is_some() {
        return Err(Error::Pgm("trailing data after pixel raster".into()));
    }
    GrayscaleImage::new(n, q, pixels).map_err(|e| Error::Pgm(e.to_string()))
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split_whitespace())
}

fn next_number<'a>(tokens: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<usize> {
    let tok = tokens
        .next()
        .ok_or_else(|| Error::Pgm(format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| Error::Pgm(format!("invalid {what} {tok:?}")))
}

pub fn write(image: &GrayscaleImage) -> String {
    let side = image.side();
    let mut out = format!("P2\n{side} {side}\n{}\n", image.max_value());
    for y in 0..side {
        let row: Vec<String> = (0..side).map(|x| image.pixel(y, x).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Emits a sampled image as (pgm, mask). Unobserved pixels are written as 0
/// in the raster and flagged 0 in the mask; the mask holds one `0`/`1` per
/// pixel, row-major, newline-separated.
pub fn write_masked(image: &SampledImage) -> (String, String) {
    let side = image.side();
    let maxval = (1u32 << image.q()) - 1;
    let mut pgm = format!("P2\n{side} {side}\n{maxval}\n");
    let mut mask = String::new();
    for y in 0..side {
        let row: Vec<String> = (0..side)
            .map(|x| image.pixel(y, x).unwrap_or(0).to_string())
            .collect();
        pgm.push_str(&row.join(" "));
        pgm.push('\n');
        for x in 0..side {
            mask.push(if image.pixel(y, x).is_some() { '1' } else { '0' });
            mask.push('\n');
        }
    }
    (pgm, mask)
}

pub fn read_file(path: &std::path::Path) -> Result<GrayscaleImage> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

pub fn write_file(image: &GrayscaleImage, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, write(image))?;
    Ok(())
}
