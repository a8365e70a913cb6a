//! Pixel-exact quantum image codec.
//!
//! A 2^n x 2^n image with q-bit pixels becomes a uniform superposition over
//! one basis state per pixel, labelled color‖Y‖X with the color's most
//! significant bit on wire 0. Two readouts exist: `decode_exact` inspects
//! amplitudes directly (simulation-only) and `retrieve_sampled` draws
//! measurement shots, which can leave positions unobserved but never reports
//! a wrong color.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{StateVector, MAX_WIRES};

/// Amplitude tolerance for classifying a state as a valid pixel encoding.
const AMP_TOL: f64 = 1e-6;

/// Square grayscale image with power-of-two side 2^n and q-bit pixels,
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayscaleImage {
    n: usize,
    q: usize,
    pixels: Vec<u16>,
}

impl GrayscaleImage {
    pub fn new(n: usize, q: usize, pixels: Vec<u16>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidImage("side exponent n must be >= 1".into()));
        }
        if q == 0 || q > 14 {
            return Err(Error::InvalidImage(format!(
                "bit depth q={q} outside supported range 1..=14"
            )));
        }
        let side = 1usize << n;
        if pixels.len() != side * side {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for a {side}x{side} image, got {}",
                side * side,
                pixels.len()
            )));
        }
        let max = (1u32 << q) - 1;
        if let Some(bad) = pixels.iter().find(|&&p| u32::from(p) > max) {
            return Err(Error::InvalidImage(format!(
                "pixel value {bad} exceeds 2^{q} - 1"
            )));
        }
        Ok(Self { n, q, pixels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn max_value(&self) -> u16 {
        ((1u32 << self.q) - 1) as u16
    }

    pub fn pixel(&self, y: usize, x: usize) -> u16 {
        self.pixels[y * self.side() + x]
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    /// Returns a copy with one pixel replaced.
    pub fn with_pixel(&self, y: usize, x: usize, value: u16) -> Result<Self> {
        let mut pixels = self.pixels.clone();
        pixels[y * self.side() + x] = value;
        Self::new(self.n, self.q, pixels)
    }

    pub fn layout(&self) -> NeqrLayout {
        NeqrLayout::new(self.n, self.q)
    }
}

/// Wire layout of an encoded image: color wires first, then Y, then X.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeqrLayout {
    n: usize,
    q: usize,
}

impl NeqrLayout {
    pub fn new(n: usize, q: usize) -> Self {
        Self { n, q }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn color_wires(&self) -> std::ops::Range<usize> {
        0..self.q
    }

    pub fn y_wires(&self) -> std::ops::Range<usize> {
        self.q..self.q + self.n
    }

    pub fn x_wires(&self) -> std::ops::Range<usize> {
        self.q + self.n..self.q + 2 * self.n
    }

    pub fn total_wires(&self) -> usize {
        self.q + 2 * self.n
    }

    fn label(&self, color: u64, y: u64, x: u64) -> u64 {
        (color << (2 * self.n)) | (y << self.n) | x
    }

    fn split(&self, label: u64) -> (u64, u64, u64) {
        let pos_mask = (1u64 << self.n) - 1;
        (label >> (2 * self.n), (label >> self.n) & pos_mask, label & pos_mask)
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.wire_count() != self.total_wires() {
            return Err(Error::WireCountMismatch {
                left: state.wire_count(),
                right: self.total_wires(),
            });
        }
        Ok(())
    }
}

/// Encodes an image as its pixel-basis superposition: amplitude 2^-n on
/// label color‖Y‖X for every pixel.
pub fn encode(image: &GrayscaleImage) -> Result<StateVector> {
    let layout = image.layout();
    let wires = layout.total_wires();
    if wires > MAX_WIRES {
        return Err(Error::UnsupportedWireCount(wires));
    }
    let side = image.side() as u64;
    let amp = 1.0 / side as f64;
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << wires];
    for y in 0..side {
        for x in 0..side {
            let color = u64::from(image.pixel(y as usize, x as usize));
            amps[layout.label(color, y, x) as usize] = num_complex::Complex64::new(amp, 0.0);
        }
    }
    StateVector::from_amplitudes(amps)
}

/// Reads the image straight out of the amplitudes. Requires exactly one
/// color per position with magnitude 2^-n within tolerance.
pub fn decode_exact(state: &StateVector, layout: &NeqrLayout) -> Result<GrayscaleImage> {
    layout.check_state(state)?;
    let side = 1usize << layout.n;
    let expected = 1.0 / side as f64;
    let mut colors: Vec<Vec<(u64, f64)>> = vec![Vec::new(); side * side];
    for (label, amp) in state.amplitudes().iter().enumerate() {
        let mag = amp.norm();
        if mag <= AMP_TOL {
            continue;
        }
        let (color, y, x) = layout.split(label as u64);
        colors[y as usize * side + x as usize].push((color, mag));
    }
    // structural pass: every position present, exactly one color each
    for (idx, found) in colors.iter().enumerate() {
        let (y, x) = (idx / side, idx % side);
        match found.as_slice() {
            [] => {
                return Err(Error::MalformedNeqrState {
                    y,
                    x,
                    reason: "position carries no amplitude".into(),
                })
            }
            [_] => {}
            [(a, _), (b, _), ..] => {
                return Err(Error::MalformedNeqrState {
                    y,
                    x,
                    reason: format!("two colors present ({a} and {b})"),
                })
            }
        }
    }
    // magnitude pass: uniform weight 2^-n per position
    let mut out = Vec::with_capacity(side * side);
    for (idx, found) in colors.iter().enumerate() {
        let (color, mag) = found[0];
        if (mag - expected).abs() > AMP_TOL {
            return Err(Error::MalformedNeqrState {
                y: idx / side,
                x: idx % side,
                reason: format!("amplitude magnitude {mag} differs from {expected}"),
            });
        }
        out.push(color as u16);
    }
    GrayscaleImage::new(layout.n, layout.q, out)
}

/// Shot-based readout: observed positions carry their exact color,
/// unobserved positions stay `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledImage {
    n: usize,
    q: usize,
    pixels: Vec<Option<u16>>,
}

impl SampledImage {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn pixel(&self, y: usize, x: usize) -> Option<u16> {
        self.pixels[y * self.side() + x]
    }

    pub fn pixels(&self) -> &[Option<u16>] {
        &self.pixels
    }

    /// Fraction of positions observed at least once.
    pub fn coverage(&self) -> f64 {
        let seen = self.pixels.iter().filter(|p| p.is_some()).count();
        seen as f64 / self.pixels.len() as f64
    }

    /// Converts to a complete image; fails unless coverage is 1.0.
    pub fn to_complete(&self) -> Result<GrayscaleImage> {
        let pixels: Option<Vec<u16>> = self.pixels.iter().copied().collect();
        match pixels {
            Some(p) => GrayscaleImage::new(self.n, self.q, p),
            None => Err(Error::InvalidImage(
                "sampled image has unobserved positions".into(),
            )),
        }
    }
}

/// Measures `shots` times and assembles the observed pixels.
pub fn retrieve_sampled(
    state: &StateVector,
    layout: &NeqrLayout,
    shots: u64,
    seed: u64,
) -> Result<SampledImage> {
    layout.check_state(state)?;
    let counts = state.sample(shots, seed)?;
    let side = 1usize << layout.n;
    let max_color = (1u64 << layout.q) - 1;
    let mut pixels: Vec<Option<u16>> = vec![None; side * side];
    for label in counts.keys() {
        let (color, y, x) = layout.split(*label);
        let (y, x) = (y as usize, x as usize);
        if color > max_color {
            return Err(Error::MalformedNeqrState {
                y,
                x,
                reason: format!("sampled color {color} exceeds bit depth"),
            });
        }
        let slot = &mut pixels[y * side + x];
        match slot {
            None => *slot = Some(color as u16),
            Some(prev) if u64::from(*prev) == color => {}
            Some(prev) => {
                return Err(Error::MalformedNeqrState {
                    y,
                    x,
                    reason: format!("two colors observed ({prev} and {color})"),
                })
            }
        }
    }
    Ok(SampledImage {
        n: layout.n,
        q: layout.q,
        pixels,
    })
}
