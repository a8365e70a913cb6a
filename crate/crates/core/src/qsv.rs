//! QSV1 state-vector dump format.
//!
//! Layout: 4-byte magic `QSV1`, unsigned 32-bit little-endian wire count,
//! then 2^m (real, imaginary) pairs of little-endian 64-bit floats in
//! basis-label order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::StateVector;

const MAGIC: &[u8; 4] = b"QSV1";

pub fn to_bytes(state: &StateVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + state.dim() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(state.wire_count() as u32).to_le_bytes());
    for a in state.amplitudes() {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<StateVector> {
    if bytes.len() < 8 || &bytes[0..4] != MAGIC {
        return Err(Error::Qsv("missing QSV1 magic".into()));
    }
    let wire_count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if wire_count == 0 || wire_count > crate::state::MAX_WIRES {
        return Err(Error::Qsv(format!("unsupported wire count {wire_count}")));
    }
    let dim = 1usize << wire_count;
    let expected = 8 + dim * 16;
    if bytes.len() != expected {
        return Err(Error::Qsv(format!(
            "expected {expected} bytes for {wire_count} wires, got {}",
            bytes.len()
        )));
    }
    let mut amps = Vec::with_capacity(dim);
    for k in 0..dim {
        let off = 8 + k * 16;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Qsv(format!("non-finite amplitude at label {k}")));
        }
        amps.push(Complex64::new(re, im));
    }
    StateVector::from_amplitudes(amps)
}

pub fn write_file(state: &StateVector, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_bytes(state))?;
    Ok(())
}

pub fn read_file(path: &std::path::Path) -> Result<StateVector> {
    let bytes = std::fs::read(path)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_preserves_amplitudes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let dim = 16;
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(
                    rand::Rng::gen::<f64>(&mut rng) - 0.5,
                    rand::Rng::gen::<f64>(&mut rng) - 0.5,
                )
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        let state = StateVector::from_amplitudes(amps).unwrap();
        let back = from_bytes(&to_bytes(&state)).unwrap();
        assert_eq!(state, back);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let state = StateVector::basis_state(2, 1).unwrap();
        let mut bytes = to_bytes(&state);
        bytes[0] = b'X';
        assert!(from_bytes(&bytes).is_err());

        let bytes = to_bytes(&state);
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
