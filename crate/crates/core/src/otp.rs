//! Per-wire one-time-pad cipher.
//!
//! Each protected wire consumes one 8-bit key piece k0..k7 and receives the
//! operator product
//!
//! ```text
//! σx^k0 σz^k1 · T · σx^k2 σz^k3 · T · σx^k4 σz^k5 · T · σx^k6 σz^k7
//! ```
//!
//! applied right-to-left on the ket (σx^k6 σz^k7 acts first). T is the
//! unitary (i/√3)(σx − σy + σz), which satisfies T² = −I; the three
//! interleaved copies keep the cipher from mapping Pauli tampering to Pauli
//! tampering. Decryption applies the adjoint with the same piece.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::UnitaryMatrix2;
use crate::state::StateVector;

/// Which pair of parties shares a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KeyLabel {
    AliceBob,
    TrentAlice,
    TrentBob,
}

impl std::fmt::Display for KeyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KeyLabel::AliceBob => "AB",
            KeyLabel::TrentAlice => "TA",
            KeyLabel::TrentBob => "TB",
        };
        f.write_str(s)
    }
}

/// Eight key bits driving one wire's cipher.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPiece {
    bits: [u8; 8],
}

impl KeyPiece {
    pub fn new(bits: [u8; 8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidKey("piece bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8; 8] {
        &self.bits
    }

    pub fn flip_bit(&self, k: usize) -> Self {
        let mut bits = self.bits;
        bits[k] ^= 1;
        Self { bits }
    }
}

/// A shared secret of 8 bits per protected wire, sliced into pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    label: KeyLabel,
    bits: Vec<u8>,
}

impl KeyMaterial {
    /// Draws 8 * `wires` random bits, deterministic per seed.
    pub fn generate(label: KeyLabel, wires: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..8 * wires).map(|_| u8::from(rng.gen::<bool>())).collect();
        Self { label, bits }
    }

    pub fn from_bits(label: KeyLabel, bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || !bits.len().is_multiple_of(8) {
            return Err(Error::InvalidKey(format!(
                "key length {} is not a positive multiple of 8",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidKey("key bits must be 0 or 1".into()));
        }
        Ok(Self { label, bits })
    }

    /// Parses the hex key-file form: one line of lowercase hex, two digits
    /// per piece (most significant bit is k0).
    pub fn from_hex(label: KeyLabel, text: &str) -> Result<Self> {
        let line = text.trim();
        if line.is_empty() || !line.len().is_multiple_of(2) {
            return Err(Error::InvalidKey(format!(
                "hex key must have a positive even number of digits, got {}",
                line.len()
            )));
        }
        let mut bits = Vec::with_capacity(line.len() * 4);
        for ch in line.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::InvalidKey(format!("invalid hex digit {ch:?}")))?;
            if ch.is_uppercase() {
                return Err(Error::InvalidKey("hex key must be lowercase".into()));
            }
            for k in (0..4).rev() {
                bits.push(((v >> k) & 1) as u8);
            }
        }
        Self::from_bits(label, bits)
    }

    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|nibble| {
                let v = nibble.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn label(&self) -> KeyLabel {
        self.label
    }

    pub fn bit_len(&self) -> usize {
        self.bits.len()
    }

    pub fn piece_count(&self) -> usize {
        self.bits.len() / 8
    }

    pub fn piece(&self, index: usize) -> KeyPiece {
        let mut bits = [0u8; 8];
        bits.copy_from_slice(&self.bits[8 * index..8 * index + 8]);
        KeyPiece { bits }
    }
}

/// T = (i/√3)(σx − σy + σz).
pub fn t_gate() -> UnitaryMatrix2 {
    use num_complex::Complex64;
    let s = 1.0 / 3.0f64.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let entries = [
        [i * s, i * s * Complex64::new(1.0, 1.0)],
        [i * s * Complex64::new(1.0, -1.0), -i * s],
    ];
    UnitaryMatrix2::new(entries).expect("T is unitary")
}

/// The composed per-wire cipher operator for one piece.
pub fn cipher_matrix(piece: &KeyPiece) -> UnitaryMatrix2 {
    let t = t_gate();
    let b = piece.bits;
    let mut m = pauli_power(b[0], b[1]);
    for pair in [(b[2], b[3]), (b[4], b[5]), (b[6], b[7])] {
        m = m * t * pauli_power(pair.0, pair.1);
    }
    m
}

fn pauli_power(x_exp: u8, z_exp: u8) -> UnitaryMatrix2 {
    let mut m = UnitaryMatrix2::identity();
    if x_exp == 1 {
        m = m * UnitaryMatrix2::pauli_x();
    }
    if z_exp == 1 {
        m = m * UnitaryMatrix2::pauli_z();
    }
    m
}

pub fn encrypt_wire(state: &mut StateVector, wire: usize, piece: &KeyPiece) -> Result<()> {
    state.apply_1q(wire, &cipher_matrix(piece))
}

pub fn decrypt_wire(state: &mut StateVector, wire: usize, piece: &KeyPiece) -> Result<()> {
    state.apply_1q(wire, &cipher_matrix(piece).adjoint())
}

fn check_assignment(state: &StateVector, key: &KeyMaterial, assignment: &[usize]) -> Result<()> {
    let wires = state.wire_count();
    if assignment.len() != wires {
        return Err(Error::InvalidAssignment(format!(
            "assignment covers {} wires, register has {wires}",
            assignment.len()
        )));
    }
    let mut sorted = assignment.to_vec();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &p)| p != i) {
        return Err(Error::InvalidAssignment(format!(
            "piece assignment must be a bijection onto 0..{wires}"
        )));
    }
    if key.piece_count() < wires {
        return Err(Error::InvalidKey(format!(
            "key {} has {} pieces, register needs {wires}",
            key.label(),
            key.piece_count()
        )));
    }
    Ok(())
}

/// Encrypts every wire, wire `i` with piece `assignment[i]`.
pub fn encrypt_register(
    state: &mut StateVector,
    key: &KeyMaterial,
    assignment: &[usize],
) -> Result<()> {
    check_assignment(state, key, assignment)?;
    for (wire, &piece_idx) in assignment.iter().enumerate() {
        encrypt_wire(state, wire, &key.piece(piece_idx))?;
    }
    Ok(())
}

/// Exact inverse of [`encrypt_register`] with the same key and assignment.
pub fn decrypt_register(
    state: &mut StateVector,
    key: &KeyMaterial,
    assignment: &[usize],
) -> Result<()> {
    check_assignment(state, key, assignment)?;
    for (wire, &piece_idx) in assignment.iter().enumerate() {
        decrypt_wire(state, wire, &key.piece(piece_idx))?;
    }
    Ok(())
}

/// Piece i for wire i.
pub fn identity_assignment(wires: usize) -> Vec<usize> {
    (0..wires).collect()
}
