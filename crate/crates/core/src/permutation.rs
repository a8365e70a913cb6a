//! Wire permutations: seeded generation, computational-basis encoding for
//! quantum transfer, and the SWAP-network reorder plus its inverse.
//!
//! The quantum encoding stores the entries as N fixed-width chunks of
//! w = ceil(log2 N) wires each, chunk i holding the 0-based destination of
//! wire i. The chunks are kept as separate small registers: every transfer
//! operation (cipher, tamper, measurement) is single-wire, so the joint
//! state never entangles across chunks and the factored form is exact while
//! staying tractable for wide registers. `to_state_vector` materializes the
//! dense product when the total width permits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::UnitaryMatrix2;
use crate::otp::KeyMaterial;
use crate::state::{StateVector, MAX_WIRES};

/// Bijection on wire indices 0..N-1; `mapping[i]` is where wire i's content
/// goes under [`reorder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("size must be at least 1".into()));
        }
        let mut seen = vec![false; n];
        for &v in &mapping {
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "entry {v} out of range for size {n}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("entry {v} repeats")));
            }
            seen[v] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    /// Uniformly random permutation, deterministic per seed.
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation("size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mapping: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            mapping.swap(i, j);
        }
        Ok(Self { mapping })
    }

    pub fn size(&self) -> usize {
        self.mapping.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &v) in self.mapping.iter().enumerate() {
            inv[v] = i;
        }
        Self { mapping: inv }
    }

    /// Composition: applying `self` then `other` equals applying
    /// `other.compose(self)`.
    pub fn compose(&self, inner: &Permutation) -> Result<Self> {
        if self.size() != inner.size() {
            return Err(Error::InvalidPermutation(format!(
                "cannot compose sizes {} and {}",
                self.size(),
                inner.size()
            )));
        }
        let mapping = (0..self.size()).map(|i| self.apply(inner.apply(i))).collect();
        Ok(Self { mapping })
    }

    /// Bits per encoded entry: ceil(log2 N), at least 1.
    pub fn entry_width(&self) -> usize {
        entry_width(self.size())
    }

    /// Cycle decomposition, fixed points omitted.
    fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] || self.mapping[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut next = self.mapping[start];
            while next != start {
                cycle.push(next);
                seen[next] = true;
                next = self.mapping[next];
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// One line of space-separated 1-based destinations, e.g. `3 1 2`.
    pub fn to_line(&self) -> String {
        self.mapping
            .iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let values: Result<Vec<usize>> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| {
                    Error::InvalidPermutation(format!("invalid entry {tok:?}"))
                })
            })
            .collect();
        let values = values?;
        if values.contains(&0) {
            return Err(Error::InvalidPermutation(
                "entries are 1-based and must be positive".into(),
            ));
        }
        Self::from_mapping(values.into_iter().map(|v| v - 1).collect())
    }
}

pub fn entry_width(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Moves wire i's content to wire `p.apply(i)` via the SWAP network from the
/// cycle decomposition.
pub fn reorder(state: &mut StateVector, p: &Permutation) -> Result<()> {
    check_size(state, p)?;
    for cycle in p.cycles() {
        for j in (0..cycle.len() - 1).rev() {
            state.apply_swap(cycle[j], cycle[j + 1])?;
        }
    }
    Ok(())
}

/// Exact inverse of [`reorder`] with the same permutation.
pub fn inverse_reorder(state: &mut StateVector, p: &Permutation) -> Result<()> {
    check_size(state, p)?;
    for cycle in p.cycles() {
        for j in 0..cycle.len() - 1 {
            state.apply_swap(cycle[j], cycle[j + 1])?;
        }
    }
    Ok(())
}

fn check_size(state: &StateVector, p: &Permutation) -> Result<()> {
    if state.wire_count() != p.size() {
        return Err(Error::WireCountMismatch {
            left: state.wire_count(),
            right: p.size(),
        });
    }
    Ok(())
}

/// Quantum register carrying an encoded permutation: one w-wire chunk per
/// entry. Honest content is a computational basis state per chunk;
/// encryption drives the chunks through arbitrary product states, and
/// [`decode_state`] is the validator that demands basis form back.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPermutation {
    entry_width: usize,
    chunks: Vec<StateVector>,
}

impl EncodedPermutation {
    pub fn entry_count(&self) -> usize {
        self.chunks.len()
    }

    pub fn entry_width(&self) -> usize {
        self.entry_width
    }

    pub fn total_wires(&self) -> usize {
        self.entry_width * self.chunks.len()
    }

    pub fn chunks(&self) -> &[StateVector] {
        &self.chunks
    }

    /// Dense product state of all chunks, chunk 0 on the high wires.
    /// Only available while the total width fits the simulator cap.
    pub fn to_state_vector(&self) -> Result<StateVector> {
        if self.total_wires() > MAX_WIRES {
            return Err(Error::UnsupportedWireCount(self.total_wires()));
        }
        let mut dense = self.chunks[0].clone();
        for chunk in &self.chunks[1..] {
            dense = dense.tensor(chunk)?;
        }
        Ok(dense)
    }

    /// Splits a dense register back into per-entry chunks; the register must
    /// be a computational basis state.
    pub fn from_state_vector(state: &StateVector, entries: usize) -> Result<Self> {
        if entries == 0 || !state.wire_count().is_multiple_of(entries) {
            return Err(Error::MalformedPermutation(format!(
                "{} wires do not split into {entries} chunks",
                state.wire_count()
            )));
        }
        let width = state.wire_count() / entries;
        let label = basis_label(state).ok_or_else(|| {
            Error::MalformedPermutation("register is not a computational basis state".into())
        })?;
        let mut chunks = Vec::with_capacity(entries);
        for i in 0..entries {
            let shift = width * (entries - 1 - i);
            let value = (label >> shift) & ((1u64 << width) - 1);
            chunks.push(StateVector::basis_state(width, value)?);
        }
        Ok(Self {
            entry_width: width,
            chunks,
        })
    }

    /// Applies a single-qubit unitary addressed by global wire index
    /// (chunk i owns wires i*w .. (i+1)*w).
    pub fn apply_1q(&mut self, global_wire: usize, u: &UnitaryMatrix2) -> Result<()> {
        if global_wire >= self.total_wires() {
            return Err(Error::WireOutOfRange {
                wire: global_wire,
                wire_count: self.total_wires(),
            });
        }
        let chunk = global_wire / self.entry_width;
        self.chunks[chunk].apply_1q(global_wire % self.entry_width, u)
    }

    /// Per-wire cipher over the whole register, piece i on global wire i.
    pub fn encrypt(&mut self, key: &KeyMaterial) -> Result<()> {
        self.cipher(key, false)
    }

    pub fn decrypt(&mut self, key: &KeyMaterial) -> Result<()> {
        self.cipher(key, true)
    }

    fn cipher(&mut self, key: &KeyMaterial, invert: bool) -> Result<()> {
        let wires = self.total_wires();
        if key.piece_count() < wires {
            return Err(Error::InvalidKey(format!(
                "key {} has {} pieces, permutation register needs {wires}",
                key.label(),
                key.piece_count()
            )));
        }
        for g in 0..wires {
            let m = crate::otp::cipher_matrix(&key.piece(g));
            let m = if invert { m.adjoint() } else { m };
            let w = self.entry_width;
            self.chunks[g / w].apply_1q(g % w, &m)?;
        }
        Ok(())
    }
}

/// Extracts the label of a basis state, tolerating numeric drift and a
/// global phase; `None` when any weight sits off the dominant label.
fn basis_label(state: &StateVector) -> Option<u64> {
    const TOL: f64 = 1e-6;
    let mut label = None;
    for (k, amp) in state.amplitudes().iter().enumerate() {
        let mag = amp.norm();
        if mag > TOL {
            if (mag - 1.0).abs() > TOL || label.is_some() {
                return None;
            }
            label = Some(k as u64);
        }
    }
    label
}

/// Encodes the permutation as chunked basis states (Eq-style tensor of the
/// 0-based entries).
pub fn encode_state(p: &Permutation) -> Result<EncodedPermutation> {
    let width = p.entry_width();
    let chunks: Result<Vec<StateVector>> = p
        .mapping()
        .iter()
        .map(|&v| StateVector::basis_state(width, v as u64))
        .collect();
    Ok(EncodedPermutation {
        entry_width: width,
        chunks: chunks?,
    })
}

/// Reads the permutation back out; every chunk must be a basis state and the
/// decoded entries must form a bijection.
pub fn decode_state(e: &EncodedPermutation) -> Result<Permutation> {
    let n = e.entry_count();
    let mut mapping = Vec::with_capacity(n);
    for (i, chunk) in e.chunks.iter().enumerate() {
        let value = basis_label(chunk).ok_or_else(|| {
            Error::MalformedPermutation(format!("chunk {i} is not a computational basis state"))
        })?;
        if value as usize >= n {
            return Err(Error::MalformedPermutation(format!(
                "chunk {i} decodes to {value}, out of range for size {n}"
            )));
        }
        mapping.push(value as usize);
    }
    Permutation::from_mapping(mapping)
        .map_err(|e| Error::MalformedPermutation(format!("decoded entries are not a bijection: {e}")))
}
