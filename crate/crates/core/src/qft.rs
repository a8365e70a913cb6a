//! Quantum Fourier transform: definitional matrix oracle and the
//! Hadamard/controlled-phase circuit, with the terminal bit-reversal swaps
//! included so the circuit equals the matrix exactly rather than up to a
//! qubit reordering.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::UnitaryMatrix2;
use crate::state::StateVector;

/// Entry (y, x) = e^{2πi·x·y/2^m} / √(2^m), row-major.
pub fn qft_matrix(m: usize) -> Result<Vec<Vec<Complex64>>> {
    if m == 0 || m > 10 {
        return Err(Error::TransformWidthOutOfRange(m));
    }
    let dim = 1usize << m;
    let scale = 1.0 / (dim as f64).sqrt();
    let base = std::f64::consts::TAU / dim as f64;
    let mut rows = Vec::with_capacity(dim);
    for y in 0..dim {
        let mut row = Vec::with_capacity(dim);
        for x in 0..dim {
            // reduce x*y mod 2^m before the float multiply to keep phases exact
            let phase = base * ((x * y) % dim) as f64;
            row.push(Complex64::from_polar(scale, phase));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn validate_span(state: &StateVector, span: &[usize]) -> Result<()> {
    if span.is_empty() {
        return Err(Error::InvalidSpan("span is empty".into()));
    }
    let mut seen = vec![false; state.wire_count()];
    for &w in span {
        if w >= state.wire_count() {
            return Err(Error::WireOutOfRange {
                wire: w,
                wire_count: state.wire_count(),
            });
        }
        if seen[w] {
            return Err(Error::DuplicateWire(w));
        }
        seen[w] = true;
    }
    Ok(())
}

/// Runs the transform circuit over `span` (span[0] holds the most
/// significant bit of the transformed register); identity elsewhere.
pub fn apply_qft(state: &mut StateVector, span: &[usize]) -> Result<()> {
    validate_span(state, span)?;
    let m = span.len();
    let h = UnitaryMatrix2::hadamard();
    for i in 0..m {
        state.apply_1q(span[i], &h)?;
        for k in 2..=(m - i) {
            let angle = std::f64::consts::TAU / (1u64 << k) as f64;
            state.apply_controlled_phase(span[i + k - 1], span[i], angle)?;
        }
    }
    for i in 0..m / 2 {
        state.apply_swap(span[i], span[m - 1 - i])?;
    }
    Ok(())
}

/// Adjoint of [`apply_qft`]: same gates in reverse with negated phases.
pub fn apply_iqft(state: &mut StateVector, span: &[usize]) -> Result<()> {
    validate_span(state, span)?;
    let m = span.len();
    let h = UnitaryMatrix2::hadamard();
    for i in (0..m / 2).rev() {
        state.apply_swap(span[i], span[m - 1 - i])?;
    }
    for i in (0..m).rev() {
        for k in (2..=(m - i)).rev() {
            let angle = -std::f64::consts::TAU / (1u64 << k) as f64;
            state.apply_controlled_phase(span[i + k - 1], span[i], angle)?;
        }
        state.apply_1q(span[i], &h)?;
    }
    Ok(())
}

/// Max elementwise deviation between the circuit and the matrix oracle,
/// probed column by column on basis states.
pub fn circuit_oracle_deviation(m: usize) -> Result<f64> {
    let matrix = qft_matrix(m)?;
    let span: Vec<usize> = (0..m).collect();
    let dim = 1usize << m;
    let mut worst: f64 = 0.0;
    for x in 0..dim {
        let mut state = StateVector::basis_state(m, x as u64)?;
        apply_qft(&mut state, &span)?;
        for (y, row) in matrix.iter().enumerate() {
            worst = worst.max((state.amplitude(y as u64) - row[x]).norm());
        }
    }
    Ok(worst)
}
