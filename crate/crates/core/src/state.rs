//! Dense state-vector register with wire-indexed gate application.
//!
//! Wire 0 is the most significant bit of a basis-state label: a register of
//! `m` wires holds 2^m amplitudes indexed by label, and wire `w` owns bit
//! `m - 1 - w` of the label. Gates mutate the register in place behind
//! `&mut self`, which gives the exclusive-access guarantee callers rely on;
//! comparisons that must ignore global phase go through
//! [`StateVector::fidelity`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::UnitaryMatrix2;

/// Hard cap on register width; 2^20 amplitudes is the largest register the
/// simulator will allocate.
pub const MAX_WIRES: usize = 20;

/// Norm drift allowed after any sequence of gate applications.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    wire_count: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state |label⟩ on `wire_count` wires.
    pub fn basis_state(wire_count: usize, label: u64) -> Result<Self> {
        check_wire_count(wire_count)?;
        let dim = 1usize << wire_count;
        if label >= dim as u64 {
            return Err(Error::LabelOutOfRange { label, wire_count });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[label as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { wire_count, amps })
    }

    /// Wraps an amplitude vector, requiring a power-of-two length and unit
    /// norm within 1e-6.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Qsv(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let wire_count = dim.trailing_zeros() as usize;
        check_wire_count(wire_count)?;
        let state = Self { wire_count, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    pub fn wire_count(&self) -> usize {
        self.wire_count
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, label: u64) -> Complex64 {
        self.amps[label as usize]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_wire(&self, wire: usize) -> Result<()> {
        if wire >= self.wire_count {
            return Err(Error::WireOutOfRange {
                wire,
                wire_count: self.wire_count,
            });
        }
        Ok(())
    }

    /// Label bit mask owned by `wire` under the big-endian convention.
    fn mask(&self, wire: usize) -> usize {
        1usize << (self.wire_count - 1 - wire)
    }

    /// Applies a single-qubit unitary to the addressed wire.
    pub fn apply_1q(&mut self, wire: usize, u: &UnitaryMatrix2) -> Result<()> {
        self.check_wire(wire)?;
        let mask = self.mask(wire);
        let e = u.entries();
        for i0 in 0..self.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amps[i0];
            let a1 = self.amps[i1];
            self.amps[i0] = e[0][0] * a0 + e[0][1] * a1;
            self.amps[i1] = e[1][0] * a0 + e[1][1] * a1;
        }
        Ok(())
    }

    /// Phases every basis state whose `control` and `target` bits are both 1
    /// by e^{i angle}.
    pub fn apply_controlled_phase(
        &mut self,
        control: usize,
        target: usize,
        angle: f64,
    ) -> Result<()> {
        self.check_wire(control)?;
        self.check_wire(target)?;
        if control == target {
            return Err(Error::DuplicateWire(control));
        }
        let both = self.mask(control) | self.mask(target);
        let factor = Complex64::from_polar(1.0, angle);
        for (label, amp) in self.amps.iter_mut().enumerate() {
            if label & both == both {
                *amp *= factor;
            }
        }
        Ok(())
    }

    /// Exchanges bits `a` and `b` of every basis label.
    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_wire(a)?;
        self.check_wire(b)?;
        if a == b {
            return Err(Error::DuplicateWire(a));
        }
        let ma = self.mask(a);
        let mb = self.mask(b);
        for label in 0..self.amps.len() {
            // visit each crossing pair once, from the (a=1, b=0) side
            if label & ma != 0 && label & mb == 0 {
                let partner = label ^ (ma | mb);
                self.amps.swap(label, partner);
            }
        }
        Ok(())
    }

    /// |⟨self|other⟩|²; insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if self.wire_count != other.wire_count {
            return Err(Error::WireCountMismatch {
                left: self.wire_count,
                right: other.wire_count,
            });
        }
        let inner: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(inner.norm_sqr())
    }

    /// Max elementwise amplitude deviation from `other`.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        if self.wire_count != other.wire_count {
            return Err(Error::WireCountMismatch {
                left: self.wire_count,
                right: other.wire_count,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Draws `shots` computational-basis measurements, deterministic per
    /// seed, and returns label -> count.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<u64, u64>> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let r: f64 = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= r).min(self.amps.len() - 1);
            *counts.entry(idx as u64).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Tensor product `self ⊗ other` (self supplies the high label bits).
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let wire_count = self.wire_count + other.wire_count;
        check_wire_count(wire_count)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { wire_count, amps })
    }
}

fn check_wire_count(wire_count: usize) -> Result<()> {
    if wire_count == 0 || wire_count > MAX_WIRES {
        return Err(Error::UnsupportedWireCount(wire_count));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::UnitaryMatrix2 as U;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    pub(crate) fn random_state(wires: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let dim = 1usize << wires;
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn basis_state_examples() {
        let s = StateVector::basis_state(1, 0).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);

        let s = StateVector::basis_state(2, 3).unwrap();
        assert_eq!(s.amplitude(3), Complex64::new(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);

        let s = StateVector::basis_state(3, 5).unwrap();
        assert_eq!(s.amplitude(5), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn basis_state_label_out_of_range() {
        assert!(matches!(
            StateVector::basis_state(2, 4),
            Err(Error::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            StateVector::basis_state(0, 0),
            Err(Error::UnsupportedWireCount(0))
        ));
        assert!(matches!(
            StateVector::basis_state(21, 0),
            Err(Error::UnsupportedWireCount(21))
        ));
    }

    #[test]
    fn apply_1q_examples() {
        // σx on wire 0 of |00⟩ -> |10⟩ (wire 0 is the high bit)
        let mut s = StateVector::basis_state(2, 0).unwrap();
        s.apply_1q(0, &U::pauli_x()).unwrap();
        assert!((s.amplitude(2) - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // Hadamard on |0⟩
        let mut s = StateVector::basis_state(1, 0).unwrap();
        s.apply_1q(0, &U::hadamard()).unwrap();
        assert!((s.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-15);

        // σz on wire 1 of (|00⟩+|01⟩)/√2 -> (|00⟩−|01⟩)/√2
        let mut s = StateVector::from_amplitudes(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        s.apply_1q(1, &U::pauli_z()).unwrap();
        assert!((s.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(1).re + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn controlled_phase_examples() {
        let mut s = StateVector::basis_state(2, 3).unwrap();
        s.apply_controlled_phase(0, 1, PI).unwrap();
        assert!((s.amplitude(3) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);

        let mut s = StateVector::basis_state(2, 2).unwrap(); // |10⟩: target bit is 0
        s.apply_controlled_phase(0, 1, 1.234).unwrap();
        assert!((s.amplitude(2) - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let mut s = StateVector::basis_state(2, 3).unwrap();
        s.apply_controlled_phase(0, 1, PI / 2.0).unwrap();
        assert!((s.amplitude(3) - Complex64::new(0.0, 1.0)).norm() < 1e-12);

        let mut s = StateVector::basis_state(2, 3).unwrap();
        assert!(matches!(
            s.apply_controlled_phase(1, 1, PI),
            Err(Error::DuplicateWire(1))
        ));
    }

    #[test]
    fn swap_examples() {
        let mut s = StateVector::basis_state(2, 1).unwrap(); // |01⟩
        s.apply_swap(0, 1).unwrap();
        assert!((s.amplitude(2) - Complex64::new(1.0, 0.0)).norm() < 1e-15); // |10⟩

        let mut s = StateVector::basis_state(2, 0).unwrap();
        s.apply_swap(0, 1).unwrap();
        assert!((s.amplitude(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        // symmetric state is a fixed point
        let sym = StateVector::from_amplitudes(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let mut s = sym.clone();
        s.apply_swap(0, 1).unwrap();
        assert!(s.max_deviation(&sym).unwrap() < 1e-15);

        let mut s = StateVector::basis_state(2, 0).unwrap();
        assert!(matches!(s.apply_swap(1, 1), Err(Error::DuplicateWire(1))));
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_state(3, &mut rng);
        assert!((psi.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);

        let zero = StateVector::basis_state(1, 0).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        assert!(zero.fidelity(&one).unwrap() < 1e-15);

        let mut plus = StateVector::basis_state(1, 0).unwrap();
        plus.apply_1q(0, &U::hadamard()).unwrap();
        assert!((zero.fidelity(&plus).unwrap() - 0.5).abs() < 1e-12);

        let two = StateVector::basis_state(2, 0).unwrap();
        assert!(matches!(
            zero.fidelity(&two),
            Err(Error::WireCountMismatch { .. })
        ));
    }

    #[test]
    fn sample_deterministic_outcomes() {
        let s = StateVector::basis_state(3, 5).unwrap();
        let counts = s.sample(100, 9).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&5], 100);

        assert!(matches!(s.sample(0, 9), Err(Error::ZeroShots)));
    }

    #[test]
    fn sample_uniform_four_state_band() {
        // uniform superposition over 4 labels; binomial tail keeps every
        // count inside [900, 1100] at 4000 shots
        let amps = vec![Complex64::new(0.5, 0.0); 4];
        let s = StateVector::from_amplitudes(amps).unwrap();
        let counts = s.sample(4000, 1).unwrap();
        let total: u64 = counts.values().sum();
        assert_eq!(total, 4000);
        for label in 0..4 {
            let c = counts[&label];
            assert!((900..=1100).contains(&c), "label {label} count {c}");
        }
    }

    #[test]
    fn sample_same_seed_same_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let s = random_state(4, &mut rng);
        assert_eq!(s.sample(500, 3).unwrap(), s.sample(500, 3).unwrap());
    }

    #[test]
    fn norm_preserved_over_random_gate_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut s = random_state(6, &mut rng);
        for _ in 0..1000 {
            match rng.gen_range(0..3) {
                0 => {
                    let w = rng.gen_range(0..6);
                    let g = match rng.gen_range(0..4) {
                        0 => U::pauli_x(),
                        1 => U::pauli_y(),
                        2 => U::hadamard(),
                        _ => U::phase(rng.gen::<f64>() * PI),
                    };
                    s.apply_1q(w, &g).unwrap();
                }
                1 => {
                    let a = rng.gen_range(0..6);
                    let b = (a + rng.gen_range(1..6)) % 6;
                    s.apply_controlled_phase(a, b, rng.gen::<f64>() * PI).unwrap();
                }
                _ => {
                    let a = rng.gen_range(0..6);
                    let b = (a + rng.gen_range(1..6)) % 6;
                    s.apply_swap(a, b).unwrap();
                }
            }
            assert!((s.norm() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn unitary_then_adjoint_restores() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let original = random_state(5, &mut rng);
            let mut s = original.clone();
            let u = U::hadamard() * U::phase(rng.gen::<f64>() * PI) * U::pauli_y();
            let w = rng.gen_range(0..5);
            s.apply_1q(w, &u).unwrap();
            s.apply_1q(w, &u.adjoint()).unwrap();
            assert!(s.fidelity(&original).unwrap() >= 1.0 - 1e-10);

            let mut t = original.clone();
            t.apply_swap(0, 4).unwrap();
            t.apply_swap(0, 4).unwrap();
            assert!(t.fidelity(&original).unwrap() >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn gates_on_distinct_wires_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let base = random_state(5, &mut rng);
            let u = U::hadamard() * U::phase(rng.gen::<f64>());
            let v = U::pauli_y() * U::phase(rng.gen::<f64>());
            let a = rng.gen_range(0..5);
            let b = (a + rng.gen_range(1..5)) % 5;

            let mut s1 = base.clone();
            s1.apply_1q(a, &u).unwrap();
            s1.apply_1q(b, &v).unwrap();

            let mut s2 = base.clone();
            s2.apply_1q(b, &v).unwrap();
            s2.apply_1q(a, &u).unwrap();

            assert!(s1.max_deviation(&s2).unwrap() < 1e-10);
        }
    }

    #[test]
    fn tensor_orders_high_bits_first() {
        let a = StateVector::basis_state(1, 1).unwrap();
        let b = StateVector::basis_state(2, 2).unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.wire_count(), 3);
        assert!((t.amplitude(6) - Complex64::new(1.0, 0.0)).norm() < 1e-15); // |1⟩⊗|10⟩ = |110⟩
    }
}
