//! Single-qubit gate matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Elementwise tolerance for the unitarity check at construction.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A 2x2 complex matrix guaranteed unitary at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryMatrix2 {
    entries: [[Complex64; 2]; 2],
}

impl UnitaryMatrix2 {
    /// Builds a matrix after verifying U†U = I within [`UNITARITY_TOL`].
    pub fn new(entries: [[Complex64; 2]; 2]) -> Result<Self> {
        let m = Self { entries };
        let dev = m.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(m)
    }

    /// Max elementwise deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let u = &self.entries;
        let mut dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for row in u {
                    s += row[i].conj() * row[j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((s - Complex64::new(expected, 0.0)).norm());
            }
        }
        dev
    }

    const fn raw(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        Self::raw([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ])
    }

    pub fn pauli_x() -> Self {
        Self::raw([
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_y() -> Self {
        Self::raw([
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_z() -> Self {
        Self::raw([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
        ])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::raw([
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ])
    }

    /// diag(1, e^{i angle})
    pub fn phase(angle: f64) -> Self {
        Self::raw([
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, angle)],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let u = &self.entries;
        Self::raw([
            [u[0][0].conj(), u[1][0].conj()],
            [u[0][1].conj(), u[1][1].conj()],
        ])
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }
}

// Matrix product; unitarity is preserved so no re-validation.
impl std::ops::Mul for UnitaryMatrix2 {
    type Output = UnitaryMatrix2;

    fn mul(self, rhs: UnitaryMatrix2) -> UnitaryMatrix2 {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        UnitaryMatrix2::raw(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gates_are_unitary() {
        for g in [
            UnitaryMatrix2::identity(),
            UnitaryMatrix2::pauli_x(),
            UnitaryMatrix2::pauli_y(),
            UnitaryMatrix2::pauli_z(),
            UnitaryMatrix2::hadamard(),
            UnitaryMatrix2::phase(0.7),
        ] {
            assert!(g.unitarity_deviation() <= UNITARITY_TOL);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let bad = [
            [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        assert!(matches!(
            UnitaryMatrix2::new(bad),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn adjoint_inverts() {
        let u = UnitaryMatrix2::hadamard() * UnitaryMatrix2::phase(1.3) * UnitaryMatrix2::pauli_y();
        let prod = u * u.adjoint();
        assert!(prod.unitarity_deviation() <= 1e-12);
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((prod.entry(i, j) - Complex64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }
}
