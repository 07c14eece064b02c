//! Dense 2x2 complex matrices for single-qubit gates.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major 2x2 complex matrix `[[a, b], [c, d]]`.
///
/// Gates are only meaningful up to a global phase, so equality checks go
/// through [`Unitary2::phase_overlap`] rather than entrywise comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unitary2(pub [[Complex64; 2]; 2]);

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2([[ONE, ZERO], [ZERO, ONE]]);
    pub const PAULI_X: Unitary2 = Unitary2([[ZERO, ONE], [ONE, ZERO]]);
    pub const PAULI_Y: Unitary2 = Unitary2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const PAULI_Z: Unitary2 = Unitary2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Unitary2([[a, b], [c, d]])
    }

    /// `exp(-i (angle/2) n·σ)` for a unit axis `n`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        let [nx, ny, nz] = axis;
        Unitary2([
            [Complex64::new(c, -s * nz), Complex64::new(-s * ny, -s * nx)],
            [Complex64::new(s * ny, -s * nx), Complex64::new(c, s * nz)],
        ])
    }

    /// `exp(-i (phase/2) σ_z)`.
    pub fn z_phase(phase: f64) -> Self {
        Self::rotation([0.0, 0.0, 1.0], phase)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Unitary2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `|Tr(A† B)| / 2`; equals 1 iff the two unitaries agree up to phase.
    pub fn phase_overlap(&self, other: &Unitary2) -> f64 {
        (self.dagger() * *other).trace().norm() / 2.0
    }

    pub fn approx_eq_up_to_phase(&self, other: &Unitary2, tol: f64) -> bool {
        (1.0 - self.phase_overlap(other)).abs() <= tol
    }

    /// Largest entrywise deviation of `U U†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = *self * self.dagger();
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((p.0[r][c] - target).norm());
            }
        }
        worst
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Unitary2) -> f64 {
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                acc += (self.0[r][c] - other.0[r][c]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let m = &self.0;
        Unitary2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Unitary2(out)
    }
}
