//! Pauli transfer matrices for single-qubit channels.
//!
//! Basis order is `{I, X, Y, Z} / √2`, so entry `(i, j)` is
//! `½ Tr[P_i Λ(P_j)]`. A trace-preserving channel has first row `(1, 0, 0, 0)`.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::unitary::Unitary2;

pub(crate) const PAULIS: [Unitary2; 4] = [
    Unitary2::IDENTITY,
    Unitary2::PAULI_X,
    Unitary2::PAULI_Y,
    Unitary2::PAULI_Z,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPtm(pub [[f64; 4]; 4]);

impl ChannelPtm {
    pub const IDENTITY: ChannelPtm = ChannelPtm([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    /// `ρ ↦ pρ + (1 − p) 𝟙/2`.
    pub fn depolarizing(p: f64) -> Self {
        let mut m = Self::IDENTITY.0;
        for (k, row) in m.iter_mut().enumerate().skip(1) {
            row[k] = p;
        }
        ChannelPtm(m)
    }

    pub fn from_unitary(u: &Unitary2) -> Self {
        let ud = u.dagger();
        let mut m = [[0.0; 4]; 4];
        for (j, pj) in PAULIS.iter().enumerate() {
            let image = *u * *pj * ud;
            for (i, pi) in PAULIS.iter().enumerate() {
                m[i][j] = 0.5 * (*pi * image).trace().re;
            }
        }
        ChannelPtm(m)
    }

    /// Amplitude damping towards `|0⟩` with decay probability `gamma`.
    pub fn amplitude_damping(gamma: f64) -> Self {
        let s = (1.0 - gamma).sqrt();
        ChannelPtm([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, s, 0.0, 0.0],
            [0.0, 0.0, s, 0.0],
            [gamma, 0.0, 0.0, 1.0 - gamma],
        ])
    }

    /// Convex mixture `Σ wᵢ Λᵢ`; weights are used as given.
    pub fn mixture(parts: &[(f64, ChannelPtm)]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (w, ch) in parts {
            for (r, row) in m.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v += w * ch.0[r][c];
                }
            }
        }
        ChannelPtm(m)
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.0[c][r];
            }
        }
        ChannelPtm(m)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|k| self.0[k][k]).sum()
    }

    /// Largest deviation of the first row from `(1, 0, 0, 0)`.
    pub fn trace_preservation_error(&self) -> f64 {
        let r = &self.0[0];
        (r[0] - 1.0).abs().max(r[1].abs()).max(r[2].abs()).max(r[3].abs())
    }

    /// Applies the channel to a Bloch vector `(x, y, z)`.
    pub fn apply_bloch(&self, bloch: [f64; 3]) -> [f64; 3] {
        let v = [1.0, bloch[0], bloch[1], bloch[2]];
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.0[k + 1][c] * v[c]).sum();
        }
        out
    }

    /// Density matrix of a Bloch vector, handy for cross-checks.
    pub fn bloch_to_density(bloch: [f64; 3]) -> Unitary2 {
        let [x, y, z] = bloch;
        Unitary2::new(
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        )
    }
}

impl Mul for ChannelPtm {
    type Output = ChannelPtm;

    /// Composition: `(a * b)(ρ) = a(b(ρ))`.
    fn mul(self, rhs: ChannelPtm) -> ChannelPtm {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        ChannelPtm(m)
    }
}
