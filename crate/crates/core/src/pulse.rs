//! Physical pulses that Cliffords are built from.
//!
//! Detuning is dimensionless, `δ = Δω·τ_op / 2π` (cycles per π-pulse time).
//! The drive amplitude is fixed so that `Ω·τ_op = π`; half pulses run for
//! half the time at the same amplitude.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::unitary::Unitary2;

/// Generator pulses in lexicographic order; `IdentityWait` sorts last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PulseKind {
    #[serde(rename = "+X")]
    PlusX,
    #[serde(rename = "-X")]
    MinusX,
    #[serde(rename = "+X/2")]
    PlusX2,
    #[serde(rename = "-X/2")]
    MinusX2,
    #[serde(rename = "+Y")]
    PlusY,
    #[serde(rename = "-Y")]
    MinusY,
    #[serde(rename = "+Y/2")]
    PlusY2,
    #[serde(rename = "-Y/2")]
    MinusY2,
    #[serde(rename = "I")]
    IdentityWait,
}

impl PulseKind {
    /// The eight rotation generators, in canonical order.
    pub const GENERATORS: [PulseKind; 8] = [
        PulseKind::PlusX,
        PulseKind::MinusX,
        PulseKind::PlusX2,
        PulseKind::MinusX2,
        PulseKind::PlusY,
        PulseKind::MinusY,
        PulseKind::PlusY2,
        PulseKind::MinusY2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PulseKind::PlusX => "+X",
            PulseKind::MinusX => "-X",
            PulseKind::PlusX2 => "+X/2",
            PulseKind::MinusX2 => "-X/2",
            PulseKind::PlusY => "+Y",
            PulseKind::MinusY => "-Y",
            PulseKind::PlusY2 => "+Y/2",
            PulseKind::MinusY2 => "-Y/2",
            PulseKind::IdentityWait => "I",
        }
    }

    /// Accepts the labels above, with or without a leading `+`.
    pub fn from_label(s: &str) -> Option<PulseKind> {
        let s = s.trim();
        let s = s.strip_prefix('+').unwrap_or(s);
        let kind = match s {
            "X" => PulseKind::PlusX,
            "-X" => PulseKind::MinusX,
            "X/2" => PulseKind::PlusX2,
            "-X/2" => PulseKind::MinusX2,
            "Y" => PulseKind::PlusY,
            "-Y" => PulseKind::MinusY,
            "Y/2" => PulseKind::PlusY2,
            "-Y/2" => PulseKind::MinusY2,
            "I" | "Id" => PulseKind::IdentityWait,
            _ => return None,
        };
        Some(kind)
    }

    /// Drive direction in the xy-plane, `None` for the wait.
    pub fn drive_axis(self) -> Option<[f64; 2]> {
        match self {
            PulseKind::PlusX | PulseKind::PlusX2 => Some([1.0, 0.0]),
            PulseKind::MinusX | PulseKind::MinusX2 => Some([-1.0, 0.0]),
            PulseKind::PlusY | PulseKind::PlusY2 => Some([0.0, 1.0]),
            PulseKind::MinusY | PulseKind::MinusY2 => Some([0.0, -1.0]),
            PulseKind::IdentityWait => None,
        }
    }

    pub fn is_half(self) -> bool {
        matches!(
            self,
            PulseKind::PlusX2 | PulseKind::MinusX2 | PulseKind::PlusY2 | PulseKind::MinusY2
        )
    }

    /// Pulse length as a fraction of `τ_op`.
    pub fn duration_fraction(self) -> f64 {
        if self.is_half() {
            0.5
        } else {
            1.0
        }
    }

    /// Rotation angle on resonance (the wait's is its nominal π-pulse length).
    pub fn nominal_angle(self) -> f64 {
        PI * self.duration_fraction()
    }

    /// Propagator of this pulse at detuning `δ`.
    ///
    /// Rotation pulses turn by `θ = f·√(π² + (2πδ)²)` about the axis
    /// `∝ (π·â + 2πδ·ẑ)`; the wait is a pure z-phase `2πδ`.
    pub fn unitary(self, detuning: f64) -> Unitary2 {
        let dw = 2.0 * PI * detuning;
        match self.drive_axis() {
            None => Unitary2::z_phase(dw),
            Some([ax, ay]) => {
                let rate = (PI * PI + dw * dw).sqrt();
                let axis = [PI * ax / rate, PI * ay / rate, dw / rate];
                Unitary2::rotation(axis, self.duration_fraction() * rate)
            }
        }
    }
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A pulse as it appears in a Clifford decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimitivePulse {
    pub kind: PulseKind,
}

impl PrimitivePulse {
    pub fn new(kind: PulseKind) -> Self {
        PrimitivePulse { kind }
    }

    pub fn duration_fraction(&self) -> f64 {
        self.kind.duration_fraction()
    }

    pub fn nominal_angle(&self) -> f64 {
        self.kind.nominal_angle()
    }
}

impl From<PulseKind> for PrimitivePulse {
    fn from(kind: PulseKind) -> Self {
        PrimitivePulse { kind }
    }
}
