//! Conversions from polarization parameters to gate fidelities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Average number of physical pulses per Clifford in the generator
/// decomposition (identity counted as one wait).
pub const DEFAULT_PULSES_PER_CLIFFORD: f64 = 1.875;

/// Largest interleaved/reference ratio accepted before erroring.
const MAX_RATIO: f64 = 1.05;

/// `p + (1 − p)/d`.
pub fn polarization_to_avg_fidelity(p: f64, d: u32) -> f64 {
    let d = d as f64;
    p + (1.0 - p) / d
}

/// Inverse of [`polarization_to_avg_fidelity`]: `(dF − 1)/(d − 1)`.
pub fn avg_fidelity_to_polarization(f: f64, d: u32) -> f64 {
    let d = d as f64;
    (d * f - 1.0) / (d - 1.0)
}

/// Per-pulse fidelity: Clifford infidelity spread over `n_g` pulses.
pub fn primitive_gate_fidelity(p: f64, n_g: f64) -> f64 {
    1.0 - (1.0 - polarization_to_avg_fidelity(p, 2)) / n_g
}

/// Per-pulse fidelity of an interleaved gate from the ratio of the
/// interleaved and reference polarizations.
///
/// Ratios slightly above 1 (up to 1.05) are clamped to 1 with a warning;
/// larger ones are an error.
pub fn interleaved_fidelity(p_int: f64, p_ref: f64, n_g: f64) -> Result<f64> {
    if p_ref.is_nan() || p_ref <= 0.0 {
        return Err(Error::Config(format!(
            "reference polarization must be positive, got {p_ref}"
        )));
    }
    let mut ratio = p_int / p_ref;
    if ratio > MAX_RATIO {
        return Err(Error::RatioOutOfRange { ratio });
    }
    if ratio > 1.0 {
        log::warn!("interleaved/reference ratio {ratio:.5} exceeds 1; clamping");
        ratio = 1.0;
    }
    Ok(1.0 - 0.5 * (1.0 - ratio) / n_g)
}

/// Which conversion a reported fidelity went through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "conversion", rename_all = "kebab-case")]
pub enum Conversion {
    /// `p + (1 − p)/2` per Clifford.
    CliffordAverage,
    PrimitiveGate { n_g: f64 },
    Interleaved { n_g: f64, p_int: f64, p_ref: f64 },
}

/// First-order error propagation through a conversion.
///
/// `std_errors` holds `[σ_p]` for the single-rate conversions and
/// `[σ_p_int, σ_p_ref]` for the interleaved one (treated as independent).
pub fn report_uncertainty(conversion: &Conversion, std_errors: &[f64]) -> f64 {
    match *conversion {
        Conversion::CliffordAverage => 0.5 * std_errors[0],
        Conversion::PrimitiveGate { n_g } => std_errors[0] / (2.0 * n_g),
        Conversion::Interleaved { n_g, p_int, p_ref } => {
            let d_int = std_errors[0] / p_ref;
            let d_ref = p_int * std_errors[1] / (p_ref * p_ref);
            d_int.hypot(d_ref) / (2.0 * n_g)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    /// High interleaved rate against high reference rate.
    #[serde(rename = "p/p")]
    PP,
    /// Low against low.
    #[serde(rename = "q/q")]
    QQ,
    /// Low interleaved against high reference (most pessimistic).
    #[serde(rename = "q/p")]
    QP,
}

impl Pairing {
    pub fn name(self) -> &'static str {
        match self {
            Pairing::PP => "p/p",
            Pairing::QQ => "q/q",
            Pairing::QP => "q/p",
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "p/p" => Ok(Pairing::PP),
            "q/q" => Ok(Pairing::QQ),
            "q/p" => Ok(Pairing::QP),
            other => Err(Error::Config(format!("unknown pairing `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub n_g: f64,
    pub conversions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clifford_fidelity: Option<FidelityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub primitive_fidelity: Option<FidelityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub interleaved_fidelity: Option<FidelityEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pairing: Option<Pairing>,
    pub uncertainty_method: String,
}

pub const UNCERTAINTY_METHOD: &str = "first-order propagation of fit standard errors";

impl FidelityReport {
    /// Clifford and per-pulse fidelity of a reference polarization.
    pub fn reference(p: f64, std_p: f64, n_g: f64) -> Self {
        FidelityReport {
            n_g,
            conversions: vec!["clifford-average".into(), "primitive-gate".into()],
            clifford_fidelity: Some(FidelityEstimate {
                value: polarization_to_avg_fidelity(p, 2),
                uncertainty: report_uncertainty(&Conversion::CliffordAverage, &[std_p]),
            }),
            primitive_fidelity: Some(FidelityEstimate {
                value: primitive_gate_fidelity(p, n_g),
                uncertainty: report_uncertainty(&Conversion::PrimitiveGate { n_g }, &[std_p]),
            }),
            interleaved_fidelity: None,
            pairing: None,
            uncertainty_method: UNCERTAINTY_METHOD.into(),
        }
    }

    pub fn interleaved(
        pairing: Pairing,
        (p_int, std_int): (f64, f64),
        (p_ref, std_ref): (f64, f64),
        n_g: f64,
    ) -> Result<Self> {
        let value = interleaved_fidelity(p_int, p_ref, n_g)?;
        let uncertainty =
            report_uncertainty(&Conversion::Interleaved { n_g, p_int, p_ref }, &[std_int, std_ref]);
        Ok(FidelityReport {
            n_g,
            conversions: vec![format!("interleaved {pairing}")],
            clifford_fidelity: None,
            primitive_fidelity: None,
            interleaved_fidelity: Some(FidelityEstimate { value, uncertainty }),
            pairing: Some(pairing),
            uncertainty_method: UNCERTAINTY_METHOD.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_fidelity_examples() {
        assert_eq!(polarization_to_avg_fidelity(1.0, 2), 1.0);
        assert_eq!(polarization_to_avg_fidelity(0.0, 2), 0.5);
        assert!((polarization_to_avg_fidelity(0.995, 2) - 0.9975).abs() < 1e-15);
    }

    #[test]
    fn primitive_examples() {
        let n = DEFAULT_PULSES_PER_CLIFFORD;
        assert!((primitive_gate_fidelity(0.995, n) - 0.99867).abs() < 5e-6);
        assert!((primitive_gate_fidelity(0.959, n) - 0.98907).abs() < 5e-6);
        assert_eq!(primitive_gate_fidelity(1.0, 3.3), 1.0);
    }

    #[test]
    fn interleaved_examples() {
        let n = DEFAULT_PULSES_PER_CLIFFORD;
        assert!((interleaved_fidelity(0.952, 0.959, n).unwrap() - 0.99805).abs() < 5e-6);
        assert!((interleaved_fidelity(0.911, 0.995, n).unwrap() - 0.97749).abs() < 5e-6);
        assert_eq!(interleaved_fidelity(0.97, 0.97, n).unwrap(), 1.0);
    }

    #[test]
    fn interleaved_ratio_guard() {
        assert_eq!(interleaved_fidelity(1.0, 0.98, 1.875).unwrap(), 1.0);
        assert!(matches!(
            interleaved_fidelity(1.0, 0.9, 1.875),
            Err(Error::RatioOutOfRange { .. })
        ));
        assert!(interleaved_fidelity(0.9, 0.0, 1.875).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        let n = DEFAULT_PULSES_PER_CLIFFORD;
        assert_eq!(report_uncertainty(&Conversion::PrimitiveGate { n_g: n }, &[0.0]), 0.0);
        let u = report_uncertainty(&Conversion::PrimitiveGate { n_g: n }, &[0.001]);
        assert!((u - 0.001 / 3.75).abs() < 1e-15);
        let c = Conversion::Interleaved {
            n_g: n,
            p_int: 0.95,
            p_ref: 0.96,
        };
        assert_eq!(report_uncertainty(&c, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn interleaved_uncertainty_matches_numeric_derivative() {
        let (n, pi, pr, si, sr) = (1.875, 0.95, 0.97, 0.002, 0.001);
        let f = |a: f64, b: f64| 1.0 - 0.5 * (1.0 - a / b) / n;
        let h = 1e-7;
        let di = (f(pi + h, pr) - f(pi - h, pr)) / (2.0 * h);
        let dr = (f(pi, pr + h) - f(pi, pr - h)) / (2.0 * h);
        let numeric = ((di * si).powi(2) + (dr * sr).powi(2)).sqrt();
        let c = Conversion::Interleaved { n_g: n, p_int: pi, p_ref: pr };
        assert!((report_uncertainty(&c, &[si, sr]) - numeric).abs() < 1e-10);
    }

    #[test]
    fn pairing_names() {
        for p in [Pairing::PP, Pairing::QQ, Pairing::QP] {
            assert_eq!(p.name().parse::<Pairing>().unwrap(), p);
        }
        assert!("p/q".parse::<Pairing>().is_err());
    }
}
