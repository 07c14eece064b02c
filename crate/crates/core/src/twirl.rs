//! Clifford twirling and average gate fidelity of single-qubit channels.

use std::sync::OnceLock;

use crate::clifford::{Clifford, GROUP_ORDER};
use crate::error::{Error, Result};
use crate::ptm::ChannelPtm;

const DEPOLARIZING_TOL: f64 = 1e-10;

fn clifford_ptms() -> &'static [ChannelPtm; GROUP_ORDER] {
    static PTMS: OnceLock<[ChannelPtm; GROUP_ORDER]> = OnceLock::new();
    PTMS.get_or_init(|| {
        let mut out = [ChannelPtm::IDENTITY; GROUP_ORDER];
        for c in Clifford::all() {
            out[c.index()] = ChannelPtm::from_unitary(&c.unitary());
        }
        out
    })
}

/// `(1/24) Σ_C R(C) Λ R(C)⁻¹` over the Clifford group.
pub fn twirl_channel(channel: &ChannelPtm) -> ChannelPtm {
    let parts: Vec<(f64, ChannelPtm)> = clifford_ptms()
        .iter()
        .map(|r| (1.0 / GROUP_ORDER as f64, *r * *channel * r.transpose()))
        .collect();
    ChannelPtm::mixture(&parts)
}

/// Polarization `p` of the twirled channel.
///
/// Fails with [`Error::NotDepolarizing`] when the twirl is not of the form
/// `diag(1, p, p, p)`, which only happens for inputs that are not trace
/// preserving.
pub fn twirl(channel: &ChannelPtm) -> Result<f64> {
    let t = twirl_channel(channel);
    let p = (t.0[1][1] + t.0[2][2] + t.0[3][3]) / 3.0;
    let mut deviation = t.trace_preservation_error();
    for r in 0..4 {
        for c in 0..4 {
            let expected = match (r, c) {
                (0, 0) => 1.0,
                (r, c) if r == c => p,
                _ => 0.0,
            };
            deviation = deviation.max((t.0[r][c] - expected).abs());
        }
    }
    if deviation > DEPOLARIZING_TOL {
        return Err(Error::NotDepolarizing { deviation });
    }
    Ok(p)
}

/// Average gate fidelity over pure states, `(Tr R + 2) / 6`.
pub fn avg_gate_fidelity(channel: &ChannelPtm) -> f64 {
    (channel.trace() + 2.0) / 6.0
}
