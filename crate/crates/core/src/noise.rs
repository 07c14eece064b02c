//! Quasi-static detuning noise: qubit timing, detuning ensembles, and the
//! resulting noisy pulse and gate propagators.

use std::f64::consts::{LN_2, PI};
use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clifford::Clifford;
use crate::error::{Error, Result};
use crate::pulse::PrimitivePulse;
use crate::rng::{self, StreamRng};
use crate::unitary::Unitary2;

/// Timing and dephasing parameters of the qubit, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QubitConfig {
    /// π-pulse duration.
    pub tau_op_us: f64,
    /// Dead time after every pulse.
    pub tau_wait_us: f64,
    /// Gaussian (Ramsey) dephasing time.
    pub t2_star_us: f64,
}

impl Default for QubitConfig {
    fn default() -> Self {
        QubitConfig {
            tau_op_us: 1.6,
            tau_wait_us: 0.5,
            t2_star_us: 120.0,
        }
    }
}

impl QubitConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_op_us", self.tau_op_us),
            ("tau_wait_us", self.tau_wait_us),
            ("t2_star_us", self.t2_star_us),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.tau_wait_us >= self.t2_star_us {
            return Err(Error::Config(format!(
                "tau_wait_us ({}) must be shorter than t2_star_us ({})",
                self.tau_wait_us, self.t2_star_us
            )));
        }
        Ok(())
    }

    /// `τ_w / τ_op`.
    pub fn wait_fraction(&self) -> f64 {
        self.tau_wait_us / self.tau_op_us
    }
}

/// Width of the Gaussian detuning distribution, in cycles per `τ_op`:
/// `τ_op / (2π √(2 ln 2) T₂*)`.
pub fn sigma_op(config: &QubitConfig) -> f64 {
    config.tau_op_us / (2.0 * PI * (2.0 * LN_2).sqrt() * config.t2_star_us)
}

/// Gaussian width whose ensemble Ramsey decay is `exp(−(t/T₂*)²)`:
/// `√2 τ_op / (2π T₂*)`, i.e. `2√ln2 · sigma_op`. Default ensemble width.
pub fn ramsey_sigma(config: &QubitConfig) -> f64 {
    2f64.sqrt() * config.tau_op_us / (2.0 * PI * config.t2_star_us)
}

/// Lorentzian scale with the same half width at half maximum as the
/// default Gaussian.
pub fn default_lorentzian_gamma(config: &QubitConfig) -> f64 {
    (2.0 * LN_2).sqrt() * ramsey_sigma(config)
}

/// Distribution of the quasi-static detuning `δ` (cycles per `τ_op`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetuningModel {
    Fixed { delta: f64 },
    Gaussian { sigma: f64 },
    Lorentzian { gamma: f64 },
    /// Correlated across consecutive sequences; clamped to `|δ| ≤ sigma_cap`.
    RandomWalk { sigma_step: f64, sigma_cap: f64 },
}

impl DetuningModel {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            DetuningModel::Fixed { delta } if !delta.is_finite() => {
                Err(Error::Config(format!("fixed detuning must be finite, got {delta}")))
            }
            DetuningModel::Fixed { .. } => Ok(()),
            DetuningModel::Gaussian { sigma } => check("sigma", sigma),
            DetuningModel::Lorentzian { gamma } => check("gamma", gamma),
            DetuningModel::RandomWalk {
                sigma_step,
                sigma_cap,
            } => check("sigma_step", sigma_step).and(check("sigma_cap", sigma_cap)),
        }
    }

    pub fn is_ensemble(&self) -> bool {
        matches!(self, DetuningModel::Gaussian { .. } | DetuningModel::Lorentzian { .. })
    }

    /// Draws consecutive detunings from this model.
    pub fn sampler(&self) -> DetuningSampler {
        DetuningSampler {
            model: *self,
            walk: 0.0,
        }
    }
}

/// Config-file form of [`DetuningModel`]; missing widths are derived from
/// the qubit's `T₂*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetuningSpec {
    Fixed {
        delta: f64,
    },
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Lorentzian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    RandomWalk {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_step: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_cap: Option<f64>,
    },
}

impl Default for DetuningSpec {
    fn default() -> Self {
        DetuningSpec::Gaussian { sigma: None }
    }
}

impl DetuningSpec {
    /// Fills defaults from `s = ramsey_sigma`: Gaussian width `s`, Lorentzian
    /// HWHM-matched `γ`, random walk steps of `s/10` capped at `3s`.
    pub fn resolve(&self, qubit: &QubitConfig) -> Result<DetuningModel> {
        let s = ramsey_sigma(qubit);
        let model = match *self {
            DetuningSpec::Fixed { delta } => DetuningModel::Fixed { delta },
            DetuningSpec::Gaussian { sigma } => DetuningModel::Gaussian {
                sigma: sigma.unwrap_or(s),
            },
            DetuningSpec::Lorentzian { gamma } => DetuningModel::Lorentzian {
                gamma: gamma.unwrap_or_else(|| default_lorentzian_gamma(qubit)),
            },
            DetuningSpec::RandomWalk {
                sigma_step,
                sigma_cap,
            } => DetuningModel::RandomWalk {
                sigma_step: sigma_step.unwrap_or(0.1 * s),
                sigma_cap: sigma_cap.unwrap_or(3.0 * s),
            },
        };
        model.validate()?;
        Ok(model)
    }
}

/// Stateful detuning stream; only the random walk carries state.
#[derive(Debug, Clone)]
pub struct DetuningSampler {
    model: DetuningModel,
    walk: f64,
}

impl DetuningSampler {
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        match self.model {
            DetuningModel::Fixed { delta } => delta,
            DetuningModel::Gaussian { sigma } => Normal::new(0.0, sigma)
                .expect("validated sigma")
                .sample(rng),
            DetuningModel::Lorentzian { gamma } => Cauchy::new(0.0, gamma)
                .expect("validated gamma")
                .sample(rng),
            DetuningModel::RandomWalk {
                sigma_step,
                sigma_cap,
            } => {
                let step: f64 = Normal::new(0.0, sigma_step)
                    .expect("validated sigma_step")
                    .sample(rng);
                self.walk = (self.walk + step).clamp(-sigma_cap, sigma_cap);
                self.walk
            }
        }
    }
}

/// Draws one detuning from `model` using `rng`. Stateless models only; the
/// random walk should go through [`DetuningModel::sampler`].
pub fn sample_detuning<R: Rng + ?Sized>(model: &DetuningModel, rng: &mut R) -> f64 {
    model.sampler().sample(rng)
}

static LARGE_DETUNING_WARNED: AtomicBool = AtomicBool::new(false);

fn flag_large_detuning(detuning: f64) {
    if detuning.abs() >= 0.5 && !LARGE_DETUNING_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!(
            "detuning {detuning} is at least half a cycle per pi-pulse; \
             the rotating-frame pulse model is outside its intended range"
        );
    }
}

pub fn pulse_unitary(pulse: PrimitivePulse, detuning: f64) -> Unitary2 {
    flag_large_detuning(detuning);
    pulse.kind.unitary(detuning)
}

/// Free precession for `duration_fraction · τ_op`.
pub fn wait_unitary(duration_fraction: f64, detuning: f64) -> Unitary2 {
    Unitary2::z_phase(2.0 * PI * detuning * duration_fraction)
}

/// Propagator of a Clifford at fixed detuning: each pulse is followed by a
/// `τ_w` wait, including the last one.
pub fn noisy_clifford(c: Clifford, detuning: f64, config: &QubitConfig) -> Unitary2 {
    flag_large_detuning(detuning);
    let wait = wait_unitary(config.wait_fraction(), detuning);
    c.pulses()
        .iter()
        .fold(Unitary2::IDENTITY, |acc, p| wait * p.kind.unitary(detuning) * acc)
}

/// All 24 noisy Clifford propagators at one detuning, indexed like the group.
pub fn noisy_clifford_table(detuning: f64, config: &QubitConfig) -> Vec<Unitary2> {
    Clifford::all()
        .map(|c| noisy_clifford(c, detuning, config))
        .collect()
}

/// Ensemble-averaged Ramsey fringe `⟨cos(2πδ t/τ_op)⟩` at each delay.
///
/// The same `n_samples` detunings are reused for every delay.
pub fn ramsey_decay(
    config: &QubitConfig,
    model: &DetuningModel,
    delays_us: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if !model.is_ensemble() {
        return Err(Error::Config(
            "Ramsey averaging needs a Gaussian or Lorentzian detuning model".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let mut rng: StreamRng = rng::substream(seed, rng::TAG_RAMSEY, 0, 0);
    let mut sampler = model.sampler();
    let draws: Vec<f64> = (0..n_samples).map(|_| sampler.sample(&mut rng)).collect();
    Ok(delays_us
        .iter()
        .map(|&t| {
            let scale = 2.0 * PI * t / config.tau_op_us;
            let mean = draws.iter().map(|d| (scale * d).cos()).sum::<f64>() / n_samples as f64;
            (t, mean)
        })
        .collect())
}

/// Least-squares fit of `exp(−(t/T)²)` to a Ramsey envelope; returns `T`.
pub fn fit_gaussian_envelope(points: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, _)| t > 0.0).collect();
    if usable.is_empty() {
        return Err(Error::Config("need at least one positive delay to fit T2*".into()));
    }
    // Seed from the log-linear form on points with a clear signal.
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, c) in &usable {
        if c > 0.05 && c < 0.999 {
            let x = t * t;
            num += x * (-c.ln());
            den += x * x;
        }
    }
    let t_max = usable.iter().map(|p| p.0).fold(0.0, f64::max);
    let mut log_t = if num > 0.0 {
        (den / num).sqrt().ln()
    } else {
        t_max.ln()
    };

    // Gauss-Newton in log T with step halving.
    let sse = |lt: f64| -> f64 {
        let tt = lt.exp();
        usable
            .iter()
            .map(|&(t, c)| (c - (-(t / tt).powi(2)).exp()).powi(2))
            .sum()
    };
    let mut current = sse(log_t);
    for _ in 0..200 {
        let tt = log_t.exp();
        let (mut jtj, mut jtr) = (0.0, 0.0);
        for &(t, c) in &usable {
            let u = (t / tt).powi(2);
            let model = (-u).exp();
            // d model / d log T
            let j = 2.0 * u * model;
            jtj += j * j;
            jtr += j * (c - model);
        }
        if jtj <= 0.0 {
            break;
        }
        let mut step = jtr / jtj;
        let mut improved = false;
        for _ in 0..40 {
            let trial = sse(log_t + step);
            if trial <= current {
                log_t += step;
                improved = current - trial > 1e-15 * current.max(1e-300);
                current = trial;
                break;
            }
            step *= 0.5;
        }
        if !improved || step.abs() < 1e-13 {
            break;
        }
    }
    Ok(log_t.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, TAG_USER};

    #[test]
    fn sigma_op_at_reference_timings() {
        let s = sigma_op(&QubitConfig::default());
        assert!((s - 1.802317e-3).abs() < 1e-9, "{s}");
    }

    #[test]
    fn sigma_op_when_tau_equals_t2() {
        let cfg = QubitConfig {
            tau_op_us: 5.0,
            tau_wait_us: 0.1,
            t2_star_us: 5.0,
        };
        let expected = 1.0 / (2.0 * PI * (2.0 * LN_2).sqrt());
        assert!((sigma_op(&cfg) - expected).abs() < 1e-15);
        assert!((expected - 0.1351738).abs() < 1e-7);
    }

    #[test]
    fn ramsey_width_is_scaled_formula_width() {
        for t2 in [1.6, 60.0, 120.0, 1e4] {
            let cfg = QubitConfig { t2_star_us: t2, ..QubitConfig::default() };
            let ratio = ramsey_sigma(&cfg) / sigma_op(&cfg);
            assert!((ratio - 2.0 * LN_2.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_t2_halves_sigma() {
        let a = QubitConfig::default();
        let b = QubitConfig {
            t2_star_us: 2.0 * a.t2_star_us,
            ..a
        };
        assert_eq!(sigma_op(&a), 2.0 * sigma_op(&b));
    }

    #[test]
    fn config_validation() {
        assert!(QubitConfig::default().validate().is_ok());
        let bad = QubitConfig {
            tau_wait_us: 200.0,
            ..QubitConfig::default()
        };
        assert!(bad.validate().is_err());
        let neg = QubitConfig {
            tau_op_us: -1.0,
            ..QubitConfig::default()
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn fixed_model_always_returns_delta() {
        let mut rng = substream(1, TAG_USER, 0, 0);
        let m = DetuningModel::Fixed { delta: 0.002 };
        for _ in 0..10 {
            assert_eq!(sample_detuning(&m, &mut rng), 0.002);
        }
    }

    #[test]
    fn random_walk_respects_cap() {
        let mut rng = substream(3, TAG_USER, 0, 0);
        let mut s = DetuningModel::RandomWalk {
            sigma_step: 0.5,
            sigma_cap: 0.2,
        }
        .sampler();
        let draws: Vec<f64> = (0..1000).map(|_| s.sample(&mut rng)).collect();
        assert!(draws.iter().all(|d| d.abs() <= 0.2));
        // consecutive values are correlated, not resampled
        assert!(draws.windows(2).any(|w| w[0] == w[1]));
    }

    #[test]
    fn spec_resolution_fills_defaults() {
        let q = QubitConfig::default();
        let g = DetuningSpec::Gaussian { sigma: None }.resolve(&q).unwrap();
        assert_eq!(g, DetuningModel::Gaussian { sigma: ramsey_sigma(&q) });
        let l = DetuningSpec::Lorentzian { gamma: None }.resolve(&q).unwrap();
        assert_eq!(
            l,
            DetuningModel::Lorentzian {
                gamma: (2.0 * LN_2).sqrt() * ramsey_sigma(&q)
            }
        );
        assert!(DetuningSpec::Gaussian { sigma: Some(-1.0) }.resolve(&q).is_err());
    }

    #[test]
    fn detuning_spec_json_is_strict() {
        let ok: DetuningSpec = serde_json::from_str(r#"{"kind":"gaussian"}"#).unwrap();
        assert_eq!(ok, DetuningSpec::Gaussian { sigma: None });
        let bad = serde_json::from_str::<DetuningSpec>(r#"{"kind":"gaussian","width":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn wait_examples() {
        for f in [0.0, 0.3, 2.0] {
            assert!(wait_unitary(f, 0.0).distance(&Unitary2::IDENTITY) < 1e-15);
        }
        let w = wait_unitary(0.5 / 1.6, 0.002);
        assert!(w.approx_eq_up_to_phase(&Unitary2::z_phase(2.0 * PI * 0.000625), 1e-15));
        let half_cycle = wait_unitary(1.0, 0.5);
        assert!(half_cycle.approx_eq_up_to_phase(&Unitary2::PAULI_Z, 1e-12));
    }

    #[test]
    fn ramsey_rejects_fixed_model() {
        let err = ramsey_decay(
            &QubitConfig::default(),
            &DetuningModel::Fixed { delta: 0.0 },
            &[0.0],
            10,
            1,
        );
        assert!(err.is_err());
    }

    #[test]
    fn envelope_fit_recovers_exact_gaussian() {
        let pts: Vec<(f64, f64)> = (0..30)
            .map(|i| {
                let t = i as f64 * 10.0;
                (t, (-(t / 87.0f64).powi(2)).exp())
            })
            .collect();
        let t = fit_gaussian_envelope(&pts).unwrap();
        assert!((t - 87.0).abs() < 1e-6, "{t}");
    }
}
