//! Time-domain simulation of the driven, decohering charge qubit.
//!
//! Frequencies are in MHz (cycles, not angular), times in ns except `T1`
//! which is in µs. The qubit frame rotates at the drive frequency.

mod evolve;
mod montecarlo;
mod noise;
mod protocol;

pub use evolve::{evolve, DensityMatrix, NoiseRealization};
pub use montecarlo::{run_protocol, PopulationCurve, Sampling};
pub use noise::{pink_band_for, sample_pink, sample_quasistatic, PinkBand};
pub use protocol::{generate_protocol, Protocol, ProtocolKind, Segment, Sweep};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoherenceParams {
    /// Energy relaxation time (µs); `None` disables relaxation.
    pub t1_us: Option<f64>,
    /// Standard deviation of the static detuning offset (MHz).
    pub quasi_static_sigma_mhz: f64,
    /// 1/f detuning noise amplitude `A` (MHz) with `S(f) = A²(1 Hz/f)^α` in MHz²/Hz.
    pub pink_amplitude_mhz: f64,
    pub pink_exponent: f64,
    /// Markovian pure-dephasing rate Γφ (1/µs, numerically MHz); coherences decay as `exp(−Γφ t)`.
    pub white_dephasing_mhz: f64,
}

impl Default for DecoherenceParams {
    fn default() -> Self {
        Self {
            t1_us: None,
            quasi_static_sigma_mhz: 0.0,
            pink_amplitude_mhz: 0.0,
            pink_exponent: 1.0,
            white_dephasing_mhz: 0.0,
        }
    }
}

impl DecoherenceParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(t1) = self.t1_us {
            ensure_positive("decoherence.t1_us", t1)?;
        }
        ensure_non_negative("decoherence.quasi_static_sigma_mhz", self.quasi_static_sigma_mhz)?;
        ensure_non_negative("decoherence.pink_amplitude_mhz", self.pink_amplitude_mhz)?;
        ensure_non_negative("decoherence.white_dephasing_mhz", self.white_dephasing_mhz)?;
        if self.pink_amplitude_mhz > 0.0 && !(0.5..=1.5).contains(&self.pink_exponent) {
            return Err(Error::validation(
                "decoherence.pink_exponent",
                format!("{} outside [0.5, 1.5]", self.pink_exponent),
            ));
        }
        Ok(())
    }

    /// Whether realizations differ from one another.
    pub fn is_stochastic(&self) -> bool {
        self.quasi_static_sigma_mhz > 0.0 || self.pink_amplitude_mhz > 0.0
    }

    pub(crate) fn relaxation_rate_per_us(&self) -> f64 {
        self.t1_us.map_or(0.0, |t| 1.0 / t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    pub f_q_ghz: f64,
    #[serde(default)]
    pub decoherence: DecoherenceParams,
}

impl QubitParams {
    pub fn new(f_q_ghz: f64, decoherence: DecoherenceParams) -> Self {
        Self { f_q_ghz, decoherence }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("qubit.f_q_ghz", self.f_q_ghz)?;
        self.decoherence.validate()
    }
}
