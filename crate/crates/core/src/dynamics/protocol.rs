use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Rabi,
    T1,
    Ramsey,
    Echo,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [Self::Rabi, Self::T1, Self::Ramsey, Self::Echo];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rabi => "rabi",
            Self::T1 => "t1",
            Self::Ramsey => "ramsey",
            Self::Echo => "echo",
        }
    }

    /// Name of the swept quantity.
    pub fn sweep_variable(self) -> &'static str {
        match self {
            Self::Rabi => "t_pulse",
            Self::T1 => "t_delay",
            Self::Ramsey | Self::Echo => "delta_t",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::validation(
                "protocol.kind",
                format!("unknown protocol '{s}' (expected rabi, t1, ramsey or echo)"),
            )
        })
    }
}

/// Inclusive sweep of the protocol variable (ns).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start_ns: f64,
    pub stop_ns: f64,
    pub step_ns: f64,
}

impl Sweep {
    pub fn new(start_ns: f64, stop_ns: f64, step_ns: f64) -> Result<Self> {
        let s = Self {
            start_ns,
            stop_ns,
            step_ns,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("sweep.start_ns", self.start_ns)?;
        ensure_finite("sweep.stop_ns", self.stop_ns)?;
        ensure_positive("sweep.step_ns", self.step_ns)?;
        if self.stop_ns < self.start_ns {
            return Err(Error::validation("sweep.stop_ns", "stop before start"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop_ns - self.start_ns) / self.step_ns + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start_ns + k as f64 * self.step_ns).collect()
    }
}

/// Rectangular pulse or free evolution (`rabi_mhz == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration_ns: f64,
    pub rabi_mhz: f64,
    pub drive_ghz: f64,
    pub phase_rad: f64,
}

impl Segment {
    pub fn pulse(duration_ns: f64, rabi_mhz: f64, drive_ghz: f64, phase_rad: f64) -> Self {
        Self {
            duration_ns,
            rabi_mhz,
            drive_ghz,
            phase_rad,
        }
    }

    pub fn wait(duration_ns: f64, drive_ghz: f64) -> Self {
        Self::pulse(duration_ns, 0.0, drive_ghz, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    pub kind: ProtocolKind,
    /// Rabi frequency Ω_R of the rectangular pulses (MHz).
    pub rabi_mhz: f64,
    pub drive_ghz: f64,
    pub sweep: Sweep,
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("protocol.rabi_mhz", self.rabi_mhz)?;
        ensure_positive("protocol.drive_ghz", self.drive_ghz)?;
        self.sweep.validate()
    }

    /// `1/(2Ω_R)` in ns.
    pub fn pi_time_ns(&self) -> f64 {
        1e3 / (2.0 * self.rabi_mhz)
    }

    /// Pulse sequence at sweep value `x` (ns).
    ///
    /// The echo closes with a π/2 of opposite phase so that an unperturbed
    /// sequence ends in the excited state, like the Ramsey sequence does.
    pub fn segments(&self, x_ns: f64) -> Vec<Segment> {
        let (om, f) = (self.rabi_mhz, self.drive_ghz);
        let pi = self.pi_time_ns();
        match self.kind {
            ProtocolKind::Rabi => vec![Segment::pulse(x_ns, om, f, 0.0)],
            ProtocolKind::T1 => vec![Segment::pulse(pi, om, f, 0.0), Segment::wait(x_ns, f)],
            ProtocolKind::Ramsey => vec![
                Segment::pulse(pi / 2.0, om, f, 0.0),
                Segment::wait(x_ns, f),
                Segment::pulse(pi / 2.0, om, f, 0.0),
            ],
            ProtocolKind::Echo => vec![
                Segment::pulse(pi / 2.0, om, f, 0.0),
                Segment::wait(x_ns / 2.0, f),
                Segment::pulse(pi, om, f, 0.0),
                Segment::wait(x_ns / 2.0, f),
                Segment::pulse(pi / 2.0, om, f, PI),
            ],
        }
    }

    pub fn duration_ns(&self, x_ns: f64) -> f64 {
        self.segments(x_ns).iter().map(|s| s.duration_ns).sum()
    }

    pub fn max_duration_ns(&self) -> f64 {
        self.sweep
            .values()
            .into_iter()
            .map(|x| self.duration_ns(x))
            .fold(0.0, f64::max)
    }
}

pub fn generate_protocol(kind: &str, rabi_mhz: f64, drive_ghz: f64, sweep: Sweep) -> Result<Protocol> {
    let p = Protocol {
        kind: kind.parse()?,
        rabi_mhz,
        drive_ghz,
        sweep,
    };
    p.validate()?;
    Ok(p)
}
