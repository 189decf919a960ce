//! Run configuration: TOML file with nested sections, every key optional.

use std::path::Path;

use eneon::dynamics::{DecoherenceParams, Sampling, Sweep};
use eneon::quantum1d::VoltageSweep;
use eneon::{ResonatorParams, ShortRange, TrapParams, ZPotentialParams};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub realizations: usize,
    pub output_dir: Option<String>,
    pub z_model: ZSection,
    pub trap: TrapSection,
    pub sweep: SweepSection,
    pub resonator: ResonatorSection,
    pub coupling: CouplingSection,
    pub two_tone: TwoToneSection,
    pub rabi_split: RabiSplitSection,
    pub sampling: Sampling,
    pub timedomain: TimedomainSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            realizations: 5000,
            output_dir: None,
            z_model: ZSection::default(),
            trap: TrapSection::default(),
            sweep: SweepSection::default(),
            resonator: ResonatorSection::default(),
            coupling: CouplingSection::default(),
            two_tone: TwoToneSection::default(),
            rabi_split: RabiSplitSection::default(),
            sampling: Sampling::default(),
            timedomain: TimedomainSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZSection {
    pub barrier_u_ev: f64,
    pub cutoff_b_angstrom: f64,
    pub epsilon: f64,
    pub short_range: ShortRange,
    pub image_factor: Option<f64>,
    pub z_min_nm: f64,
    pub z_max_nm: f64,
    pub dz_nm: f64,
    pub n_states: usize,
}

impl Default for ZSection {
    fn default() -> Self {
        let p = ZPotentialParams::default();
        Self {
            barrier_u_ev: p.barrier_u_ev,
            cutoff_b_angstrom: p.cutoff_b_angstrom,
            epsilon: p.epsilon,
            short_range: p.short_range,
            image_factor: p.image_factor,
            z_min_nm: -0.5,
            z_max_nm: 200.0,
            dz_nm: 0.01,
            n_states: 3,
        }
    }
}

impl ZSection {
    pub fn params(&self) -> ZPotentialParams {
        ZPotentialParams {
            barrier_u_ev: self.barrier_u_ev,
            cutoff_b_angstrom: self.cutoff_b_angstrom,
            epsilon: self.epsilon,
            short_range: self.short_range,
            image_factor: self.image_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapSection {
    pub k2_mev_per_um2: f64,
    pub eta_v_per_um: f64,
    pub zeta_per_um2: f64,
    pub v_ss_mv: f64,
    pub v_rg_mv: f64,
    pub half_width_nm: f64,
    pub dy_nm: f64,
    pub n_states: usize,
}

impl Default for TrapSection {
    fn default() -> Self {
        let t = TrapParams::default();
        Self {
            k2_mev_per_um2: t.k2_mev_per_um2,
            eta_v_per_um: t.eta_v_per_um,
            zeta_per_um2: t.zeta_per_um2,
            v_ss_mv: t.v_ss_mv,
            v_rg_mv: 516.0,
            half_width_nm: 1500.0,
            dy_nm: 0.5,
            n_states: 3,
        }
    }
}

impl TrapSection {
    pub fn params(&self) -> TrapParams {
        TrapParams {
            k2_mev_per_um2: self.k2_mev_per_um2,
            eta_v_per_um: self.eta_v_per_um,
            zeta_per_um2: self.zeta_per_um2,
            v_ss_mv: self.v_ss_mv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub start_mv: f64,
    pub stop_mv: f64,
    pub step_mv: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            start_mv: 143.0,
            stop_mv: 539.0,
            step_mv: 4.0,
        }
    }
}

impl SweepSection {
    pub fn sweep(&self) -> VoltageSweep {
        VoltageSweep {
            start_mv: self.start_mv,
            stop_mv: self.stop_mv,
            step_mv: self.step_mv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonatorSection {
    pub f_r_ghz: f64,
    pub kappa_over_2pi_mhz: f64,
    pub kappa_in_mhz: Option<f64>,
    pub kappa_out_mhz: Option<f64>,
    pub kappa_i_mhz: f64,
}

impl Default for ResonatorSection {
    fn default() -> Self {
        Self {
            f_r_ghz: 6.426,
            kappa_over_2pi_mhz: 0.4,
            kappa_in_mhz: None,
            kappa_out_mhz: None,
            kappa_i_mhz: 0.0,
        }
    }
}

impl ResonatorSection {
    /// Unset ports share what the internal loss leaves of κ.
    pub fn params(&self) -> eneon::Result<ResonatorParams> {
        let port = (self.kappa_over_2pi_mhz - self.kappa_i_mhz) / 2.0;
        let r = ResonatorParams {
            f_r_ghz: self.f_r_ghz,
            kappa_over_2pi_mhz: self.kappa_over_2pi_mhz,
            kappa_in_mhz: self.kappa_in_mhz.unwrap_or(port),
            kappa_out_mhz: self.kappa_out_mhz.unwrap_or(port),
            kappa_i_mhz: self.kappa_i_mhz,
        };
        r.validate()?;
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub g_mhz: f64,
    pub gamma_mhz: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self {
            g_mhz: 3.5,
            gamma_mhz: 1.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoToneSection {
    pub enabled: bool,
    pub f_start_ghz: f64,
    pub f_stop_ghz: f64,
    pub f_step_mhz: f64,
    pub gamma_mhz: f64,
    pub pump_strength: f64,
}

impl Default for TwoToneSection {
    fn default() -> Self {
        Self {
            enabled: false,
            f_start_ghz: 6.3,
            f_stop_ghz: 6.55,
            f_step_mhz: 0.5,
            gamma_mhz: 2.8,
            pump_strength: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingBranch {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiSplitSection {
    pub crossing: CrossingBranch,
    pub dv_half_width_mv: f64,
    pub dv_step_mv: f64,
    pub df_half_width_mhz: f64,
    pub df_step_mhz: f64,
    pub noise_fraction: f64,
    pub fit_kappa: bool,
}

impl Default for RabiSplitSection {
    fn default() -> Self {
        Self {
            crossing: CrossingBranch::Upper,
            dv_half_width_mv: 1.0,
            dv_step_mv: 0.05,
            df_half_width_mhz: 15.0,
            df_step_mhz: 0.05,
            noise_fraction: 0.0,
            fit_kappa: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KindSection {
    pub start_ns: f64,
    pub stop_ns: f64,
    pub step_ns: f64,
    pub rabi_mhz: f64,
    /// Drive minus qubit frequency.
    pub detuning_mhz: f64,
    pub decoherence: DecoherenceParams,
}

impl KindSection {
    pub fn sweep(&self) -> eneon::Result<Sweep> {
        Sweep::new(self.start_ns, self.stop_ns, self.step_ns)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimedomainSection {
    pub f_q_ghz: f64,
    pub rabi: KindSection,
    pub t1: KindSection,
    pub ramsey: KindSection,
    pub echo: KindSection,
}

/// Static detuning spread giving a Gaussian Ramsey decay with T2* = 50 ns.
pub const DEFAULT_RAMSEY_SIGMA_MHZ: f64 = 4.501_581_580_785_531;

impl Default for TimedomainSection {
    fn default() -> Self {
        let relax = DecoherenceParams {
            t1_us: Some(15.0),
            ..DecoherenceParams::default()
        };
        let kind = |start, stop, step, rabi, decoherence| KindSection {
            start_ns: start,
            stop_ns: stop,
            step_ns: step,
            rabi_mhz: rabi,
            detuning_mhz: 0.0,
            decoherence,
        };
        Self {
            f_q_ghz: 6.426,
            rabi: kind(0.0, 500.0, 2.0, 10.0, relax),
            t1: kind(0.0, 60_000.0, 1_000.0, 200.0, relax),
            ramsey: kind(
                0.0,
                150.0,
                1.5,
                200.0,
                DecoherenceParams {
                    quasi_static_sigma_mhz: DEFAULT_RAMSEY_SIGMA_MHZ,
                    ..relax
                },
            ),
            echo: kind(
                0.0,
                800.0,
                8.0,
                200.0,
                DecoherenceParams {
                    pink_amplitude_mhz: 1.0,
                    pink_exponent: 1.0,
                    white_dephasing_mhz: 1.0,
                    ..relax
                },
            ),
        }
    }
}

impl Default for KindSection {
    fn default() -> Self {
        TimedomainSection::default().rabi
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Config(m) => Failure::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// `(key, unit, description)` for every configuration key.
pub const CONFIG_KEYS: &[(&str, &str, &str)] = &[
    ("seed", "-", "master random seed"),
    ("realizations", "-", "Monte-Carlo noise realizations per curve"),
    (
        "output_dir",
        "path",
        "output directory when neither --out nor ENEON_OUT is set",
    ),
    ("z_model.barrier_u_ev", "eV", "surface barrier height U"),
    ("z_model.cutoff_b_angstrom", "Å", "short-range cutoff b"),
    ("z_model.epsilon", "-", "dielectric constant of solid neon"),
    (
        "z_model.short_range",
        "clamp|hard-wall-at-b",
        "potential on 0 < z < b",
    ),
    ("z_model.image_factor", "-", "override for (ε−1)/(ε+1)"),
    ("z_model.z_min_nm", "nm", "grid start (inside the barrier)"),
    ("z_model.z_max_nm", "nm", "grid end"),
    ("z_model.dz_nm", "nm", "grid spacing"),
    ("z_model.n_states", "-", "eigenstates to report"),
    ("trap.k2_mev_per_um2", "meV/µm²", "harmonic coefficient k2"),
    ("trap.eta_v_per_um", "V/µm", "gate lever arm η"),
    ("trap.zeta_per_um2", "1/µm²", "quartic coefficient ζ"),
    ("trap.v_ss_mv", "mV", "sweet-spot voltage"),
    ("trap.v_rg_mv", "mV", "gate voltage for `solve y` without --vrg"),
    ("trap.half_width_nm", "nm", "half width of the symmetric y grid"),
    ("trap.dy_nm", "nm", "y grid spacing"),
    ("trap.n_states", "-", "eigenstates to report"),
    ("sweep.start_mv", "mV", "first V_rg of spectrum-map"),
    ("sweep.stop_mv", "mV", "last V_rg (inclusive)"),
    ("sweep.step_mv", "mV", "V_rg step"),
    ("resonator.f_r_ghz", "GHz", "resonator frequency"),
    ("resonator.kappa_over_2pi_mhz", "MHz", "total linewidth κ/2π"),
    (
        "resonator.kappa_in_mhz",
        "MHz",
        "input port rate (default: half of κ − κ_i)",
    ),
    (
        "resonator.kappa_out_mhz",
        "MHz",
        "output port rate (default: half of κ − κ_i)",
    ),
    ("resonator.kappa_i_mhz", "MHz", "internal loss rate"),
    (
        "coupling.g_mhz",
        "MHz",
        "g01/2π at the resonance crossing; calibrates the zero-point field",
    ),
    (
        "coupling.gamma_mhz",
        "MHz",
        "qubit linewidth γ/2π in the coupled transmission",
    ),
    (
        "two_tone.enabled",
        "bool",
        "also write the two-tone phase map in spectrum-map",
    ),
    ("two_tone.f_start_ghz", "GHz", "first spectroscopy frequency"),
    ("two_tone.f_stop_ghz", "GHz", "last spectroscopy frequency"),
    ("two_tone.f_step_mhz", "MHz", "spectroscopy step"),
    ("two_tone.gamma_mhz", "MHz", "qubit linewidth γ/2π"),
    ("two_tone.pump_strength", "-", "saturation parameter s"),
    (
        "rabi_split.crossing",
        "lower|upper",
        "which resonance crossing to map",
    ),
    (
        "rabi_split.dv_half_width_mv",
        "mV",
        "V_rg half window around the crossing",
    ),
    ("rabi_split.dv_step_mv", "mV", "V_rg step"),
    (
        "rabi_split.df_half_width_mhz",
        "MHz",
        "probe half window around f_r",
    ),
    ("rabi_split.df_step_mhz", "MHz", "probe step"),
    (
        "rabi_split.noise_fraction",
        "-",
        "Gaussian noise on the line cut, relative to its peak",
    ),
    (
        "rabi_split.fit_kappa",
        "bool",
        "fit κ instead of holding it at resonator.kappa_over_2pi_mhz",
    ),
    (
        "sampling.noise_step_ns",
        "ns",
        "time grid of the 1/f detuning series",
    ),
    (
        "sampling.shots",
        "-",
        "projective shots per point (unset: exact average)",
    ),
    ("timedomain.f_q_ghz", "GHz", "qubit frequency"),
    (
        "timedomain.<kind>.start_ns",
        "ns",
        "first sweep value (kind: rabi, t1, ramsey, echo)",
    ),
    ("timedomain.<kind>.stop_ns", "ns", "last sweep value (inclusive)"),
    ("timedomain.<kind>.step_ns", "ns", "sweep step"),
    (
        "timedomain.<kind>.rabi_mhz",
        "MHz",
        "Rabi frequency Ω_R of the pulses",
    ),
    (
        "timedomain.<kind>.detuning_mhz",
        "MHz",
        "drive minus qubit frequency",
    ),
    (
        "timedomain.<kind>.decoherence.t1_us",
        "µs",
        "relaxation time (unset: none)",
    ),
    (
        "timedomain.<kind>.decoherence.quasi_static_sigma_mhz",
        "MHz",
        "std-dev of the static detuning",
    ),
    (
        "timedomain.<kind>.decoherence.pink_amplitude_mhz",
        "MHz",
        "1/f noise amplitude at 1 Hz, S = A²(1 Hz/f)^α MHz²/Hz",
    ),
    (
        "timedomain.<kind>.decoherence.pink_exponent",
        "-",
        "1/f exponent α in [0.5, 1.5]",
    ),
    (
        "timedomain.<kind>.decoherence.white_dephasing_mhz",
        "1/µs",
        "Markovian dephasing rate Γφ",
    ),
];

pub fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|k| k.0.len()).max().unwrap_or(0);
    let defaults = RunConfig::default();
    let mut out = String::from("Configuration keys (TOML; every key optional):\n");
    for (key, unit, what) in CONFIG_KEYS {
        let def = default_value(&defaults, key)
            .map(|d| format!(" [default: {d}]"))
            .unwrap_or_default();
        out.push_str(&format!("  {key:width$}  [{unit}] {what}{def}\n"));
    }
    out.push_str("  (timedomain defaults differ per kind; see README)\n");
    out
}

fn default_value(cfg: &RunConfig, key: &str) -> Option<String> {
    if key.contains('<') {
        return None;
    }
    let mut v = serde_json::to_value(cfg).ok()?;
    for part in key.split('.') {
        v = v.get(part)?.clone();
    }
    Some(match v {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    })
}
