use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "eneon",
    version,
    about = "Electron-on-solid-neon charge qubit: spectra, transmission, time-domain simulation and fits"
)]
pub struct Cli {
    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master random seed (overrides `seed`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, env = "ENEON_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Monte-Carlo realizations (overrides `realizations`)
    #[arg(long, global = true)]
    pub realizations: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Eigenstates of the out-of-plane (z) or in-plane trap (y) motion
    Solve {
        axis: Axis,
        /// Gate voltage V_rg in mV for the y model
        #[arg(long)]
        vrg: Option<f64>,
    },
    /// f01, f12 and dipoles versus V_rg, optionally the two-tone phase map
    SpectrumMap,
    /// Avoided-crossing transmission map and vacuum Rabi fit at resonance
    RabiSplit,
    /// Simulate and fit a time-domain protocol
    Timedomain { kind: Kind },
    /// Fit a CSV trace
    Fit {
        file: PathBuf,
        #[arg(long)]
        model: FitModel,
        /// Hold κ/2π (MHz) fixed in the vacuum Rabi fit
        #[arg(long)]
        kappa: Option<f64>,
        /// Fixed exponent for decay-stretched (fitted when absent)
        #[arg(long)]
        exponent: Option<f64>,
        /// Resonator frequency (GHz) for the qubit-line sign check
        #[arg(long = "f-r")]
        f_r: Option<f64>,
    },
    /// Run manifests
    Manifest {
        #[command(subcommand)]
        action: ManifestAction,
    },
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum ManifestAction {
    /// Re-run the recorded command and compare output hashes
    Verify { manifest: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Z,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Rabi,
    T1,
    Ramsey,
    Echo,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Rabi => "rabi",
            Kind::T1 => "t1",
            Kind::Ramsey => "ramsey",
            Kind::Echo => "echo",
        }
    }
}

/// Column conventions: `f_p_ghz,s21_sq` for lorentzian and vacuum-rabi,
/// `sweep_ns,p_e` for decays and rabi, `f_s_ghz,phase_deg` for qubit-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Lorentzian,
    VacuumRabi,
    DecayExponential,
    DecayGaussian,
    DecayStretched,
    DecayCompare,
    Rabi,
    QubitLine,
}

impl FitModel {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

impl Command {
    /// Arguments that reproduce this command, without global flags.
    pub fn to_args(&self) -> Vec<String> {
        let s = |v: &str| v.to_string();
        match self {
            Command::Solve { axis, vrg } => {
                let mut a = vec![s("solve"), s(if *axis == Axis::Z { "z" } else { "y" })];
                if let Some(v) = vrg {
                    a.extend([s("--vrg"), v.to_string()]);
                }
                a
            }
            Command::SpectrumMap => vec![s("spectrum-map")],
            Command::RabiSplit => vec![s("rabi-split")],
            Command::Timedomain { kind } => vec![s("timedomain"), s(kind.name())],
            Command::Fit {
                file,
                model,
                kappa,
                exponent,
                f_r,
            } => {
                let path = std::fs::canonicalize(file).unwrap_or_else(|_| file.clone());
                let mut a = vec![s("fit"), path.display().to_string(), s("--model"), model.name()];
                for (flag, v) in [("--kappa", kappa), ("--exponent", exponent), ("--f-r", f_r)] {
                    if let Some(v) = v {
                        a.extend([s(flag), v.to_string()]);
                    }
                }
                a
            }
            Command::Manifest {
                action: ManifestAction::Verify { manifest },
            } => vec![s("manifest"), s("verify"), manifest.display().to_string()],
        }
    }
}
