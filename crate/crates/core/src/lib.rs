//! Simulation and fitting toolkit for a single electron trapped on a solid
//! neon surface and coupled to a superconducting microwave resonator.
//!
//! The crate is split by physical layer:
//!
//! - [`quantum1d`]: image-charge and in-plane trap potentials, the
//!   finite-difference Schrödinger solver, transitions and dipoles.
//! - [`cqed`]: electron-photon couplings, dispersive shifts, readout phase
//!   and two-tone spectroscopy.
//! - [`inout`]: input-output transmission of the bare and coupled resonator.
//! - [`dynamics`]: pulse protocols and Monte-Carlo density-matrix evolution.
//! - [`fitting`]: Levenberg-Marquardt engine and model-specific fitters.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cqed;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod inout;
pub mod quantum1d;
pub mod table;
pub mod units;

pub use error::{Error, ErrorKind, Result};

pub use cqed::{CouplingModel, DispersiveResult, ReadoutPhase, TwoToneTrace};
pub use dynamics::{DecoherenceParams, PopulationCurve, Protocol, ProtocolKind, QubitParams, Sampling};
pub use fitting::{FitProblem, FitResult, ParamBound};
pub use inout::{PhotonBudget, ResonatorParams, TransmissionTrace};
pub use quantum1d::{
    EigenSolution, Grid1D, Potential1D, PotentialLabel, ShortRange, SpectrumRow, TransitionSet, TrapParams,
    ZPotentialParams,
};
