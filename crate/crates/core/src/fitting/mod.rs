//! Least-squares engine and the model fitters built on it.

mod lm;
mod models;

pub use lm::{aic, least_squares, FitProblem, FitResult, ModelFn, ParamBound, Tolerances};
pub use models::{
    compare_decay_families, extract_qubit_line, fit_decay, fit_lorentzian, fit_rabi_oscillation,
    fit_vacuum_rabi, DecayComparison, DecayFamily, VacuumRabiFit, VacuumRabiOptions, DECAY_NAMES, LINE_NAMES,
    RABI_NAMES,
};
