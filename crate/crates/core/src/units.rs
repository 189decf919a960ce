//! Physical constants (CODATA 2018) and the internal unit system.
//!
//! Internally energies are meV, lengths nm, transition frequencies GHz,
//! couplings and linewidths MHz (ordinary frequency), times ns. Conversions
//! below are the only place where SI values enter.

use std::f64::consts::PI;

pub const PLANCK_H: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK_H / (2.0 * PI);
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const RYDBERG_EV: f64 = 13.605_693_122_994;

const MEV_IN_J: f64 = ELEMENTARY_CHARGE * 1e-3;

/// ħ²/(2m) in meV·nm².
pub fn kinetic_prefactor(mass_kg: f64) -> f64 {
    HBAR * HBAR / (2.0 * mass_kg) / MEV_IN_J * 1e18
}

/// e²/(4πε₀) in meV·nm.
pub fn coulomb_constant_mev_nm() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY) / MEV_IN_J * 1e9
}

pub fn mev_to_ghz(e_mev: f64) -> f64 {
    e_mev * MEV_IN_J / PLANCK_H * 1e-9
}

pub fn ghz_to_mev(f_ghz: f64) -> f64 {
    f_ghz * 1e9 * PLANCK_H / MEV_IN_J
}

pub fn ev_to_mev(e_ev: f64) -> f64 {
    e_ev * 1e3
}

pub fn angstrom_to_nm(l: f64) -> f64 {
    l * 0.1
}

pub fn um_to_nm(l: f64) -> f64 {
    l * 1e3
}

pub fn nm_to_um(l: f64) -> f64 {
    l * 1e-3
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(p_w: f64) -> f64 {
    10.0 * p_w.log10() + 30.0
}

/// Angular rate (rad/s) for an ordinary frequency in MHz.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e6
}
