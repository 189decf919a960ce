//! Electron-photon coupling and dispersive readout.
//!
//! Couplings are ordinary frequencies in MHz (`g/2π`), obtained from the
//! dipole matrix through a zero-point field that is calibrated against a
//! measured vacuum-Rabi coupling rather than predicted absolutely.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::quantum1d::TransitionSet;
use crate::units::{ELEMENTARY_CHARGE, PLANCK_H};

/// Below this ratio `|Δ01| / g01` the dispersive expansion is flagged.
pub const DISPERSIVE_VALIDITY_RATIO: f64 = 5.0;

/// Single-photon field (V/m) such that `g = e·d·E/h`.
pub fn calibrate_zero_point_field(g01_mhz: f64, d01_nm: f64) -> Result<f64> {
    ensure_positive("g01_mhz", g01_mhz)?;
    ensure_finite("d01_nm", d01_nm)?;
    if d01_nm == 0.0 {
        return Err(Error::validation(
            "d01_nm",
            "zero dipole: the zero-point field cannot be calibrated",
        ));
    }
    Ok(PLANCK_H * g01_mhz * 1e6 / (ELEMENTARY_CHARGE * d01_nm.abs() * 1e-9))
}

/// `g = e·|d|·E/h` in MHz for a dipole in nm and a field in V/m.
pub fn coupling_from_dipole(d_nm: f64, field_v_per_m: f64) -> f64 {
    ELEMENTARY_CHARGE * d_nm.abs() * 1e-9 * field_v_per_m / PLANCK_H * 1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub zero_point_field_v_per_m: f64,
    /// `(i, j)`, `i < j` → `g_ij` (MHz, magnitude).
    #[serde(with = "pair_map")]
    pub g_mhz: BTreeMap<(usize, usize), f64>,
    /// Qubit linewidth γ/2π (MHz).
    pub gamma_mhz: f64,
}

impl CouplingModel {
    pub fn g(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.g_mhz.get(&key).copied().unwrap_or(0.0)
    }
}

/// Couplings for every pair of levels in `dipoles`.
pub fn coupling_strengths(
    dipoles: &DMatrix<f64>,
    field_v_per_m: f64,
    gamma_mhz: f64,
) -> Result<CouplingModel> {
    ensure_finite("zero_point_field", field_v_per_m)?;
    let n = dipoles.nrows();
    let mut g_mhz = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            g_mhz.insert((i, j), coupling_from_dipole(dipoles[(i, j)], field_v_per_m));
        }
    }
    Ok(CouplingModel {
        zero_point_field_v_per_m: field_v_per_m,
        g_mhz,
        gamma_mhz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveResult {
    #[serde(with = "pair_map")]
    pub chi_mhz: BTreeMap<(usize, usize), f64>,
    #[serde(with = "pair_map")]
    pub detuning_mhz: BTreeMap<(usize, usize), f64>,
    pub chi_total_mhz: f64,
    /// Ground-state readout phase at the bare resonator frequency (degrees).
    pub phase_shift_deg: f64,
    /// `|Δ01| < 5·g01`: the dispersive expansion is questionable.
    pub validity_warning: bool,
}

impl DispersiveResult {
    pub fn chi(&self, i: usize, j: usize) -> f64 {
        self.chi_mhz.get(&(i, j)).copied().unwrap_or(0.0)
    }
}

/// `χ = χ01 − χ12/2 + χ02/2` with `χ_ij = g_ij²/Δ_ij`.
pub fn dispersive_shift_multilevel(
    couplings: &CouplingModel,
    transitions: &TransitionSet,
    kappa_over_2pi_mhz: f64,
) -> Result<DispersiveResult> {
    ensure_positive("kappa_over_2pi_mhz", kappa_over_2pi_mhz)?;
    let mut chi_mhz = BTreeMap::new();
    let mut detuning_mhz = BTreeMap::new();
    for pair in [(0, 1), (1, 2), (0, 2)] {
        let g = couplings.g(pair.0, pair.1);
        let Some(f) = transitions.f(pair.0, pair.1) else {
            if g != 0.0 {
                return Err(Error::validation(
                    "transitions",
                    format!("coupling on {}->{} but no transition frequency", pair.0, pair.1),
                ));
            }
            continue;
        };
        let delta = (f - transitions.f_r_ghz) * 1e3;
        if delta == 0.0 {
            return Err(Error::Resonance(pair.0, pair.1));
        }
        detuning_mhz.insert(pair, delta);
        chi_mhz.insert(pair, g * g / delta);
    }
    let chi = |p| chi_mhz.get(&p).copied().unwrap_or(0.0);
    let chi_total_mhz = chi((0, 1)) - chi((1, 2)) / 2.0 + chi((0, 2)) / 2.0;
    let validity_warning = detuning_mhz[&(0, 1)].abs() < DISPERSIVE_VALIDITY_RATIO * couplings.g(0, 1);
    Ok(DispersiveResult {
        chi_mhz,
        detuning_mhz,
        chi_total_mhz,
        phase_shift_deg: readout_phase_shift(chi_total_mhz, kappa_over_2pi_mhz)?.ground_deg,
        validity_warning,
    })
}

/// `χ ≈ g²α/(Δ(Δ+α))`, all in MHz.
pub fn dispersive_shift_transmon(g_mhz: f64, alpha_mhz: f64, delta_mhz: f64) -> Result<f64> {
    if delta_mhz == 0.0 {
        return Err(Error::Pole("detuning is zero".into()));
    }
    if delta_mhz + alpha_mhz == 0.0 {
        return Err(Error::Pole("detuning equals minus the anharmonicity".into()));
    }
    Ok(g_mhz * g_mhz * alpha_mhz / (delta_mhz * (delta_mhz + alpha_mhz)))
}

/// Transmission phase at the bare resonator frequency for each qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutPhase {
    pub ground_deg: f64,
    pub excited_deg: f64,
}

/// `∓arctan(2χ/(κ/2π))`: the ground state is probed at detuning `−χ`, the
/// excited state at `+χ`.
pub fn readout_phase_shift(chi_mhz: f64, kappa_over_2pi_mhz: f64) -> Result<ReadoutPhase> {
    ensure_positive("kappa_over_2pi_mhz", kappa_over_2pi_mhz)?;
    let phi = (2.0 * chi_mhz / kappa_over_2pi_mhz).atan().to_degrees();
    Ok(ReadoutPhase {
        ground_deg: -phi,
        excited_deg: phi,
    })
}

/// Steady-state excited population of a driven two-level system with
/// saturation parameter `s` and FWHM linewidth `gamma_mhz`.
pub fn saturated_population(detuning_mhz: f64, gamma_mhz: f64, s: f64) -> f64 {
    let x = detuning_mhz / (gamma_mhz / 2.0);
    0.5 * s / (1.0 + s + x * x)
}

/// `s = 2(Ω/γ)²`, so `s = 1` at half saturation.
pub fn saturation_from_rabi(pump_rabi_mhz: f64, gamma_mhz: f64) -> f64 {
    2.0 * (pump_rabi_mhz / gamma_mhz).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoToneTrace {
    pub f_s_ghz: Vec<f64>,
    pub p_e: Vec<f64>,
    pub phase_deg: Vec<f64>,
}

/// Phase at the bare resonator frequency while a pump sweeps `f_s`.
///
/// The unpumped baseline is the ground-state phase; the trace moves towards
/// the excited-state phase in proportion to `P_e`, giving a dip for `χ < 0`
/// and a peak for `χ > 0`.
pub fn two_tone_response(
    f_s_ghz: &[f64],
    f_q_ghz: f64,
    gamma_mhz: f64,
    chi_mhz: f64,
    kappa_over_2pi_mhz: f64,
    pump_strength: f64,
) -> Result<TwoToneTrace> {
    ensure_positive("pump_strength", pump_strength)?;
    ensure_positive("gamma_mhz", gamma_mhz)?;
    let readout = readout_phase_shift(chi_mhz, kappa_over_2pi_mhz)?;
    let p_e: Vec<f64> = f_s_ghz
        .iter()
        .map(|f| saturated_population((f - f_q_ghz) * 1e3, gamma_mhz, pump_strength))
        .collect();
    let phase_deg = p_e
        .iter()
        .map(|p| readout.excited_deg * (2.0 * p - 1.0))
        .collect();
    Ok(TwoToneTrace {
        f_s_ghz: f_s_ghz.to_vec(),
        p_e,
        phase_deg,
    })
}

/// Serializes `(i, j)` keys as `"i-j"` strings for JSON.
mod pair_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<(usize, usize), f64>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, f64> = map.iter().map(|(&(i, j), &v)| (format!("{i}-{j}"), v)).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let m = BTreeMap::<String, f64>::deserialize(d)?;
        m.into_iter()
            .map(|(k, v)| {
                let (i, j) = k
                    .split_once('-')
                    .ok_or_else(|| D::Error::custom("expected `i-j`"))?;
                let i = i.parse().map_err(D::Error::custom)?;
                let j = j.parse().map_err(D::Error::custom)?;
                Ok(((i, j), v))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;

    fn transitions(f01: f64, f12: f64, f_r: f64) -> TransitionSet {
        let e = [0.0, units::ghz_to_mev(f01), units::ghz_to_mev(f01 + f12)];
        TransitionSet::from_energies_mev(&e, f_r).unwrap()
    }

    fn model(g01: f64, g12: f64, g02: f64) -> CouplingModel {
        CouplingModel {
            zero_point_field_v_per_m: 1.0,
            g_mhz: [((0, 1), g01), ((1, 2), g12), ((0, 2), g02)]
                .into_iter()
                .collect(),
            gamma_mhz: 1.0,
        }
    }

    #[test]
    fn calibration_round_trip() {
        let d01 = 37.97;
        let field = calibrate_zero_point_field(4.5, d01).unwrap();
        let g = coupling_from_dipole(d01, field);
        assert!((g - 4.5).abs() <= 1e-12 * 4.5);
        let half = calibrate_zero_point_field(4.5, 2.0 * d01).unwrap();
        assert!((half - field / 2.0).abs() < 1e-12 * field);
        assert!(calibrate_zero_point_field(4.5, 0.0).is_err());
        assert!(calibrate_zero_point_field(0.0, 1.0).is_err());
    }

    #[test]
    fn couplings_scale_with_field_and_vanish_with_dipole() {
        let mut d = DMatrix::zeros(3, 3);
        d[(0, 1)] = 40.0;
        d[(1, 0)] = 40.0;
        d[(1, 2)] = -55.0;
        d[(2, 1)] = -55.0;
        let a = coupling_strengths(&d, 0.5, 1.0).unwrap();
        let b = coupling_strengths(&d, 1.0, 1.0).unwrap();
        assert_eq!(a.g(0, 2), 0.0);
        assert!((b.g(0, 1) - 2.0 * a.g(0, 1)).abs() < 1e-15);
        assert!(a.g(2, 1) > 0.0);
    }

    #[test]
    fn two_level_reduction() {
        let t = transitions(6.326, 6.3655, 6.426);
        let r = dispersive_shift_multilevel(&model(4.5, 0.0, 0.0), &t, 0.4).unwrap();
        let delta = t.detuning_mhz();
        assert_eq!(r.chi_total_mhz, 4.5 * 4.5 / delta);
        assert!(r.chi(0, 1) < 0.0);
        assert!(!r.validity_warning);
    }

    #[test]
    fn identity_matches_level_shift_summation() {
        // Resonator pull with the qubit in |0⟩ and |1⟩, then half the difference.
        let t = transitions(6.326, 6.3655, 6.426);
        let m = model(4.5, 6.3, 0.31);
        let r = dispersive_shift_multilevel(&m, &t, 0.4).unwrap();
        let chi = |i: usize, j: usize| {
            let g = m.g(i, j);
            g * g / ((t.f(i, j).unwrap() - 6.426) * 1e3)
        };
        let pull0 = -chi(0, 1) - chi(0, 2);
        let pull1 = chi(0, 1) - chi(1, 2);
        let independent = (pull1 - pull0) / 2.0;
        assert!((r.chi_total_mhz - independent).abs() < 1e-14);
    }

    #[test]
    fn sign_flips_leave_chi_unchanged() {
        let t = transitions(6.326, 6.3655, 6.426);
        let mut d = DMatrix::from_row_slice(3, 3, &[0.0, 38.0, -2.6, 38.0, 0.0, 53.4, -2.6, 53.4, 0.0]);
        let a = dispersive_shift_multilevel(&coupling_strengths(&d, 0.5, 1.0).unwrap(), &t, 0.4).unwrap();
        d.iter_mut().for_each(|v| *v = -*v);
        let b = dispersive_shift_multilevel(&coupling_strengths(&d, 0.5, 1.0).unwrap(), &t, 0.4).unwrap();
        assert_eq!(a.chi_total_mhz, b.chi_total_mhz);
    }

    #[test]
    fn resonance_and_validity() {
        let t = transitions(6.426, 6.5, 6.426);
        assert!(matches!(
            dispersive_shift_multilevel(&model(4.5, 0.0, 0.0), &t, 0.4),
            Err(Error::Resonance(0, 1))
        ));
        let t = transitions(6.436, 6.5, 6.426);
        let r = dispersive_shift_multilevel(&model(4.5, 0.0, 0.0), &t, 0.4).unwrap();
        assert!(r.validity_warning);
    }

    #[test]
    fn transmon_formula() {
        let chi = dispersive_shift_transmon(4.5, 40.0, -100.0).unwrap();
        assert!((chi - 0.135).abs() < 1e-15);
        assert_eq!(dispersive_shift_transmon(4.5, 0.0, -100.0).unwrap(), 0.0);
        assert!(dispersive_shift_transmon(4.5, 40.0, 0.0).is_err());
        assert!(dispersive_shift_transmon(4.5, 40.0, -40.0).is_err());
    }

    #[test]
    fn readout_phase() {
        let p = readout_phase_shift(0.12, 0.4).unwrap();
        assert!((p.excited_deg - 0.6f64.atan().to_degrees()).abs() < 1e-12);
        assert!((p.excited_deg - 30.96).abs() < 0.01);
        assert_eq!(p.ground_deg, -p.excited_deg);
        assert_eq!(readout_phase_shift(0.0, 0.4).unwrap().ground_deg, 0.0);
        assert!((readout_phase_shift(1e9, 0.4).unwrap().excited_deg - 90.0).abs() < 1e-6);
        assert!(readout_phase_shift(0.1, 0.0).is_err());
    }

    #[test]
    fn two_tone_dip_and_peak() {
        let fs: Vec<f64> = (0..401).map(|k| 5.9 + k as f64 * 0.0005).collect();
        let dip = two_tone_response(&fs, 6.0, 2.8, -0.05, 0.4, 0.5).unwrap();
        let base = dip.phase_deg[0];
        let centre = dip.phase_deg[200];
        assert!(centre < base);
        assert!((base - readout_phase_shift(-0.05, 0.4).unwrap().ground_deg).abs() < 0.01);
        let peak = two_tone_response(&fs, 6.0, 2.8, 0.05, 0.4, 0.5).unwrap();
        assert!(peak.phase_deg[200] > peak.phase_deg[0]);
        assert!(two_tone_response(&fs, 6.0, 2.8, 0.05, 0.4, 0.0).is_err());
    }

    #[test]
    fn saturation_broadening_width() {
        // P_e falls to half its peak at |δ| = (γ/2)·sqrt(1+s)
        for s in [0.1, 1.0, 3.0] {
            let gamma = 2.8;
            let peak = saturated_population(0.0, gamma, s);
            let half = saturated_population(gamma / 2.0 * (1.0 + s).sqrt(), gamma, s);
            assert!((half - peak / 2.0).abs() < 1e-14);
        }
        assert!((saturation_from_rabi(1.4, 2.8) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dispersive_result_json_round_trip() {
        let t = transitions(6.326, 6.3655, 6.426);
        let r = dispersive_shift_multilevel(&model(4.5, 6.3, 0.31), &t, 0.4).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"0-1\""));
        let back: DispersiveResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
