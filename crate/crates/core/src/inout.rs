//! Input-output transmission of the resonator, bare and coupled to the qubit.
//!
//! User-facing linewidths are `κ/2π`, `γ/2π`, `g/2π` in MHz. The photon
//! budget and the coupled `S21` use the corresponding angular rates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::table::NumericTable;
use crate::units::{self, PLANCK_H};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorParams {
    pub f_r_ghz: f64,
    /// Total linewidth κ/2π (MHz).
    pub kappa_over_2pi_mhz: f64,
    pub kappa_in_mhz: f64,
    pub kappa_out_mhz: f64,
    pub kappa_i_mhz: f64,
}

impl ResonatorParams {
    /// Overcoupled symmetric two-port: `κ_in = κ_out = κ/2`, `κ_i = 0`.
    pub fn symmetric(f_r_ghz: f64, kappa_over_2pi_mhz: f64) -> Result<Self> {
        let r = Self {
            f_r_ghz,
            kappa_over_2pi_mhz,
            kappa_in_mhz: kappa_over_2pi_mhz / 2.0,
            kappa_out_mhz: kappa_over_2pi_mhz / 2.0,
            kappa_i_mhz: 0.0,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("resonator.f_r_ghz", self.f_r_ghz)?;
        ensure_positive("resonator.kappa_over_2pi_mhz", self.kappa_over_2pi_mhz)?;
        ensure_non_negative("resonator.kappa_in_mhz", self.kappa_in_mhz)?;
        ensure_non_negative("resonator.kappa_out_mhz", self.kappa_out_mhz)?;
        ensure_non_negative("resonator.kappa_i_mhz", self.kappa_i_mhz)?;
        let sum = self.kappa_in_mhz + self.kappa_out_mhz + self.kappa_i_mhz;
        if (sum - self.kappa_over_2pi_mhz).abs() > 1e-9 * self.kappa_over_2pi_mhz.max(1.0) {
            return Err(Error::validation(
                "resonator",
                format!(
                    "kappa_in + kappa_out + kappa_i = {sum} MHz differs from kappa_over_2pi = {} MHz",
                    self.kappa_over_2pi_mhz
                ),
            ));
        }
        Ok(())
    }

    pub fn quality_factor(&self) -> f64 {
        self.f_r_ghz * 1e3 / self.kappa_over_2pi_mhz
    }
}

impl Default for ResonatorParams {
    fn default() -> Self {
        Self::symmetric(6.426, 0.4).expect("static parameters")
    }
}

/// `(A/A0)² = (κ/2π)² / (4(f − f_r)² + (κ/2π)²)`
pub fn lorentzian_amplitude(f_ghz: f64, res: &ResonatorParams) -> f64 {
    let k = res.kappa_over_2pi_mhz;
    let d = (f_ghz - res.f_r_ghz) * 1e3;
    k * k / (4.0 * d * d + k * k)
}

/// `φ = arctan(4π(f − f_r)/κ)` in radians.
pub fn transmission_phase(f_ghz: f64, res: &ResonatorParams) -> f64 {
    (2.0 * (f_ghz - res.f_r_ghz) * 1e3 / res.kappa_over_2pi_mhz).atan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudget {
    pub input_power_dbm: f64,
    pub n_bar: f64,
}

/// Mean intracavity photon number for an input power.
///
/// With `simplified` the overcoupled symmetric form `P/(2h f_r κ)` is used,
/// otherwise `κ_in·P/(h f_r (κ_in + κ_out + κ_i)²)`.
pub fn photon_occupancy(p_in_dbm: f64, res: &ResonatorParams, simplified: bool) -> PhotonBudget {
    let p = units::dbm_to_watts(p_in_dbm);
    PhotonBudget {
        input_power_dbm: p_in_dbm,
        n_bar: p * photons_per_watt(res, simplified),
    }
}

pub fn required_input_power(n_bar: f64, res: &ResonatorParams, simplified: bool) -> Result<PhotonBudget> {
    ensure_positive("n_bar", n_bar)?;
    let watts = n_bar / photons_per_watt(res, simplified);
    Ok(PhotonBudget {
        input_power_dbm: units::watts_to_dbm(watts),
        n_bar,
    })
}

fn photons_per_watt(res: &ResonatorParams, simplified: bool) -> f64 {
    let hf = PLANCK_H * res.f_r_ghz * 1e9;
    if simplified {
        1.0 / (2.0 * hf * units::mhz_to_angular(res.kappa_over_2pi_mhz))
    } else {
        let total = units::mhz_to_angular(res.kappa_in_mhz + res.kappa_out_mhz + res.kappa_i_mhz);
        units::mhz_to_angular(res.kappa_in_mhz) / (hf * total * total)
    }
}

/// Coupled qubit-resonator transmission with `κ_in = κ_out = κ/2`.
///
/// `gamma_mhz` enters as the angular half-width `γ = 2π·gamma_mhz` of the
/// qubit response. The qubit branch is `g²/(γ + i(ω_q − ω_p))`, which keeps
/// `|S21| ≤ 1` and pulls the resonator away from the qubit.
pub fn s21_coupled(
    f_p_ghz: f64,
    res: &ResonatorParams,
    f_q_ghz: f64,
    g_mhz: f64,
    gamma_mhz: f64,
) -> Complex64 {
    // Angular units of 2π·MHz; the common 1e6 factor cancels.
    let half_kappa = PI * res.kappa_over_2pi_mhz;
    let g = 2.0 * PI * g_mhz;
    let gamma = 2.0 * PI * gamma_mhz;
    let cavity = 2.0 * PI * (res.f_r_ghz - f_p_ghz) * 1e3;
    let qubit = Complex64::new(gamma, 2.0 * PI * (f_q_ghz - f_p_ghz) * 1e3);
    let denom = Complex64::new(half_kappa, cavity) + g * g / qubit;
    Complex64::new(half_kappa, 0.0) / denom
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionTrace {
    pub f_p_ghz: Vec<f64>,
    pub s21: Vec<Complex64>,
}

impl TransmissionTrace {
    pub fn coupled(f_p_ghz: &[f64], res: &ResonatorParams, f_q_ghz: f64, g_mhz: f64, gamma_mhz: f64) -> Self {
        Self {
            f_p_ghz: f_p_ghz.to_vec(),
            s21: f_p_ghz
                .iter()
                .map(|&f| s21_coupled(f, res, f_q_ghz, g_mhz, gamma_mhz))
                .collect(),
        }
    }

    pub fn s21_sq(&self) -> Vec<f64> {
        self.s21.iter().map(|s| s.norm_sqr()).collect()
    }

    pub fn phase_rad(&self) -> Vec<f64> {
        self.s21.iter().map(|s| s.arg()).collect()
    }

    /// `(f_p_ghz, s21_sq, phase_rad)` table.
    pub fn to_csv(&self) -> String {
        let mut t = NumericTable::new(&["f_p_ghz", "s21_sq", "phase_rad"]);
        for (f, s) in self.f_p_ghz.iter().zip(&self.s21) {
            t.push(vec![*f, s.norm_sqr(), s.arg()]);
        }
        t.to_csv()
    }
}

/// Probe frequencies of the local maxima of `y`, ignoring bumps below
/// `min_fraction` of the global maximum.
pub fn peak_frequencies(f: &[f64], y: &[f64], min_fraction: f64) -> Vec<f64> {
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (1..y.len().saturating_sub(1))
        .filter(|&k| y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] >= min_fraction * max)
        .map(|k| {
            // Parabolic refinement through the three samples.
            let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            f[k] + shift * (f[k + 1] - f[k - 1]) / 2.0
        })
        .collect()
}

/// `|S21|²` over (V_rg, f_p) around a qubit-resonator crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidedCrossingMap {
    pub crossing_v_rg_mv: f64,
    pub f_r_ghz: f64,
    pub dv_rg_mv: Vec<f64>,
    pub df_p_mhz: Vec<f64>,
    pub f_q_ghz: Vec<f64>,
    /// Row-major: one row per voltage, one column per probe offset.
    pub s21_sq: Vec<Vec<f64>>,
}

impl AvoidedCrossingMap {
    /// Index of the column closest to resonance.
    pub fn on_resonance_index(&self) -> usize {
        self.f_q_ghz
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - self.f_r_ghz).abs().total_cmp(&(b.1 - self.f_r_ghz).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    /// `(dv_rg_mv, df_p_mhz, s21_sq)` in row-major order.
    pub fn to_csv(&self) -> String {
        let mut t = NumericTable::new(&["dv_rg_mv", "df_p_mhz", "s21_sq"]);
        for (dv, row) in self.dv_rg_mv.iter().zip(&self.s21_sq) {
            for (df, s) in self.df_p_mhz.iter().zip(row) {
                t.push(vec![*dv, *df, *s]);
            }
        }
        t.to_csv()
    }
}

/// Builds the map from a qubit frequency model `f_q(V_rg)`.
///
/// `v_rg_mv` must bracket a sign change of `f_q − f_r`; the crossing is
/// located by linear interpolation between the bracketing voltages and the
/// map is reported relative to it.
pub fn avoided_crossing_map<F>(
    v_rg_mv: &[f64],
    df_p_mhz: &[f64],
    f_q_of_v: F,
    g_mhz: f64,
    gamma_mhz: f64,
    res: &ResonatorParams,
) -> Result<AvoidedCrossingMap>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    res.validate()?;
    ensure_non_negative("g_mhz", g_mhz)?;
    ensure_non_negative("gamma_mhz", gamma_mhz)?;
    let f_q: Vec<f64> = v_rg_mv
        .par_iter()
        .map(|&v| f_q_of_v(v))
        .collect::<Result<Vec<f64>>>()?;
    let crossing = v_rg_mv
        .windows(2)
        .zip(f_q.windows(2))
        .find_map(|(v, f)| {
            let (a, b) = (f[0] - res.f_r_ghz, f[1] - res.f_r_ghz);
            (a == 0.0 || a.signum() != b.signum()).then(|| {
                if a == b {
                    v[0]
                } else {
                    v[0] + (v[1] - v[0]) * a / (a - b)
                }
            })
        })
        .ok_or_else(|| {
            Error::NoCrossing(format!(
                "f_q spans [{:.6}, {:.6}] GHz, resonator at {} GHz",
                f_q.iter().cloned().fold(f64::INFINITY, f64::min),
                f_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                res.f_r_ghz
            ))
        })?;
    let s21_sq = f_q
        .par_iter()
        .map(|&fq| {
            df_p_mhz
                .iter()
                .map(|df| s21_coupled(res.f_r_ghz + df * 1e-3, res, fq, g_mhz, gamma_mhz).norm_sqr())
                .collect()
        })
        .collect();
    Ok(AvoidedCrossingMap {
        crossing_v_rg_mv: crossing,
        f_r_ghz: res.f_r_ghz,
        dv_rg_mv: v_rg_mv.iter().map(|v| v - crossing).collect(),
        df_p_mhz: df_p_mhz.to_vec(),
        f_q_ghz: f_q,
        s21_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn res() -> ResonatorParams {
        ResonatorParams::symmetric(6.426, 0.4).unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn lorentzian_and_phase_values() {
        let r = res();
        assert_eq!(lorentzian_amplitude(6.426, &r), 1.0);
        assert!((lorentzian_amplitude(6.4262, &r) - 0.5).abs() < 1e-9);
        assert_eq!(transmission_phase(6.426, &r), 0.0);
        assert!((transmission_phase(6.4262, &r) - PI / 4.0).abs() < 1e-9);
        assert!((transmission_phase(1e3, &r) - PI / 2.0).abs() < 1e-6);
        assert!(
            (transmission_phase(6.426 - 0.0001, &r) + transmission_phase(6.426 + 0.0001, &r)).abs() < 1e-9
        );
        assert!((r.quality_factor() - 16065.0).abs() < 1.0);
    }

    #[test]
    fn sampled_fwhm_matches_linewidth() {
        let r = res();
        let f = linspace(6.425, 6.427, 20001);
        let above: Vec<f64> = f
            .iter()
            .filter(|&&x| lorentzian_amplitude(x, &r) >= 0.5)
            .cloned()
            .collect();
        let width_mhz = (above.last().unwrap() - above[0]) * 1e3;
        assert!((width_mhz - 0.4).abs() < 2e-4);
    }

    #[test]
    fn partitions_must_sum() {
        let mut r = res();
        r.kappa_i_mhz = 0.1;
        assert!(r.validate().is_err());
        assert!(ResonatorParams::symmetric(6.4, -0.1).is_err());
    }

    #[test]
    fn photon_budget() {
        let r = res();
        let p = required_input_power(1.0, &r, true).unwrap();
        assert!((p.input_power_dbm + 136.7).abs() < 0.05, "{}", p.input_power_dbm);
        let back = photon_occupancy(p.input_power_dbm, &r, true);
        assert!((back.n_bar - 1.0).abs() < 1e-12);
        let full = photon_occupancy(p.input_power_dbm, &r, false);
        assert!((full.n_bar - back.n_bar).abs() < 1e-15);
        let doubled = photon_occupancy(p.input_power_dbm + 10.0 * 2f64.log10(), &r, true);
        assert!((doubled.n_bar - 2.0).abs() < 1e-12);
        assert!(required_input_power(0.0, &r, true).is_err());
    }

    #[test]
    fn decoupled_limit_is_bare_lorentzian() {
        let r = res();
        for f in linspace(6.42, 6.432, 97) {
            let s = s21_coupled(f, &r, 6.3, 0.0, 1.7);
            assert!((s.norm_sqr() - lorentzian_amplitude(f, &r)).abs() < 1e-14);
            assert!((s.arg() - transmission_phase(f, &r)).abs() < 1e-14);
        }
    }

    #[test]
    fn strong_coupling_splitting() {
        // g ≫ γ, κ: peaks at f_r ± g
        let r = ResonatorParams::symmetric(6.426, 0.1).unwrap();
        let f = linspace(6.396, 6.456, 60001);
        let t = TransmissionTrace::coupled(&f, &r, 6.426, 20.0, 0.1);
        let peaks = peak_frequencies(&f, &t.s21_sq(), 0.1);
        assert_eq!(peaks.len(), 2);
        let split_mhz = (peaks[1] - peaks[0]) * 1e3;
        assert!((split_mhz - 40.0).abs() < 0.005 * 40.0, "{split_mhz}");
    }

    #[test]
    fn dispersive_pull_away_from_qubit() {
        let r = res();
        let f = linspace(6.425, 6.427, 20001);
        let t = TransmissionTrace::coupled(&f, &r, 6.526, 3.5, 0.1);
        let y = t.s21_sq();
        let k = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
        let shift_mhz = (f[k] - 6.426) * 1e3;
        assert!((shift_mhz + 3.5 * 3.5 / 100.0).abs() < 2e-3, "{shift_mhz}");
    }

    #[test]
    fn on_resonance_linecut_has_two_peaks() {
        let r = res();
        let f = linspace(6.416, 6.436, 4001);
        let t = TransmissionTrace::coupled(&f, &r, 6.426, 3.5, 1.7);
        let peaks = peak_frequencies(&f, &t.s21_sq(), 0.1);
        assert_eq!(peaks.len(), 2);
        let split = (peaks[1] - peaks[0]) * 1e3;
        assert!((split - 7.0).abs() < 1.0, "{split}");
    }

    #[test]
    fn splitting_approaches_2g_monotonically() {
        let r = ResonatorParams::symmetric(6.426, 0.4).unwrap();
        let f = linspace(6.356, 6.496, 140001);
        let mut prev_err = f64::INFINITY;
        for g in [2.0, 4.0, 8.0, 16.0, 32.0] {
            let t = TransmissionTrace::coupled(&f, &r, 6.426, g, 1.0);
            let p = peak_frequencies(&f, &t.s21_sq(), 0.1);
            let err = ((p[1] - p[0]) * 1e3 / (2.0 * g) - 1.0).abs();
            assert!(err <= prev_err, "g = {g}: {err} > {prev_err}");
            prev_err = err;
        }
    }

    proptest! {
        #[test]
        fn passive_transmission_is_bounded(
            df in -20.0f64..20.0, fq in 6.3f64..6.5, g in 0.0f64..30.0,
            gamma in 0.0f64..10.0, kappa in 0.01f64..5.0,
        ) {
            let r = ResonatorParams::symmetric(6.426, kappa).unwrap();
            let s = s21_coupled(6.426 + df * 1e-3, &r, fq, g, gamma).norm_sqr();
            prop_assert!((0.0..=1.0 + 1e-9).contains(&s));
        }
    }

    #[test]
    fn map_crossing_and_symmetry() {
        // Locally linear f_q through resonance: 10 MHz per mV.
        let r = res();
        let v: Vec<f64> = linspace(-1.0, 1.0, 41).iter().map(|d| 516.0 + d).collect();
        let df = linspace(-10.0, 10.0, 201);
        let fq = |v: f64| Ok(6.426 + 0.010 * (v - 516.0));
        let map = avoided_crossing_map(&v, &df, fq, 3.5, 1.7, &r).unwrap();
        assert!((map.crossing_v_rg_mv - 516.0).abs() < 1e-9);
        let n = v.len();
        let m = df.len();
        for i in 0..n {
            for j in 0..m {
                let a = map.s21_sq[i][j];
                let b = map.s21_sq[n - 1 - i][m - 1 - j];
                assert!((a - b).abs() < 1e-9);
            }
        }
        let mid = map.on_resonance_index();
        assert_eq!(mid, 20);
        let cut = TransmissionTrace::coupled(
            &df.iter().map(|d| 6.426 + d * 1e-3).collect::<Vec<_>>(),
            &r,
            map.f_q_ghz[mid],
            3.5,
            1.7,
        );
        assert_eq!(cut.s21_sq(), map.s21_sq[mid]);
        // far-detuned column looks like the bare resonator
        let far = avoided_crossing_map(&[400.0, 401.0, 516.5], &df, fq, 3.5, 1.7, &r).unwrap();
        let bare: Vec<f64> = df
            .iter()
            .map(|d| lorentzian_amplitude(6.426 + d * 1e-3, &r))
            .collect();
        let err = far.s21_sq[0]
            .iter()
            .zip(&bare)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn map_without_crossing_is_diagnosed() {
        let r = res();
        let fq = |v: f64| Ok(6.0 + 0.001 * v);
        let err = avoided_crossing_map(&[0.0, 1.0], &[0.0], fq, 3.5, 1.7, &r).unwrap_err();
        assert!(matches!(err, Error::NoCrossing(_)));
    }
}
