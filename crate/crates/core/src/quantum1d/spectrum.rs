use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use super::potential::{build_y_potential, TrapParams};
use super::solver::{solve_schrodinger_1d, EigenSolution};
use super::transitions::{dipole_matrix_elements, transition_set, TransitionSet};
use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Inclusive voltage sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoltageSweep {
    pub start_mv: f64,
    pub stop_mv: f64,
    pub step_mv: f64,
}

impl VoltageSweep {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("sweep.start_mv", self.start_mv)?;
        ensure_finite("sweep.stop_mv", self.stop_mv)?;
        ensure_positive("sweep.step_mv", self.step_mv)?;
        if self.stop_mv < self.start_mv {
            return Err(Error::validation("sweep.stop_mv", "must be >= start_mv"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_mv - self.start_mv) / self.step_mv + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start_mv + k as f64 * self.step_mv).collect()
    }
}

/// Trap model plus numerical settings for one y-motion solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSolver {
    pub trap: TrapParams,
    pub grid: Grid1D,
    pub mass_kg: f64,
    pub f_r_ghz: f64,
}

impl TrapSolver {
    pub fn solve(&self, v_rg_mv: f64, n_states: usize) -> Result<EigenSolution> {
        let v = build_y_potential(&self.trap, v_rg_mv, &self.grid)?;
        solve_schrodinger_1d(&v, self.mass_kg, n_states)
    }

    pub fn transitions(&self, v_rg_mv: f64) -> Result<TransitionSet> {
        transition_set(&self.solve(v_rg_mv, 3)?, self.f_r_ghz)
    }

    pub fn f01(&self, v_rg_mv: f64) -> Result<f64> {
        Ok(transition_set(&self.solve(v_rg_mv, 2)?, self.f_r_ghz)?.f01())
    }

    pub fn row(&self, v_rg_mv: f64) -> SpectrumRow {
        match self.solve(v_rg_mv, 3) {
            Ok(sol) => {
                let t = transition_set(&sol, self.f_r_ghz).expect("three levels");
                let d = dipole_matrix_elements(&sol);
                SpectrumRow {
                    v_rg_mv,
                    f01_ghz: t.f01(),
                    f12_ghz: t.f(1, 2).unwrap_or(f64::NAN),
                    alpha_mhz: t.alpha_mhz.unwrap_or(f64::NAN),
                    d01_nm: d[(0, 1)],
                    d02_nm: d[(0, 2)],
                    d12_nm: d[(1, 2)],
                    boundary_warning: sol.boundary_warning,
                    error: None,
                }
            }
            Err(e) => SpectrumRow::failed(v_rg_mv, e.to_string()),
        }
    }

    /// Voltage on `[lo, hi]` where `f_01` equals `target_ghz`, by bisection.
    pub fn voltage_for_f01(&self, target_ghz: f64, lo_mv: f64, hi_mv: f64) -> Result<f64> {
        let g_lo = self.f01(lo_mv)? - target_ghz;
        let g_hi = self.f01(hi_mv)? - target_ghz;
        if g_lo.signum() == g_hi.signum() {
            return Err(Error::NoCrossing(format!(
                "f01 - {target_ghz} GHz has the same sign at {lo_mv} and {hi_mv} mV"
            )));
        }
        let (mut a, mut b, mut ga) = (lo_mv, hi_mv, g_lo);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if b - a < 1e-9 {
                break;
            }
            let gm = self.f01(m)? - target_ghz;
            if gm.signum() == ga.signum() {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub v_rg_mv: f64,
    pub f01_ghz: f64,
    pub f12_ghz: f64,
    pub alpha_mhz: f64,
    pub d01_nm: f64,
    pub d02_nm: f64,
    pub d12_nm: f64,
    pub boundary_warning: bool,
    pub error: Option<String>,
}

impl SpectrumRow {
    fn failed(v_rg_mv: f64, error: String) -> Self {
        Self {
            v_rg_mv,
            f01_ghz: f64::NAN,
            f12_ghz: f64::NAN,
            alpha_mhz: f64::NAN,
            d01_nm: f64::NAN,
            d02_nm: f64::NAN,
            d12_nm: f64::NAN,
            boundary_warning: false,
            error: Some(error),
        }
    }
}

/// Rows in ascending voltage; points are solved in parallel.
pub fn qubit_spectrum_vs_voltage(solver: &TrapSolver, sweep: &VoltageSweep) -> Result<Vec<SpectrumRow>> {
    sweep.validate()?;
    solver.trap.validate()?;
    Ok(sweep.points().into_par_iter().map(|v| solver.row(v)).collect())
}

/// Row with the lowest `f_01`.
pub fn sweet_spot(rows: &[SpectrumRow]) -> Option<&SpectrumRow> {
    rows.iter()
        .filter(|r| r.f01_ghz.is_finite())
        .min_by(|a, b| a.f01_ghz.total_cmp(&b.f01_ghz))
}

/// Voltages where `f_01` crosses `f_r`, linearly interpolated between rows.
pub fn resonance_crossings(rows: &[SpectrumRow], f_r_ghz: f64) -> Vec<f64> {
    rows.windows(2)
        .filter_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (ga, gb) = (a.f01_ghz - f_r_ghz, b.f01_ghz - f_r_ghz);
            if !(ga.is_finite() && gb.is_finite()) || ga.signum() == gb.signum() {
                return None;
            }
            Some(a.v_rg_mv + (b.v_rg_mv - a.v_rg_mv) * ga / (ga - gb))
        })
        .collect()
}

/// Number of strict interior local minima of `f_01` over the rows.
pub fn local_minima(rows: &[SpectrumRow]) -> usize {
    rows.windows(3)
        .filter(|w| w[1].f01_ghz < w[0].f01_ghz && w[1].f01_ghz <= w[2].f01_ghz)
        .count()
}
