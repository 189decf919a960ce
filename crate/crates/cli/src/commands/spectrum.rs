use eneon::cqed::{
    calibrate_zero_point_field, coupling_strengths, dispersive_shift_multilevel, two_tone_response,
};
use eneon::quantum1d::{
    dipole_matrix_elements, local_minima, qubit_spectrum_vs_voltage, resonance_crossings, spectrum_csv,
    sweet_spot, SpectrumRow, TrapSolver,
};
use eneon::table::NumericTable;
use eneon::units::ELECTRON_MASS;
use eneon::{Grid1D, Result as CoreResult};
use rayon::prelude::*;
use serde_json::json;

use super::Report;
use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::Outputs;

pub fn solver(cfg: &RunConfig) -> Result<TrapSolver, Failure> {
    Ok(TrapSolver {
        trap: cfg.trap.params(),
        grid: Grid1D::symmetric(cfg.trap.half_width_nm, cfg.trap.dy_nm)?,
        mass_kg: ELECTRON_MASS,
        f_r_ghz: cfg.resonator.f_r_ghz,
    })
}

/// Zero-point field that gives the configured g at the first resonance crossing.
pub fn calibrated_field(solver: &TrapSolver, v_cross_mv: f64, g_mhz: f64) -> Result<f64, Failure> {
    let sol = solver.solve(v_cross_mv, 2)?;
    let d = dipole_matrix_elements(&sol);
    Ok(calibrate_zero_point_field(g_mhz, d[(0, 1)])?)
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    let solver = solver(cfg)?;
    let sweep = cfg.sweep.sweep();
    let rows = qubit_spectrum_vs_voltage(&solver, &sweep)?;
    out.write("spectrum.csv", spectrum_csv(&rows).as_bytes())?;

    let f_r = cfg.resonator.f_r_ghz;
    let kappa = cfg.resonator.kappa_over_2pi_mhz;
    let crossings = resonance_crossings(&rows, f_r);
    let minima = local_minima(&rows);
    let failed: Vec<serde_json::Value> = rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| json!({"v_rg_mv": r.v_rg_mv, "error": e}))
        })
        .collect();
    let sweet = sweet_spot(&rows);
    let field = match crossings.first() {
        Some(&v) => Some(calibrated_field(&solver, v, cfg.coupling.g_mhz)?),
        None => None,
    };

    let dispersive = match (sweet, field) {
        (Some(s), Some(e)) => dispersive_at(&solver, s.v_rg_mv, e, cfg.coupling.gamma_mhz, kappa).ok(),
        _ => None,
    };
    let summary = json!({
        "sweet_spot_mv": sweet.map(|s| s.v_rg_mv),
        "sweet_spot_f01_ghz": sweet.map(|s| s.f01_ghz),
        "sweet_spot_alpha_mhz": sweet.map(|s| s.alpha_mhz),
        "resonance_crossings_mv": crossings,
        "local_minima": minima,
        "failed_points": failed,
        "boundary_warnings": rows.iter().filter(|r| r.boundary_warning).count(),
        "zero_point_field_v_per_m": field,
        "dispersive_at_sweet_spot": dispersive,
    });
    out.write_json("spectrum_summary.json", &summary)?;

    let mut lines = Vec::new();
    match sweet {
        Some(s) => lines.push(format!(
            "sweet spot   {:.1} mV  f01 = {:.4} GHz  alpha = {:.1} MHz",
            s.v_rg_mv, s.f01_ghz, s.alpha_mhz
        )),
        None => lines.push("sweet spot   none (every point failed)".into()),
    }
    let list: Vec<String> = crossings.iter().map(|v| format!("{v:.1}")).collect();
    lines.push(format!("f01 = f_r at [{}] mV", list.join(", ")));
    if minima > 1 {
        lines.push(format!("warning: {minima} local minima of f01 in the sweep"));
    }
    if !failed.is_empty() {
        lines.push(format!("warning: {} sweep points failed", failed.len()));
    }

    if cfg.two_tone.enabled {
        let Some(field) = field else {
            return Err(Failure::Core(eneon::Error::NoCrossing(
                "two-tone map needs a resonance crossing to calibrate the coupling".into(),
            )));
        };
        let csv = two_tone_map(cfg, &solver, &rows, field)?;
        out.write("two_tone_map.csv", csv.as_bytes())?;
        lines.push("two-tone map written".into());
    }
    Ok(Report {
        summary: lines,
        ..Report::default()
    })
}

fn dispersive_at(
    solver: &TrapSolver,
    v_rg_mv: f64,
    field: f64,
    gamma_mhz: f64,
    kappa: f64,
) -> CoreResult<eneon::DispersiveResult> {
    let sol = solver.solve(v_rg_mv, 3)?;
    let t = eneon::quantum1d::transition_set(&sol, solver.f_r_ghz)?;
    let c = coupling_strengths(&dipole_matrix_elements(&sol), field, gamma_mhz)?;
    dispersive_shift_multilevel(&c, &t, kappa)
}

fn two_tone_map(
    cfg: &RunConfig,
    solver: &TrapSolver,
    rows: &[SpectrumRow],
    field: f64,
) -> Result<String, Failure> {
    let tt = &cfg.two_tone;
    let f_r = cfg.resonator.f_r_ghz;
    let n = ((tt.f_stop_ghz - tt.f_start_ghz) * 1e3 / tt.f_step_mhz + 1e-9).floor() as usize + 1;
    let f_s: Vec<f64> = (0..n)
        .map(|k| tt.f_start_ghz + k as f64 * tt.f_step_mhz * 1e-3)
        .collect();
    let per_row: Vec<Option<Vec<f64>>> = rows
        .par_iter()
        .map(|r| {
            if r.error.is_some() {
                return None;
            }
            let d = dispersive_at(
                solver,
                r.v_rg_mv,
                field,
                tt.gamma_mhz,
                cfg.resonator.kappa_over_2pi_mhz,
            )
            .ok()?;
            let trace = two_tone_response(
                &f_s,
                r.f01_ghz,
                tt.gamma_mhz,
                d.chi_total_mhz,
                cfg.resonator.kappa_over_2pi_mhz,
                tt.pump_strength,
            )
            .ok()?;
            Some(trace.phase_deg)
        })
        .collect();
    let mut t = NumericTable::new(&["v_rg_mv", "delta_fs_mhz", "phase_deg"]);
    for (r, phases) in rows.iter().zip(per_row) {
        let Some(phases) = phases else { continue };
        for (f, p) in f_s.iter().zip(phases) {
            t.push(vec![r.v_rg_mv, (f - f_r) * 1e3, p]);
        }
    }
    Ok(t.to_csv())
}
