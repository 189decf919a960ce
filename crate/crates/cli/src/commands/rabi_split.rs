use eneon::fitting::{fit_vacuum_rabi, VacuumRabiOptions};
use eneon::inout::avoided_crossing_map;
use eneon::TransmissionTrace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use super::spectrum::solver;
use super::Report;
use crate::config::{CrossingBranch, RunConfig};
use crate::failure::Failure;
use crate::output::Outputs;

/// Symmetric grid `-half..=half` with the centre exactly on zero.
fn centred(half: f64, step: f64) -> Vec<f64> {
    let n = (half / step + 1e-9).floor() as i64;
    (-n..=n).map(|k| k as f64 * step).collect()
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    let rs = &cfg.rabi_split;
    if !(rs.dv_step_mv > 0.0
        && rs.df_step_mhz > 0.0
        && rs.dv_half_width_mv > 0.0
        && rs.df_half_width_mhz > 0.0)
    {
        return Err(Failure::Config(
            "rabi_split widths and steps must be positive".into(),
        ));
    }
    if !(rs.noise_fraction >= 0.0 && rs.noise_fraction.is_finite()) {
        return Err(Failure::Config("rabi_split.noise_fraction must be >= 0".into()));
    }
    let res = cfg.resonator.params()?;
    let solver = solver(cfg)?;
    let sweep = cfg.sweep.sweep();
    sweep.validate()?;
    let v_ss = solver.trap.v_ss_mv;
    let (lo, hi) = match rs.crossing {
        CrossingBranch::Upper => (v_ss, sweep.stop_mv),
        CrossingBranch::Lower => (sweep.start_mv, v_ss),
    };
    let v_c = solver.voltage_for_f01(res.f_r_ghz, lo, hi)?;

    let voltages: Vec<f64> = centred(rs.dv_half_width_mv, rs.dv_step_mv)
        .iter()
        .map(|dv| v_c + dv)
        .collect();
    let df = centred(rs.df_half_width_mhz, rs.df_step_mhz);
    let (g, gamma) = (cfg.coupling.g_mhz, cfg.coupling.gamma_mhz);
    let map = avoided_crossing_map(&voltages, &df, |v| solver.f01(v), g, gamma, &res)?;
    out.write("rabi_split_map.csv", map.to_csv().as_bytes())?;
    out.write_json(
        "rabi_split_map.json",
        &json!({
            "crossing_v_rg_mv": map.crossing_v_rg_mv,
            "f_r_ghz": map.f_r_ghz,
            "dv_rg_mv": map.dv_rg_mv,
            "f_q_ghz": map.f_q_ghz,
        }),
    )?;

    let idx = map.on_resonance_index();
    let f_q = map.f_q_ghz[idx];
    let f_p: Vec<f64> = df.iter().map(|d| res.f_r_ghz + d * 1e-3).collect();
    let cut = TransmissionTrace::coupled(&f_p, &res, f_q, g, gamma);
    let mut y = cut.s21_sq();
    if rs.noise_fraction > 0.0 {
        let peak = y.iter().cloned().fold(0.0, f64::max);
        let normal =
            Normal::new(0.0, rs.noise_fraction * peak).map_err(|e| Failure::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for v in &mut y {
            *v += normal.sample(&mut rng);
        }
    }
    let mut table = eneon::table::NumericTable::new(&["f_p_ghz", "s21_sq", "phase_rad"]);
    for ((f, s), p) in f_p.iter().zip(&y).zip(cut.phase_rad()) {
        table.push(vec![*f, *s, p]);
    }
    out.write("rabi_split_cut.csv", table.to_csv().as_bytes())?;

    let options = VacuumRabiOptions {
        kappa_fixed_mhz: (!rs.fit_kappa).then_some(res.kappa_over_2pi_mhz),
        g_initial_mhz: None,
    };
    let fit = fit_vacuum_rabi(&f_p, &y, options)?;
    out.write_json(
        "rabi_split_fit.json",
        &json!({
            "crossing_v_rg_mv": v_c,
            "cut_f_q_ghz": f_q,
            "generating": {"g_mhz": g, "gamma_mhz": gamma, "kappa_over_2pi_mhz": res.kappa_over_2pi_mhz},
            "fit": fit,
        }),
    )?;

    let mut lines = vec![format!("crossing at V_rg = {v_c:.4} mV (f_q = {f_q:.6} GHz)")];
    let mut deferred = None;
    if fit.preferred == "coupled" {
        let c = &fit.coupled;
        let val = |n: &str| c.get(n).unwrap_or(f64::NAN);
        lines.push(format!("g/2pi     = {:.4} MHz", val("g_mhz")));
        lines.push(format!("gamma/2pi = {:.4} MHz", val("gamma_mhz")));
        lines.push(format!("kappa/2pi = {:.4} MHz", val("kappa_over_2pi_mhz")));
    } else if fit.lorentzian.converged {
        lines.push(format!(
            "single peak: f_r = {:.6} GHz, kappa/2pi = {:.4} MHz",
            fit.lorentzian.get("f_r_ghz").unwrap_or(f64::NAN),
            fit.lorentzian.get("kappa_over_2pi_mhz").unwrap_or(f64::NAN)
        ));
    } else {
        deferred = Some(Failure::FitNotConverged(format!(
            "vacuum-rabi: {}; lorentzian: {}",
            fit.coupled.message, fit.lorentzian.message
        )));
    }
    Ok(Report {
        summary: lines,
        inputs: Vec::new(),
        deferred,
    })
}
