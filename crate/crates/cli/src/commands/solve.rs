use eneon::quantum1d::{
    build_z_potential, dipole_matrix_elements, solve_schrodinger_1d, transition_set, TrapSolver,
    BOUNDARY_AMPLITUDE_LIMIT,
};
use eneon::table::NumericTable;
use eneon::units::{mev_to_ghz, ELECTRON_MASS};
use eneon::{EigenSolution, Grid1D};
use serde_json::json;

use super::Report;
use crate::cli::Axis;
use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::Outputs;

pub fn run(axis: Axis, vrg: Option<f64>, cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    match axis {
        Axis::Z => solve_z(cfg, out),
        Axis::Y => solve_y(vrg.unwrap_or(cfg.trap.v_rg_mv), cfg, out),
    }
}

fn energies_table(sol: &EigenSolution) -> NumericTable {
    let mut t = NumericTable::new(&["state", "energy_mev", "mean_position_nm", "unbound"]);
    for k in 0..sol.len() {
        t.push(vec![
            k as f64,
            sol.energies[k],
            sol.mean_position(k),
            f64::from(u8::from(sol.unbound[k])),
        ]);
    }
    t
}

fn wavefunction_table(sol: &EigenSolution, axis: &str, potential: &[f64]) -> NumericTable {
    let mut header = vec![format!("{axis}_nm"), "potential_mev".to_string()];
    header.extend((0..sol.len()).map(|k| format!("psi{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = NumericTable::new(&header);
    for (i, x) in sol.grid.positions().enumerate() {
        let mut row = vec![x, potential[i]];
        row.extend(sol.wavefunctions.iter().map(|psi| psi[i]));
        t.push(row);
    }
    t
}

/// The z grid deliberately ends inside the barrier, so only the vacuum side counts.
fn vacuum_edge_reached(sol: &EigenSolution) -> bool {
    sol.wavefunctions.iter().any(|psi| {
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        psi[psi.len() - 1].abs() > BOUNDARY_AMPLITUDE_LIMIT * peak
    })
}

fn solve_z(cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    let z = &cfg.z_model;
    let grid = Grid1D::spanning(z.z_min_nm, z.z_max_nm, z.dz_nm)?;
    let potential = build_z_potential(&z.params(), &grid)?;
    let sol = solve_schrodinger_1d(&potential, ELECTRON_MASS, z.n_states.max(2))?;
    out.write("solve_z_energies.csv", energies_table(&sol).to_csv().as_bytes())?;
    out.write(
        "solve_z_wavefunctions.csv",
        wavefunction_table(&sol, "z", potential.values())
            .to_csv()
            .as_bytes(),
    )?;
    let gap = sol.energies[1] - sol.energies[0];
    let summary = json!({
        "e0_mev": sol.energies[0],
        "e1_minus_e0_mev": gap,
        "f01_ghz": mev_to_ghz(gap),
        "energies_mev": sol.energies,
        "unbound": sol.unbound,
        "boundary_warning": vacuum_edge_reached(&sol),
        "lambda": z.params().lambda(),
    });
    out.write_json("solve_z.json", &summary)?;
    let mut lines = vec![
        format!("E0       = {:.4} meV", sol.energies[0]),
        format!("E1 - E0  = {gap:.4} meV"),
        format!("f01      = {:.2} GHz", mev_to_ghz(gap)),
    ];
    if vacuum_edge_reached(&sol) {
        lines.push("warning: a state reaches the grid edge; enlarge z_max_nm".into());
    }
    Ok(Report {
        summary: lines,
        ..Report::default()
    })
}

fn solve_y(v_rg_mv: f64, cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    let t = &cfg.trap;
    let solver = TrapSolver {
        trap: t.params(),
        grid: Grid1D::symmetric(t.half_width_nm, t.dy_nm)?,
        mass_kg: ELECTRON_MASS,
        f_r_ghz: cfg.resonator.f_r_ghz,
    };
    let sol = solver.solve(v_rg_mv, t.n_states.max(2))?;
    let transitions = transition_set(&sol, solver.f_r_ghz)?;
    let d = dipole_matrix_elements(&sol);
    let potential: Vec<f64> = sol
        .grid
        .positions()
        .map(|y| solver.trap.energy_mev(v_rg_mv, y))
        .collect();
    out.write("solve_y_energies.csv", energies_table(&sol).to_csv().as_bytes())?;
    out.write(
        "solve_y_wavefunctions.csv",
        wavefunction_table(&sol, "y", &potential).to_csv().as_bytes(),
    )?;
    let pairs: Vec<serde_json::Value> = transitions
        .iter()
        .map(|((i, j), f)| json!({"i": i, "j": j, "f_ghz": f, "dipole_nm": d[(i, j)]}))
        .collect();
    let summary = json!({
        "v_rg_mv": v_rg_mv,
        "energies_mev": sol.energies,
        "f01_ghz": transitions.f01(),
        "alpha_mhz": transitions.alpha_mhz,
        "detuning_mhz": transitions.detuning_mhz(),
        "transitions": pairs,
        "boundary_warning": sol.boundary_warning,
    });
    out.write_json("solve_y.json", &summary)?;
    let mut lines = vec![
        format!("V_rg     = {v_rg_mv} mV"),
        format!("E0       = {:.6} meV", sol.energies[0]),
        format!("E1 - E0  = {:.6} meV", sol.energies[1] - sol.energies[0]),
        format!("f01      = {:.6} GHz", transitions.f01()),
    ];
    if let Some(a) = transitions.alpha_mhz {
        lines.push(format!("alpha    = {a:.2} MHz"));
    }
    lines.push(format!("d01      = {:.4} nm", d[(0, 1)]));
    if sol.boundary_warning {
        lines.push("warning: a state reaches the grid edge; enlarge half_width_nm".into());
    }
    Ok(Report {
        summary: lines,
        ..Report::default()
    })
}
