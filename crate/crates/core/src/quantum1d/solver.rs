use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use super::potential::Potential1D;
use super::tridiag::SymTridiagonal;
use crate::error::{ensure_positive, Error, Result};
use crate::units;

/// Relative amplitude at the grid edge above which the box is too narrow.
pub const BOUNDARY_AMPLITUDE_LIMIT: f64 = 1e-8;
/// Components smaller than this (in nm^-1/2) do not fix the sign.
const SIGN_THRESHOLD: f64 = 1e-12;

/// Lowest eigenpairs of `H = −(ħ²/2m)d²/dx² + V` on a grid.
///
/// Energies are in meV, wavefunctions in nm^-1/2 with `dx·Σψ² = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSolution {
    pub grid: Grid1D,
    pub energies: Vec<f64>,
    pub wavefunctions: Vec<Vec<f64>>,
    pub mass_kg: f64,
    /// Per state: energy above the lower of the two boundary potentials.
    pub unbound: Vec<bool>,
    /// Some state has non-negligible amplitude at the grid edge.
    pub boundary_warning: bool,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `dx·Σψ_k²`
    pub fn norm(&self, k: usize) -> f64 {
        self.grid.dx() * self.wavefunctions[k].iter().map(|v| v * v).sum::<f64>()
    }

    /// Interior sign changes of state `k`, ignoring the numerically empty tails.
    pub fn node_count(&self, k: usize) -> usize {
        let psi = &self.wavefunctions[k];
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = peak * 1e-6;
        let mut last_sign = 0.0;
        let mut nodes = 0;
        for &v in psi.iter().filter(|v| v.abs() > floor) {
            let s = v.signum();
            if last_sign != 0.0 && s != last_sign {
                nodes += 1;
            }
            last_sign = s;
        }
        nodes
    }

    /// ⟨x⟩ of state `k` in nm.
    pub fn mean_position(&self, k: usize) -> f64 {
        self.grid.dx()
            * self.wavefunctions[k]
                .iter()
                .zip(self.grid.positions())
                .map(|(p, x)| p * p * x)
                .sum::<f64>()
    }
}

/// Solves for the lowest `n_states` eigenpairs with Dirichlet boundaries.
pub fn solve_schrodinger_1d(potential: &Potential1D, mass_kg: f64, n_states: usize) -> Result<EigenSolution> {
    ensure_positive("mass_kg", mass_kg)?;
    let grid = *potential.grid();
    if n_states == 0 || n_states >= grid.len() {
        return Err(Error::validation(
            "n_states",
            format!("must be in 1..{}, got {n_states}", grid.len()),
        ));
    }
    let dx = grid.dx();
    let t = units::kinetic_prefactor(mass_kg) / (dx * dx);
    let diag: Vec<f64> = potential.values().iter().map(|v| v + 2.0 * t).collect();
    let off = vec![-t; grid.len() - 1];
    let matrix = SymTridiagonal::new(diag, off)?;
    let (energies, vectors) = matrix.lowest(n_states)?;

    let scale = dx.sqrt().recip();
    let wavefunctions: Vec<Vec<f64>> = vectors
        .into_iter()
        .map(|v| {
            let mut psi: Vec<f64> = v.into_iter().map(|c| c * scale).collect();
            fix_sign(&mut psi);
            psi
        })
        .collect();

    let values = potential.values();
    let edge = values[0].min(values[values.len() - 1]);
    let unbound = energies.iter().map(|&e| e > edge).collect();
    let boundary_warning = wavefunctions.iter().any(|psi| {
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let edge_amp = psi[0].abs().max(psi[psi.len() - 1].abs());
        edge_amp > BOUNDARY_AMPLITUDE_LIMIT * peak
    });

    Ok(EigenSolution {
        grid,
        energies,
        wavefunctions,
        mass_kg,
        unbound,
        boundary_warning,
    })
}

fn fix_sign(psi: &mut [f64]) {
    if let Some(first) = psi.iter().find(|v| v.abs() > SIGN_THRESHOLD) {
        if *first < 0.0 {
            psi.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
