use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::solver::EigenSolution;
use crate::error::{Error, Result};
use crate::units;

/// Transition frequencies between the solved levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSet {
    /// `(i, j)` with `i < j` → `(E_j − E_i)/h` in GHz.
    freqs_ghz: BTreeMap<(usize, usize), f64>,
    /// `f_12 − f_01` in MHz; absent with fewer than three levels.
    pub alpha_mhz: Option<f64>,
    /// Resonator frequency the detuning refers to (GHz).
    pub f_r_ghz: f64,
}

impl TransitionSet {
    pub fn from_energies_mev(energies: &[f64], f_r_ghz: f64) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::validation("energies", "need at least two levels"));
        }
        let mut freqs_ghz = BTreeMap::new();
        for i in 0..energies.len() {
            for j in i + 1..energies.len() {
                freqs_ghz.insert((i, j), units::mev_to_ghz(energies[j] - energies[i]));
            }
        }
        let alpha_mhz = (energies.len() >= 3).then(|| (freqs_ghz[&(1, 2)] - freqs_ghz[&(0, 1)]) * 1e3);
        Ok(Self {
            freqs_ghz,
            alpha_mhz,
            f_r_ghz,
        })
    }

    /// `f_ij` in GHz, symmetric in its arguments.
    pub fn f(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.freqs_ghz.get(&key).copied()
    }

    pub fn f01(&self) -> f64 {
        self.freqs_ghz[&(0, 1)]
    }

    /// `f_01 − f_r` in MHz.
    pub fn detuning_mhz(&self) -> f64 {
        (self.f01() - self.f_r_ghz) * 1e3
    }

    pub fn levels(&self) -> usize {
        self.freqs_ghz.keys().map(|&(_, j)| j + 1).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.freqs_ghz.iter().map(|(&k, &v)| (k, v))
    }
}

pub fn transition_set(sol: &EigenSolution, f_r_ghz: f64) -> Result<TransitionSet> {
    TransitionSet::from_energies_mev(&sol.energies, f_r_ghz)
}

/// `d_ij = dx·Σ ψ_i(x) x ψ_j(x)` in nm.
pub fn dipole_matrix_elements(sol: &EigenSolution) -> DMatrix<f64> {
    let n = sol.len();
    let xs: Vec<f64> = sol.grid.positions().collect();
    let dx = sol.grid.dx();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = sol.wavefunctions[i]
                .iter()
                .zip(&sol.wavefunctions[j])
                .zip(&xs)
                .map(|((a, b), x)| a * x * b)
                .sum::<f64>()
                * dx;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}
