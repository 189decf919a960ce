//! Bound states of the electron: out-of-plane image-charge binding and the
//! in-plane motional qubit of the minimal trap model.

mod grid;
mod io;
mod potential;
mod solver;
mod spectrum;
mod transitions;
pub mod tridiag;

pub use grid::Grid1D;
pub use io::{read_potential_csv, spectrum_csv, SPECTRUM_HEADER};
pub use potential::{
    build_y_potential, build_z_potential, Potential1D, PotentialLabel, ShortRange, TrapParams,
    ZPotentialParams,
};
pub use solver::{solve_schrodinger_1d, EigenSolution, BOUNDARY_AMPLITUDE_LIMIT};
pub use spectrum::{
    local_minima, qubit_spectrum_vs_voltage, resonance_crossings, sweet_spot, SpectrumRow, TrapSolver,
    VoltageSweep,
};
pub use transitions::{dipole_matrix_elements, transition_set, TransitionSet};

/// Default out-of-plane grid: z ∈ [−5 Å, 60 nm] at 0.1 Å.
pub fn default_z_grid() -> Grid1D {
    Grid1D::spanning(-0.5, 60.0, 0.01).expect("static grid")
}

/// Default in-plane grid: y ∈ [−1.5 µm, 1.5 µm] at 0.5 nm.
pub fn default_y_grid() -> Grid1D {
    Grid1D::symmetric(1500.0, 0.5).expect("static grid")
}
