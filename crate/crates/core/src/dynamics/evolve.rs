use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QubitParams, Segment};
use crate::error::{Error, Result};

const TRACE_TOLERANCE: f64 = 1e-6;

/// Qubit density matrix in the basis (g, e).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix2<Complex64>);

impl DensityMatrix {
    pub fn ground() -> Self {
        Self(Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
    }

    pub fn p_e(&self) -> f64 {
        self.0[(1, 1)].re
    }

    pub fn trace(&self) -> f64 {
        (self.0[(0, 0)] + self.0[(1, 1)]).re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = (self.0[(0, 1)] + self.0[(1, 0)].conj()) / 2.0;
        let mid = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        [mid - r, mid + r]
    }

    fn rotate(&mut self, u: &Matrix2<Complex64>) {
        self.0 = u * self.0 * u.adjoint();
    }

    /// Amplitude damping and white dephasing over `t_us`.
    fn damp(&mut self, gamma1: f64, gamma_phi: f64, t_us: f64) {
        if gamma1 == 0.0 && gamma_phi == 0.0 {
            return;
        }
        let decay = (-gamma1 * t_us).exp();
        let pe = self.0[(1, 1)];
        self.0[(1, 1)] = pe * decay;
        self.0[(0, 0)] += pe * (1.0 - decay);
        let c = (-0.5 * gamma1 * t_us - gamma_phi * t_us).exp();
        self.0[(0, 1)] *= c;
        self.0[(1, 0)] *= c;
    }

    /// Free precession by the accumulated phase `2π∫δ dt`.
    fn precess(&mut self, phase: f64) {
        let w = Complex64::from_polar(1.0, phase);
        self.0[(0, 1)] *= w;
        self.0[(1, 0)] *= w.conj();
    }
}

/// Detuning noise for one realization: a static offset plus an optional
/// piecewise-constant series on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub static_mhz: f64,
    pub series_mhz: Vec<f64>,
    pub step_ns: f64,
}

impl NoiseRealization {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn constant(static_mhz: f64) -> Self {
        Self {
            static_mhz,
            ..Self::default()
        }
    }

    fn cell(&self, t_ns: f64) -> Option<usize> {
        if self.series_mhz.is_empty() {
            None
        } else {
            Some(((t_ns / self.step_ns) as usize).min(self.series_mhz.len() - 1))
        }
    }

    fn at_cell(&self, cell: Option<usize>) -> f64 {
        self.static_mhz + cell.map_or(0.0, |k| self.series_mhz[k])
    }

    /// End of the constant-noise interval containing `t_ns`.
    fn cell_end(&self, cell: Option<usize>) -> f64 {
        match cell {
            Some(k) if k + 1 < self.series_mhz.len() => (k + 1) as f64 * self.step_ns,
            _ => f64::INFINITY,
        }
    }
}

/// Exact propagator of `H = π[[−δ, Ωe^{−iφ}], [Ωe^{iφ}, δ]]` over `t_us`.
fn propagator(delta: f64, rabi: f64, phase: f64, t_us: f64) -> Matrix2<Complex64> {
    let (nx, ny, nz) = (rabi * phase.cos(), rabi * phase.sin(), -delta);
    let norm = (nx * nx + ny * ny + nz * nz).sqrt();
    let theta = PI * norm * t_us;
    let (s, c) = theta.sin_cos();
    if norm == 0.0 {
        return Matrix2::identity();
    }
    let (ax, ay, az) = (nx / norm * s, ny / norm * s, nz / norm * s);
    // cos θ·I − i sin θ·(n̂·σ)
    Matrix2::new(
        Complex64::new(c, -az),
        Complex64::new(-ay, -ax),
        Complex64::new(ay, -ax),
        Complex64::new(c, az),
    )
}

/// Propagates the ground state through `segments` and returns the final state.
///
/// Driven segments use Strang splitting of the exact unitary and the
/// dissipator with steps no longer than `min(1/(50Ω), 1 ns)`, further cut at
/// noise-grid boundaries. Free segments are exact: precession and damping
/// commute, so the phase is accumulated cell by cell.
pub fn evolve(segments: &[Segment], qubit: &QubitParams, noise: &NoiseRealization) -> Result<DensityMatrix> {
    let gamma1 = qubit.decoherence.relaxation_rate_per_us();
    let gamma_phi = qubit.decoherence.white_dephasing_mhz;
    let mut rho = DensityMatrix::ground();
    let mut t = 0.0;
    for seg in segments {
        let base = (qubit.f_q_ghz - seg.drive_ghz) * 1e3;
        let end = t + seg.duration_ns;
        if seg.rabi_mhz == 0.0 {
            let mut phase = 0.0;
            let mut now = t;
            while now < end {
                let cell = noise.cell(now);
                let next = noise.cell_end(cell).min(end);
                phase += 2.0 * PI * (base + noise.at_cell(cell)) * (next - now) * 1e-3;
                now = next;
            }
            rho.precess(phase);
            rho.damp(gamma1, gamma_phi, seg.duration_ns * 1e-3);
        } else {
            let max_step = (1e3 / (50.0 * seg.rabi_mhz)).min(1.0);
            let mut now = t;
            while now < end {
                let cell = noise.cell(now);
                let limit = noise.cell_end(cell).min(end);
                let n = ((limit - now) / max_step).ceil().max(1.0);
                let h = (limit - now) / n;
                let h_us = h * 1e-3;
                let u = propagator(base + noise.at_cell(cell), seg.rabi_mhz, seg.phase_rad, h_us);
                for _ in 0..n as usize {
                    rho.damp(gamma1, gamma_phi, h_us / 2.0);
                    rho.rotate(&u);
                    rho.damp(gamma1, gamma_phi, h_us / 2.0);
                }
                now = limit;
            }
        }
        t = end;
        let tr = rho.trace();
        if !tr.is_finite() || (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::Unstable {
                time_ns: t,
                detail: format!("trace drifted to {tr}"),
            });
        }
    }
    Ok(rho)
}
