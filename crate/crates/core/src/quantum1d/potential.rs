use serde::{Deserialize, Serialize};

use super::grid::Grid1D;
use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialLabel {
    ZModel,
    YModel,
    Custom,
}

/// How the image potential continues between the surface and the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShortRange {
    /// `V(z) = V(b)` for `0 < z < b`.
    #[default]
    Clamp,
    /// The repulsive barrier extends up to `z = b`.
    HardWallAtB,
}

/// Energy samples (meV) on a grid (nm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential1D {
    grid: Grid1D,
    values: Vec<f64>,
    label: PotentialLabel,
}

impl Potential1D {
    pub fn new(grid: Grid1D, values: Vec<f64>, label: PotentialLabel) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::validation(
                "potential.values",
                format!("{} samples for a {}-point grid", values.len(), grid.len()),
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                "potential.values",
                format!("non-finite sample at index {k}"),
            ));
        }
        Ok(Self { grid, values, label })
    }

    /// Samples `f(x)` on every grid point.
    pub fn from_fn(grid: Grid1D, label: PotentialLabel, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.positions().map(f).collect();
        Self::new(grid, values, label)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> PotentialLabel {
        self.label
    }
}

/// Out-of-plane potential: repulsive surface barrier plus image attraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZPotentialParams {
    /// Barrier height U (eV).
    pub barrier_u_ev: f64,
    /// Short-range cutoff b (Å).
    pub cutoff_b_angstrom: f64,
    /// Dielectric constant of solid neon.
    pub epsilon: f64,
    #[serde(default)]
    pub short_range: ShortRange,
    /// Overrides the (ε−1)/(ε+1) image factor when set.
    #[serde(default)]
    pub image_factor: Option<f64>,
}

impl Default for ZPotentialParams {
    fn default() -> Self {
        Self {
            barrier_u_ev: 0.7,
            cutoff_b_angstrom: 2.3,
            epsilon: 1.244,
            short_range: ShortRange::Clamp,
            image_factor: None,
        }
    }
}

impl ZPotentialParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("z_potential.barrier_u_ev", self.barrier_u_ev)?;
        ensure_positive("z_potential.cutoff_b_angstrom", self.cutoff_b_angstrom)?;
        ensure_finite("z_potential.epsilon", self.epsilon)?;
        if self.epsilon <= 1.0 {
            return Err(Error::validation("z_potential.epsilon", "must exceed 1"));
        }
        if let Some(f) = self.image_factor {
            ensure_non_negative("z_potential.image_factor", f)?;
        }
        Ok(())
    }

    /// (ε−1)/(ε+1), or the configured override.
    pub fn image_factor(&self) -> f64 {
        self.image_factor
            .unwrap_or((self.epsilon - 1.0) / (self.epsilon + 1.0))
    }

    /// Λ in `V = −Λe²/z`, i.e. a quarter of the image factor.
    pub fn lambda(&self) -> f64 {
        self.image_factor() / 4.0
    }

    /// Ground-state energy (meV) of the hydrogenic limit, `−Λ²·Ry·1/n²`.
    pub fn hydrogenic_level_mev(&self, n: u32) -> f64 {
        let l = self.lambda();
        -l * l * units::ev_to_mev(units::RYDBERG_EV) / f64::from(n * n)
    }
}

/// Builds V(z) in meV on a grid in nm.
pub fn build_z_potential(params: &ZPotentialParams, grid: &Grid1D) -> Result<Potential1D> {
    params.validate()?;
    let b = units::angstrom_to_nm(params.cutoff_b_angstrom);
    if grid.x0() >= 0.0 || grid.last() <= b {
        return Err(Error::Domain(format!(
            "z grid [{}, {}] nm must cover z < 0 and z > b = {b} nm",
            grid.x0(),
            grid.last()
        )));
    }
    let u = units::ev_to_mev(params.barrier_u_ev);
    let strength = params.lambda() * units::coulomb_constant_mev_nm();
    let short_range = params.short_range;
    Potential1D::from_fn(*grid, PotentialLabel::ZModel, |z| {
        if z <= 0.0 || (z < b && short_range == ShortRange::HardWallAtB) {
            u
        } else {
            -strength / z.max(b)
        }
    })
}

/// Minimal in-plane trap: `V(y) = ½k₂[βy + y² + ζy⁴]`, `β = (V_rg − V_ss)/η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapParams {
    /// Spring constant k₂ (meV/µm²).
    pub k2_mev_per_um2: f64,
    /// Characteristic field η (V/µm).
    pub eta_v_per_um: f64,
    /// Quartic coefficient ζ (1/µm²).
    pub zeta_per_um2: f64,
    /// Sweet-spot voltage (mV).
    pub v_ss_mv: f64,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self {
            k2_mev_per_um2: 5.536,
            eta_v_per_um: 0.8271,
            zeta_per_um2: 15.4,
            v_ss_mv: 339.0,
        }
    }
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("trap.k2_mev_per_um2", self.k2_mev_per_um2)?;
        ensure_positive("trap.eta_v_per_um", self.eta_v_per_um)?;
        ensure_non_negative("trap.zeta_per_um2", self.zeta_per_um2)?;
        ensure_finite("trap.v_ss_mv", self.v_ss_mv)
    }

    /// Asymmetry parameter β in µm.
    pub fn beta_um(&self, v_rg_mv: f64) -> f64 {
        (v_rg_mv - self.v_ss_mv) * 1e-3 / self.eta_v_per_um
    }

    /// V(y) in meV at `y_nm`.
    pub fn energy_mev(&self, v_rg_mv: f64, y_nm: f64) -> f64 {
        let y = units::nm_to_um(y_nm);
        let y2 = y * y;
        0.5 * self.k2_mev_per_um2 * (self.beta_um(v_rg_mv) * y + y2 + self.zeta_per_um2 * y2 * y2)
    }
}

pub fn build_y_potential(params: &TrapParams, v_rg_mv: f64, grid: &Grid1D) -> Result<Potential1D> {
    params.validate()?;
    ensure_finite("v_rg_mv", v_rg_mv)?;
    Potential1D::from_fn(*grid, PotentialLabel::YModel, |y| params.energy_mev(v_rg_mv, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_grid() -> Grid1D {
        Grid1D::spanning(-0.5, 60.0, 0.01).unwrap()
    }

    #[test]
    fn image_prefactor() {
        let p = ZPotentialParams::default();
        assert!((p.lambda() - 0.027_184).abs() < 5e-7);
    }

    #[test]
    fn barrier_inside_the_solid() {
        let g = z_grid();
        let v = build_z_potential(&ZPotentialParams::default(), &g).unwrap();
        // z = −1 Å is the 40th point
        let k = 40;
        assert!((g.x(k) + 0.1).abs() < 1e-12);
        assert_eq!(v.values()[k], 700.0);
    }

    #[test]
    fn tail_rises_monotonically_to_zero() {
        let g = z_grid();
        let v = build_z_potential(&ZPotentialParams::default(), &g).unwrap();
        let b = 0.23;
        let tail: Vec<f64> = g
            .positions()
            .zip(v.values())
            .filter(|(z, _)| *z > b)
            .map(|(_, &e)| e)
            .collect();
        assert!(tail.iter().all(|&e| e < 0.0));
        assert!(tail.windows(2).all(|w| w[1] > w[0]));
        assert!(tail.last().unwrap().abs() < 0.7);
    }

    #[test]
    fn clamp_versus_hard_wall() {
        let g = z_grid();
        let clamp = build_z_potential(&ZPotentialParams::default(), &g).unwrap();
        let wall = build_z_potential(
            &ZPotentialParams {
                short_range: ShortRange::HardWallAtB,
                ..Default::default()
            },
            &g,
        )
        .unwrap();
        let k = 60; // z = 0.1 nm < b
        assert!((g.x(k) - 0.1).abs() < 1e-12);
        let v_b = -ZPotentialParams::default().lambda() * units::coulomb_constant_mev_nm() / 0.23;
        assert!((clamp.values()[k] - v_b).abs() < 1e-9);
        assert_eq!(wall.values()[k], 700.0);
    }

    #[test]
    fn z_grid_must_straddle_surface() {
        let g = Grid1D::spanning(0.1, 10.0, 0.01).unwrap();
        assert!(matches!(
            build_z_potential(&ZPotentialParams::default(), &g),
            Err(Error::Domain(_))
        ));
        let bad = ZPotentialParams {
            epsilon: f64::NAN,
            ..Default::default()
        };
        assert!(matches!(
            build_z_potential(&bad, &z_grid()),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn asymmetry_parameter() {
        let t = TrapParams::default();
        assert!((t.beta_um(516.0) - 0.2140).abs() < 5e-5);
        assert_eq!(t.beta_um(339.0), 0.0);
    }

    #[test]
    fn trap_symmetry_and_lean() {
        let t = TrapParams::default();
        let g = Grid1D::symmetric(1500.0, 0.5).unwrap();
        let sym = build_y_potential(&t, 339.0, &g).unwrap();
        let n = g.len();
        for k in 0..n {
            assert_eq!(sym.values()[k], sym.values()[n - 1 - k]);
        }
        let lean = build_y_potential(&t, 400.0, &g).unwrap();
        for k in 0..n / 2 {
            // right side (y > 0) higher
            assert!(lean.values()[n - 1 - k] > lean.values()[k]);
        }
    }
}
