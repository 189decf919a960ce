use super::grid::Grid1D;
use super::potential::{Potential1D, PotentialLabel};
use super::spectrum::SpectrumRow;
use crate::error::{Error, Result};
use crate::table::NumericTable;

pub const SPECTRUM_HEADER: [&str; 7] = [
    "v_rg_mv",
    "f01_ghz",
    "f12_ghz",
    "alpha_mhz",
    "d01_nm",
    "d02_nm",
    "d12_nm",
];

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut t = NumericTable::new(&SPECTRUM_HEADER);
    for r in rows {
        t.push(vec![
            r.v_rg_mv,
            r.f01_ghz,
            r.f12_ghz,
            r.alpha_mhz,
            r.d01_nm,
            r.d02_nm,
            r.d12_nm,
        ]);
    }
    t.to_csv()
}

/// Reads a uniformly sampled `(position_nm, energy_mev)` table.
pub fn read_potential_csv(text: &str) -> Result<Potential1D> {
    let t = NumericTable::parse(text)?;
    let x = t.require("position_nm")?;
    let v = t.require("energy_mev")?;
    if x.len() < 3 {
        return Err(Error::Schema("a potential needs at least 3 rows".into()));
    }
    let dx = x[1] - x[0];
    for (k, w) in x.windows(2).enumerate() {
        if ((w[1] - w[0]) - dx).abs() > 1e-6 * dx.abs() {
            return Err(Error::Parse {
                line: k + 3,
                message: format!("positions must be uniformly spaced (step {dx} nm)"),
            });
        }
    }
    let grid = Grid1D::new(x[0], dx, x.len())?;
    Potential1D::new(grid, v, PotentialLabel::Custom)
}
