use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Uniform grid `x_k = x0 + k·dx`, `k = 0..n`, positions in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x0: f64,
    dx: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        ensure_finite("grid.x0", x0)?;
        ensure_positive("grid.dx", dx)?;
        if n < 3 {
            return Err(Error::validation(
                "grid.n",
                format!("need at least 3 points, got {n}"),
            ));
        }
        Ok(Self { x0, dx, n })
    }

    /// Grid from `start` to (at least) `end` with step `dx`.
    pub fn spanning(start: f64, end: f64, dx: f64) -> Result<Self> {
        ensure_finite("grid.start", start)?;
        ensure_finite("grid.end", end)?;
        ensure_positive("grid.dx", dx)?;
        if end <= start {
            return Err(Error::validation("grid.end", "must exceed grid.start"));
        }
        let n = ((end - start) / dx).round() as usize + 1;
        Self::new(start, dx, n)
    }

    /// Grid symmetric about zero: `x_k = (k − m)·dx` for `k = 0..2m+1`.
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        ensure_positive("grid.half_width", half_width)?;
        ensure_positive("grid.dx", dx)?;
        let m = (half_width / dx).round() as usize;
        Self::new(-(m as f64) * dx, dx, 2 * m + 1)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn last(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.x(k))
    }

    /// True when the grid is its own mirror image about zero.
    pub fn is_symmetric(&self) -> bool {
        (self.x0 + self.last()).abs() <= 1e-9 * self.dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_strictly_increase() {
        let g = Grid1D::new(-1.0, 0.25, 9).unwrap();
        let xs: Vec<f64> = g.positions().collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.last(), 1.0);
    }

    #[test]
    fn symmetric_grid_is_exact() {
        let g = Grid1D::symmetric(1500.0, 0.5).unwrap();
        assert_eq!(g.len(), 6001);
        assert!(g.is_symmetric());
        for k in 0..g.len() {
            assert_eq!(g.x(k), -g.x(g.len() - 1 - k));
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid1D::new(0.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, -1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert!(Grid1D::new(f64::NAN, 1.0, 10).is_err());
        assert!(Grid1D::spanning(1.0, 0.0, 0.1).is_err());
    }
}
