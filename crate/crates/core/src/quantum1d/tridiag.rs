//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a partially pivoted tridiagonal factorization. Memory is
//! O(n), which matters for the 10⁴–10⁵ point grids used by the solvers.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::validation("diag", "matrix must be non-empty"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::validation(
                "off",
                format!("expected {} entries, got {}", diag.len() - 1, off.len()),
            ));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::validation("matrix", "entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (negative LDLᵀ pivots).
    pub fn sturm_count(&self, x: f64) -> usize {
        let guard = f64::EPSILON * self.scale() * 1e-3;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let q_safe = if q.abs() < guard { guard.copysign(q) } else { q };
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::validation(
                "k",
                format!(
                    "index {k} out of range for a {}x{} matrix",
                    self.len(),
                    self.len()
                ),
            ));
        }
        let (glo, ghi) = self.gershgorin();
        let pad = f64::EPSILON * self.scale() * 4.0 + f64::MIN_POSITIVE;
        let (mut lo, mut hi) = (glo - pad, ghi + pad);
        let floor = f64::EPSILON * self.scale() * 1e-2;
        const MAX_ITER: usize = 4096;
        for _ in 0..MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= floor {
                return Ok(mid);
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NotConverged {
            what: format!("bisection for eigenvalue {k}"),
            iterations: MAX_ITER,
            detail: format!("bracket [{lo:e}, {hi:e}] width {:e}", hi - lo),
        })
    }

    /// Unit-norm eigenvector for an (accurate) eigenvalue `lambda`,
    /// orthogonalized against `previous`.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        if n == 1 {
            return Ok(vec![1.0]);
        }
        let lu = PivotedLu::factor(self, lambda, f64::EPSILON * self.scale());
        // Deterministic start vector with no special symmetry.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract())
            .collect();
        normalize(&mut x);
        const ITERATIONS: usize = 4;
        let mut residual = f64::INFINITY;
        for _ in 0..ITERATIONS {
            lu.solve(&mut x);
            for p in previous {
                let overlap = dot(&x, p);
                x.iter_mut().zip(p).for_each(|(xi, pi)| *xi -= overlap * pi);
            }
            if !normalize(&mut x) {
                return Err(Error::NotConverged {
                    what: "inverse iteration".into(),
                    iterations: ITERATIONS,
                    detail: format!("iterate collapsed to zero at lambda = {lambda:e}"),
                });
            }
            residual = self.residual_norm(&x, lambda);
            if residual <= 1e3 * f64::EPSILON * self.scale() {
                break;
            }
        }
        if residual > 1e-6 * self.scale() {
            return Err(Error::NotConverged {
                what: "inverse iteration".into(),
                iterations: ITERATIONS,
                detail: format!("residual {residual:e} at lambda = {lambda:e}"),
            });
        }
        Ok(x)
    }

    /// ‖(T − λ)x‖₂
    pub fn residual_norm(&self, x: &[f64], lambda: f64) -> f64 {
        let n = self.len();
        let mut sum = 0.0;
        for i in 0..n {
            let mut r = (self.diag[i] - lambda) * x[i];
            if i > 0 {
                r += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                r += self.off[i] * x[i + 1];
            }
            sum += r * r;
        }
        sum.sqrt()
    }

    /// Lowest `count` eigenpairs in ascending order.
    pub fn lowest(&self, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut values = Vec::with_capacity(count);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for k in 0..count {
            let lambda = self.eigenvalue(k)?;
            let v = self.eigenvector(lambda, &vectors)?;
            values.push(lambda);
            vectors.push(v);
        }
        Ok((values, vectors))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = dot(x, x).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// LU of (T − σI) with row interchanges; U has two super-diagonals.
struct PivotedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn factor(t: &SymTridiagonal, sigma: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];

        // Current row i holds (a, b, c) in columns (i, i+1, i+2).
        let mut a = t.diag[0] - sigma;
        let mut b = if n > 1 { t.off[0] } else { 0.0 };
        let mut c = 0.0;
        for i in 0..n - 1 {
            let sub = t.off[i];
            let next_diag = t.diag[i + 1] - sigma;
            let next_sup = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if sub.abs() > a.abs() {
                // Swap rows i and i+1.
                swapped[i] = true;
                u0[i] = sub;
                u1[i] = next_diag;
                u2[i] = next_sup;
                let m = a / sub;
                mult[i] = m;
                a = b - m * next_diag;
                b = c - m * next_sup;
                c = 0.0;
            } else {
                let pivot = if a.abs() < tiny { tiny.copysign(a) } else { a };
                u0[i] = pivot;
                u1[i] = b;
                u2[i] = c;
                let m = sub / pivot;
                mult[i] = m;
                a = next_diag - m * b;
                b = next_sup - m * c;
                c = 0.0;
            }
        }
        u0[n - 1] = if a.abs() < tiny { tiny.copysign(a) } else { a };
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        // Rescale to avoid overflow across iterations.
        let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max > 0.0 && max.is_finite() {
            x.iter_mut().for_each(|v| *v /= max);
        }
    }
}
