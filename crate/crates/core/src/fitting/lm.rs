use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter constraint, enforced by reparameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamBound {
    Free,
    /// `p = exp(u)`
    Positive,
    /// `p = lo + (hi − lo)/(1 + exp(−u))`
    Range(f64, f64),
}

impl ParamBound {
    fn to_internal(self, p: f64) -> f64 {
        match self {
            ParamBound::Free => p,
            ParamBound::Positive => p.ln(),
            ParamBound::Range(lo, hi) => {
                let s = (p - lo) / (hi - lo);
                (s / (1.0 - s)).ln()
            }
        }
    }

    fn to_external(self, u: f64) -> f64 {
        match self {
            ParamBound::Free => u,
            ParamBound::Positive => u.exp(),
            ParamBound::Range(lo, hi) => lo + (hi - lo) / (1.0 + (-u).exp()),
        }
    }

    /// `dp/du`
    fn slope(self, u: f64) -> f64 {
        match self {
            ParamBound::Free => 1.0,
            ParamBound::Positive => u.exp(),
            ParamBound::Range(lo, hi) => {
                let e = (-u).exp();
                (hi - lo) * e / (1.0 + e).powi(2)
            }
        }
    }

    fn admits(self, p: f64) -> bool {
        match self {
            ParamBound::Free => p.is_finite(),
            ParamBound::Positive => p > 0.0 && p.is_finite(),
            ParamBound::Range(lo, hi) => lo < p && p < hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub max_iterations: usize,
    /// Largest cosine between the residual and any Jacobian column.
    pub gtol: f64,
    pub ftol: f64,
    pub xtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gtol: 1e-8,
            ftol: 1e-14,
            xtol: 1e-14,
        }
    }
}

pub type ModelFn<'a> = &'a (dyn Fn(f64, &[f64]) -> f64 + Sync);

pub struct FitProblem<'a> {
    pub model: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub sigma: Option<&'a [f64]>,
    pub names: Vec<String>,
    pub initial: Vec<f64>,
    pub bounds: Vec<ParamBound>,
    /// Parameters held at their initial value.
    pub fixed: Vec<bool>,
    pub tolerances: Tolerances,
    pub f: ModelFn<'a>,
}

impl<'a> FitProblem<'a> {
    pub fn new(
        model: &str,
        x: &'a [f64],
        y: &'a [f64],
        names: &[&str],
        initial: Vec<f64>,
        f: ModelFn<'a>,
    ) -> Self {
        let k = names.len();
        Self {
            model: model.to_string(),
            x,
            y,
            sigma: None,
            names: names.iter().map(|s| s.to_string()).collect(),
            initial,
            bounds: vec![ParamBound::Free; k],
            fixed: vec![false; k],
            tolerances: Tolerances::default(),
            f,
        }
    }

    pub fn bound(mut self, name: &str, b: ParamBound) -> Self {
        let i = self.index(name);
        self.bounds[i] = b;
        self
    }

    pub fn fix(mut self, name: &str) -> Self {
        let i = self.index(name);
        self.fixed[i] = true;
        self
    }

    fn index(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    fn validate(&self) -> Result<()> {
        let k = self.names.len();
        if self.x.len() != self.y.len() || self.sigma.is_some_and(|s| s.len() != self.y.len()) {
            return Err(Error::validation("fit.data", "x, y and sigma lengths differ"));
        }
        if self.initial.len() != k || self.bounds.len() != k || self.fixed.len() != k {
            return Err(Error::validation(
                "fit.parameters",
                "parameter vectors differ in length",
            ));
        }
        let free = self.fixed.iter().filter(|f| !**f).count();
        if self.y.len() < free {
            return Err(Error::validation(
                "fit.data",
                format!("{} points for {free} free parameters", self.y.len()),
            ));
        }
        if let Some(s) = self.sigma {
            if s.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::validation("fit.sigma", "uncertainties must be positive"));
            }
        }
        for (i, (&p, &b)) in self.initial.iter().zip(&self.bounds).enumerate() {
            if !b.admits(p) {
                return Err(Error::validation(
                    format!("fit.initial.{}", self.names[i]),
                    format!("{p} violates {b:?}"),
                ));
            }
        }
        if self.x.iter().chain(self.y).any(|v| !v.is_finite()) {
            return Err(Error::validation("fit.data", "non-finite sample"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// One standard error per parameter; 0 for fixed parameters.
    pub std_errors: Vec<f64>,
    pub rss: f64,
    pub aic: f64,
    pub n_points: usize,
    pub n_free: usize,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_cosine: f64,
    pub message: String,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.std_errors[i])
    }

    /// Turns a non-converged result into an error.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::FitFailed {
                model: self.model,
                detail: self.message,
            })
        }
    }

    /// Failure report used by fitters that cannot start.
    pub(crate) fn failed(model: &str, names: &[&str], n_points: usize, message: impl Into<String>) -> Self {
        Self {
            model: model.to_string(),
            names: names.iter().map(|s| s.to_string()).collect(),
            values: vec![f64::NAN; names.len()],
            std_errors: vec![f64::NAN; names.len()],
            rss: f64::NAN,
            aic: f64::NAN,
            n_points,
            n_free: 0,
            converged: false,
            iterations: 0,
            gradient_cosine: f64::NAN,
            message: message.into(),
        }
    }
}

/// `n·ln(RSS/n) + 2k`
pub fn aic(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(f64::MIN_POSITIVE) / n).ln() + 2.0 * k as f64
}

struct Internal<'p, 'a> {
    p: &'p FitProblem<'a>,
    free: Vec<usize>,
}

impl Internal<'_, '_> {
    fn external(&self, u: &DVector<f64>) -> Vec<f64> {
        let mut params = self.p.initial.clone();
        for (k, &i) in self.free.iter().enumerate() {
            params[i] = self.p.bounds[i].to_external(u[k]);
        }
        params
    }

    fn residuals(&self, u: &DVector<f64>) -> DVector<f64> {
        let params = self.external(u);
        DVector::from_iterator(
            self.p.y.len(),
            self.p.x.iter().zip(self.p.y).enumerate().map(|(k, (&x, &y))| {
                let r = y - (self.p.f)(x, &params);
                self.p.sigma.map_or(r, |s| r / s[k])
            }),
        )
    }

    /// Central differences of the residual vector.
    fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.p.y.len();
        let mut j = DMatrix::zeros(n, u.len());
        let step_scale = f64::EPSILON.cbrt();
        for c in 0..u.len() {
            let h = step_scale * u[c].abs().max(1.0);
            let mut up = u.clone();
            let mut dn = u.clone();
            up[c] += h;
            dn[c] -= h;
            let d = (self.residuals(&up) - self.residuals(&dn)) / (2.0 * h);
            j.set_column(c, &d);
        }
        j
    }
}

fn gradient_cosine(j: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    let g = j.transpose() * r;
    (0..j.ncols())
        .map(|c| {
            let cn = j.column(c).norm();
            if cn == 0.0 {
                0.0
            } else {
                g[c].abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

/// `RSS/Σy²` below which residuals are rounding noise and the fit is exact.
const EXACT_FIT: f64 = 1e-18;

/// Levenberg–Marquardt with Marquardt diagonal scaling.
///
/// Returns a result with `converged = false` and a diagnostic message when
/// the iteration limit is reached or the step stalls away from a stationary
/// point; input problems are reported as errors.
pub fn least_squares(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let free: Vec<usize> = (0..problem.names.len()).filter(|&i| !problem.fixed[i]).collect();
    let ctx = Internal { p: problem, free };
    let n = problem.y.len();
    let k = ctx.free.len();
    let tol = problem.tolerances;
    let scale = problem
        .y
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);

    let mut u = DVector::from_iterator(
        k,
        ctx.free
            .iter()
            .map(|&i| problem.bounds[i].to_internal(problem.initial[i])),
    );
    let mut r = ctx.residuals(&u);
    let mut rss = r.norm_squared();
    if !rss.is_finite() {
        return Err(Error::Domain(format!(
            "{} model is not finite at the initial parameters",
            problem.model
        )));
    }
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut message = String::from("iteration limit reached");
    let mut converged = false;
    let mut j = ctx.jacobian(&u);

    while iterations < tol.max_iterations {
        if k == 0 {
            converged = true;
            message = "no free parameters".into();
            break;
        }
        let cos = gradient_cosine(&j, &r);
        if cos <= tol.gtol {
            converged = true;
            message = "gradient below tolerance".into();
            break;
        }
        iterations += 1;
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for d in 0..k {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &u + &step;
            let r_trial = ctx.residuals(&trial);
            let rss_trial = r_trial.norm_squared();
            if rss_trial.is_finite() && rss_trial <= rss {
                let small_step = step.norm() <= tol.xtol * (u.norm() + tol.xtol);
                let small_gain = rss - rss_trial <= tol.ftol * rss;
                u = trial;
                r = r_trial;
                rss = rss_trial;
                lambda = (lambda / 10.0).max(1e-12);
                j = ctx.jacobian(&u);
                accepted = true;
                if small_step || small_gain {
                    let cos = gradient_cosine(&j, &r);
                    converged = cos <= tol.gtol.max(1e-6) || rss <= EXACT_FIT * scale;
                    message = if converged {
                        "step below tolerance at a stationary point".into()
                    } else {
                        format!("stalled with gradient cosine {cos:.3e}")
                    };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            let cos = gradient_cosine(&j, &r);
            converged = cos <= tol.gtol.max(1e-6) || rss <= EXACT_FIT * scale;
            message = if converged {
                "no further decrease at a stationary point".into()
            } else {
                format!("no downhill step; gradient cosine {cos:.3e}")
            };
            break;
        }
        if !message.starts_with("iteration") {
            break;
        }
    }

    let values = ctx.external(&u);
    let dof = n.saturating_sub(k).max(1) as f64;
    let variance_scale = if problem.sigma.is_some() { 1.0 } else { rss / dof };
    let mut std_errors = vec![0.0; problem.names.len()];
    if k > 0 {
        let jtj = j.transpose() * &j;
        let cov = jtj
            .clone()
            .try_inverse()
            .or_else(|| jtj.pseudo_inverse(1e-12).ok())
            .unwrap_or_else(|| DMatrix::from_element(k, k, f64::NAN));
        for (c, &i) in ctx.free.iter().enumerate() {
            let d = problem.bounds[i].slope(u[c]);
            std_errors[i] = (cov[(c, c)].abs() * variance_scale).sqrt() * d.abs();
        }
    }
    Ok(FitResult {
        model: problem.model.clone(),
        names: problem.names.clone(),
        values,
        std_errors,
        rss,
        aic: aic(rss, n, k),
        n_points: n,
        n_free: k,
        converged,
        iterations,
        gradient_cosine: gradient_cosine(&j, &r),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn line(x: f64, p: &[f64]) -> f64 {
        p[0] * x + p[1]
    }

    #[test]
    fn exact_linear_data() {
        let x: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|x| 2.5 * x - 1.25).collect();
        let fit = least_squares(&FitProblem::new(
            "line",
            &x,
            &y,
            &["a", "b"],
            vec![0.0, 0.0],
            &line,
        ))
        .unwrap();
        assert!(fit.converged, "{}", fit.message);
        assert!((fit.values[0] - 2.5).abs() < 1e-10);
        assert!((fit.values[1] + 1.25).abs() < 1e-10);
    }

    fn quadratic(x: f64, p: &[f64]) -> f64 {
        p[0] * (x - p[1]).powi(2) + p[2]
    }

    fn noisy_quadratic(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let x: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
        let y = x
            .iter()
            .map(|&x| quadratic(x, &[1.0, 0.2, 0.5]) + noise.sample(&mut rng))
            .collect();
        (x, y)
    }

    #[test]
    fn noisy_quadratic_within_three_sigma() {
        let (x, y) = noisy_quadratic(200, 4);
        let fit = least_squares(&FitProblem::new(
            "quad",
            &x,
            &y,
            &["a", "x0", "c"],
            vec![0.5, 0.0, 0.0],
            &quadratic,
        ))
        .unwrap();
        assert!(fit.converged);
        for (v, (t, s)) in fit.values.iter().zip([1.0, 0.2, 0.5].iter().zip(&fit.std_errors)) {
            assert!((v - t).abs() < 3.0 * s, "{v} vs {t} ± {s}");
        }
        // refit from the optimum is a fixed point
        let again = least_squares(&FitProblem::new(
            "quad",
            &x,
            &y,
            &["a", "x0", "c"],
            fit.values.clone(),
            &quadratic,
        ))
        .unwrap();
        assert!(again.converged);
        assert!(again.iterations <= 2, "{}", again.iterations);
    }

    #[test]
    fn errors_shrink_with_sample_size() {
        let (x, y) = noisy_quadratic(100, 8);
        let (x4, y4) = noisy_quadratic(400, 8);
        let (s1, s4) = (vec![0.01; 100], vec![0.01; 400]);
        let mut p1 = FitProblem::new("quad", &x, &y, &["a", "x0", "c"], vec![0.5, 0.0, 0.0], &quadratic);
        p1.sigma = Some(&s1);
        let mut p4 = FitProblem::new(
            "quad",
            &x4,
            &y4,
            &["a", "x0", "c"],
            vec![0.5, 0.0, 0.0],
            &quadratic,
        );
        p4.sigma = Some(&s4);
        let (f1, f4) = (least_squares(&p1).unwrap(), least_squares(&p4).unwrap());
        for i in 0..3 {
            let ratio = f1.std_errors[i] / f4.std_errors[i];
            assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
        }
    }

    #[test]
    fn order_of_points_does_not_matter() {
        let (x, y) = noisy_quadratic(50, 1);
        let mut idx: Vec<usize> = (0..50).collect();
        idx.reverse();
        idx.swap(3, 40);
        let xr: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let yr: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let a = least_squares(&FitProblem::new(
            "quad",
            &x,
            &y,
            &["a", "x0", "c"],
            vec![0.5, 0.0, 0.0],
            &quadratic,
        ))
        .unwrap();
        let b = least_squares(&FitProblem::new(
            "quad",
            &xr,
            &yr,
            &["a", "x0", "c"],
            vec![0.5, 0.0, 0.0],
            &quadratic,
        ))
        .unwrap();
        for i in 0..3 {
            assert!((a.values[i] - b.values[i]).abs() < 1e-8 * a.values[i].abs().max(1.0));
        }
    }

    #[test]
    fn numeric_jacobian_matches_analytic() {
        let (x, y) = noisy_quadratic(30, 2);
        let p = FitProblem::new("quad", &x, &y, &["a", "x0", "c"], vec![1.1, 0.1, 0.4], &quadratic)
            .bound("a", ParamBound::Positive);
        let ctx = Internal {
            p: &p,
            free: vec![0, 1, 2],
        };
        let u = DVector::from_vec(vec![1.1f64.ln(), 0.1, 0.4]);
        let j = ctx.jacobian(&u);
        for (row, &xv) in x.iter().enumerate() {
            let a = 1.1;
            let d = [-(a * (xv - 0.1).powi(2)), 2.0 * a * (xv - 0.1), -1.0];
            for c in 0..3 {
                assert!((j[(row, c)] - d[c]).abs() <= 1e-6 * d[c].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn bounds_are_respected_and_fixed_stays() {
        let (x, y) = noisy_quadratic(60, 3);
        let p = FitProblem::new(
            "quad",
            &x,
            &y,
            &["a", "x0", "c"],
            vec![0.7, 0.0, 0.45],
            &quadratic,
        )
        .bound("a", ParamBound::Range(0.6, 1.5))
        .fix("c");
        let fit = least_squares(&p).unwrap();
        assert!(fit.values[0] > 0.6 && fit.values[0] < 1.5);
        assert_eq!(fit.values[2], 0.45);
        assert_eq!(fit.std_errors[2], 0.0);
        assert_eq!(fit.n_free, 2);
        let bad = FitProblem::new(
            "quad",
            &x,
            &y,
            &["a", "x0", "c"],
            vec![-1.0, 0.0, 0.0],
            &quadratic,
        )
        .bound("a", ParamBound::Positive);
        assert!(least_squares(&bad).is_err());
    }

    #[test]
    fn iteration_limit_is_reported() {
        let (x, y) = noisy_quadratic(60, 3);
        let mut p = FitProblem::new(
            "quad",
            &x,
            &y,
            &["a", "x0", "c"],
            vec![5.0, -3.0, 9.0],
            &quadratic,
        );
        p.tolerances.max_iterations = 1;
        let fit = least_squares(&p).unwrap();
        assert!(!fit.converged);
        assert!(fit.clone().require_converged().is_err());
        assert!(fit.message.contains("iteration"));
    }

    #[test]
    fn too_few_points() {
        let x = [1.0];
        let y = [2.0];
        assert!(least_squares(&FitProblem::new(
            "line",
            &x,
            &y,
            &["a", "b"],
            vec![0.0, 0.0],
            &line
        ))
        .is_err());
    }
}
