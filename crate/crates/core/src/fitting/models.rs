use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::lm::{least_squares, FitProblem, FitResult, ParamBound};
use crate::error::{Error, Result};
use crate::inout::{s21_coupled, ResonatorParams};

/// Peak location (parabolic refinement), height above the baseline and
/// FWHM from interpolated half-height crossings.
#[derive(Debug, Clone, Copy)]
struct PeakEstimate {
    center: f64,
    height: f64,
    fwhm: f64,
    baseline: f64,
}

fn estimate_peak(x: &[f64], y: &[f64]) -> Option<PeakEstimate> {
    let n = y.len();
    if n < 3 {
        return None;
    }
    let k = (0..n).max_by(|&a, &b| y[a].total_cmp(&y[b]))?;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let baseline = sorted[n / 10];
    let height = y[k] - baseline;
    if !(height > 0.0) {
        return None;
    }
    let half = baseline + height / 2.0;
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = k;
        for i in range {
            if y[i] < half {
                let t = (y[prev] - half) / (y[prev] - y[i]);
                return Some(x[prev] + t * (x[i] - x[prev]));
            }
            prev = i;
        }
        None
    };
    let left = cross(&mut (0..k).rev());
    let right = cross(&mut (k + 1..n));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[k] - l),
        (None, Some(r)) => 2.0 * (r - x[k]),
        (None, None) => return None,
    };
    let center = if k > 0 && k + 1 < n {
        let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
        let d = a - 2.0 * b + c;
        if d < 0.0 {
            x[k] + 0.5 * (a - c) / d * (x[k + 1] - x[k - 1]) / 2.0
        } else {
            x[k]
        }
    } else {
        x[k]
    };
    Some(PeakEstimate {
        center,
        height,
        fwhm: fwhm.abs(),
        baseline,
    })
}

fn span(x: &[f64]) -> (f64, f64) {
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

fn mhz_offsets(f_ghz: &[f64], reference: f64) -> Vec<f64> {
    f_ghz.iter().map(|f| (f - reference) * 1e3).collect()
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::validation(
            "fit.data",
            format!("{} x values, {} y values", x.len(), y.len()),
        ));
    }
    Ok(())
}

const LORENTZIAN_NAMES: [&str; 3] = ["f_r_ghz", "kappa_over_2pi_mhz", "amplitude"];

/// Fits `A·κ²/(4(f − f_r)² + κ²)` to `|S21|²` samples.
pub fn fit_lorentzian(f_ghz: &[f64], y: &[f64]) -> Result<FitResult> {
    check_lengths(f_ghz, y)?;
    let Some(est) = estimate_peak(f_ghz, y) else {
        return Ok(FitResult::failed(
            "lorentzian",
            &LORENTZIAN_NAMES,
            y.len(),
            "no peak in trace",
        ));
    };
    let reference = est.center;
    let x = mhz_offsets(f_ghz, reference);
    let model = |x: f64, p: &[f64]| {
        let k = p[1];
        p[2] * k * k / (4.0 * (x - p[0]).powi(2) + k * k)
    };
    let fwhm = (est.fwhm * 1e3).max(1e-9);
    let problem = FitProblem::new(
        "lorentzian",
        &x,
        y,
        &["offset_mhz", "kappa_over_2pi_mhz", "amplitude"],
        vec![0.0, fwhm, est.height + est.baseline.max(0.0)],
        &model,
    )
    .bound("kappa_over_2pi_mhz", ParamBound::Positive);
    let mut fit = least_squares(&problem)?;
    let (lo, hi) = span(&x);
    if fit.converged && !(lo..=hi).contains(&fit.values[0]) {
        fit.converged = false;
        fit.message = "fitted peak lies outside the sampled range".into();
    }
    fit.names[0] = LORENTZIAN_NAMES[0].into();
    fit.values[0] = reference + fit.values[0] * 1e-3;
    fit.std_errors[0] *= 1e-3;
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VacuumRabiOptions {
    /// Holds κ/2π at this value; `None` fits it.
    pub kappa_fixed_mhz: Option<f64>,
    /// Overrides the coupling initial guess.
    pub g_initial_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuumRabiFit {
    pub coupled: FitResult,
    pub lorentzian: FitResult,
    /// `"coupled"` or `"lorentzian"`, by AIC.
    pub preferred: String,
}

const VACUUM_NAMES: [&str; 5] = ["f_r_ghz", "g_mhz", "gamma_mhz", "kappa_over_2pi_mhz", "amplitude"];

/// On-resonance `|S21|²` fit with `f_q = f_r`, compared against a bare Lorentzian.
pub fn fit_vacuum_rabi(f_ghz: &[f64], y: &[f64], options: VacuumRabiOptions) -> Result<VacuumRabiFit> {
    check_lengths(f_ghz, y)?;
    let lorentzian = fit_lorentzian(f_ghz, y)?;
    let coupled = fit_coupled(f_ghz, y, options)?;
    let preferred = if coupled.converged && (!lorentzian.converged || coupled.aic < lorentzian.aic) {
        "coupled"
    } else {
        "lorentzian"
    };
    Ok(VacuumRabiFit {
        coupled,
        lorentzian,
        preferred: preferred.into(),
    })
}

fn fit_coupled(f_ghz: &[f64], y: &[f64], options: VacuumRabiOptions) -> Result<FitResult> {
    if options.g_initial_mhz == Some(0.0) {
        return Ok(FitResult::failed(
            "vacuum-rabi",
            &VACUUM_NAMES,
            y.len(),
            "g = 0 is a stationary point of the coupled model",
        ));
    }
    let Some(est) = estimate_peak(f_ghz, y) else {
        return Ok(FitResult::failed(
            "vacuum-rabi",
            &VACUUM_NAMES,
            y.len(),
            "no peak in trace",
        ));
    };
    // Centre between the two outermost strong maxima, splitting from their distance.
    let peaks = crate::inout::peak_frequencies(f_ghz, y, 0.3);
    let (center, split_mhz) = match (peaks.first(), peaks.last()) {
        (Some(a), Some(b)) if peaks.len() >= 2 => ((a + b) / 2.0, (b - a) * 1e3),
        _ => (est.center, 0.0),
    };
    let x = mhz_offsets(f_ghz, center);
    let model = |x: f64, p: &[f64]| {
        let res = ResonatorParams {
            f_r_ghz: 1.0,
            kappa_over_2pi_mhz: p[3],
            kappa_in_mhz: p[3] / 2.0,
            kappa_out_mhz: p[3] / 2.0,
            kappa_i_mhz: 0.0,
        };
        let f_p = 1.0 + (x - p[0]) * 1e-3;
        p[4] * s21_coupled(f_p, &res, 1.0, p[1], p[2]).norm_sqr()
    };
    let kappa0 = options
        .kappa_fixed_mhz
        .unwrap_or((est.fwhm * 1e3 / 4.0).max(1e-3));
    let width = est.fwhm * 1e3;
    let g0 = options.g_initial_mhz.unwrap_or(if split_mhz > 0.0 {
        split_mhz / 2.0
    } else {
        width / 2.0
    });
    // each polariton carries half of κ and half of the qubit width 2γ
    let gamma0 = if split_mhz > 0.0 {
        (width - kappa0 / 2.0).max(0.1 * g0)
    } else {
        (width / 2.0).max(1e-3)
    };
    let amp0 = est.height + est.baseline.max(0.0);
    let peak_gain = if split_mhz > 0.0 {
        0.5 * (1.0 + 2.0 * gamma0 / kappa0).recip().min(1.0)
    } else {
        1.0
    };
    let mut best: Option<FitResult> = None;
    for (gs, ws) in [
        (1.0, 1.0),
        (1.0, 0.5),
        (1.0, 2.0),
        (0.8, 1.0),
        (1.2, 1.0),
        (1.0, 4.0),
    ] {
        let mut problem = FitProblem::new(
            "vacuum-rabi",
            &x,
            y,
            &[
                "offset_mhz",
                "g_mhz",
                "gamma_mhz",
                "kappa_over_2pi_mhz",
                "amplitude",
            ],
            vec![
                0.0,
                g0 * gs,
                gamma0 * ws,
                kappa0,
                (amp0 / peak_gain.max(0.05)).max(1e-12),
            ],
            &model,
        )
        .bound("g_mhz", ParamBound::Positive)
        .bound("gamma_mhz", ParamBound::Positive)
        .bound("kappa_over_2pi_mhz", ParamBound::Positive)
        .bound("amplitude", ParamBound::Positive);
        if options.kappa_fixed_mhz.is_some() {
            problem = problem.fix("kappa_over_2pi_mhz");
        }
        let fit = least_squares(&problem)?;
        let better = match &best {
            None => true,
            Some(b) => (fit.converged && !b.converged) || (fit.converged == b.converged && fit.rss < b.rss),
        };
        if better {
            best = Some(fit);
        }
    }
    let mut fit = best.expect("at least one start");
    fit.names[0] = VACUUM_NAMES[0].into();
    fit.values[0] = center + fit.values[0] * 1e-3;
    fit.std_errors[0] *= 1e-3;
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum DecayFamily {
    Exponential,
    Gaussian,
    /// Stretched exponential, exponent fitted when `None`.
    Stretched {
        exponent: Option<f64>,
    },
}

impl DecayFamily {
    pub fn name(&self) -> String {
        match self {
            DecayFamily::Exponential => "exponential".into(),
            DecayFamily::Gaussian => "gaussian".into(),
            DecayFamily::Stretched { exponent: None } => "stretched".into(),
            DecayFamily::Stretched { exponent: Some(p) } => format!("stretched-{p}"),
        }
    }

    fn exponent(&self) -> Option<f64> {
        match self {
            DecayFamily::Exponential => Some(1.0),
            DecayFamily::Gaussian => Some(2.0),
            DecayFamily::Stretched { exponent } => *exponent,
        }
    }
}

/// Parameter names of [`fit_decay`] results.
pub const DECAY_NAMES: [&str; 4] = ["amplitude", "t_decay", "exponent", "offset"];

/// Fits `A·exp(−(t/T)^p) + c`.
///
/// `T` carries the unit of `t`. The initial guess comes from a straight-line
/// fit of `ln(−ln((y − c)/A))` against `ln t`.
pub fn fit_decay(t: &[f64], y: &[f64], family: DecayFamily) -> Result<FitResult> {
    check_lengths(t, y)?;
    let n = y.len();
    if n < 4 {
        return Err(Error::validation("fit.data", "decay fit needs at least 4 points"));
    }
    let head = (n / 20).max(1);
    let y0 = y[..head].iter().sum::<f64>() / head as f64;
    let tail = (n / 10).max(1);
    let c0 = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let spread = span(y);
    if !(y0 - c0 > 0.1 * (spread.1 - spread.0)) || y0 <= c0 {
        return Err(Error::NotDecaying(format!(
            "start {y0:.4} does not exceed end {c0:.4}"
        )));
    }
    let a0 = y0 - c0;
    let t_start = t[0];
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter_map(|(&tv, &yv)| {
            let s = (yv - c0) / a0;
            (tv > 0.0 && s > 0.1 && s < 0.9).then(|| (tv.ln(), (-s.ln()).ln()))
        })
        .collect();
    let fixed_p = family.exponent();
    let (p0, t0) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 1.0 };
        let p = fixed_p.unwrap_or(slope.clamp(0.5, 3.5));
        // intercept = −p ln T at the mean abscissa
        (p, (mx - my / p).exp())
    } else {
        let p = fixed_p.unwrap_or(1.0);
        let t_half = t
            .iter()
            .zip(y)
            .find(|(_, &yv)| yv - c0 < a0 / 2.0)
            .map_or(t[n - 1] - t_start, |(tv, _)| tv - t_start);
        (
            p,
            (t_half / std::f64::consts::LN_2.powf(1.0 / p)).max(f64::MIN_POSITIVE),
        )
    };
    let model = |t: f64, p: &[f64]| p[0] * (-(t.max(0.0) / p[1]).powf(p[2])).exp() + p[3];
    let t_span = span(t);
    let t0 = if t0.is_finite() && t0 > 0.0 {
        t0
    } else {
        (t_span.1 - t_span.0) / 2.0
    };
    let mut problem = FitProblem::new("decay", t, y, &DECAY_NAMES, vec![a0, t0, p0, c0], &model)
        .bound("t_decay", ParamBound::Positive)
        .bound("exponent", ParamBound::Range(0.2, 5.0));
    if fixed_p.is_some() {
        problem = problem.fix("exponent");
    }
    let mut fit = least_squares(&problem)?;
    fit.model = format!("decay-{}", family.name());
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayComparison {
    pub fits: Vec<FitResult>,
    /// Model name of the converged fit with the lowest AIC.
    pub preferred: String,
}

/// Fits every family and picks the lowest AIC among the converged fits.
pub fn compare_decay_families(t: &[f64], y: &[f64], families: &[DecayFamily]) -> Result<DecayComparison> {
    let fits = families
        .iter()
        .map(|f| fit_decay(t, y, *f))
        .collect::<Result<Vec<_>>>()?;
    let preferred = fits
        .iter()
        .filter(|f| f.converged)
        .min_by(|a, b| a.aic.total_cmp(&b.aic))
        .map(|f| f.model.clone())
        .ok_or_else(|| Error::FitFailed {
            model: "decay".into(),
            detail: "no decay family converged".into(),
        })?;
    Ok(DecayComparison { fits, preferred })
}

/// Parameter names of [`fit_rabi_oscillation`] results.
pub const RABI_NAMES: [&str; 5] = ["amplitude", "rabi_mhz", "phase_rad", "tau_ns", "offset"];

/// Fits `A·cos(2πΩt + φ)·exp(−t/τ) + c` with `t` in ns and `Ω` in MHz.
///
/// Requires uniformly spaced samples; `Ω` is initialised from the largest
/// peak of the zero-padded discrete spectrum.
pub fn fit_rabi_oscillation(t_ns: &[f64], y: &[f64]) -> Result<FitResult> {
    check_lengths(t_ns, y)?;
    let n = y.len();
    if n < 8 {
        return Err(Error::validation("fit.data", "Rabi fit needs at least 8 points"));
    }
    let dt = (t_ns[n - 1] - t_ns[0]) / (n - 1) as f64;
    if !(dt > 0.0) || t_ns.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::validation(
            "fit.data",
            "Rabi fit needs uniformly spaced, increasing times",
        ));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let len = (8 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (b, v) in buf.iter_mut().zip(y) {
        *b = Complex64::new(v - mean, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power: Vec<f64> = buf[..len / 2].iter().map(|c| c.norm_sqr()).collect();
    let k = (1..power.len())
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .unwrap_or(0);
    let mut sorted = power[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if k == 0 || !(power[k] > 20.0 * median) {
        return Ok(FitResult::failed(
            "rabi",
            &RABI_NAMES,
            n,
            "no spectral peak above the noise floor",
        ));
    }
    let refined = if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1].sqrt(), power[k].sqrt(), power[k + 1].sqrt());
        let d = a - 2.0 * b + c;
        k as f64 + if d < 0.0 { 0.5 * (a - c) / d } else { 0.0 }
    } else {
        k as f64
    };
    let rabi0 = refined / (len as f64 * dt) * 1e3;
    let duration = t_ns[n - 1] - t_ns[0];
    let mut warning = String::new();
    if rabi0 * duration * 1e-3 < 3.0 {
        warning = format!("; only {:.1} periods visible", rabi0 * duration * 1e-3);
    }
    // linear least squares for the quadrature amplitudes at the trial frequency
    let w = 2.0 * PI * rabi0 * 1e-3;
    let (mut cc, mut ss, mut cs, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&tv, &yv) in t_ns.iter().zip(y) {
        let (s, c) = (w * tv).sin_cos();
        cc += c * c;
        ss += s * s;
        cs += c * s;
        yc += (yv - mean) * c;
        ys += (yv - mean) * s;
    }
    let det = cc * ss - cs * cs;
    let (a_c, a_s) = ((yc * ss - ys * cs) / det, (ys * cc - yc * cs) / det);
    let amp0 = (a_c * a_c + a_s * a_s).sqrt().max(1e-12);
    let phase0 = (-a_s).atan2(a_c);
    let model =
        |t: f64, p: &[f64]| p[0] * (2.0 * PI * p[1] * 1e-3 * t + p[2]).cos() * (-t / p[3]).exp() + p[4];
    let problem = FitProblem::new(
        "rabi",
        t_ns,
        y,
        &RABI_NAMES,
        vec![amp0, rabi0, phase0, 10.0 * duration.max(dt), mean],
        &model,
    )
    .bound("amplitude", ParamBound::Positive)
    .bound("rabi_mhz", ParamBound::Positive)
    .bound("tau_ns", ParamBound::Positive);
    let mut fit = least_squares(&problem)?;
    let periods = fit.values[1] * duration * 1e-3;
    if fit.converged && periods < 1.0 {
        fit.converged = false;
        fit.message = format!("fitted oscillation completes only {periods:.2} periods in the window");
    } else {
        fit.message.push_str(&warning);
    }
    Ok(fit)
}

/// Parameter names of [`extract_qubit_line`] results.
pub const LINE_NAMES: [&str; 4] = ["f_q_ghz", "width_mhz", "depth_deg", "baseline_deg"];

/// Lorentzian fit of a two-tone phase trace: `c + D/(1 + 4(f − f_q)²/w²)`.
///
/// `width_mhz` is the full width at half depth, which equals the qubit
/// linewidth below saturation. `D < 0` is a dip. With `f_r_ghz` given, a
/// feature whose sign disagrees with `f_q − f_r` is flagged in the message.
pub fn extract_qubit_line(f_s_ghz: &[f64], phase_deg: &[f64], f_r_ghz: Option<f64>) -> Result<FitResult> {
    check_lengths(f_s_ghz, phase_deg)?;
    let n = phase_deg.len();
    let mut sorted = phase_deg.to_vec();
    sorted.sort_by(f64::total_cmp);
    if n < 5 {
        return Err(Error::validation("fit.data", "line fit needs at least 5 points"));
    }
    let median = sorted[n / 2];
    let up = sorted[n - 1] - median;
    let down = median - sorted[0];
    let sign = if up >= down { 1.0 } else { -1.0 };
    let flipped: Vec<f64> = phase_deg.iter().map(|v| sign * v).collect();
    let est = match estimate_peak(f_s_ghz, &flipped) {
        Some(e) if up.max(down) > 1e-12 => e,
        _ => {
            return Ok(FitResult::failed(
                "qubit-line",
                &LINE_NAMES,
                n,
                "featureless trace",
            ))
        }
    };
    let x = mhz_offsets(f_s_ghz, est.center);
    let model = |x: f64, p: &[f64]| p[3] + p[2] / (1.0 + 4.0 * (x - p[0]).powi(2) / (p[1] * p[1]));
    let problem = FitProblem::new(
        "qubit-line",
        &x,
        phase_deg,
        &["offset_mhz", "width_mhz", "depth_deg", "baseline_deg"],
        vec![
            0.0,
            (est.fwhm * 1e3).max(1e-6),
            sign * est.height,
            sign * est.baseline,
        ],
        &model,
    )
    .bound("width_mhz", ParamBound::Positive);
    let mut fit = least_squares(&problem)?;
    let (lo, hi) = span(&x);
    if fit.converged && !(lo..=hi).contains(&fit.values[0]) {
        fit.converged = false;
        fit.message = "fitted line centre lies outside the sampled range".into();
    }
    fit.names[0] = LINE_NAMES[0].into();
    fit.values[0] = est.center + fit.values[0] * 1e-3;
    fit.std_errors[0] *= 1e-3;
    if let Some(f_r) = f_r_ghz {
        let expected_peak = fit.values[0] > f_r;
        if (fit.values[2] > 0.0) != expected_peak {
            fit.message
                .push_str("; feature sign disagrees with the side of the resonator");
        }
    }
    Ok(fit)
}
