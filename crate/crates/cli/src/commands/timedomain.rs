use eneon::dynamics::{generate_protocol, run_protocol, QubitParams};
use eneon::fitting::{compare_decay_families, fit_decay, fit_rabi_oscillation, DecayFamily};
use eneon::{Error, FitResult, PopulationCurve};
use serde_json::json;

use super::Report;
use crate::cli::Kind;
use crate::config::RunConfig;
use crate::failure::Failure;
use crate::output::Outputs;

/// Population spread below which a decay curve is treated as flat.
const MIN_DECAY_CONTRAST: f64 = 0.01;

pub fn run(kind: Kind, cfg: &RunConfig, out: &mut Outputs) -> Result<Report, Failure> {
    let td = &cfg.timedomain;
    let section = match kind {
        Kind::Rabi => &td.rabi,
        Kind::T1 => &td.t1,
        Kind::Ramsey => &td.ramsey,
        Kind::Echo => &td.echo,
    };
    let drive_ghz = td.f_q_ghz + section.detuning_mhz * 1e-3;
    let protocol = generate_protocol(kind.name(), section.rabi_mhz, drive_ghz, section.sweep()?)?;
    let qubit = QubitParams::new(td.f_q_ghz, section.decoherence);
    let curve = run_protocol(&protocol, &qubit, &cfg.sampling, cfg.realizations, cfg.seed)?;
    out.write(&format!("{}_curve.csv", kind.name()), curve.to_csv().as_bytes())?;

    let mut lines: Vec<String> = curve.warnings.iter().map(|w| format!("warning: {w}")).collect();
    let (record, deferred) = match fit_curve(kind, &curve, &mut lines) {
        Ok(r) => r,
        Err(Error::NotDecaying(detail)) => {
            lines.push(format!("no decay: {detail}"));
            (
                json!({"kind": kind.name(), "decay": false, "detail": detail}),
                None,
            )
        }
        Err(e) => return Err(e.into()),
    };
    out.write_json(&format!("{}_fit.json", kind.name()), &record)?;
    Ok(Report {
        summary: lines,
        inputs: Vec::new(),
        deferred,
    })
}

fn not_converged(fit: &FitResult) -> Option<Failure> {
    (!fit.converged).then(|| Failure::FitNotConverged(format!("{}: {}", fit.model, fit.message)))
}

fn fit_curve(
    kind: Kind,
    curve: &PopulationCurve,
    lines: &mut Vec<String>,
) -> eneon::Result<(serde_json::Value, Option<Failure>)> {
    let (t, y) = (&curve.sweep_ns, &curve.p_e);
    if kind != Kind::Rabi {
        let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        if hi - lo < MIN_DECAY_CONTRAST {
            return Err(Error::NotDecaying(format!(
                "P_e stays within {:.1e} of {hi:.4}",
                hi - lo
            )));
        }
    }
    match kind {
        Kind::Rabi => {
            let fit = fit_rabi_oscillation(t, y)?;
            if fit.converged {
                lines.push(format!(
                    "Omega_R = {:.4} +/- {:.4} MHz",
                    fit.get("rabi_mhz").unwrap_or(f64::NAN),
                    fit.std_error("rabi_mhz").unwrap_or(f64::NAN)
                ));
            }
            let deferred = not_converged(&fit);
            Ok((json!({"kind": "rabi", "fit": fit}), deferred))
        }
        Kind::T1 => {
            let fit = fit_decay(t, y, DecayFamily::Exponential)?;
            let t1_us = fit.get("t_decay").map(|v| v * 1e-3);
            if fit.converged {
                lines.push(format!("T1 = {:.4} us", t1_us.unwrap_or(f64::NAN)));
            }
            let deferred = not_converged(&fit);
            Ok((json!({"kind": "t1", "t1_us": t1_us, "fit": fit}), deferred))
        }
        Kind::Ramsey | Kind::Echo => {
            let mut families = vec![DecayFamily::Exponential, DecayFamily::Gaussian];
            if kind == Kind::Echo {
                families.push(DecayFamily::Stretched { exponent: None });
            }
            let cmp = compare_decay_families(t, y, &families)?;
            let best = cmp
                .fits
                .iter()
                .find(|f| f.model == cmp.preferred)
                .expect("preferred is among the fits");
            let label = if kind == Kind::Ramsey { "T2*" } else { "T2E" };
            let t_ns = best.get("t_decay").unwrap_or(f64::NAN);
            let p = best.get("exponent").unwrap_or(f64::NAN);
            lines.push(format!(
                "{label} = {t_ns:.2} ns ({}, exponent {p:.3})",
                cmp.preferred
            ));
            if kind == Kind::Echo {
                if let Some(s) = cmp
                    .fits
                    .iter()
                    .find(|f| f.model == "decay-stretched" && f.converged)
                {
                    lines.push(format!(
                        "stretched: T = {:.2} ns, exponent = {:.3} +/- {:.3}",
                        s.get("t_decay").unwrap_or(f64::NAN),
                        s.get("exponent").unwrap_or(f64::NAN),
                        s.std_error("exponent").unwrap_or(f64::NAN)
                    ));
                }
            }
            Ok((
                json!({"kind": kind.name(), "t_decay_ns": t_ns, "exponent": p, "comparison": cmp}),
                None,
            ))
        }
    }
}
