use std::path::Path;

use eneon::fitting::{
    compare_decay_families, extract_qubit_line, fit_decay, fit_lorentzian, fit_rabi_oscillation,
    fit_vacuum_rabi, DecayFamily, VacuumRabiOptions,
};
use eneon::table::NumericTable;
use eneon::{Error, FitResult};
use serde_json::json;

use super::Report;
use crate::cli::FitModel;
use crate::failure::Failure;
use crate::output::{sha256_hex, FileHash, Outputs};

fn columns(model: FitModel) -> (&'static str, &'static str) {
    match model {
        FitModel::Lorentzian | FitModel::VacuumRabi => ("f_p_ghz", "s21_sq"),
        FitModel::QubitLine => ("f_s_ghz", "phase_deg"),
        _ => ("sweep_ns", "p_e"),
    }
}

fn describe(fit: &FitResult) -> Vec<String> {
    fit.names
        .iter()
        .zip(&fit.values)
        .zip(&fit.std_errors)
        .map(|((n, v), e)| format!("{n:<20} {v:.6} +/- {e:.3e}"))
        .collect()
}

pub fn run(
    file: &Path,
    model: FitModel,
    kappa: Option<f64>,
    exponent: Option<f64>,
    f_r: Option<f64>,
    out: &mut Outputs,
) -> Result<Report, Failure> {
    let bytes = std::fs::read(file).map_err(|e| Failure::Io(format!("{}: {e}", file.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| {
        Failure::Core(Error::Parse {
            line: 0,
            message: "file is not UTF-8".into(),
        })
    })?;
    let table = NumericTable::parse(&text)?;
    let (xc, yc) = columns(model);
    let x = table.require(xc)?;
    let y = table.require(yc)?;
    let path = std::fs::canonicalize(file).unwrap_or_else(|_| file.to_path_buf());
    let input = FileHash {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };

    let mut lines = Vec::new();
    let (record, primary) = match model {
        FitModel::Lorentzian => {
            let fit = fit_lorentzian(&x, &y)?;
            (json!(fit), fit)
        }
        FitModel::VacuumRabi => {
            let options = VacuumRabiOptions {
                kappa_fixed_mhz: kappa,
                g_initial_mhz: None,
            };
            let fit = fit_vacuum_rabi(&x, &y, options)?;
            let primary = if fit.preferred == "lorentzian" && fit.lorentzian.converged {
                lines.push("single peak: the bare Lorentzian is preferred".into());
                fit.lorentzian.clone()
            } else {
                fit.coupled.clone()
            };
            (json!(fit), primary)
        }
        FitModel::DecayExponential => {
            let fit = fit_decay(&x, &y, DecayFamily::Exponential)?;
            (json!(fit), fit)
        }
        FitModel::DecayGaussian => {
            let fit = fit_decay(&x, &y, DecayFamily::Gaussian)?;
            (json!(fit), fit)
        }
        FitModel::DecayStretched => {
            let fit = fit_decay(&x, &y, DecayFamily::Stretched { exponent })?;
            (json!(fit), fit)
        }
        FitModel::DecayCompare => {
            let families = [
                DecayFamily::Exponential,
                DecayFamily::Gaussian,
                DecayFamily::Stretched { exponent },
            ];
            let cmp = compare_decay_families(&x, &y, &families)?;
            lines.push(format!("preferred: {}", cmp.preferred));
            let best = cmp
                .fits
                .iter()
                .find(|f| f.model == cmp.preferred)
                .cloned()
                .expect("preferred fit");
            (json!(cmp), best)
        }
        FitModel::Rabi => {
            let fit = fit_rabi_oscillation(&x, &y)?;
            (json!(fit), fit)
        }
        FitModel::QubitLine => {
            let fit = extract_qubit_line(&x, &y, f_r)?;
            (json!(fit), fit)
        }
    };
    out.write_json(&format!("fit-{}.json", model.name()), &record)?;

    let deferred = if primary.converged {
        lines.extend(describe(&primary));
        lines.push(format!("rss = {:.6e}, aic = {:.3}", primary.rss, primary.aic));
        None
    } else {
        lines.push(format!("not converged: {}", primary.message));
        Some(Failure::FitNotConverged(format!(
            "{}: {}",
            primary.model, primary.message
        )))
    };
    Ok(Report {
        summary: lines,
        inputs: vec![input],
        deferred,
    })
}
