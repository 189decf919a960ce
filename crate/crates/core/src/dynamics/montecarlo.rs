use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, NoiseRealization};
use super::noise::{pink_band_for, sample_pink, sample_quasistatic};
use super::{Protocol, ProtocolKind, QubitParams, Segment};
use crate::error::{ensure_positive, Error, Result};
use crate::table::NumericTable;

/// Stream reserved for readout shot noise; realizations use streams `0..n`.
const SHOT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    /// Grid of the 1/f detuning series (ns).
    pub noise_step_ns: f64,
    /// Projective shots per sweep point; `None` reports the exact average.
    pub shots: Option<u64>,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            noise_step_ns: 1.0,
            shots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationCurve {
    pub kind: ProtocolKind,
    pub sweep_ns: Vec<f64>,
    pub p_e: Vec<f64>,
    /// Standard error of each point over realizations (and shots).
    pub stderr: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PopulationCurve {
    pub fn to_csv(&self) -> String {
        let mut t = NumericTable::new(&["sweep_ns", "p_e", "stderr"]);
        for k in 0..self.sweep_ns.len() {
            t.push(vec![self.sweep_ns[k], self.p_e[k], self.stderr[k]]);
        }
        t.to_csv()
    }
}

/// Monte-Carlo average of the protocol over noise realizations.
///
/// Realization `r` draws its noise from ChaCha8 stream `r` of `seed` and
/// keeps it for every sweep point, so curves are smooth within a
/// realization. The average is reduced in realization order, which makes the
/// result independent of the thread count.
pub fn run_protocol(
    protocol: &Protocol,
    qubit: &QubitParams,
    sampling: &Sampling,
    n_realizations: usize,
    seed: u64,
) -> Result<PopulationCurve> {
    protocol.validate()?;
    qubit.validate()?;
    ensure_positive("sampling.noise_step_ns", sampling.noise_step_ns)?;
    if n_realizations == 0 {
        return Err(Error::validation("realizations", "must be at least 1"));
    }
    if let Some(0) = sampling.shots {
        return Err(Error::validation("sampling.shots", "must be at least 1"));
    }
    let mut warnings = Vec::new();
    if protocol.rabi_mhz * 1e-3 > 0.1 * qubit.f_q_ghz {
        warnings.push(format!(
            "rotating-frame approximation questionable: Omega_R = {} MHz vs f_q = {} GHz",
            protocol.rabi_mhz, qubit.f_q_ghz
        ));
    }
    let sweep = protocol.sweep.values();
    let sequences: Vec<Vec<Segment>> = sweep.iter().map(|&x| protocol.segments(x)).collect();
    let deco = &qubit.decoherence;

    let (mean, stderr) = if deco.is_stochastic() {
        let total = protocol.max_duration_ns();
        let n_steps = (total / sampling.noise_step_ns).ceil() as usize + 1;
        let band = pink_band_for(
            deco.pink_amplitude_mhz,
            deco.pink_exponent,
            total.max(sampling.noise_step_ns),
            sampling.noise_step_ns,
        );
        let runs: Vec<Vec<f64>> = (0..n_realizations)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let noise = NoiseRealization {
                    static_mhz: sample_quasistatic(deco.quasi_static_sigma_mhz, &mut rng),
                    series_mhz: if deco.pink_amplitude_mhz > 0.0 {
                        sample_pink(&band, n_steps, sampling.noise_step_ns, &mut rng)?
                    } else {
                        Vec::new()
                    },
                    step_ns: sampling.noise_step_ns,
                };
                evaluate(&sequences, qubit, &noise)
            })
            .collect::<Result<_>>()?;
        reduce(&runs, sweep.len())
    } else {
        let p = evaluate(&sequences, qubit, &NoiseRealization::none())?;
        let zeros = vec![0.0; p.len()];
        (p, zeros)
    };

    let (p_e, stderr) = match sampling.shots {
        None => (mean, stderr),
        Some(shots) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(SHOT_STREAM);
            mean.iter()
                .zip(&stderr)
                .map(|(&p, &se)| {
                    let hits = Binomial::new(shots, p)
                        .map_err(|e| Error::Domain(e.to_string()))?
                        .sample(&mut rng);
                    let q = hits as f64 / shots as f64;
                    Ok((q, (se * se + p * (1.0 - p) / shots as f64).sqrt()))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
    };

    Ok(PopulationCurve {
        kind: protocol.kind,
        sweep_ns: sweep,
        p_e,
        stderr,
        realizations: n_realizations,
        seed,
        warnings,
    })
}

fn evaluate(sequences: &[Vec<Segment>], qubit: &QubitParams, noise: &NoiseRealization) -> Result<Vec<f64>> {
    sequences
        .iter()
        .map(|segs| evolve(segs, qubit, noise).map(|rho| rho.p_e().clamp(0.0, 1.0)))
        .collect()
}

fn reduce(runs: &[Vec<f64>], points: usize) -> (Vec<f64>, Vec<f64>) {
    let n = runs.len() as f64;
    let mut mean = vec![0.0; points];
    for run in runs {
        for (m, v) in mean.iter_mut().zip(run) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; points];
    for run in runs {
        for ((s, v), m) in var.iter_mut().zip(run).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let stderr = if runs.len() > 1 {
        var.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    } else {
        vec![0.0; points]
    };
    (mean, stderr)
}
