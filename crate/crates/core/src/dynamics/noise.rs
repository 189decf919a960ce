use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Static detuning offset (MHz) for one realization.
pub fn sample_quasistatic<R: Rng + ?Sized>(sigma_mhz: f64, rng: &mut R) -> f64 {
    if sigma_mhz == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_mhz)
        .expect("sigma validated non-negative")
        .sample(rng)
}

/// Spectral band of a 1/f^α detuning process, `S(f) = A²(1 Hz/f)^α` MHz²/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinkBand {
    pub amplitude_mhz: f64,
    pub exponent: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
}

impl PinkBand {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("pink.amplitude_mhz", self.amplitude_mhz)?;
        if !(0.5..=1.5).contains(&self.exponent) {
            return Err(Error::validation(
                "pink.exponent",
                format!("{} outside [0.5, 1.5]", self.exponent),
            ));
        }
        ensure_positive("pink.f_min_hz", self.f_min_hz)?;
        ensure_positive("pink.f_max_hz", self.f_max_hz)?;
        if self.f_min_hz >= self.f_max_hz {
            return Err(Error::validation(
                "pink.f_min_hz",
                format!("degenerate band [{}, {}] Hz", self.f_min_hz, self.f_max_hz),
            ));
        }
        Ok(())
    }

    pub fn psd(&self, f_hz: f64) -> f64 {
        self.amplitude_mhz * self.amplitude_mhz * f_hz.powf(-self.exponent)
    }
}

/// Band spanning `1/(100·T_total)` to the Nyquist frequency of `step_ns`.
pub fn pink_band_for(amplitude_mhz: f64, exponent: f64, total_ns: f64, step_ns: f64) -> PinkBand {
    PinkBand {
        amplitude_mhz,
        exponent,
        f_min_hz: 1e9 / (100.0 * total_ns),
        f_max_hz: 1e9 / (2.0 * step_ns),
    }
}

/// Detuning series (MHz) on a grid of `n_steps` cells of `step_ns`.
///
/// Sum of cosines at the FFT frequencies `k/(L·dt)` inside the band, with
/// amplitudes `sqrt(2 S(f) Δf)` and independent uniform phases. `L` is the
/// smallest power of two covering both `n_steps` and one period of `f_min`.
pub fn sample_pink<R: Rng + ?Sized>(
    band: &PinkBand,
    n_steps: usize,
    step_ns: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    band.validate()?;
    ensure_positive("pink.step_ns", step_ns)?;
    if band.amplitude_mhz == 0.0 || n_steps == 0 {
        return Ok(vec![0.0; n_steps]);
    }
    let dt_s = step_ns * 1e-9;
    let cover = (1.0 / (band.f_min_hz * dt_s)).ceil() as usize;
    let len = n_steps.max(cover).max(2).next_power_of_two();
    let df = 1.0 / (len as f64 * dt_s);
    let mut spec = vec![Complex64::new(0.0, 0.0); len];
    for k in 1..=len / 2 {
        let f = k as f64 * df;
        // phases are drawn for every bin so the stream does not depend on the band
        let phase = rng.random::<f64>() * 2.0 * PI;
        if f < band.f_min_hz || f > band.f_max_hz {
            continue;
        }
        let amp = (2.0 * band.psd(f) * df).sqrt();
        if k == len / 2 {
            spec[k] = Complex64::new(amp * phase.cos(), 0.0);
        } else {
            let c = Complex64::from_polar(amp / 2.0, phase);
            spec[k] = c;
            spec[len - k] = c.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut spec);
    Ok(spec.into_iter().take(n_steps).map(|c| c.re).collect())
}
