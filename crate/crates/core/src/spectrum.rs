// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Power spectra of sampled waveforms and their widths.
//!
//! The power spectrum approximates the continuous transform,
//! `P(ω) = |∫x(t)e^{iωt}dt|²`, on the angular-frequency grid
//! `ω_k = 2πk/(M·dt)`, sorted ascending. Two width estimators are
//! reported: the FWHM around the spectral peak and the rms width (standard
//! deviation of ω weighted by `P`). For `x(t) = exp(−(t/T)²)` these are
//! `2√(2 ln 2)/T` and `1/T`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::{Error, Result};

pub const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// Angular frequencies, ascending.
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
    pub fwhm: f64,
    pub rms_width: f64,
    /// Relative mismatch between time-domain and frequency-domain energy.
    pub parseval_residual: f64,
}

/// Which width the caller wants out of a [`Spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthEstimator {
    #[default]
    Fwhm,
    Rms,
}

impl Spectrum {
    pub fn width(&self, estimator: WidthEstimator) -> f64 {
        match estimator {
            WidthEstimator::Fwhm => self.fwhm,
            WidthEstimator::Rms => self.rms_width,
        }
    }
}

/// Spectrum of uniformly spaced samples.
pub fn spectrum(samples: &[C64], spacing: f64) -> Result<Spectrum> {
    spectrum_padded(samples, spacing, samples.len())
}

/// Spectrum after zero-padding to at least `min_len` samples.
pub fn spectrum_padded(samples: &[C64], spacing: f64, min_len: usize) -> Result<Spectrum> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Sampling(format!("need ≥ {MIN_SAMPLES} samples, got {}", samples.len())));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::Sampling(format!("sample spacing must be > 0, got {spacing}")));
    }
    let m = min_len.max(samples.len());
    let mut buf: Vec<C64> = samples.iter().copied().chain(std::iter::repeat(C64::default())).take(m).collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    let d_omega = 2.0 * PI / (m as f64 * spacing);
    let mut pairs: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let signed = if k <= (m - 1) / 2 { k as f64 } else { k as f64 - m as f64 };
            (signed * d_omega, (x * spacing).norm_sqr())
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (omega, power): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

    let time_energy: f64 = samples.iter().map(|x| x.norm_sqr()).sum::<f64>() * spacing;
    let freq_energy: f64 = power.iter().sum::<f64>() * d_omega / (2.0 * PI);
    let parseval_residual = if time_energy > 0.0 { (time_energy - freq_energy).abs() / time_energy } else { 0.0 };

    Ok(Spectrum {
        fwhm: fwhm(&omega, &power).unwrap_or(f64::NAN),
        rms_width: rms_width(&omega, &power),
        omega,
        power,
        parseval_residual,
    })
}

/// Spectrum of samples given with explicit times; the times must be
/// uniformly spaced to 1e-9 relative.
pub fn spectrum_from_times(times: &[f64], samples: &[C64]) -> Result<Spectrum> {
    if times.len() != samples.len() {
        return Err(Error::LengthMismatch { left: times.len(), right: samples.len() });
    }
    if times.len() < 2 {
        return Err(Error::Sampling("need at least two samples".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs()) {
        return Err(Error::Sampling("non-uniform sampling".into()));
    }
    spectrum(samples, dt)
}

/// Full width at half maximum of `y(x)` around its global maximum, with
/// linear interpolation of the crossings.
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    let (peak, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(ymax > 0.0) {
        return None;
    }
    let half = 0.5 * ymax;
    let interp = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let right = (peak..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| interp(i, i + 1))?;
    let left = (1..=peak).rev().find(|&i| y[i - 1] < half).map(|i| interp(i, i - 1))?;
    Some(right - left)
}

/// Standard deviation of `x` under the weight `w`.
pub fn rms_width(x: &[f64], w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let var = x.iter().zip(w).map(|(a, b)| (a - mean).powi(2) * b).sum::<f64>() / total;
    var.max(0.0).sqrt()
}
