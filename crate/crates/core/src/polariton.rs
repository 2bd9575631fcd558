// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Dark and bright polaritons.
//!
//! `Ψ = cos θ·E − sin θ·S` and `Φ = sin θ·E + cos θ·S` where `S = √N ρ_cb`.
//! In the adiabatic limit Φ ≈ 0 and Ψ obeys `(∂t + c cos²θ ∂z)Ψ = 0`.
//! The first-order correction adds
//! `−AΨ + B c∂zΨ + C c²∂z²Ψ − D c³∂z³Ψ` on the right-hand side; it is solved
//! here mode by mode with the convention `∂z ↔ iq`.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::medium::{transparency_width, MediumParams};
use crate::quad;
use crate::schedule::{ControlSchedule, Domain};
use crate::solver::{FieldState, Scenario, Source};
use crate::spectrum::spectrum_padded;
use crate::{Error, Result};

/// Outer step for derivatives of derived quantities (θ̇ uses a tenth of it).
pub const DIFF_STEP: f64 = 1e-2;

/// Largest fraction of ∫|Ψ|² tolerated in the edge cells of a periodic window.
pub const WINDOW_MASS_LIMIT: f64 = 1e-8;

/// Safety factor applied to every adiabaticity margin.
pub const SAFETY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolaritonState {
    pub t: f64,
    pub psi: Vec<C64>,
    pub phi: Vec<C64>,
    /// Mixing angle per grid point.
    pub theta: Vec<f64>,
}

/// Rotate `(E, S)` into `(Ψ, Φ)` point by point.
pub fn to_polariton(t: f64, e: &[C64], s: &[C64], theta: &[f64]) -> Result<PolaritonState> {
    if e.len() != s.len() {
        return Err(Error::LengthMismatch { left: e.len(), right: s.len() });
    }
    if e.len() != theta.len() {
        return Err(Error::LengthMismatch { left: e.len(), right: theta.len() });
    }
    if let Some(&th) = theta.iter().find(|th| !(0.0..=std::f64::consts::FRAC_PI_2).contains(*th)) {
        return Err(Error::InvalidParameter(format!("mixing angle {th} outside [0, π/2]")));
    }
    let (psi, phi) = e
        .iter()
        .zip(s)
        .zip(theta)
        .map(|((&e, &s), &th)| {
            let (sin, cos) = th.sin_cos();
            (e * cos - s * sin, e * sin + s * cos)
        })
        .unzip();
    Ok(PolaritonState { t, psi, phi, theta: theta.to_vec() })
}

/// Inverse rotation: `E = cos θ Ψ + sin θ Φ`, `S = −sin θ Ψ + cos θ Φ`.
pub fn from_polariton(state: &PolaritonState) -> (Vec<C64>, Vec<C64>) {
    state
        .psi
        .iter()
        .zip(&state.phi)
        .zip(&state.theta)
        .map(|((&psi, &phi), &th)| {
            let (sin, cos) = th.sin_cos();
            (psi * cos + phi * sin, -psi * sin + phi * cos)
        })
        .unzip()
}

/// Polaritons of a solver state, using the scenario's local mixing angle.
pub fn polariton_of(state: &FieldState, scenario: &Scenario) -> Result<PolaritonState> {
    let theta: Vec<f64> = (0..state.e.len()).map(|i| scenario.theta(scenario.grid.z(i), state.t)).collect();
    to_polariton(state.t, &state.e, &state.s, &theta)
}

/// Resampling used when translating a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resample {
    /// Four-point cubic Lagrange interpolation, zero outside the grid.
    #[default]
    Cubic,
    /// Exact band-limited shift on the periodic window.
    Spectral,
}

fn require_time(schedule: &ControlSchedule) -> Result<()> {
    match schedule.domain {
        Domain::Time => Ok(()),
        Domain::Space => Err(Error::InvalidParameter("a time-domain schedule is required".into())),
    }
}

/// Distance `c∫₀^t cos²θ(τ)dτ` covered by the dark polariton.
pub fn travelled(schedule: &ControlSchedule, m: &MediumParams, t: f64) -> f64 {
    let mut cuts: Vec<f64> = schedule.profile.jumps().into_iter().filter(|&x| x > 0.0 && x < t).collect();
    cuts.insert(0, 0.0);
    cuts.push(t);
    cuts.windows(2).map(|w| quad::integrate(|x| schedule.group_velocity(x, m), w[0], w[1], 1e-13)).sum()
}

/// Adiabatic solution `Ψ(z, t) = Ψ(z − c∫₀^t cos²θ dτ, 0)` on a grid of
/// spacing `dz`.
pub fn advect_dark(
    psi0: &[C64],
    dz: f64,
    schedule: &ControlSchedule,
    m: &MediumParams,
    t: f64,
    resample: Resample,
) -> Result<Vec<C64>> {
    require_time(schedule)?;
    let shift = travelled(schedule, m, t);
    Ok(match resample {
        Resample::Cubic => shift_cubic(psi0, shift / dz),
        Resample::Spectral => {
            let q = wavenumbers(psi0.len(), dz);
            let mut spec = fft(psi0, false);
            for (x, q) in spec.iter_mut().zip(q) {
                *x *= C64::from_polar(1.0, -q * shift);
            }
            fft(&spec, true)
        }
    })
}

/// `out[i] = y(i − cells)` by cubic Lagrange interpolation.
fn shift_cubic(y: &[C64], cells: f64) -> Vec<C64> {
    let n = y.len() as isize;
    let at = |k: isize| if (0..n).contains(&k) { y[k as usize] } else { C64::default() };
    (0..n)
        .map(|i| {
            let x = i as f64 - cells;
            let k = x.floor() as isize;
            let u = x - k as f64;
            let w = [
                -u * (u - 1.0) * (u - 2.0) / 6.0,
                (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
                -(u + 1.0) * u * (u - 2.0) / 2.0,
                (u + 1.0) * u * (u - 1.0) / 6.0,
            ];
            at(k - 1) * w[0] + at(k) * w[1] + at(k + 1) * w[2] + at(k + 2) * w[3]
        })
        .collect()
}

fn fft(x: &[C64], inverse: bool) -> Vec<C64> {
    let mut buf = x.to_vec();
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(buf.len()).process(&mut buf);
        let n = buf.len() as f64;
        buf.iter_mut().for_each(|v| *v /= n);
    } else {
        planner.plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

/// Wavenumbers matching the forward FFT layout for `Ψ(z) = Σ Ψ̂_q e^{iqz}`.
pub fn wavenumbers(n: usize, dz: f64) -> Vec<f64> {
    let dq = 2.0 * std::f64::consts::PI / (n as f64 * dz);
    (0..n).map(|k| if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 } * dq).collect()
}

/// First-order non-adiabatic coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CorrectionCoeffs {
    /// True when the loss terms have their physical sign.
    pub fn dissipative(&self) -> bool {
        self.a >= 0.0 && self.c >= 0.0
    }
}

fn d1<F: Fn(f64) -> f64>(f: &F, t: f64, h: f64) -> f64 {
    let c = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    (4.0 * c(0.5 * h) - c(h)) / 3.0
}

fn d2<F: Fn(f64) -> f64>(f: &F, t: f64, h: f64) -> f64 {
    let f0 = f(t);
    let c = |h: f64| (f(t + h) - 2.0 * f0 + f(t - h)) / (h * h);
    (4.0 * c(0.5 * h) - c(h)) / 3.0
}

/// Coefficients A, B, C, D at time `t` using [`DIFF_STEP`].
pub fn correction_coeffs(schedule: &ControlSchedule, t: f64, m: &MediumParams) -> Result<CorrectionCoeffs> {
    correction_coeffs_with_step(schedule, t, m, DIFF_STEP)
}

/// Coefficients with an explicit outer difference step `h`.
///
/// Derivatives are central differences with one Richardson level (fourth
/// order); θ̇ itself is taken with step `h/10`.
pub fn correction_coeffs_with_step(
    schedule: &ControlSchedule,
    t: f64,
    m: &MediumParams,
    h: f64,
) -> Result<CorrectionCoeffs> {
    require_time(schedule)?;
    if schedule.profile.kink_within(t, 2.0 * h) {
        return Err(Error::DerivativeUndefined { x: t });
    }
    let g2 = m.gn2();
    let gamma = m.gamma();
    let theta = |x: f64| schedule.theta(x, m);
    let theta_dot = |x: f64| d1(&theta, x, 0.1 * h);
    // cos and sin straight from the control keep the θ = 0, π/2 limits exact
    let cos_sin = |x: f64| schedule.mixing(x, m).cos_sin();
    let f_a = |x: f64| {
        let s = cos_sin(x).1;
        theta_dot(x).powi(2) * s * s / g2
    };
    let f_c = |x: f64| {
        let (c, s) = cos_sin(x);
        s.powi(4) * c * c / g2
    };
    let sin3 = |x: f64| cos_sin(x).1.powi(3);
    let (c, s) = cos_sin(t);
    Ok(CorrectionCoeffs {
        a: gamma * f_a(t) + 0.5 * d1(&f_a, t, h),
        b: s / (3.0 * g2) * d2(&sin3, t, h),
        c: gamma * f_c(t) + 0.5 * d1(&f_c, t, h),
        d: s.powi(4) * c.powi(4) / g2,
    })
}

/// Time integrals of the coefficients and of `c cos²θ` over an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionIntegrals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `c∫cos²θ dt`.
    pub transport: f64,
}

impl CorrectionIntegrals {
    /// Same transport, all correction integrals multiplied by `k`.
    pub fn scaled(self, k: f64) -> Self {
        Self { a: k * self.a, b: k * self.b, c: k * self.c, d: k * self.d, ..self }
    }

    /// Accumulated exponent for wavenumber `q`.
    pub fn exponent(&self, q: f64, c: f64) -> C64 {
        let cq = c * q;
        C64::new(-self.a - self.c * cq * cq, -self.transport * q + self.b * cq + self.d * cq * cq * cq)
    }

    /// Predicted fractional loss of polariton number, `1 − exp(−2∫A)`.
    pub fn predicted_loss(&self) -> f64 {
        1.0 - (-2.0 * self.a).exp()
    }
}

/// Simpson integrals of A, B, C, D and the transport velocity on `[t0, t1]`.
pub fn correction_integrals(
    schedule: &ControlSchedule,
    m: &MediumParams,
    t0: f64,
    t1: f64,
) -> Result<CorrectionIntegrals> {
    require_time(schedule)?;
    if let Some(&x) = schedule.profile.jumps().iter().find(|&&x| x >= t0 && x <= t1) {
        return Err(Error::DerivativeUndefined { x });
    }
    let panels = (((t1 - t0) / 0.05).ceil() as usize).max(64);
    let h = (t1 - t0) / panels as f64;
    let mut coeffs = Vec::with_capacity(panels + 1);
    for k in 0..=panels {
        coeffs.push(correction_coeffs(schedule, t0 + k as f64 * h, m)?);
    }
    let simpson = |f: &dyn Fn(&CorrectionCoeffs) -> f64| {
        let inner: f64 = (1..panels).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * f(&coeffs[k])).sum();
        h / 3.0 * (f(&coeffs[0]) + inner + f(&coeffs[panels]))
    };
    Ok(CorrectionIntegrals {
        a: simpson(&|k| k.a),
        b: simpson(&|k| k.b),
        c: simpson(&|k| k.c),
        d: simpson(&|k| k.d),
        transport: travelled(schedule, m, t1) - travelled(schedule, m, t0),
    })
}

/// Fraction of ∫|Ψ|² in the outer 2% of the window on either side.
pub fn edge_mass(psi: &[C64]) -> f64 {
    let n = psi.len();
    let edge = (n / 50).max(1);
    let total: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outer: f64 = psi[..edge].iter().chain(&psi[n - edge..]).map(|x| x.norm_sqr()).sum();
    outer / total
}

/// Apply accumulated integrals to `Ψ₀` in Fourier space.
pub fn propagate_with_integrals(psi0: &[C64], dz: f64, c: f64, integrals: &CorrectionIntegrals) -> Result<Vec<C64>> {
    let fraction = edge_mass(psi0);
    if fraction > WINDOW_MASS_LIMIT {
        return Err(Error::WindowMass { fraction });
    }
    let q = wavenumbers(psi0.len(), dz);
    let mut spec = fft(psi0, false);
    for (x, q) in spec.iter_mut().zip(q) {
        *x *= integrals.exponent(q, c).exp();
    }
    let out = fft(&spec, true);
    let fraction = edge_mass(&out);
    if fraction > WINDOW_MASS_LIMIT {
        return Err(Error::WindowMass { fraction });
    }
    Ok(out)
}

/// First-order corrected dark polariton at time `t`.
pub fn corrected_propagate(
    psi0: &[C64],
    dz: f64,
    schedule: &ControlSchedule,
    m: &MediumParams,
    t: f64,
) -> Result<Vec<C64>> {
    let integrals = correction_integrals(schedule, m, 0.0, t)?;
    propagate_with_integrals(psi0, dz, m.c(), &integrals)
}

/// One adiabaticity condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    /// Dimensionless ratio that must be ≪ 1.
    pub value: f64,
    pub pass: bool,
}

impl Margin {
    fn new(name: &'static str, value: f64) -> Self {
        Self { name, value, pass: value.is_finite() && value * SAFETY_FACTOR <= 1.0 }
    }
}

/// The four adiabaticity margins of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdiabaticityReport {
    /// `γc²/L_p² ∫cos²θ/g²N dt` (spectral width against transparency width).
    pub spreading: Margin,
    /// `γ∫θ̇²/(g²N + Ω²) dt` (non-adiabatic loss).
    pub rotation: Margin,
    /// `√(ηkL)/(Ω₀² T_p/γ)` (absorption of the pulse spectrum).
    pub absorption: Margin,
    /// `(l_abs/c)(v_gr⁰/c)/T` with `T = (π/2)/max|θ̇|`.
    pub switching: Margin,
}

impl AdiabaticityReport {
    pub fn all_pass(&self) -> bool {
        [&self.spreading, &self.rotation, &self.absorption, &self.switching].iter().all(|m| m.pass)
    }
}

fn pulse_length(scenario: &Scenario, v0: f64) -> f64 {
    match scenario.source {
        Source::Envelope { width, .. } => width,
        Source::Injection { duration, .. } => v0.max(f64::MIN_POSITIVE) * duration,
    }
}

fn pulse_center(scenario: &Scenario) -> f64 {
    match scenario.source {
        Source::Envelope { center, .. } => center,
        Source::Injection { .. } => scenario.grid.z_min,
    }
}

/// Evaluate the adiabaticity margins of `scenario` over `[0, t_end]`.
pub fn adiabaticity_report(scenario: &Scenario) -> AdiabaticityReport {
    let m = &scenario.medium;
    let sched = &scenario.control;
    let (g2, gamma, c) = (m.gn2(), m.gamma(), m.c());
    let t_end = scenario.grid.t_end;
    let z0 = pulse_center(scenario);
    let v0 = scenario.group_velocity(z0, 0.0);
    let omega0 = scenario.rabi(z0, 0.0);
    let l_p = pulse_length(scenario, v0);

    // θ̇² sin²θ/g²N integrated along the pulse trajectory, and max |θ̇|.
    let (rotation, max_rate, cos2_integral) = match sched.domain {
        Domain::Time => {
            let jumps: Vec<f64> = sched.profile.jumps().into_iter().filter(|&x| x >= 0.0 && x <= t_end).collect();
            let cos2 = quad::integrate(|t| sched.cos2_theta(t, m), 0.0, t_end, 1e-10) / g2;
            if !jumps.is_empty() {
                (f64::INFINITY, f64::INFINITY, cos2)
            } else {
                let theta = |t: f64| sched.theta(t, m);
                let rate = |t: f64| d1(&theta, t, 1e-3);
                let n = ((t_end / 0.02).ceil() as usize).max(200);
                let integrand = |t: f64| rate(t).powi(2) * theta(t).sin().powi(2) / g2;
                let max_rate = (0..=n).map(|k| rate(t_end * k as f64 / n as f64).abs()).fold(0.0, f64::max);
                (quad::simpson(integrand, 0.0, t_end, n), max_rate, cos2)
            }
        }
        Domain::Space => {
            let (za, zb) = (scenario.grid.z_min, scenario.grid.z_max);
            let theta = |z: f64| sched.theta(z, m);
            let slope = |z: f64| d1(&theta, z, 1e-3);
            let n = 4000;
            // dt = dz/v along the trajectory, θ̇ = v·dθ/dz
            let integrand = |z: f64| {
                let v = sched.group_velocity(z, m);
                v * slope(z).powi(2) * theta(z).sin().powi(2) / g2
            };
            let max_rate = (0..=n)
                .map(|k| {
                    let z = za + (zb - za) * k as f64 / n as f64;
                    (sched.group_velocity(z, m) * slope(z)).abs()
                })
                .fold(0.0, f64::max);
            let travel = (zb - za).min(c * t_end);
            (quad::simpson(integrand, za, zb, n), max_rate, travel / (c * g2))
        }
    };

    let spreading = gamma * c * c / (l_p * l_p) * cos2_integral;
    let t_p = l_p / v0.max(f64::MIN_POSITIVE);
    let absorption = if omega0.is_infinite() { 0.0 } else { m.opacity().sqrt() / (omega0 * omega0 * t_p / gamma) };
    let switching_time = if max_rate == 0.0 { f64::INFINITY } else { std::f64::consts::FRAC_PI_2 / max_rate };
    let l_abs = c * gamma / g2;
    let switching = (l_abs / c) * (v0 / c) / switching_time;
    AdiabaticityReport {
        spreading: Margin::new("spreading", spreading),
        rotation: Margin::new("rotation", gamma * rotation),
        absorption: Margin::new("absorption", absorption),
        switching: Margin::new("switching", switching),
    }
}

/// Ratio of the pulse spectral width to the transparency width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthCheck {
    pub pulse_width: f64,
    pub transparency_width: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Compare the FWHM of the pulse's power spectrum with the transparency
/// width `Ω²/(γ√(ηkL))`; pass iff the ratio is below 0.1.
pub fn initial_bandwidth_check(
    samples: &[C64],
    spacing: f64,
    omega_c0: f64,
    m: &MediumParams,
) -> Result<BandwidthCheck> {
    let spec = spectrum_padded(samples, spacing, 4 * samples.len())?;
    let tr = transparency_width(omega_c0, m)?;
    let ratio = spec.fwhm / tr;
    Ok(BandwidthCheck { pulse_width: spec.fwhm, transparency_width: tr, ratio, pass: ratio < 1.0 / SAFETY_FACTOR })
}

/// [`initial_bandwidth_check`] for the scenario's pulse as seen by a fixed
/// observer at the pulse entry point.
pub fn scenario_bandwidth_check(scenario: &Scenario) -> Result<BandwidthCheck> {
    let z0 = pulse_center(scenario);
    let v0 = scenario.group_velocity(z0, 0.0);
    let omega0 = scenario.rabi(z0, 0.0);
    let (duration, center) = match scenario.source {
        Source::Envelope { width, .. } => (width / v0.max(f64::MIN_POSITIVE), 0.0),
        Source::Injection { duration, t_center, .. } => (duration, t_center),
    };
    let n = 1024;
    let span = 16.0 * duration;
    let dt = span / n as f64;
    let samples: Vec<C64> = (0..n)
        .map(|k| {
            let t = center - 0.5 * span + k as f64 * dt;
            C64::new((-((t - center) / duration).powi(2)).exp(), 0.0)
        })
        .collect();
    initial_bandwidth_check(&samples, dt, omega0, &scenario.medium)
}
