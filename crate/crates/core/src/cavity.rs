// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-atom cavity Raman transfer.
//!
//! The atom-cavity Hamiltonian splits into 3×3 blocks. Block `n` acts on
//! the ordered basis `(|a,n⟩, |b,n+1⟩, |c,n⟩)`:
//!
//! ```text
//! H_n = [[−iγ, g√n, Ω], [g√n, 0, 0], [Ω, 0, 0]]
//! ```
//!
//! The imaginary entry models spontaneous emission out of |a⟩. Cavity loss
//! κ does not enter the dynamics; it only appears in the strong-coupling
//! margin `g²/(κγ)`.

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ode::{mat3_apply, Mat3};
use crate::schedule::{ControlSchedule, Quantity};
use crate::{Error, Result};

/// Largest accepted norm increase over one step.
pub const NORM_GROWTH_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    pub g: f64,
    pub gamma: f64,
    #[serde(default)]
    pub kappa: f64,
    /// Control field as Ω(t) (`rabi`) or cot θ_n(t) (`cot-theta`).
    pub schedule: ControlSchedule,
    /// Photon-sector index.
    pub n: u32,
}

impl CavityParams {
    pub fn new(g: f64, gamma: f64, kappa: f64, schedule: ControlSchedule, n: u32) -> Result<Self> {
        let p = Self { g, gamma, kappa, schedule, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.g, self.gamma, self.kappa].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter("cavity rates must be finite and ≥ 0".into()));
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter("photon sector index must be ≥ 1".into()));
        }
        match self.schedule.quantity {
            Quantity::Rabi | Quantity::CotTheta => self.schedule.validate(),
            q => Err(Error::InvalidParameter(format!("cavity control must be rabi or cot-theta, got {q:?}"))),
        }
    }

    /// Single-photon-sector coupling `g√n`.
    pub fn coupling(&self) -> f64 {
        self.g * (self.n as f64).sqrt()
    }

    /// Ω(t).
    pub fn omega(&self, t: f64) -> f64 {
        let v = self.schedule.value(t).max(0.0);
        match self.schedule.quantity {
            Quantity::CotTheta => v * self.coupling(),
            _ => v,
        }
    }
}

/// Amplitudes on `(|a,n⟩, |b,n+1⟩, |c,n⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripletAmplitudes {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl TripletAmplitudes {
    pub fn new(a: C64, b: C64, c: C64) -> Self {
        Self { a, b, c }
    }

    /// |b, n+1⟩.
    pub fn ground() -> Self {
        Self::new(C64::default(), C64::new(1.0, 0.0), C64::default())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr()
    }

    fn to_array(self) -> [C64; 3] {
        [self.a, self.b, self.c]
    }

    fn from_array(v: [C64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// `H_n` at time `t`.
pub fn block_hamiltonian(p: &CavityParams, t: f64) -> Matrix3<C64> {
    let (gn, om) = (C64::new(p.coupling(), 0.0), C64::new(p.omega(t), 0.0));
    let z = C64::default();
    Matrix3::new(C64::new(0.0, -p.gamma), gn, om, gn, z, z, om, z, z)
}

/// Eigenvalues of `H_n`: `0` and `(−iγ ± √(4(Ω² + g²n) − γ²))/2`, the roots
/// of `λ³ + iγλ² − (Ω² + g²n)λ`.
pub fn block_eigenvalues(p: &CavityParams, t: f64) -> [C64; 3] {
    let w2 = p.omega(t).powi(2) + p.coupling().powi(2);
    let disc = C64::new(4.0 * w2 - p.gamma * p.gamma, 0.0).sqrt();
    let half_loss = C64::new(0.0, -0.5 * p.gamma);
    [C64::default(), half_loss + 0.5 * disc, half_loss - 0.5 * disc]
}

/// Residual of the characteristic polynomial at `lambda`.
pub fn characteristic_residual(p: &CavityParams, t: f64, lambda: C64) -> C64 {
    let w2 = p.omega(t).powi(2) + p.coupling().powi(2);
    lambda.powi(3) + C64::new(0.0, p.gamma) * lambda * lambda - lambda * w2
}

/// Mixing angle `θ_n` with `tan θ_n = g√n/Ω`.
pub fn mixing_angle(p: &CavityParams, t: f64) -> Result<f64> {
    let (gn, om) = (p.coupling(), p.omega(t));
    if gn == 0.0 && om == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok(gn.atan2(om))
}

/// Dark state `cos θ_n|b,n+1⟩ − sin θ_n|c,n⟩`.
pub fn dark_state(p: &CavityParams, t: f64) -> Result<TripletAmplitudes> {
    let (s, c) = mixing_angle(p, t)?.sin_cos();
    Ok(TripletAmplitudes::new(C64::default(), C64::new(c, 0.0), C64::new(-s, 0.0)))
}

fn generator(p: &CavityParams, t: f64) -> Mat3 {
    let h = block_hamiltonian(p, t);
    let mut m = [[C64::default(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = -C64::i() * h[(i, j)];
        }
    }
    m
}

/// Integrate `dψ/dt = −iH_n(t)ψ` with RK4, returning ψ at every point of
/// `t_grid`. Each interval is split so that `h·max|λ| ≤ 0.1`.
pub fn evolve(p: &CavityParams, psi0: TripletAmplitudes, t_grid: &[f64]) -> Result<Vec<TripletAmplitudes>> {
    p.validate()?;
    let n0 = psi0.norm_sqr();
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("initial state must be normalized, |ψ|² = {n0}")));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    let Some(&t0) = t_grid.first() else { return Ok(out) };
    let mut y = psi0.to_array();
    out.push(psi0);
    let mut t = t0;
    for &t1 in &t_grid[1..] {
        let span = t1 - t;
        let rate = p.gamma + p.coupling() + [t, 0.5 * (t + t1), t1].iter().map(|&x| p.omega(x)).fold(0.0, f64::max);
        let sub = ((span.abs() * rate / 0.1).ceil() as usize).max(1);
        let h = span / sub as f64;
        for k in 0..sub {
            let ts = t + k as f64 * h;
            let before: f64 = y.iter().map(|x| x.norm_sqr()).sum();
            y = rk4(p, ts, y, h);
            let after: f64 = y.iter().map(|x| x.norm_sqr()).sum();
            if after - before > NORM_GROWTH_LIMIT * before.max(1e-300) {
                return Err(Error::StepTooLarge { growth: after - before });
            }
        }
        t = t1;
        out.push(TripletAmplitudes::from_array(y));
    }
    Ok(out)
}

fn rk4(p: &CavityParams, t: f64, y: [C64; 3], h: f64) -> [C64; 3] {
    let f = |t: f64, y: [C64; 3]| mat3_apply(&generator(p, t), y);
    let add = |y: [C64; 3], k: [C64; 3], a: f64| [y[0] + k[0] * a, y[1] + k[1] * a, y[2] + k[2] * a];
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(t + h, add(y, k3, h));
    let mut out = y;
    for i in 0..3 {
        out[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
    }
    out
}

/// Strong-coupling figure of merit `g²/(κγ)`.
pub fn strong_coupling_margin(p: &CavityParams) -> Result<f64> {
    if !(p.kappa > 0.0 && p.gamma > 0.0) {
        return Err(Error::InvalidParameter("strong-coupling margin needs κ > 0 and γ > 0".into()));
    }
    Ok(p.g * p.g / (p.kappa * p.gamma))
}

/// Lifetime `1/(nκ)` of the Fock state |n⟩.
pub fn fock_lifetime(n: u32, kappa: f64) -> f64 {
    1.0 / (n as f64 * kappa)
}

/// Adiabaticity product `g²n·T/γ` for a transfer lasting one Fock lifetime;
/// equals `g²/(κγ)` for every `n`.
pub fn fock_limited_adiabaticity(g: f64, n: u32, kappa: f64, gamma: f64) -> f64 {
    g * g * n as f64 * fock_lifetime(n, kappa) / gamma
}

/// Outcome of a Raman transfer `|b,n+1⟩ → |c,n⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferResult {
    pub ramp_time: f64,
    /// Final |c,n⟩ population.
    pub transfer: f64,
    /// Final total norm.
    pub norm: f64,
}

/// Turn the control off as `Ω(t) = Ω₀(1 − tanh((t − 4T)/T))/2` over
/// `[0, 8T]`, starting in `|b,n+1⟩`.
pub fn stirap_transfer(g: f64, n: u32, gamma: f64, omega0: f64, ramp_time: f64) -> Result<TransferResult> {
    use crate::schedule::Profile;
    let schedule = ControlSchedule::time(
        Quantity::Rabi,
        Profile::TanhRamp { from: omega0, to: 0.0, center: 4.0 * ramp_time, width: ramp_time },
    )?;
    let p = CavityParams::new(g, gamma, 0.0, schedule, n)?;
    let t_end = 8.0 * ramp_time;
    let grid: Vec<f64> = (0..=400).map(|k| t_end * k as f64 / 400.0).collect();
    let traj = evolve(&p, TripletAmplitudes::ground(), &grid)?;
    let last = traj.last().expect("non-empty grid");
    Ok(TransferResult { ramp_time, transfer: last.c.norm_sqr(), norm: last.norm_sqr() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::Profile;
    use proptest::prelude::*;

    fn params(g: f64, gamma: f64, omega: f64, n: u32) -> CavityParams {
        let s = ControlSchedule::time(Quantity::Rabi, Profile::Constant { value: omega }).unwrap();
        CavityParams::new(g, gamma, 1.0, s, n).unwrap()
    }

    fn sorted_re(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn lossless_eigenvalues() {
        let ev = block_eigenvalues(&params(1.0, 0.0, 1.0, 1), 0.0);
        let re = sorted_re(ev.iter().map(|x| x.re).collect());
        let r2 = 2f64.sqrt();
        for (a, b) in re.iter().zip([-r2, 0.0, r2]) {
            assert!((a - b).abs() < 1e-12);
        }
        let ev = block_eigenvalues(&params(1.5, 0.0, 0.0, 4), 0.0);
        let re = sorted_re(ev.iter().map(|x| x.re).collect());
        for (a, b) in re.iter().zip([-3.0, 0.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lossy_eigenvalues_solve_characteristic_polynomial() {
        let p = params(1.0, 1.0, 1.0, 1);
        let h = block_hamiltonian(&p, 0.0);
        for lam in block_eigenvalues(&p, 0.0) {
            assert!(characteristic_residual(&p, 0.0, lam).norm() < 1e-12);
            // det(H − λ) = 0
            let det = (h - Matrix3::identity() * lam).determinant();
            assert!(det.norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn lossless_spectrum(g in 0.01f64..5.0, n in 1u32..20, om in 0.0f64..5.0) {
            let p = params(g, 0.0, om, n);
            let w = (om * om + g * g * n as f64).sqrt();
            let re = sorted_re(block_eigenvalues(&p, 0.0).iter().map(|x| x.re).collect());
            prop_assert!((re[0] + w).abs() < 1e-12 && re[1].abs() < 1e-12 && (re[2] - w).abs() < 1e-12);
        }

        #[test]
        fn dark_state_is_null_vector(g in 0.01f64..5.0, n in 1u32..20, om in 0.0f64..5.0, gamma in 0.0f64..3.0) {
            let p = params(g, gamma, om, n);
            let d = dark_state(&p, 0.0).unwrap();
            prop_assert_eq!(d.a, C64::default());
            let v = block_hamiltonian(&p, 0.0) * nalgebra::Vector3::new(d.a, d.b, d.c);
            prop_assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn dark_state_examples() {
        let d = dark_state(&params(1.0, 0.0, 2.0, 4), 0.0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.b.re - r).abs() < 1e-15 && (d.c.re + r).abs() < 1e-15);
        let d = dark_state(&params(1.0, 0.0, 1e6, 1), 0.0).unwrap();
        assert!((d.b.re - 1.0).abs() < 1e-11);
        let d = dark_state(&params(1.0, 0.0, 0.0, 1), 0.0).unwrap();
        assert_eq!(d.c.re, -1.0);
        assert!(matches!(dark_state(&params(0.0, 0.0, 0.0, 1), 0.0), Err(Error::UndefinedAngle)));
    }

    #[test]
    fn dark_state_is_stationary() {
        let p = params(1.0, 0.0, 0.7, 2);
        let d = dark_state(&p, 0.0).unwrap();
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.4).collect();
        let traj = evolve(&p, d, &grid).unwrap();
        let last = traj.last().unwrap();
        assert!((last.b - d.b).norm() < 1e-10 && (last.c - d.c).norm() < 1e-10 && last.a.norm() < 1e-10);
    }

    #[test]
    fn norm_never_grows_with_loss() {
        let p = params(1.0, 0.5, 1.3, 1);
        let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
        let traj = evolve(&p, TripletAmplitudes::ground(), &grid).unwrap();
        assert!(traj.windows(2).all(|w| w[1].norm_sqr() <= w[0].norm_sqr() + 1e-12));
    }

    #[test]
    fn transfer_requires_slow_ramp() {
        let slow = stirap_transfer(1.0, 1, 1.0, 20.0, 100.0).unwrap();
        assert!(slow.transfer > 0.95, "{slow:?}");
        let fast = stirap_transfer(1.0, 1, 1.0, 20.0, 1.0).unwrap();
        assert!(fast.transfer < 0.7, "{fast:?}");
    }

    #[test]
    fn margins() {
        let s = ControlSchedule::time(Quantity::Rabi, Profile::Constant { value: 1.0 }).unwrap();
        let p = CavityParams::new(10.0, 1.0, 1.0, s.clone(), 1).unwrap();
        assert_eq!(strong_coupling_margin(&p).unwrap(), 100.0);
        let p = CavityParams::new(1.0, 1.0, 1.0, s, 1).unwrap();
        assert_eq!(strong_coupling_margin(&p).unwrap(), 1.0);
        for n in 1..10 {
            assert!((fock_limited_adiabaticity(3.0, n, 0.5, 2.0) - 9.0).abs() < 1e-12);
        }
    }
}
