// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form EIT optics for a homogeneously broadened Λ medium.
//!
//! Conventions: the probe susceptibility is dimensionless,
//!
//! ```text
//! χ(δ) = η γ δ / (Ω² − δ² − iγδ)
//! ```
//!
//! and intensity transmission through the medium follows Beer-Lambert,
//! `T(δ) = exp(−k L Im χ(δ))`, so that with the control field off the
//! line-center transmission is `exp(−ηkL) = exp(−α)`.
//!
//! Default simulation units are `c = 1`, `γ = 1`. To map to SI pick a time
//! unit `τ₀ = 1/γ_SI`; lengths are then in units of `c·τ₀` and every rate
//! in units of `γ_SI`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Static constants of the EIT medium.
///
/// `gN2 = η k c γ` is derived at construction and never stored inconsistently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MediumSpec", into = "MediumSpec")]
pub struct MediumParams {
    eta: f64,
    gamma: f64,
    k: f64,
    length: f64,
    c: f64,
    gn2: f64,
}

/// Serialized form of [`MediumParams`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSpec {
    pub eta: f64,
    pub gamma: f64,
    pub k: f64,
    pub length: f64,
    #[serde(default = "unit_c")]
    pub c: f64,
}

fn unit_c() -> f64 {
    1.0
}

impl TryFrom<MediumSpec> for MediumParams {
    type Error = Error;

    fn try_from(s: MediumSpec) -> Result<Self> {
        MediumParams::new(s.eta, s.gamma, s.k, s.length, s.c)
    }
}

impl From<MediumParams> for MediumSpec {
    fn from(m: MediumParams) -> Self {
        MediumSpec { eta: m.eta, gamma: m.gamma, k: m.k, length: m.length, c: m.c }
    }
}

impl MediumParams {
    pub fn new(eta: f64, gamma: f64, k: f64, length: f64, c: f64) -> Result<Self> {
        for (name, v) in [("eta", eta), ("gamma", gamma), ("k", k), ("length", length), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { eta, gamma, k, length, c, gn2: eta * k * c * gamma })
    }

    /// Medium described by its opacity `α = ηkL` and the ratio `ηkc/γ`,
    /// with `η = 1`.
    pub fn from_opacity(opacity: f64, eta_k_c_over_gamma: f64, gamma: f64, c: f64) -> Result<Self> {
        let k = eta_k_c_over_gamma * gamma / c;
        if !(opacity > 0.0 && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "opacity and ηkc/γ must be > 0, got {opacity}, {eta_k_c_over_gamma}"
            )));
        }
        Self::new(1.0, gamma, k, opacity / k, c)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    /// Collective coupling `g²N = ηkcγ`.
    pub fn gn2(&self) -> f64 {
        self.gn2
    }
    /// Collective vacuum Rabi frequency `g√N`.
    pub fn g_sqrt_n(&self) -> f64 {
        self.gn2.sqrt()
    }
    /// Opacity `α = ηkL`.
    pub fn opacity(&self) -> f64 {
        self.eta * self.k * self.length
    }
    /// Absorption length without EIT, `l_abs = cγ/g²N`.
    pub fn absorption_length(&self) -> f64 {
        self.c * self.gamma / self.gn2
    }
}

fn check_rabi(omega_c: f64) -> Result<()> {
    if omega_c.is_finite() && omega_c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("control Rabi frequency must be > 0, got {omega_c}")))
    }
}

/// Probe susceptibility `χ = ηγδ / (Ω² − δ² − iγδ)`.
pub fn susceptibility(delta: f64, omega_c: f64, m: &MediumParams) -> Result<C64> {
    check_rabi(omega_c)?;
    let g = m.gamma;
    let denom = C64::new(omega_c * omega_c - delta * delta, -g * delta);
    let scale = (omega_c * omega_c).max(delta * delta).max(g * delta.abs());
    if denom.norm() <= 16.0 * f64::EPSILON * scale {
        return Err(Error::Singularity { delta, magnitude: denom.norm() });
    }
    Ok(C64::new(m.eta * g * delta, 0.0) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupQuantities {
    /// Group index `n_g = ηkcγ/Ω²`.
    pub n_g: f64,
    /// `v_gr = c/(1 + n_g)`.
    pub v_gr: f64,
    /// `cos²θ` with `tan²θ = g²N/Ω²`.
    pub cos2_theta: f64,
}

pub fn group_quantities(omega_c: f64, m: &MediumParams) -> Result<GroupQuantities> {
    check_rabi(omega_c)?;
    let o2 = omega_c * omega_c;
    let n_g = m.gn2 / o2;
    Ok(GroupQuantities { n_g, v_gr: m.c / (1.0 + n_g), cos2_theta: o2 / (o2 + m.gn2) })
}

/// Group velocity through the mixing angle, `v_gr = c cos²θ`.
pub fn group_velocity_from_mixing_angle(omega_c: f64, m: &MediumParams) -> Result<f64> {
    check_rabi(omega_c)?;
    let tan2 = m.gn2 / (omega_c * omega_c);
    Ok(m.c / (1.0 + tan2))
}

/// EIT transparency window `Δω_tr = (Ω²/γ) / √(ηkL)`.
pub fn transparency_width(omega_c: f64, m: &MediumParams) -> Result<f64> {
    check_rabi(omega_c)?;
    Ok(omega_c * omega_c / m.gamma / m.opacity().sqrt())
}

/// The same window written through the group velocity, `(v_gr/L)√(ηkL)`.
///
/// Agrees with [`transparency_width`] only when `n_g ≫ 1`.
pub fn transparency_width_from_group_velocity(omega_c: f64, m: &MediumParams) -> Result<f64> {
    let gq = group_quantities(omega_c, m)?;
    Ok(gq.v_gr / m.length * m.opacity().sqrt())
}

/// Intensity transmission `T(δ) = exp(−kL·Im χ(δ))` on a sorted detuning grid.
pub fn transmission_spectrum(deltas: &[f64], omega_c: f64, m: &MediumParams) -> Result<Vec<f64>> {
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter("detuning grid contains non-finite values".into()));
    }
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("detuning grid must be sorted".into()));
    }
    let kl = m.k * m.length;
    deltas.iter().map(|&d| susceptibility(d, omega_c, m).map(|chi| (-kl * chi.im).exp())).collect()
}

/// Full width at half maximum of the transparency peak centred on `δ = 0`.
///
/// Walks outward from the grid point nearest zero until `T` drops below half
/// of its central value, interpolating linearly between samples. Returns
/// `None` if the half level is not crossed on both sides.
pub fn transparency_fwhm(deltas: &[f64], transmission: &[f64]) -> Option<f64> {
    let center = deltas.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?.0;
    let half = 0.5 * transmission[center];
    let crossing = |idx: usize, next: usize| {
        let (x0, x1) = (deltas[idx], deltas[next]);
        let (y0, y1) = (transmission[idx], transmission[next]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let right = (center..deltas.len() - 1).find(|&i| transmission[i + 1] < half).map(|i| crossing(i, i + 1))?;
    let left = (1..=center).rev().find(|&i| transmission[i - 1] < half).map(|i| crossing(i, i - 1))?;
    Some(right - left)
}

/// Upper bound on delay-to-pulse-length ratio, `τ_d/τ_p ≤ √(ηkL)`.
///
/// Atomic vapours reach at most `α ≈ 10⁴`, i.e. a bound of order 100.
pub fn delay_ratio_bound(m: &MediumParams) -> f64 {
    m.opacity().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_medium() -> MediumParams {
        MediumParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn construction_rejects_nonpositive() {
        assert!(MediumParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(MediumParams::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(MediumParams::new(1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn collective_coupling_consistency() {
        let m = MediumParams::new(0.3, 2.0, 7.0, 5.0, 1.5).unwrap();
        let expect = 0.3 * 7.0 * 1.5 * 2.0;
        assert!((m.gn2() - expect).abs() <= 1e-12 * expect);
        assert!((m.opacity() - 0.3 * 7.0 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn serde_rejects_unknown_and_derives_gn2() {
        let m: MediumParams = serde_json::from_str(r#"{"eta":1,"gamma":1,"k":10,"length":2}"#).unwrap();
        assert_eq!(m.gn2(), 10.0);
        assert!(serde_json::from_str::<MediumParams>(r#"{"eta":1,"gamma":1,"k":10,"length":2,"gN2":3}"#).is_err());
        assert!(serde_json::from_str::<MediumParams>(r#"{"eta":-1,"gamma":1,"k":10,"length":2}"#).is_err());
    }

    #[test]
    fn susceptibility_zero_at_two_photon_resonance() {
        let chi = susceptibility(0.0, 3.0, &unit_medium()).unwrap();
        assert_eq!(chi, C64::new(0.0, 0.0));
    }

    #[test]
    fn susceptibility_hand_value() {
        // 1/(4 − 1 − i) = 1/(3 − i) = (3 + i)/10
        let chi = susceptibility(1.0, 2.0, &unit_medium()).unwrap();
        assert!((chi - C64::new(0.3, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn susceptibility_small_detuning_expansion() {
        let m = unit_medium();
        let (delta, omega) = (0.1, 10.0);
        let chi = susceptibility(delta, omega, &m).unwrap();
        let re_approx = m.eta() * m.gamma() * delta / (omega * omega);
        let im_approx = m.eta() * (m.gamma() * delta / (omega * omega)).powi(2);
        assert!((re_approx - 1e-3).abs() < 1e-15);
        assert!((im_approx - 1e-6).abs() < 1e-18);
        assert!((chi.re - re_approx).abs() < 0.01 * re_approx);
        assert!((chi.im - im_approx).abs() < 0.01 * im_approx);
    }

    #[test]
    fn susceptibility_rejects_bad_control_and_pole() {
        let m = unit_medium();
        assert!(matches!(susceptibility(1.0, 0.0, &m), Err(Error::InvalidParameter(_))));
        let lossless = MediumParams { gamma: 1e-300, ..m };
        assert!(matches!(susceptibility(2.0, 2.0, &lossless), Err(Error::Singularity { .. })));
    }

    #[test]
    fn free_space_limit() {
        let gq = group_quantities(1e9, &unit_medium()).unwrap();
        assert!((gq.v_gr - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_mixing_angle_halves_velocity() {
        let m = MediumParams::from_opacity(20.0, 10.0, 1.0, 1.0).unwrap();
        let gq = group_quantities(m.gn2().sqrt(), &m).unwrap();
        assert!((gq.cos2_theta - 0.5).abs() < 1e-15);
        assert!((gq.v_gr - 0.5).abs() < 1e-15);
        // ηkc/γ = 10, Ω² = 10
        let gq = group_quantities(10f64.sqrt(), &m).unwrap();
        assert!((gq.n_g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transparency_width_values() {
        // Ω²/γ = 1, α = 100
        let m = MediumParams::new(1.0, 1.0, 100.0, 1.0, 1.0).unwrap();
        let w = transparency_width(1.0, &m).unwrap();
        assert!((w - 0.1).abs() < 1e-15);
        let w2 = transparency_width(2.0, &m).unwrap();
        assert!((w2 / w - 4.0).abs() < 1e-12);
    }

    #[test]
    fn transparency_width_forms_agree_deep_in_slow_light() {
        let m = MediumParams::from_opacity(20.0, 1e12, 1.0, 1.0).unwrap();
        let a = transparency_width(1.0, &m).unwrap();
        let b = transparency_width_from_group_velocity(1.0, &m).unwrap();
        assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
    }

    #[test]
    fn transmission_is_unity_on_resonance_and_rejects_unsorted() {
        let m = MediumParams::from_opacity(20.0, 10.0, 1.0, 1.0).unwrap();
        let t = transmission_spectrum(&[-1.0, 0.0, 1.0], 0.5, &m).unwrap();
        assert_eq!(t[1], 1.0);
        assert!(transmission_spectrum(&[1.0, 0.0], 0.5, &m).is_err());
    }

    #[test]
    fn weak_control_recovers_two_level_absorption() {
        let m = MediumParams::from_opacity(20.0, 10.0, 1.0, 1.0).unwrap();
        let omega = 1e-4;
        let deltas = [0.05, 0.2, 0.5];
        let t = transmission_spectrum(&deltas, omega, &m).unwrap();
        for (d, t) in deltas.iter().zip(t) {
            // bare Lorentzian: kL·Im χ = α γ² / (δ² + γ²)
            let bare = (-m.opacity() / (d * d + 1.0)).exp();
            assert!((t - bare).abs() < 1e-6 * bare.max(1e-300) + 1e-12, "δ={d}: {t} vs {bare}");
            assert!(t < 1e-3);
        }
    }

    #[test]
    fn delay_bound_values() {
        let m = MediumParams::new(1.0, 1.0, 1e4, 1.0, 1.0).unwrap();
        assert!((delay_ratio_bound(&m) - 100.0).abs() < 1e-12);
        let m = MediumParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(delay_ratio_bound(&m), 1.0);
        let m = MediumParams::from_opacity(20.0, 10.0, 1.0, 1.0).unwrap();
        assert!((delay_ratio_bound(&m) - 4.472135955).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn chi_odd_conjugate_symmetry(d in -5.0f64..5.0, om in 0.1f64..5.0, eta in 0.1f64..3.0) {
                let m = MediumParams::new(eta, 1.0, 2.0, 1.0, 1.0).unwrap();
                let a = susceptibility(d, om, &m).unwrap();
                let b = susceptibility(-d, om, &m).unwrap();
                prop_assert!((b + a.conj()).norm() <= 1e-14 * (1.0 + a.norm()));
            }

            #[test]
            fn chi_is_passive(om in 0.05f64..5.0, i in 0usize..2001) {
                let m = unit_medium();
                let d = -5.0 + 10.0 * i as f64 / 2000.0;
                prop_assert!(susceptibility(d, om, &m).unwrap().im >= 0.0);
            }

            #[test]
            fn group_velocity_forms_agree(om in 1e-3f64..1e3, eta in 1e-2f64..1e2, k in 1e-2f64..1e3) {
                let m = MediumParams::new(eta, 1.0, k, 1.0, 1.0).unwrap();
                let a = group_quantities(om, &m).unwrap().v_gr;
                let b = group_velocity_from_mixing_angle(om, &m).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a);
            }
        }
    }
}
