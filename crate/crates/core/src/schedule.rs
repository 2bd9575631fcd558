// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Control-field schedules.
//!
//! A schedule is a scalar curve over time or space, together with the
//! physical quantity it describes. Every quantity is convertible to the
//! control Rabi frequency Ω and the mixing angle θ through
//! `tan²θ = g²N/Ω²`, so `cos²θ = Ω²/(Ω² + g²N)` and `v_gr = c cos²θ`.

use serde::{Deserialize, Serialize};

use crate::medium::MediumParams;
use crate::{Error, Result};

/// Independent variable of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Time,
    Space,
}

/// What the curve's value means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Control Rabi frequency Ω ≥ 0.
    Rabi,
    /// cot θ = Ω/(g√N) ≥ 0.
    CotTheta,
    /// cos θ ∈ [0, 1].
    CosTheta,
    /// Group velocity v_gr ∈ [0, c].
    GroupVelocity,
}

/// Shape of the curve.
///
/// A `rate` or `width` that is infinite (resp. zero) turns the tanh edges
/// into exact steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `from + (to − from)·(1 + tanh((x − center)/width))/2`
    TanhRamp {
        from: f64,
        to: f64,
        center: f64,
        width: f64,
    },
    /// `level·(1 − ½·depth·tanh(rate(x − off)) + ½·depth·tanh(rate(x − on)))`
    ///
    /// With `depth = 1` the curve dips from `level` to zero around `off`
    /// and recovers around `on`.
    TanhPulsePair {
        level: f64,
        rate: f64,
        off: f64,
        on: f64,
        #[serde(default = "unit_depth")]
        depth: f64,
    },
    /// Monotone piecewise-cubic (Fritsch-Carlson) interpolation, clamped
    /// outside the table.
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
    },
}

fn unit_depth() -> f64 {
    1.0
}

fn edge(rate: f64, x: f64) -> f64 {
    if rate.is_infinite() {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    } else {
        (rate * x).tanh()
    }
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::TanhRamp { from, to, center, width } => {
                let rate = if *width == 0.0 { f64::INFINITY } else { 1.0 / width };
                from + (to - from) * 0.5 * (1.0 + edge(rate, x - center))
            }
            Profile::TanhPulsePair { level, rate, off, on, depth } => {
                level * (1.0 - 0.5 * depth * edge(*rate, x - off) + 0.5 * depth * edge(*rate, x - on))
            }
            Profile::Tabulated { x: xs, y: ys } => pchip(xs, ys, x),
        }
    }

    /// True if the curve has a jump (or, for tables, a node) within `[x − h, x + h]`.
    pub fn kink_within(&self, x: f64, h: f64) -> bool {
        match self {
            Profile::Constant { .. } => false,
            Profile::TanhRamp { center, width, .. } => *width == 0.0 && (x - center).abs() <= h,
            Profile::TanhPulsePair { rate, off, on, .. } => {
                rate.is_infinite() && ((x - off).abs() <= h || (x - on).abs() <= h)
            }
            Profile::Tabulated { x: xs, .. } => xs.iter().any(|n| (x - n).abs() < h),
        }
    }

    /// Locations of exact steps.
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Profile::TanhRamp { center, width, .. } if *width == 0.0 => vec![*center],
            Profile::TanhPulsePair { rate, off, on, .. } if rate.is_infinite() => vec![*off, *on],
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Profile::Constant { value } if !value.is_finite() => bad(format!("constant value {value}")),
            Profile::TanhRamp { from, to, center, width } => {
                if ![from, to, center].iter().all(|v| v.is_finite()) || !(width.is_finite() && *width >= 0.0) {
                    return bad("tanh ramp parameters must be finite, width ≥ 0".into());
                }
                Ok(())
            }
            Profile::TanhPulsePair { level, rate, off, on, depth } => {
                if ![level, off, on, depth].iter().all(|v| v.is_finite()) || rate.is_nan() || *rate <= 0.0 {
                    return bad("pulse pair parameters must be finite, rate > 0".into());
                }
                if on < off {
                    return bad(format!("pulse pair requires off ≤ on, got {off} > {on}"));
                }
                Ok(())
            }
            Profile::Tabulated { x, y } => {
                if x.len() != y.len() || x.len() < 2 {
                    return bad("tabulated schedule needs ≥ 2 points and equal-length columns".into());
                }
                if x.iter().chain(y).any(|v| !v.is_finite()) {
                    return bad("tabulated schedule contains non-finite values".into());
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated abscissae must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Fritsch-Carlson monotone cubic Hermite interpolation.
fn pchip(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let secant = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    let slope = |j: usize| -> f64 {
        if j == 0 {
            return secant(0);
        }
        if j == n - 1 {
            return secant(n - 2);
        }
        let (d0, d1) = (secant(j - 1), secant(j));
        if d0 * d1 <= 0.0 {
            return 0.0;
        }
        let (h0, h1) = (xs[j] - xs[j - 1], xs[j + 1] - xs[j]);
        let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
        (w0 + w1) / (w0 / d0 + w1 / d1)
    };
    let h = xs[i + 1] - xs[i];
    let s = (x - xs[i]) / h;
    let (m0, m1) = (slope(i) * h, slope(i + 1) * h);
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * ys[i] + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * ys[i + 1] + (s3 - s2) * m1
}

/// A control curve Ω(t), cot θ(t), cos θ(t) or v_gr(z).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSchedule {
    pub quantity: Quantity,
    pub domain: Domain,
    pub profile: Profile,
}

/// Mixing angle at one point, stored as the (unnormalised) cosine/sine pair
/// `(cos-like, sin-like)` so that limits θ → 0 and θ → π/2 stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixing {
    cos_like: f64,
    sin_like: f64,
}

impl Mixing {
    pub fn theta(self) -> f64 {
        self.sin_like.atan2(self.cos_like)
    }
    pub fn cos2(self) -> f64 {
        let (c, s) = (self.cos_like, self.sin_like);
        c * c / (c * c + s * s)
    }
    pub fn cos_sin(self) -> (f64, f64) {
        let r = self.cos_like.hypot(self.sin_like);
        (self.cos_like / r, self.sin_like / r)
    }
    /// Ω = g√N·cot θ; infinite at θ = 0.
    pub fn rabi(self, g_sqrt_n: f64) -> f64 {
        if self.sin_like == 0.0 {
            f64::INFINITY
        } else {
            g_sqrt_n * self.cos_like / self.sin_like
        }
    }
}

impl ControlSchedule {
    pub fn new(quantity: Quantity, domain: Domain, profile: Profile) -> Result<Self> {
        let s = Self { quantity, domain, profile };
        s.validate()?;
        Ok(s)
    }

    pub fn time(quantity: Quantity, profile: Profile) -> Result<Self> {
        Self::new(quantity, Domain::Time, profile)
    }

    pub fn space(quantity: Quantity, profile: Profile) -> Result<Self> {
        Self::new(quantity, Domain::Space, profile)
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        let values: Vec<f64> = match &self.profile {
            Profile::Constant { value } => vec![*value],
            Profile::TanhRamp { from, to, .. } => vec![*from, *to],
            Profile::TanhPulsePair { level, depth, .. } => {
                vec![*level, level * (1.0 - depth), level * (1.0 + depth)]
            }
            Profile::Tabulated { y, .. } => y.clone(),
        };
        let upper = match self.quantity {
            Quantity::CosTheta => 1.0,
            _ => f64::INFINITY,
        };
        if values.iter().any(|&v| v < 0.0 || v > upper) {
            return Err(Error::InvalidParameter(format!(
                "{:?} schedule leaves its admissible range [0, {upper}]",
                self.quantity
            )));
        }
        Ok(())
    }

    /// Raw curve value.
    pub fn value(&self, x: f64) -> f64 {
        self.profile.eval(x)
    }

    pub fn mixing(&self, x: f64, m: &MediumParams) -> Mixing {
        let v = self.value(x).max(0.0);
        let (cos_like, sin_like) = match self.quantity {
            Quantity::Rabi => (v, m.g_sqrt_n()),
            Quantity::CotTheta => (v, 1.0),
            Quantity::CosTheta => {
                let c = v.min(1.0);
                (c, (1.0 - c * c).sqrt())
            }
            Quantity::GroupVelocity => {
                let r = (v / m.c()).min(1.0);
                (r.sqrt(), (1.0 - r).sqrt())
            }
        };
        Mixing { cos_like, sin_like }
    }

    pub fn theta(&self, x: f64, m: &MediumParams) -> f64 {
        self.mixing(x, m).theta()
    }

    pub fn cos2_theta(&self, x: f64, m: &MediumParams) -> f64 {
        self.mixing(x, m).cos2()
    }

    pub fn rabi(&self, x: f64, m: &MediumParams) -> f64 {
        self.mixing(x, m).rabi(m.g_sqrt_n())
    }

    pub fn group_velocity(&self, x: f64, m: &MediumParams) -> f64 {
        m.c() * self.cos2_theta(x, m)
    }

    /// The schedule of a stop-and-retrieve cycle:
    /// `cot θ(t) = level·(1 − ½tanh[rate(t − off)] + ½tanh[rate(t − on)])`.
    pub fn stop_and_go(level: f64, rate: f64, off: f64, on: f64) -> Result<Self> {
        Self::time(Quantity::CotTheta, Profile::TanhPulsePair { level, rate, off, on, depth: 1.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn medium() -> MediumParams {
        MediumParams::from_opacity(20.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn quantities_agree_on_mixing_angle() {
        let m = medium();
        let omega = 2.5;
        let g = m.g_sqrt_n();
        let cos2 = omega * omega / (omega * omega + m.gn2());
        let schedules = [
            (Quantity::Rabi, omega),
            (Quantity::CotTheta, omega / g),
            (Quantity::CosTheta, cos2.sqrt()),
            (Quantity::GroupVelocity, cos2 * m.c()),
        ];
        for (q, v) in schedules {
            let s = ControlSchedule::time(q, Profile::Constant { value: v }).unwrap();
            assert!((s.cos2_theta(0.0, &m) - cos2).abs() < 1e-14, "{q:?}");
            assert!((s.rabi(0.0, &m) - omega).abs() < 1e-12 * omega, "{q:?}");
        }
    }

    #[test]
    fn limits_are_exact() {
        let m = medium();
        let stopped = ControlSchedule::time(Quantity::Rabi, Profile::Constant { value: 0.0 }).unwrap();
        assert_eq!(stopped.theta(0.0, &m), std::f64::consts::FRAC_PI_2);
        assert_eq!(stopped.cos2_theta(0.0, &m), 0.0);
        let photonic = ControlSchedule::time(Quantity::CosTheta, Profile::Constant { value: 1.0 }).unwrap();
        assert_eq!(photonic.theta(0.0, &m), 0.0);
        assert!(photonic.rabi(0.0, &m).is_infinite());
    }

    #[test]
    fn stop_and_go_shape() {
        let s = ControlSchedule::stop_and_go(100.0, 0.1, 15.0, 125.0).unwrap();
        assert!((s.value(-1e3) - 100.0).abs() < 1e-9);
        assert!(s.value(70.0) < 1e-2);
        assert!((s.value(1e3) - 100.0).abs() < 1e-9);
        let sudden = ControlSchedule::stop_and_go(100.0, f64::INFINITY, 50.0, 90.0).unwrap();
        assert_eq!(sudden.value(49.9), 100.0);
        assert_eq!(sudden.value(50.1), 0.0);
        assert_eq!(sudden.value(90.1), 100.0);
        assert_eq!(sudden.profile.jumps(), vec![50.0, 90.0]);
        assert!(sudden.profile.kink_within(50.0, 1e-3));
        assert!(!s.profile.kink_within(50.0, 1e-3));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ControlSchedule::time(Quantity::CosTheta, Profile::Constant { value: 1.5 }).is_err());
        assert!(ControlSchedule::time(Quantity::Rabi, Profile::Constant { value: -1.0 }).is_err());
        let table = Profile::Tabulated { x: vec![0.0, 0.0], y: vec![1.0, 2.0] };
        assert!(ControlSchedule::time(Quantity::Rabi, table).is_err());
    }

    #[test]
    fn tabulated_hits_nodes_and_stays_monotone() {
        let x = vec![0.0, 1.0, 2.0, 4.0, 5.0];
        let y = vec![0.0, 0.1, 2.0, 2.1, 5.0];
        let p = Profile::Tabulated { x: x.clone(), y: y.clone() };
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-14);
        }
        let mut last = f64::NEG_INFINITY;
        for i in 0..=500 {
            let v = p.eval(-0.5 + 6.0 * i as f64 / 500.0);
            assert!(v >= last - 1e-14);
            last = v;
        }
    }

    #[test]
    fn schedule_roundtrips_through_serde() {
        let s = ControlSchedule::stop_and_go(100.0, 0.1, 15.0, 125.0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: ControlSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
