// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference scenarios.
//!
//! All presets use γ = 1, c = 1, opacity α = 20 and ηkc/γ = 10 (so
//! g²N = 10) unless stated otherwise.

use crate::medium::MediumParams;
use crate::schedule::{ControlSchedule, Profile, Quantity};
use crate::solver::{Grid, Scenario, Source};
use crate::Result;

pub const OPACITY: f64 = 20.0;
pub const ETA_KC_OVER_GAMMA: f64 = 10.0;

pub fn reference_medium() -> MediumParams {
    MediumParams::from_opacity(OPACITY, ETA_KC_OVER_GAMMA, 1.0, 1.0).expect("reference medium is valid")
}

/// Stop-and-retrieve cycle:
/// `cot θ(t) = 100(1 − ½tanh[rate(t − 15)] + ½tanh[rate(t − 125)])` acting on
/// the envelope `exp(−(z/10)²)`. The reference rate is 0.1.
pub fn stop_and_retrieve_with(medium: MediumParams, rate: f64, nz: usize) -> Result<Scenario> {
    let grid = Grid::unit_courant(-60.0, 140.0, nz, 150.0, medium.c())?;
    let control = ControlSchedule::stop_and_go(100.0, rate, 15.0, 125.0)?;
    let mut s = Scenario::new(medium, grid, control, Source::Envelope { center: 0.0, width: 10.0, amplitude: 1.0 });
    s.snapshots = vec![0.0, 15.0, 30.0, 45.0, 60.0, 90.0, 105.0, 120.0, 135.0, 150.0];
    Ok(s)
}

pub fn stop_and_retrieve(nz: usize) -> Result<Scenario> {
    stop_and_retrieve_with(reference_medium(), 0.1, nz)
}

/// Switch of cot θ from `level` to 0 at t = 50 and back at t = 90. With
/// `rate = ∞` both edges are discontinuous.
pub fn switch(level: f64, rate: f64, nz: usize) -> Result<Scenario> {
    let medium = reference_medium();
    let grid = Grid::unit_courant(-40.0, 160.0, nz, 150.0, medium.c())?;
    let control = ControlSchedule::time(
        Quantity::CotTheta,
        Profile::TanhPulsePair { level, rate, off: 50.0, on: 90.0, depth: 1.0 },
    )?;
    let mut s = Scenario::new(medium, grid, control, Source::Envelope { center: 0.0, width: 10.0, amplitude: 1.0 });
    s.snapshots = vec![0.0, 50.0, 70.0, 90.0, 150.0];
    Ok(s)
}

/// cos θ = 1 (realized as cot θ = 100) switched off and on abruptly.
pub fn sudden_switch_total(nz: usize) -> Result<Scenario> {
    switch(100.0, f64::INFINITY, nz)
}

/// cos²θ = 0.1 (cot θ = 1/3) switched off and on abruptly.
pub fn sudden_switch_partial(nz: usize) -> Result<Scenario> {
    switch(1.0 / 3.0, f64::INFINITY, nz)
}

/// Adiabatic counterpart of [`sudden_switch_partial`].
pub fn smooth_switch_partial(nz: usize) -> Result<Scenario> {
    switch(1.0 / 3.0, 0.2, nz)
}

/// Entry group velocity of the road-block scenario.
pub const ROADBLOCK_V0: f64 = 0.5;
/// Group velocity at the bottom of the block.
pub const ROADBLOCK_VMIN: f64 = 0.005;
/// Temporal 1/e half-width of the road-block pulse.
pub const ROADBLOCK_DURATION: f64 = 5.0;
/// Position beyond which light counts as transmitted.
pub const ROADBLOCK_EXIT: f64 = 18.0;

/// `v_gr(z)` of the road block: flat at [`ROADBLOCK_V0`], a linear descent
/// with slope 1/3 and rounded corners to [`ROADBLOCK_VMIN`], a plateau, then
/// a log-cosine climb back to the entry value that ends at
/// [`ROADBLOCK_EXIT`].
pub fn roadblock_profile() -> Profile {
    let (v0, vmin, slope, corner) = (ROADBLOCK_V0, ROADBLOCK_VMIN, 1.0 / 3.0, 2.0);
    let floor = (v0 - vmin) / slope + 2.0 * corner + 0.5;
    let climb_start = floor + 2.0;
    let climb = ROADBLOCK_EXIT - climb_start;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let n = 400;
    for k in 0..=n {
        let z = -5.0 * corner + (floor + 5.0 * corner) * k as f64 / n as f64;
        let u = v0 - vmin - slope * (z + (z * z + corner * corner).sqrt()) / 2.0;
        x.push(z);
        y.push(vmin + (u + (u * u + 1e-4).sqrt()) / 2.0);
    }
    for k in 1..=100 {
        let f = 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / 100.0).cos());
        x.push(climb_start + climb * k as f64 / 100.0);
        y.push((vmin.ln() + f * (v0 / vmin).ln()).exp());
    }
    Profile::Tabulated { x, y }
}

/// A pulse running into a region of slow light deep enough that its
/// spectrum no longer fits the local transparency window. A probe at
/// [`ROADBLOCK_EXIT`] records what gets through.
pub fn roadblock(nz: usize) -> Result<Scenario> {
    let medium = reference_medium();
    let grid = Grid::unit_courant(-25.0, 35.0, nz, 200.0, medium.c())?;
    let control = ControlSchedule::space(Quantity::GroupVelocity, roadblock_profile())?;
    let width = ROADBLOCK_V0 * ROADBLOCK_DURATION;
    let mut s = Scenario::new(medium, grid, control, Source::Envelope { center: -10.25, width, amplitude: 1.0 });
    s.snapshots = (0..=240).map(|k| 0.25 * k as f64).chain([200.0]).collect();
    s.probes = vec![ROADBLOCK_EXIT];
    Ok(s)
}

/// Deceleration from v_gr = 0.5 to 0.25 around t = 125 with probes just
/// before and just after the change, so that EIT filtering between them
/// stays small.
pub fn narrowing(nz: usize) -> Result<Scenario> {
    let medium = reference_medium();
    let grid = Grid::unit_courant(-40.0, 140.0, nz, 320.0, medium.c())?;
    let control = ControlSchedule::time(
        Quantity::GroupVelocity,
        Profile::TanhRamp { from: 0.5, to: 0.25, center: 125.0, width: 10.0 },
    )?;
    let mut s = Scenario::new(medium, grid, control, Source::Envelope { center: 0.0, width: 10.0, amplitude: 1.0 });
    s.probes = vec![40.0, 85.0];
    Ok(s)
}

/// Constant Ω with v_gr = c/2 and a long pulse.
pub fn slow_constant(nz: usize) -> Result<Scenario> {
    let medium = reference_medium();
    let grid = Grid::unit_courant(-40.0, 60.0, nz, 40.0, medium.c())?;
    let control = ControlSchedule::time(Quantity::GroupVelocity, Profile::Constant { value: 0.5 })?;
    let mut s = Scenario::new(medium, grid, control, Source::Envelope { center: 0.0, width: 8.0, amplitude: 1.0 });
    s.snapshots = vec![40.0];
    Ok(s)
}
