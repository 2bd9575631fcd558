// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Light storage in Λ-type EIT media via dark-state polaritons.
//!
//! The crate is organised by physical subsystem:
//!
//! * [`medium`]: closed-form EIT optics (susceptibility, group velocity,
//!   transparency window, transmission, delay-bandwidth bound).
//! * [`schedule`]: control-field curves Ω(t), θ(t) or v_gr(z).
//! * [`solver`]: the weak-probe 1-D Maxwell-Bloch integrator and the
//!   closed-form reference profiles.
//! * [`spectrum`]: power spectra and width estimators.
//! * [`polariton`]: dark/bright polariton transform, adiabatic transport,
//!   first-order non-adiabatic corrections and adiabaticity audits.
//! * [`cavity`]: single-atom cavity STIRAP.
//! * [`collective`]: exact small-N collective memory and decoherence.
//! * [`presets`]: the reference scenarios used by the CLI goldens and the
//!   acceptance suite.
//!
//! Units: everything is expressed in simulation units with `c = 1` and
//! `γ = 1` unless a scenario says otherwise. Rates are angular frequencies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod collective;
mod error;
pub mod export;
pub mod medium;
pub mod ode;
pub mod polariton;
pub mod presets;
pub mod quad;
pub mod schedule;
pub mod solver;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
