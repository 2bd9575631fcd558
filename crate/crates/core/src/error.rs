// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::solver::FieldState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("susceptibility pole: |Ω² − δ² − iγδ| = {magnitude:e} at δ = {delta}")]
    Singularity { delta: f64, magnitude: f64 },

    #[error("CFL violated: c·dt/dz = {courant} > 1")]
    Cfl { courant: f64 },

    #[error("stiff local step: γ·dt = {value} exceeds 0.1")]
    StiffStep { value: f64 },

    #[error("non-finite field at t = {t}")]
    NonFinite { t: f64, snapshot: Box<FieldState> },

    #[error("array length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("group velocity vanishes at z = {z}; delay diverges")]
    DivergentDelay { z: f64 },

    #[error("schedule is not differentiable near x = {x}")]
    DerivativeUndefined { x: f64 },

    #[error("field mass at window edges is {fraction:e}, above 1e-8")]
    WindowMass { fraction: f64 },

    #[error("mixing angle undefined: both couplings vanish")]
    UndefinedAngle,

    #[error("integration step too large: norm grew by {growth:e} in one step")]
    StepTooLarge { growth: f64 },

    #[error("excitation bound exceeded: {0}")]
    BoundOverflow(String),

    #[error("at least {min} Monte Carlo trials required, got {got}")]
    TooFewTrials { min: usize, got: usize },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
