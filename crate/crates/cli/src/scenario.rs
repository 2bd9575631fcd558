// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files.
//!
//! A scenario file is TOML with a fixed top level and a `[params]` table
//! whose schema depends on `kind`. Unknown keys are rejected at both levels.

use std::path::{Path, PathBuf};

use lightstore::collective::FlipModel;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Scenario file format understood by this build.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectrum,
    Roadblock,
    Stop,
    SuddenSwitch,
    CavityStirap,
    MemoryDecoherence,
    AdiabaticityAudit,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Spectrum,
        Kind::Roadblock,
        Kind::Stop,
        Kind::SuddenSwitch,
        Kind::CavityStirap,
        Kind::MemoryDecoherence,
        Kind::AdiabaticityAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Roadblock => "roadblock",
            Kind::Stop => "stop",
            Kind::SuddenSwitch => "sudden-switch",
            Kind::CavityStirap => "cavity-stirap",
            Kind::MemoryDecoherence => "memory-decoherence",
            Kind::AdiabaticityAudit => "adiabaticity-audit",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Kind::Spectrum => "EIT transmission T(δ) for a set of group velocities",
            Kind::Roadblock => "pulse driven into a spatial slow-light barrier",
            Kind::Stop => "stop-and-retrieve cycle of a light pulse",
            Kind::SuddenSwitch => "control switched off and on with a finite or infinite rate",
            Kind::CavityStirap => "single-atom cavity Raman transfer for several ramp times",
            Kind::MemoryDecoherence => "Monte Carlo fidelity of a collective memory under single-atom errors",
            Kind::AdiabaticityAudit => "adiabaticity margins of a reference scenario without running it",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    version: u32,
    kind: Kind,
    #[serde(default)]
    params: toml::Table,
    output: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

fn opacity() -> f64 {
    20.0
}
fn eta_kc_over_gamma() -> f64 {
    10.0
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default = "opacity")]
    pub opacity: f64,
    #[serde(default = "eta_kc_over_gamma")]
    pub eta_kc_over_gamma: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub c: f64,
    /// One transmission curve per group velocity.
    pub group_velocities: Vec<f64>,
    /// Half-span of the detuning grid in units of the transparency width.
    #[serde(default = "default_span")]
    pub span: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_span() -> f64 {
    4.0
}
fn default_points() -> usize {
    4001
}

fn default_stride() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopParams {
    pub nz: usize,
    /// `c·dt/dz`; 1 selects the exact-shift transport.
    #[serde(default = "one")]
    pub courant: f64,
    /// Keep every n-th grid point in the CSV series.
    #[serde(default = "default_stride")]
    pub csv_stride: usize,
    #[serde(default = "opacity")]
    pub opacity: f64,
    #[serde(default = "eta_kc_over_gamma")]
    pub eta_kc_over_gamma: f64,
    /// tanh rate of the switching edges.
    #[serde(default = "default_rate")]
    pub rate: f64,
}

fn default_rate() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadblockParams {
    pub nz: usize,
    /// `c·dt/dz`; 1 selects the exact-shift transport.
    #[serde(default = "one")]
    pub courant: f64,
    /// Keep every n-th grid point in the CSV series.
    #[serde(default = "default_stride")]
    pub csv_stride: usize,
    /// Time between snapshots written to the CSV series.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: f64,
}

fn default_snapshot_every() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchParams {
    pub nz: usize,
    /// `c·dt/dz`; 1 selects the exact-shift transport.
    #[serde(default = "one")]
    pub courant: f64,
    /// Keep every n-th grid point in the CSV series.
    #[serde(default = "default_stride")]
    pub csv_stride: usize,
    /// cot θ before and after the dark interval.
    pub cot_theta: f64,
    /// tanh rate of the edges; `inf` for a discontinuous switch.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StirapParams {
    pub g: f64,
    pub n: u32,
    pub gamma: f64,
    pub omega0: f64,
    pub ramp_times: Vec<f64>,
    /// Samples per trajectory in the CSV series.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    401
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceParams {
    pub n_atoms: usize,
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    #[serde(default)]
    pub model: FlipModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Stop,
    SuddenTotal,
    SuddenPartial,
    SmoothPartial,
    Roadblock,
    Narrowing,
    SlowConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditParams {
    pub preset: Preset,
    #[serde(default = "default_audit_nz")]
    pub nz: usize,
    /// Samples of the control curve written to `control.csv`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_audit_nz() -> usize {
    2048
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Spectrum(SpectrumParams),
    Roadblock(RoadblockParams),
    Stop(StopParams),
    SuddenSwitch(SwitchParams),
    CavityStirap(StirapParams),
    MemoryDecoherence(DecoherenceParams),
    AdiabaticityAudit(AuditParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    /// File stem, used as the scenario name.
    pub name: String,
    pub kind: Kind,
    pub params: Params,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

fn typed<T: serde::de::DeserializeOwned>(table: toml::Table) -> Result<T, Failure> {
    T::deserialize(toml::Value::Table(table)).map_err(|e| Failure::Validation(format!("params: {e}")))
}

impl ScenarioFile {
    pub fn parse(name: &str, text: &str) -> Result<Self, Failure> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Failure::Validation(e.to_string()))?;
        if raw.version != FORMAT_VERSION {
            return Err(Failure::Validation(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                raw.version
            )));
        }
        let params = match raw.kind {
            Kind::Spectrum => Params::Spectrum(typed(raw.params)?),
            Kind::Roadblock => Params::Roadblock(typed(raw.params)?),
            Kind::Stop => Params::Stop(typed(raw.params)?),
            Kind::SuddenSwitch => Params::SuddenSwitch(typed(raw.params)?),
            Kind::CavityStirap => Params::CavityStirap(typed(raw.params)?),
            Kind::MemoryDecoherence => Params::MemoryDecoherence(typed(raw.params)?),
            Kind::AdiabaticityAudit => Params::AdiabaticityAudit(typed(raw.params)?),
        };
        if let Some(out) = &raw.output {
            if out.as_os_str().is_empty() || out.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                return Err(Failure::Validation(format!(
                    "output {} must be a non-empty path without '..'",
                    out.display()
                )));
            }
        }
        Ok(Self { name: name.to_string(), kind: raw.kind, params, output: raw.output, seed: raw.seed })
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Self::parse(name, &text).map_err(|f| f.context(&path.display().to_string()))
    }

    /// Artifact directory relative to the output root.
    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from(&self.name))
    }
}
