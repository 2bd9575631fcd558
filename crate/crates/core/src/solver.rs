// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Weak-probe Maxwell-Bloch integrator in one dimension.
//!
//! The state holds the probe envelope `E`, and the √N-scaled coherences
//! `P = √N ρ_ab` and `S = √N ρ_cb`. With `G = g√N = √(g²N)` the equations are
//!
//! ```text
//! (∂t + c∂z) E = i G P
//!         ∂t P = −γ P + i G E + i Ω S
//!         ∂t S = i Ω P
//! ```
//!
//! so that the dark-state polariton is the plain rotation
//! `Ψ = cos θ E − sin θ S` with `tan θ = G/Ω`.
//!
//! Time stepping is Strang splitting: half a step of the local 3×3 linear
//! system (RK4 sub-steps, propagator shared across the grid when Ω is
//! uniform), a transport step, and another local half step. Transport is an
//! exact one-cell shift when `c·dt/dz = 1` and Lax-Wendroff otherwise. The
//! inflow boundary at `z_min` carries zero or an injected waveform; the
//! outflow boundary at `z_max` is free.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::medium::MediumParams;
use crate::ode::{mat3_apply, propagator3, Mat3};
use crate::quad;
use crate::schedule::{ControlSchedule, Domain};
use crate::{Error, Result};

/// Weak-probe monitor threshold on `g|E|/Ω`.
pub const WEAK_PROBE_LIMIT: f64 = 0.3;

/// Largest `γ·dt` accepted by the integrator.
pub const MAX_GAMMA_DT: f64 = 0.1;

/// Largest `|λ|·h` of an RK4 sub-step of the local system.
const LOCAL_STEP_RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub z_min: f64,
    pub z_max: f64,
    /// Number of grid nodes `z_i = z_min + i·dz`, `dz = (z_max − z_min)/nz`.
    pub nz: usize,
    pub t_end: f64,
    pub dt: f64,
}

impl Grid {
    pub fn new(z_min: f64, z_max: f64, nz: usize, t_end: f64, dt: f64, c: f64) -> Result<Self> {
        let g = Self { z_min, z_max, nz, t_end, dt };
        g.validate(c)?;
        Ok(g)
    }

    /// Grid with `c·dt = dz`, which makes transport an exact shift.
    pub fn unit_courant(z_min: f64, z_max: f64, nz: usize, t_end: f64, c: f64) -> Result<Self> {
        let dz = (z_max - z_min) / nz as f64;
        Self::new(z_min, z_max, nz, t_end, dz / c, c)
    }

    pub fn validate(&self, c: f64) -> Result<()> {
        if self.nz < 64 {
            return Err(Error::InvalidParameter(format!("grid needs nz ≥ 64, got {}", self.nz)));
        }
        if !(self.z_max > self.z_min) || !self.z_min.is_finite() || !self.z_max.is_finite() {
            return Err(Error::InvalidParameter("grid requires finite z_min < z_max".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter("grid requires dt > 0 and t_end ≥ 0".into()));
        }
        let courant = self.courant(c);
        if courant > 1.0 + 1e-12 {
            return Err(Error::Cfl { courant });
        }
        Ok(())
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.nz as f64
    }

    pub fn courant(&self, c: f64) -> f64 {
        c * self.dt / self.dz()
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz()
    }

    pub fn zs(&self) -> Vec<f64> {
        (0..self.nz).map(|i| self.z(i)).collect()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Index of the node nearest to `z`, clamped to the grid.
    pub fn nearest(&self, z: f64) -> usize {
        (((z - self.z_min) / self.dz()).round().max(0.0) as usize).min(self.nz - 1)
    }
}

/// Fields on the grid at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub t: f64,
    /// Probe envelope `E`.
    pub e: Vec<C64>,
    /// Optical coherence `P = √N ρ_ab`.
    pub p: Vec<C64>,
    /// Spin coherence `S = √N ρ_cb`.
    pub s: Vec<C64>,
    /// `max g|E|/Ω` over the grid at this instant.
    pub weak_probe: f64,
}

impl FieldState {
    pub fn zeros(t: f64, nz: usize) -> Self {
        let z = vec![C64::default(); nz];
        Self { t, e: z.clone(), p: z.clone(), s: z, weak_probe: 0.0 }
    }

    /// Bare density-matrix element ρ_ab for `atoms` atoms.
    pub fn rho_ab(&self, atoms: f64) -> Vec<C64> {
        self.p.iter().map(|x| x / atoms.sqrt()).collect()
    }

    /// Bare density-matrix element ρ_cb for `atoms` atoms.
    pub fn rho_cb(&self, atoms: f64) -> Vec<C64> {
        self.s.iter().map(|x| x / atoms.sqrt()).collect()
    }

    fn is_finite(&self) -> bool {
        self.e.iter().chain(&self.p).chain(&self.s).all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

/// How the probe enters the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Source {
    /// Pulse `amplitude·exp(−((z − center)/width)²)` already inside the medium.
    Envelope { center: f64, width: f64, amplitude: f64 },
    /// Waveform `amplitude·exp(−((t − t_center)/duration)²)` injected at `z_min`.
    Injection { t_center: f64, duration: f64, amplitude: f64 },
}

impl Source {
    pub fn envelope(&self, z: f64) -> C64 {
        match *self {
            Source::Envelope { center, width, amplitude } => {
                C64::new(amplitude * (-((z - center) / width).powi(2)).exp(), 0.0)
            }
            Source::Injection { .. } => C64::default(),
        }
    }

    pub fn inflow(&self, t: f64) -> C64 {
        match *self {
            Source::Injection { t_center, duration, amplitude } => {
                C64::new(amplitude * (-((t - t_center) / duration).powi(2)).exp(), 0.0)
            }
            Source::Envelope { .. } => C64::default(),
        }
    }
}

/// Atomic state at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomInit {
    /// `S = −tan θ·E` with the first-order optical coherence; the pulse is
    /// already a dark-state polariton.
    #[default]
    Polaritonic,
    /// All atoms in |b⟩.
    ColdStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub medium: MediumParams,
    pub grid: Grid,
    /// Either θ(t) (domain time) or a static profile over z (domain space).
    pub control: ControlSchedule,
    pub source: Source,
    #[serde(default)]
    pub init: AtomInit,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Positions at which the field's time trace is recorded.
    #[serde(default)]
    pub probes: Vec<f64>,
    /// Number of atoms per interaction volume; only used for the weak-probe
    /// monitor and the conversion to bare density-matrix elements.
    #[serde(default = "default_atoms")]
    pub atom_number: f64,
    /// Switch off the atom-field coupling (free-space propagation).
    #[serde(default)]
    pub free_space: bool,
}

fn default_atoms() -> f64 {
    1e6
}

impl Scenario {
    pub fn new(medium: MediumParams, grid: Grid, control: ControlSchedule, source: Source) -> Self {
        Self {
            medium,
            grid,
            control,
            source,
            init: AtomInit::default(),
            snapshots: Vec::new(),
            probes: Vec::new(),
            atom_number: default_atoms(),
            free_space: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.medium.c();
        self.grid.validate(c)?;
        self.control.validate()?;
        let gdt = self.medium.gamma() * self.grid.dt;
        if gdt > MAX_GAMMA_DT {
            return Err(Error::StiffStep { value: gdt });
        }
        if let Some(&t) = self.snapshots.iter().find(|&&t| !(0.0..=self.grid.t_end).contains(&t)) {
            return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, {}]", self.grid.t_end)));
        }
        if !(self.atom_number > 0.0) {
            return Err(Error::InvalidParameter("atom_number must be > 0".into()));
        }
        match self.source {
            Source::Envelope { width, .. } | Source::Injection { duration: width, .. } if !(width > 0.0) => {
                Err(Error::InvalidParameter("pulse width must be > 0".into()))
            }
            _ => Ok(()),
        }
    }

    /// θ at `(z, t)`.
    pub fn theta(&self, z: f64, t: f64) -> f64 {
        match self.control.domain {
            Domain::Time => self.control.theta(t, &self.medium),
            Domain::Space => self.control.theta(z, &self.medium),
        }
    }

    /// Ω at `(z, t)`.
    pub fn rabi(&self, z: f64, t: f64) -> f64 {
        match self.control.domain {
            Domain::Time => self.control.rabi(t, &self.medium),
            Domain::Space => self.control.rabi(z, &self.medium),
        }
    }

    /// Group velocity `c cos²θ` at `(z, t)`.
    pub fn group_velocity(&self, z: f64, t: f64) -> f64 {
        let x = match self.control.domain {
            Domain::Time => t,
            Domain::Space => z,
        };
        self.control.group_velocity(x, &self.medium)
    }

    /// Initial fields.
    pub fn initial_state(&self) -> FieldState {
        let grid = &self.grid;
        let mut st = FieldState::zeros(0.0, grid.nz);
        let g = self.medium.g_sqrt_n();
        let c = self.medium.c();
        let dz = grid.dz();
        let psi: Vec<C64> = grid.zs().iter().map(|&z| self.source.envelope(z)).collect();
        for i in 0..grid.nz {
            let z = grid.z(i);
            let cold = self.free_space || self.init == AtomInit::ColdStart;
            if cold {
                st.e[i] = psi[i];
                continue;
            }
            let (cos, sin) = {
                let th = self.theta(z, 0.0);
                (th.cos(), th.sin())
            };
            let dpsi = if i == 0 || i + 1 == grid.nz { C64::default() } else { (psi[i + 1] - psi[i - 1]) / (2.0 * dz) };
            st.e[i] = psi[i] * cos;
            st.s[i] = -psi[i] * sin;
            // Ṡ = iΩP with Ṡ = sin θ·v_gr·∂zΨ
            st.p[i] = -C64::i() * dpsi * (c * sin * sin * cos / g);
        }
        st.weak_probe = self.weak_probe(&st);
        st
    }

    fn weak_probe(&self, st: &FieldState) -> f64 {
        if self.free_space {
            return 0.0;
        }
        let g = self.medium.g_sqrt_n() / self.atom_number.sqrt();
        st.e.iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let om = self.rabi(self.grid.z(i), st.t);
                (om > 0.0 && om.is_finite()).then(|| g * e.norm() / om)
            })
            .fold(0.0, f64::max)
    }
}

/// Per-snapshot scalar diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    /// Centroid of |E|².
    pub centroid: f64,
    /// Rms width of |E|².
    pub rms_width: f64,
    pub peak: f64,
    /// ∫|E|² dz.
    pub field_energy: f64,
    /// ∫(|E|² + |P|² + |S|²) dz.
    pub excitation: f64,
    /// ∫|Ψ|² dz with Ψ = cos θ E − sin θ S.
    pub polariton_norm: f64,
    /// Centroid of |Ψ|².
    pub polariton_centroid: f64,
    pub weak_probe: f64,
}

impl Diagnostics {
    pub fn of(state: &FieldState, scenario: &Scenario) -> Self {
        let grid = &scenario.grid;
        let dz = grid.dz();
        let zs = grid.zs();
        let w: Vec<f64> = state.e.iter().map(|x| x.norm_sqr()).collect();
        let psi = dark_component(state, scenario);
        let wpsi: Vec<f64> = psi.iter().map(|x| x.norm_sqr()).collect();
        let (centroid, rms_width) = moments(&zs, &w);
        let (polariton_centroid, _) = moments(&zs, &wpsi);
        Self {
            t: state.t,
            centroid,
            rms_width,
            peak: state.e.iter().map(|x| x.norm()).fold(0.0, f64::max),
            field_energy: w.iter().sum::<f64>() * dz,
            excitation: state
                .e
                .iter()
                .zip(&state.p)
                .zip(&state.s)
                .map(|((e, p), s)| e.norm_sqr() + p.norm_sqr() + s.norm_sqr())
                .sum::<f64>()
                * dz,
            polariton_norm: wpsi.iter().sum::<f64>() * dz,
            polariton_centroid,
            weak_probe: state.weak_probe,
        }
    }
}

/// Dark-polariton amplitude of a solver state using the local mixing angle.
pub fn dark_component(state: &FieldState, scenario: &Scenario) -> Vec<C64> {
    (0..state.e.len())
        .map(|i| {
            let th = scenario.theta(scenario.grid.z(i), state.t);
            state.e[i] * th.cos() - state.s[i] * th.sin()
        })
        .collect()
}

fn moments(x: &[f64], w: &[f64]) -> (f64, f64) {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / total;
    let var = x.iter().zip(w).map(|(a, b)| (a - mean).powi(2) * b).sum::<f64>() / total;
    (mean, var.max(0.0).sqrt())
}

/// Result of [`run`].
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub snapshots: Vec<FieldState>,
    pub diagnostics: Vec<Diagnostics>,
    /// Time axis shared by all probe traces.
    pub probe_times: Vec<f64>,
    /// Field `E` at each probe position, one trace per probe.
    pub probe_traces: Vec<Vec<C64>>,
    pub weak_probe_max: f64,
    pub weak_probe_flagged: bool,
}

/// Local generator for `(E, P, S)`.
fn local_generator(g: f64, gamma: f64, omega: f64) -> Mat3 {
    let i = C64::i();
    let z = C64::default();
    [[z, i * g, z], [i * g, C64::new(-gamma, 0.0), i * omega], [z, i * omega, z]]
}

fn substeps(g: f64, gamma: f64, omega_max: f64, span: f64) -> usize {
    let rate = g + gamma + omega_max;
    ((rate * span / LOCAL_STEP_RESOLUTION).ceil() as usize).max(1)
}

/// Stateful integrator for one scenario.
pub struct Integrator<'a> {
    scenario: &'a Scenario,
    /// Half-step propagators per node for static spatial profiles.
    spatial: Option<Vec<Mat3>>,
    scratch: Vec<C64>,
}

impl<'a> Integrator<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        let m = &scenario.medium;
        let (g, gamma) = (m.g_sqrt_n(), m.gamma());
        let half = 0.5 * scenario.grid.dt;
        let spatial = match scenario.control.domain {
            Domain::Space if !scenario.free_space => {
                let mut props = Vec::with_capacity(scenario.grid.nz);
                for i in 0..scenario.grid.nz {
                    let om = scenario.control.rabi(scenario.grid.z(i), m);
                    if !om.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "control Rabi frequency is infinite at z = {}",
                            scenario.grid.z(i)
                        )));
                    }
                    let n = substeps(g, gamma, om, half);
                    props.push(propagator3(|_| local_generator(g, gamma, om), 0.0, half, n));
                }
                Some(props)
            }
            _ => None,
        };
        Ok(Self { scenario, spatial, scratch: vec![C64::default(); scenario.grid.nz] })
    }

    fn local_half_step(&self, st: &mut FieldState, t0: f64) -> Result<()> {
        if self.scenario.free_space {
            return Ok(());
        }
        let apply = |st: &mut FieldState, i: usize, u: &Mat3| {
            let [e, p, s] = mat3_apply(u, [st.e[i], st.p[i], st.s[i]]);
            st.e[i] = e;
            st.p[i] = p;
            st.s[i] = s;
        };
        match &self.spatial {
            Some(props) => {
                for (i, u) in props.iter().enumerate() {
                    apply(st, i, u);
                }
            }
            None => {
                let m = &self.scenario.medium;
                let (g, gamma) = (m.g_sqrt_n(), m.gamma());
                let half = 0.5 * self.scenario.grid.dt;
                let sched = &self.scenario.control;
                let omega_max = [t0, t0 + 0.5 * half, t0 + half].iter().map(|&t| sched.rabi(t, m)).fold(0.0, f64::max);
                if !omega_max.is_finite() {
                    return Err(Error::InvalidParameter(format!("control Rabi frequency is infinite near t = {t0}")));
                }
                let n = substeps(g, gamma, omega_max, half);
                let u = propagator3(|t| local_generator(g, gamma, sched.rabi(t, m)), t0, half, n);
                for i in 0..st.e.len() {
                    apply(st, i, &u);
                }
            }
        }
        Ok(())
    }

    fn transport(&mut self, st: &mut FieldState, t_new: f64) {
        let grid = &self.scenario.grid;
        let nu = grid.courant(self.scenario.medium.c());
        let inflow = self.scenario.source.inflow(t_new);
        let e = &mut st.e;
        let n = e.len();
        if (nu - 1.0).abs() < 1e-12 {
            e.rotate_right(1);
            e[0] = inflow;
            return;
        }
        let old = &mut self.scratch;
        old.copy_from_slice(e);
        for i in 1..n - 1 {
            e[i] = old[i] - (old[i + 1] - old[i - 1]) * (0.5 * nu)
                + (old[i + 1] - old[i] * 2.0 + old[i - 1]) * (0.5 * nu * nu);
        }
        e[n - 1] = old[n - 1] - (old[n - 1] - old[n - 2]) * nu;
        e[0] = inflow;
    }

    /// Advance `st` by one time step of the scenario grid.
    pub fn step(&mut self, st: &mut FieldState) -> Result<()> {
        let dt = self.scenario.grid.dt;
        let t0 = st.t;
        self.local_half_step(st, t0)?;
        self.transport(st, t0 + dt);
        self.local_half_step(st, t0 + 0.5 * dt)?;
        st.t = t0 + dt;
        Ok(())
    }
}

/// One step of the scenario's integrator; see [`Integrator::step`].
pub fn step(state: &FieldState, scenario: &Scenario) -> Result<FieldState> {
    let mut next = state.clone();
    Integrator::new(scenario)?.step(&mut next)?;
    if !next.is_finite() {
        return Err(Error::NonFinite { t: next.t, snapshot: Box::new(next) });
    }
    next.weak_probe = scenario.weak_probe(&next);
    Ok(next)
}

/// Integrate the scenario to `t_end`, collecting snapshots and probe traces.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    let mut integ = Integrator::new(scenario)?;
    let grid = &scenario.grid;
    let steps = grid.steps();
    let snap_steps: Vec<usize> =
        scenario.snapshots.iter().map(|&t| ((t / grid.dt).round() as usize).min(steps)).collect();
    let probe_idx: Vec<usize> = scenario.probes.iter().map(|&z| grid.nearest(z)).collect();

    let mut st = scenario.initial_state();
    let mut snapshots = vec![None; snap_steps.len()];
    let mut probe_times = Vec::with_capacity(steps + 1);
    let mut probe_traces = vec![Vec::with_capacity(steps + 1); probe_idx.len()];
    let mut weak_max = st.weak_probe;

    let mut record = |k: usize, st: &FieldState, snapshots: &mut Vec<Option<FieldState>>| {
        for (slot, &ks) in snap_steps.iter().enumerate() {
            if ks == k {
                snapshots[slot] = Some(st.clone());
            }
        }
        probe_times.push(st.t);
        for (trace, &i) in probe_traces.iter_mut().zip(&probe_idx) {
            trace.push(st.e[i]);
        }
    };
    record(0, &st, &mut snapshots);

    for k in 1..=steps {
        integ.step(&mut st)?;
        // keep the clock free of accumulated rounding
        st.t = k as f64 * grid.dt;
        let check = k % 64 == 0 || k == steps || snap_steps.contains(&k);
        if check {
            if !st.is_finite() {
                return Err(Error::NonFinite { t: st.t, snapshot: Box::new(st) });
            }
            st.weak_probe = scenario.weak_probe(&st);
            weak_max = weak_max.max(st.weak_probe);
        }
        record(k, &st, &mut snapshots);
    }

    let snapshots: Vec<FieldState> =
        snapshots.into_iter().map(|s| s.expect("every snapshot step is visited")).collect();
    let diagnostics = snapshots.iter().map(|s| Diagnostics::of(s, scenario)).collect();
    Ok(RunOutput {
        snapshots,
        diagnostics,
        probe_times,
        probe_traces,
        weak_probe_max: weak_max,
        weak_probe_flagged: weak_max > WEAK_PROBE_LIMIT,
    })
}

/// Delay `∫₀^z dz′/v_gr(z′)` by adaptive quadrature (relative accuracy 1e-10).
pub fn delay_integral<V: Fn(f64) -> f64>(vgr: &V, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if z > 0.0 { (0.0, z) } else { (z, 0.0) };
    let probe_n = 256;
    for k in 0..=probe_n {
        let x = lo + (hi - lo) * k as f64 / probe_n as f64;
        if !(vgr(x) > 0.0) {
            return Err(Error::DivergentDelay { z: x });
        }
    }
    let bad = std::cell::Cell::new(None);
    let val = quad::integrate(
        |x| {
            let v = vgr(x);
            if !(v > 0.0) {
                bad.set(Some(x));
                return 0.0;
            }
            1.0 / v
        },
        0.0,
        z,
        1e-10,
    );
    match bad.get() {
        Some(x) => Err(Error::DivergentDelay { z: x }),
        None => Ok(val),
    }
}

/// Dispersive-only solution for a static group-velocity profile:
/// `E(z, t) = E₀(t − ∫₀^z dz′/v_gr(z′))`, where `E₀` is the waveform at `z = 0`.
pub fn analytic_space_profile<W, V>(waveform: &W, vgr: &V, zs: &[f64], t: f64) -> Result<Vec<C64>>
where
    W: Fn(f64) -> C64,
    V: Fn(f64) -> f64,
{
    zs.iter().map(|&z| delay_integral(vgr, z).map(|d| waveform(t - d))).collect()
}

/// Translation distance `∫₀^t v_gr(τ)dτ`.
pub fn travelled_distance<V: Fn(f64) -> f64>(vgr: &V, t: f64) -> f64 {
    quad::integrate(vgr, 0.0, t, 1e-12)
}

/// Shape-preserving solution for a time-dependent group velocity:
/// `E(z, t) = E(z − ∫₀^t v_gr(τ)dτ, 0)`.
pub fn analytic_time_profile<F, V>(envelope: &F, vgr: &V, zs: &[f64], t: f64) -> Vec<C64>
where
    F: Fn(f64) -> C64,
    V: Fn(f64) -> f64,
{
    let shift = travelled_distance(vgr, t);
    zs.iter().map(|&z| envelope(z - shift)).collect()
}

/// Relative L2 distance `‖a − b‖ / ‖b‖`.
pub fn relative_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// θ clamped to `[0, π/2]`.
pub fn clamp_theta(theta: f64) -> f64 {
    theta.clamp(0.0, FRAC_PI_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{Profile, Quantity};

    fn medium() -> MediumParams {
        MediumParams::from_opacity(20.0, 10.0, 1.0, 1.0).unwrap()
    }

    fn free_space(nz: usize, courant: f64) -> Scenario {
        let m = medium();
        let (z0, z1) = (-40.0, 60.0);
        let dz = (z1 - z0) / nz as f64;
        let grid = Grid::new(z0, z1, nz, 20.0, courant * dz, 1.0).unwrap();
        let control = ControlSchedule::time(Quantity::CotTheta, Profile::Constant { value: 1.0 }).unwrap();
        let mut s = Scenario::new(m, grid, control, Source::Envelope { center: 0.0, width: 5.0, amplitude: 1.0 });
        s.free_space = true;
        s.snapshots = vec![20.0];
        s
    }

    fn translated_error(s: &Scenario) -> f64 {
        let out = run(s).unwrap();
        let snap = &out.snapshots[0];
        let exact: Vec<C64> = s.grid.zs().iter().map(|&z| s.source.envelope(z - snap.t)).collect();
        relative_l2(&snap.e, &exact)
    }

    #[test]
    fn grid_rejects_cfl_violation_and_tiny_grid() {
        assert!(matches!(Grid::new(0.0, 1.0, 100, 1.0, 0.02, 1.0), Err(Error::Cfl { .. })));
        assert!(Grid::new(0.0, 1.0, 32, 1.0, 0.01, 1.0).is_err());
        let g = Grid::unit_courant(0.0, 10.0, 100, 1.0, 1.0).unwrap();
        assert!((g.courant(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stiff_step_rejected() {
        let mut s = free_space(128, 1.0);
        s.medium = MediumParams::new(1.0, 200.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(s.validate(), Err(Error::StiffStep { .. })));
    }

    #[test]
    fn free_space_unit_courant_is_exact() {
        assert!(translated_error(&free_space(1000, 1.0)) < 1e-12);
    }

    #[test]
    fn free_space_lax_wendroff_second_order() {
        let coarse = translated_error(&free_space(1000, 0.5));
        let fine = translated_error(&free_space(2000, 0.5));
        assert!(fine < 1e-3, "fine error {fine}");
        let order = (coarse / fine).log2();
        assert!(order >= 1.8, "observed order {order}");
    }

    #[test]
    fn injection_enters_from_left() {
        let m = medium();
        let grid = Grid::unit_courant(0.0, 100.0, 1000, 60.0, 1.0).unwrap();
        let control = ControlSchedule::time(Quantity::CotTheta, Profile::Constant { value: 1.0 }).unwrap();
        let mut s =
            Scenario::new(m, grid, control, Source::Injection { t_center: 10.0, duration: 3.0, amplitude: 1.0 });
        s.free_space = true;
        s.snapshots = vec![40.0];
        let out = run(&s).unwrap();
        // pulse centred at z = c(t − t_center) = 30
        assert!((out.diagnostics[0].centroid - 30.0).abs() < 0.2);
    }

    #[test]
    fn step_is_deterministic_and_reports_nan() {
        let mut s = free_space(2048, 1.0);
        s.free_space = false;
        let st = s.initial_state();
        let a = step(&st, &s).unwrap();
        let b = step(&st, &s).unwrap();
        assert_eq!(a, b);
        let mut broken = st.clone();
        broken.e[10] = C64::new(f64::NAN, 0.0);
        assert!(matches!(step(&broken, &s), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn delay_integral_cases() {
        let v = |_z: f64| 0.25;
        assert!((delay_integral(&v, 3.0).unwrap() - 12.0).abs() < 1e-12);
        // v = c/(1+z): delay = z + z²/2
        let v = |z: f64| 1.0 / (1.0 + z);
        for z in [0.25, 0.5, 1.0] {
            let d = delay_integral(&v, z).unwrap();
            let exact = z + z * z / 2.0;
            assert!((d - exact).abs() < 1e-8 * exact);
        }
        let v = |z: f64| (1.0 - z).max(0.0);
        assert!(matches!(delay_integral(&v, 2.0), Err(Error::DivergentDelay { .. })));
    }

    #[test]
    fn frozen_pulse_in_time_profile() {
        let env = |z: f64| C64::new((-z * z).exp(), 0.0);
        let zs: Vec<f64> = (0..50).map(|i| -2.0 + 0.1 * i as f64).collect();
        let out = analytic_time_profile(&env, &|_t| 0.0, &zs, 10.0);
        for (z, e) in zs.iter().zip(out) {
            assert_eq!(e, env(*z));
        }
    }
}
