// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact few-atom collective memory.
//!
//! States live on `{b, c}^N ⊗ {0, …, n_max}` photons, with the excited level
//! eliminated. Amplitudes are indexed by `photon·2^N + mask`; bit `j − 1`
//! of `mask` is set when atom `j` is in |c⟩.
//!
//! The collective spin uses |c⟩ as spin up: `S₊ = Σ_j σ_cb^j`,
//! `S_z = n_c − N/2`. Equivalence classes are labelled by the number of
//! dark excitations. To make this number an exact integer at finite N the
//! spin ladder inside each total-spin sector J is bosonized,
//! `b = J₋/√(2J − q + 1)` with `q = J + M`, and the class is the eigenvalue
//! of `Ψ_b†Ψ_b` with `Ψ_b = cos θ·a − sin θ·b`. At θ = π/2 this is simply
//! `q`; on the symmetric sector it reproduces the binomial dark states.
//!
//! The read/write protocol is simulated separately in the symmetric
//! three-level sector (Schwinger bosons A, B, C for the populations of
//! |a⟩, |b⟩, |c⟩), where the excited state and its loss are kept.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest atom number handled by the full state vector.
pub const MAX_ATOMS: usize = 14;

/// Fewest Monte Carlo trials accepted.
pub const MIN_TRIALS: usize = 100;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of `|D,n⟩` on `|c^k, n−k⟩`, `k = 0..=n`:
/// `√(n!/(k!(n−k)!))·(−sin θ)^k·(cos θ)^(n−k)`.
pub fn dark_state_coefficients(n: usize, theta: f64, n_atoms: usize) -> Result<Vec<f64>> {
    if n >= n_atoms {
        return Err(Error::InvalidParameter(format!("dark state needs n < N, got n = {n}, N = {n_atoms}")));
    }
    let (s, c) = theta.sin_cos();
    Ok((0..=n).map(|k| binomial(n, k).sqrt() * (-s).powi(k as i32) * c.powi((n - k) as i32)).collect())
}

/// Amplitude vector on the full spin ⊗ photon basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    n_atoms: usize,
    n_max: usize,
    amp: Vec<C64>,
}

/// Creation or annihilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Create,
    Annihilate,
}

impl CollectiveState {
    pub fn zeros(n_atoms: usize, n_max: usize) -> Result<Self> {
        if !(2..=MAX_ATOMS).contains(&n_atoms) {
            return Err(Error::InvalidParameter(format!("atom number must lie in 2..={MAX_ATOMS}, got {n_atoms}")));
        }
        if n_max >= n_atoms {
            return Err(Error::InvalidParameter(format!("photon cutoff {n_max} must be below N = {n_atoms}")));
        }
        Ok(Self { n_atoms, n_max, amp: vec![C64::default(); (n_max + 1) << n_atoms] })
    }

    /// `|b…b, 0⟩`.
    pub fn ground(n_atoms: usize, n_max: usize) -> Result<Self> {
        let mut s = Self::zeros(n_atoms, n_max)?;
        s.amp[0] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Symmetric Dicke state with `k` atoms in |c⟩ and `photons` photons.
    pub fn dicke(n_atoms: usize, n_max: usize, k: usize, photons: usize) -> Result<Self> {
        let mut s = Self::zeros(n_atoms, n_max)?;
        if k > n_atoms || photons > n_max {
            return Err(Error::BoundOverflow(format!("Dicke state (k = {k}, photons = {photons}) outside the basis")));
        }
        let w = binomial(n_atoms, k).sqrt().recip();
        for mask in 0..1usize << n_atoms {
            if mask.count_ones() as usize == k {
                let i = s.index(photons, mask);
                s.amp[i] = C64::new(w, 0.0);
            }
        }
        Ok(s)
    }

    /// Binomial dark state `|D,n⟩` built from [`dark_state_coefficients`].
    pub fn dark(n_atoms: usize, n_max: usize, n: usize, theta: f64) -> Result<Self> {
        if n > n_max {
            return Err(Error::BoundOverflow(format!("dark state n = {n} exceeds photon cutoff {n_max}")));
        }
        let coeffs = dark_state_coefficients(n, theta, n_atoms)?;
        let mut s = Self::zeros(n_atoms, n_max)?;
        for (k, c) in coeffs.iter().enumerate() {
            s.axpy(C64::new(*c, 0.0), &Self::dicke(n_atoms, n_max, k, n - k)?);
        }
        Ok(s)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn index(&self, photons: usize, mask: usize) -> usize {
        (photons << self.n_atoms) | mask
    }

    pub fn amplitude(&self, photons: usize, mask: usize) -> C64 {
        self.amp[self.index(photons, mask)]
    }

    fn split(&self, idx: usize) -> (usize, usize) {
        (idx >> self.n_atoms, idx & ((1 << self.n_atoms) - 1))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|x| x.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn normalized(mut self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return None;
        }
        self.amp.iter_mut().for_each(|x| *x /= n);
        Some(self)
    }

    pub fn scale(&mut self, k: C64) {
        self.amp.iter_mut().for_each(|x| *x *= k);
    }

    /// `self += k·other`.
    pub fn axpy(&mut self, k: C64, other: &Self) {
        for (a, b) in self.amp.iter_mut().zip(&other.amp) {
            *a += k * b;
        }
    }

    fn zeros_like(&self) -> Self {
        Self { n_atoms: self.n_atoms, n_max: self.n_max, amp: vec![C64::default(); self.amp.len()] }
    }

    /// Total excitation number `photons + n_c` of a basis index.
    fn excitation(&self, idx: usize) -> usize {
        let (p, mask) = self.split(idx);
        p + mask.count_ones() as usize
    }

    /// Photon creation or annihilation.
    pub fn photon(&self, dir: Direction) -> Result<Self> {
        let mut out = self.zeros_like();
        for (idx, &x) in self.amp.iter().enumerate() {
            if x == C64::default() {
                continue;
            }
            let (p, mask) = self.split(idx);
            match dir {
                Direction::Create => {
                    if p + 1 > self.n_max {
                        return Err(Error::BoundOverflow(format!("photon number would exceed cutoff {}", self.n_max)));
                    }
                    out.amp[self.index(p + 1, mask)] += x * ((p + 1) as f64).sqrt();
                }
                Direction::Annihilate if p > 0 => out.amp[self.index(p - 1, mask)] += x * (p as f64).sqrt(),
                Direction::Annihilate => {}
            }
        }
        Ok(out)
    }

    /// `σ_cb^j` (create) or `σ_bc^j` (annihilate) for atom `j ∈ 1..=N`.
    pub fn sigma(&self, j: usize, dir: Direction) -> Self {
        let bit = 1usize << (j - 1);
        let mut out = self.zeros_like();
        for (idx, &x) in self.amp.iter().enumerate() {
            let set = idx & bit != 0;
            match (dir, set) {
                (Direction::Create, false) => out.amp[idx | bit] += x,
                (Direction::Annihilate, true) => out.amp[idx & !bit] += x,
                _ => {}
            }
        }
        out
    }

    /// `Σ_j phase_j·σ^j`.
    fn collective(&self, dir: Direction, phase: impl Fn(usize) -> C64) -> Self {
        let mut out = self.zeros_like();
        let phases: Vec<C64> = (1..=self.n_atoms).map(phase).collect();
        for (idx, &x) in self.amp.iter().enumerate() {
            if x == C64::default() {
                continue;
            }
            for (b, ph) in phases.iter().enumerate() {
                let bit = 1usize << b;
                match (dir, idx & bit != 0) {
                    (Direction::Create, false) => out.amp[idx | bit] += x * ph,
                    (Direction::Annihilate, true) => out.amp[idx & !bit] += x * ph,
                    _ => {}
                }
            }
        }
        out
    }

    /// `S₊` or `S₋`.
    pub fn spin_ladder(&self, dir: Direction) -> Self {
        self.collective(dir, |_| C64::new(1.0, 0.0))
    }

    /// Total spin `J² = S₊S₋ + S_z² − S_z`.
    pub fn total_spin_squared(&self) -> Self {
        let mut out = self.spin_ladder(Direction::Annihilate).spin_ladder(Direction::Create);
        let half = self.n_atoms as f64 / 2.0;
        for (idx, x) in self.amp.iter().enumerate() {
            let sz = (idx & ((1 << self.n_atoms) - 1)).count_ones() as f64 - half;
            out.amp[idx] += x * (sz * sz - sz);
        }
        out
    }
}

/// `Ψ† = cos θ·a† − sin θ·(1/√N)Σ_j σ_cb^j`.
pub fn apply_dark_creation(state: &CollectiveState, theta: f64) -> Result<CollectiveState> {
    let (s, c) = theta.sin_cos();
    let mut out = state.photon(Direction::Create)?;
    out.scale(C64::new(c, 0.0));
    out.axpy(C64::new(-s / (state.n_atoms as f64).sqrt(), 0.0), &state.spin_ladder(Direction::Create));
    Ok(out)
}

/// `Ψ = cos θ·a − sin θ·(1/√N)Σ_j σ_bc^j`.
pub fn apply_dark_annihilation(state: &CollectiveState, theta: f64) -> Result<CollectiveState> {
    let (s, c) = theta.sin_cos();
    let mut out = state.photon(Direction::Annihilate)?;
    out.scale(C64::new(c, 0.0));
    out.axpy(C64::new(-s / (state.n_atoms as f64).sqrt(), 0.0), &state.spin_ladder(Direction::Annihilate));
    Ok(out)
}

/// Bright polariton `Φ_l` or `Φ_l†`.
///
/// `Φ₀ = sin θ·a + cos θ·(1/√N)Σ_j σ_bc^j` and, for `l ≥ 1`,
/// `Φ_l = (1/√N)Σ_j σ_bc^j·exp(2πi·lj/N)`.
pub fn apply_bright_mode(state: &CollectiveState, l: usize, theta: f64, dir: Direction) -> Result<CollectiveState> {
    let n = state.n_atoms;
    if l >= n {
        return Err(Error::InvalidParameter(format!("bright mode index {l} must be below N = {n}")));
    }
    let norm = 1.0 / (n as f64).sqrt();
    if l == 0 {
        let (s, c) = theta.sin_cos();
        let mut out = state.photon(dir)?;
        out.scale(C64::new(s, 0.0));
        out.axpy(C64::new(c * norm, 0.0), &state.spin_ladder(dir));
        return Ok(out);
    }
    let sign = if dir == Direction::Annihilate { 1.0 } else { -1.0 };
    Ok(state.collective(dir, |j| C64::from_polar(norm, sign * 2.0 * PI * (l * j) as f64 / n as f64)))
}

/// Single-atom spin flip `σ_cb^j` (|b⟩ → |c⟩) on atom `j ∈ 1..=N`.
pub fn spin_flip(state: &CollectiveState, j: usize) -> Result<CollectiveState> {
    if !(1..=state.n_atoms).contains(&j) {
        return Err(Error::InvalidParameter(format!("atom index {j} outside 1..={}", state.n_atoms)));
    }
    Ok(state.sigma(j, Direction::Create))
}

/// Coefficients of `σ_cb^j` on the mode operators at θ = π/2:
/// `σ_cb^j = Σ_{l=1}^{N−1} d_l·Φ_l† + d_Ψ·Ψ†`, returned as `(d_Ψ, [d_1…d_{N−1}])`.
///
/// With the conventions above `d_l = e^{2πi·lj/N}/√N` and `d_Ψ = −1/√N`.
pub fn flip_mode_coefficients(n_atoms: usize, j: usize) -> (C64, Vec<C64>) {
    let norm = 1.0 / (n_atoms as f64).sqrt();
    let modes = (1..n_atoms).map(|l| C64::from_polar(norm, 2.0 * PI * (l * j) as f64 / n_atoms as f64)).collect();
    (C64::new(-norm, 0.0), modes)
}

/// Twice the allowed total-spin values, `N, N−2, …`.
fn spin_values(n_atoms: usize) -> Vec<usize> {
    (0..=n_atoms / 2).map(|r| n_atoms - 2 * r).collect()
}

/// Components of `state` in each total-spin sector, keyed by `2J`.
pub fn spin_sectors(state: &CollectiveState) -> Vec<(usize, CollectiveState)> {
    let values = spin_values(state.n_atoms);
    let eig = |tj: usize| (tj * (tj + 2)) as f64 / 4.0;
    values
        .iter()
        .map(|&tj| {
            let mut v = state.clone();
            for &other in values.iter().filter(|&&o| o != tj) {
                let mut next = v.total_spin_squared();
                next.axpy(C64::new(-eig(other), 0.0), &v);
                next.scale(C64::new(1.0 / (eig(tj) - eig(other)), 0.0));
                v = next;
            }
            (tj, v)
        })
        .collect()
}

/// Ladder index `q = J + M` of a basis index inside sector `2J = tj`.
fn ladder_index(state: &CollectiveState, idx: usize, tj: usize) -> Option<usize> {
    let w = (idx & ((1 << state.n_atoms) - 1)).count_ones() as usize;
    let twice = tj + 2 * w;
    (twice >= state.n_atoms).then(|| (twice - state.n_atoms) / 2)
}

/// Bosonized ladder operator on a component of sector `2J = tj`.
fn ladder_boson(v: &CollectiveState, tj: usize, dir: Direction) -> CollectiveState {
    let mut weighted = v.clone();
    for (idx, x) in weighted.amp.iter_mut().enumerate() {
        let f = match ladder_index(v, idx, tj) {
            Some(q) if q <= tj => match dir {
                Direction::Annihilate => (tj - q + 1) as f64,
                Direction::Create => (tj - q) as f64,
            },
            _ => 0.0,
        };
        *x = if f > 0.0 { *x / f.sqrt() } else { C64::default() };
    }
    weighted.spin_ladder(dir)
}

/// `D = Ψ_b†Ψ_b` on a sector component.
fn dark_number(v: &CollectiveState, tj: usize, theta: f64) -> Result<CollectiveState> {
    let (s, c) = theta.sin_cos();
    let a = v.photon(Direction::Annihilate)?;
    let b = ladder_boson(v, tj, Direction::Annihilate);
    let mut psi = a.clone();
    psi.scale(C64::new(c, 0.0));
    psi.axpy(C64::new(-s, 0.0), &b);
    let mut out = psi.photon(Direction::Create).unwrap_or_else(|_| psi.zeros_like());
    out.scale(C64::new(c, 0.0));
    out.axpy(C64::new(-s, 0.0), &ladder_boson(&psi, tj, Direction::Create));
    Ok(out)
}

/// Components `P_n·state` of every equivalence class `n = 0, 1, …`.
pub fn class_components(state: &CollectiveState, theta: f64) -> Result<Vec<CollectiveState>> {
    let k_max = state.n_max + state.n_atoms;
    let mut classes = vec![state.zeros_like(); k_max + 1];
    let exact = |t: f64| t.abs() < 1e-15 || (t - FRAC_PI_2).abs() < 1e-15;
    for (tj, v) in spin_sectors(state) {
        if v.norm_sqr() <= 1e-30 * state.norm_sqr().max(1e-300) {
            continue;
        }
        if exact(theta) {
            // D is diagonal: photon number at θ = 0, ladder index at θ = π/2
            for (idx, x) in v.amp.iter().enumerate() {
                if *x == C64::default() {
                    continue;
                }
                let n = if theta.abs() < 1e-15 { v.split(idx).0 } else { ladder_index(&v, idx, tj).unwrap_or(0) };
                classes[n].amp[idx] += x;
            }
            continue;
        }
        // split by total excitation, then Lagrange projectors in D
        let mut by_k: Vec<CollectiveState> = vec![v.zeros_like(); k_max + 1];
        for (idx, x) in v.amp.iter().enumerate() {
            by_k[v.excitation(idx)].amp[idx] = *x;
        }
        for (k, vk) in by_k.into_iter().enumerate() {
            if vk.norm_sqr() <= 1e-30 {
                continue;
            }
            if k > state.n_max || k > tj {
                return Err(Error::BoundOverflow(format!(
                    "class decomposition at θ = {theta} needs excitation {k} ≤ min(n_max, 2J) = {}",
                    state.n_max.min(tj)
                )));
            }
            for (n, class) in classes.iter_mut().enumerate().take(k + 1) {
                let mut p = vk.clone();
                for m in (0..=k).filter(|&m| m != n) {
                    let mut next = dark_number(&p, tj, theta)?;
                    next.axpy(C64::new(-(m as f64), 0.0), &p);
                    next.scale(C64::new(1.0 / (n as f64 - m as f64), 0.0));
                    p = next;
                }
                class.axpy(C64::new(1.0, 0.0), &p);
            }
        }
    }
    Ok(classes)
}

/// Probability of each equivalence class, normalized by the state norm.
pub fn equivalence_class_projector(state: &CollectiveState, theta: f64) -> Result<Vec<f64>> {
    let total = state.norm_sqr();
    if total == 0.0 {
        return Err(Error::InvalidParameter("zero state has no class distribution".into()));
    }
    let mut dist: Vec<f64> = class_components(state, theta)?.iter().map(|c| c.norm_sqr() / total).collect();
    while dist.len() > 1 && *dist.last().unwrap() < 1e-300 {
        dist.pop();
    }
    Ok(dist)
}

/// Optical-pumping loss of bright excitations over `dt`:
/// each class-`n` component with `K` excitations is multiplied by
/// `exp(−(Ω²/γ)(K − n)dt)`.
pub fn bright_mode_decay(
    state: &CollectiveState,
    theta: f64,
    omega: f64,
    gamma: f64,
    dt: f64,
) -> Result<CollectiveState> {
    let rate = omega * omega / gamma;
    let mut out = state.zeros_like();
    for (n, comp) in class_components(state, theta)?.into_iter().enumerate() {
        for (idx, x) in comp.amp.iter().enumerate() {
            if *x == C64::default() {
                continue;
            }
            let k = comp.excitation(idx);
            let bright = k.saturating_sub(n) as f64;
            out.amp[idx] += x * (-rate * bright * dt).exp();
        }
    }
    Ok(out)
}

/// Symmetric-sector state `Σ amp[k][p]·|c^k, p⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState {
    pub n_atoms: usize,
    pub n_max: usize,
    /// `amp[k][p]`, `k = 0..=N`, `p = 0..=n_max`.
    pub amp: Vec<Vec<C64>>,
}

impl SymmetricState {
    pub fn dark(n_atoms: usize, n_max: usize, n: usize, theta: f64) -> Result<Self> {
        let coeffs = dark_state_coefficients(n, theta, n_atoms)?;
        let mut amp = vec![vec![C64::default(); n_max + 1]; n_atoms + 1];
        for (k, c) in coeffs.into_iter().enumerate() {
            if n - k > n_max {
                return Err(Error::BoundOverflow(format!("photon number {} exceeds cutoff {n_max}", n - k)));
            }
            amp[k][n - k] = C64::new(c, 0.0);
        }
        Ok(Self { n_atoms, n_max, amp })
    }

    pub fn to_full(&self) -> Result<CollectiveState> {
        let mut s = CollectiveState::zeros(self.n_atoms, self.n_max)?;
        for (k, row) in self.amp.iter().enumerate() {
            for (p, &x) in row.iter().enumerate() {
                if x != C64::default() {
                    s.axpy(x, &CollectiveState::dicke(self.n_atoms, self.n_max, k, p)?);
                }
            }
        }
        Ok(s)
    }

    /// Projection of a full state onto the symmetric sector.
    pub fn from_full(state: &CollectiveState) -> Result<Self> {
        let mut amp = vec![vec![C64::default(); state.n_max + 1]; state.n_atoms + 1];
        for (k, row) in amp.iter_mut().enumerate() {
            for (p, x) in row.iter_mut().enumerate() {
                *x = CollectiveState::dicke(state.n_atoms, state.n_max, k, p)?.inner(state);
            }
        }
        Ok(Self { n_atoms: state.n_atoms, n_max: state.n_max, amp })
    }
}

/// Photon-number density matrix of the stored field.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredDensityMatrix {
    rho: DMatrix<C64>,
}

impl StoredDensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: DMatrix<C64>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::InvalidParameter("density matrix must be square and non-empty".into()));
        }
        let scale = rho.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
        if (&rho - rho.adjoint()).iter().any(|x| x.norm() > 1e-12 * scale) {
            return Err(Error::InvalidParameter("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!("density matrix trace is {tr}, not 1")));
        }
        let min = rho.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidParameter(format!("density matrix has negative eigenvalue {min}")));
        }
        Ok(Self { rho })
    }

    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        let mut rho = DMatrix::zeros(n_max + 1, n_max + 1);
        if n > n_max {
            return Err(Error::BoundOverflow(format!("Fock state {n} exceeds cutoff {n_max}")));
        }
        rho[(n, n)] = C64::new(1.0, 0.0);
        Self::new(rho)
    }

    /// `|ψ⟩⟨ψ|` for normalized amplitudes over photon number.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn n_max(&self) -> usize {
        self.rho.nrows() - 1
    }
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity `(tr√(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let s = hermitian_sqrt(rho);
    let m = &s * sigma * &s;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    m.symmetric_eigen().eigenvalues.iter().map(|x| x.max(0.0).sqrt()).sum::<f64>().powi(2)
}

/// Control sequence for [`store_retrieve`]: `cot θ(t)` drops from
/// `cot_max` to 0 around `t_off` and recovers around `t_on`,
/// `cot θ = cot_max·(1 − ½tanh[rate(t − t_off)] + ½tanh[rate(t − t_on)])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageProtocol {
    /// Collective coupling `g√N`.
    pub g_sqrt_n: f64,
    pub gamma: f64,
    pub cot_max: f64,
    pub rate: f64,
    pub t_off: f64,
    pub t_on: f64,
    pub t_end: f64,
    /// Largest RK4 step.
    pub max_step: f64,
}

impl Default for StorageProtocol {
    fn default() -> Self {
        Self {
            g_sqrt_n: 10.0,
            gamma: 1.0,
            cot_max: 40.0,
            rate: 0.2,
            t_off: 30.0,
            t_on: 100.0,
            t_end: 130.0,
            max_step: 1e-3,
        }
    }
}

impl StorageProtocol {
    pub fn cot_theta(&self, t: f64) -> f64 {
        self.cot_max * (1.0 - 0.5 * (self.rate * (t - self.t_off)).tanh() + 0.5 * (self.rate * (t - self.t_on)).tanh())
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.g_sqrt_n * self.cot_theta(t)
    }

    /// `γ∫θ̇²/(g²N + Ω²)dt` over the protocol.
    pub fn rotation_margin(&self) -> f64 {
        let theta = |t: f64| (1.0 / self.cot_theta(t)).atan();
        let h = 1e-4;
        let integrand = |t: f64| {
            let rate = (theta(t + h) - theta(t - h)) / (2.0 * h);
            let om = self.omega(t);
            rate * rate / (self.g_sqrt_n.powi(2) + om * om)
        };
        self.gamma * crate::quad::simpson(integrand, 0.0, self.t_end, 20_000)
    }

    fn validate(&self) -> Result<()> {
        let vals = [self.g_sqrt_n, self.gamma, self.cot_max, self.rate, self.t_end, self.max_step];
        if vals.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParameter("storage protocol parameters must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Matrix element `(row, column, coefficient)`.
type Coupling = (usize, usize, f64);

/// Symmetric three-level basis of one excitation sector:
/// `(n_a, n_c)` with photons `K − n_a − n_c`.
struct Sector {
    k: usize,
    states: Vec<(usize, usize)>,
}

impl Sector {
    fn new(k: usize, n_atoms: usize) -> Self {
        let mut states = Vec::new();
        for na in 0..=k.min(n_atoms) {
            for nc in 0..=(k - na).min(n_atoms - na) {
                states.push((na, nc));
            }
        }
        Self { k, states }
    }

    fn find(&self, na: usize, nc: usize) -> Option<usize> {
        self.states.iter().position(|&s| s == (na, nc))
    }

    /// Couplings `(i, j, coefficient)` of `H = g(aA†B + h.c.) + Ω(A†C + h.c.)`
    /// without the factors g and Ω.
    fn couplings(&self, n_atoms: usize) -> (Vec<Coupling>, Vec<Coupling>) {
        let mut gs = Vec::new();
        let mut os = Vec::new();
        for (i, &(na, nc)) in self.states.iter().enumerate() {
            let p = self.k - na - nc;
            let nb = n_atoms - na - nc;
            if p > 0 && nb > 0 {
                if let Some(j) = self.find(na + 1, nc) {
                    gs.push((j, i, (p as f64).sqrt() * ((na + 1) as f64).sqrt() * (nb as f64).sqrt()));
                }
            }
            if nc > 0 {
                if let Some(j) = self.find(na + 1, nc - 1) {
                    os.push((j, i, ((na + 1) as f64).sqrt() * (nc as f64).sqrt()));
                }
            }
        }
        (gs, os)
    }
}

/// Outcome of [`store_retrieve`].
#[derive(Debug, Clone, Serialize)]
pub struct StoreRetrieveReport {
    pub n_atoms: usize,
    /// Uhlmann fidelity between the input and the retrieved field.
    pub fidelity: f64,
    /// Uhlmann fidelity between the input and the spin-wave state halfway
    /// through storage (photon vacuum, `|c^n⟩` amplitudes with the sign
    /// `(−1)^n` of the dark state removed).
    pub storage_fidelity: f64,
    /// Trace of the retrieved field density matrix.
    pub retained: f64,
    /// Adiabaticity margin `γ∫θ̇²/(g²N + Ω²)dt`.
    pub rotation_margin: f64,
    /// True when the margin exceeds 0.1.
    pub margin_flagged: bool,
    /// Largest weight found outside the initial excitation sector.
    pub cross_sector_leak: f64,
    /// Retrieved density matrix, row-major `[re, im]` pairs.
    pub output: Vec<Vec<[f64; 2]>>,
}

/// Write a field state into `N` atoms and read it back with the protocol.
///
/// Each photon-number sector `|n⟩|b…b⟩` is evolved on its own: the
/// Hamiltonian conserves `K = photons + n_a + n_c`, so the sectors are
/// exactly decoupled. The retrieved photon density matrix is left
/// sub-normalized by the spontaneous-emission loss.
pub fn store_retrieve(
    rho_f: &StoredDensityMatrix,
    n_atoms: usize,
    protocol: &StorageProtocol,
) -> Result<(StoredDensityMatrix, StoreRetrieveReport)> {
    protocol.validate()?;
    let n_max = rho_f.n_max();
    if n_max >= n_atoms {
        return Err(Error::InvalidParameter(format!("photon cutoff {n_max} must be below N = {n_atoms}")));
    }
    let g = protocol.g_sqrt_n / (n_atoms as f64).sqrt();
    let t_mid = 0.5 * (protocol.t_off + protocol.t_on);

    let mut finals = Vec::with_capacity(n_max + 1);
    let mut mids = Vec::with_capacity(n_max + 1);
    let mut sectors = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        let sector = Sector::new(k, n_atoms);
        let (gs, os) = sector.couplings(n_atoms);
        let dim = sector.states.len();
        let mut psi = vec![C64::default(); dim];
        psi[sector.find(0, 0).expect("photon-only state present")] = C64::new(1.0, 0.0);
        let deriv = |t: f64, y: &[C64], out: &mut [C64]| {
            let om = protocol.omega(t);
            for (o, (&(na, _), &yi)) in out.iter_mut().zip(sector.states.iter().zip(y)) {
                // −i·(−iγ n_a) = −γ n_a
                *o = yi * (-protocol.gamma * na as f64);
            }
            for &(i, j, c) in &gs {
                out[i] += C64::new(0.0, -g * c) * y[j];
                out[j] += C64::new(0.0, -g * c) * y[i];
            }
            for &(i, j, c) in &os {
                out[i] += C64::new(0.0, -om * c) * y[j];
                out[j] += C64::new(0.0, -om * c) * y[i];
            }
        };
        let mut deriv = deriv;
        let bound = |t: f64| {
            protocol.gamma * k as f64
                + g * (k.max(1) as f64) * (n_atoms as f64).sqrt()
                + protocol.omega(t) * (k.max(1) as f64) * 2.0
        };
        let mut t = 0.0;
        let mut mid = None;
        while t < protocol.t_end - 1e-12 {
            let mut h = protocol.max_step.min(0.2 / bound(t)).min(protocol.t_end - t);
            if mid.is_none() && t + h >= t_mid {
                h = (t_mid - t).max(1e-15);
            }
            crate::ode::rk4_step(&mut deriv, t, &mut psi, h);
            t += h;
            if mid.is_none() && (t - t_mid).abs() < 1e-12 {
                mid = Some(psi.clone());
            }
        }
        mids.push(mid.unwrap_or_else(|| psi.clone()));
        finals.push(psi);
        sectors.push(sector);
    }

    // ρ_out[p][p'] = Σ_{n,m} ρ_nm Σ_{atoms} ψ_n(p, atoms) ψ_m(p', atoms)*
    let rho = rho_f.matrix();
    let mut out = DMatrix::<C64>::zeros(n_max + 1, n_max + 1);
    let mut stored = DMatrix::<C64>::zeros(n_max + 1, n_max + 1);
    for n in 0..=n_max {
        for m in 0..=n_max {
            let r = rho[(n, m)];
            if r == C64::default() {
                continue;
            }
            for (i, &(na, nc)) in sectors[n].states.iter().enumerate() {
                let Some(j) = sectors[m].find(na, nc) else { continue };
                let (p, q) = (n - na - nc, m.checked_sub(na + nc));
                let Some(q) = q else { continue };
                out[(p, q)] += r * finals[n][i] * finals[m][j].conj();
            }
            // spin-wave amplitude of |0 photons, n_c = n⟩
            let a = sectors[n].find(0, n).map(|i| mids[n][i]).unwrap_or_default();
            let b = sectors[m].find(0, m).map(|i| mids[m][i]).unwrap_or_default();
            let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
            stored[(n, m)] = r * a * b.conj() * sign;
        }
    }
    let fidelity = uhlmann_fidelity(rho, &out);
    let storage_fidelity = uhlmann_fidelity(rho, &stored);
    let retained = out.trace().re;
    let margin = protocol.rotation_margin();
    let report = StoreRetrieveReport {
        n_atoms,
        fidelity,
        storage_fidelity,
        retained,
        rotation_margin: margin,
        margin_flagged: margin > 0.1,
        cross_sector_leak: 0.0,
        output: (0..=n_max).map(|i| (0..=n_max).map(|j| [out[(i, j)].re, out[(i, j)].im]).collect()).collect(),
    };
    // Hermitize and renormalize for the validated return value.
    let herm = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    let tr = herm.trace();
    if tr.norm() == 0.0 {
        return Err(Error::InvalidParameter("retrieved field has vanished".into()));
    }
    Ok((StoredDensityMatrix::new(herm / tr)?, report))
}

/// Single-atom error channel used by [`decoherence_fidelity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipModel {
    /// `σ_cb^j`, |b⟩ → |c⟩; the flipped state is renormalized.
    #[default]
    Raise,
    /// `σ_bc^j`, |c⟩ → |b⟩.
    Lower,
    /// `σ_x^j`, exchanging |b⟩ and |c⟩.
    Exchange,
    /// `σ_z^j`, a relative phase π on |c⟩.
    Dephase,
}

fn apply_flip(state: &CollectiveState, j: usize, model: FlipModel) -> CollectiveState {
    match model {
        FlipModel::Raise => state.sigma(j, Direction::Create),
        FlipModel::Lower => state.sigma(j, Direction::Annihilate),
        FlipModel::Exchange => {
            let mut s = state.sigma(j, Direction::Create);
            s.axpy(C64::new(1.0, 0.0), &state.sigma(j, Direction::Annihilate));
            s
        }
        FlipModel::Dephase => {
            let mut s = state.clone();
            let bit = 1usize << (j - 1);
            for (idx, x) in s.amp.iter_mut().enumerate() {
                if idx & bit != 0 {
                    *x = -*x;
                }
            }
            s
        }
    }
}

/// Class distribution of `|D,n⟩` at θ = π/2 after errors on atoms `1..=f`;
/// `None` when the error annihilates the state.
pub fn flipped_class_distribution(
    n_atoms: usize,
    n: usize,
    flips: usize,
    model: FlipModel,
) -> Result<Option<Vec<f64>>> {
    let mut s = CollectiveState::dark(n_atoms, n, n, FRAC_PI_2)?;
    for j in 1..=flips {
        s = apply_flip(&s, j, model);
    }
    match s.normalized() {
        Some(s) => Ok(Some(equivalence_class_projector(&s, FRAC_PI_2)?)),
        None => Ok(None),
    }
}

/// Leak out of the class of `|D,n⟩` (θ = π/2) after one forced `σ_cb^j`,
/// averaged over `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForcedFlipLeak {
    pub n_atoms: usize,
    /// Weight `|d_Ψ|²` of the dark-creation channel in the mode expansion
    /// of `σ_cb^j`.
    pub channel_weight: f64,
    /// Out-of-class probability of the normalized flipped state.
    pub state_leak: f64,
    /// Out-of-class weight before renormalization.
    pub unnormalized_leak: f64,
}

pub fn forced_flip_leak(n_atoms: usize, n: usize) -> Result<ForcedFlipLeak> {
    let dark = CollectiveState::dark(n_atoms, n, n, FRAC_PI_2)?;
    let (mut channel, mut state_leak, mut raw) = (0.0, 0.0, 0.0);
    for j in 1..=n_atoms {
        let (d_psi, _) = flip_mode_coefficients(n_atoms, j);
        channel += d_psi.norm_sqr();
        let flipped = spin_flip(&dark, j)?;
        let norm = flipped.norm_sqr();
        let dist = class_components(&flipped, FRAC_PI_2)?;
        let stay = dist.get(n).map(|c| c.norm_sqr()).unwrap_or(0.0);
        raw += norm - stay;
        state_leak += 1.0 - stay / norm;
    }
    let k = n_atoms as f64;
    Ok(ForcedFlipLeak { n_atoms, channel_weight: channel / k, state_leak: state_leak / k, unnormalized_leak: raw / k })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceParams {
    pub n_atoms: usize,
    /// Stored dark-excitation number.
    pub n: usize,
    /// Per-atom error probability.
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub model: FlipModel,
}

/// Monte Carlo estimate of the memory fidelity under independent errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceReport {
    pub params: DecoherenceParams,
    pub mean_fidelity: f64,
    /// Half width of the 95% confidence interval.
    pub ci_half_width: f64,
    pub ci: [f64; 2],
    /// Mean class distribution over trials.
    pub class_distribution: Vec<f64>,
    /// Number of trials with each count of errors.
    pub error_histogram: Vec<usize>,
}

/// Fidelity of `|D,n⟩` stored at θ = π/2 when each atom independently
/// suffers an error with probability `p`.
///
/// The fidelity of a trial is the probability of remaining in class `n`
/// (ideal retrieval within a class). Trial `i` draws from the ChaCha20
/// stream `i` of `seed`.
pub fn decoherence_fidelity(params: &DecoherenceParams) -> Result<DecoherenceReport> {
    let DecoherenceParams { n_atoms, n, p, trials, seed, model } = params.clone();
    if trials < MIN_TRIALS {
        return Err(Error::TooFewTrials { min: MIN_TRIALS, got: trials });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("error probability {p} outside [0, 1]")));
    }
    if !(2..=MAX_ATOMS).contains(&n_atoms) || n >= n_atoms {
        return Err(Error::InvalidParameter(format!("need 2 ≤ N ≤ {MAX_ATOMS} and n < N, got N = {n_atoms}, n = {n}")));
    }
    // By permutation symmetry the outcome depends only on the error count.
    let mut cache: Vec<Option<Option<Vec<f64>>>> = vec![None; n_atoms + 1];
    let mut histogram = vec![0usize; n_atoms + 1];
    let mut fids = Vec::with_capacity(trials);
    let mut dist_sum = vec![0.0; n_atoms + n + 1];
    for trial in 0..trials {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let f = (0..n_atoms).filter(|_| rng.random_bool(p)).count();
        histogram[f] += 1;
        if cache[f].is_none() {
            cache[f] = Some(flipped_class_distribution(n_atoms, n, f, model)?);
        }
        match cache[f].as_ref().unwrap() {
            Some(dist) => {
                fids.push(dist.get(n).copied().unwrap_or(0.0));
                for (acc, x) in dist_sum.iter_mut().zip(dist) {
                    *acc += x;
                }
            }
            None => fids.push(0.0),
        }
    }
    let t = trials as f64;
    let mean = fids.iter().sum::<f64>() / t;
    let var = fids.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let half = 1.96 * (var / t).sqrt();
    while dist_sum.len() > 1 && *dist_sum.last().unwrap() == 0.0 {
        dist_sum.pop();
    }
    Ok(DecoherenceReport {
        params: params.clone(),
        mean_fidelity: mean,
        ci_half_width: half,
        ci: [mean - half, mean + half],
        class_distribution: dist_sum.iter().map(|x| x / t).collect(),
        error_histogram: histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dark_coefficient_examples() {
        let th = 0.3;
        let c = dark_state_coefficients(1, th, 5).unwrap();
        assert!((c[0] - th.cos()).abs() < 1e-15 && (c[1] + th.sin()).abs() < 1e-15);
        assert_eq!(dark_state_coefficients(3, 0.0, 5).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        let c = dark_state_coefficients(2, PI / 4.0, 5).unwrap();
        let r = 0.5f64.sqrt();
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] + r).abs() < 1e-15 && (c[2] - 0.5).abs() < 1e-15);
        assert!(dark_state_coefficients(5, 0.1, 5).is_err());
    }

    proptest! {
        #[test]
        fn dark_coefficients_normalized(n_atoms in 2usize..40, n in 0usize..39, th in 0.0f64..=FRAC_PI_2) {
            prop_assume!(n < n_atoms);
            let c = dark_state_coefficients(n, th, n_atoms).unwrap();
            let s: f64 = c.iter().map(|x| x * x).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_dark_excitation_from_creation_operator() {
        let th = 0.7;
        let g = CollectiveState::ground(6, 2).unwrap();
        let one = apply_dark_creation(&g, th).unwrap();
        let d = CollectiveState::dark(6, 2, 1, th).unwrap();
        assert!(close(one.inner(&d), C64::new(1.0, 0.0), 1e-12));
        assert!((one.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dark_excitations_deviate_at_finite_n() {
        // (Ψ†)²|b,0⟩/√2 carries a factor √((N−1)/N) on |c²,0⟩
        let n_atoms = 6;
        let th = FRAC_PI_2;
        let g = CollectiveState::ground(n_atoms, 2).unwrap();
        let mut two = apply_dark_creation(&apply_dark_creation(&g, th).unwrap(), th).unwrap();
        two.scale(C64::new(0.5f64.sqrt(), 0.0));
        let c2 = CollectiveState::dicke(n_atoms, 2, 2, 0).unwrap();
        let amp = c2.inner(&two).re;
        assert!((amp - ((n_atoms - 1) as f64 / n_atoms as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spin_wave_at_right_angle() {
        let g = CollectiveState::ground(5, 1).unwrap();
        let s = apply_dark_creation(&g, FRAC_PI_2).unwrap();
        let c1 = CollectiveState::dicke(5, 1, 1, 0).unwrap();
        assert!(close(s.inner(&c1), C64::new(-1.0, 0.0), 1e-12));
    }

    #[test]
    fn commutator_close_to_one_for_few_excitations() {
        let n_atoms = 12;
        let th = 0.9;
        let d = CollectiveState::dark(n_atoms, 2, 1, th).unwrap();
        let a = apply_dark_annihilation(&apply_dark_creation(&d, th).unwrap(), th).unwrap();
        let b = apply_dark_creation(&apply_dark_annihilation(&d, th).unwrap(), th).unwrap();
        let mut comm = a;
        comm.axpy(C64::new(-1.0, 0.0), &b);
        let expect = d.inner(&comm).re;
        assert!((expect - 1.0).abs() < 3.0 / n_atoms as f64);
    }

    #[test]
    fn flip_decomposition_is_exact() {
        for n_atoms in [4usize, 5, 7] {
            // a generic state with up to 2 excitations
            let mut s = CollectiveState::zeros(n_atoms, 2).unwrap();
            for (i, x) in s.amp.iter_mut().take(2 << n_atoms).enumerate() {
                *x = C64::new(((i * 7 + 3) % 11) as f64 - 5.0, ((i * 5 + 1) % 13) as f64 - 6.0);
            }
            for j in 1..=n_atoms {
                let direct = spin_flip(&s, j).unwrap();
                let (d_psi, d) = flip_mode_coefficients(n_atoms, j);
                let mut sum = apply_dark_creation(&s, FRAC_PI_2).unwrap();
                sum.scale(d_psi);
                for (l, dl) in d.iter().enumerate() {
                    sum.axpy(*dl, &apply_bright_mode(&s, l + 1, FRAC_PI_2, Direction::Create).unwrap());
                }
                let err = direct.amp.iter().zip(&sum.amp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "N={n_atoms} j={j} err={err}");
            }
        }
    }

    #[test]
    fn flip_amplitudes_for_four_atoms() {
        let (d_psi, d) = flip_mode_coefficients(4, 2);
        assert!(close(d_psi, C64::new(-0.5, 0.0), 1e-15));
        for (l, dl) in d.iter().enumerate() {
            let expect = C64::from_polar(0.5, -2.0 * PI * ((l + 1) * 2) as f64 / 4.0);
            assert!(close(*dl, expect, 1e-15));
        }
    }

    #[test]
    fn mode_transform_is_unitary() {
        let n_atoms = 6;
        let th = 0.4;
        let g = CollectiveState::ground(n_atoms, 1).unwrap();
        let mut modes = vec![apply_dark_creation(&g, th).unwrap()];
        for l in 0..n_atoms {
            modes.push(apply_bright_mode(&g, l, th, Direction::Create).unwrap());
        }
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(close(a.inner(b), C64::new(expect, 0.0), 1e-12));
            }
        }
    }

    #[test]
    fn classes_of_dark_and_bright_states() {
        let n_atoms = 6;
        for th in [FRAC_PI_2, 0.6] {
            for n in 0..=2 {
                let d = CollectiveState::dark(n_atoms, 3, n, th).unwrap();
                let dist = equivalence_class_projector(&d, th).unwrap();
                assert!((dist[n] - 1.0).abs() < 1e-12, "θ={th} n={n} {dist:?}");
            }
        }
        let d = CollectiveState::dark(n_atoms, 2, 1, FRAC_PI_2).unwrap();
        for l in 1..n_atoms {
            let b = apply_bright_mode(&d, l, FRAC_PI_2, Direction::Create).unwrap();
            let dist = equivalence_class_projector(&b, FRAC_PI_2).unwrap();
            assert!((dist[1] - 1.0).abs() < 1e-12, "l={l} {dist:?}");
        }
    }

    #[test]
    fn forced_flip_leak_values() {
        for n_atoms in [4usize, 7, 10] {
            let leak = forced_flip_leak(n_atoms, 1).unwrap();
            let k = n_atoms as f64;
            assert!((leak.channel_weight - 1.0 / k).abs() < 1e-12);
            assert!((leak.state_leak - 2.0 / k).abs() < 1e-12);
            assert!((leak.unnormalized_leak - 2.0 * (k - 1.0) / (k * k)).abs() < 1e-12);
        }
    }

    #[test]
    fn ten_atom_flip_distribution() {
        let d = CollectiveState::dark(10, 1, 1, FRAC_PI_2).unwrap();
        let f = spin_flip(&d, 3).unwrap().normalized().unwrap();
        let dist = equivalence_class_projector(&f, FRAC_PI_2).unwrap();
        assert!((dist[1] - 0.8).abs() < 1e-12 && (dist[2] - 0.2).abs() < 1e-12, "{dist:?}");
    }

    #[test]
    fn bright_decay_keeps_classes() {
        let n_atoms = 6;
        let th = FRAC_PI_2;
        let d = CollectiveState::dark(n_atoms, 2, 1, th).unwrap();
        let unchanged = bright_mode_decay(&d, th, 2.0, 1.0, 0.3).unwrap();
        assert!(close(unchanged.inner(&d), C64::new(1.0, 0.0), 1e-12));

        let bright = apply_bright_mode(&d, 2, th, Direction::Create).unwrap();
        let decayed = bright_mode_decay(&bright, th, 2.0, 1.0, 0.3).unwrap();
        let ratio = decayed.norm_sqr() / bright.norm_sqr();
        assert!((ratio - (-2.0 * 4.0 * 0.3f64).exp()).abs() < 1e-12);

        let mut mixed = d.clone();
        mixed.axpy(C64::new(0.3, 0.2), &bright);
        let mixed = mixed.normalized().unwrap();
        let before = equivalence_class_projector(&mixed, th).unwrap();
        let after = bright_mode_decay(&mixed, th, 2.0, 1.0, 0.3).unwrap().normalized().unwrap();
        let after = equivalence_class_projector(&after, th).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn compressed_and_full_agree() {
        let s = SymmetricState::dark(7, 3, 3, 0.8).unwrap();
        let full = s.to_full().unwrap();
        let direct = CollectiveState::dark(7, 3, 3, 0.8).unwrap();
        let err = full.amp.iter().zip(&direct.amp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        let back = SymmetricState::from_full(&full).unwrap();
        for (r1, r2) in back.amp.iter().zip(&s.amp) {
            for (a, b) in r1.iter().zip(r2) {
                assert!(close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn density_matrix_validation_and_fidelity() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.0, 0.6);
        assert!(StoredDensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = C64::new(0.0, -0.6);
        assert!(StoredDensityMatrix::new(m.clone()).is_err()); // eigenvalue −0.1
        m[(0, 1)] = C64::new(0.0, 0.4);
        m[(1, 0)] = C64::new(0.0, -0.4);
        let rho = StoredDensityMatrix::new(m).unwrap();
        assert!((uhlmann_fidelity(rho.matrix(), rho.matrix()) - 1.0).abs() < 1e-12);
        let a = StoredDensityMatrix::fock(0, 1).unwrap();
        let b = StoredDensityMatrix::fock(1, 1).unwrap();
        assert!(uhlmann_fidelity(a.matrix(), b.matrix()).abs() < 1e-12);
    }

    #[test]
    fn vacuum_round_trip_is_identity() {
        let rho = StoredDensityMatrix::fock(0, 1).unwrap();
        let (out, report) = store_retrieve(&rho, 8, &StorageProtocol::default()).unwrap();
        assert!((report.fidelity - 1.0).abs() < 1e-12);
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_edge_cases() {
        let mut p = DecoherenceParams { n_atoms: 6, n: 1, p: 0.0, trials: 200, seed: 7, model: FlipModel::Raise };
        let r = decoherence_fidelity(&p).unwrap();
        assert!((r.mean_fidelity - 1.0).abs() < 1e-12);
        p.trials = 50;
        assert!(matches!(decoherence_fidelity(&p), Err(Error::TooFewTrials { .. })));
        p.trials = 300;
        p.p = 0.2;
        let a = decoherence_fidelity(&p).unwrap();
        let b = decoherence_fidelity(&p).unwrap();
        assert_eq!(a, b);
    }
}
