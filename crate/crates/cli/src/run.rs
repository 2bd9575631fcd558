// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario execution and artifact layout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use lightstore::cavity::{evolve, stirap_transfer, CavityParams, TripletAmplitudes};
use lightstore::collective::{decoherence_fidelity, forced_flip_leak};
use lightstore::export::{self, write_csv, CSV_SCHEMA};
use lightstore::medium::{transmission_spectrum, transparency_fwhm, transparency_width, MediumParams};
use lightstore::polariton::{
    adiabaticity_report, correction_integrals, polariton_of, scenario_bandwidth_check, AdiabaticityReport,
};
use lightstore::presets;
use lightstore::schedule::{ControlSchedule, Domain, Profile, Quantity};
use lightstore::solver::{analytic_time_profile, relative_l2, run, RunOutput, Scenario};
use lightstore::C64;
use serde::Serialize;

use crate::scenario::*;
use crate::Failure;

/// Version of the `summary.json` layout.
pub const SUMMARY_SCHEMA: u32 = 1;

pub const SUMMARY_FILE: &str = "summary.json";
pub const MARGINS_FILE: &str = "margins.log";

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema: u32,
    pub csv_schema: u32,
    pub name: String,
    pub kind: &'static str,
    pub seed: u64,
    /// Keyed `module.metric`; non-finite values are written as `null`.
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

#[derive(Default)]
struct Report {
    metrics: BTreeMap<String, f64>,
    margins: String,
    artifacts: Vec<String>,
}

impl Report {
    fn metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    fn csv<I>(&mut self, dir: &Path, name: &str, header: &[&str], rows: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        write_csv(&dir.join(name), header, rows)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn margins(&mut self, report: &AdiabaticityReport) {
        let mut log = String::from("# adiabaticity margins; a margin passes iff 10·value ≤ 1\n");
        for m in [&report.spreading, &report.rotation, &report.absorption, &report.switching] {
            let _ = writeln!(log, "{} {:e} {}", m.name, m.value, if m.pass { "pass" } else { "FAIL" });
            self.metric(format!("polariton.margin.{}", m.name), m.value);
        }
        let _ = writeln!(log, "all {}", if report.all_pass() { "pass" } else { "FAIL" });
        self.metric("polariton.adiabatic", f64::from(u8::from(report.all_pass())));
        self.margins = log;
    }
}

static STAGING: AtomicU64 = AtomicU64::new(0);

/// Run `file` and place its artifacts under `root`. Returns the artifact
/// directory. Nothing is left behind on failure.
pub fn run_scenario(file: &ScenarioFile, root: &Path) -> Result<PathBuf, Failure> {
    let target = root.join(file.output_dir());
    let parent = target.parent().unwrap_or(root).to_path_buf();
    fs::create_dir_all(&parent)?;
    let leaf = target.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let staging =
        parent.join(format!(".{leaf}.partial-{}-{}", std::process::id(), STAGING.fetch_add(1, Ordering::Relaxed)));
    fs::create_dir(&staging)?;
    let result = execute(file, &staging).and_then(|report| finish(file, &staging, report));
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if target.exists() {
        fs::remove_dir_all(&target)?;
    }
    fs::rename(&staging, &target)?;
    Ok(target)
}

fn finish(file: &ScenarioFile, dir: &Path, mut report: Report) -> Result<(), Failure> {
    if report.margins.is_empty() {
        report.margins = "# no control schedule in this scenario\n".into();
    }
    fs::write(dir.join(MARGINS_FILE), &report.margins)?;
    report.artifacts.push(MARGINS_FILE.into());
    report.artifacts.push(SUMMARY_FILE.into());
    report.artifacts.sort();
    let summary = Summary {
        schema: SUMMARY_SCHEMA,
        csv_schema: CSV_SCHEMA,
        name: file.name.clone(),
        kind: file.kind.name(),
        seed: file.seed,
        metrics: report.metrics,
        artifacts: report.artifacts,
    };
    export::write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(())
}

fn execute(file: &ScenarioFile, dir: &Path) -> Result<Report, Failure> {
    match &file.params {
        Params::Spectrum(p) => spectrum(p, dir),
        Params::Stop(p) => stop(p, dir),
        Params::SuddenSwitch(p) => sudden_switch(p, dir),
        Params::Roadblock(p) => roadblock(p, dir),
        Params::CavityStirap(p) => cavity(p, dir),
        Params::MemoryDecoherence(p) => memory(p, file.seed, dir),
        Params::AdiabaticityAudit(p) => audit(p, dir),
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Validation(msg()))
    }
}

fn spectrum(p: &SpectrumParams, dir: &Path) -> Result<Report, Failure> {
    let m = MediumParams::from_opacity(p.opacity, p.eta_kc_over_gamma, p.gamma, p.c)?;
    check(!p.group_velocities.is_empty(), || "group_velocities is empty".into())?;
    check(p.points >= 3 && p.span > 0.0, || "need points ≥ 3 and span > 0".into())?;
    let mut r = Report::default();
    let mut rows = Vec::new();
    let mut fit = Vec::new();
    for (i, &v) in p.group_velocities.iter().enumerate() {
        check(v > 0.0 && v < m.c(), || format!("group velocity {v} outside (0, c)"))?;
        let omega = (m.gn2() * v / (m.c() - v)).sqrt();
        let width = transparency_width(omega, &m)?;
        let half = p.span * width;
        let deltas: Vec<f64> = (0..p.points).map(|k| -half + 2.0 * half * k as f64 / (p.points - 1) as f64).collect();
        let t = transmission_spectrum(&deltas, omega, &m)?;
        let fwhm = transparency_fwhm(&deltas, &t).unwrap_or(f64::NAN);
        let key = |s: &str| format!("medium.curve{i}.{s}");
        r.metric(key("v_gr"), v);
        r.metric(key("omega_c"), omega);
        r.metric(key("transparency_width"), width);
        r.metric(key("fwhm"), fwhm);
        r.metric(key("fwhm_over_width"), fwhm / width);
        r.metric(key("transmission_at_resonance"), t[p.points / 2]);
        r.metric(key("group_delay"), m.length() / v);
        fit.push((v.ln(), fwhm.ln()));
        rows.extend(deltas.iter().zip(&t).map(|(&d, &tr)| vec![v, omega, d, tr]));
    }
    if fit.len() >= 2 {
        let n = fit.len() as f64;
        let (mx, my) = (fit.iter().map(|f| f.0).sum::<f64>() / n, fit.iter().map(|f| f.1).sum::<f64>() / n);
        let sxy: f64 = fit.iter().map(|f| (f.0 - mx) * (f.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|f| (f.0 - mx).powi(2)).sum();
        r.metric("medium.fwhm_vs_v_gr_slope", sxy / sxx);
    }
    r.metric("medium.delay_ratio_bound", m.opacity().sqrt());
    r.csv(dir, "spectrum.csv", &["v_gr", "omega_c", "delta", "transmission"], rows)?;
    Ok(r)
}

fn with_courant(mut s: Scenario, courant: f64) -> Result<Scenario, Failure> {
    check(courant > 0.0 && courant <= 1.0, || format!("courant {courant} outside (0, 1]"))?;
    s.grid.dt = courant * s.grid.dz() / s.medium.c();
    Ok(s)
}

/// Shared artifacts and metrics of a solver run.
fn propagation(s: &Scenario, out: &RunOutput, stride: usize, dir: &Path) -> Result<Report, Failure> {
    check(stride >= 1, || "csv_stride must be ≥ 1".into())?;
    let mut r = Report::default();
    export::write_field_series(&dir.join("field.csv"), &s.grid, &out.snapshots, stride)?;
    export::write_spin_series(&dir.join("spin.csv"), &s.grid, &out.snapshots, s.atom_number, stride)?;
    let pol = out.snapshots.iter().map(|st| polariton_of(st, s)).collect::<Result<Vec<_>, _>>()?;
    export::write_polariton_series(&dir.join("polariton.csv"), &s.grid, &pol, stride)?;
    r.artifacts.extend(["field.csv", "spin.csv", "polariton.csv"].map(String::from));

    let (first, last) = (&out.diagnostics[0], out.diagnostics.last().expect("diagnostics are never empty"));
    r.metric("solver.peak_ratio", last.peak / first.peak);
    r.metric("solver.energy_ratio", last.field_energy / first.field_energy);
    r.metric("solver.excitation_ratio", last.excitation / first.excitation);
    r.metric("solver.final_centroid", last.centroid);
    r.metric("solver.weak_probe_max", out.weak_probe_max);
    let drift =
        out.diagnostics.iter().map(|d| (d.polariton_norm / first.polariton_norm - 1.0).abs()).fold(0.0, f64::max);
    r.metric("polariton.norm_drift", drift);
    r.margins(&adiabaticity_report(s));
    Ok(r)
}

fn stop(p: &StopParams, dir: &Path) -> Result<Report, Failure> {
    let m = MediumParams::from_opacity(p.opacity, p.eta_kc_over_gamma, 1.0, 1.0)?;
    let s = with_courant(presets::stop_and_retrieve_with(m, p.rate, p.nz)?, p.courant)?;
    let out = run(&s)?;
    let mut r = propagation(&s, &out, p.csv_stride, dir)?;
    r.metric("solver.round_trip_amplitude_ratio", r.metrics["solver.peak_ratio"]);
    // distance from the shape-preserving solution at the final snapshot
    let last = out.snapshots.last().expect("final snapshot is always recorded");
    let cos = s.theta(0.0, last.t).cos();
    let env = |z: f64| C64::new(cos * (-(z / 10.0).powi(2)).exp(), 0.0);
    let reference = analytic_time_profile(&env, &|t| s.group_velocity(0.0, t), &s.grid.zs(), last.t);
    r.metric("solver.final_relative_l2", relative_l2(&last.e, &reference));
    let integrals = correction_integrals(&s.control, &s.medium, 0.0, s.grid.t_end)?;
    r.metric("polariton.predicted_loss", integrals.predicted_loss());
    Ok(r)
}

fn sudden_switch(p: &SwitchParams, dir: &Path) -> Result<Report, Failure> {
    let s = with_courant(presets::switch(p.cot_theta, p.rate, p.nz)?, p.courant)?;
    let out = run(&s)?;
    let mut r = propagation(&s, &out, p.csv_stride, dir)?;
    r.metric("solver.retrieved_energy_fraction", r.metrics["solver.energy_ratio"]);
    Ok(r)
}

fn roadblock(p: &RoadblockParams, dir: &Path) -> Result<Report, Failure> {
    check(p.snapshot_every > 0.0, || "snapshot_every must be > 0".into())?;
    let s = with_courant(presets::roadblock(p.nz)?, p.courant)?;
    let out = run(&s)?;
    let d0 = &out.diagnostics[0];
    let min_width = out.diagnostics.iter().map(|d| d.rms_width / d0.rms_width).fold(f64::INFINITY, f64::min);

    // Excitation never grows, so flux through the exit plus what is still
    // upstream bounds the eventual transmission.
    let exit = s.grid.nearest(presets::ROADBLOCK_EXIT);
    let dtp = out.probe_times[1] - out.probe_times[0];
    let flux = out.probe_traces[0].iter().map(|e| e.norm_sqr()).sum::<f64>() * dtp * s.medium.c();
    let last = out.snapshots.last().expect("final snapshot is always recorded");
    let upstream = (0..exit).map(|i| last.e[i].norm_sqr() + last.p[i].norm_sqr() + last.s[i].norm_sqr()).sum::<f64>()
        * s.grid.dz();

    let every = (p.snapshot_every / 0.25).round().max(1.0) as usize;
    let kept = RunOutput {
        snapshots: out.snapshots.iter().step_by(every).cloned().collect(),
        diagnostics: out.diagnostics.clone(),
        ..out.clone()
    };
    let mut r = propagation(&s, &kept, p.csv_stride, dir)?;
    r.metric("solver.min_width_ratio", min_width);
    r.metric("solver.transmitted_fraction_bound", (flux + upstream) / d0.excitation);
    let rows = out.probe_times.iter().zip(&out.probe_traces[0]).map(|(&t, e)| vec![t, e.re, e.im]);
    r.csv(dir, "probe.csv", &["t", "re_e", "im_e"], rows)?;
    Ok(r)
}

fn cavity(p: &StirapParams, dir: &Path) -> Result<Report, Failure> {
    check(!p.ramp_times.is_empty(), || "ramp_times is empty".into())?;
    check(p.samples >= 2, || "samples must be ≥ 2".into())?;
    let mut r = Report::default();
    let mut rows = Vec::new();
    for (i, &ramp) in p.ramp_times.iter().enumerate() {
        check(ramp > 0.0 && ramp.is_finite(), || format!("ramp time {ramp} must be positive and finite"))?;
        let res = stirap_transfer(p.g, p.n, p.gamma, p.omega0, ramp)?;
        r.metric(format!("cavity.ramp{i}.ramp_time"), ramp);
        r.metric(format!("cavity.ramp{i}.transfer"), res.transfer);
        r.metric(format!("cavity.ramp{i}.norm"), res.norm);

        let schedule = ControlSchedule::time(
            Quantity::Rabi,
            Profile::TanhRamp { from: p.omega0, to: 0.0, center: 4.0 * ramp, width: ramp },
        )?;
        let params = CavityParams::new(p.g, p.gamma, 0.0, schedule, p.n)?;
        let t_end = 8.0 * ramp;
        let grid: Vec<f64> = (0..p.samples).map(|k| t_end * k as f64 / (p.samples - 1) as f64).collect();
        let traj = evolve(&params, TripletAmplitudes::ground(), &grid)?;
        rows.extend(
            grid.iter()
                .zip(&traj)
                .map(|(&t, a)| vec![ramp, t, params.omega(t), a.a.norm_sqr(), a.b.norm_sqr(), a.c.norm_sqr()]),
        );
    }
    r.csv(dir, "trajectories.csv", &["ramp_time", "t", "omega", "pop_a", "pop_b", "pop_c"], rows)?;
    Ok(r)
}

fn memory(p: &DecoherenceParams, seed: u64, dir: &Path) -> Result<Report, Failure> {
    let params = lightstore::collective::DecoherenceParams {
        n_atoms: p.n_atoms,
        n: p.n,
        p: p.p,
        trials: p.trials,
        seed,
        model: p.model,
    };
    let rep = decoherence_fidelity(&params)?;
    let mut r = Report::default();
    r.metric("collective.mean_fidelity", rep.mean_fidelity);
    r.metric("collective.ci_half_width", rep.ci_half_width);
    if p.n >= 1 {
        let leak = forced_flip_leak(p.n_atoms, p.n)?;
        r.metric("collective.forced_flip.channel_weight", leak.channel_weight);
        r.metric("collective.forced_flip.state_leak", leak.state_leak);
    }
    let rows = rep.class_distribution.iter().enumerate().map(|(k, &w)| vec![k as f64, w]);
    r.csv(dir, "class_distribution.csv", &["class", "weight"], rows)?;
    let rows = rep.error_histogram.iter().enumerate().map(|(k, &c)| vec![k as f64, c as f64]);
    r.csv(dir, "error_histogram.csv", &["errors", "trials"], rows)?;
    Ok(r)
}

fn preset(kind: Preset, nz: usize) -> lightstore::Result<Scenario> {
    match kind {
        Preset::Stop => presets::stop_and_retrieve(nz),
        Preset::SuddenTotal => presets::sudden_switch_total(nz),
        Preset::SuddenPartial => presets::sudden_switch_partial(nz),
        Preset::SmoothPartial => presets::smooth_switch_partial(nz),
        Preset::Roadblock => presets::roadblock(nz),
        Preset::Narrowing => presets::narrowing(nz),
        Preset::SlowConstant => presets::slow_constant(nz),
    }
}

fn audit(p: &AuditParams, dir: &Path) -> Result<Report, Failure> {
    check(p.samples >= 2, || "samples must be ≥ 2".into())?;
    let s = preset(p.preset, p.nz)?;
    s.validate()?;
    let mut r = Report::default();
    r.margins(&adiabaticity_report(&s));
    let bw = scenario_bandwidth_check(&s)?;
    r.metric("polariton.bandwidth_ratio", bw.ratio);
    r.metric("polariton.bandwidth_pass", f64::from(u8::from(bw.pass)));
    let (a, b) = match s.control.domain {
        Domain::Time => (0.0, s.grid.t_end),
        Domain::Space => (s.grid.z_min, s.grid.z_max),
    };
    let rows = (0..p.samples).map(|k| {
        let x = a + (b - a) * k as f64 / (p.samples - 1) as f64;
        let (c, m) = (&s.control, &s.medium);
        vec![x, c.value(x), c.theta(x, m), c.rabi(x, m), c.group_velocity(x, m)]
    });
    r.csv(dir, "control.csv", &["x", "value", "theta", "rabi", "v_gr"], rows)?;
    Ok(r)
}
