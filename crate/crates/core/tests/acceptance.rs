// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with the measured numbers; the test fails if any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::time::Instant;

use lightstore::cavity::{block_hamiltonian, dark_state, stirap_transfer, CavityParams};
use lightstore::collective::{
    dark_state_coefficients, decoherence_fidelity, forced_flip_leak, CollectiveState, DecoherenceParams, FlipModel,
};
use lightstore::medium::{
    group_quantities, transmission_spectrum, transparency_fwhm, transparency_width, MediumParams,
};
use lightstore::polariton::{
    adiabaticity_report, correction_coeffs, correction_integrals, from_polariton, to_polariton,
};
use lightstore::presets::{self, ROADBLOCK_DURATION, ROADBLOCK_EXIT};
use lightstore::schedule::{ControlSchedule, Profile, Quantity};
use lightstore::solver::{analytic_time_profile, relative_l2, run, Scenario};
use lightstore::spectrum::spectrum_padded;
use lightstore::C64;

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, name: &'static str, checks: &[(bool, String)]) -> Outcome {
    let pass = checks.iter().all(|c| c.0);
    let detail =
        checks.iter().map(|(ok, s)| format!("{}{s}", if *ok { "" } else { "!" })).collect::<Vec<_>>().join("; ");
    Outcome { id, name, pass, detail }
}

fn excitation(s: &Scenario, st: &lightstore::solver::FieldState, upto: usize) -> f64 {
    (0..upto).map(|i| st.e[i].norm_sqr() + st.p[i].norm_sqr() + st.s[i].norm_sqr()).sum::<f64>() * s.grid.dz()
}

fn stop_and_retrieve() -> Outcome {
    let start = Instant::now();
    let s = presets::stop_and_retrieve(4096).unwrap();
    let out = run(&s).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let zs = s.grid.zs();
    let mut worst: f64 = 0.0;
    for snap in out.snapshots.iter().filter(|st| st.t > 1.0) {
        let t = snap.t;
        let cos = s.theta(0.0, t).cos();
        let env = |z: f64| C64::new(cos * (-(z / 10.0).powi(2)).exp(), 0.0);
        let v = |tau: f64| s.group_velocity(0.0, tau);
        let reference = analytic_time_profile(&env, &v, &zs, t);
        worst = worst.max(relative_l2(&snap.e, &reference));
    }
    outcome(
        1,
        "stop-and-retrieve matches the shape-preserving solution",
        &[
            (worst < 0.05, format!("max relative L2 {worst:.4} < 0.05 over t in {{15..60, 90..150}}")),
            (elapsed < 60.0, format!("runtime {elapsed:.1}s < 60s at nz = 4096")),
        ],
    )
}

fn sudden_switch() -> Outcome {
    let total = run(&presets::sudden_switch_total(4096).unwrap()).unwrap();
    let partial = run(&presets::sudden_switch_partial(4096).unwrap()).unwrap();
    let smooth = run(&presets::smooth_switch_partial(4096).unwrap()).unwrap();
    let energy =
        |o: &lightstore::solver::RunOutput| o.diagnostics.last().unwrap().field_energy / o.diagnostics[0].field_energy;
    let retrieved = energy(&total);
    let ratio = partial.diagnostics.last().unwrap().peak / smooth.diagnostics.last().unwrap().peak;
    let deficit = 1.0 - ratio;
    outcome(
        2,
        "sudden switching loses the excitation",
        &[
            (retrieved < 0.05, format!("cos θ 1→0→1: retrieved energy {retrieved:.2e} < 0.05")),
            (
                (deficit - 0.10).abs() <= 0.02,
                format!("cos²θ 0.1 endpoints: amplitude deficit {deficit:.4} vs adiabatic, 0.10 ± 0.02"),
            ),
        ],
    )
}

fn roadblock() -> Outcome {
    let s = presets::roadblock(1500).unwrap();
    let out = run(&s).unwrap();
    let m = &s.medium;
    // power-spectrum FWHM of the pulse as seen by a fixed observer
    let n = 4096;
    let dt = 16.0 * ROADBLOCK_DURATION / n as f64;
    let samples: Vec<C64> = (0..n)
        .map(|k| C64::new((-((k as f64 * dt - 8.0 * ROADBLOCK_DURATION) / ROADBLOCK_DURATION).powi(2)).exp(), 0.0))
        .collect();
    let pulse_bw = spectrum_padded(&samples, dt, 4 * n).unwrap().fwhm;

    let d0 = &out.diagnostics[0];
    let v_ref = s.group_velocity(d0.centroid, 0.0);
    let mut worst: f64 = 0.0;
    let mut tracked = 0;
    let mut min_ratio: f64 = 1.0;
    for d in &out.diagnostics {
        let tr = transparency_width(s.rabi(d.centroid, 0.0), m).unwrap();
        if tr <= pulse_bw {
            break;
        }
        let v_ratio = s.group_velocity(d.centroid, 0.0) / v_ref;
        let compression = d.rms_width / d0.rms_width;
        worst = worst.max((compression / v_ratio - 1.0).abs());
        min_ratio = min_ratio.min(v_ratio);
        tracked += 1;
    }

    // Excitation never grows, so what has crossed the exit plus what is still
    // upstream bounds the eventual transmission.
    let exit = s.grid.nearest(ROADBLOCK_EXIT);
    let dtp = out.probe_times[1] - out.probe_times[0];
    let flux: f64 = out.probe_traces[0].iter().map(|e| e.norm_sqr()).sum::<f64>() * dtp * m.c();
    let n0 = d0.excitation;
    let last = out.snapshots.last().unwrap();
    let bound = (flux + excitation(&s, last, exit)) / n0;
    outcome(
        3,
        "road-block compression then absorption",
        &[
            (
                worst < 0.10 && tracked > 10,
                format!(
                    "Δl/Δl0 vs v/v0 worst {worst:.4} < 0.10 over {tracked} snapshots down to v/v0 = {min_ratio:.3}"
                ),
            ),
            (bound < 0.10, format!("transmitted energy ≤ {bound:.4} < 0.10")),
        ],
    )
}

fn eit_spectra() -> Outcome {
    let m = presets::reference_medium();
    let omegas: Vec<f64> = (0..=10).map(|k| 10f64.powf(-1.0 + k as f64 / 10.0)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut t0_err: f64 = 0.0;
    for &om in &omegas {
        let scale = om * om / m.opacity().sqrt();
        let n = 40001;
        let deltas: Vec<f64> = (0..n).map(|k| scale * (-4.0 + 8.0 * k as f64 / (n - 1) as f64)).collect();
        let t = transmission_spectrum(&deltas, om, &m).unwrap();
        t0_err = t0_err.max((t[n / 2] - 1.0).abs());
        let w = transparency_fwhm(&deltas, &t).unwrap();
        xs.push(group_quantities(om, &m).unwrap().v_gr.ln());
        ys.push(w.ln());
    }
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    outcome(
        4,
        "transparency width scales with group velocity",
        &[
            ((slope - 1.0).abs() < 0.05, format!("log-log slope {slope:.4} within 5% of 1 over Ω in [0.1, 1]")),
            (t0_err <= 1e-10, format!("|T(0) − 1| = {t0_err:.1e}")),
        ],
    )
}

fn narrowing() -> Outcome {
    let s = presets::narrowing(4096).unwrap();
    let out = run(&s).unwrap();
    let dt = out.probe_times[1] - out.probe_times[0];
    let w: Vec<f64> = out.probe_traces.iter().map(|tr| spectrum_padded(tr, dt, 8 * tr.len()).unwrap().fwhm).collect();
    let measured = w[1] / w[0];
    let expected = s.group_velocity(0.0, s.grid.t_end) / s.group_velocity(0.0, 0.0);
    let err = (measured / expected - 1.0).abs();
    outcome(
        5,
        "spectral narrowing during deceleration",
        &[(err < 0.05, format!("width ratio {measured:.4} vs v ratio {expected:.4}, error {err:.4} < 0.05"))],
    )
}

fn polariton_conservation() -> Outcome {
    let m = MediumParams::from_opacity(20.0, 50.0, 1.0, 1.0).unwrap();
    let s = presets::stop_and_retrieve_with(m, 0.1, 4096).unwrap();
    let out = run(&s).unwrap();
    let n0 = out.diagnostics[0].polariton_norm;
    let drift = out.diagnostics.iter().map(|d| (d.polariton_norm / n0 - 1.0).abs()).fold(0.0, f64::max);

    let n = 257;
    let e: Vec<C64> = (0..n).map(|i| C64::new((0.37 * i as f64).sin(), (0.11 * i as f64).cos())).collect();
    let sp: Vec<C64> = (0..n).map(|i| C64::new((0.23 * i as f64).cos(), -(0.05 * i as f64).sin())).collect();
    let theta: Vec<f64> = (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect();
    let pol = to_polariton(0.0, &e, &sp, &theta).unwrap();
    let (e2, s2) = from_polariton(&pol);
    let round: f64 = e.iter().zip(&e2).chain(sp.iter().zip(&s2)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let norm_err: f64 = (0..n)
        .map(|i| (pol.psi[i].norm_sqr() + pol.phi[i].norm_sqr() - e[i].norm_sqr() - sp[i].norm_sqr()).abs())
        .fold(0.0, f64::max);
    outcome(
        6,
        "dark-polariton number is conserved",
        &[
            (drift < 0.01, format!("∫|Ψ|² drift {drift:.4} < 0.01 over an adiabatic cycle (ηkc/γ = 50)")),
            (round < 1e-10 && norm_err < 1e-10, format!("rotation round trip {round:.1e}, norm {norm_err:.1e}")),
        ],
    )
}

fn cavity() -> Outcome {
    let mut residual: f64 = 0.0;
    for n in [1u32, 3, 10] {
        let sched =
            ControlSchedule::time(Quantity::Rabi, Profile::TanhRamp { from: 20.0, to: 0.0, center: 4.0, width: 1.0 })
                .unwrap();
        let p = CavityParams::new(0.7, 1.0, 0.0, sched, n).unwrap();
        for k in 0..=80 {
            let t = 0.1 * k as f64;
            if p.coupling() == 0.0 && p.omega(t) == 0.0 {
                continue;
            }
            let h = block_hamiltonian(&p, t);
            let d = dark_state(&p, t).unwrap();
            let v = [d.a, d.b, d.c];
            for i in 0..3 {
                let r: C64 = (0..3).map(|j| h[(i, j)] * v[j]).sum();
                residual = residual.max(r.norm());
            }
        }
    }
    let transfers: Vec<f64> =
        [1.0, 10.0, 100.0].iter().map(|&t| stirap_transfer(1.0, 1, 1.0, 20.0, t).unwrap().transfer).collect();
    let infid: Vec<f64> = transfers.iter().map(|f| 1.0 - f).collect();
    let monotone = infid.windows(2).all(|w| w[1] < w[0]);
    outcome(
        7,
        "cavity Raman transfer",
        &[
            (residual < 1e-12, format!("‖H_n φ₀‖ = {residual:.1e}")),
            (
                monotone,
                format!("infidelity {:.3e}, {:.3e}, {:.3e} at g²nT/γ = 1, 10, 100", infid[0], infid[1], infid[2]),
            ),
            (transfers[2] > 0.95, format!("transfer {:.4} > 0.95 at g²nT/γ = 100", transfers[2])),
        ],
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn collective() -> Outcome {
    let mut leak_err: f64 = 0.0;
    let mut state_leaks = Vec::new();
    for n_atoms in 4..=12 {
        let l = forced_flip_leak(n_atoms, 1).unwrap();
        leak_err = leak_err.max((l.channel_weight - 1.0 / n_atoms as f64).abs());
        state_leaks.push(format!("{:.3}", l.state_leak));
    }

    let mc = |n_atoms: usize| {
        decoherence_fidelity(&DecoherenceParams {
            n_atoms,
            n: 1,
            p: 0.01,
            trials: 20_000,
            seed: 2026,
            model: FlipModel::Raise,
        })
        .unwrap()
    };
    let (a, b) = (mc(6), mc(12));
    let overlap = (a.mean_fidelity - b.mean_fidelity).abs() <= a.ci_half_width + b.ci_half_width;

    let mut coeff_err: f64 = 0.0;
    for n_atoms in 2..=12 {
        for n in 0..n_atoms {
            for &theta in &[0.0, 0.4, 1.1, FRAC_PI_2] {
                let (s, c) = f64::sin_cos(theta);
                let closed: Vec<f64> = (0..=n)
                    .map(|k| {
                        (factorial(n) / (factorial(k) * factorial(n - k))).sqrt()
                            * (-s).powi(k as i32)
                            * c.powi((n - k) as i32)
                    })
                    .collect();
                let coeffs = dark_state_coefficients(n, theta, n_atoms).unwrap();
                for (x, y) in coeffs.iter().zip(&closed) {
                    coeff_err = coeff_err.max((x - y).abs());
                }
                if n_atoms <= 8 {
                    let dark = CollectiveState::dark(n_atoms, n, n, theta).unwrap();
                    for (k, y) in closed.iter().enumerate() {
                        let basis = CollectiveState::dicke(n_atoms, n, k, n - k).unwrap();
                        coeff_err = coeff_err.max((basis.inner(&dark) - y).norm());
                    }
                }
            }
        }
    }
    outcome(
        8,
        "collective memory error classes",
        &[
            (
                leak_err < 1e-12,
                format!(
                    "flip-channel weight − 1/N ≤ {leak_err:.1e} for N = 4..12 (state leak {})",
                    state_leaks.join(",")
                ),
            ),
            (
                overlap,
                format!(
                    "p = 0.01 loss N=6 {:.4}±{:.4}, N=12 {:.4}±{:.4}",
                    1.0 - a.mean_fidelity,
                    a.ci_half_width,
                    1.0 - b.mean_fidelity,
                    b.ci_half_width
                ),
            ),
            (coeff_err < 1e-12, format!("dark-state coefficients vs closed form {coeff_err:.1e}")),
        ],
    )
}

fn corrections() -> Outcome {
    let m = presets::reference_medium();
    let mut limit_err: f64 = 0.0;
    for cot in [0.05, 0.5, 1.0, 3.0, 40.0] {
        let s = ControlSchedule::time(Quantity::CotTheta, Profile::Constant { value: cot }).unwrap();
        let k = correction_coeffs(&s, 7.0, &m).unwrap();
        limit_err = limit_err.max(k.a.abs()).max(k.b.abs());
    }
    let stopped = ControlSchedule::time(Quantity::CotTheta, Profile::Constant { value: 0.0 }).unwrap();
    let k = correction_coeffs(&stopped, 7.0, &m).unwrap();
    limit_err = limit_err.max(k.c.abs()).max(k.d.abs());

    let mut checks =
        vec![(limit_err == 0.0, format!("A, B at fixed θ and C, D at θ = π/2: max |coef| = {limit_err:.1e}"))];
    for rate in [0.3, 0.5] {
        let s = presets::stop_and_retrieve_with(m, rate, 4096).unwrap();
        let out = run(&s).unwrap();
        let deficit = 1.0 - out.diagnostics.last().unwrap().polariton_norm / out.diagnostics[0].polariton_norm;
        let predicted = correction_integrals(&s.control, &m, 0.0, s.grid.t_end).unwrap().predicted_loss();
        let err = (deficit / predicted - 1.0).abs();
        checks.push((
            err < 0.25,
            format!("ramp rate {rate}: predicted {predicted:.4}, solver {deficit:.4}, error {err:.3} < 0.25"),
        ));
    }
    outcome(9, "first-order non-adiabatic corrections", &checks)
}

fn audit() -> Outcome {
    let good = adiabaticity_report(&presets::stop_and_retrieve(4096).unwrap());
    let bad = adiabaticity_report(&presets::sudden_switch_total(4096).unwrap());
    let list = |r: &lightstore::polariton::AdiabaticityReport| {
        [&r.spreading, &r.rotation, &r.absorption, &r.switching]
            .iter()
            .map(|m| format!("{}={:.2e}", m.name, m.value))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        10,
        "adiabaticity audit",
        &[
            (good.all_pass(), format!("reference cycle passes all margins ({})", list(&good))),
            (!bad.rotation.pass, format!("sudden switch fails the rotation margin ({})", list(&bad))),
        ],
    )
}

#[test]
fn acceptance() {
    let criteria: Vec<fn() -> Outcome> = vec![
        stop_and_retrieve,
        sudden_switch,
        roadblock,
        eit_spectra,
        narrowing,
        polariton_conservation,
        cavity,
        collective,
        corrections,
        audit,
    ];
    let mut results: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria.into_iter().map(|f| scope.spawn(f)).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    results.sort_by_key(|o| o.id);
    // Written to the process stderr directly so the report shows even when
    // the harness captures test output.
    let mut report = String::from("\n");
    for r in &results {
        let status = if r.pass { "PASS" } else { "FAIL" };
        report += &format!("[{status}] criterion {:2}: {}: {}\n", r.id, r.name, r.detail);
    }
    std::io::stderr().write_all(report.as_bytes()).unwrap();
    let failed: Vec<usize> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
