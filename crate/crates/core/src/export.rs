// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON artifacts.
//!
//! Numbers are written in the shortest form that round-trips (plain decimal
//! for magnitudes in `[1e-4, 1e15)`, scientific otherwise), so equal inputs
//! give byte-identical files. Series files are in long format: one
//! row per (snapshot, grid point), snapshots in time order.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::polariton::PolaritonState;
use crate::solver::{FieldState, Grid};
use crate::Result;

/// Version of the CSV column layouts below. Bump on any change.
pub const CSV_SCHEMA: u32 = 1;

pub const FIELD_HEADER: [&str; 6] = ["t", "z", "re_e", "im_e", "re_p", "im_p"];
pub const SPIN_HEADER: [&str; 6] = ["t", "z", "re_s", "im_s", "re_rho_cb", "im_rho_cb"];
pub const POLARITON_HEADER: [&str; 7] = ["t", "z", "re_psi", "im_psi", "re_phi", "im_phi", "theta"];

/// Write a header line and numeric rows.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| number(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip text for `x`.
pub fn number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn nodes(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..len).step_by(stride.max(1))
}

/// Probe field and optical coherence, every `stride`-th grid point.
pub fn write_field_series(path: &Path, grid: &Grid, states: &[FieldState], stride: usize) -> Result<()> {
    let rows = states.iter().flat_map(|st| {
        nodes(st.e.len(), stride).map(move |i| vec![st.t, grid.z(i), st.e[i].re, st.e[i].im, st.p[i].re, st.p[i].im])
    });
    write_csv(path, &FIELD_HEADER, rows)
}

/// Spin coherence `S` and the bare element `ρ_cb = S/√atoms`.
pub fn write_spin_series(path: &Path, grid: &Grid, states: &[FieldState], atoms: f64, stride: usize) -> Result<()> {
    let k = atoms.sqrt();
    let rows = states.iter().flat_map(|st| {
        nodes(st.s.len(), stride)
            .map(move |i| vec![st.t, grid.z(i), st.s[i].re, st.s[i].im, st.s[i].re / k, st.s[i].im / k])
    });
    write_csv(path, &SPIN_HEADER, rows)
}

/// Dark and bright polariton amplitudes with the local mixing angle.
pub fn write_polariton_series(path: &Path, grid: &Grid, states: &[PolaritonState], stride: usize) -> Result<()> {
    let rows = states.iter().flat_map(|st| {
        nodes(st.psi.len(), stride)
            .map(move |i| vec![st.t, grid.z(i), st.psi[i].re, st.psi[i].im, st.phi[i].re, st.phi[i].im, st.theta[i]])
    });
    write_csv(path, &POLARITON_HEADER, rows)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn field_series_layout() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid { z_min: 0.0, z_max: 64.0, nz: 64, t_end: 1.0, dt: 0.5 };
        let mut st = FieldState::zeros(0.5, 64);
        st.e[2] = C64::new(0.25, -1.5);
        let path = dir.path().join("f.csv");
        write_field_series(&path, &grid, &[FieldState::zeros(0.0, 64), st], 2).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,z,re_e,im_e,re_p,im_p");
        assert_eq!(lines.len(), 1 + 2 * 32);
        assert_eq!(lines[1 + 32 + 1], "0.5,2,0.25,-1.5,0,0");
    }

    #[test]
    fn spin_series_scales_by_atom_number() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid { z_min: 0.0, z_max: 4.0, nz: 4, t_end: 1.0, dt: 0.5 };
        let mut st = FieldState::zeros(0.0, 4);
        st.s[1] = C64::new(2.0, 0.0);
        let path = dir.path().join("s.csv");
        write_spin_series(&path, &grid, &[st], 4.0, 1).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "0,1,2,0,1,0");
    }

    #[test]
    fn numbers_round_trip_compactly() {
        assert_eq!(number(2.5e-16), "2.5e-16");
        assert_eq!(number(-0.25), "-0.25");
        assert_eq!(number(0.0), "0");
        assert_eq!(number(3e20), "3e20");
        for x in [1.0 / 3.0, 7.1e-300, -1e-4, 123456.789] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let v = serde_json::json!({"a": 0.1, "b": [1.0, 2.5]});
        let (p, q) = (dir.path().join("a.json"), dir.path().join("b.json"));
        write_json(&p, &v).unwrap();
        write_json(&q, &v).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
    }
}
