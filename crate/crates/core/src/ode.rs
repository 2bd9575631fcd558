// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical fourth-order Runge-Kutta for complex linear systems.

use num_complex::Complex64 as C64;

/// Advance `y` by one RK4 step of size `h` for `dy/dt = f(t, y)`.
///
/// `f(t, y, out)` writes the derivative into `out`.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &mut [C64], h: f64)
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    let mut k1 = vec![C64::default(); n];
    let mut k2 = vec![C64::default(); n];
    let mut k3 = vec![C64::default(); n];
    let mut k4 = vec![C64::default(); n];
    let mut tmp = vec![C64::default(); n];

    f(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + k1[i] * (0.5 * h);
    }
    f(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + k2[i] * (0.5 * h);
    }
    f(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + k3[i] * h;
    }
    f(t + h, &tmp, &mut k4);
    for i in 0..n {
        y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
    }
}

/// 3×3 complex matrix stored row-major.
pub type Mat3 = [[C64; 3]; 3];

pub fn mat3_identity() -> Mat3 {
    let mut m = [[C64::default(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[C64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub fn mat3_apply(a: &Mat3, v: [C64; 3]) -> [C64; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

/// Propagator of `dy/dt = M(t) y` over `[t0, t0 + span]`, built by RK4
/// applied to the identity with `substeps` equal steps. Because the system
/// is linear, applying the result to a vector reproduces RK4 on that vector.
pub fn propagator3<F: Fn(f64) -> Mat3>(generator: F, t0: f64, span: f64, substeps: usize) -> Mat3 {
    let h = span / substeps as f64;
    let step = |m: &Mat3, y: &Mat3| mat3_mul(m, y);
    let mut u = mat3_identity();
    for s in 0..substeps {
        let t = t0 + s as f64 * h;
        let (ma, mb, mc) = (generator(t), generator(t + 0.5 * h), generator(t + h));
        let k1 = step(&ma, &u);
        let k2 = step(&mb, &axpy(&u, &k1, 0.5 * h));
        let k3 = step(&mb, &axpy(&u, &k2, 0.5 * h));
        let k4 = step(&mc, &axpy(&u, &k3, h));
        for i in 0..3 {
            for j in 0..3 {
                u[i][j] += (k1[i][j] + k2[i][j] * 2.0 + k3[i][j] * 2.0 + k4[i][j]) * (h / 6.0);
            }
        }
    }
    u
}

fn axpy(y: &Mat3, k: &Mat3, a: f64) -> Mat3 {
    let mut out = *y;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += k[i][j] * a;
        }
    }
    out
}
