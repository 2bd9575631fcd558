// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! One-dimensional quadrature.

/// Adaptive Simpson integration of `f` over `[a, b]` with Richardson
/// correction. `tol` is an absolute tolerance on the whole interval.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral of `f` over `[a, b]` to relative accuracy `rel`, using a coarse
/// pass to set the absolute scale.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let n = 64;
    let h = (b - a) / n as f64;
    let scale: f64 = (0..=n).map(|i| f(a + i as f64 * h).abs()).sum::<f64>() * h.abs();
    let tol = (rel * scale).max(f64::MIN_POSITIVE);
    adaptive_simpson(f, a, b, tol)
}

/// Cumulative trapezoid integral of uniformly spaced samples; the result
/// has the same length as `y` and starts at zero.
pub fn cumulative_trapezoid(y: &[f64], dx: f64) -> Vec<f64> {
    let mut acc = 0.0;
    std::iter::once(0.0)
        .chain(y.windows(2).map(|w| {
            acc += 0.5 * dx * (w[0] + w[1]);
            acc
        }))
        .take(y.len())
        .collect()
}

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h)).sum();
    h / 3.0 * (f(a) + inner + f(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_simpson_polynomial_and_gaussian() {
        let v = integrate(|x| 1.0 + x + x * x / 2.0, 0.0, 1.0, 1e-12);
        assert!((v - (1.0 + 0.5 + 1.0 / 6.0)).abs() < 1e-12);
        let g = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-12);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn reversed_bounds_change_sign() {
        let a = integrate(|x| x.cos(), 0.0, 2.0, 1e-12);
        let b = integrate(|x| x.cos(), 2.0, 0.0, 1e-12);
        assert!((a + b).abs() < 1e-12);
        assert!((a - 2f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn simpson_and_trapezoid() {
        assert!((simpson(|x| x.powi(3), 0.0, 2.0, 2) - 4.0).abs() < 1e-12);
        let c = cumulative_trapezoid(&[0.0, 1.0, 2.0], 1.0);
        assert_eq!(c, vec![0.0, 0.5, 2.0]);
    }
}
