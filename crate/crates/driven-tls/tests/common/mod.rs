//! Independent reference implementations used only by the test suites.
//!
//! Each one deliberately takes a different algorithmic route than the
//! library (ascending series instead of Miller recurrence, Sylvester
//! inertia bisection instead of QL iteration, fixed-step RK4 instead of an
//! adaptive embedded pair) so agreement is evidence, not tautology.
#![allow(dead_code)] // not every suite uses every reference

use nalgebra::DMatrix;
use num_complex::Complex64;

use driven_tls::SystemParams;

/// Bessel function of the first kind via the ascending power series.
///
/// Accurate to ~1e-12 for |x| ≲ 12, which covers every comparison grid in
/// the suites; the library routine switches algorithms well inside that.
pub fn bessel_series(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_series(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_series(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    let half = 0.5 * x;
    // term_0 = (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let x2 = half * half;
    for k in 1..200 {
        term *= -x2 / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Number of eigenvalues of the symmetric matrix strictly below `sigma`,
/// from the inertia of an unpivoted LDL^T factorization of `a - sigma I`.
fn count_below(a: &DMatrix<f64>, sigma: f64) -> usize {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= sigma;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut piv = m[(k, k)];
        if piv == 0.0 {
            // A zero pivot means sigma is (numerically) an eigenvalue of a
            // leading principal submatrix; a representable nudge keeps the
            // count well defined without moving any eigenvalue past sigma
            // by more than the nudge itself.
            piv = 1e-300;
        }
        if piv < 0.0 {
            neg += 1;
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / piv;
            for j in (k + 1)..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    neg
}

/// All eigenvalues of a symmetric matrix by Gershgorin-bracketed bisection
/// on the inertia count, sorted ascending, each to absolute accuracy `tol`.
pub fn bisection_eigenvalues(a: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    let n = a.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        for j in 0..n {
            if j != i {
                radius += a[(i, j)].abs();
            }
        }
        lo = lo.min(a[(i, i)] - radius);
        hi = hi.max(a[(i, i)] + radius);
    }
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (lo, hi);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Spin-down survival probability from fixed-step RK4 integration of the
/// time-dependent Schrödinger equation, started in the spin-down state.
///
/// `times` must be non-decreasing.  The step is `min(period, 1)/steps`,
/// shortened at each requested sample so every sample lands exactly.
pub fn tdse_survival(p: &SystemParams, times: &[f64], steps: usize) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / p.omega;
    let dt = period.min(1.0) / steps as f64;
    let rhs = |t: f64, y: &[Complex64; 2]| -> [Complex64; 2] {
        let diag = -0.5 * (p.epsilon + p.amp * (p.omega * t).cos());
        let off = Complex64::new(0.0, 0.5 * p.delta); // -i * (-delta/2)
        [
            Complex64::new(0.0, -diag) * y[0] + off * y[1],
            off * y[0] + Complex64::new(0.0, diag) * y[1],
        ]
    };
    let mut psi = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t_end in times {
        while t < t_end - 1e-12 {
            let h = dt.min(t_end - t);
            let k1 = rhs(t, &psi);
            let y2 = [psi[0] + 0.5 * h * k1[0], psi[1] + 0.5 * h * k1[1]];
            let k2 = rhs(t + 0.5 * h, &y2);
            let y3 = [psi[0] + 0.5 * h * k2[0], psi[1] + 0.5 * h * k2[1]];
            let k3 = rhs(t + 0.5 * h, &y3);
            let y4 = [psi[0] + h * k3[0], psi[1] + h * k3[1]];
            let k4 = rhs(t + h, &y4);
            for i in 0..2 {
                psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        out.push(psi[1].norm_sqr());
    }
    out
}
