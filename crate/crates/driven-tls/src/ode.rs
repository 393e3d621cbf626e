//! Adaptive Dormand–Prince (5,4) integration for small complex state vectors.
//!
//! The dissipative propagation in this crate only ever integrates a handful
//! of complex components, so the integrator works directly on
//! `Vec<Complex64>` without trait machinery.  Dense output between accepted
//! steps uses cubic Hermite interpolation, which keeps sampled trajectories
//! independent of the step sequence to well below the local tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and step bounds for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Hard upper bound on the step, e.g. a fraction of a drive period when
    /// the right-hand side carries fast explicit time dependence.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            initial_step: None,
        }
    }
}

const STAGES: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C_NODES: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
/// Difference between the fifth- and fourth-order weights.
const ERR_W: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` and return the state at each requested
/// sample time.
///
/// `samples` must be non-decreasing with `samples[0] >= t0`.  The callback
/// writes the derivative into its third argument.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: Vec<Complex64>,
    samples: &[f64],
    opts: &Dopri5Options,
) -> Result<Vec<Vec<Complex64>>>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y0.len();
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    if samples.windows(2).any(|w| w[1] < w[0]) || samples[0] < t0 {
        return Err(Error::InvalidParameter(
            "sample times must be non-decreasing and start at or after t0".into(),
        ));
    }
    let t_end = *samples.last().unwrap();

    let mut out = Vec::with_capacity(samples.len());
    let mut next_sample = 0usize;
    // Samples that coincide with the initial time need no integration.
    while next_sample < samples.len() && samples[next_sample] <= t0 {
        out.push(y0.clone());
        next_sample += 1;
    }
    if next_sample == samples.len() {
        return Ok(out);
    }

    let span = t_end - t0;
    let mut h = opts
        .initial_step
        .or(opts.max_step)
        .unwrap_or(span * 1e-3)
        .min(span);
    if let Some(mx) = opts.max_step {
        h = h.min(mx);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); dim]; 7];
    let mut stage_y = vec![Complex64::default(); dim];
    let mut y_next = vec![Complex64::default(); dim];
    {
        let (head, _) = k.split_at_mut(1);
        f(t, &y, &mut head[0]);
    }

    while t < t_end {
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, step: h });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        for (s, row) in STAGES.iter().enumerate() {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, &a) in row.iter().enumerate().take(s + 1) {
                    if a != 0.0 {
                        acc += h * a * k[j][i];
                    }
                }
                stage_y[i] = acc;
            }
            let (done, rest) = k.split_at_mut(s + 1);
            let _ = done;
            f(t + C_NODES[s] * h, &stage_y, &mut rest[0]);
        }
        // The sixth stage already lands on the fifth-order solution (FSAL).
        y_next.copy_from_slice(&stage_y);

        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = Complex64::default();
            for (j, &w) in ERR_W.iter().enumerate() {
                if w != 0.0 {
                    e += h * w * k[j][i];
                }
            }
            let scale = opts.atol + opts.rtol * y[i].norm().max(y_next[i].norm());
            err_sq += (e.norm() / scale).powi(2);
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            // Accepted step: serve every sample inside (t, t + h] by cubic
            // Hermite interpolation from the endpoint values and slopes.
            while next_sample < samples.len() && samples[next_sample] <= t + h {
                let ts = samples[next_sample];
                let u = (ts - t) / h;
                let (h00, h10, h01, h11) = hermite_weights(u);
                let mut yi = vec![Complex64::default(); dim];
                for i in 0..dim {
                    yi[i] = h00 * y[i] + h10 * h * k[0][i] + h01 * y_next[i] + h11 * h * k[6][i];
                }
                out.push(yi);
                next_sample += 1;
            }
            t += h;
            y.copy_from_slice(&y_next);
            k.swap(0, 6);
            if next_sample == samples.len() {
                return Ok(out);
            }
        }

        let factor = if err.is_finite() && err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else if err == 0.0 {
            5.0
        } else {
            0.2
        };
        h *= factor;
        if let Some(mx) = opts.max_step {
            h = h.min(mx);
        }
    }
    Ok(out)
}

fn hermite_weights(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    )
}
