//! Observable post-processing: survival trajectories, their Fourier
//! spectra with peak classification, and approximation-validity maps.
//!
//! All operations are pure functions over immutable series.  The spectrum
//! pipeline mirrors a fixed recipe — asymptotic-cycle subtraction by a
//! trigonometric fit over the record tail, a periodic Hann window, then a
//! discrete transform with quadratically interpolated peak positions — so
//! that two runs over the same trajectory produce identical tables.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{build_floquet_matrix, central_doublet, diagonalize_floquet};
use crate::params::{SystemParams, TruncationConfig};
use crate::vanvleck::{AnalyticOrder, ResonanceContext};

/// Minimum number of drive periods a record must span before its spectrum
/// is considered meaningful.
pub const MIN_RECORD_PERIODS: f64 = 20.0;
/// Harmonic order of the asymptotic-cycle fit.
pub const FIT_HARMONICS: usize = 6;
/// Fraction of the record (from the end) used for the asymptotic fit.
pub const FIT_FRACTION: f64 = 0.25;
/// Peaks below this fraction of the global maximum are ignored.
pub const PEAK_FLOOR: f64 = 0.01;
/// Deviation-map cells with a reference splitting below this multiple of
/// the tunneling are flagged singular instead of divided.
pub const SINGULAR_GUARD: f64 = 1e-9;
/// Reporting clip applied to deviation maps.
pub const DEVIATION_CLIP: f64 = 0.15;

/// A real observable sampled on a uniform time grid, together with the
/// parameters needed to interpret its spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub omega_drive: f64,
    /// Doublet splitting used for classifying spectral lines.
    pub dressed_gap: f64,
    /// Human-readable tier/source tag carried into reports.
    pub label: String,
}

impl Trajectory {
    /// Wrap a sampled series, checking the grid is uniform and increasing.
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        omega_drive: f64,
        dressed_gap: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidParameter(
                "trajectory needs equally many times and values (at least two)".into(),
            ));
        }
        let dt = times[1] - times[0];
        if dt <= 0.0 {
            return Err(Error::NonUniformGrid);
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                return Err(Error::NonUniformGrid);
            }
        }
        Ok(Self {
            times,
            values,
            omega_drive,
            dressed_gap,
            label: label.into(),
        })
    }

    /// Like [`Trajectory::new`], additionally requiring the values to be
    /// probabilities within `[-1e-9, 1 + 1e-9]`.  Density-assembled
    /// observables must satisfy this; perturbative amplitude assemblies may
    /// legitimately overshoot and use the unchecked constructor.
    pub fn probability(
        times: Vec<f64>,
        values: Vec<f64>,
        omega_drive: f64,
        dressed_gap: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if let Some(&bad) = values
            .iter()
            .find(|v| !(-1e-9..=1.0 + 1e-9).contains(*v) || !v.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "probability sample {bad} outside [0, 1]"
            )));
        }
        Self::new(times, values, omega_drive, dressed_gap, label)
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn span(&self) -> f64 {
        self.times.len() as f64 * self.step()
    }

    /// Mean of the values over each consecutive block of `block` samples;
    /// the partial tail block is dropped.  With one block per drive period
    /// this is the coarse-graining used to discuss monotone decay.
    pub fn block_means(&self, block: usize) -> Vec<f64> {
        assert!(block > 0);
        self.values
            .chunks_exact(block)
            .map(|c| c.iter().sum::<f64>() / block as f64)
            .collect()
    }
}

/// Window applied before the discrete transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowKind {
    None,
    Hann,
}

/// Classification of a spectral line against the drive and doublet scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeakClass {
    /// Overdamped line at zero frequency.
    Relaxation,
    /// Line at the dressed splitting Ω.
    Dressed,
    /// Line at a drive harmonic nω.
    Harmonic(u32),
    /// Line at nω + Ω.
    SidebandUpper(u32),
    /// Line at nω − Ω.
    SidebandLower(u32),
    Unclassified,
}

/// One detected spectral line.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Quadratically interpolated angular frequency.
    pub frequency: f64,
    pub height: f64,
    /// Height relative to the strongest line.
    pub relative_height: f64,
    /// Half-height width estimate (resolution-limited from below).
    pub width: f64,
    pub class: PeakClass,
}

/// Undamped drive-harmonic line extracted from the asymptotic-cycle fit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DriveLine {
    pub harmonic: u32,
    pub amplitude: f64,
}

/// Discrete spectrum of a trajectory with its classified line list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    /// Angular frequencies of the retained bins.
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub peaks: Vec<SpectralPeak>,
    /// Persistent drive lines (only when the asymptotic cycle was fitted
    /// and subtracted); these carry the weight the transform would smear
    /// into infinitely narrow lines.
    pub drive_lines: Vec<DriveLine>,
}

/// Fit `c0 + Σ_n a_n cos(nωt) + b_n sin(nωt)` to the record tail and return
/// the coefficient vector `[c0, a1, b1, ..., aK, bK]`.
fn asymptotic_cycle_fit(traj: &Trajectory) -> Result<Vec<f64>> {
    let n = traj.times.len();
    let start = ((1.0 - FIT_FRACTION) * (traj.times[n - 1] - traj.times[0]) + traj.times[0])
        .max(traj.times[0]);
    let tail: Vec<usize> = (0..n).filter(|&i| traj.times[i] >= start).collect();
    let rows = tail.len();
    let cols = 2 * FIT_HARMONICS + 1;
    if rows < 4 * cols {
        return Err(Error::RecordTooShort {
            periods: rows as f64,
            required: (4 * cols) as f64,
        });
    }
    let mut design = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    for (r, &i) in tail.iter().enumerate() {
        let t = traj.times[i];
        design[(r, 0)] = 1.0;
        for k in 1..=FIT_HARMONICS {
            let (s, c) = (k as f64 * traj.omega_drive * t).sin_cos();
            design[(r, 2 * k - 1)] = c;
            design[(r, 2 * k)] = s;
        }
        rhs[r] = traj.values[i];
    }
    let normal = design.transpose() * &design;
    let moment = design.transpose() * rhs;
    let sol = normal
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("asymptotic-cycle fit is rank deficient".into()))?
        .solve(&moment);
    Ok(sol.iter().copied().collect())
}

/// Discrete spectrum `|∫ dt P(t) e^{iνt}|` of a trajectory.
///
/// With `subtract_asymptote` the record tail is fitted to a trigonometric
/// polynomial in the drive harmonics, the fitted cycle is removed from the
/// whole record (its harmonic amplitudes are reported as [`DriveLine`]s),
/// and only the transient remainder is transformed.  Otherwise the mean is
/// removed.  Peaks are local maxima above 1% of the strongest retained
/// line, located by quadratic interpolation and classified against
/// `{0, Ω, nω, nω ± Ω}` with tolerance ω/50.
pub fn fourier_spectrum(
    traj: &Trajectory,
    window: WindowKind,
    subtract_asymptote: bool,
) -> Result<SpectrumEstimate> {
    let n = traj.times.len();
    let dt = traj.step();
    let span = traj.span();
    let period = 2.0 * std::f64::consts::PI / traj.omega_drive;
    let periods = span / period;
    if periods < MIN_RECORD_PERIODS {
        return Err(Error::RecordTooShort {
            periods,
            required: MIN_RECORD_PERIODS,
        });
    }
    let resolution = 2.0 * std::f64::consts::PI / span;
    if traj.dressed_gap > 0.0 && resolution > traj.dressed_gap / 10.0 {
        return Err(Error::ResolutionTooCoarse {
            resolution,
            limit: traj.dressed_gap / 10.0,
        });
    }

    let mut resid: Vec<f64>;
    let mut drive_lines = Vec::new();
    if subtract_asymptote {
        let coef = asymptotic_cycle_fit(traj)?;
        resid = Vec::with_capacity(n);
        for (i, &t) in traj.times.iter().enumerate() {
            let mut fit = coef[0];
            for k in 1..=FIT_HARMONICS {
                let (s, c) = (k as f64 * traj.omega_drive * t).sin_cos();
                fit += coef[2 * k - 1] * c + coef[2 * k] * s;
            }
            resid.push(traj.values[i] - fit);
        }
        for k in 1..=FIT_HARMONICS {
            drive_lines.push(DriveLine {
                harmonic: k as u32,
                amplitude: coef[2 * k - 1].hypot(coef[2 * k]),
            });
        }
    } else {
        let mean = traj.values.iter().sum::<f64>() / n as f64;
        resid = traj.values.iter().map(|v| v - mean).collect();
    }

    if window == WindowKind::Hann {
        for (k, v) in resid.iter_mut().enumerate() {
            *v *= 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos();
        }
    }

    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = resid
        .iter()
        .map(|&v| rustfft::num_complex::Complex::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let keep_below = 6.5 * traj.omega_drive;
    let d_nu = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let mut frequencies = Vec::new();
    let mut magnitudes = Vec::new();
    for k in 0..=n / 2 {
        let nu = k as f64 * d_nu;
        if nu > keep_below {
            break;
        }
        frequencies.push(nu);
        magnitudes.push(buf[k].norm());
    }

    let mx = magnitudes.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut peaks = Vec::new();
    if mx > 0.0 {
        for i in 1..magnitudes.len().saturating_sub(1) {
            let (lo, mid, hi) = (magnitudes[i - 1], magnitudes[i], magnitudes[i + 1]);
            if mid > lo && mid >= hi && mid > PEAK_FLOOR * mx {
                let denom = lo - 2.0 * mid + hi;
                let d = if denom != 0.0 {
                    (lo - hi) / (2.0 * denom)
                } else {
                    0.0
                };
                let frequency = frequencies[i] + d * d_nu;
                let width = half_height_width(&magnitudes, i, d_nu);
                peaks.push(SpectralPeak {
                    frequency,
                    height: mid,
                    relative_height: mid / mx,
                    width,
                    class: classify_peak(frequency, traj.omega_drive, traj.dressed_gap),
                });
            }
        }
    }

    Ok(SpectrumEstimate {
        frequencies,
        magnitudes,
        peaks,
        drive_lines,
    })
}

fn half_height_width(mag: &[f64], i: usize, d_nu: f64) -> f64 {
    let half = 0.5 * mag[i];
    let mut left = i as f64;
    for j in (0..i).rev() {
        if mag[j] <= half {
            let frac = (mag[j + 1] - half) / (mag[j + 1] - mag[j]);
            left = (j + 1) as f64 - frac;
            break;
        }
        left = j as f64;
    }
    let mut right = i as f64;
    for j in (i + 1)..mag.len() {
        if mag[j] <= half {
            let frac = (mag[j - 1] - half) / (mag[j - 1] - mag[j]);
            right = (j - 1) as f64 + frac;
            break;
        }
        right = j as f64;
    }
    (right - left) * d_nu
}

fn classify_peak(nu: f64, omega: f64, gap: f64) -> PeakClass {
    let tol = omega / 50.0;
    if nu.abs() < tol {
        return PeakClass::Relaxation;
    }
    if (nu - gap).abs() < tol {
        return PeakClass::Dressed;
    }
    for n in 1..8u32 {
        let base = n as f64 * omega;
        if (nu - base).abs() < tol {
            return PeakClass::Harmonic(n);
        }
        if (nu - (base + gap)).abs() < tol {
            return PeakClass::SidebandUpper(n);
        }
        if (nu - (base - gap)).abs() < tol {
            return PeakClass::SidebandLower(n);
        }
    }
    PeakClass::Unclassified
}

/// Which pair of splitting estimates a deviation map compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviationReference {
    /// Leading-order against second-order splitting.
    SecondOrder,
    /// Second-order against the exact ladder splitting.
    Numeric,
}

/// Relative-deviation map over a (ω, A) grid at fixed bias.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationMap {
    pub epsilon: f64,
    pub omegas: Vec<f64>,
    pub amps: Vec<f64>,
    pub reference: DeviationReference,
    /// Raw per-cell deviations, row-major over `omegas × amps`; singular
    /// cells hold NaN.
    pub values: Vec<f64>,
    pub singular: Vec<bool>,
}

impl DeviationMap {
    #[inline]
    fn idx(&self, i_omega: usize, i_amp: usize) -> usize {
        i_omega * self.amps.len() + i_amp
    }

    pub fn value(&self, i_omega: usize, i_amp: usize) -> f64 {
        self.values[self.idx(i_omega, i_amp)]
    }

    pub fn is_singular(&self, i_omega: usize, i_amp: usize) -> bool {
        self.singular[self.idx(i_omega, i_amp)]
    }

    /// Value clipped at the reporting level; NaN for singular cells.
    pub fn clipped(&self, i_omega: usize, i_amp: usize) -> f64 {
        self.value(i_omega, i_amp).min(DEVIATION_CLIP)
    }
}

fn deviation_cell(
    delta: f64,
    epsilon: f64,
    omega: f64,
    amp: f64,
    reference: DeviationReference,
) -> Result<(f64, bool)> {
    let params = SystemParams::new(delta, epsilon, amp, omega)?;
    let ctx = ResonanceContext::for_nearest_resonance(params);
    let second = ctx.splitting(AnalyticOrder::VanVleck2)?;
    match reference {
        DeviationReference::SecondOrder => {
            if second < SINGULAR_GUARD * delta {
                return Ok((f64::NAN, true));
            }
            let leading = ctx.splitting(AnalyticOrder::Rwa)?;
            Ok(((leading - second).abs() / second, false))
        }
        DeviationReference::Numeric => {
            let tr = TruncationConfig::for_params(&params);
            let spectrum = diagonalize_floquet(&build_floquet_matrix(&params, &tr)?)?;
            let doublet = central_doublet(&spectrum, &params, ctx.m)?;
            let numeric = doublet.omega_numeric;
            if numeric < SINGULAR_GUARD * delta {
                return Ok((f64::NAN, true));
            }
            Ok(((second - numeric).abs() / numeric, false))
        }
    }
}

/// Compute a deviation map cell-parallel over the grid.
pub fn deviation_map(
    delta: f64,
    epsilon: f64,
    omegas: &[f64],
    amps: &[f64],
    reference: DeviationReference,
) -> Result<DeviationMap> {
    if omegas.is_empty() || amps.is_empty() {
        return Err(Error::InvalidParameter("deviation map grid is empty".into()));
    }
    let cells: Vec<(f64, f64)> = omegas
        .iter()
        .flat_map(|&w| amps.iter().map(move |&a| (w, a)))
        .collect();
    let results: Result<Vec<(f64, bool)>> = cells
        .par_iter()
        .map(|&(w, a)| deviation_cell(delta, epsilon, w, a, reference))
        .collect();
    let results = results?;
    Ok(DeviationMap {
        epsilon,
        omegas: omegas.to_vec(),
        amps: amps.to_vec(),
        reference,
        values: results.iter().map(|r| r.0).collect(),
        singular: results.iter().map(|r| r.1).collect(),
    })
}
