//! Closed-form resonance doublets: rotating-wave and second-order
//! (Van Vleck) treatments of an `m`-photon avoided crossing.
//!
//! Everything here is organized around a [`ResonanceContext`]: system
//! parameters plus the resonance index `m` and the half-width of the
//! sideband series.  On top of it sit the level-shift sum, the mixing angle
//! and splitting at either order, the shifted-resonance root, the
//! first/second-order eigenstates over the dressed ladder, the periodic
//! correction series A(t), B(t), C(t), and the survival probability in four
//! approximation tiers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::floquet::{fold_quasienergy, CompositeState, Spin};
use crate::params::SystemParams;

/// Default half-width of sideband sums (series run over `-l_max..=l_max`).
pub const DEFAULT_L_MAX: usize = 40;

/// Which closed-form order the angles and splitting are taken at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnalyticOrder {
    /// Resonant two-level block only.
    Rwa,
    /// Second-order: detuning shifted by the sideband level-shift sum.
    VanVleck2,
}

/// Dressed-element cache over a symmetric order window.
struct DressedCache {
    vals: Vec<f64>,
    half: i32,
}

impl DressedCache {
    fn new(p: &SystemParams, half: i32) -> Result<Self> {
        let z = p.drive_ratio();
        let mut vals = Vec::with_capacity((2 * half + 1) as usize);
        for k in -half..=half {
            vals.push(bessel_j(k, z)? * p.delta);
        }
        Ok(Self { vals, half })
    }

    #[inline]
    fn get(&self, k: i32) -> f64 {
        debug_assert!(k.abs() <= self.half, "dressed cache window too small");
        self.vals[(k + self.half) as usize]
    }
}

/// System parameters anchored at one photon resonance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResonanceContext {
    pub params: SystemParams,
    pub m: i32,
    pub l_max: usize,
    /// Smallest tolerated |ε + lω| in sideband denominators.
    pub denominator_guard: f64,
}

/// Mixing data of the resonant doublet at a given order.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResonanceAngles {
    /// Doublet splitting Ω (always >= 0).
    pub splitting: f64,
    /// Mixing angle in (0, π].
    pub theta: f64,
    /// Sign of the resonant dressed element Δ_{-m} (+1 for >= 0).
    pub sign_dm: f64,
    /// Both the detuning and the resonant element sat at machine zero, so
    /// the angle was pinned to π/2 instead of trusting `atan2(0, 0)`.
    pub degenerate: bool,
}

impl ResonanceContext {
    pub fn new(params: SystemParams, m: i32) -> Self {
        Self {
            params,
            m,
            l_max: DEFAULT_L_MAX,
            denominator_guard: 1e-6 * params.delta,
        }
    }

    /// Anchor at the resonance index nearest to the static bias.
    pub fn for_nearest_resonance(params: SystemParams) -> Self {
        Self::new(params, params.nearest_resonance())
    }

    pub fn with_l_max(mut self, l_max: usize) -> Self {
        self.l_max = l_max;
        self
    }

    /// Dressed tunneling element Δ_k.
    pub fn dressed(&self, k: i32) -> Result<f64> {
        Ok(bessel_j(k, self.params.drive_ratio())? * self.params.delta)
    }

    fn guarded_denominator(&self, l: i32) -> Result<f64> {
        let den = self.params.epsilon + l as f64 * self.params.omega;
        if den.abs() < self.denominator_guard {
            return Err(Error::NearSingularDenominator {
                index: l,
                value: den,
                guard: self.denominator_guard,
            });
        }
        Ok(den)
    }

    /// One partial sum of `Σ_{l != -m} Δ_l² / (ε + lω)^power`.
    ///
    /// Opposite-`l` terms are accumulated in pairs so that the antisymmetric
    /// cancellation at ε = 0, m = 0 is exact in floating point, not just
    /// approximate.
    fn sideband_sum(&self, l_max: usize, power: i32) -> Result<f64> {
        let term = |l: i32| -> Result<f64> {
            let den = self.guarded_denominator(l)?;
            let d = self.dressed(l)?;
            Ok(d * d / den.powi(power))
        };
        let mut sum = 0.0;
        if self.m != 0 {
            sum += term(0)?;
        }
        for l in 1..=l_max as i32 {
            let mut pair = 0.0;
            if l != -self.m {
                pair += term(l)?;
            }
            if -l != -self.m {
                pair += term(-l)?;
            }
            sum += pair;
        }
        Ok(sum)
    }

    fn converged_sideband_sum(&self, power: i32) -> Result<f64> {
        let mut l = self.l_max;
        let mut prev = self.sideband_sum(l, power)?;
        for _ in 0..3 {
            l *= 2;
            let next = self.sideband_sum(l, power)?;
            let change = (next - prev).abs();
            if change <= 1e-10 * next.abs().max(self.params.delta) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::SeriesNotConverged {
            change: prev,
            l_max: l,
        })
    }

    /// Second-order level-shift sum `Σ_{l != -m} Δ_l² / (ε + lω)`.
    pub fn level_shift(&self) -> Result<f64> {
        self.converged_sideband_sum(1)
    }

    /// Curvature sum `Σ_{l != -m} Δ_l² / (ε + lω)²` (enters rate prefactors).
    pub fn shift_curvature(&self) -> Result<f64> {
        self.converged_sideband_sum(2)
    }

    /// Detuning entering the two-level block at the requested order.
    pub fn detuning(&self, order: AnalyticOrder) -> Result<f64> {
        let bare = -self.params.epsilon + self.m as f64 * self.params.omega;
        Ok(match order {
            AnalyticOrder::Rwa => bare,
            AnalyticOrder::VanVleck2 => bare - 0.5 * self.level_shift()?,
        })
    }

    /// Splitting, mixing angle and gauge sign at the requested order.
    pub fn angles(&self, order: AnalyticOrder) -> Result<ResonanceAngles> {
        let det = self.detuning(order)?;
        let dm = self.dressed(-self.m)?;
        let sign_dm = if dm >= 0.0 { 1.0 } else { -1.0 };
        let splitting = f64::hypot(det, dm);
        let tiny = 1e-12 * self.params.delta;
        if dm.abs() < tiny && det.abs() < tiny {
            // Doubly degenerate point (destroyed tunneling exactly on
            // resonance): atan2 of two machine zeros is noise, and the limit
            // depends on the approach direction.  Pin the angle at the
            // symmetric value and flag it.
            return Ok(ResonanceAngles {
                splitting,
                theta: PI / 2.0,
                sign_dm,
                degenerate: true,
            });
        }
        let mut theta = dm.abs().atan2(det);
        if theta <= 0.0 {
            // Unmixed limit with positive detuning: report the angle at the
            // closed end of its (0, π] branch.
            theta = PI;
        }
        Ok(ResonanceAngles {
            splitting,
            theta,
            sign_dm,
            degenerate: false,
        })
    }

    pub fn splitting(&self, order: AnalyticOrder) -> Result<f64> {
        Ok(self.angles(order)?.splitting)
    }

    /// Zero-copy quasienergy pair `(-m/2·ω ∓ Ω/2)`, folded to the first zone.
    pub fn folded_quasienergies(&self, order: AnalyticOrder) -> Result<(f64, f64)> {
        let omega = self.params.omega;
        let base = -0.5 * self.m as f64 * omega;
        let half = 0.5 * self.splitting(order)?;
        Ok((
            fold_quasienergy(base - half, omega),
            fold_quasienergy(base + half, omega),
        ))
    }

    /// Splitting of the zero-copy doublet including the `m`-photon offset:
    /// `mω + Ω`.  This is the frequency at which dissipative coherences
    /// rotate.
    pub fn dissipative_gap(&self, order: AnalyticOrder) -> Result<f64> {
        Ok(self.m as f64 * self.params.omega + self.splitting(order)?)
    }
}

/// Bias at which the second-order shifted resonance condition
/// `ε - mω + Σ(ε)/2 = 0` holds, searched within half a photon of `mω`.
///
/// The bracket is scanned for sign changes first: none is an error (no
/// shifted crossing in this window), more than one is refused as ambiguous.
pub fn resonance_bias(base: &SystemParams, m: i32) -> Result<f64> {
    let omega = base.omega;
    let lo = m as f64 * omega - 0.5 * omega;
    let hi = m as f64 * omega + 0.5 * omega;
    let g = |eps: f64| -> Result<f64> {
        let p = SystemParams { epsilon: eps, ..*base };
        let ctx = ResonanceContext::new(p, m);
        Ok(eps - m as f64 * omega + 0.5 * ctx.level_shift()?)
    };

    const SCAN: usize = 64;
    let mut xs = Vec::with_capacity(SCAN + 1);
    let mut gs = Vec::with_capacity(SCAN + 1);
    for k in 0..=SCAN {
        let x = lo + (hi - lo) * (k as f64 / SCAN as f64);
        let gx = g(x)?;
        if gx == 0.0 {
            // Landed on the root exactly (happens at the symmetric point of
            // the m = 0 window, where the shift sum cancels identically).
            return Ok(x);
        }
        xs.push(x);
        gs.push(gx);
    }
    let mut brackets = Vec::new();
    for k in 0..SCAN {
        if gs[k] * gs[k + 1] < 0.0 {
            brackets.push(k);
        }
    }
    match brackets.len() {
        0 => {
            return Err(Error::NoRootInBracket {
                lo,
                hi,
                g_lo: gs[0],
                g_hi: gs[SCAN],
            })
        }
        1 => {}
        count => {
            return Err(Error::MultipleRoots { lo, hi, count });
        }
    }
    let k = brackets[0];
    let (mut a, mut b) = (xs[k], xs[k + 1]);
    let (mut ga, _gb) = (gs[k], gs[k + 1]);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if ga * gm < 0.0 {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
        if b - a < 1e-13 * omega {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Perturbative order of the closed-form eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateOrder {
    First,
    Second,
}

/// Closed-form doublet eigenstates mapped onto the dressed ladder.
#[derive(Clone, Debug)]
pub struct AnalyticStates {
    pub minus: CompositeState,
    pub plus: CompositeState,
    /// Norms of the raw perturbative expansions before renormalization
    /// (deviation from 1 measures the truncation of the order expansion).
    pub raw_norm_minus: f64,
    pub raw_norm_plus: f64,
}

/// Build the first- or second-order doublet eigenstates over a ladder of
/// half-width `n_tr`.
///
/// Both states come out in the zero-copy convention: the plus partner's
/// amplitudes already sit `m` photon slots below its natural zone copy, so
/// the two states can be contracted directly against each other.  Amplitudes
/// falling outside the ladder are dropped, so `n_tr` should comfortably
/// exceed `l_max` plus the resonance index for faithful norms.
pub fn analytic_eigenstates(
    ctx: &ResonanceContext,
    order: StateOrder,
    n_tr: usize,
) -> Result<AnalyticStates> {
    let m = ctx.m;
    let p = &ctx.params;
    let l = ctx.l_max as i32;
    let angles = ctx.angles(match order {
        StateOrder::First => AnalyticOrder::Rwa,
        StateOrder::Second => AnalyticOrder::VanVleck2,
    })?;
    let (sh, ch) = (0.5 * angles.theta).sin_cos();
    let s = angles.sign_dm;

    let cache = DressedCache::new(p, 2 * l + m.abs() + 4)?;
    // First-order sideband weights r_j = Δ_j / (ε + jω), j != -m.
    let mut r = Vec::new();
    for j in -l..=l {
        if j == -m {
            continue;
        }
        r.push((j, cache.get(j) / ctx.guarded_denominator(j)?));
    }

    let mut vm = CompositeState::zeros(n_tr);
    let mut vp = CompositeState::zeros(n_tr);
    // Leading amplitudes on the crossing pair.
    vm.add_amp(Spin::Up, 0, -sh);
    vm.add_amp(Spin::Down, m, -s * ch);
    vp.add_amp(Spin::Up, -m, ch);
    vp.add_amp(Spin::Down, 0, -s * sh);
    // First-order sidebands.
    for &(j, rj) in &r {
        vm.add_amp(Spin::Up, j + m, 0.5 * rj * s * ch);
        vm.add_amp(Spin::Down, -j, -0.5 * rj * sh);
        vp.add_amp(Spin::Up, j, 0.5 * rj * s * sh);
        vp.add_amp(Spin::Down, -m - j, 0.5 * rj * ch);
    }

    if order == StateOrder::Second {
        let dm = cache.get(-m);
        // Second-order kernel over sideband index j.
        let t_kernel = |j: i32| -> Result<f64> {
            let mut t = 0.0;
            let den1 = p.epsilon + (j - m) as f64 * p.omega;
            if den1.abs() >= ctx.denominator_guard {
                t += dm * cache.get(j - m) / den1;
            } else {
                return Err(Error::NearSingularDenominator {
                    index: j - m,
                    value: den1,
                    guard: ctx.denominator_guard,
                });
            }
            let den2 = p.epsilon - (j + m) as f64 * p.omega;
            if den2.abs() >= ctx.denominator_guard {
                t += dm * cache.get(-j - m) / den2;
            } else {
                return Err(Error::NearSingularDenominator {
                    index: -(j + m),
                    value: den2,
                    guard: ctx.denominator_guard,
                });
            }
            let mut acc = 0.0;
            for pp in -l..=l {
                if pp == -j - m || pp == -m {
                    continue;
                }
                acc += cache.get(j + pp) * cache.get(pp) / 2.0
                    * (1.0 / ctx.guarded_denominator(j + pp)?
                        + 1.0 / ctx.guarded_denominator(pp)?);
            }
            Ok((t + acc) / (4.0 * j as f64 * p.omega))
        };
        for j in -l..=l {
            if j == 0 {
                continue;
            }
            let tj = t_kernel(j)?;
            vm.add_amp(Spin::Up, j, sh * tj);
            vm.add_amp(Spin::Down, m - j, s * ch * tj);
            vp.add_amp(Spin::Up, j - m, -ch * tj);
            vp.add_amp(Spin::Down, -j, s * sh * tj);
        }
        for &(k, rk) in &r {
            for &(j, rj) in &r {
                let c = rk * rj / 8.0;
                vm.add_amp(Spin::Up, k - j, sh * c);
                vm.add_amp(Spin::Down, k + m - j, s * ch * c);
                vp.add_amp(Spin::Up, k - j - m, -ch * c);
                vp.add_amp(Spin::Down, j - k, s * sh * c);
            }
        }
    }

    let raw_norm_minus = vm.norm();
    let raw_norm_plus = vp.norm();
    Ok(AnalyticStates {
        minus: vm.normalized(),
        plus: vp.normalized(),
        raw_norm_minus,
        raw_norm_plus,
    })
}

/// Fourier coefficients of the periodic correction series A(t), B(t), C(t).
///
/// All coefficients are real; the time series are assembled as
/// `Σ_n coeff_n · exp(i n ω t)` (B additionally carries `|A(t)|²/8`).
#[derive(Clone, Debug)]
pub struct HarmonicSeries {
    omega: f64,
    l_max: i32,
    /// a[n + l_max] multiplies e^{inωt} in A(t); the n = -m slot is zero.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl HarmonicSeries {
    pub fn new(ctx: &ResonanceContext) -> Result<Self> {
        let l = ctx.l_max as i32;
        let m = ctx.m;
        let p = &ctx.params;
        let w = p.omega;
        let cache = DressedCache::new(p, 2 * l + m.abs() + 4)?;
        let dm = cache.get(-m);

        let mut a = vec![0.0; (2 * l + 1) as usize];
        let mut b = vec![0.0; (2 * l + 1) as usize];
        let mut c = vec![0.0; (2 * l + 1) as usize];
        for n in -l..=l {
            let idx = (n + l) as usize;
            if n != -m {
                a[idx] = cache.get(n) / ctx.guarded_denominator(n)?;
            }
            if n != 0 {
                let den_p = ctx.guarded_denominator(n - m)?;
                let den_m = p.epsilon - (n + m) as f64 * w;
                if den_m.abs() < ctx.denominator_guard {
                    return Err(Error::NearSingularDenominator {
                        index: -(n + m),
                        value: den_m,
                        guard: ctx.denominator_guard,
                    });
                }
                b[idx] = (cache.get(n - m) * dm / den_p + cache.get(-m - n) * dm / den_m)
                    / (4.0 * n as f64 * w);

                let mut acc = 0.0;
                for pp in -l..=l {
                    if pp == -m || pp == -n - m {
                        continue;
                    }
                    acc += cache.get(pp) * cache.get(pp + n) / (8.0 * n as f64 * w)
                        * (1.0 / ctx.guarded_denominator(pp)?
                            + 1.0 / ctx.guarded_denominator(pp + n)?);
                }
                c[idx] = acc;
            }
        }
        Ok(Self {
            omega: w,
            l_max: l,
            a,
            b,
            c,
        })
    }

    fn phase_sum(coeffs: &[f64], l: i32, omega_t: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for n in -l..=l {
            let cf = coeffs[(n + l) as usize];
            if cf != 0.0 {
                sum += Complex64::from_polar(cf, n as f64 * omega_t);
            }
        }
        sum
    }

    pub fn eval_a(&self, t: f64) -> Complex64 {
        Self::phase_sum(&self.a, self.l_max, self.omega * t)
    }

    pub fn eval_b(&self, t: f64) -> Complex64 {
        let a = self.eval_a(t);
        a.norm_sqr() / 8.0 + Self::phase_sum(&self.b, self.l_max, self.omega * t)
    }

    pub fn eval_c(&self, t: f64) -> Complex64 {
        Self::phase_sum(&self.c, self.l_max, self.omega * t)
    }

    /// t = 0 values, with the opposite-index coefficients summed in pairs so
    /// the exact antisymmetries of the b and c coefficient sets cancel in
    /// floating point rather than leaving rounding residue.
    pub fn at_zero(&self) -> (f64, f64, f64) {
        let l = self.l_max;
        let paired = |coeffs: &[f64]| -> f64 {
            let mut sum = coeffs[l as usize];
            for n in 1..=l {
                sum += coeffs[(n + l) as usize] + coeffs[(-n + l) as usize];
            }
            sum
        };
        let a0 = paired(&self.a);
        let b0 = a0 * a0 / 8.0 + paired(&self.b);
        let c0 = paired(&self.c);
        (a0, b0, c0)
    }
}

/// Which defining branch produced the d, f survival constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HarmonicBranch {
    /// |ε - mω| below threshold: d = B(0), f = -B(0).
    Resonant,
    /// Generic rational expressions evaluated.
    Generic,
    /// The generic expressions hit their division guard.  This is the
    /// expected outcome wherever the series identities B(0) = A(0)²/8 and
    /// C(0) = 0 hold to machine precision: the generic branch degenerates to
    /// 0/0 and carries no information.
    GuardedIdentity,
}

/// Time-independent constants of the second-order survival assembly.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HarmonicConstants {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub d: Option<f64>,
    pub f: Option<f64>,
    pub branch: HarmonicBranch,
}

const RESONANT_BRANCH_TOL: f64 = 1e-9;
const DIVISION_GUARD: f64 = 1e-14;

/// Evaluate A(0), B(0), C(0) and the derived d, f constants.
pub fn harmonic_constants(ctx: &ResonanceContext) -> Result<HarmonicConstants> {
    let series = HarmonicSeries::new(ctx)?;
    let (a0, b0, c0) = series.at_zero();
    let p = &ctx.params;

    if (p.epsilon - ctx.m as f64 * p.omega).abs() < RESONANT_BRANCH_TOL * p.delta {
        return Ok(HarmonicConstants {
            a0,
            b0,
            c0,
            d: Some(b0),
            f: Some(-b0),
            branch: HarmonicBranch::Resonant,
        });
    }

    let theta = ctx.angles(AnalyticOrder::VanVleck2)?.theta;
    let (a, b, c) = (a0 / p.delta, b0 / (p.delta * p.delta), c0 / (p.delta * p.delta));
    let den = 0.25 * a * a - 2.0 * b - 2.0 * c * theta.cos();
    let radicand = 0.25 * a * a - 2.0 * b - c - 3.0 * c * theta.cos();
    if den.abs() < DIVISION_GUARD || radicand < 0.0 {
        return Ok(HarmonicConstants {
            a0,
            b0,
            c0,
            d: None,
            f: None,
            branch: HarmonicBranch::GuardedIdentity,
        });
    }
    let d2 = p.delta * p.delta;
    let cos_t = theta.cos();
    let cos_2t = (2.0 * theta).cos();
    let root = radicand.sqrt();
    let d = d2 / den
        * (a / 16.0 - 0.75 * b * a * a + 2.0 * b + 2.0 * c * c
            - 2.0 * c * (0.5 * a * a - 3.0 * b) * cos_t
            + 2.0 * c * c * cos_2t
            - 0.5 * a * radicand * root);
    let f = d2 / den * (0.25 * c * a * a - 2.0 * b * c - 2.0 * c * c * cos_t);
    Ok(HarmonicConstants {
        a0,
        b0,
        c0,
        d: Some(d),
        f: Some(f),
        branch: HarmonicBranch::Generic,
    })
}

/// Approximation tier of the nondissipative survival probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurvivalTier {
    /// Resonant-block two-level formula.
    Rwa,
    /// First-order eigenstates driving the resonant-block phases.
    Vv1,
    /// Full second-order assembly with the A, B, C correction series.
    Vv2,
    /// Second-order splitting and angle in the two-level formula
    /// (periodic micromotion averaged away).
    Vv2Averaged,
}

/// Spin-down return amplitudes of the doublet at time `t`, with the global
/// dynamical phase removed.  First element belongs to the minus branch.
pub struct DownAmplitudes {
    pub minus: Complex64,
    pub plus: Complex64,
    /// Splitting used in the accompanying phase factor.
    pub splitting: f64,
}

fn down_amplitudes_series(
    ctx: &ResonanceContext,
    tier: SurvivalTier,
    series: &HarmonicSeries,
    t: f64,
) -> Result<DownAmplitudes> {
    let order = match tier {
        SurvivalTier::Vv1 => AnalyticOrder::Rwa,
        _ => AnalyticOrder::VanVleck2,
    };
    let angles = ctx.angles(order)?;
    let (sh, ch) = (0.5 * angles.theta).sin_cos();
    let s = angles.sign_dm;
    let (at, bt, ct) = if tier == SurvivalTier::Vv1 {
        (series.eval_a(t), Complex64::default(), Complex64::default())
    } else {
        (series.eval_a(t), series.eval_b(t), series.eval_c(t))
    };
    let emt = Complex64::from_polar(1.0, -(ctx.m as f64) * ctx.params.omega * t);
    let minus = -s * ch * emt - 0.5 * sh * at + s * ch * emt * (bt + ct);
    let plus = -s * sh + 0.5 * ch * emt.conj() * at + s * sh * (bt - ct.conj());
    Ok(DownAmplitudes {
        minus,
        plus,
        splitting: angles.splitting,
    })
}

/// Survival probability of the spin-down state over a time grid.
///
/// The `Rwa`/`Vv2Averaged` tiers use the two-level formula
/// `cos²(Ωt/2) + cos²Θ sin²(Ωt/2)` with the tier's splitting and angle; the
/// `Vv1`/`Vv2` tiers assemble the probability from the branch amplitudes,
/// with the initial density built from the t = 0 amplitudes and renormalized
/// against the perturbative norm deficit.
pub fn survival_probability(
    ctx: &ResonanceContext,
    tier: SurvivalTier,
    times: &[f64],
) -> Result<Vec<f64>> {
    match tier {
        SurvivalTier::Rwa | SurvivalTier::Vv2Averaged => {
            let order = if tier == SurvivalTier::Rwa {
                AnalyticOrder::Rwa
            } else {
                AnalyticOrder::VanVleck2
            };
            let angles = ctx.angles(order)?;
            let cos2 = angles.theta.cos().powi(2);
            Ok(times
                .iter()
                .map(|&t| {
                    let (s, c) = (0.5 * angles.splitting * t).sin_cos();
                    c * c + cos2 * s * s
                })
                .collect())
        }
        SurvivalTier::Vv1 | SurvivalTier::Vv2 => {
            let series = HarmonicSeries::new(ctx)?;
            let a0 = down_amplitudes_series(ctx, tier, &series, 0.0)?;
            let n0 = a0.minus.norm_sqr() + a0.plus.norm_sqr();
            let rho_mm = a0.minus.norm_sqr() / n0;
            let rho_mp = a0.minus.conj() * a0.plus / n0;
            let rot = ctx.m as f64 * ctx.params.omega + a0.splitting;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                let a = down_amplitudes_series(ctx, tier, &series, t)?;
                let ph = Complex64::from_polar(1.0, rot * t);
                let p = (a.minus.norm_sqr() - a.plus.norm_sqr()) * rho_mm
                    + a.plus.norm_sqr()
                    + 2.0 * (a.minus * a.plus.conj() * rho_mp * ph).re;
                out.push(p);
            }
            Ok(out)
        }
    }
}
