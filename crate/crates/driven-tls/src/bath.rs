//! Ohmic bath spectral functions and golden-rule rates for the doublet.
//!
//! The environment couples to the same bias channel as the drive; its
//! influence on the doublet enters through the spectral density `G(ν) = κν`
//! weighted by thermal occupation.  Rates come in two routes that must agree
//! in overlapping regimes: closed forms organized per drive harmonic, and a
//! sum over position-coefficient tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::BathParams;
use crate::vanvleck::{AnalyticOrder, ResonanceContext};
use crate::xcoeffs::{Branch, PositionTable};

/// Ohmic spectral functions at inverse temperature β.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BathSpectrum {
    pub kappa: f64,
    pub beta: f64,
}

/// Below this |βν| the thermal functions switch to their ν → 0 limits.
const THERMAL_LIMIT_GUARD: f64 = 1e-10;

impl BathSpectrum {
    pub fn new(p: &BathParams) -> Self {
        Self {
            kappa: p.kappa,
            beta: p.beta,
        }
    }

    /// Bare spectral density `G(ν) = κν` (odd).
    pub fn spectral_density(&self, nu: f64) -> f64 {
        self.kappa * nu
    }

    /// Occupation-weighted density `N(ν) = G(ν) n_th(ν) = κν / (e^{βν} - 1)`.
    ///
    /// Finite and positive for both signs of ν; the removable singularity at
    /// ν = 0 is replaced by its limit κ/β.
    pub fn occupation_weighted(&self, nu: f64) -> f64 {
        let x = self.beta * nu;
        if x.abs() < THERMAL_LIMIT_GUARD {
            self.kappa / self.beta
        } else {
            self.kappa * nu / x.exp_m1()
        }
    }

    /// Symmetrized weight `κ (ν/2) coth(βν/2)` (even, limit κ/β at ν = 0).
    ///
    /// Equal to `N(ν) + G(ν)/2`; this is the combination that multiplies
    /// squared off-diagonal position coefficients in relaxation sums.
    pub fn symmetric_weight(&self, nu: f64) -> f64 {
        let x = self.beta * nu;
        if x.abs() < THERMAL_LIMIT_GUARD {
            self.kappa / self.beta
        } else {
            self.kappa * (nu / 2.0) / (0.5 * x).tanh()
        }
    }
}

/// Relaxation/dephasing contribution of one drive harmonic.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct HarmonicRates {
    pub relaxation: f64,
    pub dephasing: f64,
}

/// Golden-rule rates of the doublet, resolved per drive harmonic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateSet {
    pub relaxation: f64,
    pub dephasing: f64,
    pub per_harmonic: BTreeMap<i32, HarmonicRates>,
}

/// Default harmonic window of the closed-form rate sums.
pub const DEFAULT_RATE_HARMONICS: i32 = 24;

/// Closed-form rates at the requested order.
///
/// The leading order keeps a single (dressed two-level) term; the
/// second-order set resolves relaxation and dephasing per drive harmonic
/// and carries the curvature prefactor `1 - Σ'/2` on the central terms.
pub fn closed_rates(
    ctx: &ResonanceContext,
    bath: &BathSpectrum,
    order: AnalyticOrder,
    n_max: i32,
) -> Result<RateSet> {
    let angles = ctx.angles(order)?;
    let sin2 = angles.theta.sin().powi(2);
    let cos2 = angles.theta.cos().powi(2);
    let omega = ctx.params.omega;
    let m = ctx.m;
    let mut per = BTreeMap::new();

    match order {
        AnalyticOrder::Rwa => {
            let relaxation = std::f64::consts::PI * bath.symmetric_weight(angles.splitting) * sin2;
            let dephasing =
                0.5 * relaxation + std::f64::consts::PI * bath.occupation_weighted(0.0) * cos2;
            per.insert(
                0,
                HarmonicRates {
                    relaxation,
                    dephasing,
                },
            );
            Ok(RateSet {
                relaxation,
                dephasing,
                per_harmonic: per,
            })
        }
        AnalyticOrder::VanVleck2 => {
            let pi = std::f64::consts::PI;
            let corr = 1.0 - 0.5 * ctx.shift_curvature()?;
            let sh2 = (0.5 * angles.theta).sin().powi(2);
            let ch2 = (0.5 * angles.theta).cos().powi(2);

            let g0 = pi * bath.symmetric_weight(angles.splitting) * sin2 * corr;
            let pd0 = pi * bath.occupation_weighted(0.0) * cos2 * corr;
            per.insert(
                0,
                HarmonicRates {
                    relaxation: g0,
                    dephasing: 0.5 * g0 + pd0,
                },
            );
            let mut relaxation = g0;
            let mut pure_dephasing = pd0;
            for n in -n_max..=n_max {
                if n == 0 {
                    continue;
                }
                let den_a = ctx.params.epsilon - (n + m) as f64 * omega;
                let den_b = ctx.params.epsilon + (n - m) as f64 * omega;
                for (den, idx) in [(den_a, -(n + m)), (den_b, n - m)] {
                    if den.abs() < ctx.denominator_guard {
                        return Err(Error::NearSingularDenominator {
                            index: idx,
                            value: den,
                            guard: ctx.denominator_guard,
                        });
                    }
                }
                let kern_rel =
                    -sh2 * ctx.dressed(-(n + m))? / den_a + ch2 * ctx.dressed(n - m)? / den_b;
                let gn = pi
                    * bath.symmetric_weight(angles.splitting - n as f64 * omega)
                    * kern_rel
                    * kern_rel;

                let kern_deph = ctx.dressed(-m - n)? / (-den_a) - ctx.dressed(n - m)? / den_b;
                let pdn = 4.0
                    * pi
                    * bath.occupation_weighted(n as f64 * omega)
                    * (angles.theta.sin() / 4.0).powi(2)
                    * kern_deph
                    * kern_deph;

                per.insert(
                    n,
                    HarmonicRates {
                        relaxation: gn,
                        dephasing: 0.5 * gn + pdn,
                    },
                );
                relaxation += gn;
                pure_dephasing += pdn;
            }
            Ok(RateSet {
                relaxation,
                dephasing: 0.5 * relaxation + pure_dephasing,
                per_harmonic: per,
            })
        }
    }
}

/// Rates summed from a position-coefficient table.
///
/// `gap` is the zero-copy quasienergy difference `e_minus - e_plus`
/// (negative, of magnitude `mω + Ω`); relaxation weighs the off-diagonal
/// coefficients at the shifted frequencies `gap + nω`, pure dephasing the
/// diagonal ones at the harmonics themselves.  This route makes no
/// perturbative assumption about where the table came from, so it
/// cross-checks the closed forms when fed analytic coefficients and
/// benchmarks them when fed numeric ones.
pub fn rates_from_coefficients(
    table: &PositionTable,
    gap: f64,
    omega_drive: f64,
    bath: &BathSpectrum,
) -> RateSet {
    let pi = std::f64::consts::PI;
    let mut per = BTreeMap::new();
    let mut relaxation = 0.0;
    let mut pure_dephasing = 0.0;
    for n in table.harmonics() {
        let x_mp = table.get(Branch::Minus, Branch::Plus, n);
        let x_mm = table.get(Branch::Minus, Branch::Minus, n);
        let rel = 4.0 * pi * bath.symmetric_weight(gap + n as f64 * omega_drive) * x_mp * x_mp;
        let pd = 4.0 * pi * bath.occupation_weighted(n as f64 * omega_drive) * x_mm * x_mm;
        per.insert(
            n,
            HarmonicRates {
                relaxation: rel,
                dephasing: 0.5 * rel + pd,
            },
        );
        relaxation += rel;
        pure_dephasing += pd;
    }
    RateSet {
        relaxation,
        dephasing: 0.5 * relaxation + pure_dephasing,
        per_harmonic: per,
    }
}
