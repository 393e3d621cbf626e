//! Parameter bundles for the driven two-level system and its bath.
//!
//! The Hamiltonian is H(t) = −(ħ/2)[Δ σ_x + (ε + A cos ωt) σ_z] with ħ = 1.
//! The library is unit agnostic; the CLI expresses every energy in units of
//! the tunneling amplitude Δ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-system drive parameters: tunneling Δ, static bias ε, drive
/// amplitude A and drive angular frequency ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub delta: f64,
    pub epsilon: f64,
    pub amp: f64,
    pub omega: f64,
}

impl SystemParams {
    pub fn new(delta: f64, epsilon: f64, amp: f64, omega: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tunneling amplitude must be positive and finite, got {delta}"
            )));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drive frequency must be positive and finite, got {omega}"
            )));
        }
        if !(amp >= 0.0) || !amp.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drive amplitude must be non-negative and finite, got {amp}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "static bias must be finite, got {epsilon}"
            )));
        }
        Ok(Self { delta, epsilon, amp, omega })
    }

    /// Drive period T = 2π/ω.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// The Bessel argument A/ω controlling all dressed tunneling elements.
    pub fn drive_ratio(&self) -> f64 {
        self.amp / self.omega
    }

    /// Photon number of the closest multi-photon resonance, m = round(ε/ω).
    ///
    /// Between resonances this is the branch the rotating-wave treatment
    /// "takes"; the cut lines halfway between resonances are inherent to
    /// that approximation.
    pub fn nearest_resonance(&self) -> i32 {
        (self.epsilon / self.omega).round() as i32
    }
}

/// Ohmic bath: spectral density G(ν) = κν and inverse temperature β (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub kappa: f64,
    pub beta: f64,
}

impl BathParams {
    pub fn new(kappa: f64, beta: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bath coupling must be non-negative and finite, got {kappa}"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature must be positive and finite, got {beta}"
            )));
        }
        Ok(Self { kappa, beta })
    }
}

/// Photon-ladder truncation for the quasienergy matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Half-width of the photon ladder; the matrix dimension is 2(2 n_tr + 1).
    pub n_tr: usize,
    /// Convergence tolerance on the central-zone quasienergies when the
    /// ladder is grown adaptively.
    pub tol_conv: f64,
}

impl TruncationConfig {
    pub const MIN_HALF_WIDTH: usize = 4;

    /// Default rule: n_tr = ceil(2A/ω + |ε|/ω) + 10.
    ///
    /// Dressed couplings J_n(A/ω) die out superexponentially past |n| ≈ A/ω,
    /// and the bias shifts the window of relevant sidebands; the constant
    /// margin keeps the central doublet converged to ~1e-12 over the whole
    /// parameter range exercised here.
    pub fn for_params(p: &SystemParams) -> Self {
        let n = (2.0 * p.amp / p.omega + p.epsilon.abs() / p.omega).ceil() as usize + 10;
        Self {
            n_tr: n.max(Self::MIN_HALF_WIDTH),
            tol_conv: 1e-10 * p.delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tr < Self::MIN_HALF_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "ladder half-width must be at least {}, got {}",
                Self::MIN_HALF_WIDTH,
                self.n_tr
            )));
        }
        if !(self.tol_conv > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "convergence tolerance must be positive, got {}",
                self.tol_conv
            )));
        }
        Ok(())
    }
}
