//! Error type shared across the library.

/// Everything that can go wrong in this crate.
///
/// Numerical guards are deliberately loud: a denominator creeping under its
/// guard or a truncation that refuses to converge is reported as an error
/// instead of being silently clamped, so that corrupted sweeps cannot
/// masquerade as physics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Bessel order {order} exceeds the supported ceiling {max}")]
    BesselOrderOverflow { order: i32, max: i32 },

    #[error("Bessel argument must be finite, got {arg}")]
    BesselDomain { arg: f64 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix within {max_iter} iterations")]
    EigenConvergence { dim: usize, max_iter: usize },

    #[error(
        "photon ladder not converged: central gap still changes by {change:.3e} \
         (tolerance {tol:.3e}) at half-width {n_tr}"
    )]
    TruncationNotConverged { change: f64, tol: f64, n_tr: usize },

    #[error(
        "ambiguous doublet selection: overlap scores {in_pair:.6e} and {next_best:.6e} \
         differ by less than {tol:.1e}"
    )]
    AmbiguousDoublet { in_pair: f64, next_best: f64, tol: f64 },

    #[error("photon index {photon} outside the ladder half-width {n_tr}")]
    PhotonOutOfRange { photon: i32, n_tr: usize },

    #[error(
        "near-singular series denominator at ladder index {index}: |{value:.3e}| < guard {guard:.3e}"
    )]
    NearSingularDenominator { index: i32, value: f64, guard: f64 },

    #[error("series not converged: relative change {change:.3e} after doubling to l_max = {l_max}")]
    SeriesNotConverged { change: f64, l_max: usize },

    #[error("no sign change of the bias condition in [{lo:.6}, {hi:.6}] (g(lo) = {g_lo:.3e}, g(hi) = {g_hi:.3e})")]
    NoRootInBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("{count} sign changes of the bias condition in [{lo:.6}, {hi:.6}]; refusing to pick one")]
    MultipleRoots { lo: f64, hi: f64, count: usize },

    #[error("trajectory spans {periods:.2} drive periods; at least {required} are needed")]
    RecordTooShort { periods: f64, required: f64 },

    #[error(
        "frequency resolution too coarse: bin spacing {resolution:.3e} exceeds {limit:.3e} \
         (a tenth of the slow oscillation frequency)"
    )]
    ResolutionTooCoarse { resolution: f64, limit: f64 },

    #[error("time grid must be uniform and strictly increasing")]
    NonUniformGrid,

    #[error("tier mismatch: density matrix evolved by `{density}` but eigenstates supplied by `{states}`")]
    TierMismatch { density: String, states: String },

    #[error("integrator step size underflow at t = {t:.6e} (step {step:.3e})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("eigenvalues too close for spectral evolution: |λ_i − λ_j| = {separation:.3e}")]
    DegenerateGenerator { separation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
