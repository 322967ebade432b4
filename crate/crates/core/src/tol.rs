//! Centralized numerical tolerances.
//!
//! Every comparison against a threshold in this crate goes through a
//! [`Tolerances`] value so that a single configuration governs the whole
//! pipeline and reports can record exactly which thresholds were in force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on row-contraction norms: `‖Σ T_i T_i*‖ ≤ 1 + contraction_slack`.
pub const DEFAULT_CONTRACTION_SLACK: f64 = 1e-9;

/// Eigenvalues of a nominally PSD Hermitian matrix in `[-clamp, 0)` are
/// clamped to zero; anything below `-clamp` is rejected.
pub const DEFAULT_HERMITIAN_PSD_CLAMP: f64 = 1e-10;

/// Margin band half-width for classifying eigenvalue moduli as unimodular.
pub const DEFAULT_UNIMODULAR_MARGIN: f64 = 1e-8;

/// Generic residual threshold for algebraic identities (commutators,
/// intertwining relations, isometry defects).
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// Relative singular-value threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Slack for the bound-chain inequalities checked by the verifier.
pub const DEFAULT_CHAIN_TOL: f64 = 1e-7;

/// Absolute clustering radius when grouping nearby eigenvalues into a
/// single root of the minimal polynomial.
pub const EIGEN_CLUSTER_RADIUS: f64 = 1e-7;

/// Spectral radius above `1 - ILL_CONDITIONED_RADIUS_GAP` marks a model
/// construction as ill-conditioned (results still returned, but flagged).
pub const ILL_CONDITIONED_RADIUS_GAP: f64 = 1e-4;

/// Condition-number ceiling for resolvent solves in kernel constructions.
pub const RESOLVENT_COND_LIMIT: f64 = 1e12;

/// Numerical thresholds used across the pipeline.
///
/// The defaults are chosen so that exact algebraic identities evaluated in
/// `f64` on well-conditioned inputs pass with two to four orders of
/// magnitude to spare, while genuinely broken hypotheses fail loudly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed excess over 1 for row-contraction norms.
    pub contraction_slack: f64,
    /// Negative-eigenvalue clamp for Hermitian square roots.
    pub hermitian_psd_clamp: f64,
    /// Half-width of the unimodularity margin band.
    pub unimodular_margin: f64,
    /// Residual threshold for algebraic identity checks.
    pub residual_tol: f64,
    /// Relative rank threshold for singular values.
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            contraction_slack: DEFAULT_CONTRACTION_SLACK,
            hermitian_psd_clamp: DEFAULT_HERMITIAN_PSD_CLAMP,
            unimodular_margin: DEFAULT_UNIMODULAR_MARGIN,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl Tolerances {
    /// Checks that every tolerance is finite, positive, and small enough
    /// to be meaningful as a tolerance.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("contraction_slack", self.contraction_slack),
            ("hermitian_psd_clamp", self.hermitian_psd_clamp),
            ("unimodular_margin", self.unimodular_margin),
            ("residual_tol", self.residual_tol),
            ("rank_tol", self.rank_tol),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 || v >= 1e-1 {
                return Err(Error::InvalidInput(format!(
                    "tolerance `{name}` must lie in (0, 0.1), got {v}"
                )));
            }
        }
        Ok(())
    }
}
