//! Numeric tolerances shared by every routine in the crate.

/// Tolerances used across construction, validation and analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// Maximum |σ − σᵀ| accepted for a covariance matrix.
    pub symmetry: f64,
    /// Lower bound on the eigenvalues of σ + iΩ.
    pub bona_fide: f64,
    /// Maximum |UU† − I| entry accepted for a mode unitary.
    pub unitarity: f64,
    /// Maximum |SΩSᵀ − Ω| entry accepted for a symplectic matrix.
    pub symplecticity: f64,
    /// Pairing tolerance for the ± eigenvalue pairs of Ωσ.
    pub eigen_pairing: f64,
    /// Condition number above which the steering block is pseudo-inverted.
    pub max_condition: f64,
    /// Relative singular-value cutoff of the pseudo-inverse.
    pub pinv_cutoff: f64,
    /// A symplectic eigenvalue contributes to G only below 1 − this.
    pub eigen_cutoff: f64,
    /// G above this value counts as "steering exists".
    pub positivity: f64,
    /// Absolute tolerance (in weight) of boundary bisection.
    pub bisection: f64,
    /// Transmittance clamp used when sweeping towards the open endpoints.
    pub t2_clamp: (f64, f64),
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        symmetry: 1e-12,
        bona_fide: 1e-9,
        unitarity: 1e-12,
        symplecticity: 1e-10,
        eigen_pairing: 1e-8,
        max_condition: 1e12,
        pinv_cutoff: 1e-12,
        eigen_cutoff: 1e-12,
        positivity: 1e-9,
        bisection: 1e-4,
        t2_clamp: (0.001, 0.999),
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Process-wide policy.
pub const POLICY: NumericPolicy = NumericPolicy::DEFAULT;

pub(crate) fn max_abs_diff(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
