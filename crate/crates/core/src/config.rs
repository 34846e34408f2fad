//! Numerical tolerances with an environment override.

use std::env;

/// Environment variable overriding the structural tolerance (POVM and state checks).
pub const STRUCTURAL_TOL_ENV: &str = "EPIGAMBLE_TOLERANCE";
/// Environment variable overriding the solver gap and residual tolerance.
pub const SOLVER_TOL_ENV: &str = "EPIGAMBLE_SOLVER_TOLERANCE";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub structural: f64,
    pub gap: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            gap: 1e-9,
            residual: 1e-9,
        }
    }
}

impl Tolerances {
    /// Defaults, with any valid positive value from the environment applied.
    pub fn from_env() -> Self {
        let mut tol = Self::default();
        if let Some(v) = read_positive(STRUCTURAL_TOL_ENV) {
            tol.structural = v;
        }
        if let Some(v) = read_positive(SOLVER_TOL_ENV) {
            tol.gap = v;
            tol.residual = v;
        }
        tol
    }
}

fn read_positive(key: &str) -> Option<f64> {
    env::var(key)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
}
