//! Tolerance tiers and finite-difference settings shared by every engine.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities.
    pub identity: f64,
    /// Quantities built from first derivatives.
    pub first_derivative: f64,
    /// Second derivatives and curvature.
    pub second_derivative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-12, first_derivative: 1e-8, second_derivative: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// First-derivative step, scaled by max(1, |x_i|).
    pub step: f64,
    /// Step for second differences. Roundoff there goes like eps/h^2.
    pub step_second: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-5, step_second: 1e-4, richardson: false }
    }
}
