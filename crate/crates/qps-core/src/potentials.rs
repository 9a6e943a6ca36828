//! Potential families for the discrete operator
//! `(H u)_n = u_{n+1} + u_{n-1} + v(n b + theta) u_n`.
//!
//! The reference family is
//!
//! ```text
//! v(theta) = 2 lambda cos(2 pi theta) / (1 - alpha cos(2 pi theta)),  |alpha| < 1
//! ```
//!
//! with the almost Mathieu operator as the `alpha = 0` special case, a
//! shifted variant `2 lambda (1 - cos) / (1 - alpha cos)`, and the unbounded
//! `2 lambda tan^2(pi theta)` family. The last two reduce to the reference
//! family by an affine reparameterization (`canonicalize`), which is how all
//! closed-form Lyapunov expressions are evaluated for them.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Guard half-width around theta = 1/2 for the tan^2 singularity. Irrational
/// orbits never land in it; rejecting it keeps log-norm sums finite without
/// measurably biasing Birkhoff averages.
pub const SINGULAR_GUARD: f64 = 1e-12;

/// Potential values are clamped to this magnitude outside the guard band.
pub const CLAMP_LIMIT: f64 = 1e300;

static CLAMP_WARNINGS: AtomicU64 = AtomicU64::new(0);

/// Number of potential evaluations clamped to `±CLAMP_LIMIT` since process start.
pub fn clamp_warning_count() -> u64 {
    CLAMP_WARNINGS.load(Ordering::Relaxed)
}

/// One of the four potential families. `lambda` is the coupling; `alpha` the
/// deformation parameter where the family has one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum PotentialModel {
    /// `2 lambda cos(2 pi theta) / (1 - alpha cos(2 pi theta))`, |alpha| < 1.
    Gps { lambda: f64, alpha: f64 },
    /// `2 lambda cos(2 pi theta)` (alpha = 0).
    AlmostMathieu { lambda: f64 },
    /// `2 lambda (1 - cos(2 pi theta)) / (1 - alpha cos(2 pi theta))`, |alpha| < 1.
    ShiftedGps { lambda: f64, alpha: f64 },
    /// `2 lambda tan^2(pi theta)`; singular at theta = 1/2 (mod 1).
    TanSquared { lambda: f64 },
}

/// Affine reduction of a model to the reference family: evaluating the
/// closed-form Lyapunov exponent at `(alpha_eff, lambda_eff, E - energy_shift)`
/// gives the model's exponent. `alpha_eff = -1` (tan^2) is legal here and is
/// handled by the formula's |alpha| = 1 limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalForm {
    pub lambda_eff: f64,
    pub alpha_eff: f64,
    pub energy_shift: f64,
}

impl PotentialModel {
    /// Coupling constant of the family.
    pub fn lambda(&self) -> f64 {
        match *self {
            PotentialModel::Gps { lambda, .. }
            | PotentialModel::AlmostMathieu { lambda }
            | PotentialModel::ShiftedGps { lambda, .. }
            | PotentialModel::TanSquared { lambda } => lambda,
        }
    }

    /// Deformation parameter; 0 for almost Mathieu, -1 for tan^2 (its
    /// canonical value).
    pub fn alpha(&self) -> f64 {
        match *self {
            PotentialModel::Gps { alpha, .. } | PotentialModel::ShiftedGps { alpha, .. } => alpha,
            PotentialModel::AlmostMathieu { .. } => 0.0,
            PotentialModel::TanSquared { .. } => -1.0,
        }
    }

    /// Check the family invariants: finite coupling, |alpha| < 1 where alpha
    /// is a free parameter.
    pub fn validate(&self) -> Result<()> {
        let lambda = self.lambda();
        if !lambda.is_finite() {
            return Err(Error::InvalidModel(format!("non-finite lambda {lambda}")));
        }
        match *self {
            PotentialModel::Gps { alpha, .. } | PotentialModel::ShiftedGps { alpha, .. } => {
                if !(alpha.is_finite() && alpha.abs() < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "|alpha| must be < 1, got {alpha}"
                    )));
                }
            }
            PotentialModel::AlmostMathieu { .. } | PotentialModel::TanSquared { .. } => {}
        }
        Ok(())
    }
}

fn clamp_extreme(v: f64) -> f64 {
    if v.abs() > CLAMP_LIMIT || !v.is_finite() {
        CLAMP_WARNINGS.fetch_add(1, Ordering::Relaxed);
        CLAMP_LIMIT.copysign(v)
    } else {
        v
    }
}

/// Distance from `theta` (mod 1) to the tan^2 singularity at 1/2.
fn dist_to_half(theta: f64) -> f64 {
    let t = (theta - 0.5).rem_euclid(1.0);
    t.min(1.0 - t)
}

/// Evaluate `v(theta)`. Periodic with period 1 in `theta`.
///
/// Errors: `SingularPhase` if a tan^2 evaluation falls inside the guard band
/// around theta = 1/2; `InvalidModel` for invalid parameters.
pub fn eval_potential(model: &PotentialModel, theta: f64) -> Result<f64> {
    model.validate()?;
    let c = (std::f64::consts::TAU * theta).cos();
    let v = match *model {
        PotentialModel::Gps { lambda, alpha } => 2.0 * lambda * c / (1.0 - alpha * c),
        PotentialModel::AlmostMathieu { lambda } => 2.0 * lambda * c,
        PotentialModel::ShiftedGps { lambda, alpha } => {
            2.0 * lambda * (1.0 - c) / (1.0 - alpha * c)
        }
        PotentialModel::TanSquared { lambda } => {
            if dist_to_half(theta) < SINGULAR_GUARD {
                return Err(Error::SingularPhase(format!(
                    "tan^2 potential evaluated within {SINGULAR_GUARD} of theta = 1/2 (theta = {theta})"
                )));
            }
            // 2 lambda tan^2(pi theta) = 2 lambda (1 - cos 2 pi theta) / (1 + cos 2 pi theta)
            2.0 * lambda * (1.0 - c) / (1.0 + c)
        }
    };
    Ok(clamp_extreme(v))
}

/// Evaluate `v` at the complexified phase `theta + i eps`. Used by the
/// cocycle module; the caller is responsible for checking the analyticity
/// strip (`strip_half_width`).
pub fn eval_potential_complex(model: &PotentialModel, theta: f64, eps: f64) -> Result<Complex64> {
    model.validate()?;
    if eps == 0.0 {
        return Ok(Complex64::new(eval_potential(model, theta)?, 0.0));
    }
    let z = Complex64::new(theta, eps) * std::f64::consts::TAU;
    let c = z.cos();
    let v = match *model {
        PotentialModel::Gps { lambda, alpha } => {
            let denom = Complex64::new(1.0, 0.0) - alpha * c;
            if denom.norm() < SINGULAR_GUARD {
                return Err(Error::SingularPhase(format!(
                    "GPS denominator vanished at theta = {theta}, eps = {eps}"
                )));
            }
            2.0 * lambda * c / denom
        }
        PotentialModel::AlmostMathieu { lambda } => 2.0 * lambda * c,
        PotentialModel::ShiftedGps { lambda, alpha } => {
            let denom = Complex64::new(1.0, 0.0) - alpha * c;
            if denom.norm() < SINGULAR_GUARD {
                return Err(Error::SingularPhase(format!(
                    "shifted GPS denominator vanished at theta = {theta}, eps = {eps}"
                )));
            }
            2.0 * lambda * (Complex64::new(1.0, 0.0) - c) / denom
        }
        PotentialModel::TanSquared { lambda } => {
            let denom = Complex64::new(1.0, 0.0) + c;
            if denom.norm() < SINGULAR_GUARD {
                return Err(Error::SingularPhase(format!(
                    "tan^2 denominator vanished at theta = {theta}, eps = {eps}"
                )));
            }
            2.0 * lambda * (Complex64::new(1.0, 0.0) - c) / denom
        }
    };
    Ok(v)
}

/// Exact infimum/supremum of `v` over the circle.
///
/// For the bounded families the extrema sit at cos(2 pi theta) = ±1; tan^2 is
/// one-sided unbounded and returns an infinity sentinel on that side.
pub fn potential_bounds(model: &PotentialModel) -> Result<(f64, f64)> {
    model.validate()?;
    let lambda = model.lambda();
    Ok(match *model {
        PotentialModel::Gps { alpha, .. } => {
            // v(c) = 2 lambda c / (1 - alpha c) is monotone in c with slope sign = sign(lambda)
            let at_minus = -2.0 * lambda / (1.0 + alpha);
            let at_plus = 2.0 * lambda / (1.0 - alpha);
            if lambda >= 0.0 {
                (at_minus, at_plus)
            } else {
                (at_plus, at_minus)
            }
        }
        PotentialModel::AlmostMathieu { lambda } => (-2.0 * lambda.abs(), 2.0 * lambda.abs()),
        PotentialModel::ShiftedGps { alpha, .. } => {
            // v(c) = 2 lambda (1 - c)/(1 - alpha c): 0 at c = 1, 4 lambda/(1+alpha) at c = -1
            let at_minus = 4.0 * lambda / (1.0 + alpha);
            if lambda >= 0.0 {
                (0.0, at_minus)
            } else {
                (at_minus, 0.0)
            }
        }
        PotentialModel::TanSquared { lambda } => {
            if lambda > 0.0 {
                (0.0, f64::INFINITY)
            } else if lambda < 0.0 {
                (f64::NEG_INFINITY, 0.0)
            } else {
                (0.0, 0.0)
            }
        }
    })
}

/// Reduce a model to the reference family.
///
/// `v_model(theta) = energy_shift + v_gps(lambda_eff, alpha_eff)(theta)`, so
/// the spectral data of the model at energy E matches the reference family at
/// `E - energy_shift`.
pub fn canonicalize(model: &PotentialModel) -> Result<CanonicalForm> {
    model.validate()?;
    Ok(match *model {
        PotentialModel::Gps { lambda, alpha } => CanonicalForm {
            lambda_eff: lambda,
            alpha_eff: alpha,
            energy_shift: 0.0,
        },
        PotentialModel::AlmostMathieu { lambda } => CanonicalForm {
            lambda_eff: lambda,
            alpha_eff: 0.0,
            energy_shift: 0.0,
        },
        // 2l(1-c)/(1-ac) = 2l + 2l(a-1) c/(1-ac): coupling l(a-1), shift 2l
        PotentialModel::ShiftedGps { lambda, alpha } => CanonicalForm {
            lambda_eff: lambda * (alpha - 1.0),
            alpha_eff: alpha,
            energy_shift: 2.0 * lambda,
        },
        // 2l tan^2 = 2l - 4l c/(1+c): coupling -2l, parameter -1, shift 2l
        PotentialModel::TanSquared { lambda } => CanonicalForm {
            lambda_eff: -2.0 * lambda,
            alpha_eff: -1.0,
            energy_shift: 2.0 * lambda,
        },
    })
}

/// Half-width of the analyticity strip in the imaginary phase direction.
///
/// For the reference family the complexified denominator
/// `1 - alpha cos(2 pi (theta + i eps))` first vanishes at
/// `|eps| = log((1 + sqrt(1 - alpha^2)) / |alpha|) / (2 pi)`; alpha = 0 makes
/// the cocycle entire. tan^2 has poles only on the real axis (handled by the
/// singular guard), so complexified evaluation is unrestricted.
pub fn strip_half_width(model: &PotentialModel) -> Result<f64> {
    model.validate()?;
    let alpha = match *model {
        PotentialModel::Gps { alpha, .. } | PotentialModel::ShiftedGps { alpha, .. } => alpha,
        PotentialModel::AlmostMathieu { .. } => 0.0,
        PotentialModel::TanSquared { .. } => return Ok(f64::INFINITY),
    };
    if alpha == 0.0 {
        Ok(f64::INFINITY)
    } else {
        let a = alpha.abs();
        Ok(((1.0 + (1.0 - a * a).sqrt()) / a).ln() / std::f64::consts::TAU)
    }
}
