//! Closed-form Lyapunov exponent, its lower bound, and the regime
//! classifiers built on it.
//!
//! For the reference family the exponent on the spectrum is
//!
//! ```text
//! L(E) = max{ log| (s ± sqrt(s^2 - 4 alpha^2)) / (2 (1 + sqrt(1 - alpha^2))) |, 0 },
//! s = alpha E + 2 lambda,
//! ```
//!
//! with the max running over both square-root branches. The same algebra with
//! complex `z` is a lower bound at every energy. Consequences implemented
//! here: the mobility edge `alpha E = 2 sgn(lambda) (1 - |lambda|)`, the
//! positive/zero-LE split across it, and the parameter-plane trichotomy
//! (coexistence / all-positive / all-zero).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{canonicalize, PotentialModel};

/// Exact-equality tolerance for edge classification, in `alpha E` units.
pub const EDGE_TOL: f64 = 1e-12;

/// Point classification on the energy axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    PositiveLE,
    ZeroLE,
    Edge,
}

/// A classified point with its closed-form exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimePoint {
    pub classification: Regime,
    pub le_value: f64,
}

/// Parameter-plane classification per the coexistence trichotomy. Pairs in
/// the two annuli the theory is silent about map to `Indeterminate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParameterRegime {
    Coexistence,
    AllPositive,
    AllZero,
    Indeterminate,
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "|alpha| must be < 1, got {alpha}"
        )))
    }
}

fn check_alpha_closed(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "|alpha| must be <= 1, got {alpha}"
        )))
    }
}

/// Core formula, valid for |alpha| <= 1 (the closed endpoints arise only via
/// canonicalized tan^2 / periodic models, where the denominator factor
/// degenerates to 1).
fn le_formula_unchecked(alpha: f64, lambda: f64, energy: f64) -> f64 {
    let s = alpha * energy + 2.0 * lambda;
    let denom = 1.0 + (1.0 - alpha * alpha).max(0.0).sqrt();
    let disc = s * s - 4.0 * alpha * alpha;
    let max_modulus = if disc >= 0.0 {
        let root = disc.sqrt();
        // both branches are real; their moduli are |s| ± root over 2
        (s.abs() + root) / 2.0
    } else {
        // complex-conjugate branches, each of modulus |alpha|
        alpha.abs()
    };
    let ratio = max_modulus / (2.0 * denom) * 2.0; // = max_modulus / denom
    if ratio > 0.0 {
        ratio.ln().max(0.0)
    } else {
        0.0
    }
}

/// Closed-form Lyapunov exponent of the reference family at real energy
/// `energy`, valid for energies in the spectrum. Requires |alpha| < 1; the
/// |alpha| = 1 limits are reachable through [`lyapunov_formula_canonical`].
pub fn lyapunov_formula(alpha: f64, lambda: f64, energy: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    Ok(le_formula_unchecked(alpha, lambda, energy))
}

/// Same formula with the closed parameter range |alpha| <= 1, for use with
/// canonicalized models (tan^2 maps to alpha_eff = -1).
pub fn lyapunov_formula_canonical(alpha: f64, lambda: f64, energy: f64) -> Result<f64> {
    check_alpha_closed(alpha)?;
    Ok(le_formula_unchecked(alpha, lambda, energy))
}

/// Closed-form exponent for an arbitrary model, routed through
/// `canonicalize`.
pub fn lyapunov_formula_model(model: &PotentialModel, energy: f64) -> Result<f64> {
    let c = canonicalize(model)?;
    lyapunov_formula_canonical(c.alpha_eff, c.lambda_eff, energy - c.energy_shift)
}

/// Lower bound on the Lyapunov exponent at any complex energy `z`: the same
/// two-branch algebra with `s = alpha z + 2 lambda` complex. For real
/// energies in the spectrum the bound is attained and equals
/// [`lyapunov_formula`].
pub fn herman_lower_bound(alpha: f64, lambda: f64, z: Complex64) -> Result<f64> {
    check_alpha_open(alpha)?;
    let s = alpha * z + 2.0 * lambda;
    let denom = 1.0 + (1.0 - alpha * alpha).sqrt();
    let disc = s * s - 4.0 * alpha * alpha;
    let root = disc.sqrt();
    let m = ((s + root).norm() / 2.0).max((s - root).norm() / 2.0);
    let ratio = m / denom;
    Ok(if ratio > 0.0 { ratio.ln().max(0.0) } else { 0.0 })
}

/// Signed mobility-edge residual `alpha E - 2 sgn(lambda) (1 - |lambda|)`.
/// Zero on the edge; its sign against sgn(lambda) decides the regime.
/// Returns `None` for lambda = 0 (no edge exists).
pub fn edge_residual(alpha: f64, lambda: f64, energy: f64) -> Option<f64> {
    if lambda == 0.0 {
        None
    } else {
        Some(alpha * energy - 2.0 * lambda.signum() * (1.0 - lambda.abs()))
    }
}

/// Classify a real energy against the mobility edge. Accepts |alpha| <= 1 so
/// canonicalized tan^2 parameters can be classified; meaningful for energies
/// in the spectrum (or its containment interval).
pub fn classify_regime_point(alpha: f64, lambda: f64, energy: f64) -> Result<RegimePoint> {
    check_alpha_closed(alpha)?;
    let le_value = le_formula_unchecked(alpha, lambda, energy);
    let classification = match edge_residual(alpha, lambda, energy) {
        None => Regime::ZeroLE,
        Some(d) if d.abs() <= EDGE_TOL => Regime::Edge,
        Some(d) => {
            let positive = if lambda > 0.0 { d > 0.0 } else { d < 0.0 };
            if positive {
                Regime::PositiveLE
            } else {
                Regime::ZeroLE
            }
        }
    };
    Ok(RegimePoint {
        classification,
        le_value,
    })
}

/// Classify through a model's canonical form.
pub fn classify_model_energy(model: &PotentialModel, energy: f64) -> Result<RegimePoint> {
    let c = canonicalize(model)?;
    classify_regime_point(c.alpha_eff, c.lambda_eff, energy - c.energy_shift)
}

/// The mobility-edge energy `E* = 2 sgn(lambda) (1 - |lambda|) / alpha`.
///
/// Errors `DegenerateEdge` when alpha = 0 (almost Mathieu: the transition is
/// in lambda, not E) or lambda = 0 (free-like, everything is zero-LE).
pub fn mobility_edge_energy(alpha: f64, lambda: f64) -> Result<f64> {
    check_alpha_closed(alpha)?;
    if alpha == 0.0 || lambda == 0.0 {
        return Err(Error::DegenerateEdge(format!(
            "no finite edge for alpha = {alpha}, lambda = {lambda}"
        )));
    }
    Ok(2.0 * lambda.signum() * (1.0 - lambda.abs()) / alpha)
}

/// Parameter-plane trichotomy:
/// coexistence for `1 - |alpha| < |lambda| < 1 + |alpha|`, all-positive for
/// `|lambda| > (1 + |alpha|)^2`, all-zero for `|lambda| <= (1 - |alpha|)^2`,
/// `Indeterminate` in the two remaining annuli.
pub fn classify_parameter_regime(alpha: f64, lambda: f64) -> Result<ParameterRegime> {
    check_alpha_open(alpha)?;
    let a = alpha.abs();
    let l = lambda.abs();
    Ok(if 1.0 - a < l && l < 1.0 + a {
        ParameterRegime::Coexistence
    } else if l > (1.0 + a) * (1.0 + a) {
        ParameterRegime::AllPositive
    } else if l <= (1.0 - a) * (1.0 - a) {
        ParameterRegime::AllZero
    } else {
        ParameterRegime::Indeterminate
    })
}

/// Reciprocal of the closed-form exponent; defined only where it is positive.
pub fn localization_length(alpha: f64, lambda: f64, energy: f64) -> Result<f64> {
    let point = classify_regime_point(alpha, lambda, energy)?;
    if point.classification == Regime::PositiveLE && point.le_value > 0.0 {
        Ok(1.0 / point.le_value)
    } else {
        Err(Error::NotLocalized(format!(
            "Lyapunov exponent is {} at (alpha={alpha}, lambda={lambda}, E={energy})",
            point.le_value
        )))
    }
}
