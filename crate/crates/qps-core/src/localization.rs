//! Localization diagnostics for finite-truncation eigenstates: inverse
//! participation ratio, exponential-envelope decay fits, and classification
//! against the analytic mobility edge.

use serde::Serialize;

use crate::analytic::{classify_regime_point, edge_residual, Regime};
use crate::error::{Error, Result};
use crate::spectrum::SpectralData;

/// Classification thresholds. The theory gives no finite-size criteria, so
/// these are configuration with stated defaults.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassifyThresholds {
    /// IPR above this (plus a successful decay fit) marks a state Localized.
    pub c_loc: f64,
    /// IPR below `c_ext / N^0.8` marks a state Extended.
    pub c_ext: f64,
    /// Minimum decay-fit r^2 for the Localized label.
    pub r2_min: f64,
    /// Minimum distance from the mobility edge, in `alpha E` units, for a
    /// state to count in edge-agreement scoring.
    pub edge_margin: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self {
            c_loc: 0.05,
            c_ext: 10.0,
            r2_min: 0.8,
            edge_margin: 0.1,
        }
    }
}

/// Spatial character of one eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateClass {
    Localized,
    Extended,
    Unresolved,
}

/// Per-state diagnostics. `decay_rate`/`fit_r2` are present only when the
/// envelope fit had at least 10 usable sites and r^2 >= 0.5.
#[derive(Debug, Clone, Serialize)]
pub struct StateDiagnostics {
    pub energy: f64,
    pub ipr: f64,
    pub decay_rate: Option<f64>,
    pub fit_r2: Option<f64>,
    pub classification: StateClass,
}

/// Where to anchor the decay fit.
#[derive(Debug, Clone, Copy)]
pub enum CenterPolicy {
    /// Amplitude peak (argmax |u_n|).
    ArgMax,
    /// Fixed site index.
    Site(usize),
}

/// Inverse participation ratio `sum u_n^4` of a unit-norm vector: 1/N for a
/// uniform state, 1 for a single-site state.
pub fn ipr(vector: &[f64]) -> Result<f64> {
    let norm2: f64 = vector.iter().map(|u| u * u).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(format!(
            "|u| = {} (need 1 within 1e-8)",
            norm2.sqrt()
        )));
    }
    Ok(vector.iter().map(|u| u * u * u * u).sum())
}

/// Least-squares fit of `log|u_n|` against distance from the peak, skipping a
/// 5-site core (the exponential bound is asymptotic in |n|) and amplitudes at
/// the numerical floor. Returns (rate, r^2) with rate >= 0 for decay.
///
/// Errors `FitFailure` when fewer than 10 sites are usable.
pub fn decay_rate_fit(vector: &[f64], center: CenterPolicy) -> Result<(f64, f64)> {
    if vector.len() < 50 {
        return Err(Error::InvalidParameter(format!(
            "decay fit needs at least 50 sites, got {}",
            vector.len()
        )));
    }
    let peak = match center {
        CenterPolicy::ArgMax => vector
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0),
        CenterPolicy::Site(i) => {
            if i >= vector.len() {
                return Err(Error::InvalidParameter(format!(
                    "center site {i} out of range"
                )));
            }
            i
        }
    };

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &u) in vector.iter().enumerate() {
        let d = (i as i64 - peak as i64).unsigned_abs() as f64;
        if d <= 2.0 || u.abs() <= 1e-14 {
            continue; // 5-site core, or at the floor
        }
        xs.push(d);
        ys.push(u.abs().ln());
    }
    if xs.len() < 10 {
        return Err(Error::FitFailure(format!(
            "only {} usable sites for the envelope fit",
            xs.len()
        )));
    }

    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailure("degenerate fit abscissa".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(((-slope).max(0.0), r2))
}

/// Classify one normalized eigenstate from its IPR and decay fit.
pub fn classify_state(
    energy: f64,
    vector: &[f64],
    thresholds: &ClassifyThresholds,
) -> Result<StateDiagnostics> {
    let n = vector.len();
    let ipr_value = ipr(vector)?;
    let fit = decay_rate_fit(vector, CenterPolicy::ArgMax).ok();
    let (decay_rate, fit_r2) = match fit {
        Some((rate, r2)) if r2 >= 0.5 => (Some(rate), Some(r2)),
        _ => (None, None),
    };

    let fit_ok = matches!((decay_rate, fit_r2), (Some(_), Some(r2)) if r2 >= thresholds.r2_min);
    let classification = if ipr_value > thresholds.c_loc && fit_ok {
        StateClass::Localized
    } else if ipr_value < thresholds.c_ext / (n as f64).powf(0.8) {
        StateClass::Extended
    } else {
        StateClass::Unresolved
    };

    Ok(StateDiagnostics {
        energy,
        ipr: ipr_value,
        decay_rate,
        fit_r2,
        classification,
    })
}

/// Fraction of resolved states whose spatial classification matches the
/// analytic regime (PositiveLE <-> Localized, ZeroLE <-> Extended), over
/// eigenpairs at distance >= `edge_margin` (in `alpha E` units) from the
/// mobility edge. `alpha`/`lambda` are canonical-form parameters.
///
/// Errors `NoResolvedStates` when every margin-passing state is Unresolved.
pub fn edge_agreement(
    spectral: &SpectralData,
    alpha: f64,
    lambda: f64,
    thresholds: &ClassifyThresholds,
) -> Result<f64> {
    let vectors = spectral.eigenvectors.as_ref().ok_or_else(|| {
        Error::InvalidParameter("edge_agreement needs eigenvectors".into())
    })?;
    let mut resolved = 0usize;
    let mut agree = 0usize;
    for (i, &energy) in spectral.eigenvalues.iter().enumerate() {
        if let Some(d) = edge_residual(alpha, lambda, energy) {
            if d.abs() < thresholds.edge_margin {
                continue;
            }
        }
        let diag = classify_state(energy, &vectors[i], thresholds)?;
        if diag.classification == StateClass::Unresolved {
            continue;
        }
        let regime = classify_regime_point(alpha, lambda, energy)?;
        let expected = match regime.classification {
            Regime::PositiveLE => StateClass::Localized,
            Regime::ZeroLE => StateClass::Extended,
            Regime::Edge => continue, // only reachable at exact float equality
        };
        resolved += 1;
        if diag.classification == expected {
            agree += 1;
        }
    }
    if resolved == 0 {
        return Err(Error::NoResolvedStates);
    }
    Ok(agree as f64 / resolved as f64)
}
