//! Browser demo bindings: three interactive views over the core crate,
//! each returning a JSON payload the static page renders onto canvases.
//!
//! Build with `wasm-pack build --target web` (see `www/index.html`), or
//! compile on the host for the unit tests of the JSON producers.

// wasm-bindgen exports take flat scalar argument lists
#![allow(clippy::too_many_arguments)]

use wasm_bindgen::prelude::*;

use qps_core::analytic::{classify_model_energy, lyapunov_formula_model, Regime};
use qps_core::cocycle::{lyapunov_numeric, ComplexifiedPhase};
use qps_core::error::Error;
use qps_core::localization::{classify_state, ClassifyThresholds, StateClass};
use qps_core::potentials::PotentialModel;
use qps_core::spectrum::{
    build_truncation, eigenpairs, eigenvalues, PairSelection, QuasiPeriodicSetup,
};
use qps_core::sweep::{run_phase_diagram, Axis, AxisName, ModelKind, ModelSpec, SweepConfig};

fn parse_kind(model: &str) -> Result<ModelKind, Error> {
    match model {
        "gps" => Ok(ModelKind::Gps),
        "amo" => Ok(ModelKind::AlmostMathieu),
        "shifted" => Ok(ModelKind::ShiftedGps),
        "tan2" => Ok(ModelKind::TanSquared),
        _ => Err(Error::Config(format!("unknown model '{model}'"))),
    }
}

fn build_model(kind: &str, lambda: f64, alpha: f64) -> Result<PotentialModel, Error> {
    let m = ModelSpec {
        kind: parse_kind(kind)?,
        lambda,
        alpha,
    }
    .build();
    m.validate()?;
    Ok(m)
}

fn regime_tag(r: Regime) -> &'static str {
    match r {
        Regime::PositiveLE => "positive",
        Regime::ZeroLE => "zero",
        Regime::Edge => "edge",
    }
}

/// Phase-diagram grid over (alpha, E) at fixed lambda: per cell the mean
/// eigenstate IPR, the analytic regime, and the mobility-edge overlay.
pub fn phase_diagram_payload(
    lambda: f64,
    alpha_min: f64,
    alpha_max: f64,
    alpha_steps: usize,
    e_min: f64,
    e_max: f64,
    e_steps: usize,
    n: usize,
) -> Result<String, Error> {
    let mut cfg = SweepConfig::new(ModelSpec {
        kind: ModelKind::Gps,
        lambda,
        alpha: 0.0,
    });
    cfg.axes = vec![
        Axis {
            name: AxisName::Alpha,
            min: alpha_min,
            max: alpha_max,
            steps: alpha_steps,
        },
        Axis {
            name: AxisName::Energy,
            min: e_min,
            max: e_max,
            steps: e_steps,
        },
    ];
    cfg.truncation_size = n;
    cfg.threads = Some(1);
    let grid = run_phase_diagram(&cfg)?;

    let cells: Vec<serde_json::Value> = grid
        .cells
        .iter()
        .map(|c| {
            serde_json::json!({
                "ipr": c.ipr,
                "regime": c.regime.map(regime_tag),
                "ok": c.status == "ok",
            })
        })
        .collect();
    let doc = serde_json::json!({
        "lambda": lambda,
        "alpha": { "min": alpha_min, "max": alpha_max, "steps": alpha_steps },
        "energy": { "min": e_min, "max": e_max, "steps": e_steps },
        "cells": cells,
        "edge_curve": grid.edge_curve,
    });
    Ok(doc.to_string())
}

/// Closed-form vs transfer-matrix Lyapunov exponent along an energy axis,
/// with in-spectrum markers from an N-site truncation.
pub fn le_curve_payload(
    kind: &str,
    lambda: f64,
    alpha: f64,
    e_min: f64,
    e_max: f64,
    count: usize,
    steps: u64,
    n: usize,
) -> Result<String, Error> {
    if count < 2 || e_min >= e_max {
        return Err(Error::Config("need count >= 2 and e_min < e_max".into()));
    }
    let model = build_model(kind, lambda, alpha)?;
    let setup = QuasiPeriodicSetup::golden(0.123);
    let op = build_truncation(&model, &setup, 0, n as i64 - 1)?;
    let spectrum = eigenvalues(&op);
    let spectrum_dist = |e: f64| -> f64 {
        let idx = spectrum.partition_point(|&x| x < e);
        let mut d = f64::INFINITY;
        if idx < spectrum.len() {
            d = d.min((spectrum[idx] - e).abs());
        }
        if idx > 0 {
            d = d.min((spectrum[idx - 1] - e).abs());
        }
        d
    };

    let mut energies = Vec::with_capacity(count);
    let mut formula = Vec::with_capacity(count);
    let mut numeric = Vec::with_capacity(count);
    let mut in_spectrum = Vec::with_capacity(count);
    for i in 0..count {
        let e = e_min + (e_max - e_min) * i as f64 / (count - 1) as f64;
        energies.push(e);
        formula.push(lyapunov_formula_model(&model, e)?);
        let est = lyapunov_numeric(&model, &setup, e, ComplexifiedPhase::REAL, steps, 1)?;
        numeric.push(est.value);
        in_spectrum.push(spectrum_dist(e) < 0.05);
    }
    let doc = serde_json::json!({
        "model": model,
        "E": energies,
        "le_formula": formula,
        "le_numeric": numeric,
        "in_spectrum": in_spectrum,
        "spectrum_range": [spectrum.first(), spectrum.last()],
    });
    Ok(doc.to_string())
}

/// One eigenstate of the [0, N-1] truncation: amplitudes, IPR, decay fit and
/// the analytic regime at its eigenvalue.
pub fn eigenstate_payload(
    kind: &str,
    lambda: f64,
    alpha: f64,
    n: usize,
    index: usize,
) -> Result<String, Error> {
    let model = build_model(kind, lambda, alpha)?;
    if index >= n {
        return Err(Error::Config(format!(
            "eigenstate index {index} out of range for N = {n}"
        )));
    }
    let setup = QuasiPeriodicSetup::golden(0.123);
    let op = build_truncation(&model, &setup, 0, n as i64 - 1)?;
    let data = eigenpairs(&op, PairSelection::Indices(vec![index]))?;
    let energy = data.eigenvalues[0];
    let vector = &data.eigenvectors.as_ref().expect("vectors requested")[0];
    let diag = classify_state(energy, vector, &ClassifyThresholds::default())?;
    let regime = classify_model_energy(&model, energy)?;
    let doc = serde_json::json!({
        "model": model,
        "index": index,
        "E": energy,
        "amplitudes": vector,
        "ipr": diag.ipr,
        "decay_rate": diag.decay_rate,
        "fit_r2": diag.fit_r2,
        "classification": match diag.classification {
            StateClass::Localized => "Localized",
            StateClass::Extended => "Extended",
            StateClass::Unresolved => "Unresolved",
        },
        "regime": regime_tag(regime.classification),
        "le_formula": regime.le_value,
    });
    Ok(doc.to_string())
}

fn to_js<T>(r: Result<T, Error>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Interactive op 1: (alpha, E) phase diagram at fixed lambda.
#[wasm_bindgen]
pub fn phase_diagram(
    lambda: f64,
    alpha_min: f64,
    alpha_max: f64,
    alpha_steps: usize,
    e_min: f64,
    e_max: f64,
    e_steps: usize,
    n: usize,
) -> Result<String, JsValue> {
    to_js(phase_diagram_payload(
        lambda,
        alpha_min,
        alpha_max,
        alpha_steps,
        e_min,
        e_max,
        e_steps,
        n,
    ))
}

/// Interactive op 2: formula vs numeric LE over an energy window.
#[wasm_bindgen]
pub fn le_curve(
    kind: &str,
    lambda: f64,
    alpha: f64,
    e_min: f64,
    e_max: f64,
    count: usize,
    steps: u64,
    n: usize,
) -> Result<String, JsValue> {
    to_js(le_curve_payload(
        kind, lambda, alpha, e_min, e_max, count, steps, n,
    ))
}

/// Interactive op 3: single-eigenstate viewer.
#[wasm_bindgen]
pub fn eigenstate(
    kind: &str,
    lambda: f64,
    alpha: f64,
    n: usize,
    index: usize,
) -> Result<String, JsValue> {
    to_js(eigenstate_payload(kind, lambda, alpha, n, index))
}
