//! Transfer-matrix cocycle: renormalized Lyapunov-exponent estimation along
//! rotation orbits, complexified phase and the acceleration, the three-term
//! determinant recursion, and finite-interval Green functions built from it.
//!
//! The one-step matrix is `A(theta, E) = ((E - v(theta), -1), (1, 0))`, an
//! SL(2) matrix; products along the orbit grow like `e^{n L(E)}`. Products
//! are kept in projective form (norm-divided every `renorm_every` steps) so
//! they never overflow.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{
    eval_potential, eval_potential_complex, strip_half_width, PotentialModel,
};
use crate::spectrum::{Frequency, QuasiPeriodicSetup};

/// Phase count used when an operation averages over equidistributed phases
/// internally (acceleration, spectrum pooling).
pub const DEFAULT_PHASE_COUNT: usize = 8;

/// Default finite-difference step for the acceleration.
pub const DEFAULT_FD_STEP: f64 = 0.01;

/// Imaginary offset added to the phase: `A_eps(theta, E) = A(theta + i eps, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexifiedPhase {
    pub epsilon: f64,
}

impl ComplexifiedPhase {
    pub const REAL: Self = Self { epsilon: 0.0 };

    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }
}

/// One-step (or product) transfer matrix with complex entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self {
            a11: Complex64::new(1.0, 0.0),
            a12: Complex64::new(0.0, 0.0),
            a21: Complex64::new(0.0, 0.0),
            a22: Complex64::new(1.0, 0.0),
        }
    }

    /// `A(theta, E)` for a given (complex) potential value.
    fn one_step(e_minus_v: Complex64) -> Self {
        Self {
            a11: e_minus_v,
            a12: Complex64::new(-1.0, 0.0),
            a21: Complex64::new(1.0, 0.0),
            a22: Complex64::new(0.0, 0.0),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr())
            .sqrt()
    }

    /// `self * rhs` (matrix product).
    pub fn compose(&self, rhs: &TransferMatrix) -> Self {
        Self {
            a11: self.a11 * rhs.a11 + self.a12 * rhs.a21,
            a12: self.a11 * rhs.a12 + self.a12 * rhs.a22,
            a21: self.a21 * rhs.a11 + self.a22 * rhs.a21,
            a22: self.a21 * rhs.a12 + self.a22 * rhs.a22,
        }
    }
}

/// Lyapunov estimate with convergence diagnostics.
///
/// `value = log_norm_sum / steps` (nats per step); `tail_variation` is the
/// maximum deviation of the running estimate from the final value over the
/// last 10% of steps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub steps: u64,
    pub log_norm_sum: f64,
    pub tail_variation: f64,
}

fn check_strip(model: &PotentialModel, eps: f64) -> Result<()> {
    if eps == 0.0 {
        return Ok(());
    }
    let half = strip_half_width(model)?;
    if eps.abs() >= half {
        return Err(Error::StripViolation(format!(
            "|eps| = {} outside the analyticity strip (half-width {half})",
            eps.abs()
        )));
    }
    Ok(())
}

/// The one-step cocycle matrix at complexified phase. Real-valued when
/// `eps = 0`.
pub fn transfer_matrix(
    model: &PotentialModel,
    theta: f64,
    energy: f64,
    eps: ComplexifiedPhase,
) -> Result<TransferMatrix> {
    check_strip(model, eps.epsilon)?;
    let v = eval_potential_complex(model, theta, eps.epsilon)?;
    Ok(TransferMatrix::one_step(Complex64::new(energy, 0.0) - v))
}

/// Tracks the running estimate over the tail window.
struct TailWindow {
    start_step: u64,
    min: f64,
    max: f64,
}

impl TailWindow {
    fn new(n_steps: u64) -> Self {
        Self {
            start_step: n_steps - n_steps / 10,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, step: u64, estimate: f64) {
        if step >= self.start_step {
            self.min = self.min.min(estimate);
            self.max = self.max.max(estimate);
        }
    }

    fn variation(&self, value: f64) -> f64 {
        if self.min.is_finite() {
            (self.max - value).max(value - self.min).max(0.0)
        } else {
            0.0
        }
    }
}

fn finish_estimate(
    log_sum: f64,
    steps: u64,
    skipped: u64,
    n_steps: u64,
    window: &TailWindow,
) -> Result<LyapunovEstimate> {
    if skipped as f64 > n_steps as f64 * 1e-6 {
        return Err(Error::SingularPhase(format!(
            "{skipped} of {n_steps} orbit sites fell in the singular guard band"
        )));
    }
    let value = log_sum / steps as f64;
    Ok(LyapunovEstimate {
        value,
        steps,
        log_norm_sum: log_sum,
        tail_variation: window.variation(value),
    })
}

/// Real-phase orbit loop (the common case; complex arithmetic avoided).
fn lyapunov_orbit_real(
    model: &PotentialModel,
    b: f64,
    theta0: f64,
    energy: f64,
    n_steps: u64,
    renorm_every: u64,
) -> Result<LyapunovEstimate> {
    let mut m = [1.0f64, 0.0, 0.0, 1.0]; // row-major 2x2
    let mut theta = theta0.rem_euclid(1.0);
    let mut log_sum = 0.0f64;
    let mut steps = 0u64;
    let mut skipped = 0u64;
    let mut since_renorm = 0u64;
    let mut window = TailWindow::new(n_steps);

    for j in 0..n_steps {
        match eval_potential(model, theta) {
            Ok(v) => {
                let a = energy - v;
                m = [
                    a * m[0] - m[2],
                    a * m[1] - m[3],
                    m[0],
                    m[1],
                ];
                steps += 1;
                since_renorm += 1;
                if since_renorm == renorm_every {
                    let f = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]).sqrt();
                    log_sum += f.ln();
                    m.iter_mut().for_each(|x| *x /= f);
                    since_renorm = 0;
                    window.record(j, log_sum / steps as f64);
                }
            }
            Err(Error::SingularPhase(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
        theta = (theta + b).rem_euclid(1.0);
    }
    if since_renorm > 0 {
        let f = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]).sqrt();
        log_sum += f.ln();
    }
    finish_estimate(log_sum, steps, skipped, n_steps, &window)
}

/// Complexified-phase orbit loop.
fn lyapunov_orbit_complex(
    model: &PotentialModel,
    b: f64,
    theta0: f64,
    energy: f64,
    eps: f64,
    n_steps: u64,
    renorm_every: u64,
) -> Result<LyapunovEstimate> {
    let mut m = TransferMatrix::identity();
    let mut theta = theta0.rem_euclid(1.0);
    let mut log_sum = 0.0f64;
    let mut steps = 0u64;
    let mut skipped = 0u64;
    let mut since_renorm = 0u64;
    let mut window = TailWindow::new(n_steps);
    let e = Complex64::new(energy, 0.0);

    for j in 0..n_steps {
        match eval_potential_complex(model, theta, eps) {
            Ok(v) => {
                let step = TransferMatrix::one_step(e - v);
                m = step.compose(&m);
                steps += 1;
                since_renorm += 1;
                if since_renorm == renorm_every {
                    let f = m.frobenius_norm();
                    log_sum += f.ln();
                    let inv = 1.0 / f;
                    m.a11 *= inv;
                    m.a12 *= inv;
                    m.a21 *= inv;
                    m.a22 *= inv;
                    since_renorm = 0;
                    window.record(j, log_sum / steps as f64);
                }
            }
            Err(Error::SingularPhase(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
        theta = (theta + b).rem_euclid(1.0);
    }
    if since_renorm > 0 {
        log_sum += m.frobenius_norm().ln();
    }
    finish_estimate(log_sum, steps, skipped, n_steps, &window)
}

/// Birkhoff estimate of the Lyapunov exponent along the single orbit
/// `theta, theta + b, ...`: maintain the running product, divide by its
/// Frobenius norm every `renorm_every` steps, accumulate the logs.
///
/// Sites inside a singular guard band are skipped (counted); the run errors
/// only if the skip rate exceeds 1e-6.
pub fn lyapunov_numeric(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    energy: f64,
    eps: ComplexifiedPhase,
    n_steps: u64,
    renorm_every: u64,
) -> Result<LyapunovEstimate> {
    if n_steps < 1000 {
        return Err(Error::InvalidParameter(format!(
            "n_steps must be >= 1000, got {n_steps}"
        )));
    }
    if renorm_every == 0 {
        return Err(Error::InvalidParameter("renorm_every must be >= 1".into()));
    }
    setup.frequency.validate()?;
    check_strip(model, eps.epsilon)?;
    if eps.epsilon == 0.0 {
        lyapunov_orbit_real(model, setup.b(), setup.theta, energy, n_steps, renorm_every)
    } else {
        lyapunov_orbit_complex(
            model,
            setup.b(),
            setup.theta,
            energy,
            eps.epsilon,
            n_steps,
            renorm_every,
        )
    }
}

/// Average of [`lyapunov_numeric`] over `n_phases` equidistributed phases
/// `theta_j = j / n_phases`; the estimate pools log-norm sums over all
/// orbits (`value = total log sum / total steps`). With `n_phases = 1` this
/// is exactly the single-orbit estimate at phase 0.
pub fn lyapunov_phase_averaged(
    model: &PotentialModel,
    frequency: Frequency,
    energy: f64,
    eps: ComplexifiedPhase,
    n_steps: u64,
    n_phases: usize,
) -> Result<LyapunovEstimate> {
    if n_phases == 0 {
        return Err(Error::InvalidParameter("n_phases must be >= 1".into()));
    }
    let mut log_sum = 0.0;
    let mut steps = 0u64;
    let mut tail: f64 = 0.0;
    for j in 0..n_phases {
        let setup = QuasiPeriodicSetup::new(frequency, j as f64 / n_phases as f64);
        let est = lyapunov_numeric(model, &setup, energy, eps, n_steps, 1)?;
        log_sum += est.log_norm_sum;
        steps += est.steps;
        tail = tail.max(est.tail_variation);
    }
    Ok(LyapunovEstimate {
        value: log_sum / steps as f64,
        steps,
        log_norm_sum: log_sum,
        tail_variation: tail,
    })
}

/// Finite-difference acceleration
/// `omega = (L(eps_center + h) - L(eps_center)) / (2 pi h)`,
/// with both Lyapunov exponents phase-averaged over [`DEFAULT_PHASE_COUNT`]
/// phases. For analytic SL(2) cocycles this is integer-quantized; at
/// positive-LE spectrum points it equals 1.
pub fn acceleration(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    energy: f64,
    eps_center: f64,
    h: f64,
    n_steps: u64,
) -> Result<f64> {
    if eps_center < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps_center must be >= 0, got {eps_center}"
        )));
    }
    if h <= 0.0 {
        return Err(Error::InvalidParameter(format!("h must be > 0, got {h}")));
    }
    check_strip(model, eps_center + h)?;
    let lo = lyapunov_phase_averaged(
        model,
        setup.frequency,
        energy,
        ComplexifiedPhase::new(eps_center),
        n_steps,
        DEFAULT_PHASE_COUNT,
    )?;
    let hi = lyapunov_phase_averaged(
        model,
        setup.frequency,
        energy,
        ComplexifiedPhase::new(eps_center + h),
        n_steps,
        DEFAULT_PHASE_COUNT,
    )?;
    Ok((hi.value - lo.value) / (std::f64::consts::TAU * h))
}

/// Characteristic-polynomial sequence `p_k = det(E - H|[0, k-1])` via the
/// three-term recursion
/// `p_k = (E - v((k-1) b + theta)) p_{k-1} - p_{k-2}`, `p_0 = 1`, `p_{-1} = 0`.
///
/// The transfer product satisfies `(A_n)_11 = p_n` and `(A_n)_21 = p_{n-1}`.
/// Values grow like `e^{k L(E)}`; for large `k` use the Green-function ops,
/// which work on log-magnitudes internally.
pub fn determinant_sequence(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    energy: f64,
    k_max: usize,
) -> Result<Vec<f64>> {
    setup.frequency.validate()?;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    let mut p_prev = 0.0f64; // p_{-1}
    let mut p = 1.0f64; // p_0
    let b = setup.b();
    let mut theta = setup.theta.rem_euclid(1.0);
    for _ in 1..=k_max {
        let v = eval_potential(model, theta)?;
        let next = (energy - v) * p - p_prev;
        p_prev = p;
        p = next;
        out.push(p);
        theta = (theta + b).rem_euclid(1.0);
    }
    Ok(out)
}

/// Log-magnitude + sign of a determinant value.
#[derive(Debug, Clone, Copy)]
struct LogDet {
    log_abs: f64, // -inf for an exact zero
    sign: f64,    // -1, 0, 1
}

/// Determinant recursion in rescaled form: returns `log|p_j|` and signs for
/// j = 0..=k_max without overflow, starting the orbit at `theta_base`.
fn log_det_sequence(
    model: &PotentialModel,
    b: f64,
    theta_base: f64,
    energy: f64,
    k_max: usize,
) -> Result<Vec<LogDet>> {
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(LogDet {
        log_abs: 0.0,
        sign: 1.0,
    });
    let mut p_prev = 0.0f64;
    let mut p = 1.0f64;
    let mut shift = 0.0f64;
    let mut theta = theta_base.rem_euclid(1.0);
    for _ in 1..=k_max {
        let v = eval_potential(model, theta)?;
        let next = (energy - v) * p - p_prev;
        p_prev = p;
        p = next;
        let m = p.abs().max(p_prev.abs());
        if m > 1e150 || (m > 0.0 && m < 1e-150) {
            p /= m;
            p_prev /= m;
            shift += m.ln();
        }
        out.push(LogDet {
            log_abs: if p == 0.0 {
                f64::NEG_INFINITY
            } else {
                p.abs().ln() + shift
            },
            sign: if p == 0.0 { 0.0 } else { p.signum() },
        });
        theta = (theta + b).rem_euclid(1.0);
    }
    Ok(out)
}

/// Relative determinant floor below which the resolvent is declared singular.
const RESOLVENT_REL_TOL: f64 = 1e-12;

struct GreenLogs {
    log_left: f64,
    sign_left: f64,
    log_right: f64,
    sign_right: f64,
}

/// Log-magnitude Green-function ratios on `[n1, n2]` at interior site `n`:
/// `G(n1, n)` (left) and `G(n, n2)` (right), as determinant ratios with the
/// appropriate phase offsets. Errors `ResolventSingular` when
/// `|det(E - H|[n1,n2])|` falls below `1e-12` of the largest determinant in
/// its own recursion.
fn green_logs(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    energy: f64,
    n1: i64,
    n2: i64,
    n: i64,
) -> Result<GreenLogs> {
    if n1 > n2 || n < n1 || n > n2 {
        return Err(Error::InvalidParameter(format!(
            "need n1 <= n <= n2, got n1={n1}, n={n}, n2={n2}"
        )));
    }
    let b = setup.b();
    let k = (n2 - n1 + 1) as usize;
    let theta_base = setup.theta + n1 as f64 * b;
    let base = log_det_sequence(model, b, theta_base, energy, k)?;

    let denom = base[k];
    let scale = base
        .iter()
        .fold(f64::NEG_INFINITY, |m, d| m.max(d.log_abs));
    if denom.sign == 0.0 || denom.log_abs <= scale + RESOLVENT_REL_TOL.ln() {
        return Err(Error::ResolventSingular(format!(
            "det(E - H|[{n1},{n2}]) is numerically zero at E = {energy}"
        )));
    }

    // left: p_{n2 - n} starting at phase theta + (n+1) b
    let left_len = (n2 - n) as usize;
    let theta_left = setup.theta + (n + 1) as f64 * b;
    let left_seq = log_det_sequence(model, b, theta_left, energy, left_len)?;
    let num_left = left_seq[left_len];
    // right: p_{n - n1} from the base sequence
    let num_right = base[(n - n1) as usize];

    // signed resolvent convention (H - E)^{-1}: both ratios carry a global -1
    Ok(GreenLogs {
        log_left: num_left.log_abs - denom.log_abs,
        sign_left: -num_left.sign * denom.sign,
        log_right: num_right.log_abs - denom.log_abs,
        sign_right: -num_right.sign * denom.sign,
    })
}

/// Green function of the truncation `H|[n1,n2]` at energy E, as entries of
/// the true resolvent `(H|[n1,n2] - E)^{-1}`:
/// `g_left = G(n1, n)` and `g_right = G(n, n2)`.
///
/// Both are determinant ratios; magnitudes match the textbook Cramer
/// expressions, the overall sign follows the `(H - E)^{-1}` convention.
pub fn green_function(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    energy: f64,
    n1: i64,
    n2: i64,
    n: i64,
) -> Result<(f64, f64)> {
    let logs = green_logs(model, setup, energy, n1, n2, n)?;
    Ok((
        logs.sign_left * logs.log_left.exp(),
        logs.sign_right * logs.log_right.exp(),
    ))
}

/// Regular-point diagnostic: true iff some length-`k` interval `[n1, n1+k-1]`
/// containing `n` keeps both endpoints at distance > k/5 from `n` and has
/// `|G(n, n_i)| < e^{-gamma |n - n_i|}` at both endpoints. Intervals with a
/// singular resolvent count as failing.
pub fn is_regular_point(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    energy: f64,
    n: i64,
    k: usize,
    gamma: f64,
) -> Result<bool> {
    if k < 5 {
        return Err(Error::InvalidParameter(format!(
            "interval length k must be >= 5, got {k}"
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let k_i = k as i64;
    // strict conditions 5 (n - n1) > k and 5 (n1 + k - 1 - n) > k, in integers
    for n1 in (n - k_i + 1)..=n {
        let n2 = n1 + k_i - 1;
        if 5 * (n - n1) <= k_i || 5 * (n2 - n) <= k_i {
            continue;
        }
        match green_logs(model, setup, energy, n1, n2, n) {
            Ok(logs) => {
                let ok_left = logs.log_left < -gamma * (n - n1) as f64;
                let ok_right = logs.log_right < -gamma * (n2 - n) as f64;
                if ok_left && ok_right {
                    return Ok(true);
                }
            }
            Err(Error::ResolventSingular(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}
