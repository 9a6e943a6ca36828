//! Finite truncations of the operator and their spectra.
//!
//! A truncation `H|[n1,n2]` with zero boundary conditions is the symmetric
//! tridiagonal matrix with unit off-diagonals and diagonal `v(n b + theta)`.
//! Eigenvalues come from Sturm-sequence bisection (per-eigenvalue error
//! control, cheap partial-spectrum requests); eigenvectors from inverse
//! iteration with reorthogonalization inside near-degenerate clusters.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{canonicalize, eval_potential, potential_bounds, PotentialModel};

/// Irrational rotation frequency. Presets expand to full f64 precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Frequency {
    /// (sqrt(5) - 1) / 2
    GoldenMean,
    /// sqrt(2) - 1
    SilverMean,
    Custom(f64),
}

impl Frequency {
    pub fn value(&self) -> f64 {
        match *self {
            Frequency::GoldenMean => (5f64.sqrt() - 1.0) / 2.0,
            Frequency::SilverMean => std::f64::consts::SQRT_2 - 1.0,
            Frequency::Custom(b) => b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.value();
        if b > 0.0 && b < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "frequency must lie in (0,1), got {b}"
            )))
        }
    }
}

/// Sampling orbit: frequency `b` and base phase `theta`.
///
/// Floating-point `b` is of course rational; the presets are high-precision
/// approximants and finite-orbit effects are part of truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiPeriodicSetup {
    pub frequency: Frequency,
    pub theta: f64,
}

impl QuasiPeriodicSetup {
    pub fn new(frequency: Frequency, theta: f64) -> Self {
        Self { frequency, theta }
    }

    pub fn golden(theta: f64) -> Self {
        Self::new(Frequency::GoldenMean, theta)
    }

    pub fn b(&self) -> f64 {
        self.frequency.value()
    }

    /// Phase of lattice site `n`, reduced mod 1.
    pub fn site_phase(&self, n: i64) -> f64 {
        (n as f64 * self.b() + self.theta).rem_euclid(1.0)
    }
}

/// `H|[n1,n2]` with unit off-diagonals; symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub diagonal: Vec<f64>,
    pub n1: i64,
    pub n2: i64,
}

impl TridiagonalOperator {
    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    /// Infinity-norm bound max|d_i| + 2, used to scale tolerances.
    pub fn norm_bound(&self) -> f64 {
        self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 2.0
    }
}

/// Eigenvalues (sorted ascending) with optional unit-norm eigenvectors.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub truncation_size: usize,
}

/// Which eigenpairs to extract.
#[derive(Debug, Clone)]
pub enum PairSelection {
    All,
    /// Indices into the ascending eigenvalue list.
    Indices(Vec<usize>),
    /// All eigenvalues in the closed energy window.
    Window { lo: f64, hi: f64 },
}

/// Build `H|[n1,n2]`: `diagonal[k] = v((n1 + k) b + theta)`.
pub fn build_truncation(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    n1: i64,
    n2: i64,
) -> Result<TridiagonalOperator> {
    setup.frequency.validate()?;
    if n1 > n2 {
        return Err(Error::InvalidParameter(format!(
            "empty truncation [{n1},{n2}]"
        )));
    }
    let mut diagonal = Vec::with_capacity((n2 - n1 + 1) as usize);
    for n in n1..=n2 {
        diagonal.push(eval_potential(model, setup.site_phase(n))?);
    }
    Ok(TridiagonalOperator { diagonal, n1, n2 })
}

/// Number of eigenvalues strictly below `lambda`, by counting negative
/// pivots of the LDLT Sturm sequence (unit off-diagonals).
pub fn sturm_count(diagonal: &[f64], lambda: f64) -> usize {
    let n = diagonal.len();
    if n == 0 {
        return 0;
    }
    let mut count = 0;
    let mut q = diagonal[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for &d in &diagonal[1..] {
        let q_safe = if q.abs() < 1e-300 {
            if q >= 0.0 {
                1e-300
            } else {
                -1e-300
            }
        } else {
            q
        };
        q = (d - lambda) - 1.0 / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of the truncation, ascending, by Sturm bisection inside
/// the Gershgorin interval. Accurate to a few ulps of the matrix scale.
pub fn eigenvalues(op: &TridiagonalOperator) -> Vec<f64> {
    let n = op.size();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![op.diagonal[0]];
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &d) in op.diagonal.iter().enumerate() {
        let r = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
        lo = lo.min(d - r);
        hi = hi.max(d + r);
    }
    lo -= 1.0;
    hi += 1.0;

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut a = lo;
        let mut b = hi;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (b - a) < 2.0 * f64::EPSILON * mid.abs().max(1.0) {
                break;
            }
            if sturm_count(&op.diagonal, mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Solve `(T - sigma I) x = rhs` in place for unit-off-diagonal tridiagonal
/// `T`, by LU with partial pivoting (one extra superdiagonal of fill-in).
/// Pivots are floored at `pivot_floor` (eps-level of the matrix scale), which
/// is exactly what inverse iteration wants near an eigenvalue.
fn solve_shifted(diagonal: &[f64], sigma: f64, pivot_floor: f64, x: &mut [f64]) {
    let n = diagonal.len();
    debug_assert_eq!(n, x.len());
    let safe = move |v: f64| {
        if v.abs() < pivot_floor {
            pivot_floor.copysign(if v == 0.0 { 1.0 } else { v })
        } else {
            v
        }
    };
    if n == 1 {
        x[0] /= safe(diagonal[0] - sigma);
        return;
    }
    let mut d: Vec<f64> = diagonal.iter().map(|&v| v - sigma).collect();
    let mut du = vec![1.0f64; n - 1];
    let mut du2 = vec![0.0f64; n.saturating_sub(2)];

    for i in 0..n - 1 {
        // subdiagonal entry below the pivot is always 1
        if d[i].abs() >= 1.0 {
            let fact = 1.0 / d[i];
            d[i + 1] -= fact * du[i];
            x[i + 1] -= fact * x[i];
        } else {
            // interchange rows i and i+1
            let fact = d[i];
            d[i] = 1.0;
            let old_di1 = d[i + 1];
            d[i + 1] = du[i] - fact * old_di1;
            du[i] = old_di1;
            if i + 1 < n - 1 {
                let old = du[i + 1];
                du2[i] = old;
                du[i + 1] = -fact * old;
            }
            x.swap(i, i + 1);
            x[i + 1] -= fact * x[i];
        }
    }

    x[n - 1] /= safe(d[n - 1]);
    x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / safe(d[n - 2]);
    for i in (0..n - 2).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / safe(d[i]);
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deterministic start vector for inverse iteration (splitmix-style hash of
/// the eigenvalue index), so results never depend on scheduling.
fn seeded_start(n: usize, index: usize) -> Vec<f64> {
    let mut state = (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        let r = state.wrapping_mul(0x2545_F491_4F6C_DD1D);
        v.push((r >> 11) as f64 / (1u64 << 53) as f64 - 0.5);
    }
    let nrm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

/// Overflow-safe normalization: scale by the max-abs entry first. Returns the
/// Euclidean norm, or None when the vector contains non-finite entries or is
/// numerically zero.
fn normalize_safe(v: &mut [f64]) -> Option<f64> {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !m.is_finite() || m == 0.0 {
        return None;
    }
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x /= m;
        sum += *x * *x;
    }
    let nrm = sum.sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    Some(m * nrm)
}

/// Inverse iteration for one eigenvalue; `cluster` holds already-computed
/// vectors of nearby eigenvalues to stay orthogonal to. If the shifted solve
/// degenerates (bit-exact eigenvalue hit), the shift is nudged by a few ulps
/// of the matrix scale and the iteration restarts.
fn inverse_iteration(
    diagonal: &[f64],
    sigma: f64,
    index: usize,
    cluster: &[Vec<f64>],
    scale: f64,
) -> Result<Vec<f64>> {
    let n = diagonal.len();
    let target = 1e-11 * scale.max(1.0);
    let pivot_floor = f64::EPSILON * scale.max(1.0);
    let mut v = seeded_start(n, index);
    for attempt in 0..4u32 {
        let shift = sigma + attempt as f64 * 4.0 * f64::EPSILON * scale.max(1.0);
        'iterate: for _ in 0..20 {
            for prev in cluster {
                let c = dot(&v, prev);
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
            match normalize_safe(&mut v) {
                Some(nv) if nv > 1e-8 => {}
                _ => break 'iterate, // start vector lived in the cluster span; reseed
            }
            let mut w = v.clone();
            solve_shifted(diagonal, shift, pivot_floor, &mut w);
            let Some(nw) = normalize_safe(&mut w) else {
                break 'iterate; // overflow: nudge the shift and retry
            };
            // (T - shift) w = v with |v| = 1: the residual of w/|w| is 1/|w|
            let residual = 1.0 / nw;
            v = w;
            if residual <= target {
                for prev in cluster {
                    let c = dot(&v, prev);
                    v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
                }
                match normalize_safe(&mut v) {
                    Some(nv) if nv > 1e-6 => return Ok(v),
                    _ => break 'iterate,
                }
            }
        }
        v = seeded_start(n, index.wrapping_add((attempt as usize + 1) * 7919));
    }
    Err(Error::ConvergenceFailure(format!(
        "inverse iteration did not converge at eigenvalue index {index} (sigma = {sigma})"
    )))
}

/// Eigenvalues plus eigenvectors for the selected part of the spectrum.
///
/// Residuals satisfy `|(H - E) u| <= 1e-8 (|H| + |E|)`; near-degenerate
/// eigenvalues (gap below 1e-7 of the matrix scale) are reorthogonalized as a
/// cluster.
pub fn eigenpairs(op: &TridiagonalOperator, which: PairSelection) -> Result<SpectralData> {
    let all = eigenvalues(op);
    let n = op.size();
    let indices: Vec<usize> = match which {
        PairSelection::All => (0..n).collect(),
        PairSelection::Indices(idx) => {
            if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidParameter(format!(
                    "eigenpair index {bad} out of range for size {n}"
                )));
            }
            let mut idx = idx;
            idx.sort_unstable();
            idx.dedup();
            idx
        }
        PairSelection::Window { lo, hi } => (0..n).filter(|&i| all[i] >= lo && all[i] <= hi).collect(),
    };

    let scale = op.norm_bound();
    let cluster_gap = 1e-7 * scale.max(1.0);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(indices.len());
    let mut cluster_start = 0usize;
    for (pos, &i) in indices.iter().enumerate() {
        // extend the cluster while consecutive selected eigenvalues nearly coincide
        if pos > 0 {
            let prev = indices[pos - 1];
            if i != prev + 1 || (all[i] - all[prev]).abs() > cluster_gap {
                cluster_start = pos;
            }
        }
        let v = inverse_iteration(
            &op.diagonal,
            all[i],
            i,
            &vectors[cluster_start..pos],
            scale,
        )?;
        vectors.push(v);
    }

    Ok(SpectralData {
        eigenvalues: indices.iter().map(|&i| all[i]).collect(),
        eigenvectors: Some(vectors),
        truncation_size: n,
    })
}

/// The spectrum containment interval `[-2 + min v, 2 + max v]`, evaluated
/// through the model's canonical form. `[-2, 2]` for lambda = 0; errors
/// `Unbounded` for tan^2.
pub fn spectrum_bounds(model: &PotentialModel) -> Result<(f64, f64)> {
    let canon = canonicalize(model)?;
    if matches!(model, PotentialModel::TanSquared { lambda } if *lambda != 0.0) {
        return Err(Error::Unbounded(
            "tan^2 potential is unbounded; no finite spectrum interval".into(),
        ));
    }
    let reference = PotentialModel::Gps {
        lambda: canon.lambda_eff,
        alpha: canon.alpha_eff,
    };
    let (vmin, vmax) = if canon.alpha_eff.abs() < 1.0 {
        potential_bounds(&reference)?
    } else {
        (0.0, 0.0) // lambda = 0 tan^2 only
    };
    Ok((
        -2.0 + canon.energy_shift + vmin,
        2.0 + canon.energy_shift + vmax,
    ))
}

/// Eigenvalue multisets of `[0, N-1]` truncations over `phase_count`
/// equidistributed phases `theta_j = theta + j / phase_count`. Pooling over
/// phases covers the phase-independent spectrum better than one orbit.
pub fn approximate_spectrum(
    model: &PotentialModel,
    setup: &QuasiPeriodicSetup,
    n: usize,
    phase_count: usize,
) -> Result<Vec<Vec<f64>>> {
    if n < 2 || phase_count < 1 {
        return Err(Error::InvalidParameter(format!(
            "need N >= 2 and phase_count >= 1, got N={n}, phases={phase_count}"
        )));
    }
    let mut pools = Vec::with_capacity(phase_count);
    for j in 0..phase_count {
        let shifted = QuasiPeriodicSetup {
            frequency: setup.frequency,
            theta: (setup.theta + j as f64 / phase_count as f64).rem_euclid(1.0),
        };
        let op = build_truncation(model, &shifted, 0, n as i64 - 1)?;
        pools.push(eigenvalues(&op));
    }
    Ok(pools)
}

/// Flatten per-phase multisets into one sorted pool.
pub fn pooled_spectrum(pools: &[Vec<f64>]) -> Vec<f64> {
    let mut all: Vec<f64> = pools.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.total_cmp(b));
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free_op(n: usize) -> TridiagonalOperator {
        TridiagonalOperator {
            diagonal: vec![0.0; n],
            n1: 0,
            n2: n as i64 - 1,
        }
    }

    #[test]
    fn sturm_count_small() {
        // [[0,1],[1,0]]: eigenvalues -1, 1
        let d = [0.0, 0.0];
        assert_eq!(sturm_count(&d, -2.0), 0);
        assert_eq!(sturm_count(&d, 0.0), 1);
        assert_eq!(sturm_count(&d, 2.0), 2);
    }

    #[test]
    fn eigenvalues_two_site() {
        let evals = eigenvalues(&free_op(2));
        assert!((evals[0] + 1.0).abs() < 1e-12);
        assert!((evals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_single_site() {
        let op = TridiagonalOperator {
            diagonal: vec![2.7],
            n1: 0,
            n2: 0,
        };
        assert_eq!(eigenvalues(&op), vec![2.7]);
    }

    #[test]
    fn free_chain_closed_form() {
        // eigenvalues 2 cos(k pi / (N+1)), k = 1..N
        let n = 50;
        let evals = eigenvalues(&free_op(n));
        for k in 1..=n {
            let exact = 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            let err = evals
                .iter()
                .map(|&ev| (ev - exact).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(err < 1e-10, "k={k} exact={exact} err={err:.2e}");
        }
    }

    #[test]
    fn free_chain_eigenvectors() {
        let n = 50usize;
        let data = eigenpairs(&free_op(n), PairSelection::All).unwrap();
        let vecs = data.eigenvectors.as_ref().unwrap();
        for (j, &ev) in data.eigenvalues.iter().enumerate() {
            // invert ev = 2 cos(k pi / (N+1)) to find k, then compare profiles
            let k = ((ev / 2.0).acos() * (n as f64 + 1.0) / std::f64::consts::PI).round();
            let mut expect: Vec<f64> = (1..=n)
                .map(|m| (k * m as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin())
                .collect();
            let nrm = norm2(&expect);
            expect.iter_mut().for_each(|x| *x /= nrm);
            let sign = if dot(&expect, &vecs[j]) < 0.0 { -1.0 } else { 1.0 };
            for (a, b) in vecs[j].iter().zip(&expect) {
                assert!((a - sign * b).abs() < 1e-8, "k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_site_eigenvectors() {
        let data = eigenpairs(&free_op(2), PairSelection::All).unwrap();
        let vecs = data.eigenvectors.as_ref().unwrap();
        let s = 0.5f64.sqrt();
        // eigenvalue -1 <-> (1,-1)/sqrt(2), +1 <-> (1,1)/sqrt(2)
        assert!((vecs[0][0] * vecs[0][1] + s * s).abs() < 1e-12);
        assert!((vecs[1][0] * vecs[1][1] - s * s).abs() < 1e-12);
    }

    #[test]
    fn bisection_matches_charpoly_roots() {
        // independent oracle: roots of det(E - H) found by sign-change scan +
        // bisection of the three-term determinant recursion
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let n = rng.gen_range(2..=8usize);
            let diagonal: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let op = TridiagonalOperator {
                diagonal: diagonal.clone(),
                n1: 0,
                n2: n as i64 - 1,
            };
            let charpoly = |e: f64| -> f64 {
                let mut p_prev = 0.0f64;
                let mut p = 1.0f64;
                for &d in &diagonal {
                    let next = (e - d) * p - p_prev;
                    p_prev = p;
                    p = next;
                }
                p
            };
            let mut roots = Vec::new();
            let lo = -5.0;
            let hi = 5.0;
            let steps = 20_000;
            let mut prev_e = lo;
            let mut prev_p = charpoly(lo);
            for i in 1..=steps {
                let e = lo + (hi - lo) * i as f64 / steps as f64;
                let p = charpoly(e);
                if prev_p == 0.0 {
                    roots.push(prev_e);
                } else if prev_p.signum() != p.signum() {
                    let (mut a, mut b) = (prev_e, e);
                    for _ in 0..80 {
                        let m = 0.5 * (a + b);
                        if charpoly(m).signum() == charpoly(a).signum() {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    roots.push(0.5 * (a + b));
                }
                prev_e = e;
                prev_p = p;
            }
            let evals = eigenvalues(&op);
            assert_eq!(roots.len(), evals.len(), "diag {diagonal:?}");
            for (r, ev) in roots.iter().zip(&evals) {
                assert!((r - ev).abs() < 1e-8, "root {r} vs eigenvalue {ev}");
            }
        }
    }

    #[test]
    fn interlacing_with_principal_submatrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let n = 60;
        let diagonal: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let full = TridiagonalOperator {
            diagonal: diagonal.clone(),
            n1: 0,
            n2: n - 1,
        };
        let sub = TridiagonalOperator {
            diagonal: diagonal[..n as usize - 1].to_vec(),
            n1: 0,
            n2: n - 2,
        };
        let big = eigenvalues(&full);
        let small = eigenvalues(&sub);
        for k in 0..small.len() {
            assert!(
                big[k] <= small[k] + 1e-10 && small[k] <= big[k + 1] + 1e-10,
                "interlacing violated at {k}"
            );
        }
    }

    #[test]
    fn truncation_examples() {
        let setup = QuasiPeriodicSetup::golden(0.0);
        let op = build_truncation(
            &PotentialModel::Gps {
                lambda: 0.0,
                alpha: 0.3,
            },
            &setup,
            0,
            4,
        )
        .unwrap();
        assert_eq!(op.diagonal, vec![0.0; 5]);

        let op = build_truncation(&PotentialModel::AlmostMathieu { lambda: 1.0 }, &setup, 0, 0)
            .unwrap();
        assert_eq!(op.diagonal, vec![2.0]);

        let m = PotentialModel::Gps {
            lambda: 0.5,
            alpha: 0.5,
        };
        let op = build_truncation(&m, &setup, 0, 1).unwrap();
        assert_eq!(op.diagonal[0], 2.0);
        let expect = eval_potential(&m, setup.b()).unwrap();
        assert_eq!(op.diagonal[1], expect);
    }

    #[test]
    fn residuals_meet_invariant() {
        let setup = QuasiPeriodicSetup::golden(0.31);
        let model = PotentialModel::Gps {
            lambda: 1.0,
            alpha: 0.5,
        };
        let op = build_truncation(&model, &setup, 0, 199).unwrap();
        let data = eigenpairs(&op, PairSelection::All).unwrap();
        let vecs = data.eigenvectors.as_ref().unwrap();
        let scale = op.norm_bound();
        for (j, v) in vecs.iter().enumerate() {
            let e = data.eigenvalues[j];
            let nrm = norm2(v);
            assert!((nrm - 1.0).abs() < 1e-10);
            let mut worst: f64 = 0.0;
            for i in 0..v.len() {
                let mut r = (op.diagonal[i] - e) * v[i];
                if i > 0 {
                    r += v[i - 1];
                }
                if i + 1 < v.len() {
                    r += v[i + 1];
                }
                worst = worst.max(r.abs());
            }
            assert!(
                worst <= 1e-8 * (scale + e.abs()),
                "residual {worst:.2e} too large at eigenvalue {e}"
            );
        }
    }

    #[test]
    fn spectrum_bounds_examples() {
        let (lo, hi) = spectrum_bounds(&PotentialModel::Gps {
            lambda: 1.0,
            alpha: 0.5,
        })
        .unwrap();
        assert!((lo + 10.0 / 3.0).abs() < 1e-12 && (hi - 6.0).abs() < 1e-12);

        let (lo, hi) = spectrum_bounds(&PotentialModel::Gps {
            lambda: 0.0,
            alpha: 0.3,
        })
        .unwrap();
        assert_eq!((lo, hi), (-2.0, 2.0));

        let (lo, hi) = spectrum_bounds(&PotentialModel::Gps {
            lambda: -1.0,
            alpha: 0.5,
        })
        .unwrap();
        assert!((lo + 6.0).abs() < 1e-12 && (hi - 10.0 / 3.0).abs() < 1e-12);

        assert!(matches!(
            spectrum_bounds(&PotentialModel::TanSquared { lambda: 0.5 }),
            Err(Error::Unbounded(_))
        ));
    }

    #[test]
    fn eigenvalues_contained_in_bounds() {
        let setup = QuasiPeriodicSetup::golden(0.1234);
        for model in [
            PotentialModel::Gps {
                lambda: 1.0,
                alpha: 0.5,
            },
            PotentialModel::Gps {
                lambda: -0.9,
                alpha: 0.6,
            },
            PotentialModel::AlmostMathieu { lambda: 2.0 },
            PotentialModel::ShiftedGps {
                lambda: 1.3,
                alpha: -0.4,
            },
        ] {
            let (lo, hi) = spectrum_bounds(&model).unwrap();
            let op = build_truncation(&model, &setup, 0, 299).unwrap();
            for ev in eigenvalues(&op) {
                assert!(
                    ev >= lo - 1e-10 && ev <= hi + 1e-10,
                    "{model:?}: eigenvalue {ev} outside [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn pooled_spectrum_free_operator() {
        let model = PotentialModel::Gps {
            lambda: 0.0,
            alpha: 0.2,
        };
        let setup = QuasiPeriodicSetup::golden(0.0);
        let pools = approximate_spectrum(&model, &setup, 2000, 1).unwrap();
        let pooled = pooled_spectrum(&pools);
        assert_eq!(pooled.len(), 2000);
        assert!(pooled.iter().all(|&e| (-2.0..=2.0).contains(&e)));
    }

    #[test]
    fn window_and_index_selection() {
        let op = free_op(30);
        let data = eigenpairs(&op, PairSelection::Window { lo: -0.5, hi: 0.5 }).unwrap();
        assert!(!data.eigenvalues.is_empty());
        assert!(data
            .eigenvalues
            .iter()
            .all(|&e| (-0.5..=0.5).contains(&e)));

        let data = eigenpairs(&op, PairSelection::Indices(vec![0, 29])).unwrap();
        assert_eq!(data.eigenvalues.len(), 2);
        assert!(matches!(
            eigenpairs(&op, PairSelection::Indices(vec![30])),
            Err(Error::InvalidParameter(_))
        ));
    }
}
