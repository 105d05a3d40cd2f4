//! Support localization from the dual polynomial and least-squares recovery
//! of amplitudes and waveform coefficients.
//!
//! Given a dual optimizer `λ`, the vector polynomial `q(τ) = Σ_n λ(n)
//! e^{i2πnτ} b_n` attains unit norm exactly on the support. Spikes are
//! located either by scanning `‖q(τ)‖₂` on a fine grid or by rooting the
//! scalar trigonometric polynomial `p(z) = 1 − ‖q(τ)‖₂²` on the unit circle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

use crate::model::{wrap_distance, GroundTruth, IndexSet, Subspace};
use crate::{Error, Result};

/// Condition-number cutoff for the recovery least squares.
const CONDITION_LIMIT: f64 = 1e10;

/// Default localization grid step (10000 points over `[0,1)`).
pub const DEFAULT_GRID_STEP: f64 = 1e-4;
/// Default peak-detection threshold on `‖q(τ)‖₂`.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.99;

/// Default cluster gap `1/(2N)` for merging nearby detections.
pub fn default_cluster_gap(n: usize) -> f64 {
    1.0 / (2.0 * n as f64)
}

/// A dual vector paired with the subspace that defines its polynomial.
#[derive(Debug, Clone)]
pub struct DualPolynomial<'a> {
    lambda: DVector<Complex64>,
    subspace: &'a Subspace,
}

/// How a support estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizationMethod {
    Grid,
    Roots,
}

/// Estimated spike locations with their peak dual-norm values.
#[derive(Debug, Clone)]
pub struct SupportEstimate {
    /// Sorted locations in `[0,1)`, pairwise farther apart than the cluster gap.
    pub locations: Vec<f64>,
    /// `‖q(τ̂)‖₂` at each location.
    pub peak_values: Vec<f64>,
    pub method: LocalizationMethod,
}

/// Per-source recovery output of the least-squares stage.
#[derive(Debug, Clone)]
pub struct RecoveredSources {
    /// Estimated locations, in the order they were supplied.
    pub locations: Vec<f64>,
    /// Nonnegative amplitude magnitudes `ĉ_j = ‖v_j‖₂`.
    pub amplitudes: Vec<f64>,
    /// Unit coefficient vectors, each defined up to a global phase.
    pub coefficients: Vec<DVector<Complex64>>,
    /// Condition number of the least-squares system.
    pub conditioning: f64,
    /// Relative residual `‖Φv − y‖ / ‖y‖`.
    pub residual: f64,
}

/// Recovery-quality metrics against a known ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    /// `‖X̂ − X_o‖_F / ‖X_o‖_F`.
    pub relative_frobenius_error: f64,
    /// Wrap-around location error per matched source.
    pub location_errors: Vec<f64>,
    /// `|⟨h_j, ĥ_j⟩|` per matched source (phase invariant).
    pub overlaps: Vec<f64>,
    /// `‖ |ĝ_j| − |g_j| ‖₂ / ‖g_j‖₂` per matched source.
    pub waveform_magnitude_errors: Vec<f64>,
    /// Number of sources matched between truth and estimate.
    pub matched: usize,
    /// True source count minus estimated source count.
    pub cardinality_mismatch: i64,
}

impl<'a> DualPolynomial<'a> {
    pub fn new(lambda: DVector<Complex64>, subspace: &'a Subspace) -> Self {
        assert_eq!(
            lambda.len(),
            subspace.n(),
            "dual vector length must match subspace rows"
        );
        Self { lambda, subspace }
    }

    pub fn lambda(&self) -> &DVector<Complex64> {
        &self.lambda
    }

    /// Evaluate `q(τ) = Σ_n λ(n) e^{i2πnτ} b_n`.
    pub fn eval(&self, tau: f64) -> DVector<Complex64> {
        let idx = IndexSet::new(self.subspace.n()).expect("nonempty subspace");
        let bm = self.subspace.matrix();
        let k = self.subspace.k();
        let mut q = DVector::<Complex64>::zeros(k);
        for row in 0..self.subspace.n() {
            let w = self.lambda[row] * Complex64::cis(TAU * idx.index_at(row) as f64 * tau);
            for p in 0..k {
                q[p] += w * bm[(row, p)].conj();
            }
        }
        q
    }

    /// `(τ_s, ‖q(τ_s)‖₂)` on the uniform grid `τ_s = s/grid_size`.
    pub fn dual_norm_profile(&self, grid_size: usize) -> Vec<(f64, f64)> {
        assert!(grid_size >= 2, "profile needs at least two grid points");
        let n = self.subspace.n();
        let k = self.subspace.k();
        let idx = IndexSet::new(n).expect("nonempty subspace");
        let bm = self.subspace.matrix();
        // march phase factors instead of re-evaluating cis at every point
        let step: Vec<Complex64> = (0..n)
            .map(|row| Complex64::cis(TAU * idx.index_at(row) as f64 / grid_size as f64))
            .collect();
        let mut phase: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); n];
        let mut out = Vec::with_capacity(grid_size);
        let mut q = vec![Complex64::new(0.0, 0.0); k];
        for s in 0..grid_size {
            q.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for row in 0..n {
                let w = self.lambda[row] * phase[row];
                for (p, qv) in q.iter_mut().enumerate() {
                    *qv += w * bm[(row, p)].conj();
                }
                phase[row] *= step[row];
            }
            let norm = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            out.push((s as f64 / grid_size as f64, norm));
        }
        out
    }

    /// Coefficients `u_d`, `d = −(N−1)..=(N−1)`, of `‖q(τ)‖₂² = Σ_d u_d e^{i2πdτ}`.
    ///
    /// Returned in ascending `d` with conjugate symmetry `u_{−d} = u_d^*`.
    pub fn autocorrelation_coefficients(&self) -> Vec<Complex64> {
        let n = self.subspace.n();
        let bm = self.subspace.matrix();
        let k = self.subspace.k();
        // Gram entries b_m^H b_n
        let gram = DMatrix::from_fn(n, n, |m, nn| {
            (0..k).map(|p| bm[(m, p)] * bm[(nn, p)].conj()).sum::<Complex64>()
        });
        let mut u = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        for nn in 0..n {
            for m in 0..n {
                let d = nn as i64 - m as i64;
                u[(d + n as i64 - 1) as usize] +=
                    self.lambda[nn] * self.lambda[m].conj() * gram[(m, nn)];
            }
        }
        u
    }
}

/// Peaks of a dual-norm profile: contiguous above-threshold runs (circular)
/// are merged and the argmax of each run is returned.
pub fn locate_supports_grid(
    profile: &[(f64, f64)],
    threshold: f64,
    cluster_gap: f64,
) -> Result<SupportEstimate> {
    if !(0.0 < threshold && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside (0,1)"
        )));
    }
    let g = profile.len();
    if g < 2 {
        return Err(Error::InvalidParameter("profile too short".into()));
    }
    let grid_step = 1.0 / g as f64;
    if cluster_gap <= grid_step {
        return Err(Error::InvalidParameter(format!(
            "cluster gap {cluster_gap} must exceed the grid step {grid_step}"
        )));
    }

    let above: Vec<bool> = profile.iter().map(|&(_, v)| v >= threshold).collect();
    if above.iter().all(|&a| a) {
        // one global run; keep the single argmax
        let &(tau, v) = profile
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty profile");
        return Ok(SupportEstimate {
            locations: vec![tau],
            peak_values: vec![v],
            method: LocalizationMethod::Grid,
        });
    }

    // walk circular runs starting just after a below-threshold point
    let start = above.iter().position(|&a| !a).expect("some point below");
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut run_best: Option<(f64, f64)> = None;
    for off in 1..=g {
        let i = (start + off) % g;
        if above[i] {
            let (tau, v) = profile[i];
            run_best = match run_best {
                Some((bt, bv)) if bv >= v => Some((bt, bv)),
                _ => Some((tau, v)),
            };
        } else if let Some(best) = run_best.take() {
            peaks.push(best);
        }
    }
    if let Some(best) = run_best {
        peaks.push(best);
    }

    Ok(finish_estimate(peaks, cluster_gap, LocalizationMethod::Grid))
}

/// Locate supports by rooting `p(z) = 1 − Σ_d u_d z^d` near the unit circle.
///
/// The Laurent polynomial is cleared to an ordinary degree-`2N−2` polynomial
/// whose roots are found as companion-matrix eigenvalues; roots with
/// `||z|−1| < circle_tol` map to `τ = arg(z)/2π mod 1` and near-duplicate
/// detections (conjugate-reciprocal pairs, split double roots) are merged
/// within `cluster_gap`.
pub fn locate_supports_roots(
    dp: &DualPolynomial<'_>,
    circle_tol: f64,
    cluster_gap: f64,
) -> Result<SupportEstimate> {
    if !(circle_tol > 0.0) {
        return Err(Error::InvalidParameter("circle tolerance must be positive".into()));
    }
    let u = dp.autocorrelation_coefficients();
    let n = dp.subspace.n();
    // coefficients of z^{N-1} * p(z), ascending powers
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for (i, ud) in u.iter().enumerate() {
        coeffs[i] = -ud;
    }
    coeffs[n - 1] += Complex64::new(1.0, 0.0);

    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(SupportEstimate {
            locations: vec![],
            peak_values: vec![],
            method: LocalizationMethod::Roots,
        });
    }
    // deflate negligible leading/trailing coefficients; trailing zeros are
    // roots at the origin, nowhere near the circle
    let tiny = 1e-14 * scale;
    let hi = coeffs.iter().rposition(|c| c.norm() > tiny).unwrap_or(0);
    let lo = coeffs.iter().position(|c| c.norm() > tiny).unwrap_or(0);
    if hi <= lo {
        return Ok(SupportEstimate {
            locations: vec![],
            peak_values: vec![],
            method: LocalizationMethod::Roots,
        });
    }
    let deg = hi - lo;
    let lead = coeffs[hi];
    let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
    for r in 1..deg {
        companion[(r, r - 1)] = Complex64::new(1.0, 0.0);
    }
    for r in 0..deg {
        companion[(r, deg - 1)] = -coeffs[lo + r] / lead;
    }
    let schur = companion
        .try_schur(1e-14, 100_000)
        .ok_or_else(|| Error::NumericalFailure("companion Schur iteration stalled".into()))?;
    let eigen = schur
        .eigenvalues()
        .ok_or_else(|| Error::NumericalFailure("companion eigenvalues unavailable".into()))?;

    let mut candidates: Vec<f64> = eigen
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() < circle_tol)
        .map(|z| (z.arg() / TAU).rem_euclid(1.0))
        .collect();
    candidates.sort_by(f64::total_cmp);

    // A detection appears as a cluster of roots: a conjugate-reciprocal pair
    // at the same argument when the peak stays below 1, or a pair straddling
    // the peak when it crosses 1. The cluster mean recovers the extremum.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    let flush = |group: &mut Vec<f64>, merged: &mut Vec<(f64, f64)>| {
        if group.is_empty() {
            return;
        }
        let rf = group[0];
        let mean_offset: f64 = group
            .iter()
            .map(|t| {
                let mut d = (t - rf).rem_euclid(1.0);
                if d > 0.5 {
                    d -= 1.0;
                }
                d
            })
            .sum::<f64>()
            / group.len() as f64;
        let tau = (rf + mean_offset).rem_euclid(1.0);
        merged.push((tau, dp.eval(tau).norm()));
        group.clear();
    };
    for &tau in &candidates {
        if let Some(&last) = group.last() {
            if wrap_distance(last, tau) > cluster_gap {
                flush(&mut group, &mut merged);
            }
        }
        group.push(tau);
    }
    flush(&mut group, &mut merged);
    // the list is circular: the first and last clusters may be one detection
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if wrap_distance(first.0, last.0) <= cluster_gap {
            merged.pop();
            let mut d = (last.0 - first.0).rem_euclid(1.0);
            if d > 0.5 {
                d -= 1.0;
            }
            let tau = (first.0 + d / 2.0).rem_euclid(1.0);
            merged[0] = (tau, dp.eval(tau).norm());
        }
    }

    Ok(finish_estimate(merged, cluster_gap, LocalizationMethod::Roots))
}

/// Merge detections closer than `cluster_gap` (keeping the strongest) and sort.
fn finish_estimate(
    mut peaks: Vec<(f64, f64)>,
    cluster_gap: f64,
    method: LocalizationMethod,
) -> SupportEstimate {
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for (tau, v) in peaks {
        if kept.iter().all(|&(t, _)| wrap_distance(t, tau) > cluster_gap) {
            kept.push((tau, v));
        }
    }
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));
    SupportEstimate {
        locations: kept.iter().map(|&(t, _)| t).collect(),
        peak_values: kept.iter().map(|&(_, v)| v).collect(),
        method,
    }
}

/// Recover `{c_j, h_j}` for given locations by least squares on
/// `Φ v = y`, where block column `j` of `Φ` has row `n` equal to
/// `e^{-i2πnτ̂_j} b_n^H`.
pub fn recover_coefficients(
    locations: &[f64],
    y: &DVector<Complex64>,
    b: &Subspace,
) -> Result<RecoveredSources> {
    let n = b.n();
    let k = b.k();
    let j = locations.len();
    if j == 0 {
        return Err(Error::InvalidParameter("no locations to recover".into()));
    }
    if j * k > n {
        return Err(Error::InvalidParameter(format!(
            "J*K = {} unknowns exceed N = {} equations",
            j * k,
            n
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "measurement length {} != subspace rows {}",
            y.len(),
            n
        )));
    }
    let idx = IndexSet::new(n)?;
    let bm = b.matrix();
    let mut phi = DMatrix::<Complex64>::zeros(n, j * k);
    for (jj, &tau) in locations.iter().enumerate() {
        for row in 0..n {
            let phase = Complex64::cis(-TAU * idx.index_at(row) as f64 * tau);
            for p in 0..k {
                phi[(row, jj * k + p)] = phase * bm[(row, p)];
            }
        }
    }
    let svd = phi.clone().svd(true, true);
    let smax = svd.singular_values[0];
    let smin = svd.singular_values[svd.singular_values.len() - 1];
    let conditioning = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(conditioning < CONDITION_LIMIT) {
        return Err(Error::IllConditioned { cond: conditioning, limit: CONDITION_LIMIT });
    }
    let rhs = DMatrix::from_column_slice(n, 1, y.as_slice());
    let v = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NumericalFailure(format!("least squares failed: {e}")))?;
    let residual = (&phi * &v - &rhs).norm() / y.norm().max(f64::MIN_POSITIVE);

    let mut amplitudes = Vec::with_capacity(j);
    let mut coefficients = Vec::with_capacity(j);
    for jj in 0..j {
        let block = DVector::from_fn(k, |p, _| v[(jj * k + p, 0)]);
        let c = block.norm();
        amplitudes.push(c);
        if c > 0.0 {
            coefficients.push(block / Complex64::new(c, 0.0));
        } else {
            // degenerate zero block: report a unit placeholder direction
            let mut e0 = DVector::zeros(k);
            e0[0] = Complex64::new(1.0, 0.0);
            coefficients.push(e0);
        }
    }
    Ok(RecoveredSources {
        locations: locations.to_vec(),
        amplitudes,
        coefficients,
        conditioning,
        residual,
    })
}

/// Compare a recovery against ground truth.
///
/// Sources are paired greedily by wrap-around distance; metrics are computed
/// on the matched subset and the cardinality mismatch is reported.
pub fn evaluation_metrics(
    gt: &GroundTruth,
    x_hat: &DMatrix<Complex64>,
    sources: &RecoveredSources,
) -> Metrics {
    let x_o = crate::model::lift(gt);
    let relative_frobenius_error = (x_hat - &x_o).norm() / x_o.norm();

    // greedy globally-nearest pairing
    let true_taus = gt.spikes().locations();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for (ti, &tt) in true_taus.iter().enumerate() {
        for (ei, &et) in sources.locations.iter().enumerate() {
            pairs.push((ti, ei, wrap_distance(tt, et)));
        }
    }
    pairs.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut used_t = vec![false; true_taus.len()];
    let mut used_e = vec![false; sources.locations.len()];
    let mut location_errors = Vec::new();
    let mut overlaps = Vec::new();
    let mut waveform_magnitude_errors = Vec::new();
    let bmat = gt.subspace().matrix();
    for (ti, ei, dist) in pairs {
        if used_t[ti] || used_e[ei] {
            continue;
        }
        used_t[ti] = true;
        used_e[ei] = true;
        location_errors.push(dist);
        let h_true = &gt.coefficients().vectors()[ti];
        let h_est = &sources.coefficients[ei];
        let overlap: Complex64 = h_true
            .iter()
            .zip(h_est.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        overlaps.push(overlap.norm());
        // waveform samples g = B h; compare entrywise magnitudes
        let g_true = bmat * h_true;
        let g_est = bmat * h_est;
        let num: f64 = g_true
            .iter()
            .zip(g_est.iter())
            .map(|(a, b)| (a.norm() - b.norm()).powi(2))
            .sum::<f64>()
            .sqrt();
        waveform_magnitude_errors.push(num / g_true.norm());
    }
    let matched = location_errors.len();
    Metrics {
        relative_frobenius_error,
        location_errors,
        overlaps,
        waveform_magnitude_errors,
        matched,
        cardinality_mismatch: true_taus.len() as i64 - sources.locations.len() as i64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoefficientSet, SpikeTrain};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_subspace(n: usize, k: usize, rng: &mut impl Rng) -> Subspace {
        Subspace::new(DMatrix::from_fn(n, k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        }))
        .unwrap()
    }

    fn random_lambda(n: usize, rng: &mut impl Rng) -> DVector<Complex64> {
        DVector::from_fn(n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    #[test]
    fn eval_zero_lambda_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_subspace(7, 2, &mut rng);
        let dp = DualPolynomial::new(DVector::zeros(7), &b);
        assert_eq!(dp.eval(0.37).norm(), 0.0);
        assert!(dp.dual_norm_profile(64).iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn eval_single_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_subspace(7, 3, &mut rng);
        let idx = IndexSet::new(7).unwrap();
        let n0 = 5; // column index
        let mut lambda = DVector::zeros(7);
        lambda[n0] = Complex64::new(1.0, 0.0);
        let dp = DualPolynomial::new(lambda, &b);
        let tau = 0.21;
        let expect = b.b_col(n0) * Complex64::cis(TAU * idx.index_at(n0) as f64 * tau);
        assert!((dp.eval(tau) - expect).norm() < 1e-13);
    }

    #[test]
    fn eval_at_zero_is_coefficient_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_subspace(9, 2, &mut rng);
        let lambda = random_lambda(9, &mut rng);
        let dp = DualPolynomial::new(lambda.clone(), &b);
        let mut expect = DVector::<Complex64>::zeros(2);
        for row in 0..9 {
            expect += b.b_col(row) * lambda[row];
        }
        assert!((dp.eval(0.0) - expect).norm() < 1e-12);
    }

    #[test]
    fn profile_matches_pointwise_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_subspace(11, 2, &mut rng);
        let dp = DualPolynomial::new(random_lambda(11, &mut rng), &b);
        let profile = dp.dual_norm_profile(37);
        for &(tau, v) in profile.iter().step_by(5) {
            assert_abs_diff_eq!(v, dp.eval(tau).norm(), epsilon = 1e-10);
        }
    }

    #[test]
    fn autocorrelation_reduces_to_scalar_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 8;
        let b = Subspace::ones(n);
        let lambda = random_lambda(n, &mut rng);
        let dp = DualPolynomial::new(lambda.clone(), &b);
        let u = dp.autocorrelation_coefficients();
        for d in 0..n {
            let expect: Complex64 = (0..n - d).map(|m| lambda[m + d] * lambda[m].conj()).sum();
            assert!((u[n - 1 + d] - expect).norm() < 1e-12);
            assert!((u[n - 1 - d] - expect.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_pointwise_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = random_subspace(10, 3, &mut rng);
        let dp = DualPolynomial::new(random_lambda(10, &mut rng), &b);
        let u = dp.autocorrelation_coefficients();
        for _ in 0..50 {
            let tau: f64 = rng.random();
            let series: Complex64 = u
                .iter()
                .enumerate()
                .map(|(i, ud)| ud * Complex64::cis(TAU * (i as f64 - 9.0) * tau))
                .sum();
            let direct = dp.eval(tau).norm_squared();
            assert!(series.im.abs() < 1e-10 * (1.0 + direct));
            assert!((series.re - direct).abs() < 1e-10 * (1.0 + direct));
        }
    }

    #[test]
    fn grid_localization_on_synthetic_plateaus() {
        // two separated plateaus above threshold, peaks inside
        let g = 1000;
        let profile: Vec<(f64, f64)> = (0..g)
            .map(|i| {
                let tau = i as f64 / g as f64;
                let v = if (0.2..0.25).contains(&tau) {
                    0.95 + 0.04 * (1.0 - ((tau - 0.225) / 0.025).powi(2))
                } else if (0.6..0.66).contains(&tau) {
                    0.95 + 0.04 * (1.0 - ((tau - 0.63) / 0.03).powi(2))
                } else {
                    0.3
                };
                (tau, v)
            })
            .collect();
        let est = locate_supports_grid(&profile, 0.9, 0.01).unwrap();
        assert_eq!(est.locations.len(), 2);
        assert!(wrap_distance(est.locations[0], 0.225) < 2.0 / g as f64);
        assert!(wrap_distance(est.locations[1], 0.63) < 2.0 / g as f64);
    }

    #[test]
    fn grid_localization_merges_wraparound_run() {
        let g = 1000;
        let profile: Vec<(f64, f64)> = (0..g)
            .map(|i| {
                let tau = i as f64 / g as f64;
                let d = wrap_distance(tau, 0.0);
                (tau, if d < 0.03 { 1.0 - 10.0 * d * d } else { 0.2 })
            })
            .collect();
        let est = locate_supports_grid(&profile, 0.9, 0.01).unwrap();
        assert_eq!(est.locations.len(), 1, "run across the wrap point must merge");
        assert!(wrap_distance(est.locations[0], 0.0) < 2.0 / g as f64);
    }

    #[test]
    fn grid_localization_empty_profile_gives_empty_support() {
        let profile: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 / 100.0, 0.0)).collect();
        let est = locate_supports_grid(&profile, 0.5, 0.02).unwrap();
        assert!(est.locations.is_empty());
    }

    #[test]
    fn roots_of_zero_dual_are_empty() {
        let b = Subspace::ones(9);
        let dp = DualPolynomial::new(DVector::zeros(9), &b);
        let est = locate_supports_roots(&dp, 1e-2, 0.01).unwrap();
        assert!(est.locations.is_empty());
    }

    fn converged_dual() -> (GroundTruth, DVector<Complex64>, DVector<Complex64>) {
        let cfg = crate::experiments::TrialConfig::new(33, 2, 2, 1001);
        let (gt, y) = crate::experiments::generate_instance(&cfg).unwrap();
        let res = crate::solver::solve(&y, gt.subspace(), &cfg.solver).unwrap();
        assert_eq!(res.status, crate::solver::ConvergenceStatus::Converged);
        (gt, y, res.dual)
    }

    #[test]
    fn roots_agree_with_refined_grid_peaks() {
        let (gt, _, lambda) = converged_dual();
        let dp = DualPolynomial::new(lambda, gt.subspace());
        let profile = dp.dual_norm_profile(10_000);
        let grid = locate_supports_grid(&profile, 0.99, default_cluster_gap(33)).unwrap();
        let roots = locate_supports_roots(&dp, 1e-2, default_cluster_gap(33)).unwrap();
        assert_eq!(roots.locations.len(), grid.locations.len());
        for (&g, &r) in grid.locations.iter().zip(roots.locations.iter()) {
            // within one coarse grid step of each other
            assert!(wrap_distance(g, r) <= 1e-4, "grid {g} vs root {r}");
            // against the grid method at 1e-6 resolution around the peak
            let mut refined = (g, dp.eval(g).norm());
            let mut t = g - 1e-4;
            while t <= g + 1e-4 {
                let tau = t.rem_euclid(1.0);
                let v = dp.eval(tau).norm();
                if v > refined.1 {
                    refined = (tau, v);
                }
                t += 1e-6;
            }
            assert!(
                wrap_distance(refined.0, r) <= 1e-6,
                "refined peak {} vs root {r}",
                refined.0
            );
        }
    }

    #[test]
    fn roots_are_stable_under_dual_perturbation() {
        let (gt, _, lambda) = converged_dual();
        let dp = DualPolynomial::new(lambda.clone(), gt.subspace());
        let base = locate_supports_roots(&dp, 1e-2, default_cluster_gap(33)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noisy = lambda.map(|v| {
            v + Complex64::new(
                1e-3 * (rng.random::<f64>() - 0.5),
                1e-3 * (rng.random::<f64>() - 0.5),
            )
        });
        let dp2 = DualPolynomial::new(noisy, gt.subspace());
        let moved = locate_supports_roots(&dp2, 1e-2, default_cluster_gap(33)).unwrap();
        assert_eq!(moved.locations.len(), base.locations.len());
        for (&a, &b) in base.locations.iter().zip(moved.locations.iter()) {
            assert!(wrap_distance(a, b) <= 1e-2, "root moved from {a} to {b}");
        }
    }

    #[test]
    fn recover_exact_on_consistent_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 24;
        let k = 3;
        let b = random_subspace(n, k, &mut rng);
        let h: Vec<DVector<Complex64>> = (0..2)
            .map(|_| {
                let v = random_lambda(k, &mut rng);
                let norm = v.norm();
                v / Complex64::new(norm, 0.0)
            })
            .collect();
        let gt = GroundTruth::new(
            SpikeTrain::new(vec![0.15, 0.55], vec![
                Complex64::new(2.0, 1.0),
                Complex64::new(-0.5, 0.3),
            ])
            .unwrap(),
            CoefficientSet::new(h.clone()).unwrap(),
            b.clone(),
            IndexSet::new(n).unwrap(),
        )
        .unwrap();
        let y = crate::model::synthesize(&gt);
        let rec = recover_coefficients(&[0.15, 0.55], &y, &b).unwrap();
        assert!(rec.residual < 1e-10);
        for j in 0..2 {
            let c = gt.spikes().amplitudes()[j];
            let target = &h[j] * c;
            let got = &rec.coefficients[j] * Complex64::new(rec.amplitudes[j], 0.0);
            assert!((got - target).norm() <= 1e-8 * c.norm());
        }
    }

    #[test]
    fn recover_trivial_scalar_case() {
        let n = 9;
        let b = Subspace::ones(n);
        let idx = IndexSet::new(n).unwrap();
        let c = Complex64::new(-1.5, 0.0);
        let y = DVector::from_fn(n, |r, _| {
            c * Complex64::cis(-TAU * idx.index_at(r) as f64 * 0.4)
        });
        let rec = recover_coefficients(&[0.4], &y, &b).unwrap();
        assert_abs_diff_eq!(rec.amplitudes[0], 1.5, epsilon = 1e-10);
        // phase is pushed into the unit coefficient
        assert!((rec.coefficients[0][0] * Complex64::new(rec.amplitudes[0], 0.0) - c).norm() < 1e-9);
    }

    #[test]
    fn recover_duplicated_locations_is_ill_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = random_subspace(16, 2, &mut rng);
        let y = random_lambda(16, &mut rng);
        match recover_coefficients(&[0.3, 0.3], &y, &b) {
            Err(Error::IllConditioned { .. }) => {}
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn metrics_exact_recovery_is_zero_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 20;
        let k = 2;
        let b = random_subspace(n, k, &mut rng);
        let v = random_lambda(k, &mut rng);
        let h = v.clone() / Complex64::new(v.norm(), 0.0);
        let gt = GroundTruth::new(
            SpikeTrain::new(vec![0.3], vec![Complex64::new(2.0, 0.0)]).unwrap(),
            CoefficientSet::new(vec![h.clone()]).unwrap(),
            b,
            IndexSet::new(n).unwrap(),
        )
        .unwrap();
        let x = crate::model::lift(&gt);
        let sources = RecoveredSources {
            locations: vec![0.3],
            amplitudes: vec![2.0],
            coefficients: vec![h],
            conditioning: 1.0,
            residual: 0.0,
        };
        let m = evaluation_metrics(&gt, &x, &sources);
        assert!(m.relative_frobenius_error < 1e-14);
        assert_eq!(m.matched, 1);
        assert!(m.location_errors[0] < 1e-15);
        assert_abs_diff_eq!(m.overlaps[0], 1.0, epsilon = 1e-12);
        assert!(m.waveform_magnitude_errors[0] < 1e-12);
    }

    #[test]
    fn metrics_are_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20;
        let k = 3;
        let b = random_subspace(n, k, &mut rng);
        let v = random_lambda(k, &mut rng);
        let h = v.clone() / Complex64::new(v.norm(), 0.0);
        let gt = GroundTruth::new(
            SpikeTrain::new(vec![0.62], vec![Complex64::new(1.0, 1.0)]).unwrap(),
            CoefficientSet::new(vec![h.clone()]).unwrap(),
            b,
            IndexSet::new(n).unwrap(),
        )
        .unwrap();
        let x = crate::model::lift(&gt);
        let rotated = h * Complex64::cis(1.234);
        let sources = RecoveredSources {
            locations: vec![0.62],
            amplitudes: vec![(2.0f64).sqrt()],
            coefficients: vec![rotated],
            conditioning: 1.0,
            residual: 0.0,
        };
        let m = evaluation_metrics(&gt, &x, &sources);
        assert_abs_diff_eq!(m.overlaps[0], 1.0, epsilon = 1e-12);
        assert!(m.waveform_magnitude_errors[0] < 1e-12);
    }

    #[test]
    fn metrics_report_cardinality_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 20;
        let b = random_subspace(n, 1, &mut rng);
        let gt = GroundTruth::new(
            SpikeTrain::new(vec![0.2, 0.7], vec![Complex64::new(1.0, 0.0); 2]).unwrap(),
            CoefficientSet::new(vec![
                DVector::from_element(1, Complex64::new(1.0, 0.0)),
                DVector::from_element(1, Complex64::new(1.0, 0.0)),
            ])
            .unwrap(),
            b,
            IndexSet::new(n).unwrap(),
        )
        .unwrap();
        let x = crate::model::lift(&gt);
        let sources = RecoveredSources {
            locations: vec![0.21],
            amplitudes: vec![1.0],
            coefficients: vec![DVector::from_element(1, Complex64::new(1.0, 0.0))],
            conditioning: 1.0,
            residual: 0.0,
        };
        let m = evaluation_metrics(&gt, &x, &sources);
        assert_eq!(m.matched, 1);
        assert_eq!(m.cardinality_mismatch, 1);
    }
}
