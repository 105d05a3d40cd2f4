//! Reproducible random instances, Monte Carlo phase-transition sweeps, and
//! the Gaussian point-spread-function PCA subspace experiment.
//!
//! Randomness comes from the ChaCha8 counter-based stream cipher seeded per
//! trial: the substream for trial `t` of cell `c` is keyed by a SplitMix64
//! hash of `(base_seed, c, t)`, so sweeps are reproducible for a fixed build
//! regardless of worker scheduling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::time::Instant;

use crate::localize::{
    evaluation_metrics, locate_supports_grid, recover_coefficients, DualPolynomial,
    RecoveredSources, DEFAULT_GRID_STEP, DEFAULT_PEAK_THRESHOLD,
};
use crate::model::{
    synthesize, wrap_distance, CoefficientSet, GroundTruth, IndexSet, SpikeTrain, Subspace,
};
use crate::solver::{solve, ConvergenceStatus, SolverConfig};
use crate::{Error, Result};

/// Rejection budget for separated spike placement.
const MAX_REJECTIONS: usize = 1000;

/// How the waveform subspace of an instance is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubspaceKind {
    /// I.i.d. standard real Gaussian entries.
    Gaussian,
    /// All-ones column (requires `K = 1`); reduces to classical line spectra.
    Ones,
    /// Principal components of a Gaussian point-spread-function dictionary.
    PsfPca(PsfDictionarySpec),
}

/// Unit in which the minimum-separation multiplier is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationUnit {
    /// Multiples of `1/N`.
    OfN,
    /// Multiples of `1/M` with the convention `M = N/4`.
    OfM,
}

/// Distribution of the unit coefficient vectors `h_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    /// I.i.d. real Gaussian entries, then normalized.
    RealGaussian,
    /// Uniform on the complex unit sphere.
    ComplexSphere,
}

/// Configuration of one random trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialConfig {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    /// Minimum-separation multiplier, interpreted per `sep_unit`.
    pub min_sep: f64,
    pub sep_unit: SeparationUnit,
    pub dynamic_range_db: f64,
    pub subspace: SubspaceKind,
    pub coefficients: CoefficientKind,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Relative Frobenius error below which a trial counts as a success.
    pub success_threshold: f64,
}

impl TrialConfig {
    /// Baseline configuration with library defaults.
    pub fn new(n: usize, j: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            j,
            k,
            min_sep: 1.0,
            sep_unit: SeparationUnit::OfN,
            dynamic_range_db: 20.0,
            subspace: SubspaceKind::Gaussian,
            coefficients: CoefficientKind::RealGaussian,
            seed,
            solver: SolverConfig::default(),
            success_threshold: 1e-4,
        }
    }

    /// Absolute wrap-around separation threshold.
    pub fn separation_threshold(&self) -> f64 {
        match self.sep_unit {
            SeparationUnit::OfN => self.min_sep / self.n as f64,
            SeparationUnit::OfM => 4.0 * self.min_sep / self.n as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.j == 0 || self.k == 0 {
            return Err(Error::InvalidParameter("N, J, K must be positive".into()));
        }
        if self.j * self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "J*K = {} unknowns exceed N = {} samples",
                self.j * self.k,
                self.n
            )));
        }
        if self.min_sep < 0.0 {
            return Err(Error::InvalidParameter("min_sep must be nonnegative".into()));
        }
        if self.dynamic_range_db < 0.0 {
            return Err(Error::InvalidParameter("dynamic range must be nonnegative".into()));
        }
        if let SubspaceKind::Ones = self.subspace {
            if self.k != 1 {
                return Err(Error::InvalidParameter("ones subspace requires K = 1".into()));
            }
        }
        if let SubspaceKind::PsfPca(spec) = &self.subspace {
            spec.validate()?;
            if self.k != spec.rank {
                return Err(Error::InvalidParameter(format!(
                    "PSF subspace rank {} != K = {}",
                    spec.rank, self.k
                )));
            }
            if self.n != spec.sample_count {
                return Err(Error::InvalidParameter(format!(
                    "PSF sample count {} != N = {}",
                    spec.sample_count, self.n
                )));
            }
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidParameter("success threshold must be positive".into()));
        }
        self.solver.validate()
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub seed: u64,
    /// Resolved absolute separation threshold.
    pub separation_threshold: f64,
    /// Actual minimum separation of the generated spikes.
    pub min_separation: f64,
    pub relative_frobenius_error: f64,
    pub success: bool,
    /// Wrap-around location error per matched source.
    pub support_errors: Vec<f64>,
    /// `|⟨h_j, ĥ_j⟩|` per matched source.
    pub overlaps: Vec<f64>,
    /// Number of detected supports.
    pub detected: usize,
    pub iterations: usize,
    pub status: ConvergenceStatus,
    pub wall_time_s: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream seed for trial `trial` of cell `cell` under `base`.
pub fn derive_seed(base: u64, cell: u64, trial: u64) -> u64 {
    let a = splitmix64(base ^ splitmix64(cell.wrapping_add(1)));
    splitmix64(a ^ splitmix64(trial.wrapping_add(0x5151_5151)))
}

fn draw_unit_vector(k: usize, kind: CoefficientKind, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    let v = match kind {
        CoefficientKind::RealGaussian => {
            DVector::from_fn(k, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0))
        }
        CoefficientKind::ComplexSphere => DVector::from_fn(k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        }),
    };
    let n = v.norm();
    if n == 0.0 {
        let mut e0 = DVector::zeros(k);
        e0[0] = Complex64::new(1.0, 0.0);
        e0
    } else {
        v / Complex64::new(n, 0.0)
    }
}

fn draw_separated_locations(
    j: usize,
    threshold: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    for _ in 0..MAX_REJECTIONS {
        let locs: Vec<f64> = (0..j).map(|_| rng.random::<f64>()).collect();
        let mut ok = true;
        'sep: for a in 0..j {
            for b in (a + 1)..j {
                if wrap_distance(locs[a], locs[b]) < threshold {
                    ok = false;
                    break 'sep;
                }
            }
        }
        if ok {
            return Ok(locs);
        }
    }
    Err(Error::SeparationRejection { attempts: MAX_REJECTIONS })
}

/// Draw a ground-truth instance and its measurements from the configuration.
///
/// Draw order is fixed (locations, amplitudes, coefficients, subspace) so a
/// seed pins the instance bit-for-bit within one build. Amplitudes follow the
/// log-uniform law `|c_j| = 10^(u·dB/20)`, `u ~ U[0,1)`, with uniform phase.
pub fn generate_instance(cfg: &TrialConfig) -> Result<(GroundTruth, DVector<Complex64>)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let locations = draw_separated_locations(cfg.j, cfg.separation_threshold(), &mut rng)?;
    let amplitudes: Vec<Complex64> = (0..cfg.j)
        .map(|_| {
            let mag = 10f64.powf(rng.random::<f64>() * cfg.dynamic_range_db / 20.0);
            let phase = TAU * rng.random::<f64>();
            Complex64::from_polar(mag, phase)
        })
        .collect();
    let coeffs: Vec<DVector<Complex64>> = (0..cfg.j)
        .map(|_| draw_unit_vector(cfg.k, cfg.coefficients, &mut rng))
        .collect();

    let subspace = match &cfg.subspace {
        SubspaceKind::Gaussian => Subspace::new(DMatrix::from_fn(cfg.n, cfg.k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), 0.0)
        }))?,
        SubspaceKind::Ones => Subspace::ones(cfg.n),
        SubspaceKind::PsfPca(spec) => {
            let dict = gaussian_psf_dictionary(spec);
            pca_subspace(&dict, spec.rank)?.0
        }
    };

    let gt = GroundTruth::new(
        SpikeTrain::new(locations, amplitudes)?,
        CoefficientSet::new(coeffs)?,
        subspace,
        IndexSet::new(cfg.n)?,
    )?;
    let y = synthesize(&gt);
    Ok((gt, y))
}

/// Generate, solve, localize, recover, and score one trial.
///
/// Solver non-convergence is recorded in the outcome, not raised as an error.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialRecord> {
    let (gt, y) = generate_instance(cfg)?;
    let start = Instant::now();
    let res = solve(&y, gt.subspace(), &cfg.solver)?;

    let dp = DualPolynomial::new(res.dual.clone(), gt.subspace());
    let grid_size = (1.0 / DEFAULT_GRID_STEP).round() as usize;
    let profile = dp.dual_norm_profile(grid_size);
    let cluster_gap = 1.0 / (2.0 * cfg.n as f64);
    let support = locate_supports_grid(&profile, DEFAULT_PEAK_THRESHOLD, cluster_gap)?;

    let sources = if !support.locations.is_empty() && support.locations.len() * cfg.k <= cfg.n {
        recover_coefficients(&support.locations, &y, gt.subspace()).ok()
    } else {
        None
    };
    let empty = RecoveredSources {
        locations: vec![],
        amplitudes: vec![],
        coefficients: vec![],
        conditioning: f64::INFINITY,
        residual: f64::INFINITY,
    };
    let metrics = evaluation_metrics(&gt, &res.x_hat, sources.as_ref().unwrap_or(&empty));
    let wall_time_s = start.elapsed().as_secs_f64();

    Ok(TrialRecord {
        n: cfg.n,
        j: cfg.j,
        k: cfg.k,
        seed: cfg.seed,
        separation_threshold: cfg.separation_threshold(),
        min_separation: gt.spikes().min_separation(),
        relative_frobenius_error: metrics.relative_frobenius_error,
        success: metrics.relative_frobenius_error < cfg.success_threshold,
        support_errors: metrics.location_errors,
        overlaps: metrics.overlaps,
        detected: support.locations.len(),
        iterations: res.iterations,
        status: res.status,
        wall_time_s,
    })
}

/// Which instance parameter a sweep axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisVar {
    N,
    J,
    K,
}

/// A two-axis Monte Carlo sweep specification.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseGridSpec {
    pub axis1: AxisVar,
    pub axis1_values: Vec<usize>,
    pub axis2: AxisVar,
    pub axis2_values: Vec<usize>,
    pub trials_per_cell: usize,
    pub base: TrialConfig,
}

impl PhaseGridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis1 == self.axis2 {
            return Err(Error::InvalidParameter("sweep axes must differ".into()));
        }
        if self.axis1_values.is_empty() || self.axis2_values.is_empty() {
            return Err(Error::InvalidParameter("sweep axes must be nonempty".into()));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::InvalidParameter("need at least one trial per cell".into()));
        }
        Ok(())
    }
}

/// Aggregated result of one sweep cell.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseCell {
    pub axis1_value: usize,
    pub axis2_value: usize,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
}

/// One sweep trial: either a record or the reason the cell is infeasible.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTrial {
    pub cell_index: usize,
    pub axis1_value: usize,
    pub axis2_value: usize,
    pub trial: usize,
    pub seed: u64,
    pub record: Option<TrialRecord>,
    pub note: Option<String>,
}

/// Full sweep output.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseSweepResult {
    pub cells: Vec<PhaseCell>,
    pub trials: Vec<SweepTrial>,
}

fn apply_axis(cfg: &mut TrialConfig, axis: AxisVar, value: usize) {
    match axis {
        AxisVar::N => cfg.n = value,
        AxisVar::J => cfg.j = value,
        AxisVar::K => cfg.k = value,
    }
}

/// Run the sweep. Trials execute in a worker pool; per-trial seeds are
/// derived from the base seed and the (cell, trial) counters, and infeasible
/// cells (for instance `J·K > N`) score zero successes instead of aborting.
pub fn phase_sweep(spec: &PhaseGridSpec) -> Result<PhaseSweepResult> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for (i1, &v1) in spec.axis1_values.iter().enumerate() {
        for (i2, &v2) in spec.axis2_values.iter().enumerate() {
            let cell_index = i1 * spec.axis2_values.len() + i2;
            for trial in 0..spec.trials_per_cell {
                let mut cfg = spec.base.clone();
                apply_axis(&mut cfg, spec.axis1, v1);
                apply_axis(&mut cfg, spec.axis2, v2);
                cfg.seed = derive_seed(spec.base.seed, cell_index as u64, trial as u64);
                jobs.push((cell_index, v1, v2, trial, cfg));
            }
        }
    }

    let mut trials: Vec<SweepTrial> = jobs
        .into_par_iter()
        .map(|(cell_index, v1, v2, trial, cfg)| {
            let seed = cfg.seed;
            match run_trial(&cfg) {
                Ok(record) => SweepTrial {
                    cell_index,
                    axis1_value: v1,
                    axis2_value: v2,
                    trial,
                    seed,
                    record: Some(record),
                    note: None,
                },
                Err(e) => SweepTrial {
                    cell_index,
                    axis1_value: v1,
                    axis2_value: v2,
                    trial,
                    seed,
                    record: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect();
    trials.sort_by_key(|t| (t.cell_index, t.trial));

    let mut cells = Vec::new();
    for (i1, &v1) in spec.axis1_values.iter().enumerate() {
        for (i2, &v2) in spec.axis2_values.iter().enumerate() {
            let cell_index = i1 * spec.axis2_values.len() + i2;
            let mine = trials.iter().filter(|t| t.cell_index == cell_index);
            let successes = mine
                .clone()
                .filter(|t| t.record.as_ref().is_some_and(|r| r.success))
                .count();
            cells.push(PhaseCell {
                axis1_value: v1,
                axis2_value: v2,
                trials: spec.trials_per_cell,
                successes,
                rate: successes as f64 / spec.trials_per_cell as f64,
            });
        }
    }
    Ok(PhaseSweepResult { cells, trials })
}

/// Gaussian point-spread-function dictionary specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsfDictionarySpec {
    /// Number of time samples (rows).
    pub sample_count: usize,
    /// Sampling interval Δt.
    pub dt: f64,
    /// Variance grid: `var_min, var_min + var_step, …, var_max`.
    pub var_min: f64,
    pub var_max: f64,
    pub var_step: f64,
    /// Truncation rank of the PCA subspace.
    pub rank: usize,
}

impl Default for PsfDictionarySpec {
    fn default() -> Self {
        Self {
            sample_count: 100,
            dt: 0.01,
            var_min: 0.1,
            var_max: 1.0,
            var_step: 0.01,
            rank: 5,
        }
    }
}

impl PsfDictionarySpec {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        if !(self.dt > 0.0) || !(self.var_step > 0.0) {
            return Err(Error::InvalidParameter("dt and variance step must be positive".into()));
        }
        if !(self.var_min > 0.0) || self.var_max < self.var_min {
            return Err(Error::InvalidParameter(
                "variance grid must be positive and increasing".into(),
            ));
        }
        if self.rank == 0 {
            return Err(Error::InvalidParameter("rank must be positive".into()));
        }
        Ok(())
    }

    /// The variance grid values.
    pub fn variances(&self) -> Vec<f64> {
        let count = ((self.var_max - self.var_min) / self.var_step).round() as usize + 1;
        (0..count).map(|i| self.var_min + i as f64 * self.var_step).collect()
    }

    /// Sample times `t_k = (k − (count−1)/2)·Δt`.
    pub fn sample_times(&self) -> Vec<f64> {
        let mid = (self.sample_count as f64 - 1.0) / 2.0;
        (0..self.sample_count).map(|k| (k as f64 - mid) * self.dt).collect()
    }
}

fn gaussian_pdf(t: f64, variance: f64) -> f64 {
    (-t * t / (2.0 * variance)).exp() / (TAU * variance).sqrt()
}

/// Dictionary whose columns sample zero-mean Gaussians over the variance grid.
pub fn gaussian_psf_dictionary(spec: &PsfDictionarySpec) -> DMatrix<f64> {
    let times = spec.sample_times();
    let variances = spec.variances();
    DMatrix::from_fn(spec.sample_count, variances.len(), |r, c| {
        gaussian_pdf(times[r], variances[c])
    })
}

/// Best rank-`rank` PCA subspace of a dictionary.
///
/// Returns the subspace spanned by the top left singular vectors and the
/// relative Frobenius approximation error `‖D − D_rank‖_F / ‖D‖_F`.
pub fn pca_subspace(dictionary: &DMatrix<f64>, rank: usize) -> Result<(Subspace, f64)> {
    let min_dim = dictionary.nrows().min(dictionary.ncols());
    if rank == 0 || rank > min_dim {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} outside [1, {min_dim}]"
        )));
    }
    let svd = dictionary.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let sv = &svd.singular_values;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let tail: f64 = sv.iter().skip(rank).map(|s| s * s).sum();
    let rel_err = if total > 0.0 { (tail / total).sqrt() } else { 0.0 };
    let b = DMatrix::from_fn(dictionary.nrows(), rank, |r, c| {
        Complex64::new(u[(r, c)], 0.0)
    });
    Ok((Subspace::new(b)?, rel_err))
}

/// Relative residual of projecting `g` onto the subspace: `‖g − BB^H g‖/‖g‖`.
pub fn projection_mismatch(g: &DVector<f64>, b: &Subspace) -> f64 {
    let gc = g.map(|v| Complex64::new(v, 0.0));
    let coeffs = b.matrix().adjoint() * &gc;
    let proj = b.matrix() * coeffs;
    (gc - proj).norm() / g.norm().max(f64::MIN_POSITIVE)
}

/// Output of a PSF model-mismatch trial.
#[derive(Debug, Clone, Serialize)]
pub struct PsfMismatchOutcome {
    pub record: TrialRecord,
    /// Relative projection residual of each true waveform onto the subspace.
    pub mismatch_residuals: Vec<f64>,
    /// PCA approximation error of the dictionary.
    pub subspace_error: f64,
    /// Dual-norm profile `(τ, ‖q(τ)‖)` from the solve.
    pub profile: Vec<(f64, f64)>,
}

/// Run a model-mismatch trial: the true waveforms are Gaussians with
/// continuous random variances (not dictionary columns), measurements are
/// synthesized from them directly, and recovery uses the rank-`rank` PCA
/// subspace. The reference coefficients for scoring are the normalized
/// projections `B^H g_j`.
pub fn psf_mismatch_trial(
    spec: &PsfDictionarySpec,
    j: usize,
    min_sep_over_n: f64,
    seed: u64,
    solver: &SolverConfig,
) -> Result<PsfMismatchOutcome> {
    spec.validate()?;
    let n = spec.sample_count;
    if j * spec.rank > n {
        return Err(Error::InvalidParameter("J*rank exceeds sample count".into()));
    }
    let dict = gaussian_psf_dictionary(spec);
    let (subspace, subspace_error) = pca_subspace(&dict, spec.rank)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locations = draw_separated_locations(j, min_sep_over_n / n as f64, &mut rng)?;
    let amplitudes: Vec<Complex64> = (0..j)
        .map(|_| {
            let mag = 10f64.powf(rng.random::<f64>() * 20.0 / 20.0);
            Complex64::from_polar(mag, TAU * rng.random::<f64>())
        })
        .collect();
    let times = spec.sample_times();
    let waveforms: Vec<DVector<f64>> = (0..j)
        .map(|_| {
            let var = spec.var_min + rng.random::<f64>() * (spec.var_max - spec.var_min);
            DVector::from_fn(n, |r, _| gaussian_pdf(times[r], var))
        })
        .collect();
    let mismatch_residuals: Vec<f64> =
        waveforms.iter().map(|g| projection_mismatch(g, &subspace)).collect();

    // reference coefficients: normalized subspace projections of the truths
    let coeffs: Vec<DVector<Complex64>> = waveforms
        .iter()
        .map(|g| {
            let gc = g.map(|v| Complex64::new(v, 0.0));
            let c = subspace.matrix().adjoint() * gc;
            let norm = c.norm();
            c / Complex64::new(norm, 0.0)
        })
        .collect();

    // measurements from the true waveforms, mismatch included
    let idx = IndexSet::new(n)?;
    let y = DVector::from_fn(n, |row, _| {
        let nn = idx.index_at(row) as f64;
        (0..j)
            .map(|s| amplitudes[s] * Complex64::cis(-TAU * nn * locations[s]) * waveforms[s][row])
            .sum()
    });

    let gt = GroundTruth::new(
        SpikeTrain::new(locations, amplitudes)?,
        CoefficientSet::new(coeffs)?,
        subspace.clone(),
        idx,
    )?;

    let start = Instant::now();
    let res = solve(&y, &subspace, solver)?;
    let dp = DualPolynomial::new(res.dual.clone(), &subspace);
    let grid_size = (1.0 / DEFAULT_GRID_STEP).round() as usize;
    let profile = dp.dual_norm_profile(grid_size);
    let support = locate_supports_grid(
        &profile,
        DEFAULT_PEAK_THRESHOLD,
        1.0 / (2.0 * n as f64),
    )?;
    let sources = if !support.locations.is_empty() && support.locations.len() * spec.rank <= n {
        recover_coefficients(&support.locations, &y, &subspace).ok()
    } else {
        None
    };
    let empty = RecoveredSources {
        locations: vec![],
        amplitudes: vec![],
        coefficients: vec![],
        conditioning: f64::INFINITY,
        residual: f64::INFINITY,
    };
    let metrics = evaluation_metrics(&gt, &res.x_hat, sources.as_ref().unwrap_or(&empty));
    let record = TrialRecord {
        n,
        j,
        k: spec.rank,
        seed,
        separation_threshold: min_sep_over_n / n as f64,
        min_separation: gt.spikes().min_separation(),
        relative_frobenius_error: metrics.relative_frobenius_error,
        success: metrics.relative_frobenius_error < 1e-4,
        support_errors: metrics.location_errors,
        overlaps: metrics.overlaps,
        detected: support.locations.len(),
        iterations: res.iterations,
        status: res.status,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(PsfMismatchOutcome { record, mismatch_residuals, subspace_error, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_separation_never_rejects() {
        let mut cfg = TrialConfig::new(16, 4, 2, 99);
        cfg.min_sep = 0.0;
        let (gt, _) = generate_instance(&cfg).unwrap();
        assert_eq!(gt.spikes().len(), 4);
    }

    #[test]
    fn over_packed_spikes_exhaust_rejections() {
        let mut cfg = TrialConfig::new(16, 8, 2, 1);
        cfg.min_sep = 3.0; // 8 spikes at pairwise distance ≥ 3/16 cannot fit
        match generate_instance(&cfg) {
            Err(Error::SeparationRejection { .. }) => {}
            other => panic!("expected rejection-budget error, got {other:?}"),
        }
    }

    #[test]
    fn same_seed_reproduces_instance() {
        let cfg = TrialConfig::new(24, 3, 2, 12345);
        let (gt1, y1) = generate_instance(&cfg).unwrap();
        let (gt2, y2) = generate_instance(&cfg).unwrap();
        assert_eq!(gt1.spikes().locations(), gt2.spikes().locations());
        assert!((y1 - y2).norm() == 0.0);
    }

    #[test]
    fn dynamic_range_is_bounded_by_twenty_db() {
        let mut mags = Vec::new();
        for seed in 0..250 {
            let cfg = TrialConfig::new(12, 4, 1, seed);
            let (gt, _) = generate_instance(&cfg).unwrap();
            mags.extend(gt.spikes().amplitudes().iter().map(|c| c.norm()));
        }
        assert_eq!(mags.len(), 1000);
        let max = mags.iter().copied().fold(0.0, f64::max);
        let min = mags.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 10.0 + 1e-9, "ratio {} exceeds 10", max / min);
        assert!(min >= 1.0 - 1e-12);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = TrialConfig::new(8, 3, 4, 0); // J*K = 12 > 8
        assert!(cfg.validate().is_err());
        assert!(run_trial(&cfg).is_err());
    }

    #[test]
    fn seed_derivation_separates_streams() {
        let mut ys: Vec<Vec<u64>> = Vec::new();
        for trial in 0..1000u64 {
            let seed = derive_seed(7, trial % 10, trial);
            let cfg = TrialConfig::new(8, 2, 1, seed);
            let (_, y) = generate_instance(&cfg).unwrap();
            ys.push(y.iter().map(|z| z.re.to_bits() ^ z.im.to_bits().rotate_left(1)).collect());
        }
        ys.sort();
        ys.dedup();
        assert_eq!(ys.len(), 1000, "duplicated instances across substreams");
    }

    #[test]
    fn psf_dictionary_shape_and_values() {
        let spec = PsfDictionarySpec::default();
        let d = gaussian_psf_dictionary(&spec);
        assert_eq!(d.nrows(), 100);
        assert_eq!(d.ncols(), 91);
        // center value of the unit-variance Gaussian
        assert_abs_diff_eq!(gaussian_pdf(0.0, 1.0), 0.3989422804014327, epsilon = 1e-12);
        // symmetric sampling grid: row k mirrors row count-1-k exactly
        for c in [0usize, 45, 90] {
            for r in 0..50 {
                assert_eq!(d[(r, c)], d[(99 - r, c)]);
            }
        }
    }

    #[test]
    fn pca_full_rank_is_exact() {
        let spec = PsfDictionarySpec { sample_count: 20, rank: 5, ..Default::default() };
        let d = gaussian_psf_dictionary(&spec);
        let (_, err) = pca_subspace(&d, 20.min(d.ncols())).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn pca_subspace_is_orthonormal() {
        let spec = PsfDictionarySpec::default();
        let d = gaussian_psf_dictionary(&spec);
        let (b, err) = pca_subspace(&d, 5).unwrap();
        assert!(err <= 1e-6, "approximation error {err} above tolerance");
        let gram = b.matrix().adjoint() * b.matrix();
        assert!((gram - DMatrix::<Complex64>::identity(5, 5)).norm() < 1e-10);
    }

    #[test]
    fn pinned_variance_has_negligible_mismatch() {
        let spec = PsfDictionarySpec::default();
        let d = gaussian_psf_dictionary(&spec);
        let (b, _) = pca_subspace(&d, 5).unwrap();
        let times = spec.sample_times();
        let g = DVector::from_fn(spec.sample_count, |r, _| gaussian_pdf(times[r], 0.37));
        assert!(projection_mismatch(&g, &b) < 1e-6);
    }
}
