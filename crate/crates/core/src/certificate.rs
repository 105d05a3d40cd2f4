//! Numerical construction and validation of the interpolation dual
//! certificate.
//!
//! The certificate interpolates `sign(c_j)·h_j` at the spike locations with
//! vanishing derivative, using kernels generated from the squared Fejér
//! kernel `K_M(τ) = [sin(πMτ)/(M sin(πτ))]⁴`. Its Fourier coefficients
//! `g_M(n)` (a triangle-sequence self-convolution) define the weights of the
//! least-energy program whose solution the certificate realizes. Two variants
//! are built: a deterministic scalar system `D′` coupling kernel values and
//! derivatives at the spikes, and its random counterpart `D` where every
//! kernel coefficient is modulated by the rank-one factors `b_n b_n^H` of the
//! waveform subspace.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::model::{wrap_distance, IndexSet, Subspace};
use crate::{Error, Result};

/// Admissible deviation of the system matrix from the identity.
const SYSTEM_DEVIATION_BOUND: f64 = 0.3623;
/// Operator-norm bound on the system matrix.
const SYSTEM_NORM_BOUND: f64 = 1.3623;
/// Operator-norm bound on the inverse system matrix.
const SYSTEM_INVERSE_BOUND: f64 = 1.568;
/// Interpolation coefficients satisfy `‖α_j‖ ∈ [1−δ, 1+δ]` with this δ.
const ALPHA_DEVIATION: f64 = 8.824e-3;
/// Derivative coefficients satisfy `‖β_j‖ ≤ 1.647e-2 / M`.
const BETA_BOUND_NUMERATOR: f64 = 1.647e-2;
/// Certificate norm bound on the near region around each spike.
const NEAR_NORM_BOUND: f64 = 1.0361;
/// Certificate derivative bound `1.5765·M` on the near region.
const NEAR_DERIVATIVE_FACTOR: f64 = 1.5765;
/// Curvature bound `−0.3756·M²` of `‖q‖²/2` on the near region.
const CURVATURE_FACTOR: f64 = -0.3756;
/// Near-region half-width `8.245e-2 / M`.
const NEAR_REGION_HALF_WIDTH: f64 = 8.245e-2;
/// Half-width `1e-2 / M` of the windows excluded from the off-support max.
const EXCLUSION_HALF_WIDTH: f64 = 1e-2;
/// Strict-inequality margin for the off-support norm check.
const STRICT_MARGIN: f64 = 1e-6;
/// Residual tolerance for interpolation and derivative constraints.
const INTERPOLATION_TOL: f64 = 1e-8;
/// Condition-number cutoff for the certificate linear system.
const CONDITION_LIMIT: f64 = 1e10;
/// Linear-system residual tolerance for the certificate solve.
const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// `g_M(n)`: self-convolution of the triangle sequence,
/// `(1/M) Σ_k (1−|k|/M)(1−|n−k|/M)` over the overlap window. Defined for
/// `|n| ≤ 2M`; vanishes at `|n| ∈ {2M−1, 2M}`.
pub fn triangle_convolution(m: usize, n: i64) -> Result<f64> {
    let mi = m as i64;
    if n.abs() > 2 * mi {
        return Err(Error::InvalidParameter(format!(
            "index {n} outside [-2M, 2M] with M = {m}"
        )));
    }
    let mf = m as f64;
    let lo = (n - mi).max(-mi);
    let hi = (n + mi).min(mi);
    let mut acc = 0.0;
    for k in lo..=hi {
        acc += (1.0 - (k.abs() as f64) / mf) * (1.0 - ((n - k).abs() as f64) / mf);
    }
    Ok(acc / mf)
}

/// Kernel weights `g_M(n)` and the induced `w_n = sqrt(M / g_M(n))`.
#[derive(Debug, Clone)]
pub struct WeightScheme {
    m: usize,
    g: Vec<f64>, // index n + 2M
}

impl WeightScheme {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("half-width M must be positive".into()));
        }
        let mi = m as i64;
        let g = (-2 * mi..=2 * mi)
            .map(|n| triangle_convolution(m, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, g })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `g_M(n)` for `|n| ≤ 2M`.
    pub fn g(&self, n: i64) -> f64 {
        self.g[(n + 2 * self.m as i64) as usize]
    }

    /// `w_n = sqrt(M / g_M(n))` where defined; `None` on the zero mask.
    pub fn weight(&self, n: i64) -> Option<f64> {
        let g = self.g(n);
        (g > 0.0).then(|| (self.m as f64 / g).sqrt())
    }

    /// Indices where `g_M(n) = 0` (so the certificate forces `λ(n) = 0`).
    pub fn is_zero(&self, n: i64) -> bool {
        self.g(n) == 0.0
    }
}

/// Exact second derivative of the squared Fejér kernel at zero:
/// `K″_M(0) = −4π²(M²−1)/3`.
pub fn fejer_second_derivative_at_zero(m: usize) -> f64 {
    let mf = m as f64;
    -4.0 * PI * PI * (mf * mf - 1.0) / 3.0
}

/// `K^{(ℓ)}_M(τ) = (1/M) Σ_n (i2πn)^ℓ g_M(n) e^{i2πnτ}` for `ℓ ∈ {0,1,2,3}`.
///
/// All derivatives are real because `g_M` is even; the coefficient pairs
/// `±n` are summed together to keep that exact.
pub fn fejer_kernel(weights: &WeightScheme, tau: f64, order: usize) -> f64 {
    assert!(order <= 3, "kernel derivative order capped at 3");
    let m = weights.m as f64;
    let mut acc = if order == 0 { weights.g(0) } else { 0.0 };
    for n in 1..=(2 * weights.m as i64) {
        let g = weights.g(n);
        if g == 0.0 {
            continue;
        }
        let factor = Complex64::new(0.0, TAU * n as f64).powu(order as u32);
        acc += 2.0 * g * (factor * Complex64::cis(TAU * n as f64 * tau)).re;
    }
    acc / m
}

/// Closed-form squared Fejér kernel `[sin(πMτ)/(M sin(πτ))]⁴`, with the
/// removable singularity at integer `τ` filled by its limit 1.
pub fn fejer_kernel_closed(m: usize, tau: f64) -> f64 {
    let t = tau - tau.round();
    if t.abs() < 1e-12 {
        return 1.0;
    }
    let ratio = (PI * m as f64 * t).sin() / (m as f64 * (PI * t).sin());
    ratio.powi(4)
}

/// One bound check of a certificate report.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub kind: BoundKind,
    pub pass: bool,
}

/// Direction of a bound check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

impl BoundCheck {
    fn upper(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, kind: BoundKind::Upper, pass: value <= bound }
    }

    fn lower(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, kind: BoundKind::Lower, pass: value >= bound }
    }
}

/// Deterministic `2J×2J` interpolation system built from scalar kernels.
#[derive(Debug, Clone)]
pub struct DeterministicSystem {
    matrix: DMatrix<f64>,
    taus: Vec<f64>,
    weights: WeightScheme,
    /// False when the spikes violate `Δτ ≥ 1/M`; construction proceeds but
    /// the bound checks are expected to fail.
    pub separation_ok: bool,
}

/// Random `2JK×2JK` interpolation system from the subspace-modulated kernels.
#[derive(Debug, Clone)]
pub struct RandomSystem {
    matrix: DMatrix<Complex64>,
    taus: Vec<f64>,
    weights: WeightScheme,
    subspace: Subspace,
    pub separation_ok: bool,
}

fn min_separation(taus: &[f64]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..taus.len() {
        for j in (i + 1)..taus.len() {
            sep = sep.min(wrap_distance(taus[i], taus[j]));
        }
    }
    sep
}

/// Build the deterministic system `D′` with blocks
/// `[D′₀, D′₁/c; −D′₁/c, −D′₂/c²]`, `c = sqrt(|K″_M(0)|)`.
pub fn build_dprime(taus: &[f64], m: usize) -> Result<DeterministicSystem> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("no spike locations".into()));
    }
    for &t in taus {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("location {t} outside [0,1)")));
        }
    }
    let weights = WeightScheme::new(m)?;
    let j = taus.len();
    let c = fejer_second_derivative_at_zero(m).abs().sqrt();
    let mut d = DMatrix::<f64>::zeros(2 * j, 2 * j);
    for s in 0..j {
        for t in 0..j {
            let dt = taus[s] - taus[t];
            d[(s, t)] = fejer_kernel(&weights, dt, 0);
            d[(s, j + t)] = fejer_kernel(&weights, dt, 1) / c;
            d[(j + s, t)] = -fejer_kernel(&weights, dt, 1) / c;
            d[(j + s, j + t)] = -fejer_kernel(&weights, dt, 2) / (c * c);
        }
    }
    let separation_ok = min_separation(taus) >= 1.0 / m as f64;
    Ok(DeterministicSystem { matrix: d, taus: taus.to_vec(), weights, separation_ok })
}

/// Build the random system `D = (1/M) Σ_n (g_M(n) E(n)E(n)^H) ⊗ (b_n b_n^H)`.
///
/// The subspace must have `N = 4M+1` rows indexed by the symmetric set.
pub fn build_d(taus: &[f64], m: usize, b: &Subspace) -> Result<RandomSystem> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("no spike locations".into()));
    }
    if b.n() != 4 * m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "subspace has {} rows but M = {m} requires {}",
            b.n(),
            4 * m + 1
        )));
    }
    let weights = WeightScheme::new(m)?;
    let j = taus.len();
    let k = b.k();
    let c = fejer_second_derivative_at_zero(m).abs().sqrt();
    let idx = IndexSet::for_half_width(m);
    let dim = 2 * j * k;
    let mut d = DMatrix::<Complex64>::zeros(dim, dim);
    let mut e = vec![Complex64::new(0.0, 0.0); 2 * j];
    for row in 0..b.n() {
        let n = idx.index_at(row);
        let g = weights.g(n);
        if g == 0.0 {
            continue;
        }
        let bn = b.b_col(row);
        for (s, &tau) in taus.iter().enumerate() {
            let phase = Complex64::cis(TAU * n as f64 * tau);
            e[s] = phase;
            e[j + s] = Complex64::new(0.0, -TAU * n as f64 / c) * phase;
        }
        let w = g / m as f64;
        for su in 0..2 * j {
            for sv in 0..2 * j {
                let ee = w * e[su] * e[sv].conj();
                for p in 0..k {
                    let lead = ee * bn[p];
                    for q in 0..k {
                        d[(su * k + p, sv * k + q)] += lead * bn[q].conj();
                    }
                }
            }
        }
    }
    let separation_ok = min_separation(taus) >= 1.0 / m as f64;
    Ok(RandomSystem {
        matrix: d,
        taus: taus.to_vec(),
        weights,
        subspace: b.clone(),
        separation_ok,
    })
}

impl DeterministicSystem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn m(&self) -> usize {
        self.weights.m()
    }

    /// Operator-norm checks of the system against its published bounds.
    pub fn invertibility_checks(&self) -> Vec<BoundCheck> {
        let dim = self.matrix.nrows();
        let sv = self.matrix.clone().svd(false, false).singular_values;
        let norm = sv[0];
        let smin = sv[sv.len() - 1];
        let dev = (DMatrix::<f64>::identity(dim, dim) - &self.matrix)
            .svd(false, false)
            .singular_values[0];
        vec![
            BoundCheck::upper("identity_deviation_norm", dev, SYSTEM_DEVIATION_BOUND),
            BoundCheck::upper("system_norm", norm, SYSTEM_NORM_BOUND),
            BoundCheck::upper(
                "inverse_norm",
                if smin > 0.0 { 1.0 / smin } else { f64::INFINITY },
                SYSTEM_INVERSE_BOUND,
            ),
        ]
    }

    /// Solve `D′ [α; c·β] = [signs; 0]` for unit-modulus signs, returning the
    /// unscaled `(α_j, β_j)`.
    pub fn solve(&self, signs: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let j = self.taus.len();
        if signs.len() != j {
            return Err(Error::DimensionMismatch(format!(
                "{} signs for {} spikes",
                signs.len(),
                j
            )));
        }
        let sv = self.matrix.clone().svd(false, false).singular_values;
        let cond = if sv[sv.len() - 1] > 0.0 { sv[0] / sv[sv.len() - 1] } else { f64::INFINITY };
        if !(cond < CONDITION_LIMIT) {
            return Err(Error::IllConditioned { cond, limit: CONDITION_LIMIT });
        }
        let mc = self.matrix.map(|v| Complex64::new(v, 0.0));
        let mut rhs = DVector::<Complex64>::zeros(2 * j);
        for (s, &sg) in signs.iter().enumerate() {
            rhs[s] = sg;
        }
        let sol = mc
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("certificate system is singular".into()))?;
        let residual = (&mc * &sol - &rhs).norm();
        if residual > SOLVE_RESIDUAL_TOL * rhs.norm().max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "certificate solve residual {residual:.3e} too large"
            )));
        }
        let c = fejer_second_derivative_at_zero(self.m()).abs().sqrt();
        let alphas = (0..j).map(|s| sol[s]).collect();
        let betas = (0..j).map(|s| sol[j + s] / c).collect();
        Ok((alphas, betas))
    }

    /// Evaluator for the deterministic certificate `q̄`.
    pub fn evaluator(&self, alphas: Vec<Complex64>, betas: Vec<Complex64>) -> CertificateEvaluator {
        CertificateEvaluator {
            inner: EvalKind::Deterministic {
                weights: self.weights.clone(),
                taus: self.taus.clone(),
                alphas,
                betas,
            },
        }
    }
}

impl RandomSystem {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn m(&self) -> usize {
        self.weights.m()
    }

    /// Solve `D [α; c·β] = [h; 0]` for stacked targets `sign(c_j)·h_j`.
    pub fn solve(
        &self,
        targets: &[DVector<Complex64>],
    ) -> Result<(Vec<DVector<Complex64>>, Vec<DVector<Complex64>>)> {
        let j = self.taus.len();
        let k = self.subspace.k();
        if targets.len() != j {
            return Err(Error::DimensionMismatch(format!(
                "{} targets for {} spikes",
                targets.len(),
                j
            )));
        }
        if targets.iter().any(|t| t.len() != k) {
            return Err(Error::DimensionMismatch("target dimension != K".into()));
        }
        let sv = self.matrix.clone().svd(false, false).singular_values;
        let cond = if sv[sv.len() - 1] > 0.0 { sv[0] / sv[sv.len() - 1] } else { f64::INFINITY };
        if !(cond < CONDITION_LIMIT) {
            return Err(Error::IllConditioned { cond, limit: CONDITION_LIMIT });
        }
        let mut rhs = DVector::<Complex64>::zeros(2 * j * k);
        for (s, t) in targets.iter().enumerate() {
            for p in 0..k {
                rhs[s * k + p] = t[p];
            }
        }
        let sol = self
            .matrix
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("certificate system is singular".into()))?;
        let residual = (&self.matrix * &sol - &rhs).norm();
        if residual > SOLVE_RESIDUAL_TOL * rhs.norm().max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "certificate solve residual {residual:.3e} too large"
            )));
        }
        let c = fejer_second_derivative_at_zero(self.m()).abs().sqrt();
        let alphas = (0..j)
            .map(|s| DVector::from_fn(k, |p, _| sol[s * k + p]))
            .collect();
        let betas = (0..j)
            .map(|s| DVector::from_fn(k, |p, _| sol[(j + s) * k + p] / c))
            .collect();
        Ok((alphas, betas))
    }

    /// Evaluator for the random certificate built on this subspace.
    pub fn evaluator(
        &self,
        alphas: Vec<DVector<Complex64>>,
        betas: Vec<DVector<Complex64>>,
    ) -> CertificateEvaluator {
        CertificateEvaluator {
            inner: EvalKind::Random {
                weights: self.weights.clone(),
                taus: self.taus.clone(),
                subspace: self.subspace.clone(),
                alphas,
                betas,
            },
        }
    }
}

/// Norm checks of the interpolation coefficients against their published
/// bounds (`‖α_j‖` near 1, `‖β_j‖ = O(1/M)`).
pub fn coefficient_checks(alpha_norms: &[f64], beta_norms: &[f64], m: usize) -> Vec<BoundCheck> {
    let amin = alpha_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let amax = alpha_norms.iter().copied().fold(0.0, f64::max);
    let bmax = beta_norms.iter().copied().fold(0.0, f64::max);
    vec![
        BoundCheck::lower("alpha_norm_min", amin, 1.0 - ALPHA_DEVIATION),
        BoundCheck::upper("alpha_norm_max", amax, 1.0 + ALPHA_DEVIATION),
        BoundCheck::upper("beta_norm_max", bmax, BETA_BOUND_NUMERATOR / m as f64),
    ]
}

enum EvalKind {
    Deterministic {
        weights: WeightScheme,
        taus: Vec<f64>,
        alphas: Vec<Complex64>,
        betas: Vec<Complex64>,
    },
    Random {
        weights: WeightScheme,
        taus: Vec<f64>,
        subspace: Subspace,
        alphas: Vec<DVector<Complex64>>,
        betas: Vec<DVector<Complex64>>,
    },
}

/// Assembled certificate `q^{(ℓ)}(τ) = Σ_j K^{(ℓ)}(τ−τ_j)α_j + K^{(ℓ+1)}(τ−τ_j)β_j`.
pub struct CertificateEvaluator {
    inner: EvalKind,
}

impl CertificateEvaluator {
    /// Output dimension (1 in deterministic mode, `K` in random mode).
    pub fn k(&self) -> usize {
        match &self.inner {
            EvalKind::Deterministic { .. } => 1,
            EvalKind::Random { subspace, .. } => subspace.k(),
        }
    }

    /// Evaluate `q^{(order)}(τ)` for `order ∈ {0,1,2}`.
    pub fn eval(&self, tau: f64, order: usize) -> DVector<Complex64> {
        assert!(order <= 2, "certificate evaluation supports q, q', q''");
        match &self.inner {
            EvalKind::Deterministic { weights, taus, alphas, betas } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &tj) in taus.iter().enumerate() {
                    let dt = tau - tj;
                    acc += alphas[j] * fejer_kernel(weights, dt, order)
                        + betas[j] * fejer_kernel(weights, dt, order + 1);
                }
                DVector::from_element(1, acc)
            }
            EvalKind::Random { weights, taus, subspace, alphas, betas } => {
                let k = subspace.k();
                let idx = IndexSet::for_half_width(weights.m());
                let mut q = DVector::<Complex64>::zeros(k);
                for row in 0..subspace.n() {
                    let n = idx.index_at(row);
                    let g = weights.g(n);
                    if g == 0.0 {
                        continue;
                    }
                    let bn = subspace.b_col(row);
                    let deriv = Complex64::new(0.0, TAU * n as f64);
                    let mut s = Complex64::new(0.0, 0.0);
                    for (j, &tj) in taus.iter().enumerate() {
                        let inner_a: Complex64 =
                            (0..k).map(|p| bn[p].conj() * alphas[j][p]).sum();
                        let inner_b: Complex64 =
                            (0..k).map(|p| bn[p].conj() * betas[j][p]).sum();
                        s += Complex64::cis(TAU * n as f64 * (tau - tj))
                            * (inner_a + deriv * inner_b);
                    }
                    let w = deriv.powu(order as u32) * s * (g / weights.m() as f64);
                    for p in 0..k {
                        q[p] += w * bn[p];
                    }
                }
                q
            }
        }
    }

    /// Underlying dual vector `λ` (random mode only): entry `n` is
    /// `(g_M(n)/M)·Σ_j e^{-i2πnτ_j}(b_n^H α_j + i2πn·b_n^H β_j)`, zero on the
    /// zero-weight mask.
    pub fn lambda(&self) -> Option<DVector<Complex64>> {
        match &self.inner {
            EvalKind::Deterministic { .. } => None,
            EvalKind::Random { weights, taus, subspace, alphas, betas } => {
                let idx = IndexSet::for_half_width(weights.m());
                let k = subspace.k();
                Some(DVector::from_fn(subspace.n(), |row, _| {
                    let n = idx.index_at(row);
                    let g = weights.g(n);
                    if g == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let bn = subspace.b_col(row);
                    let deriv = Complex64::new(0.0, TAU * n as f64);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &tj) in taus.iter().enumerate() {
                        let inner_a: Complex64 =
                            (0..k).map(|p| bn[p].conj() * alphas[j][p]).sum();
                        let inner_b: Complex64 =
                            (0..k).map(|p| bn[p].conj() * betas[j][p]).sum();
                        acc += Complex64::cis(-TAU * n as f64 * tj) * (inner_a + deriv * inner_b);
                    }
                    acc * (g / weights.m() as f64)
                }))
            }
        }
    }
}

/// Grid validation record for a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// `max_j ‖q(τ_j) − sign(c_j)h_j‖₂`.
    pub interpolation_residual: f64,
    /// `max_j ‖q′(τ_j)‖₂ / sqrt(|K″(0)|)`.
    pub derivative_residual: f64,
    /// Max grid norm outside the exclusion windows around the spikes.
    pub off_support_max: f64,
    /// Max grid norm on the near regions `|τ−τ_j| ≤ 8.245e-2/M`.
    pub near_region_max_norm: f64,
    /// Max derivative norm on the near regions.
    pub near_region_max_derivative: f64,
    /// Max of `‖q′‖² + Re(q″^H q)` over the exclusion windows.
    pub curvature_max: f64,
    pub curvature_all_negative: bool,
    pub checks: Vec<BoundCheck>,
    /// True when every check passed.
    pub pass: bool,
}

impl CertificateReport {
    /// Append further checks (system norms, coefficient bounds) and
    /// re-evaluate the overall verdict.
    pub fn extend_checks(&mut self, more: Vec<BoundCheck>) {
        self.checks.extend(more);
        self.pass = self.checks.iter().all(|c| c.pass);
    }
}

/// Validate a certificate on a uniform grid of `grid_size` points.
///
/// Off-support means farther than `1e-2/M` (wrap-around) from every spike;
/// inside those windows the curvature of `‖q‖²` is checked instead. The near
/// regions of half-width `8.245e-2/M` are checked against their norm and
/// derivative bounds.
pub fn validate_certificate(
    evaluator: &CertificateEvaluator,
    taus: &[f64],
    targets: &[DVector<Complex64>],
    m: usize,
    grid_size: usize,
) -> Result<CertificateReport> {
    if grid_size < 10 * m {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid_size} too coarse for M = {m} (need at least {})",
            10 * m
        )));
    }
    if taus.len() != targets.len() {
        return Err(Error::DimensionMismatch("one target per spike required".into()));
    }
    let c = fejer_second_derivative_at_zero(m).abs().sqrt();
    let mut interpolation_residual: f64 = 0.0;
    let mut derivative_residual: f64 = 0.0;
    for (j, &tj) in taus.iter().enumerate() {
        interpolation_residual =
            interpolation_residual.max((evaluator.eval(tj, 0) - &targets[j]).norm());
        derivative_residual = derivative_residual.max(evaluator.eval(tj, 1).norm() / c);
    }

    let excl = EXCLUSION_HALF_WIDTH / m as f64;
    let near = NEAR_REGION_HALF_WIDTH / m as f64;
    let mut off_support_max: f64 = 0.0;
    let mut near_norm: f64 = 0.0;
    let mut near_deriv: f64 = 0.0;
    let mut curvature_max = f64::NEG_INFINITY;
    for s in 0..grid_size {
        let tau = s as f64 / grid_size as f64;
        let dist = taus
            .iter()
            .map(|&tj| wrap_distance(tau, tj))
            .fold(f64::INFINITY, f64::min);
        let q = evaluator.eval(tau, 0);
        let qn = q.norm();
        if dist > excl {
            off_support_max = off_support_max.max(qn);
        } else {
            let q1 = evaluator.eval(tau, 1);
            let q2 = evaluator.eval(tau, 2);
            let inner: f64 = q2.iter().zip(q.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            curvature_max = curvature_max.max(q1.norm_squared() + inner);
        }
        if dist <= near {
            near_norm = near_norm.max(qn);
            near_deriv = near_deriv.max(evaluator.eval(tau, 1).norm());
        }
    }

    let mf = m as f64;
    let checks = vec![
        BoundCheck::upper("interpolation_residual", interpolation_residual, INTERPOLATION_TOL),
        BoundCheck::upper("derivative_residual", derivative_residual, INTERPOLATION_TOL),
        BoundCheck::upper("off_support_max", off_support_max, 1.0 - STRICT_MARGIN),
        BoundCheck::upper("near_region_norm", near_norm, NEAR_NORM_BOUND),
        BoundCheck::upper("near_region_derivative", near_deriv, NEAR_DERIVATIVE_FACTOR * mf),
        BoundCheck::upper("near_region_curvature", curvature_max, CURVATURE_FACTOR * mf * mf),
    ];
    let pass = checks.iter().all(|ck| ck.pass);
    Ok(CertificateReport {
        interpolation_residual,
        derivative_residual,
        off_support_max,
        near_region_max_norm: near_norm,
        near_region_max_derivative: near_deriv,
        curvature_max,
        curvature_all_negative: curvature_max < 0.0,
        checks,
        pass,
    })
}
