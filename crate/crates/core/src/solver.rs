//! ADMM solver for the exact SDP form of the atomic-norm minimization.
//!
//! The atomic norm of a `K×N` matrix equals the optimal value of
//!
//! ```text
//!   minimize   trace(Toep(u))/(2N) + trace(T)/2
//!   subject to [ Toep(u)  X^H ]
//!              [ X        T   ]  ⪰ 0,      B(X) = y,
//! ```
//!
//! over generators `u` (first entry real), Hermitian `T`, and `X`. The solver
//! splits `(u, X, T)` against a slack copy `Z` of the block matrix and keeps
//! the measurement constraint explicit with its own multiplier, so the dual
//! optimizer `λ` of the measurement constraints is available at convergence.
//! Every subproblem is closed form: `u` by diagonal averaging with a trace
//! shift, `T` by Hermitian averaging with a trace shift, each column of `X`
//! by a rank-one-corrected solve, and `Z` by projection onto the PSD cone.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::localize::DualPolynomial;
use crate::model::Subspace;
use crate::{Error, Result};

/// ADMM parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Augmented Lagrangian penalty.
    pub rho: f64,
    /// Tolerance on the scaled primal (coupling and measurement) residuals.
    pub tol_primal: f64,
    /// Tolerance on the scaled dual residual.
    pub tol_dual: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Over-relaxation factor in `[1, 1.9]`.
    pub over_relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iter: 20_000,
            over_relaxation: 1.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter("penalty must be positive".into()));
        }
        if !(self.tol_primal > 0.0) || !(self.tol_dual > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(1.0..=1.9).contains(&self.over_relaxation) {
            return Err(Error::InvalidParameter(
                "over-relaxation factor must lie in [1, 1.9]".into(),
            ));
        }
        Ok(())
    }
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    NotConverged,
    NumericalFailure,
}

/// Output of [`solve`].
#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Recovered lifted matrix `X̂` (`K×N`).
    pub x_hat: DMatrix<Complex64>,
    /// Toeplitz generator `u` of the optimal SDP block.
    pub toeplitz_gen: DVector<Complex64>,
    /// Dual optimizer of the measurement constraints.
    pub dual: DVector<Complex64>,
    /// Primal objective `trace(Toep(u))/(2N) + trace(T)/2`.
    pub objective: f64,
    /// Dual objective `⟨λ, y⟩_R`.
    pub dual_value: f64,
    /// `|objective − dual_value|`.
    pub duality_gap: f64,
    /// Iterations used.
    pub iterations: usize,
    pub status: ConvergenceStatus,
    /// Scaled coupling residual per iteration.
    pub primal_residuals: Vec<f64>,
    /// Scaled dual residual per iteration.
    pub dual_residuals: Vec<f64>,
    /// Final `max_n |[B(X̂)]_n − y(n)|` in original units.
    pub measurement_residual: f64,
    /// Smallest eigenvalue of the final slack block `Z`.
    pub z_min_eig: f64,
    /// Trace of the final slack block `Z`.
    pub z_trace: f64,
}

/// Duality diagnostics for a solved instance.
#[derive(Debug, Clone, Serialize)]
pub struct DualityDiagnostics {
    /// `|objective − ⟨λ,y⟩_R| / max(1, objective)`.
    pub normalized_gap: f64,
    /// Maximum of `‖q(τ)‖₂` over the evaluation grid.
    pub max_grid_norm: f64,
    /// Grid location attaining the maximum.
    pub argmax: f64,
    /// Whether the solve reported convergence.
    pub converged: bool,
}

/// Hermitian Toeplitz matrix whose first column is `u`.
///
/// Entry `(r,c)` equals `u(r−c)` below the diagonal and `conj(u(c−r))` above.
/// The leading entry must be real (within 1e-12).
pub fn toeplitz_from_generator(u: &DVector<Complex64>) -> Result<DMatrix<Complex64>> {
    if u.is_empty() {
        return Err(Error::InvalidParameter("empty Toeplitz generator".into()));
    }
    if u[0].im.abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "Toeplitz generator has non-real leading entry (Im = {:.3e})",
            u[0].im
        )));
    }
    let n = u.len();
    Ok(DMatrix::from_fn(n, n, |r, c| {
        if r >= c {
            u[r - c]
        } else {
            u[c - r].conj()
        }
    }))
}

/// Adjoint of [`toeplitz_from_generator`]: entry `d` sums the `d`-th
/// subdiagonal and the conjugated `d`-th superdiagonal (the trace for `d=0`),
/// so that `⟨Toep(u), H⟩ = ⟨u, adjoint(H)⟩` in the real inner products.
pub fn toeplitz_generator_adjoint(h: &DMatrix<Complex64>) -> DVector<Complex64> {
    let n = h.nrows().min(h.ncols());
    DVector::from_fn(n, |d, _| {
        if d == 0 {
            (0..n).map(|c| h[(c, c)]).sum()
        } else {
            let sub: Complex64 = (0..n - d).map(|c| h[(c + d, c)]).sum();
            let sup: Complex64 = (0..n - d).map(|c| h[(c, c + d)]).sum();
            sub + sup.conj()
        }
    })
}

/// Frobenius-nearest PSD matrix: symmetrize, then clamp negative eigenvalues.
pub fn project_psd(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "PSD projection needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let mut sym = h.clone();
    hermitianize(&mut sym);
    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigendecomposition failed".into()))?;
    Ok(psd_from_eigen(&sym, &eig))
}

/// Solve the atomic-norm SDP for measurements `y` under subspace `b`.
///
/// On convergence `x_hat` minimizes the SDP objective subject to the PSD
/// block constraint and `B(X) = y` within the configured tolerances, and
/// `dual` is the multiplier of the measurement constraints with the sign
/// fixed so that `⟨λ, y⟩_R` approaches the objective from below.
pub fn solve(y: &DVector<Complex64>, b: &Subspace, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    if y.len() != b.n() {
        return Err(Error::DimensionMismatch(format!(
            "measurement vector has length {} but subspace has {} rows",
            y.len(),
            b.n()
        )));
    }

    let n = b.n();
    let k = b.k();
    let nk = n + k;
    let rho = cfg.rho;
    let alpha = cfg.over_relaxation;

    // Work in normalized units ŷ = y/s; the program is positively homogeneous,
    // so X, u, T, and the objective scale back by s while λ is left unchanged.
    let y_inf = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if y_inf > 0.0 { y_inf } else { 1.0 };
    let y_s = y.map(|z| z / scale);
    let meas_tol = cfg.tol_primal * (1.0 + scale) / scale;

    let b_cols: Vec<DVector<Complex64>> = (0..n).map(|r| b.b_col(r)).collect();
    // Sherman-Morrison factor for (I + b bᴴ/2)⁻¹ per column.
    let sm_factor: Vec<f64> = b_cols
        .iter()
        .map(|bc| 0.5 / (1.0 + 0.5 * bc.norm_squared()))
        .collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut u = DVector::<Complex64>::zeros(n);
    let mut t = DMatrix::<Complex64>::zeros(k, k);
    let mut x = DMatrix::<Complex64>::zeros(k, n);
    let mut z = DMatrix::<Complex64>::zeros(nk, nk);
    let mut lam = DMatrix::<Complex64>::zeros(nk, nk);
    let mut mu = DVector::<Complex64>::zeros(n);

    let mut w = DMatrix::<Complex64>::zeros(nk, nk);
    let mut g = DMatrix::<Complex64>::zeros(nk, nk);
    let mut relaxed = DMatrix::<Complex64>::zeros(nk, nk);
    let mut z_prev = DMatrix::<Complex64>::zeros(nk, nk);

    let mut primal_hist = Vec::new();
    let mut dual_hist = Vec::new();
    let mut status = ConvergenceStatus::NotConverged;
    let mut iterations = cfg.max_iter;
    let mut meas_inf = f64::INFINITY;

    for iter in 0..cfg.max_iter {
        // W = Z + Λ/ρ
        for (wi, (zi, li)) in w.iter_mut().zip(z.iter().zip(lam.iter())) {
            *wi = zi + li / rho;
        }

        // u-update: diagonal averages of the top-left block, trace shift on u₀.
        let diag_mean: f64 = (0..n).map(|c| w[(c, c)].re).sum::<f64>() / n as f64;
        u[0] = Complex64::new(diag_mean - 1.0 / (2.0 * rho * n as f64), 0.0);
        for d in 1..n {
            let mut sub = zero;
            let mut sup = zero;
            for c in 0..n - d {
                sub += w[(c + d, c)];
                sup += w[(c, c + d)];
            }
            u[d] = (sub + sup.conj()) / (2.0 * (n - d) as f64);
        }

        // T-update: Hermitian average of the bottom-right block, trace shift.
        for p in 0..k {
            for q in p..k {
                let avg = 0.5 * (w[(n + p, n + q)] + w[(n + q, n + p)].conj());
                t[(p, q)] = avg;
                t[(q, p)] = avg.conj();
            }
            t[(p, p)] = Complex64::new(t[(p, p)].re - 1.0 / (2.0 * rho), 0.0);
        }

        // X-update: per column, (I + b bᴴ/2) x = w + ((ŷ − μ/ρ)/2) b.
        for c in 0..n {
            let bc = &b_cols[c];
            let rhs_shift = 0.5 * (y_s[c] - mu[c] / rho);
            let mut dot = zero;
            for p in 0..k {
                let r = 0.5 * (w[(n + p, c)] + w[(c, n + p)].conj()) + rhs_shift * bc[p];
                x[(p, c)] = r;
                dot += bc[p].conj() * r;
            }
            let corr = sm_factor[c] * dot;
            for p in 0..k {
                x[(p, c)] -= corr * bc[p];
            }
        }

        // Assemble G(u, X, T).
        for r in 0..n {
            for c in 0..=r {
                g[(r, c)] = u[r - c];
                g[(c, r)] = u[r - c].conj();
            }
        }
        for p in 0..k {
            for c in 0..n {
                g[(n + p, c)] = x[(p, c)];
                g[(c, n + p)] = x[(p, c)].conj();
            }
            for q in 0..k {
                g[(n + p, n + q)] = t[(p, q)];
            }
        }

        // Z-update with over-relaxation, then multiplier updates.
        std::mem::swap(&mut z_prev, &mut z);
        for (ri, (gi, zi)) in relaxed.iter_mut().zip(g.iter().zip(z_prev.iter())) {
            *ri = alpha * gi + (1.0 - alpha) * zi;
        }
        let mut proj_in = DMatrix::<Complex64>::zeros(nk, nk);
        for (pi, (ri, li)) in proj_in.iter_mut().zip(relaxed.iter().zip(lam.iter())) {
            *pi = ri - li / rho;
        }
        hermitianize(&mut proj_in);
        let eig = SymmetricEigen::try_new(proj_in.clone(), f64::EPSILON, 0).ok_or_else(|| {
            Error::NumericalFailure("Hermitian eigendecomposition failed in Z-step".into())
        })?;
        z = psd_from_eigen(&proj_in, &eig);

        for (li, (zi, ri)) in lam.iter_mut().zip(z.iter().zip(relaxed.iter())) {
            *li += rho * (zi - ri);
        }

        meas_inf = 0.0;
        for c in 0..n {
            let bc = &b_cols[c];
            let mut meas = -y_s[c];
            for p in 0..k {
                meas += bc[p].conj() * x[(p, c)];
            }
            mu[c] += rho * meas;
            meas_inf = meas_inf.max(meas.norm());
        }

        // Scaled residuals.
        let mut couple_sq = 0.0;
        let mut z_norm_sq = 0.0;
        let mut g_norm_sq = 0.0;
        let mut step_sq = 0.0;
        let mut lam_norm_sq = 0.0;
        for i in 0..nk * nk {
            let zi = z[i];
            let gi = g[i];
            couple_sq += (zi - gi).norm_sqr();
            z_norm_sq += zi.norm_sqr();
            g_norm_sq += gi.norm_sqr();
            step_sq += (zi - z_prev[i]).norm_sqr();
            lam_norm_sq += lam[i].norm_sqr();
        }
        let primal_res = couple_sq.sqrt() / z_norm_sq.sqrt().max(g_norm_sq.sqrt()).max(1.0);
        let dual_res = rho * step_sq.sqrt() / lam_norm_sq.sqrt().max(1.0);
        primal_hist.push(primal_res);
        dual_hist.push(dual_res);

        if !primal_res.is_finite() || !dual_res.is_finite() || !meas_inf.is_finite() {
            status = ConvergenceStatus::NumericalFailure;
            iterations = iter + 1;
            break;
        }

        debug_assert!(u[0].im.abs() < 1e-12);

        if primal_res <= cfg.tol_primal && dual_res <= cfg.tol_dual && meas_inf <= meas_tol {
            status = ConvergenceStatus::Converged;
            iterations = iter + 1;
            break;
        }
    }

    // Dual candidate: λ = −μ, flipped if the multiplier convention inverted it.
    let mut dual: DVector<Complex64> = mu.map(|m| -m);
    let mut dual_value = dual
        .iter()
        .zip(y_s.iter())
        .map(|(l, yv)| (yv.conj() * l).re)
        .sum::<f64>()
        * scale;
    if dual_value < 0.0 {
        dual.neg_mut();
        dual_value = -dual_value;
    }

    let objective = scale * (0.5 * u[0].re + 0.5 * (0..k).map(|p| t[(p, p)].re).sum::<f64>());
    let z_trace: f64 = (0..nk).map(|i| z[(i, i)].re).sum();
    let z_min_eig = SymmetricEigen::try_new(z.clone(), f64::EPSILON, 0)
        .map(|e| e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN);

    if status == ConvergenceStatus::NotConverged && !objective.is_finite() {
        status = ConvergenceStatus::NumericalFailure;
    }

    Ok(SolverResult {
        x_hat: x.map(|v| scale * v),
        toeplitz_gen: u.map(|v| scale * v),
        dual,
        objective,
        dual_value,
        duality_gap: (objective - dual_value).abs(),
        iterations,
        status,
        primal_residuals: primal_hist,
        dual_residuals: dual_hist,
        measurement_residual: scale * meas_inf,
        z_min_eig,
        z_trace,
    })
}

/// Duality diagnostics: normalized gap and the maximum dual-polynomial norm
/// over a uniform grid of `grid_size` points.
pub fn duality_report(result: &SolverResult, b: &Subspace, grid_size: usize) -> DualityDiagnostics {
    let dp = DualPolynomial::new(result.dual.clone(), b);
    let profile = dp.dual_norm_profile(grid_size.max(2));
    let (argmax, max_grid_norm) = profile
        .iter()
        .copied()
        .fold((0.0, 0.0), |acc, (tau, v)| if v > acc.1 { (tau, v) } else { acc });
    DualityDiagnostics {
        normalized_gap: result.duality_gap / result.objective.max(1.0),
        max_grid_norm,
        argmax,
        converged: result.status == ConvergenceStatus::Converged,
    }
}

fn hermitianize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in 0..r {
            let avg = 0.5 * (m[(r, c)] + m[(c, r)].conj());
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
        m[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
    }
}

/// Rebuild the PSD part from an eigendecomposition, working from whichever
/// side (positive or negative spectrum) has fewer terms.
fn psd_from_eigen(sym: &DMatrix<Complex64>, eig: &SymmetricEigen<Complex64, nalgebra::Dyn>) -> DMatrix<Complex64> {
    let nk = sym.nrows();
    let vals = &eig.eigenvalues;
    let vecs = &eig.eigenvectors;
    let pos: Vec<usize> = (0..nk).filter(|&i| vals[i] > 0.0).collect();
    let neg: Vec<usize> = (0..nk).filter(|&i| vals[i] < 0.0).collect();
    if pos.len() <= neg.len() {
        let mut out = DMatrix::<Complex64>::zeros(nk, nk);
        accumulate_outer(&mut out, vecs, vals, &pos, 1.0);
        out
    } else {
        let mut out = sym.clone();
        accumulate_outer(&mut out, vecs, vals, &neg, -1.0);
        out
    }
}

fn accumulate_outer(
    out: &mut DMatrix<Complex64>,
    vecs: &DMatrix<Complex64>,
    vals: &DVector<f64>,
    idx: &[usize],
    sign: f64,
) {
    let n = out.nrows();
    for &i in idx {
        let w = sign * vals[i];
        let col = vecs.column(i);
        for r in 0..n {
            let wr = w * col[r];
            for c in 0..n {
                out[(r, c)] += wr * col[c].conj();
            }
        }
    }
}
