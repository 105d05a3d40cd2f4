//! Signal model: centered sample indices, spike trains, waveform subspace,
//! lifting, and the measurement operator `B` with its adjoint.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::{Error, Result};

/// Centered sample indices `n = -⌊N/2⌋ … N-1-⌊N/2⌋`.
///
/// The indices are consecutive integers containing 0. For `N = 4M+1` the set
/// is the symmetric range `{-2M, …, 2M}`; even `N` is supported with the
/// convention above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    n: usize,
}

impl IndexSet {
    /// Index set with `n` samples.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        Ok(Self { n })
    }

    /// Symmetric index set `{-2M, …, 2M}` with `N = 4M+1` samples.
    pub fn for_half_width(m: usize) -> Self {
        Self { n: 4 * m + 1 }
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset `⌊N/2⌋` mapping index `n` to column `n + ⌊N/2⌋`.
    pub fn offset(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Signed index stored at column `col`.
    pub fn index_at(&self, col: usize) -> i64 {
        col as i64 - self.offset()
    }

    /// Column holding signed index `n`.
    pub fn column_of(&self, n: i64) -> usize {
        (n + self.offset()) as usize
    }

    /// Iterator over the signed indices in column order.
    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n).map(|c| self.index_at(c))
    }
}

/// Wrap-around distance on the torus `[0,1)`: `min(d, 1-d)` with `d = |a-b| mod 1`.
pub fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Spike locations and complex amplitudes.
#[derive(Debug, Clone)]
pub struct SpikeTrain {
    locations: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl SpikeTrain {
    /// New spike train; locations must lie in `[0,1)`, be pairwise distinct,
    /// and carry nonzero amplitudes.
    pub fn new(locations: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if locations.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} locations but {} amplitudes",
                locations.len(),
                amplitudes.len()
            )));
        }
        for &tau in &locations {
            if !(0.0..1.0).contains(&tau) {
                return Err(Error::InvalidParameter(format!(
                    "spike location {tau} outside [0,1)"
                )));
            }
        }
        for (j, &c) in amplitudes.iter().enumerate() {
            if c.norm() == 0.0 {
                return Err(Error::InvalidParameter(format!("amplitude {j} is zero")));
            }
        }
        for i in 0..locations.len() {
            for k in (i + 1)..locations.len() {
                if locations[i] == locations[k] {
                    return Err(Error::InvalidParameter(format!(
                        "duplicate spike location {}",
                        locations[i]
                    )));
                }
            }
        }
        Ok(Self { locations, amplitudes })
    }

    /// Number of spikes `J`.
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Minimum wrap-around separation `Δτ`; infinite for fewer than two spikes.
    pub fn min_separation(&self) -> f64 {
        let mut sep = f64::INFINITY;
        for i in 0..self.locations.len() {
            for k in (i + 1)..self.locations.len() {
                sep = sep.min(wrap_distance(self.locations[i], self.locations[k]));
            }
        }
        sep
    }
}

/// Known `N×K` waveform subspace; row `n` of the matrix is `b_n^H`.
#[derive(Debug, Clone)]
pub struct Subspace {
    b: DMatrix<Complex64>,
}

impl Subspace {
    /// Wrap an `N×K` matrix with `1 ≤ K ≤ N`.
    pub fn new(b: DMatrix<Complex64>) -> Result<Self> {
        if b.ncols() == 0 || b.nrows() == 0 {
            return Err(Error::InvalidParameter("subspace matrix is empty".into()));
        }
        if b.ncols() > b.nrows() {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension K={} exceeds sample count N={}",
                b.ncols(),
                b.nrows()
            )));
        }
        Ok(Self { b })
    }

    /// All-ones subspace with `K = 1`.
    pub fn ones(n: usize) -> Self {
        Self {
            b: DMatrix::from_element(n, 1, Complex64::new(1.0, 0.0)),
        }
    }

    /// Number of samples `N` (rows).
    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    /// Subspace dimension `K` (columns).
    pub fn k(&self) -> usize {
        self.b.ncols()
    }

    /// Underlying matrix whose row `n` is `b_n^H`.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    /// The column vector `b_n` for the sample stored at `row`.
    pub fn b_col(&self, row: usize) -> DVector<Complex64> {
        DVector::from_fn(self.b.ncols(), |p, _| self.b[(row, p)].conj())
    }

    /// Coherence estimate `max_{n,p} |b_n(p)|²`.
    pub fn coherence(&self) -> f64 {
        self.b.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
    }
}

/// Unit coefficient vectors `h_j ∈ C^K`, one per spike.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    h: Vec<DVector<Complex64>>,
}

impl CoefficientSet {
    /// Wrap coefficient vectors; each must be unit-norm to within 1e-12.
    pub fn new(h: Vec<DVector<Complex64>>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidParameter("no coefficient vectors".into()));
        }
        let k = h[0].len();
        for (j, v) in h.iter().enumerate() {
            if v.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient vector {j} has length {} != {k}",
                    v.len()
                )));
            }
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "coefficient vector {j} has norm {} != 1",
                    v.norm()
                )));
            }
        }
        Ok(Self { h })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Dimension `K` of the vectors.
    pub fn k(&self) -> usize {
        self.h[0].len()
    }

    pub fn vectors(&self) -> &[DVector<Complex64>] {
        &self.h
    }
}

/// A full generative instance: spikes, coefficients, subspace, and indices.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    spikes: SpikeTrain,
    coefficients: CoefficientSet,
    subspace: Subspace,
    index: IndexSet,
}

impl GroundTruth {
    pub fn new(
        spikes: SpikeTrain,
        coefficients: CoefficientSet,
        subspace: Subspace,
        index: IndexSet,
    ) -> Result<Self> {
        if spikes.len() != coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} spikes but {} coefficient vectors",
                spikes.len(),
                coefficients.len()
            )));
        }
        if coefficients.k() != subspace.k() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient dimension {} != subspace dimension {}",
                coefficients.k(),
                subspace.k()
            )));
        }
        if subspace.n() != index.len() {
            return Err(Error::DimensionMismatch(format!(
                "subspace has {} rows but index set has {} samples",
                subspace.n(),
                index.len()
            )));
        }
        Ok(Self { spikes, coefficients, subspace, index })
    }

    pub fn spikes(&self) -> &SpikeTrain {
        &self.spikes
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coefficients
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn index(&self) -> &IndexSet {
        &self.index
    }
}

/// Steering vector `a(τ)` with entries `e^{i2πnτ}` over the index set.
pub fn steering_vector(tau: f64, idx: &IndexSet) -> Result<DVector<Complex64>> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("location {tau} outside [0,1)")));
    }
    Ok(DVector::from_fn(idx.len(), |c, _| {
        Complex64::cis(TAU * idx.index_at(c) as f64 * tau)
    }))
}

/// Lift a ground-truth instance into the `K×N` matrix `X = Σ_j c_j h_j a(τ_j)^H`.
pub fn lift(gt: &GroundTruth) -> DMatrix<Complex64> {
    let k = gt.subspace.k();
    let n = gt.index.len();
    let mut x = DMatrix::<Complex64>::zeros(k, n);
    for (j, &tau) in gt.spikes.locations().iter().enumerate() {
        let c = gt.spikes.amplitudes()[j];
        let h = &gt.coefficients.vectors()[j];
        for col in 0..n {
            // a(τ)^H has entries e^{-i2πnτ}.
            let phase = Complex64::cis(-TAU * gt.index.index_at(col) as f64 * tau);
            let scale = c * phase;
            for p in 0..k {
                x[(p, col)] += scale * h[p];
            }
        }
    }
    x
}

/// Apply the measurement operator: `y(n) = b_n^H X e_n`.
pub fn apply_b(x: &DMatrix<Complex64>, b: &Subspace) -> Result<DVector<Complex64>> {
    if x.ncols() != b.n() || x.nrows() != b.k() {
        return Err(Error::DimensionMismatch(format!(
            "lifted matrix is {}x{} but subspace expects {}x{}",
            x.nrows(),
            x.ncols(),
            b.k(),
            b.n()
        )));
    }
    let bm = b.matrix();
    Ok(DVector::from_fn(b.n(), |row, _| {
        // Row `row` of B is b_n^H, so this is b_n^H times column n of X.
        (0..b.k()).map(|p| bm[(row, p)] * x[(p, row)]).sum()
    }))
}

/// Adjoint of the measurement operator: column `n` of the output is `λ(n)·b_n`.
pub fn apply_b_adjoint(lambda: &DVector<Complex64>, b: &Subspace) -> Result<DMatrix<Complex64>> {
    if lambda.len() != b.n() {
        return Err(Error::DimensionMismatch(format!(
            "dual vector has length {} but subspace has {} rows",
            lambda.len(),
            b.n()
        )));
    }
    let bm = b.matrix();
    Ok(DMatrix::from_fn(b.k(), b.n(), |p, col| {
        lambda[col] * bm[(col, p)].conj()
    }))
}

/// Synthesize measurements directly: `y(n) = Σ_j c_j e^{-i2πnτ_j} b_n^H h_j`.
pub fn synthesize(gt: &GroundTruth) -> DVector<Complex64> {
    let bm = gt.subspace.matrix();
    DVector::from_fn(gt.index.len(), |row, _| {
        let n = gt.index.index_at(row) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &tau) in gt.spikes.locations().iter().enumerate() {
            let h = &gt.coefficients.vectors()[j];
            let inner: Complex64 = (0..gt.subspace.k()).map(|p| bm[(row, p)] * h[p]).sum();
            acc += gt.spikes.amplitudes()[j] * Complex64::cis(-TAU * n * tau) * inner;
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_unit(k: usize, rng: &mut impl Rng) -> DVector<Complex64> {
        let v = DVector::from_fn(k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        v / Complex64::new(n, 0.0)
    }

    fn random_instance(n: usize, j: usize, k: usize, seed: u64) -> GroundTruth {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let locations: Vec<f64> = (0..j).map(|i| (rng.random::<f64>() + i as f64) / j as f64).collect();
        let amplitudes: Vec<Complex64> = (0..j)
            .map(|_| Complex64::from_polar(0.5 + rng.random::<f64>(), TAU * rng.random::<f64>()))
            .collect();
        let h: Vec<DVector<Complex64>> = (0..j).map(|_| random_unit(k, &mut rng)).collect();
        let b = DMatrix::from_fn(n, k, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        GroundTruth::new(
            SpikeTrain::new(locations, amplitudes).unwrap(),
            CoefficientSet::new(h).unwrap(),
            Subspace::new(b).unwrap(),
            IndexSet::new(n).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn index_set_is_centered_and_contains_zero() {
        let idx = IndexSet::new(64).unwrap();
        assert_eq!(idx.index_at(0), -32);
        assert_eq!(idx.index_at(63), 31);
        assert!(idx.indices().any(|n| n == 0));

        let sym = IndexSet::for_half_width(3);
        assert_eq!(sym.len(), 13);
        assert_eq!(sym.indices().min().unwrap(), -6);
        assert_eq!(sym.indices().max().unwrap(), 6);
        assert_eq!(sym.column_of(0), 6);
    }

    #[test]
    fn steering_at_zero_is_all_ones() {
        let idx = IndexSet::new(9).unwrap();
        let a = steering_vector(0.0, &idx).unwrap();
        for z in a.iter() {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn steering_half_n3() {
        let idx = IndexSet::new(3).unwrap();
        let a = steering_vector(0.5, &idx).unwrap();
        let expect = [-1.0, 1.0, -1.0];
        for (z, e) in a.iter().zip(expect) {
            assert_abs_diff_eq!(z.re, e, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_quarter_n5() {
        let idx = IndexSet::new(5).unwrap();
        let a = steering_vector(0.25, &idx).unwrap();
        let expect = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ];
        for (z, e) in a.iter().zip(expect) {
            assert_abs_diff_eq!(z.re, e.re, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, e.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_rejects_out_of_range() {
        let idx = IndexSet::new(5).unwrap();
        assert!(steering_vector(1.0, &idx).is_err());
        assert!(steering_vector(-0.1, &idx).is_err());
    }

    #[test]
    fn steering_norm_is_sqrt_n() {
        let idx = IndexSet::new(17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = steering_vector(rng.random::<f64>(), &idx).unwrap();
            assert_abs_diff_eq!(a.norm_squared(), 17.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn lift_single_spike_at_zero() {
        let k = 3;
        let n = 7;
        let mut e1 = DVector::zeros(k);
        e1[0] = Complex64::new(1.0, 0.0);
        let gt = GroundTruth::new(
            SpikeTrain::new(vec![0.0], vec![Complex64::new(1.0, 0.0)]).unwrap(),
            CoefficientSet::new(vec![e1]).unwrap(),
            Subspace::new(DMatrix::identity(n, k)).unwrap(),
            IndexSet::new(n).unwrap(),
        )
        .unwrap();
        let x = lift(&gt);
        for col in 0..n {
            assert_abs_diff_eq!(x[(0, col)].re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(x[(0, col)].im, 0.0, epsilon = 1e-14);
            for p in 1..k {
                assert_eq!(x[(p, col)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn lift_is_linear_in_spikes() {
        let gt = random_instance(11, 3, 2, 5);
        let x_all = lift(&gt);
        let mut x_sum = DMatrix::zeros(2, 11);
        for j in 0..3 {
            let single = GroundTruth::new(
                SpikeTrain::new(
                    vec![gt.spikes().locations()[j]],
                    vec![gt.spikes().amplitudes()[j]],
                )
                .unwrap(),
                CoefficientSet::new(vec![gt.coefficients().vectors()[j].clone()]).unwrap(),
                gt.subspace().clone(),
                gt.index().clone(),
            )
            .unwrap();
            x_sum += lift(&single);
        }
        assert!((x_all - x_sum).norm() < 1e-12);
    }

    #[test]
    fn lift_matches_triple_loop_oracle() {
        let gt = random_instance(13, 2, 3, 11);
        let x = lift(&gt);
        // independent entrywise construction
        for p in 0..3 {
            for col in 0..13 {
                let n = gt.index().index_at(col) as f64;
                let mut expect = Complex64::new(0.0, 0.0);
                for j in 0..2 {
                    expect += gt.spikes().amplitudes()[j]
                        * gt.coefficients().vectors()[j][p]
                        * Complex64::cis(-TAU * n * gt.spikes().locations()[j]);
                }
                assert!((x[(p, col)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_b_single_row_subspace() {
        let gt = random_instance(9, 2, 1, 17);
        let ones = Subspace::ones(9);
        let x = lift(&GroundTruth::new(
            gt.spikes().clone(),
            gt.coefficients().clone(),
            ones.clone(),
            gt.index().clone(),
        )
        .unwrap());
        let y = apply_b(&x, &ones).unwrap();
        for col in 0..9 {
            assert!((y[col] - x[(0, col)]).norm() < 1e-14);
        }
    }

    #[test]
    fn apply_b_of_lift_matches_synthesize() {
        let gt = random_instance(16, 3, 2, 23);
        let y1 = apply_b(&lift(&gt), gt.subspace()).unwrap();
        let y2 = synthesize(&gt);
        assert!((y1 - y2).norm() < 1e-12);
    }

    #[test]
    fn adjoint_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = 8 + (rng.random::<u32>() % 8) as usize;
            let k = 1 + (rng.random::<u32>() % 4) as usize;
            let b = Subspace::new(DMatrix::from_fn(n, k, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }))
            .unwrap();
            let x = DMatrix::from_fn(k, n, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let lambda = DVector::from_fn(n, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            // <B(X), λ> = <X, B*(λ)> in the complex inner products
            let lhs: Complex64 = apply_b(&x, &b)
                .unwrap()
                .iter()
                .zip(lambda.iter())
                .map(|(yi, li)| li.conj() * yi)
                .collect::<Vec<_>>()
                .into_iter()
                .sum();
            let adj = apply_b_adjoint(&lambda, &b).unwrap();
            let rhs: Complex64 = x
                .iter()
                .zip(adj.iter())
                .map(|(xi, ai)| ai.conj() * xi)
                .sum();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn adjoint_indicator_and_zero() {
        let b = Subspace::new(DMatrix::from_fn(5, 2, |r, c| {
            Complex64::new((r + c) as f64, r as f64 - c as f64)
        }))
        .unwrap();
        let mut lambda = DVector::zeros(5);
        lambda[3] = Complex64::new(1.0, 0.0);
        let out = apply_b_adjoint(&lambda, &b).unwrap();
        for col in 0..5 {
            for p in 0..2 {
                let expect = if col == 3 { b.b_col(3)[p] } else { Complex64::new(0.0, 0.0) };
                assert!((out[(p, col)] - expect).norm() < 1e-14);
            }
        }
        let zero = apply_b_adjoint(&DVector::zeros(5), &b).unwrap();
        assert_eq!(zero.norm(), 0.0);
    }

    #[test]
    fn synthesize_identity_subspace_returns_h() {
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = random_unit(n, &mut rng);
        let gt = GroundTruth::new(
            SpikeTrain::new(vec![0.0], vec![Complex64::new(1.0, 0.0)]).unwrap(),
            CoefficientSet::new(vec![h.clone()]).unwrap(),
            Subspace::new(DMatrix::identity(n, n)).unwrap(),
            IndexSet::new(n).unwrap(),
        )
        .unwrap();
        let y = synthesize(&gt);
        assert!((y - h).norm() < 1e-12);
    }

    #[test]
    fn synthesize_is_homogeneous_in_amplitudes() {
        let gt = random_instance(12, 2, 2, 47);
        let doubled = GroundTruth::new(
            SpikeTrain::new(
                gt.spikes().locations().to_vec(),
                gt.spikes().amplitudes().iter().map(|c| 2.0 * c).collect(),
            )
            .unwrap(),
            gt.coefficients().clone(),
            gt.subspace().clone(),
            gt.index().clone(),
        )
        .unwrap();
        let y = synthesize(&gt);
        let y2 = synthesize(&doubled);
        assert!((y2 - y.map(|z| 2.0 * z)).norm() < 1e-12);
    }

    #[test]
    fn synthesize_matches_direct_sum_oracle_fig1_size() {
        let gt = random_instance(64, 3, 4, 2024);
        let y = synthesize(&gt);
        for row in 0..64 {
            let n = gt.index().index_at(row) as f64;
            let mut expect = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                let mut inner = Complex64::new(0.0, 0.0);
                for p in 0..4 {
                    inner += gt.subspace().matrix()[(row, p)] * gt.coefficients().vectors()[j][p];
                }
                expect += gt.spikes().amplitudes()[j]
                    * Complex64::cis(-TAU * n * gt.spikes().locations()[j])
                    * inner;
            }
            assert!((y[row] - expect).norm() < 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn lifted_matrix_has_numerical_rank_at_most_j() {
        let gt = random_instance(24, 3, 4, 53);
        let x = lift(&gt);
        let sv = x.svd(false, false).singular_values;
        let tol = 1e-8 * sv[0];
        let rank = sv.iter().filter(|s| **s > tol).count();
        assert!(rank <= 3, "numerical rank {rank} exceeds J=3");
    }

    #[test]
    fn spike_train_validation() {
        assert!(SpikeTrain::new(vec![0.5, 0.5], vec![Complex64::new(1.0, 0.0); 2]).is_err());
        assert!(SpikeTrain::new(vec![1.2], vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(SpikeTrain::new(vec![0.2], vec![Complex64::new(0.0, 0.0)]).is_err());
        let st = SpikeTrain::new(vec![0.1, 0.95], vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert_abs_diff_eq!(st.min_separation(), 0.15, epsilon = 1e-12);
    }

    #[test]
    fn wrap_distance_is_toroidal() {
        assert_abs_diff_eq!(wrap_distance(0.1, 0.9), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_distance(0.9, 0.1), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_distance(0.3, 0.3), 0.0, epsilon = 1e-15);
    }
}
