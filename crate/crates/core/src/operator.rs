//! Dense complex Hermitian linear algebra: eigendecomposition, matrix
//! functions, tensor products, entropy, and pseudo-inverse square roots.
//!
//! All entropies and related quantities are reported in bits (base-2
//! logarithms); [`bits_to_nats`] and [`nats_to_bits`] convert where a
//! natural-log scale is wanted. Values are immutable after construction
//! and all operations are pure functions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Largest tolerated asymmetry `max |H - H^dagger|` at construction.
pub const HERMITICITY_TOL: f64 = 1e-8;
/// Eigenvalues of a density operator in `[-PSD_TOL, 0]` are clamped to 0;
/// anything more negative is rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this threshold are treated as exactly zero in
/// entropy-like sums.
pub const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-12;
/// Default cap on the dimension of any materialized tensor-power space.
pub const DEFAULT_DIM_CAP: usize = 4096;

pub fn bits_to_nats(x: f64) -> f64 {
    x * std::f64::consts::LN_2
}

pub fn nats_to_bits(x: f64) -> f64 {
    x / std::f64::consts::LN_2
}

fn max_abs_entry(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes the input as `(H + H^dagger)/2` and rejects
/// matrices whose asymmetry exceeds [`HERMITICITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let adj = mat.adjoint();
        let asymmetry = max_abs_entry(&(&mat - &adj));
        if asymmetry > HERMITICITY_TOL {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self {
            mat: (mat + adj) * Complex64::new(0.5, 0.0),
        })
    }

    /// Wraps a matrix that is Hermitian by construction (e.g. `V f(L) V^dagger`
    /// with real `f(L)`, or a Kronecker product of Hermitian factors).
    pub(crate) fn from_hermitian_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            mat: ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(diag[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Trace; real for Hermitian input.
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Largest `|eigenvalue|`.
    pub fn operator_norm(&self) -> Result<f64> {
        let spec = eig_hermitian(self)?;
        Ok(spec
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs())))
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: &self.mat * Complex64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }
}

/// `Tr AB` for Hermitian `A`, `B`; the result is real.
pub fn trace_product(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    let mut acc = 0.0;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            // Tr AB = sum_ij A_ij B_ji; B_ji = conj(B_ij) for Hermitian B.
            acc += (a.mat[(i, j)] * b.mat[(j, i)]).re;
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Real eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(l)) V^dagger`, symmetrized to scrub roundoff from the
    /// two multiplications.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::new(f(self.eigenvalues[k]), 0.0);
        }
        let mat = &scaled * self.eigenvectors.adjoint();
        let adj = mat.adjoint();
        HermitianOperator::from_hermitian_unchecked((mat + adj) * Complex64::new(0.5, 0.0))
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.apply(|l| l)
    }
}

/// Eigendecomposition with eigenvalues sorted in descending order.
/// Deterministic for identical input.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<Spectrum> {
    let n = h.dim();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let se = nalgebra::linalg::SymmetricEigen::try_new(h.mat.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::EigenFailed)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies a real scalar function to a Hermitian operator through its
/// spectrum: `V f(L) V^dagger`. Fails if `f` is undefined (non-finite)
/// at some eigenvalue.
pub fn matrix_function(
    h: &HermitianOperator,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    for &l in &spec.eigenvalues {
        if !f(l).is_finite() {
            return Err(Error::FunctionUndefined { eigenvalue: l });
        }
    }
    Ok(spec.apply(f))
}

/// A positive unit-trace Hermitian operator (a quantum state).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    /// Validates unit trace (within 1e-10) and positivity (eigenvalues
    /// down to `-PSD_TOL` are accepted and treated as zero).
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::TraceNotOne { trace });
        }
        let spec = eig_hermitian(&op)?;
        let min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(Self { op })
    }

    /// Wraps an operator that is a valid state by construction
    /// (convex mixtures and tensor products of valid states).
    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn herm(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eig_hermitian(&self.op)
    }

    /// Eigenvalues clamped to `[0, 1]`: values in `[-PSD_TOL, 0]` become 0.
    pub fn clamped_eigenvalues(&self) -> Result<Vec<f64>> {
        let spec = self.spectrum()?;
        Ok(spec
            .eigenvalues
            .iter()
            .map(|&l| if l < 0.0 { 0.0 } else { l })
            .collect())
    }

    /// `Tr S^2`.
    pub fn purity(&self) -> f64 {
        trace_product(&self.op, &self.op)
    }

    /// Largest eigenvalue at least `1 - tol`.
    pub fn is_pure(&self, tol: f64) -> Result<bool> {
        let spec = self.spectrum()?;
        Ok(spec.eigenvalues[0] >= 1.0 - tol)
    }
}

/// Unit vector in the Hilbert space; a rank-1 pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: ComplexVector,
}

impl PureState {
    pub fn new(vec: ComplexVector) -> Result<Self> {
        if vec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = vec.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { vec })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(ComplexVector::from_iterator(
            amps.len(),
            amps.iter().map(|&a| Complex64::new(a, 0.0)),
        ))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = ComplexVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self { vec: v }
    }

    /// Extracts the top eigenvector of a (numerically) pure density
    /// operator. The global phase is fixed by making the largest-modulus
    /// component real positive, so the output is deterministic.
    pub fn from_density(s: &DensityOperator) -> Result<Self> {
        let spec = s.spectrum()?;
        if spec.eigenvalues[0] < 1.0 - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "state is not pure: largest eigenvalue {}",
                spec.eigenvalues[0]
            )));
        }
        let mut v: ComplexVector = spec.eigenvectors.column(0).into_owned();
        let (k, _) = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).expect("finite"))
            .expect("nonempty vector");
        let phase = v[k] / v[k].norm();
        v /= phase;
        v /= Complex64::new(v.norm(), 0.0);
        Ok(Self { vec: v })
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vec
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.vec.dotc(&other.vec)
    }

    pub fn projector(&self) -> DensityOperator {
        let mat = &self.vec * self.vec.adjoint();
        DensityOperator::new_unchecked(HermitianOperator::from_hermitian_unchecked(mat))
    }
}

/// Kronecker products in word order.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
    fn space_dim(&self) -> usize;
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self::from_hermitian_unchecked(self.mat.kronecker(&other.mat))
    }

    fn space_dim(&self) -> usize {
        self.dim()
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self::new_unchecked(self.op.tensor(&other.op))
    }

    fn space_dim(&self) -> usize {
        self.dim()
    }
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            vec: self.vec.kronecker(&other.vec),
        }
    }

    fn space_dim(&self) -> usize {
        self.dim()
    }
}

/// Checks `dim^n <= cap` and returns `dim^n`.
pub fn checked_power_dim(dim: usize, n: usize, cap: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc
            .checked_mul(dim)
            .filter(|&d| d <= cap)
            .ok_or(Error::DimCapExceeded {
                required: dim.checked_pow(n as u32).unwrap_or(usize::MAX),
                cap,
            })?;
    }
    Ok(acc)
}

/// `n`-fold tensor power, `n >= 1`, subject to the dimension cap.
pub fn tensor_power<T: Tensor + Clone>(x: &T, n: usize, cap: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "tensor power requires n >= 1".to_string(),
        ));
    }
    checked_power_dim(x.space_dim(), n, cap)?;
    let mut acc = x.clone();
    for _ in 1..n {
        acc = acc.tensor(x);
    }
    Ok(acc)
}

/// Von Neumann entropy in bits, with `0 log 0 = 0`; eigenvalues below
/// [`ENTROPY_EIGENVALUE_FLOOR`] are treated as exactly zero.
pub fn von_neumann_entropy(s: &DensityOperator) -> Result<f64> {
    let eigs = s.clamped_eigenvalues()?;
    Ok(entropy_of_distribution(&eigs))
}

/// `-sum p log2 p` over entries above the eigenvalue floor.
pub fn entropy_of_distribution(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > ENTROPY_EIGENVALUE_FLOOR)
        .map(|&x| -x * x.log2())
        .sum()
}

fn default_pinv_cutoff(dim: usize, max_eig: f64) -> f64 {
    dim as f64 * f64::EPSILON * max_eig.max(0.0)
}

/// `H^{-1/2}` restricted to the support: eigenvalues above the cutoff map
/// to `1/sqrt(l)`, the rest to 0. The default cutoff is
/// `dim * machine_epsilon * max_eigenvalue`. Rejects inputs with an
/// eigenvalue below `-1e-8`.
pub fn pinv_sqrt(h: &HermitianOperator, cutoff: Option<f64>) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    let min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let cut = cutoff.unwrap_or_else(|| default_pinv_cutoff(h.dim(), spec.eigenvalues[0]));
    Ok(spec.apply(|l| if l > cut { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Projector onto the span of eigenvectors with eigenvalue above the cutoff.
pub fn support_projector(h: &HermitianOperator, cutoff: Option<f64>) -> Result<HermitianOperator> {
    let spec = eig_hermitian(h)?;
    let min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let cut = cutoff.unwrap_or_else(|| default_pinv_cutoff(h.dim(), spec.eigenvalues[0]));
    Ok(spec.apply(|l| if l > cut { 1.0 } else { 0.0 }))
}
