//! Dense complex linear algebra on 2^n-dimensional spin spaces.
//!
//! Everything downstream (layer exponentials, effective generators, error
//! norms) reduces to Hermitian eigendecompositions and matrix products, so
//! this module pins the conventions once:
//!
//! * spectra are returned in ascending eigenvalue order;
//! * each eigenvector is rephased so that its largest-magnitude component is
//!   real and positive (first such index on exact ties), which makes every
//!   derived artifact byte-reproducible;
//! * `evolve_unitary(h, t)` is `exp(-i h t)`;
//! * `unitary_log(u, dt)` is `i ln(u) / dt` on the principal branch, with
//!   eigenphases confined to `(-pi, pi]` and an explicit refusal when a phase
//!   sits numerically on the branch cut.
//!
//! Matrices with exactly-zero imaginary parts take a real-symmetric solver
//! path; this is purely an optimization and changes no observable output.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shorthand for the scalar type used across the crate.
pub type C64 = Complex64;

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

/// Numeric acceptance thresholds shared by the validated operations.
///
/// The defaults are deliberate: validation thresholds sit two to four decades
/// above f64 round-off for desk-scale (dim <= 4096) problems, and the guard
/// around the logarithm branch cut is wide enough that a refusal fires before
/// the log becomes ill-conditioned rather than after.
#[derive(Clone, Debug)]
pub struct Tolerances {
    /// Max `|A - A^dag|` entry accepted by [`hermitian_eig`].
    pub hermiticity: f64,
    /// Max `|U^dag U - I|` entry accepted by [`unitary_log`].
    pub unitarity: f64,
    /// Eigenvalue width within which unitary eigenvalues are treated as one
    /// cluster while diagonalizing the log. Merging is always safe (the
    /// cluster is re-split against the sine part), while *not* merging a
    /// near-degenerate cosine pair leaves eigenvectors with an error of
    /// roughly `machine epsilon / gap`; the default keeps that error below
    /// ~1e-11 even when a small step compresses the cosine spectrum
    /// quadratically.
    pub cluster: f64,
    /// Refusal margin around `+/-pi` for log eigenphases.
    pub branch_guard: f64,
    /// Max entrywise residual allowed when the computed logarithm is
    /// re-exponentiated against the input unitary; above it the step's
    /// eigenbasis was not resolved and the result is refused.
    pub log_residual: f64,
    /// Allowed deviation of state-vector norms from 1.
    pub normalization: f64,
    /// Spectral-gap floor below which eigenstate tracking refuses to run.
    pub degeneracy: f64,
    /// Minimum separation between best and runner-up overlap for an
    /// unambiguous eigenpair match.
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            unitarity: 1e-10,
            cluster: 1e-5,
            branch_guard: 1e-6,
            log_residual: 1e-8,
            normalization: 1e-10,
            degeneracy: 1e-8,
            matching: 1e-6,
        }
    }
}

// ---------------------------------------------------------------------------
// DenseOperator
// ---------------------------------------------------------------------------

/// A dense operator on an n-site spin-1/2 space (dimension 2^n).
///
/// Construction validates squareness, the power-of-two dimension, and entry
/// finiteness; arithmetic on mismatched dimensions panics (it is a
/// programming error, not a data error).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    m: DMatrix<C64>,
}

impl DenseOperator {
    /// Wraps a matrix, validating shape and finiteness.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let dim = m.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::BadDimension { dim });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { context: "operator entries" });
        }
        Ok(Self { dim, m })
    }

    /// Internal constructor for matrices produced by our own arithmetic.
    pub(crate) fn from_matrix(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square() && m.nrows().is_power_of_two() && m.nrows() >= 2);
        Self { dim: m.nrows(), m }
    }

    /// The zero operator.
    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    /// The identity operator.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Borrow the underlying matrix.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    /// Consume into the underlying matrix.
    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_matrix(self.m.adjoint())
    }

    /// Kronecker product, `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_matrix(self.m.kronecker(&other.m))
    }

    /// Scalar multiple.
    pub fn scaled(&self, factor: impl Into<C64>) -> Self {
        let f = factor.into();
        Self::from_matrix(self.m.map(|z| z * f))
    }

    /// Apply to a state: `self |psi>`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.dim != psi.dim() {
            return Err(Error::DimensionMismatch { left: self.dim, right: psi.dim() });
        }
        Ok(StateVector::from_vector(&self.m * psi.amplitudes()))
    }

    /// Max entry magnitude of `A - A^dag` (0 for exactly Hermitian input).
    pub fn hermiticity_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.m[(i, j)] - self.m[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Max entry magnitude of `U^dag U - I` (0 for exactly unitary input).
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.m.adjoint() * &self.m;
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// True when every entry has an exactly-zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// Integer operator power by repeated squaring (`k = 0` gives identity).
    pub fn pow(&self, k: u64) -> Self {
        let mut result = DMatrix::identity(self.dim, self.dim);
        let mut base = self.m.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Self::from_matrix(result)
    }
}

impl std::ops::Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_matrix(&self.m + &rhs.m)
    }
}

impl std::ops::Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_matrix(&self.m - &rhs.m)
    }
}

impl std::ops::Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_matrix(&self.m * &rhs.m)
    }
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    DenseOperator::from_matrix(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// A normalized pure state on a 2^n-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dim: usize,
    v: DVector<C64>,
}

impl StateVector {
    /// Wraps an already-normalized vector; rejects norms off unity by more
    /// than the default normalization tolerance.
    pub fn new(v: DVector<C64>) -> Result<Self> {
        Self::with_tolerance(v, Tolerances::default().normalization)
    }

    /// As [`StateVector::new`] with an explicit norm tolerance.
    pub fn with_tolerance(v: DVector<C64>, tolerance: f64) -> Result<Self> {
        let s = Self::validated_shape(v)?;
        let norm = s.v.norm();
        if (norm - 1.0).abs() > tolerance {
            return Err(Error::NotNormalized { norm, tolerance });
        }
        Ok(s)
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let mut s = Self::validated_shape(v)?;
        let norm = s.v.norm();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm { norm });
        }
        s.v /= C64::new(norm, 0.0);
        Ok(s)
    }

    /// The computational basis state `|index>`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::BadDimension { dim });
        }
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { dim, v })
    }

    fn validated_shape(v: DVector<C64>) -> Result<Self> {
        let dim = v.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::BadDimension { dim });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { context: "state amplitudes" });
        }
        Ok(Self { dim, v })
    }

    /// Internal constructor for vectors produced by validated arithmetic.
    pub(crate) fn from_vector(v: DVector<C64>) -> Self {
        debug_assert!(v.len().is_power_of_two() && v.len() >= 2);
        Self { dim: v.len(), v }
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Borrow the amplitudes.
    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.v
    }

    /// Euclidean norm (1 for states built through the validated paths).
    pub fn norm(&self) -> f64 {
        self.v.norm()
    }
}

/// Inner product `<a|b>` (conjugate-linear in the first argument).
pub fn state_overlap(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(a.amplitudes().dotc(b.amplitudes()))
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian operator.
///
/// Invariants: eigenvalues ascend, the basis columns are orthonormal, and
/// each column follows the largest-component-real-positive phase convention.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    basis: DMatrix<C64>,
}

impl Spectrum {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenbasis; column `k` pairs with `eigenvalues()[k]`.
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// The `k`-th eigenvector as a state.
    pub fn eigenvector(&self, k: usize) -> Result<StateVector> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange { index: k, dim: self.dim() });
        }
        Ok(StateVector::from_vector(self.basis.column(k).into_owned()))
    }

    /// Rebuild the dense operator `V diag(E) V^dag`.
    pub fn reconstruct(&self) -> DenseOperator {
        let mut w = self.basis.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            w.column_mut(j).scale_mut(e);
        }
        let m = &w * self.basis.adjoint();
        DenseOperator::from_matrix(m)
    }

    /// The unitary `exp(-i H t)` generated by this spectrum.
    pub fn evolve(&self, t: f64) -> DenseOperator {
        if t == 0.0 {
            // Exactly the identity; skip the eigenbasis round-trip and its
            // roundoff.
            return DenseOperator::from_matrix(DMatrix::identity(self.dim(), self.dim()));
        }
        let mut w = self.basis.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for i in 0..w.nrows() {
                w[(i, j)] *= phase;
            }
        }
        DenseOperator::from_matrix(&w * self.basis.adjoint())
    }

    /// Apply `exp(-i H t)` to a state without forming the dense unitary.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: psi.dim() });
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let mut coeffs = self.basis.adjoint() * psi.amplitudes();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            coeffs[j] *= C64::from_polar(1.0, -e * t);
        }
        Ok(StateVector::from_vector(&self.basis * coeffs))
    }

    /// Distance from eigenvalue `k` to its nearest spectral neighbor.
    pub fn gap_at(&self, k: usize) -> Result<f64> {
        let n = self.eigenvalues.len();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, dim: n });
        }
        let mut gap = f64::INFINITY;
        if k > 0 {
            gap = gap.min(self.eigenvalues[k] - self.eigenvalues[k - 1]);
        }
        if k + 1 < n {
            gap = gap.min(self.eigenvalues[k + 1] - self.eigenvalues[k]);
        }
        Ok(gap)
    }

    /// Smallest nearest-neighbor eigenvalue spacing.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn from_parts(eigenvalues: Vec<f64>, basis: DMatrix<C64>) -> Self {
        Self { eigenvalues, basis }
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian operator with the crate's default
/// tolerances.
pub fn hermitian_eig(op: &DenseOperator) -> Result<Spectrum> {
    hermitian_eig_with(op, &Tolerances::default())
}

/// As [`hermitian_eig`], with explicit tolerances.
///
/// Rejects non-Hermitian input (reporting the max asymmetry), symmetrizes
/// the round-off remainder, and returns an ascending, phase-fixed spectrum.
pub fn hermitian_eig_with(op: &DenseOperator, tol: &Tolerances) -> Result<Spectrum> {
    let asymmetry = op.hermiticity_asymmetry();
    if asymmetry > tol.hermiticity {
        return Err(Error::NotHermitian { asymmetry, tolerance: tol.hermiticity });
    }
    let (eigenvalues, basis) = if op.is_real() {
        let n = op.dim();
        let mut re = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                re[(i, j)] = 0.5 * (op.m[(i, j)].re + op.m[(j, i)].re);
            }
        }
        let (vals, vecs) = eig_real_symmetric(&re);
        (vals, vecs.map(|x| C64::new(x, 0.0)))
    } else {
        let h = (&op.m + op.m.adjoint()).map(|z| z * 0.5);
        eig_hermitian_matrix(&h)
    };
    Ok(Spectrum::from_parts(eigenvalues, basis))
}

/// Relative residual above which a QR eigendecomposition is rejected and
/// recomputed by Jacobi rotations. Healthy factorizations sit near
/// `n * machine-epsilon`, so this leaves ample headroom while still catching
/// the occasional badly resolved near-degenerate cluster.
const EIG_RESIDUAL_GATE: f64 = 1e-14;

/// Max-entry residual of `m * vecs - vecs * diag(vals)`.
fn eig_residual_real(m: &DMatrix<f64>, vals: &[f64], vecs: &DMatrix<f64>) -> f64 {
    let mut r = m * vecs;
    for (j, &val) in vals.iter().enumerate() {
        let mut col = r.column_mut(j);
        col.axpy(-val, &vecs.column(j), 1.0);
    }
    r.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// Max-entry residual of `h * vecs - vecs * diag(vals)`.
fn eig_residual_complex(h: &DMatrix<C64>, vals: &[f64], vecs: &DMatrix<C64>) -> f64 {
    let mut r = h * vecs;
    for (j, &val) in vals.iter().enumerate() {
        let mut col = r.column_mut(j);
        col.axpy(C64::new(-val, 0.0), &vecs.column(j), C64::new(1.0, 0.0));
    }
    r.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Raw real-symmetric solve: ascending eigenvalues, sign-fixed eigenvectors.
///
/// This is the hot path for sweeps over real models; it skips operator
/// validation, so callers must hand it a symmetric matrix. The solve is
/// verified by its reconstruction residual; a factorization the solver
/// resolved poorly is recomputed with exactly unitary Jacobi rotations.
pub(crate) fn eig_real_symmetric(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let scale = m.iter().fold(1.0f64, |acc, &x| acc.max(x.abs()));
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    if let Ok(eig) = fm.self_adjoint_eigen(faer::Side::Lower) {
        let (u, s) = (eig.U(), eig.S());
        // faer returns the eigenvalues already nondecreasing.
        let vals: Vec<f64> = (0..n).map(|i| s[i]).collect();
        let mut vecs = DMatrix::<f64>::from_fn(n, n, |i, j| u[(i, j)]);
        for j in 0..n {
            let mut col = vecs.column_mut(j);
            // Sign convention: largest-magnitude component positive.
            let mut best = 0usize;
            let mut best_mag = -1.0f64;
            for (i, &x) in col.iter().enumerate() {
                let mag = x.abs();
                if mag > best_mag {
                    best_mag = mag;
                    best = i;
                }
            }
            if col[best] < 0.0 {
                col.neg_mut();
            }
        }
        if eig_residual_real(m, &vals, &vecs) <= EIG_RESIDUAL_GATE * scale * n as f64 {
            return (vals, vecs);
        }
    }
    let (jvals, jvecs) = jacobi_hermitian(&m.map(|x| C64::new(x, 0.0)));
    // A real symmetric input keeps the Jacobi basis exactly real (every
    // rotation phase is +-1), so dropping the imaginary part is lossless.
    (jvals, jvecs.map(|z| z.re))
}

/// Raw Hermitian solve on a complex matrix: ascending, phase-fixed.
///
/// Residual-gated like [`eig_real_symmetric`]: a poorly resolved
/// factorization is recomputed with Jacobi rotations.
fn eig_hermitian_matrix(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    let scale = h.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let fh = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| h[(i, j)]);
    if let Ok(eig) = fh.self_adjoint_eigen(faer::Side::Lower) {
        let (u, s) = (eig.U(), eig.S());
        let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
        let mut vecs = DMatrix::<C64>::from_fn(n, n, |i, j| u[(i, j)]);
        for j in 0..n {
            let mut col = vecs.column(j).into_owned();
            fix_phase(&mut col);
            vecs.set_column(j, &col);
        }
        if eig_residual_complex(h, &vals, &vecs) <= EIG_RESIDUAL_GATE * scale * n as f64 {
            return (vals, vecs);
        }
    }
    jacobi_hermitian(h)
}

/// Cyclic complex Jacobi eigendecomposition: ascending, phase-fixed.
///
/// Slower than the QR-based [`eig_hermitian_matrix`], but every update is an
/// exactly unitary plane rotation, so eigenvector residuals stay at machine
/// level even when the whole spectrum is packed into a band far narrower
/// than the norm. That is exactly the shape of the cosine part of a
/// short-step unitary, where the QR solver has been observed to hand back
/// vectors with 1e-5 residuals — fatal for a logarithm that reconstructs
/// the generator from its eigenbasis.
fn jacobi_hermitian(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let mag = beta.norm();
                if mag <= 1e-18 * scale {
                    continue;
                }
                // Diagonalize the 2x2 block [[app, beta], [conj(beta), aqq]]:
                // factor the phase of beta into the p column, then rotate the
                // real remainder by the smaller Jacobi angle (|angle| <= pi/4,
                // which is what guarantees cyclic convergence).
                let phase = beta / C64::new(mag, 0.0);
                let tau = (a[(p, p)].re - a[(q, q)].re) / (2.0 * mag);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let upp = phase * c;
                let upq = -phase * s;
                let uqp = C64::new(s, 0.0);
                let uqq = C64::new(c, 0.0);
                // A <- U^dag A U and V <- V U; U touches only columns p, q.
                for i in 0..n {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = aip * upp + aiq * uqp;
                    a[(i, q)] = aip * upq + aiq * uqq;
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = vip * upp + viq * uqp;
                    v[(i, q)] = vip * upq + viq * uqq;
                }
                for j in 0..n {
                    let (apj, aqj) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = upp.conj() * apj + uqp.conj() * aqj;
                    a[(q, j)] = upq.conj() * apj + uqq.conj() * aqj;
                }
                // The rotation zeroes this entry exactly; pin the block so
                // round-off cannot accumulate across sweeps.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        diag[x].partial_cmp(&diag[y]).expect("finite eigenvalues").then(x.cmp(&y))
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(diag[src]);
        let mut col = v.column(src).into_owned();
        fix_phase(&mut col);
        vecs.set_column(dst, &col);
    }
    (vals, vecs)
}

/// Rephase a column so its largest-magnitude component is real positive.
fn fix_phase(col: &mut DVector<C64>) {
    let mut best = 0usize;
    let mut best_mag = -1.0f64;
    for (i, z) in col.iter().enumerate() {
        let mag = z.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    let pivot = col[best];
    let mag = pivot.norm();
    if mag > 0.0 {
        let factor = pivot.conj() / C64::new(mag, 0.0);
        for z in col.iter_mut() {
            *z *= factor;
        }
    }
}

// ---------------------------------------------------------------------------
// Exponential and logarithm
// ---------------------------------------------------------------------------

/// The unitary `exp(-i h t)` of a Hermitian generator.
pub fn evolve_unitary(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    if !t.is_finite() {
        return Err(Error::NonFinite { context: "evolution time" });
    }
    Ok(hermitian_eig(h)?.evolve(t))
}

/// Principal-branch effective generator `i ln(u) / dt` of a unitary.
pub fn unitary_log(u: &DenseOperator, dt: f64) -> Result<DenseOperator> {
    unitary_log_with(u, dt, &Tolerances::default())
}

/// As [`unitary_log`], with explicit tolerances.
///
/// The unitary is normal, so its real and imaginary Hermitian parts
/// `C = (U + U^dag)/2` and `D = (U - U^dag)/(2i)` commute and share an
/// eigenbasis. We diagonalize `C`, refine each eigenvalue cluster (width
/// `tol.cluster`) in the projected `D`, and read each eigenphase off as
/// `atan2(d, c)`, confined to `(-pi, pi]`. A phase within `tol.branch_guard`
/// of the cut is refused: on the cut the principal logarithm is ambiguous
/// and no downstream quantity would be trustworthy. Before returning, the
/// result is re-exponentiated and checked against the input to within
/// `tol.log_residual`, so a silently unresolved eigenbasis cannot escape.
pub fn unitary_log_with(u: &DenseOperator, dt: f64, tol: &Tolerances) -> Result<DenseOperator> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::BadTimeStep { dt });
    }
    let residual = u.unitarity_residual();
    if residual > tol.unitarity {
        return Err(Error::NotUnitary { residual, tolerance: tol.unitarity });
    }
    let n = u.dim();
    let c = (&u.m + u.m.adjoint()).map(|z| z * 0.5);
    let d = (&u.m - u.m.adjoint()).map(|z| z * C64::new(0.0, -0.5));

    // Jacobi, not the QR solver: a short step packs the whole cosine
    // spectrum within (dt |H|)^2/2 of 1, and only Jacobi keeps eigenvector
    // residuals at machine level there.
    let (c_vals, mut basis) = jacobi_hermitian(&c);

    // Refine degenerate-cosine clusters against the sine part, which is the
    // only way to tell e^{+i phi} from e^{-i phi}.
    let mut d_vals = vec![0.0f64; n];
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && c_vals[end] - c_vals[end - 1] <= tol.cluster {
            end += 1;
        }
        let k = end - start;
        if k == 1 {
            let v = basis.column(start);
            let dv = &d * &v.into_owned();
            d_vals[start] = basis.column(start).dotc(&dv).re;
        } else {
            let vc = basis.columns(start, k).into_owned();
            let sub = vc.adjoint() * &d * &vc;
            let sub = (&sub + sub.adjoint()).map(|z| z * 0.5);
            let (sub_vals, sub_vecs) = jacobi_hermitian(&sub);
            let refined = &vc * &sub_vecs;
            for (offset, val) in sub_vals.iter().enumerate() {
                d_vals[start + offset] = *val;
                let mut col = refined.column(offset).into_owned();
                fix_phase(&mut col);
                basis.set_column(start + offset, &col);
            }
        }
        start = end;
    }

    // Eigenphases and branch guard.
    let mut energies = Vec::with_capacity(n);
    for j in 0..n {
        // Rayleigh quotient against C keeps the (cos, sin) pairing exact even
        // after cluster refinement has mixed the columns.
        let v = basis.column(j).into_owned();
        let cj = (basis.column(j).dotc(&(&c * &v))).re;
        let mut phase = d_vals[j].atan2(cj);
        if phase <= -std::f64::consts::PI {
            phase = std::f64::consts::PI;
        }
        if std::f64::consts::PI - phase.abs() < tol.branch_guard {
            return Err(Error::BranchAmbiguity { phase, guard: tol.branch_guard });
        }
        energies.push(-phase / dt);
    }

    // Re-exponentiate in the same basis and verify against the input: any
    // unresolved eigenvector (the one failure mode left) shows up here.
    let mut w = basis.clone();
    for (j, &e) in energies.iter().enumerate() {
        let factor = C64::new(0.0, -e * dt).exp();
        for i in 0..n {
            w[(i, j)] *= factor;
        }
    }
    let rebuilt = &w * basis.adjoint();
    let residual = (&rebuilt - &u.m).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if residual > tol.log_residual {
        return Err(Error::LogDefect { residual, tolerance: tol.log_residual });
    }

    // Assemble V diag(E) V^dag and clean up round-off asymmetry.
    let mut w = basis.clone();
    for (j, &e) in energies.iter().enumerate() {
        for i in 0..n {
            w[(i, j)] *= C64::new(e, 0.0);
        }
    }
    let h = &w * basis.adjoint();
    let h = (&h + h.adjoint()).map(|z| z * 0.5);
    Ok(DenseOperator::from_matrix(h))
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Spectral norm (largest singular value) via the Gram matrix.
pub fn operator_norm(a: &DenseOperator) -> Result<f64> {
    let g = a.m.adjoint() * &a.m;
    let g = (&g + g.adjoint()).map(|z| z * 0.5);
    let (vals, _) = eig_hermitian_matrix(&g);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    let norm = top.sqrt();
    if !norm.is_finite() {
        return Err(Error::NonFinite { context: "operator norm" });
    }
    Ok(norm)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
