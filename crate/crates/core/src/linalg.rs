//! Dense complex linear algebra shared across the crate.
//!
//! Everything is backed by `nalgebra` dynamic matrices over `Complex64`;
//! this module only adds the handful of spectral and span utilities the
//! channel and measure code needs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Real matrix (row-major slice) promoted to complex.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn basis_vector(d: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[i] = ONE;
    v
}

/// `|x><y|`
pub fn ket_bra(x: &ComplexVector, y: &ComplexVector) -> ComplexMatrix {
    x * y.adjoint()
}

pub fn projector(x: &ComplexVector) -> ComplexMatrix {
    ket_bra(x, x)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Frobenius distance of `u* u` from the identity.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Column `i` of the returned matrix is the eigenvector for `values[i]`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigen(m).0[0]
}

/// Eigenvalues of a general square complex matrix, read off the complex
/// Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Right singular vectors of `m` whose singular values are at most `tol`
/// (relative to the largest one), i.e. an orthonormal basis of the
/// numerical kernel.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> Vec<ComplexVector> {
    let n = m.ncols();
    // Pad to square so the SVD always returns a full set of right vectors.
    let rows = m.nrows().max(n);
    let mut sq = ComplexMatrix::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let scale = svd.singular_values.max().max(1.0);
    (0..n).filter(|&i| svd.singular_values[i] <= tol * scale).map(|i| v_t.row(i).adjoint()).collect()
}

/// Smallest singular value of `m` and a matching right singular vector.
pub fn least_singular_vector(m: &ComplexMatrix) -> (f64, ComplexVector) {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut sq = ComplexMatrix::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let i = svd.singular_values.argmin().0;
    (svd.singular_values[i], v_t.row(i).adjoint())
}

/// Rows of `m`, for serialization.
pub fn rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Principal square root of a positive semi-definite matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    psd_power(m, 0.5)
}

/// `m^power` for positive definite `m` (negative eigenvalues are clamped).
pub fn psd_power(m: &ComplexMatrix, power: f64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| c(l.max(0.0).powf(power), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

/// Row-major vectorization, `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_iterator(m.len(), m.transpose().iter().copied())
}

pub fn unvectorize(v: &ComplexVector, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(d, d, v.iter().copied())
}

/// Incrementally grown orthonormal basis (modified Gram-Schmidt with one
/// re-orthogonalization pass).
#[derive(Debug, Clone)]
pub struct SpanBasis {
    dim: usize,
    tol: f64,
    vectors: Vec<ComplexVector>,
}

impl SpanBasis {
    pub fn new(dim: usize, tol: f64) -> Self {
        Self { dim, tol, vectors: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() == self.dim
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    /// Adds `v` if it is independent of the current span; returns whether it
    /// was added. Independence is judged on the residual norm relative to
    /// `max(‖v‖, 1)`.
    pub fn insert(&mut self, v: &ComplexVector) -> bool {
        if self.is_full() {
            return false;
        }
        let scale = v.norm().max(1.0);
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &self.vectors {
                let proj = b.dotc(&r);
                r.axpy(-proj, b, ONE);
            }
        }
        let n = r.norm();
        if n <= self.tol * scale {
            return false;
        }
        self.vectors.push(r.unscale(n));
        true
    }

    /// Orthogonal projector onto the span, as a `dim × dim` matrix.
    pub fn projector(&self) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim, self.dim);
        for b in &self.vectors {
            p += projector(b);
        }
        p
    }
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(s * re, s * im)
}

/// Vector of i.i.d. standard complex Gaussians (`E|z|² = 1`).
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexVector {
    ComplexVector::from_iterator(d, (0..d).map(|_| complex_gaussian(rng, 1.0)))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_iterator(rows, cols, (0..rows * cols).map(|_| complex_gaussian(rng, 1.0)))
}
