use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, ComplexVector, C64};

/// Coordinates whose modulus is below this fraction of the vector norm are
/// skipped when choosing the phase reference.
const PHASE_REFERENCE_TOL: f64 = 1e-12;

/// Norm below which `w x` is treated as the zero vector.
pub const KERNEL_HIT_TOL: f64 = 1e-14;

/// A ray of `C^d`, stored through its canonical representative: unit norm,
/// first non-negligible coordinate real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveState {
    rep: ComplexVector,
}

impl ProjectiveState {
    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    pub fn rep(&self) -> &ComplexVector {
        &self.rep
    }

    pub fn into_rep(self) -> ComplexVector {
        self.rep
    }

    /// Class of the `i`-th canonical basis vector.
    pub fn basis(d: usize, i: usize) -> Self {
        Self { rep: crate::linalg::basis_vector(d, i) }
    }

    pub fn from_slice(entries: &[C64]) -> Result<Self> {
        canonicalize(&ComplexVector::from_column_slice(entries))
    }

    pub fn from_reals(entries: &[f64]) -> Result<Self> {
        canonicalize(&ComplexVector::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0))))
    }

    /// Keeps `v` itself when it is already a canonical representative (unit
    /// norm within `1e-12`, reference coordinate real and positive), so that
    /// serialized states read back bit for bit; canonicalizes otherwise.
    pub fn from_representative(v: ComplexVector) -> Result<Self> {
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() <= 1e-12 {
            if let Some(idx) = v.iter().position(|z| z.norm() > PHASE_REFERENCE_TOL) {
                if v[idx].im == 0.0 && v[idx].re > 0.0 {
                    return Ok(Self { rep: v });
                }
            }
        }
        canonicalize(&v)
    }

    /// `|x><x|`
    pub fn projector(&self) -> ComplexMatrix {
        crate::linalg::projector(&self.rep)
    }

    /// The action `w · x̂`, refusing when `w x` vanishes.
    pub fn apply(&self, w: &ComplexMatrix) -> Result<Self> {
        if w.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: w.ncols(), got: self.dim() });
        }
        let image = w * &self.rep;
        let norm = image.norm();
        if norm < KERNEL_HIT_TOL {
            return Err(Error::KernelHit { norm });
        }
        canonicalize(&image)
    }

    /// `|<x, y>|²`
    pub fn overlap(&self, other: &Self) -> f64 {
        self.rep.dotc(&other.rep).norm_sqr()
    }
}

/// Canonical representative of the ray through `v`.
pub fn canonicalize(v: &ComplexVector) -> Result<ProjectiveState> {
    // Both moduli go through `sqrt(norm_sqr)` so that a vector with a single
    // nonzero coordinate maps exactly onto a basis vector.
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let idx = v.iter().position(|z| z.norm() > PHASE_REFERENCE_TOL * norm).ok_or(Error::ZeroVector)?;
    let modulus = v[idx].norm_sqr().sqrt();
    let phase = v[idx].conj() / modulus;
    let mut rep = v * (phase / norm);
    rep[idx] = c(modulus / norm, 0.0);
    Ok(ProjectiveState { rep })
}

/// `d(x̂, ŷ) = √(1 − |<x,y>|²)`, evaluated through the Lagrange identity
/// `1 − |<x,y>|² = ½ Σ_ij |x_i y_j − x_j y_i|²` so that nearby rays keep
/// full relative accuracy.
pub fn fubini_distance(a: &ProjectiveState, b: &ProjectiveState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(fubini_distance_unchecked(a, b))
}

pub(crate) fn fubini_distance_unchecked(a: &ProjectiveState, b: &ProjectiveState) -> f64 {
    let (x, y) = (&a.rep, &b.rep);
    let d = x.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            s += (x[i] * y[j] - x[j] * y[i]).norm_sqr();
        }
    }
    s.sqrt().min(1.0)
}
