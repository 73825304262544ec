use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_part, trace, ComplexMatrix};

pub const DENSITY_TOL: f64 = 1e-10;

/// Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates within `1e-10` and stores the exact Hermitian part.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if mat.nrows() == 0 || mat.nrows() != mat.ncols() {
            return Err(Error::InvalidDensity(format!("shape {}x{}", mat.nrows(), mat.ncols())));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let skew = (&mat - mat.adjoint()).norm();
        if skew > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {skew:e})")));
        }
        let h = hermitian_part(&mat);
        let tr = trace(&h).re;
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let (vals, _) = hermitian_eigen(&h);
        if vals[0] < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {:e}", vals[0])));
        }
        Ok(Self { mat: h })
    }

    /// Rescales a nonzero positive semi-definite matrix to unit trace.
    pub fn normalized(mat: ComplexMatrix) -> Result<Self> {
        let tr = trace(&mat).re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        Self::new(mat.unscale(tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { mat: ComplexMatrix::identity(d, d).unscale(d as f64) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }
}
