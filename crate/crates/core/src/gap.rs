//! GAP measures: the Gaussian with covariance `ρ`, size-biased by `‖ψ‖²` and
//! projected to rays.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, hermitian_eigen, ComplexMatrix, ComplexVector, C64};
use crate::measure::EmpiricalMeasure;
use crate::state::{canonicalize, ProjectiveState};

/// Eigenvalues below this fraction of the largest one are outside the support.
pub const RANK_TOL: f64 = 1e-12;
/// Largest admissible norm of the component of `ψ` orthogonal to `supp ρ`.
pub const SUPPORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GapSampler {
    rho: DensityMatrix,
    /// Descending; entries past `rank` are set to 0.
    values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    vectors: ComplexMatrix,
    rank: usize,
    /// One `Gamma(2, λ_i)` law per support eigenvalue.
    radii: Vec<Gamma<f64>>,
}

impl GapSampler {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        let (asc, vecs) = hermitian_eigen(rho.mat());
        let d = asc.len();
        let mut values: Vec<f64> = asc.into_iter().rev().collect();
        let mut vectors = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            vectors.set_column(i, &vecs.column(d - 1 - i));
        }
        let top = values[0];
        let rank = values.iter().take_while(|&&l| l > RANK_TOL * top).count();
        for l in values.iter_mut().skip(rank) {
            *l = 0.0;
        }
        let radii = values[..rank]
            .iter()
            .map(|&l| Gamma::new(2.0, l).map_err(|e| Error::InvalidDensity(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(Self { rho, values, vectors, rank, radii })
    }

    pub fn from_matrix(rho: ComplexMatrix) -> Result<Self> {
        Self::new(DensityMatrix::new(rho)?)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    fn eigen_coords_to_vector(&self, coords: &[C64]) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim());
        for (i, &z) in coords.iter().enumerate() {
            out.axpy(z, &self.vectors.column(i), crate::linalg::ONE);
        }
        out
    }

    /// One draw of the centred complex Gaussian with covariance `ρ`.
    pub fn sample_gaussian<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexVector {
        let coords: Vec<C64> = self.values.iter().map(|&l| complex_gaussian(rng, l)).collect();
        self.eigen_coords_to_vector(&coords)
    }

    /// One draw from `GAP_ρ`.
    ///
    /// `‖ψ‖² dG_ρ = Σ_i λ_i · (|c_i|²/λ_i) dG_ρ`: pick `i` with probability
    /// `λ_i`, then coordinate `i` has `|c_i|² ~ Gamma(2, λ_i)` with uniform
    /// phase while the others keep their Gaussian law.
    pub fn sample_gap<R: Rng + ?Sized>(&self, rng: &mut R) -> ProjectiveState {
        let r: f64 = rng.random::<f64>() * self.values[..self.rank].iter().sum::<f64>();
        let mut acc = 0.0;
        let mut pick = self.rank - 1;
        for (i, &l) in self.values[..self.rank].iter().enumerate() {
            acc += l;
            if r < acc {
                pick = i;
                break;
            }
        }
        loop {
            let mut coords: Vec<C64> = self.values.iter().map(|&l| complex_gaussian(rng, l)).collect();
            let radius = self.radii[pick].sample(rng).sqrt();
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            coords[pick] = C64::from_polar(radius, phase);
            if let Ok(s) = canonicalize(&self.eigen_coords_to_vector(&coords)) {
                return s;
            }
        }
    }

    /// `n` independent draws, equally weighted.
    pub fn sample_measure<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::uniform_weights((0..n).map(|_| self.sample_gap(rng)).collect())
    }

    /// Density of `GAP_ρ` with respect to the uniform measure on rays of
    /// `supp ρ`: `(r / det ρ₊) <ψ|ρ₊⁻¹|ψ>^(−r−1)`.
    pub fn gap_density(&self, psi: &ProjectiveState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi.dim() });
        }
        let coords = self.vectors.adjoint() * psi.rep();
        let residual = coords.iter().skip(self.rank).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if residual > SUPPORT_TOL {
            return Err(Error::OutsideSupport { residual });
        }
        let support = &self.values[..self.rank];
        let quad: f64 = coords.iter().zip(support).map(|(z, &l)| z.norm_sqr() / l).sum();
        let det: f64 = support.iter().product();
        let r = self.rank as f64;
        Ok(r / det * quad.powf(-r - 1.0))
    }
}
