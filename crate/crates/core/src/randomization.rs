//! Probability laws on the probe unitary group `U(k)` that pick the Kraus
//! decomposition used at each step.

use std::borrow::Cow;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, ComplexMatrix};
use crate::trajectory::sample_haar_unitary;

const WEIGHT_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Finitely many unitaries with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMixture {
    pub weights: Vec<f64>,
    pub unitaries: Vec<ComplexMatrix>,
}

impl FiniteMixture {
    pub fn new(weights: Vec<f64>, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let m = Self { weights, unitaries };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.len() != self.unitaries.len() {
            return Err(Error::InvalidRandomization(format!(
                "{} weights for {} unitaries",
                self.weights.len(),
                self.unitaries.len()
            )));
        }
        if self.weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidRandomization("negative or non-finite weight".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidRandomization(format!("weights sum to {total}")));
        }
        for u in &self.unitaries {
            let deviation = unitarity_defect(u);
            if deviation > UNITARY_TOL {
                return Err(Error::NotUnitary { deviation });
            }
        }
        Ok(())
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &ComplexMatrix {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            acc += w;
            if r < acc {
                return u;
            }
        }
        // r landed in the rounding gap above the last cumulative weight
        let last = self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        &self.unitaries[last]
    }
}

/// The law `λ` of the probe basis.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomizationSpec {
    /// Fixed basis `u0`.
    Dirac(ComplexMatrix),
    Mixture(FiniteMixture),
    /// Haar measure on `U(k)`.
    Haar,
    /// `haar_weight · Haar + (1 − haar_weight) · atoms`.
    Convex {
        haar_weight: f64,
        atoms: FiniteMixture,
    },
}

impl RandomizationSpec {
    /// `Dirac(Id_k)`: measure the probe in the basis the Kraus operators were
    /// written in.
    pub fn identity(k: usize) -> Self {
        RandomizationSpec::Dirac(ComplexMatrix::identity(k, k))
    }

    /// Checks weights and unitarity, and that all unitaries are `k × k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let check_shape = |u: &ComplexMatrix| {
            if u.nrows() != k || u.ncols() != k {
                Err(Error::DimensionMismatch { expected: k, got: u.nrows().max(u.ncols()) })
            } else {
                Ok(())
            }
        };
        match self {
            RandomizationSpec::Dirac(u) => {
                check_shape(u)?;
                let deviation = unitarity_defect(u);
                if deviation > UNITARY_TOL {
                    return Err(Error::NotUnitary { deviation });
                }
            }
            RandomizationSpec::Mixture(m) => {
                m.check()?;
                m.unitaries.iter().try_for_each(check_shape)?;
            }
            RandomizationSpec::Haar => {}
            RandomizationSpec::Convex { haar_weight, atoms } => {
                if !(0.0..=1.0).contains(haar_weight) {
                    return Err(Error::InvalidRandomization(format!("haar_weight {haar_weight} outside [0,1]")));
                }
                atoms.check()?;
                atoms.unitaries.iter().try_for_each(check_shape)?;
            }
        }
        Ok(())
    }

    /// Weight of the Haar component; positive means the induced measure is
    /// non-singular.
    pub fn haar_weight(&self) -> f64 {
        match self {
            RandomizationSpec::Haar => 1.0,
            RandomizationSpec::Convex { haar_weight, .. } => *haar_weight,
            _ => 0.0,
        }
    }

    pub fn is_nonsingular(&self) -> bool {
        self.haar_weight() > 0.0
    }

    /// The unitaries carrying the atomic part of `λ` (with positive weight).
    pub fn atoms(&self) -> Vec<&ComplexMatrix> {
        match self {
            RandomizationSpec::Dirac(u) => vec![u],
            RandomizationSpec::Mixture(m) => positive(m),
            RandomizationSpec::Haar => Vec::new(),
            RandomizationSpec::Convex { haar_weight, atoms } => {
                if *haar_weight < 1.0 {
                    positive(atoms)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Draws `u ~ λ` on `U(k)`.
    pub fn sample<'a, R: Rng + ?Sized>(&'a self, k: usize, rng: &mut R) -> Cow<'a, ComplexMatrix> {
        match self {
            RandomizationSpec::Dirac(u) => Cow::Borrowed(u),
            RandomizationSpec::Mixture(m) => Cow::Borrowed(m.pick(rng)),
            RandomizationSpec::Haar => Cow::Owned(sample_haar_unitary(k, rng)),
            RandomizationSpec::Convex { haar_weight, atoms } => {
                let r: f64 = rng.random();
                if r < *haar_weight {
                    Cow::Owned(sample_haar_unitary(k, rng))
                } else {
                    Cow::Borrowed(atoms.pick(rng))
                }
            }
        }
    }
}

fn positive(m: &FiniteMixture) -> Vec<&ComplexMatrix> {
    m.weights.iter().zip(&m.unitaries).filter(|(w, _)| **w > 0.0).map(|(_, u)| u).collect()
}
