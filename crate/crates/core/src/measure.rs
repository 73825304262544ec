use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{gaussian_vector, ComplexMatrix};
use crate::state::{canonicalize, fubini_distance_unchecked, ProjectiveState};

const WEIGHT_TOL: f64 = 1e-12;

/// Weighted point cloud on `P(C^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<ProjectiveState>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<ProjectiveState>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("empirical measure"));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        let d = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.dim() });
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::Parse("negative or non-finite weight".into()));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Parse(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform_weights(points: Vec<ProjectiveState>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_unnormalized(points: Vec<ProjectiveState>, weights: Vec<f64>) -> Result<Self> {
        let total = compensated_sum(&weights);
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Empty("measure with zero total weight"));
        }
        Self::new(points, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjectiveState] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn has_equal_weights(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| (x - w).abs() <= 1e-12 * w.max(1e-300) + 1e-15)
    }

    /// Image under `x̂ ↦ U · x̂`.
    pub fn pushforward(&self, u: &ComplexMatrix) -> Result<Self> {
        let points = self.points.iter().map(|p| p.apply(u)).collect::<Result<Vec<_>>>()?;
        Ok(Self { points, weights: self.weights.clone() })
    }

    /// `Σ w_i |x_i><x_i|`
    pub fn mean_density_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut rho = ComplexMatrix::zeros(d, d);
        for (p, &w) in self.points.iter().zip(&self.weights) {
            rho += p.projector().scale(w);
        }
        rho
    }

    /// Uniform random subsample of `n` points without replacement, reweighted
    /// equally. Returns a clone when `n ≥ len`. Only meaningful for equally
    /// weighted clouds.
    pub fn subsample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Self {
        if n >= self.len() {
            return self.clone();
        }
        let idx = rand::seq::index::sample(rng, self.len(), n);
        let points = idx.iter().map(|i| self.points[i].clone()).collect();
        Self { points, weights: vec![1.0 / n as f64; n] }
    }

    /// Draws `n` i.i.d. points from this measure, equally weighted.
    pub fn resample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Self {
        let mut cumulative = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        for &w in &self.weights {
            acc += w;
            cumulative.push(acc);
        }
        let points = (0..n)
            .map(|_| {
                let r: f64 = rng.random::<f64>() * acc;
                let i = cumulative.partition_point(|&c| c <= r).min(self.len() - 1);
                self.points[i].clone()
            })
            .collect();
        Self { points, weights: vec![1.0 / n as f64; n] }
    }

    /// Split into the first and second halves (equal weights in each).
    pub fn halves(&self) -> Result<(Self, Self)> {
        let n = self.len() / 2;
        if n == 0 {
            return Err(Error::Empty("cannot halve a single-point measure"));
        }
        let a = Self::uniform_weights(self.points[..n].to_vec())?;
        let b = Self::uniform_weights(self.points[n..2 * n].to_vec())?;
        Ok((a, b))
    }

    /// Total weight within distance `radius` of each center.
    pub fn atom_masses(&self, centers: &[ProjectiveState], radius: f64) -> Result<Vec<f64>> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::Parse(format!("radius must be positive, got {radius}")));
        }
        centers
            .iter()
            .map(|c| {
                if c.dim() != self.dim() {
                    return Err(Error::DimensionMismatch { expected: self.dim(), got: c.dim() });
                }
                let inside: Vec<f64> = self
                    .points
                    .iter()
                    .zip(&self.weights)
                    .filter(|(p, _)| fubini_distance_unchecked(p, c) <= radius)
                    .map(|(_, &w)| w)
                    .collect();
                Ok(compensated_sum(&inside))
            })
            .collect()
    }
}

/// Neumaier summation; plain summation of `10^5` equal weights already drifts
/// past the weight tolerance.
pub(crate) fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = s + x;
        comp += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + comp
}

/// Uniform (unitarily invariant) sample of `n` rays of `C^d`.
pub fn uniform_sample<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::Empty("sample size"));
    }
    let points = (0..n).map(|_| uniform_state(d, rng)).collect();
    EmpiricalMeasure::uniform_weights(points)
}

pub fn uniform_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProjectiveState {
    loop {
        if let Ok(s) = canonicalize(&gaussian_vector(rng, d)) {
            return s;
        }
    }
}

/// `(1/N) Σ |ψ><ψ|` of a list of states.
pub fn mean_density_matrix(samples: &[ProjectiveState]) -> Result<ComplexMatrix> {
    let first = samples.first().ok_or(Error::Empty("sample list"))?;
    let d = first.dim();
    let mut rho = ComplexMatrix::zeros(d, d);
    for s in samples {
        if s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.dim() });
        }
        rho += s.projector();
    }
    Ok(rho.unscale(samples.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn uniform_sample_mean_is_maximally_mixed() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for d in [2, 3] {
            let m = uniform_sample(d, 100_000, &mut rng).unwrap();
            let dev = (m.mean_density_matrix() - identity(d).unscale(d as f64)).norm();
            assert!(dev < 0.02, "d={d}: {dev}");
        }
    }

    #[test]
    fn one_dimensional_rays_are_all_equal() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let m = uniform_sample(1, 50, &mut rng).unwrap();
        assert!(m.points().iter().all(|p| p == &ProjectiveState::basis(1, 0)));
    }

    #[test]
    fn atom_masses_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let e2 = ProjectiveState::basis(2, 1);
        let ep = ProjectiveState::from_reals(&[1.0, 1.0]).unwrap();
        let m = uniform_sample(2, 10_000, &mut rng).unwrap();
        let masses = m.atom_masses(&[e2.clone(), ep], 1e-6).unwrap();
        assert_eq!(masses, vec![0.0, 0.0]);
        let dirac = EmpiricalMeasure::uniform_weights(vec![e2.clone(); 10]).unwrap();
        assert!((dirac.atom_masses(&[e2], 1e-6).unwrap()[0] - 1.0).abs() < 1e-12);
        assert!(dirac.atom_masses(&[], 0.0).is_err());
    }

    #[test]
    fn mean_density_of_copies() {
        let e1 = ProjectiveState::basis(2, 0);
        let rho = mean_density_matrix(&vec![e1.clone(); 7]).unwrap();
        assert!((rho - e1.projector()).norm() < 1e-15);
        assert!(mean_density_matrix(&[]).is_err());
    }

    #[test]
    fn weights_must_be_normalized() {
        let e1 = ProjectiveState::basis(2, 0);
        assert!(EmpiricalMeasure::new(vec![e1.clone()], vec![0.5]).is_err());
        assert!(EmpiricalMeasure::new(vec![], vec![]).is_err());
        assert!(EmpiricalMeasure::new(vec![e1], vec![1.0]).is_ok());
    }
}
