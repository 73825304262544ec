//! Quantum channels in Kraus form.
//!
//! `Φ(X) = Σ v_i* X v_i` is the unit-preserving (Heisenberg) map and
//! `Φ*(ρ) = Σ v_i ρ v_i*` its trace-preserving dual.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, identity, ComplexMatrix, ComplexVector};

/// Default tolerance on `‖Σ v_i* v_i − Id‖_F`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `‖Σ v_i* v_i − Id‖_F`
    pub deviation: f64,
    pub ok: bool,
}

impl KrausChannel {
    /// Builds a channel, checking shapes and Kraus normalization.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let report = ch.validate();
        if !report.ok {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators not normalized: ‖Σ v*v − Id‖ = {:e}",
                report.deviation
            )));
        }
        Ok(ch)
    }

    /// Builds a channel checking shapes only; use [`KrausChannel::validate`]
    /// to inspect normalization.
    pub fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidChannel("zero dimension".into()));
        }
        for v in &kraus {
            if v.nrows() != dim || v.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.nrows().max(v.ncols()) });
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidChannel("non-finite Kraus entry".into()));
            }
        }
        Ok(Self { dim, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of Kraus operators `k`.
    pub fn rank(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn validate(&self) -> ValidationReport {
        let sum = self.kraus.iter().fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, v| acc + v.adjoint() * v);
        let deviation = (sum - identity(self.dim)).norm();
        ValidationReport { deviation, ok: deviation <= NORMALIZATION_TOL }
    }

    fn check_square(&self, x: &ComplexMatrix) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.nrows().max(x.ncols()) });
        }
        Ok(())
    }

    /// `Φ(X) = Σ v_i* X v_i`
    pub fn apply_heisenberg(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_square(x)?;
        Ok(self.heisenberg_unchecked(x))
    }

    pub(crate) fn heisenberg_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.kraus.iter().fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, v| acc + v.adjoint() * x * v)
    }

    /// `Φ*(ρ) = Σ v_i ρ v_i*`
    pub fn apply_schrodinger(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_square(rho)?;
        Ok(self.schrodinger_unchecked(rho))
    }

    pub(crate) fn schrodinger_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus.iter().fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, v| acc + v * rho * v.adjoint())
    }

    /// `Φ*(|x><x|)` for a unit vector `x`, without forming the projector.
    pub fn pushforward_density(&self, x: &ComplexVector) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for v in &self.kraus {
            let y = v * x;
            out += &y * y.adjoint();
        }
        out
    }

    /// Matrix of `Φ*` on row-major vectorized matrices: `Σ v_i ⊗ conj(v_i)`.
    pub fn superoperator_matrix(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        self.kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, v| acc + v.kronecker(&v.map(|z| z.conj())))
    }

    /// Matrix of `Φ` on row-major vectorized matrices: `Σ v_i* ⊗ v_iᵀ`.
    pub fn heisenberg_superoperator_matrix(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        self.kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, v| acc + v.adjoint().kronecker(&v.transpose()))
    }

    /// The Kraus family `w_j = Σ_l u_jl v_l` for a `k × k` matrix `u`.
    pub fn rotate_kraus(&self, u: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
        let k = self.rank();
        if u.nrows() != k || u.ncols() != k {
            return Err(Error::DimensionMismatch { expected: k, got: u.nrows() });
        }
        Ok((0..k).map(|j| self.combine_row(u, j)).collect())
    }

    /// `v_j(u) = Σ_l u_jl v_l`
    pub(crate) fn combine_row(&self, u: &ComplexMatrix, j: usize) -> ComplexMatrix {
        let mut w = ComplexMatrix::zeros(self.dim, self.dim);
        for (l, v) in self.kraus.iter().enumerate() {
            let coeff = u[(j, l)];
            if coeff != linalg::ZERO {
                w += v * coeff;
            }
        }
        w
    }

    /// The same channel written with the reshuffled Kraus family `Σ_l u_jl v_l`.
    pub fn reshuffled(&self, u: &ComplexMatrix) -> Result<Self> {
        let defect = linalg::unitarity_defect(u);
        if defect > 1e-10 {
            return Err(Error::NotUnitary { deviation: defect });
        }
        Ok(Self { dim: self.dim, kraus: self.rotate_kraus(u)? })
    }
}

/// Perron eigenpair `(r, C)` of the completely positive map
/// `X ↦ Σ w_i* X w_i` for an irreducible family, with `C > 0`, `tr C = 1`.
///
/// Power iteration on `Id + T`, which shares the Perron vector of `T` and is
/// aperiodic whenever `T` is irreducible.
pub fn heisenberg_perron(kraus: &[ComplexMatrix]) -> Result<(f64, ComplexMatrix)> {
    let ch = KrausChannel::from_kraus_unchecked(kraus.to_vec())?;
    let d = ch.dim();
    let mut x = identity(d).unscale(d as f64);
    for _ in 0..200_000 {
        let tx = ch.heisenberg_unchecked(&x);
        let mut next = &x + &tx;
        let tr = linalg::trace(&next).re;
        next.unscale_mut(tr);
        let delta = (&next - &x).norm();
        x = linalg::hermitian_part(&next);
        if delta < 1e-15 {
            break;
        }
    }
    let r = linalg::trace(&ch.heisenberg_unchecked(&x)).re / linalg::trace(&x).re;
    let residual = (ch.heisenberg_unchecked(&x) - x.scale(r)).norm();
    if residual > 1e-9 || linalg::min_eigenvalue(&x) <= 0.0 {
        return Err(Error::NotIrreducible);
    }
    Ok((r, x))
}

/// Turns an irreducible family `w_i` into Kraus operators of a channel by the
/// similarity `v_i = r^{-1/2} C^{1/2} w_i C^{-1/2}`, `(r, C)` the Perron pair
/// of `X ↦ Σ w_i* X w_i`.
pub fn normalize_by_similarity(w: &[ComplexMatrix]) -> Result<KrausChannel> {
    let (r, cm) = heisenberg_perron(w)?;
    let half = linalg::psd_power(&cm, 0.5);
    let inv_half = linalg::psd_power(&cm, -0.5);
    let s = 1.0 / r.sqrt();
    KrausChannel::new(w.iter().map(|wi| (&half * wi * &inv_half).scale(s)).collect())
}

/// Named channels used throughout the examples and tests.
pub mod catalog {
    use super::*;

    fn ket(d: usize, entries: &[f64]) -> ComplexVector {
        assert_eq!(entries.len(), d);
        ComplexVector::from_iterator(d, entries.iter().map(|&x| c(x, 0.0)))
    }

    /// Single unitary Kraus operator.
    pub fn unitary(u: ComplexMatrix) -> Result<KrausChannel> {
        KrausChannel::new(vec![u])
    }

    /// `Φ(X) = (1 − p) X + p tr(X) Id / d`, Kraus family `√(1−p) Id`,
    /// `√(p/d) |i><j|`.
    pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("depolarizing parameter {p} outside [0,1]")));
        }
        let mut kraus = Vec::with_capacity(d * d + 1);
        if p < 1.0 {
            kraus.push(identity(d).scale((1.0 - p).sqrt()));
        }
        let s = (p / d as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, j)] = c(s, 0.0);
                kraus.push(e);
            }
        }
        KrausChannel::new(kraus)
    }

    fn projection_kraus(rho: &ComplexMatrix, weight: f64) -> Result<Vec<ComplexMatrix>> {
        let d = rho.nrows();
        let (vals, vecs) = linalg::hermitian_eigen(rho);
        let mut kraus = Vec::new();
        for (i, &l) in vals.iter().enumerate() {
            if l < -1e-12 {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {l:e}")));
            }
            if l <= 1e-15 {
                continue;
            }
            let f = vecs.column(i).into_owned();
            for j in 0..d {
                let e = linalg::basis_vector(d, j);
                kraus.push(linalg::ket_bra(&f, &e).scale((weight * l).sqrt()));
            }
        }
        Ok(kraus)
    }

    /// `Φ(X) = Id tr(ρ₀ X)`, i.e. `Φ*(ϱ) = ρ₀ tr ϱ`.
    pub fn projection(rho0: &ComplexMatrix) -> Result<KrausChannel> {
        KrausChannel::new(projection_kraus(rho0, 1.0)?)
    }

    /// `Φ(X) = (1 − p) X + p Id tr(ρ₀ X)`.
    pub fn perturbed_depolarizing(p: f64, rho0: &ComplexMatrix) -> Result<KrausChannel> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("mixing parameter {p} outside [0,1]")));
        }
        let d = rho0.nrows();
        let mut kraus = vec![identity(d).scale((1.0 - p).sqrt())];
        kraus.extend(projection_kraus(rho0, p)?);
        KrausChannel::new(kraus)
    }

    /// `v1 = |e2><e1|`, `v2 = |e+><e2|` on `C²`: primitive, yet the trajectory
    /// under a partly-Dirac randomization charges the two atoms `ê2`, `ê+`.
    pub fn two_atom_counterexample() -> KrausChannel {
        let e1 = ket(2, &[1.0, 0.0]);
        let e2 = ket(2, &[0.0, 1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ep = ket(2, &[h, h]);
        KrausChannel::new(vec![linalg::ket_bra(&e2, &e1), linalg::ket_bra(&ep, &e2)]).expect("normalized")
    }

    /// `v1 = |e2><e1|`, `v2 = |e1><e2|`: irreducible with period 2.
    pub fn swap() -> KrausChannel {
        let e1 = ket(2, &[1.0, 0.0]);
        let e2 = ket(2, &[0.0, 1.0]);
        KrausChannel::new(vec![linalg::ket_bra(&e2, &e1), linalg::ket_bra(&e1, &e2)]).expect("normalized")
    }

    /// Integer form of the first three-dimensional example (prefactor √2/2
    /// dropped).
    pub fn example_one_integer() -> [[i64; 9]; 2] {
        [[0, 1, 0, 1, 0, 1, 0, 0, 0], [0, 0, 0, 0, -1, 0, 1, 0, -1]]
    }

    /// Generators `w1`, `w2` of the second three-dimensional example (before
    /// the similarity that makes them Kraus operators).
    pub fn example_two_integer() -> [[i64; 9]; 2] {
        [[1, 1, 0, -1, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 1, 1, 0, 0]]
    }

    fn int_matrix(m: &[i64; 9], scale: f64) -> ComplexMatrix {
        ComplexMatrix::from_row_iterator(3, 3, m.iter().map(|&x| c(x as f64 * scale, 0.0)))
    }

    /// First three-dimensional example: `v_i = (√2/2) · example_one_integer()`.
    pub fn example_one() -> KrausChannel {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let [a, b] = example_one_integer();
        KrausChannel::new(vec![int_matrix(&a, s), int_matrix(&b, s)]).expect("normalized")
    }

    pub fn example_two_generators() -> Vec<ComplexMatrix> {
        let [a, b] = example_two_integer();
        vec![int_matrix(&a, 1.0), int_matrix(&b, 1.0)]
    }

    /// Second three-dimensional example, normalized through the Perron
    /// similarity of its generators.
    pub fn example_two() -> KrausChannel {
        normalize_by_similarity(&example_two_generators()).expect("generators are irreducible")
    }

    /// Channel with a Haar-random Stinespring isometry `C^d → C^d ⊗ C^k`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> KrausChannel {
        let u = crate::trajectory::sample_haar_unitary(d * k, rng);
        let kraus = (0..k).map(|i| ComplexMatrix::from_fn(d, d, |a, b| u[(i * d + a, b)])).collect();
        KrausChannel::new(kraus).expect("isometry blocks are normalized")
    }

    /// `diag(a, 1−a)` and friends.
    pub fn diagonal_density(diag: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0))))
    }
}
