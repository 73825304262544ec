//! Jacobian-rank certificates of multiplicative primitivity.
//!
//! The entries of `B_p` are algebraically independent as soon as their
//! Jacobian has full rank `d²` at one point, and then `B_p` is onto `M_d`.
//! Per state, a nonzero `d × d` minor of the Jacobian of `B_p x` at one
//! point shows that `z ↦ B_p(z) x` is onto `C^d`.

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::gaussian::GaussianRational as Q;
use super::poly::Polynomial;
use super::polymatrix::{build_bp, exact_determinant, exact_rank, jacobian_at, Elimination, ExactMatrix, PolyMatrix};
use crate::error::{Error, Result};
use crate::rng::stream;

/// Bounds of the random integer evaluation points, inclusive.
pub const POINT_RANGE: (i64, i64) = (1, 10);

fn strings(v: &[Q]) -> Vec<[String; 2]> {
    v.iter().map(Q::to_strings).collect()
}

/// Uniform point of `{1, …, 10}^n`.
pub fn random_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Q> {
    (0..n).map(|_| Q::from_integer(rng.random_range(POINT_RANGE.0..=POINT_RANGE.1))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankAttempt {
    pub point: Vec<[String; 2]>,
    pub rank: usize,
    pub pivots: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullSpaceCertificate {
    pub certified: bool,
    pub p: usize,
    pub dim: usize,
    pub kraus_rank: usize,
    /// `d²`
    pub target_rank: usize,
    /// Every evaluated point in order; the last one is the witness when
    /// `certified`.
    pub attempts: Vec<RankAttempt>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateCertificate {
    pub certified: bool,
    pub p: usize,
    pub state: Vec<[String; 2]>,
    pub point: Vec<[String; 2]>,
    pub minor_start: usize,
    pub determinant: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub state: Vec<[String; 2]>,
    pub certified: bool,
    /// Points evaluated before success (or all of them).
    pub trials_used: usize,
    pub point: Option<Vec<[String; 2]>>,
    pub minor_start: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub p: usize,
    pub trials: usize,
    pub seed: u64,
    pub certified_count: usize,
    pub entries: Vec<SweepEntry>,
}

/// `B_p` of a fixed exact Kraus family, reused across points and states.
#[derive(Debug, Clone)]
pub struct Certifier {
    p: usize,
    dim: usize,
    kraus_rank: usize,
    bp: PolyMatrix,
}

/// Symbolic Jacobian of `z ↦ B_p(z) x`.
#[derive(Debug, Clone)]
pub struct StateJacobian {
    x: Vec<Q>,
    /// `derivs[i][j] = ∂(B_p x)_i / ∂z_j`
    derivs: Vec<Vec<Polynomial>>,
}

impl StateJacobian {
    pub fn evaluate(&self, point: &[Q]) -> Result<ExactMatrix> {
        let rows = self.derivs.len();
        let cols = self.derivs.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows * cols);
        for row in &self.derivs {
            for p in row {
                entries.push(p.evaluate(point)?);
            }
        }
        ExactMatrix::new(rows, cols, entries)
    }
}

/// Determinant of the `d × d` block of `j` starting at column `start`; zero
/// when the block does not fit.
fn minor_determinant(j: &ExactMatrix, start: usize) -> Result<Q> {
    let d = j.rows();
    if start + d > j.cols() {
        return Ok(Q::zero());
    }
    let mut m = ExactMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            m.set(r, c, j.get(r, start + c).clone());
        }
    }
    exact_determinant(&m)
}

impl Certifier {
    pub fn new(kraus: &[ExactMatrix], p: usize) -> Result<Self> {
        let bp = build_bp(kraus, p)?;
        Ok(Self { p, dim: bp.rows(), kraus_rank: kraus.len(), bp })
    }

    pub fn bp(&self) -> &PolyMatrix {
        &self.bp
    }

    pub fn nvars(&self) -> usize {
        self.bp.nvars()
    }

    pub fn rank_at(&self, point: &[Q]) -> Result<Elimination> {
        Ok(exact_rank(&jacobian_at(self.bp.entries(), point)?))
    }

    /// Certified iff some point gives Jacobian rank `d²`; stops at the first
    /// such point.
    pub fn full_space(&self, points: &[Vec<Q>]) -> Result<FullSpaceCertificate> {
        let target = self.dim * self.dim;
        let mut attempts = Vec::new();
        let mut certified = false;
        for pt in points {
            let e = self.rank_at(pt)?;
            certified = e.rank == target;
            attempts.push(RankAttempt { point: strings(pt), rank: e.rank, pivots: e.pivots });
            if certified {
                break;
            }
        }
        Ok(FullSpaceCertificate {
            certified,
            p: self.p,
            dim: self.dim,
            kraus_rank: self.kraus_rank,
            target_rank: target,
            attempts,
        })
    }

    pub fn state_jacobian(&self, x: &[Q]) -> Result<StateJacobian> {
        if x.iter().all(Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        let px = self.bp.mul_vector(x)?;
        let derivs = px.iter().map(|p| (0..self.nvars()).map(|j| p.derivative(j)).collect()).collect();
        Ok(StateJacobian { x: x.to_vec(), derivs })
    }

    pub fn for_state(&self, x: &[Q], point: &[Q], minor_start: usize) -> Result<StateCertificate> {
        let n = self.nvars();
        if point.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: point.len() });
        }
        if n >= self.dim && minor_start + self.dim > n {
            return Err(Error::Parse(format!("minor starting at column {minor_start} exceeds {n} variables")));
        }
        let sj = self.state_jacobian(x)?;
        let det = minor_determinant(&sj.evaluate(point)?, minor_start)?;
        Ok(StateCertificate {
            certified: !det.is_zero(),
            p: self.p,
            state: strings(x),
            point: strings(point),
            minor_start,
            determinant: det.to_strings(),
        })
    }

    /// For each state, tries `trials` random points (stream `i` of `seed` for
    /// state `i`) and every minor offset, stopping at the first nonzero minor.
    pub fn sweep(&self, states: &[Vec<Q>], trials: usize, seed: u64) -> Result<SweepReport> {
        let n = self.nvars();
        let entries = states
            .par_iter()
            .enumerate()
            .map(|(i, x)| -> Result<SweepEntry> {
                let sj = self.state_jacobian(x)?;
                let mut rng = stream(seed, i as u64);
                for t in 0..trials {
                    let pt = random_point(n, &mut rng);
                    let j = sj.evaluate(&pt)?;
                    for start in 0..=n.saturating_sub(self.dim) {
                        if !minor_determinant(&j, start)?.is_zero() {
                            return Ok(SweepEntry {
                                state: strings(&sj.x),
                                certified: true,
                                trials_used: t + 1,
                                point: Some(strings(&pt)),
                                minor_start: Some(start),
                            });
                        }
                    }
                }
                Ok(SweepEntry {
                    state: strings(&sj.x),
                    certified: false,
                    trials_used: trials,
                    point: None,
                    minor_start: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let certified_count = entries.iter().filter(|e| e.certified).count();
        Ok(SweepReport { p: self.p, trials, seed, certified_count, entries })
    }
}

pub fn certify_full_space(kraus: &[ExactMatrix], p: usize, points: &[Vec<Q>]) -> Result<FullSpaceCertificate> {
    Certifier::new(kraus, p)?.full_space(points)
}

pub fn certify_for_state(
    kraus: &[ExactMatrix],
    p: usize,
    x: &[Q],
    point: &[Q],
    minor_start: usize,
) -> Result<StateCertificate> {
    Certifier::new(kraus, p)?.for_state(x, point, minor_start)
}

pub fn sweep_states(
    kraus: &[ExactMatrix],
    p: usize,
    states: &[Vec<Q>],
    trials: usize,
    seed: u64,
) -> Result<SweepReport> {
    Certifier::new(kraus, p)?.sweep(states, trials, seed)
}

/// Random nonzero state with Gaussian-integer coordinates in `[-5, 5]`.
pub fn random_exact_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Q> {
    loop {
        let x: Vec<Q> = (0..d)
            .map(|_| Q::from_integer(rng.random_range(-5..=5)) + Q::from_integer(rng.random_range(-5..=5)) * Q::i())
            .collect();
        if x.iter().any(|z| !z.is_zero()) {
            return x;
        }
    }
}

pub mod examples {
    //! Integer forms of the two three-dimensional examples.
    use super::*;
    use crate::channel::catalog;

    /// `√2 · v_i` of the first example.
    pub fn example_one() -> Vec<ExactMatrix> {
        catalog::example_one_integer().iter().map(|m| ExactMatrix::from_integers(3, m).expect("3x3")).collect()
    }

    /// Generators `w_i` of the second example.
    pub fn example_two() -> Vec<ExactMatrix> {
        catalog::example_two_integer().iter().map(|m| ExactMatrix::from_integers(3, m).expect("3x3")).collect()
    }

    /// `(1, 2, 3, 1, 2, 3, …)` of length 16.
    pub fn example_one_point() -> Vec<Q> {
        (0..16).map(|i| Q::from_integer(i % 3 + 1)).collect()
    }
}
