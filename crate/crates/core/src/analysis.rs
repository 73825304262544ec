//! Ergodicity classification of a channel.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    self, basis_vector, eigenvalues, gaussian_vector, hermitian_eigen, identity, least_singular_vector, null_space,
    projector, unitarity_defect, unvectorize, vectorize, ComplexMatrix, ComplexVector, SpanBasis, C64,
};
use crate::randomization::RandomizationSpec;
use crate::rng::{seeded, stream};
use crate::state::{canonicalize, ProjectiveState};

pub const ALGEBRA_RANK_TOL: f64 = 1e-9;
pub const PERIPHERAL_CUTOFF: f64 = 1e-7;
pub const PERIOD_CHECK_TOL: f64 = 1e-7;
pub const RESOLUTION_TOL: f64 = 1e-8;
pub const COVARIANCE_TOL: f64 = 1e-9;
pub const POSITIVITY_RESTARTS: usize = 200;
pub const COUNTEREXAMPLE_BOUND: f64 = 1e-9;
pub const IMPROVING_BOUND: f64 = 1e-6;
/// `λ_min` above which `Φⁿ(|x><x|)` counts as positive definite.
pub const DEFINITENESS_TOL: f64 = 1e-12;
const CROSS_CHECK_RANDOM_STATES: usize = 50;
/// Seed of the internal randomized searches (witnesses, cross-checks), which
/// are reproducible and not user-facing.
const INTERNAL_SEED: u64 = 0x5eed;

/// Orthonormal basis (as `d × d` matrices) of the unital algebra generated
/// by `gens`: words are grown by right multiplication until the span stops
/// growing.
pub fn algebra_basis(gens: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let d = gens.first().ok_or(Error::Empty("generator list"))?.nrows();
    if let Some(g) = gens.iter().find(|g| g.nrows() != d || g.ncols() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: g.nrows().max(g.ncols()) });
    }
    let mut span = SpanBasis::new(d * d, ALGEBRA_RANK_TOL);
    span.insert(&vectorize(&identity(d)));
    let mut frontier = vec![identity(d).unscale((d as f64).sqrt())];
    while let Some(x) = frontier.pop() {
        for g in gens {
            if span.insert(&vectorize(&(&x * g))) {
                frontier.push(unvectorize(span.vectors().last().expect("just inserted"), d));
            }
        }
        if span.is_full() {
            break;
        }
    }
    Ok(span.vectors().iter().map(|v| unvectorize(v, d)).collect())
}

/// Dimension of the unital algebra generated by the Kraus operators.
pub fn generated_algebra_dim(ch: &KrausChannel) -> usize {
    algebra_basis(ch.kraus()).expect("channel has operators").len()
}

/// `span{x, g x, g g' x, …}`.
fn orbit_span(gens: &[ComplexMatrix], x: &ComplexVector) -> SpanBasis {
    let mut span = SpanBasis::new(x.len(), ALGEBRA_RANK_TOL);
    span.insert(x);
    let mut frontier = span.vectors().to_vec();
    while let Some(y) = frontier.pop() {
        for g in gens {
            if span.insert(&(g * &y)) {
                frontier.push(span.vectors().last().expect("just inserted").clone());
            }
        }
        if span.is_full() {
            break;
        }
    }
    span
}

fn orthogonal_complement(basis: &[ComplexVector], d: usize) -> Vec<ComplexVector> {
    let mut rows = ComplexMatrix::zeros(basis.len(), d);
    for (i, b) in basis.iter().enumerate() {
        rows.set_row(i, &b.adjoint());
    }
    null_space(&rows, 1e-10)
}

/// Largest `‖(Id − P) g P‖` over the generators.
fn invariance_defect(gens: &[ComplexMatrix], basis: &[ComplexVector]) -> f64 {
    let d = gens[0].nrows();
    let mut p = ComplexMatrix::zeros(d, d);
    for b in basis {
        p += projector(b);
    }
    let q = identity(d) - &p;
    gens.iter().map(|g| (&q * g * &p).norm() / g.norm().max(1.0)).fold(0.0, f64::max)
}

/// Eigenvectors of a random element of the algebra, each closed under the
/// generators; tries the adjoint family too (its invariant subspaces are the
/// orthogonal complements of ours).
fn find_invariant_subspace(gens: &[ComplexMatrix], algebra: &[ComplexMatrix]) -> Option<Vec<ComplexVector>> {
    let d = gens[0].nrows();
    let adjoints: Vec<ComplexMatrix> = gens.iter().map(|g| g.adjoint()).collect();
    let mut rng = seeded(INTERNAL_SEED);
    for _ in 0..4 {
        let coeffs = gaussian_vector(&mut rng, algebra.len());
        let a = algebra.iter().zip(coeffs.iter()).fold(ComplexMatrix::zeros(d, d), |acc, (b, &z)| acc + b * z);
        for adjoint in [false, true] {
            let (family, elem) = if adjoint { (&adjoints, a.adjoint()) } else { (&gens.to_vec(), a.clone()) };
            for lambda in eigenvalues(&elem) {
                let shifted = &elem - identity(d) * lambda;
                let mut candidates = null_space(&shifted, 1e-7);
                if candidates.is_empty() {
                    candidates.push(least_singular_vector(&shifted).1);
                }
                for x in candidates {
                    let orbit = orbit_span(family, &x);
                    if orbit.is_full() {
                        continue;
                    }
                    let basis =
                        if adjoint { orthogonal_complement(orbit.vectors(), d) } else { orbit.vectors().to_vec() };
                    if !basis.is_empty() && basis.len() < d && invariance_defect(gens, &basis) < 1e-8 {
                        return Some(basis);
                    }
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibilityReport {
    pub irreducible: bool,
    pub algebra_dim: usize,
    /// Orthonormal basis of a proper invariant subspace, when one was found.
    pub witness: Option<Vec<ComplexVector>>,
}

pub fn is_irreducible(ch: &KrausChannel) -> IrreducibilityReport {
    let d = ch.dim();
    let algebra = algebra_basis(ch.kraus()).expect("channel has operators");
    let irreducible = algebra.len() == d * d;
    let witness = if irreducible { None } else { find_invariant_subspace(ch.kraus(), &algebra) };
    IrreducibilityReport { irreducible, algebra_dim: algebra.len(), witness }
}

/// Cyclic resolution of the identity `Φ(P_i) = P_{i−1 mod m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeripheralDecomposition {
    pub projections: Vec<ComplexMatrix>,
    pub dims: Vec<usize>,
}

/// Number of eigenvalues of the transfer matrix on the unit circle.
pub fn peripheral_count(ch: &KrausChannel) -> usize {
    eigenvalues(&ch.superoperator_matrix()).iter().filter(|z| z.norm() >= 1.0 - PERIPHERAL_CUTOFF).count()
}

/// Period `m` and the cyclic projections of an irreducible channel.
///
/// The eigenvector of `Φ` for `ω = e^{2πi/m}` is a multiple of the unitary
/// `Σ_j ω^j P_j`, whose spectral projections are the `P_j`.
pub fn period_and_decomposition(ch: &KrausChannel) -> Result<(usize, PeripheralDecomposition)> {
    let d = ch.dim();
    if generated_algebra_dim(ch) != d * d {
        return Err(Error::NotIrreducible);
    }
    let m = peripheral_count(ch);
    if m <= 1 {
        return Ok((1, PeripheralDecomposition { projections: vec![identity(d)], dims: vec![d] }));
    }
    let omega = C64::from_polar(1.0, std::f64::consts::TAU / m as f64);
    let shifted = ch.heisenberg_superoperator_matrix() - identity(d * d) * omega;
    let (sigma, v) = least_singular_vector(&shifted);
    if sigma > 1e-6 {
        return Err(Error::NoConvergence { residual: sigma, iters: 0 });
    }
    let x = unvectorize(&v, d);
    let scale = (linalg::trace(&(x.adjoint() * &x)).re / d as f64).sqrt();
    let u = x.unscale(scale);
    let defect = unitarity_defect(&u);
    if defect > 1e-6 {
        return Err(Error::NotUnitary { deviation: defect });
    }
    let mu0 = eigenvalues(&u)[0];
    let mut projections = Vec::with_capacity(m);
    for j in 0..m {
        let mu = mu0 * omega.powu(j as u32);
        let w = u.scale(1.0).map(|z| z * mu.conj());
        let mut acc = identity(d);
        let mut power = identity(d);
        for _ in 1..m {
            power = &power * &w;
            acc += &power;
        }
        projections.push(linalg::hermitian_part(&acc.unscale(m as f64)));
    }
    let sum = projections.iter().fold(ComplexMatrix::zeros(d, d), |a, p| a + p);
    let resolution = (sum - identity(d)).norm();
    if resolution > RESOLUTION_TOL {
        return Err(Error::NoConvergence { residual: resolution, iters: 0 });
    }
    for j in 0..m {
        let image = ch.apply_heisenberg(&projections[j])?;
        let dev = (image - &projections[(j + m - 1) % m]).norm();
        if dev > PERIOD_CHECK_TOL {
            return Err(Error::NoConvergence { residual: dev, iters: 0 });
        }
    }
    let dims = projections.iter().map(|p| linalg::trace(p).re.round() as usize).collect();
    Ok((m, PeripheralDecomposition { projections, dims }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitivityReport {
    pub primitive: bool,
    pub irreducible: bool,
    pub period: Option<usize>,
    /// Power `n` used for the positivity cross-check.
    pub cross_check_power: usize,
    /// Smallest `λ_min(Φⁿ(|x><x|))` over the tested states.
    pub cross_check_min_eigenvalue: f64,
    /// Whether the cross-check verdict matches `primitive`.
    pub cross_check_agrees: bool,
}

/// Primitive means irreducible with period 1; cross-checked by testing that
/// `Φⁿ(|x><x|) > 0` at `n = 2d²` for basis vectors and random states.
pub fn is_primitive(ch: &KrausChannel) -> PrimitivityReport {
    let d = ch.dim();
    let irreducible = generated_algebra_dim(ch) == d * d;
    let period = if irreducible { period_and_decomposition(ch).ok().map(|(m, _)| m) } else { None };
    let primitive = irreducible && period == Some(1);
    let n = 2 * d * d;
    let mut rng = seeded(INTERNAL_SEED);
    let mut states: Vec<ComplexVector> = (0..d).map(|i| basis_vector(d, i)).collect();
    states.extend((0..CROSS_CHECK_RANDOM_STATES).map(|_| gaussian_vector(&mut rng, d).normalize()));
    let min = states
        .iter()
        .map(|x| {
            let mut p = projector(x);
            for _ in 0..n {
                p = ch.apply_heisenberg(&p).expect("square input");
            }
            linalg::min_eigenvalue(&p)
        })
        .fold(f64::INFINITY, f64::min);
    PrimitivityReport {
        primitive,
        irreducible,
        period,
        cross_check_power: n,
        cross_check_min_eigenvalue: min,
        cross_check_agrees: (min > DEFINITENESS_TOL) == primitive,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PositivityVerdict {
    /// `min_x λ_min(Φ(|x><x|)) ≥ 1e-6` over all restarts.
    Improving {
        min_eigenvalue: f64,
    },
    /// A state with `λ_min(Φ(|x><x|)) ≤ 1e-9`.
    Counterexample {
        state: ProjectiveState,
        min_eigenvalue: f64,
    },
    Inconclusive {
        min_eigenvalue: f64,
    },
}

impl PositivityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            PositivityVerdict::Improving { .. } => "improving",
            PositivityVerdict::Counterexample { .. } => "counterexample",
            PositivityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            PositivityVerdict::Improving { min_eigenvalue }
            | PositivityVerdict::Counterexample { min_eigenvalue, .. }
            | PositivityVerdict::Inconclusive { min_eigenvalue } => *min_eigenvalue,
        }
    }
}

/// Searches for `x̂` minimizing `λ_min(Φ(|x><x|))`.
///
/// The objective is `min_{x,y} <y|Φ(|x><x|)|y> = min_{x,y} <x|Φ*(|y><y|)|x>`;
/// each restart alternates exact minimization in `y` and in `x`, which never
/// increases the value.
pub fn positivity_improving_diagnostic(ch: &KrausChannel, seed: u64) -> PositivityVerdict {
    let d = ch.dim();
    let (value, x) = (0..POSITIVITY_RESTARTS)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut x = gaussian_vector(&mut rng, d).normalize();
            let mut value = f64::INFINITY;
            for _ in 0..200 {
                let (vals, vecs) = hermitian_eigen(&ch.heisenberg_unchecked(&projector(&x)));
                let y: ComplexVector = vecs.column(0).into_owned();
                let (xvals, xvecs) = hermitian_eigen(&ch.schrodinger_unchecked(&projector(&y)));
                x = xvecs.column(0).into_owned();
                let next = xvals[0].min(vals[0]);
                let done = value - next < 1e-15;
                value = value.min(next);
                if done {
                    break;
                }
            }
            (linalg::min_eigenvalue(&ch.heisenberg_unchecked(&projector(&x))), x)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart");
    if value <= COUNTEREXAMPLE_BOUND {
        PositivityVerdict::Counterexample { state: canonicalize(&x).expect("unit vector"), min_eigenvalue: value }
    } else if value >= IMPROVING_BOUND {
        PositivityVerdict::Improving { min_eigenvalue: value }
    } else {
        PositivityVerdict::Inconclusive { min_eigenvalue: value }
    }
}

/// `Φ(U* E_ij U) = U* Φ(E_ij) U` on all matrix units.
pub fn is_covariant(ch: &KrausChannel, u: &ComplexMatrix) -> Result<bool> {
    let d = ch.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: u.nrows() });
    }
    let deviation = unitarity_defect(u);
    if deviation > 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    let ua = u.adjoint();
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = linalg::ONE;
            let lhs = ch.apply_heisenberg(&(&ua * &e * u))?;
            let rhs = &ua * ch.apply_heisenberg(&e)? * u;
            if (lhs - rhs).norm() > COVARIANCE_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PurificationVerdict {
    /// The randomization has a Haar component.
    HoldsByNonsingularity,
    /// The span of `v_w* v_w` has the dimension `Σ_i (dim E_i)²`, or `d = 2`
    /// and the span is not reduced to multiples of `Id`.
    Holds {
        span_dim: usize,
    },
    /// `d = 2` and every `v_w* v_w` is a multiple of `Id`: `Id` is a dark
    /// projector.
    Fails {
        span_dim: usize,
        dark_projector: ComplexMatrix,
    },
    Unknown {
        span_dim: usize,
    },
}

impl PurificationVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            PurificationVerdict::HoldsByNonsingularity => "holds-by-nonsingularity",
            PurificationVerdict::Holds { .. } => "holds",
            PurificationVerdict::Fails { .. } => "fails",
            PurificationVerdict::Unknown { .. } => "unknown",
        }
    }
}

/// `dim span{v_w* v_w : |w| ≤ L}` over the operators `v_j(u)` of every atom
/// `u` of the randomization.
pub fn purification_span_dim(ch: &KrausChannel, rand: &RandomizationSpec, word_length: usize) -> Result<usize> {
    rand.validate(ch.rank())?;
    let d = ch.dim();
    let mut ops = Vec::new();
    for u in rand.atoms() {
        ops.extend(ch.rotate_kraus(u)?);
    }
    let mut span = SpanBasis::new(d * d, ALGEBRA_RANK_TOL);
    span.insert(&vectorize(&identity(d)));
    let mut layer = vec![identity(d)];
    for _ in 0..word_length {
        let mut next = Vec::new();
        for x in &layer {
            for v in &ops {
                let y = v.adjoint() * x * v;
                if span.insert(&vectorize(&y)) {
                    next.push(unvectorize(span.vectors().last().expect("just inserted"), d));
                }
            }
        }
        if next.is_empty() || span.is_full() {
            break;
        }
        layer = next;
    }
    Ok(span.rank())
}

pub const fn default_word_length(d: usize) -> usize {
    2 * d * d
}

pub fn purification_check(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    word_length: usize,
) -> Result<PurificationVerdict> {
    let (_, decomposition) = period_and_decomposition(ch)?;
    rand.validate(ch.rank())?;
    if rand.is_nonsingular() {
        return Ok(PurificationVerdict::HoldsByNonsingularity);
    }
    let span_dim = purification_span_dim(ch, rand, word_length)?;
    let target: usize = decomposition.dims.iter().map(|n| n * n).sum();
    if span_dim == target {
        return Ok(PurificationVerdict::Holds { span_dim });
    }
    if ch.dim() == 2 {
        return Ok(if span_dim == 1 {
            PurificationVerdict::Fails { span_dim, dark_projector: identity(2) }
        } else {
            PurificationVerdict::Holds { span_dim }
        });
    }
    Ok(PurificationVerdict::Unknown { span_dim })
}

/// Fixed point of `Φ*`, trace-normalized.
pub fn invariant_state(ch: &KrausChannel) -> Result<DensityMatrix> {
    let d = ch.dim();
    let shifted = ch.superoperator_matrix() - identity(d * d);
    let (sigma, v) = least_singular_vector(&shifted);
    if sigma > 1e-8 {
        return Err(Error::NoConvergence { residual: sigma, iters: 0 });
    }
    let m = unvectorize(&v, d);
    let tr = linalg::trace(&m);
    DensityMatrix::new(linalg::hermitian_part(&m.map(|z| z / tr)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityReport {
    pub dim: usize,
    pub kraus_rank: usize,
    pub irreducible: bool,
    pub algebra_dim: usize,
    /// Orthonormal basis vectors of an invariant proper subspace.
    pub witness_subspace: Option<Vec<Vec<C64>>>,
    pub period: Option<usize>,
    pub peripheral_dims: Option<Vec<usize>>,
    pub primitive: bool,
    pub primitivity_cross_check: PrimitivityReport,
    pub invariant_state: Option<Vec<Vec<C64>>>,
    pub invariant_state_min_eigenvalue: Option<f64>,
}

pub fn analyze(ch: &KrausChannel) -> ErgodicityReport {
    let irr = is_irreducible(ch);
    let decomposition = if irr.irreducible { period_and_decomposition(ch).ok() } else { None };
    let prim = is_primitive(ch);
    let inv = if irr.irreducible { invariant_state(ch).ok() } else { None };
    ErgodicityReport {
        dim: ch.dim(),
        kraus_rank: ch.rank(),
        irreducible: irr.irreducible,
        algebra_dim: irr.algebra_dim,
        witness_subspace: irr.witness.map(|w| w.iter().map(|v| v.iter().copied().collect()).collect()),
        period: decomposition.as_ref().map(|(m, _)| *m),
        peripheral_dims: decomposition.map(|(_, p)| p.dims),
        primitive: prim.primitive,
        primitivity_cross_check: prim,
        invariant_state_min_eigenvalue: inv.as_ref().map(|r| linalg::min_eigenvalue(r.mat())),
        invariant_state: inv.map(|r| linalg::rows(r.mat())),
    }
}
