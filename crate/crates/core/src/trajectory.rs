//! The randomized quantum trajectory.
//!
//! One step from `x̂` draws a probe basis `u ~ λ`, forms the rotated Kraus
//! family `v_j(u) = Σ_l u_jl v_l`, picks `J` with probability `‖v_J(u) x‖²`
//! and moves to `v_J(u) · x̂`. Summing over `j` inside the draw is exactly the
//! measure `μ = Σ_i λ_i` on `U(k)` seen by the chain, so no mass-`k` measure
//! is ever built.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, ComplexMatrix, ComplexVector, ZERO};
use crate::measure::EmpiricalMeasure;
use crate::randomization::RandomizationSpec;
use crate::rng::seeded;
use crate::state::{canonicalize, ProjectiveState, KERNEL_HIT_TOL};

pub const DEFAULT_BURN_IN: usize = 1000;
pub const DEFAULT_THINNING: usize = 1;

/// Haar-distributed `k × k` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ComplexMatrix {
    let z = gaussian_matrix(rng, k, k);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if n > 0.0 {
            let phase = rjj / n;
            for i in 0..k {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// One transition of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Probe basis drawn from `λ`.
    pub u: ComplexMatrix,
    /// Zero-based outcome index (`J − 1`).
    pub outcome: usize,
    /// `‖v_J(u) x‖²`, the probability of the outcome given `u`.
    pub weight: f64,
    pub state_after: ProjectiveState,
}

/// Outcome probabilities `‖v_j(u) x‖²` for fixed `u`, with the images `v_j(u) x`.
pub fn outcome_distribution(
    ch: &KrausChannel,
    u: &ComplexMatrix,
    x: &ProjectiveState,
) -> Result<(Vec<f64>, Vec<ComplexVector>)> {
    if x.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: x.dim() });
    }
    let k = ch.rank();
    if u.nrows() != k || u.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: u.nrows() });
    }
    let images: Vec<ComplexVector> = ch.kraus().iter().map(|v| v * x.rep()).collect();
    let mut outs = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for j in 0..k {
        let mut y = ComplexVector::zeros(ch.dim());
        for (l, img) in images.iter().enumerate() {
            let coeff = u[(j, l)];
            if coeff != ZERO {
                y.axpy(coeff, img, crate::linalg::ONE);
            }
        }
        weights.push(y.norm_squared());
        outs.push(y);
    }
    Ok((weights, outs))
}

/// Samples one step of the kernel from `x̂`.
pub fn kernel_step<R: Rng + ?Sized>(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    x: &ProjectiveState,
    rng: &mut R,
) -> Result<StepRecord> {
    let u = rand.sample(ch.rank(), rng);
    let (weights, images) = outcome_distribution(ch, &u, x)?;
    let total: f64 = weights.iter().sum();
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = weights.len() - 1;
    for (j, &w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            outcome = j;
            break;
        }
    }
    // r can only fall past the last positive weight through rounding
    if weights[outcome] == 0.0 {
        outcome = weights.iter().rposition(|&w| w > 0.0).unwrap_or(outcome);
    }
    let norm = weights[outcome].sqrt();
    if norm < KERNEL_HIT_TOL {
        return Err(Error::KernelHit { norm });
    }
    Ok(StepRecord {
        u: u.into_owned(),
        outcome,
        weight: weights[outcome],
        state_after: canonicalize(&images[outcome])?,
    })
}

/// `n` independent one-step draws from `x̂`, equally weighted: an empirical
/// version of `δ_x̂ Π`.
pub fn one_step_samples<R: Rng + ?Sized>(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    x: &ProjectiveState,
    n: usize,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    if x.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: x.dim() });
    }
    rand.validate(ch.rank())?;
    let points = (0..n).map(|_| kernel_step(ch, rand, x, rng).map(|r| r.state_after)).collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::uniform_weights(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainConfig {
    /// Number of transitions.
    pub steps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Keep the full `StepRecord` (including `u`) of each retained state.
    pub keep_records: bool,
}

impl ChainConfig {
    pub fn new(steps: usize, seed: u64) -> Self {
        Self { steps, burn_in: DEFAULT_BURN_IN, thinning: DEFAULT_THINNING, seed, keep_records: false }
    }

    pub fn burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn thinning(mut self, thinning: usize) -> Self {
        self.thinning = thinning;
        self
    }

    pub fn keep_records(mut self, keep: bool) -> Self {
        self.keep_records = keep;
        self
    }

    /// `⌊(steps − burn_in) / thinning⌋`
    pub fn retained(&self) -> usize {
        self.steps.saturating_sub(self.burn_in) / self.thinning.max(1)
    }
}

/// Retained part of one trajectory `x̂_0, …, x̂_n`.
///
/// The retained times are `burn_in + j·thinning`; with `burn_in = 0` the first
/// retained state is `x̂_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub config: ChainConfig,
    pub states: Vec<ProjectiveState>,
    /// Time index of each retained state.
    pub times: Vec<usize>,
    /// Outcome (zero-based) of the transition that produced each retained
    /// state; `None` for `x̂_0`.
    pub outcomes: Vec<Option<usize>>,
    /// Transition records of the retained states (empty unless requested).
    pub records: Vec<StepRecord>,
}

pub fn run_chain(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    x0: &ProjectiveState,
    config: ChainConfig,
) -> Result<ChainRun> {
    let mut rng = seeded(config.seed);
    run_chain_with(ch, rand, x0, config, &mut rng)
}

pub fn run_chain_with(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    x0: &ProjectiveState,
    config: ChainConfig,
    rng: &mut ChaCha20Rng,
) -> Result<ChainRun> {
    if config.steps == 0 {
        return Err(Error::Empty("chain length"));
    }
    if config.thinning == 0 {
        return Err(Error::Parse("thinning must be at least 1".into()));
    }
    if x0.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: x0.dim() });
    }
    rand.validate(ch.rank())?;
    let retained = config.retained();
    let mut run = ChainRun {
        config,
        states: Vec::with_capacity(retained),
        times: Vec::with_capacity(retained),
        outcomes: Vec::with_capacity(retained),
        records: Vec::new(),
    };
    let last = if retained == 0 { 0 } else { config.burn_in + (retained - 1) * config.thinning };
    let keep = |t: usize| {
        retained > 0 && t >= config.burn_in && t <= last && (t - config.burn_in).is_multiple_of(config.thinning)
    };
    let mut state = x0.clone();
    if keep(0) {
        run.states.push(state.clone());
        run.times.push(0);
        run.outcomes.push(None);
    }
    for t in 1..=last {
        let rec = kernel_step(ch, rand, &state, rng)?;
        state = rec.state_after.clone();
        if keep(t) {
            run.states.push(state.clone());
            run.times.push(t);
            run.outcomes.push(Some(rec.outcome));
            if config.keep_records {
                run.records.push(rec);
            }
        }
    }
    Ok(run)
}

/// Residue-class split of a run and its Cesàro average.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroEstimate {
    /// One measure per residue `l = t mod m` (absent classes are skipped).
    pub classes: Vec<(usize, EmpiricalMeasure)>,
    /// `(1/m') Σ_l class_l` over the `m'` nonempty classes.
    pub average: EmpiricalMeasure,
}

pub fn cesaro_subsample(run: &ChainRun, period: usize) -> Result<CesaroEstimate> {
    if period == 0 {
        return Err(Error::Parse("period must be at least 1".into()));
    }
    if run.states.is_empty() {
        return Err(Error::Empty("chain run retained no states"));
    }
    let mut buckets: Vec<Vec<ProjectiveState>> = vec![Vec::new(); period];
    for (s, &t) in run.states.iter().zip(&run.times) {
        buckets[t % period].push(s.clone());
    }
    let nonempty = buckets.iter().filter(|b| !b.is_empty()).count() as f64;
    let mut classes = Vec::new();
    let mut points = Vec::with_capacity(run.states.len());
    let mut weights = Vec::with_capacity(run.states.len());
    for (l, bucket) in buckets.into_iter().enumerate() {
        if bucket.is_empty() {
            continue;
        }
        let w = 1.0 / (nonempty * bucket.len() as f64);
        points.extend(bucket.iter().cloned());
        weights.extend(std::iter::repeat_n(w, bucket.len()));
        classes.push((l, EmpiricalMeasure::uniform_weights(bucket)?));
    }
    Ok(CesaroEstimate { classes, average: EmpiricalMeasure::from_unnormalized(points, weights)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::catalog;
    use crate::linalg::{identity, unitarity_defect};
    use crate::measure::uniform_state;
    use rand::SeedableRng;

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        for k in 1..6 {
            for _ in 0..50 {
                assert!(unitarity_defect(&sample_haar_unitary(k, &mut rng)) < 1e-12);
            }
        }
        let u = sample_haar_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_first_entry_second_moment() {
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| sample_haar_unitary(3, &mut rng)[(0, 0)].norm_sqr()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn unitary_channel_is_deterministic() {
        let theta: f64 = 0.3;
        let u = crate::linalg::real_matrix(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let ch = catalog::unitary(u.clone()).unwrap();
        let x0 = ProjectiveState::basis(2, 0);
        let run = run_chain(&ch, &RandomizationSpec::identity(1), &x0, ChainConfig::new(20, 1).burn_in(0)).unwrap();
        let mut expected = x0.clone();
        for s in &run.states {
            assert!((s.rep() - expected.rep()).norm() < 1e-12);
            expected = expected.apply(&u).unwrap();
        }
        assert_eq!(run.states.len(), 20);
    }

    #[test]
    fn two_atom_channel_steps() {
        let ch = catalog::two_atom_counterexample();
        let id = RandomizationSpec::identity(2);
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let e1 = ProjectiveState::basis(2, 0);
        let e2 = ProjectiveState::basis(2, 1);
        let ep = ProjectiveState::from_reals(&[1.0, 1.0]).unwrap();
        for _ in 0..20 {
            let r = kernel_step(&ch, &id, &e1, &mut rng).unwrap();
            assert_eq!(r.state_after, e2);
            assert_eq!(r.outcome, 0);
            assert!((r.weight - 1.0).abs() < 1e-15);
            let r = kernel_step(&ch, &id, &e2, &mut rng).unwrap();
            assert!((r.state_after.rep() - ep.rep()).norm() < 1e-15);
            assert_eq!(r.outcome, 1);
        }
    }

    #[test]
    fn outcome_weights_sum_to_one() {
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        for _ in 0..200 {
            let ch = catalog::random(&mut rng, 3, 3);
            let u = sample_haar_unitary(3, &mut rng);
            let x = uniform_state(3, &mut rng);
            let (w, _) = outcome_distribution(&ch, &u, &x).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn run_is_reproducible_and_sized() {
        let ch = catalog::depolarizing(2, 0.5).unwrap();
        let x0 = ProjectiveState::basis(2, 0);
        let cfg = ChainConfig::new(500, 99).burn_in(100).thinning(3).keep_records(true);
        let a = run_chain(&ch, &RandomizationSpec::Haar, &x0, cfg).unwrap();
        let b = run_chain(&ch, &RandomizationSpec::Haar, &x0, cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.states.len(), (500 - 100) / 3);
        assert_eq!(a.records.len(), a.states.len());
        assert_eq!(a.times[0], 100);
        let c0 = ChainConfig::new(10, 1).burn_in(0);
        let r = run_chain(&ch, &RandomizationSpec::Haar, &x0, c0).unwrap();
        assert_eq!(r.states[0], x0);
        assert!(run_chain(&ch, &RandomizationSpec::Haar, &x0, ChainConfig::new(0, 1)).is_err());
    }

    #[test]
    fn period_two_cesaro_classes() {
        let ch = catalog::swap();
        let x0 = ProjectiveState::basis(2, 0);
        let run = run_chain(&ch, &RandomizationSpec::identity(2), &x0, ChainConfig::new(100, 5).burn_in(0)).unwrap();
        let est = cesaro_subsample(&run, 2).unwrap();
        assert_eq!(est.classes.len(), 2);
        let e1 = ProjectiveState::basis(2, 0);
        let e2 = ProjectiveState::basis(2, 1);
        assert!(est.classes[0].1.points().iter().all(|p| p == &e1));
        assert!(est.classes[1].1.points().iter().all(|p| p == &e2));
        let masses = est.average.atom_masses(&[e1, e2], 1e-9).unwrap();
        assert!((masses[0] - 0.5).abs() < 1e-12 && (masses[1] - 0.5).abs() < 1e-12);

        let single = cesaro_subsample(&run, 1).unwrap();
        assert_eq!(single.classes.len(), 1);
        assert_eq!(single.average.points(), run.states.as_slice());

        let singletons = cesaro_subsample(&run, run.states.len()).unwrap();
        assert_eq!(singletons.classes.len(), run.states.len());
        assert!(singletons.classes.iter().all(|(_, m)| m.len() == 1));
    }

    #[test]
    fn depolarizing_haar_chain_mean_state() {
        let ch = catalog::depolarizing(2, 0.5).unwrap();
        let x0 = ProjectiveState::basis(2, 0);
        let run = run_chain(&ch, &RandomizationSpec::Haar, &x0, ChainConfig::new(11_000, 3)).unwrap();
        let est = cesaro_subsample(&run, 1).unwrap();
        assert_eq!(est.average.len(), 10_000);
        let dev = (est.average.mean_density_matrix() - identity(2).scale(0.5)).norm();
        assert!(dev < 0.02, "{dev}");
    }
}
