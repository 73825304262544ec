//! The invariance residual of the Cesàro estimate shrinks as the chain grows.
//!
//! For each `N ∈ {10³, 10⁴, 10⁵}` a fresh chain of `N` retained states gives
//! the estimate; the residual compares independent halves with subsample
//! size `⌈10·√N⌉`, so each tenfold increase in `N` should reduce it.

use qtraj::analysis::{is_irreducible, period_and_decomposition};
use qtraj::channel::{catalog, KrausChannel};
use qtraj::randomization::RandomizationSpec;
use qtraj::rng::stream;
use qtraj::state::ProjectiveState;
use qtraj::trajectory::{cesaro_subsample, run_chain_with, ChainConfig};
use qtraj::wasserstein::invariance_residual;

fn residuals(ch: &KrausChannel, seed: u64) -> Vec<f64> {
    assert!(is_irreducible(ch).irreducible);
    let period = period_and_decomposition(ch).unwrap().0;
    let x0 = ProjectiveState::basis(ch.dim(), 0);
    [1_000usize, 10_000, 100_000]
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let cfg = ChainConfig::new(1000 + n, seed).burn_in(1000);
            let run = run_chain_with(ch, &RandomizationSpec::Haar, &x0, cfg, &mut stream(seed, i as u64)).unwrap();
            let nu = cesaro_subsample(&run, period).unwrap().average;
            let sub = (10.0 * (n as f64).sqrt()).ceil() as usize;
            invariance_residual(ch, &RandomizationSpec::Haar, &nu, sub, &mut stream(seed, 100 + i as u64)).unwrap()
        })
        .collect()
}

fn assert_decreasing(r: &[f64]) {
    assert!(r.windows(2).all(|w| w[1] < w[0]), "residuals not decreasing: {r:?}");
}

#[test]
fn depolarizing_residual_decreases() {
    assert_decreasing(&residuals(&catalog::depolarizing(3, 0.5).unwrap(), 31));
}

#[test]
fn random_channel_residual_decreases() {
    let ch = catalog::random(&mut stream(32, 0), 2, 2);
    assert_decreasing(&residuals(&ch, 32));
}
