//! Exact Wasserstein-1 distance between empirical measures on `P(C^d)`
//! under `d(x̂, ŷ) = √(1 − |<x,y>|²)`.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{unitarity_defect, ComplexMatrix};
use crate::measure::EmpiricalMeasure;
use crate::randomization::{RandomizationSpec, UNITARY_TOL};
use crate::rng::stream;
use crate::state::{fubini_distance_unchecked, ProjectiveState};
use crate::trajectory::kernel_step;

/// Default size of the equal-weight clouds handed to the assignment solver.
pub const DEFAULT_SUBSAMPLE: usize = 2000;
pub const NULL_REPLICAS: usize = 20;
pub const NULL_WIDTH_SD: f64 = 3.0;

/// Row-major `|a| × |b|` matrix of pairwise distances.
pub fn cost_matrix(a: &[ProjectiveState], b: &[ProjectiveState]) -> Vec<f64> {
    let n = b.len();
    let mut cost = vec![0.0; a.len() * n];
    cost.par_chunks_mut(n.max(1)).zip(a.par_iter()).for_each(|(row, x)| {
        for (c, y) in row.iter_mut().zip(b) {
            *c = fubini_distance_unchecked(x, y);
        }
    });
    cost
}

/// Minimum-cost perfect matching of a square cost matrix by shortest
/// augmenting paths (Dijkstra on reduced costs, one augmentation per row).
/// Returns the total cost and, for each row, its column.
///
/// Invariants between augmentations: `u_i + v_j <= c_ij` for all pairs, with
/// equality on matched pairs. Each search scans only columns not yet reached
/// and prefers a free column on ties, which ends searches early.
pub fn assignment(cost: &[f64], n: usize) -> (f64, Vec<usize>) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n × n");
    const FREE: usize = usize::MAX;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut row_of_col = vec![FREE; n];
    let mut col_of_row = vec![FREE; n];
    let mut path = vec![0usize; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);
    let mut scanned_rows: Vec<usize> = Vec::with_capacity(n);
    let mut scanned_cols: Vec<usize> = Vec::with_capacity(n);
    for start in 0..n {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        remaining.clear();
        // Reverse order so that swap-removal keeps low indices first.
        remaining.extend((0..n).rev());
        scanned_rows.clear();
        scanned_cols.clear();
        let mut min_val = 0.0;
        let mut i = start;
        let sink = loop {
            scanned_rows.push(i);
            let row = &cost[i * n..(i + 1) * n];
            let ui = u[i];
            let mut lowest = f64::INFINITY;
            let mut index = 0;
            for (it, &j) in remaining.iter().enumerate() {
                let r = min_val + row[j] - ui - v[j];
                if r < dist[j] {
                    path[j] = i;
                    dist[j] = r;
                }
                if dist[j] < lowest || (dist[j] == lowest && row_of_col[j] == FREE) {
                    lowest = dist[j];
                    index = it;
                }
            }
            min_val = lowest;
            let j = remaining.swap_remove(index);
            scanned_cols.push(j);
            if row_of_col[j] == FREE {
                break j;
            }
            i = row_of_col[j];
        };
        u[start] += min_val;
        for &r in &scanned_rows[1..] {
            u[r] += min_val - dist[col_of_row[r]];
        }
        for &c in &scanned_cols {
            v[c] -= min_val - dist[c];
        }
        let mut j = sink;
        loop {
            let r = path[j];
            row_of_col[j] = r;
            std::mem::swap(&mut col_of_row[r], &mut j);
            if r == start {
                break;
            }
        }
    }
    let total = col_of_row.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    (total, col_of_row)
}

/// Optimal transport plan between `supply` (rows) and `demand` (columns)
/// with equal totals, by the transportation simplex: northwest-corner start,
/// then potentials `u_i + v_j = c_ij` on the basis tree and pivots on the most
/// negative reduced cost. Returns the optimal cost.
pub fn transportation(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<f64> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::Empty("transportation problem"));
    }
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch { expected: m * n, got: cost.len() });
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(1.0) {
        return Err(Error::Parse(format!("unbalanced transportation problem: {total_s} vs {total_d}")));
    }
    // Basic cells: (row, col, flow). Exactly m + n − 1, forming a spanning tree
    // of the bipartite row/column graph.
    let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    {
        let mut s = supply.to_vec();
        let mut d: Vec<f64> = demand.iter().map(|x| x * total_s / total_d).collect();
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(d[j]);
            basis.push((i, j, x));
            s[i] -= x;
            d[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (s[i] <= d[j] && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);
    let scale = cost.iter().fold(0.0f64, |a, &c| a.max(c.abs())).max(1e-300);
    let tol = 1e-12 * scale;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    // Node ids: rows 0..m, columns m..m+n.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n];
    let max_iters = 50 * (m + n) * (m + n).max(10);
    for _ in 0..max_iters {
        for a in adj.iter_mut() {
            a.clear();
        }
        for (k, &(i, j, _)) in basis.iter().enumerate() {
            adj[i].push(k);
            adj[m + j].push(k);
        }
        // Potentials by traversal from row 0.
        let mut seen = vec![false; m + n];
        let mut stack = vec![0usize];
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &k in &adj[node] {
                let (i, j, _) = basis[k];
                let c = cost[i * n + j];
                if node < m {
                    if !seen[m + j] {
                        v[j] = c - u[i];
                        seen[m + j] = true;
                        stack.push(m + j);
                    }
                } else if !seen[i] {
                    u[i] = c - v[j];
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        // Entering cell.
        let mut best = (-tol, usize::MAX, usize::MAX);
        for i in 0..m {
            let row = &cost[i * n..(i + 1) * n];
            for j in 0..n {
                let r = row[j] - u[i] - v[j];
                if r < best.0 {
                    best = (r, i, j);
                }
            }
        }
        if best.1 == usize::MAX {
            return Ok(basis.iter().map(|&(i, j, x)| x * cost[i * n + j]).sum());
        }
        let (ei, ej) = (best.1, best.2);
        // Tree path from column ej to row ei.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n];
        let mut visited = vec![false; m + n];
        let mut queue = std::collections::VecDeque::from([m + ej]);
        visited[m + ej] = true;
        while let Some(node) = queue.pop_front() {
            if node == ei {
                break;
            }
            for &k in &adj[node] {
                let (i, j, _) = basis[k];
                let next = if node < m { m + j } else { i };
                if !visited[next] {
                    visited[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = ei;
        while node != m + ej {
            let (prev, k) = parent[node].expect("basis is a spanning tree");
            path.push(k);
            node = prev;
        }
        path.reverse();
        // Along the path from column ej: odd positions lose flow.
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 && basis[k].2 < theta {
                theta = basis[k].2;
                leaving = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis[k].2 -= theta;
            } else {
                basis[k].2 += theta;
            }
        }
        basis[leaving] = (ei, ej, theta);
    }
    Err(Error::NoConvergence { residual: f64::NAN, iters: max_iters })
}

/// Exact `W1(a, b)`: an assignment when both clouds have the same size and
/// equal weights, the transportation simplex otherwise. The arguments are
/// put in a canonical order first, so `W1(a, b)` and `W1(b, a)` are
/// bitwise equal.
pub fn wasserstein1(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let (a, b) = if canonical_order(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let cost = cost_matrix(a.points(), b.points());
    if a.len() == b.len() && a.has_equal_weights() && b.has_equal_weights() {
        let (total, _) = assignment(&cost, a.len());
        return Ok((total / a.len() as f64).min(1.0));
    }
    Ok(transportation(&cost, a.weights(), b.weights())?.clamp(0.0, 1.0))
}

fn canonical_order(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Ordering {
    let key = |m: &EmpiricalMeasure| {
        m.points()
            .iter()
            .flat_map(|p| p.rep().iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .chain(m.weights().iter().copied())
            .collect::<Vec<f64>>()
    };
    a.len().cmp(&b.len()).then_with(|| {
        key(a).iter().zip(key(b).iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    })
}

/// Equal-weight cloud of `n` points: a subsample without replacement of
/// equal-weight clouds, a weighted resample otherwise.
pub fn equalize<R: Rng + ?Sized>(m: &EmpiricalMeasure, n: usize, rng: &mut R) -> EmpiricalMeasure {
    if m.has_equal_weights() {
        if n >= m.len() {
            m.clone()
        } else {
            m.subsample(n, rng)
        }
    } else {
        m.resample(n, rng)
    }
}

/// `W1` between equal-size clouds of at most `n` points drawn from `a` and
/// `b`.
pub fn wasserstein1_subsampled<R: Rng + ?Sized>(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    let size = n.min(a.len()).min(b.len());
    let ea = equalize(a, size, rng);
    let eb = equalize(b, size, rng);
    wasserstein1(&ea, &eb)
}

/// Same-law reference distribution of a two-sample statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullBand {
    pub replicas: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl NullBand {
    pub fn from_replicas(replicas: Vec<f64>) -> Result<Self> {
        if replicas.len() < 2 {
            return Err(Error::Empty("null band needs at least two replicas"));
        }
        let n = replicas.len() as f64;
        let mean = replicas.iter().sum::<f64>() / n;
        let sd = (replicas.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        Ok(Self { lower: mean - NULL_WIDTH_SD * sd, upper: mean + NULL_WIDTH_SD * sd, replicas, mean, sd })
    }

    /// `mean − 3 sd ≤ x ≤ mean + 3 sd`
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// `x ≤ mean + 3 sd`
    pub fn below_upper(&self, x: f64) -> bool {
        x <= self.upper
    }
}

/// `replicas` values of `W1` between two independent same-law clouds of
/// `n` draws each, both cut down to `n_sub` points exactly as the statistic
/// under test is; replica `r` uses stream `r` of `seed`.
pub fn calibrate_null<F>(replicas: usize, n: usize, n_sub: usize, seed: u64, draw: F) -> Result<NullBand>
where
    F: Fn(usize, &mut rand_chacha::ChaCha20Rng) -> Result<EmpiricalMeasure> + Sync,
{
    let values = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let a = draw(n, &mut rng)?;
            let b = draw(n, &mut rng)?;
            wasserstein1_subsampled(&a, &b, n_sub, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    NullBand::from_replicas(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub statistic: f64,
    pub band: NullBand,
    pub within_band: bool,
    pub below_upper: bool,
}

impl Comparison {
    pub fn new(statistic: f64, band: NullBand) -> Self {
        Self { within_band: band.contains(statistic), below_upper: band.below_upper(statistic), statistic, band }
    }
}

/// Two independent equal-weight clouds of `min(n, ⌊len/2⌋)` points from
/// `nu`: disjoint halves of a random permutation for equal-weight clouds,
/// independent resamples otherwise. Halves keep the two sides of every
/// two-sample statistic independent, so the same-law band applies.
pub fn split_halves<R: Rng + ?Sized>(
    nu: &EmpiricalMeasure,
    n: usize,
    rng: &mut R,
) -> Result<(EmpiricalMeasure, EmpiricalMeasure)> {
    let size = n.min(nu.len() / 2);
    if size == 0 {
        return Err(Error::Empty("measure too small to split"));
    }
    if nu.has_equal_weights() {
        let idx = rand::seq::index::sample(rng, nu.len(), 2 * size).into_vec();
        let pick =
            |ix: &[usize]| EmpiricalMeasure::uniform_weights(ix.iter().map(|&i| nu.points()[i].clone()).collect());
        Ok((pick(&idx[..size])?, pick(&idx[size..])?))
    } else {
        Ok((nu.resample(size, rng), nu.resample(size, rng)))
    }
}

/// `W1(A, B·Π)` for independent halves `A, B` of `nu` (at most `n` points
/// each), where every atom of `B` takes one fresh kernel step.
pub fn invariance_residual<R: Rng + ?Sized>(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    nu: &EmpiricalMeasure,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    if nu.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: nu.dim() });
    }
    rand.validate(ch.rank())?;
    let (a, b) = split_halves(nu, n, rng)?;
    let stepped =
        b.points().iter().map(|x| kernel_step(ch, rand, x, rng).map(|r| r.state_after)).collect::<Result<Vec<_>>>()?;
    wasserstein1(&a, &EmpiricalMeasure::uniform_weights(stepped)?)
}

/// `W1(A, U·B)` for independent halves `A, B` of `nu`.
pub fn symmetry_residual<R: Rng + ?Sized>(
    nu: &EmpiricalMeasure,
    u: &ComplexMatrix,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    let deviation = unitarity_defect(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let (a, b) = split_halves(nu, n, rng)?;
    wasserstein1(&a, &b.pushforward(u)?)
}

/// Band from `replicas` values of `W1(A_r, B_r)` over fresh random halves of
/// `nu`; replica `r` uses stream `r + 1` of `seed`.
pub fn split_null_band(nu: &EmpiricalMeasure, n: usize, replicas: usize, seed: u64) -> Result<NullBand> {
    let values = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64 + 1);
            let (a, b) = split_halves(nu, n, &mut rng)?;
            wasserstein1(&a, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    NullBand::from_replicas(values)
}

/// `invariance_residual` (stream 0 of `seed`) against its split-halves band.
pub fn invariance_test(
    ch: &KrausChannel,
    rand: &RandomizationSpec,
    nu: &EmpiricalMeasure,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Comparison> {
    let stat = invariance_residual(ch, rand, nu, n, &mut stream(seed, 0))?;
    Ok(Comparison::new(stat, split_null_band(nu, n, replicas, seed)?))
}

/// `symmetry_residual` (stream 0 of `seed`) against its split-halves band.
pub fn symmetry_test(
    nu: &EmpiricalMeasure,
    u: &ComplexMatrix,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Comparison> {
    let stat = symmetry_residual(nu, u, n, &mut stream(seed, 0))?;
    Ok(Comparison::new(stat, split_null_band(nu, n, replicas, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::uniform_sample;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn brute_force(cost: &[f64], n: usize) -> f64 {
        fn rec(row: usize, n: usize, used: &mut Vec<bool>, cost: &[f64], acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(row + 1, n, used, cost, acc + cost[row * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(0, n, &mut vec![false; n], cost, 0.0, &mut best);
        best
    }

    #[test]
    fn trivial_distances() {
        let e1 = ProjectiveState::basis(2, 0);
        let e2 = ProjectiveState::basis(2, 1);
        let a = EmpiricalMeasure::uniform_weights(vec![e1.clone()]).unwrap();
        let b = EmpiricalMeasure::uniform_weights(vec![e2]).unwrap();
        assert_eq!(wasserstein1(&a, &b).unwrap(), 1.0);
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
        let mut rng = ChaCha20Rng::seed_from_u64(70);
        let u = uniform_sample(3, 50, &mut rng).unwrap();
        assert!(wasserstein1(&u, &u).unwrap().abs() < 1e-15);
        let c = EmpiricalMeasure::uniform_weights(vec![ProjectiveState::basis(3, 0)]).unwrap();
        assert!(wasserstein1(&a, &c).is_err());
    }

    #[test]
    fn three_point_example_matches_permutations() {
        let pts_a = vec![
            ProjectiveState::from_reals(&[1.0, 0.0]).unwrap(),
            ProjectiveState::from_reals(&[1.0, 1.0]).unwrap(),
            ProjectiveState::from_reals(&[0.0, 1.0]).unwrap(),
        ];
        let pts_b = vec![
            ProjectiveState::from_reals(&[1.0, -1.0]).unwrap(),
            ProjectiveState::from_reals(&[2.0, 1.0]).unwrap(),
            ProjectiveState::from_reals(&[1.0, 3.0]).unwrap(),
        ];
        let cost = cost_matrix(&pts_a, &pts_b);
        let oracle = brute_force(&cost, 3) / 3.0;
        let a = EmpiricalMeasure::uniform_weights(pts_a).unwrap();
        let b = EmpiricalMeasure::uniform_weights(pts_b).unwrap();
        assert!((wasserstein1(&a, &b).unwrap() - oracle).abs() < 1e-14);
        let t = transportation(&cost, &[1.0 / 3.0; 3], &[1.0 / 3.0; 3]).unwrap();
        assert!((t - oracle).abs() < 1e-14);
    }

    /// Weighted example solved by hand: all of the mass at `ê1` must travel
    /// to the nearest target first.
    #[test]
    fn transportation_hand_example() {
        // supplies (0.5, 0.5), demands (0.25, 0.75), costs [[0, 1], [1, 0]]
        let t = transportation(&[0.0, 1.0, 1.0, 0.0], &[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((t - 0.25).abs() < 1e-15);
        // degenerate: identical marginals with a zero-cost diagonal
        let t =
            transportation(&[0.0, 2.0, 3.0, 2.0, 0.0, 1.0, 3.0, 1.0, 0.0], &[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]).unwrap();
        assert!(t.abs() < 1e-15);
        assert!(transportation(&[0.0], &[1.0], &[2.0]).is_err());
    }

    #[test]
    fn metric_properties() {
        let mut rng = ChaCha20Rng::seed_from_u64(71);
        for _ in 0..20 {
            let a = uniform_sample(2, 30, &mut rng).unwrap();
            let b = uniform_sample(2, 30, &mut rng).unwrap();
            let c = uniform_sample(2, 30, &mut rng).unwrap();
            let ab = wasserstein1(&a, &b).unwrap();
            assert!((ab - wasserstein1(&b, &a).unwrap()).abs() < 1e-12);
            let ac = wasserstein1(&a, &c).unwrap();
            let bc = wasserstein1(&b, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9);
            assert!(ab <= 1.0);
        }
    }

    #[test]
    fn null_band_shrinks_with_size() {
        let draw = |n: usize, rng: &mut ChaCha20Rng| uniform_sample(2, n, rng);
        let small = calibrate_null(10, 50, 50, 1, draw).unwrap();
        let large = calibrate_null(10, 400, 400, 1, draw).unwrap();
        assert!(large.mean < small.mean);
        assert_eq!(small.replicas.len(), 10);
        assert!(small.contains(small.mean) && !small.contains(small.upper + 1.0));
    }

    #[test]
    fn residual_oracles() {
        use crate::channel::catalog;
        let mut rng = ChaCha20Rng::seed_from_u64(72);
        let e1 = ProjectiveState::basis(2, 0);
        let e2 = ProjectiveState::basis(2, 1);
        let delta = EmpiricalMeasure::uniform_weights(vec![e1.clone(); 40]).unwrap();
        // deterministic step ê1 ↦ ê2
        let ch = catalog::two_atom_counterexample();
        let r = invariance_residual(&ch, &RandomizationSpec::identity(2), &delta, 100, &mut rng).unwrap();
        assert_eq!(r, 1.0);
        let swap = crate::linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(symmetry_residual(&delta, &swap, 100, &mut rng).unwrap(), 1.0);
        let e2_cloud = EmpiricalMeasure::uniform_weights(vec![e2.clone(); 10]).unwrap();
        assert_eq!(e2_cloud.atom_masses(&[e2], 1e-6).unwrap(), vec![1.0]);
        let bad = crate::linalg::real_matrix(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(symmetry_residual(&delta, &bad, 10, &mut rng).is_err());
    }

    #[test]
    fn uniform_cloud_passes_symmetry_and_invariance() {
        use crate::channel::catalog;
        let mut rng = ChaCha20Rng::seed_from_u64(73);
        let nu = uniform_sample(2, 800, &mut rng).unwrap();
        let u = crate::trajectory::sample_haar_unitary(2, &mut rng);
        let cmp = symmetry_test(&nu, &u, 400, 20, 5).unwrap();
        assert!(cmp.within_band, "{cmp:?}");
        let dep = catalog::depolarizing(2, 0.5).unwrap();
        let cmp = invariance_test(&dep, &RandomizationSpec::Haar, &nu, 400, 20, 6).unwrap();
        assert!(cmp.within_band, "{cmp:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn assignment_matches_brute_force(costs in prop::collection::vec(0.0f64..1.0, 25)) {
            let (total, cols) = assignment(&costs, 5);
            prop_assert!((total - brute_force(&costs, 5)).abs() < 1e-12);
            let mut seen = cols.clone();
            seen.sort();
            prop_assert_eq!(seen, vec![0, 1, 2, 3, 4]);
        }

        #[test]
        fn transportation_matches_assignment(costs in prop::collection::vec(0.0f64..1.0, 36)) {
            let (total, _) = assignment(&costs, 6);
            let t = transportation(&costs, &[1.0 / 6.0; 6], &[1.0 / 6.0; 6]).unwrap();
            prop_assert!((t - total / 6.0).abs() < 1e-12);
        }

        /// Unequal weights: compare against the same problem split into
        /// equal-mass atoms and solved by assignment.
        #[test]
        fn transportation_matches_split_assignment(
            costs in prop::collection::vec(0.0f64..1.0, 6),
            split in prop::collection::vec(1usize..4, 2),
        ) {
            // 2 sources with masses s/6, 3 sinks with 2/6 each
            let s0 = split[0].min(5);
            let supply = [s0 as f64 / 6.0, (6 - s0) as f64 / 6.0];
            let demand = [2.0 / 6.0; 3];
            let t = transportation(&costs, &supply, &demand).unwrap();
            let rows: Vec<usize> = (0..6).map(|a| if a < s0 { 0 } else { 1 }).collect();
            let cols: Vec<usize> = (0..6).map(|b| b / 2).collect();
            let mut big = vec![0.0; 36];
            for a in 0..6 {
                for b in 0..6 {
                    big[a * 6 + b] = costs[rows[a] * 3 + cols[b]];
                }
            }
            let (total, _) = assignment(&big, 6);
            prop_assert!((t - total / 6.0).abs() < 1e-12, "{} vs {}", t, total / 6.0);
        }
    }
}
