//! Invariant density of a primitive qubit channel under Haar randomization.
//!
//! On `P(C²)` the one-step Haar kernel from `x̂'` has density
//! `(2/det ρ')·<x|ρ'^{-1}|x>^{-3}` with `ρ' = Φ*(|x'><x'|)` against the
//! uniform measure. In Bloch coordinates (`ρ' = (Id + r'·σ)/2`,
//! `|x><x| = (Id + n·σ)/2`) that is `(1 − |r'|²)² / (1 − r'·n)³`.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::analysis::is_primitive;
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, ComplexVector};
use crate::measure::{compensated_sum, EmpiricalMeasure};
use crate::state::ProjectiveState;

pub const DEFAULT_N_THETA: usize = 200;
pub const DEFAULT_N_PHI: usize = 100;
pub const DEFAULT_MAX_SWEEPS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-9;
/// `det Φ*(|x'><x'|)` below this at a node is fatal.
pub const SINGULAR_DET: f64 = 1e-12;
/// Sweeps before oscillation triggers damping.
const WARMUP_SWEEPS: usize = 3;
const DAMPING: f64 = 0.5;

/// Bloch vector `n` of a qubit ray.
pub fn bloch_vector(x: &ProjectiveState) -> Result<[f64; 3]> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: x.dim() });
    }
    let v = x.rep();
    let off = v[0] * v[1].conj();
    Ok([2.0 * off.re, -2.0 * off.im, v[0].norm_sqr() - v[1].norm_sqr()])
}

/// Bloch vector of a 2×2 Hermitian matrix of unit trace.
pub fn bloch_of_density(rho: &ComplexMatrix) -> [f64; 3] {
    let off = rho[(0, 1)];
    [2.0 * off.re, -2.0 * off.im, rho[(0, 0)].re - rho[(1, 1)].re]
}

/// Equal-area grid on the Bloch sphere: `n_theta` bands uniform in `cos θ`
/// (band 0 at the north pole) times `n_phi` uniform sectors. Every cell has
/// uniform-measure weight `1/(n_theta·n_phi)`; nodes are the cell midpoints
/// in `(cos θ, φ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl BlochGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::Empty("Bloch grid"));
        }
        Ok(Self { n_theta, n_phi })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn cos_theta(&self, i: usize) -> f64 {
        1.0 - (2 * i + 1) as f64 / self.n_theta as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + 0.5) / self.n_phi as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    pub fn node_bloch(&self, i: usize, j: usize) -> [f64; 3] {
        let ct = self.cos_theta(i);
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let phi = self.phi(j);
        [st * phi.cos(), st * phi.sin(), ct]
    }

    /// `(cos(θ/2), e^{iφ} sin(θ/2))`
    pub fn node_state(&self, i: usize, j: usize) -> ProjectiveState {
        let ct = self.cos_theta(i);
        let (a, b) = (((1.0 + ct) / 2.0).sqrt(), ((1.0 - ct) / 2.0).sqrt());
        let phi = self.phi(j);
        let v = ComplexVector::from_vec(vec![c(a, 0.0), c(b * phi.cos(), b * phi.sin())]);
        crate::state::canonicalize(&v).expect("unit vector")
    }

    /// Cell containing the Bloch vector `n`.
    pub fn cell_of_bloch(&self, n: [f64; 3]) -> (usize, usize) {
        let i = (((1.0 - n[2]) * self.n_theta as f64 / 2.0).floor().max(0.0) as usize).min(self.n_theta - 1);
        let phi = n[1].atan2(n[0]).rem_euclid(2.0 * PI);
        let j = ((phi * self.n_phi as f64 / (2.0 * PI)).floor() as usize).min(self.n_phi - 1);
        (i, j)
    }

    pub fn cell_of(&self, x: &ProjectiveState) -> Result<(usize, usize)> {
        Ok(self.cell_of_bloch(bloch_vector(x)?))
    }

    /// Mass of `nu` in each cell.
    pub fn histogram(&self, nu: &EmpiricalMeasure) -> Result<Vec<f64>> {
        let mut mass = vec![0.0; self.len()];
        for (x, &w) in nu.points().iter().zip(nu.weights()) {
            let (i, j) = self.cell_of(x)?;
            mass[self.index(i, j)] += w;
        }
        Ok(mass)
    }

    /// Measure with the given cell masses placed at the nodes; empty cells
    /// are dropped.
    pub fn node_measure(&self, masses: &[f64]) -> Result<EmpiricalMeasure> {
        if masses.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: masses.len() });
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                let m = masses[self.index(i, j)];
                if m > 0.0 {
                    points.push(self.node_state(i, j));
                    weights.push(m);
                }
            }
        }
        EmpiricalMeasure::from_unnormalized(points, weights)
    }
}

/// Density against the uniform measure, one value per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochGridDensity {
    pub grid: BlochGrid,
    /// Row-major over `(theta band, phi sector)`.
    pub values: Vec<f64>,
}

impl BlochGridDensity {
    pub fn new(grid: BlochGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidDensity("grid density must be nonnegative".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: BlochGrid) -> Self {
        let values = vec![1.0; grid.len()];
        Self { grid, values }
    }

    /// `Σ f · cell weight`
    pub fn integral(&self) -> f64 {
        compensated_sum(&self.values) * self.grid.cell_weight()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Piecewise-constant value at `x`.
    pub fn value_at(&self, x: &ProjectiveState) -> Result<f64> {
        let (i, j) = self.grid.cell_of(x)?;
        Ok(self.value(i, j))
    }

    /// Mass of each cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        let w = self.grid.cell_weight();
        self.values.iter().map(|v| v * w).collect()
    }

    /// Cell masses summed onto a coarser grid whose sizes divide this one's.
    pub fn coarsen(&self, coarse: &BlochGrid) -> Result<Vec<f64>> {
        if !self.grid.n_theta.is_multiple_of(coarse.n_theta) || !self.grid.n_phi.is_multiple_of(coarse.n_phi) {
            return Err(Error::Parse(format!(
                "coarse grid {}x{} does not divide {}x{}",
                coarse.n_theta, coarse.n_phi, self.grid.n_theta, self.grid.n_phi
            )));
        }
        let (ri, rj) = (self.grid.n_theta / coarse.n_theta, self.grid.n_phi / coarse.n_phi);
        let mut out = vec![0.0; coarse.len()];
        let w = self.grid.cell_weight();
        for i in 0..self.grid.n_theta {
            for j in 0..self.grid.n_phi {
                out[coarse.index(i / ri, j / rj)] += self.value(i, j) * w;
            }
        }
        Ok(out)
    }
}

/// Per-node data of the kernel: pushed Bloch vectors `r'` and the factors
/// `(1 − |r'|²)²`.
struct Kernel {
    rx: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
    factor: Vec<f64>,
    targets: Vec<[f64; 3]>,
    weight: f64,
}

impl Kernel {
    fn build(ch: &KrausChannel, grid: &BlochGrid) -> Result<Self> {
        let n = grid.len();
        let mut k = Kernel {
            rx: Vec::with_capacity(n),
            ry: Vec::with_capacity(n),
            rz: Vec::with_capacity(n),
            factor: Vec::with_capacity(n),
            targets: Vec::with_capacity(n),
            weight: grid.cell_weight(),
        };
        for i in 0..grid.n_theta {
            for j in 0..grid.n_phi {
                let x = grid.node_state(i, j);
                let r = bloch_of_density(&ch.pushforward_density(x.rep()));
                let s = 1.0 - (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
                let det = s / 4.0;
                if det < SINGULAR_DET {
                    return Err(Error::SingularPushforward { det });
                }
                k.rx.push(r[0]);
                k.ry.push(r[1]);
                k.rz.push(r[2]);
                k.factor.push(s * s);
                k.targets.push(grid.node_bloch(i, j));
            }
        }
        Ok(k)
    }

    /// `(Kf)(n_a) = Σ_b (1 − |r'_b|²)² / (1 − r'_b·n_a)³ · f_b · w`
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let src: Vec<f64> = self.factor.iter().zip(f).map(|(a, b)| a * b * self.weight).collect();
        self.targets
            .par_iter()
            .map(|t| {
                let mut acc = 0.0;
                for (((s, x), y), z) in src.iter().zip(&self.rx).zip(&self.ry).zip(&self.rz) {
                    let q = 1.0 - (x * t[0] + y * t[1] + z * t[2]);
                    acc += s / (q * q * q);
                }
                acc
            })
            .collect()
    }
}

fn check_qubit_primitive(ch: &KrausChannel) -> Result<()> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: ch.dim() });
    }
    let report = is_primitive(ch);
    if !report.irreducible {
        return Err(Error::NotIrreducible);
    }
    if !report.primitive {
        return Err(Error::InvalidChannel(match report.period {
            Some(m) => format!("channel has period {m}; a primitive channel is required"),
            None => "channel is not primitive".to_owned(),
        }));
    }
    Ok(())
}

/// One application of the quadrature kernel to `f`, unnormalized.
pub fn apply_kernel(ch: &KrausChannel, f: &BlochGridDensity) -> Result<Vec<f64>> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: ch.dim() });
    }
    Ok(Kernel::build(ch, &f.grid)?.apply(&f.values))
}

/// `‖Kf − f‖_∞` with no renormalization; for `f ≡ 1` under a unital
/// channel this is pure quadrature error.
pub fn kernel_residual(ch: &KrausChannel, f: &BlochGridDensity) -> Result<f64> {
    let kf = apply_kernel(ch, f)?;
    Ok(kf.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSolution {
    pub density: BlochGridDensity,
    /// `‖Kf/⟨Kf⟩ − f‖_∞` before each update, `⟨·⟩` the grid integral.
    pub residual_history: Vec<f64>,
    pub sweeps: usize,
    /// Whether the damped update was switched on.
    pub damped: bool,
    /// `|⟨K f⟩ − 1|` at the returned `f`: the quadrature's mass defect.
    pub mass_defect: f64,
}

impl FixedPointSolution {
    pub fn residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Iterates `f ← Kf` from `f ≡ 1`, renormalizing each sweep; once the
/// residual grows after the warm-up sweeps the update becomes
/// `f ← ½(f + Kf)` for the rest of the run.
pub fn solve_density_fixed_point(
    ch: &KrausChannel,
    grid: &BlochGrid,
    max_sweeps: usize,
    tol: f64,
) -> Result<FixedPointSolution> {
    check_qubit_primitive(ch)?;
    let kernel = Kernel::build(ch, grid)?;
    let w = grid.cell_weight();
    let mut f = vec![1.0; grid.len()];
    let mut history = Vec::new();
    let mut damped = false;
    for sweep in 1..=max_sweeps.max(1) {
        let kf = kernel.apply(&f);
        let mass = compensated_sum(&kf) * w;
        let next: Vec<f64> = kf.iter().map(|v| v / mass).collect();
        let residual = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if let Some(&prev) = history.last() {
            if sweep > WARMUP_SWEEPS && residual > prev {
                damped = true;
            }
        }
        history.push(residual);
        if residual <= tol {
            return Ok(FixedPointSolution {
                density: BlochGridDensity { grid: grid.clone(), values: f },
                residual_history: history,
                sweeps: sweep,
                damped,
                mass_defect: (mass - 1.0).abs(),
            });
        }
        f = if damped { f.iter().zip(&next).map(|(a, b)| DAMPING * a + (1.0 - DAMPING) * b).collect() } else { next };
    }
    Err(Error::NoConvergence { residual: history.last().copied().unwrap_or(f64::NAN), iters: max_sweeps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::catalog;
    use crate::gap::GapSampler;
    use crate::linalg::real_matrix;

    #[test]
    fn grid_geometry() {
        let g = BlochGrid::new(12, 8).unwrap();
        assert!((g.cell_weight() * g.len() as f64 - 1.0).abs() < 1e-15);
        assert!((BlochGridDensity::constant(g.clone()).integral() - 1.0).abs() < 1e-12);
        for i in 0..12 {
            for j in 0..8 {
                let x = g.node_state(i, j);
                assert_eq!(g.cell_of(&x).unwrap(), (i, j));
                let n = bloch_vector(&x).unwrap();
                let m = g.node_bloch(i, j);
                assert!((0..3).all(|k| (n[k] - m[k]).abs() < 1e-12));
                // Bloch vector of the projector agrees with the ray formula.
                assert!((0..3).all(|k| (bloch_of_density(&x.projector())[k] - n[k]).abs() < 1e-12));
            }
        }
        let coarse = BlochGrid::new(3, 4).unwrap();
        let masses = BlochGridDensity::constant(g.clone()).coarsen(&coarse).unwrap();
        assert!(masses.iter().all(|m| (m - 1.0 / 12.0).abs() < 1e-12));
        assert!(BlochGridDensity::constant(g).coarsen(&BlochGrid::new(5, 4).unwrap()).is_err());
    }

    /// For depolarizing channels `r' = s·n'`, and in `cos` of the angle
    /// `∫ (1 − s²)² (1 − s t)^{-3} dt / 2 = 1` exactly, so `K1 = 1`.
    #[test]
    fn constant_is_fixed_for_depolarizing() {
        let dep = catalog::depolarizing(2, 0.5).unwrap();
        let coarse = kernel_residual(&dep, &BlochGridDensity::constant(BlochGrid::new(40, 20).unwrap())).unwrap();
        let fine = kernel_residual(&dep, &BlochGridDensity::constant(BlochGrid::new(80, 40).unwrap())).unwrap();
        assert!(fine < 1e-2 && fine < coarse, "{coarse} {fine}");
        let sol = solve_density_fixed_point(&dep, &BlochGrid::new(40, 20).unwrap(), 50, 1e-10).unwrap();
        assert!(sol.density.values.iter().all(|v| (v - 1.0).abs() < 1e-2));
        assert!((sol.density.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn projection_channel_gives_gap_density() {
        let rho0 = catalog::diagonal_density(&[2.0 / 3.0, 1.0 / 3.0]);
        let ch = catalog::projection(&rho0).unwrap();
        let grid = BlochGrid::new(60, 30).unwrap();
        let sol = solve_density_fixed_point(&ch, &grid, 20, 1e-9).unwrap();
        assert!(sol.sweeps <= 3);
        let gap = GapSampler::from_matrix(rho0).unwrap();
        for i in 0..grid.n_theta {
            for j in (0..grid.n_phi).step_by(7) {
                let oracle = gap.gap_density(&grid.node_state(i, j)).unwrap();
                assert!((sol.density.value(i, j) - oracle).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn perturbed_depolarizing_converges_monotonically() {
        let rho0 = catalog::diagonal_density(&[2.0 / 3.0, 1.0 / 3.0]);
        let ch = catalog::perturbed_depolarizing(0.5, &rho0).unwrap();
        let sol = solve_density_fixed_point(&ch, &BlochGrid::new(40, 20).unwrap(), 100, 1e-10).unwrap();
        let h = &sol.residual_history;
        assert!(h[WARMUP_SWEEPS..].windows(2).all(|w| w[1] <= w[0]), "{h:?}");
        assert!(sol.density.values.iter().all(|&v| v >= 0.0));
        assert!((sol.density.integral() - 1.0).abs() < 1e-6);
        // mass drifts toward ρ0's dominant direction ê1 (north pole)
        assert!(sol.density.value(0, 0) > sol.density.value(39, 0));
    }

    #[test]
    fn preconditions() {
        let grid = BlochGrid::new(10, 6).unwrap();
        assert!(matches!(
            solve_density_fixed_point(&catalog::depolarizing(3, 0.5).unwrap(), &grid, 5, 1e-6),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(solve_density_fixed_point(&catalog::swap(), &grid, 5, 1e-6).is_err());
        // v1 = |e2><x0|, v2 = |e+><x0⊥| with x0 a grid node: Φ*(|x0><x0|) is pure.
        let x0 = grid.node_state(0, 0);
        let (a, b) = (x0.rep()[0], x0.rep()[1]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bra0 = ComplexMatrix::from_row_slice(1, 2, &[a.conj(), b.conj()]);
        let bra1 = ComplexMatrix::from_row_slice(1, 2, &[-b, a]);
        let v1 = real_matrix(2, 1, &[0.0, 1.0]) * bra0;
        let v2 = real_matrix(2, 1, &[s, s]) * bra1;
        let ch = KrausChannel::new(vec![v1, v2]).unwrap();
        assert!(is_primitive(&ch).primitive);
        assert!(matches!(solve_density_fixed_point(&ch, &grid, 5, 1e-6), Err(Error::SingularPushforward { .. })));
        assert!(matches!(
            solve_density_fixed_point(&catalog::depolarizing(2, 0.5).unwrap(), &grid, 1, 1e-300),
            Err(Error::NoConvergence { .. })
        ));
    }
}
