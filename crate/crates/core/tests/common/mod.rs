//! Closed forms shared by integration tests.
#![allow(dead_code)]

use qtraj::linalg::{hermitian_eigen, ComplexMatrix};

/// Complete homogeneous symmetric polynomial `h_m(a)`.
pub fn complete_homogeneous(a: &[f64], m: usize) -> f64 {
    // h[k] over the first t variables: h_k(a_1..a_t) = h_k(a_1..a_{t-1}) + a_t·h_{k-1}(a_1..a_t).
    let mut h = vec![0.0; m + 1];
    h[0] = 1.0;
    for &x in a {
        for k in 1..=m {
            h[k] += x * h[k - 1];
        }
    }
    h[m]
}

/// Exact variance of `1/g` under `GAP_ρ`, where `g` is the density against
/// the uniform measure: `Var = E_unif[1/g] − 1` with
/// `1/g = (det ρ / d)·<x|ρ⁻¹|x>^(d+1)` and, for uniform unit `x` in `C^d`,
/// `E[<x|A|x>^m] = m!(d−1)!/(m+d−1)! · h_m(eigenvalues of A)`.
pub fn inverse_density_variance(rho: &ComplexMatrix) -> f64 {
    let (eig, _) = hermitian_eigen(rho);
    let d = eig.len();
    let m = d + 1;
    let det: f64 = eig.iter().product();
    let inv: Vec<f64> = eig.iter().map(|l| 1.0 / l).collect();
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let coefficient = fact(m) * fact(d - 1) / fact(m + d - 1);
    det / d as f64 * coefficient * complete_homogeneous(&inv, m) - 1.0
}
