//! Cycle densities through the normalized spectrum: t_p(C_k) = Σ μ_i^k
//! with μ_i = λ_i/(np).

use crate::error::{capacity, domain, Result};
use crate::graph::Graph;
use nalgebra::DMatrix;

/// t_p(C_k) for 3 <= k <= k_max via a full symmetric eigendecomposition of
/// the adjacency matrix. Agrees with trace-of-walk computations to high
/// relative accuracy; the default capacity limit is n <= 4096.
pub fn spectral_cycle_counts(g: &Graph, p: f64, k_max: usize) -> Result<Vec<(usize, f64)>> {
    if p <= 0.0 {
        return domain("spectral_cycle_counts: p > 0 required");
    }
    if k_max < 3 {
        return domain("spectral_cycle_counts: k_max >= 3");
    }
    let n = g.n();
    if n > 4096 {
        return capacity("spectral_cycle_counts: n <= 4096");
    }
    if n == 0 {
        return Ok((3..=k_max).map(|k| (k, 0.0)).collect());
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u as usize, v as usize)] = 1.0;
        a[(v as usize, u as usize)] = 1.0;
    }
    let eigen = a.symmetric_eigen();
    let np = n as f64 * p;
    let mus: Vec<f64> = eigen.eigenvalues.iter().map(|l| l / np).collect();
    let mut out = Vec::with_capacity(k_max - 2);
    for k in 3..=k_max {
        let t: f64 = mus.iter().map(|m| m.powi(k as i32)).sum();
        out.push((k, t));
    }
    Ok(out)
}
