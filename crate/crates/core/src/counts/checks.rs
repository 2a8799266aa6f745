//! Exact inequality checks (C4 lower bound, walk lower bound) and the
//! DEG / path-uniformity condition checks.

use crate::error::{domain, Result};
use crate::graph::Graph;
use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::passes::{pair_walk_moment, path_count_row, walk_counts};

/// Margins for the exact counting inequalities. Comparisons are carried
/// out in exact integer arithmetic after clearing denominators.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    /// hom(C4) >= n d̄²(d̄-1)²/(n-1) + n d̄², exact integer comparison.
    pub c4_holds: bool,
    /// hom(C4) minus the bound, as a float margin.
    pub c4_margin: f64,
    /// hom(P_ell) >= n d̄^ell for ell = 1..=5.
    pub walks_hold: Vec<(usize, bool, f64)>,
}

/// Checks hom(C4,G) >= n·d̄²(d̄−1)²/(n−1) + n·d̄² and hom(P_ell) >= n·d̄^ell.
pub fn inequality_checks(g: &Graph) -> Result<InequalityReport> {
    let n = g.n();
    if n < 2 {
        return domain("inequality_checks: need n >= 2");
    }
    let m = g.m() as u128;
    let hom_c4 = pair_walk_moment(g, &[2, 2])?;
    // multiply through by n^3 (n-1): hom(C4) n^3 (n-1) >= 4m²(2m-n)² + 4m²n²(n-1)
    let nn = BigUint::from(n);
    let lhs = BigUint::from(hom_c4) * nn.pow(3) * BigUint::from(n - 1);
    let diff: BigUint = if 2 * m >= n as u128 {
        BigUint::from(2 * m - n as u128)
    } else {
        BigUint::from(n as u128 - 2 * m)
    };
    let rhs = BigUint::from(4u32) * BigUint::from(m) * BigUint::from(m) * (&diff * &diff)
        + BigUint::from(4u32)
            * BigUint::from(m)
            * BigUint::from(m)
            * nn.pow(2)
            * BigUint::from(n - 1);
    let c4_holds = lhs >= rhs;
    let c4_margin = big_to_f64(&lhs) - big_to_f64(&rhs);

    let mut walks_hold = Vec::new();
    for ell in 1..=5usize {
        // hom(P_ell) n^{ell-1} >= (2m)^ell
        let hom_p = walk_counts(g, ell)?.total();
        let lhs = BigUint::from(hom_p) * nn.pow((ell - 1) as u32);
        let rhs = BigUint::from(2 * m).pow(ell as u32);
        walks_hold.push((ell, lhs >= rhs, big_to_f64(&lhs) - big_to_f64(&rhs)));
    }
    Ok(InequalityReport {
        c4_holds,
        c4_margin,
        walks_hold,
    })
}

fn big_to_f64(x: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    if x.is_zero() {
        0.0
    } else {
        x.to_f64().unwrap_or(f64::MAX)
    }
}

/// Result of the DEG and path-uniformity checks.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    /// DEG: max degree <= M p n.
    pub deg_pass: bool,
    pub deg_worst: (usize, usize, f64),
    /// path uniformity: p_{ell-1}(u,v) <= M n^{ell-2} p^{ell-1}.
    pub path_uniform_pass: bool,
    pub path_worst: (usize, usize, u64, f64),
    pub pairs_checked: u64,
    pub pass: bool,
}

/// Checks DEG (Δ(G) <= M·p·n) exactly and path-uniformity
/// (p_{ell-1}(u,v) <= M·n^{ell-2}·p^{ell-1}) on sampled source rows plus,
/// for ell = 3, every adjacent pair exactly. Sampling is seeded; sampled
/// coverage is reported via `pairs_checked`.
pub fn condition_checks(
    g: &Graph,
    p: f64,
    ell: usize,
    m_const: f64,
    sampled_sources: usize,
    seed: u64,
) -> Result<ConditionReport> {
    if ell < 2 {
        return domain("condition_checks: ell >= 2");
    }
    if p <= 0.0 || m_const <= 0.0 {
        return domain("condition_checks: p, M > 0");
    }
    let n = g.n();
    let deg_bound = m_const * p * n as f64;
    let (worst_v, worst_deg) = (0..n)
        .map(|v| (v, g.degree(v)))
        .max_by_key(|&(_, d)| d)
        .unwrap_or((0, 0));
    let deg_pass = (worst_deg as f64) <= deg_bound;

    let path_bound = m_const * (n as f64).powi(ell as i32 - 2) * p.powi(ell as i32 - 1);
    let mut worst: (usize, usize, u64) = (0, 0, 0);
    let mut pairs_checked = 0u64;
    // exact sweep over adjacent pairs when the walk length is 2 (codegree)
    if ell == 3 {
        for u in 0..n {
            for &v in g.neighbors(u) {
                let v = v as usize;
                if v < u {
                    continue;
                }
                let (small, anchor) = if g.degree(u) <= g.degree(v) {
                    (g.neighbors(u), v)
                } else {
                    (g.neighbors(v), u)
                };
                let mut common = 0u64;
                for &x in small {
                    if g.has_edge(x as usize, anchor) {
                        common += 1;
                    }
                }
                pairs_checked += 1;
                if common > worst.2 {
                    worst = (u, v, common);
                }
            }
        }
    }
    // sampled source rows cover all pairs out of each sampled vertex
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sources: Vec<usize> = if sampled_sources >= n {
        (0..n).collect()
    } else {
        (0..sampled_sources).map(|_| rng.gen_range(0..n)).collect()
    };
    for u in sources {
        let row = path_count_row(g, u, ell - 1, u64::MAX)?;
        for (v, &c) in row.iter().enumerate() {
            if v == u {
                continue;
            }
            pairs_checked += 1;
            if c > worst.2 {
                worst = (u, v, c);
            }
        }
    }
    let path_uniform_pass = (worst.2 as f64) <= path_bound;
    Ok(ConditionReport {
        deg_pass,
        deg_worst: (worst_v, worst_deg, deg_bound),
        path_uniform_pass,
        path_worst: (worst.0, worst.1, worst.2, path_bound),
        pairs_checked,
        pass: deg_pass && path_uniform_pass,
    })
}
