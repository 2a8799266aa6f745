//! Theta-graph aggregations and semiembedding counts. The hom flavor
//! aggregates walk counts; the simple-paths flavor aggregates exact
//! simple-path counts, which is the quantity appearing in the sparse
//! counting-lemma hypotheses.

use crate::error::{capacity, domain, Result};
use crate::graph::Graph;
use crate::motif::Motif;
use rayon::prelude::*;

use super::passes::{pair_walk_moment, path_count_row};

/// Normalized theta count for H_{k,ell}.
///
/// hom flavor: Σ_{u,v} w_ell(u,v)^k / (p^{k·ell} n^{2+k(ell-1)}), pairs
/// with u = v included (homomorphism semantics). simple_paths flavor:
/// Σ_{u≠v} p_ell(u,v)^k with the same normalization.
pub fn theta_counts(
    g: &Graph,
    p: f64,
    k: usize,
    ell: usize,
    simple_paths: bool,
) -> Result<f64> {
    if p <= 0.0 {
        return domain("theta_counts: p > 0");
    }
    if k == 0 || ell == 0 {
        return domain("theta_counts: k, ell >= 1");
    }
    let n = g.n() as f64;
    let norm = p.powi((k * ell) as i32) * n.powi((2 + k * (ell - 1)) as i32);
    let raw: u128 = if simple_paths {
        if k > 8 {
            return capacity("theta_counts: k <= 8");
        }
        (0..g.n())
            .into_par_iter()
            .map(|u| {
                let row = path_count_row(g, u, ell, u64::MAX)?;
                let mut acc: u128 = 0;
                for (v, &c) in row.iter().enumerate() {
                    if v != u && c > 0 {
                        let mut term: u128 = 1;
                        for _ in 0..k {
                            term = term.checked_mul(c as u128).ok_or_else(|| {
                                crate::error::Error::Capacity("theta power overflow".into())
                            })?;
                        }
                        acc += term;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<u128>>>()?
            .into_iter()
            .sum()
    } else {
        pair_walk_moment(g, &vec![ell; k])?
    };
    Ok(raw as f64 / norm)
}

/// Normalized semiembedding count s_p^+ of F_ell: homomorphisms of the
/// ell-subdivision of F that are injective on branch vertices and map each
/// subdivided edge to a simple path. `f` is the base loopless multigraph.
pub fn semiembedding_count(f: &Motif, ell: usize, g: &Graph, p: f64) -> Result<f64> {
    if f.k() > 5 {
        return capacity("semiembedding_count: |F| <= 5");
    }
    if p <= 0.0 {
        return domain("semiembedding_count: p > 0");
    }
    if ell == 0 {
        return domain("semiembedding_count: ell >= 1");
    }
    let n = g.n();
    let kf = f.k();
    if kf > n {
        return Ok(0.0);
    }
    // edges grouped by later endpoint for early multiplication
    let mut edges_at: Vec<Vec<usize>> = vec![Vec::new(); kf];
    for &(u, v) in f.edges() {
        edges_at[v as usize].push(u as usize);
    }
    struct Ctx<'a> {
        g: &'a Graph,
        ell: usize,
        rows: std::collections::HashMap<usize, Vec<u64>>,
        edges_at: Vec<Vec<usize>>,
    }
    impl Ctx<'_> {
        fn row(&mut self, u: usize) -> Result<&Vec<u64>> {
            if !self.rows.contains_key(&u) {
                let computed = path_count_row(self.g, u, self.ell, u64::MAX)?;
                self.rows.insert(u, computed);
            }
            Ok(&self.rows[&u])
        }
        fn descend(&mut self, assign: &mut Vec<usize>, weight: u128, total: &mut u128) -> Result<()> {
            let depth = assign.len();
            if depth == self.edges_at.len() {
                *total += weight;
                return Ok(());
            }
            'cand: for cand in 0..self.g.n() {
                if assign.contains(&cand) {
                    continue;
                }
                let mut w = weight;
                for i in 0..self.edges_at[depth].len() {
                    let u = self.edges_at[depth][i];
                    let c = self.row(assign[u])?[cand] as u128;
                    if c == 0 {
                        continue 'cand;
                    }
                    w = w.checked_mul(c).ok_or_else(|| {
                        crate::error::Error::Capacity("semiembedding overflow".into())
                    })?;
                }
                assign.push(cand);
                self.descend(assign, w, total)?;
                assign.pop();
            }
            Ok(())
        }
    }
    let mut ctx = Ctx {
        g,
        ell,
        rows: std::collections::HashMap::new(),
        edges_at,
    };
    let mut total: u128 = 0;
    ctx.descend(&mut Vec::with_capacity(kf), 1, &mut total)?;
    let n_f = n as f64;
    let total_vertices = kf + f.e() * (ell - 1);
    let falling: f64 = (0..total_vertices).map(|i| n_f - i as f64).product();
    let e_sub = (f.e() * ell) as i32;
    Ok(total as f64 / (falling * p.powi(e_sub)))
}
