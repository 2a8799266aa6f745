//! Shared exact-counting passes over a graph: per-source walk rows, closed
//! walk diagonals, tree-homomorphism message passing, and simple-path
//! counting. Everything here returns exact integers with explicit
//! capacity guards instead of silent overflow.

use crate::error::{capacity, domain, Result};
use crate::graph::Graph;
use rayon::prelude::*;

/// Checks that all walk-row values fit u64 and products over `lengths`
/// summed over n^2 pairs fit u128.
fn guard_walk_lengths(g: &Graph, lengths: &[usize]) -> Result<()> {
    let delta = g.max_degree().max(1) as f64;
    let n = g.n().max(1) as f64;
    let mut product_bits = 2.0 * n.log2();
    for &l in lengths {
        if l == 0 {
            return domain("walk lengths must be >= 1");
        }
        if l > 8 {
            return capacity("walk lengths are limited to 8");
        }
        let row_bits = (l as f64 - 1.0) * delta.log2() + n.log2();
        if row_bits > 62.0 {
            return capacity(format!(
                "walk counts of length {l} may overflow u64 on this graph"
            ));
        }
        product_bits += (l as f64 - 1.0) * delta.log2() + n.log2();
    }
    if product_bits > 126.0 {
        return capacity("walk-product accumulation may overflow u128");
    }
    Ok(())
}

/// Computes w_t(u, ·) into `out` (length n), using `scratch` of the same
/// length. Both are cleared here.
fn walk_row(g: &Graph, u: usize, t: usize, out: &mut Vec<u64>, scratch: &mut Vec<u64>) {
    out.iter_mut().for_each(|x| *x = 0);
    if t == 1 {
        for &v in g.neighbors(u) {
            out[v as usize] = 1;
        }
        return;
    }
    // w_2 by wedge accumulation
    for &y in g.neighbors(u) {
        for &z in g.neighbors(y as usize) {
            out[z as usize] += 1;
        }
    }
    for _ in 3..=t {
        scratch.iter_mut().for_each(|x| *x = 0);
        for v in 0..g.n() {
            let mut s = 0u64;
            for &w in g.neighbors(v) {
                s += out[w as usize];
            }
            scratch[v] = s;
        }
        std::mem::swap(out, scratch);
    }
}

/// Σ over ordered pairs (u,v), including u = v, of Π_i w_{lengths[i]}(u,v).
///
/// This single aggregation covers homomorphism counts of every cycle
/// (lengths [a, k-a]), theta graph (k copies of ℓ) and two-pole book/banana
/// shape (arbitrary length multiset between the poles).
pub fn pair_walk_moment(g: &Graph, lengths: &[usize]) -> Result<u128> {
    guard_walk_lengths(g, lengths)?;
    let n = g.n();
    if n == 0 || lengths.is_empty() {
        return Ok(0);
    }
    let mut distinct: Vec<usize> = lengths.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mult: Vec<u32> = distinct
        .iter()
        .map(|&d| lengths.iter().filter(|&&l| l == d).count() as u32)
        .collect();
    let total: u128 = (0..n)
        .into_par_iter()
        .fold(
            || (vec![vec![0u64; n]; distinct.len()], vec![0u64; n], 0u128),
            |(mut rows, mut scratch, mut acc), u| {
                for (i, &l) in distinct.iter().enumerate() {
                    // recomputing shorter prefixes is cheap relative to the
                    // final dense steps; keep rows independent for clarity
                    let (row, rest) = rows.split_at_mut(i + 1);
                    walk_row(g, u, l, &mut row[i], &mut scratch);
                    let _ = rest;
                }
                for v in 0..n {
                    let mut term: u128 = 1;
                    for (i, &m) in mult.iter().enumerate() {
                        let w = rows[i][v] as u128;
                        if w == 0 {
                            term = 0;
                            break;
                        }
                        for _ in 0..m {
                            term *= w;
                        }
                    }
                    acc += term;
                }
                (rows, scratch, acc)
            },
        )
        .map(|(_, _, acc)| acc)
        .reduce(|| 0u128, |a, b| a + b);
    Ok(total)
}

/// Closed-walk diagonal c_k(v) = (A^k)_{vv} for every v.
pub fn closed_walk_vec(g: &Graph, k: usize) -> Result<Vec<u128>> {
    let a = k / 2;
    let b = k - a;
    guard_walk_lengths(g, &[a.max(1), b])?;
    if k < 2 {
        return domain("closed walks need length >= 2");
    }
    let n = g.n();
    let results: Vec<u128> = (0..n)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], vec![0u64; n], vec![0u64; n], Vec::new()),
            |(mut ra, mut rb, mut scratch, mut out), u| {
                walk_row(g, u, a.max(1), &mut ra, &mut scratch);
                if b == a {
                    let s: u128 = ra.iter().map(|&x| (x as u128) * (x as u128)).sum::<u128>();
                    // c_k(u) = Σ_v w_a(u,v)^2 when k = 2a
                    out.push((u, s));
                } else {
                    walk_row(g, u, b, &mut rb, &mut scratch);
                    let s: u128 = ra
                        .iter()
                        .zip(rb.iter())
                        .map(|(&x, &y)| (x as u128) * (y as u128))
                        .sum();
                    out.push((u, s));
                }
                (ra, rb, scratch, out)
            },
        )
        .map(|(_, _, _, out)| out)
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        })
        .into_iter()
        .fold(vec![0u128; n], |mut acc, (u, s)| {
            acc[u] = s;
            acc
        });
    Ok(results)
}

/// A tree on vertices 0..k given by adjacency lists.
pub(crate) struct TreeShape {
    pub adj: Vec<Vec<usize>>,
}

impl TreeShape {
    pub fn from_edges(k: usize, edges: &[(u8, u8)]) -> TreeShape {
        let mut adj = vec![Vec::new(); k];
        for &(u, v) in edges {
            adj[u as usize].push(v as usize);
            adj[v as usize].push(u as usize);
        }
        TreeShape { adj }
    }
}

/// Message vector of a rooted tree: entry v is the number of homomorphisms
/// of the tree into G mapping the root to v.
pub(crate) fn tree_message(g: &Graph, tree: &TreeShape, root: usize) -> Result<Vec<u128>> {
    let k = tree.adj.len();
    let bits = (k as f64) * (g.n().max(2) as f64).log2();
    if bits > 126.0 {
        return capacity("tree homomorphism count may overflow u128");
    }
    fn message(
        g: &Graph,
        tree: &TreeShape,
        v: usize,
        parent: Option<usize>,
    ) -> Vec<u128> {
        let n = g.n();
        let mut msg = vec![1u128; n];
        for &c in &tree.adj[v] {
            if Some(c) == parent {
                continue;
            }
            let child = message(g, tree, c, Some(v));
            // pull the child message across an edge of G
            let mut pulled = vec![0u128; n];
            for (w, slot) in pulled.iter_mut().enumerate() {
                let mut s: u128 = 0;
                for &x in g.neighbors(w) {
                    s += child[x as usize];
                }
                *slot = s;
            }
            for w in 0..n {
                msg[w] *= pulled[w];
            }
        }
        msg
    }
    Ok(message(g, tree, root, None))
}

/// hom(T, G) for a tree motif.
pub(crate) fn tree_hom(g: &Graph, tree: &TreeShape) -> Result<u128> {
    Ok(tree_message(g, tree, 0)?.iter().sum())
}

/// On-demand walk counts w_t(u, v). Rows are computed per source; a dense
/// n×n table is materialized lazily for point queries when n is within the
/// configured threshold.
pub struct WalkMatrixHandle<'g> {
    g: &'g Graph,
    t: usize,
    dense_threshold: usize,
    dense: std::cell::RefCell<Option<Vec<u64>>>,
}

pub fn walk_counts(g: &Graph, t: usize) -> Result<WalkMatrixHandle<'_>> {
    walk_counts_with_threshold(g, t, 4096)
}

pub fn walk_counts_with_threshold(
    g: &Graph,
    t: usize,
    dense_threshold: usize,
) -> Result<WalkMatrixHandle<'_>> {
    if t == 0 {
        return domain("walk_counts: t >= 1");
    }
    guard_walk_lengths(g, &[t])?;
    Ok(WalkMatrixHandle {
        g,
        t,
        dense_threshold,
        dense: std::cell::RefCell::new(None),
    })
}

impl<'g> WalkMatrixHandle<'g> {
    pub fn t(&self) -> usize {
        self.t
    }

    /// w_t(u, ·) as a fresh row, O(t·m) single-source cost.
    pub fn row(&self, u: usize) -> Vec<u64> {
        let n = self.g.n();
        let mut out = vec![0u64; n];
        let mut scratch = vec![0u64; n];
        walk_row(self.g, u, self.t, &mut out, &mut scratch);
        out
    }

    pub fn value(&self, u: usize, v: usize) -> u64 {
        if self.g.n() <= self.dense_threshold {
            let mut cache = self.dense.borrow_mut();
            let n = self.g.n();
            let table = cache.get_or_insert_with(|| {
                let mut all = vec![0u64; n * n];
                let mut scratch = vec![0u64; n];
                let mut row = vec![0u64; n];
                for s in 0..n {
                    walk_row(self.g, s, self.t, &mut row, &mut scratch);
                    all[s * n..(s + 1) * n].copy_from_slice(&row);
                }
                all
            });
            table[u * self.g.n() + v]
        } else {
            self.row(u)[v]
        }
    }

    /// w_t(u) = w_t(u, V).
    pub fn source_total(&self, u: usize) -> u128 {
        self.row(u).iter().map(|&x| x as u128).sum()
    }

    /// Σ_{u,v} w_t(u,v) = hom of the path with t edges.
    pub fn total(&self) -> u128 {
        let (g, t) = (self.g, self.t);
        (0..g.n())
            .into_par_iter()
            .map_init(
                || (vec![0u64; g.n()], vec![0u64; g.n()]),
                |(out, scratch), u| {
                    walk_row(g, u, t, out, scratch);
                    out.iter().map(|&x| x as u128).sum::<u128>()
                },
            )
            .sum()
    }
}

/// Exact count of simple paths with `ell` edges from `u` to each endpoint:
/// interior vertices are pairwise distinct and exclude both endpoints.
/// Exponential DFS; `ell <= 6` and a node budget keep it honest.
pub fn path_count_row(g: &Graph, u: usize, ell: usize, budget: u64) -> Result<Vec<u64>> {
    if ell == 0 || ell > 6 {
        return capacity("path counting is limited to 1 <= ell <= 6");
    }
    let n = g.n();
    let mut row = vec![0u64; n];
    let mut visited = vec![false; n];
    visited[u] = true;
    let mut nodes = 0u64;
    fn dfs(
        g: &Graph,
        at: usize,
        depth: usize,
        ell: usize,
        visited: &mut [bool],
        row: &mut [u64],
        nodes: &mut u64,
        budget: u64,
    ) -> Result<()> {
        for &w in g.neighbors(at) {
            let w = w as usize;
            *nodes += 1;
            if *nodes > budget {
                return capacity("path_count budget exhausted");
            }
            if depth + 1 == ell {
                if !visited[w] {
                    row[w] += 1;
                }
            } else if !visited[w] {
                visited[w] = true;
                dfs(g, w, depth + 1, ell, visited, row, nodes, budget)?;
                visited[w] = false;
            }
        }
        Ok(())
    }
    dfs(g, u, 0, ell, &mut visited, &mut row, &mut nodes, budget)?;
    row[u] = 0;
    Ok(row)
}

/// p_ell(u, v) for a single pair; `u != v`.
pub fn path_counts(g: &Graph, ell: usize, u: usize, v: usize) -> Result<u64> {
    if u == v {
        return domain("path_counts: endpoints must differ");
    }
    if u >= g.n() || v >= g.n() {
        return domain("path_counts: vertex out of range");
    }
    Ok(path_count_row(g, u, ell, u64::MAX)?[v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motif::Motif;

    fn cycle_graph(k: usize) -> Graph {
        let edges: Vec<(u32, u32)> = (0..k)
            .map(|i| (i as u32, ((i + 1) % k) as u32))
            .collect();
        Graph::from_edges(k, &edges).unwrap()
    }

    #[test]
    fn walk_rows_on_path() {
        // path u - v: w2(u,u) = 1, w2(u,v) = 0
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let h = walk_counts(&g, 2).unwrap();
        assert_eq!(h.value(0, 0), 1);
        assert_eq!(h.value(0, 1), 0);
    }

    #[test]
    fn closed_walks_on_triangle() {
        let g = cycle_graph(3);
        let c3 = closed_walk_vec(&g, 3).unwrap();
        assert_eq!(c3, vec![2, 2, 2]);
        // sum of diagonal = hom(C3) = 6
        assert_eq!(c3.iter().sum::<u128>(), 6);
    }

    #[test]
    fn walk_total_is_path_hom() {
        let g = cycle_graph(5);
        let h = walk_counts(&g, 1).unwrap();
        assert_eq!(h.total(), 2 * 5);
        // Σ_u w_1(u) = 2m on a random graph
        let rec = crate::sampler::sample_gnp(40, 0.3, 2).unwrap();
        let h = walk_counts(&rec.graph, 1).unwrap();
        assert_eq!(h.total(), 2 * rec.graph.m() as u128);
    }

    #[test]
    fn pair_moment_matches_trace_on_k3() {
        let g = cycle_graph(3);
        // hom(C3) = 6, lengths [1,2]
        assert_eq!(pair_walk_moment(&g, &[1, 2]).unwrap(), 6);
        // hom(C4) on K3: tr(A^4), A = J - I on 3 vertices: eigen 2,-1,-1 -> 16+1+1 = 18
        assert_eq!(pair_walk_moment(&g, &[2, 2]).unwrap(), 18);
    }

    #[test]
    fn paths_on_c5() {
        let g = cycle_graph(5);
        // adjacent u,v: one simple path of length 4 (the long way around)
        assert_eq!(path_counts(&g, 4, 0, 1).unwrap(), 1);
        assert_eq!(path_counts(&g, 1, 0, 1).unwrap(), 1);
    }

    #[test]
    fn paths_on_k4() {
        let mut edges = Vec::new();
        for u in 0..4u32 {
            for v in (u + 1)..4 {
                edges.push((u, v));
            }
        }
        let g = Graph::from_edges(4, &edges).unwrap();
        assert_eq!(path_counts(&g, 2, 0, 1).unwrap(), 2);
    }

    #[test]
    fn path_row_matches_exhaustive_on_random_graph() {
        let rec = crate::sampler::sample_gnp(60, 0.15, 21).unwrap();
        let g = &rec.graph;
        let row = path_count_row(g, 0, 3, u64::MAX).unwrap();
        // brute-force triple loop
        for v in 1..g.n() {
            let mut count = 0u64;
            for a in 0..g.n() {
                for b in 0..g.n() {
                    if a == b || a == 0 || b == 0 || a == v || b == v {
                        continue;
                    }
                    if g.has_edge(0, a) && g.has_edge(a, b) && g.has_edge(b, v) {
                        count += 1;
                    }
                }
            }
            assert_eq!(row[v], count, "endpoint {v}");
        }
    }

    #[test]
    fn tree_messages_count_star_homs() {
        let g = cycle_graph(4);
        let star = Motif::star(2).unwrap();
        let shape = TreeShape::from_edges(star.k(), star.edges());
        // hom(star2, C4) = Σ deg^2 = 16
        assert_eq!(tree_hom(&g, &shape).unwrap(), 16);
    }
}
