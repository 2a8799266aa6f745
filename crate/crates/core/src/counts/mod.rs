//! Exact motif statistics on graphs: homomorphism and embedding counts
//! with shape-specialized fast paths, the normalized densities s_p / t_p,
//! and the derived statistics (spectral cycle counts, theta aggregations,
//! semiembeddings, flatness profiles, inequality and condition checks).
//!
//! The dispatcher routes a motif to the cheapest exact engine:
//! disconnected motifs factor over components, trees use message passing,
//! cycles and two-pole shapes (thetas, books, complete bipartite with a
//! side of 2) use per-source walk rows, one-center flowers use closed-walk
//! diagonals, and everything else falls back to budgeted backtracking.
//! Embeddings come from the quotient recursion
//! `emb(F) = hom(F) − Σ_σ emb(F/σ)` over independent vertex partitions.

mod checks;
mod flatness;
mod passes;
mod spectral;
mod theta;

pub use checks::{condition_checks, inequality_checks, ConditionReport, InequalityReport};
pub use flatness::{flatness_profile, FlatnessProfile};
pub use passes::{
    path_count_row, path_counts, walk_counts, walk_counts_with_threshold, WalkMatrixHandle,
};
pub use spectral::spectral_cycle_counts;
pub use theta::{semiembedding_count, theta_counts};

use crate::error::{capacity, domain, Result};
use crate::graph::Graph;
use crate::motif::Motif;
use num_bigint::BigUint;
use passes::TreeShape;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

/// Default node budget for the generic backtracking engine.
pub const DEFAULT_BACKTRACK_BUDGET: u64 = 500_000_000;

/// Exact counts of one motif in one graph with both normalizations.
#[derive(Clone, Debug)]
pub struct CountReport {
    pub motif: Motif,
    pub hom: BigUint,
    pub emb: BigUint,
    pub t_p: f64,
    pub s_p: f64,
    pub p: f64,
    pub method: String,
}

/// Reusable counting context: memoizes hom/emb values per canonical motif
/// and shares pass results across queries on the same graph.
pub struct Counter<'g> {
    g: &'g Graph,
    hom_memo: HashMap<(usize, Vec<(u8, u8)>), (u128, String)>,
    emb_memo: HashMap<(usize, Vec<(u8, u8)>), u128>,
    closed_walks: HashMap<usize, Vec<u128>>,
    budget: u64,
}

impl<'g> Counter<'g> {
    pub fn new(g: &'g Graph) -> Counter<'g> {
        Counter {
            g,
            hom_memo: HashMap::new(),
            emb_memo: HashMap::new(),
            closed_walks: HashMap::new(),
            budget: DEFAULT_BACKTRACK_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Counter<'g> {
        self.budget = budget;
        self
    }

    pub fn graph(&self) -> &Graph {
        self.g
    }

    /// Exact homomorphism count.
    pub fn hom(&mut self, f: &Motif) -> Result<u128> {
        Ok(self.hom_tagged(f)?.0)
    }

    fn hom_tagged(&mut self, f: &Motif) -> Result<(u128, String)> {
        if f.k() == 0 {
            return domain("motif needs at least one vertex");
        }
        if f.k() > 12 {
            return capacity("hom counting is limited to |F| <= 12");
        }
        let support = f.support();
        let key = (support.k(), support.canonical_key());
        if let Some(hit) = self.hom_memo.get(&key) {
            return Ok(hit.clone());
        }
        let out = self.hom_dispatch(&support)?;
        self.hom_memo.insert(key, out.clone());
        Ok(out)
    }

    fn hom_dispatch(&mut self, f: &Motif) -> Result<(u128, String)> {
        let n = self.g.n() as u128;
        if f.e() == 0 {
            let mut v: u128 = 1;
            for _ in 0..f.k() {
                v = v
                    .checked_mul(n)
                    .ok_or_else(|| crate::error::Error::Capacity("n^|F| overflow".into()))?;
            }
            return Ok((v, "empty".into()));
        }
        let comps = f.connected_components();
        if comps.len() > 1 {
            let mut total: u128 = 1;
            for comp in &comps {
                let sub = f.induced(comp);
                let (h, _) = self.hom_tagged(&sub)?;
                total = total
                    .checked_mul(h)
                    .ok_or_else(|| crate::error::Error::Capacity("component product overflow".into()))?;
            }
            return Ok((total, "components".into()));
        }
        // connected from here on
        if f.k() == 2 {
            return Ok((2 * self.g.m() as u128, "edge".into()));
        }
        if f.e() == f.k() - 1 {
            let shape = TreeShape::from_edges(f.k(), f.edges());
            return Ok((passes::tree_hom(self.g, &shape)?, "tree_dp".into()));
        }
        let degs = f.degrees();
        if degs.iter().all(|&d| d == 2) {
            // a connected 2-regular graph is the cycle C_k
            let k = f.k();
            let a = k / 2;
            return Ok((
                passes::pair_walk_moment(self.g, &[a, k - a])?,
                "cycle_walk".into(),
            ));
        }
        if let Some(lengths) = two_pole_decomposition(f) {
            return Ok((
                passes::pair_walk_moment(self.g, &lengths)?,
                "two_pole_walk".into(),
            ));
        }
        if let Some((petals, tree, root)) = flower_decomposition(f) {
            let mut msg = if tree.adj.len() > 1 {
                passes::tree_message(self.g, &tree, root)?
            } else {
                vec![1u128; self.g.n()]
            };
            for k in petals {
                let cw = self.closed_walk(k)?;
                for (m, c) in msg.iter_mut().zip(cw.iter()) {
                    *m = m.checked_mul(*c).ok_or_else(|| {
                        crate::error::Error::Capacity("flower product overflow".into())
                    })?;
                }
            }
            return Ok((msg.iter().sum(), "flower".into()));
        }
        Ok((
            hom_backtrack(self.g, f, self.budget)?,
            "backtrack".into(),
        ))
    }

    fn closed_walk(&mut self, k: usize) -> Result<Vec<u128>> {
        if let Some(v) = self.closed_walks.get(&k) {
            return Ok(v.clone());
        }
        let v = passes::closed_walk_vec(self.g, k)?;
        self.closed_walks.insert(k, v.clone());
        Ok(v)
    }

    /// Exact injective homomorphism (embedding) count via the quotient
    /// recursion over independent vertex partitions.
    pub fn emb(&mut self, f: &Motif) -> Result<u128> {
        if f.k() > 8 {
            return capacity("emb counting is limited to |F| <= 8");
        }
        if f.k() as usize > self.g.n() {
            return Ok(0);
        }
        let support = f.support();
        let key = (support.k(), support.canonical_key());
        if let Some(&hit) = self.emb_memo.get(&key) {
            return Ok(hit);
        }
        let hom = self.hom(&support)?;
        let mut non_injective: u128 = 0;
        for q in support.independent_quotients() {
            non_injective += self.emb(&q)?;
        }
        let out = hom
            .checked_sub(non_injective)
            .ok_or_else(|| crate::error::Error::Capacity("emb recursion underflow".into()))?;
        self.emb_memo.insert(key, out);
        Ok(out)
    }

    /// Both counts with the s_p / t_p normalizations.
    pub fn normalized(&mut self, f: &Motif, p: f64) -> Result<CountReport> {
        if p <= 0.0 {
            return domain("normalized counts need p > 0");
        }
        let (hom, method) = self.hom_tagged(&f.support())?;
        let emb = self.emb(f)?;
        let n = self.g.n() as f64;
        let e = f.support().e() as i32;
        let k = f.k() as u32;
        let t_p = u128_to_f64(hom) / (p.powi(e) * n.powi(k as i32));
        let falling: f64 = (0..k).map(|i| n - i as f64).product();
        let s_p = if falling > 0.0 {
            u128_to_f64(emb) / (p.powi(e) * falling)
        } else {
            0.0
        };
        Ok(CountReport {
            motif: f.clone(),
            hom: BigUint::from(hom),
            emb: BigUint::from(emb),
            t_p,
            s_p,
            p,
            method,
        })
    }
}

fn u128_to_f64(x: u128) -> f64 {
    x as f64
}

/// Detects a "banana": two poles joined by internally disjoint paths of
/// arbitrary lengths covering the whole motif (includes theta graphs,
/// books, the diamond, complete bipartite K_{2,t}). Returns the path
/// length multiset.
fn two_pole_decomposition(f: &Motif) -> Option<Vec<usize>> {
    let degs = f.degrees();
    let poles: Vec<usize> = (0..f.k()).filter(|&v| degs[v] != 2).collect();
    if poles.len() != 2 || degs[poles[0]] != degs[poles[1]] {
        return None;
    }
    let (s, t) = (poles[0], poles[1]);
    let mut adj = vec![Vec::new(); f.k()];
    for &(u, v) in f.edges() {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    let mut used = vec![false; f.k()];
    used[s] = true;
    used[t] = true;
    let mut lengths = Vec::new();
    // walk from s along each incident edge through degree-2 interiors
    for &first in &adj[s] {
        if first == t {
            lengths.push(1);
            continue;
        }
        if used[first] {
            return None;
        }
        let mut prev = s;
        let mut at = first;
        let mut len = 1usize;
        loop {
            if at == t {
                lengths.push(len);
                break;
            }
            if used[at] || degs[at] != 2 {
                return None;
            }
            used[at] = true;
            let next = *adj[at].iter().find(|&&w| w != prev)?;
            prev = at;
            at = next;
            len += 1;
        }
    }
    if lengths.len() != degs[s] || (0..f.k()).any(|v| !used[v]) {
        return None;
    }
    Some(lengths)
}

/// Detects a "flower": cycle petals all passing through one center, plus
/// pendant trees hanging from the center only. Returns petal lengths, the
/// tree part (center included) and the center's index inside it.
fn flower_decomposition(f: &Motif) -> Option<(Vec<usize>, TreeShape, usize)> {
    let k = f.k();
    let mut adj = vec![Vec::new(); k];
    for &(u, v) in f.edges() {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    'center: for v0 in 0..k {
        let mut comp_id = vec![usize::MAX; k];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for s in 0..k {
            if s == v0 || comp_id[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp_id[s] = comps.len();
            let mut comp = vec![s];
            while let Some(x) = stack.pop() {
                for &w in &adj[x] {
                    if w != v0 && comp_id[w] == usize::MAX {
                        comp_id[w] = comps.len();
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comps.push(comp);
        }
        let mut petals = Vec::new();
        let mut tree_vertices = vec![v0];
        for comp in &comps {
            let internal_deg: Vec<usize> = comp
                .iter()
                .map(|&x| adj[x].iter().filter(|&&w| w != v0).count())
                .collect();
            let to_center: usize = comp
                .iter()
                .map(|&x| adj[x].iter().filter(|&&w| w == v0).count())
                .sum();
            let edges_inside: usize = internal_deg.iter().sum::<usize>() / 2;
            let is_tree = edges_inside == comp.len() - 1;
            if !is_tree {
                continue 'center;
            }
            let is_path = internal_deg.iter().all(|&d| d <= 2);
            let endpoints_touch_center = comp
                .iter()
                .enumerate()
                .filter(|&(i, _)| internal_deg[i] <= 1)
                .all(|(_, &x)| adj[x].contains(&v0));
            let interiors_avoid_center = comp
                .iter()
                .enumerate()
                .filter(|&(i, _)| internal_deg[i] == 2)
                .all(|(_, &x)| !adj[x].contains(&v0));
            if is_path
                && to_center == 2
                && comp.len() >= 2
                && endpoints_touch_center
                && interiors_avoid_center
            {
                petals.push(comp.len() + 1);
            } else if to_center == 1 {
                tree_vertices.extend(comp.iter().copied());
            } else {
                continue 'center;
            }
        }
        if petals.is_empty() {
            continue;
        }
        // build the pendant tree on v0 + tree components
        let mut index = vec![usize::MAX; k];
        for (i, &x) in tree_vertices.iter().enumerate() {
            index[x] = i;
        }
        let edges: Vec<(u8, u8)> = f
            .edges()
            .iter()
            .filter(|&&(u, v)| index[u as usize] != usize::MAX && index[v as usize] != usize::MAX)
            .map(|&(u, v)| (index[u as usize] as u8, index[v as usize] as u8))
            .collect();
        let tree = TreeShape::from_edges(tree_vertices.len(), &edges);
        return Some((petals, tree, 0));
    }
    None
}

/// Budgeted exact backtracking over all (not necessarily injective) maps.
fn hom_backtrack(g: &Graph, f: &Motif, budget: u64) -> Result<u128> {
    if f.k() > 8 {
        return capacity("generic backtracking is limited to |F| <= 8");
    }
    let k = f.k();
    let mut adj = vec![Vec::new(); k];
    for &(u, v) in f.edges() {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    // connectivity order, highest-degree start
    let start = (0..k).max_by_key(|&v| adj[v].len()).unwrap();
    let mut order = vec![start];
    let mut placed = vec![false; k];
    placed[start] = true;
    while order.len() < k {
        let next = (0..k)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                (
                    adj[v].iter().filter(|&&w| placed[w]).count(),
                    adj[v].len(),
                    std::cmp::Reverse(v),
                )
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    // for each position, the earlier-placed neighbors
    let pos_of: Vec<usize> = {
        let mut p = vec![0; k];
        for (i, &v) in order.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    let back_edges: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .filter(|&&w| pos_of[w] < pos_of[v])
                .map(|&w| pos_of[w])
                .collect()
        })
        .collect();
    let nodes = AtomicU64::new(0);
    let count: Result<u128> = (0..g.n())
        .into_par_iter()
        .map(|first| {
            let mut images = vec![0u32; k];
            images[0] = first as u32;
            descend(g, 1, k, &back_edges, &mut images, &nodes, budget)
        })
        .try_reduce(|| 0u128, |a, b| Ok(a + b));
    fn descend(
        g: &Graph,
        depth: usize,
        k: usize,
        back_edges: &[Vec<usize>],
        images: &mut [u32],
        nodes: &AtomicU64,
        budget: u64,
    ) -> Result<u128> {
        if depth == k {
            return Ok(1);
        }
        if nodes.fetch_add(1, Ordering::Relaxed) > budget {
            return capacity("backtracking budget exhausted");
        }
        let anchors = &back_edges[depth];
        let mut total = 0u128;
        if anchors.is_empty() {
            for v in 0..g.n() {
                images[depth] = v as u32;
                total += descend(g, depth + 1, k, back_edges, images, nodes, budget)?;
            }
            return Ok(total);
        }
        // iterate candidates from the smallest anchored neighborhood
        let pivot = *anchors
            .iter()
            .min_by_key(|&&a| g.degree(images[a] as usize))
            .unwrap();
        'cand: for &v in g.neighbors(images[pivot] as usize) {
            for &a in anchors {
                if a != pivot && !g.has_edge(images[a] as usize, v as usize) {
                    continue 'cand;
                }
            }
            images[depth] = v;
            total += descend(g, depth + 1, k, back_edges, images, nodes, budget)?;
        }
        Ok(total)
    }
    count
}

/// Exact homomorphism count of `f` in `g`.
pub fn hom_count(f: &Motif, g: &Graph) -> Result<BigUint> {
    Ok(BigUint::from(Counter::new(g).hom(f)?))
}

/// Exact embedding (injective homomorphism) count of `f` in `g`.
pub fn emb_count(f: &Motif, g: &Graph) -> Result<BigUint> {
    Ok(BigUint::from(Counter::new(g).emb(f)?))
}

/// Exact counts plus s_p and t_p.
pub fn normalized_counts(f: &Motif, g: &Graph, p: f64) -> Result<CountReport> {
    Counter::new(g).normalized(f, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler;

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    fn petersen() -> Graph {
        let outer = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];
        let spokes = [(0, 5), (1, 6), (2, 7), (3, 8), (4, 9)];
        let inner = [(5, 7), (7, 9), (9, 6), (6, 8), (8, 5)];
        let edges: Vec<(u32, u32)> = outer
            .iter()
            .chain(spokes.iter())
            .chain(inner.iter())
            .map(|&(a, b)| (a as u32, b as u32))
            .collect();
        Graph::from_edges(10, &edges).unwrap()
    }

    /// Exhaustive map enumeration, the independent oracle.
    fn brute_hom(f: &Motif, g: &Graph) -> u128 {
        let k = f.k();
        let n = g.n();
        let mut count = 0u128;
        let mut map = vec![0usize; k];
        loop {
            let ok = f
                .support()
                .edges()
                .iter()
                .all(|&(u, v)| g.has_edge(map[u as usize], map[v as usize]));
            if ok {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == k {
                    return count;
                }
                map[i] += 1;
                if map[i] < n {
                    break;
                }
                map[i] = 0;
                i += 1;
            }
        }
    }

    fn brute_emb(f: &Motif, g: &Graph) -> u128 {
        let k = f.k();
        let n = g.n();
        if k > n {
            return 0;
        }
        let mut count = 0u128;
        let mut map = vec![0usize; k];
        loop {
            let distinct = (0..k).all(|i| (0..i).all(|j| map[i] != map[j]));
            if distinct {
                let ok = f
                    .support()
                    .edges()
                    .iter()
                    .all(|&(u, v)| g.has_edge(map[u as usize], map[v as usize]));
                if ok {
                    count += 1;
                }
            }
            let mut i = 0;
            loop {
                if i == k {
                    return count;
                }
                map[i] += 1;
                if map[i] < n {
                    break;
                }
                map[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn hom_k2_is_twice_edges() {
        let rec = sampler::sample_gnp(30, 0.2, 1).unwrap();
        let h = hom_count(&Motif::edge(), &rec.graph).unwrap();
        assert_eq!(h, BigUint::from(2 * rec.graph.m()));
    }

    #[test]
    fn hom_c4_on_k4() {
        let g = complete(4);
        assert_eq!(hom_count(&Motif::cycle(4).unwrap(), &g).unwrap(), BigUint::from(84u32));
        assert_eq!(brute_hom(&Motif::cycle(4).unwrap(), &g), 84);
    }

    #[test]
    fn hom_triangle_free_on_petersen() {
        let g = petersen();
        assert_eq!(hom_count(&Motif::cycle(3).unwrap(), &g).unwrap(), BigUint::from(0u32));
    }

    #[test]
    fn emb_small_exact() {
        assert_eq!(
            emb_count(&Motif::complete(3).unwrap(), &complete(3)).unwrap(),
            BigUint::from(6u32)
        );
        let k33 = Motif::complete_bipartite(3, 3).unwrap();
        let host = complete(3).blow_up(1).unwrap();
        let _ = host;
        // K_{2,3} into K_{3,3}: check against the exhaustive oracle
        let k33g = {
            let mut edges = Vec::new();
            for u in 0..3u32 {
                for v in 0..3u32 {
                    edges.push((u, 3 + v));
                }
            }
            Graph::from_edges(6, &edges).unwrap()
        };
        let f = Motif::complete_bipartite(2, 3).unwrap();
        assert_eq!(
            emb_count(&f, &k33g).unwrap(),
            BigUint::from(brute_emb(&f, &k33g))
        );
        let _ = k33;
        // P2 into the star K_{1,4}
        let star4 = {
            let edges: Vec<(u32, u32)> = (1..5).map(|v| (0u32, v)).collect();
            Graph::from_edges(5, &edges).unwrap()
        };
        let p2 = Motif::path(2).unwrap();
        assert_eq!(
            emb_count(&p2, &star4).unwrap(),
            BigUint::from(brute_emb(&p2, &star4))
        );
        assert_eq!(brute_emb(&p2, &star4), 12);
    }

    #[test]
    fn oracle_agreement_on_random_graphs() {
        // every motif on <= 4 vertices vs exhaustive enumeration
        let motifs = all_motifs_up_to(4);
        for seed in 0..12u64 {
            let n = 4 + (seed % 4) as usize;
            let rec = sampler::sample_gnp(n, 0.45, seed).unwrap();
            let mut counter = Counter::new(&rec.graph);
            for f in &motifs {
                assert_eq!(
                    counter.hom(f).unwrap(),
                    brute_hom(f, &rec.graph),
                    "hom {:?} seed {seed}",
                    f.edges()
                );
                assert_eq!(
                    counter.emb(f).unwrap(),
                    brute_emb(f, &rec.graph),
                    "emb {:?} seed {seed}",
                    f.edges()
                );
            }
        }
    }

    /// All simple graphs on at most `kmax` vertices, up to isomorphism.
    pub(crate) fn all_motifs_up_to(kmax: usize) -> Vec<Motif> {
        let mut out = Vec::new();
        for k in 1..=kmax {
            let pairs: Vec<(u8, u8)> = (0..k as u8)
                .flat_map(|u| ((u + 1)..k as u8).map(move |v| (u, v)))
                .collect();
            let mut seen = std::collections::HashSet::new();
            for mask in 0..(1u32 << pairs.len()) {
                let edges: Vec<(u8, u8)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                let m = Motif::simple(k, edges).unwrap();
                if seen.insert(m.canonical_key()) {
                    out.push(m);
                }
            }
        }
        out
    }

    #[test]
    fn specialized_engines_match_backtracker() {
        // trees, cycles, two-pole shapes and flowers against the generic
        // engine on random graphs
        let shapes = vec![
            Motif::path(4).unwrap(),
            Motif::star(4).unwrap(),
            Motif::tree_from_parents(&[0, 0, 1, 1, 2]).unwrap(),
            Motif::cycle(3).unwrap(),
            Motif::cycle(5).unwrap(),
            Motif::cycle(6).unwrap(),
            Motif::theta(3, 2).unwrap(),
            Motif::theta(2, 3).unwrap(),
            Motif::complete_bipartite(2, 4).unwrap(),
            // diamond: K4 minus an edge
            Motif::simple(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap(),
            // bowtie
            Motif::simple(5, vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap(),
            // tadpole: C4 plus a pendant
            Motif::simple(5, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)]).unwrap(),
            // paw with longer tail
            Motif::simple(5, vec![(0, 1), (1, 2), (2, 0), (0, 3), (3, 4)]).unwrap(),
        ];
        for seed in [3u64, 17, 40] {
            let rec = sampler::sample_gnp(55, 0.12, seed).unwrap();
            let g = &rec.graph;
            let mut counter = Counter::new(g);
            for f in &shapes {
                let (fast, tag) = counter.hom_tagged(f).unwrap();
                let slow = hom_backtrack(g, &f.support(), u64::MAX).unwrap();
                assert_eq!(fast, slow, "{} via {tag}", f.label());
                assert_ne!(tag, "backtrack", "{} should hit a fast path", f.label());
            }
        }
    }

    #[test]
    fn blowup_preserves_t_p() {
        let rec = sampler::sample_gnp(12, 0.4, 5).unwrap();
        let g = &rec.graph;
        let blown = g.blow_up(3).unwrap();
        for f in all_motifs_up_to(4) {
            if f.e() == 0 {
                continue;
            }
            let a = normalized_counts(&f, g, 0.4).unwrap().t_p;
            let b = normalized_counts(&f, &blown, 0.4).unwrap().t_p;
            assert!((a - b).abs() < 1e-12, "{}", f.label());
        }
    }

    #[test]
    fn s_p_on_complete_graph() {
        // emb(F, K_n) = n_(k), so s_p = p^{-e(F)}
        let g = complete(9);
        for f in [Motif::cycle(4).unwrap(), Motif::star(3).unwrap()] {
            let r = normalized_counts(&f, &g, 0.5).unwrap();
            assert!((r.s_p - 2.0f64.powi(f.e() as i32)).abs() < 1e-9);
        }
    }

    #[test]
    fn normalized_empty_graph() {
        let g = Graph::from_edges(6, &[]).unwrap();
        let r = normalized_counts(&Motif::edge(), &g, 0.3).unwrap();
        assert_eq!(r.s_p, 0.0);
        assert_eq!(r.t_p, 0.0);
    }

    #[test]
    fn tree_hom_minus_emb_vanishes_relatively() {
        // (hom - emb) / (p^e n^k) decreasing over a growing size schedule
        let tree = Motif::star(2).unwrap();
        let mut prev = f64::INFINITY;
        for &n in &[400usize, 800, 1600] {
            let p = (n as f64).powf(-0.3);
            let rec = sampler::sample_gnp(n, p, 99).unwrap();
            let mut counter = Counter::new(&rec.graph);
            let hom = counter.hom(&tree).unwrap() as f64;
            let emb = counter.emb(&tree).unwrap() as f64;
            let gap = (hom - emb) / (p.powi(tree.e() as i32) * (n as f64).powi(tree.k() as i32));
            assert!(gap < prev, "gap {gap} at n={n} not below {prev}");
            prev = gap;
        }
    }

    #[test]
    fn capacity_limits_reported() {
        let g = complete(5);
        let too_many = Motif::simple(
            13,
            (0..12).map(|i| (i as u8, (i + 1) as u8)).collect(),
        )
        .unwrap();
        assert!(matches!(
            hom_count(&too_many, &g),
            Err(crate::error::Error::Capacity(_))
        ));
        // 9 vertices, K4 with a tail: no fast path, so the generic engine
        // refuses beyond 8 vertices
        let mut edges = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        edges.extend((3..8).map(|i| (i as u8, (i + 1) as u8)));
        let k4_tail = Motif::simple(9, edges).unwrap();
        assert!(matches!(
            hom_count(&k4_tail, &g),
            Err(crate::error::Error::Capacity(_))
        ));
        // embeddings stay within 8 vertices outright
        let c9 = Motif::cycle(9).unwrap();
        assert!(hom_count(&c9, &g).is_ok());
        assert!(matches!(
            emb_count(&c9, &g),
            Err(crate::error::Error::Capacity(_))
        ));
    }
}
