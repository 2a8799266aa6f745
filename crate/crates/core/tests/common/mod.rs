//! Test-only oracles: exhaustive map enumeration for homomorphism and
//! embedding counts, and small motif-family enumeration. These stay
//! independent of the library's counting paths.

use gmetrics::graph::Graph;
use gmetrics::motif::Motif;

/// Counts all adjacency-preserving maps V(F) -> V(G) by explicit
/// enumeration of |G|^|F| candidates.
pub fn brute_hom(f: &Motif, g: &Graph) -> u128 {
    let k = f.k();
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let edges: Vec<(usize, usize)> = f
        .support()
        .edges()
        .iter()
        .map(|&(u, v)| (u as usize, v as usize))
        .collect();
    let mut count = 0u128;
    let mut map = vec![0usize; k];
    loop {
        if edges.iter().all(|&(u, v)| g.has_edge(map[u], map[v])) {
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

/// Injective variant of `brute_hom`.
pub fn brute_emb(f: &Motif, g: &Graph) -> u128 {
    let k = f.k();
    let n = g.n();
    if k > n {
        return 0;
    }
    let edges: Vec<(usize, usize)> = f
        .support()
        .edges()
        .iter()
        .map(|&(u, v)| (u as usize, v as usize))
        .collect();
    let mut count = 0u128;
    let mut map = vec![0usize; k];
    loop {
        let distinct = (0..k).all(|i| (0..i).all(|j| map[i] != map[j]));
        if distinct && edges.iter().all(|&(u, v)| g.has_edge(map[u], map[v])) {
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

/// Every simple graph on at most `kmax` vertices, up to isomorphism
/// (includes graphs with isolated vertices and the empty graph).
pub fn all_motifs_up_to(kmax: usize) -> Vec<Motif> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        let pairs: Vec<(u8, u8)> = (0..k as u8)
            .flat_map(|u| ((u + 1)..k as u8).map(move |v| (u, v)))
            .collect();
        let mut seen = std::collections::HashSet::new();
        for mask in 0u32..(1 << pairs.len()) {
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

/// Connected simple graphs on exactly 1..=kmax vertices, up to isomorphism.
pub fn connected_motifs_up_to(kmax: usize) -> Vec<Motif> {
    all_motifs_up_to(kmax)
        .into_iter()
        .filter(|m| m.is_connected() && (m.k() == 1 || m.e() > 0))
        .collect()
}

/// All simple graphs with at most `emax` edges and no isolated vertices,
/// up to isomorphism: disjoint unions of the connected pieces with at most
/// `emax` edges.
pub fn motifs_with_edges_up_to(emax: usize) -> Vec<Motif> {
    // connected pieces keyed by edge count
    let pieces: Vec<Motif> = connected_motifs_up_to(emax + 1)
        .into_iter()
        .filter(|m| m.e() >= 1 && m.e() <= emax)
        .collect();
    let mut out: Vec<Motif> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    // multisets of pieces with total edge count <= emax, depth-first
    fn extend(
        pieces: &[Motif],
        start: usize,
        current: &mut Vec<Motif>,
        budget: usize,
        out: &mut Vec<Motif>,
        seen: &mut std::collections::HashSet<Vec<(u8, u8)>>,
    ) {
        if !current.is_empty() {
            // assemble the disjoint union
            let mut k = 0usize;
            let mut edges: Vec<(u8, u8)> = Vec::new();
            for piece in current.iter() {
                for &(u, v) in piece.edges() {
                    edges.push((u + k as u8, v + k as u8));
                }
                k += piece.k();
            }
            let m = Motif::simple(k, edges).unwrap();
            if seen.insert(m.canonical_key()) {
                out.push(m);
            }
        }
        for i in start..pieces.len() {
            if pieces[i].e() <= budget {
                current.push(pieces[i].clone());
                extend(pieces, i, current, budget - pieces[i].e(), out, seen);
                current.pop();
            }
        }
    }
    extend(&pieces, 0, &mut Vec::new(), emax, &mut out, &mut seen);
    out
}
