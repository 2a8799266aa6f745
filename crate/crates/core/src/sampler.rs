//! Seeded random-graph generation: G(n,p), the inhomogeneous model
//! G_p(n,κ) with exposed latent types, and the named counterexample
//! constructions. Identical (construction, parameters, seed) inputs
//! reproduce the graph bit-exactly, independent of thread count.

use crate::error::{domain, Result};
use crate::graph::Graph;
use crate::kernel::StepKernel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::{json, Value};

/// A sampled graph plus its provenance: construction name, parameters,
/// seed, optional latent block types, and the normalization `p` the
/// construction targets.
#[derive(Clone, Debug)]
pub struct SampleRecord {
    pub graph: Graph,
    pub latent_types: Option<Vec<u32>>,
    pub construction: String,
    pub params: Value,
    pub seed: u64,
    pub p_effective: f64,
    /// Set when min{pκ,1} clamping was active for some block pair.
    pub clamped: bool,
}

impl SampleRecord {
    /// JSON sidecar with types, construction and seed.
    pub fn sidecar_json(&self) -> Value {
        json!({
            "construction": self.construction,
            "params": self.params,
            "seed": self.seed,
            "p_effective": self.p_effective,
            "clamped": self.clamped,
            "latent_types": self.latent_types,
        })
    }

    /// Edge-list text in the loader's format.
    pub fn edge_list_text(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.graph.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fills `edges` with pairs (i<j) drawn Bernoulli(q) from the ordered list
/// of all pairs in `pairs`, using geometric skipping.
fn bernoulli_pairs(
    q: f64,
    total: u64,
    mut pair_at: impl FnMut(u64) -> (u32, u32),
    rng: &mut ChaCha12Rng,
    edges: &mut Vec<(u32, u32)>,
) {
    if q <= 0.0 || total == 0 {
        return;
    }
    if q >= 1.0 {
        for idx in 0..total {
            edges.push(pair_at(idx));
        }
        return;
    }
    let log1mq = (1.0 - q).ln();
    let mut idx = 0u64;
    loop {
        let u: f64 = rng.gen::<f64>();
        let skip = ((1.0 - u).ln() / log1mq).floor() as u64;
        idx = idx.saturating_add(skip);
        if idx >= total {
            break;
        }
        edges.push(pair_at(idx));
        idx += 1;
    }
}

/// Erdős–Rényi G(n,p) with geometric edge skipping.
pub fn sample_gnp(n: usize, p: f64, seed: u64) -> Result<SampleRecord> {
    if !(0.0..=1.0).contains(&p) {
        return domain("sample_gnp: p must lie in [0,1]");
    }
    let mut rng = stream_rng(seed, 0);
    let total = (n as u64) * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    let nn = n as u64;
    bernoulli_pairs(
        p,
        if n < 2 { 0 } else { total },
        |idx| linear_to_pair(idx, nn),
        &mut rng,
        &mut edges,
    );
    Ok(SampleRecord {
        graph: Graph::from_edges(n, &edges)?,
        latent_types: None,
        construction: "gnp".into(),
        params: json!({"n": n, "p": p}),
        seed,
        p_effective: p,
        clamped: false,
    })
}

/// Maps a linear index over {(i,j): 0<=i<j<n} to the pair, row-major.
fn linear_to_pair(idx: u64, n: u64) -> (u32, u32) {
    // row i occupies n-1-i slots; binary search the row
    let mut lo = 0u64;
    let mut hi = n - 1;
    let row_start = |i: u64| i * n - i * (i + 1) / 2;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if row_start(mid) <= idx {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let i = lo;
    let j = i + 1 + (idx - row_start(i));
    (i as u32, j as u32)
}

/// G_p(n,κ): uniform latent types, edges independent with probability
/// min{p·κ(x_i,x_j), 1}. Latent block indices are recorded. Edge streams
/// are split per block pair, so results do not depend on thread count.
pub fn sample_inhomogeneous(
    n: usize,
    kappa: &StepKernel,
    p: f64,
    seed: u64,
) -> Result<SampleRecord> {
    if p < 0.0 {
        return domain("sample_inhomogeneous: p must be nonnegative");
    }
    let k = kappa.k();
    // cumulative measures locate each uniform draw's block
    let mut cumulative = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &m in kappa.measures() {
        acc += m;
        cumulative.push(acc);
    }
    let mut type_rng = stream_rng(seed, 1);
    let mut types = vec![0u32; n];
    let mut by_block: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (v, t) in types.iter_mut().enumerate() {
        let x: f64 = type_rng.gen();
        let block = cumulative
            .iter()
            .position(|&c| x < c)
            .unwrap_or(k - 1);
        *t = block as u32;
        by_block[block].push(v as u32);
    }
    let mut edges = Vec::new();
    let mut clamped = false;
    for a in 0..k {
        for b in a..k {
            let q_raw = p * kappa.value(a, b);
            let q = q_raw.min(1.0);
            if q_raw > 1.0 {
                clamped = true;
            }
            if q <= 0.0 {
                continue;
            }
            let mut rng = stream_rng(seed, 2 + (a * k + b) as u64);
            let va = &by_block[a];
            let vb = &by_block[b];
            if a == b {
                let s = va.len() as u64;
                if s >= 2 {
                    bernoulli_pairs(
                        q,
                        s * (s - 1) / 2,
                        |idx| {
                            let (i, j) = linear_to_pair(idx, s);
                            (va[i as usize], va[j as usize])
                        },
                        &mut rng,
                        &mut edges,
                    );
                }
            } else {
                let total = va.len() as u64 * vb.len() as u64;
                let cols = vb.len() as u64;
                bernoulli_pairs(
                    q,
                    total,
                    |idx| (va[(idx / cols) as usize], vb[(idx % cols) as usize]),
                    &mut rng,
                    &mut edges,
                );
            }
        }
    }
    Ok(SampleRecord {
        graph: Graph::from_edges(n, &edges)?,
        latent_types: Some(types),
        construction: "inhomogeneous".into(),
        params: json!({"n": n, "p": p, "kernel_blocks": k}),
        seed,
        p_effective: p,
        clamped,
    })
}

/// Solves (1-x^2)^(n-2) = ratio*x for x in (0,1) by bisection; the map is
/// monotone decreasing in x on the relevant range.
fn solve_p1(n: usize, ratio: f64) -> Result<f64> {
    let f = |x: f64| (1.0 - x * x).powi(n as i32 - 2) - ratio * x;
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return domain("too_few_triangles: no p1 solution in (0,1)");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The union G ∪ H where G = G(n,p1) and H joins exactly the pairs with no
/// common neighbour in G; p1 solves (1-p1^2)^(n-2) = ratio·p1 so that H has
/// edge probability p2 = ratio·p1. No triangle has two edges in G and one
/// in H, by construction.
pub fn construct_too_few_triangles(n: usize, ratio: f64, seed: u64) -> Result<SampleRecord> {
    if n < 3 {
        return domain("too_few_triangles needs n >= 3");
    }
    if ratio <= 0.0 {
        return domain("ratio must be positive");
    }
    let p1 = solve_p1(n, ratio)?;
    let p2 = (1.0 - p1 * p1).powi(n as i32 - 2);
    let base = sample_gnp(n, p1, seed)?;
    let g = &base.graph;
    // mark every pair with a common neighbour via wedge enumeration
    let total_pairs = n * (n - 1) / 2;
    let mut has_common = vec![false; total_pairs];
    let pair_index = |i: usize, j: usize| -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + (j - i - 1)
    };
    for x in 0..n {
        let nbrs = g.neighbors(x);
        for ai in 0..nbrs.len() {
            for bi in (ai + 1)..nbrs.len() {
                has_common[pair_index(nbrs[ai] as usize, nbrs[bi] as usize)] = true;
            }
        }
    }
    let mut edges: Vec<(u32, u32)> = g.edges().collect();
    let mut in_g = vec![false; total_pairs];
    for &(u, v) in &edges {
        in_g[pair_index(u as usize, v as usize)] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let idx = pair_index(i, j);
            if !has_common[idx] && !in_g[idx] {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Ok(SampleRecord {
        graph: Graph::from_edges(n, &edges)?,
        latent_types: None,
        construction: "too_few_triangles".into(),
        params: json!({"n": n, "ratio": ratio, "p1": p1, "p2": p2}),
        seed,
        p_effective: p1 + p2,
        clamped: false,
    })
}

/// Blown-up random graph: G(m, p) with p = 1/log n, m = ceil(c (log n)^t),
/// blown up by k = floor(n/m). Latent types are the blow-up classes.
pub fn construct_blowup_counterexample(
    n: usize,
    t: u32,
    c: f64,
    seed: u64,
) -> Result<SampleRecord> {
    if n < 3 {
        return domain("blowup construction needs n >= 3");
    }
    let logn = (n as f64).ln();
    let p = 1.0 / logn;
    let m = (c * logn.powi(t as i32)).ceil() as usize;
    if m == 0 || m > n {
        return domain(format!("blowup construction: m={m} out of range for n={n}"));
    }
    let k = n / m;
    if k == 0 {
        return domain("blowup construction: blow-up factor is zero");
    }
    let base = sample_gnp(m, p, seed)?;
    let graph = base.graph.blow_up(k)?;
    let types: Vec<u32> = (0..graph.n()).map(|v| (v / k) as u32).collect();
    Ok(SampleRecord {
        graph,
        latent_types: Some(types),
        construction: "blowup_counterexample".into(),
        params: json!({"n": n, "t": t, "c": c, "m": m, "k": k, "p": p,
                        "realized_n": m * k, "rounding_discrepancy": n - m * k}),
        seed,
        p_effective: p,
        clamped: false,
    })
}

/// G(n-m, p) disjoint union K_m with m = ceil(n / (log n)^c). The clique
/// vertices occupy the tail index range; intended as an
/// assumption-violation fixture.
pub fn construct_planted_clique(
    n: usize,
    exponent_c: f64,
    p: f64,
    seed: u64,
) -> Result<SampleRecord> {
    if n < 3 {
        return domain("planted clique needs n >= 3");
    }
    let m = (n as f64 / (n as f64).ln().powf(exponent_c)).ceil() as usize;
    if m == 0 {
        return domain("planted clique: m = 0");
    }
    if m >= n {
        return domain(format!("planted clique: m={m} >= n={n}"));
    }
    let base = sample_gnp(n - m, p, seed)?;
    let mut clique_edges = Vec::new();
    for u in 0..m as u32 {
        for v in (u + 1)..m as u32 {
            clique_edges.push((u, v));
        }
    }
    let clique = Graph::from_edges(m, &clique_edges)?;
    let graph = base.graph.disjoint_union(&clique);
    let types: Vec<u32> = (0..graph.n())
        .map(|v| if v < n - m { 0 } else { 1 })
        .collect();
    Ok(SampleRecord {
        graph,
        latent_types: Some(types),
        construction: "planted_clique".into(),
        params: json!({"n": n, "c": exponent_c, "p": p, "m": m}),
        seed,
        p_effective: p,
        clamped: false,
    })
}

/// Erdős–Rényi polarity graph over GF(q), q prime: vertices are the
/// projective-plane points, x ~ y iff x·y = 0; absolute points (x·x = 0)
/// would be loops and are dropped. C4-free with ~ n^{3/2}/2 edges.
pub fn construct_polarity_graph(q: u64) -> Result<SampleRecord> {
    if q < 2 || !is_prime(q) {
        return domain(format!("polarity graph needs q prime, got {q}"));
    }
    // canonical projective points: first nonzero coordinate equals 1
    let mut points: Vec<[u64; 3]> = vec![[0, 0, 1]];
    for x1 in 0..q {
        points.push([0, 1, x1]);
    }
    // [1, y, z] for all y,z
    for y in 0..q {
        for z in 0..q {
            points.push([1, y, z]);
        }
    }
    // reorder so that the enumeration is deterministic regardless of the
    // construction order above
    points.sort_unstable();
    let n = points.len();
    debug_assert_eq!(n as u64, q * q + q + 1);
    let dot = |a: &[u64; 3], b: &[u64; 3]| (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) % q;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dot(&points[i], &points[j]) == 0 {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let graph = Graph::from_edges(n, &edges)?;
    let p = 1.0 / (n as f64).sqrt();
    Ok(SampleRecord {
        graph,
        latent_types: None,
        construction: "polarity".into(),
        params: json!({"q": q, "n": n}),
        seed: 0,
        p_effective: p,
        clamped: false,
    })
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Counts triangles with exactly two edges in `g` and one in `h_edges`
/// (given as a set of pairs). Zero for the too-few-triangles construction.
pub fn mixed_triangles_g_g_h(g: &Graph, h: &Graph) -> u64 {
    let mut count = 0u64;
    for x in 0..g.n() {
        let nbrs = g.neighbors(x);
        for ai in 0..nbrs.len() {
            for bi in (ai + 1)..nbrs.len() {
                if h.has_edge(nbrs[ai] as usize, nbrs[bi] as usize) {
                    count += 1;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnp_extremes() {
        let empty = sample_gnp(10, 0.0, 1).unwrap();
        assert_eq!(empty.graph.m(), 0);
        let full = sample_gnp(10, 1.0, 1).unwrap();
        assert_eq!(full.graph.m(), 45);
        assert!(sample_gnp(5, 1.5, 0).is_err());
    }

    #[test]
    fn gnp_edge_count_concentrates() {
        // m within 4 standard deviations of p*C(n,2) across seeds
        let n = 5000usize;
        let p = 1e-3;
        let mean = p * (n * (n - 1) / 2) as f64;
        let sd = (mean * (1.0 - p)).sqrt();
        for seed in 0..20u64 {
            let rec = sample_gnp(n, p, seed).unwrap();
            let m = rec.graph.m() as f64;
            assert!((m - mean).abs() < 4.0 * sd, "seed {seed}: m={m} mean={mean}");
        }
    }

    #[test]
    fn gnp_deterministic() {
        let a = sample_gnp(200, 0.05, 42).unwrap();
        let b = sample_gnp(200, 0.05, 42).unwrap();
        assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn linear_pair_enumeration_is_bijective() {
        let n = 7u64;
        let mut seen = std::collections::HashSet::new();
        for idx in 0..(n * (n - 1) / 2) {
            let (i, j) = linear_to_pair(idx, n);
            assert!(i < j);
            assert!(seen.insert((i, j)));
        }
        assert_eq!(seen.len(), 21);
    }

    #[test]
    fn inhomogeneous_constant_matches_gnp_statistics() {
        let kappa = StepKernel::constant(1.0);
        let rec = sample_inhomogeneous(400, &kappa, 0.1, 5).unwrap();
        let m = rec.graph.m() as f64;
        let mean = 0.1 * (400.0 * 399.0 / 2.0);
        assert!((m - mean).abs() < 5.0 * mean.sqrt());
        assert!(rec.latent_types.is_some());
    }

    #[test]
    fn inhomogeneous_zero_offdiagonal_disconnects_classes() {
        let kappa = StepKernel::new(vec![0.5, 0.5], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let rec = sample_inhomogeneous(300, &kappa, 0.2, 9).unwrap();
        let types = rec.latent_types.unwrap();
        for (u, v) in rec.graph.edges() {
            assert_eq!(types[u as usize], types[v as usize]);
        }
    }

    #[test]
    fn inhomogeneous_block_densities_match() {
        let kappa =
            StepKernel::new(vec![0.3, 0.3, 0.4], vec![1.5, 0.5, 1.0, 0.5, 2.0, 0.3, 1.0, 0.3, 0.8])
                .unwrap();
        let n = 2000;
        let p = (n as f64).powf(-0.3);
        let rec = sample_inhomogeneous(n, &kappa, p, 31).unwrap();
        let types = rec.latent_types.as_ref().unwrap();
        let mut sizes = [0u64; 3];
        for &t in types {
            sizes[t as usize] += 1;
        }
        let mut pair_edges = vec![0u64; 9];
        for (u, v) in rec.graph.edges() {
            let (a, b) = (types[u as usize] as usize, types[v as usize] as usize);
            pair_edges[a.min(b) * 3 + a.max(b)] += 1;
        }
        for a in 0..3 {
            for b in a..3 {
                let pairs = if a == b {
                    sizes[a] * (sizes[a] - 1) / 2
                } else {
                    sizes[a] * sizes[b]
                } as f64;
                let q = p * kappa.value(a, b);
                let mean = q * pairs;
                let sd = (mean * (1.0 - q)).sqrt();
                let got = pair_edges[a * 3 + b] as f64;
                assert!(
                    (got - mean).abs() <= 3.0 * sd + 1.0,
                    "block ({a},{b}): got {got}, mean {mean}, sd {sd}"
                );
            }
        }
    }

    #[test]
    fn clamp_flag_reported() {
        let kappa = StepKernel::constant(3.0);
        let rec = sample_inhomogeneous(50, &kappa, 0.5, 3).unwrap();
        assert!(rec.clamped);
    }

    #[test]
    fn too_few_triangles_structure() {
        let rec = construct_too_few_triangles(300, 0.5, 77).unwrap();
        let p1 = rec.params["p1"].as_f64().unwrap();
        let p2 = rec.params["p2"].as_f64().unwrap();
        // formula check, not a sample check
        assert!((p2 - (1.0 - p1 * p1).powi(298)).abs() < 1e-9);
        assert!((p2 / p1 - 0.5).abs() < 1e-9);
        // structural zero: rebuild G and H and look for (G,G,H) triangles
        let base = sample_gnp(300, p1, 77).unwrap();
        let g = &base.graph;
        let mut h_edges = Vec::new();
        for (u, v) in rec.graph.edges() {
            if !g.has_edge(u as usize, v as usize) {
                h_edges.push((u, v));
            }
        }
        let h = Graph::from_edges(300, &h_edges).unwrap();
        assert_eq!(mixed_triangles_g_g_h(g, &h), 0);
    }

    #[test]
    fn blowup_counterexample_structure() {
        let rec = construct_blowup_counterexample(2000, 3, 1.0, 13).unwrap();
        let k = rec.params["k"].as_u64().unwrap() as usize;
        let types = rec.latent_types.as_ref().unwrap();
        // copies of one base vertex form an independent set
        for (u, v) in rec.graph.edges() {
            assert_ne!(types[u as usize], types[v as usize]);
        }
        assert!(k >= 1);
        assert!(rec.graph.n() <= 2000);
    }

    #[test]
    fn planted_clique_marks_types() {
        let rec = construct_planted_clique(500, 1.0, 0.1, 3).unwrap();
        let m = rec.params["m"].as_u64().unwrap() as usize;
        let types = rec.latent_types.as_ref().unwrap();
        assert_eq!(types.iter().filter(|&&t| t == 1).count(), m);
        // clique is complete
        let n = rec.graph.n();
        for u in (n - m)..n {
            assert_eq!(rec.graph.degree(u), m - 1);
        }
        assert!(construct_planted_clique(10, -10.0, 0.1, 0).is_err());
    }

    #[test]
    fn polarity_graph_q3() {
        let rec = construct_polarity_graph(3).unwrap();
        assert_eq!(rec.graph.n(), 13);
        // C4-free: every pair of vertices has at most one common neighbour
        let g = &rec.graph;
        for u in 0..g.n() {
            for v in (u + 1)..g.n() {
                let mut common = 0;
                for &w in g.neighbors(u) {
                    if g.has_edge(w as usize, v) {
                        common += 1;
                    }
                }
                assert!(common <= 1, "pair ({u},{v}) has {common} common neighbours");
            }
        }
        assert!(construct_polarity_graph(4).is_err());
        assert!(construct_polarity_graph(9).is_err());
    }

    #[test]
    fn polarity_edge_density_q17() {
        let rec = construct_polarity_graph(17).unwrap();
        let n = rec.graph.n() as f64;
        let ratio = rec.graph.m() as f64 / (n.powf(1.5) / 2.0);
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }
}
