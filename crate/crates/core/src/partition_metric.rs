//! The balanced-partition density-matrix metric: matrix clouds over
//! balanced k-partitions (enumerated, sampled, or extremal-search),
//! Hausdorff distances between clouds, the per-k and aggregated partition
//! distance, and locally ε-optimal matrices.
//!
//! The full matrix set is astronomically large; sampled clouds are
//! estimators and every distance carries its budget and seed.

use crate::error::{capacity, domain, Result};
use crate::graph::Graph;
use crate::kernel::StepKernel;
use crate::regularity::{partition_index, quotient_kernel, Partition};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Symmetric k×k matrix of normalized pair densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub k: usize,
    pub entries: Vec<f64>,
}

impl DensityMatrix {
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.k + b]
    }

    /// Canonical representative under simultaneous row/column permutation:
    /// the lexicographically smallest flattening. Brute force over k!.
    pub fn canonical(&self) -> DensityMatrix {
        let k = self.k;
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best: Option<Vec<f64>> = None;
        fn visit(
            perm: &mut Vec<usize>,
            i: usize,
            k: usize,
            entries: &[f64],
            best: &mut Option<Vec<f64>>,
        ) {
            if i == perm.len() {
                let mapped: Vec<f64> = (0..k * k)
                    .map(|idx| {
                        let (a, b) = (idx / k, idx % k);
                        entries[perm[a] * k + perm[b]]
                    })
                    .collect();
                let better = match best {
                    None => true,
                    Some(cur) => mapped
                        .iter()
                        .zip(cur.iter())
                        .find_map(|(x, y)| {
                            if (x - y).abs() > 1e-12 {
                                Some(x < y)
                            } else {
                                None
                            }
                        })
                        .unwrap_or(false),
                };
                if better {
                    *best = Some(mapped);
                }
                return;
            }
            for j in i..perm.len() {
                perm.swap(i, j);
                visit(perm, i + 1, k, entries, best);
                perm.swap(i, j);
            }
        }
        visit(&mut perm, 0, k, &self.entries, &mut best);
        DensityMatrix {
            k,
            entries: best.unwrap_or_else(|| self.entries.clone()),
        }
    }

    /// ℓ∞ distance between equal-size matrices.
    pub fn linf(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// ℓ∞ distance minimized over simultaneous row/column relabelings.
    /// Canonical forms of near-tied matrices may pick different
    /// permutations; this removes that artifact. Brute force over k!.
    pub fn linf_up_to_relabeling(&self, other: &DensityMatrix) -> f64 {
        let k = self.k;
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = f64::INFINITY;
        fn visit(
            perm: &mut Vec<usize>,
            i: usize,
            k: usize,
            a: &[f64],
            b: &[f64],
            best: &mut f64,
        ) {
            if i == perm.len() {
                let mut worst = 0.0f64;
                for x in 0..k {
                    for y in 0..k {
                        worst = worst.max((a[perm[x] * k + perm[y]] - b[x * k + y]).abs());
                    }
                }
                *best = best.min(worst);
                return;
            }
            for j in i..perm.len() {
                perm.swap(i, j);
                visit(perm, i + 1, k, a, b, best);
                perm.swap(i, j);
            }
        }
        visit(&mut perm, 0, k, &self.entries, &other.entries, &mut best);
        best
    }

    /// Mean-square index k^{-2} Σ m_ij².
    pub fn index(&self) -> f64 {
        self.entries.iter().map(|m| m * m).sum::<f64>() / (self.k * self.k) as f64
    }
}

/// The density matrix of a balanced partition (ordered-pair convention on
/// the diagonal).
pub fn density_matrix(g: &Graph, part: &Partition, p: f64) -> Result<DensityMatrix> {
    if !part.is_balanced() {
        return domain("density_matrix requires a balanced partition");
    }
    let q = quotient_kernel(g, part, p)?;
    Ok(DensityMatrix {
        k: part.k(),
        entries: q.values().to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloudProvenance {
    Enumerated,
    Sampled,
    Extremal,
}

/// A set of canonicalized density matrices over balanced k-partitions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixCloud {
    pub k: usize,
    pub points: Vec<DensityMatrix>,
    pub provenance: CloudProvenance,
    pub sample_size: usize,
    pub seed: u64,
}

impl MatrixCloud {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cloud serializes")
    }
}

#[derive(Clone, Copy, Debug)]
pub enum CloudStrategy {
    /// Exhaustive over balanced partitions (n <= 12).
    Enumerate,
    /// Uniform random balanced partitions.
    Sample,
    /// Sampled plus index-ascent local search refinement of each sample.
    Extremal,
}

/// Builds a matrix cloud for balanced k-partitions of `g`.
pub fn matrix_cloud(
    g: &Graph,
    k: usize,
    strategy: CloudStrategy,
    budget: usize,
    seed: u64,
    p: f64,
) -> Result<MatrixCloud> {
    let n = g.n();
    if k == 0 || k > n {
        return domain("matrix_cloud: 1 <= k <= n");
    }
    match strategy {
        CloudStrategy::Enumerate => {
            if n > 12 {
                return capacity("exhaustive clouds are limited to n <= 12");
            }
            let mut points = Vec::new();
            let mut seen = std::collections::HashSet::new();
            let cap = n.div_ceil(k);
            let lo = n / k;
            let mut assign = vec![0u32; n];
            let mut sizes = vec![0usize; k];
            enumerate_balanced(g, p, k, 0, cap, lo, &mut assign, &mut sizes, &mut |m| {
                let canon = m.canonical();
                let key: Vec<u64> = canon.entries.iter().map(|x| x.to_bits()).collect();
                if seen.insert(key) {
                    points.push(canon);
                }
            })?;
            Ok(MatrixCloud {
                k,
                points,
                provenance: CloudProvenance::Enumerated,
                sample_size: 0,
                seed,
            })
        }
        CloudStrategy::Sample => {
            let mut points = Vec::with_capacity(budget);
            for i in 0..budget {
                let part = Partition::balanced_random(n, k, seed ^ (i as u64) << 1)?;
                points.push(density_matrix(g, &part, p)?.canonical());
            }
            Ok(MatrixCloud {
                k,
                points,
                provenance: CloudProvenance::Sampled,
                sample_size: budget,
                seed,
            })
        }
        CloudStrategy::Extremal => {
            let mut points = Vec::with_capacity(budget);
            for i in 0..budget {
                let part = Partition::balanced_random(n, k, seed ^ (i as u64) << 1)?;
                let improved = index_ascent(g, part, p, 40, seed ^ 0xA5)?;
                points.push(density_matrix(g, &improved, p)?.canonical());
            }
            Ok(MatrixCloud {
                k,
                points,
                provenance: CloudProvenance::Extremal,
                sample_size: budget,
                seed,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_balanced(
    g: &Graph,
    p: f64,
    k: usize,
    v: usize,
    cap: usize,
    lo: usize,
    assign: &mut Vec<u32>,
    sizes: &mut Vec<usize>,
    emit: &mut impl FnMut(DensityMatrix),
) -> Result<()> {
    let n = g.n();
    if v == n {
        if sizes.iter().all(|&s| s >= lo) {
            let part = Partition::from_assignment(assign.clone())?;
            emit(density_matrix(g, &part, p)?);
        }
        return Ok(());
    }
    // symmetry break: vertex v may open at most one new part
    let open = sizes.iter().take_while(|&&s| s > 0).count();
    for part in 0..k.min(open + 1) {
        if sizes[part] == cap {
            continue;
        }
        assign[v] = part as u32;
        sizes[part] += 1;
        enumerate_balanced(g, p, k, v + 1, cap, lo, assign, sizes, emit)?;
        sizes[part] -= 1;
    }
    Ok(())
}

/// Greedy index ascent by swapping vertex pairs across parts. Swaps keep
/// part sizes fixed; the pair-count matrix is maintained incrementally and
/// the index recomputed from it, so each candidate costs O(deg).
fn index_ascent(
    g: &Graph,
    part: Partition,
    p: f64,
    sweeps: usize,
    seed: u64,
) -> Result<Partition> {
    let n = g.n();
    let k = part.k();
    let mut assign = part.assignment().to_vec();
    let sizes = part.sizes();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // ordered pair counts
    let mut e = vec![0i64; k * k];
    for v in 0..n {
        for &w in g.neighbors(v) {
            e[assign[v] as usize * k + assign[w as usize] as usize] += 1;
        }
    }
    let index_of = |e: &[i64]| -> f64 {
        let n2 = (n * n) as f64;
        let mut s = 0.0;
        for a in 0..k {
            for b in 0..k {
                let d = e[a * k + b] as f64 / (p * (sizes[a] * sizes[b]) as f64);
                s += d * d * (sizes[a] * sizes[b]) as f64 / n2;
            }
        }
        s
    };
    let apply_move = |e: &mut [i64], assign: &[u32], v: usize, from: usize, to: usize| {
        for &w in g.neighbors(v) {
            let pw = assign[w as usize] as usize;
            e[from * k + pw] -= 1;
            e[pw * k + from] -= 1;
            e[to * k + pw] += 1;
            e[pw * k + to] += 1;
        }
    };
    let mut cur = index_of(&e);
    for _ in 0..sweeps {
        let mut improved = false;
        for _ in 0..(4 * n) {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            let (pu, pv) = (assign[u] as usize, assign[v] as usize);
            if pu == pv || u == v {
                continue;
            }
            // swap u -> pv, v -> pu
            apply_move(&mut e, &assign, u, pu, pv);
            assign[u] = pv as u32;
            apply_move(&mut e, &assign, v, pv, pu);
            assign[v] = pu as u32;
            let cand = index_of(&e);
            if cand > cur + 1e-15 {
                cur = cand;
                improved = true;
            } else {
                apply_move(&mut e, &assign, v, pu, pv);
                assign[v] = pv as u32;
                apply_move(&mut e, &assign, u, pv, pu);
                assign[u] = pu as u32;
            }
        }
        if !improved {
            break;
        }
    }
    Partition::from_assignment(assign)
}

/// Hausdorff distance between clouds under ℓ∞ on matrices. An empty cloud
/// sits at distance (2k)²·c_scale from everything, the compact-space
/// convention.
pub fn hausdorff_distance(x: &MatrixCloud, y: &MatrixCloud) -> Result<f64> {
    hausdorff_distance_with_scale(x, y, 1.0)
}

pub fn hausdorff_distance_with_scale(
    x: &MatrixCloud,
    y: &MatrixCloud,
    c_scale: f64,
) -> Result<f64> {
    if x.k != y.k {
        return domain("hausdorff_distance: cloud dimensions differ");
    }
    match (x.points.is_empty(), y.points.is_empty()) {
        (true, true) => return Ok(0.0),
        (true, false) | (false, true) => {
            return Ok((2 * x.k).pow(2) as f64 * c_scale);
        }
        _ => {}
    }
    let one_sided = |from: &MatrixCloud, to: &MatrixCloud| -> f64 {
        from.points
            .iter()
            .map(|m| {
                to.points
                    .iter()
                    .map(|m2| m.linf(m2))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(one_sided(x, y).max(one_sided(y, x)))
}

/// Samples a cloud of density matrices for a kernel: equal-measure random
/// interval partitions of the block grid with exact per-cell integration.
pub fn kernel_matrix_cloud(
    kappa: &StepKernel,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<MatrixCloud> {
    if k == 0 {
        return domain("kernel_matrix_cloud: k >= 1");
    }
    let mut points = Vec::with_capacity(samples);
    for s in 0..samples {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (s as u64).wrapping_mul(0x9E3779B97F4A));
        // refine the block grid with random cuts, then deal segments into
        // k bins of measure exactly 1/k (splitting at bin boundaries)
        let mut bounds: Vec<f64> = vec![0.0, 1.0];
        let mut acc = 0.0;
        for &m in kappa.measures() {
            acc += m;
            bounds.push(acc);
        }
        for _ in 0..(4 * k).max(16) {
            bounds.push(rng.gen::<f64>());
        }
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        #[derive(Clone)]
        struct Seg {
            lo: f64,
            len: f64,
            block: usize,
        }
        let locate = |mid: f64| -> usize {
            let mut acc = 0.0;
            for (i, &m) in kappa.measures().iter().enumerate() {
                acc += m;
                if mid < acc {
                    return i;
                }
            }
            kappa.k() - 1
        };
        let mut segs: Vec<Seg> = bounds
            .windows(2)
            .filter(|w| w[1] - w[0] > 1e-13)
            .map(|w| Seg {
                lo: w[0],
                len: w[1] - w[0],
                block: locate(0.5 * (w[0] + w[1])),
            })
            .collect();
        segs.shuffle(&mut rng);
        // per-bin mass per kernel block
        let kb = kappa.k();
        let target = 1.0 / k as f64;
        let mut mass = vec![vec![0.0f64; kb]; k];
        let mut bin = 0usize;
        let mut room = target;
        for seg in segs {
            let mut remaining = seg.len;
            let mut lo = seg.lo;
            while remaining > 1e-15 && bin < k {
                let take = remaining.min(room);
                mass[bin][seg.block] += take;
                remaining -= take;
                room -= take;
                lo += take;
                if room <= 1e-15 {
                    bin += 1;
                    room = target;
                }
            }
            let _ = lo;
        }
        let mut entries = vec![0.0f64; k * k];
        for a in 0..k {
            for b in 0..k {
                let mut integral = 0.0;
                for ba in 0..kb {
                    if mass[a][ba] == 0.0 {
                        continue;
                    }
                    for bb in 0..kb {
                        integral += kappa.value(ba, bb) * mass[a][ba] * mass[b][bb];
                    }
                }
                entries[a * k + b] = integral / (target * target);
            }
        }
        points.push(DensityMatrix { k, entries }.canonical());
    }
    Ok(MatrixCloud {
        k,
        points,
        provenance: CloudProvenance::Sampled,
        sample_size: samples,
        seed,
    })
}

/// One side of a partition-distance comparison.
pub enum Side<'a> {
    Graph(&'a Graph),
    Kernel(&'a StepKernel),
}

/// Per-k Hausdorff distances plus the 2^{-k}-weighted aggregate
/// Σ_k 2^{-k} min(d_H(k), 1). The weighting is one concrete choice of
/// product-topology metric and is configuration, not canon.
pub fn partition_distance(
    a: &Side<'_>,
    b: &Side<'_>,
    p: f64,
    k_max: usize,
    budget: usize,
    seed: u64,
) -> Result<(Vec<(usize, f64)>, f64)> {
    if k_max < 2 {
        return domain("partition_distance: k_max >= 2");
    }
    let mut per_k = Vec::new();
    let mut aggregate = 0.0;
    for k in 2..=k_max {
        // both sides share the sampling seed: identical inputs give
        // identical clouds (distance exactly zero), and paired sampling
        // reduces variance for perturbation comparisons
        let cloud = |side: &Side<'_>| -> Result<MatrixCloud> {
            match side {
                Side::Graph(g) => matrix_cloud(g, k, CloudStrategy::Sample, budget, seed, p),
                Side::Kernel(kap) => kernel_matrix_cloud(kap, k, budget, seed),
            }
        };
        let ca = cloud(a)?;
        let cb = cloud(b)?;
        let d = hausdorff_distance(&ca, &cb)?;
        aggregate += 0.5f64.powi(k as i32) * d.min(1.0);
        per_k.push((k, d));
    }
    Ok((per_k, aggregate))
}

/// Index-ascent search for a locally ε-optimal density matrix: a matrix
/// whose index is within `eps` of the best seen among sampled balanced
/// partitions with up to `f_bound` parts. Budget-limited certificate.
pub fn locally_optimal_matrix(
    g: &Graph,
    k: usize,
    eps: f64,
    f_bound: usize,
    budget: usize,
    seed: u64,
    p: f64,
) -> Result<(DensityMatrix, f64, bool)> {
    if eps <= 0.0 {
        return domain("locally_optimal_matrix: eps > 0");
    }
    let mut best: Option<(f64, Partition)> = None;
    for i in 0..budget.max(1) {
        let part = Partition::balanced_random(g.n(), k, seed ^ (i as u64) << 3)?;
        let part = index_ascent(g, part, p, 60, seed ^ (i as u64) << 5)?;
        let idx = partition_index(g, &part, p)?;
        if best.as_ref().is_none_or(|(b, _)| idx > *b) {
            best = Some((idx, part));
        }
    }
    let (own_index, part) = best.expect("budget >= 1");
    // compare against sampled coarser/finer partitions up to f_bound parts
    let mut rival = own_index;
    for ell in 2..=f_bound.max(k) {
        if ell > g.n() {
            break;
        }
        for i in 0..budget.max(1) {
            let cand = Partition::balanced_random(g.n(), ell, seed ^ 0x77 ^ (i as u64) << 2)?;
            let idx = partition_index(g, &cand, p)?;
            rival = rival.max(idx);
        }
    }
    let matrix = density_matrix(g, &part, p)?;
    Ok((matrix, own_index, own_index + eps >= rival))
}
