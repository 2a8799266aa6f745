//! Finite-type (step) kernel algebra: block kernels on [0,1]^2, exact motif
//! densities, path powers, block averaging, dyadic approximation, the named
//! example kernels, and moment/spectral signatures.

use crate::error::{capacity, domain, Result};
use crate::motif::Motif;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

const MEASURE_SUM_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;

/// A symmetric nonnegative step kernel: `k` blocks with positive measures
/// summing to 1 and a symmetric `k×k` value matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct StepKernel {
    measures: Vec<f64>,
    values: Vec<f64>,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    measures: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl StepKernel {
    /// Validates measures (positive, sum 1 within 1e-12) and symmetry
    /// (within 1e-9, then symmetrized exactly).
    pub fn new(measures: Vec<f64>, mut values: Vec<f64>) -> Result<StepKernel> {
        let k = measures.len();
        if k == 0 {
            return domain("kernel needs at least one block");
        }
        if values.len() != k * k {
            return domain("value matrix size must be k*k");
        }
        if measures.iter().any(|&m| !(m > 0.0)) {
            return domain("block measures must be positive");
        }
        let sum: f64 = measures.iter().sum();
        if (sum - 1.0).abs() > MEASURE_SUM_TOL {
            return domain(format!("block measures sum to {sum}, expected 1"));
        }
        for a in 0..k {
            for b in (a + 1)..k {
                let x = values[a * k + b];
                let y = values[b * k + a];
                if (x - y).abs() > SYMMETRY_TOL {
                    return domain(format!("kernel not symmetric at ({a},{b})"));
                }
                let avg = 0.5 * (x + y);
                values[a * k + b] = avg;
                values[b * k + a] = avg;
            }
        }
        if values.iter().any(|&v| v < 0.0) {
            return domain("kernel values must be nonnegative");
        }
        Ok(StepKernel {
            measures,
            values,
            k,
        })
    }

    pub fn constant(c: f64) -> StepKernel {
        StepKernel::new(vec![1.0], vec![c]).expect("constant kernel is valid")
    }

    pub fn from_json(text: &str) -> Result<StepKernel> {
        let parsed: KernelJson = serde_json::from_str(text)?;
        let k = parsed.measures.len();
        let mut flat = Vec::with_capacity(k * k);
        if parsed.values.len() != k {
            return domain("values must have one row per block");
        }
        for row in &parsed.values {
            if row.len() != k {
                return domain("values rows must have k entries");
            }
            flat.extend_from_slice(row);
        }
        StepKernel::new(parsed.measures, flat)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<f64>> = (0..self.k)
            .map(|a| self.values[a * self.k..(a + 1) * self.k].to_vec())
            .collect();
        serde_json::to_string(&KernelJson {
            measures: self.measures.clone(),
            values: rows,
        })
        .expect("kernel serializes")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn value(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.k + b]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Total integral over the square.
    pub fn integral(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.k {
            for b in 0..self.k {
                s += self.measures[a] * self.measures[b] * self.value(a, b);
            }
        }
        s
    }

    /// Squared L2 norm.
    pub fn l2_sq(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.k {
            for b in 0..self.k {
                s += self.measures[a] * self.measures[b] * self.value(a, b).powi(2);
            }
        }
        s
    }

    /// L1 distance to another kernel on the same block structure.
    pub fn l1_distance_same_grid(&self, other: &StepKernel) -> Result<f64> {
        if self.k != other.k {
            return domain("kernels have different block counts");
        }
        let mut s = 0.0;
        for a in 0..self.k {
            if (self.measures[a] - other.measures[a]).abs() > MEASURE_SUM_TOL {
                return domain("kernels live on different grids");
            }
            for b in 0..self.k {
                s += self.measures[a] * self.measures[b] * (self.value(a, b) - other.value(a, b)).abs();
            }
        }
        Ok(s)
    }

    /// Permutes blocks (with their measures); a measure-preserving
    /// rearrangement.
    pub fn permute_blocks(&self, perm: &[usize]) -> Result<StepKernel> {
        if perm.len() != self.k {
            return domain("permutation length mismatch");
        }
        let mut measures = vec![0.0; self.k];
        let mut values = vec![0.0; self.k * self.k];
        for a in 0..self.k {
            measures[a] = self.measures[perm[a]];
            for b in 0..self.k {
                values[a * self.k + b] = self.value(perm[a], perm[b]);
            }
        }
        StepKernel::new(measures, values)
    }

    /// Splits block `block` into two halves with identical rows; motif
    /// densities are unchanged.
    pub fn split_block(&self, block: usize) -> Result<StepKernel> {
        if block >= self.k {
            return domain("split_block: block out of range");
        }
        let mut measures = self.measures.clone();
        let half = measures[block] / 2.0;
        measures[block] = half;
        measures.push(half);
        let k2 = self.k + 1;
        let mut values = vec![0.0; k2 * k2];
        let src = |i: usize| if i == self.k { block } else { i };
        for a in 0..k2 {
            for b in 0..k2 {
                values[a * k2 + b] = self.value(src(a), src(b));
            }
        }
        StepKernel::new(measures, values)
    }
}

/// Exact motif density `s(F, κ)`: sum over block assignments of the measure
/// product times the edge-value product, multiplicities as repeated factors.
pub fn motif_density(f: &Motif, kappa: &StepKernel) -> Result<f64> {
    if f.k() > 10 {
        return capacity("motif_density: |F| <= 10");
    }
    let k = kappa.k();
    let kf = f.k();
    // group edges by the later endpoint so each factor is applied as soon
    // as both endpoints are assigned
    let mut edges_at = vec![Vec::new(); kf];
    for &(u, v) in f.edges() {
        edges_at[v as usize].push(u as usize);
    }
    let mut assign = vec![0usize; kf];
    let mut total = 0.0f64;
    fn rec(
        v: usize,
        kf: usize,
        k: usize,
        kappa: &StepKernel,
        edges_at: &[Vec<usize>],
        assign: &mut [usize],
        weight: f64,
        total: &mut f64,
    ) {
        if v == kf {
            *total += weight;
            return;
        }
        for block in 0..k {
            assign[v] = block;
            let mut w = weight * kappa.measures()[block];
            if w == 0.0 {
                continue;
            }
            for &u in &edges_at[v] {
                w *= kappa.value(assign[u], block);
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 || edges_at[v].is_empty() {
                rec(v + 1, kf, k, kappa, edges_at, assign, w, total);
            }
        }
    }
    rec(0, kf, k, kappa, &edges_at, &mut assign, 1.0, &mut total);
    Ok(total)
}

/// The path-power kernel `κ^t`: same blocks, values `M (D M)^{t-1}` with
/// `D = diag(measures)`; `κ^t(x,y)` integrates length-`t` paths from x to y.
pub fn path_power(kappa: &StepKernel, t: usize) -> Result<StepKernel> {
    if t == 0 {
        return domain("path_power: t must be >= 1");
    }
    let k = kappa.k();
    let m = DMatrix::from_row_slice(k, k, kappa.values());
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(kappa.measures()));
    let mut acc = m.clone();
    for _ in 1..t {
        acc = &acc * &d * &m;
    }
    StepKernel::new(kappa.measures().to_vec(), acc.as_slice().to_vec())
}

/// Averages the kernel over a partition of its blocks; the integral over
/// every part rectangle is preserved exactly.
pub fn average_over_partition(kappa: &StepKernel, parts: &[usize]) -> Result<StepKernel> {
    let k = kappa.k();
    if parts.len() != k {
        return domain("partition must assign every block");
    }
    let pcount = parts.iter().max().map_or(0, |m| m + 1);
    let mut pm = vec![0.0f64; pcount];
    for (b, &p) in parts.iter().enumerate() {
        pm[p] += kappa.measures()[b];
    }
    if pm.iter().any(|&m| m == 0.0) {
        return domain("empty part in block partition");
    }
    let mut integrals = vec![0.0f64; pcount * pcount];
    for a in 0..k {
        for b in 0..k {
            integrals[parts[a] * pcount + parts[b]] +=
                kappa.measures()[a] * kappa.measures()[b] * kappa.value(a, b);
        }
    }
    let mut values = vec![0.0f64; pcount * pcount];
    for a in 0..pcount {
        for b in 0..pcount {
            values[a * pcount + b] = integrals[a * pcount + b] / (pm[a] * pm[b]);
        }
    }
    StepKernel::new(pm, values)
}

/// Averages onto the uniform dyadic grid with `2^level` blocks. Exact once
/// the grid refines the kernel's (dyadic) block boundaries.
pub fn dyadic_approximation(kappa: &StepKernel, level: u32) -> Result<StepKernel> {
    if level > 10 {
        return capacity("dyadic_approximation: level <= 10");
    }
    let grid = 1usize << level;
    // cumulative block boundaries
    let mut bounds = Vec::with_capacity(kappa.k() + 1);
    bounds.push(0.0f64);
    for &m in kappa.measures() {
        bounds.push(bounds.last().unwrap() + m);
    }
    // overlap segments of every grid interval with the kernel blocks
    let cell = 1.0 / grid as f64;
    let mut overlaps: Vec<Vec<(usize, f64)>> = vec![Vec::new(); grid];
    let mut block = 0usize;
    for (i, ov) in overlaps.iter_mut().enumerate() {
        let lo = i as f64 * cell;
        let hi = lo + cell;
        while block + 1 < bounds.len() - 1 && bounds[block + 1] <= lo + 1e-15 {
            block += 1;
        }
        let mut b = block;
        loop {
            let blo = bounds[b].max(lo);
            let bhi = bounds[b + 1].min(hi);
            if bhi > blo + 1e-15 {
                ov.push((b, bhi - blo));
            }
            if bounds[b + 1] >= hi - 1e-15 || b + 1 >= kappa.k() {
                break;
            }
            b += 1;
        }
    }
    let mut values = vec![0.0f64; grid * grid];
    for i in 0..grid {
        for j in 0..grid {
            let mut s = 0.0;
            for &(a, la) in &overlaps[i] {
                for &(b, lb) in &overlaps[j] {
                    s += la * lb * kappa.value(a, b);
                }
            }
            values[i * grid + j] = s / (cell * cell);
        }
    }
    StepKernel::new(vec![cell; grid], values)
}

/// Named example kernels.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedKernel {
    /// Constant kernel with the given value.
    Constant(f64),
    /// Block-diagonal 2x2 chessboard (two cliques in the dense picture).
    Chessboard1,
    /// Anti-diagonal 2x2 chessboard (complete bipartite).
    Chessboard2,
    /// Rank-one kernel f(x)f(y) with f(x)=log(1/x), discretized to `r`
    /// uniform blocks by exact block averaging of f.
    Rank1Log { r: usize },
    /// Diagonal-block kernel with value i^(2/d) on the i-th block of length
    /// 2^-i, truncated at `r` intervals; remaining mass gets value 0.
    KappaD { d: f64, r: usize },
    /// The random dyadic sum κ = Σ κ_r truncated at level `r`, seeded.
    RandomDyadic { r: u32, seed: u64 },
}

pub fn named_kernel(which: &NamedKernel) -> Result<StepKernel> {
    match *which {
        NamedKernel::Constant(c) => {
            if c < 0.0 {
                return domain("constant kernel must be nonnegative");
            }
            Ok(StepKernel::constant(c))
        }
        NamedKernel::Chessboard1 => StepKernel::new(vec![0.5, 0.5], vec![1.0, 0.0, 0.0, 1.0]),
        NamedKernel::Chessboard2 => StepKernel::new(vec![0.5, 0.5], vec![0.0, 1.0, 1.0, 0.0]),
        NamedKernel::Rank1Log { r } => {
            if r == 0 || r > 4096 {
                return domain("rank1_log needs 1 <= r <= 4096");
            }
            // block average of f over [a,b]: integral of log(1/x) is x - x ln x
            let antider = |x: f64| if x == 0.0 { 0.0 } else { x - x * x.ln() };
            let w = 1.0 / r as f64;
            let f: Vec<f64> = (0..r)
                .map(|i| {
                    let a = i as f64 * w;
                    let b = a + w;
                    (antider(b) - antider(a)) / w
                })
                .collect();
            let mut values = vec![0.0; r * r];
            for a in 0..r {
                for b in 0..r {
                    values[a * r + b] = f[a] * f[b];
                }
            }
            StepKernel::new(vec![w; r], values)
        }
        NamedKernel::KappaD { d, r } => {
            if d <= 0.0 || r == 0 || r > 50 {
                return domain("kappa_D needs d > 0 and 1 <= r <= 50");
            }
            let k = r + 1; // trailing block carries the remaining mass
            let mut measures = Vec::with_capacity(k);
            let mut rest = 1.0f64;
            for i in 1..=r {
                let len = 0.5f64.powi(i as i32);
                measures.push(len);
                rest -= len;
            }
            measures.push(rest);
            let mut values = vec![0.0; k * k];
            for i in 1..=r {
                values[(i - 1) * k + (i - 1)] = (i as f64).powf(2.0 / d);
            }
            StepKernel::new(measures, values)
        }
        NamedKernel::RandomDyadic { r, seed } => {
            if r > 3 {
                return capacity("random_dyadic: level <= 3 (2^(2^r) blocks)");
            }
            let blocks = 1usize << (1 << r); // finest partition: 2^(2^r) intervals
            let mut values = vec![0.0f64; blocks * blocks];
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            for level in 0..=r {
                let cells = 1usize << (1 << level); // 2^(2^level)
                let span = blocks / cells;
                let height = (1u64 << level) as f64; // value 2^level
                let prob = 0.25f64.powi(level as i32); // probability 2^(-2 level)
                for a in 0..cells {
                    for b in a..cells {
                        if rng.gen::<f64>() < prob {
                            for i in a * span..(a + 1) * span {
                                for j in b * span..(b + 1) * span {
                                    values[i * blocks + j] += height;
                                    if a != b {
                                        values[j * blocks + i] += height;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            StepKernel::new(vec![1.0 / blocks as f64; blocks], values)
        }
    }
}

/// Rearrangement-invariant signature: spectrum of the weighted operator,
/// cycle moments, and densities over a motif family. Equivalent kernels
/// agree; disagreement certifies non-equivalence (the converse is not
/// claimed).
#[derive(Clone, Debug)]
pub struct MomentSignature {
    /// Eigenvalues of D^{1/2} M D^{1/2}, descending.
    pub spectrum: Vec<f64>,
    /// s(C_j, κ) for j = 3..=max_cycle, computed by trace of powers.
    pub cycle_moments: Vec<f64>,
    pub count_table: Vec<(Motif, f64)>,
}

pub fn moment_signature(
    kappa: &StepKernel,
    max_cycle: usize,
    family: &[Motif],
) -> Result<MomentSignature> {
    if max_cycle < 3 {
        return domain("moment_signature: max_cycle >= 3");
    }
    let k = kappa.k();
    let mut s = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            s[(a, b)] =
                kappa.measures()[a].sqrt() * kappa.value(a, b) * kappa.measures()[b].sqrt();
        }
    }
    let mut spectrum: Vec<f64> = s
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // trace route for cycle moments, independent of the eigensolver
    let mut cycle_moments = Vec::with_capacity(max_cycle - 2);
    let mut power = &s * &s;
    power = &power * &s; // s^3
    cycle_moments.push(power.trace());
    for _ in 4..=max_cycle {
        power = &power * &s;
        cycle_moments.push(power.trace());
    }

    let mut count_table = Vec::with_capacity(family.len());
    for f in family {
        count_table.push((f.clone(), motif_density(f, kappa)?));
    }
    Ok(MomentSignature {
        spectrum,
        cycle_moments,
        count_table,
    })
}

impl MomentSignature {
    /// True when every component agrees within `tol`. Spectra are padded
    /// with zeros (block splits only add null directions).
    pub fn agrees_with(&self, other: &MomentSignature, tol: f64) -> bool {
        let len = self.spectrum.len().max(other.spectrum.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let mut a: Vec<f64> = (0..len).map(|i| get(&self.spectrum, i)).collect();
        let mut b: Vec<f64> = (0..len).map(|i| get(&other.spectrum, i)).collect();
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        b.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for i in 0..len {
            if (a[i] - b[i]).abs() > tol {
                return false;
            }
        }
        if self.cycle_moments.len() != other.cycle_moments.len() {
            return false;
        }
        for (x, y) in self.cycle_moments.iter().zip(&other.cycle_moments) {
            if (x - y).abs() > tol {
                return false;
            }
        }
        for ((fa, va), (fb, vb)) in self.count_table.iter().zip(&other.count_table) {
            if fa.canonical_key() != fb.canonical_key() || (va - vb).abs() > tol {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_density_is_power() {
        let k = StepKernel::constant(0.7);
        for f in [
            Motif::edge(),
            Motif::cycle(4).unwrap(),
            Motif::complete(4).unwrap(),
        ] {
            let d = motif_density(&f, &k).unwrap();
            assert!((d - 0.7f64.powi(f.e() as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn chessboard_densities() {
        let k1 = named_kernel(&NamedKernel::Chessboard1).unwrap();
        let k2 = named_kernel(&NamedKernel::Chessboard2).unwrap();
        let c5 = Motif::cycle(5).unwrap();
        assert!((motif_density(&c5, &k1).unwrap() - 2.0f64.powi(1 - 5)).abs() < 1e-15);
        assert!(motif_density(&c5, &k2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rank1_density_is_moment_product() {
        let kappa = named_kernel(&NamedKernel::Rank1Log { r: 16 }).unwrap();
        // degree sequence of the path P2 is (1,2,1)
        let f = Motif::path(2).unwrap();
        let d = motif_density(&f, &kappa).unwrap();
        // direct summation oracle over the same blocks
        let fvals: Vec<f64> = (0..16).map(|a| kappa.value(a, a).sqrt()).collect();
        let w = 1.0 / 16.0;
        let m1: f64 = fvals.iter().map(|v| v * w).sum();
        let m2: f64 = fvals.iter().map(|v| v * v * w).sum();
        assert!((d - m1 * m1 * m2).abs() < 1e-9, "{d} vs {}", m1 * m1 * m2);
    }

    #[test]
    fn path_power_basics() {
        let c = StepKernel::constant(0.5);
        let c3 = path_power(&c, 3).unwrap();
        assert!((c3.value(0, 0) - 0.125).abs() < 1e-15);
        // chessboard2 squared: paths of length 2 stay inside a class
        let k2 = named_kernel(&NamedKernel::Chessboard2).unwrap();
        let sq = path_power(&k2, 2).unwrap();
        assert!((sq.value(0, 0) - 0.5).abs() < 1e-15);
        assert!(sq.value(0, 1).abs() < 1e-15);
        assert!(path_power(&c, 0).is_err());
    }

    #[test]
    fn subdivision_identity_small() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut values = vec![0.0; 9];
        for a in 0..3 {
            for b in a..3 {
                let v = rng.gen::<f64>();
                values[a * 3 + b] = v;
                values[b * 3 + a] = v;
            }
        }
        let kappa = StepKernel::new(vec![0.2, 0.3, 0.5], values).unwrap();
        for t in [2usize, 3] {
            let kt = path_power(&kappa, t).unwrap();
            for f in [Motif::edge(), Motif::double_edge()] {
                let lhs = motif_density(&f.subdivide(t).unwrap(), &kappa).unwrap();
                let rhs = motif_density(&f, &kt).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "t={t} {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn path_power_composes() {
        let kappa = named_kernel(&NamedKernel::KappaD { d: 3.0, r: 4 }).unwrap();
        let a = path_power(&path_power(&kappa, 2).unwrap(), 3).unwrap();
        let b = path_power(&kappa, 6).unwrap();
        for i in 0..a.k() {
            for j in 0..a.k() {
                assert!((a.value(i, j) - b.value(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn averaging_preserves_integrals() {
        let k1 = named_kernel(&NamedKernel::Chessboard1).unwrap();
        let single = average_over_partition(&k1, &[0, 0]).unwrap();
        assert_eq!(single.k(), 1);
        assert!((single.value(0, 0) - 0.5).abs() < 1e-15);
        let id = average_over_partition(&k1, &[0, 1]).unwrap();
        assert_eq!(id, k1);
        assert!(average_over_partition(&k1, &[0, 2]).is_err());
    }

    #[test]
    fn dyadic_is_exact_on_dyadic_grids() {
        let k1 = named_kernel(&NamedKernel::Chessboard1).unwrap();
        let refined = dyadic_approximation(&k1, 3).unwrap();
        // level-3 grid refines the half boundary: exact representation
        for i in 0..8 {
            for j in 0..8 {
                let expect = if (i < 4) == (j < 4) { 1.0 } else { 0.0 };
                assert!((refined.value(i, j) - expect).abs() < 1e-12);
            }
        }
        let coarse = dyadic_approximation(&k1, 0).unwrap();
        assert!((coarse.value(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dyadic_error_matches_direct_integration() {
        // truncated kappa_D is fully dyadic: level-8 averaging is exact
        let kd = named_kernel(&NamedKernel::KappaD { d: 3.0, r: 6 }).unwrap();
        let exact = dyadic_approximation(&kd, 8).unwrap();
        let (ra, rb) = {
            // compare on the common grid by direct midpoint evaluation below
            (kd.clone(), exact.clone())
        };
        let _ = (&ra, &rb);
        // a kernel with a 1/3 boundary is never exactly representable
        let kappa = StepKernel::new(
            vec![1.0 / 3.0, 2.0 / 3.0],
            vec![1.0, 0.25, 0.25, 0.5],
        )
        .unwrap();
        let level = 8;
        let approx = dyadic_approximation(&kappa, level).unwrap();
        // direct integration oracle: L1 distance computed cell by cell on the
        // common refinement of both grids
        let mut bounds: Vec<f64> = vec![0.0];
        for &m in kappa.measures() {
            bounds.push(bounds.last().unwrap() + m);
        }
        for i in 0..=(1usize << level) {
            bounds.push(i as f64 / (1 << level) as f64);
        }
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let locate = |kernel: &StepKernel, x: f64| -> usize {
            let mut acc = 0.0;
            for (i, &m) in kernel.measures().iter().enumerate() {
                acc += m;
                if x < acc - 1e-15 {
                    return i;
                }
            }
            kernel.k() - 1
        };
        let mut l1 = 0.0;
        for i in 0..bounds.len() - 1 {
            let xi = 0.5 * (bounds[i] + bounds[i + 1]);
            let wi = bounds[i + 1] - bounds[i];
            for j in 0..bounds.len() - 1 {
                let xj = 0.5 * (bounds[j] + bounds[j + 1]);
                let wj = bounds[j + 1] - bounds[j];
                let a = kappa.value(locate(&kappa, xi), locate(&kappa, xj));
                let b = approx.value(locate(&approx, xi), locate(&approx, xj));
                l1 += wi * wj * (a - b).abs();
            }
        }
        // monotone refinement: coarser grid has larger error
        let coarser = dyadic_approximation(&kappa, 4).unwrap();
        let mut l1_coarse = 0.0;
        for i in 0..bounds.len() - 1 {
            let xi = 0.5 * (bounds[i] + bounds[i + 1]);
            let wi = bounds[i + 1] - bounds[i];
            for j in 0..bounds.len() - 1 {
                let xj = 0.5 * (bounds[j] + bounds[j + 1]);
                let wj = bounds[j + 1] - bounds[j];
                let a = kappa.value(locate(&kappa, xi), locate(&kappa, xj));
                let b = coarser.value(locate(&coarser, xi), locate(&coarser, xj));
                l1_coarse += wi * wj * (a - b).abs();
            }
        }
        assert!(l1 <= l1_coarse + 1e-12);
        assert!(l1 > 0.0);
        assert!(l1_coarse > l1);
        // and the dyadic kernel's approximation error is exactly zero
        let mut err = 0.0;
        for i in 0..256usize {
            let x = (i as f64 + 0.5) / 256.0;
            for j in 0..256usize {
                let y = (j as f64 + 0.5) / 256.0;
                let a = kd.value(locate(&kd, x), locate(&kd, y));
                let b = exact.value(locate(&exact, x), locate(&exact, y));
                err += (a - b).abs() / (256.0 * 256.0);
            }
        }
        assert!(err < 1e-12, "dyadic kernel should be exact: {err}");
    }

    #[test]
    fn named_kernel_constructions() {
        let c = named_kernel(&NamedKernel::Constant(1.0)).unwrap();
        assert_eq!(c.value(0, 0), 1.0);
        let kd = named_kernel(&NamedKernel::KappaD { d: 3.0, r: 4 }).unwrap();
        assert_eq!(kd.k(), 5);
        assert!((kd.value(1, 1) - 2.0f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((kd.measures()[0] - 0.5).abs() < 1e-15);
        assert_eq!(kd.value(4, 4), 0.0);
        let r1 = named_kernel(&NamedKernel::RandomDyadic { r: 3, seed: 9 }).unwrap();
        let r2 = named_kernel(&NamedKernel::RandomDyadic { r: 3, seed: 9 }).unwrap();
        assert_eq!(r1, r2);
        assert!(named_kernel(&NamedKernel::RandomDyadic { r: 4, seed: 0 }).is_err());
    }

    #[test]
    fn signatures_detect_chessboard_difference() {
        let k1 = named_kernel(&NamedKernel::Chessboard1).unwrap();
        let k2 = named_kernel(&NamedKernel::Chessboard2).unwrap();
        let fam = vec![Motif::edge()];
        let s1 = moment_signature(&k1, 6, &fam).unwrap();
        let s2 = moment_signature(&k2, 6, &fam).unwrap();
        // C3 moment: 1/4 vs 0
        assert!((s1.cycle_moments[0] - 0.25).abs() < 1e-12);
        assert!(s2.cycle_moments[0].abs() < 1e-12);
        assert!(!s1.agrees_with(&s2, 1e-9));
        // rearrangement leaves the signature unchanged
        let swapped = k1.permute_blocks(&[1, 0]).unwrap();
        let s3 = moment_signature(&swapped, 6, &fam).unwrap();
        assert!(s1.agrees_with(&s3, 1e-9));
    }

    #[test]
    fn signature_cycle_moments_match_spectrum_powers() {
        let kappa = named_kernel(&NamedKernel::KappaD { d: 2.0, r: 5 }).unwrap();
        let sig = moment_signature(&kappa, 8, &[]).unwrap();
        for (idx, j) in (3..=8).enumerate() {
            let from_spec: f64 = sig.spectrum.iter().map(|l| l.powi(j)).sum();
            assert!(
                (from_spec - sig.cycle_moments[idx]).abs() < 1e-9,
                "cycle {j}"
            );
        }
    }

    #[test]
    fn signature_constant_one() {
        let sig = moment_signature(&StepKernel::constant(1.0), 5, &[]).unwrap();
        assert!((sig.spectrum[0] - 1.0).abs() < 1e-12);
        for m in &sig.cycle_moments {
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn split_block_preserves_density() {
        let kappa = named_kernel(&NamedKernel::Chessboard1).unwrap();
        let split = kappa.split_block(0).unwrap();
        for f in [Motif::cycle(3).unwrap(), Motif::cycle(4).unwrap()] {
            let a = motif_density(&f, &kappa).unwrap();
            let b = motif_density(&f, &split).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unbounded_kernel_betrays_itself_in_ktt() {
        // kappa_D with slow decay: max value exceeds C=2, and some K_{t,t}
        // density exceeds C^{t^2} within t <= 6
        let kappa = named_kernel(&NamedKernel::KappaD { d: 1.2, r: 4 }).unwrap();
        let c = 2.0f64;
        assert!(kappa.max_value() > c);
        let mut witnessed = false;
        for t in 1..=6 {
            let f = Motif::complete_bipartite(t, t).unwrap();
            if f.k() > 10 {
                break;
            }
            let d = motif_density(&f, &kappa).unwrap();
            if d > c.powi((t * t) as i32) {
                witnessed = true;
                break;
            }
        }
        assert!(witnessed);
    }

    #[test]
    fn json_round_trip() {
        let kappa = named_kernel(&NamedKernel::KappaD { d: 3.0, r: 3 }).unwrap();
        let text = kappa.to_json();
        let back = StepKernel::from_json(&text).unwrap();
        assert_eq!(kappa, back);
        // asymmetric input within tolerance is symmetrized
        let nearly = r#"{"measures":[0.5,0.5],"values":[[1.0,0.5000000001],[0.5,1.0]]}"#;
        let k = StepKernel::from_json(nearly).unwrap();
        assert_eq!(k.value(0, 1), k.value(1, 0));
        let bad = r#"{"measures":[0.5,0.5],"values":[[1.0,0.9],[0.5,1.0]]}"#;
        assert!(StepKernel::from_json(bad).is_err());
    }
}
