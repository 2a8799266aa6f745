//! Constructive sparse regularity: weakly (ε,p)-regular partitions by
//! iterated cut bisection, strongly (ε,p)-regular partitions by witness-atom
//! refinement, pair-regularity checking with re-verifiable witnesses, and
//! the index/energy bookkeeping that drives the round bounds.
//!
//! The worst-cut and witness-pair oracles of the proofs are NP-hard
//! exactly; seeded heuristics stand in for them. The energy-increment
//! logic is kept: a refinement round only executes when the found cut (or
//! witness set) guarantees the stated index increase, which preserves the
//! round bounds regardless of oracle quality.

use crate::error::{domain, Result};
use crate::graph::{edge_count_pair, Graph};
use crate::kernel::StepKernel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A vertex partition; parts indexed 0..k.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Partition {
    assign: Vec<u32>,
    k: usize,
}

impl Partition {
    pub fn from_assignment(assign: Vec<u32>) -> Result<Partition> {
        let k = assign.iter().max().map_or(0, |&m| m as usize + 1);
        let mut seen = vec![false; k];
        for &a in &assign {
            seen[a as usize] = true;
        }
        if seen.iter().any(|&s| !s) {
            return domain("partition has empty parts");
        }
        Ok(Partition { assign, k })
    }

    /// Balanced seeded random partition into k parts (sizes differ by <= 1).
    pub fn balanced_random(n: usize, k: usize, seed: u64) -> Result<Partition> {
        if k == 0 || k > n {
            return domain("balanced partition needs 1 <= k <= n");
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
        let mut assign = vec![0u32; n];
        for (i, &v) in order.iter().enumerate() {
            assign[v as usize] = (i % k) as u32;
        }
        Ok(Partition { assign, k })
    }

    /// Single part holding every vertex.
    pub fn trivial(n: usize) -> Partition {
        Partition {
            assign: vec![0; n],
            k: 1,
        }
    }

    /// One part per vertex.
    pub fn singletons(n: usize) -> Partition {
        Partition {
            assign: (0..n as u32).collect(),
            k: n,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assign
    }

    pub fn part(&self, v: usize) -> usize {
        self.assign[v] as usize
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0usize; self.k];
        for &a in &self.assign {
            s[a as usize] += 1;
        }
        s
    }

    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut m = vec![Vec::new(); self.k];
        for (v, &a) in self.assign.iter().enumerate() {
            m[a as usize].push(v as u32);
        }
        m
    }

    pub fn is_balanced(&self) -> bool {
        let s = self.sizes();
        let (mn, mx) = (s.iter().min().unwrap(), s.iter().max().unwrap());
        mx - mn <= 1
    }
}

/// The quotient step kernel G/Π: block measures |P_i|/n, values d_p(P_i,P_j).
pub fn quotient_kernel(g: &Graph, part: &Partition, p: f64) -> Result<StepKernel> {
    if p <= 0.0 {
        return domain("quotient_kernel: p > 0");
    }
    let n = g.n();
    if part.assignment().len() != n {
        return domain("partition does not match graph order");
    }
    let k = part.k();
    let sizes = part.sizes();
    if sizes.iter().any(|&s| s == 0) {
        return domain("quotient_kernel: empty part");
    }
    // ordered pair counts per part pair
    let mut e = vec![0u64; k * k];
    for v in 0..n {
        let a = part.part(v);
        for &w in g.neighbors(v) {
            let b = part.part(w as usize);
            e[a * k + b] += 1;
        }
    }
    let mut values = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            values[a * k + b] = e[a * k + b] as f64 / (p * (sizes[a] * sizes[b]) as f64);
        }
    }
    let measures: Vec<f64> = sizes.iter().map(|&s| s as f64 / n as f64).collect();
    StepKernel::new(measures, values)
}

/// ‖G/Π‖₂² = Σ μ_a μ_b d_p(P_a,P_b)²; monotone non-decreasing under
/// refinement by averaging orthogonality.
pub fn partition_index(g: &Graph, part: &Partition, p: f64) -> Result<f64> {
    Ok(quotient_kernel(g, part, p)?.l2_sq())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegularityKind {
    Weak,
    Strong,
}

/// A witnessed irregular pair: part indices plus the violating subsets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairWitness {
    pub part_a: usize,
    pub part_b: usize,
    pub a_prime: Vec<u32>,
    pub b_prime: Vec<u32>,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityReport {
    pub partition: Partition,
    pub kind: RegularityKind,
    pub eps: f64,
    pub rounds: usize,
    pub energy_trace: Vec<f64>,
    pub irregular_pairs_witnessed: Vec<PairWitness>,
    /// Heuristic SSc lower bound of ‖κ_G − G/Π‖ on the returned partition.
    pub cut_certificate: f64,
}

impl RegularityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Oracle state: best vertex bipartition discrepancy between κ_G and G/Π.
struct CutOracle<'g> {
    g: &'g Graph,
    p: f64,
    density: Vec<f64>, // k*k quotient values
    sizes: Vec<usize>,
}

impl<'g> CutOracle<'g> {
    fn new(g: &'g Graph, part: &Partition, p: f64) -> Result<CutOracle<'g>> {
        let q = quotient_kernel(g, part, p)?;
        Ok(CutOracle {
            g,
            p,
            density: q.values().to_vec(),
            sizes: part.sizes(),
        })
    }

    /// |κ_G(S,S^c) − (G/Π)(S,S^c)| for the bipartition given by `in_s`.
    fn discrepancy(&self, part: &Partition, in_s: &[bool]) -> f64 {
        let n = self.g.n();
        let k = part.k();
        let mut cross = 0u64;
        for v in 0..n {
            if !in_s[v] {
                continue;
            }
            for &w in self.g.neighbors(v) {
                if !in_s[w as usize] {
                    cross += 1;
                }
            }
        }
        let mut s_counts = vec![0f64; k];
        for v in 0..n {
            if in_s[v] {
                s_counts[part.part(v)] += 1.0;
            }
        }
        let mut quot = 0.0;
        for a in 0..k {
            for b in 0..k {
                quot += self.density[a * k + b] * s_counts[a] * (self.sizes[b] as f64 - s_counts[b]);
            }
        }
        (cross as f64 / self.p - quot).abs() / (n * n) as f64
    }

    /// Seeded local search for a high-discrepancy bipartition.
    fn search(&self, part: &Partition, restarts: usize, seed: u64) -> (f64, Vec<bool>) {
        let n = self.g.n();
        let k = part.k();
        let runs: Vec<(f64, Vec<bool>)> = (0..restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng =
                    ChaCha12Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0xC2B2AE35));
                let mut in_s: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                // signed objective f = (e_G(S,Sc)/p - quot(S))/n^2
                let mut s_counts = vec![0f64; k];
                for v in 0..n {
                    if in_s[v] {
                        s_counts[part.part(v)] += 1.0;
                    }
                }
                let cross = |in_s: &[bool]| -> f64 {
                    let mut c = 0u64;
                    for v in 0..n {
                        if in_s[v] {
                            for &w in self.g.neighbors(v) {
                                if !in_s[w as usize] {
                                    c += 1;
                                }
                            }
                        }
                    }
                    c as f64
                };
                let quot_val = |s_counts: &[f64]| -> f64 {
                    let mut q = 0.0;
                    for a in 0..k {
                        for b in 0..k {
                            q += self.density[a * k + b]
                                * s_counts[a]
                                * (self.sizes[b] as f64 - s_counts[b]);
                        }
                    }
                    q
                };
                let mut cur = cross(&in_s) / self.p - quot_val(&s_counts);
                let mut order: Vec<usize> = (0..n).collect();
                for _pass in 0..6 {
                    order.shuffle(&mut rng);
                    let mut improved = false;
                    for &v in &order {
                        // exact delta for flipping v
                        let a = part.part(v);
                        let mut to_s = 0f64;
                        let mut to_sc = 0f64;
                        for &w in self.g.neighbors(v) {
                            if in_s[w as usize] {
                                to_s += 1.0;
                            } else {
                                to_sc += 1.0;
                            }
                        }
                        let (d_cross, d_quot);
                        if in_s[v] {
                            d_cross = to_s - to_sc;
                            // leaving S: s_a -= 1
                            let mut dq = 0.0;
                            for b in 0..k {
                                dq -= self.density[a * k + b]
                                    * (self.sizes[b] as f64 - s_counts[b]);
                                dq += self.density[b * k + a] * s_counts[b];
                            }
                            // diagonal correction: removing v also frees slot
                            dq -= self.density[a * k + a];
                            d_quot = dq;
                        } else {
                            d_cross = to_sc - to_s;
                            let mut dq = 0.0;
                            for b in 0..k {
                                dq += self.density[a * k + b]
                                    * (self.sizes[b] as f64 - s_counts[b]);
                                dq -= self.density[b * k + a] * s_counts[b];
                            }
                            dq -= self.density[a * k + a];
                            d_quot = dq;
                        }
                        let cand = cur + d_cross / self.p - d_quot;
                        if cand.abs() > cur.abs() + 1e-12 {
                            in_s[v] = !in_s[v];
                            if in_s[v] {
                                s_counts[a] += 1.0;
                            } else {
                                s_counts[a] -= 1.0;
                            }
                            cur = cand;
                            improved = true;
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                // re-derive exactly to wash out incremental float drift
                let exact = self.discrepancy(part, &in_s);
                (exact, in_s)
            })
            .collect();
        runs.into_iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap()
    }
}

/// Iterated-bisection weakly (ε,p)-regular partition.
///
/// Each round asks the heuristic cut oracle for a bipartition with
/// discrepancy above ε/2, adjusts it so both sides of every part keep at
/// least γ|P_i| vertices (γ = ε/(100C), moved vertices chosen by minimum
/// incident edges), verifies the adjusted discrepancy still exceeds ε/4,
/// and bisects every part along it. Halts when the oracle finds nothing
/// above ε/2. The final partition is rebalanced to near-equal sizes with
/// seeded random moves and the certificate is re-measured afterwards.
pub fn weak_regular_partition(
    g: &Graph,
    p: f64,
    eps: f64,
    initial: &Partition,
    c: f64,
    seed: u64,
) -> Result<RegularityReport> {
    if eps <= 0.0 || c <= 0.0 {
        return domain("weak_regular_partition: eps, C > 0");
    }
    if p <= 0.0 {
        return domain("weak_regular_partition: p > 0");
    }
    let n = g.n();
    if initial.assignment().len() != n {
        return domain("initial partition does not match graph");
    }
    let gamma = eps / (100.0 * c);
    let round_bound = (16.0 * c * c / (eps * eps)).ceil() as usize + 1;
    let mut part = initial.clone();
    let mut energy_trace = vec![partition_index(g, &part, p)?];
    let mut rounds = 0usize;
    let restarts = 10usize;
    loop {
        let oracle = CutOracle::new(g, &part, p)?;
        let (found, in_s) = oracle.search(&part, restarts, seed ^ (rounds as u64) << 8);
        if found <= eps / 2.0 {
            break;
        }
        // boundary adjustment: both sides of each part keep >= γ|P_i|
        let mut adj = in_s.clone();
        let members = part.members();
        for (i, verts) in members.iter().enumerate() {
            let floor = (gamma * verts.len() as f64).floor() as usize;
            if floor == 0 {
                continue;
            }
            let inside: Vec<u32> = verts.iter().copied().filter(|&v| adj[v as usize]).collect();
            let outside: Vec<u32> = verts
                .iter()
                .copied()
                .filter(|&v| !adj[v as usize])
                .collect();
            let fix = |short: &Vec<u32>, long: &Vec<u32>, adj: &mut Vec<bool>, to: bool| {
                if short.len() < floor {
                    let need = floor - short.len();
                    let mut cands: Vec<u32> = long.clone();
                    cands.sort_by_key(|&v| (g.degree(v as usize), v));
                    for &v in cands.iter().take(need) {
                        adj[v as usize] = to;
                    }
                }
            };
            fix(&inside, &outside, &mut adj, true);
            fix(&outside, &inside, &mut adj, false);
            let _ = i;
        }
        let adjusted = oracle.discrepancy(&part, &adj);
        if adjusted < eps / 4.0 {
            // adjustment destroyed the cut (possible only when the bounded
            // density hypothesis fails badly); halt with what we have
            break;
        }
        // bisect every part along the adjusted cut
        let mut new_assign = vec![0u32; n];
        let mut next = 0u32;
        let mut side_part = vec![[u32::MAX; 2]; part.k()];
        for v in 0..n {
            let a = part.part(v);
            let side = usize::from(adj[v]);
            if side_part[a][side] == u32::MAX {
                side_part[a][side] = next;
                next += 1;
            }
            new_assign[v] = side_part[a][side];
        }
        part = Partition::from_assignment(new_assign)?;
        let energy = partition_index(g, &part, p)?;
        let previous = *energy_trace.last().unwrap();
        assert!(
            energy - previous >= (eps / 4.0) * (eps / 4.0) - 1e-9,
            "weak round energy increment {} below (eps/4)^2",
            energy - previous
        );
        energy_trace.push(energy);
        rounds += 1;
        assert!(
            rounds <= round_bound,
            "weak regularity exceeded its round bound {round_bound}"
        );
    }
    // final rebalance to sizes floor/ceil(n/K), random seeded moves
    let part = rebalance(part, n, seed ^ 0xE1F5);
    let oracle = CutOracle::new(g, &part, p)?;
    let (certificate, _) = oracle.search(&part, restarts, seed ^ 0x51DE);
    Ok(RegularityReport {
        partition: part,
        kind: RegularityKind::Weak,
        eps,
        rounds,
        energy_trace,
        irregular_pairs_witnessed: Vec::new(),
        cut_certificate: certificate,
    })
}

/// Moves randomly chosen vertices from oversized to undersized parts until
/// sizes are floor/ceil(n/k).
fn rebalance(part: Partition, n: usize, seed: u64) -> Partition {
    let k = part.k();
    let lo = n / k;
    let hi = lo + usize::from(n % k != 0);
    let mut assign = part.assignment().to_vec();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sizes = part.sizes();
    // parts allowed hi size: exactly n % k of them
    let mut allowance: Vec<usize> = vec![lo; k];
    {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(sizes[i]));
        for &i in order.iter().take(n % k) {
            allowance[i] = hi;
        }
    }
    let mut surplus: Vec<u32> = Vec::new();
    for i in 0..k {
        if sizes[i] > allowance[i] {
            let mut members: Vec<u32> = (0..n as u32)
                .filter(|&v| assign[v as usize] as usize == i)
                .collect();
            members.shuffle(&mut rng);
            for &v in members.iter().take(sizes[i] - allowance[i]) {
                surplus.push(v);
            }
            sizes[i] = allowance[i];
        }
    }
    surplus.shuffle(&mut rng);
    for v in surplus {
        let target = (0..k).find(|&i| sizes[i] < allowance[i]).expect("room exists");
        assign[v as usize] = target as u32;
        sizes[target] += 1;
    }
    Partition::from_assignment(assign).expect("rebalance keeps parts nonempty")
}

/// Outcome of a pair-regularity probe.
#[derive(Clone, Debug)]
pub enum PairRegularity {
    /// No witness found within the budget.
    PassUpToBudget,
    /// A verified violating pair of subsets.
    Fail(PairWitness),
}

/// Probes whether (A,B) is an (ε,p)-regular pair by alternating extremal
/// prefix selection over degree-sorted orders, from seeded restarts. A
/// returned FAIL witness is re-verified with an exact density computation.
pub fn is_regular_pair(
    g: &Graph,
    a: &[u32],
    b: &[u32],
    eps: f64,
    p: f64,
    witness_budget: usize,
    seed: u64,
) -> Result<PairRegularity> {
    let witnesses = regular_pair_witnesses(g, a, b, eps, p, witness_budget, seed)?;
    Ok(match witnesses.into_iter().max_by(|x, y| {
        x.deviation
            .partial_cmp(&y.deviation)
            .unwrap_or(std::cmp::Ordering::Equal)
    }) {
        Some(w) => PairRegularity::Fail(w),
        None => PairRegularity::PassUpToBudget,
    })
}

/// All distinct verified violating rectangles found within the budget
/// (both extremal sides of every alternation fixpoint are checked).
pub fn regular_pair_witnesses(
    g: &Graph,
    a: &[u32],
    b: &[u32],
    eps: f64,
    p: f64,
    witness_budget: usize,
    seed: u64,
) -> Result<Vec<PairWitness>> {
    if eps <= 0.0 || p <= 0.0 {
        return domain("is_regular_pair: eps, p > 0");
    }
    let floor_a = (eps * a.len() as f64).ceil() as usize;
    let floor_b = (eps * b.len() as f64).ceil() as usize;
    if floor_a < 1 || floor_b < 1 {
        return domain("is_regular_pair: size floors below one vertex");
    }
    if floor_a < 20 || floor_b < 20 {
        // subsets this small certify nothing: a handful of vertices always
        // deviates; report the pair as unprobed-regular
        return Ok(Vec::new());
    }
    let d = edge_count_pair(g, a, b) as f64 / (p * (a.len() * b.len()) as f64);
    let mut found: Vec<PairWitness> = Vec::new();
    let mut seen: std::collections::HashSet<(Vec<u32>, Vec<u32>)> = std::collections::HashSet::new();
    let mut record = |a_prime: &[u32], b_prime: &[u32], found: &mut Vec<PairWitness>| {
        if a_prime.len() < floor_a || b_prime.len() < floor_b {
            return;
        }
        let exact = edge_count_pair(g, a_prime, b_prime) as f64
            / (p * (a_prime.len() * b_prime.len()) as f64);
        let exact_dev = (exact - d).abs();
        if exact_dev > eps {
            let mut ka = a_prime.to_vec();
            let mut kb = b_prime.to_vec();
            ka.sort_unstable();
            kb.sort_unstable();
            if seen.insert((ka.clone(), kb.clone())) {
                found.push(PairWitness {
                    part_a: 0,
                    part_b: 0,
                    a_prime: ka,
                    b_prime: kb,
                    deviation: exact_dev,
                });
            }
        }
    };
    for restart in 0..witness_budget.max(1) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37));
        let mut b_prime: Vec<u32> = if restart == 0 {
            b.to_vec()
        } else {
            let take = rng.gen_range(floor_b..=b.len());
            let mut shuffled = b.to_vec();
            shuffled.shuffle(&mut rng);
            shuffled.truncate(take);
            shuffled
        };
        let mut a_prime: Vec<u32> = a.to_vec();
        let mut dev = 0.0f64;
        for _ in 0..8 {
            let (hi_a, lo_a, knees_a, da) = extremal_sides(g, a, &b_prime, floor_a, d, p);
            record(&hi_a, &b_prime, &mut found);
            record(&lo_a, &b_prime, &mut found);
            for knee in &knees_a {
                record(knee, &b_prime, &mut found);
            }
            a_prime = if better_of(g, &hi_a, &lo_a, &b_prime, d, p) {
                hi_a
            } else {
                lo_a
            };
            let (hi_b, lo_b, knees_b, db) = extremal_sides(g, b, &a_prime, floor_b, d, p);
            record(&a_prime, &hi_b, &mut found);
            record(&a_prime, &lo_b, &mut found);
            for knee in &knees_b {
                record(&a_prime, knee, &mut found);
            }
            b_prime = if better_of(g, &hi_b, &lo_b, &a_prime, d, p) {
                hi_b
            } else {
                lo_b
            };
            let cand = da.max(db);
            if cand <= dev + 1e-12 {
                break;
            }
            dev = cand;
        }
        record(&a_prime, &b_prime, &mut found);
        if found.len() >= 12 {
            break;
        }
    }
    // keep the strongest few DIVERSE witnesses: every extra set can double
    // the atom count downstream, and near-duplicate cuts add nothing
    found.sort_by(|x, y| y.deviation.partial_cmp(&x.deviation).unwrap());
    let overlap = |x: &[u32], y: &[u32]| -> f64 {
        // both sorted
        let mut i = 0;
        let mut j = 0;
        let mut common = 0usize;
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        common as f64 / x.len().max(y.len()).max(1) as f64
    };
    let mut kept: Vec<PairWitness> = Vec::new();
    for w in found {
        let dissimilar = kept.iter().all(|k| {
            overlap(&k.a_prime, &w.a_prime) < 0.9 || overlap(&k.b_prime, &w.b_prime) < 0.9
        });
        if dissimilar || kept.is_empty() {
            kept.push(w);
        }
        if kept.len() >= 3 {
            break;
        }
    }
    Ok(kept)
}

/// True when the high-density side deviates more than the low one.
fn better_of(g: &Graph, hi: &[u32], lo: &[u32], anchor: &[u32], d: f64, p: f64) -> bool {
    let dev = |side: &[u32]| -> f64 {
        if side.is_empty() || anchor.is_empty() {
            return -1.0;
        }
        let dens =
            edge_count_pair(g, side, anchor) as f64 / (p * (side.len() * anchor.len()) as f64);
        (dens - d).abs()
    };
    dev(hi) >= dev(lo)
}

/// Extremal prefix and suffix of `side` sorted by edges into `anchor`:
/// the best high-density prefix and best low-density suffix of size at
/// least `floor_size`, the prefixes at the two largest score gaps (natural
/// rounding points of the fractional optimum), and the larger deviation of
/// the extremal pair.
fn extremal_sides(
    g: &Graph,
    side: &[u32],
    anchor: &[u32],
    floor_size: usize,
    d: f64,
    p: f64,
) -> (Vec<u32>, Vec<u32>, Vec<Vec<u32>>, f64) {
    let n = g.n();
    let mut in_anchor = vec![false; n];
    for &v in anchor {
        in_anchor[v as usize] = true;
    }
    let mut scored: Vec<(usize, u32)> = side
        .iter()
        .map(|&v| {
            let cnt = g
                .neighbors(v as usize)
                .iter()
                .filter(|&&w| in_anchor[w as usize])
                .count();
            (cnt, v)
        })
        .collect();
    scored.sort_unstable_by_key(|&(cnt, v)| (std::cmp::Reverse(cnt), v));
    let denom = p * anchor.len() as f64;
    let mut best_hi = (floor_size.min(scored.len()), -1.0f64);
    let mut prefix = 0usize;
    for s in 1..=scored.len() {
        prefix += scored[s - 1].0;
        if s >= floor_size {
            let dev = (prefix as f64 / (denom * s as f64) - d).abs();
            if dev > best_hi.1 {
                best_hi = (s, dev);
            }
        }
    }
    let total: usize = scored.iter().map(|&(c, _)| c).sum();
    let mut best_lo = (floor_size.min(scored.len()), -1.0f64);
    let mut suffix = total;
    for s in 1..=scored.len() {
        suffix -= scored[s - 1].0;
        let len = scored.len() - s;
        if len >= floor_size {
            let dev = (suffix as f64 / (denom * len as f64) - d).abs();
            if dev > best_lo.1 {
                best_lo = (len, dev);
            }
        }
    }
    let hi: Vec<u32> = scored[..best_hi.0].iter().map(|&(_, v)| v).collect();
    let lo: Vec<u32> = scored[scored.len() - best_lo.0..]
        .iter()
        .map(|&(_, v)| v)
        .collect();
    // prefixes ending at the two sharpest windowed score drops: scores are
    // noisy counts, so only a windowed change-point marks a real boundary
    let w = (scored.len() / 32).max(8);
    let mut gaps: Vec<(usize, usize)> = Vec::new(); // (windowed drop, cut)
    if scored.len() > 2 * w {
        for s in floor_size.max(w)..=(scored.len() - floor_size).min(scored.len() - w) {
            let drop = scored[s - w].0.saturating_sub(scored[(s + w - 1).min(scored.len() - 1)].0);
            gaps.push((drop, s));
        }
    }
    gaps.sort_unstable_by_key(|&(drop, _)| std::cmp::Reverse(drop));
    let mut knees: Vec<Vec<u32>> = Vec::new();
    let mut cuts: Vec<usize> = Vec::new();
    for &(_, cut) in &gaps {
        if cuts.iter().all(|&c| c.abs_diff(cut) > 2 * w) {
            cuts.push(cut);
            knees.push(scored[..cut].iter().map(|&(_, v)| v).collect());
            if knees.len() == 2 {
                break;
            }
        }
    }
    (hi, lo, knees, best_hi.1.max(best_lo.1))
}

/// Witness-atom strongly (ε,p)-regular partition.
///
/// Rounds probe all part pairs in parallel; when more than ε·C(k,2) pairs
/// fail, every part is refined into the atoms of the witness sets meeting
/// it (kept exact: no mid-round equalization, which preserves the
/// per-round index increment ε⁵/20 with room to spare). Halts when the
/// failure count drops to ε·C(k,2) or below.
pub fn strong_regular_partition(
    g: &Graph,
    p: f64,
    eps: f64,
    initial: &Partition,
    c: f64,
    seed: u64,
) -> Result<RegularityReport> {
    if eps <= 0.0 || c <= 0.0 {
        return domain("strong_regular_partition: eps, C > 0");
    }
    if p <= 0.0 {
        return domain("strong_regular_partition: p > 0");
    }
    let n = g.n();
    if initial.assignment().len() != n {
        return domain("initial partition does not match graph");
    }
    let round_bound = (20.0 * c * c / eps.powi(5)).ceil() as usize + 1;
    let mut part = initial.clone();
    let mut energy_trace = vec![partition_index(g, &part, p)?];
    let mut rounds = 0usize;
    let witness_budget = 6usize;
    let final_witnesses;
    loop {
        let members = part.members();
        let k = part.k();
        // probe self-pairs too: the pair definition allows A = B, and an
        // internally inhomogeneous part always betrays itself there
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i..k).map(move |j| (i, j)))
            .collect();
        let per_pair: Vec<(usize, usize, Vec<PairWitness>)> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut ws = regular_pair_witnesses(
                    g,
                    &members[i],
                    &members[j],
                    eps,
                    p,
                    witness_budget,
                    seed ^ ((i as u64) << 24) ^ ((j as u64) << 4) ^ (rounds as u64),
                )
                .unwrap_or_default();
                for w in &mut ws {
                    w.part_a = i;
                    w.part_b = j;
                }
                (i, j, ws)
            })
            .collect();
        let failed_cross = per_pair
            .iter()
            .filter(|(i, j, ws)| i != j && !ws.is_empty())
            .count();
        let failed_self = per_pair
            .iter()
            .filter(|(i, j, ws)| i == j && !ws.is_empty())
            .count();
        let fails: Vec<PairWitness> = per_pair.into_iter().flat_map(|(_, _, ws)| ws).collect();
        let threshold = eps * (k * (k - 1)) as f64 / 2.0;
        if ((failed_cross as f64) <= threshold && failed_self == 0) || part.k() >= n {
            // keep only the strongest witness per failed pair in the report
            let mut best: std::collections::HashMap<(usize, usize), PairWitness> =
                std::collections::HashMap::new();
            for w in fails {
                let key = (w.part_a, w.part_b);
                match best.get(&key) {
                    Some(old) if old.deviation >= w.deviation => {}
                    _ => {
                        best.insert(key, w);
                    }
                }
            }
            final_witnesses = best.into_values().collect();
            break;
        }
        // refine by witness atoms. Signatures use only the strongest few
        // witness sets per part: piling every overlapping set onto one part
        // shatters it into slivers that the fold-back then re-mixes.
        let mut sets_by_part: Vec<Vec<(f64, &Vec<u32>)>> = vec![Vec::new(); k];
        for w in &fails {
            sets_by_part[w.part_a].push((w.deviation, &w.a_prime));
            sets_by_part[w.part_b].push((w.deviation, &w.b_prime));
        }
        let mut selected: Vec<&Vec<u32>> = Vec::new();
        for sets in sets_by_part.iter_mut() {
            sets.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            for (_, verts) in sets.iter().take(3) {
                selected.push(verts);
            }
        }
        let mut signatures: Vec<Vec<bool>> = vec![Vec::new(); n];
        for (wi, verts) in selected.iter().enumerate() {
            for sig in signatures.iter_mut() {
                sig.push(false);
            }
            for &v in verts.iter() {
                signatures[v as usize][wi] = true;
            }
        }
        // group exact atoms inside each part
        let mut atoms: std::collections::HashMap<(usize, Vec<bool>), Vec<u32>> =
            std::collections::HashMap::new();
        for v in 0..n {
            atoms
                .entry((part.part(v), std::mem::take(&mut signatures[v])))
                .or_default()
                .push(v as u32);
        }
        let mut by_part: Vec<Vec<Vec<u32>>> = vec![Vec::new(); part.k()];
        for ((pid, _), verts) in atoms {
            by_part[pid].push(verts);
        }
        // keep substantial atoms; fold boundary slivers into the kept atom
        // whose density profile (against the round-start partition) is
        // closest, so near-pure atoms stay near-pure
        let part_sizes = part.sizes();
        let profile = |verts: &[u32]| -> Vec<f64> {
            let mut counts = vec![0u64; part.k()];
            for &v in verts {
                for &w in g.neighbors(v as usize) {
                    counts[part.part(w as usize)] += 1;
                }
            }
            counts
                .iter()
                .enumerate()
                .map(|(b, &c)| c as f64 / (p * (verts.len() * part_sizes[b]) as f64))
                .collect()
        };
        let mut groups: Vec<Vec<u32>> = Vec::new();
        for (pid, cells) in by_part.into_iter().enumerate() {
            let floor = (part_sizes[pid] / 6).max(64);
            let mut kept: Vec<Vec<u32>> = Vec::new();
            let mut slivers: Vec<Vec<u32>> = Vec::new();
            for cell in cells {
                if cell.len() >= floor {
                    kept.push(cell);
                } else {
                    slivers.push(cell);
                }
            }
            if kept.is_empty() {
                // nothing substantial: keep the part intact
                kept.push(slivers.into_iter().flatten().collect());
                slivers = Vec::new();
            }
            let kept_profiles: Vec<Vec<f64>> = kept.iter().map(|c| profile(c)).collect();
            for sliver in slivers {
                let prof = profile(&sliver);
                let target = kept_profiles
                    .iter()
                    .enumerate()
                    .min_by(|(_, x), (_, y)| {
                        let dx: f64 = x.iter().zip(&prof).map(|(a, b)| (a - b) * (a - b)).sum();
                        let dy: f64 = y.iter().zip(&prof).map(|(a, b)| (a - b) * (a - b)).sum();
                        dx.partial_cmp(&dy).unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                kept[target].extend(sliver);
            }
            groups.extend(kept);
        }
        let mut new_assign = vec![0u32; n];
        for (id, group) in groups.iter().enumerate() {
            for &v in group {
                new_assign[v as usize] = id as u32;
            }
        }
        let refined = Partition::from_assignment(new_assign)?;
        let energy = partition_index(g, &refined, p)?;
        let previous = *energy_trace.last().unwrap();
        if energy - previous < eps.powi(5) / 20.0 {
            // the guaranteed increment did not materialize (witness sets too
            // lopsided); halt rather than break the round-bound argument
            let mut best: std::collections::HashMap<(usize, usize), PairWitness> =
                std::collections::HashMap::new();
            for w in fails {
                let key = (w.part_a, w.part_b);
                match best.get(&key) {
                    Some(old) if old.deviation >= w.deviation => {}
                    _ => {
                        best.insert(key, w);
                    }
                }
            }
            final_witnesses = best.into_values().collect();
            break;
        }
        part = refined;
        assert!(
            energy - previous >= eps.powi(5) / 20.0 - 1e-9,
            "strong round energy increment {} below eps^5/20",
            energy - previous
        );
        energy_trace.push(energy);
        rounds += 1;
        assert!(
            rounds <= round_bound,
            "strong regularity exceeded its round bound {round_bound}"
        );
    }
    let oracle = CutOracle::new(g, &part, p)?;
    let (certificate, _) = oracle.search(&part, 8, seed ^ 0xBEEF);
    Ok(RegularityReport {
        partition: part,
        kind: RegularityKind::Strong,
        eps,
        rounds,
        energy_trace,
        irregular_pairs_witnessed: final_witnesses,
        cut_certificate: certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_to_kernel;
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

    #[test]
    fn quotient_kernel_special_cases() {
        let rec = sampler::sample_gnp(30, 0.3, 7).unwrap();
        let g = &rec.graph;
        let single = quotient_kernel(g, &Partition::trivial(30), 0.3).unwrap();
        let expect = 2.0 * g.m() as f64 / (0.3 * 900.0);
        assert!((single.value(0, 0) - expect).abs() < 1e-12);
        // singleton partition reproduces kappa_G
        let fine = quotient_kernel(g, &Partition::singletons(30), 0.3).unwrap();
        let kg = graph_to_kernel(g, 0.3).unwrap();
        for a in 0..30 {
            for b in 0..30 {
                assert!((fine.value(a, b) - kg.value(a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quotient_on_k4_split() {
        let g = complete(4);
        let part = Partition::from_assignment(vec![0, 0, 1, 1]).unwrap();
        let q = quotient_kernel(&g, &part, 0.5).unwrap();
        // off-diagonal: 4 ordered pairs... e(P0,P1) = 4 ordered, d = 4/(0.5*4) = 2
        assert!((q.value(0, 1) - 2.0).abs() < 1e-12);
        // diagonal: e(P0,P0) = 2 ordered, d = 2/(0.5*4) = 1
        assert!((q.value(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn index_monotone_under_refinement() {
        for seed in 0..20u64 {
            let rec = sampler::sample_gnp(40, 0.25, seed).unwrap();
            let g = &rec.graph;
            let coarse = Partition::balanced_random(40, 3, seed).unwrap();
            // refine by splitting each part with an independent random cut
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 77);
            let refined_assign: Vec<u32> = coarse
                .assignment()
                .iter()
                .map(|&a| a * 2 + u32::from(rng.gen::<bool>()))
                .collect();
            // compact ids
            let mut ids = std::collections::HashMap::new();
            let compact: Vec<u32> = refined_assign
                .iter()
                .map(|&x| {
                    let next = ids.len() as u32;
                    *ids.entry(x).or_insert(next)
                })
                .collect();
            let refined = Partition::from_assignment(compact).unwrap();
            let a = partition_index(g, &coarse, 0.25).unwrap();
            let b = partition_index(g, &refined, 0.25).unwrap();
            assert!(b >= a - 1e-12, "seed {seed}: {b} < {a}");
        }
    }

    #[test]
    fn averaging_orthogonality() {
        // ∫ (κ_G − G/Π)(G/Π') = 0 when Π refines Π'
        let rec = sampler::sample_gnp(36, 0.3, 3).unwrap();
        let g = &rec.graph;
        let coarse = Partition::from_assignment((0..36).map(|v| (v as u32) / 18).collect()).unwrap();
        let fine = Partition::from_assignment((0..36).map(|v| (v as u32) / 9).collect()).unwrap();
        let kg = graph_to_kernel(g, 0.3).unwrap();
        let qc = quotient_kernel(g, &coarse, 0.3).unwrap();
        let qf = quotient_kernel(g, &fine, 0.3).unwrap();
        // integrate (κ_G − fine)(coarse) over the vertex grid
        let n = 36.0;
        let mut total = 0.0;
        for i in 0..36 {
            for j in 0..36 {
                let kgv = kg.value(i, j);
                let fv = qf.value(i / 9, j / 9);
                let cv = qc.value(i / 18, j / 18);
                total += (kgv - fv) * cv / (n * n);
            }
        }
        assert!(total.abs() < 1e-10, "inner product {total}");
    }

    #[test]
    fn weak_partition_on_gnp_halts_fast() {
        let n = 500;
        let p = (n as f64).powf(-0.3);
        let rec = sampler::sample_gnp(n, p, 5).unwrap();
        let initial = Partition::balanced_random(n, 2, 1).unwrap();
        let report = weak_regular_partition(&rec.graph, p, 0.2, &initial, 2.0, 9).unwrap();
        assert!(report.cut_certificate < 0.2, "{}", report.cut_certificate);
        assert!(report.rounds <= 2, "rounds {}", report.rounds);
        assert!(report.partition.is_balanced());
    }

    #[test]
    fn weak_partition_recovers_two_blobs() {
        // two disjoint G(n,p) blobs: after one cut the quotient captures them
        let half = sampler::sample_gnp(150, 0.25, 11).unwrap();
        let other = sampler::sample_gnp(150, 0.25, 12).unwrap();
        let g = half.graph.disjoint_union(&other.graph);
        let d = 2.0 * g.m() as f64 / (0.25 * 300.0f64 * 300.0);
        let _ = d;
        let initial = Partition::trivial(300);
        let report = weak_regular_partition(&g, 0.25, 0.2, &initial, 2.0, 21).unwrap();
        assert!(report.rounds >= 1);
        assert!(
            report.cut_certificate < 0.2,
            "certificate {}",
            report.cut_certificate
        );
        // the partition separates the blobs almost perfectly: cross-density
        // between some pair of parts should be near zero
        let q = quotient_kernel(&g, &report.partition, 0.25).unwrap();
        let min_value = (0..q.k())
            .flat_map(|a| (0..q.k()).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| q.value(a, b))
            .fold(f64::INFINITY, f64::min);
        assert!(min_value < 0.2, "no near-empty cross pair: {min_value}");
    }

    #[test]
    fn weak_partition_on_empty_graph() {
        let g = Graph::from_edges(50, &[]).unwrap();
        let initial = Partition::trivial(50);
        let report = weak_regular_partition(&g, 0.5, 0.3, &initial, 1.0, 2).unwrap();
        assert_eq!(report.rounds, 0);
        assert_eq!(report.cut_certificate, 0.0);
    }

    #[test]
    fn regular_pair_detects_planted_rectangle() {
        // bipartite-ish pair with a planted dense sub-rectangle
        let n = 400usize;
        let p = 0.1;
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let mut edges = Vec::new();
        let a: Vec<u32> = (0..200).collect();
        let b: Vec<u32> = (200..400).collect();
        for &u in &a {
            for &v in &b {
                let planted = u < 40 && v < 240;
                let q = if planted { 3.0 * p } else { p };
                if rng.gen::<f64>() < q {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        match is_regular_pair(&g, &a, &b, 0.2, p, 6, 3).unwrap() {
            PairRegularity::Fail(w) => {
                // verify the witness exactly
                let d = edge_count_pair(&g, &a, &b) as f64 / (p * (200.0 * 200.0));
                let dw = edge_count_pair(&g, &w.a_prime, &w.b_prime) as f64
                    / (p * (w.a_prime.len() * w.b_prime.len()) as f64);
                assert!((dw - d).abs() > 0.2, "witness deviation {}", (dw - d).abs());
                assert!(w.a_prime.len() >= 40);
            }
            PairRegularity::PassUpToBudget => panic!("planted irregularity missed"),
        }
    }

    #[test]
    fn regular_pair_passes_on_random_bipartite() {
        // the pair must be dense enough that extremal-prefix fluctuations
        // (order 1/sqrt(m p)) fall below eps
        let n = 1600usize;
        let p = 0.25;
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut edges = Vec::new();
        let a: Vec<u32> = (0..800).collect();
        let b: Vec<u32> = (800..1600).collect();
        for &u in &a {
            for &v in &b {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        assert!(matches!(
            is_regular_pair(&g, &a, &b, 0.3, p, 6, 3).unwrap(),
            PairRegularity::PassUpToBudget
        ));
    }

    #[test]
    fn regular_pair_complete_self_overlap() {
        // A = B with G[A] complete: every sub-rectangle has the same density
        let g = complete(30);
        let a: Vec<u32> = (0..30).collect();
        match is_regular_pair(&g, &a, &a, 0.5, 1.0, 4, 1).unwrap() {
            PairRegularity::PassUpToBudget => {}
            PairRegularity::Fail(w) => panic!("unexpected witness dev {}", w.deviation),
        }
    }

    #[test]
    fn strong_partition_on_gnp_halts_immediately() {
        // random graphs are already regular at this density and eps scale
        let n = 600;
        let p = 0.4;
        let rec = sampler::sample_gnp(n, p, 31).unwrap();
        let initial = Partition::balanced_random(n, 3, 2).unwrap();
        let report = strong_regular_partition(&rec.graph, p, 0.45, &initial, 2.0, 7).unwrap();
        assert!(report.rounds <= 1, "rounds {}", report.rounds);
    }

    #[test]
    fn strong_partition_complete_graph_all_regular() {
        let g = complete(40);
        let initial = Partition::balanced_random(40, 4, 3).unwrap();
        let report = strong_regular_partition(&g, 1.0, 0.3, &initial, 1.5, 5).unwrap();
        assert_eq!(report.rounds, 0);
        assert!(report.irregular_pairs_witnessed.is_empty());
    }

    #[test]
    fn report_serializes() {
        let g = complete(12);
        let initial = Partition::balanced_random(12, 3, 1).unwrap();
        let report = weak_regular_partition(&g, 1.0, 0.4, &initial, 1.0, 4).unwrap();
        let text = report.to_json();
        let back: RegularityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.partition.assignment(), report.partition.assignment());
    }
}
