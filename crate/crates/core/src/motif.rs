//! Small pattern graphs (possibly loopless multigraphs) used as counting
//! motifs, together with the CLI mini-language for naming them.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// A loopless pattern graph on vertices `0..k`. Parallel edges are allowed
/// only when the `multigraph` flag is set (they matter for kernel densities
/// and for subdivision families, not for 0/1 homomorphism counts).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Motif {
    k: usize,
    edges: Vec<(u8, u8)>,
    multigraph: bool,
    name: Option<String>,
}

impl PartialEq for Motif {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.edges == other.edges && self.multigraph == other.multigraph
    }
}
impl Eq for Motif {}

impl Motif {
    pub fn new(k: usize, mut edges: Vec<(u8, u8)>, multigraph: bool) -> Result<Motif> {
        if k > 32 {
            return domain("motif too large (k > 32)");
        }
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return domain("motifs are loopless");
            }
            if e.0 as usize >= k || e.1 as usize >= k {
                return domain("motif edge out of range");
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        if !multigraph && edges.windows(2).any(|w| w[0] == w[1]) {
            return domain("duplicate edge in simple motif (set the multigraph flag)");
        }
        Ok(Motif {
            k,
            edges,
            multigraph,
            name: None,
        })
    }

    pub fn simple(k: usize, edges: Vec<(u8, u8)>) -> Result<Motif> {
        Motif::new(k, edges, false)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Motif {
        self.name = Some(name.into());
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Edge multiset, endpoints normalized `u < v`.
    pub fn edges(&self) -> &[(u8, u8)] {
        &self.edges
    }

    pub fn e(&self) -> usize {
        self.edges.len()
    }

    pub fn is_multigraph(&self) -> bool {
        self.multigraph
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => format!(
                "[{}]",
                self.edges
                    .iter()
                    .map(|(u, v)| format!("{u}-{v}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a as usize == v || b as usize == v)
            .count()
    }

    /// Underlying simple graph (parallel edges collapsed).
    pub fn support(&self) -> Motif {
        let mut edges = self.edges.clone();
        edges.dedup();
        Motif {
            k: self.k,
            edges,
            multigraph: false,
            name: None,
        }
    }

    pub fn empty(k: usize) -> Motif {
        Motif::new(k, vec![], false).unwrap().with_name(format!("E{k}"))
    }

    pub fn edge() -> Motif {
        Motif::simple(2, vec![(0, 1)]).unwrap().with_name("K2")
    }

    /// Double edge on two vertices (multigraph).
    pub fn double_edge() -> Motif {
        Motif::new(2, vec![(0, 1), (0, 1)], true)
            .unwrap()
            .with_name("2K2")
    }

    pub fn cycle(k: usize) -> Result<Motif> {
        if k < 3 {
            return domain("cycles need at least 3 vertices");
        }
        let edges = (0..k).map(|i| (i as u8, ((i + 1) % k) as u8)).collect();
        Ok(Motif::simple(k, edges)?.with_name(format!("C{k}")))
    }

    /// Triangle as a multigraph on 3 vertices (for subdivision families the
    /// multigraph flag matters, the edge set is the same).
    pub fn triangle_multi() -> Motif {
        Motif::new(3, vec![(0, 1), (1, 2), (0, 2)], true)
            .unwrap()
            .with_name("C3!")
    }

    /// Path with `ell` edges.
    pub fn path(ell: usize) -> Result<Motif> {
        if ell == 0 {
            return domain("paths need at least one edge");
        }
        let edges = (0..ell).map(|i| (i as u8, (i + 1) as u8)).collect();
        Ok(Motif::simple(ell + 1, edges)?.with_name(format!("P{ell}")))
    }

    /// Star with `d` leaves, center 0.
    pub fn star(d: usize) -> Result<Motif> {
        if d == 0 {
            return domain("stars need at least one leaf");
        }
        let edges = (1..=d).map(|i| (0u8, i as u8)).collect();
        Ok(Motif::simple(d + 1, edges)?.with_name(format!("Star{d}")))
    }

    pub fn complete(k: usize) -> Result<Motif> {
        let mut edges = Vec::new();
        for u in 0..k {
            for v in (u + 1)..k {
                edges.push((u as u8, v as u8));
            }
        }
        Ok(Motif::simple(k, edges)?.with_name(format!("K{k}")))
    }

    pub fn complete_bipartite(s: usize, t: usize) -> Result<Motif> {
        if s == 0 || t == 0 {
            return domain("bipartite classes must be nonempty");
        }
        let mut edges = Vec::new();
        for u in 0..s {
            for v in 0..t {
                edges.push((u as u8, (s + v) as u8));
            }
        }
        Ok(Motif::simple(s + t, edges)?.with_name(format!("K{s},{t}")))
    }

    /// Theta graph: `k` internally disjoint paths of `ell` edges joining two
    /// poles. `H_{1,ell}` is a path, `H_{2,ell}` the cycle `C_{2ell}`.
    pub fn theta(k: usize, ell: usize) -> Result<Motif> {
        if k == 0 || ell == 0 {
            return domain("theta needs k >= 1 paths of ell >= 1 edges");
        }
        if ell == 1 {
            // k parallel edges between the poles
            let edges = vec![(0u8, 1u8); k];
            return Ok(Motif::new(2, edges, k > 1)?.with_name(format!("Theta{k},{ell}")));
        }
        let mut edges = Vec::new();
        let mut next = 2usize;
        for _ in 0..k {
            let mut prev = 0usize;
            for step in 1..ell {
                edges.push((prev as u8, next as u8));
                prev = next;
                next += 1;
                let _ = step;
            }
            edges.push((prev as u8, 1u8));
        }
        Ok(Motif::simple(2 + k * (ell - 1), edges)?.with_name(format!("Theta{k},{ell}")))
    }

    /// Tree from a parent array: vertex `i+1` hangs below `parents[i]`.
    pub fn tree_from_parents(parents: &[usize]) -> Result<Motif> {
        let k = parents.len() + 1;
        let mut edges = Vec::new();
        for (i, &p) in parents.iter().enumerate() {
            if p > i {
                return domain("tree parent array must reference earlier vertices");
            }
            edges.push((p as u8, (i + 1) as u8));
        }
        Motif::simple(k, edges)
    }

    /// Subdivides every edge into a path of `t` edges (`F_t`). New interior
    /// vertices are appended after the branch vertices; the result is simple
    /// for `t >= 2` even when the input is a multigraph.
    pub fn subdivide(&self, t: usize) -> Result<Motif> {
        if t == 0 {
            return domain("subdivision parameter must be >= 1");
        }
        if t == 1 {
            return Ok(self.clone());
        }
        let mut edges = Vec::new();
        let mut next = self.k;
        for &(u, v) in &self.edges {
            let mut prev = u as usize;
            for _ in 1..t {
                edges.push((prev as u8, next as u8));
                prev = next;
                next += 1;
            }
            edges.push((prev as u8, v as u8));
        }
        Ok(Motif::simple(next, edges)?.with_name(format!("{}_sub{t}", self.label())))
    }

    /// Adjacency bitmask rows (simple support), for canonical labeling.
    fn adj_masks(&self) -> Vec<u32> {
        let mut adj = vec![0u32; self.k];
        for &(u, v) in &self.edges {
            adj[u as usize] |= 1 << v;
            adj[v as usize] |= 1 << u;
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.k];
        for &(u, v) in &self.edges {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    /// Canonical key: lexicographically smallest edge list over all vertex
    /// permutations of the simple support. Brute force, fine for k <= 8.
    pub fn canonical_key(&self) -> Vec<(u8, u8)> {
        let support = self.support();
        let k = support.k;
        let mut perm: Vec<u8> = (0..k as u8).collect();
        let mut best: Option<Vec<(u8, u8)>> = None;
        permute(&mut perm, 0, &mut |p| {
            let mut mapped: Vec<(u8, u8)> = support
                .edges
                .iter()
                .map(|&(u, v)| {
                    let a = p[u as usize];
                    let b = p[v as usize];
                    (a.min(b), a.max(b))
                })
                .collect();
            mapped.sort_unstable();
            if best.as_ref().is_none_or(|b| mapped < *b) {
                best = Some(mapped);
            }
        });
        best.unwrap_or_default()
    }

    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let adj = self.adj_masks();
        let mut seen = vec![false; self.k];
        let mut comps = Vec::new();
        for s in 0..self.k {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            let mut comp = Vec::new();
            seen[s] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for w in 0..self.k {
                    if !seen[w] && adj[v] & (1 << w) != 0 {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.k <= 1 || self.connected_components().len() == 1
    }

    /// Induced sub-motif on `verts` (relabelled 0..len).
    pub fn induced(&self, verts: &[usize]) -> Motif {
        let mut index = vec![usize::MAX; self.k];
        for (i, &v) in verts.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u as usize] != usize::MAX && index[v as usize] != usize::MAX)
            .map(|&(u, v)| (index[u as usize] as u8, index[v as usize] as u8))
            .collect();
        Motif::new(verts.len(), edges, self.multigraph).unwrap()
    }

    /// All nontrivial quotients `F/σ` over partitions σ of the vertex set
    /// whose classes are independent in F. Used by the embedding-count
    /// recursion `emb(F) = hom(F) − Σ_σ emb(F/σ)`.
    pub fn independent_quotients(&self) -> Vec<Motif> {
        let support = self.support();
        let adj = support.adj_masks();
        let k = self.k;
        let mut out = Vec::new();
        // restricted growth strings enumerate set partitions
        let mut rgs = vec![0usize; k];
        loop {
            // check validity: classes independent, and nontrivial
            let classes = rgs.iter().max().map_or(0, |m| m + 1);
            if classes < k {
                let mut class_mask = vec![0u32; classes];
                let mut ok = true;
                for v in 0..k {
                    let c = rgs[v];
                    if class_mask[c] & adj[v] != 0 {
                        ok = false;
                        break;
                    }
                    class_mask[c] |= 1 << v;
                }
                if ok {
                    let mut edges: Vec<(u8, u8)> = support
                        .edges
                        .iter()
                        .map(|&(u, v)| {
                            let a = rgs[u as usize] as u8;
                            let b = rgs[v as usize] as u8;
                            (a.min(b), a.max(b))
                        })
                        .collect();
                    edges.sort_unstable();
                    edges.dedup();
                    out.push(Motif::new(classes, edges, false).unwrap());
                }
            }
            // next restricted growth string
            let mut i = k as i64 - 1;
            loop {
                if i <= 0 {
                    return out;
                }
                let prefix_max = rgs[..i as usize].iter().max().copied().unwrap_or(0);
                if rgs[i as usize] <= prefix_max {
                    rgs[i as usize] += 1;
                    for j in (i as usize + 1)..k {
                        rgs[j] = 0;
                    }
                    break;
                }
                i -= 1;
            }
        }
    }
}

fn permute(perm: &mut Vec<u8>, i: usize, f: &mut impl FnMut(&[u8])) {
    if i == perm.len() {
        f(perm);
        return;
    }
    for j in i..perm.len() {
        perm.swap(i, j);
        permute(perm, i + 1, f);
        perm.swap(i, j);
    }
}

/// Parses the motif mini-language: `K2`, `C{k}`, `P{ell}`, `K{s},{t}`,
/// `Star{d}`, `Theta{k},{ell}`, `Tree[p0,p1,...]`, or an inline edge list
/// `0-1,1-2`. Prefix `multi:` marks an inline list as a multigraph.
pub fn parse_motif(spec: &str) -> Result<Motif> {
    let spec = spec.trim();
    let (multi, body) = match spec.strip_prefix("multi:") {
        Some(rest) => (true, rest.trim()),
        None => (false, spec),
    };
    if body.contains('-') {
        let mut edges = Vec::new();
        let mut maxv = 0usize;
        for part in body.split(',') {
            let mut ends = part.trim().split('-');
            let (a, b) = match (ends.next(), ends.next(), ends.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return domain(format!("bad edge `{part}` in motif spec")),
            };
            let u: usize = a.trim().parse().map_err(|_| bad(spec))?;
            let v: usize = b.trim().parse().map_err(|_| bad(spec))?;
            maxv = maxv.max(u).max(v);
            edges.push((u as u8, v as u8));
        }
        return Motif::new(maxv + 1, edges, multi);
    }
    if multi {
        return domain("multi: prefix only applies to inline edge lists");
    }
    if body == "K2" {
        return Ok(Motif::edge());
    }
    if let Some(rest) = body.strip_prefix("Tree[") {
        let inner = rest.strip_suffix(']').ok_or_else(|| bad_err(spec))?;
        let parents: Vec<usize> = if inner.trim().is_empty() {
            vec![]
        } else {
            inner
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| bad_err(spec)))
                .collect::<Result<_>>()?
        };
        return Motif::tree_from_parents(&parents);
    }
    if let Some(rest) = body.strip_prefix("Theta") {
        let (k, ell) = parse_pair(rest).ok_or_else(|| bad_err(spec))?;
        return Motif::theta(k, ell);
    }
    if let Some(rest) = body.strip_prefix("Star") {
        let d: usize = rest.parse().map_err(|_| bad_err(spec))?;
        return Motif::star(d);
    }
    if let Some(rest) = body.strip_prefix('C') {
        let k: usize = rest.parse().map_err(|_| bad_err(spec))?;
        return Motif::cycle(k);
    }
    if let Some(rest) = body.strip_prefix('P') {
        let l: usize = rest.parse().map_err(|_| bad_err(spec))?;
        return Motif::path(l);
    }
    if let Some(rest) = body.strip_prefix('K') {
        if let Some((s, t)) = parse_pair(rest) {
            return Motif::complete_bipartite(s, t);
        }
    }
    domain(format!("unrecognized motif spec `{spec}`"))
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let mut it = s.split(',');
    let a = it.next()?.trim().parse().ok()?;
    let b = it.next()?.trim().parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

fn bad(spec: &str) -> crate::error::Error {
    bad_err(spec)
}

fn bad_err(spec: &str) -> crate::error::Error {
    crate::error::Error::Domain(format!("unrecognized motif spec `{spec}`"))
}
