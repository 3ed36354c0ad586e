//! Random simplicial complexes built from point configurations.
//!
//! Inclusion randomness for a candidate simplex `rho` is the value
//! [`simplex_uniform`] of its sorted vertex seeds. Because that value only
//! depends on the vertices of `rho`, the complex on a sub-window is the
//! restriction of the complex on a larger window, and adding a point never
//! changes the decision for any simplex that avoids it. This is what makes
//! the add-one-point difference operator exactly computable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{rejected, Error, Result};
use crate::kernel::{ConnectionKernel, KernelArg};
use crate::point_process::{keyed_hash, MarkedPoint, PointConfiguration};

/// Strictly increasing vertex ids.
pub type Simplex = Vec<u64>;

const DOMAIN_SIMPLEX: u64 = 0x7369_6d70_6c65_78;

/// Deterministic uniform in `[0, 1)` attached to a simplex of level `j`.
pub fn simplex_uniform(seeds: &[u64], j: usize) -> Result<f64> {
    if seeds.len() < 2 {
        return Err(rejected("simplex_uniform needs at least two vertices"));
    }
    if seeds.len() != j + 1 {
        return Err(rejected(format!("level {j} simplex needs {} seeds, got {}", j + 1, seeds.len())));
    }
    let mut words = Vec::with_capacity(seeds.len() + 2);
    words.push(DOMAIN_SIMPLEX);
    words.push(j as u64);
    let start = words.len();
    words.extend_from_slice(seeds);
    words[start..].sort_unstable();
    Ok(unit_from_bits(keyed_hash(&words)))
}

#[inline]
fn unit_from_bits(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Finite, downward-closed family of simplices of dimension at most `alpha`.
///
/// `levels[j]` holds the sorted `j`-simplices; `levels[0]` the vertices as 1-tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    alpha: usize,
    levels: Vec<Vec<Simplex>>,
}

impl SimplicialComplex {
    pub fn empty(alpha: usize) -> Self {
        Self { alpha, levels: vec![Vec::new(); alpha + 1] }
    }

    /// Downward closure of the given simplices. Unsorted input is accepted;
    /// repeated vertices inside a simplex are rejected.
    pub fn from_simplices<I, S>(alpha: usize, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u64]>,
    {
        let mut sets: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); alpha + 1];
        for s in simplices {
            let mut s = s.as_ref().to_vec();
            if s.is_empty() {
                continue;
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(rejected(format!("repeated vertex in simplex {s:?}")));
            }
            let dim = s.len() - 1;
            if dim > alpha {
                return Err(rejected(format!("simplex {s:?} exceeds alpha = {alpha}")));
            }
            // every non-empty subset
            let k = s.len();
            for mask in 1u64..(1u64 << k) {
                let face: Simplex = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
                sets[face.len() - 1].insert(face);
            }
        }
        Ok(Self { alpha, levels: sets.into_iter().map(|s| s.into_iter().collect()).collect() })
    }

    /// Takes per-level simplex lists as they are and checks closure.
    pub fn from_levels(alpha: usize, mut levels: Vec<Vec<Simplex>>) -> Result<Self> {
        if levels.len() > alpha + 1 {
            if levels[alpha + 1..].iter().any(|l| !l.is_empty()) {
                return Err(Error::Structural(format!("simplices above alpha = {alpha}")));
            }
            levels.truncate(alpha + 1);
        }
        levels.resize(alpha + 1, Vec::new());
        for (j, level) in levels.iter_mut().enumerate() {
            for s in level.iter() {
                if s.len() != j + 1 || s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Structural(format!("malformed {j}-simplex {s:?}")));
                }
            }
            level.sort();
            level.dedup();
        }
        let k = Self { alpha, levels };
        k.check_closed()?;
        Ok(k)
    }

    pub fn check_closed(&self) -> Result<()> {
        for j in 1..self.levels.len() {
            for s in &self.levels[j] {
                for skip in 0..s.len() {
                    let face = facet(s, skip);
                    if self.levels[j - 1].binary_search(&face).is_err() {
                        return Err(Error::Structural(format!("face {face:?} of {s:?} missing")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Sorted `j`-simplices (empty beyond `alpha`).
    pub fn simplices(&self, j: usize) -> &[Simplex] {
        self.levels.get(j).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.levels[0].iter().map(|s| s[0])
    }

    pub fn vertex_count(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    pub fn f(&self, j: usize) -> usize {
        self.simplices(j).len()
    }

    /// `(f_0, ..., f_dim)`; empty for the empty complex.
    pub fn f_vector(&self) -> Vec<usize> {
        match self.dim() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|j| self.f(j)).collect(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.levels.iter().rposition(|l| !l.is_empty())
    }

    pub fn contains(&self, s: &[u64]) -> bool {
        match s.len() {
            0 => false,
            k => self.simplices(k - 1).binary_search_by(|x| x.as_slice().cmp(s)).is_ok(),
        }
    }

    pub fn contains_vertex(&self, v: u64) -> bool {
        self.levels[0].binary_search_by(|x| x[0].cmp(&v)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.levels.iter().flatten()
    }

    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.iter().all(|s| other.contains(s))
    }

    /// Simplices whose vertices all lie in `keep`.
    pub fn restrict_to(&self, keep: &HashSet<u64>) -> SimplicialComplex {
        let levels = self
            .levels
            .iter()
            .map(|l| l.iter().filter(|s| s.iter().all(|v| keep.contains(v))).cloned().collect())
            .collect();
        SimplicialComplex { alpha: self.alpha, levels }
    }

    /// Drops all simplices of dimension above `j`.
    pub fn skeleton(&self, j: usize) -> SimplicialComplex {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| if i <= j { l.clone() } else { Vec::new() })
            .collect();
        SimplicialComplex { alpha: self.alpha, levels }
    }

    /// Same complex with a different cap. Fails if simplices would be lost.
    pub fn with_alpha(&self, alpha: usize) -> Result<SimplicialComplex> {
        Self::from_levels(alpha, self.levels.clone())
    }

    /// Applies an injective relabelling of vertices.
    pub fn relabel(&self, map: &HashMap<u64, u64>) -> Result<SimplicialComplex> {
        let mut out = Vec::with_capacity(self.vertex_count());
        for s in self.iter() {
            let t: Vec<u64> = s
                .iter()
                .map(|v| map.get(v).copied().ok_or_else(|| rejected(format!("vertex {v} not mapped"))))
                .collect::<Result<_>>()?;
            out.push(t);
        }
        let k = Self::from_simplices(self.alpha, out)?;
        if k.f_vector() != self.f_vector() {
            return Err(rejected("relabelling is not injective"));
        }
        Ok(k)
    }

    /// Disjoint union; vertex ids of `other` are shifted by `offset`.
    pub fn disjoint_union(&self, other: &SimplicialComplex, offset: u64) -> Result<SimplicialComplex> {
        let shifted = other.iter().map(|s| s.iter().map(|v| v + offset).collect::<Vec<_>>());
        let alpha = self.alpha.max(other.alpha);
        let k = Self::from_simplices(alpha, self.iter().cloned().chain(shifted))?;
        if k.vertex_count() != self.vertex_count() + other.vertex_count() {
            return Err(rejected("vertex sets overlap after shifting"));
        }
        Ok(k)
    }

    /// Number of `n`-simplices containing `v`.
    pub fn simplex_degree(&self, v: u64, n: usize) -> Result<usize> {
        if !self.contains_vertex(v) {
            return Err(rejected(format!("vertex {v} not in complex")));
        }
        Ok(self.simplices(n).iter().filter(|s| s.binary_search(&v).is_ok()).count())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ComplexJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ComplexJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

pub(crate) fn facet(s: &[u64], skip: usize) -> Simplex {
    s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect()
}

/// On-disk form: `{"alpha":…, "vertices":[ids], "simplices":{"1":[[i,j],…], …}}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub alpha: usize,
    pub vertices: Vec<u64>,
    #[serde(default)]
    pub simplices: BTreeMap<String, Vec<Simplex>>,
}

impl From<&SimplicialComplex> for ComplexJson {
    fn from(k: &SimplicialComplex) -> Self {
        let mut simplices = BTreeMap::new();
        for j in 1..=k.alpha {
            if !k.simplices(j).is_empty() {
                simplices.insert(j.to_string(), k.simplices(j).to_vec());
            }
        }
        ComplexJson { alpha: k.alpha, vertices: k.vertex_ids().collect(), simplices }
    }
}

impl TryFrom<ComplexJson> for SimplicialComplex {
    type Error = Error;

    fn try_from(raw: ComplexJson) -> Result<Self> {
        let mut levels = vec![Vec::new(); raw.alpha + 1];
        levels[0] = raw.vertices.iter().map(|&v| vec![v]).collect();
        for (key, list) in raw.simplices {
            let j: usize = key.parse().map_err(|_| Error::Structural(format!("bad dimension key `{key}`")))?;
            if j == 0 || j > raw.alpha {
                return Err(Error::Structural(format!("dimension {j} outside 1..={}", raw.alpha)));
            }
            levels[j] = list;
        }
        SimplicialComplex::from_levels(raw.alpha, levels)
    }
}

/// The two complexes whose functional difference is the add-one-point operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub with_point: SimplicialComplex,
    pub without_point: SimplicialComplex,
}

/// Generic level-by-level clique expansion.
///
/// `edge_range`, when given, lets edge candidates be found through a uniform
/// grid: pairs further apart are never passed to `include`. Candidates at
/// level `j >= 2` are exactly the vertex sets whose every facet is present.
pub(crate) fn build_with<F>(
    points: &[MarkedPoint],
    alpha: usize,
    edge_range: Option<f64>,
    mut include: F,
) -> Result<SimplicialComplex>
where
    F: FnMut(usize, &[&MarkedPoint]) -> Result<bool>,
{
    let mut pts: Vec<&MarkedPoint> = points.iter().collect();
    pts.sort_by_key(|p| p.id);
    if pts.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(rejected("duplicate point ids"));
    }
    let n = pts.len();
    let mut levels: Vec<Vec<Simplex>> = vec![Vec::new(); alpha + 1];
    levels[0] = pts.iter().map(|p| vec![p.id]).collect();
    if alpha == 0 || n < 2 {
        return Ok(SimplicialComplex { alpha, levels });
    }

    // level 1
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut consider = |a: usize, b: usize, adjacency: &mut Vec<Vec<usize>>, edges: &mut Vec<[usize; 2]>| {
        if include(1, &[pts[a], pts[b]])? {
            adjacency[a].push(b);
            adjacency[b].push(a);
            edges.push([a, b]);
        }
        Ok::<(), Error>(())
    };
    match edge_range {
        Some(r) => {
            for (a, b) in grid_pairs(&pts, r) {
                consider(a, b, &mut adjacency, &mut edges)?;
            }
        }
        None => {
            for a in 0..n {
                for b in (a + 1)..n {
                    consider(a, b, &mut adjacency, &mut edges)?;
                }
            }
        }
    }
    for nb in &mut adjacency {
        nb.sort_unstable();
    }
    edges.sort_unstable();

    // levels 2..=alpha, working on point indices (ascending index == ascending id)
    let mut prev: Vec<Vec<usize>> = edges.iter().map(|e| e.to_vec()).collect();
    let mut all: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|i| vec![i]).collect(), prev.clone()];
    for j in 2..=alpha {
        if prev.is_empty() {
            break;
        }
        let prev_set: HashSet<&[usize]> = prev.iter().map(Vec::as_slice).collect();
        let mut next: Vec<Vec<usize>> = Vec::new();
        let mut args: Vec<&MarkedPoint> = Vec::with_capacity(j + 1);
        for s in &prev {
            let last = *s.last().unwrap();
            // common neighbours above the current maximum
            let mut common: Vec<usize> = adjacency[s[0]].iter().copied().filter(|&v| v > last).collect();
            for &u in &s[1..] {
                common.retain(|v| adjacency[u].binary_search(v).is_ok());
                if common.is_empty() {
                    break;
                }
            }
            for v in common {
                let mut cand = s.clone();
                cand.push(v);
                let facets_present = (0..cand.len() - 1).all(|skip| {
                    let face: Vec<usize> =
                        cand.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
                    prev_set.contains(face.as_slice())
                });
                if !facets_present {
                    continue;
                }
                args.clear();
                args.extend(cand.iter().map(|&i| pts[i]));
                if include(j, &args)? {
                    next.push(cand);
                }
            }
        }
        next.sort_unstable();
        all.push(next.clone());
        prev = next;
    }

    for (j, level) in all.into_iter().enumerate().skip(1) {
        let mut ids: Vec<Simplex> = level.into_iter().map(|s| s.into_iter().map(|i| pts[i].id).collect()).collect();
        ids.sort_unstable();
        levels[j] = ids;
    }
    Ok(SimplicialComplex { alpha, levels })
}

/// Index pairs `(a, b)`, `a < b`, at distance at most `r`.
fn grid_pairs(pts: &[&MarkedPoint], r: f64) -> Vec<(usize, usize)> {
    let n = pts.len();
    if n < 2 {
        return Vec::new();
    }
    let d = pts[0].position.len();
    let cell = if r > 0.0 { r } else { 1.0 };
    let key = |x: &[f64]| -> Vec<i64> { x.iter().map(|c| (c / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(key(&p.position)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let r2 = r * r;
    let mut out = Vec::new();
    for (a, p) in pts.iter().enumerate() {
        let k = key(&p.position);
        for off in &offsets {
            let nk: Vec<i64> = k.iter().zip(off).map(|(x, o)| x + o).collect();
            if let Some(bucket) = grid.get(&nk) {
                for &b in bucket {
                    if b > a {
                        let d2: f64 = p.position.iter().zip(&pts[b].position).map(|(x, y)| (x - y) * (x - y)).sum();
                        if d2 <= r2 {
                            out.push((a, b));
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

fn max_extent(points: &[MarkedPoint]) -> f64 {
    points.iter().map(|p| p.mark.extent()).fold(0.0, f64::max)
}

/// Inclusion rule of the model: a candidate `j`-simplex is kept iff its
/// uniform is strictly below `phi_j` of its points.
fn kernel_decision(kernel: &ConnectionKernel) -> impl FnMut(usize, &[&MarkedPoint]) -> Result<bool> + '_ {
    let mut seeds: Vec<u64> = Vec::new();
    move |j, pts| {
        let args: Vec<KernelArg<'_>> = pts.iter().map(|p| (p.position.as_slice(), &p.mark)).collect();
        let phi = kernel.evaluate(j, &args)?;
        if phi <= 0.0 {
            return Ok(false);
        }
        seeds.clear();
        seeds.extend(pts.iter().map(|p| p.seed));
        Ok(simplex_uniform(&seeds, j)? < phi)
    }
}

pub fn build_complex(config: &PointConfiguration, kernel: &ConnectionKernel) -> Result<SimplicialComplex> {
    build_from_points(&config.points, kernel)
}

pub fn build_from_points(points: &[MarkedPoint], kernel: &ConnectionKernel) -> Result<SimplicialComplex> {
    if let Some(p) = points.first() {
        let d = p.position.len();
        if points.iter().any(|q| q.position.len() != d) {
            return Err(rejected("points of mixed dimension"));
        }
    }
    let range = if kernel.no_edges() { Some(-1.0) } else { kernel.edge_range(max_extent(points)) };
    build_with(points, kernel.alpha(), range, kernel_decision(kernel))
}

/// Complexes with and without `extra`, sharing all simplex uniforms.
pub fn build_coupled(
    config: &PointConfiguration,
    kernel: &ConnectionKernel,
    extra: &MarkedPoint,
) -> Result<CoupledPair> {
    let with = config.with_point(extra.clone())?;
    Ok(CoupledPair { with_point: build_complex(&with, kernel)?, without_point: build_complex(config, kernel)? })
}

/// `f(with extra) - f(without extra)`.
pub fn difference_operator<F>(
    f: &F,
    config: &PointConfiguration,
    kernel: &ConnectionKernel,
    extra: &MarkedPoint,
) -> Result<f64>
where
    F: crate::functionals::Functional + ?Sized,
{
    let pair = build_coupled(config, kernel, extra)?;
    Ok(f.evaluate(&pair.with_point)? - f.evaluate(&pair.without_point)?)
}
