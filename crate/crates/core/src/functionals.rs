//! Functionals of simplicial complexes: Betti numbers, counts, components,
//! induced-subcomplex counts and simplex degrees.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::complex::SimplicialComplex;
use crate::error::{io_err, rejected, Error, Result};
use crate::homology::betti_vector;

/// Largest vertex count accepted by the isomorphism test.
pub const MAX_ISO_VERTICES: usize = 10;

/// Real-valued function of a complex.
pub trait Functional {
    fn evaluate(&self, complex: &SimplicialComplex) -> Result<f64>;
}

impl<F> Functional for F
where
    F: Fn(&SimplicialComplex) -> f64,
{
    fn evaluate(&self, complex: &SimplicialComplex) -> Result<f64> {
        Ok(self(complex))
    }
}

pub fn euler_characteristic(k: &SimplicialComplex) -> i64 {
    k.f_vector().iter().enumerate().map(|(j, &n)| if j % 2 == 0 { n as i64 } else { -(n as i64) }).sum()
}

pub fn f_count(k: &SimplicialComplex, j: usize) -> usize {
    k.f(j)
}

/// Disjoint-set forest over dense indices.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Vertex sets of the connected components, each sorted, ordered by smallest id.
pub fn connected_components(k: &SimplicialComplex) -> Vec<Vec<u64>> {
    let ids: Vec<u64> = k.vertex_ids().collect();
    let pos = |v: u64| ids.binary_search(&v).expect("edge vertex is a vertex");
    let mut uf = UnionFind::new(ids.len());
    for e in k.simplices(1) {
        uf.union(pos(e[0]), pos(e[1]));
    }
    let mut groups: HashMap<usize, Vec<u64>> = HashMap::new();
    for (i, &v) in ids.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(v);
    }
    let mut comps: Vec<Vec<u64>> = groups.into_values().collect();
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

pub fn is_connected(k: &SimplicialComplex) -> bool {
    connected_components(k).len() == 1
}

/// Number of vertices whose `m`-simplex degree equals `l`.
pub fn degree_count(k: &SimplicialComplex, m: usize, l: usize) -> Result<usize> {
    if m == 0 {
        return Err(rejected("degree order m must be at least 1"));
    }
    let mut deg: HashMap<u64, usize> = HashMap::new();
    for s in k.simplices(m) {
        for &v in s {
            *deg.entry(v).or_default() += 1;
        }
    }
    Ok(k.vertex_ids().filter(|v| deg.get(v).copied().unwrap_or(0) == l).count())
}

/// Complex on at most 16 local vertices, simplices as bitmasks.
#[derive(Debug, Clone)]
struct SmallComplex {
    n: usize,
    masks: HashSet<u16>,
    f: Vec<usize>,
    /// per vertex, number of simplices of each dimension containing it
    sig: Vec<Vec<usize>>,
    /// simplices grouped by their highest local vertex
    by_top: Vec<Vec<u16>>,
}

impl SmallComplex {
    fn new(n: usize, masks: HashSet<u16>) -> Self {
        let dims = masks.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
        let mut f = vec![0; dims];
        let mut sig = vec![vec![0; dims]; n];
        let mut by_top = vec![Vec::new(); n];
        for &m in &masks {
            let d = m.count_ones() as usize - 1;
            f[d] += 1;
            for (v, s) in sig.iter_mut().enumerate() {
                if m >> v & 1 == 1 {
                    s[d] += 1;
                }
            }
            by_top[15 - m.leading_zeros() as usize].push(m);
        }
        Self { n, masks, f, sig, by_top }
    }

    /// Induced subcomplex of `k` on `verts` (sorted, at most 16).
    fn induced(k: &SimplicialComplex, verts: &[u64]) -> Self {
        let n = verts.len();
        let top = k.alpha().min(n.saturating_sub(1));
        let mut masks = HashSet::new();
        let mut buf = Vec::with_capacity(n);
        for mask in 1u32..(1u32 << n) {
            if mask.count_ones() as usize > top + 1 {
                continue;
            }
            buf.clear();
            buf.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]));
            if k.contains(&buf) {
                masks.insert(mask as u16);
            }
        }
        Self::new(n, masks)
    }

    fn from_complex(k: &SimplicialComplex) -> Self {
        let verts: Vec<u64> = k.vertex_ids().collect();
        let masks = k
            .iter()
            .map(|s| s.iter().fold(0u16, |m, v| m | 1 << verts.binary_search(v).unwrap()))
            .collect();
        Self::new(verts.len(), masks)
    }

    fn sorted_sigs(&self) -> Vec<&Vec<usize>> {
        let mut s: Vec<_> = self.sig.iter().collect();
        s.sort();
        s
    }

    fn isomorphic(&self, other: &SmallComplex) -> bool {
        if self.n != other.n || self.f != other.f || self.sorted_sigs() != other.sorted_sigs() {
            return false;
        }
        let mut map = vec![0usize; self.n];
        self.extend(other, &mut map, 0, 0)
    }

    fn extend(&self, other: &SmallComplex, map: &mut [usize], i: usize, used: u16) -> bool {
        if i == self.n {
            return true;
        }
        for w in 0..other.n {
            if used >> w & 1 == 1 || self.sig[i] != other.sig[w] {
                continue;
            }
            map[i] = w;
            let ok = self.by_top[i].iter().all(|&m| {
                let img = (0..=i).filter(|v| m >> v & 1 == 1).fold(0u16, |acc, v| acc | 1 << map[v]);
                other.masks.contains(&img)
            });
            if ok && self.extend(other, map, i + 1, used | 1 << w) {
                return true;
            }
        }
        false
    }
}

fn check_iso_size(k: &SimplicialComplex) -> Result<()> {
    if k.vertex_count() > MAX_ISO_VERTICES {
        return Err(Error::Capability(format!(
            "isomorphism test supports at most {MAX_ISO_VERTICES} vertices, got {}",
            k.vertex_count()
        )));
    }
    Ok(())
}

/// Simplicial isomorphism for complexes with at most ten vertices.
pub fn is_isomorphic(a: &SimplicialComplex, b: &SimplicialComplex) -> Result<bool> {
    check_iso_size(a)?;
    check_iso_size(b)?;
    Ok(SmallComplex::from_complex(a).isomorphic(&SmallComplex::from_complex(b)))
}

fn adjacency(k: &SimplicialComplex) -> HashMap<u64, Vec<u64>> {
    let mut adj: HashMap<u64, Vec<u64>> = k.vertex_ids().map(|v| (v, Vec::new())).collect();
    for e in k.simplices(1) {
        adj.get_mut(&e[0]).unwrap().push(e[1]);
        adj.get_mut(&e[1]).unwrap().push(e[0]);
    }
    adj
}

/// Calls `visit` once for every connected vertex subset of size `size`
/// (enumeration in the style of ESU: each subset is grown from its smallest vertex).
fn for_each_connected_subset(k: &SimplicialComplex, size: usize, mut visit: impl FnMut(&[u64])) {
    if size == 0 {
        return;
    }
    let adj = adjacency(k);
    let mut sub = Vec::with_capacity(size);
    for root in k.vertex_ids() {
        let ext: BTreeSet<u64> = adj[&root].iter().copied().filter(|&u| u > root).collect();
        sub.push(root);
        extend_subset(&adj, root, &mut sub, ext, size, &mut visit);
        sub.pop();
    }
}

fn extend_subset(
    adj: &HashMap<u64, Vec<u64>>,
    root: u64,
    sub: &mut Vec<u64>,
    mut ext: BTreeSet<u64>,
    size: usize,
    visit: &mut impl FnMut(&[u64]),
) {
    if sub.len() == size {
        let mut s = sub.clone();
        s.sort_unstable();
        visit(&s);
        return;
    }
    while let Some(w) = ext.pop_first() {
        let mut next = ext.clone();
        for &u in &adj[&w] {
            if u > root && !sub.contains(&u) && !is_neighbour_of_any(adj, sub, u) {
                next.insert(u);
            }
        }
        sub.push(w);
        extend_subset(adj, root, sub, next, size, visit);
        sub.pop();
    }
}

fn is_neighbour_of_any(adj: &HashMap<u64, Vec<u64>>, sub: &[u64], u: u64) -> bool {
    sub.iter().any(|s| adj[s].contains(&u))
}

fn check_pattern(l: &SimplicialComplex) -> Result<()> {
    if l.is_empty() {
        return Err(rejected("pattern complex is empty"));
    }
    check_iso_size(l)?;
    if !is_connected(l) {
        return Err(rejected("pattern complex must be connected"));
    }
    Ok(())
}

/// Number of vertex subsets of `k` whose induced subcomplex is isomorphic to `l`.
pub fn count_induced(k: &SimplicialComplex, l: &SimplicialComplex) -> Result<usize> {
    check_pattern(l)?;
    let pat = SmallComplex::from_complex(l);
    let mut count = 0;
    for_each_connected_subset(k, l.vertex_count(), |s| {
        if SmallComplex::induced(k, s).isomorphic(&pat) {
            count += 1;
        }
    });
    Ok(count)
}

/// Number of connected components of `k` isomorphic to `l`.
pub fn count_components(k: &SimplicialComplex, l: &SimplicialComplex) -> Result<usize> {
    check_pattern(l)?;
    let pat = SmallComplex::from_complex(l);
    Ok(connected_components(k)
        .iter()
        .filter(|c| c.len() == pat.n && SmallComplex::induced(k, c).isomorphic(&pat))
        .count())
}

/// Boundary of the `(p+1)`-simplex on `{1, ..., p+2}`: all proper non-empty faces.
pub fn make_k_p(p: usize) -> SimplicialComplex {
    let verts: Vec<u64> = (1..=p as u64 + 2).collect();
    let facets = (0..verts.len()).map(|skip| crate::complex::facet(&verts, skip));
    SimplicialComplex::from_simplices(p, facets).expect("valid facets")
}

/// Two `p`-dimensional fans glued along the common `p`-face: facets
/// `{1..p+2} \ {j}` and `{1..p+1, p+3} \ {j}` for `j = 1..p+1`.
pub fn make_l_p(p: usize) -> SimplicialComplex {
    let a: Vec<u64> = (1..=p as u64 + 2).collect();
    let b: Vec<u64> = (1..=p as u64 + 1).chain([p as u64 + 3]).collect();
    let mut facets = Vec::new();
    for j in 1..=p as u64 + 1 {
        facets.push(a.iter().copied().filter(|&v| v != j).collect::<Vec<_>>());
        facets.push(b.iter().copied().filter(|&v| v != j).collect::<Vec<_>>());
    }
    SimplicialComplex::from_simplices(p, facets).expect("valid facets")
}

/// Full simplex on `{1, ..., j+1}`.
pub fn make_simplex(j: usize) -> SimplicialComplex {
    let verts: Vec<u64> = (1..=j as u64 + 1).collect();
    SimplicialComplex::from_simplices(j, [verts]).expect("valid simplex")
}

/// Pattern complex together with the text it was parsed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub source: String,
    pub complex: SimplicialComplex,
}

impl Pattern {
    fn parse(text: &str, base: &Path) -> Result<Self> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| rejected(format!("pattern `{text}` must be key=value")))?;
        let int = |v: &str| -> Result<usize> { v.parse().map_err(|_| rejected(format!("bad integer `{v}`"))) };
        let complex = match key.trim() {
            "file" => {
                let path = base.join(value.trim());
                let raw = std::fs::read_to_string(&path).map_err(io_err(&path))?;
                SimplicialComplex::from_json(&raw)?
            }
            "k" | "K" => make_k_p(int(value)?),
            "l" | "L" => make_l_p(int(value)?),
            "simplex" => make_simplex(int(value)?),
            other => return Err(rejected(format!("unknown pattern source `{other}`"))),
        };
        check_pattern(&complex)?;
        Ok(Self { source: text.to_string(), complex })
    }
}

/// Functional named by a short string such as `betti:1`, `euler`, `f:2`,
/// `g_L:file=L.json`, `h_L:k=1`, `d:m=1,l=3`, `vertices` or `const:2.5`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalDescriptor {
    Betti(usize),
    Euler,
    FCount(usize),
    Vertices,
    Induced(Pattern),
    Components(Pattern),
    Degree { m: usize, l: usize },
    Constant(f64),
}

impl FunctionalDescriptor {
    /// Parses with file paths resolved against `base`.
    pub fn parse_in(text: &str, base: &Path) -> Result<Self> {
        let text = text.trim();
        let (head, arg) = match text.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (text, None),
        };
        let need = |what: &str| arg.ok_or_else(|| rejected(format!("`{head}` needs {what}")));
        let int = |v: &str| -> Result<usize> { v.parse().map_err(|_| rejected(format!("bad integer `{v}`"))) };
        Ok(match head {
            "betti" | "beta" => Self::Betti(int(need("a dimension")?)?),
            "euler" | "chi" => Self::Euler,
            "f" => Self::FCount(int(need("a dimension")?)?),
            "vertices" | "n" => Self::Vertices,
            "g_L" | "g" => Self::Induced(Pattern::parse(need("a pattern")?, base)?),
            "h_L" | "h" => Self::Components(Pattern::parse(need("a pattern")?, base)?),
            "d" => {
                let (mut m, mut l) = (None, None);
                for kv in need("m=..,l=..")?.split(',') {
                    match kv.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                        Some(("m", v)) => m = Some(int(v)?),
                        Some(("l", v)) => l = Some(int(v)?),
                        _ => return Err(rejected(format!("bad degree argument `{kv}`"))),
                    }
                }
                let (m, l) = m.zip(l).ok_or_else(|| rejected("degree functional needs m and l"))?;
                if m == 0 {
                    return Err(rejected("degree order m must be at least 1"));
                }
                Self::Degree { m, l }
            }
            "const" => {
                let c: f64 = need("a value")?.parse().map_err(|_| rejected(format!("bad constant in `{text}`")))?;
                if !c.is_finite() {
                    return Err(rejected("constant must be finite"));
                }
                Self::Constant(c)
            }
            other => return Err(rejected(format!("unknown functional `{other}`"))),
        })
    }
}

impl FromStr for FunctionalDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_in(s, Path::new("."))
    }
}

impl fmt::Display for FunctionalDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Betti(p) => write!(f, "betti:{p}"),
            Self::Euler => write!(f, "euler"),
            Self::FCount(j) => write!(f, "f:{j}"),
            Self::Vertices => write!(f, "vertices"),
            Self::Induced(p) => write!(f, "g_L:{}", p.source),
            Self::Components(p) => write!(f, "h_L:{}", p.source),
            Self::Degree { m, l } => write!(f, "d:m={m},l={l}"),
            Self::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

impl Functional for FunctionalDescriptor {
    fn evaluate(&self, k: &SimplicialComplex) -> Result<f64> {
        Ok(match self {
            Self::Betti(p) => betti_vector(k, *p)?[*p] as f64,
            Self::Euler => euler_characteristic(k) as f64,
            Self::FCount(j) => k.f(*j) as f64,
            Self::Vertices => k.vertex_count() as f64,
            Self::Induced(p) => count_induced(k, &p.complex)? as f64,
            Self::Components(p) => count_components(k, &p.complex)? as f64,
            Self::Degree { m, l } => degree_count(k, *m, *l)? as f64,
            Self::Constant(c) => *c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(alpha: usize, s: &[&[u64]]) -> SimplicialComplex {
        SimplicialComplex::from_simplices(alpha, s.iter().copied()).unwrap()
    }

    #[test]
    fn euler_of_spheres() {
        assert_eq!(euler_characteristic(&make_k_p(1)), 0);
        assert_eq!(euler_characteristic(&make_k_p(2)), 2);
        assert_eq!(euler_characteristic(&make_simplex(3)), 1);
        assert_eq!(euler_characteristic(&SimplicialComplex::empty(2)), 0);
    }

    #[test]
    fn k_and_l_shapes() {
        assert_eq!(make_k_p(1).f_vector(), vec![3, 3]);
        assert_eq!(make_k_p(2).f_vector(), vec![4, 6, 4]);
        let l1 = make_l_p(1);
        assert_eq!(l1.f_vector(), vec![4, 4]);
        assert_eq!(betti_vector(&l1, 1).unwrap(), vec![1, 1]);
        let l2 = make_l_p(2);
        assert_eq!(l2.f_vector(), vec![5, 9, 6]);
        assert_eq!(betti_vector(&l2, 2).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn components_sorted_by_min_id() {
        let k = cx(1, &[&[9, 4], &[2], &[7, 3], &[3, 5]]);
        assert_eq!(connected_components(&k), vec![vec![2], vec![3, 5, 7], vec![4, 9]]);
    }

    #[test]
    fn isomorphism_basics() {
        let a = cx(2, &[&[1, 2, 3], &[3, 4]]);
        let b = cx(2, &[&[10, 20], &[20, 30, 40]]);
        assert!(is_isomorphic(&a, &b).unwrap());
        // hollow triangle plus tail is not the filled one
        let c = cx(2, &[&[10, 20], &[20, 30], &[10, 30], &[30, 40]]);
        assert!(!is_isomorphic(&a, &c).unwrap());
        assert!(is_isomorphic(&make_k_p(1), &cx(1, &[&[5, 6], &[6, 7], &[5, 7]])).unwrap());
        let big = SimplicialComplex::from_simplices(1, (0..11u64).map(|v| [v])).unwrap();
        assert!(matches!(is_isomorphic(&big, &big), Err(Error::Capability(_))));
    }

    #[test]
    fn induced_counts() {
        // 4-cycle plus the diagonal 1-3
        let k = cx(1, &[&[1, 2], &[2, 3], &[3, 4], &[1, 4], &[1, 3]]);
        assert_eq!(count_induced(&k, &make_k_p(1)).unwrap(), 2);
        assert_eq!(count_induced(&k, &make_simplex(1)).unwrap(), 5);
        assert_eq!(count_induced(&k, &make_simplex(0)).unwrap(), 4);
        // {1,2,4} and {2,3,4}
        let path = cx(1, &[&[1, 2], &[2, 3]]);
        assert_eq!(count_induced(&k, &path).unwrap(), 2);
        let disconnected = cx(1, &[&[1], &[2]]);
        assert!(count_induced(&k, &disconnected).is_err());
    }

    #[test]
    fn component_counts_and_degrees() {
        let k = cx(2, &[&[1, 2, 3], &[4, 5, 6], &[7, 8], &[8, 9], &[7, 9], &[10]]);
        assert_eq!(count_components(&k, &make_simplex(2)).unwrap(), 2);
        assert_eq!(count_components(&k, &make_k_p(1)).unwrap(), 1);
        assert_eq!(count_components(&k, &make_simplex(0)).unwrap(), 1);
        assert_eq!(degree_count(&k, 1, 2).unwrap(), 9);
        assert_eq!(degree_count(&k, 2, 1).unwrap(), 6);
        assert_eq!(degree_count(&k, 1, 0).unwrap(), 1);
        assert!(degree_count(&k, 0, 1).is_err());
    }

    #[test]
    fn descriptor_parse_and_display() {
        for s in ["betti:1", "euler", "f:2", "vertices", "g_L:k=1", "h_L:simplex=2", "d:m=1,l=3", "const:2.5"] {
            let d: FunctionalDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        for bad in ["betti", "f:x", "d:m=0,l=1", "g_L:nope=1", "wat", "const:nan"] {
            assert!(bad.parse::<FunctionalDescriptor>().is_err(), "{bad}");
        }
        let k = make_k_p(1);
        let eval = |s: &str| s.parse::<FunctionalDescriptor>().unwrap().evaluate(&k).unwrap();
        assert_eq!(eval("betti:1"), 1.0);
        assert_eq!(eval("g_L:L=1"), 0.0);
        assert_eq!(eval("h_L:K=1"), 1.0);
        assert_eq!(eval("d:m=1,l=2"), 3.0);
    }

    #[test]
    fn pattern_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("tri.json"), make_k_p(1).to_json().unwrap()).unwrap();
        let d = FunctionalDescriptor::parse_in("g_L:file=tri.json", dir.path()).unwrap();
        assert_eq!(d.evaluate(&make_k_p(1)).unwrap(), 1.0);
    }

    #[test]
    fn closures_are_functionals() {
        let f = |k: &SimplicialComplex| k.f(1) as f64;
        assert_eq!(f.evaluate(&make_k_p(2)).unwrap(), 6.0);
    }
}
