//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcmplex::boolean::PlacedGrain;
use rcmplex::complex::simplex_uniform;
use rcmplex::{ConnectionKernel, MarkedPoint, SimplicialComplex};

/// Rank over GF(2) by textbook row reduction on a dense bool matrix.
pub fn naive_rank(rows: &[Vec<bool>]) -> usize {
    let mut m: Vec<Vec<bool>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c]) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] {
                for k in c..cols {
                    let v = m[rank][k];
                    m[r][k] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a set of GF(2) vectors by enumerating their span: the span has
/// `2^rank` elements. Only usable for small ranks.
pub fn span_rank(columns: &[u64]) -> usize {
    let mut span: HashSet<u64> = HashSet::from([0]);
    let mut rank = 0;
    for &c in columns {
        if span.contains(&c) {
            continue;
        }
        let shifted: Vec<u64> = span.iter().map(|s| s ^ c).collect();
        span.extend(shifted);
        rank += 1;
    }
    rank
}

/// Betti numbers from first principles: boundary columns as bit masks over
/// the (p-1)-simplices, ranks by span enumeration.
pub fn brute_betti(k: &SimplicialComplex, pmax: usize) -> Vec<usize> {
    let top = k.alpha();
    let boundary_columns = |p: usize| -> Vec<u64> {
        if p == 0 || p > top {
            return Vec::new();
        }
        let rows = k.simplices(p - 1);
        assert!(rows.len() <= 64, "too many faces for the span oracle");
        k.simplices(p)
            .iter()
            .map(|s| {
                let mut mask = 0u64;
                for skip in 0..s.len() {
                    let face: Vec<u64> = s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                    let idx = rows.iter().position(|r| *r == face).expect("face present");
                    mask ^= 1 << idx;
                }
                mask
            })
            .collect()
    };
    (0..=pmax)
        .map(|p| {
            let fp = if p <= top { k.simplices(p).len() } else { 0 };
            let rank_p = span_rank(&boundary_columns(p));
            let rank_next = span_rank(&boundary_columns(p + 1));
            fp - rank_p - rank_next
        })
        .collect()
}

/// Random downward-closed complex on at most `max_vertices` vertices.
pub fn random_small_complex(rng: &mut ChaCha8Rng, max_vertices: u64, alpha: usize) -> SimplicialComplex {
    let n = rng.random_range(1..=max_vertices);
    let facets = rng.random_range(1..=8);
    let mut simplices: Vec<Vec<u64>> = (0..n).map(|v| vec![v]).collect();
    for _ in 0..facets {
        let size = rng.random_range(1..=(alpha + 1).min(n as usize));
        let mut s: BTreeSet<u64> = BTreeSet::new();
        while s.len() < size {
            s.insert(rng.random_range(0..n));
        }
        simplices.push(s.into_iter().collect());
    }
    SimplicialComplex::from_simplices(alpha, simplices).expect("closure of random facets")
}

/// Complex built by testing every vertex subset directly, without the
/// grid or level-wise candidate generation of the library.
pub fn brute_force_complex(points: &[MarkedPoint], kernel: &ConnectionKernel) -> SimplicialComplex {
    let mut pts: Vec<&MarkedPoint> = points.iter().collect();
    pts.sort_by_key(|p| p.id);
    let alpha = kernel.alpha();
    let n = pts.len();
    let mut present: HashSet<Vec<u64>> = pts.iter().map(|p| vec![p.id]).collect();
    let mut all = vec![pts.iter().map(|p| vec![p.id]).collect::<Vec<_>>()];
    for j in 1..=alpha {
        let mut level = Vec::new();
        for subset in subsets(n, j + 1) {
            let verts: Vec<u64> = subset.iter().map(|&i| pts[i].id).collect();
            let faces_ok = (0..verts.len()).all(|skip| {
                let f: Vec<u64> = verts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                present.contains(&f)
            });
            if !faces_ok {
                continue;
            }
            let args: Vec<(&[f64], &rcmplex::Mark)> =
                subset.iter().map(|&i| (pts[i].position.as_slice(), &pts[i].mark)).collect();
            let phi = kernel.evaluate(j, &args).unwrap();
            let seeds: Vec<u64> = subset.iter().map(|&i| pts[i].seed).collect();
            if phi > 0.0 && simplex_uniform(&seeds, j).unwrap() < phi {
                level.push(verts);
            }
        }
        present.extend(level.iter().cloned());
        all.push(level);
    }
    SimplicialComplex::from_simplices(alpha, all.into_iter().flatten()).unwrap()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Connected components of the pairwise-overlap graph, with overlap
/// decided by `meets`.
pub fn overlap_components(n: usize, meets: impl Fn(usize, usize) -> bool) -> usize {
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut x: usize) -> usize {
        while label[x] != x {
            x = label[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if meets(i, j) {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a] = b;
            }
        }
    }
    (0..n).filter(|&i| root(&mut label, i) == i).count()
}

/// Closed-box overlap by coordinate intervals.
pub fn boxes_overlap(a: &PlacedGrain, b: &PlacedGrain) -> bool {
    let (al, ah) = a.bounds();
    let (bl, bh) = b.bounds();
    (0..al.len()).all(|k| al[k] <= bh[k] && bl[k] <= ah[k])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
