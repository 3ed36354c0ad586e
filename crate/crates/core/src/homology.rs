//! Z2 chain complexes, boundary ranks and Betti numbers.

use std::collections::HashMap;
use std::fmt;

use crate::complex::{facet, Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::functionals::connected_components;

/// Dense matrix over GF(2), rows packed 64 columns per word.
///
/// Bits beyond `cols` in the last word of a row are always zero.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn column_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    /// Product over GF(2). Panics on shape mismatch.
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    let src = k * rhs.words;
                    let dst = i * out.words;
                    for w in 0..out.words {
                        out.data[dst + w] ^= rhs.data[src + w];
                    }
                }
            }
        }
        out
    }

    /// Plain-text 0/1 grid, one row per line.
    pub fn dump(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{}\n{}", self.rows, self.cols, self.dump())
    }
}

/// Rank over GF(2) by Gaussian elimination on a copy.
///
/// Columns are processed left to right; the pivot for a column is the lowest
/// row index among the rows not yet used as pivots.
pub fn rank_gf2(m: &BitMatrix) -> usize {
    let mut data = m.data.clone();
    let words = m.words;
    let mut rank = 0;
    for c in 0..m.cols {
        if rank == m.rows {
            break;
        }
        let wi = c / 64;
        let bit = 1u64 << (c % 64);
        let Some(pivot) = (rank..m.rows).find(|&r| data[r * words + wi] & bit != 0) else {
            continue;
        };
        if pivot != rank {
            for w in wi..words {
                data.swap(pivot * words + w, rank * words + w);
            }
        }
        let (head, tail) = data.split_at_mut((rank + 1) * words);
        let prow = &head[rank * words..];
        for chunk in tail.chunks_exact_mut(words) {
            if chunk[wi] & bit != 0 {
                for w in wi..words {
                    chunk[w] ^= prow[w];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Boundary matrices of a simplicial complex over Z2.
#[derive(Debug, Clone)]
pub struct ChainComplexZ2 {
    f_vector: Vec<usize>,
    /// `boundaries[p - 1]` is `∂_p : C_p -> C_{p-1}`, shape `f_{p-1} x f_p`.
    boundaries: Vec<BitMatrix>,
    index: Vec<HashMap<Simplex, usize>>,
}

impl ChainComplexZ2 {
    pub fn f_vector(&self) -> &[usize] {
        &self.f_vector
    }

    /// `∂_p` for `1 <= p <= dim`.
    pub fn boundary(&self, p: usize) -> Option<&BitMatrix> {
        self.boundaries.get(p.checked_sub(1)?)
    }

    pub fn top_dim(&self) -> Option<usize> {
        self.f_vector.len().checked_sub(1)
    }

    /// Column (or row) index of a simplex within its level.
    pub fn index_of(&self, s: &[u64]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    /// `rank ∂_p`, zero outside `1..=dim`.
    pub fn boundary_rank(&self, p: usize) -> usize {
        self.boundary(p).map_or(0, rank_gf2)
    }
}

/// Boundary matrices with columns ordered like [`SimplicialComplex::simplices`].
pub fn chain_complex(complex: &SimplicialComplex) -> Result<ChainComplexZ2> {
    chain_complex_upto(complex, usize::MAX)
}

fn chain_complex_upto(complex: &SimplicialComplex, max_dim: usize) -> Result<ChainComplexZ2> {
    let f_vector = complex.f_vector();
    let top = match f_vector.len() {
        0 => {
            return Ok(ChainComplexZ2 { f_vector, boundaries: Vec::new(), index: Vec::new() });
        }
        n => (n - 1).min(max_dim),
    };
    let index: Vec<HashMap<Simplex, usize>> = (0..=top)
        .map(|j| complex.simplices(j).iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
        .collect();
    let mut boundaries = Vec::with_capacity(top);
    for p in 1..=top {
        let mut m = BitMatrix::zeros(f_vector[p - 1], f_vector[p]);
        for (col, s) in complex.simplices(p).iter().enumerate() {
            for skip in 0..s.len() {
                let face = facet(s, skip);
                let row = *index[p - 1]
                    .get(&face)
                    .ok_or_else(|| Error::Structural(format!("face {face:?} of {s:?} missing")))?;
                m.set(row, col, true);
            }
        }
        boundaries.push(m);
    }
    Ok(ChainComplexZ2 { f_vector: f_vector[..=top].to_vec(), boundaries, index })
}

/// `β_p = f_p - rank ∂_p - rank ∂_{p+1}`, computed on the whole complex.
pub fn betti(complex: &SimplicialComplex, p: usize) -> Result<usize> {
    let fp = complex.f(p);
    if fp == 0 {
        return Ok(0);
    }
    let cc = chain_complex_upto(complex, p + 1)?;
    Ok(fp - cc.boundary_rank(p) - cc.boundary_rank(p + 1))
}

/// `(β_0, ..., β_pmax)`, summed over connected components.
pub fn betti_vector(complex: &SimplicialComplex, pmax: usize) -> Result<Vec<usize>> {
    let mut out = vec![0; pmax + 1];
    for comp in connected_components(complex) {
        if comp.len() == 1 {
            out[0] += 1;
            continue;
        }
        let keep = comp.into_iter().collect();
        let part = complex.restrict_to(&keep);
        for (acc, b) in out.iter_mut().zip(betti_vector_direct(&part, pmax)?) {
            *acc += b;
        }
    }
    Ok(out)
}

/// `(β_0, ..., β_pmax)` from one chain complex over the whole complex.
pub fn betti_vector_direct(complex: &SimplicialComplex, pmax: usize) -> Result<Vec<usize>> {
    let cc = chain_complex_upto(complex, pmax + 1)?;
    let ranks: Vec<usize> = (0..=pmax + 1).map(|p| cc.boundary_rank(p)).collect();
    Ok((0..=pmax).map(|p| complex.f(p) - ranks[p] - ranks[p + 1]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{make_k_p, make_l_p};

    fn naive_rank(m: &BitMatrix) -> usize {
        let mut a: Vec<Vec<u8>> =
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c) as u8).collect()).collect();
        let mut rank = 0;
        for c in 0..m.cols() {
            if let Some(p) = (rank..a.len()).find(|&r| a[r][c] % 2 == 1) {
                a.swap(p, rank);
                for r in 0..a.len() {
                    if r != rank && a[r][c] % 2 == 1 {
                        for k in 0..m.cols() {
                            a[r][k] = (a[r][k] + a[rank][k]) % 2;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_basics() {
        assert_eq!(rank_gf2(&BitMatrix::zeros(5, 7)), 0);
        assert_eq!(rank_gf2(&BitMatrix::identity(130)), 130);
        let m = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        assert_eq!(rank_gf2(&m), 2);
        assert_eq!(naive_rank(&m), 2);
        // input untouched
        assert_eq!(m.get(2, 0), true);
    }

    #[test]
    fn single_edge_and_triangle() {
        let edge = SimplicialComplex::from_simplices(1, [[0u64, 1]]).unwrap();
        let cc = chain_complex(&edge).unwrap();
        assert_eq!(cc.boundary(1).unwrap().dump(), "1\n1\n");

        let tri = SimplicialComplex::from_simplices(2, [[0u64, 1, 2]]).unwrap();
        let cc = chain_complex(&tri).unwrap();
        let d2 = cc.boundary(2).unwrap();
        assert_eq!(d2.column_weight(0), 3);
        for e in [[0u64, 1], [0, 2], [1, 2]] {
            assert!(d2.get(cc.index_of(&e).unwrap(), 0));
        }
        assert!(cc.boundary(1).unwrap().mul(d2).is_zero());
    }

    #[test]
    fn betti_small_cases() {
        let v = SimplicialComplex::from_simplices(2, [[7u64]]).unwrap();
        assert_eq!(betti(&v, 0).unwrap(), 1);
        assert_eq!(betti(&v, 1).unwrap(), 0);
        assert_eq!(betti(&v, 3).unwrap(), 0);
        assert_eq!(betti_vector(&SimplicialComplex::empty(2), 3).unwrap(), vec![0; 4]);
        assert_eq!(betti(&make_l_p(1), 1).unwrap(), 1);
        assert_eq!(betti_vector(&make_k_p(2), 2).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn trailing_bits_stay_clear() {
        let m = BitMatrix::identity(70);
        for r in 0..70 {
            let last = m.row_words(r)[1];
            assert_eq!(last >> 6, 0);
        }
    }
}
