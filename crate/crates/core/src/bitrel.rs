//! Dense binary relations over interned ids.
//!
//! A [`BitRelation`] of shape `rows × cols` stores one bit per pair. Pairs are
//! written `(a, b)` with `a` the row (left) element, matching the
//! relational-composition convention `R ∘ S = {(c, a) | ∃b: (c, b) ∈ R, (b, a) ∈ S}`.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRelation {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitRelation {
    pub fn empty(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        Self {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    /// The diagonal relation on `n` elements.
    pub fn identity(n: usize) -> Self {
        let mut r = Self::empty(n, n);
        for i in 0..n {
            r.insert(i, i);
        }
        r
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let mut r = Self::empty(rows, cols);
        for a in 0..rows {
            for b in 0..cols {
                r.insert(a, b);
            }
        }
        r
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(rows, cols);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        debug_assert!(a < self.rows && b < self.cols);
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        let w = &mut self.bits[a * self.words + b / 64];
        let mask = 1u64 << (b % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, a: usize, b: usize) -> bool {
        let w = &mut self.bits[a * self.words + b / 64];
        let mask = 1u64 << (b % 64);
        let had = *w & mask != 0;
        *w &= !mask;
        had
    }

    /// Toggles a pair, returning whether it is now present.
    pub fn flip(&mut self, a: usize, b: usize) -> bool {
        if self.contains(a, b) {
            self.remove(a, b);
            false
        } else {
            self.insert(a, b);
            true
        }
    }

    fn row_words(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    /// Column indices related to row `a`, ascending.
    pub fn row(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let cols = self.cols;
        self.row_words(a).iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
            .filter(move |&b| b < cols)
        })
    }

    /// Row indices related to column `b`, ascending.
    pub fn column(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).filter(move |&a| self.contains(a, b))
    }

    /// Columns related to both row `a` of `self` and row `b` of `other`.
    pub fn row_and<'a>(&'a self, a: usize, other: &'a Self, b: usize) -> impl Iterator<Item = usize> + 'a {
        assert_eq!(self.cols, other.cols);
        let (x, y) = (self.row_words(a), other.row_words(b));
        x.iter().zip(y).enumerate().flat_map(|(wi, (&p, &q))| {
            let mut w = p & q;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |a| self.row(a).map(move |b| (a, b)))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Whether every pair of `self` is also in `other`.
    pub fn is_subset(&self, other: &Self) -> bool {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::empty(self.cols, self.rows);
        for (a, b) in self.pairs() {
            t.insert(b, a);
        }
        t
    }

    /// Relational composition `self ∘ other`: `(c, a)` whenever `(c, b) ∈ self`
    /// and `(b, a) ∈ other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "composition shape mismatch");
        let mut out = Self::empty(self.rows, other.cols);
        for c in 0..self.rows {
            let dst = c * out.words;
            for b in self.row(c) {
                let src = other.row_words(b);
                for (k, w) in src.iter().enumerate() {
                    out.bits[dst + k] |= w;
                }
            }
        }
        out
    }

    pub fn union_with(&mut self, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// Reflexive-transitive closure of a square relation (Warshall on rows).
    pub fn reflexive_transitive_closure(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut r = self.clone();
        for i in 0..r.rows {
            r.insert(i, i);
        }
        for k in 0..r.rows {
            let krow: Vec<u64> = r.row_words(k).to_vec();
            for i in 0..r.rows {
                if r.contains(i, k) {
                    let base = i * r.words;
                    for (w, kw) in krow.iter().enumerate() {
                        r.bits[base + w] |= kw;
                    }
                }
            }
        }
        r
    }

    /// Smallest equivalence relation containing a square relation.
    pub fn equivalence_closure(&self) -> Self {
        let mut sym = self.clone();
        sym.union_with(&self.transpose());
        sym.reflexive_transitive_closure()
    }
}

impl fmt::Debug for BitRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_matches_definition() {
        let r = BitRelation::from_pairs(3, 3, [(0, 1), (1, 2)]);
        let s = BitRelation::from_pairs(3, 3, [(1, 0), (2, 2)]);
        let rs = r.compose(&s);
        assert_eq!(rs.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 2)]);
    }

    #[test]
    fn closure_of_chain() {
        let r = BitRelation::from_pairs(4, 4, [(0, 1), (1, 2), (2, 3)]);
        let c = r.reflexive_transitive_closure();
        assert!(c.contains(0, 3));
        assert!(!c.contains(3, 0));
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn wide_rows_cross_word_boundary() {
        let mut r = BitRelation::empty(2, 130);
        r.insert(1, 129);
        r.insert(1, 64);
        assert_eq!(r.row(1).collect::<Vec<_>>(), vec![64, 129]);
        assert_eq!(r.transpose().row(129).collect::<Vec<_>>(), vec![1]);
    }
}
