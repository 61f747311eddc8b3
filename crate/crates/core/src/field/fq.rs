//! Dense byte tables for F_q (q <= 256) and row-echelon machinery over them.
//! All subspace canonicalization, weight and rank computations reduce to
//! these tables, so they are kept flat and allocation-light.

use super::chain::Chain;

/// Full addition/multiplication tables for F_q with elements as `u8` indices.
#[derive(Clone)]
pub struct FqOps {
    pub q: u16,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl FqOps {
    pub(crate) fn build(chain: &Chain, li: i32) -> Self {
        let q = chain.size(li);
        assert!(q <= 256);
        let mut add = vec![0u8; (q * q) as usize];
        let mut mul = vec![0u8; (q * q) as usize];
        let mut neg = vec![0u8; q as usize];
        let mut inv = vec![0u8; q as usize];
        for a in 0..q {
            neg[a as usize] = chain.neg(li, a) as u8;
            inv[a as usize] = chain.inv(li, a).unwrap_or(0) as u8;
            for b in 0..q {
                add[(a * q + b) as usize] = chain.add(li, a, b) as u8;
                mul[(a * q + b) as usize] = chain.mul(li, a, b) as u8;
            }
        }
        FqOps { q: q as u16, add, mul, neg, inv }
    }

    #[inline(always)]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline(always)]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline(always)]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    /// Inverse; index 0 maps to 0 (callers must not divide by zero).
    #[inline(always)]
    pub fn inv(&self, a: u8) -> u8 {
        self.inv[a as usize]
    }

    #[inline(always)]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// r -= c * s, componentwise.
    #[inline]
    pub fn row_submul(&self, r: &mut [u8], s: &[u8], c: u8) {
        if c == 0 {
            return;
        }
        let nc = self.neg(c);
        for (ri, &si) in r.iter_mut().zip(s.iter()) {
            if si != 0 {
                *ri = self.add(*ri, self.mul(nc, si));
            }
        }
    }
}

/// A reduced row echelon form maintained incrementally. Rows are kept sorted
/// by pivot column, fully reduced against each other, pivots scaled to 1.
/// Two F_q-subspaces are equal iff their `Echelon`s are equal, so this is the
/// canonical form used everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Echelon {
    pub cols: usize,
    pub rows: Vec<Vec<u8>>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon { cols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Eliminates `v` against the current rows in place.
    pub fn reduce(&self, v: &mut [u8], fq: &FqOps) {
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            let c = v[p];
            if c != 0 {
                fq.row_submul(v, row, c);
            }
        }
    }

    /// Reduces `v` and, if independent, inserts it; returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vec<u8>, fq: &FqOps) -> bool {
        self.reduce(&mut v, fq);
        let Some(p) = v.iter().position(|&c| c != 0) else {
            return false;
        };
        let ip = fq.inv(v[p]);
        for c in v.iter_mut() {
            *c = fq.mul(*c, ip);
        }
        for (row, &_rp) in self.rows.iter_mut().zip(self.pivots.iter()) {
            let c = row[p];
            if c != 0 {
                debug_assert!(_rp < p);
                fq.row_submul(row, &v, c);
            }
        }
        let at = self.pivots.iter().position(|&rp| rp > p).unwrap_or(self.rows.len());
        self.rows.insert(at, v);
        self.pivots.insert(at, p);
        true
    }

    /// True iff `v` lies in the row space.
    pub fn contains(&self, v: &[u8], fq: &FqOps) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w, fq);
        w.iter().all(|&c| c == 0)
    }

    /// True iff every row of `other` lies in this row space.
    pub fn contains_all(&self, other: &Echelon, fq: &FqOps) -> bool {
        other.rows.iter().all(|r| self.contains(r, fq))
    }

    /// Canonical bytes identifying the row space (RREF is unique).
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + self.rows.len() * self.cols);
        out.push(self.rows.len() as u8);
        for r in &self.rows {
            out.extend_from_slice(r);
        }
        out
    }

    /// A basis of the null space {x : row * x = 0 for the row space read as
    /// coefficient vectors}, i.e. the orthogonal complement under the
    /// standard dot product.
    pub fn kernel_basis(&self, fq: &FqOps) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let piv = &self.pivots;
        for free in 0..self.cols {
            if piv.contains(&free) {
                continue;
            }
            let mut v = vec![0u8; self.cols];
            v[free] = 1;
            for (row, &p) in self.rows.iter().zip(piv.iter()) {
                v[p] = fq.neg(row[free]);
            }
            out.push(v);
        }
        out
    }
}

/// Rank of an arbitrary list of rows.
pub fn rank_of_rows(rows: impl IntoIterator<Item = Vec<u8>>, cols: usize, fq: &FqOps) -> usize {
    let mut ech = Echelon::new(cols);
    for r in rows {
        ech.insert(r, fq);
    }
    ech.rank()
}
