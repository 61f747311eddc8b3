//! The field tower F_p ⊆ F_q ⊆ F_{q^m} (⊆ F_{q^{2m}} on demand) with explicit,
//! reproducible defining polynomials.
//!
//! Defining polynomials are the lexicographically smallest monic irreducibles
//! of the required degree, coefficients read low degree first and compared as
//! base-`q` integers, unless the caller seeds explicit ones. Elements are
//! integer indices encoding their coefficient vector over the level below
//! (little-endian, power basis of the defining polynomial's root), so the
//! sublevel embedding is the identity on indices and serialization is stable.

mod chain;
mod fq;

pub use fq::{rank_of_rows, Echelon, FqOps};

use crate::error::{Error, Result};
use chain::Chain;
pub(crate) use chain::is_prime;

/// Which floor of the tower an element lives on.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Level {
    /// F_p
    Base,
    /// F_q = F_{p^e}
    Q,
    /// F_{q^m}
    Qm,
    /// F_{q^{2m}}, present only after `extend_quadratic`
    Q2m,
}

/// An element of some tower level, stored as its canonical index.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    pub level: Level,
    pub index: u32,
}

pub struct Tower {
    p: u32,
    e: u32,
    m: u32,
    q: u32,
    qm: u32,
    chain: Chain,
    fq_ops: Option<FqOps>,
    /// q^i mod (q^m - 1) for i in 0..m, the Frobenius exponents.
    qpow: Vec<u64>,
}

/// Builds the tower with the smallest-encoding irreducible defining polynomials.
pub fn build_tower(p: u32, e: u32, m: u32) -> Result<Tower> {
    Tower::build_with_seeds(p, e, m, None, None)
}

impl Tower {
    /// Builds the tower; callers may pin their own monic defining polynomials
    /// (little-endian index coefficients) which are validated for
    /// irreducibility before use.
    pub fn build_with_seeds(
        p: u32,
        e: u32,
        m: u32,
        seed_q: Option<Vec<u32>>,
        seed_qm: Option<Vec<u32>>,
    ) -> Result<Tower> {
        if !is_prime(p) {
            return Err(Error::params(format!("p = {p} is not prime")));
        }
        if e == 0 {
            return Err(Error::params("e >= 1 required"));
        }
        if m < 2 {
            return Err(Error::params(format!("m = {m}: the extension degree must be at least 2")));
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&v| v <= u16::MAX as u64 + 1)
            .ok_or_else(|| Error::params(format!("q = {p}^{e} is too large")))? as u32;
        (q as u64)
            .checked_pow(m)
            .filter(|&v| v <= chain::MAX_LEVEL_SIZE)
            .ok_or_else(|| Error::params(format!("q^m = {q}^{m} exceeds the supported bound")))?;

        let mut chain = Chain::new(p);
        let poly_q = Self::pick_modulus(&chain, -1, e as usize, seed_q, "degree-e modulus over F_p")?;
        chain.push_level(e as usize, poly_q)?;
        let fq_ops = (q <= 256).then(|| FqOps::build(&chain, 0));
        let poly_qm = Self::pick_modulus(&chain, 0, m as usize, seed_qm, "degree-m modulus over F_q")?;
        chain.push_level(m as usize, poly_qm)?;

        let qm = chain.size(1);
        let n1 = (qm - 1) as u64;
        let qpow = (0..m).map(|i| (q as u64).pow(i) % n1).collect();
        Ok(Tower { p, e, m, q, qm, chain, fq_ops, qpow })
    }

    fn pick_modulus(
        chain: &Chain,
        sub_li: i32,
        deg: usize,
        seed: Option<Vec<u32>>,
        what: &str,
    ) -> Result<Vec<u32>> {
        match seed {
            None => Ok(chain::smallest_irreducible(chain, sub_li, deg)),
            Some(f) => {
                let sub = chain.size(sub_li);
                if f.len() != deg + 1 || f[deg] != 1 {
                    return Err(Error::params(format!("{what}: need a monic polynomial of degree {deg}")));
                }
                if f.iter().any(|&c| c >= sub) {
                    return Err(Error::params(format!("{what}: coefficient index out of range")));
                }
                if !chain::is_irreducible(chain, sub_li, &f) {
                    return Err(Error::NotIrreducible(format!("{what}: {f:?}")));
                }
                Ok(f)
            }
        }
    }

    /// Adds the degree-2 level F_{q^{2m}} over F_{q^m} (idempotent). The
    /// modulus is the smallest-encoding irreducible quadratic unless seeded.
    pub fn extend_quadratic(&mut self) -> Result<()> {
        if self.chain.levels.len() > 2 {
            return Ok(());
        }
        (self.qm as u64)
            .checked_pow(2)
            .filter(|&v| v <= chain::MAX_LEVEL_SIZE)
            .ok_or_else(|| Error::params(format!("q^2m = {}^2 exceeds the supported bound", self.qm)))?;
        let poly = chain::smallest_irreducible(&self.chain, 1, 2);
        self.chain.push_level(2, poly)?;
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn qm(&self) -> u32 {
        self.qm
    }
    pub fn q2m(&self) -> Option<u32> {
        (self.chain.levels.len() > 2).then(|| self.chain.size(2))
    }
    /// Monic defining polynomials, little-endian, coefficients as indices of
    /// the level below.
    pub fn poly_q(&self) -> &[u32] {
        &self.chain.levels[0].modulus
    }
    pub fn poly_qm(&self) -> &[u32] {
        &self.chain.levels[1].modulus
    }
    pub fn poly_q2m(&self) -> Option<&[u32]> {
        self.chain.levels.get(2).map(|lt| lt.modulus.as_slice())
    }

    /// Byte tables for F_q; available whenever q <= 256.
    pub fn fq_ops(&self) -> Result<&FqOps> {
        self.fq_ops
            .as_ref()
            .ok_or_else(|| Error::params(format!("q = {} too large for dense F_q tables", self.q)))
    }

    pub fn level_size(&self, level: Level) -> Result<u32> {
        Ok(match level {
            Level::Base => self.p,
            Level::Q => self.q,
            Level::Qm => self.qm,
            Level::Q2m => self
                .q2m()
                .ok_or_else(|| Error::params("quadratic extension not built"))?,
        })
    }

    pub(crate) fn li(&self, level: Level) -> Result<i32> {
        match level {
            Level::Base => Ok(-1),
            Level::Q => Ok(0),
            Level::Qm => Ok(1),
            Level::Q2m => {
                if self.chain.levels.len() > 2 {
                    Ok(2)
                } else {
                    Err(Error::params("quadratic extension not built"))
                }
            }
        }
    }

    pub fn elem(&self, level: Level, index: u32) -> Result<FieldElement> {
        let sz = self.level_size(level)?;
        if index >= sz {
            return Err(Error::params(format!("index {index} out of range for level of size {sz}")));
        }
        Ok(FieldElement { level, index })
    }

    pub fn zero(&self, level: Level) -> FieldElement {
        FieldElement { level, index: 0 }
    }

    pub fn one(&self, level: Level) -> FieldElement {
        FieldElement { level, index: 1 }
    }

    /// The image of the rational integer `n` (n mod p as a constant).
    pub fn from_int(&self, level: Level, n: i64) -> FieldElement {
        let r = n.rem_euclid(self.p as i64) as u32;
        FieldElement { level, index: r }
    }

    fn check2(&self, a: FieldElement, b: FieldElement) -> Result<i32> {
        if a.level != b.level {
            return Err(Error::LevelMismatch { expected: a.level, got: b.level });
        }
        self.li(a.level)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let li = self.check2(a, b)?;
        Ok(FieldElement { level: a.level, index: self.chain.add(li, a.index, b.index) })
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let li = self.check2(a, b)?;
        Ok(FieldElement { level: a.level, index: self.chain.sub_el(li, a.index, b.index) })
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement> {
        let li = self.li(a.level)?;
        Ok(FieldElement { level: a.level, index: self.chain.neg(li, a.index) })
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let li = self.check2(a, b)?;
        Ok(FieldElement { level: a.level, index: self.chain.mul(li, a.index, b.index) })
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        let li = self.li(a.level)?;
        let v = self
            .chain
            .inv(li, a.index)
            .ok_or_else(|| Error::params("inverse of zero"))?;
        Ok(FieldElement { level: a.level, index: v })
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.mul(a, self.inv(b)?)
    }

    pub fn pow(&self, a: FieldElement, k: u64) -> Result<FieldElement> {
        let li = self.li(a.level)?;
        Ok(FieldElement { level: a.level, index: self.chain.pow(li, a.index, k) })
    }

    /// x ↦ x^{q^s} on F_{q^m}; s is reduced mod m.
    pub fn frobenius(&self, x: FieldElement, s: u32) -> Result<FieldElement> {
        if x.level != Level::Qm {
            return Err(Error::LevelMismatch { expected: Level::Qm, got: x.level });
        }
        Ok(FieldElement { level: Level::Qm, index: self.qm_frob(x.index, s) })
    }

    /// x ↦ x^{p^j}, the generating automorphism iterated, on F_q or F_{q^m}.
    pub fn frobenius_p(&self, x: FieldElement, j: u32) -> Result<FieldElement> {
        let li = self.li(x.level)?;
        let n1 = (self.chain.size(li) - 1).max(1) as u64;
        let mut k = 1u64;
        for _ in 0..j {
            k = k * self.p as u64 % n1;
        }
        Ok(FieldElement { level: x.level, index: self.chain.pow(li, x.index, k) })
    }

    /// Norm from F_{q^m} down to F_q: x^{(q^m-1)/(q-1)}.
    pub fn norm(&self, x: FieldElement) -> Result<FieldElement> {
        if x.level != Level::Qm {
            return Err(Error::LevelMismatch { expected: Level::Qm, got: x.level });
        }
        let k = (self.qm as u64 - 1) / (self.q as u64 - 1).max(1);
        let v = self.chain.pow(1, x.index, k);
        if v >= self.q {
            return Err(Error::invariant(format!("norm landed outside F_q: {v}")));
        }
        Ok(FieldElement { level: Level::Q, index: v })
    }

    /// Trace from F_{q^m} down to F_q: sum of x^{q^i} for i < m.
    pub fn trace(&self, x: FieldElement) -> Result<FieldElement> {
        if x.level != Level::Qm {
            return Err(Error::LevelMismatch { expected: Level::Qm, got: x.level });
        }
        let mut acc = 0u32;
        for i in 0..self.m {
            acc = self.chain.add(1, acc, self.qm_frob(x.index, i));
        }
        if acc >= self.q {
            return Err(Error::invariant(format!("trace landed outside F_q: {acc}")));
        }
        Ok(FieldElement { level: Level::Q, index: acc })
    }

    /// Absolute trace F_q → F_p: sum of x^{p^i} for i < e.
    pub fn absolute_trace_q(&self, x: FieldElement) -> Result<FieldElement> {
        if x.level != Level::Q {
            return Err(Error::LevelMismatch { expected: Level::Q, got: x.level });
        }
        let n1 = (self.q - 1).max(1) as u64;
        let mut acc = 0u32;
        let mut k = 1u64;
        for _ in 0..self.e {
            acc = self.chain.add(0, acc, self.chain.pow(0, x.index, k));
            k = k * self.p as u64 % n1;
        }
        if acc >= self.p {
            return Err(Error::invariant(format!("absolute trace landed outside F_p: {acc}")));
        }
        Ok(FieldElement { level: Level::Base, index: acc })
    }

    /// Subfield embedding: identity on indices, with a range check that the
    /// source really is a level below the target.
    pub fn embed(&self, x: FieldElement, to: Level) -> Result<FieldElement> {
        if to < x.level {
            return Err(Error::LevelMismatch { expected: to, got: x.level });
        }
        self.li(to)?;
        Ok(FieldElement { level: to, index: x.index })
    }

    /// Projection onto a lower level when the element is a constant there.
    pub fn project(&self, x: FieldElement, to: Level) -> Result<FieldElement> {
        if to > x.level {
            return Err(Error::LevelMismatch { expected: to, got: x.level });
        }
        let sz = self.level_size(to)?;
        if x.index >= sz {
            return Err(Error::params(format!(
                "element {} of {:?} does not lie in the {:?} subfield",
                x.index, x.level, to
            )));
        }
        Ok(FieldElement { level: to, index: x.index })
    }

    /// True iff an F_{q^m} element lies in the F_q subfield (equivalently,
    /// its power-basis coordinates above degree 0 vanish).
    pub fn in_subfield_q(&self, x: FieldElement) -> bool {
        x.index < self.q
    }

    /// Coefficient vector of `x` over the level below, little-endian.
    pub fn coeffs(&self, x: FieldElement) -> Result<Vec<u32>> {
        let li = self.li(x.level)?;
        if li < 0 {
            return Ok(vec![x.index]);
        }
        Ok(self.chain.digits(li, x.index))
    }

    pub fn from_coeffs(&self, level: Level, coeffs: &[u32]) -> Result<FieldElement> {
        let li = self.li(level)?;
        if li < 0 {
            return self.elem(level, *coeffs.first().unwrap_or(&0));
        }
        let lt_deg = match level {
            Level::Q => self.e as usize,
            Level::Qm => self.m as usize,
            Level::Q2m => 2,
            Level::Base => unreachable!(),
        };
        if coeffs.len() > lt_deg {
            return Err(Error::params(format!("too many coefficients for {level:?}")));
        }
        let sub = self.chain.size(li - 1).max(self.p);
        if coeffs.iter().any(|&c| c >= sub) {
            return Err(Error::params("coefficient index out of range"));
        }
        Ok(FieldElement { level, index: self.chain.from_digits(li, coeffs) })
    }

    // Raw index arithmetic for the hot paths. All values are level indices.

    #[inline]
    pub(crate) fn raw_add(&self, li: i32, a: u32, b: u32) -> u32 {
        self.chain.add(li, a, b)
    }
    #[inline]
    pub(crate) fn raw_sub(&self, li: i32, a: u32, b: u32) -> u32 {
        self.chain.sub_el(li, a, b)
    }
    #[inline]
    pub(crate) fn raw_neg(&self, li: i32, a: u32) -> u32 {
        self.chain.neg(li, a)
    }
    #[inline]
    pub(crate) fn raw_mul(&self, li: i32, a: u32, b: u32) -> u32 {
        self.chain.mul(li, a, b)
    }
    #[inline]
    pub(crate) fn raw_inv(&self, li: i32, a: u32) -> Option<u32> {
        self.chain.inv(li, a)
    }
    #[inline]
    pub fn qm_add(&self, a: u32, b: u32) -> u32 {
        self.chain.add(1, a, b)
    }
    #[inline]
    pub fn qm_sub(&self, a: u32, b: u32) -> u32 {
        self.chain.sub_el(1, a, b)
    }
    #[inline]
    pub fn qm_mul(&self, a: u32, b: u32) -> u32 {
        self.chain.mul(1, a, b)
    }
    #[inline]
    pub fn qm_inv(&self, a: u32) -> Option<u32> {
        self.chain.inv(1, a)
    }
    #[inline]
    pub fn qm_neg(&self, a: u32) -> u32 {
        self.chain.neg(1, a)
    }
    #[inline]
    pub fn qm_pow(&self, a: u32, k: u64) -> u32 {
        self.chain.pow(1, a, k)
    }

    /// x^{q^s} on raw F_{q^m} indices.
    #[inline]
    pub fn qm_frob(&self, x: u32, s: u32) -> u32 {
        let s = (s % self.m) as usize;
        if s == 0 || x == 0 {
            return x;
        }
        self.chain.pow(1, x, self.qpow[s])
    }

    /// Digits of an F_{q^m} index over F_q, little-endian, length m.
    #[inline]
    pub(crate) fn qm_digits_into(&self, x: u32, out: &mut [u8]) {
        let mut v = x;
        for slot in out.iter_mut().take(self.m as usize) {
            *slot = (v % self.q) as u8;
            v /= self.q;
        }
    }

    /// Reference multiplication used to confirm the tables are invisible.
    #[cfg(test)]
    pub(crate) fn mul_slow(&self, li: i32, a: u32, b: u32) -> u32 {
        self.chain.mul_slow(li, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_polynomials_are_the_smallest_irreducibles() {
        let t = build_tower(2, 1, 5).unwrap();
        assert_eq!(t.poly_q(), &[0, 1]); // F_2 itself: modulus X
        assert_eq!(t.poly_qm(), &[1, 0, 1, 0, 0, 1]); // X^5 + X^2 + 1
        let t9 = build_tower(3, 2, 2).unwrap();
        assert_eq!(t9.poly_q(), &[1, 0, 1]); // X^2 + 1 over F_3
    }

    #[test]
    fn rejected_parameters() {
        assert!(matches!(build_tower(4, 1, 5), Err(Error::InvalidParams(_))));
        assert!(matches!(build_tower(3, 1, 1), Err(Error::InvalidParams(_))));
        assert!(matches!(build_tower(2, 1, 40), Err(Error::InvalidParams(_))));
        // seeded reducible modulus: X^5 + X^4 + 1 = (X^2+X+1)(X^3+X+1) over F_2
        let r = Tower::build_with_seeds(2, 1, 5, None, Some(vec![1, 0, 0, 0, 1, 1]));
        assert!(matches!(r, Err(Error::NotIrreducible(_))));
    }

    #[test]
    fn tables_match_schoolbook_multiplication() {
        for (p, e, m) in [(2u32, 1u32, 5u32), (3, 1, 5), (2, 2, 5), (3, 2, 3)] {
            let t = build_tower(p, e, m).unwrap();
            let n = t.qm();
            let mut x = 1u32;
            for k in 1..400u32 {
                let a = x;
                let b = k.wrapping_mul(2654435761).wrapping_mul(k) % n;
                assert_eq!(t.qm_mul(a, b), t.mul_slow(1, a, b));
                x = (x * 7 + k) % n;
            }
        }
    }

    #[test]
    fn frobenius_squares_the_generator_and_composes_to_identity() {
        let t = build_tower(2, 1, 5).unwrap();
        let g = t.elem(Level::Qm, 2).unwrap(); // the class of X
        let g2 = t.mul(g, g).unwrap();
        assert_eq!(t.frobenius(g, 1).unwrap(), g2);
        for x in 0..t.qm() {
            let e = t.elem(Level::Qm, x).unwrap();
            assert_eq!(t.frobenius(e, 0).unwrap(), e);
            let mut y = e;
            for _ in 0..5 {
                y = t.frobenius(y, 1).unwrap();
            }
            assert_eq!(y, e, "Frobenius composed m times must be the identity");
        }
    }

    #[test]
    fn trace_has_the_right_zero_count_and_lands_in_fq() {
        let t = build_tower(2, 1, 5).unwrap();
        let zeros = (0..32)
            .filter(|&x| t.trace(t.elem(Level::Qm, x).unwrap()).unwrap().index == 0)
            .count();
        assert_eq!(zeros, 16); // trace is onto F_2 with kernel of size q^{m-1}
    }

    #[test]
    fn norm_is_multiplicative_and_lands_in_fq() {
        use rand::{Rng, SeedableRng};
        let t = build_tower(3, 1, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let a = t.elem(Level::Qm, rng.random_range(0..t.qm())).unwrap();
            let b = t.elem(Level::Qm, rng.random_range(0..t.qm())).unwrap();
            let nab = t.norm(t.mul(a, b).unwrap()).unwrap();
            let na_nb = t.mul(t.norm(a).unwrap(), t.norm(b).unwrap()).unwrap();
            assert_eq!(nab, na_nb);
        }
    }

    #[test]
    fn embeddings_are_ring_homomorphisms() {
        let mut t = build_tower(2, 1, 5).unwrap();
        t.extend_quadratic().unwrap();
        assert_eq!(t.q2m(), Some(1024));
        // F_q -> F_{q^m} on all pairs, F_{q^m} -> F_{q^{2m}} on all pairs.
        for a in 0..t.q() {
            for b in 0..t.q() {
                let (ea, eb) = (t.elem(Level::Q, a).unwrap(), t.elem(Level::Q, b).unwrap());
                let (ua, ub) =
                    (t.embed(ea, Level::Qm).unwrap(), t.embed(eb, Level::Qm).unwrap());
                assert_eq!(
                    t.embed(t.add(ea, eb).unwrap(), Level::Qm).unwrap(),
                    t.add(ua, ub).unwrap()
                );
                assert_eq!(
                    t.embed(t.mul(ea, eb).unwrap(), Level::Qm).unwrap(),
                    t.mul(ua, ub).unwrap()
                );
            }
        }
        for a in 0..t.qm() {
            for b in 0..t.qm() {
                let (ea, eb) = (t.elem(Level::Qm, a).unwrap(), t.elem(Level::Qm, b).unwrap());
                let (ua, ub) =
                    (t.embed(ea, Level::Q2m).unwrap(), t.embed(eb, Level::Q2m).unwrap());
                assert_eq!(
                    t.embed(t.add(ea, eb).unwrap(), Level::Q2m).unwrap(),
                    t.add(ua, ub).unwrap()
                );
                assert_eq!(
                    t.embed(t.mul(ea, eb).unwrap(), Level::Q2m).unwrap(),
                    t.mul(ua, ub).unwrap()
                );
            }
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let t = build_tower(3, 2, 3).unwrap();
        for x in 0..t.qm() {
            let e = t.elem(Level::Qm, x).unwrap();
            let c = t.coeffs(e).unwrap();
            assert_eq!(c.len(), 3);
            assert_eq!(t.from_coeffs(Level::Qm, &c).unwrap(), e);
        }
    }
}
