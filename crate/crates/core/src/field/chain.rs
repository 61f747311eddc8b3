//! Table-backed arithmetic for a chain of field extensions.
//!
//! Each level stores its elements as indices: the little-endian base-`sub`
//! encoding of the coefficient vector over the level below, in the power
//! basis of the defining polynomial's root. Index 0 is zero and index 1 is
//! one at every level, and the sublevel embeds as the constant coefficients,
//! so embedding never changes an index.
//!
//! Multiplication uses log/antilog tables built once per level; addition is
//! digitwise (a plain xor when the characteristic is 2). The slow schoolbook
//! path used while building the tables stays available for cross-checks.

use crate::error::{Error, Result};

/// Largest level size we will build tables for (64 MiB of u32 per table).
pub const MAX_LEVEL_SIZE: u64 = 1 << 23;

pub(crate) struct LevelTables {
    pub size: u32,
    pub sub: u32,
    pub deg: usize,
    /// Monic defining polynomial, little-endian, coefficients as sublevel
    /// indices, length `deg + 1`.
    pub modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

pub(crate) struct Chain {
    pub p: u32,
    pub levels: Vec<LevelTables>,
}

impl Chain {
    pub fn new(p: u32) -> Self {
        Chain { p, levels: Vec::new() }
    }

    pub fn size(&self, li: i32) -> u32 {
        if li < 0 {
            self.p
        } else {
            self.levels[li as usize].size
        }
    }

    pub fn add(&self, li: i32, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if li < 0 {
            return (a + b) % self.p;
        }
        let lt = &self.levels[li as usize];
        let (mut x, mut y) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..lt.deg {
            let d = self.add(li - 1, x % lt.sub, y % lt.sub);
            out += d * place;
            x /= lt.sub;
            y /= lt.sub;
            if x == 0 && y == 0 {
                break;
            }
            place *= lt.sub;
        }
        out
    }

    pub fn neg(&self, li: i32, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        if li < 0 {
            return (self.p - a) % self.p;
        }
        let lt = &self.levels[li as usize];
        let mut x = a;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..lt.deg {
            out += self.neg(li - 1, x % lt.sub) * place;
            x /= lt.sub;
            if x == 0 {
                break;
            }
            place *= lt.sub;
        }
        out
    }

    pub fn sub_el(&self, li: i32, a: u32, b: u32) -> u32 {
        self.add(li, a, self.neg(li, b))
    }

    pub fn mul(&self, li: i32, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if li < 0 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let lt = &self.levels[li as usize];
        let n1 = lt.size - 1;
        lt.exp[((lt.log[a as usize] + lt.log[b as usize]) % n1) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, li: i32, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        if li < 0 {
            return Some(self.pow(li, a, self.p as u64 - 2));
        }
        let lt = &self.levels[li as usize];
        let n1 = lt.size - 1;
        Some(lt.exp[((n1 - lt.log[a as usize]) % n1) as usize])
    }

    pub fn pow(&self, li: i32, a: u32, k: u64) -> u32 {
        if a == 0 {
            return if k == 0 { 1 } else { 0 };
        }
        if li < 0 {
            let mut base = a as u64 % self.p as u64;
            let mut out = 1u64;
            let mut k = k % (self.p as u64 - 1).max(1);
            if self.p == 2 {
                return 1;
            }
            while k > 0 {
                if k & 1 == 1 {
                    out = out * base % self.p as u64;
                }
                base = base * base % self.p as u64;
                k >>= 1;
            }
            return out as u32;
        }
        let lt = &self.levels[li as usize];
        let n1 = (lt.size - 1) as u64;
        if n1 == 0 {
            return 1;
        }
        let e = (lt.log[a as usize] as u64 * (k % n1)) % n1;
        lt.exp[e as usize]
    }

    /// Digits of `a` over the sublevel, little-endian, length `deg`.
    pub fn digits(&self, li: i32, a: u32) -> Vec<u32> {
        let lt = &self.levels[li as usize];
        let mut x = a;
        let mut out = Vec::with_capacity(lt.deg);
        for _ in 0..lt.deg {
            out.push(x % lt.sub);
            x /= lt.sub;
        }
        out
    }

    pub fn from_digits(&self, li: i32, digits: &[u32]) -> u32 {
        let lt = &self.levels[li as usize];
        let mut out = 0u32;
        for (i, &d) in digits.iter().enumerate().take(lt.deg) {
            out += d * lt.sub.pow(i as u32);
        }
        out
    }

    /// Schoolbook product reduced by the modulus: the reference path the
    /// tables are checked against.
    #[cfg(test)]
    pub fn mul_slow(&self, li: i32, a: u32, b: u32) -> u32 {
        if li < 0 {
            return self.mul(li, a, b);
        }
        let lt = &self.levels[li as usize];
        let da = self.digits(li, a);
        let db = self.digits(li, b);
        mul_mod(self, li - 1, &da, &db, &lt.modulus, lt.deg)
    }

    /// Appends a new level of degree `deg` over the current top level.
    pub fn push_level(&mut self, deg: usize, modulus: Vec<u32>) -> Result<()> {
        let sub_li = self.levels.len() as i32 - 1;
        let sub = self.size(sub_li);
        let size = (sub as u64).checked_pow(deg as u32).filter(|&s| s <= MAX_LEVEL_SIZE).ok_or_else(
            || Error::params(format!("field of size {sub}^{deg} exceeds the supported bound")),
        )? as u32;
        assert_eq!(modulus.len(), deg + 1);
        assert_eq!(modulus[deg], 1, "modulus must be monic");

        let n1 = size - 1;
        let mut exp = vec![0u32; n1.max(1) as usize];
        let mut log = vec![u32::MAX; size as usize];
        if n1 == 1 {
            // F_2 re-tabled over itself: the unit group is trivial
            exp[0] = 1;
            log[1] = 0;
        } else {
            let mulm = |x: u32, y: u32| {
                let dx = digits_of(x, sub, deg);
                let dy = digits_of(y, sub, deg);
                mul_mod(self, sub_li, &dx, &dy, &modulus, deg)
            };
            let powm = |mut base: u32, mut k: u64| {
                let mut out = 1u32;
                while k > 0 {
                    if k & 1 == 1 {
                        out = mulm(out, base);
                    }
                    base = mulm(base, base);
                    k >>= 1;
                }
                out
            };
            let primes = prime_factors(n1 as u64);
            let mut gen = 0u32;
            for g in 2..size {
                if powm(g, n1 as u64) == 1
                    && primes.iter().all(|&r| powm(g, n1 as u64 / r) != 1)
                {
                    gen = g;
                    break;
                }
            }
            if gen == 0 {
                return Err(Error::NotIrreducible(format!(
                    "no multiplicative generator below {size}; modulus is not irreducible"
                )));
            }
            let mut cur = 1u32;
            for (i, slot) in exp.iter_mut().enumerate() {
                *slot = cur;
                if log[cur as usize] != u32::MAX {
                    return Err(Error::NotIrreducible(format!(
                        "generator has order below {n1}; modulus is not irreducible"
                    )));
                }
                log[cur as usize] = i as u32;
                cur = mulm(cur, gen);
            }
            if cur != 1 {
                return Err(Error::invariant("generator power table did not close"));
            }
        }
        self.levels.push(LevelTables { size, sub, deg, modulus, exp, log });
        Ok(())
    }
}

fn digits_of(a: u32, sub: u32, deg: usize) -> Vec<u32> {
    let mut x = a;
    let mut out = Vec::with_capacity(deg);
    for _ in 0..deg {
        out.push(x % sub);
        x /= sub;
    }
    out
}

/// Schoolbook polynomial product of `da * db` reduced mod `modulus`, all
/// coefficient arithmetic at chain level `li`, re-encoded as an index.
fn mul_mod(chain: &Chain, li: i32, da: &[u32], db: &[u32], modulus: &[u32], deg: usize) -> u32 {
    let mut prod = vec![0u32; 2 * deg - 1];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            if y == 0 {
                continue;
            }
            prod[i + j] = chain.add(li, prod[i + j], chain.mul(li, x, y));
        }
    }
    for i in (deg..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        let shift = i - deg;
        for (j, &mj) in modulus.iter().enumerate().take(deg) {
            if mj != 0 {
                let t = chain.mul(li, c, mj);
                prod[shift + j] = chain.sub_el(li, prod[shift + j], t);
            }
        }
    }
    let sub = chain.size(li);
    let mut out = 0u32;
    for (i, &d) in prod.iter().enumerate().take(deg) {
        out += d * sub.pow(i as u32);
    }
    out
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `f` divided by monic `g`, coefficients at chain level `li`.
pub(crate) fn poly_rem(chain: &Chain, li: i32, f: &[u32], g: &[u32]) -> Vec<u32> {
    let mut r: Vec<u32> = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (j, &gj) in g.iter().enumerate().take(dg) {
                if gj != 0 {
                    let t = chain.mul(li, lead, gj);
                    r[shift + j] = chain.sub_el(li, r[shift + j], t);
                }
            }
        }
        r.pop();
    }
    r
}

/// True iff monic `f` (degree >= 1) has no monic divisor of degree
/// 1..=deg(f)/2: trial division over the level-`li` coefficient field.
pub(crate) fn is_irreducible(chain: &Chain, li: i32, f: &[u32]) -> bool {
    let d = f.len() - 1;
    debug_assert_eq!(f[d], 1);
    if d == 1 {
        return true;
    }
    let sub = chain.size(li);
    for dd in 1..=d / 2 {
        let count = (sub as u64).pow(dd as u32);
        for v in 0..count {
            let mut g = Vec::with_capacity(dd + 1);
            let mut x = v;
            for _ in 0..dd {
                g.push((x % sub as u64) as u32);
                x /= sub as u64;
            }
            g.push(1);
            let r = poly_rem(chain, li, f, &g);
            if r.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible of degree `deg` over level `li` whose little-endian
/// coefficient encoding (low degree first, as an integer in base `sub`) is
/// smallest. Deterministic, so every run of the library agrees on the tower.
pub(crate) fn smallest_irreducible(chain: &Chain, li: i32, deg: usize) -> Vec<u32> {
    let sub = chain.size(li);
    let count = (sub as u64).pow(deg as u32);
    for v in 0..count {
        let mut f = Vec::with_capacity(deg + 1);
        let mut x = v;
        for _ in 0..deg {
            f.push((x % sub as u64) as u32);
            x /= sub as u64;
        }
        f.push(1);
        if is_irreducible(chain, li, &f) {
            return f;
        }
    }
    unreachable!("an irreducible of every degree exists over a finite field")
}
