//! Twisted linearized polynomials over the top field, the projective
//! polynomials attached to them, and exact root counts.
//!
//! Throughout, σ denotes the automorphism x ↦ x^{q^s} of F_{q^m} with
//! gcd(s, m) = 1, so a σ-linearized polynomial Σ αᵢ X^{σ^i} is an F_q-linear
//! endomorphism of F_{q^m} and its kernel size is a power of q. Root counts
//! come in two independent flavours: plain enumeration of the field, and the
//! eigenspace dimensions of the twisted companion product
//! A_L = C·C^σ⋯C^{σ^{m-1}}, which for the σ-degree-2 case collapses to a
//! scalar recurrence (the G sequence below). Coefficients and matrix entries
//! are raw F_{q^m} indices.

use crate::error::{Error, Result};
use crate::field::Tower;

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Checks that x ↦ x^{q^s} generates the Galois group of F_{q^m}/F_q.
pub fn validate_shift(t: &Tower, s: u32) -> Result<()> {
    let m = t.m();
    if s == 0 || s >= m {
        return Err(Error::params(format!("shift s = {s} must satisfy 1 <= s < m = {m}")));
    }
    if gcd(s as u64, m as u64) != 1 {
        return Err(Error::params(format!("shift s = {s} shares a factor with m = {m}")));
    }
    Ok(())
}

/// Σ αᵢ X^{σ^i} with σ = x ↦ x^{q^s}; coefficients are F_{q^m} indices,
/// low σ-degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedPoly {
    pub s: u32,
    pub coeffs: Vec<u32>,
}

impl LinearizedPoly {
    pub fn new(t: &Tower, s: u32, coeffs: Vec<u32>) -> Result<Self> {
        validate_shift(t, s)?;
        if coeffs.iter().any(|&c| c >= t.qm()) {
            return Err(Error::params("coefficient index out of range for the top field"));
        }
        Ok(LinearizedPoly { s, coeffs })
    }

    /// Largest i with αᵢ ≠ 0; `None` for the zero polynomial.
    pub fn sigma_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn evaluate(&self, t: &Tower, x: u32) -> u32 {
        let mut acc = 0u32;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                acc = t.qm_add(acc, t.qm_mul(c, t.qm_frob(x, self.s * i as u32)));
            }
        }
        acc
    }

    /// Number of roots in F_{q^m} by enumeration.
    pub fn root_count_bruteforce(&self, t: &Tower) -> u64 {
        (0..t.qm()).filter(|&x| self.evaluate(t, x) == 0).count() as u64
    }

    /// log_q of the root count, which the theory forces to be exact; anything
    /// else means the polynomial was not F_q-linear and is a hard failure.
    pub fn kernel_dimension(&self, t: &Tower) -> Result<u32> {
        let n = self.root_count_bruteforce(t);
        let q = t.q() as u64;
        let mut k = 0u32;
        let mut v = 1u64;
        while v < n {
            v *= q;
            k += 1;
        }
        if v != n {
            return Err(Error::invariant(format!("kernel size {n} is not a power of q = {q}")));
        }
        Ok(k)
    }

    /// Strips leading zero coefficients by factoring powers of σ out of the
    /// composition: when α_0 = 0, L = σ ∘ M with M of one lower σ-degree and
    /// the same root set. Returns the reduced polynomial and the number of
    /// σ factors removed.
    pub fn sigma_normalized(&self, t: &Tower) -> (LinearizedPoly, u32) {
        let deg = match self.sigma_degree() {
            Some(d) => d,
            None => return (LinearizedPoly { s: self.s, coeffs: vec![0] }, 0),
        };
        let mut coeffs: Vec<u32> = self.coeffs[..=deg].to_vec();
        let inv_shift = t.m() - self.s % t.m();
        let mut shifts = 0u32;
        while coeffs.len() > 1 && coeffs[0] == 0 {
            coeffs = coeffs[1..].iter().map(|&c| t.qm_frob(c, inv_shift)).collect();
            shifts += 1;
        }
        (LinearizedPoly { s: self.s, coeffs }, shifts)
    }

    /// The projective polynomial with the same coefficients: σ^i becomes the
    /// exponent (σ^i - 1)/(σ - 1).
    pub fn projective(&self) -> ProjectivePoly {
        ProjectivePoly { s: self.s, coeffs: self.coeffs.clone() }
    }

    /// Companion matrix: subdiagonal of ones, last column -αᵢ/α_d.
    pub fn companion(&self, t: &Tower) -> Result<MatQm> {
        let d = self
            .sigma_degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::params("companion matrix needs σ-degree at least 1"))?;
        let inv_ad = t.qm_inv(self.coeffs[d]).expect("leading coefficient is nonzero");
        let mut c = MatQm::zero(d);
        for i in 1..d {
            c.set(i, i - 1, 1);
        }
        for i in 0..d {
            c.set(i, d - 1, t.qm_neg(t.qm_mul(self.coeffs[i], inv_ad)));
        }
        Ok(c)
    }

    /// A_L = C·C^σ⋯C^{σ^{m-1}}, the matrix whose F_q-eigenspaces carry the
    /// root counts.
    pub fn al_matrix(&self, t: &Tower) -> Result<MatQm> {
        let c = self.companion(t)?;
        let mut acc = c.clone();
        let mut cur = c;
        for _ in 1..t.m() {
            cur = cur.frobenius(t, self.s);
            acc = acc.mul(t, &cur);
        }
        Ok(acc)
    }

    /// Root count of L itself via eigenspaces: q^{n_1} with n_1 the dimension
    /// of the fixed space of A_L. σ-normalizes first, which preserves roots.
    pub fn root_count_eigen(&self, t: &Tower) -> Result<u64> {
        let (norm, _) = self.sigma_normalized(t);
        match norm.sigma_degree() {
            None => Ok(t.qm() as u64),
            Some(0) => Ok(1),
            Some(d) => {
                let a = norm.al_matrix(t)?;
                let n1 = d as u32 - a.sub_scalar(t, 1).rank(t);
                Ok((t.q() as u64).pow(n1))
            }
        }
    }
}

/// Σ αᵢ X^{eᵢ} with eᵢ = (σ^i - 1)/(σ - 1) = 1 + q^s + … + q^{s(i-1)}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivePoly {
    pub s: u32,
    pub coeffs: Vec<u32>,
}

impl ProjectivePoly {
    pub fn evaluate(&self, t: &Tower, x: u32) -> u32 {
        if x == 0 {
            // every exponent except e_0 = 0 is positive
            return self.coeffs.first().copied().unwrap_or(0);
        }
        let n1 = (t.qm() - 1) as u128;
        let sigma = (t.q() as u128).pow(self.s);
        let mut acc = 0u32;
        let mut e = 0u128; // e_{i+1} = e_i σ + 1, reduced mod q^m - 1
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                e = (e * sigma + 1) % n1;
            }
            if c != 0 {
                acc = t.qm_add(acc, t.qm_mul(c, t.qm_pow(x, e as u64)));
            }
        }
        acc
    }

    pub fn roots_bruteforce(&self, t: &Tower) -> Vec<u32> {
        (0..t.qm()).filter(|&x| self.evaluate(t, x) == 0).collect()
    }

    pub fn root_count_bruteforce(&self, t: &Tower) -> u64 {
        self.roots_bruteforce(t).len() as u64
    }

    /// Root count in F_{q^m} as Σ_{λ∈F_q} (q^{n_λ} - 1)/(q - 1) over the
    /// eigenvalues λ of A_L lying in F_q. Requires a nonzero constant term:
    /// unlike the linearized side, projective root counts are not preserved
    /// by σ-normalization.
    pub fn root_count_eigen(&self, t: &Tower) -> Result<u64> {
        if self.coeffs.first().copied().unwrap_or(0) == 0 {
            return Err(Error::params("eigenspace root count needs a nonzero constant term"));
        }
        let lin = LinearizedPoly { s: self.s, coeffs: self.coeffs.clone() };
        let d = lin.sigma_degree().unwrap();
        if d == 0 {
            return Ok(0);
        }
        let a = lin.al_matrix(t)?;
        let q = t.q() as u64;
        let mut total = 0u64;
        for lam in 0..t.q() {
            // F_q sits in F_{q^m} as the indices below q
            let n_lam = d as u32 - a.sub_scalar(t, lam).rank(t);
            total += (q.pow(n_lam) - 1) / (q - 1);
        }
        Ok(total)
    }
}

/// Dense square matrix over F_{q^m}, row-major raw indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatQm {
    pub d: usize,
    entries: Vec<u32>,
}

impl MatQm {
    pub fn zero(d: usize) -> Self {
        MatQm { d, entries: vec![0; d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zero(d);
        for i in 0..d {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[&[u32]]) -> Self {
        let d = rows.len();
        let mut m = Self::zero(d);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), d);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.d + j] = v;
    }

    pub fn mul(&self, t: &Tower, rhs: &MatQm) -> MatQm {
        assert_eq!(self.d, rhs.d);
        let d = self.d;
        let mut out = MatQm::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..d {
                    let v = t.qm_add(out.at(i, j), t.qm_mul(a, rhs.at(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Entrywise x ↦ x^{q^s}.
    pub fn frobenius(&self, t: &Tower, s: u32) -> MatQm {
        MatQm { d: self.d, entries: self.entries.iter().map(|&x| t.qm_frob(x, s)).collect() }
    }

    /// self - λI for a scalar given as an F_{q^m} index.
    pub fn sub_scalar(&self, t: &Tower, lam: u32) -> MatQm {
        let mut out = self.clone();
        for i in 0..self.d {
            out.set(i, i, t.qm_sub(self.at(i, i), lam));
        }
        out
    }

    pub fn rank(&self, t: &Tower) -> u32 {
        let d = self.d;
        let mut rows: Vec<Vec<u32>> = (0..d).map(|i| (0..d).map(|j| self.at(i, j)).collect()).collect();
        let mut rank = 0usize;
        for col in 0..d {
            let Some(pi) = (rank..d).find(|&r| rows[r][col] != 0) else { continue };
            rows.swap(rank, pi);
            let inv = t.qm_inv(rows[rank][col]).unwrap();
            for j in col..d {
                rows[rank][j] = t.qm_mul(rows[rank][j], inv);
            }
            for r in 0..d {
                if r != rank && rows[r][col] != 0 {
                    let f = rows[r][col];
                    for j in col..d {
                        let v = t.qm_sub(rows[r][j], t.qm_mul(f, rows[rank][j]));
                        rows[r][j] = v;
                    }
                }
            }
            rank += 1;
        }
        rank as u32
    }

    pub fn trace(&self, t: &Tower) -> u32 {
        let mut acc = 0u32;
        for i in 0..self.d {
            acc = t.qm_add(acc, self.at(i, i));
        }
        acc
    }

    pub fn det(&self, t: &Tower) -> u32 {
        let d = self.d;
        if d == 1 {
            return self.at(0, 0);
        }
        if d == 2 {
            return t.qm_sub(
                t.qm_mul(self.at(0, 0), self.at(1, 1)),
                t.qm_mul(self.at(0, 1), self.at(1, 0)),
            );
        }
        // elimination to triangular form, tracking swaps
        let mut rows: Vec<Vec<u32>> = (0..d).map(|i| (0..d).map(|j| self.at(i, j)).collect()).collect();
        let mut det = 1u32;
        for col in 0..d {
            let Some(pi) = (col..d).find(|&r| rows[r][col] != 0) else { return 0 };
            if pi != col {
                rows.swap(col, pi);
                det = t.qm_neg(det);
            }
            det = t.qm_mul(det, rows[col][col]);
            let inv = t.qm_inv(rows[col][col]).unwrap();
            for r in col + 1..d {
                if rows[r][col] != 0 {
                    let f = t.qm_mul(rows[r][col], inv);
                    for j in col..d {
                        let v = t.qm_sub(rows[r][j], t.qm_mul(f, rows[col][j]));
                        rows[r][j] = v;
                    }
                }
            }
        }
        det
    }

    /// Some(λ) iff the matrix is λ·I.
    pub fn as_scalar(&self) -> Option<u32> {
        let lam = self.at(0, 0);
        for i in 0..self.d {
            for j in 0..self.d {
                let want = if i == j { lam } else { 0 };
                if self.at(i, j) != want {
                    return None;
                }
            }
        }
        Some(lam)
    }

    /// Twisted power B^{[k]} = B·B^σ⋯B^{σ^{k-1}} with σ = x ↦ x^{q^s}.
    pub fn twisted_power(&self, t: &Tower, s: u32, k: u32) -> MatQm {
        let mut acc = MatQm::identity(self.d);
        let mut cur = self.clone();
        for i in 0..k {
            if i > 0 {
                cur = cur.frobenius(t, s);
            }
            acc = acc.mul(t, &cur);
        }
        acc
    }
}

/// The sequence attached to degree-2 companion products: G_0 = 1, G_1 = -1,
/// G_k = -(G_{k-1})^σ - u·(G_{k-2})^{σ²}. For u ∈ F_q every term stays in F_q
/// and the sequence does not depend on s. Returns G_0 ..= G_len.
pub fn g_sequence(t: &Tower, s: u32, u: u32, len: usize) -> Result<Vec<u32>> {
    validate_shift(t, s)?;
    if u >= t.qm() {
        return Err(Error::params("u out of range for the top field"));
    }
    let mut g = Vec::with_capacity(len + 1);
    g.push(1u32);
    if len >= 1 {
        g.push(t.qm_neg(1));
    }
    for k in 2..=len {
        let a = t.qm_frob(g[k - 1], s);
        let b = t.qm_mul(u, t.qm_frob(g[k - 2], 2 * s));
        g.push(t.qm_neg(t.qm_add(a, b)));
    }
    Ok(g)
}

/// G_{m-1} evaluated at u = 1/γ in characteristic 2, by the closed form
/// Σ_j (m·(m-j-1)!)/(j!·(m-2j)!) · γ^{-j} with the coefficients reduced
/// mod 2. Exact factorial arithmetic bounds m; the recursive `g_sequence`
/// has no such limit and the two must agree.
pub fn g_m1_even_closed_form(t: &Tower, gamma: u32) -> Result<u32> {
    if t.p() != 2 {
        return Err(Error::params("closed form is specific to characteristic 2"));
    }
    let m = t.m() as u128;
    if m > 33 {
        return Err(Error::params("factorial overflow: closed form supported for m <= 33"));
    }
    if gamma == 0 || gamma >= t.qm() {
        return Err(Error::params("gamma must be a nonzero field index"));
    }
    let fact = |n: u128| -> u128 { (1..=n).product::<u128>().max(1) };
    let ginv = t.qm_inv(gamma).unwrap();
    let mut acc = 0u32;
    for j in 0..=(m / 2) {
        let num = m * fact(m - j - 1);
        let den = fact(j) * fact(m - 2 * j);
        assert_eq!(num % den, 0, "Dickson-type coefficients are integers");
        if (num / den) % 2 == 1 {
            acc = t.qm_add(acc, t.qm_pow(ginv, j as u64));
        }
    }
    Ok(acc)
}
