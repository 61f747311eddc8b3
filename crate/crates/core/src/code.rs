//! Rank-metric codes and their dictionary with F_q-subspaces of F_{q^m}^k.
//!
//! A spanning subspace hands its basis to a generator matrix as columns;
//! in the other direction the F_q-span of the columns recovers the
//! subspace. Under this correspondence a codeword of rank weight w is the
//! same datum as a hyperplane meeting the subspace in dimension n - w, so
//! the line spectrum of the subspace and the weight distribution of the
//! code are computed by two unrelated scans and compared exactly.
//! Nesting of rank supports is likewise checked twice: pairwise over
//! projective codeword representatives, and through the cutting property
//! of the column span.
//!
//! Codes usually live at the middle level F_{q^m}. The same generator can
//! be read over the quadratic extension (the embedding is the identity on
//! indices), which is how the covering-radius sanity check reaches the
//! doubled plane; weight machinery that expands over F_q works at either
//! level, while the projective routes stay at the middle one.

use crate::error::{charge, Error, Result};
use crate::field::{Echelon, FqOps, Level, Tower};
use crate::geometry::{self, FqSubspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// A linear rank-metric code: a full-row-rank k×n generator matrix with
/// entries at `level` (indices of that field). The dual of a full space is
/// allowed to have k = 0, but `new` itself rejects empty generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCode {
    pub level: Level,
    pub k: usize,
    pub n: usize,
    /// k generator rows of length n.
    pub gen: Vec<Vec<u32>>,
}

impl RankCode {
    pub fn new(t: &Tower, level: Level, gen: Vec<Vec<u32>>) -> Result<Self> {
        let k = gen.len();
        if k == 0 {
            return Err(Error::params("a code needs at least one generator row"));
        }
        let n = gen[0].len();
        if n == 0 || gen.iter().any(|r| r.len() != n) {
            return Err(Error::params("generator rows must be nonempty and of equal length"));
        }
        let size = t.level_size(level)?;
        if gen.iter().flatten().any(|&c| c >= size) {
            return Err(Error::params("generator entry out of range for the field level"));
        }
        if geometry::qm_row_rank_level(t, &gen, level)? != k {
            return Err(Error::params("generator rows are dependent over the field level"));
        }
        Ok(RankCode { level, k, n, gen })
    }

    /// The codeword of message `x`: x·G.
    pub fn encode(&self, t: &Tower, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.k {
            return Err(Error::params(format!("message has {} coordinates, need {}", x.len(), self.k)));
        }
        let size = t.level_size(self.level)?;
        if x.iter().any(|&c| c >= size) {
            return Err(Error::params("message coordinate out of range for the field level"));
        }
        let li = t.li(self.level)?;
        let mut out = vec![0u32; self.n];
        encode_into(t, li, &self.gen, x, &mut out);
        Ok(out)
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        self.gen.iter().map(|row| row[j]).collect()
    }

    /// Reduced echelon form of the generator: canonical for the row space,
    /// so two codes are equal as codes iff these agree.
    pub fn canonical_rows(&self, t: &Tower) -> Result<Vec<Vec<u32>>> {
        let li = t.li(self.level)?;
        let mut rows = self.gen.clone();
        rref_level(t, li, &mut rows);
        Ok(rows)
    }

    /// One CSV line per generator row; each cell is the entry's little-endian
    /// F_q digit string, digits joined by ':'.
    pub fn generator_csv(&self, t: &Tower) -> Result<String> {
        let mut out = String::new();
        let mut digits = Vec::new();
        for row in &self.gen {
            let mut cells = Vec::with_capacity(self.n);
            for &entry in row {
                fq_digits(t, self.level, entry, &mut digits)?;
                cells.push(digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(":"));
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// Inverse of `generator_csv`: rebuild a code from digit-vector cells.
    pub fn from_generator_csv(t: &Tower, level: Level, text: &str) -> Result<RankCode> {
        let q = t.q() as u64;
        let d = fq_digit_count(t, level)?;
        let m = t.m() as usize;
        let qm = t.qm() as u64;
        let mut gen = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut row = Vec::new();
            for cell in line.split(',') {
                let digits: Vec<u64> = cell
                    .split(':')
                    .map(|s| s.trim().parse::<u64>().map_err(|_| Error::params(format!("bad digit {s:?} in generator cell"))))
                    .collect::<Result<_>>()?;
                if digits.len() != d || digits.iter().any(|&v| v >= q) {
                    return Err(Error::params(format!("generator cell needs {d} digits below {q}")));
                }
                // little-endian packing over F_q per middle-level half
                let half = |sl: &[u64]| sl.iter().rev().fold(0u64, |acc, &v| acc * q + v);
                let idx = if d == m { half(&digits) } else { half(&digits[..m]) + qm * half(&digits[m..]) };
                row.push(idx as u32);
            }
            gen.push(row);
        }
        RankCode::new(t, level, gen)
    }
}

/// The code whose generator columns are the stored basis of U; the subspace
/// must span the ambient space over F_{q^m}. Its F_q-dimension becomes the
/// code length.
pub fn psi(t: &Tower, u: &FqSubspace) -> Result<RankCode> {
    if geometry::qm_row_rank(t, &u.basis) != u.k {
        return Err(Error::params("the subspace does not span the ambient space over F_{q^m}"));
    }
    let gen = (0..u.k).map(|r| u.basis.iter().map(|g| g[r]).collect()).collect();
    Ok(RankCode { level: Level::Qm, k: u.k, n: u.dim(), gen })
}

/// The same generator read over the quadratic extension, where the covering
/// radius of the dual is probed. The embedding is the identity on indices,
/// so only the level marker changes; the tower must have its quadratic
/// level built.
pub fn psi_embedded(t: &Tower, u: &FqSubspace) -> Result<RankCode> {
    t.level_size(Level::Q2m)?;
    let c = psi(t, u)?;
    Ok(RankCode { level: Level::Q2m, ..c })
}

/// The F_q-span of the generator columns. Errors when the columns are
/// F_q-dependent, which is exactly rank degeneracy: a dependency Σ aᵢgᵢ = 0
/// over F_q confines every rank support to the hyperplane a⊥.
pub fn phi(t: &Tower, c: &RankCode) -> Result<FqSubspace> {
    if c.level != Level::Qm {
        return Err(Error::LevelMismatch { expected: Level::Qm, got: c.level });
    }
    if c.k == 0 {
        return Err(Error::params("the zero code has no associated subspace"));
    }
    let cols = (0..c.n).map(|j| c.column(j)).collect();
    FqSubspace::new(t, c.k, cols)
        .map_err(|_| Error::params("degenerate code: the generator columns are F_q-dependent"))
}

/// Whether the rank supports of the codewords span all of F_q^n, i.e. the
/// generator columns are F_q-independent.
pub fn is_nondegenerate(t: &Tower, c: &RankCode) -> Result<bool> {
    let ops = t.fq_ops()?;
    let d = fq_digit_count(t, c.level)?;
    let mut digits = Vec::new();
    let mut rows = Vec::with_capacity(c.n);
    for j in 0..c.n {
        let mut row = Vec::with_capacity(c.k * d);
        for &entry in c.column(j).iter() {
            fq_digits(t, c.level, entry, &mut digits)?;
            row.extend_from_slice(&digits);
        }
        rows.push(row);
    }
    Ok(geometry::rank_bytes(ops, &mut rows, c.k * d) == c.n)
}

/// dim over F_q of the span of the coordinates.
pub fn rank_weight(t: &Tower, level: Level, v: &[u32]) -> Result<u32> {
    let ops = t.fq_ops()?;
    let mut rows = digit_rows(t, level, v)?;
    Ok(geometry::rank_bytes(ops, &mut rows, v.len()) as u32)
}

/// Canonical row space of the digit matrix of `v`. Writing v = uA over an
/// F_q-basis u of the coordinate span, this equals rowsp(A) whatever basis
/// is chosen: the digit matrix is E·A with E the full-column-rank digit
/// matrix of u.
pub fn rank_support(t: &Tower, level: Level, v: &[u32]) -> Result<Echelon> {
    let ops = t.fq_ops()?;
    let mut ech = Echelon::new(v.len());
    for row in digit_rows(t, level, v)? {
        ech.insert(row, ops);
    }
    Ok(ech)
}

/// Rank weight tallies of all codewords, zero included.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RankWeightDistribution {
    pub n: u32,
    pub k: u32,
    pub q: u32,
    pub m: u32,
    pub counts: BTreeMap<u32, u64>,
}

impl RankWeightDistribution {
    pub fn total(&self) -> u128 {
        self.counts.values().map(|&v| v as u128).sum()
    }

    /// Least nonzero weight with a codeword, i.e. the minimum distance.
    pub fn min_distance(&self) -> Option<u32> {
        self.counts.iter().find(|&(&w, &c)| w > 0 && c > 0).map(|(&w, _)| w)
    }
}

/// Weight distribution by two unrelated routes that must agree exactly:
/// a scan of one codeword per projective message (scalar multiples carry a
/// factor q^m - 1), and, for nondegenerate plane codes, the hyperplane
/// spectrum of the column span via "weight w ⟷ hyperplane weight n - w".
pub fn weight_distribution(t: &Tower, c: &RankCode, budget: u64) -> Result<RankWeightDistribution> {
    if c.level != Level::Qm {
        return Err(Error::LevelMismatch { expected: Level::Qm, got: c.level });
    }
    let ops = t.fq_ops()?;
    let li = t.li(Level::Qm)?;
    let qm = t.qm() as u64;
    let m = t.m() as usize;
    let (k, n) = (c.k, c.n);
    let reps = projective_count(qm, k as u32);
    charge128(reps.saturating_mul(n as u128), budget)?;
    let reps = reps as u64;

    let scan = (0..reps as usize)
        .into_par_iter()
        .with_min_len(256)
        .fold(
            || (vec![0u32; k], vec![0u32; n], vec![vec![0u8; n]; m], vec![0u8; m], BTreeMap::new()),
            |(mut x, mut cw, mut rows, mut buf, mut map), i| {
                nth_projective(qm, k, i as u64, &mut x);
                encode_into(t, li, &c.gen, &x, &mut cw);
                for (j, &coord) in cw.iter().enumerate() {
                    t.qm_digits_into(coord, &mut buf);
                    for (d, &b) in buf.iter().enumerate() {
                        rows[d][j] = b;
                    }
                }
                let w = geometry::rank_bytes(ops, &mut rows, n) as u32;
                *map.entry(w).or_insert(0u64) += 1;
                (x, cw, rows, buf, map)
            },
        )
        .map(|st| st.4)
        .reduce(BTreeMap::new, merge_counts);

    let mut counts = BTreeMap::new();
    for (w, cnt) in scan {
        let full = cnt
            .checked_mul(qm - 1)
            .ok_or_else(|| Error::params("weight tallies overflow 64 bits"))?;
        counts.insert(w, full);
    }
    counts.insert(0, 1);

    if k == 3 {
        if let Ok(u) = phi(t, c) {
            let spec = geometry::weight_spectrum(t, &u, 2, budget)?;
            let mut geo: BTreeMap<u32, u64> = BTreeMap::new();
            geo.insert(0, 1);
            for (&j, &cnt) in &spec.counts {
                if j as usize >= n {
                    // a hyperplane holding all of U contradicts the full-rank generator
                    return Err(Error::invariant("hyperplane weight reaches the code length"));
                }
                let full = cnt
                    .checked_mul(qm - 1)
                    .ok_or_else(|| Error::params("weight tallies overflow 64 bits"))?;
                *geo.entry(n as u32 - j).or_insert(0) += full;
            }
            if geo != counts {
                return Err(Error::invariant("codeword tallies disagree with the hyperplane spectrum"));
            }
        }
    }

    let expected = (qm as u128).pow(k as u32);
    let total: u128 = counts.values().map(|&v| v as u128).sum();
    if total != expected {
        return Err(Error::invariant("weight tallies do not exhaust the message space"));
    }
    Ok(RankWeightDistribution { n: n as u32, k: k as u32, q: t.q(), m: t.m(), counts })
}

/// Outcome of the minimality scan. `minimal` comes from the pairwise support
/// route over projective representatives; for nondegenerate plane codes the
/// cutting property of the column span is computed independently, recorded
/// in `by_cutting`, and must agree.
#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub minimal: bool,
    pub by_cutting: Option<bool>,
    /// Non-proportional codewords with supp(first) ⊆ supp(second); equal
    /// supports are reported before strict nestings, earliest scan ranks
    /// first.
    pub violating_pair: Option<(Vec<u32>, Vec<u32>)>,
}

struct KernelRec {
    kdim: usize,
    /// Reduced echelon rows of supp(v)⊥, the coefficient kernel
    /// {a : Σ aᵢvᵢ = 0}.
    rows: Vec<Vec<u8>>,
    first: (u64, Vec<u32>),
    second: Option<(u64, Vec<u32>)>,
}

/// Pairwise support containment, organized through coefficient kernels:
/// supp(u) ⊆ supp(v) iff K_v ⊆ K_u where K_w = {a ∈ F_q^n : Σ aᵢwᵢ = 0}.
/// Equal supports show up as one kernel with two representatives; strict
/// nestings are found by enumerating the lower-dimensional subspaces of
/// each kernel and joining on canonical form, so no codeword pair is ever
/// compared directly.
pub fn is_minimal(t: &Tower, c: &RankCode, budget: u64) -> Result<MinimalityReport> {
    if c.level != Level::Qm {
        return Err(Error::LevelMismatch { expected: Level::Qm, got: c.level });
    }
    let ops = t.fq_ops()?;
    let li = t.li(Level::Qm)?;
    let qm = t.qm() as u64;
    let m = t.m() as usize;
    let (k, n) = (c.k, c.n);
    let reps = projective_count(qm, k as u32);
    charge128(reps.saturating_mul(n as u128), budget)?;
    let reps = reps as u64;

    let map = (0..reps as usize)
        .into_par_iter()
        .with_min_len(256)
        .fold(
            || (vec![0u32; k], vec![0u32; n], vec![0u8; m], HashMap::new()),
            |(mut x, mut cw, mut buf, mut map): (_, _, _, HashMap<Vec<u8>, KernelRec>), i| {
                nth_projective(qm, k, i as u64, &mut x);
                encode_into(t, li, &c.gen, &x, &mut cw);
                let mut supp = Echelon::new(n);
                for d in 0..m {
                    let mut row = vec![0u8; n];
                    for (j, &coord) in cw.iter().enumerate() {
                        t.qm_digits_into(coord, &mut buf);
                        row[j] = buf[d];
                    }
                    supp.insert(row, ops);
                }
                let mut kech = Echelon::new(n);
                for r in supp.kernel_basis(ops) {
                    kech.insert(r, ops);
                }
                debug_assert_eq!(kech.rank(), n - supp.rank());
                match map.entry(kech.key()) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        absorb_rep(e.get_mut(), (i as u64, cw.clone()));
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(KernelRec {
                            kdim: kech.rank(),
                            rows: kech.rows,
                            first: (i as u64, cw.clone()),
                            second: None,
                        });
                    }
                }
                (x, cw, buf, map)
            },
        )
        .map(|st| st.3)
        .reduce(HashMap::new, merge_kernel_maps);

    // equal supports: one kernel, two non-proportional representatives
    let mut dup: Option<(u64, u64, Vec<u32>, Vec<u32>)> = None;
    for rec in map.values() {
        if let Some(sec) = &rec.second {
            let better = dup.as_ref().is_none_or(|d| (rec.first.0, sec.0) < (d.0, d.1));
            if better {
                dup = Some((rec.first.0, sec.0, rec.first.1.clone(), sec.1.clone()));
            }
        }
    }

    // strict nestings: smaller kernels sitting inside bigger ones
    let dims: BTreeSet<usize> = map.values().map(|r| r.kdim).collect();
    let mut join_cost = 0u128;
    for rec in map.values() {
        for &dv in dims.iter().take_while(|&&d| d < rec.kdim) {
            join_cost = join_cost.saturating_add(gaussian_binomial(t.q() as u128, rec.kdim as u32, dv as u32));
        }
    }
    charge128(join_cost, budget)?;

    let mut strict: Option<(Vec<u32>, Vec<u32>)> = None;
    if dup.is_none() && dims.len() > 1 {
        let mut recs: Vec<&KernelRec> = map.values().collect();
        recs.sort_by_key(|r| r.first.0);
        let mut rref_cache: HashMap<(usize, usize), Vec<Vec<Vec<u8>>>> = HashMap::new();
        'outer: for rec in &recs {
            for &dv in dims.iter().take_while(|&&d| d < rec.kdim) {
                let mats = rref_cache
                    .entry((rec.kdim, dv))
                    .or_insert_with(|| all_rrefs(ops, dv, rec.kdim));
                for mat in mats.iter() {
                    let mut sub = Echelon::new(n);
                    for mrow in mat {
                        let mut row = vec![0u8; n];
                        for (&coef, krow) in mrow.iter().zip(&rec.rows) {
                            if coef != 0 {
                                for (rj, &kj) in row.iter_mut().zip(krow) {
                                    *rj = ops.add(*rj, ops.mul(coef, kj));
                                }
                            }
                        }
                        sub.insert(row, ops);
                    }
                    debug_assert_eq!(sub.rank(), dv);
                    if let Some(hit) = map.get(&sub.key()) {
                        strict = Some((rec.first.1.clone(), hit.first.1.clone()));
                        break 'outer;
                    }
                }
            }
        }
    }

    let violating_pair = match dup {
        Some((_, _, w1, w2)) => Some((w1, w2)),
        None => strict,
    };
    let minimal = violating_pair.is_none();

    let mut by_cutting = None;
    if k == 3 {
        if let Ok(u) = phi(t, c) {
            by_cutting = Some(geometry::is_cutting(t, &u, 1, budget)?.holds);
        }
    }
    if by_cutting.is_some_and(|bc| bc != minimal) {
        return Err(Error::invariant("minimality routes disagree"));
    }
    Ok(MinimalityReport { minimal, by_cutting, violating_pair })
}

/// Basis of the orthogonal space under the standard dot product, as a
/// generator: G·Hᵀ = 0 and dim = n - k. The dual of a full space comes out
/// with k = 0 (an empty generator), which the other operations accept.
pub fn dual_code(t: &Tower, c: &RankCode) -> Result<RankCode> {
    let li = t.li(c.level)?;
    let mut rref = c.gen.clone();
    let pivots = rref_level(t, li, &mut rref);
    debug_assert_eq!(pivots.len(), c.k);
    let mut gen = Vec::with_capacity(c.n - c.k);
    for j in 0..c.n {
        if pivots.contains(&j) {
            continue;
        }
        let mut w = vec![0u32; c.n];
        w[j] = 1;
        for (row, &p) in rref.iter().zip(&pivots) {
            w[p] = t.raw_neg(li, row[j]);
        }
        gen.push(w);
    }
    #[cfg(debug_assertions)]
    for row in &c.gen {
        for h in &gen {
            let mut acc = 0u32;
            for (&a, &b) in row.iter().zip(h) {
                acc = t.raw_add(li, acc, t.raw_mul(li, a, b));
            }
            assert_eq!(acc, 0, "dual row fails orthogonality");
        }
    }
    Ok(RankCode { level: c.level, k: c.n - c.k, n: c.n, gen })
}

/// Monte Carlo lower bound on the rank covering radius: the maximum over
/// sampled words of their exact distance to the code. Small codes are
/// minimized by full codeword enumeration; otherwise the coset of a sample
/// is probed through its syndrome, whose distance is the least r with the
/// syndrome in a span of r points of the parity-column set. The syndrome
/// route answers exactly up to 2 and reports 3 for anything deeper, which
/// keeps the lower-bound contract either way.
pub fn covering_radius_lower_bound(
    t: &Tower,
    c: &RankCode,
    samples: u32,
    seed: u64,
    budget: u64,
) -> Result<u32> {
    let li = t.li(c.level)?;
    let size = t.level_size(c.level)? as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<Vec<u32>> = (0..samples)
        .map(|_| (0..c.n).map(|_| rng.random_range(0..size as u32)).collect())
        .collect();

    let full = (size as u128).pow(c.k as u32);
    if full <= 1 << 21 {
        charge128(full.saturating_mul(u128::from(samples.max(1))), budget)?;
        return words
            .par_iter()
            .map(|v| exact_distance(t, li, c, v))
            .try_reduce(|| 0, |a, b| Ok(a.max(b)));
    }

    let parity = dual_code(t, c)?;
    if parity.k == 0 {
        // the code is the whole space: distance zero everywhere
        return Ok(0);
    }
    let q = t.q() as u64;
    let dirs = projective_count(q, c.n as u32);
    charge128(dirs, budget)?;
    let mut pts: Vec<Vec<u32>> = Vec::new();
    let mut seen = HashSet::new();
    let mut a = vec![0u32; c.n];
    for i in 0..dirs as u64 {
        nth_projective(q, c.n, i, &mut a);
        // F_q scalars keep their indices at every level, so `a` multiplies in
        let s = syndrome(t, li, &parity, &a);
        if let Some(cs) = canonical_projective(t, li, &s) {
            if seen.insert(cs.clone()) {
                pts.push(cs);
            }
        }
    }
    pts.sort_unstable();
    let pair_work = (pts.len() as u128).pow(2).saturating_mul(u128::from(samples.max(1))) / 2;
    charge128(pair_work, budget)?;
    Ok(words
        .par_iter()
        .map(|v| {
            let s = syndrome(t, li, &parity, v);
            bounded_syndrome_distance(t, li, &pts, &s)
        })
        .reduce(|| 0, |a, b| a.max(b)))
}

fn exact_distance(t: &Tower, li: i32, c: &RankCode, v: &[u32]) -> Result<u32> {
    let ops = t.fq_ops()?;
    let size = t.level_size(c.level)? as u64;
    let total = size.pow(c.k as u32);
    let d = fq_digit_count(t, c.level)?;
    let mut x = vec![0u32; c.k];
    let mut cw = vec![0u32; c.n];
    let mut rows = vec![vec![0u8; c.n]; d];
    let mut digits = Vec::new();
    let mut best = u32::MAX;
    for idx in 0..total {
        let mut val = idx;
        for xe in x.iter_mut() {
            *xe = (val % size) as u32;
            val /= size;
        }
        encode_into(t, li, &c.gen, &x, &mut cw);
        for (j, (&vj, &cj)) in v.iter().zip(&cw).enumerate() {
            fq_digits(t, c.level, t.raw_sub(li, vj, cj), &mut digits)?;
            for (row, &b) in rows.iter_mut().zip(&digits) {
                row[j] = b;
            }
        }
        best = best.min(geometry::rank_bytes(ops, &mut rows, c.n) as u32);
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

fn syndrome(t: &Tower, li: i32, parity: &RankCode, v: &[u32]) -> Vec<u32> {
    parity
        .gen
        .iter()
        .map(|row| {
            let mut acc = 0u32;
            for (&h, &vj) in row.iter().zip(v) {
                if h != 0 && vj != 0 {
                    acc = t.raw_add(li, acc, t.raw_mul(li, h, vj));
                }
            }
            acc
        })
        .collect()
}

fn canonical_projective(t: &Tower, li: i32, v: &[u32]) -> Option<Vec<u32>> {
    let f = v.iter().position(|&c| c != 0)?;
    let inv = t.raw_inv(li, v[f]).expect("leading coordinate is nonzero");
    Some(v.iter().map(|&c| t.raw_mul(li, inv, c)).collect())
}

/// Distance of the coset with syndrome `s` capped at 3: 0, 1 and 2 are
/// exact, 3 means "no span of two parity-column points reaches s".
fn bounded_syndrome_distance(t: &Tower, li: i32, pts: &[Vec<u32>], s: &[u32]) -> u32 {
    let Some(cs) = canonical_projective(t, li, s) else {
        return 0;
    };
    if pts.binary_search(&cs).is_ok() {
        return 1;
    }
    for (i, p1) in pts.iter().enumerate() {
        for p2 in pts.iter().skip(i + 1) {
            if in_span_of_two(t, li, p1, p2, &cs) {
                return 2;
            }
        }
    }
    3
}

fn in_span_of_two(t: &Tower, li: i32, p1: &[u32], p2: &[u32], s: &[u32]) -> bool {
    let mut w = s.to_vec();
    let l1 = p1.iter().position(|&c| c != 0).expect("canonical point");
    if w[l1] != 0 {
        let f = w[l1]; // p1 leads with 1
        for (wj, &pj) in w.iter_mut().zip(p1) {
            *wj = t.raw_sub(li, *wj, t.raw_mul(li, f, pj));
        }
    }
    let mut r2 = p2.to_vec();
    if r2[l1] != 0 {
        let f = r2[l1];
        for (rj, &pj) in r2.iter_mut().zip(p1) {
            *rj = t.raw_sub(li, *rj, t.raw_mul(li, f, pj));
        }
    }
    let Some(l2) = r2.iter().position(|&c| c != 0) else {
        // distinct canonical points are never proportional
        return w.iter().all(|&c| c == 0);
    };
    if w[l2] != 0 {
        let f = t.raw_mul(li, w[l2], t.raw_inv(li, r2[l2]).expect("pivot"));
        for (wj, &rj) in w.iter_mut().zip(&r2) {
            *wj = t.raw_sub(li, *wj, t.raw_mul(li, f, rj));
        }
    }
    w.iter().all(|&c| c == 0)
}

// ---- shared plumbing ----

fn encode_into(t: &Tower, li: i32, gen: &[Vec<u32>], x: &[u32], out: &mut [u32]) {
    out.fill(0);
    for (&xr, row) in x.iter().zip(gen) {
        if xr == 0 {
            continue;
        }
        for (o, &g) in out.iter_mut().zip(row) {
            if g != 0 {
                *o = t.raw_add(li, *o, t.raw_mul(li, xr, g));
            }
        }
    }
}

/// In-place reduced row echelon form over a level; returns the pivot
/// columns and truncates zero rows.
fn rref_level(t: &Tower, li: i32, rows: &mut Vec<Vec<u32>>) -> Vec<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pi) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, pi);
        let inv = t.raw_inv(li, rows[rank][col]).expect("pivot is nonzero");
        for j in col..cols {
            rows[rank][j] = t.raw_mul(li, rows[rank][j], inv);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for j in col..cols {
                    let v = t.raw_sub(li, rows[r][j], t.raw_mul(li, f, rows[rank][j]));
                    rows[r][j] = v;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    pivots
}

fn fq_digit_count(t: &Tower, level: Level) -> Result<usize> {
    match level {
        Level::Qm => Ok(t.m() as usize),
        Level::Q2m => {
            t.level_size(Level::Q2m)?;
            Ok(2 * t.m() as usize)
        }
        other => Err(Error::LevelMismatch { expected: Level::Qm, got: other }),
    }
}

/// Little-endian F_q digits of one element: m at the middle level, 2m over
/// the quadratic extension (expanded half by half).
fn fq_digits(t: &Tower, level: Level, x: u32, out: &mut Vec<u8>) -> Result<()> {
    let m = t.m() as usize;
    match level {
        Level::Qm => {
            out.resize(m, 0);
            t.qm_digits_into(x, out);
        }
        Level::Q2m => {
            out.resize(2 * m, 0);
            let halves = t.coeffs(t.elem(Level::Q2m, x)?)?;
            for (h, &half) in halves.iter().enumerate() {
                t.qm_digits_into(half, &mut out[h * m..(h + 1) * m]);
            }
        }
        other => return Err(Error::LevelMismatch { expected: Level::Qm, got: other }),
    }
    Ok(())
}

/// F_q digit matrix of a word: one row per digit position, one column per
/// coordinate. Its rank is the rank weight, its row space the rank support.
fn digit_rows(t: &Tower, level: Level, v: &[u32]) -> Result<Vec<Vec<u8>>> {
    let d = fq_digit_count(t, level)?;
    let mut rows = vec![vec![0u8; v.len()]; d];
    let mut digits = Vec::new();
    for (j, &coord) in v.iter().enumerate() {
        fq_digits(t, level, coord, &mut digits)?;
        for (row, &b) in rows.iter_mut().zip(&digits) {
            row[j] = b;
        }
    }
    Ok(rows)
}

/// (base^len - 1)/(base - 1): the number of projective representatives.
fn projective_count(base: u64, len: u32) -> u128 {
    let mut total = 0u128;
    let mut block = 1u128;
    for _ in 0..len {
        total += block;
        block = block.saturating_mul(base as u128);
    }
    total
}

/// The i-th canonical representative (leftmost nonzero coordinate 1),
/// ordered like plane points: last-coordinate block first, leading 1 moving
/// left, later coordinates varying fastest.
fn nth_projective(base: u64, len: usize, i: u64, out: &mut [u32]) {
    out.fill(0);
    let mut f = len - 1;
    let mut block = 1u64;
    let mut off = 0u64;
    while i >= off.saturating_add(block) {
        off += block;
        block = block.saturating_mul(base);
        f -= 1;
    }
    out[f] = 1;
    let mut val = i - off;
    for pos in (f + 1..len).rev() {
        out[pos] = (val % base) as u32;
        val /= base;
    }
    debug_assert_eq!(val, 0);
}

fn charge128(required: u128, budget: u64) -> Result<()> {
    charge(u64::try_from(required).unwrap_or(u64::MAX), budget)
}

fn merge_counts(mut a: BTreeMap<u32, u64>, b: BTreeMap<u32, u64>) -> BTreeMap<u32, u64> {
    for (w, c) in b {
        *a.entry(w).or_insert(0) += c;
    }
    a
}

fn absorb_rep(rec: &mut KernelRec, cand: (u64, Vec<u32>)) {
    if cand.0 < rec.first.0 {
        let old = std::mem::replace(&mut rec.first, cand);
        absorb_second(rec, old);
    } else if cand.0 != rec.first.0 {
        absorb_second(rec, cand);
    }
}

fn absorb_second(rec: &mut KernelRec, cand: (u64, Vec<u32>)) {
    if rec.second.as_ref().is_none_or(|s| cand.0 < s.0) {
        rec.second = Some(cand);
    }
}

fn merge_kernel_maps(
    mut a: HashMap<Vec<u8>, KernelRec>,
    b: HashMap<Vec<u8>, KernelRec>,
) -> HashMap<Vec<u8>, KernelRec> {
    for (key, rec) in b {
        match a.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                let into = e.get_mut();
                absorb_rep(into, rec.first);
                if let Some(s) = rec.second {
                    absorb_rep(into, s);
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(rec);
            }
        }
    }
    a
}

/// Every reduced echelon dv×du coefficient matrix over F_q: one
/// representative per dv-dimensional subspace of F_q^du.
fn all_rrefs(ops: &FqOps, dv: usize, du: usize) -> Vec<Vec<Vec<u8>>> {
    let q = ops.q;
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..dv).collect();
    loop {
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for j in p + 1..du {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let mut vals = vec![0u8; free.len()];
        loop {
            let mut mat = vec![vec![0u8; du]; dv];
            for (i, &p) in pivots.iter().enumerate() {
                mat[i][p] = 1;
            }
            for (&(i, j), &v) in free.iter().zip(&vals) {
                mat[i][j] = v;
            }
            out.push(mat);
            let mut pos = 0;
            while pos < vals.len() {
                vals[pos] += 1;
                if u16::from(vals[pos]) < q {
                    break;
                }
                vals[pos] = 0;
                pos += 1;
            }
            if pos == vals.len() {
                break;
            }
        }
        // next pivot combination: rightmost slot that can still move right
        let Some(i) = (0..dv).rev().find(|&i| pivots[i] < du - dv + i) else {
            return out;
        };
        pivots[i] += 1;
        for l in i + 1..dv {
            pivots[l] = pivots[l - 1] + 1;
        }
    }
}

/// Number of b-dimensional subspaces of F_q^a; saturating above u128, which
/// only matters past any enumerable budget.
fn gaussian_binomial(q: u128, a: u32, b: u32) -> u128 {
    let mut c = 1u128;
    for i in 0..b {
        let num = q.checked_pow(a - i).map_or(u128::MAX, |v| v - 1);
        let den = q.pow(i + 1) - 1;
        c = c.saturating_mul(num) / den;
    }
    c
}
