//! Vector matroids with an exact rank oracle: Tutte polynomial, duality,
//! minors, flats, parallelisms and discrete lengths, widths and volumes.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::check::{all_passed, Check};
use crate::exactla::{integer_column_rank, integer_scaled, ExactMatrix};

/// Subset of a ground set, one bit per element position.
pub type Mask = u64;

/// Largest ground set for which the full rank table is materialized.
pub const MAX_GROUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("ground set of size {0} exceeds the supported maximum of {MAX_GROUND}")]
    TooLarge(usize),
    #[error("minor by {0:#b} requires a nonempty proper subset of the ground set")]
    Domain(Mask),
}

pub fn mask_of(elements: &[usize]) -> Mask {
    elements.iter().fold(0, |m, &e| m | (1 << e))
}

pub fn elements_of(mask: Mask) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

/// All increasing `r`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            return out;
        };
        cur[i] += 1;
        for t in i + 1..r {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

fn full_mask(n: usize) -> Mask {
    if n == 64 {
        !0
    } else {
        (1 << n) - 1
    }
}

/// Spreads the bits of `local` onto the parent positions listed in `positions`.
fn expand(local: Mask, positions: &[usize]) -> Mask {
    let mut out = 0;
    let mut rest = local;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        out |= 1 << positions[i];
        rest &= rest - 1;
    }
    out
}

/// A matroid on positions `0..len()`, each carrying the label of the
/// original element it came from.
#[derive(Clone, Debug)]
pub struct Matroid {
    labels: Vec<usize>,
    ranks: Arc<[u8]>,
}

impl PartialEq for Matroid {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.ranks == other.ranks
    }
}

impl Matroid {
    /// The matroid of the columns of `m`; element `j` is column `j`.
    pub fn from_columns(m: &ExactMatrix) -> Result<Matroid, MatroidError> {
        let n = m.cols();
        if n > MAX_GROUND {
            return Err(MatroidError::TooLarge(n));
        }
        let dim = m.rows();
        let cols: Vec<_> = (0..n).map(|j| integer_scaled(&m.column(j)).0).collect();
        let mut ranks = vec![0u8; 1 << n];
        for mask in 1..(1u64 << n) {
            let top = 63 - mask.leading_zeros() as usize;
            let rest = mask & !(1 << top);
            let r_rest = ranks[rest as usize] as usize;
            ranks[mask as usize] = if r_rest == dim {
                dim as u8
            } else if cols[top].iter().all(num_traits::Zero::is_zero) {
                r_rest as u8
            } else {
                let sel: Vec<&[_]> = elements_of(mask).iter().map(|&j| cols[j].as_slice()).collect();
                integer_column_rank(&sel, dim) as u8
            };
        }
        Ok(Matroid { labels: (0..n).collect(), ranks: ranks.into() })
    }

    /// Builds a matroid from an arbitrary rank function on position masks.
    pub fn from_rank_fn(labels: Vec<usize>, rank: impl Fn(Mask) -> usize) -> Result<Matroid, MatroidError> {
        let n = labels.len();
        if n > MAX_GROUND {
            return Err(MatroidError::TooLarge(n));
        }
        let ranks: Vec<u8> = (0..(1u64 << n)).map(|m| rank(m) as u8).collect();
        Ok(Matroid { labels, ranks: ranks.into() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn ground(&self) -> Mask {
        full_mask(self.len())
    }

    pub fn rank_of(&self, mask: Mask) -> usize {
        self.ranks[mask as usize] as usize
    }

    pub fn rank(&self) -> usize {
        self.rank_of(self.ground())
    }

    pub fn corank(&self, mask: Mask) -> usize {
        self.rank() - self.rank_of(mask)
    }

    pub fn nullity(&self, mask: Mask) -> usize {
        mask.count_ones() as usize - self.rank_of(mask)
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.rank_of(1 << e) == 0
    }

    pub fn is_isthmus(&self, e: usize) -> bool {
        self.rank_of(self.ground() & !(1 << e)) < self.rank()
    }

    pub fn is_basis(&self, mask: Mask) -> bool {
        mask.count_ones() as usize == self.rank() && self.rank_of(mask) == self.rank()
    }

    pub fn closure(&self, mask: Mask) -> Mask {
        let r = self.rank_of(mask);
        (0..self.len()).filter(|&e| self.rank_of(mask | 1 << e) == r).fold(mask, |m, e| m | 1 << e)
    }

    pub fn is_flat(&self, mask: Mask) -> bool {
        self.closure(mask) == mask
    }

    /// Position of an element label, if present.
    pub fn position(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Converts a position mask into the list of labels.
    pub fn labels_of(&self, mask: Mask) -> Vec<usize> {
        elements_of(mask).into_iter().map(|i| self.labels[i]).collect()
    }

    /// The dual matroid: `r'(X) = |X| + r(J - X) - r(J)`.
    pub fn dual(&self) -> Matroid {
        let g = self.ground();
        let r = self.rank();
        let ranks: Vec<u8> = (0..=g)
            .map(|x| (x.count_ones() as usize + self.rank_of(g & !x) - r) as u8)
            .collect();
        Matroid { labels: self.labels.clone(), ranks: ranks.into() }
    }

    /// General minor `(M / contract) | keep`; `keep` and `contract` must be
    /// disjoint.
    pub(crate) fn minor(&self, keep: Mask, contract: Mask) -> Matroid {
        let positions = elements_of(keep);
        let rc = self.rank_of(contract);
        let n = positions.len();
        let ranks: Vec<u8> = (0..(1u64 << n))
            .map(|local| (self.rank_of(expand(local, &positions) | contract) - rc) as u8)
            .collect();
        let labels = positions.iter().map(|&p| self.labels[p]).collect();
        Matroid { labels, ranks: ranks.into() }
    }

    fn check_proper(&self, x: Mask) -> Result<(), MatroidError> {
        if x == 0 || x & self.ground() == self.ground() || x & !self.ground() != 0 {
            return Err(MatroidError::Domain(x));
        }
        Ok(())
    }

    /// Contraction `M / x` on the ground set `J - x`.
    pub fn contract(&self, x: Mask) -> Result<Matroid, MatroidError> {
        self.check_proper(x)?;
        Ok(self.minor(self.ground() & !x, x))
    }

    /// Deletion `M - x` on the ground set `J - x`.
    pub fn delete(&self, x: Mask) -> Result<Matroid, MatroidError> {
        self.check_proper(x)?;
        Ok(self.minor(self.ground() & !x, 0))
    }

    /// Restriction to `keep`; any subset is allowed.
    pub fn restrict(&self, keep: Mask) -> Matroid {
        self.minor(keep & self.ground(), 0)
    }

    pub fn tutte(&self) -> TuttePolynomial {
        TutteCache::new(self).minor(self.ground(), 0)
    }

    /// All flats with at least one element, with their discrete length,
    /// width and volume. The length of the whole ground set is taken as 0.
    pub fn flats(&self) -> Vec<FlatRecord> {
        let mut cache = TutteCache::new(self);
        self.flats_with(&mut cache)
    }

    fn flats_with(&self, cache: &mut TutteCache<'_>) -> Vec<FlatRecord> {
        let g = self.ground();
        (1..=g)
            .filter(|&x| self.is_flat(x))
            .map(|x| {
                let length = if x == g { 0 } else { cache.b10(g & !x, x) };
                let width = cache.b10(x, 0);
                FlatRecord { flat: x, length, width, volume: length * width }
            })
            .collect()
    }

    /// All parallelisms `(X, a, b)`: `X` a flat, `a, b` outside `X`,
    /// `rank{a,b} = 2` and `rank(X + a + b) = rank(X) + 1`.
    pub fn parallelisms(&self) -> Vec<ParallelismRecord> {
        let mut cache = TutteCache::new(self);
        let flats = self.flats_with(&mut cache);
        let mut out = Vec::new();
        for f in &flats {
            let rx = self.rank_of(f.flat);
            for a in 0..self.len() {
                for b in 0..self.len() {
                    if a == b || f.flat >> a & 1 == 1 || f.flat >> b & 1 == 1 {
                        continue;
                    }
                    let ab = 1 << a | 1 << b;
                    if self.rank_of(ab) != 2 || self.rank_of(f.flat | ab) != rx + 1 {
                        continue;
                    }
                    let width = cache.b10(f.flat | ab, 0);
                    out.push(ParallelismRecord { flat: f.flat, a, b, width, volume: f.length * width });
                }
            }
        }
        out
    }

    /// Discrete length of a flat, `b10` of the contraction (0 for the whole
    /// ground set).
    pub fn length(&self, flat: Mask) -> u64 {
        if flat == self.ground() {
            0
        } else {
            TutteCache::new(self).b10(self.ground() & !flat, flat)
        }
    }

    pub fn width(&self, flat: Mask) -> u64 {
        TutteCache::new(self).b10(flat, 0)
    }

    /// `b10` of the matroid itself (the beta invariant).
    pub fn beta(&self) -> u64 {
        self.tutte().coeff(1, 0)
    }
}

/// Memoized deletion-contraction over the minors of one matroid.
///
/// A minor is identified by its ground set and the closure of its
/// contracted set, since `r(S + C) - r(C)` only depends on `cl(C)`.
pub struct TutteCache<'a> {
    m: &'a Matroid,
    memo: HashMap<(Mask, Mask), TuttePolynomial>,
}

impl<'a> TutteCache<'a> {
    pub fn new(m: &'a Matroid) -> Self {
        TutteCache { m, memo: HashMap::new() }
    }

    /// Tutte polynomial of `(M / contract) | ground`.
    pub fn minor(&mut self, ground: Mask, contract: Mask) -> TuttePolynomial {
        if ground == 0 {
            return TuttePolynomial::one();
        }
        let key = (ground, self.m.closure(contract));
        if let Some(t) = self.memo.get(&key) {
            return t.clone();
        }
        let m = self.m;
        let j = 63 - ground.leading_zeros() as usize;
        let bit = 1 << j;
        let rest = ground & !bit;
        let rc = m.rank_of(contract);
        let is_loop = m.rank_of(contract | bit) == rc;
        let is_isthmus = m.rank_of(rest | contract) < m.rank_of(ground | contract);
        let t = if is_loop {
            self.minor(rest, contract).times_y()
        } else if is_isthmus {
            self.minor(rest, contract | bit).times_x()
        } else {
            let mut d = self.minor(rest, contract);
            d.add_assign(&self.minor(rest, contract | bit));
            d
        };
        self.memo.insert(key, t.clone());
        t
    }

    pub fn b10(&mut self, ground: Mask, contract: Mask) -> u64 {
        self.minor(ground, contract).coeff(1, 0)
    }
}

/// Tutte polynomial as a sparse map `(i, j) -> b^{ij}`, the coefficient of
/// `x^i y^j`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TuttePolynomial {
    coeffs: BTreeMap<(usize, usize), u64>,
}

impl TuttePolynomial {
    pub fn one() -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((0, 0), 1);
        TuttePolynomial { coeffs }
    }

    pub fn from_coeffs(it: impl IntoIterator<Item = ((usize, usize), u64)>) -> Self {
        TuttePolynomial { coeffs: it.into_iter().filter(|&(_, c)| c != 0).collect() }
    }

    pub fn coeff(&self, i: usize, j: usize) -> u64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    fn times_x(mut self) -> Self {
        self.coeffs = self.coeffs.into_iter().map(|((i, j), c)| ((i + 1, j), c)).collect();
        self
    }

    fn times_y(mut self) -> Self {
        self.coeffs = self.coeffs.into_iter().map(|((i, j), c)| ((i, j + 1), c)).collect();
        self
    }

    fn add_assign(&mut self, other: &TuttePolynomial) {
        for (&k, &v) in &other.coeffs {
            *self.coeffs.entry(k).or_insert(0) += v;
        }
    }

    /// `T(y, x)`.
    pub fn swapped(&self) -> Self {
        TuttePolynomial { coeffs: self.coeffs.iter().map(|(&(i, j), &c)| ((j, i), c)).collect() }
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.coeffs.iter().map(|(&(i, j), &c)| c as f64 * x.powi(i as i32) * y.powi(j as i32)).sum()
    }
}

impl Serialize for TuttePolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            i: usize,
            j: usize,
            coeff: u64,
        }
        let terms: Vec<Term> = self.coeffs.iter().map(|(&(i, j), &coeff)| Term { i, j, coeff }).collect();
        terms.serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatRecord {
    pub flat: Mask,
    pub length: u64,
    pub width: u64,
    pub volume: u64,
}

impl FlatRecord {
    pub fn is_spacious(&self) -> bool {
        self.volume != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParallelismRecord {
    pub flat: Mask,
    pub a: usize,
    pub b: usize,
    pub width: u64,
    pub volume: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub checks: Vec<Check>,
}

impl DualityReport {
    pub fn all_passed(&self) -> bool {
        all_passed(&self.checks)
    }
}

/// Runs the duality identities between `m` and its dual.
pub fn verify_duality_suite(m: &Matroid) -> DualityReport {
    let d = m.dual();
    let g = m.ground();
    let n = m.len();
    let t = m.tutte();
    let td = d.tutte();
    let mut checks = Vec::new();

    let mut c = Check::new("tutte_swap");
    c.record(t == td.swapped(), || format!("T(M) = {t:?}, T(M') = {td:?}"));
    checks.push(c);

    let mut c = Check::new("b10_equals_b01");
    if n >= 2 {
        c.record(t.coeff(1, 0) == t.coeff(0, 1), || format!("b10 = {}, b01 = {}", t.coeff(1, 0), t.coeff(0, 1)));
    }
    if n >= 1 {
        c.record(t.coeff(0, 0) == 0, || format!("b00 = {}", t.coeff(0, 0)));
    }
    checks.push(c);

    let mut c = Check::new("corank_nullity_complement");
    for x in 0..=g {
        c.record(m.corank(x) == d.nullity(g & !x), || format!("X = {:?}", m.labels_of(x)));
    }
    checks.push(c);

    let mut c = Check::new("contraction_deletion_dual");
    for x in 1..g {
        let (Ok(con), Ok(del)) = (m.contract(x), d.delete(x)) else { continue };
        c.record(con == del.dual(), || format!("M/X and M'-X not dual for X = {:?}", m.labels_of(x)));
    }
    checks.push(c);

    let mut mc = TutteCache::new(m);
    let mut dc = TutteCache::new(&d);
    let flats = m.flats_with(&mut mc);

    let mut c = Check::new("flat_volume_duality");
    for f in flats.iter().filter(|f| f.is_spacious()) {
        let size = f.flat.count_ones() as usize;
        if size <= 1 || size + 1 >= n {
            continue;
        }
        let xc = g & !f.flat;
        let ok = d.is_flat(xc) && {
            let l_dual = dc.b10(g & !xc, xc);
            let w_dual = dc.b10(xc, 0);
            f.length == w_dual && f.width == l_dual && f.volume == l_dual * w_dual
        };
        c.record(ok, || format!("flat {:?}", m.labels_of(f.flat)));
    }
    checks.push(c);

    let mut c = Check::new("parallelism_volume_duality");
    let lengths: HashMap<Mask, u64> = flats.iter().map(|f| (f.flat, f.length)).collect();
    for a in 0..n {
        for b in 0..n {
            let ab = 1u64 << a | 1u64 << b;
            if a == b || m.corank(g & !ab) != 0 {
                continue;
            }
            for f in &flats {
                let x = f.flat;
                let rx = m.rank_of(x);
                if x & ab != 0 || m.rank_of(ab) != 2 || m.rank_of(x | ab) != rx + 1 {
                    continue;
                }
                if x.count_ones() as usize + 2 >= n {
                    continue;
                }
                let w = mc.b10(x | ab, 0);
                let vol = lengths[&x] * w;
                if vol == 0 {
                    continue;
                }
                let xd = g & !(x | ab);
                let rd = d.rank_of(xd);
                let is_par = d.is_flat(xd) && d.rank_of(ab) == 2 && d.rank_of(xd | ab) == rd + 1;
                let ok = is_par && {
                    let l_dual = dc.b10(g & !xd, xd);
                    let w_dual = dc.b10(xd | ab, 0);
                    lengths[&x] == w_dual && w == l_dual && vol == l_dual * w_dual
                };
                c.record(ok, || format!("parallelism ({:?}, {}, {})", m.labels_of(x), m.labels[a], m.labels[b]));
            }
        }
    }
    checks.push(c);

    let mut c = Check::new("singleton_length_sum");
    let beta = t.coeff(1, 0);
    for f in flats.iter().filter(|f| f.flat.count_ones() == 1) {
        let x = f.flat;
        let e = x.trailing_zeros() as usize;
        if m.is_loop(e) || m.is_isthmus(e) {
            continue;
        }
        let ok = if d.is_flat(x) {
            let l_dual = if x == g { 0 } else { dc.b10(g & !x, x) };
            f.length + l_dual == beta
        } else {
            f.length == beta
        };
        c.record(ok, || format!("singleton flat {:?}", m.labels_of(x)));
    }
    checks.push(c);

    DualityReport { checks }
}
