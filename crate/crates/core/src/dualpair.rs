//! Admissible pairs given by a coordinate matrix `B`, their duals `C`, and
//! the exact identities linking the two sides.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::check::Check;
use crate::exactla::{format_rational, proportional, rat, ExactMatrix, LinAlgError, Rational};
use crate::matroid::{combinations, elements_of, Mask, Matroid, MatroidError, ParallelismRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Primal,
    Dual,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Primal => "primal",
            Side::Dual => "dual",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primal" => Ok(Side::Primal),
            "dual" => Ok(Side::Dual),
            other => Err(format!("unknown side {other:?}, expected primal or dual")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PairError {
    #[error("invalid dimensions: {0}")]
    Shape(String),
    #[error("not a pair: B has rank {rank}, expected {expected}")]
    NotAPair { rank: usize, expected: usize },
    #[error("inadmissible: column {column} of the {side} matrix is zero")]
    ZeroColumn { side: Side, column: usize },
    #[error("inadmissible: columns {a} and {b} of the {side} matrix are proportional")]
    Proportional { side: Side, a: usize, b: usize },
    #[error("vertex {0:?} lies at infinity")]
    VertexAtInfinity(Vec<usize>),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate parallelism: {0}")]
    DegenerateParallelism(String),
    #[error("{0:?} is not a flat")]
    NotAFlat(Vec<usize>),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// A validated pair: `B` with `k + 1` rows and `N + 1` columns, together
/// with its deterministic square completion.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissiblePair {
    k: usize,
    n: usize,
    b: ExactMatrix,
    completion: ExactMatrix,
}

fn check_columns(m: &ExactMatrix, side: Side) -> Result<(), PairError> {
    let cols: Vec<Vec<Rational>> = (0..m.cols()).map(|j| m.column(j)).collect();
    if let Some(column) = cols.iter().position(|c| c.iter().all(Zero::is_zero)) {
        return Err(PairError::ZeroColumn { side, column });
    }
    for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            if proportional(&cols[a], &cols[b]) {
                return Err(PairError::Proportional { side, a, b });
            }
        }
    }
    Ok(())
}

/// Last `rows` rows of the inverse transpose of `completion`.
fn dual_coordinates(completion: &ExactMatrix, rows: usize) -> Result<ExactMatrix, LinAlgError> {
    let inv = completion.transpose().inverse()?;
    let size = inv.rows();
    let idx: Vec<usize> = (size - rows..size).collect();
    let cols: Vec<usize> = (0..size).collect();
    Ok(inv.select(&idx, &cols))
}

impl AdmissiblePair {
    pub fn new(b: ExactMatrix, k: usize) -> Result<AdmissiblePair, PairError> {
        if b.rows() != k + 1 {
            return Err(PairError::Shape(format!("B has {} rows, expected k + 1 = {}", b.rows(), k + 1)));
        }
        if b.cols() < 4 {
            return Err(PairError::Shape(format!("B has {} columns, need N + 1 >= 4", b.cols())));
        }
        let big_n = b.cols() - 1;
        if k < 1 || k + 2 > big_n {
            return Err(PairError::Shape(format!("need 1 <= k <= N - 2, got k = {k}, N = {big_n}")));
        }
        let n = big_n - k - 1;
        let rank = b.rank();
        if rank != k + 1 {
            return Err(PairError::NotAPair { rank, expected: k + 1 });
        }
        check_columns(&b, Side::Primal)?;
        let completion = b.complete_to_square()?;
        let c = dual_coordinates(&completion, n + 1)?;
        check_columns(&c, Side::Dual)?;
        Ok(AdmissiblePair { k, n, b, completion })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number `N` of affine hyperplanes; the chart hyperplane has index `N`.
    pub fn num_hyperplanes(&self) -> usize {
        self.b.cols() - 1
    }

    pub fn b(&self) -> &ExactMatrix {
        &self.b
    }

    pub fn completion(&self) -> &ExactMatrix {
        &self.completion
    }

    pub fn dualize(&self) -> DualPair {
        let c = dual_coordinates(&self.completion, self.n + 1).expect("completion is invertible");
        let det_b = self.completion.determinant().expect("completion is square");
        DualPair { primal: self.clone(), c, det_b }
    }
}

/// An admissible pair together with its dual coordinate matrix `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair {
    primal: AdmissiblePair,
    c: ExactMatrix,
    det_b: Rational,
}

/// Parity of `(s(s+1)/2 + sum of one-based indices)` for a sorted subset
/// of size `s`; true means the sign is negative.
fn complement_sign_negative(subset: &[usize]) -> bool {
    let s = subset.len();
    let sigma = s * (s + 1) / 2 + subset.iter().map(|&l| l + 1).sum::<usize>();
    sigma % 2 == 1
}

fn complement(subset: &[usize], size: usize) -> Vec<usize> {
    (0..size).filter(|i| !subset.contains(i)).collect()
}

impl DualPair {
    pub fn from_matrix(b: ExactMatrix, k: usize) -> Result<DualPair, PairError> {
        Ok(AdmissiblePair::new(b, k)?.dualize())
    }

    pub fn primal(&self) -> &AdmissiblePair {
        &self.primal
    }

    pub fn c(&self) -> &ExactMatrix {
        &self.c
    }

    pub fn det_b(&self) -> &Rational {
        &self.det_b
    }

    pub fn num_hyperplanes(&self) -> usize {
        self.primal.num_hyperplanes()
    }

    /// Index of the chart hyperplane, `N` in 0-based numbering.
    pub fn infinity(&self) -> usize {
        self.num_hyperplanes()
    }

    /// Dimension of the affine space on the given side (`k` or `n`).
    pub fn dim(&self, side: Side) -> usize {
        match side {
            Side::Primal => self.primal.k,
            Side::Dual => self.primal.n,
        }
    }

    pub fn coords(&self, side: Side) -> &ExactMatrix {
        match side {
            Side::Primal => &self.primal.b,
            Side::Dual => &self.c,
        }
    }

    pub fn matroid(&self, side: Side) -> Result<Matroid, MatroidError> {
        Matroid::from_columns(self.coords(side))
    }

    /// Value of `f^j` at the vertex cut out by the hyperplanes in `vertex`.
    pub fn vertex_value(&self, side: Side, vertex: &[usize], j: usize) -> Result<Rational, PairError> {
        let dim = self.dim(side);
        let inf = self.infinity();
        if vertex.len() != dim || vertex.windows(2).any(|w| w[0] >= w[1]) || vertex.iter().any(|&v| v >= inf) {
            return Err(PairError::Precondition(format!(
                "vertex {vertex:?} must be {dim} increasing indices below {inf}"
            )));
        }
        if j >= inf || vertex.contains(&j) {
            return Err(PairError::Precondition(format!("index {j} must be an affine hyperplane off the vertex")));
        }
        let m = self.coords(side);
        let mut denom_cols = vertex.to_vec();
        denom_cols.push(inf);
        let denom = m.maximal_minor(&denom_cols)?;
        if denom.is_zero() {
            return Err(PairError::VertexAtInfinity(vertex.to_vec()));
        }
        let before = vertex.iter().filter(|&&v| v < j).count();
        let mut num_cols = vertex.to_vec();
        num_cols.insert(before, j);
        let value = m.maximal_minor(&num_cols)? / denom;
        Ok(if (dim + before) % 2 == 1 { -value } else { value })
    }

    /// Checks `B[L] = (-1)^sigma det(completion) C[L^]` for every
    /// `(k+1)`-subset `L`.
    pub fn check_minor_identity(&self) -> Check {
        let size = self.num_hyperplanes() + 1;
        let mut check = Check::new("complementary_minors");
        for l in combinations(size, self.primal.k + 1) {
            let lc = complement(&l, size);
            let lhs = self.primal.b.maximal_minor(&l).expect("valid columns");
            let mut rhs = &self.det_b * self.c.maximal_minor(&lc).expect("valid columns");
            if complement_sign_negative(&l) {
                rhs = -rhs;
            }
            check.record(lhs == rhs, || {
                format!("L = {l:?}: B[L] = {}, signed C[L^] = {}", format_rational(&lhs), format_rational(&rhs))
            });
        }
        check
    }

    /// The annihilator of `C` has the same row space as `B`, and `B C^T = 0`.
    pub fn check_involution(&self) -> Check {
        let mut check = Check::new("annihilator_involution");
        let product = self.primal.b.mul(&self.c.transpose()).expect("shapes agree");
        check.record(product.is_zero(), || "B C^T is nonzero".into());
        let back = self.c.nullspace_basis();
        check.record(back.rref().0 == self.primal.b.rref().0, || "annihilator of C differs from span of B".into());
        check.record(self.c.rank() == self.primal.n + 1, || format!("rank C = {}", self.c.rank()));
        check
    }

    /// The matroid of the columns of `C` is the dual of that of `B`.
    pub fn check_matroid_duality(&self) -> Result<Check, MatroidError> {
        let mut check = Check::new("dual_matroids");
        let m = self.matroid(Side::Primal)?;
        let md = self.matroid(Side::Dual)?;
        check.record(m.dual() == md, || "rank functions differ".into());
        Ok(check)
    }

    /// Lexicographically first vertex of `side` lying on the edge of `flat`
    /// and off the chart hyperplane.
    pub fn vertex_on_edge(&self, side: Side, flat: &[usize]) -> Option<Vec<usize>> {
        let m = self.coords(side);
        let dim = self.dim(side);
        let inf = self.infinity();
        combinations(inf, dim).into_iter().find(|i| {
            let mut with_inf = i.clone();
            with_inf.push(inf);
            if m.column_rank(&with_inf) != dim + 1 {
                return false;
            }
            let mut with_flat = i.clone();
            with_flat.extend(flat.iter().filter(|x| !i.contains(x)));
            with_flat.sort_unstable();
            m.column_rank(&with_flat) == dim
        })
    }

    /// For a parallelism `(X, j, N)` on `side`, multiplies the value of
    /// `f^j` on the edge of `X` by the value of the dual form `f_j` on the
    /// dual edge.
    pub fn product_minus_one(&self, side: Side, p: &ParallelismRecord) -> Result<ProductReport, PairError> {
        let inf = self.infinity();
        let (j, b) = (p.a, p.b);
        if b != inf {
            return Err(PairError::Precondition(format!("parallelism must use the chart hyperplane {inf} as b, got {b}")));
        }
        let flat = elements_of(p.flat);
        let vertex = self
            .vertex_on_edge(side, &flat)
            .ok_or_else(|| PairError::DegenerateParallelism(format!("no affine vertex on the edge of {flat:?}")))?;
        let dual_vertex: Vec<usize> = (0..inf).filter(|i| *i != j && !vertex.contains(i)).collect();
        let value = self.vertex_value(side, &vertex, j)?;
        if value.is_zero() {
            return Err(PairError::DegenerateParallelism(format!("f^{j} vanishes on the edge of {flat:?}")));
        }
        let dual_value = self.vertex_value(side.other(), &dual_vertex, j)?;
        let product = &value * &dual_value;
        Ok(ProductReport { side, j, vertex, dual_vertex, value, dual_value, product })
    }

    pub fn plucker(&self, side: Side) -> PluckerVector {
        let m = self.coords(side);
        let size = m.rows();
        let ground = m.cols();
        let coords = combinations(ground, size)
            .into_iter()
            .map(|l| {
                let v = m.maximal_minor(&l).expect("valid columns");
                (l, v)
            })
            .collect();
        PluckerVector { side, size, ground, coords }
    }

    /// `delta` of the primal Plücker vector agrees projectively with the
    /// dual one, and `delta` applied twice returns the input up to sign.
    pub fn check_plucker(&self) -> Check {
        let mut check = Check::new("plucker_duality");
        let p = self.plucker(Side::Primal);
        let q = self.plucker(Side::Dual);
        check.record(p.delta().projectively_equal(&q), || "delta(pi(W)) differs from pi'(W')".into());
        let back = p.delta().delta();
        check.record(back.equal_up_to_sign(&p), || "delta(delta(lambda)) differs from lambda".into());
        check
    }

    /// The localization of the primal side at the edge of `flat` and the
    /// weakly dual restriction of the dual side.
    pub fn weak_localize(&self, flat: Mask) -> Result<WeakLocalization, PairError> {
        let m = self.matroid(Side::Primal)?;
        let g = m.ground();
        if flat & !g != 0 || !m.is_flat(flat) || flat == g {
            return Err(PairError::NotAFlat(elements_of(flat)));
        }
        let x = elements_of(flat);
        let rest = elements_of(g & !flat);
        let b = &self.primal.b;
        let y = b.select_columns(&x).transpose().nullspace_basis();
        let sigma = y.mul(&b.select_columns(&rest))?;
        let sigma_dual = self.c.select_columns(&rest).row_space_basis();

        let mut checks = Vec::new();
        let mut c = Check::new("weak_admissibility");
        for (pos, &label) in rest.iter().enumerate() {
            c.record(sigma.column(pos).iter().any(|v| !v.is_zero()), || format!("primal column {label} vanishes"));
            c.record(sigma_dual.column(pos).iter().any(|v| !v.is_zero()), || format!("dual column {label} vanishes"));
        }
        checks.push(c);

        let mut c = Check::new("weak_annihilator");
        let prod = sigma.mul(&sigma_dual.transpose())?;
        c.record(prod.is_zero(), || "localized matrices are not orthogonal".into());
        c.record(sigma.rows() + sigma_dual.rows() == rest.len(), || {
            format!("dimensions {} + {} != {}", sigma.rows(), sigma_dual.rows(), rest.len())
        });
        checks.push(c);

        let mut c = Check::new("weak_matroids");
        let ms = Matroid::from_columns(&sigma)?;
        let msd = Matroid::from_columns(&sigma_dual)?;
        let contracted = if flat == 0 { m.clone() } else { m.contract(flat)? };
        let md = self.matroid(Side::Dual)?;
        let deleted = if flat == 0 { md.clone() } else { md.delete(flat)? };
        let same = |a: &Matroid, b: &Matroid| (0..=a.ground()).all(|s| a.rank_of(s) == b.rank_of(s));
        c.record(same(&ms, &contracted), || "matroid of sigma differs from M/X".into());
        c.record(same(&msd, &deleted), || "matroid of sigma' differs from M'-X".into());
        c.record(ms.dual().rank() == msd.rank() && same(&ms.dual(), &msd), || "sigma and sigma' not dual".into());
        checks.push(c);

        Ok(WeakLocalization { labels: rest, sigma, sigma_dual, checks })
    }
}

#[derive(Clone, Debug)]
pub struct ProductReport {
    pub side: Side,
    pub j: usize,
    pub vertex: Vec<usize>,
    pub dual_vertex: Vec<usize>,
    pub value: Rational,
    pub dual_value: Rational,
    pub product: Rational,
}

impl ProductReport {
    pub fn passed(&self) -> bool {
        self.product == -Rational::one()
    }
}

#[derive(Clone, Debug)]
pub struct WeakLocalization {
    /// Original labels of the columns of both matrices.
    pub labels: Vec<usize>,
    pub sigma: ExactMatrix,
    pub sigma_dual: ExactMatrix,
    pub checks: Vec<Check>,
}

/// Projective Plücker coordinates indexed by increasing `size`-subsets of
/// `0..ground`.
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerVector {
    pub side: Side,
    pub size: usize,
    pub ground: usize,
    pub coords: BTreeMap<Vec<usize>, Rational>,
}

impl PluckerVector {
    /// `mu_M = (-1)^sigma lambda_L` with `L` the complement of `M`.
    pub fn delta(&self) -> PluckerVector {
        let coords = self
            .coords
            .iter()
            .map(|(l, v)| {
                let value = if complement_sign_negative(l) { -v.clone() } else { v.clone() };
                (complement(l, self.ground), value)
            })
            .collect();
        PluckerVector { side: self.side.other(), size: self.ground - self.size, ground: self.ground, coords }
    }

    fn ratio_to(&self, other: &PluckerVector) -> Option<Rational> {
        if self.size != other.size || self.ground != other.ground {
            return None;
        }
        let (key, v) = self.coords.iter().find(|(_, v)| !v.is_zero())?;
        let w = other.coords.get(key)?;
        if w.is_zero() {
            return None;
        }
        let r = w / v;
        self.coords
            .iter()
            .all(|(k, v)| other.coords.get(k).is_some_and(|w| &(v * &r) == w))
            .then_some(r)
    }

    pub fn projectively_equal(&self, other: &PluckerVector) -> bool {
        self.ratio_to(other).is_some()
    }

    pub fn equal_up_to_sign(&self, other: &PluckerVector) -> bool {
        self.ratio_to(other).is_some_and(|r| r.abs().is_one())
    }
}

impl Serialize for PluckerVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Coord<'a> {
            subset: &'a [usize],
            value: String,
        }
        #[derive(Serialize)]
        struct View<'a> {
            side: Side,
            size: usize,
            coords: Vec<Coord<'a>>,
        }
        let coords = self.coords.iter().map(|(k, v)| Coord { subset: k, value: format_rational(v) }).collect();
        View { side: self.side, size: self.size, coords }.serialize(s)
    }
}

/// Draws integer matrices with entries in `-max_entry..=max_entry` until one
/// gives an admissible pair with the requested dimensions.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, k: usize, n: usize, max_entry: i64) -> DualPair {
    let cols = k + n + 2;
    loop {
        let rows: Vec<Vec<Rational>> =
            (0..=k).map(|_| (0..cols).map(|_| rat(rng.random_range(-max_entry..=max_entry))).collect()).collect();
        let b = ExactMatrix::from_rows(rows).expect("rectangular");
        if let Ok(pair) = DualPair::from_matrix(b, k) {
            return pair;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn example1() -> DualPair {
        DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, -1, -2, 1]]), 1).unwrap()
    }

    #[test]
    fn make_pair_examples() {
        let d = example1();
        assert_eq!((d.dim(Side::Primal), d.dim(Side::Dual), d.num_hyperplanes()), (1, 1, 3));
        let equal = ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, 0, -2, 1]]);
        assert!(matches!(AdmissiblePair::new(equal, 1), Err(PairError::Proportional { side: Side::Primal, a: 0, b: 1 })));
        let zero = ExactMatrix::from_i64(&[&[1, 0, 1, 0], &[0, 0, -2, 1]]);
        assert!(matches!(AdmissiblePair::new(zero, 1), Err(PairError::ZeroColumn { column: 1, .. })));
        let low = ExactMatrix::from_i64(&[&[1, 1, 1, 1], &[2, 2, 2, 2]]);
        assert!(matches!(AdmissiblePair::new(low, 1), Err(PairError::NotAPair { rank: 1, expected: 2 })));
    }

    #[test]
    fn dual_side_zero_column_rejected() {
        // column 3 is an isthmus of the primal matroid, so C has a zero column
        let b = ExactMatrix::from_i64(&[&[1, 1, 1, 0, 0], &[0, 1, 2, 0, 1], &[0, 0, 0, 1, 0]]);
        assert!(matches!(AdmissiblePair::new(b, 2), Err(PairError::ZeroColumn { side: Side::Dual, column: 3 })));
    }

    #[test]
    fn dualize_examples() {
        let d = example1();
        assert!(d.check_involution().passed);
        assert_eq!(d.c().rank(), 2);
        let id = DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]), 1);
        // identity rows have zero columns, so the orthogonal-complement case
        // is checked directly on the completion
        assert!(id.is_err());
        let b = ExactMatrix::from_i64(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let c = dual_coordinates(&b.complete_to_square().unwrap(), 2).unwrap();
        assert_eq!(c, ExactMatrix::from_i64(&[&[0, 0, 1, 0], &[0, 0, 0, 1]]));
    }

    #[test]
    fn vertex_values_of_example1() {
        let d = example1();
        assert_eq!(d.vertex_value(Side::Primal, &[0], 1).unwrap(), rat(-1));
        assert_eq!(d.vertex_value(Side::Primal, &[0], 2).unwrap(), rat(-2));
        assert_eq!(d.vertex_value(Side::Primal, &[1], 0).unwrap(), rat(1));
        assert_eq!(d.vertex_value(Side::Dual, &[2], 1).unwrap(), rat(1));
        assert!(matches!(d.vertex_value(Side::Primal, &[1], 1), Err(PairError::Precondition(_))));
    }

    #[test]
    fn minor_identity_and_plucker() {
        let d = example1();
        let c = d.check_minor_identity();
        assert!(c.passed, "{c:?}");
        assert_eq!(c.cases, 6);
        assert!(d.check_plucker().passed);
        assert!(d.check_matroid_duality().unwrap().passed);
    }

    #[test]
    fn product_minus_one_example1() {
        let d = example1();
        let m = d.matroid(Side::Primal).unwrap();
        for p in m.parallelisms().iter().filter(|p| p.b == 3) {
            let r = d.product_minus_one(Side::Primal, p).unwrap();
            assert!(r.passed(), "{r:?}");
        }
        let p = ParallelismRecord { flat: 0b0001, a: 1, b: 3, width: 1, volume: 1 };
        let r = d.product_minus_one(Side::Primal, &p).unwrap();
        assert_eq!((r.value.clone(), r.dual_value.clone()), (rat(-1), rat(1)));
        assert_eq!(r.dual_vertex, vec![2]);
        let md = d.matroid(Side::Dual).unwrap();
        for p in md.parallelisms().iter().filter(|p| p.b == 3) {
            assert!(d.product_minus_one(Side::Dual, p).unwrap().passed());
        }
    }

    #[test]
    fn weak_localization_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = random_pair(&mut rng, 2, 2, 3);
        let m = d.matroid(Side::Primal).unwrap();
        for f in m.flats() {
            if f.flat == m.ground() {
                assert!(d.weak_localize(f.flat).is_err());
                continue;
            }
            let w = d.weak_localize(f.flat).unwrap();
            assert!(w.checks.iter().all(|c| c.passed), "{:?}", w.checks);
        }
        assert!(matches!(d.weak_localize(0b11), Err(PairError::NotAFlat(_))) || m.is_flat(0b11));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]
        #[test]
        fn random_pairs_satisfy_identities(seed in 0u64..10_000, shape in 0usize..3) {
            let (k, n) = [(1, 2), (2, 1), (2, 2)][shape];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_pair(&mut rng, k, n, 3);
            proptest::prop_assert!(d.check_minor_identity().passed);
            proptest::prop_assert!(d.check_plucker().passed);
            proptest::prop_assert!(d.check_involution().passed);
            proptest::prop_assert!(d.check_matroid_duality().unwrap().passed);
            let inf = d.infinity();
            for side in [Side::Primal, Side::Dual] {
                for p in d.matroid(side).unwrap().parallelisms().iter().filter(|p| p.b == inf) {
                    let r = d.product_minus_one(side, p).unwrap();
                    proptest::prop_assert!(r.passed(), "{:?}", r);
                }
            }
        }
    }
}
