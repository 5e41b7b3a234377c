//! Affine arrangements in the chart complementary to the last hyperplane:
//! chambers, boundedness, vertices and external supporting faces.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dualpair::{DualPair, Side};
use crate::exactla::{format_rational, rat, ExactMatrix, Rational};
use crate::matroid::{combinations, elements_of, ParallelismRecord};
use crate::polyhedra::{feasible_point, Constraint, Relation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("chart hyperplane contains the whole space")]
    Chart,
    #[error("arrangement is not essential")]
    NotEssential,
    #[error("chamber {0} is unbounded")]
    Unbounded(String),
    #[error("index {0} is not an affine hyperplane")]
    BadIndex(usize),
    #[error("{0}")]
    Precondition(String),
}

/// `f(x) = grad . x + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm {
    pub grad: Vec<Rational>,
    pub constant: Rational,
}

impl AffineForm {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.grad.iter().zip(x).fold(self.constant.clone(), |acc, (a, v)| acc + a * v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.grad.iter().zip(x).fold(crate::exactla::to_f64(&self.constant), |acc, (a, v)| {
            acc + crate::exactla::to_f64(a) * v
        })
    }
}

/// A vertex of the arrangement together with all hyperplanes through it.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub flat: Vec<usize>,
    pub point: Vec<Rational>,
}

/// An affine subspace given by a point and a basis of directions.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeGeom {
    pub flat: Vec<usize>,
    pub point: Vec<Rational>,
    pub directions: Vec<Vec<Rational>>,
}

impl EdgeGeom {
    pub fn dim(&self) -> usize {
        self.directions.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chamber {
    /// `+1` or `-1` for each affine hyperplane.
    pub signs: Vec<i8>,
    pub interior: Vec<Rational>,
    pub vertices: Vec<Vertex>,
    pub bounded: bool,
}

impl Chamber {
    pub fn sign_string(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }
}

/// The ℋ^j-external supporting face of a bounded chamber.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub j: usize,
    /// Chamber vertices where `|f^j|` is maximal.
    pub face: Vec<Vertex>,
    /// Hyperplanes containing the face; the flat of the supporting edge.
    pub flat: Vec<usize>,
    /// The constant value of `f^j` on the face.
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineArrangement {
    pub side: Side,
    pub dim: usize,
    pub forms: Vec<AffineForm>,
}

impl AffineArrangement {
    /// Forms `f^j = e^j / e^{N+1}` in coordinates of the affine chart
    /// `e^{N+1} = 1`.
    pub fn from_pair(d: &DualPair, side: Side) -> Result<AffineArrangement, GeometryError> {
        let m = d.coords(side);
        let inf = d.infinity();
        let chart = m.column(inf);
        let r = chart.iter().rposition(|c| !c.is_zero()).ok_or(GeometryError::Chart)?;
        let rows = m.rows();
        let inv = chart[r].recip();
        // base point e_r / c_r and directions e_i - (c_i / c_r) e_r
        let directions: Vec<usize> = (0..rows).filter(|&i| i != r).collect();
        let forms = (0..inf)
            .map(|j| {
                let col = m.column(j);
                let constant = &col[r] * &inv;
                let grad = directions.iter().map(|&i| &col[i] - &col[r] * &chart[i] * &inv).collect();
                AffineForm { grad, constant }
            })
            .collect();
        Ok(AffineArrangement { side, dim: rows - 1, forms })
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Rank of the gradient matrix; the arrangement is essential when it
    /// equals the dimension.
    pub fn gradient_rank(&self) -> usize {
        let rows: Vec<Vec<Rational>> = self.forms.iter().map(|f| f.grad.clone()).collect();
        ExactMatrix::from_rows(rows).map(|m| m.rank()).unwrap_or(0)
    }

    fn sign_constraints(&self, signs: &[i8], skip: Option<usize>) -> Vec<Constraint> {
        self.forms
            .iter()
            .zip(signs)
            .enumerate()
            .map(|(j, (f, &s))| {
                let s = rat(s as i64);
                let relation = if Some(j) == skip { Relation::Zero } else { Relation::Positive };
                Constraint::new(f.grad.iter().map(|a| a * &s).collect(), &f.constant * &s, relation)
            })
            .collect()
    }

    /// The affine subspace cut out by the hyperplanes in `flat`, or `None`
    /// if they have no common affine point.
    pub fn edge(&self, flat: &[usize]) -> Option<EdgeGeom> {
        let rows: Vec<Vec<Rational>> = flat
            .iter()
            .map(|&j| {
                let f = &self.forms[j];
                let mut row = f.grad.clone();
                row.push(-f.constant.clone());
                row
            })
            .collect();
        if rows.is_empty() {
            let directions = (0..self.dim)
                .map(|i| (0..self.dim).map(|t| if t == i { Rational::one() } else { Rational::zero() }).collect())
                .collect();
            return Some(EdgeGeom { flat: vec![], point: vec![Rational::zero(); self.dim], directions });
        }
        let aug = ExactMatrix::from_rows(rows).expect("rectangular");
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.dim) {
            return None;
        }
        let mut point = vec![Rational::zero(); self.dim];
        for (i, &p) in pivots.iter().enumerate() {
            point[p] = r.get(i, self.dim).clone();
        }
        let grads = aug.select_columns(&(0..self.dim).collect::<Vec<_>>());
        let directions = grads.nullspace_basis().row_vecs();
        Some(EdgeGeom { flat: flat.to_vec(), point, directions })
    }

    /// All vertices of the affine arrangement.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for subset in combinations(self.len(), self.dim) {
            let Some(e) = self.edge(&subset) else { continue };
            if e.dim() != 0 || !seen.insert(e.point.clone()) {
                continue;
            }
            let flat = (0..self.len()).filter(|&j| self.forms[j].eval(&e.point).is_zero()).collect();
            out.push(Vertex { flat, point: e.point });
        }
        out
    }

    fn generic_point(&self) -> Vec<Rational> {
        for m in 1i64.. {
            let p: Vec<Rational> =
                (0..self.dim as i64).map(|i| Rational::new((m * (i + 2) + i * i + 1).into(), (2 * m + 3 + i).into())).collect();
            if self.forms.iter().all(|f| !f.eval(&p).is_zero()) {
                return p;
            }
        }
        unreachable!()
    }

    fn signs_at(&self, x: &[Rational]) -> Vec<i8> {
        self.forms.iter().map(|f| if f.eval(x).is_positive() { 1 } else { -1 }).collect()
    }

    fn is_bounded(&self, signs: &[i8]) -> bool {
        for i in 0..self.dim {
            for s in [1i64, -1] {
                let mut cons: Vec<Constraint> = self
                    .forms
                    .iter()
                    .zip(signs)
                    .map(|(f, &sg)| {
                        let sg = rat(sg as i64);
                        Constraint::new(f.grad.iter().map(|a| a * &sg).collect(), Rational::zero(), Relation::NonNegative)
                    })
                    .collect();
                let mut unit = vec![Rational::zero(); self.dim];
                unit[i] = rat(s);
                cons.push(Constraint::new(unit, rat(-1), Relation::NonNegative));
                if feasible_point(self.dim, &cons).is_some() {
                    return false;
                }
            }
        }
        true
    }

    /// All chambers, sorted by sign string.
    pub fn chambers(&self) -> Result<Vec<Chamber>, GeometryError> {
        if self.gradient_rank() != self.dim {
            return Err(GeometryError::NotEssential);
        }
        let vertices = self.vertices();
        let seed = self.generic_point();
        let start = self.signs_at(&seed);
        let mut visited = BTreeSet::new();
        let mut queue = VecDeque::new();
        let mut found = Vec::new();
        visited.insert(start.clone());
        queue.push_back((start, seed));
        while let Some((signs, witness)) = queue.pop_front() {
            for j in 0..self.len() {
                let mut flipped = signs.clone();
                flipped[j] = -flipped[j];
                if visited.contains(&flipped) {
                    continue;
                }
                let wall = self.sign_constraints(&signs, Some(j));
                if feasible_point(self.dim, &wall).is_none() {
                    continue;
                }
                let Some(p) = feasible_point(self.dim, &self.sign_constraints(&flipped, None)) else { continue };
                visited.insert(flipped.clone());
                queue.push_back((flipped, p));
            }
            found.push((signs, witness));
        }
        let mut chambers: Vec<Chamber> = found
            .into_iter()
            .map(|(signs, witness)| {
                let vs: Vec<Vertex> = vertices
                    .iter()
                    .filter(|v| {
                        self.forms.iter().zip(&signs).all(|(f, &s)| {
                            let val = f.eval(&v.point);
                            val.is_zero() || (val.is_positive() == (s > 0))
                        })
                    })
                    .cloned()
                    .collect();
                let bounded = self.is_bounded(&signs);
                let interior = if bounded { centroid(vs.iter().map(|v| &v.point), self.dim) } else { witness };
                Chamber { signs, interior, vertices: vs, bounded }
            })
            .collect();
        chambers.sort_by_key(|c| c.sign_string());
        Ok(chambers)
    }

    /// The face of a bounded chamber farthest from ℋ^j and the flat of its
    /// supporting edge.
    pub fn external_support(&self, c: &Chamber, j: usize) -> Result<Support, GeometryError> {
        if j >= self.len() {
            return Err(GeometryError::BadIndex(j));
        }
        if !c.bounded {
            return Err(GeometryError::Unbounded(c.sign_string()));
        }
        let f = &self.forms[j];
        let values: Vec<Rational> = c.vertices.iter().map(|v| f.eval(&v.point).abs()).collect();
        let best = values.iter().max().expect("bounded chambers have vertices").clone();
        let face: Vec<Vertex> =
            c.vertices.iter().zip(&values).filter(|(_, v)| **v == best).map(|(v, _)| v.clone()).collect();
        let flat = (0..self.len()).filter(|&i| face.iter().all(|v| v.flat.contains(&i))).collect();
        let value = f.eval(&face[0].point);
        Ok(Support { j, face, flat, value })
    }

    /// Number of bounded chambers whose ℋ^a-external supporting edge is the
    /// edge of the parallelism `(X, a, N)`.
    pub fn parallelism_chamber_count(&self, chambers: &[Chamber], p: &ParallelismRecord) -> Result<u64, GeometryError> {
        if p.b != self.len() {
            return Err(GeometryError::Precondition(format!("parallelism must use hyperplane {} as b", self.len())));
        }
        let flat = elements_of(p.flat);
        let mut count = 0;
        for c in chambers.iter().filter(|c| c.bounded) {
            if self.external_support(c, p.a)?.flat == flat {
                count += 1;
            }
        }
        Ok(count)
    }
}

pub fn centroid<'a>(points: impl Iterator<Item = &'a Vec<Rational>>, dim: usize) -> Vec<Rational> {
    let mut sum = vec![Rational::zero(); dim];
    let mut n = 0i64;
    for p in points {
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
        n += 1;
    }
    sum.into_iter().map(|s| s / rat(n.max(1))).collect()
}

#[derive(Serialize)]
pub struct ChamberView {
    pub signs: String,
    pub bounded: bool,
    pub interior: Vec<String>,
    pub vertices: Vec<Vec<usize>>,
}

impl From<&Chamber> for ChamberView {
    fn from(c: &Chamber) -> Self {
        ChamberView {
            signs: c.sign_string(),
            bounded: c.bounded,
            interior: c.interior.iter().map(format_rational).collect(),
            vertices: c.vertices.iter().map(|v| v.flat.clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualpair::random_pair;
    use crate::exactla::ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example1() -> DualPair {
        DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, -1, -2, 1]]), 1).unwrap()
    }

    fn triangle() -> DualPair {
        // lines x = 0, y = 0, x + y = 1 and one more generic line
        DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 0, -1, 1, 0], &[0, 1, -1, 2, 0], &[0, 0, 1, -3, 1]]), 2)
            .unwrap()
    }

    #[test]
    fn example1_forms_and_chambers() {
        let d = example1();
        let a = AffineArrangement::from_pair(&d, Side::Primal).unwrap();
        for (j, shift) in [0, 1, 2].into_iter().enumerate() {
            assert_eq!(a.forms[j].grad, vec![rat(1)]);
            assert_eq!(a.forms[j].constant, rat(-shift));
        }
        let cs = a.chambers().unwrap();
        assert_eq!(cs.len(), 4);
        let bounded: Vec<_> = cs.iter().filter(|c| c.bounded).collect();
        assert_eq!(bounded.len(), 2);
        let mids: Vec<Rational> = bounded.iter().map(|c| c.interior[0].clone()).collect();
        assert!(mids.contains(&ratio(1, 2)) && mids.contains(&ratio(3, 2)));
        let dual = AffineArrangement::from_pair(&d, Side::Dual).unwrap();
        assert_eq!(dual.chambers().unwrap().iter().filter(|c| c.bounded).count(), 2);
    }

    #[test]
    fn dual_forms_match_vertex_values() {
        let d = example1();
        let a = AffineArrangement::from_pair(&d, Side::Dual).unwrap();
        for v in a.vertices() {
            for j in 0..3 {
                if v.flat.contains(&j) {
                    continue;
                }
                assert_eq!(a.forms[j].eval(&v.point), d.vertex_value(Side::Dual, &v.flat, j).unwrap());
            }
        }
    }

    #[test]
    fn external_support_example1() {
        let a = AffineArrangement::from_pair(&example1(), Side::Primal).unwrap();
        let cs = a.chambers().unwrap();
        let left = cs.iter().find(|c| c.bounded && c.interior[0] == ratio(1, 2)).unwrap();
        let s = a.external_support(left, 1).unwrap();
        assert_eq!(s.flat, vec![0]);
        assert_eq!(s.value, rat(-1));
        let unbounded = cs.iter().find(|c| !c.bounded).unwrap();
        assert!(matches!(a.external_support(unbounded, 1), Err(GeometryError::Unbounded(_))));
        let p = ParallelismRecord { flat: 0b0001, a: 1, b: 3, width: 1, volume: 1 };
        assert_eq!(a.parallelism_chamber_count(&cs, &p).unwrap(), 1);
    }

    #[test]
    fn triangle_has_expected_counts() {
        let d = triangle();
        let a = AffineArrangement::from_pair(&d, Side::Primal).unwrap();
        let cs = a.chambers().unwrap();
        let beta = d.matroid(Side::Primal).unwrap().beta();
        assert_eq!(cs.iter().filter(|c| c.bounded).count() as u64, beta);
        // four generic lines: 11 regions
        assert_eq!(cs.len(), 11);
    }

    #[test]
    fn edges_have_expected_dimension() {
        let d = triangle();
        let a = AffineArrangement::from_pair(&d, Side::Primal).unwrap();
        let m = d.matroid(Side::Primal).unwrap();
        for f in m.flats() {
            let flat = elements_of(f.flat);
            if flat.contains(&4) {
                continue;
            }
            if let Some(e) = a.edge(&flat) {
                assert_eq!(e.dim(), 2 - m.rank_of(f.flat));
                for &j in &flat {
                    assert!(a.forms[j].eval(&e.point).is_zero());
                }
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn bounded_counts_and_parallelism_volumes(seed in 0u64..10_000, shape in 0usize..3) {
            let (k, n) = [(1, 2), (2, 1), (2, 2)][shape];
            let d = random_pair(&mut ChaCha8Rng::seed_from_u64(seed), k, n, 3);
            for side in [Side::Primal, Side::Dual] {
                let a = AffineArrangement::from_pair(&d, side).unwrap();
                let m = d.matroid(side).unwrap();
                let cs = a.chambers().unwrap();
                let beta = m.beta();
                proptest::prop_assert_eq!(cs.iter().filter(|c| c.bounded).count() as u64, beta);
                let ps = m.parallelisms();
                for j in 0..a.len() {
                    let mut total = 0;
                    for p in ps.iter().filter(|p| p.a == j && p.b == a.len()) {
                        let count = a.parallelism_chamber_count(&cs, p).unwrap();
                        proptest::prop_assert_eq!(count, p.volume);
                        total += count;
                    }
                    proptest::prop_assert_eq!(total, beta);
                }
                for c in cs.iter().filter(|c| c.bounded) {
                    for j in 0..a.len() {
                        let s = a.external_support(c, j).unwrap();
                        proptest::prop_assert!(!s.value.is_zero());
                        proptest::prop_assert_eq!(s.value.is_positive(), c.signs[j] > 0);
                    }
                }
            }
        }
    }
}
