//! Canonical ordered bases, their flags, the bijection with bounded
//! chambers, intrinsic orientations and the logarithmic forms.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dualpair::{DualPair, Side};
use crate::exactla::{format_rational, to_f64, ExactMatrix, Rational};
use crate::geometry::{centroid, AffineArrangement, Chamber, GeometryError};
use crate::matroid::{combinations, elements_of, mask_of, Matroid, MatroidError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("constructed {found} bases but the beta invariant is {beta}")]
    Count { found: usize, beta: u64 },
    #[error("no adjacency-respecting bijection between bases and bounded chambers")]
    Bijection,
    #[error("flag of {0:?} is not adjacent to the chamber")]
    NotAdjacent(Vec<usize>),
    #[error("point lies on hyperplane {0}")]
    Singular(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// Increasing tuple `(j_1, ..., j_k)` of affine hyperplanes meeting in a
/// vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OrderedBasis {
    pub hyperplanes: Vec<usize>,
}

impl OrderedBasis {
    /// Hyperplanes defining `L^i`: the last `k - i` of the tuple.
    pub fn defining(&self, i: usize) -> &[usize] {
        &self.hyperplanes[i..]
    }

    /// For `i = 0..=k`, the affine hyperplanes containing `L^i`.
    pub fn flag(&self, m: &Matroid) -> Vec<Vec<usize>> {
        let inf = m.len() - 1;
        (0..=self.hyperplanes.len())
            .map(|i| {
                let cl = m.closure(mask_of(self.defining(i)));
                elements_of(cl).into_iter().filter(|&j| j != inf).collect()
            })
            .collect()
    }
}

/// The nbc bases containing the chart hyperplane whose only internally
/// active element is the chart hyperplane, under the order in which the
/// chart hyperplane is least. `m` must have the chart hyperplane as its last
/// element.
pub fn betakbc_bases(m: &Matroid) -> Result<Vec<OrderedBasis>, BasisError> {
    let inf = m.len() - 1;
    let k = m.rank() - 1;
    // order: inf first, then 0 < 1 < ... < inf - 1
    let key = |e: usize| if e == inf { 0 } else { e + 1 };
    let mut out = Vec::new();
    for s in combinations(inf, k) {
        let basis = mask_of(&s) | 1 << inf;
        if !m.is_basis(basis) {
            continue;
        }
        let externally_active = (0..m.len()).filter(|&e| basis >> e & 1 == 0).any(|e| {
            let circuit_min = (0..m.len())
                .filter(|&b| basis >> b & 1 == 1 && m.is_basis(basis & !(1 << b) | 1 << e))
                .map(key)
                .min()
                .unwrap_or(usize::MAX);
            key(e) < circuit_min
        });
        if externally_active {
            continue;
        }
        let internally_active = s.iter().any(|&b| {
            !(0..inf).any(|c| basis >> c & 1 == 0 && key(c) < key(b) && m.is_basis(basis & !(1 << b) | 1 << c))
        });
        if internally_active {
            continue;
        }
        out.push(OrderedBasis { hyperplanes: s });
    }
    let beta = m.beta();
    if out.len() as u64 != beta {
        return Err(BasisError::Count { found: out.len(), beta });
    }
    Ok(out)
}

/// Chamber vertices lying on the edge defined by `defining`.
fn vertices_on<'a>(c: &'a Chamber, defining: &'a [usize]) -> impl Iterator<Item = &'a Vec<Rational>> + 'a {
    c.vertices.iter().filter(move |v| defining.iter().all(|j| v.flat.contains(j))).map(|v| &v.point)
}

fn affine_dim(points: &[&Vec<Rational>]) -> Option<usize> {
    let first = points.first()?;
    if points.len() == 1 {
        return Some(0);
    }
    let rows: Vec<Vec<Rational>> =
        points[1..].iter().map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect()).collect();
    Some(ExactMatrix::from_rows(rows).expect("rectangular").rank())
}

/// `dim(L^i ∩ closure(c)) = i` for every `i`.
pub fn is_adjacent(basis: &OrderedBasis, c: &Chamber) -> bool {
    let k = basis.hyperplanes.len();
    (0..=k).all(|i| {
        let pts: Vec<_> = vertices_on(c, basis.defining(i)).collect();
        affine_dim(&pts) == Some(i)
    })
}

/// Sign of `det(u_1, ..., u_k)` where `u_i` runs from the flag vertex to
/// the centroid of `L^i ∩ closure(c)`.
pub fn orientation(basis: &OrderedBasis, c: &Chamber, dim: usize) -> Result<i8, BasisError> {
    let k = basis.hyperplanes.len();
    let origin: Vec<Rational> = vertices_on(c, basis.defining(0))
        .next()
        .cloned()
        .ok_or_else(|| BasisError::NotAdjacent(basis.hyperplanes.clone()))?;
    let rows: Vec<Vec<Rational>> = (1..=k)
        .map(|i| {
            let pts: Vec<_> = vertices_on(c, basis.defining(i)).collect();
            let mid = centroid(pts.into_iter(), dim);
            mid.iter().zip(&origin).map(|(a, b)| a - b).collect()
        })
        .collect();
    let det = ExactMatrix::from_rows(rows).expect("rectangular").determinant().expect("square");
    if det.is_zero() {
        return Err(BasisError::NotAdjacent(basis.hyperplanes.clone()));
    }
    Ok(if det.is_positive() { 1 } else { -1 })
}

/// Adjacency lists from bases to chamber indices.
pub fn adjacency(bases: &[OrderedBasis], chambers: &[Chamber]) -> Vec<Vec<usize>> {
    bases.iter().map(|b| (0..chambers.len()).filter(|&t| is_adjacent(b, &chambers[t])).collect()).collect()
}

fn has_perfect_matching(adj: &[Vec<usize>], fixed: &[Option<usize>], n_right: usize) -> bool {
    let mut owner: Vec<Option<usize>> = vec![None; n_right];
    for (s, f) in fixed.iter().enumerate() {
        if let Some(t) = f {
            owner[*t] = Some(s);
        }
    }
    fn augment(s: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool], locked: &[bool]) -> bool {
        for &t in &adj[s] {
            if seen[t] || locked[t] {
                continue;
            }
            seen[t] = true;
            if owner[t].is_none() || augment(owner[t].unwrap(), adj, owner, seen, locked) {
                owner[t] = Some(s);
                return true;
            }
        }
        false
    }
    let locked: Vec<bool> = (0..n_right).map(|t| owner[t].is_some()).collect();
    for s in 0..adj.len() {
        if fixed[s].is_some() {
            continue;
        }
        let mut seen = vec![false; n_right];
        if !augment(s, adj, &mut owner, &mut seen, &locked) {
            return false;
        }
    }
    true
}

/// Perfect matching choosing, for each basis in turn, the first candidate
/// in `order(s)` that still extends to a perfect matching.
fn greedy_matching(adj: &[Vec<usize>], n_right: usize, mut order: impl FnMut(usize) -> Vec<usize>) -> Option<Vec<usize>> {
    if adj.len() != n_right {
        return None;
    }
    let mut fixed: Vec<Option<usize>> = vec![None; adj.len()];
    for s in 0..adj.len() {
        let taken: Vec<usize> = fixed.iter().flatten().copied().collect();
        let choice = order(s).into_iter().filter(|t| !taken.contains(t)).find(|&t| {
            fixed[s] = Some(t);
            let ok = has_perfect_matching(adj, &fixed, n_right);
            fixed[s] = None;
            ok
        })?;
        fixed[s] = Some(choice);
    }
    Some(fixed.into_iter().map(|t| t.expect("assigned")).collect())
}

/// The lexicographically least adjacency-respecting bijection.
pub fn chamber_bijection(adj: &[Vec<usize>], n_chambers: usize) -> Result<Vec<usize>, BasisError> {
    greedy_matching(adj, n_chambers, |s| adj[s].clone()).ok_or(BasisError::Bijection)
}

/// A uniformly shuffled greedy choice among adjacency-respecting bijections.
pub fn random_bijection<R: Rng + ?Sized>(adj: &[Vec<usize>], n_chambers: usize, rng: &mut R) -> Result<Vec<usize>, BasisError> {
    greedy_matching(adj, n_chambers, |s| {
        let mut c = adj[s].clone();
        c.shuffle(rng);
        c
    })
    .ok_or(BasisError::Bijection)
}

/// `phi = g(x) dx_1 ∧ ... ∧ dx_k` expanded as `sum_T c_T / prod_{j in T} f^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogForm {
    pub basis: OrderedBasis,
    /// Row `i` lists the hyperplanes containing `L^i`, for `i < k`.
    pub rows: Vec<Vec<usize>>,
    pub terms: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormTerm {
    /// Distinct hyperplanes in the denominator, sorted.
    pub hyperplanes: Vec<usize>,
    pub coeff: Rational,
}

impl LogForm {
    pub fn new(basis: &OrderedBasis, m: &Matroid, arr: &AffineArrangement, alphas: &[Rational]) -> LogForm {
        let k = basis.hyperplanes.len();
        let flag = basis.flag(m);
        let rows: Vec<Vec<usize>> = flag[..k].to_vec();
        let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        let mut choice = vec![0usize; k];
        // every choice of one hyperplane per row with distinct hyperplanes
        loop {
            let js: Vec<usize> = (0..k).map(|i| rows[i][choice[i]]).collect();
            let mut sorted = js.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() == k {
                let grads: Vec<Vec<Rational>> = js.iter().map(|&j| arr.forms[j].grad.clone()).collect();
                let det = ExactMatrix::from_rows(grads).expect("rectangular").determinant().expect("square");
                if !det.is_zero() {
                    let weight = js.iter().fold(det, |acc, &j| acc * &alphas[j]);
                    *acc.entry(sorted).or_insert_with(Rational::zero) += weight;
                }
            }
            let mut i = 0;
            while i < k {
                choice[i] += 1;
                if choice[i] < rows[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(hyperplanes, coeff)| FormTerm { hyperplanes, coeff })
            .collect();
        LogForm { basis: basis.clone(), rows, terms }
    }

    /// `g(x)` from the determinant of the rows `sum_j alpha_j grad f^j / f^j(x)`.
    pub fn value(&self, arr: &AffineArrangement, alphas: &[f64], x: &[f64]) -> Result<f64, BasisError> {
        let k = self.rows.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(k, k);
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                let f = arr.forms[j].eval_f64(x);
                if f == 0.0 {
                    return Err(BasisError::Singular(j));
                }
                for (col, g) in arr.forms[j].grad.iter().enumerate() {
                    m[(i, col)] += alphas[j] * to_f64(g) / f;
                }
            }
        }
        Ok(m.determinant())
    }

    /// `g(x)` from the expanded terms.
    pub fn value_from_terms(&self, arr: &AffineArrangement, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| to_f64(&t.coeff) / t.hyperplanes.iter().map(|&j| arr.forms[j].eval_f64(x)).product::<f64>())
            .sum()
    }
}

/// All combinatorial data needed for one side's period matrix.
#[derive(Clone, Debug)]
pub struct Scaffold {
    pub side: Side,
    pub arrangement: AffineArrangement,
    pub matroid: Matroid,
    /// Bounded chambers sorted by sign string.
    pub chambers: Vec<Chamber>,
    pub bases: Vec<OrderedBasis>,
    pub forms: Vec<LogForm>,
    pub adjacency: Vec<Vec<usize>>,
    /// `bijection[s]` is the index of the chamber `C(B_s)`.
    pub bijection: Vec<usize>,
    pub orientations: Vec<i8>,
}

impl Scaffold {
    pub fn build(d: &DualPair, side: Side, alphas: &[Rational]) -> Result<Scaffold, BasisError> {
        let arrangement = AffineArrangement::from_pair(d, side)?;
        let matroid = d.matroid(side)?;
        let chambers: Vec<Chamber> = arrangement.chambers()?.into_iter().filter(|c| c.bounded).collect();
        let bases = betakbc_bases(&matroid)?;
        let forms = bases.iter().map(|b| LogForm::new(b, &matroid, &arrangement, alphas)).collect();
        let adjacency = adjacency(&bases, &chambers);
        let bijection = chamber_bijection(&adjacency, chambers.len())?;
        let mut s = Scaffold { side, arrangement, matroid, chambers, bases, forms, adjacency, bijection, orientations: vec![] };
        s.orientations = s.compute_orientations(&s.bijection)?;
        Ok(s)
    }

    pub fn compute_orientations(&self, bijection: &[usize]) -> Result<Vec<i8>, BasisError> {
        self.bases
            .iter()
            .zip(bijection)
            .map(|(b, &t)| orientation(b, &self.chambers[t], self.arrangement.dim))
            .collect()
    }

    /// Replaces the bijection (and the orientations that depend on it).
    pub fn with_bijection(&self, bijection: Vec<usize>) -> Result<Scaffold, BasisError> {
        let mut s = self.clone();
        s.orientations = s.compute_orientations(&bijection)?;
        s.bijection = bijection;
        Ok(s)
    }

    pub fn beta(&self) -> usize {
        self.bases.len()
    }
}

#[derive(Serialize)]
pub struct BasisView {
    pub hyperplanes: Vec<usize>,
    pub chamber: String,
    pub orientation: i8,
    pub terms: Vec<(Vec<usize>, String)>,
}

impl Scaffold {
    pub fn views(&self) -> Vec<BasisView> {
        self.bases
            .iter()
            .enumerate()
            .map(|(s, b)| BasisView {
                hyperplanes: b.hyperplanes.clone(),
                chamber: self.chambers[self.bijection[s]].sign_string(),
                orientation: self.orientations[s],
                terms: self.forms[s].terms.iter().map(|t| (t.hyperplanes.clone(), format_rational(&t.coeff))).collect(),
            })
            .collect()
    }
}
