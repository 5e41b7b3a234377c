//! Branches, period matrices and their determinants, the Gamma-side
//! quantities, and the drivers checking the determinant formulas.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::betakbc::{BasisError, Scaffold};
use crate::check::{Check, Verdict};
use crate::dualpair::{DualPair, PairError, Side};
use crate::exactla::{format_rational, to_f64, ExactMatrix, Rational};
use crate::geometry::{centroid, AffineArrangement, Chamber, GeometryError};
use crate::matroid::{mask_of, Matroid, MatroidError};
use crate::quadrature::{collapsed_tail, integrate_cube, QuadSpec, RuleCache};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("inconsistent branch: {0}")]
    Branch(String),
    #[error("associated branch contradicts the dual sign: {0}")]
    Duality(String),
    #[error("Gamma argument {arg} for edge {flat:?} is not positive")]
    WeightDomain { flat: Vec<usize>, arg: String },
    #[error("quadrature reached relative error {achieved:e}, target {target:e}")]
    Accuracy { achieved: f64, target: f64 },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

/// Positive weights `alpha_j` on the affine hyperplanes; the chart
/// hyperplane carries `-sum alpha_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSystem {
    alphas: Vec<Rational>,
}

impl WeightSystem {
    pub fn new(alphas: Vec<Rational>) -> Result<WeightSystem, PeriodError> {
        if let Some(a) = alphas.iter().find(|a| !a.is_positive()) {
            return Err(PeriodError::Weights(format!("weight {} is not positive", format_rational(a))));
        }
        Ok(WeightSystem { alphas })
    }

    pub fn alphas(&self) -> &[Rational] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alpha_infinity(&self) -> Rational {
        -self.alphas.iter().fold(Rational::zero(), |acc, a| acc + a)
    }

    /// `alpha(X)`, the sum over `X` including the chart hyperplane `N`.
    pub fn of_set(&self, set: &[usize]) -> Rational {
        set.iter().fold(Rational::zero(), |acc, &j| {
            acc + if j == self.alphas.len() { self.alpha_infinity() } else { self.alphas[j].clone() }
        })
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.alphas.iter().map(to_f64).collect()
    }

    pub fn sum_f64(&self) -> f64 {
        -to_f64(&self.alpha_infinity())
    }
}

/// Branch data for one external-support group `(j, L)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchGroup {
    pub j: usize,
    pub flat: Vec<usize>,
    /// True when the argument is `pi`, false when it is `0`.
    pub half_turn: bool,
    #[serde(serialize_with = "crate::exactla::serde_rational::serialize")]
    pub value: Rational,
    pub chambers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchAssignment {
    pub side: Side,
    pub groups: Vec<BranchGroup>,
    /// `per_chamber[c][j]`: the argument of `f^j` on bounded chamber `c` is `pi`.
    #[serde(skip)]
    pub per_chamber: Vec<Vec<bool>>,
    #[serde(skip)]
    index: BTreeMap<(usize, Vec<usize>), usize>,
}

impl BranchAssignment {
    pub fn group(&self, j: usize, flat: &[usize]) -> Option<&BranchGroup> {
        self.index.get(&(j, flat.to_vec())).map(|&i| &self.groups[i])
    }

    fn insert(&mut self, g: BranchGroup) -> Result<(), String> {
        let key = (g.j, g.flat.clone());
        if let Some(&i) = self.index.get(&key) {
            let e = &mut self.groups[i];
            if e.half_turn != g.half_turn || e.value != g.value {
                return Err(format!("group (f^{}, {:?}) mixes arguments", g.j, g.flat));
            }
            e.chambers += 1;
        } else {
            self.index.insert(key, self.groups.len());
            self.groups.push(g);
        }
        Ok(())
    }
}

/// Argument `0` or `pi` for `f^j` on every external-support group.
pub fn special_branches(sc: &Scaffold) -> Result<BranchAssignment, PeriodError> {
    let arr = &sc.arrangement;
    let mut ba = BranchAssignment { side: sc.side, groups: vec![], per_chamber: vec![], index: BTreeMap::new() };
    for c in &sc.chambers {
        let mut row = Vec::with_capacity(arr.len());
        for j in 0..arr.len() {
            let s = arr.external_support(c, j)?;
            let half_turn = s.value.is_negative();
            if half_turn != (c.signs[j] < 0) {
                return Err(PeriodError::Branch(format!("f^{j} changes sign on chamber {}", c.sign_string())));
            }
            ba.insert(BranchGroup { j, flat: s.flat, half_turn, value: s.value, chambers: 1 }).map_err(PeriodError::Branch)?;
            row.push(half_turn);
        }
        ba.per_chamber.push(row);
    }
    Ok(ba)
}

/// Dual arguments `pi - theta` on the groups dual to the primal ones.
pub fn associated_branches(primal: &BranchAssignment, dual: &Scaffold) -> Result<BranchAssignment, PeriodError> {
    let arr = &dual.arrangement;
    let inf = arr.len();
    let mut ba = BranchAssignment { side: dual.side, groups: vec![], per_chamber: vec![], index: BTreeMap::new() };
    for c in &dual.chambers {
        let mut row = Vec::with_capacity(inf);
        for j in 0..inf {
            let s = arr.external_support(c, j)?;
            let primal_flat: Vec<usize> = (0..inf).filter(|&i| i != j && !s.flat.contains(&i)).collect();
            let g = primal.group(j, &primal_flat).ok_or_else(|| {
                PeriodError::Duality(format!("no primal group for f^{j} on {primal_flat:?}"))
            })?;
            let half_turn = !g.half_turn;
            if half_turn != s.value.is_negative() {
                return Err(PeriodError::Duality(format!(
                    "f_{j} has value {} on {:?} but the argument would be {}",
                    format_rational(&s.value),
                    s.flat,
                    if half_turn { "pi" } else { "0" }
                )));
            }
            ba.insert(BranchGroup { j, flat: s.flat, half_turn, value: s.value, chambers: 1 }).map_err(PeriodError::Duality)?;
            row.push(half_turn);
        }
        ba.per_chamber.push(row);
    }
    Ok(ba)
}

/// A complex number kept as `exp(log_modulus + i phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PolarValue {
    pub log_modulus: f64,
    pub phase: f64,
}

impl PolarValue {
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }
}

/// `|f^j(L)|^{alpha_j} e^{i alpha_j theta}` for the group `g`.
pub fn critical_value(g: &BranchGroup, w: &WeightSystem) -> PolarValue {
    let a = to_f64(&w.alphas()[g.j]);
    PolarValue {
        log_modulus: a * to_f64(&g.value.abs()).ln(),
        phase: if g.half_turn { a * PI } else { 0.0 },
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BetaTerm {
    pub flat: Vec<usize>,
    pub volume: u64,
    pub argument: String,
    pub at_infinity: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BetaValue {
    pub log: f64,
    pub terms: Vec<BetaTerm>,
}

/// `log B = sum vol ln Gamma(alpha(L) + 1) - sum vol ln Gamma(1 - alpha(L))`,
/// the second sum over edges inside the chart hyperplane.
pub fn beta_function(m: &Matroid, w: &WeightSystem) -> Result<BetaValue, PeriodError> {
    let inf = m.len() - 1;
    let mut log = 0.0;
    let mut terms = Vec::new();
    for f in m.flats().into_iter().filter(|f| f.volume > 0) {
        let flat = m.labels_of(f.flat);
        let alpha = w.of_set(&flat);
        let at_infinity = flat.contains(&inf);
        let arg = if at_infinity { Rational::one() - alpha } else { alpha + Rational::one() };
        if !arg.is_positive() {
            return Err(PeriodError::WeightDomain { flat, arg: format_rational(&arg) });
        }
        let term = f.volume as f64 * ln_gamma(to_f64(&arg));
        log += if at_infinity { -term } else { term };
        terms.push(BetaTerm { flat, volume: f.volume, argument: format_rational(&arg), at_infinity });
    }
    Ok(BetaValue { log, terms })
}

mod serde_complex_grid {
    use num_complex::Complex64;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(grid: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<[f64; 2]>> = grid.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
        serde::Serialize::serialize(&v, s)
    }
}

pub mod serde_complex {
    use num_complex::Complex64;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&[z.re, z.im], s)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PeriodMatrix {
    pub side: Side,
    #[serde(serialize_with = "serde_complex_grid::serialize")]
    pub entries: Vec<Vec<Complex64>>,
    /// Absolute error estimate per entry.
    pub errors: Vec<Vec<f64>>,
    pub row_chambers: Vec<String>,
    pub col_forms: Vec<Vec<usize>>,
    pub spec: QuadSpec,
    pub converged: bool,
    /// Largest entry error relative to the size of its contributions.
    pub max_rel_error: f64,
}

impl PeriodMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn ensure_accuracy(&self) -> Result<(), PeriodError> {
        if self.converged {
            Ok(())
        } else {
            Err(PeriodError::Accuracy { achieved: self.max_rel_error, target: self.spec.rel_tol })
        }
    }

    fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entries[i][j])
    }

    pub fn determinant(&self) -> Complex64 {
        if self.dim() == 0 {
            return Complex64::new(1.0, 0.0);
        }
        self.to_dmatrix().determinant()
    }

    /// Ratio of extreme singular values.
    pub fn condition(&self) -> f64 {
        if self.dim() == 0 {
            return 1.0;
        }
        let sv = self.to_dmatrix().singular_values();
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Simplices of the barycentric subdivision of a bounded chamber, each as
/// the centroids `p_0, ..., p_k` of a chain of faces from a vertex up to the
/// chamber.
pub fn barycentric_simplices(c: &Chamber, arr: &AffineArrangement) -> Vec<Vec<Vec<Rational>>> {
    fn face_dim(c: &Chamber, face: &[usize]) -> usize {
        let first = &c.vertices[face[0]].point;
        let rows: Vec<Vec<Rational>> = face[1..]
            .iter()
            .map(|&i| c.vertices[i].point.iter().zip(first).map(|(a, b)| a - b).collect())
            .collect();
        if rows.is_empty() {
            0
        } else {
            ExactMatrix::from_rows(rows).expect("rectangular").rank()
        }
    }
    fn walk(
        c: &Chamber,
        arr: &AffineArrangement,
        face: Vec<usize>,
        dim: usize,
        chain: &mut Vec<Vec<Rational>>,
        out: &mut Vec<Vec<Vec<Rational>>>,
    ) {
        chain.push(centroid(face.iter().map(|&i| &c.vertices[i].point), arr.dim));
        if dim == 0 {
            let mut simplex = chain.clone();
            simplex.reverse();
            out.push(simplex);
        } else {
            let mut facets = BTreeSet::new();
            for j in 0..arr.len() {
                let sub: Vec<usize> = face.iter().copied().filter(|&i| c.vertices[i].flat.contains(&j)).collect();
                if !sub.is_empty() && sub.len() < face.len() && face_dim(c, &sub) == dim - 1 {
                    facets.insert(sub);
                }
            }
            for f in facets {
                walk(c, arr, f, dim - 1, chain, out);
            }
        }
        chain.pop();
    }
    let mut out = Vec::new();
    walk(c, arr, (0..c.vertices.len()).collect(), arr.dim, &mut Vec::new(), &mut out);
    out
}

/// Data of one simplex needed by the collapsed-cube integrand.
struct SimplexData {
    jacobian: f64,
    /// `first[j]`: first index `i` with `f^j(p_i) != 0`.
    first: Vec<usize>,
    /// `|f^j(p_i)|` as floats.
    values: Vec<Vec<f64>>,
}

fn simplex_data(simplex: &[Vec<Rational>], arr: &AffineArrangement) -> SimplexData {
    let k = arr.dim;
    let rows: Vec<Vec<Rational>> =
        simplex[1..].iter().map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| a - b).collect()).collect();
    let jacobian = to_f64(&ExactMatrix::from_rows(rows).expect("rectangular").determinant().expect("square").abs());
    let mut first = Vec::with_capacity(arr.len());
    let mut values = Vec::with_capacity(arr.len());
    for f in &arr.forms {
        let exact: Vec<Rational> = simplex.iter().map(|p| f.eval(p)).collect();
        first.push(exact.iter().position(|v| !v.is_zero()).unwrap_or(k + 1));
        values.push(exact.iter().map(|v| to_f64(&v.abs())).collect());
    }
    SimplexData { jacobian, first, values }
}

/// `int_simplex prod_j |f^j|^{beta_j} dx` via the collapsed-cube map.
fn simplex_integral(d: &SimplexData, betas: &[f64], spec: &QuadSpec, cache: &mut RuleCache) -> (f64, f64, bool) {
    let k = d.values[0].len() - 1;
    let exps: Vec<f64> = (1..=k)
        .map(|l| {
            (k - l) as f64 + d.first.iter().zip(betas).filter(|(&m, _)| m >= l).map(|(_, b)| b).sum::<f64>()
        })
        .collect();
    let h = |v: &[f64]| -> f64 {
        d.first
            .iter()
            .zip(&d.values)
            .zip(betas)
            .map(|((&m, vals), &b)| collapsed_tail(vals, v, m).powf(b))
            .product()
    };
    let est = integrate_cube(&exps, h, spec, cache);
    (d.jacobian * est.value, d.jacobian * est.error, est.converged)
}

struct RowResult {
    entries: Vec<Complex64>,
    errors: Vec<f64>,
    scale: Vec<f64>,
    converged: bool,
}

fn period_row(sc: &Scaffold, s: usize, w: &WeightSystem, ba: &BranchAssignment, spec: &QuadSpec) -> RowResult {
    let arr = &sc.arrangement;
    let ci = sc.bijection[s];
    let c = &sc.chambers[ci];
    let alphas = w.as_f64();
    let simplices: Vec<SimplexData> = barycentric_simplices(c, arr).iter().map(|sx| simplex_data(sx, arr)).collect();
    let mut cache = RuleCache::default();
    let mut integrals: BTreeMap<Vec<usize>, (f64, f64)> = BTreeMap::new();
    let mut converged = true;
    for form in &sc.forms {
        for t in &form.terms {
            if integrals.contains_key(&t.hyperplanes) {
                continue;
            }
            let betas: Vec<f64> =
                (0..arr.len()).map(|j| alphas[j] - if t.hyperplanes.contains(&j) { 1.0 } else { 0.0 }).collect();
            let (mut value, mut error) = (0.0, 0.0);
            for sd in &simplices {
                let (v, e, ok) = simplex_integral(sd, &betas, spec, &mut cache);
                value += v;
                error += e;
                converged &= ok;
            }
            integrals.insert(t.hyperplanes.clone(), (value, error));
        }
    }
    let phase: f64 = (0..arr.len()).filter(|&j| ba.per_chamber[ci][j]).map(|j| alphas[j] * PI).sum();
    let factor = Complex64::from_polar(sc.orientations[s] as f64, phase);
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    let mut scale = Vec::new();
    for form in &sc.forms {
        let (mut sum, mut err, mut mag) = (0.0, 0.0, 0.0);
        for t in &form.terms {
            let sign: i8 = t.hyperplanes.iter().map(|&j| c.signs[j]).product();
            let (v, e) = integrals[&t.hyperplanes];
            let coeff = to_f64(&t.coeff);
            sum += coeff * sign as f64 * v;
            err += coeff.abs() * e;
            mag += (coeff * v).abs();
        }
        entries.push(factor * sum);
        errors.push(err);
        scale.push(mag);
    }
    RowResult { entries, errors, scale, converged }
}

/// Entry `(s, t)` is the integral of `U^alpha phi^t` over the oriented
/// chamber `C(B_s)` with the branches of `ba`.
pub fn period_matrix(sc: &Scaffold, w: &WeightSystem, ba: &BranchAssignment, spec: &QuadSpec) -> PeriodMatrix {
    let beta = sc.beta();
    #[cfg(feature = "parallel")]
    let rows: Vec<RowResult> = {
        use rayon::prelude::*;
        (0..beta).into_par_iter().map(|s| period_row(sc, s, w, ba, spec)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<RowResult> = (0..beta).map(|s| period_row(sc, s, w, ba, spec)).collect();
    let converged = rows.iter().all(|r| r.converged);
    let max_rel_error = rows
        .iter()
        .flat_map(|r| r.errors.iter().zip(&r.scale).map(|(e, m)| if *m > 0.0 { e / m } else { 0.0 }))
        .fold(0.0, f64::max);
    PeriodMatrix {
        side: sc.side,
        errors: rows.iter().map(|r| r.errors.clone()).collect(),
        entries: rows.into_iter().map(|r| r.entries).collect(),
        row_chambers: sc.bijection.iter().map(|&t| sc.chambers[t].sign_string()).collect(),
        col_forms: sc.bases.iter().map(|b| b.hyperplanes.clone()).collect(),
        spec: *spec,
        converged,
        max_rel_error,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Comparison {
    /// Passes when `|value - reference| <= tolerance`.
    pub fn within(name: &str, value: f64, reference: f64, tolerance: f64) -> Self {
        let verdict = Verdict::from_bool((value - reference).abs() <= tolerance);
        Comparison { name: name.into(), value, reference, tolerance, verdict }
    }

    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y + 0.0
    }
}

/// Distance of an angle to the nearest multiple of `pi`.
pub fn angle_mod_pi(x: f64) -> f64 {
    let y = x.rem_euclid(PI);
    // adding 0.0 turns -0.0 into 0.0
    y.min(PI - y) + 0.0
}

/// Comparison of a computed determinant with a closed form given in polar
/// form.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    #[serde(serialize_with = "serde_complex::serialize")]
    pub value: Complex64,
    pub reference: PolarValue,
    pub modulus_ratio: f64,
    pub phase_diff: f64,
    pub phase_diff_mod_pi: f64,
    pub quadrature_error: f64,
    pub comparisons: Vec<Comparison>,
    /// Exact-phase agreement, reported but not part of the verdict.
    pub exact_phase: Comparison,
}

impl IdentityReport {
    fn new(value: Complex64, reference: PolarValue, quadrature_error: f64, spec: &QuadSpec, tol: f64) -> Self {
        let modulus_ratio = (value.norm().ln() - reference.log_modulus).exp();
        let phase_diff = wrap_angle(value.arg() - reference.phase);
        let phase_diff_mod_pi = angle_mod_pi(phase_diff);
        let comparisons = vec![
            Comparison::within("modulus_ratio", modulus_ratio, 1.0, tol),
            Comparison::within("phase_mod_pi", phase_diff_mod_pi, 0.0, tol),
            Comparison {
                name: "quadrature_rel_error".into(),
                value: quadrature_error,
                reference: 0.0,
                tolerance: spec.rel_tol.max(tol),
                verdict: Verdict::from_bool(quadrature_error <= spec.rel_tol.max(tol)),
            },
        ];
        let exact_phase = Comparison::within("exact_phase", phase_diff, 0.0, tol);
        IdentityReport { value, reference, modulus_ratio, phase_diff, phase_diff_mod_pi, quadrature_error, comparisons, exact_phase }
    }

    pub fn pass(&self) -> bool {
        self.comparisons.iter().all(Comparison::pass)
    }
}

/// Everything computed for one side.
#[derive(Clone, Debug)]
pub struct SideComputation {
    pub scaffold: Scaffold,
    pub branches: BranchAssignment,
    pub matrix: PeriodMatrix,
    pub det: Complex64,
    pub beta_fn: BetaValue,
}

impl SideComputation {
    pub fn compute(sc: Scaffold, branches: BranchAssignment, w: &WeightSystem, spec: &QuadSpec) -> Result<Self, PeriodError> {
        let matrix = period_matrix(&sc, w, &branches, spec);
        let det = matrix.determinant();
        let beta_fn = beta_function(&sc.matroid, w)?;
        Ok(SideComputation { scaffold: sc, branches, matrix, det, beta_fn })
    }

    /// `log B + sum over parallelisms (L, H^j, H^inf) of vol * log c`.
    pub fn evaluation_rhs(&self, w: &WeightSystem) -> Result<PolarValue, PeriodError> {
        let inf = self.scaffold.arrangement.len();
        let mut rhs = PolarValue { log_modulus: self.beta_fn.log, phase: 0.0 };
        for p in self.scaffold.matroid.parallelisms().iter().filter(|p| p.b == inf && p.volume > 0) {
            let flat = self.scaffold.matroid.labels_of(p.flat);
            let g = self.branches.group(p.a, &flat).ok_or_else(|| {
                PeriodError::Branch(format!("parallelism ({flat:?}, {}, {inf}) has no supported chamber", p.a))
            })?;
            let c = critical_value(g, w);
            rhs.log_modulus += p.volume as f64 * c.log_modulus;
            rhs.phase += p.volume as f64 * c.phase;
        }
        Ok(rhs)
    }

    pub fn evaluation_report(&self, w: &WeightSystem, tol: f64) -> Result<IdentityReport, PeriodError> {
        let rhs = self.evaluation_rhs(w)?;
        Ok(IdentityReport::new(self.det, rhs, self.matrix.max_rel_error, &self.matrix.spec, tol))
    }
}

pub fn build_side(d: &DualPair, w: &WeightSystem, side: Side) -> Result<Scaffold, PeriodError> {
    if w.len() != d.num_hyperplanes() {
        return Err(PeriodError::Weights(format!("expected {} weights, got {}", d.num_hyperplanes(), w.len())));
    }
    Ok(Scaffold::build(d, side, w.alphas())?)
}

/// Checks the determinant formula on one side with special branches.
pub fn verify_evaluation(d: &DualPair, w: &WeightSystem, side: Side, spec: &QuadSpec, tol: f64) -> Result<IdentityReport, PeriodError> {
    let sc = build_side(d, w, side)?;
    let ba = special_branches(&sc)?;
    SideComputation::compute(sc, ba, w, spec)?.evaluation_report(w, tol)
}

/// Special primal branches and associated dual branches.
pub fn associated_sides(d: &DualPair, w: &WeightSystem, spec: &QuadSpec) -> Result<(SideComputation, SideComputation), PeriodError> {
    let sp = build_side(d, w, Side::Primal)?;
    let sd = build_side(d, w, Side::Dual)?;
    let bp = special_branches(&sp)?;
    let bd = associated_branches(&bp, &sd)?;
    Ok((SideComputation::compute(sp, bp, w, spec)?, SideComputation::compute(sd, bd, w, spec)?))
}

/// `[prod_j e^{i pi alpha_j} Gamma(alpha_j + 1) / Gamma(sum alpha + 1)]^beta`.
pub fn main_rhs(w: &WeightSystem, beta: usize) -> PolarValue {
    let a = w.as_f64();
    let sum = w.sum_f64();
    let log = a.iter().map(|x| ln_gamma(x + 1.0)).sum::<f64>() - ln_gamma(sum + 1.0);
    PolarValue { log_modulus: beta as f64 * log, phase: beta as f64 * PI * sum }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MainReport {
    pub beta: usize,
    #[serde(serialize_with = "serde_complex::serialize")]
    pub primal_det: Complex64,
    #[serde(serialize_with = "serde_complex::serialize")]
    pub dual_det: Complex64,
    pub identity: IdentityReport,
}

impl MainReport {
    pub fn pass(&self) -> bool {
        self.identity.pass()
    }
}

/// Checks `D(primal) D(dual)` against the closed form.
pub fn verify_main(d: &DualPair, w: &WeightSystem, spec: &QuadSpec, tol: f64) -> Result<MainReport, PeriodError> {
    let (p, q) = associated_sides(d, w, spec)?;
    Ok(main_report(&p, &q, w, tol))
}

pub fn main_report(p: &SideComputation, q: &SideComputation, w: &WeightSystem, tol: f64) -> MainReport {
    let beta = p.scaffold.beta();
    let product = p.det * q.det;
    let err = p.matrix.max_rel_error.max(q.matrix.max_rel_error);
    let identity = IdentityReport::new(product, main_rhs(w, beta), err, &p.matrix.spec, tol);
    MainReport { beta, primal_det: p.det, dual_det: q.det, identity }
}

/// Exact and floating checks on critical values of dual groups:
/// `c(f^j, L) c(f_j, L^) = e^{i pi alpha_j}`, and the product over all
/// chambers of both sides equals `e^{i pi beta sum alpha}`.
pub fn check_critical_products(primal: &BranchAssignment, dual: &BranchAssignment, w: &WeightSystem) -> Check {
    let mut check = Check::new("critical_value_products");
    let inf = w.len();
    let alphas = w.as_f64();
    for g in &dual.groups {
        let flat: Vec<usize> = (0..inf).filter(|&i| i != g.j && !g.flat.contains(&i)).collect();
        let Some(p) = primal.group(g.j, &flat) else {
            check.record(false, || format!("dual group (f_{}, {:?}) has no primal partner", g.j, g.flat));
            continue;
        };
        let modulus = (&p.value * &g.value).abs();
        check.record(modulus.is_one(), || format!("|f^{0}(L) f_{0}(L^)| = {1}", g.j, format_rational(&modulus)));
        let phase = critical_value(p, w).phase + critical_value(g, w).phase;
        check.record((phase - PI * alphas[g.j]).abs() <= 1e-12, || {
            format!("phase of c c' for j = {} is {phase}, expected {}", g.j, PI * alphas[g.j])
        });
    }
    let mut phase = 0.0;
    let mut moduli = vec![Rational::one(); inf];
    for ba in [primal, dual] {
        for g in &ba.groups {
            phase += g.chambers as f64 * critical_value(g, w).phase;
            for _ in 0..g.chambers {
                moduli[g.j] *= g.value.abs();
            }
        }
    }
    let beta = primal.per_chamber.len() as f64;
    let expected = PI * beta * w.sum_f64();
    check.record(moduli.iter().all(One::is_one), || "double product of moduli is not 1".into());
    check.record((phase - expected).abs() <= 1e-12 * expected.abs().max(1.0), || {
        format!("double product phase {phase}, expected {expected}")
    });
    check
}

/// Checks the product formula for the beta functions of the two sides.
pub fn check_beta_product(d: &DualPair, w: &WeightSystem) -> Result<Comparison, PeriodError> {
    let m = d.matroid(Side::Primal)?;
    let md = d.matroid(Side::Dual)?;
    let lhs = beta_function(&m, w)?.log + beta_function(&md, w)?.log;
    let rhs = main_rhs(w, m.beta() as usize).log_modulus;
    Ok(Comparison::within("beta_product_log", lhs, rhs, 1e-10 * rhs.abs().max(1.0)))
}

/// Mask of the set `J - (X + {j, inf})`.
pub fn dual_flat_mask(flat: &[usize], j: usize, inf: usize) -> u64 {
    let rest: Vec<usize> = (0..inf).filter(|&i| i != j && !flat.contains(&i)).collect();
    mask_of(&rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{rat, ratio};

    fn example1() -> DualPair {
        DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, -1, -2, 1]]), 1).unwrap()
    }

    fn weights(v: &[(i64, i64)]) -> WeightSystem {
        WeightSystem::new(v.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    #[test]
    fn weight_system_validation() {
        assert!(WeightSystem::new(vec![rat(1), rat(0)]).is_err());
        let w = weights(&[(1, 2), (1, 3), (1, 1)]);
        assert_eq!(w.alpha_infinity(), ratio(-11, 6));
        assert_eq!(w.of_set(&[0, 3]), ratio(-4, 3));
    }

    #[test]
    fn example1_branches_and_critical_values() {
        let d = example1();
        let w = weights(&[(1, 1), (1, 1), (1, 1)]);
        let sc = build_side(&d, &w, Side::Primal).unwrap();
        let ba = special_branches(&sc).unwrap();
        let g = ba.group(1, &[0]).unwrap();
        assert!(g.half_turn);
        assert_eq!(g.value, rat(-1));
        let g3 = ba.group(2, &[0]).unwrap();
        assert_eq!(g3.value, rat(-2));
        let c = critical_value(g3, &w);
        assert!((c.log_modulus - 2f64.ln()).abs() < 1e-15 && (c.phase - PI).abs() < 1e-15);
        assert!(ba.groups.iter().filter(|g| g.j == 0).all(|g| !g.half_turn));
        let sd = build_side(&d, &w, Side::Dual).unwrap();
        let bd = associated_branches(&ba, &sd).unwrap();
        assert!(check_critical_products(&ba, &bd, &w).passed);
    }

    #[test]
    fn beta_function_examples() {
        let d = example1();
        let m = d.matroid(Side::Primal).unwrap();
        let w = weights(&[(1, 1), (1, 1), (1, 1)]);
        let b = beta_function(&m, &w).unwrap();
        assert!((b.log - (1.0f64 / 6.0).ln()).abs() < 1e-14);
        let w = weights(&[(1, 2), (3, 2), (5, 4)]);
        let b = beta_function(&m, &w).unwrap();
        let expected = ln_gamma(1.5) + ln_gamma(2.5) + ln_gamma(2.25) - ln_gamma(4.25);
        assert!((b.log - expected).abs() < 1e-13);
        assert!(check_beta_product(&d, &w).unwrap().pass());
    }

    #[test]
    fn example1_period_matrix_entries() {
        // alpha = (1, 1, 1): entry over (0, 1) with phi = dx / (x - 1) and
        // |x (x - 1) (x - 2)| e^{i pi (alpha_2 + alpha_3)}, oriented leftwards
        let d = example1();
        let w = weights(&[(1, 1), (1, 1), (1, 1)]);
        let sc = build_side(&d, &w, Side::Primal).unwrap();
        let ba = special_branches(&sc).unwrap();
        let pm = period_matrix(&sc, &w, &ba, &QuadSpec::default());
        assert!(pm.converged);
        // int_0^1 x (x - 2) dx = -2/3, sign of 1/(x-1) is -1, |.| form gives
        // int x (2 - x) = 2/3 times (-1), orientation -1, phase e^{2 pi i} = 1
        let expected = 2.0 / 3.0;
        assert!((pm.entries[0][0].re - expected).abs() < 1e-12, "{:?}", pm.entries);
        let det = pm.determinant();
        let rhs = SideComputation::compute(sc, ba, &w, &QuadSpec::default()).unwrap().evaluation_rhs(&w).unwrap();
        assert!((det.norm().ln() - rhs.log_modulus).abs() < 1e-10);
    }

    #[test]
    fn example1_main_identity() {
        let d = example1();
        let w = weights(&[(1, 1), (1, 1), (1, 1)]);
        let r = verify_main(&d, &w, &QuadSpec::default(), 1e-8).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!((r.identity.reference.log_modulus - (1.0f64 / 36.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn angle_helpers() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!(angle_mod_pi(PI - 1e-9) < 2e-9);
        assert!(angle_mod_pi(-1e-9) < 2e-9);
    }
}
