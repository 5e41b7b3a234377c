//! Tensor Gauss-Jacobi quadrature on the unit cube for integrands of the
//! form `prod_l v_l^{e_l} h(v)` with `h` smooth, plus the collapsed-cube map
//! onto a simplex.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadSpec {
    /// Points per dimension of the main rule.
    pub degree: usize,
    /// Maximum bisection depth of the adaptive refinement.
    pub max_subdiv: usize,
    /// Target relative error.
    pub rel_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { degree: 32, max_subdiv: 6, rel_tol: 1e-10 }
    }
}

/// Nodes and weights on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss rule for the weight `v^e` on `[0, 1]`, `e > -1`, by
/// Golub-Welsch on the Jacobi matrix with parameters `(0, e)`.
pub fn gauss_jacobi(n: usize, e: f64) -> Rule {
    assert!(n >= 1 && e > -1.0, "invalid Gauss-Jacobi request n = {n}, e = {e}");
    let (a, b) = (0.0f64, e);
    let ab = a + b;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        jm[(i, i)] = if i == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
        };
        if i + 1 < n {
            let k = k + 1.0;
            let num = 4.0 * k * (k + a) * (k + b) * (k + ab);
            let den = (2.0 * k + ab).powi(2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
            let off = (num / den).sqrt();
            jm[(i, i + 1)] = off;
            jm[(i + 1, i)] = off;
        }
    }
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(ab + 2.0);
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            // map x in [-1, 1] to v = (1 + x) / 2; weight picks up 2^{-e-1}
            let w = (ln_mu0 - (e + 1.0) * std::f64::consts::LN_2).exp() * v0 * v0;
            ((1.0 + x) / 2.0, w)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

/// Memoized rules keyed on point count and exponent.
#[derive(Default)]
pub struct RuleCache {
    rules: HashMap<(usize, u64), Rule>,
}

impl RuleCache {
    pub fn get(&mut self, n: usize, e: f64) -> &Rule {
        self.rules.entry((n, e.to_bits())).or_insert_with(|| gauss_jacobi(n, e))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

fn lower_degree(n: usize) -> usize {
    (2 * n / 3).max(2)
}

/// Tensor rule on the box `[lo, hi]` for `prod v_l^{e_l} h(v)`. Dimensions
/// whose box touches 0 use the Jacobi weight; others fold `v^e` into the
/// integrand and use Legendre points.
fn box_rule<F: Fn(&[f64]) -> f64>(n: usize, lo: &[f64], hi: &[f64], exps: &[f64], h: &F, cache: &mut RuleCache) -> f64 {
    let k = lo.len();
    let mut axes: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(k);
    for l in 0..k {
        let width = hi[l] - lo[l];
        if lo[l] == 0.0 {
            let r = cache.get(n, exps[l]);
            let scale = width.powf(exps[l] + 1.0);
            axes.push((r.nodes.iter().map(|u| width * u).collect(), r.weights.iter().map(|w| w * scale).collect()));
        } else {
            let r = cache.get(n, 0.0);
            let nodes: Vec<f64> = r.nodes.iter().map(|u| lo[l] + width * u).collect();
            let weights = r.weights.iter().zip(&nodes).map(|(w, v)| w * width * v.powf(exps[l])).collect();
            axes.push((nodes, weights));
        }
    }
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; k];
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for l in 0..k {
            point[l] = axes[l].0[idx[l]];
            w *= axes[l].1[idx[l]];
        }
        sum += w * h(&point);
        let mut l = 0;
        while l < k {
            idx[l] += 1;
            if idx[l] < n {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
        if l == k {
            return sum;
        }
    }
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    depth: usize,
    value: f64,
    error: f64,
}

/// Globally adaptive integration of `prod_l v_l^{e_l} h(v)` over `[0,1]^k`:
/// the cell with the largest error estimate is bisected in every dimension
/// until the total estimate meets the relative target or every such cell
/// has reached the depth limit.
pub fn integrate_cube<F: Fn(&[f64]) -> f64>(exps: &[f64], h: F, spec: &QuadSpec, cache: &mut RuleCache) -> Estimate {
    let k = exps.len();
    let n = spec.degree;
    let m = lower_degree(n);
    let eval = |lo: Vec<f64>, hi: Vec<f64>, depth: usize, cache: &mut RuleCache| {
        let fine = box_rule(n, &lo, &hi, exps, &h, cache);
        let coarse = box_rule(m, &lo, &hi, exps, &h, cache);
        Cell { lo, hi, depth, value: fine, error: (fine - coarse).abs() }
    };
    if k == 0 {
        return Estimate { value: h(&[]), error: 0.0, converged: true };
    }
    let mut cells = vec![eval(vec![0.0; k], vec![1.0; k], 0, cache)];
    loop {
        let total: f64 = cells.iter().map(|c| c.value).sum();
        let error: f64 = cells.iter().map(|c| c.error).sum();
        if error <= spec.rel_tol * total.abs() || error == 0.0 {
            return Estimate { value: total, error, converged: true };
        }
        let worst = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.depth < spec.max_subdiv)
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Estimate { value: total, error, converged: false };
        };
        let cell = cells.swap_remove(i);
        for corner in 0..(1usize << k) {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            for l in 0..k {
                let mid = 0.5 * (cell.lo[l] + cell.hi[l]);
                if corner >> l & 1 == 0 {
                    hi[l] = mid;
                } else {
                    lo[l] = mid;
                }
            }
            cells.push(eval(lo, hi, cell.depth + 1, cache));
        }
    }
}

/// Barycentric coordinates of the collapsed-cube map onto the simplex with
/// vertices `p_0, ..., p_k`: `lambda_0 = 1 - v_1`, `lambda_i = s_i (1 - v_{i+1})`,
/// `lambda_k = s_k` where `s_i = v_1 ... v_i`.
pub fn collapsed_barycentric(v: &[f64]) -> Vec<f64> {
    let k = v.len();
    let mut out = Vec::with_capacity(k + 1);
    let mut s = 1.0;
    for i in 0..=k {
        let next = if i < k { v[i] } else { 0.0 };
        out.push(s * (1.0 - next));
        s *= next;
    }
    out
}

/// `t_m(v)` for values `f_i` of an affine function at `p_i`:
/// `t_k = f_k`, `t_i = f_i (1 - v_{i+1}) + v_{i+1} t_{i+1}`. The affine
/// function equals `s_m t_m` on the simplex.
pub fn collapsed_tail(values: &[f64], v: &[f64], m: usize) -> f64 {
    let k = v.len();
    let mut t = values[k];
    for i in (m..k).rev() {
        t = values[i] * (1.0 - v[i]) + v[i] * t;
    }
    t
}
