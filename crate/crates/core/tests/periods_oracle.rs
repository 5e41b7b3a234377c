//! Period matrices against oracles that share no code with the quadrature
//! path: exact polynomial integration for integer weights, and a
//! substitution plus composite Simpson rule on a line.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dualperiods::dualpair::{random_pair, DualPair, Side};
use dualperiods::exactla::{rat, ratio, to_f64, ExactMatrix, Rational};
use dualperiods::periods::{build_side, period_matrix, special_branches, WeightSystem};
use dualperiods::quadrature::QuadSpec;

/// Polynomial in barycentric coordinates `lambda_0..lambda_k`.
type Poly = BTreeMap<Vec<u32>, Rational>;

fn mul(p: &Poly, q: &Poly) -> Poly {
    let mut out = Poly::new();
    for (a, x) in p {
        for (b, y) in q {
            let e: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
            *out.entry(e).or_insert_with(Rational::zero) += x * y;
        }
    }
    out
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, i| acc * rat(i as i64))
}

/// `int_simplex prod lambda_i^{a_i} = k! vol prod a_i! / (sum a_i + k)!`.
fn integrate(p: &Poly, k: u32, volume: &Rational) -> Rational {
    p.iter().fold(Rational::zero(), |acc, (a, c)| {
        let num = a.iter().fold(Rational::one(), |x, &e| x * factorial(e));
        acc + c * &num * factorial(k) * volume / factorial(a.iter().sum::<u32>() + k)
    })
}

/// Exact entries of the period matrix for integer weights.
fn exact_periods(d: &DualPair, w: &WeightSystem, side: Side) -> Vec<Vec<Rational>> {
    let sc = build_side(d, w, side).unwrap();
    let ba = special_branches(&sc).unwrap();
    let arr = &sc.arrangement;
    let k = arr.dim;
    let alphas: Vec<u32> = w.alphas().iter().map(|a| a.to_integer().to_u32().unwrap()).collect();
    let mut out = Vec::new();
    for s in 0..sc.beta() {
        let ci = sc.bijection[s];
        let c = &sc.chambers[ci];
        let pts: Vec<&Vec<Rational>> = c.vertices.iter().map(|v| &v.point).collect();
        let simplices = fan(&pts, k);
        let phase = if (0..arr.len()).filter(|&j| ba.per_chamber[ci][j]).map(|j| alphas[j]).sum::<u32>() % 2 == 0 {
            rat(1)
        } else {
            rat(-1)
        };
        let mut row = Vec::new();
        for form in &sc.forms {
            let mut entry = Rational::zero();
            for t in &form.terms {
                let mut term = Rational::zero();
                for simplex in &simplices {
                    let vol = simplex_volume(simplex);
                    let mut p: Poly = [(vec![0; k + 1], rat(1))].into_iter().collect();
                    for (j, f) in arr.forms.iter().enumerate() {
                        let e = alphas[j] - t.hyperplanes.contains(&j) as u32;
                        // |f| = sign * f on the chamber, affine in barycentrics
                        let sign = rat(c.signs[j] as i64);
                        let lin: Poly = (0..=k)
                            .map(|i| {
                                let mut ex = vec![0; k + 1];
                                ex[i] = 1;
                                (ex, &sign * f.eval(simplex[i]))
                            })
                            .collect();
                        for _ in 0..e {
                            p = mul(&p, &lin);
                        }
                    }
                    term += integrate(&p, k as u32, &vol);
                }
                let sign: i64 = t.hyperplanes.iter().map(|&j| c.signs[j] as i64).product();
                entry += &t.coeff * rat(sign) * term;
            }
            row.push(entry * rat(sc.orientations[s] as i64) * &phase);
        }
        out.push(row);
    }
    out
}

fn simplex_volume(s: &[&Vec<Rational>]) -> Rational {
    let rows: Vec<Vec<Rational>> = s[1..].iter().map(|p| p.iter().zip(s[0]).map(|(a, b)| a - b).collect()).collect();
    let k = rows.len();
    ExactMatrix::from_rows(rows).unwrap().determinant().unwrap().abs() / factorial(k as u32)
}

/// Triangulation of a convex polytope of dimension at most 2 from its
/// vertex list.
fn fan<'a>(pts: &[&'a Vec<Rational>], k: usize) -> Vec<Vec<&'a Vec<Rational>>> {
    match k {
        1 => vec![vec![pts[0], pts[1]]],
        2 => {
            // the other vertices seen from a vertex of a convex polygon span
            // less than a half-turn, so cross products order them
            let o = pts[0];
            let mut rest: Vec<&Vec<Rational>> = pts[1..].to_vec();
            let cross = |a: &Vec<Rational>, b: &Vec<Rational>| {
                (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
            };
            rest.sort_by(|a, b| {
                let c = cross(a, b);
                if c.is_positive() {
                    std::cmp::Ordering::Less
                } else if c.is_negative() {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            });
            rest.windows(2).map(|w| vec![o, w[0], w[1]]).collect()
        }
        _ => panic!("oracle handles dimensions 1 and 2"),
    }
}

fn compare(d: &DualPair, w: &WeightSystem, side: Side) {
    let exact = exact_periods(d, w, side);
    let sc = build_side(d, w, side).unwrap();
    let ba = special_branches(&sc).unwrap();
    let pm = period_matrix(&sc, w, &ba, &QuadSpec::default());
    for (i, row) in exact.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let z = pm.entries[i][j];
            let e = to_f64(e);
            assert!(z.im.abs() <= 1e-12 * e.abs().max(1.0), "entry ({i},{j}) = {z}, expected real {e}");
            assert!((z.re - e).abs() <= 1e-11 * e.abs().max(1e-3), "entry ({i},{j}) = {}, exact {e}", z.re);
        }
    }
}

#[test]
fn planar_instance_integer_weights() {
    let d = DualPair::from_matrix(
        ExactMatrix::from_i64(&[&[1, 0, -1, 1, 0, 2], &[0, 1, -1, 2, 1, -1], &[0, 0, 1, -3, 1, 1]]),
        2,
    )
    .unwrap();
    let w = WeightSystem::new(vec![rat(1), rat(2), rat(1), rat(1), rat(2)]).unwrap();
    compare(&d, &w, Side::Primal);
}

#[test]
fn random_pairs_integer_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (k, n) in [(1, 2), (2, 1), (2, 2), (1, 1)] {
        for _ in 0..3 {
            let d = random_pair(&mut rng, k, n, 3);
            let w = WeightSystem::new((0..d.num_hyperplanes()).map(|j| rat(1 + (j % 2) as i64)).collect()).unwrap();
            for side in [Side::Primal, Side::Dual] {
                if d.dim(side) <= 2 {
                    compare(&d, &w, side);
                }
            }
        }
    }
}

/// `int_0^1 x^{1/2} (1 - x)^{-1/2} (2 - x)^{1/2} dx` after `x = sin^2 t`.
fn half_integral_oracle() -> f64 {
    let f = |t: f64| {
        let s = t.sin();
        2.0 * s * s * (2.0 - s * s).sqrt()
    };
    let (a, b, n) = (0.0, std::f64::consts::FRAC_PI_2, 20_000);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn singular_line_entry() {
    // three points 0, 1, 2 on a line, all weights 1/2; the entry over (0, 1)
    // of the form alpha_1 dx / (x - 1)
    let d = DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, -1, -2, 1]]), 1).unwrap();
    let w = WeightSystem::new(vec![ratio(1, 2); 3]).unwrap();
    let sc = build_side(&d, &w, Side::Primal).unwrap();
    let ba = special_branches(&sc).unwrap();
    let pm = period_matrix(&sc, &w, &ba, &QuadSpec::default());
    let s = sc.bijection.iter().position(|&c| sc.chambers[c].sign_string() == "+--").unwrap();
    let t = sc.bases.iter().position(|b| b.hyperplanes == vec![1]).unwrap();
    assert!(pm.converged);
    let value = pm.entries[s][t].norm();
    let oracle = 0.5 * half_integral_oracle();
    assert!((value - oracle).abs() < 1e-10 * oracle, "{value} vs {oracle}");
}
