//! End-to-end acceptance run. Prints one line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dualperiods::betakbc::random_bijection;
use dualperiods::check::Check;
use dualperiods::dualpair::{random_pair, DualPair, Side};
use dualperiods::exactla::{rat, ratio, ExactMatrix, Rational};
use dualperiods::matroid::{combinations, verify_duality_suite, Matroid};
use dualperiods::periods::{build_side, period_matrix, special_branches, verify_evaluation, verify_main, WeightSystem};
use dualperiods::quadrature::QuadSpec;
use dualperiods::verify;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pairs(seed: u64, count: usize) -> Vec<DualPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = [(1, 2), (2, 1), (2, 2)];
    (0..count).map(|i| random_pair(&mut rng, shapes[i % 3].0, shapes[i % 3].1, 3)).collect()
}

fn random_weights(rng: &mut ChaCha8Rng, pool: &[Rational], n: usize) -> WeightSystem {
    WeightSystem::new((0..n).map(|_| pool.choose(rng).expect("nonempty").clone()).collect()).unwrap()
}

fn example1() -> DualPair {
    DualPair::from_matrix(ExactMatrix::from_i64(&[&[1, 1, 1, 0], &[0, -1, -2, 1]]), 1).unwrap()
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let w = WeightSystem::new(vec![rat(1); 3]).unwrap();
    let r = verify_main(&example1(), &w, &QuadSpec::default(), 1e-8).unwrap();
    let elapsed = start.elapsed();
    // (Gamma(2)^3 / Gamma(4))^2 with Gamma(2) = 1 and Gamma(4) = 6
    let expected = 1.0 / 36.0;
    let product = r.primal_det * r.dual_det;
    let rel = (product.norm() - expected).abs() / expected;
    let phase = r.identity.phase_diff_mod_pi.abs();
    Outcome {
        pass: rel <= 1e-8 && phase <= 1e-8 && elapsed < Duration::from_secs(5),
        detail: format!("|D D'| = {:.15}, relative error {rel:.2e}, phase mod pi {phase:.2e}, {elapsed:.2?}", product.norm()),
    }
}

fn evaluation_outcome(label: &str, cases: &[(DualPair, WeightSystem, Vec<Side>)], budget: Duration) -> Outcome {
    let start = Instant::now();
    let spec = QuadSpec::default();
    let mut worst_mod: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    let mut runs = 0;
    let mut failures = Vec::new();
    for (i, (d, w, sides)) in cases.iter().enumerate() {
        for &side in sides {
            runs += 1;
            match verify_evaluation(d, w, side, &spec, 1e-6) {
                Ok(r) => {
                    let m = (r.modulus_ratio - 1.0).abs();
                    worst_mod = worst_mod.max(m);
                    worst_phase = worst_phase.max(r.phase_diff_mod_pi);
                    if m > 1e-6 || r.phase_diff_mod_pi > 1e-6 {
                        failures.push(format!("{label} {i} {side}: ratio {} phase {}", r.modulus_ratio, r.phase_diff_mod_pi));
                    }
                }
                Err(e) => failures.push(format!("{label} {i} {side}: {e}")),
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: failures.is_empty() && elapsed < budget,
        detail: format!(
            "{runs} evaluations, worst |ratio - 1| {worst_mod:.2e}, worst phase mod pi {worst_phase:.2e}, {elapsed:.2?}{}",
            if failures.is_empty() { String::new() } else { format!(", failures: {}", failures.join("; ")) }
        ),
    }
}

fn criterion2() -> Outcome {
    let pool: Vec<Rational> = (5..=12).map(|p| ratio(p, 4)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases: Vec<_> = pairs(20, 20)
        .into_iter()
        .map(|d| {
            let w = random_weights(&mut rng, &pool, d.num_hyperplanes());
            (d, w, vec![Side::Primal, Side::Dual])
        })
        .collect();
    evaluation_outcome("pair", &cases, Duration::from_secs(300))
}

fn criterion3() -> Outcome {
    let pool = vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = vec![(example1(), WeightSystem::new(pool.clone()).unwrap(), vec![Side::Primal])];
    for n in [1, 2, 3] {
        for _ in 0..3 {
            let d = random_pair(&mut rng, 1, n, 3);
            let w = random_weights(&mut rng, &pool, d.num_hyperplanes());
            cases.push((d, w, vec![Side::Primal]));
        }
    }
    // the dual side of a pair with n = 1 is a line
    for _ in 0..3 {
        let d = random_pair(&mut rng, 2, 1, 3);
        let w = random_weights(&mut rng, &pool, d.num_hyperplanes());
        cases.push((d, w, vec![Side::Dual]));
    }
    evaluation_outcome("1d", &cases, Duration::from_secs(300))
}

/// Tutte coefficients from the corank-nullity expansion, with ranks taken
/// directly from column subsets.
fn brute_force_tutte(m: &ExactMatrix) -> Vec<Vec<i64>> {
    let n = m.cols();
    let r = m.rank();
    let mut coeffs = vec![vec![0i64; n + 1]; n + 1];
    let binom = |a: usize, b: usize| -> i64 {
        (0..b).fold(BigInt::from(1), |acc, i| acc * BigInt::from(a - i) / BigInt::from(i + 1)).to_i64().unwrap()
    };
    for size in 0..=n {
        for s in combinations(n, size) {
            let rs = m.column_rank(&s);
            let (p, q) = (r - rs, size - rs);
            // (x - 1)^p (y - 1)^q
            for i in 0..=p {
                for j in 0..=q {
                    let sign = if (p - i + q - j) % 2 == 0 { 1 } else { -1 };
                    coeffs[i][j] += sign * binom(p, i) * binom(q, j);
                }
            }
        }
    }
    coeffs
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut checks = 0;
    for case in 0..200 {
        let rows = rng.random_range(1..=4);
        let cols = rng.random_range(rows..=10);
        let data: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.random_range(-2..=2)).collect()).collect();
        let refs: Vec<&[i64]> = data.iter().map(Vec::as_slice).collect();
        let a = ExactMatrix::from_i64(&refs);
        let m = Matroid::from_columns(&a).unwrap();
        let t = m.tutte();
        let oracle = brute_force_tutte(&a);
        for (i, row) in oracle.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                checks += 1;
                if t.coeff(i, j) as i64 != c {
                    failures.push(format!("matrix {case}: b{i}{j} = {} vs {c}", t.coeff(i, j)));
                }
            }
        }
        for c in verify_duality_suite(&m).checks {
            checks += c.cases;
            if !c.passed {
                failures.push(format!("matrix {case}: {} ({})", c.name, c.failure.unwrap_or_default()));
            }
        }
    }
    Outcome { pass: failures.is_empty(), detail: summary(checks, &failures) }
}

fn summary(checks: usize, failures: &[String]) -> String {
    let head: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
    format!("{checks} checks, {} failures{}", failures.len(), if head.is_empty() { String::new() } else { format!(": {}", head.join("; ")) })
}

fn run_checks(results: Vec<Result<Vec<Check>, dualperiods::Error>>, label: usize, checks: &mut usize, failures: &mut Vec<String>) {
    for r in results {
        match r {
            Ok(cs) => {
                for c in cs {
                    *checks += c.cases;
                    if !c.passed {
                        failures.push(format!("pair {label}: {} ({})", c.name, c.failure.unwrap_or_default()));
                    }
                }
            }
            Err(e) => failures.push(format!("pair {label}: {e}")),
        }
    }
}

fn criterion5(pairs: &[DualPair]) -> Outcome {
    let (mut checks, mut failures) = (0, Vec::new());
    for (i, d) in pairs.iter().enumerate() {
        run_checks(vec![verify::geometry_checks(d)], i, &mut checks, &mut failures);
    }
    Outcome { pass: failures.is_empty(), detail: summary(checks, &failures) }
}

fn criterion6(pairs: &[DualPair]) -> Outcome {
    let pool: Vec<Rational> = (5..=12).map(|p| ratio(p, 4)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checks, mut failures) = (0, Vec::new());
    for (i, d) in pairs.iter().enumerate() {
        let w = random_weights(&mut rng, &pool, d.num_hyperplanes());
        run_checks(
            vec![
                verify::minor_checks(d),
                Ok(verify::plucker_checks(d)),
                verify::weak_checks(d),
                verify::branch_checks(d, &w),
            ],
            i,
            &mut checks,
            &mut failures,
        );
    }
    Outcome { pass: failures.is_empty(), detail: summary(checks, &failures) }
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = WeightSystem::new(vec![ratio(3, 2), ratio(5, 4), rat(2), ratio(7, 4), ratio(5, 2)]).unwrap();
    // a planar instance with several bounded chambers
    let sc = loop {
        let d = random_pair(&mut rng, 2, 2, 3);
        let sc = build_side(&d, &w, Side::Primal).unwrap();
        if sc.beta() >= 4 {
            break sc;
        }
    };
    let spec = QuadSpec::default();
    let ba = special_branches(&sc).unwrap();
    let base = period_matrix(&sc, &w, &ba, &spec).determinant();
    let mut worst: f64 = 0.0;
    let mut distinct = BTreeSet::new();
    for _ in 0..10 {
        let bij = random_bijection(&sc.adjacency, sc.chambers.len(), &mut rng).unwrap();
        distinct.insert(bij.clone());
        let other = sc.with_bijection(bij).unwrap();
        let det = period_matrix(&other, &w, &ba, &spec).determinant();
        let ratio = det / base;
        worst = worst.max((det.norm() - base.norm()).abs() / base.norm());
        worst = worst.max((ratio.re.abs() - 1.0).abs() + ratio.im.abs());
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("beta {}, {} distinct matchings, worst deviation from +-det {worst:.2e}", sc.beta(), distinct.len()),
    }
}

fn main() -> ExitCode {
    let shared = pairs(56, 60);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("example end-to-end, D D' = 1/36", Box::new(criterion1)),
        ("evaluation on 20 random pairs", Box::new(criterion2)),
        ("singular exponents in 1D", Box::new(criterion3)),
        ("matroid property suite on 200 matrices", Box::new(criterion4)),
        ("geometry cross-checks", Box::new(|| criterion5(&shared))),
        ("exact duality identities", Box::new(|| criterion6(&shared))),
        ("rematching changes det only in sign", Box::new(criterion7)),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!("criterion {} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
