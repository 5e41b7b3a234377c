//! WebAssembly bindings for the browser page in `www/`. Every exported
//! function takes a pair description as JSON and returns JSON text.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use dualperiods::dualpair::{random_pair, Side};
use dualperiods::exactla::to_f64;
use dualperiods::periods::{build_side, special_branches, verify_main, SideComputation};
use dualperiods::quadrature::QuadSpec;
use dualperiods::{Error, PairInput};

fn side_of(name: &str) -> Result<Side, Error> {
    name.parse().map_err(|_| Error::Input(format!("unknown side {name:?}")))
}

/// Forms, vertices and bounded chambers of one side, in floating point for
/// drawing. Chamber outlines are listed counterclockwise in the plane.
pub fn arrangement_json(input: &str, side: &str) -> Result<String, Error> {
    let input = PairInput::from_json(input)?;
    let d = input.pair()?;
    let w = input.weights(d.num_hyperplanes())?;
    let sc = build_side(&d, &w, side_of(side)?)?;
    let arr = &sc.arrangement;
    let forms: Vec<Value> = arr
        .forms
        .iter()
        .map(|f| json!({ "grad": f.grad.iter().map(to_f64).collect::<Vec<_>>(), "constant": to_f64(&f.constant) }))
        .collect();
    let mut chambers = Vec::new();
    for (s, b) in sc.bases.iter().enumerate() {
        let c = &sc.chambers[sc.bijection[s]];
        let mut pts: Vec<Vec<f64>> = c.vertices.iter().map(|v| v.point.iter().map(to_f64).collect()).collect();
        if arr.dim == 2 {
            let n = pts.len() as f64;
            let (cx, cy) = (pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n);
            pts.sort_by(|p, q| (p[1] - cy).atan2(p[0] - cx).total_cmp(&(q[1] - cy).atan2(q[0] - cx)));
        }
        chambers.push(json!({
            "signs": c.sign_string(),
            "outline": pts,
            "basis": b.hyperplanes,
            "orientation": sc.orientations[s],
        }));
    }
    Ok(json!({ "dim": arr.dim, "beta": sc.beta(), "forms": forms, "chambers": chambers }).to_string())
}

/// Period matrix of one side with special branches, and its comparison with
/// the closed form.
pub fn periods_json(input: &str, side: &str, degree: usize) -> Result<String, Error> {
    let input = PairInput::from_json(input)?;
    let d = input.pair()?;
    let w = input.weights(d.num_hyperplanes())?;
    let sc = build_side(&d, &w, side_of(side)?)?;
    let ba = special_branches(&sc)?;
    let spec = QuadSpec { degree, ..QuadSpec::default() };
    let comp = SideComputation::compute(sc, ba, &w, &spec)?;
    let report = comp.evaluation_report(&w, 1e-6)?;
    Ok(json!({
        "entries": comp.matrix.entries.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "rows": comp.matrix.row_chambers,
        "columns": comp.matrix.col_forms,
        "determinant": [comp.det.re, comp.det.im],
        "modulusRatio": report.modulus_ratio,
        "phaseModPi": report.phase_diff_mod_pi,
        "pass": report.pass(),
    })
    .to_string())
}

/// Product of the primal and dual determinants against the Gamma closed form.
pub fn main_identity_json(input: &str) -> Result<String, Error> {
    let input = PairInput::from_json(input)?;
    let d = input.pair()?;
    let w = input.weights(d.num_hyperplanes())?;
    let r = verify_main(&d, &w, &QuadSpec::default(), 1e-6)?;
    let product = r.primal_det * r.dual_det;
    Ok(json!({
        "beta": r.beta,
        "primal": [r.primal_det.re, r.primal_det.im],
        "dual": [r.dual_det.re, r.dual_det.im],
        "product": [product.re, product.im],
        "reference": r.identity.reference.to_complex().norm(),
        "modulusRatio": r.identity.modulus_ratio,
        "phaseModPi": r.identity.phase_diff_mod_pi,
        "pass": r.pass(),
    })
    .to_string())
}

/// A random admissible pair with unit weights.
pub fn random_json(k: usize, n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_pair(&mut rng, k, n, 3);
    let alpha = vec!["1".to_string(); d.num_hyperplanes()];
    let mut input = PairInput::from_pair(&d, None);
    input.alpha = Some(alpha);
    serde_json::to_string(&input).expect("serializable")
}

fn js(r: Result<String, Error>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn arrangement(input: &str, side: &str) -> Result<String, JsError> {
    js(arrangement_json(input, side))
}

#[wasm_bindgen]
pub fn periods(input: &str, side: &str, degree: usize) -> Result<String, JsError> {
    js(periods_json(input, side, degree))
}

#[wasm_bindgen(js_name = mainIdentity)]
pub fn main_identity(input: &str) -> Result<String, JsError> {
    js(main_identity_json(input))
}

#[wasm_bindgen(js_name = randomPair)]
pub fn random_pair_js(k: usize, n: usize, seed: u64) -> String {
    random_json(k, n, seed)
}
