use dualperiods_demo::{arrangement_json, main_identity_json, periods_json, random_json};
use serde_json::Value;

const EXAMPLE: &str = r#"{"k": 1, "B": [["1", "1", "1", "0"], ["0", "-1", "-2", "1"]], "alpha": ["1", "1", "1"]}"#;

#[test]
fn arrangement_of_example() {
    let v: Value = serde_json::from_str(&arrangement_json(EXAMPLE, "primal").unwrap()).unwrap();
    assert_eq!(v["beta"], 2);
    assert_eq!(v["chambers"].as_array().unwrap().len(), 2);
    assert_eq!(v["forms"][1]["constant"], -1.0);
}

#[test]
fn planar_outline_is_counterclockwise() {
    let input = random_json(2, 2, 11);
    let v: Value = serde_json::from_str(&arrangement_json(&input, "primal").unwrap()).unwrap();
    for c in v["chambers"].as_array().unwrap() {
        let pts: Vec<(f64, f64)> =
            c["outline"].as_array().unwrap().iter().map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap())).collect();
        let area: f64 = (0..pts.len())
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
                a.0 * b.1 - a.1 * b.0
            })
            .sum();
        assert!(area > 0.0);
    }
}

#[test]
fn periods_and_main_identity() {
    let v: Value = serde_json::from_str(&periods_json(EXAMPLE, "dual", 24).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    let v: Value = serde_json::from_str(&main_identity_json(EXAMPLE).unwrap()).unwrap();
    assert!((v["reference"].as_f64().unwrap() - 1.0 / 36.0).abs() < 1e-15);
    assert_eq!(v["pass"], true);
}

#[test]
fn errors_are_reported() {
    assert!(arrangement_json("{}", "primal").is_err());
    assert!(arrangement_json(EXAMPLE, "sideways").is_err());
}
