// Success paths only: building a JsError needs a JavaScript host.

use glpp_web::{exact_law, quarter_plane, simulate};
use serde_json::Value;

fn parse(r: Result<String, wasm_bindgen::JsError>) -> Value {
    let text = r.unwrap_or_else(|_| panic!("operation failed"));
    serde_json::from_str(&text).unwrap()
}

#[test]
fn exact_law_split() {
    let law = parse(exact_law(2, "geometric:0.5", 60));
    assert!((law["nu"]["+-+-"]["p"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((law["nu"]["++--"]["p"].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn simulation_is_seeded() {
    let a = parse(simulate(2, "poisson:1", 20_000, 4));
    assert_eq!(a, parse(simulate(2, "poisson:1", 20_000, 4)));
    assert_eq!(a["bridge_marginal"].as_object().unwrap().len(), 6);
}

#[test]
fn quarter_plane_has_reference_overlay() {
    let q = parse(quarter_plane(200, "constant(geometric:0.5)", 300, 1));
    assert!(q["svg"].as_str().unwrap().starts_with("<svg"));
    assert!(q["sup_deviation"].as_f64().unwrap() < 0.5);
    let none = parse(quarter_plane(200, "constant(poisson:2)", 300, 1));
    assert!(none["sup_deviation"].is_null());
}
