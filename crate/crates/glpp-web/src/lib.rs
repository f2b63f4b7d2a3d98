//! Browser bindings: exact law, simulation and quarter-plane growth, each
//! returning JSON or SVG text for the static page in `www/`.

use glpp::chain::{simulate_discrete_with, SimConfig};
use glpp::exact::stationary_law;
use glpp::growth::{grow_quarter_plane, shape_profile, ShapeReference};
use glpp::measures::{parse_family, FamilyKind, Law, MeasureFamily};
use glpp::GlppError;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: GlppError) -> JsError {
    JsError::new(&e.to_string())
}

fn discrete(family: &str) -> Result<MeasureFamily, GlppError> {
    parse_family(family)?.build()?.discrete()
}

/// Exact ν_L for an integrable family, as JSON.
#[wasm_bindgen]
pub fn exact_law(l: usize, family: &str, cap: u32) -> Result<String, JsError> {
    let fam = discrete(family).map_err(js)?;
    if fam.kind() != FamilyKind::Integrable {
        return Err(JsError::new("the exact law needs an integrable family"));
    }
    let law = stationary_law(l, &fam, u64::from(cap), 1e-8).map_err(js)?;
    Ok(law.to_json().to_string())
}

/// Runs the front-line chain and returns the summary JSON.
#[wasm_bindgen]
pub fn simulate(l: usize, family: &str, steps: u32, seed: u32) -> Result<String, JsError> {
    let fam = discrete(family).map_err(js)?;
    let cfg = SimConfig::new(u64::from(steps), u64::from(seed));
    let summary = simulate_discrete_with(l, &fam, &cfg).and_then(|t| t.summary()).map_err(js)?;
    Ok(serde_json::to_string(&summary).expect("summary serializes"))
}

/// Grows an n x n quarter-plane box up to time `until` and returns
/// {"svg": ..., "sup_deviation": ...}.
#[wasm_bindgen]
pub fn quarter_plane(n: usize, family: &str, until: u32, seed: u32) -> Result<String, JsError> {
    let spec = parse_family(family).map_err(js)?;
    let fam = spec.build().and_then(|f| f.discrete()).map_err(js)?;
    let reference = match (fam.kind(), spec.base_law()) {
        (FamilyKind::Constant | FamilyKind::Integrable, Ok((Law::Geometric { p }, _))) => Some(ShapeReference::Geometric { p }),
        _ => None,
    };
    let field = grow_quarter_plane(n, &fam, u64::from(until), u64::from(seed)).map_err(js)?;
    let profile = shape_profile(&field, u64::from(until), reference);
    Ok(json!({ "svg": profile.to_svg(), "sup_deviation": profile.sup_deviation }).to_string())
}
