//! WebAssembly bindings for the browser page in `www/`.
//!
//! Every export takes file contents as strings and returns either text for
//! display or an error message.

use wasm_bindgen::prelude::*;

use elgot::algebra::build_stream_system;
use elgot::format::{parse_system, parse_tree};
use elgot::load::{parse_algebra, LoadedAlgebra};
use elgot::rational::unfold;
use elgot::ElgotAlgebra;
use serde_json::json;

/// The tree unfolded to `depth` and its minimal tree file, as JSON
/// `{"unfolded", "minimized", "states", "original_states"}`.
#[wasm_bindgen]
pub fn explore_tree(tree: &str, depth: usize) -> Result<String, String> {
    let t = parse_tree("tree", tree).map_err(|e| e.to_string())?;
    let m = t.minimize();
    Ok(json!({
        "unfolded": unfold(&t, depth).to_string(),
        "minimized": m.to_string(),
        "states": m.state_count(),
        "original_states": t.state_count(),
    })
    .to_string())
}

/// `x = value` lines for the solution of `system` in `algebra`.
#[wasm_bindgen]
pub fn solve(system: &str, algebra: &str) -> Result<String, String> {
    let alg = parse_algebra("algebra", algebra).map_err(|e| e.to_string())?;
    let sys = parse_system("system", system).map_err(|e| e.to_string())?;
    let sol = alg.solve(&sys).map_err(|e| e.to_string())?;
    Ok(sol.iter().map(|(x, v)| format!("{x} = {v}\n")).collect())
}

/// Iterates of the stream system for `prefix·cycle^ω` in a metric algebra,
/// as JSON `{"vars": [...], "iterates": [[...], ...]}`. Elements are
/// comma-separated numbers.
#[wasm_bindgen]
pub fn stream_trace(algebra: &str, prefix: &str, cycle: &str, op: &str) -> Result<String, String> {
    let LoadedAlgebra::Banach(alg) = parse_algebra("algebra", algebra).map_err(|e| e.to_string())? else {
        return Err("stream traces need a `metric` algebra".into());
    };
    let numbers = |s: &str| -> Result<Vec<f64>, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| format!("`{t}` is not a number")))
            .collect()
    };
    let e = build_stream_system(alg.signature(), &numbers(prefix)?, &numbers(cycle)?, op).map_err(|e| e.to_string())?;
    let iterates = alg.trace(&e).map_err(|e| e.to_string())?;
    let vars: Vec<String> = e.vars().map(ToString::to_string).collect();
    Ok(json!({ "vars": vars, "iterates": iterates }).to_string())
}
