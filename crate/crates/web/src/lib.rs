//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and are callable from native code.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cqsr_core::css::css_defect;
use cqsr_core::estimation::optimal_mean_fidelity;
use cqsr_core::mub::mub_as_css;
use cqsr_core::protocol::{run_session, InputSpec, SessionConfig, StateSetSpec};
use cqsr_core::symspace::dim_sym;

/// Largest copy number the page may request.
pub const MAX_COPIES: usize = 12;
/// Largest trial count the page may request.
pub const MAX_TRIALS: u64 = 2_000_000;

#[derive(Serialize)]
struct CurvePoint {
    copies: usize,
    optimal: f64,
    sym_dim: u64,
}

#[derive(Serialize)]
struct DefectRow {
    copies: usize,
    defect: f64,
    is_css: bool,
}

fn check_copies(max_copies: usize) -> Result<(), String> {
    if max_copies == 0 || max_copies > MAX_COPIES {
        return Err(format!("copies must be in 1..={MAX_COPIES}"));
    }
    Ok(())
}

/// `(M+1)/(M+d)` for `M = 1..=max_copies`.
pub fn fidelity_curve_json(d: usize, max_copies: usize) -> Result<String, String> {
    check_copies(max_copies)?;
    if d == 0 {
        return Err("dimension must be at least 1".into());
    }
    let points = (1..=max_copies)
        .map(|m| {
            Ok(CurvePoint {
                copies: m,
                optimal: optimal_mean_fidelity(d, m),
                sym_dim: dim_sym(d, m).map_err(|e| e.to_string())?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(serde_json::to_string(&points).expect("serializable"))
}

/// Defect of the MUB set at `M = 1..=max_copies`.
pub fn mub_defect_table_json(d: usize, max_copies: usize) -> Result<String, String> {
    check_copies(max_copies)?;
    let set = mub_as_css(d).map_err(|e| e.to_string())?;
    let rows = (1..=max_copies)
        .map(|m| {
            let r = css_defect(&set, m).map_err(|e| e.to_string())?;
            Ok(DefectRow {
                copies: m,
                defect: r.defect,
                is_css: r.is_css,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(serde_json::to_string(&rows).expect("serializable"))
}

/// One session with the MUB set and a Haar-random input.
pub fn simulate_json(
    d: usize,
    copies: usize,
    users: usize,
    trials: u64,
    seed: u64,
) -> Result<String, String> {
    check_copies(copies)?;
    if trials > MAX_TRIALS {
        return Err(format!("at most {MAX_TRIALS} trials"));
    }
    let cfg = SessionConfig {
        dimension: d,
        copies,
        users,
        trials,
        seed,
        state_set: StateSetSpec::Mub(d),
        input: InputSpec::Haar,
    };
    let report = run_session(&cfg).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&report).expect("serializable"))
}

#[wasm_bindgen]
pub fn fidelity_curve(d: usize, max_copies: usize) -> Result<String, JsValue> {
    fidelity_curve_json(d, max_copies).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mub_defect_table(d: usize, max_copies: usize) -> Result<String, JsValue> {
    mub_defect_table_json(d, max_copies).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(
    d: usize,
    copies: usize,
    users: usize,
    trials: u32,
    seed: u32,
) -> Result<String, JsValue> {
    simulate_json(d, copies, users, u64::from(trials), u64::from(seed))
        .map_err(|e| JsValue::from_str(&e))
}
