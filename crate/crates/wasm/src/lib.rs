//! Browser bindings. Every export returns a JSON string so the page needs no
//! generated type definitions; the `*_json` functions are the same logic
//! without the JS error type, for native tests.

use milkfever::incidence::{minimum_detectable_effect, PowerSpec};
use milkfever::io::{build_bundle, parse_parameters, render_losses};
use milkfever::surplus::{adoption_sweep, evaluate, MarketParameters, SweepPoint};
use milkfever::units::{CurrencyUnit, LITERS_PER_TONNE};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// The bundled state scenario, for prefilling the editor.
pub const DEFAULT_PARAMS: &str = include_str!("../../core/data/haryana.params");

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn default_params() -> String {
    DEFAULT_PARAMS.to_string()
}

/// Loss breakdown per group plus both totals, for a parameter document.
#[wasm_bindgen]
pub fn losses(params: &str, unit: &str) -> Result<String, JsError> {
    to_js(losses_json(params, unit))
}

pub fn losses_json(params: &str, unit: &str) -> Result<String, String> {
    let unit: CurrencyUnit = unit.parse()?;
    let doc = parse_parameters(params).map_err(|e| e.to_string())?;
    let bundle = build_bundle(&doc, None).map_err(|e| e.to_string())?;
    let scale = unit.rupees_per_unit();
    let columns: Vec<_> = bundle
        .losses
        .iter()
        .chain([&bundle.sum_of_groups, &bundle.pooled])
        .map(|l| {
            json!({
                "label": l.label,
                "milk_loss_tonnes": l.milk_loss_tonnes(),
                "milk_value_loss": l.milk_value_loss / scale,
                "treatment_cost": l.treatment_cost / scale,
                "mortality_loss": l.mortality_loss / scale,
                "total": l.total / scale,
            })
        })
        .collect();
    let p = &bundle.prevention;
    Ok(json!({
        "scenario": bundle.metadata.scenario,
        "unit": unit.label(),
        "columns": columns,
        "prevention": {
            "total_cost": p.total_cost / scale,
            "loss_to_cost": p.loss_to_cost,
        },
        "table": render_losses(&bundle, unit),
    })
    .to_string())
}

#[derive(Serialize)]
struct SurplusCurve {
    supply_shift: f64,
    price_reduction: f64,
    pct_supply_change: f64,
    full_gain_crore: f64,
    curve: Vec<SweepPoint>,
}

/// Gain at full adoption and the adoption curve for one market, in crores.
#[wasm_bindgen]
pub fn surplus_curve(
    supply_elasticity: f64,
    demand_elasticity: f64,
    price: f64,
    base_quantity_tonnes: f64,
    milk_loss_tonnes: f64,
    success_rate: f64,
    steps: u32,
) -> Result<String, JsError> {
    to_js(surplus_curve_json(
        supply_elasticity,
        demand_elasticity,
        price,
        base_quantity_tonnes,
        milk_loss_tonnes,
        success_rate,
        steps,
    ))
}

pub fn surplus_curve_json(
    supply_elasticity: f64,
    demand_elasticity: f64,
    price: f64,
    base_quantity_tonnes: f64,
    milk_loss_tonnes: f64,
    success_rate: f64,
    steps: u32,
) -> Result<String, String> {
    let m = MarketParameters {
        supply_elasticity,
        demand_elasticity_abs: demand_elasticity.abs(),
        base_price: price,
        base_quantity: base_quantity_tonnes * LITERS_PER_TONNE,
        success_rate,
    };
    let r = evaluate(&m, milk_loss_tonnes * LITERS_PER_TONNE).map_err(|e| e.to_string())?;
    let full = CurrencyUnit::Crore.from_rupees(r.delta_ps);
    let steps = steps.max(1);
    let rates: Vec<f64> = (0..=steps)
        .map(|i| f64::from(i) / f64::from(steps))
        .collect();
    let curve = adoption_sweep(full, &rates).map_err(|e| e.to_string())?;
    serde_json::to_string(&SurplusCurve {
        supply_shift: r.supply_shift,
        price_reduction: r.price_reduction,
        pct_supply_change: r.pct_supply_change,
        full_gain_crore: full,
        curve,
    })
    .map_err(|e| e.to_string())
}

/// Minimum detectable effect at `points` sample sizes spread over `[n_min, n_max]`.
#[wasm_bindgen]
pub fn mde_curve(
    t_alpha: f64,
    t_power: f64,
    treat_prop: f64,
    variance: f64,
    n_min: u32,
    n_max: u32,
    points: u32,
) -> Result<String, JsError> {
    to_js(mde_curve_json(
        t_alpha, t_power, treat_prop, variance, n_min, n_max, points,
    ))
}

pub fn mde_curve_json(
    t_alpha: f64,
    t_power: f64,
    treat_prop: f64,
    variance: f64,
    n_min: u32,
    n_max: u32,
    points: u32,
) -> Result<String, String> {
    if n_max < n_min {
        return Err(format!("n_max {n_max} is below n_min {n_min}"));
    }
    let points = points.max(2);
    let span = f64::from(n_max - n_min);
    let mut out = Vec::with_capacity(points as usize);
    let mut last = None;
    for i in 0..points {
        let n = (f64::from(n_min) + span * f64::from(i) / f64::from(points - 1)).round() as u64;
        if last == Some(n) {
            continue;
        }
        last = Some(n);
        let spec = PowerSpec {
            t_power,
            t_alpha,
            treat_prop,
            variance,
            n,
        };
        let mde = minimum_detectable_effect(&spec).map_err(|e| e.to_string())?;
        out.push(json!({ "n": n, "mde": mde }));
    }
    Ok(serde_json::Value::Array(out).to_string())
}
