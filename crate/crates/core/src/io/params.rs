//! Scenario parameter documents.
//!
//! A document is TOML with this shape (every key not listed is rejected):
//!
//! ```toml
//! scenario = "haryana"
//!
//! [market]                    # optional; needed for surplus and sweeps
//! supply_elasticity = 0.019
//! demand_elasticity = -1.035  # sign is ignored
//! success_rate = 0.9          # optional, default 0.9
//! pooled_milk_loss_tonnes = 154499.27   # optional; default is the pooled-mode loss
//!
//! [sweep]                     # optional
//! rates = [0.2, 0.4, 0.6]
//! basis = "pooled"            # or "sum-of-groups" (default)
//!
//! [[group]]
//! label = "cows"
//! total_animals = 485603      # optional
//! prop_in_milk = 0.73         # optional
//! in_milk = 354490.19         # optional when both of the above are given
//! morbid = 99399.05           # counts, or ...
//! deaths = 6629
//! # mf_incidence = 0.28       # ... rates
//! # case_fatality = 0.067
//! daily_yield = 8.92          # with lactation_days (default 305), or
//! # lactation_yield = 2720.6
//! affected_days_frac = 0.02
//! yield_reduction_frac = 0.80
//! milk_price = 30
//! animal_value = 53333
//! treatment_cost_per_case = 2882
//! prevention_cost_per_animal = 540   # optional, default 0
//!
//! [group.market]              # optional
//! base_quantity_tonnes = 252390      # or base_quantity_liters, or production_days
//! milk_loss_tonnes = 22675           # optional override of the computed loss
//!
//! [group.provenance]          # optional free-text notes per field
//! morbid = "sample incidence applied to the in-milk population"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::loss::{check_fraction, check_nonnegative, derive_rates, GroupParameters};
use crate::surplus::{MarketParameters, DEFAULT_SUCCESS_RATE};
use crate::units::{derive_lactation_yield, DEFAULT_LACTATION_DAYS, LITERS_PER_TONNE};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    scenario: String,
    #[serde(default)]
    market: Option<RawMarket>,
    #[serde(default)]
    sweep: Option<RawSweep>,
    #[serde(rename = "group", default)]
    groups: Vec<RawGroup>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarket {
    supply_elasticity: f64,
    demand_elasticity: f64,
    success_rate: Option<f64>,
    pooled_milk_loss_liters: Option<f64>,
    pooled_milk_loss_tonnes: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    rates: Vec<f64>,
    basis: Option<SweepBasis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    label: String,
    total_animals: Option<f64>,
    prop_in_milk: Option<f64>,
    in_milk: Option<f64>,
    morbid: Option<f64>,
    deaths: Option<f64>,
    mf_incidence: Option<f64>,
    case_fatality: Option<f64>,
    daily_yield: Option<f64>,
    lactation_days: Option<f64>,
    lactation_yield: Option<f64>,
    affected_days_frac: f64,
    yield_reduction_frac: f64,
    milk_price: f64,
    animal_value: f64,
    treatment_cost_per_case: f64,
    prevention_cost_per_animal: Option<f64>,
    market: Option<RawGroupMarket>,
    #[serde(default)]
    provenance: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroupMarket {
    base_quantity_liters: Option<f64>,
    base_quantity_tonnes: Option<f64>,
    production_days: Option<f64>,
    milk_loss_liters: Option<f64>,
    milk_loss_tonnes: Option<f64>,
}

/// Which gain the adoption sweep scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepBasis {
    #[default]
    SumOfGroups,
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSettings {
    pub supply_elasticity: f64,
    pub demand_elasticity_abs: f64,
    pub success_rate: f64,
    /// Milk loss for the pooled market, litres; defaults to the pooled-mode loss.
    pub pooled_milk_loss_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub rates: Vec<f64>,
    pub basis: SweepBasis,
}

/// Per-group market inputs, quantities in litres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMarket {
    pub base_quantity: f64,
    /// Replaces the computed milk loss in the surplus model when set.
    pub milk_loss_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub params: GroupParameters,
    pub market: Option<GroupMarket>,
    pub provenance: BTreeMap<String, String>,
}

impl GroupSpec {
    pub fn market_parameters(&self, settings: &MarketSettings) -> Option<MarketParameters> {
        self.market.as_ref().map(|m| MarketParameters {
            supply_elasticity: settings.supply_elasticity,
            demand_elasticity_abs: settings.demand_elasticity_abs,
            base_price: self.params.milk_price,
            base_quantity: m.base_quantity,
            success_rate: settings.success_rate,
        })
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDocument {
    pub scenario: String,
    pub groups: Vec<GroupSpec>,
    pub market: Option<MarketSettings>,
    pub sweep: Option<SweepSettings>,
    /// SHA-256 of the document's canonical JSON form.
    pub input_hash: String,
}

impl ParameterDocument {
    pub fn group(&self, label: &str) -> Option<&GroupSpec> {
        self.groups.iter().find(|g| g.params.label == label)
    }

    pub fn group_parameters(&self) -> Vec<GroupParameters> {
        self.groups.iter().map(|g| g.params.clone()).collect()
    }
}

pub fn read_parameters(path: impl AsRef<Path>) -> Result<ParameterDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_parameters(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Hash of the document's content, independent of key order and layout.
pub fn canonical_hash(text: &str) -> Result<String> {
    let value: toml::Value = toml::from_str(text).map_err(|e| parse_error(&e))?;
    let canonical = serde_json::to_value(&value).map_err(|e| Error::Parse {
        path: "<parameters>".into(),
        message: e.to_string(),
    })?;
    // serde_json maps are ordered by key.
    let bytes = serde_json::to_vec(&canonical).expect("JSON values always serialize");
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn parse_error(e: &toml::de::Error) -> Error {
    Error::Parse {
        path: "<parameters>".into(),
        message: e.to_string(),
    }
}

pub fn parse_parameters(text: &str) -> Result<ParameterDocument> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| parse_error(&e))?;
    let input_hash = canonical_hash(text)?;
    if raw.scenario.trim().is_empty() {
        return Err(Error::validation("scenario", "must not be empty"));
    }
    if raw.groups.is_empty() {
        return Err(Error::validation(
            "group",
            "at least one [[group]] is required",
        ));
    }

    let mut groups = Vec::with_capacity(raw.groups.len());
    for (i, g) in raw.groups.into_iter().enumerate() {
        let spec = validate_group(g, &format!("group[{i}]"))?;
        if groups
            .iter()
            .any(|o: &GroupSpec| o.params.label == spec.params.label)
        {
            return Err(Error::validation(
                format!("group[{i}].label"),
                format!("duplicate label `{}`", spec.params.label),
            ));
        }
        groups.push(spec);
    }

    let market = raw
        .market
        .map(|m| {
            let e = m.supply_elasticity;
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::validation(
                    "market.supply_elasticity",
                    format!("{e} must be positive"),
                ));
            }
            let eta = m.demand_elasticity.abs();
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::validation(
                    "market.demand_elasticity",
                    format!("{} must be nonzero", m.demand_elasticity),
                ));
            }
            let success_rate = m.success_rate.unwrap_or(DEFAULT_SUCCESS_RATE);
            check_fraction("market.success_rate", success_rate)?;
            let pooled_milk_loss_override =
                match (m.pooled_milk_loss_liters, m.pooled_milk_loss_tonnes) {
                    (Some(l), None) => Some(l),
                    (None, Some(t)) => Some(t * LITERS_PER_TONNE),
                    (None, None) => None,
                    _ => {
                        return Err(Error::validation(
                            "market.pooled_milk_loss_liters",
                            "give pooled_milk_loss_liters or pooled_milk_loss_tonnes, not both",
                        ))
                    }
                };
            if let Some(l) = pooled_milk_loss_override {
                check_nonnegative("market.pooled_milk_loss", l)?;
            }
            Ok(MarketSettings {
                supply_elasticity: e,
                demand_elasticity_abs: eta,
                success_rate,
                pooled_milk_loss_override,
            })
        })
        .transpose()?;

    let sweep = raw
        .sweep
        .map(|s| {
            for (i, &r) in s.rates.iter().enumerate() {
                check_fraction(&format!("sweep.rates[{i}]"), r)?;
            }
            Ok::<_, Error>(SweepSettings {
                rates: s.rates,
                basis: s.basis.unwrap_or_default(),
            })
        })
        .transpose()?;
    if sweep.is_some() && market.is_none() {
        return Err(Error::validation("sweep", "a sweep needs a [market] block"));
    }

    Ok(ParameterDocument {
        scenario: raw.scenario,
        groups,
        market,
        sweep,
        input_hash,
    })
}

fn validate_group(g: RawGroup, path: &str) -> Result<GroupSpec> {
    let field = |name: &str| format!("{path}.{name}");
    let nonneg = |name: &str, v: f64| check_nonnegative(&field(name), v);
    let fraction = |name: &str, v: f64| check_fraction(&field(name), v);

    if let Some(t) = g.total_animals {
        nonneg("total_animals", t)?;
    }
    if let Some(p) = g.prop_in_milk {
        fraction("prop_in_milk", p)?;
    }
    let in_milk = match (g.in_milk, g.total_animals, g.prop_in_milk) {
        (Some(a), _, _) => a,
        (None, Some(t), Some(p)) => t * p,
        _ => {
            return Err(Error::validation(
                field("in_milk"),
                "give in_milk, or both total_animals and prop_in_milk",
            ))
        }
    };
    nonneg("in_milk", in_milk)?;

    let (mf_incidence, case_fatality) = match (g.morbid, g.deaths, g.mf_incidence, g.case_fatality)
    {
        (Some(morbid), Some(deaths), None, None) => {
            let rates = derive_rates(morbid, deaths, in_milk).map_err(|e| match e {
                Error::Validation { field: f, message } => Error::Validation {
                    field: field(&f),
                    message,
                },
                other => other,
            })?;
            (rates.incidence, rates.case_fatality)
        }
        (None, None, Some(p_mf), Some(p_d)) => (p_mf, p_d),
        _ => {
            return Err(Error::validation(
                field("morbid"),
                "give either morbid and deaths, or mf_incidence and case_fatality",
            ))
        }
    };

    let lactation_yield = match (g.lactation_yield, g.daily_yield) {
        (Some(y), _) => y,
        (None, Some(daily)) => {
            let days = g.lactation_days.unwrap_or(DEFAULT_LACTATION_DAYS);
            nonneg("daily_yield", daily)?;
            if !(days > 0.0) {
                return Err(Error::validation(
                    field("lactation_days"),
                    format!("{days} must be positive"),
                ));
            }
            derive_lactation_yield(daily, days)
        }
        (None, None) => {
            return Err(Error::validation(
                field("lactation_yield"),
                "give lactation_yield or daily_yield",
            ));
        }
    };

    let params = GroupParameters {
        label: g.label,
        total_animals: g.total_animals,
        prop_in_milk: g.prop_in_milk,
        in_milk,
        mf_incidence,
        case_fatality,
        daily_yield: g.daily_yield,
        lactation_yield,
        affected_days_frac: g.affected_days_frac,
        yield_reduction_frac: g.yield_reduction_frac,
        milk_price: g.milk_price,
        animal_value: g.animal_value,
        treatment_cost_per_case: g.treatment_cost_per_case,
        prevention_cost_per_animal: g.prevention_cost_per_animal.unwrap_or(0.0),
    };
    params.validate().map_err(|e| match e {
        Error::Validation { field: f, message } => Error::Validation {
            field: format!("{path}.{}", f.rsplit('.').next().unwrap_or(&f)),
            message,
        },
        other => other,
    })?;

    let market = g
        .market
        .map(|m| {
            let base_quantity = match (m.base_quantity_liters, m.base_quantity_tonnes, m.production_days) {
                (Some(l), None, None) => l,
                (None, Some(t), None) => t * LITERS_PER_TONNE,
                (None, None, Some(days)) => {
                    let daily = params.daily_yield.ok_or_else(|| {
                        Error::validation(field("market.production_days"), "needs daily_yield")
                    })?;
                    params.in_milk * daily * days
                }
                _ => {
                    return Err(Error::validation(
                        field("market"),
                        "give exactly one of base_quantity_liters, base_quantity_tonnes, production_days",
                    ))
                }
            };
            if !(base_quantity.is_finite() && base_quantity > 0.0) {
                return Err(Error::validation(field("market.base_quantity"), format!("{base_quantity} must be positive")));
            }
            let milk_loss_override = match (m.milk_loss_liters, m.milk_loss_tonnes) {
                (Some(l), None) => Some(l),
                (None, Some(t)) => Some(t * LITERS_PER_TONNE),
                (None, None) => None,
                _ => {
                    return Err(Error::validation(
                        field("market.milk_loss_liters"),
                        "give milk_loss_liters or milk_loss_tonnes, not both",
                    ))
                }
            };
            if let Some(l) = milk_loss_override {
                check_nonnegative(&field("market.milk_loss"), l)?;
            }
            Ok(GroupMarket {
                base_quantity,
                milk_loss_override,
            })
        })
        .transpose()?;

    Ok(GroupSpec {
        params,
        market,
        provenance: g.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "t"

[[group]]
label = "cows"
in_milk = 107
morbid = 30
deaths = 2
daily_yield = 10.06
affected_days_frac = 0.02
yield_reduction_frac = 0.8
milk_price = 30
animal_value = 53333
treatment_cost_per_case = 2882
"#;

    #[test]
    fn minimal_document() {
        let doc = parse_parameters(MINIMAL).unwrap();
        let g = &doc.groups[0].params;
        assert!((g.lactation_yield - 3068.3).abs() < 1e-9);
        assert!((g.mf_incidence - 30.0 / 107.0).abs() < 1e-15);
        assert!(doc.market.is_none());
    }

    #[test]
    fn success_rate_defaults() {
        let text =
            format!("{MINIMAL}\n[market]\nsupply_elasticity = 0.019\ndemand_elasticity = -1.035\n");
        let doc = parse_parameters(&text).unwrap();
        let m = doc.market.unwrap();
        assert_eq!(m.success_rate, 0.9);
        assert_eq!(m.demand_elasticity_abs, 1.035);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("milk_price = 30", "milk_price = 30\ncolour = \"red\"");
        let err = parse_parameters(&text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn negative_price_names_field() {
        let text = MINIMAL.replace("milk_price = 30", "milk_price = -30");
        match parse_parameters(&text).unwrap_err() {
            Error::Validation { field, .. } => assert_eq!(field, "group[0].milk_price"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rates_and_counts_are_exclusive() {
        let text = MINIMAL.replace("deaths = 2", "deaths = 2\nmf_incidence = 0.2");
        assert!(parse_parameters(&text).is_err());
    }

    #[test]
    fn death_count_above_cases() {
        let text = MINIMAL.replace("deaths = 2", "deaths = 40");
        match parse_parameters(&text).unwrap_err() {
            Error::Validation { field, .. } => assert_eq!(field, "group[0].deaths/morbid"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_layout_and_order() {
        let reordered = r#"scenario="t"
[[group]]
treatment_cost_per_case=2882
animal_value=53333
milk_price=30
yield_reduction_frac=0.8
affected_days_frac=0.02
daily_yield=10.06
deaths=2
morbid=30
in_milk=107
label="cows"
"#;
        assert_eq!(
            canonical_hash(MINIMAL).unwrap(),
            canonical_hash(reordered).unwrap()
        );
        let changed = MINIMAL.replace("deaths = 2", "deaths = 3");
        assert_ne!(
            canonical_hash(MINIMAL).unwrap(),
            canonical_hash(&changed).unwrap()
        );
    }
}
