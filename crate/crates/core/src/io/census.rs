//! Census figures shipped with the crate.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::LITERS_PER_TONNE;

const BUNDLED: &str = include_str!("../../data/census.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub title: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusGroup {
    pub label: String,
    pub female_animals: f64,
    pub prop_in_milk: f64,
    /// Litres per in-milk animal per day.
    pub daily_yield: f64,
    pub milk_production_tonnes: f64,
}

impl CensusGroup {
    pub fn in_milk(&self) -> f64 {
        self.female_animals * self.prop_in_milk
    }

    pub fn milk_production_liters(&self) -> f64 {
        self.milk_production_tonnes * LITERS_PER_TONNE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub name: String,
    #[serde(rename = "group")]
    pub groups: Vec<CensusGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Census {
    pub sources: BTreeMap<String, Source>,
    #[serde(rename = "region")]
    pub regions: Vec<Region>,
}

impl Census {
    pub fn bundled() -> Self {
        parse_census(BUNDLED).expect("bundled census data is valid")
    }

    pub fn group(&self, region: &str, label: &str) -> Option<&CensusGroup> {
        self.regions
            .iter()
            .find(|r| r.name == region)?
            .groups
            .iter()
            .find(|g| g.label == label)
    }
}

pub fn parse_census(text: &str) -> Result<Census> {
    let census: Census = toml::from_str(text).map_err(|e| Error::Parse {
        path: "<census>".into(),
        message: e.to_string(),
    })?;
    for r in &census.regions {
        for g in &r.groups {
            let field = |f: &str| format!("{}.{}.{f}", r.name, g.label);
            crate::loss::check_nonnegative(&field("female_animals"), g.female_animals)?;
            crate::loss::check_fraction(&field("prop_in_milk"), g.prop_in_milk)?;
            crate::loss::check_nonnegative(&field("daily_yield"), g.daily_yield)?;
            crate::loss::check_nonnegative(
                &field("milk_production_tonnes"),
                g.milk_production_tonnes,
            )?;
        }
    }
    Ok(census)
}

pub fn read_census(path: impl AsRef<Path>) -> Result<Census> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_census(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_haryana() {
        let c = Census::bundled();
        let cows = c.group("haryana", "cows").unwrap();
        assert!((cows.in_milk() - 354_490.19).abs() < 1e-6);
        let buf = c.group("haryana", "buffaloes").unwrap();
        assert!((buf.in_milk() - 1_990_986.48).abs() < 1e-6);
        assert!(c.sources.values().all(|s| s.url.starts_with("https://")));
    }
}
