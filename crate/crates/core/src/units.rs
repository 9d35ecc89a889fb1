//! Unit constants and display conversion. Money is carried in base rupees.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const LITERS_PER_TONNE: f64 = 1_000.0;
pub const RUPEES_PER_LAKH: f64 = 1e5;
pub const RUPEES_PER_CRORE: f64 = 1e7;
/// Lactation length used to turn daily into lactation yields.
pub const DEFAULT_LACTATION_DAYS: f64 = 305.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurrencyUnit {
    Rupees,
    Lakh,
    #[default]
    Crore,
}

impl CurrencyUnit {
    pub fn rupees_per_unit(self) -> f64 {
        match self {
            CurrencyUnit::Rupees => 1.0,
            CurrencyUnit::Lakh => RUPEES_PER_LAKH,
            CurrencyUnit::Crore => RUPEES_PER_CRORE,
        }
    }

    pub fn from_rupees(self, rupees: f64) -> f64 {
        rupees / self.rupees_per_unit()
    }

    pub fn label(self) -> &'static str {
        match self {
            CurrencyUnit::Rupees => "₹",
            CurrencyUnit::Lakh => "₹ lakh",
            CurrencyUnit::Crore => "₹ crores",
        }
    }
}

impl fmt::Display for CurrencyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurrencyUnit::Rupees => "rupees",
            CurrencyUnit::Lakh => "lakh",
            CurrencyUnit::Crore => "crore",
        })
    }
}

impl FromStr for CurrencyUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rupees" | "rupee" | "inr" => Ok(CurrencyUnit::Rupees),
            "lakh" | "lakhs" => Ok(CurrencyUnit::Lakh),
            "crore" | "crores" => Ok(CurrencyUnit::Crore),
            other => Err(format!("unknown currency unit `{other}`")),
        }
    }
}

/// Lactation yield from a daily average.
pub fn derive_lactation_yield(daily_yield: f64, lactation_days: f64) -> f64 {
    daily_yield * lactation_days
}
