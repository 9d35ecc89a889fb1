//! Survey records, incidence summaries, the parity × species logit, predictive
//! margins and trial power.

mod logit;
mod margins;
mod power;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use logit::{
    fit_design_matrix, fit_logit, log_likelihood, log_likelihood_gradient, DesignTerm,
    FactorialDesign, LogitFit, LogitSpec, MatrixFit,
};
pub use margins::{margin_at, predictive_margins, MarginEstimate, MarginFactor, MarginLevel};
pub use power::{minimum_detectable_effect, required_sample_size, PowerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Buffalo,
    Cow,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::Buffalo, Species::Cow];

    pub fn as_str(self) -> &'static str {
        match self {
            Species::Buffalo => "buffalo",
            Species::Cow => "cow",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Species {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "buffalo" | "buffaloes" => Ok(Species::Buffalo),
            "cow" | "cows" => Ok(Species::Cow),
            other => Err(format!("unknown species `{other}`")),
        }
    }
}

/// Lactation order, binned to 2, 3, 4 and 5+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Parity(u8);

impl Parity {
    pub const MIN: u8 = 2;
    pub const MAX: u8 = 5;

    /// Values above five fall into the `5+` bin.
    pub fn new(order: u32) -> Result<Self> {
        if order < u32::from(Self::MIN) {
            return Err(Error::validation(
                "parity",
                format!("{order} is below the minimum lactation order {}", Self::MIN),
            ));
        }
        Ok(Parity(order.min(u32::from(Self::MAX)) as u8))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u32> for Parity {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Parity::new(value)
    }
}

impl From<Parity> for u32 {
    fn from(p: Parity) -> u32 {
        u32::from(p.0)
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One surveyed animal's previous-lactation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub animal_id: String,
    pub species: Species,
    pub parity: Parity,
    pub mf_case: bool,
    /// Deaths are only recorded among cases.
    pub died: bool,
    pub peak_yield_prev: f64,
    pub peak_yield_curr: f64,
    pub herd_size: u32,
    pub green_fodder: f64,
    pub dry_fodder: f64,
    pub concentrate: f64,
    pub mineral_mix: f64,
    pub fodder_area: f64,
    pub labor: u32,
    pub milk_price: f64,
    pub animal_value: f64,
    pub treatment_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSummary {
    pub species: Species,
    pub animals: usize,
    pub cases: usize,
    pub deaths: usize,
    /// Cases per animal.
    pub morbidity: f64,
    /// Deaths per animal.
    pub mortality: f64,
    /// Deaths per case; `None` without cases.
    pub case_fatality: Option<f64>,
}

pub fn summarize_incidence(
    records: &[SurveyRecord],
    species: &[Species],
) -> Result<Vec<IncidenceSummary>> {
    species
        .iter()
        .map(|&s| {
            let group: Vec<_> = records.iter().filter(|r| r.species == s).collect();
            if group.is_empty() {
                return Err(Error::validation("species", format!("no records for {s}")));
            }
            let animals = group.len();
            let cases = group.iter().filter(|r| r.mf_case).count();
            let deaths = group.iter().filter(|r| r.died).count();
            Ok(IncidenceSummary {
                species: s,
                animals,
                cases,
                deaths,
                morbidity: cases as f64 / animals as f64,
                mortality: deaths as f64 / animals as f64,
                case_fatality: (cases > 0).then(|| deaths as f64 / cases as f64),
            })
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn parity_bins_above_five() {
        assert_eq!(Parity::new(7).unwrap().get(), 5);
        assert_eq!(Parity::new(3).unwrap().get(), 3);
        assert!(Parity::new(1).is_err());
    }

    #[test]
    fn summary_of_sample_like_counts() {
        let mut records = from_cells(&[(Species::Cow, 2, 107, 30), (Species::Buffalo, 3, 105, 20)]);
        for r in records.iter_mut().filter(|r| r.mf_case).take(2) {
            r.died = true;
        }
        let buffalo_deaths = records
            .iter_mut()
            .filter(|r| r.species == Species::Buffalo && r.mf_case)
            .take(2);
        for r in buffalo_deaths {
            r.died = true;
        }
        let s = summarize_incidence(&records, &Species::ALL).unwrap();
        let cow = s.iter().find(|x| x.species == Species::Cow).unwrap();
        assert!((cow.morbidity - 0.2804).abs() < 1e-4);
        assert!((cow.case_fatality.unwrap() - 0.0667).abs() < 1e-4);
        let buf = s.iter().find(|x| x.species == Species::Buffalo).unwrap();
        assert!((buf.morbidity - 0.1905).abs() < 1e-4);
        assert_eq!(buf.case_fatality, Some(0.1));
    }

    #[test]
    fn summary_without_cases() {
        let records = from_cells(&[(Species::Cow, 2, 10, 0)]);
        let s = summarize_incidence(&records, &[Species::Cow]).unwrap();
        assert_eq!(s[0].morbidity, 0.0);
        assert_eq!(s[0].case_fatality, None);
        assert!(summarize_incidence(&records, &[Species::Buffalo]).is_err());
    }
}
