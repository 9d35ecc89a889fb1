//! Average adjusted predictions with delta-method standard errors.
//!
//! For a level `ℓ` the margin is `m(ℓ) = N⁻¹ Σᵢ Λ(xᵢ(ℓ)ᵀβ)` where `xᵢ(ℓ)` is
//! record `i` with the factor forced to `ℓ`. Its gradient is
//! `N⁻¹ Σᵢ Λ(1 − Λ) xᵢ(ℓ)` and `Var m ≈ gᵀ Σ g`.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::logit::sigmoid;
use super::{LogitFit, Parity, Species, SurveyRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginFactor {
    Parity,
    Species,
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginLevel {
    Parity(Parity),
    Species(Species),
    Cell(Parity, Species),
}

impl fmt::Display for MarginLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginLevel::Parity(p) => write!(f, "parity {p}"),
            MarginLevel::Species(s) => write!(f, "{s}"),
            MarginLevel::Cell(p, s) => write!(f, "parity {p} # {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginEstimate {
    pub level: MarginLevel,
    pub margin: f64,
    pub std_err: f64,
    pub z: f64,
    /// Two-sided normal p-value.
    pub p_value: f64,
}

fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub fn margin_at(
    fit: &LogitFit,
    records: &[SurveyRecord],
    level: MarginLevel,
) -> Result<MarginEstimate> {
    if records.is_empty() {
        return Err(Error::Empty("survey records"));
    }
    let design = &fit.design;
    let has_parity = |p: &Parity| design.parity_levels.contains(p);
    let has_species = |s: &Species| design.species_levels.contains(s);
    let present = match level {
        MarginLevel::Parity(p) => has_parity(&p),
        MarginLevel::Species(s) => has_species(&s),
        MarginLevel::Cell(p, s) => has_parity(&p) && has_species(&s),
    };
    if !present {
        return Err(Error::UnknownLevel(level.to_string()));
    }

    let mut sum = 0.0;
    let mut grad = DVector::zeros(design.terms.len());
    for r in records {
        let (p, s) = match level {
            MarginLevel::Parity(p) => (p, r.species),
            MarginLevel::Species(s) => (r.parity, s),
            MarginLevel::Cell(p, s) => (p, s),
        };
        let x = design.row(p, s);
        let prob = sigmoid(x.dot(&fit.coefficients));
        sum += prob;
        grad.axpy(prob * (1.0 - prob), &x, 1.0);
    }
    let n = records.len() as f64;
    let margin = sum / n;
    grad /= n;
    let variance = (grad.transpose() * &fit.covariance * &grad)[(0, 0)];
    let std_err = variance.max(0.0).sqrt();
    let z = margin / std_err;
    Ok(MarginEstimate {
        level,
        margin,
        std_err,
        z,
        p_value: two_sided_p(z),
    })
}

/// Margins for every level of `factor` present in the fit.
pub fn predictive_margins(
    fit: &LogitFit,
    records: &[SurveyRecord],
    factor: MarginFactor,
) -> Result<Vec<MarginEstimate>> {
    let design = &fit.design;
    let levels: Vec<MarginLevel> = match factor {
        MarginFactor::Parity => design
            .parity_levels
            .iter()
            .map(|&p| MarginLevel::Parity(p))
            .collect(),
        MarginFactor::Species => design
            .species_levels
            .iter()
            .map(|&s| MarginLevel::Species(s))
            .collect(),
        MarginFactor::Cell => design
            .parity_levels
            .iter()
            .flat_map(|&p| {
                design
                    .species_levels
                    .iter()
                    .map(move |&s| MarginLevel::Cell(p, s))
            })
            .collect(),
    };
    levels
        .into_iter()
        .map(|l| margin_at(fit, records, l))
        .collect()
}
