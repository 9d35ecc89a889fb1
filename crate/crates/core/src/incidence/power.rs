use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs to the two-arm minimum-detectable-effect formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    /// Standard-normal quantile for power, e.g. 0.84 for 80%.
    pub t_power: f64,
    /// Quantile for the significance level, e.g. 1.96 for 5% two-sided.
    pub t_alpha: f64,
    /// Share of the sample assigned to treatment.
    pub treat_prop: f64,
    /// Outcome variance.
    pub variance: f64,
    /// Total sample size.
    pub n: u64,
}

fn check_design(treat_prop: f64, variance: f64) -> Result<()> {
    if !(treat_prop > 0.0 && treat_prop < 1.0) {
        return Err(Error::validation(
            "treat_prop",
            format!("{treat_prop} must lie strictly between 0 and 1"),
        ));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::validation(
            "variance",
            format!("{variance} must be positive"),
        ));
    }
    Ok(())
}

impl PowerSpec {
    pub fn validate(&self) -> Result<()> {
        check_design(self.treat_prop, self.variance)?;
        if self.n < 2 {
            return Err(Error::validation(
                "n",
                format!("{} is below the minimum of 2", self.n),
            ));
        }
        Ok(())
    }
}

fn mde(t_power: f64, t_alpha: f64, treat_prop: f64, variance: f64, n: f64) -> f64 {
    (t_power + t_alpha) * (1.0 / (treat_prop * (1.0 - treat_prop))).sqrt() * (variance / n).sqrt()
}

/// `(t_power + t_alpha) · √(1 / (P(1−P))) · √(σ² / N)`
pub fn minimum_detectable_effect(spec: &PowerSpec) -> Result<f64> {
    spec.validate()?;
    Ok(mde(
        spec.t_power,
        spec.t_alpha,
        spec.treat_prop,
        spec.variance,
        spec.n as f64,
    ))
}

/// Smallest `N ≥ 2` whose minimum detectable effect does not exceed `target_effect`.
pub fn required_sample_size(
    target_effect: f64,
    t_power: f64,
    t_alpha: f64,
    treat_prop: f64,
    variance: f64,
) -> Result<u64> {
    if !(target_effect > 0.0) {
        return Err(Error::validation(
            "target_effect",
            format!("{target_effect} must be positive"),
        ));
    }
    check_design(treat_prop, variance)?;
    let at = |n: u64| mde(t_power, t_alpha, treat_prop, variance, n as f64);
    let k = t_power + t_alpha;
    let estimate =
        k * k * variance / (treat_prop * (1.0 - treat_prop) * target_effect * target_effect);
    if !estimate.is_finite() || estimate > 1e15 {
        return Err(Error::Degenerate(format!(
            "target effect {target_effect} needs an unbounded sample"
        )));
    }
    let mut n = (estimate.ceil() as u64).max(2);
    while n > 2 && at(n - 1) <= target_effect {
        n -= 1;
    }
    while at(n) > target_effect {
        n += 1;
    }
    Ok(n)
}
