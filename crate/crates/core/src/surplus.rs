//! Open-economy economic-surplus model.
//!
//! Preventing the disease shifts milk supply out from `Q0` to `Q1 = Q0 + Y_loss`.
//! With trade absorbing any excess, the whole welfare gain accrues to producers:
//!
//! ```text
//! K   = ((Q1 − Q0) / Q0) / e
//! Z   = K · e / (e + η)
//! ΔPS = K · P0 · Q0 · (1 + ½ · Z · e) · success_rate
//! ```
//!
//! `K` is the proportionate quantity gain over the supply elasticity, i.e. the
//! vertical supply shift relative to `P0`. The inverted form `e / %Δq` does
//! not reproduce published efficiency-gain tables and is not used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::check_fraction;

/// Success rate assumed for a preventive technology unless stated otherwise.
pub const DEFAULT_SUCCESS_RATE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParameters {
    /// `e`
    pub supply_elasticity: f64,
    /// `η`, absolute value of the price elasticity of demand.
    pub demand_elasticity_abs: f64,
    /// `P0`, rupees per litre.
    pub base_price: f64,
    /// `Q0`, litres per year.
    pub base_quantity: f64,
    pub success_rate: f64,
}

impl MarketParameters {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("supply_elasticity", self.supply_elasticity),
            ("demand_elasticity_abs", self.demand_elasticity_abs),
            ("base_price", self.base_price),
            ("base_quantity", self.base_quantity),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(name, format!("{value} must be positive")));
            }
        }
        check_fraction("success_rate", self.success_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusResult {
    pub base_quantity: f64,
    /// `Q1`, litres per year without the disease.
    pub counterfactual_quantity: f64,
    /// `(Q1 − Q0) / Q0` as a fraction.
    pub pct_supply_change: f64,
    pub supply_shift: f64,
    pub price_reduction: f64,
    /// ΔPS = ΔTS in rupees per year, after success-rate scaling.
    pub delta_ps: f64,
}

pub fn counterfactual_supply(base_quantity: f64, milk_loss: f64) -> f64 {
    base_quantity + milk_loss
}

/// Supply shift `K` relative to the initial price.
pub fn supply_shift_k(
    base_quantity: f64,
    counterfactual: f64,
    supply_elasticity: f64,
) -> Result<f64> {
    if !(supply_elasticity > 0.0) {
        return Err(Error::Degenerate(format!(
            "supply elasticity {supply_elasticity} must be positive"
        )));
    }
    if !(base_quantity > 0.0) {
        return Err(Error::Degenerate(format!(
            "base quantity {base_quantity} must be positive"
        )));
    }
    if counterfactual < base_quantity {
        return Err(Error::validation(
            "counterfactual_quantity",
            format!("{counterfactual} is below the base quantity {base_quantity}"),
        ));
    }
    Ok((counterfactual - base_quantity) / base_quantity / supply_elasticity)
}

/// Relative reduction in price `Z`.
pub fn price_reduction_z(
    supply_shift: f64,
    supply_elasticity: f64,
    demand_elasticity_abs: f64,
) -> f64 {
    supply_shift * supply_elasticity / (supply_elasticity + demand_elasticity_abs)
}

pub fn producer_surplus(m: &MarketParameters, supply_shift: f64, price_reduction: f64) -> f64 {
    supply_shift
        * m.base_price
        * m.base_quantity
        * (1.0 + 0.5 * price_reduction * m.supply_elasticity)
        * m.success_rate
}

/// Runs the full chain `Q1 → K → Z → ΔPS` for one market.
pub fn evaluate(m: &MarketParameters, milk_loss: f64) -> Result<SurplusResult> {
    m.validate()?;
    if !(milk_loss.is_finite() && milk_loss >= 0.0) {
        return Err(Error::validation(
            "milk_loss",
            format!("{milk_loss} must be nonnegative"),
        ));
    }
    let q1 = counterfactual_supply(m.base_quantity, milk_loss);
    let k = supply_shift_k(m.base_quantity, q1, m.supply_elasticity)?;
    let z = price_reduction_z(k, m.supply_elasticity, m.demand_elasticity_abs);
    Ok(SurplusResult {
        base_quantity: m.base_quantity,
        counterfactual_quantity: q1,
        pct_supply_change: (q1 - m.base_quantity) / m.base_quantity,
        supply_shift: k,
        price_reduction: z,
        delta_ps: producer_surplus(m, k, z),
    })
}

/// Pools several markets into one: quantities add, price is the unweighted
/// mean, elasticities and success rate must agree.
pub fn pooled_market(markets: &[MarketParameters]) -> Result<MarketParameters> {
    let first = markets.first().ok_or(Error::Empty("market list"))?;
    for m in &markets[1..] {
        for (name, a, b) in [
            (
                "supply_elasticity",
                first.supply_elasticity,
                m.supply_elasticity,
            ),
            (
                "demand_elasticity_abs",
                first.demand_elasticity_abs,
                m.demand_elasticity_abs,
            ),
            ("success_rate", first.success_rate, m.success_rate),
        ] {
            if a != b {
                return Err(Error::validation(
                    name,
                    format!("pooling needs a common value, found {a} and {b}"),
                ));
            }
        }
    }
    let n = markets.len() as f64;
    Ok(MarketParameters {
        base_price: markets.iter().map(|m| m.base_price).sum::<f64>() / n,
        base_quantity: markets.iter().map(|m| m.base_quantity).sum(),
        ..first.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub adoption_rate: f64,
    pub gain: f64,
}

/// Gains at several adoption rates; the gain scales linearly with adoption.
pub fn adoption_sweep(full_gain: f64, rates: &[f64]) -> Result<Vec<SweepPoint>> {
    rates
        .iter()
        .enumerate()
        .map(|(i, &rate)| {
            check_fraction(&format!("rates[{i}]"), rate)?;
            Ok(SweepPoint {
                adoption_rate: rate,
                gain: rate * full_gain,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cows() -> MarketParameters {
        MarketParameters {
            supply_elasticity: 0.019,
            demand_elasticity_abs: 1.035,
            base_price: 30.0,
            base_quantity: 252.390e6,
            success_rate: 0.9,
        }
    }

    #[test]
    fn counterfactual_adds_loss() {
        assert_relative_eq!(
            counterfactual_supply(252.390, 22.675),
            275.065,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            counterfactual_supply(948.194, 124.377),
            1072.571,
            epsilon = 1e-9
        );
        assert_eq!(counterfactual_supply(10.0, 0.0), 10.0);
    }

    #[test]
    fn supply_shift_orientation() {
        let k = supply_shift_k(252.390, 275.065, 0.019).unwrap();
        assert_relative_eq!(k, 4.728, max_relative = 5e-3);
        let k = supply_shift_k(948.194, 1072.571, 0.019).unwrap();
        assert_relative_eq!(k, 6.904, max_relative = 5e-3);
        assert_eq!(supply_shift_k(5.0, 5.0, 0.019).unwrap(), 0.0);
        assert!(matches!(
            supply_shift_k(5.0, 6.0, 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn price_reduction() {
        assert_relative_eq!(
            price_reduction_z(4.728, 0.019, 1.035),
            0.085,
            max_relative = 1e-2
        );
        assert_relative_eq!(
            price_reduction_z(6.904, 0.019, 1.035),
            0.124,
            max_relative = 1e-2
        );
        assert_eq!(price_reduction_z(0.0, 0.019, 1.035), 0.0);
    }

    #[test]
    fn cow_efficiency_gain() {
        let r = evaluate(&cows(), 22.675e6).unwrap();
        assert_relative_eq!(r.delta_ps / 1e7, 3224.8, max_relative = 5e-3);
        assert!(r.price_reduction < r.supply_shift);
    }

    #[test]
    fn zero_shift_zero_gain() {
        let r = evaluate(&cows(), 0.0).unwrap();
        assert_eq!(r.delta_ps, 0.0);
    }

    #[test]
    fn success_rate_scales_gain() {
        let full = evaluate(
            &MarketParameters {
                success_rate: 1.0,
                ..cows()
            },
            22.675e6,
        )
        .unwrap();
        let part = evaluate(&cows(), 22.675e6).unwrap();
        assert_relative_eq!(part.delta_ps, 0.9 * full.delta_ps, max_relative = 1e-14);
    }

    #[test]
    fn sweep_is_linear() {
        let pts = adoption_sweep(27_475.8, &[0.0, 0.2, 0.4, 0.6]).unwrap();
        assert_eq!(pts[0].gain, 0.0);
        assert_relative_eq!(pts[1].gain, 5_495.16, epsilon = 1e-6);
        assert_relative_eq!(pts[2].gain, 10_990.32, epsilon = 1e-6);
        assert_relative_eq!(pts[3].gain, 16_485.48, epsilon = 1e-6);
        assert!(adoption_sweep(1.0, &[1.2]).is_err());
    }

    #[test]
    fn pooling_requires_common_elasticities() {
        let a = cows();
        let b = MarketParameters {
            base_price: 45.0,
            base_quantity: 948.194e6,
            ..cows()
        };
        let p = pooled_market(&[a.clone(), b]).unwrap();
        assert_eq!(p.base_price, 37.5);
        assert_relative_eq!(p.base_quantity, 1200.584e6, max_relative = 1e-12);
        let c = MarketParameters {
            supply_elasticity: 0.5,
            ..cows()
        };
        assert!(pooled_market(&[a, c]).is_err());
        assert!(pooled_market(&[]).is_err());
    }

    #[test]
    fn market_validation() {
        let mut m = cows();
        m.success_rate = 1.1;
        assert!(m.validate().is_err());
        let mut m = cows();
        m.demand_elasticity_abs = 0.0;
        assert!(m.validate().is_err());
    }
}
