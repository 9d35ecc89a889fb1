//! Closed-form loss accounting for one animal group.
//!
//! Every monetary amount is in base rupees. The group's yearly milk loss is
//!
//! ```text
//! Y_loss = A_IM · P_MF · Y_L · [P_D + (1 − P_D) · P_MFD · P_MYR]
//! ```
//!
//! which is the case-survival form `P_D · [1 + S · P_MFD · P_MYR]` with
//! `S = (1 − P_D) / P_D` multiplied through, so a group without deaths is
//! well defined. Dead animals forfeit a full lactation; survivors lose
//! `P_MYR` of their yield on a fraction `P_MFD` of lactation days.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::LITERS_PER_TONNE;

/// Epidemiological and production inputs for one species group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupParameters {
    pub label: String,
    /// Total animals `T`, when known.
    pub total_animals: Option<f64>,
    /// Proportion of animals in milk `P_IM`, when known.
    pub prop_in_milk: Option<f64>,
    /// In-milk population `A_IM`. May be fractional when derived from `T · P_IM`.
    pub in_milk: f64,
    /// `P_MF`, cases per in-milk animal.
    pub mf_incidence: f64,
    /// `P_D`, deaths per case.
    pub case_fatality: f64,
    /// Average daily yield `Y` (L/day), informational.
    pub daily_yield: Option<f64>,
    /// `Y_L`, litres per lactation.
    pub lactation_yield: f64,
    /// `P_MFD`, share of lactation days affected in a surviving case.
    pub affected_days_frac: f64,
    /// `P_MYR`, share of daily yield lost on affected days.
    pub yield_reduction_frac: f64,
    /// `P`, rupees per litre.
    pub milk_price: f64,
    /// `V`, market value of one animal.
    pub animal_value: f64,
    /// `TC`, veterinarian fee plus medicine per treated case.
    pub treatment_cost_per_case: f64,
    pub prevention_cost_per_animal: f64,
}

impl GroupParameters {
    /// Number of cases `A = A_IM · P_MF`.
    pub fn morbid(&self) -> f64 {
        self.in_milk * self.mf_incidence
    }

    /// Number of deaths `D = A · P_D`.
    pub fn deaths(&self) -> f64 {
        self.morbid() * self.case_fatality
    }

    pub fn survivors(&self) -> f64 {
        self.morbid() * (1.0 - self.case_fatality)
    }

    /// Case survival ratio `S = 1/P_D − 1`; `None` when no case dies.
    pub fn survival_ratio(&self) -> Option<f64> {
        survival_ratio(self.case_fatality)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("{}.{}", self.label, name);
        if self.label.trim().is_empty() {
            return Err(Error::validation("label", "must not be empty"));
        }
        for (name, value) in [
            ("in_milk", self.in_milk),
            ("lactation_yield", self.lactation_yield),
            ("milk_price", self.milk_price),
            ("animal_value", self.animal_value),
            ("treatment_cost_per_case", self.treatment_cost_per_case),
            (
                "prevention_cost_per_animal",
                self.prevention_cost_per_animal,
            ),
        ] {
            check_nonnegative(&field(name), value)?;
        }
        for (name, value) in [
            ("mf_incidence", self.mf_incidence),
            ("case_fatality", self.case_fatality),
            ("affected_days_frac", self.affected_days_frac),
            ("yield_reduction_frac", self.yield_reduction_frac),
        ] {
            check_fraction(&field(name), value)?;
        }
        if let Some(t) = self.total_animals {
            check_nonnegative(&field("total_animals"), t)?;
        }
        if let Some(p) = self.prop_in_milk {
            check_fraction(&field("prop_in_milk"), p)?;
        }
        if let Some(y) = self.daily_yield {
            check_nonnegative(&field("daily_yield"), y)?;
        }
        if let (Some(t), Some(p)) = (self.total_animals, self.prop_in_milk) {
            let implied = t * p;
            if (implied - self.in_milk).abs() > 0.5 {
                return Err(Error::validation(
                    field("in_milk"),
                    format!(
                        "{} disagrees with total_animals × prop_in_milk = {implied}",
                        self.in_milk
                    ),
                ));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_fraction(field: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::validation(
            field,
            format!("{value} is not in [0, 1]"),
        ));
    }
    Ok(())
}

pub(crate) fn check_nonnegative(field: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::validation(
            field,
            format!("{value} must be finite and nonnegative"),
        ));
    }
    Ok(())
}

pub fn survival_ratio(case_fatality: f64) -> Option<f64> {
    (case_fatality > 0.0).then(|| (1.0 - case_fatality) / case_fatality)
}

/// Rates implied by observed counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// `P_MF = morbid / in_milk`
    pub incidence: f64,
    /// `P_D = deaths / morbid`, zero when there are no cases.
    pub case_fatality: f64,
    /// `P_DMF = deaths / in_milk`
    pub mortality: f64,
    /// `(morbid − deaths) / deaths`; `None` when nobody died.
    pub survival_ratio: Option<f64>,
}

pub fn derive_rates(morbid: f64, deaths: f64, in_milk: f64) -> Result<DerivedRates> {
    if !(in_milk > 0.0) || !in_milk.is_finite() {
        return Err(Error::validation(
            "in_milk",
            format!("{in_milk} must be positive"),
        ));
    }
    check_nonnegative("deaths", deaths)?;
    check_nonnegative("morbid", morbid)?;
    if deaths > morbid {
        return Err(Error::validation(
            "deaths/morbid",
            format!("deaths ({deaths}) exceed morbid ({morbid})"),
        ));
    }
    if morbid > in_milk {
        return Err(Error::validation(
            "morbid/in_milk",
            format!("morbid ({morbid}) exceeds in_milk ({in_milk})"),
        ));
    }
    let case_fatality = if morbid > 0.0 { deaths / morbid } else { 0.0 };
    Ok(DerivedRates {
        incidence: morbid / in_milk,
        case_fatality,
        mortality: deaths / in_milk,
        survival_ratio: (deaths > 0.0).then(|| (morbid - deaths) / deaths),
    })
}

/// Expected share of one lactation lost per case.
pub fn lactation_loss_per_case(
    case_fatality: f64,
    affected_days: f64,
    yield_reduction: f64,
) -> f64 {
    case_fatality + (1.0 - case_fatality) * affected_days * yield_reduction
}

/// Yearly milk lost to the disease, in litres.
pub fn milk_production_loss(g: &GroupParameters) -> f64 {
    g.morbid()
        * g.lactation_yield
        * lactation_loss_per_case(
            g.case_fatality,
            g.affected_days_frac,
            g.yield_reduction_frac,
        )
}

/// Value of animals lost to the disease.
pub fn mortality_loss(g: &GroupParameters) -> f64 {
    g.deaths() * g.animal_value
}

pub fn milk_value_loss(g: &GroupParameters) -> f64 {
    milk_production_loss(g) * g.milk_price
}

/// Treatment is paid for surviving cases only.
pub fn treatment_cost(g: &GroupParameters) -> f64 {
    g.survivors() * g.treatment_cost_per_case
}

/// Fractions of the total loss taken by each component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossShares {
    pub milk_value: f64,
    pub treatment: f64,
    pub mortality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub label: String,
    pub morbid: f64,
    pub deaths: f64,
    pub milk_loss_liters: f64,
    pub milk_value_loss: f64,
    pub treatment_cost: f64,
    pub mortality_loss: f64,
    pub total: f64,
    /// `None` when the total loss is zero.
    pub shares: Option<LossShares>,
}

impl LossBreakdown {
    fn assemble(
        label: String,
        morbid: f64,
        deaths: f64,
        milk_loss_liters: f64,
        milk_value_loss: f64,
        treatment_cost: f64,
        mortality_loss: f64,
    ) -> Self {
        let total = mortality_loss + milk_value_loss + treatment_cost;
        let shares = (total > 0.0).then(|| LossShares {
            milk_value: milk_value_loss / total,
            treatment: treatment_cost / total,
            mortality: mortality_loss / total,
        });
        LossBreakdown {
            label,
            morbid,
            deaths,
            milk_loss_liters,
            milk_value_loss,
            treatment_cost,
            mortality_loss,
            total,
            shares,
        }
    }

    /// Mass of milk lost, taking one litre as one kilogram.
    pub fn milk_loss_tonnes(&self) -> f64 {
        self.milk_loss_liters / LITERS_PER_TONNE
    }
}

pub fn total_economic_loss(g: &GroupParameters) -> LossBreakdown {
    let milk = milk_production_loss(g);
    LossBreakdown::assemble(
        g.label.clone(),
        g.morbid(),
        g.deaths(),
        milk,
        milk * g.milk_price,
        treatment_cost(g),
        mortality_loss(g),
    )
}

/// How several groups are combined into one total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    /// Component-wise sum of the group results.
    #[default]
    SumOfGroups,
    /// Recompute from pooled parameters; see [`pooled_parameters`].
    Pooled,
}

/// Component-wise sum; shares are recomputed from the summed components.
pub fn aggregate(groups: &[LossBreakdown]) -> Result<LossBreakdown> {
    match groups {
        [] => Err(Error::Empty("group list")),
        [single] => Ok(single.clone()),
        _ => {
            let sum = |f: fn(&LossBreakdown) -> f64| groups.iter().map(f).sum::<f64>();
            Ok(LossBreakdown::assemble(
                "total".to_string(),
                sum(|g| g.morbid),
                sum(|g| g.deaths),
                sum(|g| g.milk_loss_liters),
                sum(|g| g.milk_value_loss),
                sum(|g| g.treatment_cost),
                sum(|g| g.mortality_loss),
            ))
        }
    }
}

/// Pool several groups into one parameter set.
///
/// Counts are summed and rates recomputed from the summed counts. Lactation
/// yield is weighted by in-milk animals. Per-animal money figures and the
/// milk-loss fractions use the unweighted mean across groups, which is how
/// published pooled columns report price, value and treatment cost.
pub fn pooled_parameters(groups: &[GroupParameters]) -> Result<GroupParameters> {
    if groups.is_empty() {
        return Err(Error::Empty("group list"));
    }
    let n = groups.len() as f64;
    let sum = |f: &dyn Fn(&GroupParameters) -> f64| groups.iter().map(f).sum::<f64>();
    let mean = |f: &dyn Fn(&GroupParameters) -> f64| sum(f) / n;

    let in_milk = sum(&|g| g.in_milk);
    let morbid = sum(&|g| g.morbid());
    let deaths = sum(&|g| g.deaths());
    let rates = if in_milk > 0.0 {
        derive_rates(morbid, deaths, in_milk)?
    } else {
        DerivedRates {
            incidence: 0.0,
            case_fatality: 0.0,
            mortality: 0.0,
            survival_ratio: None,
        }
    };
    let lactation_yield = if in_milk > 0.0 {
        sum(&|g| g.in_milk * g.lactation_yield) / in_milk
    } else {
        mean(&|g| g.lactation_yield)
    };
    let total_animals = groups.iter().map(|g| g.total_animals).sum::<Option<f64>>();
    let daily_yield = if in_milk > 0.0 {
        groups
            .iter()
            .map(|g| g.daily_yield.map(|y| y * g.in_milk))
            .sum::<Option<f64>>()
            .map(|y| y / in_milk)
    } else {
        None
    };

    Ok(GroupParameters {
        label: "pooled".to_string(),
        total_animals,
        prop_in_milk: total_animals.filter(|t| *t > 0.0).map(|t| in_milk / t),
        in_milk,
        mf_incidence: rates.incidence,
        case_fatality: rates.case_fatality,
        daily_yield,
        lactation_yield,
        affected_days_frac: mean(&|g| g.affected_days_frac),
        yield_reduction_frac: mean(&|g| g.yield_reduction_frac),
        milk_price: mean(&|g| g.milk_price),
        animal_value: mean(&|g| g.animal_value),
        treatment_cost_per_case: mean(&|g| g.treatment_cost_per_case),
        prevention_cost_per_animal: mean(&|g| g.prevention_cost_per_animal),
    })
}

pub fn aggregate_groups(
    groups: &[GroupParameters],
    mode: AggregationMode,
) -> Result<LossBreakdown> {
    match mode {
        AggregationMode::SumOfGroups => {
            aggregate(&groups.iter().map(total_economic_loss).collect::<Vec<_>>())
        }
        AggregationMode::Pooled => {
            let mut pooled = total_economic_loss(&pooled_parameters(groups)?);
            pooled.label = "total (pooled)".to_string();
            Ok(pooled)
        }
    }
}

/// Cost of preventive feeding for every in-milk animal, against a loss total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreventionEconomics {
    pub in_milk: f64,
    pub cost_per_animal: f64,
    pub total_cost: f64,
    pub total_loss: f64,
    /// `total_cost / total_loss`; `None` when the loss is zero.
    pub cost_to_loss: Option<f64>,
    /// `total_loss / total_cost`; `None` when prevention is free.
    pub loss_to_cost: Option<f64>,
}

pub fn prevention_economics(
    groups: &[GroupParameters],
    cost_per_animal: f64,
    total_loss: f64,
) -> Result<PreventionEconomics> {
    check_nonnegative("cost_per_animal", cost_per_animal)?;
    check_nonnegative("total_loss", total_loss)?;
    let in_milk: f64 = groups.iter().map(|g| g.in_milk).sum();
    let total_cost = in_milk * cost_per_animal;
    Ok(PreventionEconomics {
        in_milk,
        cost_per_animal,
        total_cost,
        total_loss,
        cost_to_loss: (total_loss > 0.0).then(|| total_cost / total_loss),
        loss_to_cost: (total_cost > 0.0).then(|| total_loss / total_cost),
    })
}

/// As [`prevention_economics`], but each group pays its own
/// `prevention_cost_per_animal`. `cost_per_animal` in the result is the
/// in-milk weighted mean.
pub fn prevention_economics_by_group(
    groups: &[GroupParameters],
    total_loss: f64,
) -> Result<PreventionEconomics> {
    check_nonnegative("total_loss", total_loss)?;
    let in_milk: f64 = groups.iter().map(|g| g.in_milk).sum();
    let total_cost: f64 = groups
        .iter()
        .map(|g| g.in_milk * g.prevention_cost_per_animal)
        .sum();
    Ok(PreventionEconomics {
        in_milk,
        cost_per_animal: if in_milk > 0.0 {
            total_cost / in_milk
        } else {
            0.0
        },
        total_cost,
        total_loss,
        cost_to_loss: (total_loss > 0.0).then(|| total_cost / total_loss),
        loss_to_cost: (total_cost > 0.0).then(|| total_loss / total_cost),
    })
}
