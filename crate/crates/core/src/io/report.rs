//! Result bundles and their text, CSV and plot-data renderings.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::{IncidenceSummary, LogitFit, MarginEstimate};
use crate::io::params::{ParameterDocument, SweepBasis};
use crate::loss::{
    aggregate, pooled_parameters, prevention_economics_by_group, total_economic_loss,
    GroupParameters, LossBreakdown, PreventionEconomics,
};
use crate::oracle::OracleReport;
use crate::surplus::{
    adoption_sweep, evaluate, pooled_market, MarketParameters, SurplusResult, SweepPoint,
};
use crate::units::{CurrencyUnit, LITERS_PER_TONNE};

pub const SUM_LABEL: &str = "total (sum of groups)";
pub const POOLED_LABEL: &str = "total (pooled)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub scenario: String,
    pub input_hash: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub label: String,
    pub market: MarketParameters,
    /// Milk loss fed to the surplus model, litres.
    pub milk_loss: f64,
    pub result: SurplusResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusSection {
    pub groups: Vec<MarketOutcome>,
    pub pooled: MarketOutcome,
    /// Sum of the per-group gains.
    pub sum_of_groups: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub basis: SweepBasis,
    pub full_gain: f64,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: Metadata,
    pub inputs: Vec<GroupParameters>,
    pub pooled_inputs: GroupParameters,
    pub losses: Vec<LossBreakdown>,
    pub sum_of_groups: LossBreakdown,
    pub pooled: LossBreakdown,
    pub surplus: Option<SurplusSection>,
    pub sweep: Option<SweepSection>,
    pub prevention: PreventionEconomics,
}

/// Runs every model the document has inputs for.
pub fn build_bundle(doc: &ParameterDocument, timestamp: Option<String>) -> Result<ResultBundle> {
    let inputs = doc.group_parameters();
    let losses: Vec<_> = inputs.iter().map(total_economic_loss).collect();
    let mut sum_of_groups = aggregate(&losses)?;
    sum_of_groups.label = SUM_LABEL.to_string();
    let pooled_inputs = pooled_parameters(&inputs)?;
    let mut pooled = total_economic_loss(&pooled_inputs);
    pooled.label = POOLED_LABEL.to_string();

    let surplus = match &doc.market {
        None => None,
        Some(settings) => {
            let mut groups = Vec::new();
            for (spec, loss) in doc.groups.iter().zip(&losses) {
                let market = spec.market_parameters(settings).ok_or_else(|| {
                    Error::validation(
                        format!("{}.market", spec.params.label),
                        "every group needs a market block when [market] is present",
                    )
                })?;
                let milk_loss = spec
                    .market
                    .as_ref()
                    .and_then(|m| m.milk_loss_override)
                    .unwrap_or(loss.milk_loss_liters);
                let result = evaluate(&market, milk_loss)?;
                groups.push(MarketOutcome {
                    label: spec.params.label.clone(),
                    market,
                    milk_loss,
                    result,
                });
            }
            let markets: Vec<_> = groups.iter().map(|g| g.market.clone()).collect();
            let market = pooled_market(&markets)?;
            let milk_loss = settings
                .pooled_milk_loss_override
                .unwrap_or(pooled.milk_loss_liters);
            let result = evaluate(&market, milk_loss)?;
            let sum_of_groups = groups.iter().map(|g| g.result.delta_ps).sum();
            Some(SurplusSection {
                pooled: MarketOutcome {
                    label: POOLED_LABEL.to_string(),
                    market,
                    milk_loss,
                    result,
                },
                groups,
                sum_of_groups,
            })
        }
    };

    let sweep = match (&doc.sweep, &surplus) {
        (Some(s), Some(sec)) => {
            let full_gain = match s.basis {
                SweepBasis::SumOfGroups => sec.sum_of_groups,
                SweepBasis::Pooled => sec.pooled.result.delta_ps,
            };
            Some(SweepSection {
                basis: s.basis,
                full_gain,
                points: adoption_sweep(full_gain, &s.rates)?,
            })
        }
        _ => None,
    };

    let prevention = prevention_economics_by_group(&inputs, sum_of_groups.total)?;

    Ok(ResultBundle {
        metadata: Metadata {
            scenario: doc.scenario.clone(),
            input_hash: doc.input_hash.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        },
        inputs,
        pooled_inputs,
        losses,
        sum_of_groups,
        pooled,
        surplus,
        sweep,
        prevention,
    })
}

impl ResultBundle {
    /// Replaces the sweep with one over `rates`, keeping the configured basis.
    pub fn with_sweep_rates(mut self, rates: &[f64], basis: Option<SweepBasis>) -> Result<Self> {
        let sec = self
            .surplus
            .as_ref()
            .ok_or_else(|| Error::validation("market", "a sweep needs a [market] block"))?;
        let basis = basis
            .or(self.sweep.as_ref().map(|s| s.basis))
            .unwrap_or_default();
        let full_gain = match basis {
            SweepBasis::SumOfGroups => sec.sum_of_groups,
            SweepBasis::Pooled => sec.pooled.result.delta_ps,
        };
        self.sweep = Some(SweepSection {
            basis,
            full_gain,
            points: adoption_sweep(full_gain, rates)?,
        });
        Ok(self)
    }

    pub fn loss(&self, label: &str) -> Option<&LossBreakdown> {
        self.losses
            .iter()
            .chain([&self.sum_of_groups, &self.pooled])
            .find(|l| l.label == label)
    }
}

// ---------------------------------------------------------------------------
// Text tables

fn table(out: &mut String, header: &[String], rows: &[(String, Vec<String>)]) {
    let first = rows
        .iter()
        .map(|(l, _)| l.chars().count())
        .chain([header[0].chars().count()])
        .max()
        .unwrap_or(0);
    let ncols = header.len() - 1;
    let widths: Vec<usize> = (0..ncols)
        .map(|c| {
            rows.iter()
                .map(|(_, v)| v.get(c).map_or(0, |s| s.chars().count()))
                .chain([header[c + 1].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let pad = |s: &str, w: usize| " ".repeat(w.saturating_sub(s.chars().count()));
    let _ = write!(out, "{}{}", header[0], pad(&header[0], first));
    for (h, w) in header[1..].iter().zip(&widths) {
        let _ = write!(out, "  {}{h}", pad(h, *w));
    }
    out.push('\n');
    let rule = first + widths.iter().map(|w| w + 2).sum::<usize>();
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for (label, values) in rows {
        let _ = write!(out, "{label}{}", pad(label, first));
        for (v, w) in values.iter().zip(&widths) {
            let _ = write!(out, "  {}{v}", pad(v, *w));
        }
        out.push('\n');
    }
}

fn money(v: f64, unit: CurrencyUnit) -> String {
    format!("{:.2}", unit.from_rupees(v))
}

fn with_share(v: f64, total: f64, unit: CurrencyUnit) -> String {
    if total > 0.0 {
        format!("{} ({:.2})", money(v, unit), 100.0 * v / total)
    } else {
        money(v, unit)
    }
}

pub fn render_losses(bundle: &ResultBundle, unit: CurrencyUnit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Economic losses due to milk fever: {}",
        bundle.metadata.scenario
    );
    let _ = writeln!(
        out,
        "Money in {}; figures in parentheses are per cent of the total economic loss.\n",
        unit.label()
    );
    let single = bundle.losses.len() == 1;
    let mut cols: Vec<(&GroupParameters, &LossBreakdown)> =
        bundle.inputs.iter().zip(&bundle.losses).collect();
    if !single {
        cols.push((&bundle.pooled_inputs, &bundle.sum_of_groups));
        cols.push((&bundle.pooled_inputs, &bundle.pooled));
    }
    let mut header = vec!["".to_string()];
    header.extend(cols.iter().map(|(_, l)| l.label.clone()));

    let is_sum = |l: &LossBreakdown| l.label == SUM_LABEL;
    let inputs = |f: &dyn Fn(&GroupParameters) -> String| -> Vec<String> {
        cols.iter()
            .map(|(g, l)| if is_sum(l) { String::new() } else { f(g) })
            .collect()
    };
    let section = |f: &dyn Fn(&LossBreakdown) -> String| -> Vec<String> {
        cols.iter().map(|(_, l)| f(l)).collect()
    };

    let rows = vec![
        (
            "In-milk animals".to_string(),
            section(&|l| format!("{:.2}", in_milk_of(bundle, l))),
        ),
        (
            "Proportion affected".to_string(),
            inputs(&|g| format!("{:.4}", g.mf_incidence)),
        ),
        (
            "Case fatality".to_string(),
            inputs(&|g| format!("{:.4}", g.case_fatality)),
        ),
        (
            "Cases".to_string(),
            section(&|l| format!("{:.2}", l.morbid)),
        ),
        (
            "Deaths".to_string(),
            section(&|l| format!("{:.2}", l.deaths)),
        ),
        (
            "Lactation yield (L)".to_string(),
            inputs(&|g| format!("{:.2}", g.lactation_yield)),
        ),
        (
            "Milk price (₹/L)".to_string(),
            inputs(&|g| format!("{:.2}", g.milk_price)),
        ),
        (
            "Animal value (₹)".to_string(),
            inputs(&|g| format!("{:.2}", g.animal_value)),
        ),
        (
            "Treatment cost (₹/case)".to_string(),
            inputs(&|g| format!("{:.2}", g.treatment_cost_per_case)),
        ),
        (
            "Milk production loss (t)".to_string(),
            section(&|l| format!("{:.2}", l.milk_loss_tonnes())),
        ),
        (
            "Value of milk lost".to_string(),
            section(&|l| with_share(l.milk_value_loss, l.total, unit)),
        ),
        (
            "Cost of treatment".to_string(),
            section(&|l| with_share(l.treatment_cost, l.total, unit)),
        ),
        (
            "Losses from mortality".to_string(),
            section(&|l| with_share(l.mortality_loss, l.total, unit)),
        ),
        (
            "Total economic loss".to_string(),
            section(&|l| with_share(l.total, l.total, unit)),
        ),
    ];
    table(&mut out, &header, &rows);
    if !single {
        let _ = writeln!(
            out,
            "\n`{SUM_LABEL}` adds the group columns. `{POOLED_LABEL}` reruns the model on pooled inputs \
             (summed counts, mean price, value and treatment cost); the two differ by construction."
        );
    }
    out
}

fn in_milk_of(bundle: &ResultBundle, l: &LossBreakdown) -> f64 {
    if l.label == SUM_LABEL || l.label == POOLED_LABEL {
        bundle.pooled_inputs.in_milk
    } else {
        bundle
            .inputs
            .iter()
            .find(|g| g.label == l.label)
            .map_or(f64::NAN, |g| g.in_milk)
    }
}

pub fn render_surplus(bundle: &ResultBundle, unit: CurrencyUnit) -> Result<String> {
    let sec = bundle
        .surplus
        .as_ref()
        .ok_or_else(|| Error::validation("market", "the scenario has no [market] block"))?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Efficiency gain (producer surplus) if milk fever is prevented: {}\n",
        bundle.metadata.scenario
    );
    let cols: Vec<&MarketOutcome> = sec.groups.iter().chain([&sec.pooled]).collect();
    let mut header = vec!["".to_string()];
    header.extend(cols.iter().map(|c| c.label.clone()));
    let row = |f: &dyn Fn(&MarketOutcome) -> String| -> Vec<String> {
        cols.iter().map(|c| f(c)).collect()
    };
    let kt = |v: f64| format!("{:.3}", v / LITERS_PER_TONNE / 1e3);
    let rows = vec![
        (
            "Supply elasticity (e)".to_string(),
            row(&|c| format!("{:.3}", c.market.supply_elasticity)),
        ),
        (
            "Demand elasticity (|η|)".to_string(),
            row(&|c| format!("{:.3}", c.market.demand_elasticity_abs)),
        ),
        ("Milk loss (000 t)".to_string(), row(&|c| kt(c.milk_loss))),
        (
            "Milk production (000 t)".to_string(),
            row(&|c| kt(c.result.base_quantity)),
        ),
        (
            "Production without MF (000 t)".to_string(),
            row(&|c| kt(c.result.counterfactual_quantity)),
        ),
        (
            "Change in supply (fraction)".to_string(),
            row(&|c| format!("{:.3}", c.result.pct_supply_change)),
        ),
        (
            "Supply shift (K)".to_string(),
            row(&|c| format!("{:.3}", c.result.supply_shift)),
        ),
        (
            "Relative price reduction (Z)".to_string(),
            row(&|c| format!("{:.3}", c.result.price_reduction)),
        ),
        (
            "Price (₹/L)".to_string(),
            row(&|c| format!("{:.3}", c.market.base_price)),
        ),
        (
            "Success rate".to_string(),
            row(&|c| format!("{:.3}", c.market.success_rate)),
        ),
        (
            format!("Efficiency gain ({})", unit.label()),
            row(&|c| money(c.result.delta_ps, unit)),
        ),
    ];
    table(&mut out, &header, &rows);
    let _ = writeln!(
        out,
        "\nSum of group gains: {} {}. The pooled column reruns the model on the pooled market \
         (summed quantities, mean price, pooled milk loss) and is not the sum of the group gains.",
        money(sec.sum_of_groups, unit),
        unit.label()
    );
    Ok(out)
}

pub fn render_sweep(bundle: &ResultBundle, unit: CurrencyUnit) -> Result<String> {
    let sweep = bundle
        .sweep
        .as_ref()
        .ok_or_else(|| Error::validation("sweep", "no adoption rates given"))?;
    let mut out = String::new();
    let basis = match sweep.basis {
        SweepBasis::SumOfGroups => "sum of group gains",
        SweepBasis::Pooled => "pooled market",
    };
    let _ = writeln!(
        out,
        "Efficiency gain by adoption rate: {} ({basis})\n",
        bundle.metadata.scenario
    );
    let header = vec![
        "Adoption rate".to_string(),
        format!("Gain ({})", unit.label()),
    ];
    let rows: Vec<_> = sweep
        .points
        .iter()
        .map(|p| (format!("{:.2}", p.adoption_rate), vec![money(p.gain, unit)]))
        .collect();
    table(&mut out, &header, &rows);
    Ok(out)
}

pub fn render_prevention(bundle: &ResultBundle, unit: CurrencyUnit) -> String {
    let p = &bundle.prevention;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Prevention across all in-milk animals: {}",
        bundle.metadata.scenario
    );
    let _ = writeln!(out, "  in-milk animals        {:.2}", p.in_milk);
    let _ = writeln!(out, "  cost per animal (₹)    {:.2}", p.cost_per_animal);
    let _ = writeln!(
        out,
        "  total cost             {} {}",
        money(p.total_cost, unit),
        unit.label()
    );
    let _ = writeln!(
        out,
        "  total loss (sum)       {} {}",
        money(p.total_loss, unit),
        unit.label()
    );
    match p.loss_to_cost {
        Some(r) => {
            let _ = writeln!(out, "  loss / cost            {r:.2}");
        }
        None => {
            let _ = writeln!(out, "  loss / cost            n/a (prevention is free)");
        }
    }
    out
}

pub fn render_report(bundle: &ResultBundle, unit: CurrencyUnit) -> String {
    let mut out = String::new();
    let m = &bundle.metadata;
    let _ = writeln!(out, "scenario: {}", m.scenario);
    let _ = writeln!(out, "input sha256: {}", m.input_hash);
    let _ = writeln!(out, "milkfever {}", m.tool_version);
    if let Some(t) = &m.timestamp {
        let _ = writeln!(out, "generated: {t}");
    }
    out.push('\n');
    out.push_str(&render_losses(bundle, unit));
    out.push('\n');
    out.push_str(&render_prevention(bundle, unit));
    if let Ok(s) = render_surplus(bundle, unit) {
        out.push('\n');
        out.push_str(&s);
    }
    if let Ok(s) = render_sweep(bundle, unit) {
        out.push('\n');
        out.push_str(&s);
    }
    out
}

/// Left-aligned first column, right-aligned values, dashed rule under the header.
pub fn text_table(header: &[String], rows: &[(String, Vec<String>)]) -> String {
    let mut out = String::new();
    table(&mut out, header, rows);
    out
}

pub fn render_incidence(summaries: &[IncidenceSummary]) -> String {
    let header: Vec<String> = [
        "Species",
        "Animals",
        "MF cases",
        "Deaths",
        "Morbidity (%)",
        "Mortality (%)",
        "Case fatality (%)",
    ]
    .map(String::from)
    .to_vec();
    let pct = |v: f64| format!("{:.2}", 100.0 * v);
    let rows: Vec<_> = summaries
        .iter()
        .map(|s| {
            (
                s.species.to_string(),
                vec![
                    s.animals.to_string(),
                    s.cases.to_string(),
                    s.deaths.to_string(),
                    pct(s.morbidity),
                    pct(s.mortality),
                    s.case_fatality.map_or("n/a".to_string(), pct),
                ],
            )
        })
        .collect();
    let mut out = String::from("Incidence of milk fever in the surveyed herd\n\n");
    table(&mut out, &header, &rows);
    out
}

pub fn render_margins(fit: &LogitFit, margins: &[MarginEstimate]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Predictive margins of milk fever (logit, {} observations, log-likelihood {:.4}, {} iterations)\n",
        fit.observations, fit.log_likelihood, fit.iterations
    );
    let header: Vec<String> = [
        "",
        "Margin",
        "Delta-method SE",
        "z",
        "P>|z|",
        "95% CI low",
        "95% CI high",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<_> = margins
        .iter()
        .map(|m| {
            (
                m.level.to_string(),
                vec![
                    format!("{:.4}", m.margin),
                    format!("{:.4}", m.std_err),
                    format!("{:.2}", m.z),
                    format!("{:.3}", m.p_value),
                    format!("{:.4}", m.margin - 1.96 * m.std_err),
                    format!("{:.4}", m.margin + 1.96 * m.std_err),
                ],
            )
        })
        .collect();
    table(&mut out, &header, &rows);
    out
}

pub fn render_oracle(report: &OracleReport, unit: CurrencyUnit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Monte-Carlo check: {} ({} animals, {} replicates)\n",
        report.label, report.animals, report.replicates
    );
    let header: Vec<String> = [
        "Quantity",
        "Closed form",
        "MC mean",
        "MC std. err.",
        "z",
        "",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| {
            let (scale, name) = if r.quantity == "milk_loss_liters" {
                (1.0, "milk loss (L)".to_string())
            } else {
                (
                    unit.rupees_per_unit(),
                    format!("{} ({})", r.quantity.replace('_', " "), unit),
                )
            };
            (
                name,
                vec![
                    format!("{:.6}", r.closed_form / scale),
                    format!("{:.6}", r.mc_mean / scale),
                    format!("{:.6}", r.mc_std_err / scale),
                    format!("{:.3}", r.z),
                    if r.flagged {
                        "MISMATCH".to_string()
                    } else {
                        "ok".to_string()
                    },
                ],
            )
        })
        .collect();
    table(&mut out, &header, &rows);
    out
}

// ---------------------------------------------------------------------------
// CSV

/// One value of the results CSV. Money is in rupees and milk in litres
/// regardless of the display unit, so the file round-trips exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub group: String,
    pub quantity: String,
    pub value: f64,
    pub unit: String,
}

fn push(
    rows: &mut Vec<ReportRow>,
    scenario: &str,
    group: &str,
    quantity: &str,
    value: f64,
    unit: &str,
) {
    rows.push(ReportRow {
        scenario: scenario.to_string(),
        group: group.to_string(),
        quantity: quantity.to_string(),
        value,
        unit: unit.to_string(),
    });
}

pub fn loss_rows(bundle: &ResultBundle) -> Vec<ReportRow> {
    let s = &bundle.metadata.scenario;
    let mut rows = Vec::new();
    for l in bundle
        .losses
        .iter()
        .chain([&bundle.sum_of_groups, &bundle.pooled])
    {
        let g = &l.label;
        push(&mut rows, s, g, "morbid", l.morbid, "animals");
        push(&mut rows, s, g, "deaths", l.deaths, "animals");
        push(&mut rows, s, g, "milk_loss", l.milk_loss_liters, "liters");
        push(
            &mut rows,
            s,
            g,
            "milk_value_loss",
            l.milk_value_loss,
            "rupees",
        );
        push(
            &mut rows,
            s,
            g,
            "treatment_cost",
            l.treatment_cost,
            "rupees",
        );
        push(
            &mut rows,
            s,
            g,
            "mortality_loss",
            l.mortality_loss,
            "rupees",
        );
        push(&mut rows, s, g, "total_economic_loss", l.total, "rupees");
        if let Some(sh) = &l.shares {
            push(
                &mut rows,
                s,
                g,
                "share_milk_value",
                sh.milk_value,
                "fraction",
            );
            push(&mut rows, s, g, "share_treatment", sh.treatment, "fraction");
            push(&mut rows, s, g, "share_mortality", sh.mortality, "fraction");
        }
    }
    let p = &bundle.prevention;
    let g = "prevention";
    push(&mut rows, s, g, "in_milk", p.in_milk, "animals");
    push(
        &mut rows,
        s,
        g,
        "cost_per_animal",
        p.cost_per_animal,
        "rupees",
    );
    push(&mut rows, s, g, "total_cost", p.total_cost, "rupees");
    push(&mut rows, s, g, "total_loss", p.total_loss, "rupees");
    if let Some(r) = p.loss_to_cost {
        push(&mut rows, s, g, "loss_to_cost", r, "ratio");
    }
    rows
}

pub fn surplus_rows(bundle: &ResultBundle) -> Vec<ReportRow> {
    let s = &bundle.metadata.scenario;
    let mut rows = Vec::new();
    let Some(sec) = &bundle.surplus else {
        return rows;
    };
    for c in sec.groups.iter().chain([&sec.pooled]) {
        let g = &c.label;
        push(&mut rows, s, g, "surplus_milk_loss", c.milk_loss, "liters");
        push(
            &mut rows,
            s,
            g,
            "base_quantity",
            c.result.base_quantity,
            "liters",
        );
        push(
            &mut rows,
            s,
            g,
            "counterfactual_quantity",
            c.result.counterfactual_quantity,
            "liters",
        );
        push(
            &mut rows,
            s,
            g,
            "pct_supply_change",
            c.result.pct_supply_change,
            "fraction",
        );
        push(
            &mut rows,
            s,
            g,
            "supply_shift",
            c.result.supply_shift,
            "ratio",
        );
        push(
            &mut rows,
            s,
            g,
            "price_reduction",
            c.result.price_reduction,
            "ratio",
        );
        push(&mut rows, s, g, "delta_ps", c.result.delta_ps, "rupees");
    }
    push(
        &mut rows,
        s,
        SUM_LABEL,
        "delta_ps",
        sec.sum_of_groups,
        "rupees",
    );
    rows
}

pub fn sweep_rows(bundle: &ResultBundle) -> Vec<ReportRow> {
    let s = &bundle.metadata.scenario;
    let mut rows = Vec::new();
    if let Some(sw) = &bundle.sweep {
        for p in &sw.points {
            push(
                &mut rows,
                s,
                "sweep",
                &format!("gain_at_{}", p.adoption_rate),
                p.gain,
                "rupees",
            );
        }
    }
    rows
}

pub fn bundle_rows(bundle: &ResultBundle) -> Vec<ReportRow> {
    let mut rows = loss_rows(bundle);
    rows.extend(surplus_rows(bundle));
    rows.extend(sweep_rows(bundle));
    rows
}

/// `f64` is written in its shortest round-tripping decimal form.
pub fn write_rows_csv<W: Write>(rows: &[ReportRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| Error::Parse {
        path: "<csv output>".into(),
        message: e.to_string(),
    };
    for r in rows {
        wtr.serialize(r).map_err(io_err)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))
}

pub fn read_rows_csv<R: Read>(r: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                path: "<csv input>".into(),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn rows_to_csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

// ---------------------------------------------------------------------------
// Plot data

/// Two tab-separated columns, adoption rate and gain in `unit`.
pub fn render_plot_data(bundle: &ResultBundle, unit: CurrencyUnit) -> Option<String> {
    let sweep = bundle.sweep.as_ref().filter(|s| !s.points.is_empty())?;
    let mut out = String::new();
    let _ = writeln!(out, "# scenario: {}", bundle.metadata.scenario);
    let _ = writeln!(out, "# adoption_rate\tgain_{}", unit);
    for p in &sweep.points {
        let _ = writeln!(out, "{}\t{}", p.adoption_rate, unit.from_rupees(p.gain));
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Emission

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Text,
    Csv,
    Plot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub input_hash: String,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Writes the requested renderings into `dir` plus a `manifest.json`.
pub fn emit_reports(
    bundle: &ResultBundle,
    dir: &Path,
    formats: &[ReportFormat],
    unit: CurrencyUnit,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let scenario = &bundle.metadata.scenario;
    let mut manifest = Manifest {
        scenario: scenario.clone(),
        input_hash: bundle.metadata.input_hash.clone(),
        files: Vec::new(),
        notes: Vec::new(),
    };
    let write = |name: String, contents: &str, manifest: &mut Manifest| -> Result<()> {
        let path = dir.join(&name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        manifest.files.push(PathBuf::from(name));
        Ok(())
    };
    for f in formats {
        match f {
            ReportFormat::Text => write(
                format!("{scenario}_report.txt"),
                &render_report(bundle, unit),
                &mut manifest,
            )?,
            ReportFormat::Csv => write(
                format!("{scenario}_results.csv"),
                &rows_to_csv_string(&bundle_rows(bundle))?,
                &mut manifest,
            )?,
            ReportFormat::Plot => match render_plot_data(bundle, unit) {
                Some(p) => write(format!("{scenario}_sweep.tsv"), &p, &mut manifest)?,
                None => manifest
                    .notes
                    .push("no adoption sweep in this scenario; plot data not written".to_string()),
            },
        }
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let path = dir.join("manifest.json");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
