//! Per-animal Monte-Carlo simulation of a group's yearly losses.
//!
//! Each replicate walks every in-milk animal: it falls ill with probability
//! `P_MF`; a case dies with probability `P_D`, forfeiting a full lactation and
//! its market value, otherwise it is treated at cost `TC` and loses
//! `Y_L · P_MFD · P_MYR` litres. The sample means are an independent check on
//! the closed forms in [`crate::loss`].
//!
//! Replicates are split into `stream_count` contiguous batches. Batch `s` draws
//! from ChaCha8 stream `s` under the configured seed, and batch summaries are
//! merged in stream order, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{total_economic_loss, GroupParameters};

/// Counts beyond this lose integer precision in an `f64` accumulator.
const MAX_REPLICATES: u64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub group: GroupParameters,
    pub replicates: u64,
    pub seed: u64,
    pub stream_count: u32,
}

impl SimConfig {
    pub fn new(group: GroupParameters, replicates: u64, seed: u64) -> Self {
        SimConfig {
            group,
            replicates,
            seed,
            stream_count: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        if self.replicates == 0 {
            return Err(Error::validation("replicates", "must be at least 1"));
        }
        if self.replicates > MAX_REPLICATES {
            return Err(Error::Degenerate(format!(
                "{} replicates overflow accumulator precision (max {MAX_REPLICATES})",
                self.replicates
            )));
        }
        if self.stream_count == 0 {
            return Err(Error::validation("stream_count", "must be at least 1"));
        }
        Ok(())
    }

    /// Whole animals simulated; fractional populations are rounded.
    pub fn animals(&self) -> u64 {
        self.group.in_milk.round() as u64
    }
}

/// Running mean and sum of squared deviations. Merging is Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        if self.count == 0.0 {
            *self = *other;
            return;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count / count;
        self.m2 += other.m2 + delta * delta * self.count * other.count / count;
        self.count = count;
    }

    fn estimate(&self) -> Estimate {
        let std_err = if self.count > 1.0 {
            (self.m2 / (self.count - 1.0) / self.count).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            std_err,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Loss components of one simulated year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate {
    pub cases: u64,
    pub deaths: u64,
    pub milk_loss: f64,
    pub mortality_loss: f64,
    pub milk_value_loss: f64,
    pub treatment_cost: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Batch {
    milk_loss: Moments,
    mortality_loss: Moments,
    milk_value_loss: Moments,
    treatment_cost: Moments,
    total: Moments,
}

impl Batch {
    fn push(&mut self, r: &Replicate) {
        self.milk_loss.push(r.milk_loss);
        self.mortality_loss.push(r.mortality_loss);
        self.milk_value_loss.push(r.milk_value_loss);
        self.treatment_cost.push(r.treatment_cost);
        self.total.push(r.total);
    }

    fn merge(&mut self, other: &Batch) {
        self.milk_loss.merge(&other.milk_loss);
        self.mortality_loss.merge(&other.mortality_loss);
        self.milk_value_loss.merge(&other.milk_value_loss);
        self.treatment_cost.merge(&other.treatment_cost);
        self.total.merge(&other.total);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub replicates: u64,
    pub animals: u64,
    pub milk_loss: Estimate,
    pub mortality_loss: Estimate,
    pub milk_value_loss: Estimate,
    pub treatment_cost: Estimate,
    pub total: Estimate,
}

struct Sampler {
    animals: u64,
    falls_ill: Bernoulli,
    dies: Bernoulli,
    survivor_milk_loss: f64,
    g: GroupParameters,
}

impl Sampler {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let g = cfg.group.clone();
        let bernoulli = |p: f64, name: &str| {
            Bernoulli::new(p).map_err(|e| Error::validation(name, e.to_string()))
        };
        Ok(Sampler {
            animals: cfg.animals(),
            falls_ill: bernoulli(g.mf_incidence, "mf_incidence")?,
            dies: bernoulli(g.case_fatality, "case_fatality")?,
            survivor_milk_loss: g.lactation_yield * g.affected_days_frac * g.yield_reduction_frac,
            g,
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Replicate {
        let mut cases = 0u64;
        let mut deaths = 0u64;
        for _ in 0..self.animals {
            if self.falls_ill.sample(rng) {
                cases += 1;
                if self.dies.sample(rng) {
                    deaths += 1;
                }
            }
        }
        let survivors = (cases - deaths) as f64;
        let deaths_f = deaths as f64;
        let milk_loss = deaths_f * self.g.lactation_yield + survivors * self.survivor_milk_loss;
        let mortality_loss = deaths_f * self.g.animal_value;
        let milk_value_loss = milk_loss * self.g.milk_price;
        let treatment_cost = survivors * self.g.treatment_cost_per_case;
        Replicate {
            cases,
            deaths,
            milk_loss,
            mortality_loss,
            milk_value_loss,
            treatment_cost,
            total: mortality_loss + milk_value_loss + treatment_cost,
        }
    }
}

fn stream_rng(seed: u64, stream: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(stream));
    rng
}

fn stream_batch(sampler: &Sampler, cfg: &SimConfig, stream: u32) -> Batch {
    let streams = u64::from(cfg.stream_count);
    let s = u64::from(stream);
    let len = cfg.replicates / streams + u64::from(s < cfg.replicates % streams);
    let mut rng = stream_rng(cfg.seed, stream);
    let mut batch = Batch::default();
    for _ in 0..len {
        batch.push(&sampler.draw(&mut rng));
    }
    batch
}

/// Draws the first `count` replicates of one stream, for inspection.
pub fn sample_replicates(cfg: &SimConfig, stream: u32, count: usize) -> Result<Vec<Replicate>> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg)?;
    let mut rng = stream_rng(cfg.seed, stream);
    Ok((0..count).map(|_| sampler.draw(&mut rng)).collect())
}

pub fn simulate_herd(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg)?;

    #[cfg(feature = "parallel")]
    let batches: Vec<Batch> = {
        use rayon::prelude::*;
        (0..cfg.stream_count)
            .into_par_iter()
            .map(|s| stream_batch(&sampler, cfg, s))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let batches: Vec<Batch> = (0..cfg.stream_count)
        .map(|s| stream_batch(&sampler, cfg, s))
        .collect();

    let mut all = Batch::default();
    for b in &batches {
        all.merge(b);
    }
    Ok(SimResult {
        replicates: cfg.replicates,
        animals: sampler.animals,
        milk_loss: all.milk_loss.estimate(),
        mortality_loss: all.mortality_loss.estimate(),
        milk_value_loss: all.milk_value_loss.estimate(),
        treatment_cost: all.treatment_cost.estimate(),
        total: all.total.estimate(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub quantity: String,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_std_err: f64,
    pub z: f64,
    /// `|z| > 3`
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub label: String,
    pub replicates: u64,
    pub animals: u64,
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }

    pub fn row(&self, quantity: &str) -> Option<&OracleRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

pub const Z_THRESHOLD: f64 = 3.0;

fn z_score(mc: Estimate, closed: f64) -> f64 {
    let diff = mc.mean - closed;
    if mc.std_err > 0.0 {
        diff / mc.std_err
    } else if diff.abs() <= 1e-9 * closed.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Scores simulated means against closed forms evaluated on `closed_form`.
pub fn score(sim: &SimResult, closed_form: &GroupParameters) -> OracleReport {
    let cf = total_economic_loss(closed_form);
    let rows = [
        ("milk_loss_liters", cf.milk_loss_liters, sim.milk_loss),
        ("mortality_loss", cf.mortality_loss, sim.mortality_loss),
        ("milk_value_loss", cf.milk_value_loss, sim.milk_value_loss),
        ("treatment_cost", cf.treatment_cost, sim.treatment_cost),
        ("total", cf.total, sim.total),
    ]
    .into_iter()
    .map(|(quantity, closed, mc)| {
        let z = z_score(mc, closed);
        OracleRow {
            quantity: quantity.to_string(),
            closed_form: closed,
            mc_mean: mc.mean,
            mc_std_err: mc.std_err,
            z,
            flagged: z.abs() > Z_THRESHOLD,
        }
    })
    .collect();
    OracleReport {
        label: closed_form.label.clone(),
        replicates: sim.replicates,
        animals: sim.animals,
        rows,
    }
}

/// Simulates `cfg` and scores it against `closed_form`, which may differ from
/// the simulated parameters to test that mismatches are caught.
pub fn compare_against(cfg: &SimConfig, closed_form: &GroupParameters) -> Result<OracleReport> {
    let sim = simulate_herd(cfg)?;
    let mut report = score(&sim, closed_form);
    report.label = cfg.group.label.clone();
    Ok(report)
}

pub fn compare_to_closed_form(cfg: &SimConfig) -> Result<OracleReport> {
    compare_against(cfg, &cfg.group)
}
