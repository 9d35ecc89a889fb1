//! Argument parsing and command dispatch for the `milkfever` binary.
//!
//! [`run`] writes everything to the supplied writer, so commands can be driven
//! from tests without spawning a process.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use milkfever::incidence::{
    fit_logit, minimum_detectable_effect, predictive_margins, required_sample_size,
    summarize_incidence, LogitSpec, MarginFactor, PowerSpec, Species,
};
use milkfever::io::{
    build_bundle, emit_reports, loss_rows, read_parameters, read_survey_csv, render_incidence,
    render_losses, render_margins, render_oracle, render_plot_data, render_prevention,
    render_surplus, render_sweep, rows_to_csv_string, surplus_rows, sweep_rows, ParameterDocument,
    ReportFormat, ResultBundle, SweepBasis,
};
use milkfever::oracle::{compare_to_closed_form, SimConfig};
use milkfever::units::CurrencyUnit;
use milkfever::ErrorKind;

/// Environment variable naming the default `report` output directory.
pub const OUT_DIR_ENV: &str = "MILKFEVER_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "milkfever",
    version,
    about = "Milk-fever losses, prevention economics and efficiency gains"
)]
pub struct Cli {
    /// Output format; `plot` is only defined for `sweep`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Currency unit for money columns.
    #[arg(long, global = true, default_value = "crore")]
    pub unit: CurrencyUnit,

    /// Omit timestamps so identical inputs give identical bytes.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Plot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    SumOfGroups,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginsBy {
    Parity,
    Species,
    Cell,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Milk, treatment and mortality losses per group and in total.
    Losses { params: PathBuf },
    /// Producer-surplus gain if the disease were prevented.
    Surplus { params: PathBuf },
    /// Efficiency gain across adoption rates.
    Sweep {
        params: PathBuf,
        /// Comma-separated adoption rates; defaults to the document's sweep block.
        #[arg(long, value_delimiter = ',')]
        rates: Option<Vec<f64>>,
        /// Which gain to scale; defaults to the document's choice.
        #[arg(long, value_enum)]
        basis: Option<Basis>,
    },
    /// Predictive margins from the parity × species logit.
    Margins {
        survey: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        by: MarginsBy,
    },
    /// Morbidity, mortality and case fatality by species.
    Incidence { survey: PathBuf },
    /// Minimum detectable effect for a sample size, or the sample size for an effect.
    #[command(group(ArgGroup::new("size").required(true).args(["n", "target"])))]
    Power {
        /// Critical value for the significance level.
        #[arg(long = "alpha", default_value_t = 1.96)]
        t_alpha: f64,
        /// Critical value for the power.
        #[arg(long = "power", default_value_t = 0.84)]
        t_power: f64,
        /// Share assigned to treatment.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Outcome variance.
        #[arg(long = "var", default_value_t = 1.0)]
        variance: f64,
        /// Total sample size.
        #[arg(long)]
        n: Option<u64>,
        /// Effect size to detect; prints the required sample size.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Monte-Carlo herd simulation checked against the closed forms.
    Simulate {
        params: PathBuf,
        /// Group label; may be omitted for single-group documents.
        #[arg(long)]
        group: Option<String>,
        #[arg(long, default_value_t = 2020)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        replicates: u64,
        #[arg(long, default_value_t = 16)]
        streams: u32,
        /// Simulate this many in-milk animals with the group's rates.
        #[arg(long)]
        scale_to: Option<f64>,
    },
    /// Write text, CSV and plot-data reports plus a manifest.
    Report {
        params: PathBuf,
        #[arg(long = "out", env = OUT_DIR_ENV, default_value = "reports")]
        out: PathBuf,
    },
}

/// Failure with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

impl From<milkfever::Error> for CliError {
    fn from(e: milkfever::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Validation => EXIT_VALIDATION,
            ErrorKind::Computation => EXIT_COMPUTATION,
            ErrorKind::Io => EXIT_IO,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("writing output: {e}"),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

fn text_or_csv(format: Option<Format>, command: &str) -> Result<Format, CliError> {
    match format.unwrap_or(Format::Text) {
        Format::Plot => Err(usage(format!(
            "--format plot is only available for `sweep`, not `{command}`"
        ))),
        f => Ok(f),
    }
}

fn load(params: &Path) -> Result<ParameterDocument, CliError> {
    let doc = read_parameters(params)?;
    log::info!(
        "{}: scenario `{}`, sha256 {}",
        params.display(),
        doc.scenario,
        doc.input_hash
    );
    Ok(doc)
}

fn timestamp(deterministic: bool) -> Option<String> {
    (!deterministic).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn bundle(params: &Path, cli: &Cli) -> Result<ResultBundle, CliError> {
    Ok(build_bundle(&load(params)?, timestamp(cli.deterministic))?)
}

fn write_csv<T: serde::Serialize>(rows: &[T], out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| CliError {
            code: EXIT_IO,
            message: format!("writing CSV: {e}"),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let unit = cli.unit;
    match &cli.command {
        Command::Losses { params } => {
            let b = bundle(params, cli)?;
            match text_or_csv(cli.format, "losses")? {
                Format::Csv => out.write_all(rows_to_csv_string(&loss_rows(&b))?.as_bytes())?,
                _ => {
                    out.write_all(render_losses(&b, unit).as_bytes())?;
                    writeln!(out)?;
                    out.write_all(render_prevention(&b, unit).as_bytes())?;
                }
            }
        }
        Command::Surplus { params } => {
            let b = bundle(params, cli)?;
            match text_or_csv(cli.format, "surplus")? {
                Format::Csv => {
                    render_surplus(&b, unit)?;
                    out.write_all(rows_to_csv_string(&surplus_rows(&b))?.as_bytes())?
                }
                _ => out.write_all(render_surplus(&b, unit)?.as_bytes())?,
            }
        }
        Command::Sweep {
            params,
            rates,
            basis,
        } => {
            let mut b = bundle(params, cli)?;
            let basis = basis.map(|b| match b {
                Basis::SumOfGroups => SweepBasis::SumOfGroups,
                Basis::Pooled => SweepBasis::Pooled,
            });
            if rates.is_some() || basis.is_some() {
                let rates = match rates {
                    Some(r) => r.clone(),
                    None => b
                        .sweep
                        .as_ref()
                        .map(|s| s.points.iter().map(|p| p.adoption_rate).collect())
                        .unwrap_or_default(),
                };
                b = b.with_sweep_rates(&rates, basis)?;
            }
            match cli.format.unwrap_or(Format::Text) {
                Format::Text => out.write_all(render_sweep(&b, unit)?.as_bytes())?,
                Format::Csv => {
                    render_sweep(&b, unit)?;
                    out.write_all(rows_to_csv_string(&sweep_rows(&b))?.as_bytes())?
                }
                Format::Plot => {
                    let text = render_plot_data(&b, unit)
                        .ok_or_else(|| usage("the sweep has no adoption rates"))?;
                    out.write_all(text.as_bytes())?
                }
            }
        }
        Command::Margins { survey, by } => {
            let format = text_or_csv(cli.format, "margins")?;
            let records = read_survey_csv(survey)?;
            let fit = fit_logit(&records, LogitSpec::default())?;
            log::info!(
                "logit converged in {} iterations, gradient norm {:e}",
                fit.iterations,
                fit.gradient_norm
            );
            let factors: &[MarginFactor] = match by {
                MarginsBy::Parity => &[MarginFactor::Parity],
                MarginsBy::Species => &[MarginFactor::Species],
                MarginsBy::Cell => &[MarginFactor::Cell],
                MarginsBy::All => &[
                    MarginFactor::Parity,
                    MarginFactor::Species,
                    MarginFactor::Cell,
                ],
            };
            let mut margins = Vec::new();
            for &f in factors {
                margins.extend(predictive_margins(&fit, &records, f)?);
            }
            match format {
                Format::Csv => {
                    #[derive(serde::Serialize)]
                    struct Row {
                        level: String,
                        margin: f64,
                        std_err: f64,
                        z: f64,
                        p_value: f64,
                    }
                    let rows: Vec<_> = margins
                        .iter()
                        .map(|m| Row {
                            level: m.level.to_string(),
                            margin: m.margin,
                            std_err: m.std_err,
                            z: m.z,
                            p_value: m.p_value,
                        })
                        .collect();
                    write_csv(&rows, out)?
                }
                _ => out.write_all(render_margins(&fit, &margins).as_bytes())?,
            }
        }
        Command::Incidence { survey } => {
            let format = text_or_csv(cli.format, "incidence")?;
            let records = read_survey_csv(survey)?;
            let present: Vec<Species> = Species::ALL
                .into_iter()
                .filter(|s| records.iter().any(|r| r.species == *s))
                .collect();
            let summaries = summarize_incidence(&records, &present)?;
            match format {
                Format::Csv => write_csv(&summaries, out)?,
                _ => out.write_all(render_incidence(&summaries).as_bytes())?,
            }
        }
        Command::Power {
            t_alpha,
            t_power,
            p,
            variance,
            n,
            target,
        } => {
            let format = text_or_csv(cli.format, "power")?;
            let solve_for_n = n.is_none();
            let (n, effect) = match (n, target) {
                (Some(n), _) => {
                    let spec = PowerSpec {
                        t_power: *t_power,
                        t_alpha: *t_alpha,
                        treat_prop: *p,
                        variance: *variance,
                        n: *n,
                    };
                    (*n, minimum_detectable_effect(&spec)?)
                }
                (None, Some(e)) => (
                    required_sample_size(*e, *t_power, *t_alpha, *p, *variance)?,
                    *e,
                ),
                (None, None) => return Err(usage("give --n or --target")),
            };
            match format {
                Format::Csv => {
                    writeln!(out, "t_alpha,t_power,treat_prop,variance,n,effect")?;
                    writeln!(out, "{t_alpha},{t_power},{p},{variance},{n},{effect}")?;
                }
                _ => {
                    writeln!(out, "t_alpha {t_alpha}, t_power {t_power}, treated share {p}, variance {variance}")?;
                    if solve_for_n {
                        writeln!(out, "required sample size for effect {effect}: {n}")?;
                    } else {
                        writeln!(out, "minimum detectable effect at N = {n}: {effect:.4}")?;
                    }
                }
            }
        }
        Command::Simulate {
            params,
            group,
            seed,
            replicates,
            streams,
            scale_to,
        } => {
            let format = text_or_csv(cli.format, "simulate")?;
            let doc = load(params)?;
            let spec = match group {
                Some(label) => doc
                    .group(label)
                    .ok_or_else(|| usage(format!("no group `{label}` in {}", params.display())))?,
                None if doc.groups.len() == 1 => &doc.groups[0],
                None => {
                    let labels: Vec<_> =
                        doc.groups.iter().map(|g| g.params.label.as_str()).collect();
                    return Err(usage(format!(
                        "pick one with --group: {}",
                        labels.join(", ")
                    )));
                }
            };
            let mut g = spec.params.clone();
            if let Some(n) = scale_to {
                if !(n.is_finite() && *n >= 1.0) {
                    return Err(usage(format!("--scale-to {n} must be at least 1")));
                }
                g.in_milk = *n;
                g.total_animals = None;
                g.prop_in_milk = None;
            }
            let cfg = SimConfig {
                group: g,
                replicates: *replicates,
                seed: *seed,
                stream_count: *streams,
            };
            let report = compare_to_closed_form(&cfg)?;
            match format {
                Format::Csv => write_csv(&report.rows, out)?,
                _ => out.write_all(render_oracle(&report, unit).as_bytes())?,
            }
            if report.any_flagged() {
                return Err(CliError {
                    code: EXIT_COMPUTATION,
                    message:
                        "simulation disagrees with the closed form by more than 3 standard errors"
                            .into(),
                });
            }
        }
        Command::Report { params, out: dir } => {
            let b = bundle(params, cli)?;
            let formats = match cli.format {
                None => vec![ReportFormat::Text, ReportFormat::Csv, ReportFormat::Plot],
                Some(Format::Text) => vec![ReportFormat::Text],
                Some(Format::Csv) => vec![ReportFormat::Csv],
                Some(Format::Plot) => vec![ReportFormat::Plot],
            };
            let manifest = emit_reports(&b, dir, &formats, unit)?;
            for f in &manifest.files {
                writeln!(out, "wrote {}", dir.join(f).display())?;
            }
            writeln!(out, "wrote {}", dir.join("manifest.json").display())?;
            for n in &manifest.notes {
                writeln!(out, "note: {n}")?;
            }
        }
    }
    Ok(())
}
