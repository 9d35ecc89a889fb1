//! File formats: survey CSV, scenario parameter documents, census data and reports.

mod census;
mod params;
mod report;
mod survey_csv;

pub use census::{parse_census, read_census, Census, CensusGroup, Region, Source};
pub use params::{
    canonical_hash, parse_parameters, read_parameters, GroupMarket, GroupSpec, MarketSettings,
    ParameterDocument, SweepBasis, SweepSettings,
};
pub use report::{
    build_bundle, bundle_rows, emit_reports, loss_rows, read_rows_csv, render_incidence,
    render_losses, render_margins, render_oracle, render_plot_data, render_prevention,
    render_report, render_surplus, render_sweep, rows_to_csv_string, surplus_rows, sweep_rows,
    text_table, write_rows_csv, Manifest, MarketOutcome, Metadata, ReportFormat, ReportRow,
    ResultBundle, SurplusSection, SweepSection, POOLED_LABEL, SUM_LABEL,
};
pub use survey_csv::{read_survey, read_survey_csv, SURVEY_COLUMNS};
