//! Survey CSV ingestion.
//!
//! Columns (exact names, any order; extra columns are ignored with a warning):
//! `animal_id,species,parity,mf_case,died,peak_yield_prev,peak_yield_curr,herd_size,
//! green_fodder,dry_fodder,concentrate,mineral_mix,fodder_area,labor,milk_price,
//! animal_value,treatment_cost`. Booleans are `0`/`1`.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result, RowError};
use crate::incidence::{Parity, Species, SurveyRecord};

pub const SURVEY_COLUMNS: [&str; 17] = [
    "animal_id",
    "species",
    "parity",
    "mf_case",
    "died",
    "peak_yield_prev",
    "peak_yield_curr",
    "herd_size",
    "green_fodder",
    "dry_fodder",
    "concentrate",
    "mineral_mix",
    "fodder_area",
    "labor",
    "milk_price",
    "animal_value",
    "treatment_cost",
];

pub fn read_survey_csv(path: impl AsRef<Path>) -> Result<Vec<SurveyRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_survey(file, &path.display().to_string())
}

/// Parse survey rows from any reader; `source_name` labels diagnostics.
pub fn read_survey<R: Read>(reader: R, source_name: &str) -> Result<Vec<SurveyRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_error(source_name, e)),
    };
    // A file with no bytes at all has no header either.
    if headers.is_empty() {
        return Err(Error::Rows {
            source_name: source_name.to_string(),
            errors: vec![RowError {
                line: 1,
                message: "missing header row".into(),
            }],
        });
    }

    let mut index = [0usize; SURVEY_COLUMNS.len()];
    let mut missing = Vec::new();
    for (slot, name) in index.iter_mut().zip(SURVEY_COLUMNS) {
        match headers.iter().position(|h| h.trim() == name) {
            Some(i) => *slot = i,
            None => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Rows {
            source_name: source_name.to_string(),
            errors: vec![RowError {
                line: 1,
                message: format!("missing column(s): {}", missing.join(", ")),
            }],
        });
    }
    let extra: Vec<_> = headers
        .iter()
        .filter(|h| !SURVEY_COLUMNS.contains(&h.trim()))
        .collect();
    if !extra.is_empty() {
        log::warn!(
            "{source_name}: ignoring extra column(s): {}",
            extra.join(", ")
        );
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let cell = |c: usize| row.get(index[c]).unwrap_or("").trim();
        match parse_row(&cell) {
            Ok(r) => records.push(r),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(Error::Rows {
            source_name: source_name.to_string(),
            errors,
        })
    }
}

fn csv_error(source_name: &str, e: csv::Error) -> Error {
    Error::Parse {
        path: source_name.into(),
        message: e.to_string(),
    }
}

fn parse_row<'a>(cell: &impl Fn(usize) -> &'a str) -> std::result::Result<SurveyRecord, String> {
    let col = |c: usize| SURVEY_COLUMNS[c];
    let num = |c: usize| -> std::result::Result<f64, String> {
        let s = cell(c);
        let v: f64 = s
            .parse()
            .map_err(|_| format!("{}: cannot parse `{s}` as a number", col(c)))?;
        if !v.is_finite() || v < 0.0 {
            return Err(format!("{}: {v} must be finite and nonnegative", col(c)));
        }
        Ok(v)
    };
    let int = |c: usize| -> std::result::Result<u32, String> {
        let s = cell(c);
        s.parse()
            .map_err(|_| format!("{}: cannot parse `{s}` as a nonnegative integer", col(c)))
    };
    let flag = |c: usize| -> std::result::Result<bool, String> {
        match cell(c) {
            "0" => Ok(false),
            "1" => Ok(true),
            s => Err(format!("{}: expected 0 or 1, found `{s}`", col(c))),
        }
    };

    let animal_id = cell(0).to_string();
    if animal_id.is_empty() {
        return Err("animal_id: must not be empty".into());
    }
    let species: Species = cell(1).parse().map_err(|e| format!("species: {e}"))?;
    let parity = Parity::new(int(2)?).map_err(|e| format!("parity: {e}"))?;
    let mf_case = flag(3)?;
    let died = flag(4)?;
    if died && !mf_case {
        return Err("death without recorded MF case".into());
    }
    Ok(SurveyRecord {
        animal_id,
        species,
        parity,
        mf_case,
        died,
        peak_yield_prev: num(5)?,
        peak_yield_curr: num(6)?,
        herd_size: int(7)?,
        green_fodder: num(8)?,
        dry_fodder: num(9)?,
        concentrate: num(10)?,
        mineral_mix: num(11)?,
        fodder_area: num(12)?,
        labor: int(13)?,
        milk_price: num(14)?,
        animal_value: num(15)?,
        treatment_cost: num(16)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "animal_id,species,parity,mf_case,died,peak_yield_prev,peak_yield_curr,herd_size,green_fodder,dry_fodder,concentrate,mineral_mix,fodder_area,labor,milk_price,animal_value,treatment_cost\n";

    fn parse(body: &str) -> Result<Vec<SurveyRecord>> {
        read_survey(format!("{HEADER}{body}").as_bytes(), "test")
    }

    #[test]
    fn header_only() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn one_row() {
        let r = parse("x1,cow,6,1,0,10,11,4,20,10,3.5,0.03,0.5,2,30,53333,2882\n").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].parity.get(), 5);
        assert!(r[0].mf_case && !r[0].died);
    }

    #[test]
    fn death_without_case() {
        let err = parse("ok,cow,2,0,0,10,11,4,20,10,3.5,0.03,0.5,2,30,53333,0\nbad,cow,2,0,1,10,11,4,20,10,3.5,0.03,0.5,2,30,53333,0\n")
            .unwrap_err();
        match err {
            Error::Rows { errors, .. } => {
                assert_eq!(errors.len(), 1);
                assert_eq!(errors[0].line, 3);
                assert_eq!(errors[0].message, "death without recorded MF case");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_all_reported() {
        let err = parse("a,goat,2,0,0,10,11,4,20,10,3.5,0.03,0.5,2,30,53333,0\nb,cow,2,0,0,ten,11,4,20,10,3.5,0.03,0.5,2,30,53333,0\n")
            .unwrap_err();
        match err {
            Error::Rows { errors, .. } => {
                assert_eq!(errors.len(), 2);
                assert!(errors[1].message.starts_with("peak_yield_prev"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_column() {
        let text = "animal_id,species,parity\nx,cow,2\n";
        let err = read_survey(text.as_bytes(), "t").unwrap_err();
        assert!(err.to_string().contains("mf_case") || format!("{err:?}").contains("mf_case"));
    }

    #[test]
    fn extra_column_tolerated() {
        let text = format!(
            "village,{}v1,x,buffalo,3,1,1,10,11,4,20,10,3.5,0.03,0.5,2,45,74250,0\n",
            HEADER
        );
        let r = read_survey(text.as_bytes(), "t").unwrap();
        assert_eq!(r[0].animal_id, "x");
        assert!(r[0].died);
    }
}
