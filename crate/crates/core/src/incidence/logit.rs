use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::{Parity, Species, SurveyRecord};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 50;
const RELATIVE_LL_TOLERANCE: f64 = 1e-10;
const GRADIENT_TOLERANCE: f64 = 1e-8;
const COLLINEARITY_TOLERANCE: f64 = 1e-10;
const LL_NOISE: f64 = 1e-13;

/// One column of the treatment-coded factorial design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignTerm {
    Intercept,
    Parity(Parity),
    Species(Species),
    Interaction(Parity, Species),
}

impl DesignTerm {
    fn value(self, parity: Parity, species: Species) -> f64 {
        let on = match self {
            DesignTerm::Intercept => true,
            DesignTerm::Parity(p) => p == parity,
            DesignTerm::Species(s) => s == species,
            DesignTerm::Interaction(p, s) => p == parity && s == species,
        };
        f64::from(u8::from(on))
    }
}

impl fmt::Display for DesignTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignTerm::Intercept => f.write_str("_cons"),
            DesignTerm::Parity(p) => write!(f, "parity={p}"),
            DesignTerm::Species(s) => write!(f, "species={s}"),
            DesignTerm::Interaction(p, s) => write!(f, "parity={p}#species={s}"),
        }
    }
}

/// Reference levels for treatment coding. `None` picks the lowest level present.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogitSpec {
    pub parity_base: Option<Parity>,
    pub species_base: Option<Species>,
}

/// `mf ~ parity * species` with columns for empty cells removed.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialDesign {
    pub parity_levels: Vec<Parity>,
    pub species_levels: Vec<Species>,
    pub terms: Vec<DesignTerm>,
}

impl FactorialDesign {
    pub fn row(&self, parity: Parity, species: Species) -> DVector<f64> {
        DVector::from_iterator(
            self.terms.len(),
            self.terms.iter().map(|t| t.value(parity, species)),
        )
    }

    pub fn matrix(&self, records: &[SurveyRecord]) -> DMatrix<f64> {
        DMatrix::from_fn(records.len(), self.terms.len(), |i, j| {
            self.terms[j].value(records[i].parity, records[i].species)
        })
    }

    pub fn column_names(&self) -> Vec<String> {
        self.terms.iter().map(ToString::to_string).collect()
    }
}

#[derive(Debug, Clone)]
pub struct LogitFit {
    pub design: FactorialDesign,
    pub coefficients: DVector<f64>,
    /// Inverse of the negative Hessian at the optimum.
    pub covariance: DMatrix<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub likelihood_trace: Vec<f64>,
    pub observations: usize,
}

impl LogitFit {
    pub fn predict(&self, parity: Parity, species: Species) -> f64 {
        sigmoid(self.design.row(parity, species).dot(&self.coefficients))
    }

    /// `(name, estimate, standard error)` for each coefficient.
    pub fn coefficient_table(&self) -> Vec<(String, f64, f64)> {
        self.design
            .terms
            .iter()
            .enumerate()
            .map(|(j, t)| {
                (
                    t.to_string(),
                    self.coefficients[j],
                    self.covariance[(j, j)].max(0.0).sqrt(),
                )
            })
            .collect()
    }
}

pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^eta)` without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

pub fn log_likelihood(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| yi * e - softplus(e))
        .sum()
}

pub fn log_likelihood_gradient(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> DVector<f64> {
    let eta = x * beta;
    let resid = DVector::from_iterator(y.len(), eta.iter().zip(y).map(|(&e, &yi)| yi - sigmoid(e)));
    x.transpose() * resid
}

fn information(x: &DMatrix<f64>, beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = x * beta;
    let mut weighted = x.clone();
    for (i, &e) in eta.iter().enumerate() {
        let p = sigmoid(e);
        weighted.row_mut(i).scale_mut(p * (1.0 - p));
    }
    x.transpose() * weighted
}

/// Columns that are linear combinations of earlier ones.
fn collinear_columns(x: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut out = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut resid = col;
        for q in &basis {
            let proj = q.dot(&resid);
            resid.axpy(-proj, q, 1.0);
        }
        let r = resid.norm();
        if norm == 0.0 || r <= COLLINEARITY_TOLERANCE * norm {
            out.push(j);
        } else {
            basis.push(resid / r);
        }
    }
    out
}

/// Result of maximizing the logit likelihood on a design matrix.
#[derive(Debug, Clone)]
pub struct MatrixFit {
    pub coefficients: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Log-likelihood at the start and after every accepted step.
    pub likelihood_trace: Vec<f64>,
}

/// Maximum-likelihood logit on an arbitrary full-rank design matrix.
///
/// Newton ascent from zero with step halving whenever a full step lowers the
/// likelihood.
pub fn fit_design_matrix(x: &DMatrix<f64>, y: &[f64], names: &[String]) -> Result<MatrixFit> {
    if x.nrows() != y.len() {
        return Err(Error::validation(
            "outcome",
            format!("{} outcomes for {} design rows", y.len(), x.nrows()),
        ));
    }
    if x.nrows() == 0 {
        return Err(Error::Empty("design matrix"));
    }
    let collinear = collinear_columns(x);
    if !collinear.is_empty() {
        return Err(Error::RankDeficient {
            columns: collinear
                .iter()
                .map(|&j| names.get(j).cloned().unwrap_or_else(|| format!("x{j}")))
                .collect(),
        });
    }

    let mut beta = DVector::zeros(x.ncols());
    let mut ll = log_likelihood(x, y, &beta);
    let mut grad = log_likelihood_gradient(x, y, &beta);
    let mut trace = vec![ll];
    let mut iterations = 0;
    while grad.norm() > GRADIENT_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        let chol = information(x, &beta)
            .cholesky()
            .ok_or_else(|| Error::RankDeficient {
                columns: names.to_vec(),
            })?;
        let step = chol.solve(&grad);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate = &beta + &step * scale;
            let cand_ll = log_likelihood(x, y, &candidate);
            // Near the optimum the gain falls below rounding noise in `ll`.
            if cand_ll >= ll - LL_NOISE * (1.0 + ll.abs()) {
                accepted = Some((candidate, cand_ll));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, next_ll)) = accepted else {
            break;
        };
        let rel_change = (next_ll - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
        beta = next;
        ll = next_ll;
        trace.push(ll);
        grad = log_likelihood_gradient(x, y, &beta);
        if rel_change < RELATIVE_LL_TOLERANCE && grad.norm() <= GRADIENT_TOLERANCE {
            break;
        }
    }
    let gradient_norm = grad.norm();
    if gradient_norm > GRADIENT_TOLERANCE {
        return Err(Error::NotConverged {
            iterations,
            gradient_norm,
        });
    }
    let covariance = information(x, &beta)
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient {
            columns: names.to_vec(),
        })?;
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    Ok(MatrixFit {
        coefficients: beta,
        covariance,
        log_likelihood: ll,
        iterations,
        gradient_norm,
        likelihood_trace: trace,
    })
}

/// Fits `mf ~ parity * species` to survey records.
pub fn fit_logit(records: &[SurveyRecord], spec: LogitSpec) -> Result<LogitFit> {
    if records.is_empty() {
        return Err(Error::Empty("survey records"));
    }
    let mut cells: BTreeMap<(Parity, Species), (usize, usize)> = BTreeMap::new();
    for r in records {
        let c = cells.entry((r.parity, r.species)).or_default();
        c.0 += 1;
        c.1 += usize::from(r.mf_case);
    }
    if let Some((&(p, s), &(n, k))) = cells.iter().find(|(_, &(n, k))| k == 0 || k == n) {
        return Err(Error::Separation {
            cell: format!("parity {p} # {s}"),
            count: n,
            outcome: u8::from(k == n),
        });
    }

    let parity_levels: Vec<Parity> = records
        .iter()
        .map(|r| r.parity)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let species_levels: Vec<Species> = records
        .iter()
        .map(|r| r.species)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let parity_base = spec.parity_base.unwrap_or(parity_levels[0]);
    let species_base = spec.species_base.unwrap_or(species_levels[0]);
    if !parity_levels.contains(&parity_base) {
        return Err(Error::UnknownLevel(format!("parity {parity_base}")));
    }
    if !species_levels.contains(&species_base) {
        return Err(Error::UnknownLevel(format!("species {species_base}")));
    }

    let mut terms = vec![DesignTerm::Intercept];
    terms.extend(
        parity_levels
            .iter()
            .filter(|&&p| p != parity_base)
            .map(|&p| DesignTerm::Parity(p)),
    );
    terms.extend(
        species_levels
            .iter()
            .filter(|&&s| s != species_base)
            .map(|&s| DesignTerm::Species(s)),
    );
    for &p in parity_levels.iter().filter(|&&p| p != parity_base) {
        for &s in species_levels.iter().filter(|&&s| s != species_base) {
            if cells.contains_key(&(p, s)) {
                terms.push(DesignTerm::Interaction(p, s));
            }
        }
    }
    let design = FactorialDesign {
        parity_levels,
        species_levels,
        terms,
    };

    let x = design.matrix(records);
    let y: Vec<f64> = records
        .iter()
        .map(|r| f64::from(u8::from(r.mf_case)))
        .collect();
    let fit = fit_design_matrix(&x, &y, &design.column_names())?;
    Ok(LogitFit {
        design,
        coefficients: fit.coefficients,
        covariance: fit.covariance,
        log_likelihood: fit.log_likelihood,
        iterations: fit.iterations,
        gradient_norm: fit.gradient_norm,
        likelihood_trace: fit.likelihood_trace,
        observations: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::from_cells;
    use super::super::Species::{Buffalo, Cow};
    use super::*;

    #[test]
    fn saturated_fit_reproduces_cell_frequencies() {
        let cells = [
            (Buffalo, 2, 52, 3),
            (Buffalo, 3, 26, 6),
            (Cow, 2, 53, 4),
            (Cow, 3, 23, 8),
        ];
        let records = from_cells(&cells);
        let fit = fit_logit(&records, LogitSpec::default()).unwrap();
        assert!(fit.gradient_norm <= GRADIENT_TOLERANCE);
        for (s, p, n, k) in cells {
            let got = fit.predict(Parity::new(p).unwrap(), s);
            assert!((got - k as f64 / n as f64).abs() < 1e-6, "{s} {p}: {got}");
        }
    }

    #[test]
    fn single_cell_is_intercept_only() {
        let records = from_cells(&[(Cow, 3, 40, 10)]);
        let fit = fit_logit(&records, LogitSpec::default()).unwrap();
        assert_eq!(fit.design.terms, vec![DesignTerm::Intercept]);
        assert!((fit.predict(Parity::new(3).unwrap(), Cow) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn all_zero_cell_is_separation() {
        let records = from_cells(&[(Cow, 3, 40, 10), (Buffalo, 3, 10, 0)]);
        match fit_logit(&records, LogitSpec::default()) {
            Err(Error::Separation { cell, outcome, .. }) => {
                assert_eq!(cell, "parity 3 # buffalo");
                assert_eq!(outcome, 0);
            }
            other => panic!("expected separation, got {other:?}"),
        }
    }

    #[test]
    fn empty_base_cell_is_rank_deficient() {
        // parity 3 exists only for cows, so parity=3 and parity=3#cow coincide.
        let records = from_cells(&[(Buffalo, 2, 20, 2), (Cow, 2, 20, 4), (Cow, 3, 20, 8)]);
        match fit_logit(&records, LogitSpec::default()) {
            Err(Error::RankDeficient { columns }) => {
                assert_eq!(columns, vec!["parity=3#species=cow".to_string()]);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let records = from_cells(&[
            (Buffalo, 2, 30, 5),
            (Cow, 2, 30, 9),
            (Buffalo, 4, 12, 5),
            (Cow, 4, 15, 9),
        ]);
        let fit = fit_logit(&records, LogitSpec::default()).unwrap();
        let c = &fit.covariance;
        assert!((c - c.transpose()).amax() < 1e-12);
        let eig = c.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&v| v >= -1e-12));
    }
}
