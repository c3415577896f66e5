//! Sample containers and CSV ingestion.
//!
//! A [`Dataset`] pairs n covariate observations (plain vectors or curves on
//! a shared grid) with n multivariate responses. The [`DistanceMatrix`] is
//! the covariate-only cache every localized estimator reads from; it is
//! built once and never touched by response permutations.

use crate::error::{Error, Result};
use crate::metrics::{self, CovariateValue};
use std::fmt::Write as _;
use std::path::Path;

/// The covariate side of a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariates {
    /// One row per observation, all rows the same length.
    Vectors(Vec<Vec<f64>>),
    /// One curve per observation, sampled on the shared strictly
    /// increasing `grid`.
    Curves {
        grid: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl Covariates {
    pub fn len(&self) -> usize {
        match self {
            Covariates::Vectors(rows) => rows.len(),
            Covariates::Curves { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Borrowed view of observation `i`, in the form [`crate::metrics::distance`] takes.
    pub fn value_at(&self, i: usize) -> CovariateValue<'_> {
        match self {
            Covariates::Vectors(rows) => CovariateValue::Vector(&rows[i]),
            Covariates::Curves { grid, values } => CovariateValue::Curve {
                grid,
                values: &values[i],
            },
        }
    }

    /// All observations as borrowed views, for the bulk weight helpers.
    pub fn values(&self) -> Vec<CovariateValue<'_>> {
        (0..self.len()).map(|i| self.value_at(i)).collect()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Covariates::Vectors(rows) => validate_matrix(rows, "covariates"),
            Covariates::Curves { grid, values } => {
                metrics::validate_grid(grid)?;
                validate_matrix(values, "covariate curves")?;
                if values[0].len() != grid.len() {
                    return Err(Error::DimensionMismatch(values[0].len(), grid.len()));
                }
                Ok(())
            }
        }
    }
}

fn validate_matrix(rows: &[Vec<f64>], what: &'static str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let width = rows[0].len();
    if width == 0 {
        return Err(Error::InvalidArgument(format!("{what} have zero columns")));
    }
    for row in rows {
        if row.len() != width {
            return Err(Error::DimensionMismatch(row.len(), width));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(what));
        }
    }
    Ok(())
}

/// A validated regression sample: covariates, responses, column names.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub covariates: Covariates,
    /// n rows of dimension p.
    pub responses: Vec<Vec<f64>>,
    pub covariate_names: Vec<String>,
    pub response_names: Vec<String>,
}

impl Dataset {
    /// Builds and validates. Requires aligned row counts, p >= 1, finite
    /// entries, and name lists matching the column counts (empty lists are
    /// filled with positional defaults).
    pub fn new(
        covariates: Covariates,
        responses: Vec<Vec<f64>>,
        covariate_names: Vec<String>,
        response_names: Vec<String>,
    ) -> Result<Self> {
        covariates.validate()?;
        validate_matrix(&responses, "responses")?;
        if covariates.len() != responses.len() {
            return Err(Error::InvalidArgument(format!(
                "covariate rows ({}) and response rows ({}) differ",
                covariates.len(),
                responses.len()
            )));
        }
        let p = responses[0].len();
        let response_names = default_names(response_names, p, "y")?;
        let covariate_width = match &covariates {
            Covariates::Vectors(rows) => rows[0].len(),
            Covariates::Curves { grid, .. } => grid.len(),
        };
        let covariate_names = default_names(covariate_names, covariate_width, "x")?;
        Ok(Dataset {
            covariates,
            responses,
            covariate_names,
            response_names,
        })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn response_dim(&self) -> usize {
        self.responses[0].len()
    }
}

fn default_names(names: Vec<String>, width: usize, prefix: &str) -> Result<Vec<String>> {
    if names.is_empty() {
        return Ok((1..=width).map(|j| format!("{prefix}{j}")).collect());
    }
    if names.len() != width {
        return Err(Error::DimensionMismatch(names.len(), width));
    }
    Ok(names)
}

/// Dense symmetric matrix of pairwise covariate distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// All pairwise distances under the covariate form's own metric.
    pub fn from_covariates(c: &Covariates) -> Result<Self> {
        c.validate()?;
        let n = c.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = metrics::distance(&c.value_at(i), &c.value_at(j))?;
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    /// Builds from an arbitrary symmetric distance callback.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        DistanceMatrix { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distances from observation `i` to every observation, self included.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

// --- CSV ingestion -------------------------------------------------------

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a numeric CSV with a required header row. Returns the header
/// names and the data rows. Cell errors carry the 1-based data row number
/// and the column name.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path_str(path),
            source,
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path_str(path),
            source,
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path_str(path),
            source,
        })?;
        let row = idx + 1;
        if record.len() != headers.len() {
            return Err(Error::InvalidField {
                path: path_str(path),
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let mut parsed = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            parsed.push(parse_cell(field, path, row, &headers[j])?);
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::InvalidField {
            path: path_str(path),
            row: 1,
            column: String::new(),
            message: "no data rows after the header".into(),
        });
    }
    Ok((headers, rows))
}

fn parse_cell(field: &str, path: &Path, row: usize, column: &str) -> Result<f64> {
    if field.is_empty() {
        return Err(Error::InvalidField {
            path: path_str(path),
            row,
            column: column.to_string(),
            message: "missing value".into(),
        });
    }
    let v: f64 = field.parse().map_err(|_| Error::InvalidField {
        path: path_str(path),
        row,
        column: column.to_string(),
        message: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidField {
            path: path_str(path),
            row,
            column: column.to_string(),
            message: format!("non-finite value: {field:?}"),
        });
    }
    Ok(v)
}

/// Reads a curve grid: one row of nodes (optionally preceded by a header
/// row), or equivalently one column. Nodes must be finite and strictly
/// increasing.
pub fn read_grid_csv(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path_str(path),
            source,
        })?;
    let mut records: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path_str(path),
            source,
        })?;
        records.push(record.iter().map(|f| f.to_string()).collect());
    }
    let numeric = |fields: &[String]| fields.iter().all(|f| f.parse::<f64>().is_ok());
    // drop a single leading non-numeric header row
    if records
        .first()
        .is_some_and(|first| !numeric(first) && records.len() > 1)
    {
        records.remove(0);
    }
    let fields: Vec<String> = if records.len() == 1 {
        records.remove(0)
    } else if records.iter().all(|r| r.len() == 1) {
        records.into_iter().map(|mut r| r.remove(0)).collect()
    } else {
        return Err(Error::InvalidField {
            path: path_str(path),
            row: 1,
            column: String::new(),
            message: "grid file must hold a single row or a single column of nodes".into(),
        });
    };
    let mut grid = Vec::with_capacity(fields.len());
    for (j, field) in fields.iter().enumerate() {
        grid.push(parse_cell(field, path, 1, &format!("node {}", j + 1))?);
    }
    metrics::validate_grid(&grid)?;
    Ok(grid)
}

/// Loads responses and covariates from headered CSVs. Covariates become
/// curves when a grid file is supplied, or when every covariate header
/// cell parses as a number and the numbers form a strictly increasing
/// grid; otherwise they stay vectors.
pub fn load_dataset(
    response_csv: &Path,
    covariate_csv: &Path,
    grid_csv: Option<&Path>,
) -> Result<Dataset> {
    let (response_names, responses) = read_matrix_csv(response_csv)?;
    let (covariate_names, covariate_rows) = read_matrix_csv(covariate_csv)?;
    let grid = match grid_csv {
        Some(path) => {
            let grid = read_grid_csv(path)?;
            if grid.len() != covariate_rows[0].len() {
                return Err(Error::InvalidArgument(format!(
                    "grid has {} nodes but covariates have {} columns",
                    grid.len(),
                    covariate_rows[0].len()
                )));
            }
            Some(grid)
        }
        None => header_grid(&covariate_names),
    };
    let covariates = match grid {
        Some(grid) => Covariates::Curves {
            grid,
            values: covariate_rows,
        },
        None => Covariates::Vectors(covariate_rows),
    };
    Dataset::new(covariates, responses, covariate_names, response_names)
}

/// Interprets a fully numeric, strictly increasing header row of width
/// >= 2 as curve grid nodes.
fn header_grid(names: &[String]) -> Option<Vec<f64>> {
    if names.len() < 2 {
        return None;
    }
    let nodes: Option<Vec<f64>> = names
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    let nodes = nodes?;
    nodes.windows(2).all(|w| w[0] < w[1]).then_some(nodes)
}

/// Serializes a named matrix back to CSV text (header + rows), formatting
/// floats with the supplied formatter.
pub fn matrix_to_csv(names: &[String], rows: &[Vec<f64>], fmt: impl Fn(f64) -> String) -> String {
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt(*v));
            first = false;
        }
        out.push('\n');
    }
    out
}
