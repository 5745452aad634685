//! Custom right-hand-side ingestion: a two-column CSV `(t_i, y_i)` sampled
//! at uniform nodes `t_i = i h`.

use std::fs::File;
use std::path::Path;

use volterra_heat::forward::{GridFunction, Location, Mesh};

use crate::CliError;

/// Uniformity tolerance, relative to the horizon.
const SPACING_REL_TOL: f64 = 1e-9;

/// Reads node samples from `path`. One leading header row is tolerated;
/// `#` comment lines are skipped. The nodes must satisfy `t_i = i h` within
/// [`SPACING_REL_TOL`] relative to the horizon.
pub fn read_rhs_csv(path: &Path) -> Result<GridFunction, CliError> {
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{shown}: {e}")))?;
        if record.len() != 2 {
            return Err(CliError::Config(format!(
                "{shown}: row {} has {} fields, expected two (t, y)",
                idx + 1,
                record.len()
            )));
        }
        let parsed = record[0]
            .parse::<f64>()
            .and_then(|t| record[1].parse::<f64>().map(|y| (t, y)));
        match parsed {
            Ok((t, y)) => {
                times.push(t);
                values.push(y);
            }
            // a single leading header row is fine
            Err(_) if idx == 0 && times.is_empty() => continue,
            Err(e) => {
                return Err(CliError::Config(format!("{shown}: row {}: {e}", idx + 1)));
            }
        }
    }
    if times.is_empty() {
        return Err(CliError::Config(format!("{shown}: no data rows")));
    }

    let cells = times.len();
    let horizon = *times.last().expect("nonempty");
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(CliError::Config(format!(
            "{shown}: last node must be a positive horizon, got {horizon}"
        )));
    }
    let step = horizon / cells as f64;
    for (idx, &t) in times.iter().enumerate() {
        let expected = (idx + 1) as f64 * step;
        if (t - expected).abs() > SPACING_REL_TOL * horizon {
            return Err(CliError::Config(format!(
                "{shown}: row {}: node {t} is not on the uniform grid t_i = i*{step} \
                 (expected {expected})",
                idx + 1
            )));
        }
    }
    Ok(GridFunction::new(
        Mesh::new(horizon, cells),
        Location::Nodes,
        values,
    ))
}
