//! Merges per-round run CSVs into one tidy table of regret curves.

use std::path::Path;

use crate::error::{Error, Result};

use super::output::CSV_HEADER;

pub const CURVES_HEADER: [&str; 4] = ["run_id", "t", "regret", "bound"];

/// `run_id,t,regret,bound` rows for each input file, in the order given.
/// The run id is the file stem.
pub fn tidy_curves(inputs: &[impl AsRef<Path>]) -> Result<Vec<u8>> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let err = |p: &Path, e: csv::Error| Error::Config(format!("{}: {e}", p.display()));
    out.write_record(CURVES_HEADER)
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    for input in inputs {
        let path = input.as_ref();
        let run_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| Error::Config(format!("{} has no file name", path.display())))?;
        let mut reader = csv::Reader::from_path(path).map_err(|e| err(path, e))?;
        let header = reader.headers().map_err(|e| err(path, e))?.clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Config(format!(
                "{} is not a run CSV (header {:?})",
                path.display(),
                header.iter().collect::<Vec<_>>()
            )));
        }
        for row in reader.records() {
            let row = row.map_err(|e| err(path, e))?;
            out.write_record([&run_id, &row[0], &row[3], &row[5]])
                .map_err(|e| err(path, e))?;
        }
    }
    out.into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))
}
