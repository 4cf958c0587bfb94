//! CSV and JSON emission. Both forms carry the same rows in the same order.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use restricted_approx::report::ReportRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn write_rows<W: Write>(rows: &[ReportRow], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)
        }
    }
}

/// Writes `<dir>/<name>.<ext>`, creating `dir` if needed.
pub fn write_report(
    rows: &[ReportRow],
    format: Format,
    dir: &Path,
    name: &str,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.{}", format.extension()));
    let file = std::fs::File::create(&path)?;
    write_rows(rows, format, std::io::BufWriter::new(file))?;
    Ok(path)
}

pub fn read_csv(text: &str) -> csv::Result<Vec<ReportRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
