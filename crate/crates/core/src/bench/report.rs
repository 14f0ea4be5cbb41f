use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Report tables that can be written as CSV with a fixed header.
pub trait Table: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

/// CSV with the header row even for an empty table. Floats use the
/// shortest representation that parses back to the same value.
pub fn to_csv<T: Table>(rows: &[T]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(T::HEADER)?;
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv<T: Table>(text: &str) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != T::HEADER {
        return Err(Error::InvalidArgument(format!("unexpected report header {header:?}")));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    crate::json::to_vec_pretty(value)
}

/// Report file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format '{other}'"))),
        }
    }
}

/// Writes `rows` to `path` in `format`.
pub fn emit_report<T: Table>(rows: &[T], format: Format, path: &std::path::Path) -> Result<()> {
    let bytes = match format {
        Format::Csv => to_csv(rows)?.into_bytes(),
        Format::Json => to_json(rows)?,
    };
    std::fs::write(path, bytes)?;
    Ok(())
}
