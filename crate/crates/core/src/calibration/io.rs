use serde::{Deserialize, Serialize};

use super::{Channel, Observation, ObservationSet};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    camera_id: String,
    channel: String,
    exposure: f64,
    irradiance: f64,
    intensity: f64,
}

/// Writes observation sets as `camera_id,channel,exposure,irradiance,intensity`.
pub fn write_observations_csv(sets: &[ObservationSet]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["camera_id", "channel", "exposure", "irradiance", "intensity"])?;
    for set in sets {
        for o in &set.observations {
            writer.write_record([
                set.camera_id.clone(),
                set.channel.to_string(),
                format!("{:e}", o.exposure),
                format!("{:e}", o.irradiance),
                format!("{:e}", o.intensity),
            ])?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses observation CSV, grouping rows by `(camera_id, channel)` in order
/// of first appearance. Errors name the 1-based line.
pub fn parse_observations_csv(text: &str) -> Result<Vec<ObservationSet>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut sets: Vec<ObservationSet> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(index + 2);
            Error::Parse {
                record: index + 1,
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(index + 2);
        let fail = |message: String| Error::Parse {
            record: index + 1,
            line,
            message,
        };
        let row: Row = record.deserialize(None).map_err(|e| fail(e.to_string()))?;
        let channel: Channel = row.channel.parse().map_err(|e: Error| fail(e.to_string()))?;
        let obs =
            Observation::with_exposure(row.irradiance, row.intensity, row.exposure).map_err(|e| fail(e.to_string()))?;
        match sets
            .iter_mut()
            .find(|s| s.camera_id == row.camera_id && s.channel == channel)
        {
            Some(set) => set.observations.push(obs),
            None => sets.push(ObservationSet {
                camera_id: row.camera_id,
                channel,
                observations: vec![obs],
            }),
        }
    }
    Ok(sets)
}
