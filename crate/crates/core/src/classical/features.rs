use std::fs::File;
use std::path::Path;

use crate::data::TaskId;
use crate::error::{Error, Result};

/// Length of one aggregate acoustic feature vector.
pub const FEATURE_DIM: usize = 62;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub session_id: String,
    pub task: Option<TaskId>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(session_id: impl Into<String>, task: Option<TaskId>, values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::Features(format!(
                "expected {FEATURE_DIM} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Features("non-finite feature value".into()));
        }
        Ok(Self {
            session_id: session_id.into(),
            task,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn header() -> Vec<String> {
    let mut h = vec!["session_id".to_string(), "task".to_string()];
    h.extend((0..FEATURE_DIM).map(|i| format!("f{i}")));
    h
}

/// Reads `session_id,task,f0..f61`; an empty task cell means untagged.
pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != header() {
        return Err(Error::Features("header must be session_id,task,f0..f61".into()));
    }
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let task = match record.get(1).unwrap_or("") {
            "" => None,
            name => Some(name.parse()?),
        };
        let values = record
            .iter()
            .skip(2)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Features(format!("row {}: bad number {v:?}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(FeatureVector::new(&record[0], task, values)?);
    }
    Ok(out)
}

pub fn write_features(path: impl AsRef<Path>, features: &[FeatureVector]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(header())?;
    for f in features {
        let mut row = vec![
            f.session_id.clone(),
            f.task.map(|t| t.name().to_string()).unwrap_or_default(),
        ];
        row.extend(f.values.iter().map(|v| v.to_string()));
        writer.write_record(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
