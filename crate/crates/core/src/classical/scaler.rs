use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column maximum absolute value of the fit set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub max_abs: Vec<f64>,
}

pub fn maxabs_fit(rows: &[Vec<f64>]) -> Result<ScalerState> {
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let mut max_abs = vec![0.0f64; first.len()];
    for row in rows {
        if row.len() != max_abs.len() {
            return Err(Error::shape(max_abs.len(), row.len()));
        }
        max_abs.iter_mut().zip(row).for_each(|(m, v)| *m = m.max(v.abs()));
    }
    Ok(ScalerState { max_abs })
}

impl ScalerState {
    /// Divides by the column max; all-zero columns pass through.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.max_abs)
            .map(|(&v, &m)| if m == 0.0 { v } else { v / m })
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}
