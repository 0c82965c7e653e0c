use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Root-mean-square deviation of `series` from `reference`.
pub fn rms(series: &[f64], reference: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let ss: f64 = series.iter().map(|x| (x - reference).powi(2)).sum();
    Ok((ss / series.len() as f64).sqrt())
}

/// Six-channel tracking error: attitude in degrees, position in metres.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RmsSummary {
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl RmsSummary {
    pub const CHANNELS: [(&'static str, &'static str); 6] = [
        ("theta", "deg"),
        ("phi", "deg"),
        ("psi", "deg"),
        ("p_x", "m"),
        ("p_y", "m"),
        ("p_z", "m"),
    ];

    pub fn values(&self) -> [f64; 6] {
        [self.theta, self.phi, self.psi, self.p_x, self.p_y, self.p_z]
    }
}
