//! Power-law fits in `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `log|value| = slope log r + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    /// `sign(value) exp(intercept)`.
    pub prefactor: f64,
    pub sign: i8,
    /// Root-mean-square residual in `log|value|`.
    pub residual: f64,
    pub r_grid: Vec<f64>,
}

/// Largest accepted residual.
pub const MAX_RESIDUAL: f64 = 0.02;

impl ScalingFit {
    pub fn accepted(&self) -> bool {
        self.residual <= MAX_RESIDUAL
    }
}

pub fn fit_scaling(values: &[(f64, f64)]) -> Result<ScalingFit> {
    if values.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 points to fit, got {}", values.len())));
    }
    if values.iter().any(|&(r, v)| !(r > 0.0) || v == 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameter("fit needs positive r and finite nonzero values".into()));
    }
    let positive = values[0].1 > 0.0;
    if values.iter().any(|&(_, v)| (v > 0.0) != positive) {
        return Err(Error::InvalidParameter("values of mixed sign; refusing to fit".into()));
    }
    let m = values.len() as f64;
    let xs: Vec<f64> = values.iter().map(|&(r, _)| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|&(_, v)| v.abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all r values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let sign: i8 = if positive { 1 } else { -1 };
    Ok(ScalingFit {
        slope,
        prefactor: f64::from(sign) * intercept.exp(),
        sign,
        residual: (rss / m).sqrt(),
        r_grid: values.iter().map(|&(r, _)| r).collect(),
    })
}
