use crate::run::ResultRow;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("need at least 3 distinct x values, got {0}")]
    InsufficientData(usize),
    #[error("unknown numeric column {0:?}")]
    UnknownColumn(String),
    #[error("log-log fit needs positive values; {column}={value}")]
    NonPositive { column: String, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// (x, median y) per distinct x, ascending.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[mid] } else { (values[mid - 1] + values[mid]) / 2.0 })
}

/// Ordinary least squares of y on x: (slope, intercept).
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Median y per distinct x.
pub fn medians(pairs: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut by_x: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for (x, y) in pairs {
        by_x.entry(x.to_bits()).or_insert_with(|| (x, Vec::new())).1.push(y);
    }
    let mut pts: Vec<(f64, f64)> = by_x.into_values().map(|(x, mut ys)| (x, median(&mut ys).expect("non-empty"))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Slope of log(median y) against log x.
pub fn fit_power_law(pairs: impl IntoIterator<Item = (f64, f64)>, expected: f64, tolerance: f64) -> Result<FitReport, ScalingError> {
    let points = medians(pairs);
    if points.len() < 3 {
        return Err(ScalingError::InsufficientData(points.len()));
    }
    for &(x, y) in &points {
        if x <= 0.0 {
            return Err(ScalingError::NonPositive { column: "x".into(), value: x });
        }
        if y <= 0.0 {
            return Err(ScalingError::NonPositive { column: "y".into(), value: y });
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let (slope, intercept) = least_squares(&logs);
    Ok(FitReport { points, slope, intercept, expected, tolerance, pass: (slope - expected).abs() <= tolerance })
}

/// Fit `y` against `x` over result rows.
pub fn check_scaling(rows: &[ResultRow], x: &str, y: &str, expected: f64, tolerance: f64) -> Result<FitReport, ScalingError> {
    let mut pairs = Vec::with_capacity(rows.len());
    for r in rows {
        let xv = r.metric(x).ok_or_else(|| ScalingError::UnknownColumn(x.into()))?;
        let yv = r.metric(y).ok_or_else(|| ScalingError::UnknownColumn(y.into()))?;
        pairs.push((xv, yv));
    }
    fit_power_law(pairs, expected, tolerance)
}
