//! Fidelity indicators for generated scenario paths.
//!
//! Two indicators: the lag autocorrelation of the generated path (shape
//! preservation) and the per-hour absolute deviation from a reference
//! centroid, normalized by the reference peak (level preservation).

use super::SamplePath;
use crate::error::{CoreError, Result};
use crate::series::HOURS;

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMetrics {
    /// Sample autocorrelation of the generated path at lags 0..T-1.
    pub autocorr: Vec<f64>,
    /// `|generated - reference| / max(reference)` per hour.
    pub normalized_error: Vec<f64>,
}

/// Scores a generated path against a reference centroid.
///
/// Errors if the generated path has zero variance (autocorrelation beyond
/// lag 0 is undefined) or the reference peak is zero.
pub fn scenario_fidelity_metrics(
    generated: &SamplePath,
    reference: &SamplePath,
) -> Result<FidelityMetrics> {
    let x = &generated.values;
    let r = &reference.values;

    let mean = x.iter().sum::<f64>() / HOURS as f64;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    // Threshold instead of an exact zero test: a constant path can carry
    // rounding residue from the mean subtraction.
    if var < 1e-24 {
        return Err(CoreError::Numeric(
            "autocorrelation undefined for a constant path".into(),
        ));
    }

    let mut autocorr = Vec::with_capacity(HOURS);
    for lag in 0..HOURS {
        let mut acc = 0.0;
        for t in 0..HOURS - lag {
            acc += (x[t] - mean) * (x[t + lag] - mean);
        }
        autocorr.push(acc / var);
    }

    let ref_max = r.iter().cloned().fold(f64::MIN, f64::max);
    if ref_max <= 0.0 {
        return Err(CoreError::Numeric(
            "normalized error undefined: reference peak is zero".into(),
        ));
    }
    let normalized_error = (0..HOURS).map(|t| (x[t] - r[t]).abs() / ref_max).collect();

    Ok(FidelityMetrics {
        autocorr,
        normalized_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::EnergySource;
    use crate::series::per_hour;

    fn wt(values: crate::series::Hourly) -> SamplePath {
        SamplePath::new(EnergySource::Wt, values).unwrap()
    }

    #[test]
    fn identical_paths_have_zero_error_and_unit_lag0() {
        let p = wt(per_hour(|h| (h as f64) / 24.0));
        let m = scenario_fidelity_metrics(&p, &p).unwrap();
        assert!(m.normalized_error.iter().all(|&e| e == 0.0));
        assert_eq!(m.autocorr[0], 1.0);
    }

    #[test]
    fn constant_shift_gives_flat_normalized_error() {
        let reference = wt(per_hour(|h| if h == 12 { 1.0 } else { 0.5 }));
        let shifted = wt(per_hour(|h| if h == 12 { 1.0 } else { 0.5 } - 0.1));
        let m = scenario_fidelity_metrics(&shifted, &reference).unwrap();
        for e in &m.normalized_error {
            assert!((e - 0.1).abs() < 1e-15, "got {e}");
        }
    }

    #[test]
    fn constant_generated_path_is_rejected() {
        let flat = wt([0.4; HOURS]);
        let reference = wt(per_hour(|h| (h as f64) / 30.0));
        assert!(scenario_fidelity_metrics(&flat, &reference).is_err());
    }
}
