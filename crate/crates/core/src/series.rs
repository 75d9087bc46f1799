//! Fixed-length hourly series helpers.
//!
//! The operating day is 24 one-hour periods. Hour `t` (1..=24) lives at
//! index `t - 1`; helpers here keep that mapping in one place.

use crate::error::{CoreError, Result};

/// Number of scheduling periods in one operating day.
pub const HOURS: usize = 24;

/// One value per hour of the operating day, index 0 = hour 1.
pub type Hourly = [f64; HOURS];

/// An all-zero day.
pub const ZERO_DAY: Hourly = [0.0; HOURS];

/// Builds a series from a per-hour closure over 1-based hours.
pub fn per_hour(f: impl Fn(usize) -> f64) -> Hourly {
    std::array::from_fn(|i| f(i + 1))
}

pub fn sum(series: &Hourly) -> f64 {
    series.iter().sum()
}

pub fn scale(series: &Hourly, factor: f64) -> Hourly {
    series.map(|v| v * factor)
}

pub fn add(a: &Hourly, b: &Hourly) -> Hourly {
    std::array::from_fn(|i| a[i] + b[i])
}

/// Checks every entry is finite, as a precondition guard.
pub fn ensure_finite(series: &Hourly, what: &str) -> Result<()> {
    for (i, v) in series.iter().enumerate() {
        if !v.is_finite() {
            return Err(CoreError::invalid(format!(
                "{what}: non-finite value {v} at hour {}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Checks every entry sits inside `[lo, hi]`.
pub fn ensure_in_range(series: &Hourly, lo: f64, hi: f64, what: &str) -> Result<()> {
    ensure_finite(series, what)?;
    for (i, v) in series.iter().enumerate() {
        if *v < lo || *v > hi {
            return Err(CoreError::invalid(format!(
                "{what}: value {v} at hour {} outside [{lo}, {hi}]",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Converts a slice to an `Hourly`, rejecting any other length.
pub fn from_slice(values: &[f64], what: &str) -> Result<Hourly> {
    let arr: Hourly = values.try_into().map_err(|_| {
        CoreError::invalid(format!("{what}: expected {HOURS} values, got {}", values.len()))
    })?;
    ensure_finite(&arr, what)?;
    Ok(arr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_hour_uses_one_based_hours() {
        let s = per_hour(|h| h as f64);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[23], 24.0);
        assert_eq!(sum(&s), 300.0);
    }

    #[test]
    fn from_slice_rejects_bad_lengths() {
        assert!(from_slice(&[1.0; 23], "x").is_err());
        assert!(from_slice(&[1.0; 24], "x").is_ok());
        let mut v = [0.0; 24];
        v[5] = f64::NAN;
        assert!(from_slice(&v, "x").is_err());
    }
}
