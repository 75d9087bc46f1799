//! Error and violation types shared across the engine.
//!
//! Hard errors ([`CoreError`]) mean a computation could not produce a result
//! (bad input, infeasible model, I/O failure). Constraint violations found in
//! otherwise well-formed data are not errors: validators return them as
//! [`Violation`] values so callers can collect, rank, and report them.

use serde::{Deserialize, Serialize};

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    /// Input data fails a structural or domain precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A model is structurally infeasible (empty boxes, impossible bounds).
    #[error("infeasible model: {0}")]
    Infeasible(String),
    /// A numeric routine failed to produce a usable value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidInput(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        CoreError::Infeasible(msg.into())
    }
}

/// Identifies which constraint family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    ShiftBox,
    ShiftDailySum,
    InterruptBox,
    CutBox,
    LoadNonNegative,
    ComfortBand,
    BoilerRange,
    ChpPowerRange,
    ChpHeatRange,
    ChpRamp,
    MtPowerRange,
    MtRamp,
    MtOffNonzero,
    StorageChargeRate,
    StorageDischargeRate,
    StorageCapacity,
    StorageCycle,
    TieElectricBound,
    TieHeatBound,
    TieElectricDailySum,
    TieHeatDailySum,
    TieConservation,
    GridBound,
    PriceBound,
    PriceAverageCap,
    ElectricBalance,
    HeatBalance,
}

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("constraint id serializes");
        write!(f, "{}", s.as_str().unwrap_or("unknown"))
    }
}

/// One detected constraint violation.
///
/// `hour` is 1-based to match the operating-day convention; `magnitude` is
/// the violation size in the constraint's own unit (kW, kWh, ¥/kWh, ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hour: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<usize>,
    pub magnitude: f64,
    pub detail: String,
}

impl Violation {
    pub fn new(constraint: ConstraintId, magnitude: f64, detail: impl Into<String>) -> Self {
        Violation {
            constraint,
            hour: None,
            scenario: None,
            magnitude,
            detail: detail.into(),
        }
    }

    pub fn at_hour(mut self, hour: usize) -> Self {
        self.hour = Some(hour);
        self
    }

    pub fn in_scenario(mut self, scenario: usize) -> Self {
        self.scenario = Some(scenario);
        self
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(h) = self.hour {
            write!(f, " @h{h:02}")?;
        }
        if let Some(s) = self.scenario {
            write!(f, " s{s}")?;
        }
        write!(f, ": {} (by {:.6})", self.detail, self.magnitude)
    }
}
