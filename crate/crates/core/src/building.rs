//! Building users: thermal comfort, baseline loads, and demand response.
//!
//! Each building has an electric baseline and a heat baseline driven by a
//! first-order thermal model. Comfort is expressed through a linear PMV
//! index; the admissible indoor temperature band (tight 08:00-19:00, relaxed
//! otherwise) bounds how much heat load can be cut. Electric flexibility is
//! split into shiftable load (daily sum zero) and interruptible load.

use crate::error::{ConstraintId, CoreError, Result, Violation};
use crate::series::{ensure_finite, Hourly, HOURS};
use serde::{Deserialize, Serialize};

/// Hours (1-based, inclusive) using the tight PMV cap.
const DAYTIME: std::ops::RangeInclusive<usize> = 8..=19;
const PMV_CAP_DAY: f64 = 0.5;
const PMV_CAP_NIGHT: f64 = 0.9;

// ============================================================================
// Parameters
// ============================================================================

/// Physical and behavioral parameters of one building user.
///
/// `heat_transfer` is in W/(m^2 C), areas in m^2, volumes in m^3, the air
/// constants in kJ/(kg C) and kg/m^3. Discomfort coefficients are Y/kW^2 per
/// hour of shifted (`omega`), interrupted (`vartheta`), and cut (`theta`)
/// load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingParams {
    pub heat_transfer: f64,
    pub surface_area: f64,
    pub volume: f64,
    pub air_specific_heat: f64,
    pub air_density: f64,
    pub metabolic_rate: f64,
    pub clothing_resistance: f64,
    pub skin_temp: f64,
    pub omega: f64,
    pub vartheta: f64,
    pub theta: f64,
}

impl BuildingParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("heat_transfer", self.heat_transfer),
            ("surface_area", self.surface_area),
            ("volume", self.volume),
            ("air_specific_heat", self.air_specific_heat),
            ("air_density", self.air_density),
            ("metabolic_rate", self.metabolic_rate),
            ("clothing_resistance", self.clothing_resistance),
            ("skin_temp", self.skin_temp),
            ("omega", self.omega),
            ("vartheta", self.vartheta),
            ("theta", self.theta),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::invalid(format!(
                    "building parameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Envelope conductance K*F in kW/C.
    pub fn conductance_kw(&self) -> f64 {
        self.heat_transfer * self.surface_area / 1000.0
    }

    /// Indoor-air thermal capacitance c*rho*V in kWh/C.
    pub fn capacitance_kwh(&self) -> f64 {
        self.air_specific_heat * self.air_density * self.volume / 3600.0
    }
}

// ============================================================================
// Comfort
// ============================================================================

/// Predicted mean vote at an indoor temperature:
/// `2.43 - 3.76 (T_s - t_in) / (M (I_cl + 0.1))`.
pub fn pmv(params: &BuildingParams, t_in: f64) -> f64 {
    let denom = params.metabolic_rate * (params.clothing_resistance + 0.1);
    2.43 - 3.76 * (params.skin_temp - t_in) / denom
}

fn pmv_inverse(params: &BuildingParams, target: f64) -> f64 {
    let denom = params.metabolic_rate * (params.clothing_resistance + 0.1);
    params.skin_temp - (2.43 - target) * denom / 3.76
}

/// PMV cap for a 1-based hour: 0.5 inside 08:00-19:00, 0.9 otherwise.
pub fn pmv_cap(hour: usize) -> f64 {
    if DAYTIME.contains(&hour) {
        PMV_CAP_DAY
    } else {
        PMV_CAP_NIGHT
    }
}

/// Admissible indoor temperature band `(t_min, t_max)` at a 1-based hour,
/// obtained by inverting the PMV expression at the hour's cap.
pub fn comfort_band(params: &BuildingParams, hour: usize) -> (f64, f64) {
    let cap = pmv_cap(hour);
    (pmv_inverse(params, -cap), pmv_inverse(params, cap))
}

// ============================================================================
// Heat load
// ============================================================================

/// Baseline building heat demand (kW) from the first-order thermal model.
///
/// The expression reduces algebraically to the steady-state envelope loss
/// `K*F*(t_in - t_out)` for any step length; the full form is kept so the
/// model reads the same as its source.
pub fn baseline_heat_load(params: &BuildingParams, t_in: f64, t_out: f64, dt: f64) -> f64 {
    assert!(dt > 0.0, "baseline_heat_load: non-positive step {dt}");
    let g = params.conductance_kw();
    let c = params.capacitance_kwh();
    let gap = t_in - t_out;
    (gap + g * gap / c * dt) / (1.0 / g + dt / c)
}

// ============================================================================
// Baselines and demand response
// ============================================================================

/// Per-hour baselines and response envelopes for one building.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineProfile {
    /// Baseline electric load (kW).
    pub p0: Hourly,
    /// Baseline heat load (kW) at the set-point temperature.
    pub h0: Hourly,
    /// Outdoor temperature (C).
    pub t_out: Hourly,
    /// Shiftable-load box per hour (kW, lower bound <= 0 <= upper bound).
    pub tsl_min: Hourly,
    pub tsl_max: Hourly,
    /// Interruptible-load cap per hour (kW).
    pub il_max: Hourly,
    /// Minimum admissible heat load per hour (kW), from the lower comfort
    /// temperature.
    pub h_min: Hourly,
}

impl BaselineProfile {
    /// Derives a profile from raw series: heat baselines from the thermal
    /// model at the set-point, heat floors at the hour's lower comfort
    /// temperature (clamped at zero), and electric flexibility boxes as
    /// `flex_fraction` of the hourly baseline.
    pub fn derive(
        params: &BuildingParams,
        p0: Hourly,
        t_out: Hourly,
        t_set: Hourly,
        flex_fraction: f64,
        dt: f64,
    ) -> Result<Self> {
        params.validate()?;
        ensure_finite(&p0, "electric baseline")?;
        ensure_finite(&t_out, "outdoor temperature")?;
        ensure_finite(&t_set, "indoor set-point")?;
        if !(0.0..=1.0).contains(&flex_fraction) {
            return Err(CoreError::invalid(format!(
                "flexibility fraction {flex_fraction} outside [0, 1]"
            )));
        }
        if p0.iter().any(|&v| v < 0.0) {
            return Err(CoreError::invalid("electric baseline has negative hours"));
        }

        let mut h0 = [0.0; HOURS];
        let mut h_min = [0.0; HOURS];
        for t in 0..HOURS {
            let hour = t + 1;
            let (band_lo, band_hi) = comfort_band(params, hour);
            if t_set[t] < band_lo - 1e-9 || t_set[t] > band_hi + 1e-9 {
                return Err(CoreError::invalid(format!(
                    "set-point {} C at hour {hour} outside comfort band [{band_lo:.2}, {band_hi:.2}]",
                    t_set[t]
                )));
            }
            let load = baseline_heat_load(params, t_set[t], t_out[t], dt);
            if load < 0.0 {
                return Err(CoreError::invalid(format!(
                    "set-point below outdoor temperature at hour {hour}: heat load would be negative"
                )));
            }
            h0[t] = load;
            h_min[t] = baseline_heat_load(params, band_lo, t_out[t], dt).max(0.0);
        }

        Ok(BaselineProfile {
            p0,
            h0,
            t_out,
            tsl_min: p0.map(|v| -flex_fraction * v),
            tsl_max: p0.map(|v| flex_fraction * v),
            il_max: p0.map(|v| flex_fraction * v),
            h_min,
        })
    }

    /// Largest admissible heat cut per hour.
    pub fn ch_max(&self) -> Hourly {
        std::array::from_fn(|t| self.h0[t] - self.h_min[t])
    }
}

/// One building's demand-response decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandResponse {
    /// Shifted electric load per hour, signed (kW); daily sum must be 0.
    pub tsl: Hourly,
    /// Interrupted electric load per hour (kW, >= 0).
    pub il: Hourly,
    /// Cut heat load per hour (kW, >= 0).
    pub ch: Hourly,
}

impl DemandResponse {
    pub fn zero() -> Self {
        DemandResponse {
            tsl: [0.0; HOURS],
            il: [0.0; HOURS],
            ch: [0.0; HOURS],
        }
    }
}

/// Checks a response against its envelopes: shift box, shift daily sum,
/// interrupt box, and cut box. Violations are data, not errors.
pub fn validate_dr(base: &BaselineProfile, dr: &DemandResponse) -> Vec<Violation> {
    let mut out = Vec::new();
    for t in 0..HOURS {
        let hour = t + 1;
        if dr.tsl[t] < base.tsl_min[t] - 1e-12 || dr.tsl[t] > base.tsl_max[t] + 1e-12 {
            let over = (base.tsl_min[t] - dr.tsl[t]).max(dr.tsl[t] - base.tsl_max[t]);
            out.push(
                Violation::new(
                    ConstraintId::ShiftBox,
                    over,
                    format!(
                        "tsl {} outside [{}, {}]",
                        dr.tsl[t], base.tsl_min[t], base.tsl_max[t]
                    ),
                )
                .at_hour(hour),
            );
        }
        if dr.il[t] < -1e-12 || dr.il[t] > base.il_max[t] + 1e-12 {
            let over = (-dr.il[t]).max(dr.il[t] - base.il_max[t]);
            out.push(
                Violation::new(
                    ConstraintId::InterruptBox,
                    over,
                    format!("il {} outside [0, {}]", dr.il[t], base.il_max[t]),
                )
                .at_hour(hour),
            );
        }
        let ch_cap = base.h0[t] - base.h_min[t];
        if dr.ch[t] < -1e-12 || dr.ch[t] > ch_cap + 1e-12 {
            let over = (-dr.ch[t]).max(dr.ch[t] - ch_cap);
            out.push(
                Violation::new(
                    ConstraintId::CutBox,
                    over,
                    format!("ch {} outside [0, {ch_cap}]", dr.ch[t]),
                )
                .at_hour(hour),
            );
        }
    }
    let shift_sum: f64 = dr.tsl.iter().sum();
    let scale: f64 = (0..HOURS)
        .map(|t| base.tsl_max[t].abs().max(base.tsl_min[t].abs()))
        .sum();
    if shift_sum.abs() > 1e-9 * scale.max(1.0) {
        out.push(Violation::new(
            ConstraintId::ShiftDailySum,
            shift_sum.abs(),
            format!("shifted load sums to {shift_sum} kWh over the day, expected 0"),
        ));
    }
    out
}

/// Applies a response to the baselines: `p = p0 + tsl - il`, `h = h0 - ch`.
/// The response is assumed envelope-feasible; a negative resulting load is
/// an error naming the hour and constraint.
pub fn effective_loads(base: &BaselineProfile, dr: &DemandResponse) -> Result<(Hourly, Hourly)> {
    let mut p = [0.0; HOURS];
    let mut h = [0.0; HOURS];
    for t in 0..HOURS {
        p[t] = base.p0[t] + dr.tsl[t] - dr.il[t];
        h[t] = base.h0[t] - dr.ch[t];
        if p[t] < 0.0 {
            return Err(CoreError::invalid(format!(
                "{} @h{:02}: effective electric load {} kW is negative",
                ConstraintId::LoadNonNegative,
                t + 1,
                p[t]
            )));
        }
        if h[t] < 0.0 {
            return Err(CoreError::invalid(format!(
                "{} @h{:02}: effective heat load {} kW is negative",
                ConstraintId::LoadNonNegative,
                t + 1,
                h[t]
            )));
        }
    }
    Ok((p, h))
}
