//! Supply-side device models.
//!
//! Pure parameter records plus validation / arithmetic helpers: electric
//! boiler conversion, CHP operating envelope, micro-turbine commitment
//! envelope, storage recursion, and heating-pipe loss and transport delay.
//! All powers are kW, energies kWh, temperatures C; pipe internals are
//! converted from their catalogue units in one place here.

use crate::error::{ConstraintId, CoreError, Result, Violation};
use crate::series::HOURS;
use serde::{Deserialize, Serialize};

// ============================================================================
// Electric boiler
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricBoiler {
    /// Electric-to-heat conversion efficiency, in (0, 1].
    pub eta: f64,
    /// Maximum electric input (kW).
    pub p_max: f64,
}

impl ElectricBoiler {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(CoreError::invalid(format!("boiler eta {} outside (0, 1]", self.eta)));
        }
        if !(self.p_max > 0.0) {
            return Err(CoreError::invalid("boiler p_max must be positive"));
        }
        Ok(())
    }
}

/// Heat output (kW) for an electric input within the boiler's range.
pub fn eb_heat(eb: &ElectricBoiler, p_in: f64) -> Result<f64> {
    if !(0.0..=eb.p_max).contains(&p_in) {
        return Err(CoreError::invalid(format!(
            "{}: boiler input {p_in} kW outside [0, {}]",
            ConstraintId::BoilerRange,
            eb.p_max
        )));
    }
    Ok(eb.eta * p_in)
}

// ============================================================================
// CHP
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CHPUnit {
    /// Heat-to-power conversion coefficient in the condensing-state
    /// equivalent `p_zs = p + c_v * h`.
    pub c_v: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub h_max: f64,
    /// Hourly ramp bounds on electric output: `ramp_down <= 0 <= ramp_up`.
    pub ramp_down: f64,
    pub ramp_up: f64,
}

impl CHPUnit {
    pub fn validate(&self) -> Result<()> {
        if self.p_min > self.p_max {
            return Err(CoreError::invalid("CHP p_min exceeds p_max"));
        }
        if !(self.ramp_down <= 0.0 && self.ramp_up >= 0.0) {
            return Err(CoreError::invalid("CHP ramp bounds must straddle 0"));
        }
        if !(self.h_max >= 0.0) {
            return Err(CoreError::invalid("CHP h_max must be non-negative"));
        }
        Ok(())
    }
}

/// Condensing-state equivalent power plus envelope violations for a CHP
/// trajectory. Ramps are checked between consecutive provided hours.
pub fn chp_validate(chp: &CHPUnit, p: &[f64], h: &[f64]) -> (Vec<f64>, Vec<Violation>) {
    assert_eq!(p.len(), h.len(), "chp_validate: power/heat length mismatch");
    let mut violations = Vec::new();
    let p_zs: Vec<f64> = p.iter().zip(h).map(|(pw, ht)| pw + chp.c_v * ht).collect();
    for t in 0..p.len() {
        let hour = t + 1;
        if p[t] < chp.p_min - 1e-9 || p[t] > chp.p_max + 1e-9 {
            let over = (chp.p_min - p[t]).max(p[t] - chp.p_max);
            violations.push(
                Violation::new(
                    ConstraintId::ChpPowerRange,
                    over,
                    format!("CHP power {} outside [{}, {}]", p[t], chp.p_min, chp.p_max),
                )
                .at_hour(hour),
            );
        }
        if h[t] < -1e-9 || h[t] > chp.h_max + 1e-9 {
            let over = (-h[t]).max(h[t] - chp.h_max);
            violations.push(
                Violation::new(
                    ConstraintId::ChpHeatRange,
                    over,
                    format!("CHP heat {} outside [0, {}]", h[t], chp.h_max),
                )
                .at_hour(hour),
            );
        }
        if t > 0 {
            let step = p[t] - p[t - 1];
            if step < chp.ramp_down - 1e-9 || step > chp.ramp_up + 1e-9 {
                let over = (chp.ramp_down - step).max(step - chp.ramp_up);
                violations.push(
                    Violation::new(
                        ConstraintId::ChpRamp,
                        over,
                        format!(
                            "CHP ramp {step} outside [{}, {}]",
                            chp.ramp_down, chp.ramp_up
                        ),
                    )
                    .at_hour(hour),
                );
            }
        }
    }
    (p_zs, violations)
}

// ============================================================================
// Micro turbine
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroTurbine {
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_down: f64,
    pub ramp_up: f64,
}

impl MicroTurbine {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0 && self.p_min <= self.p_max) {
            return Err(CoreError::invalid("MT requires 0 < p_min <= p_max"));
        }
        if !(self.ramp_down <= 0.0 && self.ramp_up >= 0.0) {
            return Err(CoreError::invalid("MT ramp bounds must straddle 0"));
        }
        Ok(())
    }
}

/// Checks an MT trajectory against its commitment envelope.
///
/// While committed the output must sit in `[p_min, p_max]` and move within
/// the ramp bounds from the previous hour (previous output is 0 across a
/// start, so starts are ramp-limited from zero); in an off hour only
/// `p = 0` is required, so shutdowns are always admissible.
pub fn mt_validate(mt: &MicroTurbine, p: &[f64], psi: &[bool]) -> Vec<Violation> {
    assert_eq!(p.len(), psi.len(), "mt_validate: power/state length mismatch");
    let mut violations = Vec::new();
    for t in 0..p.len() {
        let hour = t + 1;
        if psi[t] {
            if p[t] < mt.p_min - 1e-9 || p[t] > mt.p_max + 1e-9 {
                let over = (mt.p_min - p[t]).max(p[t] - mt.p_max);
                violations.push(
                    Violation::new(
                        ConstraintId::MtPowerRange,
                        over,
                        format!("MT power {} outside [{}, {}]", p[t], mt.p_min, mt.p_max),
                    )
                    .at_hour(hour),
                );
            }
            let prev = if t > 0 { p[t - 1] } else { 0.0 };
            let step = p[t] - prev;
            if step < mt.ramp_down - 1e-9 || step > mt.ramp_up + 1e-9 {
                let over = (mt.ramp_down - step).max(step - mt.ramp_up);
                violations.push(
                    Violation::new(
                        ConstraintId::MtRamp,
                        over,
                        format!("MT ramp {step} outside [{}, {}]", mt.ramp_down, mt.ramp_up),
                    )
                    .at_hour(hour),
                );
            }
        } else if p[t].abs() > 1e-9 {
            violations.push(
                Violation::new(
                    ConstraintId::MtOffNonzero,
                    p[t].abs(),
                    format!("MT produces {} kW while off", p[t]),
                )
                .at_hour(hour),
            );
        }
    }
    violations
}

// ============================================================================
// Storage
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StorageKind {
    /// Electrical energy storage.
    Ees,
    /// Heat storage tank.
    Hst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageDevice {
    pub kind: StorageKind,
    pub c_min: f64,
    pub c_max: f64,
    /// Level at the start of the day; the day must also end here.
    pub c_init: f64,
    pub p_ch_max: f64,
    pub p_dc_max: f64,
    pub eta_ch: f64,
    pub eta_dc: f64,
    /// Self-discharge fraction per step.
    pub k_loss: f64,
}

impl StorageDevice {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_min <= self.c_init && self.c_init <= self.c_max) {
            return Err(CoreError::invalid(format!(
                "storage c_init {} outside [{}, {}]",
                self.c_init, self.c_min, self.c_max
            )));
        }
        for (name, eta) in [("eta_ch", self.eta_ch), ("eta_dc", self.eta_dc)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(CoreError::invalid(format!("storage {name} {eta} outside (0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.k_loss) {
            return Err(CoreError::invalid(format!(
                "storage k_loss {} outside [0, 1)",
                self.k_loss
            )));
        }
        if self.p_ch_max < 0.0 || self.p_dc_max < 0.0 {
            return Err(CoreError::invalid("storage flow caps must be non-negative"));
        }
        Ok(())
    }
}

/// One step of the storage recursion:
/// `c' = (1 - k_loss) c + (eta_ch p_ch - p_dc / eta_dc) dt`.
///
/// Flow-cap preconditions and a resulting level outside the capacity range
/// are both errors.
pub fn storage_step(s: &StorageDevice, c_t: f64, p_ch: f64, p_dc: f64, dt: f64) -> Result<f64> {
    if !(0.0..=s.p_ch_max).contains(&p_ch) {
        return Err(CoreError::invalid(format!(
            "{}: charge {p_ch} kW outside [0, {}]",
            ConstraintId::StorageChargeRate,
            s.p_ch_max
        )));
    }
    if !(0.0..=s.p_dc_max).contains(&p_dc) {
        return Err(CoreError::invalid(format!(
            "{}: discharge {p_dc} kW outside [0, {}]",
            ConstraintId::StorageDischargeRate,
            s.p_dc_max
        )));
    }
    let next = (1.0 - s.k_loss) * c_t + (s.eta_ch * p_ch - p_dc / s.eta_dc) * dt;
    if next < s.c_min - 1e-9 || next > s.c_max + 1e-9 {
        return Err(CoreError::invalid(format!(
            "{}: level {next} kWh outside [{}, {}]",
            ConstraintId::StorageCapacity,
            s.c_min,
            s.c_max
        )));
    }
    Ok(next)
}

/// Simulates a full day of charge/discharge flows and reports violations:
/// flow caps, capacity range at every hour, and (when `cyclic`) the
/// end-of-day return to the initial level within 1e-6 kWh.
pub fn storage_validate(
    s: &StorageDevice,
    p_ch: &[f64; HOURS],
    p_dc: &[f64; HOURS],
    dt: f64,
    cyclic: bool,
) -> (Vec<f64>, Vec<Violation>) {
    let mut violations = Vec::new();
    let mut levels = Vec::with_capacity(HOURS + 1);
    let mut c = s.c_init;
    levels.push(c);
    for t in 0..HOURS {
        let hour = t + 1;
        if p_ch[t] < 0.0 || p_ch[t] > s.p_ch_max + 1e-9 {
            violations.push(
                Violation::new(
                    ConstraintId::StorageChargeRate,
                    (p_ch[t] - s.p_ch_max).max(-p_ch[t]),
                    format!("charge {} outside [0, {}]", p_ch[t], s.p_ch_max),
                )
                .at_hour(hour),
            );
        }
        if p_dc[t] < 0.0 || p_dc[t] > s.p_dc_max + 1e-9 {
            violations.push(
                Violation::new(
                    ConstraintId::StorageDischargeRate,
                    (p_dc[t] - s.p_dc_max).max(-p_dc[t]),
                    format!("discharge {} outside [0, {}]", p_dc[t], s.p_dc_max),
                )
                .at_hour(hour),
            );
        }
        c = (1.0 - s.k_loss) * c + (s.eta_ch * p_ch[t] - p_dc[t] / s.eta_dc) * dt;
        if c < s.c_min - 1e-9 || c > s.c_max + 1e-9 {
            violations.push(
                Violation::new(
                    ConstraintId::StorageCapacity,
                    (s.c_min - c).max(c - s.c_max),
                    format!("level {c} outside [{}, {}]", s.c_min, s.c_max),
                )
                .at_hour(hour),
            );
        }
        levels.push(c);
    }
    if cyclic && (c - s.c_init).abs() > 1e-6 {
        violations.push(Violation::new(
            ConstraintId::StorageCycle,
            (c - s.c_init).abs(),
            format!("day ends at {c} kWh, started at {} kWh", s.c_init),
        ));
    }
    (levels, violations)
}

// ============================================================================
// Heating pipes
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatPipe {
    /// Length (m).
    pub length: f64,
    /// Inner diameter (m).
    pub diameter: f64,
    /// Mass flow (kg/s).
    pub flow: f64,
    /// Linear heat-loss coefficient (W/(m C)).
    pub lambda: f64,
    /// Water heat capacity (MJ/(kg C)), catalogue units.
    pub c_pipe: f64,
    /// Water density (kg/m^3).
    pub rho_w: f64,
}

impl HeatPipe {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("diameter", self.diameter),
            ("flow", self.flow),
            ("lambda", self.lambda),
            ("c_pipe", self.c_pipe),
            ("rho_w", self.rho_w),
        ] {
            if !(v > 0.0) {
                return Err(CoreError::invalid(format!("pipe {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Water heat capacity in J/(kg C).
    fn c_pipe_j(&self) -> f64 {
        self.c_pipe * 1e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipeLoss {
    /// Relative temperature loss along the pipe, in (0, 1).
    pub k_loss: f64,
    /// Temperature drop (C).
    pub delta_t: f64,
    /// Heat power lost (kW).
    pub delta_h: f64,
}

/// Temperature and heat loss along a pipe for a given supply temperature and
/// ambient temperature.
pub fn pipe_loss(pipe: &HeatPipe, t_start: f64, t_out: f64) -> PipeLoss {
    let k_loss = 1.0 - (-pipe.lambda * pipe.length / (pipe.c_pipe_j() * pipe.flow)).exp();
    let delta_t = k_loss * (t_start - t_out);
    let delta_h = pipe.c_pipe_j() * pipe.flow * delta_t / 1000.0;
    PipeLoss {
        k_loss,
        delta_t,
        delta_h,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipeDelay {
    pub seconds: f64,
    /// Delay rounded to whole scheduling periods.
    pub periods: usize,
}

/// Transport delay through a pipe: the water volume over the mass flow,
/// rounded to whole periods of length `dt` hours.
pub fn pipe_delay(pipe: &HeatPipe, dt: f64) -> PipeDelay {
    assert!(dt > 0.0, "pipe_delay: non-positive step {dt}");
    let seconds =
        std::f64::consts::PI * pipe.rho_w * pipe.length * pipe.diameter.powi(2) / (4.0 * pipe.flow);
    let periods = (seconds / (dt * 3600.0)).round() as usize;
    PipeDelay { seconds, periods }
}
