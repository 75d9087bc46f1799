//! The multi-community system model: device fleets, buildings with their
//! supply pipelines, tariffs, and the bundled two-community instance used
//! by the command line tools and tests.
//!
//! A model is stored as two files: a JSON document with all parameters and
//! a CSV table with the hourly series (outdoor temperature and baseline
//! electric load per building). [`SystemModel::assemble`] joins the two and
//! derives everything else: heat baselines, comfort envelopes, response
//! bounds, and pipeline delays.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::building::{BaselineProfile, BuildingParams};
use crate::devices::{self, CHPUnit, ElectricBoiler, HeatPipe, MicroTurbine, StorageDevice, StorageKind};
use crate::error::CoreError;
use crate::market::{ChpCost, DeviceCostParams, MtCost, OmCoefficients, TariffTable};
use crate::series::{Hourly, HOURS};
use crate::Result;

// ====================================================================
// Model types
// ====================================================================

/// One community's generation and storage fleet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cies {
    pub name: String,
    /// Installed wind capacity in kW; scenario paths scale against this.
    pub wt_capacity: f64,
    /// Installed photovoltaic capacity in kW.
    pub pv_capacity: f64,
    pub eb: ElectricBoiler,
    pub chp: CHPUnit,
    pub mt: MicroTurbine,
    pub ees: StorageDevice,
    pub hst: StorageDevice,
    pub costs: DeviceCostParams,
    /// Maximum power exchange with the external grid, either direction.
    pub grid_cap: f64,
    /// Heating network supply temperature in degrees Celsius.
    pub supply_temp: f64,
}

impl Cies {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(CoreError::invalid("community name must not be empty"));
        }
        if !(self.wt_capacity >= 0.0) || !(self.pv_capacity >= 0.0) {
            return Err(CoreError::invalid("renewable capacities must be non-negative"));
        }
        self.eb.validate()?;
        self.chp.validate()?;
        self.mt.validate()?;
        self.ees.validate()?;
        self.hst.validate()?;
        if self.ees.kind != StorageKind::Ees || self.hst.kind != StorageKind::Hst {
            return Err(CoreError::invalid(format!(
                "community {} has mismatched storage kinds",
                self.name
            )));
        }
        self.costs.validate()?;
        if !(self.grid_cap > 0.0) {
            return Err(CoreError::invalid("grid connection capacity must be positive"));
        }
        if !(self.supply_temp > 0.0) {
            return Err(CoreError::invalid("supply temperature must be positive"));
        }
        Ok(())
    }
}

/// A building user: envelope parameters, supply pipeline, and the derived
/// baseline profile with its response bounds.
#[derive(Debug, Clone)]
pub struct Building {
    pub name: String,
    /// Index of the community this building belongs to.
    pub cies: usize,
    pub params: BuildingParams,
    pub pipe: HeatPipe,
    /// Indoor set-point used to derive the baseline heat load.
    pub set_point: f64,
    /// Fraction of the hourly electric baseline available for shifting
    /// and curtailment.
    pub flex_fraction: f64,
    /// Baseline electric load before any demand response.
    pub p0: Hourly,
    /// Derived baseline profile and response envelopes.
    pub baseline: BaselineProfile,
    /// Pipeline transport delay in whole scheduling periods.
    pub delay_periods: usize,
}

/// The full system: tariffs, communities, buildings, and shared series.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub name: String,
    /// Scheduling period length in hours.
    pub dt: f64,
    pub tariff: TariffTable,
    /// Tie-line electric capacity between communities, kW.
    pub tie_electric_cap: f64,
    /// Tie-line heat capacity between communities, kW.
    pub tie_heat_cap: f64,
    /// Outdoor temperature per hour, shared by all buildings.
    pub t_out: Hourly,
    pub cies: Vec<Cies>,
    pub buildings: Vec<Building>,
}

// ====================================================================
// Serialized form
// ====================================================================

/// Building entry as stored in the JSON document, before derivation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildingSpec {
    pub name: String,
    pub cies: usize,
    pub params: BuildingParams,
    pub pipe: HeatPipe,
    pub set_point: f64,
    pub flex_fraction: f64,
}

/// System parameters as stored on disk; hourly series live in a CSV table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub dt: f64,
    pub tariff: TariffTable,
    pub tie_electric_cap: f64,
    pub tie_heat_cap: f64,
    pub cies: Vec<Cies>,
    pub buildings: Vec<BuildingSpec>,
}

/// Hourly series table: outdoor temperature plus one baseline electric
/// load column per building, keyed by building name.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub t_out: Hourly,
    pub loads: Vec<(String, Hourly)>,
}

impl SeriesTable {
    fn load_for(&self, name: &str) -> Option<&Hourly> {
        self.loads.iter().find(|(n, _)| n == name).map(|(_, l)| l)
    }
}

// ====================================================================
// Assembly and IO
// ====================================================================

impl SystemModel {
    /// Joins a parameter spec with its series table, validating every
    /// device and deriving baselines and pipeline delays.
    pub fn assemble(spec: SystemSpec, series: SeriesTable) -> Result<Self> {
        if !(spec.dt > 0.0) || !spec.dt.is_finite() {
            return Err(CoreError::invalid("period length must be positive"));
        }
        spec.tariff.validate()?;
        if !(spec.tie_electric_cap >= 0.0) || !(spec.tie_heat_cap >= 0.0) {
            return Err(CoreError::invalid("tie-line capacities must be non-negative"));
        }
        if spec.cies.is_empty() {
            return Err(CoreError::invalid("at least one community is required"));
        }
        for c in &spec.cies {
            c.validate()?;
        }
        let mut buildings = Vec::with_capacity(spec.buildings.len());
        for b in spec.buildings {
            let cies = spec.cies.get(b.cies).ok_or_else(|| {
                CoreError::invalid(format!(
                    "building {} references community {}, but only {} exist",
                    b.name,
                    b.cies,
                    spec.cies.len()
                ))
            })?;
            let p0 = *series.load_for(&b.name).ok_or_else(|| {
                CoreError::invalid(format!("series table has no load column for {}", b.name))
            })?;
            if cies.supply_temp <= series.t_out.iter().cloned().fold(f64::MIN, f64::max) {
                return Err(CoreError::invalid(format!(
                    "supply temperature of {} must exceed the warmest outdoor hour",
                    cies.name
                )));
            }
            let set = [b.set_point; HOURS];
            let baseline = BaselineProfile::derive(
                &b.params,
                p0,
                series.t_out,
                set,
                b.flex_fraction,
                spec.dt,
            )?;
            let delay = devices::pipe_delay(&b.pipe, spec.dt);
            if delay.periods >= HOURS {
                return Err(CoreError::invalid(format!(
                    "pipeline delay of {} spans the whole day",
                    b.name
                )));
            }
            buildings.push(Building {
                name: b.name,
                cies: b.cies,
                params: b.params,
                pipe: b.pipe,
                set_point: b.set_point,
                flex_fraction: b.flex_fraction,
                p0,
                baseline,
                delay_periods: delay.periods,
            });
        }
        if buildings.is_empty() {
            return Err(CoreError::invalid("at least one building is required"));
        }
        Ok(Self {
            name: spec.name,
            dt: spec.dt,
            tariff: spec.tariff,
            tie_electric_cap: spec.tie_electric_cap,
            tie_heat_cap: spec.tie_heat_cap,
            t_out: series.t_out,
            cies: spec.cies,
            buildings,
        })
    }

    /// Parameter document for writing back to disk.
    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            name: self.name.clone(),
            dt: self.dt,
            tariff: self.tariff.clone(),
            tie_electric_cap: self.tie_electric_cap,
            tie_heat_cap: self.tie_heat_cap,
            cies: self.cies.clone(),
            buildings: self
                .buildings
                .iter()
                .map(|b| BuildingSpec {
                    name: b.name.clone(),
                    cies: b.cies,
                    params: b.params,
                    pipe: b.pipe,
                    set_point: b.set_point,
                    flex_fraction: b.flex_fraction,
                })
                .collect(),
        }
    }

    /// Series table for writing back to disk.
    pub fn to_series(&self) -> SeriesTable {
        SeriesTable {
            t_out: self.t_out,
            loads: self.buildings.iter().map(|b| (b.name.clone(), b.p0)).collect(),
        }
    }

    pub fn from_readers<R: Read, S: Read>(spec: R, series: S) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_reader(spec)?;
        let series = read_series(series)?;
        Self::assemble(spec, series)
    }

    pub fn load(spec_path: &Path, series_path: &Path) -> Result<Self> {
        let spec = std::fs::File::open(spec_path)?;
        let series = std::fs::File::open(series_path)?;
        Self::from_readers(spec, series)
    }

    /// Copy with both tie-line capacities replaced; zero isolates the
    /// communities from each other.
    pub fn with_tie_caps(&self, electric: f64, heat: f64) -> Self {
        let mut out = self.clone();
        out.tie_electric_cap = electric;
        out.tie_heat_cap = heat;
        out
    }

    /// Copy with every building's flexible fraction replaced and the
    /// response envelopes re-derived.
    pub fn with_flex_fraction(&self, fraction: f64) -> Result<Self> {
        let mut out = self.clone();
        for b in &mut out.buildings {
            b.flex_fraction = fraction;
            let set = [b.set_point; HOURS];
            b.baseline =
                BaselineProfile::derive(&b.params, b.p0, self.t_out, set, fraction, self.dt)?;
        }
        Ok(out)
    }

    /// Renewable feed-in of community `j` under per-unit scenario paths.
    pub fn renewable_feed(&self, j: usize, wt_path: &Hourly, pv_path: &Hourly) -> (Hourly, Hourly) {
        let c = &self.cies[j];
        let mut wt = [0.0; HOURS];
        let mut pv = [0.0; HOURS];
        for t in 0..HOURS {
            wt[t] = c.wt_capacity * wt_path[t];
            pv[t] = c.pv_capacity * pv_path[t];
        }
        (wt, pv)
    }

    /// Largest hourly system demand over the day, electric or heat,
    /// used to scale balance tolerances.
    pub fn peak_demand(&self) -> f64 {
        let mut peak: f64 = 0.0;
        for t in 0..HOURS {
            let p: f64 = self.buildings.iter().map(|b| b.baseline.p0[t]).sum();
            let h: f64 = self.buildings.iter().map(|b| b.baseline.h0[t]).sum();
            peak = peak.max(p).max(h);
        }
        peak
    }

    /// Buildings attached to community `j`, as indices into `buildings`.
    pub fn buildings_of(&self, j: usize) -> Vec<usize> {
        (0..self.buildings.len()).filter(|&i| self.buildings[i].cies == j).collect()
    }
}

/// Reads the hourly series table. Expected header: `hour,t_out,<name>...`
/// with 24 data rows numbered 1 through 24.
pub fn read_series<R: Read>(reader: R) -> Result<SeriesTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 3 || headers.get(0) != Some("hour") || headers.get(1) != Some("t_out") {
        return Err(CoreError::invalid(
            "series table must start with columns hour,t_out followed by one load column per building",
        ));
    }
    let names: Vec<String> = headers.iter().skip(2).map(str::to_owned).collect();
    let mut t_out = [0.0; HOURS];
    let mut loads = vec![[0.0; HOURS]; names.len()];
    let mut rows = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        if idx >= HOURS {
            return Err(CoreError::invalid("series table must have exactly 24 rows"));
        }
        let hour: usize = record
            .get(0)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CoreError::invalid(format!("bad hour in series row {}", idx + 1)))?;
        if hour != idx + 1 {
            return Err(CoreError::invalid(format!(
                "series rows must be numbered 1..24 in order, found {hour} at row {}",
                idx + 1
            )));
        }
        let parse = |col: usize| -> Result<f64> {
            record
                .get(col)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CoreError::invalid(format!(
                        "bad value in series column {} row {}",
                        headers.get(col).unwrap_or("?"),
                        idx + 1
                    ))
                })
        };
        t_out[idx] = parse(1)?;
        for (b, load) in loads.iter_mut().enumerate() {
            load[idx] = parse(b + 2)?;
        }
        rows += 1;
    }
    if rows != HOURS {
        return Err(CoreError::invalid(format!("series table has {rows} rows, expected 24")));
    }
    Ok(SeriesTable { t_out, loads: names.into_iter().zip(loads).collect() })
}

/// Writes the hourly series table in the format read by [`read_series`].
pub fn write_series<W: Write>(writer: W, series: &SeriesTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["hour".to_owned(), "t_out".to_owned()];
    header.extend(series.loads.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for t in 0..HOURS {
        let mut row = vec![(t + 1).to_string(), format!("{}", series.t_out[t])];
        row.extend(series.loads.iter().map(|(_, l)| format!("{}", l[t])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

// ====================================================================
// Bundled instance
// ====================================================================

/// Time-of-use purchase tariff: valley 0.44 over hours 1-7, flat 0.7 over
/// 8-9, 14-18 and 23-24, peak 1.0 over 10-13 and 19-22.
pub fn bundled_tariff() -> TariffTable {
    let mut p_buy = [0.7; HOURS];
    for t in 0..7 {
        p_buy[t] = 0.44;
    }
    for t in [9, 10, 11, 12, 18, 19, 20, 21] {
        p_buy[t] = 1.0;
    }
    TariffTable {
        p_buy,
        p_sell: [0.4; HOURS],
        gamma_min: 0.3,
        gamma_max: 0.66,
        mu_avg_cap: 0.65,
        gamma_avg_cap: 0.5,
    }
}

fn bundled_costs() -> DeviceCostParams {
    DeviceCostParams {
        mt: MtCost { base: 1.0, marginal: 0.6, startup: 1.3 },
        chp: ChpCost {
            power_quad: 2.415e-4,
            power_lin: 0.31,
            fixed: 185.5,
            heat_quad: 2.1e-4,
            heat_lin: 0.0294,
            cross: 2.17e-7,
        },
        om: OmCoefficients {
            chp: 0.01,
            mt: 0.013,
            eb: 0.012,
            wt: 0.01,
            pv: 0.01,
            ees: 0.012,
            hst: 0.012,
        },
        mt_initially_on: false,
    }
}

fn bundled_cies(name: &str, wt_capacity: f64, pv_capacity: f64, ees_range: (f64, f64)) -> Cies {
    Cies {
        name: name.to_owned(),
        wt_capacity,
        pv_capacity,
        eb: ElectricBoiler { eta: 0.95, p_max: 600.0 },
        chp: CHPUnit {
            c_v: 0.75,
            p_min: 0.0,
            p_max: 1200.0,
            h_max: 1200.0,
            ramp_down: -250.0,
            ramp_up: 250.0,
        },
        mt: MicroTurbine { p_min: 50.0, p_max: 500.0, ramp_down: -200.0, ramp_up: 200.0 },
        ees: StorageDevice {
            kind: StorageKind::Ees,
            c_min: ees_range.0,
            c_max: ees_range.1,
            c_init: ees_range.0,
            p_ch_max: 200.0,
            p_dc_max: 200.0,
            eta_ch: 0.9,
            eta_dc: 0.9,
            k_loss: 0.001,
        },
        hst: StorageDevice {
            kind: StorageKind::Hst,
            c_min: 0.0,
            c_max: 400.0,
            c_init: 0.0,
            p_ch_max: 100.0,
            p_dc_max: 100.0,
            eta_ch: 0.95,
            eta_dc: 0.95,
            k_loss: 0.01,
        },
        costs: bundled_costs(),
        grid_cap: 1000.0,
        supply_temp: 80.0,
    }
}

fn bundled_building(
    name: &str,
    cies: usize,
    surface_area: f64,
    volume: f64,
    omega: f64,
    theta: f64,
    pipe: HeatPipe,
) -> BuildingSpec {
    BuildingSpec {
        name: name.to_owned(),
        cies,
        params: BuildingParams {
            heat_transfer: 0.5,
            surface_area,
            volume,
            air_specific_heat: 1.007,
            air_density: 1.2,
            metabolic_rate: 80.0,
            clothing_resistance: 0.161,
            skin_temp: 33.5,
            omega,
            vartheta: 0.002,
            theta,
        },
        pipe,
        set_point: 20.0,
        flex_fraction: 0.10,
    }
}

fn bundled_pipe(length: f64, diameter: f64, flow: f64) -> HeatPipe {
    HeatPipe { length, diameter, flow, lambda: 0.2, c_pipe: 4.2e-3, rho_w: 1000.0 }
}

/// Winter design-day outdoor temperature, degrees Celsius. An overcast,
/// windy day: nearly flat around -10 with a shallow evening dip.
pub fn bundled_t_out() -> Hourly {
    [
        -9.8, -10.0, -10.2, -10.4, -10.5, -10.5, -10.4, -10.2, -10.0, -9.8, -9.6, -9.5, -9.5,
        -9.6, -9.8, -10.0, -10.2, -10.4, -10.5, -10.6, -10.6, -10.5, -10.4, -10.2,
    ]
}

fn bundled_loads() -> Vec<(String, Hourly)> {
    // Electric-vehicle fleet depot: overnight charging, near idle by day.
    let user1 = [
        355.0, 360.0, 360.0, 355.0, 350.0, 340.0, 180.0, 60.0, 30.0, 25.0, 25.0, 25.0, 25.0,
        25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0, 80.0, 260.0, 330.0,
    ];
    // Event venue: daytime upkeep, doors open late afternoon, evening show.
    let user2 = [
        30.0, 30.0, 30.0, 30.0, 30.0, 35.0, 40.0, 60.0, 80.0, 45.0, 45.0, 45.0, 45.0, 120.0,
        150.0, 200.0, 300.0, 900.0, 1500.0, 1700.0, 1700.0, 1700.0, 400.0, 60.0,
    ];
    // Two-shift factory: heavy morning block, sustained afternoon shift,
    // lines powering down through the late evening.
    let user3 = [
        360.0, 355.0, 350.0, 350.0, 355.0, 420.0, 600.0, 1750.0, 2150.0, 2700.0, 2900.0,
        2900.0, 2700.0, 2300.0, 2250.0, 2250.0, 2200.0, 2300.0, 2600.0, 2550.0, 2500.0,
        2450.0, 600.0, 400.0,
    ];
    vec![
        ("user1".to_owned(), user1),
        ("user2".to_owned(), user2),
        ("user3".to_owned(), user3),
    ]
}

/// The two-community instance shipped with the tools: a solar-equipped
/// district pairing an electric-vehicle depot with a large event venue,
/// and a wind-served industrial community running a two-shift factory,
/// joined by 400 kW electric and heat tie-lines.
pub fn bundled_system() -> SystemModel {
    let spec = SystemSpec {
        name: "two-community winter day".to_owned(),
        dt: 1.0,
        tariff: bundled_tariff(),
        tie_electric_cap: 400.0,
        tie_heat_cap: 400.0,
        cies: vec![
            bundled_cies("cies1", 200.0, 1000.0, (100.0, 800.0)),
            bundled_cies("cies2", 680.0, 0.0, (80.0, 700.0)),
        ],
        buildings: vec![
            bundled_building("user1", 0, 4.5e4, 4.5e5, 0.003, 0.008, bundled_pipe(1000.0, 0.6, 200.0)),
            bundled_building("user2", 0, 5.0e4, 5.0e5, 0.002, 0.007, bundled_pipe(1500.0, 0.7, 250.0)),
            bundled_building("user3", 1, 6.2e4, 3.72e5, 0.004, 0.008, bundled_pipe(1800.0, 0.7, 250.0)),
        ],
    };
    let series = SeriesTable { t_out: bundled_t_out(), loads: bundled_loads() };
    SystemModel::assemble(spec, series).expect("bundled instance must assemble")
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bundled_instance_assembles_and_derives() {
        let sys = bundled_system();
        assert_eq!(sys.cies.len(), 2);
        assert_eq!(sys.buildings.len(), 3);
        assert_eq!(
            sys.buildings.iter().map(|b| b.delay_periods).collect::<Vec<_>>(),
            vec![0, 1, 1]
        );
        // Hour 5 sits at -10.5 degrees, a 30.5 degree gap across a
        // 22.5 kW/K envelope.
        assert_abs_diff_eq!(sys.buildings[0].baseline.h0[4], 686.25, epsilon = 1e-9);
        assert_abs_diff_eq!(sys.buildings[1].baseline.h0[4], 762.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sys.buildings[2].baseline.h0[4], 945.5, epsilon = 1e-9);
        // Response envelopes are ten percent of the hourly baseline.
        assert_abs_diff_eq!(sys.buildings[0].baseline.tsl_max[10], 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(sys.buildings[0].baseline.il_max[10], 2.5, epsilon = 1e-9);
    }

    #[test]
    fn bundled_heat_demand_fits_generation() {
        let sys = bundled_system();
        for t in 0..HOURS {
            let cies1: f64 = sys.buildings[..2].iter().map(|b| b.baseline.h0[t]).sum();
            let cies2 = sys.buildings[2].baseline.h0[t];
            assert!(cies1 < 1200.0 + 0.95 * 600.0);
            assert!(cies2 < 1200.0);
        }
    }

    #[test]
    fn spec_and_series_round_trip() {
        let sys = bundled_system();
        let spec_json = serde_json::to_string_pretty(&sys.to_spec()).unwrap();
        let mut series_csv = Vec::new();
        write_series(&mut series_csv, &sys.to_series()).unwrap();
        let back =
            SystemModel::from_readers(spec_json.as_bytes(), series_csv.as_slice()).unwrap();
        assert_eq!(back.buildings.len(), sys.buildings.len());
        assert_eq!(back.t_out, sys.t_out);
        for (a, b) in back.buildings.iter().zip(&sys.buildings) {
            assert_eq!(a.p0, b.p0);
            assert_eq!(a.baseline.h0, b.baseline.h0);
            assert_eq!(a.delay_periods, b.delay_periods);
        }
        assert_eq!(back.tariff.p_buy, sys.tariff.p_buy);
    }

    #[test]
    fn series_reader_rejects_malformed_tables() {
        let missing = "hour,temp,user1\n1,-6,400\n";
        assert!(read_series(missing.as_bytes()).is_err());

        let mut sys = String::from("hour,t_out,user1\n");
        for t in 0..HOURS {
            sys.push_str(&format!("{},{},400\n", t + 1, -6.0));
        }
        assert!(read_series(sys.as_bytes()).is_ok());

        let short = "hour,t_out,user1\n1,-6,400\n2,-6,400\n";
        assert!(read_series(short.as_bytes()).is_err());

        let misnumbered = sys.replace("13,-6", "14,-6");
        assert!(read_series(misnumbered.as_bytes()).is_err());
    }

    #[test]
    fn flexibility_override_rescales_envelopes() {
        let sys = bundled_system();
        let rigid = sys.with_flex_fraction(0.0).unwrap();
        for b in &rigid.buildings {
            assert!(b.baseline.tsl_max.iter().all(|v| *v == 0.0));
            assert!(b.baseline.il_max.iter().all(|v| *v == 0.0));
        }
        let loose = sys.with_flex_fraction(0.2).unwrap();
        assert_abs_diff_eq!(
            loose.buildings[0].baseline.tsl_max[0],
            2.0 * sys.buildings[0].baseline.tsl_max[0],
            epsilon = 1e-12
        );
    }

    #[test]
    fn tie_cap_override() {
        let sys = bundled_system().with_tie_caps(0.0, 0.0);
        assert_eq!(sys.tie_electric_cap, 0.0);
        assert_eq!(sys.tie_heat_cap, 0.0);
    }

    #[test]
    fn peak_demand_sees_both_carriers() {
        let sys = bundled_system();
        // Electric peak: 55 + 1700 + 2550 at hour 20.
        assert_abs_diff_eq!(sys.peak_demand(), 4305.0, epsilon = 1e-9);
    }

    #[test]
    fn renewable_feed_scales_paths() {
        let sys = bundled_system();
        let wt = [0.5; HOURS];
        let pv = [0.25; HOURS];
        let (w, p) = sys.renewable_feed(0, &wt, &pv);
        assert_abs_diff_eq!(w[0], 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0], 250.0, epsilon = 1e-12);
    }
}
