//! Tariffs, retail price schedules, device cost models, dispatch records,
//! and the revenue/cost accounting that turns them into operator profit.
//!
//! Sign conventions used throughout:
//! * tie-line power and heat are positive when a community imports,
//! * grid exchange is kept as separate non-negative buy and sell columns,
//! * all monetary amounts are in yuan, powers in kW, energy in kWh.

use serde::{Deserialize, Serialize};

use crate::building::{BaselineProfile, BuildingParams, DemandResponse};
use crate::error::{CoreError, Violation};
use crate::error::ConstraintId;
use crate::series::{self, Hourly, HOURS, ZERO_DAY};
use crate::system::SystemModel;
use crate::Result;

/// Tolerance for hard box checks on dispatch and price quantities.
const BOUND_TOL: f64 = 1e-9;
/// Tolerance for aggregate equalities (daily sums, hourly conservation).
const SUM_TOL: f64 = 1e-6;

// ====================================================================
// Tariffs and retail prices
// ====================================================================

/// Grid tariff and the regulatory limits the operator's retail prices
/// must respect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TariffTable {
    /// Price paid to the grid when buying, per hour.
    pub p_buy: Hourly,
    /// Price received from the grid when selling, per hour.
    pub p_sell: Hourly,
    /// Lower bound on the retail heat price.
    pub gamma_min: f64,
    /// Upper bound on the retail heat price.
    pub gamma_max: f64,
    /// Cap on the daily average retail electricity price.
    pub mu_avg_cap: f64,
    /// Cap on the daily average retail heat price.
    pub gamma_avg_cap: f64,
}

impl TariffTable {
    pub fn validate(&self) -> Result<()> {
        for t in 0..HOURS {
            if !(self.p_buy[t] > 0.0) || !(self.p_sell[t] > 0.0) {
                return Err(CoreError::invalid(format!(
                    "grid tariff must be positive at hour {}",
                    t + 1
                )));
            }
            if self.p_sell[t] > self.p_buy[t] + BOUND_TOL {
                return Err(CoreError::invalid(format!(
                    "grid sell price {} exceeds buy price {} at hour {}",
                    self.p_sell[t],
                    self.p_buy[t],
                    t + 1
                )));
            }
        }
        if !(self.gamma_min > 0.0) || self.gamma_max < self.gamma_min {
            return Err(CoreError::invalid("heat price bounds must satisfy 0 < min <= max"));
        }
        if !(self.mu_avg_cap > 0.0) || !(self.gamma_avg_cap > 0.0) {
            return Err(CoreError::invalid("average price caps must be positive"));
        }
        Ok(())
    }
}

/// Retail prices announced by the operator for one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSchedule {
    /// Electricity price charged to users, per hour.
    pub electricity: Hourly,
    /// Heat price charged to users, per hour.
    pub heat: Hourly,
}

impl PriceSchedule {
    /// Flat schedule, mostly useful as a search starting point.
    pub fn flat(mu: f64, gamma: f64) -> Self {
        Self { electricity: [mu; HOURS], heat: [gamma; HOURS] }
    }
}

/// Checks a retail price schedule against the tariff limits.
///
/// The electricity price must stay between the grid sell and buy price in
/// every hour, the heat price inside its regulated band, and both daily
/// averages under their caps.
pub fn price_check(prices: &PriceSchedule, tariff: &TariffTable) -> Vec<Violation> {
    let mut out = Vec::new();
    for t in 0..HOURS {
        let mu = prices.electricity[t];
        if mu < tariff.p_sell[t] - BOUND_TOL || mu > tariff.p_buy[t] + BOUND_TOL {
            let over = (tariff.p_sell[t] - mu).max(mu - tariff.p_buy[t]);
            out.push(
                Violation::new(
                    ConstraintId::PriceBound,
                    over,
                    format!(
                        "electricity price {mu} outside [{}, {}]",
                        tariff.p_sell[t], tariff.p_buy[t]
                    ),
                )
                .at_hour(t + 1),
            );
        }
        let g = prices.heat[t];
        if g < tariff.gamma_min - BOUND_TOL || g > tariff.gamma_max + BOUND_TOL {
            let over = (tariff.gamma_min - g).max(g - tariff.gamma_max);
            out.push(
                Violation::new(
                    ConstraintId::PriceBound,
                    over,
                    format!("heat price {g} outside [{}, {}]", tariff.gamma_min, tariff.gamma_max),
                )
                .at_hour(t + 1),
            );
        }
    }
    let mu_avg = series::sum(&prices.electricity) / HOURS as f64;
    if mu_avg > tariff.mu_avg_cap + BOUND_TOL {
        out.push(Violation::new(
            ConstraintId::PriceAverageCap,
            mu_avg - tariff.mu_avg_cap,
            format!("average electricity price {mu_avg} exceeds cap {}", tariff.mu_avg_cap),
        ));
    }
    let g_avg = series::sum(&prices.heat) / HOURS as f64;
    if g_avg > tariff.gamma_avg_cap + BOUND_TOL {
        out.push(Violation::new(
            ConstraintId::PriceAverageCap,
            g_avg - tariff.gamma_avg_cap,
            format!("average heat price {g_avg} exceeds cap {}", tariff.gamma_avg_cap),
        ));
    }
    out
}

// ====================================================================
// Device cost parameters
// ====================================================================

/// Micro-turbine fuel and start-up cost coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MtCost {
    /// Fixed fuel cost per committed hour.
    pub base: f64,
    /// Fuel cost per kW of output.
    pub marginal: f64,
    /// One-off cost charged at each off-to-on transition.
    pub startup: f64,
}

/// CHP fuel cost coefficients for the quadratic cost surface
/// `a P^2 + b P + c + d H^2 + e H + f P H`, charged while the unit runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChpCost {
    pub power_quad: f64,
    pub power_lin: f64,
    pub fixed: f64,
    pub heat_quad: f64,
    pub heat_lin: f64,
    pub cross: f64,
}

/// Operation and maintenance prices per kW of device throughput.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmCoefficients {
    pub chp: f64,
    pub mt: f64,
    pub eb: f64,
    pub wt: f64,
    pub pv: f64,
    pub ees: f64,
    pub hst: f64,
}

/// All cost parameters of one community's device fleet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceCostParams {
    pub mt: MtCost,
    pub chp: ChpCost,
    pub om: OmCoefficients,
    /// Commitment state of the micro-turbine in the hour before the day
    /// starts, used to detect a start-up in hour 1.
    pub mt_initially_on: bool,
}

impl DeviceCostParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mt.base,
            self.mt.marginal,
            self.mt.startup,
            self.chp.power_quad,
            self.chp.power_lin,
            self.chp.fixed,
            self.chp.heat_quad,
            self.chp.heat_lin,
            self.chp.cross,
            self.om.chp,
            self.om.mt,
            self.om.eb,
            self.om.wt,
            self.om.pv,
            self.om.ees,
            self.om.hst,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CoreError::invalid("cost coefficients must be finite and non-negative"));
        }
        Ok(())
    }
}

// ====================================================================
// Dispatch records
// ====================================================================

/// One community's dispatch for one scenario day. All columns are hourly
/// powers in kW; storage columns are charge/discharge pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CiesDispatch {
    pub wt: Hourly,
    pub pv: Hourly,
    pub chp_p: Hourly,
    pub chp_h: Hourly,
    pub mt_p: Hourly,
    pub mt_on: [bool; HOURS],
    pub eb_p: Hourly,
    pub ees_ch: Hourly,
    pub ees_dc: Hourly,
    pub hst_ch: Hourly,
    pub hst_dc: Hourly,
    pub grid_buy: Hourly,
    pub grid_sell: Hourly,
    /// Tie-line electric power, positive when importing from the partner.
    pub tie_p: Hourly,
    /// Tie-line heat, positive when importing from the partner.
    pub tie_h: Hourly,
}

impl CiesDispatch {
    /// All-zero dispatch with the given renewable feed-in.
    pub fn idle(wt: Hourly, pv: Hourly) -> Self {
        Self {
            wt,
            pv,
            chp_p: ZERO_DAY,
            chp_h: ZERO_DAY,
            mt_p: ZERO_DAY,
            mt_on: [false; HOURS],
            eb_p: ZERO_DAY,
            ees_ch: ZERO_DAY,
            ees_dc: ZERO_DAY,
            hst_ch: ZERO_DAY,
            hst_dc: ZERO_DAY,
            grid_buy: ZERO_DAY,
            grid_sell: ZERO_DAY,
            tie_p: ZERO_DAY,
            tie_h: ZERO_DAY,
        }
    }

    /// Micro-turbine start-up indicator per hour.
    pub fn mt_startups(&self, initially_on: bool) -> [bool; HOURS] {
        let mut out = [false; HOURS];
        let mut prev = initially_on;
        for t in 0..HOURS {
            out[t] = self.mt_on[t] && !prev;
            prev = self.mt_on[t];
        }
        out
    }
}

/// Dispatch of every community under one renewable scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDispatch {
    pub cies: Vec<CiesDispatch>,
}

// ====================================================================
// Revenue and cost accounting
// ====================================================================

/// Hourly revenue from energy sold to the users: `mu_t * P_t + gamma_t * H_t`
/// summed over all buildings.
pub fn sales_revenue(prices: &PriceSchedule, loads_p: &[Hourly], loads_h: &[Hourly]) -> Hourly {
    series::per_hour(|h| {
        let t = h - 1;
        let p: f64 = loads_p.iter().map(|l| l[t]).sum();
        let q: f64 = loads_h.iter().map(|l| l[t]).sum();
        prices.electricity[t] * p + prices.heat[t] * q
    })
}

/// Hourly net revenue from grid exchange, sell income minus purchase cost.
///
/// Fails if either exchange column is negative or exceeds the connection
/// capacity.
pub fn grid_revenue(tariff: &TariffTable, d: &CiesDispatch, grid_cap: f64) -> Result<Hourly> {
    let mut out = ZERO_DAY;
    for t in 0..HOURS {
        let buy = d.grid_buy[t];
        let sell = d.grid_sell[t];
        if buy < -BOUND_TOL || sell < -BOUND_TOL {
            return Err(CoreError::invalid(format!(
                "grid exchange must be non-negative at hour {}",
                t + 1
            )));
        }
        if buy > grid_cap + SUM_TOL || sell > grid_cap + SUM_TOL {
            return Err(CoreError::infeasible(format!(
                "grid exchange {} kW exceeds connection capacity {} kW at hour {}",
                buy.max(sell),
                grid_cap,
                t + 1
            )));
        }
        out[t] = tariff.p_sell[t] * sell - tariff.p_buy[t] * buy;
    }
    Ok(out)
}

/// Hourly operating cost of one community: micro-turbine fuel and start-up,
/// CHP fuel, and per-kW operation and maintenance on every device.
///
/// The CHP fixed term is charged only in hours where the unit actually
/// produces power or heat.
pub fn operating_cost(costs: &DeviceCostParams, d: &CiesDispatch) -> Hourly {
    let starts = d.mt_startups(costs.mt_initially_on);
    series::per_hour(|h| {
        let t = h - 1;
        let mut cost = 0.0;
        if starts[t] {
            cost += costs.mt.startup;
        }
        if d.mt_on[t] {
            cost += costs.mt.base + costs.mt.marginal * d.mt_p[t];
        }
        let (p, q) = (d.chp_p[t], d.chp_h[t]);
        if p > 0.0 || q > 0.0 {
            let c = &costs.chp;
            cost += c.power_quad * p * p
                + c.power_lin * p
                + c.fixed
                + c.heat_quad * q * q
                + c.heat_lin * q
                + c.cross * p * q;
        }
        let om = &costs.om;
        cost += om.chp * p
            + om.mt * d.mt_p[t]
            + om.eb * d.eb_p[t]
            + om.wt * d.wt[t]
            + om.pv * d.pv[t]
            + om.ees * (d.ees_ch[t] + d.ees_dc[t])
            + om.hst * (d.hst_ch[t] + d.hst_dc[t]);
        cost
    })
}

/// Profit accounting for one scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioLedger {
    pub probability: f64,
    /// Net grid revenue per hour, summed over communities.
    pub grid: Hourly,
    /// Operating cost per hour, summed over communities.
    pub cost: Hourly,
    /// Scenario profit: sales + grid - cost over the day.
    pub profit: f64,
}

/// Full profit breakdown behind one leader price schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfitLedger {
    /// Revenue from user sales per hour, identical across scenarios.
    pub sales: Hourly,
    pub scenarios: Vec<ScenarioLedger>,
    /// Probability-weighted daily profit.
    pub expected_profit: f64,
}

/// Builds the operator profit ledger for a full set of scenario dispatches.
///
/// `responses` holds one demand response per building and `dispatches` one
/// entry per scenario, aligned with `weights`. The expected profit is the
/// scenario-weighted sum of sales plus grid revenue minus operating cost,
/// accumulated in fixed order (scenarios outer, hours inner, communities
/// innermost) so repeated runs produce identical floating point results.
pub fn profit_ledger(
    system: &SystemModel,
    prices: &PriceSchedule,
    responses: &[DemandResponse],
    weights: &[f64],
    dispatches: &[ScenarioDispatch],
) -> Result<ProfitLedger> {
    if responses.len() != system.buildings.len() {
        return Err(CoreError::invalid(format!(
            "expected {} demand responses, got {}",
            system.buildings.len(),
            responses.len()
        )));
    }
    if dispatches.len() != weights.len() || weights.is_empty() {
        return Err(CoreError::invalid("one dispatch per scenario weight is required"));
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(CoreError::invalid(format!("scenario weights sum to {wsum}, expected 1")));
    }

    let mut loads_p = Vec::with_capacity(system.buildings.len());
    let mut loads_h = Vec::with_capacity(system.buildings.len());
    for (b, dr) in system.buildings.iter().zip(responses) {
        let (p, q) = crate::building::effective_loads(&b.baseline, dr)?;
        loads_p.push(p);
        loads_h.push(q);
    }
    let sales = sales_revenue(prices, &loads_p, &loads_h);
    let sales_total = series::sum(&sales);

    let mut scenarios = Vec::with_capacity(dispatches.len());
    let mut expected = 0.0;
    for (sd, &w) in dispatches.iter().zip(weights) {
        if sd.cies.len() != system.cies.len() {
            return Err(CoreError::invalid("dispatch does not cover every community"));
        }
        let mut grid = ZERO_DAY;
        let mut cost = ZERO_DAY;
        for (j, d) in sd.cies.iter().enumerate() {
            let g = grid_revenue(&system.tariff, d, system.cies[j].grid_cap)?;
            let c = operating_cost(&system.cies[j].costs, d);
            for t in 0..HOURS {
                grid[t] += g[t];
                cost[t] += c[t];
            }
        }
        let profit = sales_total + series::sum(&grid) - series::sum(&cost);
        expected += w * profit;
        scenarios.push(ScenarioLedger { probability: w, grid, cost, profit });
    }
    Ok(ProfitLedger { sales, scenarios, expected_profit: expected })
}

/// Scenario-weighted operator profit for one price schedule.
pub fn net_profit(
    system: &SystemModel,
    prices: &PriceSchedule,
    responses: &[DemandResponse],
    weights: &[f64],
    dispatches: &[ScenarioDispatch],
) -> Result<f64> {
    Ok(profit_ledger(system, prices, responses, weights, dispatches)?.expected_profit)
}

// ====================================================================
// Balance residuals
// ====================================================================

/// Electric bus residual (supply minus demand) of community `j` at hour
/// index `t` under the given per-building electric loads.
pub fn electric_balance_residual(
    system: &SystemModel,
    loads_p: &[Hourly],
    d: &CiesDispatch,
    j: usize,
    t: usize,
) -> f64 {
    let mut load = 0.0;
    for (i, b) in system.buildings.iter().enumerate() {
        if b.cies == j {
            load += loads_p[i][t];
        }
    }
    d.wt[t] + d.pv[t] + d.chp_p[t] + d.mt_p[t] + d.tie_p[t] + d.ees_dc[t] + d.grid_buy[t]
        - load
        - d.ees_ch[t]
        - d.eb_p[t]
        - d.grid_sell[t]
}

/// Heat bus residual of community `j` at source hour index `t`.
///
/// Heat injected at hour `t` arrives at each building after its pipeline
/// delay, so the demand side reads the building load and pipe loss at hour
/// `(t + delay) mod 24`; the schedule is treated as one repeating day.
pub fn heat_balance_residual(
    system: &SystemModel,
    loads_h: &[Hourly],
    d: &CiesDispatch,
    j: usize,
    t: usize,
) -> f64 {
    let cies = &system.cies[j];
    let mut demand = 0.0;
    for (i, b) in system.buildings.iter().enumerate() {
        if b.cies != j {
            continue;
        }
        let arrive = (t + b.delay_periods) % HOURS;
        demand += loads_h[i][arrive];
        demand += crate::devices::pipe_loss(&b.pipe, cies.supply_temp, system.t_out[arrive]).delta_h;
    }
    let eb_heat = cies.eb.eta * d.eb_p[t];
    d.chp_h[t] + eb_heat + d.hst_dc[t] + d.tie_h[t] - demand - d.hst_ch[t]
}

// ====================================================================
// Tie-line checks
// ====================================================================

/// Validates the tie-line columns of a scenario dispatch: per-hour bounds,
/// per-hour conservation across communities, and daily zero sums for both
/// carriers in every community.
pub fn tie_line_check(sd: &ScenarioDispatch, electric_cap: f64, heat_cap: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for (j, d) in sd.cies.iter().enumerate() {
        for t in 0..HOURS {
            if d.tie_p[t].abs() > electric_cap + SUM_TOL {
                out.push(
                    Violation::new(
                        ConstraintId::TieElectricBound,
                        d.tie_p[t].abs() - electric_cap,
                        format!("community {j} tie power {} exceeds cap {electric_cap}", d.tie_p[t]),
                    )
                    .at_hour(t + 1),
                );
            }
            if d.tie_h[t].abs() > heat_cap + SUM_TOL {
                out.push(
                    Violation::new(
                        ConstraintId::TieHeatBound,
                        d.tie_h[t].abs() - heat_cap,
                        format!("community {j} tie heat {} exceeds cap {heat_cap}", d.tie_h[t]),
                    )
                    .at_hour(t + 1),
                );
            }
        }
        let day_p: f64 = series::sum(&d.tie_p);
        if day_p.abs() > SUM_TOL {
            out.push(Violation::new(
                ConstraintId::TieElectricDailySum,
                day_p.abs(),
                format!("community {j} tie power sums to {day_p} over the day"),
            ));
        }
        let day_h: f64 = series::sum(&d.tie_h);
        if day_h.abs() > SUM_TOL {
            out.push(Violation::new(
                ConstraintId::TieHeatDailySum,
                day_h.abs(),
                format!("community {j} tie heat sums to {day_h} over the day"),
            ));
        }
    }
    for t in 0..HOURS {
        let p: f64 = sd.cies.iter().map(|d| d.tie_p[t]).sum();
        let h: f64 = sd.cies.iter().map(|d| d.tie_h[t]).sum();
        if p.abs() > SUM_TOL {
            out.push(
                Violation::new(
                    ConstraintId::TieConservation,
                    p.abs(),
                    format!("tie power does not balance across communities, net {p}"),
                )
                .at_hour(t + 1),
            );
        }
        if h.abs() > SUM_TOL {
            out.push(
                Violation::new(
                    ConstraintId::TieConservation,
                    h.abs(),
                    format!("tie heat does not balance across communities, net {h}"),
                )
                .at_hour(t + 1),
            );
        }
    }
    out
}

// ====================================================================
// Follower cost
// ====================================================================

/// Total daily cost of one building user under the given retail prices:
/// energy purchases plus quadratic discomfort terms, weighted over scenarios.
///
/// Loads and responses do not vary with the renewable scenario, so the
/// scenario loop only spreads the same daily cost over the weights; it is
/// kept explicit to mirror how the expectation is defined.
pub fn follower_cost(
    prices: &PriceSchedule,
    params: &BuildingParams,
    base: &BaselineProfile,
    dr: &DemandResponse,
    weights: &[f64],
) -> f64 {
    let mut total = 0.0;
    for &w in weights {
        let mut day = 0.0;
        for t in 0..HOURS {
            let p = base.p0[t] + dr.tsl[t] - dr.il[t];
            let h = base.h0[t] - dr.ch[t];
            day += prices.electricity[t] * p + prices.heat[t] * h;
            day += params.omega * dr.tsl[t] * dr.tsl[t]
                + params.vartheta * dr.il[t] * dr.il[t]
                + params.theta * dr.ch[t] * dr.ch[t];
        }
        total += w * day;
    }
    total
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tariff() -> TariffTable {
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

    fn costs() -> DeviceCostParams {
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
                chp: 0.0,
                mt: 0.0,
                eb: 0.0,
                wt: 0.0,
                pv: 0.0,
                ees: 0.0,
                hst: 0.0,
            },
            mt_initially_on: false,
        }
    }

    #[test]
    fn tariff_fixture_is_valid() {
        tariff().validate().unwrap();
    }

    #[test]
    fn chp_fuel_cost_matches_quadratic_surface() {
        let mut d = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        d.chp_p[0] = 500.0;
        d.chp_h[0] = 300.0;
        let c = operating_cost(&costs(), &d);
        assert_abs_diff_eq!(c[0], 428.62755, epsilon = 1e-9);
        assert_eq!(c[1], 0.0);
    }

    #[test]
    fn chp_fixed_term_only_charged_while_running() {
        let mut d = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        d.chp_h[3] = 100.0;
        let c = operating_cost(&costs(), &d);
        assert!(c[3] > 185.5);
        assert_eq!(c[4], 0.0);
    }

    #[test]
    fn mt_startup_and_fuel_cost() {
        let mut d = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        d.mt_on[5] = true;
        d.mt_p[5] = 100.0;
        let c = operating_cost(&costs(), &d);
        assert_abs_diff_eq!(c[5], 1.3 + 1.0 + 0.6 * 100.0, epsilon = 1e-12);
    }

    #[test]
    fn mt_startup_not_charged_when_already_on() {
        let mut d = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        d.mt_on[0] = true;
        d.mt_p[0] = 50.0;
        let mut params = costs();
        params.mt_initially_on = true;
        let c = operating_cost(&params, &d);
        assert_abs_diff_eq!(c[0], 1.0 + 0.6 * 50.0, epsilon = 1e-12);

        params.mt_initially_on = false;
        let c = operating_cost(&params, &d);
        assert_abs_diff_eq!(c[0], 1.3 + 1.0 + 0.6 * 50.0, epsilon = 1e-12);
    }

    #[test]
    fn om_cost_counts_both_storage_directions() {
        let mut params = costs();
        params.om.ees = 0.012;
        let mut d = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        d.ees_ch[0] = 200.0;
        d.ees_dc[1] = 150.0;
        let c = operating_cost(&params, &d);
        assert_abs_diff_eq!(c[0], 2.4, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 1.8, epsilon = 1e-12);
    }

    #[test]
    fn sales_revenue_sums_buildings() {
        let prices = PriceSchedule::flat(0.65, 0.5);
        let p = [[100.0; HOURS]];
        let h = [[50.0; HOURS]];
        let r = sales_revenue(&prices, &p, &h);
        assert_abs_diff_eq!(r[0], 0.65 * 100.0 + 0.5 * 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(series::sum(&r), 24.0 * 90.0, epsilon = 1e-9);
    }

    #[test]
    fn grid_revenue_signs_and_caps() {
        let t = tariff();
        let mut d = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        d.grid_sell[0] = 100.0;
        d.grid_buy[9] = 100.0;
        let r = grid_revenue(&t, &d, 1000.0).unwrap();
        assert_abs_diff_eq!(r[0], 40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[9], -100.0, epsilon = 1e-12);

        d.grid_buy[3] = 1500.0;
        assert!(grid_revenue(&t, &d, 1000.0).is_err());
    }

    #[test]
    fn price_check_accepts_floor_and_rejects_ceiling() {
        let t = tariff();
        let floor = PriceSchedule { electricity: t.p_sell, heat: [t.gamma_min; HOURS] };
        assert!(price_check(&floor, &t).is_empty());

        let ceiling = PriceSchedule { electricity: t.p_buy, heat: [t.gamma_max; HOURS] };
        let v = price_check(&ceiling, &t);
        // Sum of hourly buy prices is 17.38, so the 0.65 average cap fails,
        // and 24 * 0.66 = 15.84 exceeds the 12.0 heat budget.
        let caps: Vec<_> =
            v.iter().filter(|x| x.constraint == ConstraintId::PriceAverageCap).collect();
        assert_eq!(caps.len(), 2);
        assert_abs_diff_eq!(caps[0].magnitude, 17.38 / 24.0 - 0.65, epsilon = 1e-12);
        assert_abs_diff_eq!(caps[1].magnitude, 0.66 - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn price_check_flags_out_of_band_hours() {
        let t = tariff();
        let mut s = PriceSchedule::flat(0.44, 0.4);
        s.electricity[0] = 0.2;
        s.heat[5] = 0.9;
        let v = price_check(&s, &t);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].hour, Some(1));
        assert_eq!(v[1].hour, Some(6));
    }

    #[test]
    fn tie_check_flags_imbalance_and_daily_sum() {
        let mut a = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        let mut b = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        // Balanced pair of transfers cancels over the day and across hours.
        a.tie_p[0] = 300.0;
        b.tie_p[0] = -300.0;
        a.tie_p[10] = -300.0;
        b.tie_p[10] = 300.0;
        let sd = ScenarioDispatch { cies: vec![a.clone(), b.clone()] };
        assert!(tie_line_check(&sd, 400.0, 400.0).is_empty());

        // Dropping the return leg breaks both daily sums.
        a.tie_p[10] = 0.0;
        b.tie_p[10] = 0.0;
        let sd = ScenarioDispatch { cies: vec![a.clone(), b.clone()] };
        let v = tie_line_check(&sd, 400.0, 400.0);
        assert!(v.iter().any(|x| x.constraint == ConstraintId::TieElectricDailySum));

        // An unmatched import shows up as an hourly conservation violation.
        b.tie_p[0] = 0.0;
        let sd = ScenarioDispatch { cies: vec![a, b] };
        let v = tie_line_check(&sd, 400.0, 400.0);
        assert!(v.iter().any(|x| x.constraint == ConstraintId::TieConservation));
    }

    #[test]
    fn tie_check_flags_cap() {
        let mut a = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        let mut b = CiesDispatch::idle(ZERO_DAY, ZERO_DAY);
        a.tie_p[0] = 500.0;
        b.tie_p[0] = -500.0;
        a.tie_p[1] = -500.0;
        b.tie_p[1] = 500.0;
        let sd = ScenarioDispatch { cies: vec![a, b] };
        let v = tie_line_check(&sd, 400.0, 400.0);
        assert_eq!(
            v.iter().filter(|x| x.constraint == ConstraintId::TieElectricBound).count(),
            4
        );
    }

    #[test]
    fn follower_cost_spreads_over_scenarios() {
        let params = BuildingParams {
            heat_transfer: 0.5,
            surface_area: 4.5e4,
            volume: 4.5e5,
            air_specific_heat: 1.007,
            air_density: 1.2,
            metabolic_rate: 80.0,
            clothing_resistance: 0.161,
            skin_temp: 33.5,
            omega: 0.003,
            vartheta: 0.002,
            theta: 0.008,
        };
        let base = BaselineProfile {
            p0: [100.0; HOURS],
            h0: [50.0; HOURS],
            t_out: [-5.0; HOURS],
            tsl_min: [-10.0; HOURS],
            tsl_max: [10.0; HOURS],
            il_max: [10.0; HOURS],
            h_min: [0.0; HOURS],
        };
        let prices = PriceSchedule::flat(0.65, 0.5);
        let zero = DemandResponse::zero();
        let c1 = follower_cost(&prices, &params, &base, &zero, &[1.0]);
        let c2 = follower_cost(&prices, &params, &base, &zero, &[0.25, 0.5, 0.25]);
        assert_abs_diff_eq!(c1, 24.0 * 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c1, c2, epsilon = 1e-9);

        let mut dr = DemandResponse::zero();
        dr.tsl[0] = 5.0;
        dr.tsl[1] = -5.0;
        dr.il[2] = 4.0;
        dr.ch[3] = 10.0;
        let c3 = follower_cost(&prices, &params, &base, &dr, &[1.0]);
        let expect = c1
            + 0.65 * (5.0 - 5.0 - 4.0)
            - 0.5 * 10.0
            + 0.003 * 50.0
            + 0.002 * 16.0
            + 0.008 * 100.0;
        assert_abs_diff_eq!(c3, expect, epsilon = 1e-9);
    }
}
