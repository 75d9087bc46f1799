//! Leader-follower game assembly: strategy spaces, closed-form follower
//! stationary points, leader fitness evaluation, and a sampling-based
//! equilibrium certificate.
//!
//! The operator announces 24 electricity and 24 heat prices; each building
//! responds with the unique minimizer of its convex cost. The operator's
//! profit is evaluated under every renewable scenario with the dispatch
//! heuristic, so one fitness call is: broadcast prices, solve all follower
//! problems, dispatch all scenarios, account profit minus penalties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::building::{effective_loads, validate_dr, BuildingParams, DemandResponse};
use crate::devices::{chp_validate, mt_validate, storage_validate};
use crate::error::{CoreError, Violation};
use crate::market::{
    profit_ledger, tie_line_check, price_check, PriceSchedule, ProfitLedger, ScenarioDispatch,
    TariffTable,
};
use crate::scenario::JointScenarioSet;
use crate::series::{Hourly, HOURS};
use crate::solver::dispatch::scenario_dispatch;
use crate::solver::qp::{follower_objective, follower_qp_solve};
use crate::system::SystemModel;
use crate::Result;

// ====================================================================
// Game assembly
// ====================================================================

/// One reduced renewable scenario: per-unit wind and solar paths with the
/// joint probability they carry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDay {
    pub wt: Hourly,
    pub pv: Hourly,
    pub weight: f64,
}

/// The full bi-level game: the system the leader operates and the
/// scenario set its profit is averaged over.
#[derive(Debug, Clone)]
pub struct StackelbergGame {
    pub system: SystemModel,
    pub scenarios: Vec<ScenarioDay>,
}

impl StackelbergGame {
    pub fn new(system: SystemModel, scenarios: Vec<ScenarioDay>) -> Result<Self> {
        system.tariff.validate()?;
        if system.buildings.is_empty() {
            return Err(CoreError::invalid("the game needs at least one follower"));
        }
        if scenarios.is_empty() {
            return Err(CoreError::invalid("the game needs at least one scenario"));
        }
        let mut total = 0.0;
        for s in &scenarios {
            if !(s.weight > 0.0) {
                return Err(CoreError::invalid("scenario weights must be positive"));
            }
            if s.wt.iter().chain(&s.pv).any(|v| !(0.0..=1.0).contains(v)) {
                return Err(CoreError::invalid("scenario paths must stay in per-unit range"));
            }
            total += s.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(CoreError::invalid(format!(
                "scenario weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { system, scenarios })
    }

    /// Builds the game from a joint wind/solar scenario set.
    pub fn from_joint(system: SystemModel, joint: &JointScenarioSet) -> Result<Self> {
        joint.validate()?;
        let scenarios = joint
            .scenarios
            .iter()
            .map(|s| ScenarioDay { wt: s.wt, pv: s.pv, weight: s.probability() })
            .collect();
        Self::new(system, scenarios)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.weight).collect()
    }

    /// Leader genome boxes: electricity prices between feed-in and
    /// purchase tariff per hour, then the heat price band.
    pub fn price_bounds(&self) -> Vec<(f64, f64)> {
        let t = &self.system.tariff;
        let mut out = Vec::with_capacity(2 * HOURS);
        for h in 0..HOURS {
            out.push((t.p_sell[h], t.p_buy[h]));
        }
        for _ in 0..HOURS {
            out.push((t.gamma_min, t.gamma_max));
        }
        out
    }
}

// ====================================================================
// Genome encoding and repair
// ====================================================================

pub fn encode_prices(prices: &PriceSchedule) -> Vec<f64> {
    let mut g = Vec::with_capacity(2 * HOURS);
    g.extend_from_slice(&prices.electricity);
    g.extend_from_slice(&prices.heat);
    g
}

pub fn decode_prices(genome: &[f64]) -> Result<PriceSchedule> {
    if genome.len() != 2 * HOURS {
        return Err(CoreError::invalid(format!(
            "price genome must hold {} values, got {}",
            2 * HOURS,
            genome.len()
        )));
    }
    let mut prices = PriceSchedule::flat(0.0, 0.0);
    prices.electricity.copy_from_slice(&genome[..HOURS]);
    prices.heat.copy_from_slice(&genome[HOURS..]);
    Ok(prices)
}

/// Shrinks a price block toward its lower bounds until the daily average
/// cap holds, preserving the relative shape above the floor.
fn shrink_to_cap(block: &mut [f64], lo: &[f64], cap_sum: f64) {
    let sum: f64 = block.iter().sum();
    if sum <= cap_sum {
        return;
    }
    let floor: f64 = lo.iter().sum();
    let excess = sum - floor;
    if excess <= 0.0 {
        return;
    }
    let scale = ((cap_sum - floor) / excess).clamp(0.0, 1.0);
    for (v, &l) in block.iter_mut().zip(lo) {
        *v = l + scale * (*v - l);
    }
}

/// Clamps every gene to its per-hour box, then enforces both average
/// caps by uniform shrink toward the lower bounds. Idempotent, and the
/// result always passes [`price_check`].
pub fn repair_prices(genome: &mut [f64], tariff: &TariffTable) {
    if genome.len() != 2 * HOURS {
        return;
    }
    for t in 0..HOURS {
        genome[t] = genome[t].clamp(tariff.p_sell[t], tariff.p_buy[t]);
        genome[HOURS + t] = genome[HOURS + t].clamp(tariff.gamma_min, tariff.gamma_max);
    }
    let (mu, gamma) = genome.split_at_mut(HOURS);
    shrink_to_cap(mu, &tariff.p_sell, tariff.mu_avg_cap * HOURS as f64);
    let gamma_lo = [tariff.gamma_min; HOURS];
    shrink_to_cap(gamma, &gamma_lo, tariff.gamma_avg_cap * HOURS as f64);
}

// ====================================================================
// Closed-form follower quantities
// ====================================================================

/// Unconstrained stationary point of one user's hourly cost terms:
/// `(-mu/(2 omega), mu/(2 vartheta), gamma/(2 theta))`.
pub fn stationary_response_at(
    prices: &PriceSchedule,
    params: &BuildingParams,
    hour: usize,
) -> Result<(f64, f64, f64)> {
    if hour == 0 || hour > HOURS {
        return Err(CoreError::invalid(format!("hour {hour} outside 1..24")));
    }
    if !(params.omega > 0.0 && params.vartheta > 0.0 && params.theta > 0.0) {
        return Err(CoreError::invalid("discomfort coefficients must be positive"));
    }
    let mu = prices.electricity[hour - 1];
    let gamma = prices.heat[hour - 1];
    Ok((
        -mu / (2.0 * params.omega),
        mu / (2.0 * params.vartheta),
        gamma / (2.0 * params.theta),
    ))
}

/// Convexity certificate for one user's cost: all three quadratic
/// coefficients strictly positive.
pub fn verify_follower_convexity(params: &BuildingParams) -> bool {
    params.omega > 0.0 && params.vartheta > 0.0 && params.theta > 0.0
}

/// Total electric and heat load actually served per hour under the given
/// responses.
pub fn served_loads(system: &SystemModel, responses: &[DemandResponse]) -> Result<(Hourly, Hourly)> {
    if responses.len() != system.buildings.len() {
        return Err(CoreError::invalid("one response per building is required"));
    }
    let mut p = [0.0; HOURS];
    let mut h = [0.0; HOURS];
    for (b, dr) in system.buildings.iter().zip(responses) {
        let (bp, bh) = effective_loads(&b.baseline, dr)?;
        for t in 0..HOURS {
            p[t] += bp[t];
            h[t] += bh[t];
        }
    }
    Ok((p, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Commodity {
    Electricity,
    Heat,
}

/// Sign of the leader's profit derivative in one price coordinate with
/// responses and dispatch frozen: the sign of the served load there.
pub fn leader_profit_gradient_sign(
    system: &SystemModel,
    responses: &[DemandResponse],
    hour: usize,
    commodity: Commodity,
) -> Result<f64> {
    if hour == 0 || hour > HOURS {
        return Err(CoreError::invalid(format!("hour {hour} outside 1..24")));
    }
    let (p, h) = served_loads(system, responses)?;
    let load = match commodity {
        Commodity::Electricity => p[hour - 1],
        Commodity::Heat => h[hour - 1],
    };
    Ok(load.signum() * f64::from(load != 0.0))
}

// ====================================================================
// Leader evaluation
// ====================================================================

/// Everything one leader fitness call produces.
#[derive(Debug, Clone)]
pub struct LeaderEvaluation {
    pub responses: Vec<DemandResponse>,
    /// Worst first-order residual across the follower solves.
    pub follower_kkt: f64,
    pub dispatches: Vec<ScenarioDispatch>,
    pub ledger: ProfitLedger,
    /// Total unplaced power mass across scenarios, kW^2.
    pub penalty: f64,
    /// Expected profit minus the weighted penalty; the DE objective.
    pub fitness: f64,
}

/// Dispatches every scenario against the loads a fixed response set
/// implies. Returns the schedules and the total slack penalty.
pub fn dispatch_for_responses(
    game: &StackelbergGame,
    responses: &[DemandResponse],
) -> Result<(Vec<ScenarioDispatch>, f64)> {
    let system = &game.system;
    if responses.len() != system.buildings.len() {
        return Err(CoreError::invalid("one response per building is required"));
    }
    let mut loads_p = Vec::with_capacity(responses.len());
    let mut loads_h = Vec::with_capacity(responses.len());
    for (b, dr) in system.buildings.iter().zip(responses) {
        let (p, h) = effective_loads(&b.baseline, dr)?;
        loads_p.push(p);
        loads_h.push(h);
    }
    let mut dispatches = Vec::with_capacity(game.scenarios.len());
    let mut penalty = 0.0;
    for day in &game.scenarios {
        let out = scenario_dispatch(system, &loads_p, &loads_h, &day.wt, &day.pv)?;
        penalty += out.penalty;
        dispatches.push(out.dispatch);
    }
    Ok((dispatches, penalty))
}

/// Evaluates one price schedule end to end: follower solves, scenario
/// dispatches, and the profit ledger.
pub fn evaluate_leader(
    game: &StackelbergGame,
    prices: &PriceSchedule,
    penalty_weight: f64,
) -> Result<LeaderEvaluation> {
    let system = &game.system;
    let mut responses = Vec::with_capacity(system.buildings.len());
    let mut follower_kkt: f64 = 0.0;
    for b in &system.buildings {
        let sol = follower_qp_solve(prices, &b.params, &b.baseline)?;
        follower_kkt = follower_kkt.max(sol.kkt_residual);
        responses.push(sol.response);
    }

    let (dispatches, penalty) = dispatch_for_responses(game, &responses)?;
    let weights = game.weights();
    let ledger = profit_ledger(system, prices, &responses, &weights, &dispatches)?;
    let fitness = ledger.expected_profit - penalty_weight * penalty;
    Ok(LeaderEvaluation { responses, follower_kkt, dispatches, ledger, penalty, fitness })
}

// ====================================================================
// Equilibrium solution and certificate
// ====================================================================

/// One point of the search trace: best fitness after an iteration and the
/// per-building daily costs of the incumbent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub best_fitness: f64,
    pub user_costs: Vec<f64>,
}

/// A solved game: prices, responses, per-scenario dispatches, profit
/// accounting, and the search trace that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub prices: PriceSchedule,
    pub responses: Vec<DemandResponse>,
    pub dispatches: Vec<ScenarioDispatch>,
    pub weights: Vec<f64>,
    pub ledger: ProfitLedger,
    pub trace: Vec<TraceEntry>,
    pub seed: u64,
}

/// Feasibility audit of a candidate solution: prices, response envelopes,
/// device schedules, tie-lines, energy balances, and ledger consistency.
pub fn solution_check(game: &StackelbergGame, sol: &EquilibriumSolution) -> Vec<Violation> {
    let system = &game.system;
    let mut out = price_check(&sol.prices, &system.tariff);

    if sol.responses.len() != system.buildings.len() {
        out.push(Violation::new(
            crate::error::ConstraintId::ShiftBox,
            sol.responses.len().abs_diff(system.buildings.len()) as f64,
            "response count does not match the building count",
        ));
        return out;
    }
    for (b, dr) in system.buildings.iter().zip(&sol.responses) {
        out.extend(validate_dr(&b.baseline, dr));
    }

    if sol.dispatches.len() != game.scenarios.len() || sol.weights != game.weights() {
        out.push(Violation::new(
            crate::error::ConstraintId::ElectricBalance,
            (sol.dispatches.len() as f64 - game.scenarios.len() as f64).abs(),
            "dispatch set does not line up with the scenario set",
        ));
        return out;
    }

    let mut loads_p = Vec::new();
    let mut loads_h = Vec::new();
    for (b, dr) in system.buildings.iter().zip(&sol.responses) {
        match effective_loads(&b.baseline, dr) {
            Ok((p, h)) => {
                loads_p.push(p);
                loads_h.push(h);
            }
            Err(e) => {
                out.push(Violation::new(
                    crate::error::ConstraintId::LoadNonNegative,
                    f64::NAN,
                    e.to_string(),
                ));
                return out;
            }
        }
    }

    let tol = 1e-6 * system.peak_demand();
    for (s, sd) in sol.dispatches.iter().enumerate() {
        if sd.cies.len() != system.cies.len() {
            out.push(Violation::new(
                crate::error::ConstraintId::ElectricBalance,
                f64::NAN,
                format!("scenario {s} does not cover every community"),
            ));
            continue;
        }
        for (j, d) in sd.cies.iter().enumerate() {
            let c = &system.cies[j];
            let (_zs, v) = chp_validate(&c.chp, &d.chp_p, &d.chp_h);
            out.extend(v.into_iter().map(|x| x.in_scenario(s + 1)));
            out.extend(mt_validate(&c.mt, &d.mt_p, &d.mt_on).into_iter().map(|x| x.in_scenario(s + 1)));
            let (_lv, v) = storage_validate(&c.ees, &d.ees_ch, &d.ees_dc, system.dt, true);
            out.extend(v.into_iter().map(|x| x.in_scenario(s + 1)));
            let (_lv, v) = storage_validate(&c.hst, &d.hst_ch, &d.hst_dc, system.dt, true);
            out.extend(v.into_iter().map(|x| x.in_scenario(s + 1)));
            for t in 0..HOURS {
                if d.grid_buy[t] > c.grid_cap + 1e-6 || d.grid_sell[t] > c.grid_cap + 1e-6 {
                    out.push(
                        Violation::new(
                            crate::error::ConstraintId::GridBound,
                            d.grid_buy[t].max(d.grid_sell[t]) - c.grid_cap,
                            format!("community {j} grid exchange beyond its cap"),
                        )
                        .at_hour(t + 1)
                        .in_scenario(s + 1),
                    );
                }
                let e = crate::market::electric_balance_residual(system, &loads_p, d, j, t);
                if e.abs() > tol {
                    out.push(
                        Violation::new(
                            crate::error::ConstraintId::ElectricBalance,
                            e.abs(),
                            format!("community {j} electric bus off balance by {e:.6} kW"),
                        )
                        .at_hour(t + 1)
                        .in_scenario(s + 1),
                    );
                }
                let h = crate::market::heat_balance_residual(system, &loads_h, d, j, t);
                if h.abs() > tol {
                    out.push(
                        Violation::new(
                            crate::error::ConstraintId::HeatBalance,
                            h.abs(),
                            format!("community {j} heat bus off balance by {h:.6} kW"),
                        )
                        .at_hour(t + 1)
                        .in_scenario(s + 1),
                    );
                }
            }
        }
        out.extend(
            tie_line_check(sd, system.tie_electric_cap, system.tie_heat_cap)
                .into_iter()
                .map(|x| x.in_scenario(s + 1)),
        );
    }

    if let Ok(ledger) =
        profit_ledger(system, &sol.prices, &sol.responses, &sol.weights, &sol.dispatches)
    {
        let gap = (ledger.expected_profit - sol.ledger.expected_profit).abs();
        if gap > 1e-6 {
            out.push(Violation::new(
                crate::error::ConstraintId::ElectricBalance,
                gap,
                format!("ledger profit differs from recomputation by {gap:.8}"),
            ));
        }
    }
    out
}

/// Outcome of the sampling certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// Relative cost gap per building between its stored response and a
    /// fresh optimal solve.
    pub follower_gaps: Vec<f64>,
    pub worst_follower_gap: f64,
    pub follower_pass: bool,
    pub probes: usize,
    /// Best relative profit improvement any probe achieved.
    pub best_probe_gain: f64,
    pub leader_pass: bool,
    pub passed: bool,
}

/// Certifies a solution by falsification: re-solves every follower and
/// fires `n_probes` perturbed price schedules at the leader position.
///
/// Probes draw each coordinate uniformly within five percent of the
/// current price, clip to the per-hour boxes, and repair the average
/// caps, matching how the search itself stays feasible. An infeasible
/// solution is rejected before any testing.
pub fn equilibrium_check(
    game: &StackelbergGame,
    sol: &EquilibriumSolution,
    eps_follower: f64,
    eps_leader: f64,
    n_probes: usize,
    seed: u64,
) -> Result<EquilibriumReport> {
    let violations = solution_check(game, sol);
    if !violations.is_empty() {
        return Err(CoreError::infeasible(format!(
            "solution rejected: {} constraint violations, first: {}",
            violations.len(),
            violations[0]
        )));
    }

    let weights = game.weights();
    let mut follower_gaps = Vec::with_capacity(game.system.buildings.len());
    for (b, dr) in game.system.buildings.iter().zip(&sol.responses) {
        let current = follower_objective(&sol.prices, &b.params, &b.baseline, dr);
        let fresh = follower_qp_solve(&sol.prices, &b.params, &b.baseline)?;
        let optimal = follower_objective(&sol.prices, &b.params, &b.baseline, &fresh.response);
        let gap = (current - optimal) / optimal.abs().max(1.0);
        follower_gaps.push(gap);
    }
    let worst_follower_gap = follower_gaps.iter().cloned().fold(0.0f64, f64::max);
    let follower_pass = worst_follower_gap < eps_follower;

    let base = evaluate_leader(game, &sol.prices, PENALTY_WEIGHT_DEFAULT)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_probe_gain = f64::NEG_INFINITY;
    let genome0 = encode_prices(&sol.prices);
    for _ in 0..n_probes {
        let mut genome = genome0.clone();
        for v in genome.iter_mut() {
            *v *= rng.gen_range(0.95..1.05);
        }
        repair_prices(&mut genome, &game.system.tariff);
        let probe_prices = decode_prices(&genome)?;
        let probe = evaluate_leader(game, &probe_prices, PENALTY_WEIGHT_DEFAULT)?;
        let gain = (probe.fitness - base.fitness) / base.fitness.abs().max(1.0);
        best_probe_gain = best_probe_gain.max(gain);
    }
    let leader_pass = n_probes == 0 || best_probe_gain < eps_leader;
    let _ = weights;

    Ok(EquilibriumReport {
        follower_gaps,
        worst_follower_gap,
        follower_pass,
        probes: n_probes,
        best_probe_gain,
        leader_pass,
        passed: follower_pass && leader_pass,
    })
}

/// Default quadratic penalty weight on unplaced dispatch power.
pub const PENALTY_WEIGHT_DEFAULT: f64 = 1e3;

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::bundled_system;
    use approx::assert_abs_diff_eq;

    fn two_scenarios() -> Vec<ScenarioDay> {
        let windy = ScenarioDay {
            wt: [0.7; HOURS],
            pv: std::array::from_fn(|t| {
                let h = (t + 1) as f64;
                if (7.0..=19.0).contains(&h) {
                    0.8 * (std::f64::consts::PI * (h - 7.0) / 12.0).sin().powf(1.5)
                } else {
                    0.0
                }
            }),
            weight: 0.6,
        };
        let calm = ScenarioDay { wt: [0.15; HOURS], pv: windy.pv.map(|v| 0.4 * v), weight: 0.4 };
        vec![windy, calm]
    }

    fn game() -> StackelbergGame {
        StackelbergGame::new(bundled_system(), two_scenarios()).unwrap()
    }

    #[test]
    fn game_validates_weights_and_paths() {
        let sys = bundled_system();
        let mut bad = two_scenarios();
        bad[0].weight = 0.7;
        assert!(StackelbergGame::new(sys.clone(), bad).is_err());
        let mut bad = two_scenarios();
        bad[1].wt[3] = 1.4;
        assert!(StackelbergGame::new(sys, bad).is_err());
    }

    #[test]
    fn stationary_values_match_closed_form() {
        let prices = PriceSchedule::flat(0.65, 0.5);
        let params = bundled_system().buildings[0].params;
        let (tsl0, il0, ch0) = stationary_response_at(&prices, &params, 5).unwrap();
        assert_abs_diff_eq!(il0, 162.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ch0, 31.25, epsilon = 1e-12);
        assert_abs_diff_eq!(tsl0, -0.65 / 0.006, epsilon = 1e-12);

        let zero = PriceSchedule::flat(0.0, 0.0);
        // Zero prices are outside the tariff band but the closed form is
        // still defined there.
        let (tsl0, il0, ch0) = stationary_response_at(&zero, &params, 1).unwrap();
        assert_eq!((tsl0, il0, ch0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn convexity_certificate() {
        let mut params = bundled_system().buildings[0].params;
        assert!(verify_follower_convexity(&params));
        params.omega = 0.0;
        assert!(!verify_follower_convexity(&params));
        params.omega = 0.003;
        params.theta = -0.1;
        assert!(!verify_follower_convexity(&params));
    }

    #[test]
    fn repair_enforces_boxes_and_caps() {
        let sys = bundled_system();
        let mut genome = vec![2.0; 2 * HOURS];
        repair_prices(&mut genome, &sys.tariff);
        let prices = decode_prices(&genome).unwrap();
        assert!(price_check(&prices, &sys.tariff).is_empty());
        // Caps bind, so the averages land exactly on them.
        let mu_avg: f64 = prices.electricity.iter().sum::<f64>() / HOURS as f64;
        let g_avg: f64 = prices.heat.iter().sum::<f64>() / HOURS as f64;
        assert_abs_diff_eq!(mu_avg, 0.65, epsilon = 1e-9);
        assert_abs_diff_eq!(g_avg, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn repair_is_idempotent_and_keeps_feasible_points() {
        let sys = bundled_system();
        let mut genome = encode_prices(&PriceSchedule::flat(0.42, 0.35));
        let before = genome.clone();
        repair_prices(&mut genome, &sys.tariff);
        assert_eq!(genome, before);

        let mut genome = vec![1.7; 2 * HOURS];
        repair_prices(&mut genome, &sys.tariff);
        let once = genome.clone();
        repair_prices(&mut genome, &sys.tariff);
        for (a, b) in genome.iter().zip(&once) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_sign_tracks_served_load() {
        let g = game();
        let responses: Vec<DemandResponse> =
            g.system.buildings.iter().map(|_| DemandResponse::zero()).collect();
        let s = leader_profit_gradient_sign(&g.system, &responses, 12, Commodity::Electricity)
            .unwrap();
        assert_eq!(s, 1.0);
        let s = leader_profit_gradient_sign(&g.system, &responses, 3, Commodity::Heat).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn leader_evaluation_is_affine_in_prices() {
        let g = game();
        let base = PriceSchedule::flat(0.44, 0.4);
        let eval = evaluate_leader(&g, &base, PENALTY_WEIGHT_DEFAULT).unwrap();
        assert_eq!(eval.penalty, 0.0);
        assert!(eval.follower_kkt <= 1e-8);

        // Freeze the responses and dispatches; bump one price coordinate.
        let (served_p, _h) = served_loads(&g.system, &eval.responses).unwrap();
        let mut up = base.clone();
        up.electricity[11] += 0.5;
        let profit_base = crate::market::net_profit(
            &g.system,
            &base,
            &eval.responses,
            &g.weights(),
            &eval.dispatches,
        )
        .unwrap();
        let profit_up = crate::market::net_profit(
            &g.system,
            &up,
            &eval.responses,
            &g.weights(),
            &eval.dispatches,
        )
        .unwrap();
        assert_abs_diff_eq!((profit_up - profit_base) / 0.5, served_p[11], epsilon = 1e-9);
    }

    #[test]
    fn ledger_is_internally_consistent() {
        let g = game();
        let prices = PriceSchedule::flat(0.5, 0.45);
        let eval = evaluate_leader(&g, &prices, PENALTY_WEIGHT_DEFAULT).unwrap();
        let again = profit_ledger(
            &g.system,
            &prices,
            &eval.responses,
            &g.weights(),
            &eval.dispatches,
        )
        .unwrap();
        assert_abs_diff_eq!(
            again.expected_profit,
            eval.ledger.expected_profit,
            epsilon = 1e-6
        );
    }

    #[test]
    fn certificate_accepts_optimal_followers_and_flags_degraded_ones() {
        let g = game();
        let prices = PriceSchedule::flat(0.44, 0.4);
        let eval = evaluate_leader(&g, &prices, PENALTY_WEIGHT_DEFAULT).unwrap();
        let sol = EquilibriumSolution {
            prices: prices.clone(),
            responses: eval.responses.clone(),
            dispatches: eval.dispatches.clone(),
            weights: g.weights(),
            ledger: eval.ledger.clone(),
            trace: Vec::new(),
            seed: 0,
        };
        let report = equilibrium_check(&g, &sol, 1e-6, 1e9, 5, 42).unwrap();
        assert!(report.follower_pass, "worst gap {}", report.worst_follower_gap);

        // Degrading one response by five percent must trip the test. The
        // dispatches and ledger are rebuilt so the audit stays clean and
        // the follower gap is what fails.
        let mut degraded = sol.clone();
        for v in degraded.responses[0].il.iter_mut() {
            *v *= 0.95;
        }
        let (dispatches, _) = dispatch_for_responses(&g, &degraded.responses).unwrap();
        degraded.ledger = profit_ledger(
            &g.system,
            &degraded.prices,
            &degraded.responses,
            &degraded.weights,
            &dispatches,
        )
        .unwrap();
        degraded.dispatches = dispatches;
        let report = equilibrium_check(&g, &degraded, 1e-6, 1e9, 0, 42).unwrap();
        assert!(!report.follower_pass);
    }

    #[test]
    fn certificate_rejects_infeasible_solutions() {
        let g = game();
        let prices = PriceSchedule::flat(0.44, 0.4);
        let eval = evaluate_leader(&g, &prices, PENALTY_WEIGHT_DEFAULT).unwrap();
        let mut sol = EquilibriumSolution {
            prices,
            responses: eval.responses,
            dispatches: eval.dispatches,
            weights: g.weights(),
            ledger: eval.ledger,
            trace: Vec::new(),
            seed: 0,
        };
        sol.prices.electricity[0] = 2.0;
        assert!(equilibrium_check(&g, &sol, 1e-4, 0.005, 10, 1).is_err());
    }
}
