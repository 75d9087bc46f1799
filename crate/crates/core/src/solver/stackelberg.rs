//! Upper-level price search: chaotic differential evolution over the 48
//! price genes, scoring each candidate with a full follower-and-dispatch
//! evaluation of the game.

use crate::game::{
    decode_prices, evaluate_leader, repair_prices, EquilibriumSolution, StackelbergGame,
    TraceEntry,
};
use crate::solver::de::{chaotic_de_optimize, DeConfig};
use crate::solver::qp::{follower_objective, follower_qp_solve};
use crate::Result;

/// Runs the price search and packages the winner as a complete solution:
/// prices, follower responses, per-scenario dispatches, profit ledger,
/// and the per-iteration trace with each user's daily cost.
///
/// A candidate whose evaluation fails scores bottomless fitness instead
/// of aborting, so one pathological genome cannot kill the run.
pub fn stackelberg_iterate(
    game: &StackelbergGame,
    config: &DeConfig,
) -> Result<EquilibriumSolution> {
    let bounds = game.price_bounds();
    let tariff = game.system.tariff.clone();
    let weight = config.penalty_weight;

    let fitness = |genome: &[f64]| -> f64 {
        decode_prices(genome)
            .and_then(|prices| evaluate_leader(game, &prices, weight))
            .map(|eval| eval.fitness)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let repair = |genome: &mut [f64]| repair_prices(genome, &tariff);
    let result = chaotic_de_optimize(config, &bounds, fitness, repair)?;

    let prices = decode_prices(&result.best)?;
    let eval = evaluate_leader(game, &prices, weight)?;

    let mut trace = Vec::with_capacity(result.trace.len());
    let mut prev_genome: Option<&Vec<f64>> = None;
    let mut prev_costs: Vec<f64> = Vec::new();
    for (k, (fit, genome)) in result.trace.iter().zip(&result.trace_genomes).enumerate() {
        if prev_genome != Some(genome) {
            let p = decode_prices(genome)?;
            prev_costs = game
                .system
                .buildings
                .iter()
                .map(|b| {
                    follower_qp_solve(&p, &b.params, &b.baseline)
                        .map(|s| follower_objective(&p, &b.params, &b.baseline, &s.response))
                })
                .collect::<Result<Vec<f64>>>()?;
            prev_genome = Some(genome);
        }
        trace.push(TraceEntry { iteration: k, best_fitness: *fit, user_costs: prev_costs.clone() });
    }

    Ok(EquilibriumSolution {
        prices,
        responses: eval.responses,
        dispatches: eval.dispatches,
        weights: game.weights(),
        ledger: eval.ledger,
        trace,
        seed: config.seed,
    })
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solution_check, ScenarioDay};
    use crate::market::{price_check, PriceSchedule, TariffTable};
    use crate::series::HOURS;
    use crate::system::bundled_system;

    fn small_game() -> StackelbergGame {
        let system = bundled_system();
        let windy = ScenarioDay { wt: [0.65; HOURS], pv: [0.2; HOURS], weight: 0.5 };
        let calm = ScenarioDay { wt: [0.2; HOURS], pv: [0.05; HOURS], weight: 0.5 };
        StackelbergGame::new(system, vec![windy, calm]).unwrap()
    }

    /// One community, one inflexible user, and a tariff whose average
    /// caps sit exactly at the hourly ceilings.
    fn captive_market() -> StackelbergGame {
        let mut system = bundled_system().with_flex_fraction(0.0).unwrap();
        system.cies.truncate(1);
        system.buildings.truncate(1);
        system.tie_electric_cap = 0.0;
        system.tie_heat_cap = 0.0;
        system.tariff = TariffTable {
            p_buy: [0.8; HOURS],
            p_sell: [0.4; HOURS],
            gamma_min: 0.3,
            gamma_max: 0.66,
            mu_avg_cap: 0.8,
            gamma_avg_cap: 0.66,
        };
        let day = ScenarioDay { wt: [0.5; HOURS], pv: [0.0; HOURS], weight: 1.0 };
        StackelbergGame::new(system, vec![day]).unwrap()
    }

    #[test]
    fn captive_market_drives_prices_to_the_ceiling() {
        let game = captive_market();
        let config =
            DeConfig { population: 40, max_iterations: 600, seed: 1, ..DeConfig::default() };
        let sol = stackelberg_iterate(&game, &config).unwrap();

        let ceiling = PriceSchedule::flat(0.8, 0.66);
        let best_possible = evaluate_leader(&game, &ceiling, config.penalty_weight).unwrap();
        let gap = (best_possible.fitness - sol.ledger.expected_profit).abs()
            / best_possible.fitness.abs().max(1.0);
        assert!(gap < 1e-3, "relative gap to the ceiling profit is {gap:.2e}");
        for t in 0..HOURS {
            assert!(sol.prices.electricity[t] > 0.78, "hour {t} lags the ceiling");
            assert!(sol.prices.heat[t] > 0.64, "hour {t} lags the heat ceiling");
        }
    }

    #[test]
    fn search_is_reproducible_for_a_seed() {
        let game = small_game();
        let config = DeConfig {
            population: 8,
            max_iterations: 12,
            seed: 4,
            ..DeConfig::default()
        };
        let a = stackelberg_iterate(&game, &config).unwrap();
        let b = stackelberg_iterate(&game, &config).unwrap();
        assert_eq!(a.prices.electricity, b.prices.electricity);
        assert_eq!(a.prices.heat, b.prices.heat);
        assert_eq!(a.ledger.expected_profit, b.ledger.expected_profit);
        let ta: Vec<f64> = a.trace.iter().map(|e| e.best_fitness).collect();
        let tb: Vec<f64> = b.trace.iter().map(|e| e.best_fitness).collect();
        assert_eq!(ta, tb);

        let other = DeConfig { seed: 5, ..config };
        let c = stackelberg_iterate(&game, &other).unwrap();
        let tc: Vec<f64> = c.trace.iter().map(|e| e.best_fitness).collect();
        assert_ne!(ta, tc);
    }

    #[test]
    fn short_run_yields_a_clean_auditable_solution() {
        let game = small_game();
        let config = DeConfig {
            population: 10,
            max_iterations: 15,
            seed: 2,
            ..DeConfig::default()
        };
        let sol = stackelberg_iterate(&game, &config).unwrap();

        assert!(price_check(&sol.prices, &game.system.tariff).is_empty());
        let violations = solution_check(&game, &sol);
        assert!(violations.is_empty(), "first: {}", violations[0]);

        assert_eq!(sol.trace.len(), 16);
        for w in sol.trace.windows(2) {
            assert!(w[1].best_fitness >= w[0].best_fitness);
        }
        for entry in &sol.trace {
            assert_eq!(entry.user_costs.len(), game.system.buildings.len());
        }
        assert_eq!(sol.seed, 2);
        assert_eq!(sol.weights, game.weights());

        let again = evaluate_leader(&game, &sol.prices, config.penalty_weight).unwrap();
        let last = sol.trace.last().unwrap().best_fitness;
        assert!((again.fitness - last).abs() <= 1e-9 * last.abs().max(1.0));
    }
}
