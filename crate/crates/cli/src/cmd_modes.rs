//! The modes command: full system, no demand response, and no tie-lines,
//! compared on one table.

use anyhow::Result;

use mcies_core::building::DemandResponse;
use mcies_core::game::{dispatch_for_responses, solution_check, EquilibriumSolution};
use mcies_core::market::profit_ledger;
use mcies_core::solver::de::DeConfig;
use mcies_core::solver::qp::follower_objective;
use mcies_core::solver::stackelberg::stackelberg_iterate;

use crate::inputs::{build_game, GameInputs};
use crate::outputs::{yuan, OutDir, Outcome, SolutionFile};
use crate::ModesArgs;

pub fn run(args: &ModesArgs) -> Result<Outcome> {
    let inputs = GameInputs::load(
        &args.inputs.system,
        &args.inputs.series,
        &args.inputs.wt,
        &args.inputs.pv,
    )?;
    let hash = inputs.config_hash(&[
        "modes".into(),
        format!("seed={}", args.search.seed),
        format!("population={}", args.search.population),
        format!("iterations={}", args.search.iterations),
    ]);
    let out = OutDir::create(&args.out, hash, args.search.seed)?;

    let system = inputs.system_model()?;
    let wt = inputs.wt_samples()?;
    let pv = inputs.pv_samples()?;
    let config = DeConfig {
        population: args.search.population,
        max_iterations: args.search.iterations,
        seed: args.search.seed,
        ..DeConfig::default()
    };

    // Mode 1: price search on the full system.
    let game1 = build_game(system.clone(), &wt, &pv, args.search.seed)?;
    let sol1 = stackelberg_iterate(&game1, &config)?;
    let costs1: Vec<f64> = game1
        .system
        .buildings
        .iter()
        .zip(&sol1.responses)
        .map(|(b, dr)| follower_objective(&sol1.prices, &b.params, &b.baseline, dr))
        .collect();

    // Mode 2: users keep their baseline consumption but still face the
    // Mode 1 prices; no new search.
    let zero: Vec<DemandResponse> =
        game1.system.buildings.iter().map(|_| DemandResponse::zero()).collect();
    let (dispatches2, _) = dispatch_for_responses(&game1, &zero)?;
    let ledger2 =
        profit_ledger(&game1.system, &sol1.prices, &zero, &sol1.weights, &dispatches2)?;
    let costs2: Vec<f64> = game1
        .system
        .buildings
        .iter()
        .map(|b| follower_objective(&sol1.prices, &b.params, &b.baseline, &DemandResponse::zero()))
        .collect();
    let sol2 = EquilibriumSolution {
        prices: sol1.prices.clone(),
        responses: zero,
        dispatches: dispatches2,
        weights: sol1.weights.clone(),
        ledger: ledger2,
        trace: Vec::new(),
        seed: args.search.seed,
    };

    // Mode 3: tie-lines disconnected, full search with the same seed.
    let game3 = build_game(system.with_tie_caps(0.0, 0.0), &wt, &pv, args.search.seed)?;
    let sol3 = stackelberg_iterate(&game3, &config)?;
    let costs3: Vec<f64> = game3
        .system
        .buildings
        .iter()
        .zip(&sol3.responses)
        .map(|(b, dr)| follower_objective(&sol3.prices, &b.params, &b.baseline, dr))
        .collect();

    let mut violations = solution_check(&game1, &sol1);
    violations.extend(solution_check(&game1, &sol2));
    violations.extend(solution_check(&game3, &sol3));

    let mut header = String::from("mode,profit");
    for b in &system.buildings {
        header.push_str(&format!(",cost_{}", b.name));
    }
    let row = |mode: u8, profit: f64, costs: &[f64]| {
        let mut r = format!("{mode},{}", yuan(profit));
        for c in costs {
            r.push_str(&format!(",{}", yuan(*c)));
        }
        r
    };
    let rows = vec![
        row(1, sol1.ledger.expected_profit, &costs1),
        row(2, sol2.ledger.expected_profit, &costs2),
        row(3, sol3.ledger.expected_profit, &costs3),
    ];
    out.write_csv("modes.csv", &header, &rows)?;
    out.write_json("mode1.json", &SolutionFile { mode: 1, solution: sol1 })?;
    out.write_json("mode2.json", &SolutionFile { mode: 2, solution: sol2 })?;
    out.write_json("mode3.json", &SolutionFile { mode: 3, solution: sol3 })?;

    println!("{header}");
    for r in &rows {
        println!("{r}");
    }
    if violations.is_empty() {
        Ok(Outcome::Clean)
    } else {
        eprintln!("{} constraint violations across the mode solutions", violations.len());
        Ok(Outcome::Violations)
    }
}
