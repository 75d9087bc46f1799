//! The sweep command: profit as a function of the tie-line capacity.

use anyhow::Result;

use mcies_core::solver::de::DeConfig;
use mcies_core::solver::stackelberg::stackelberg_iterate;

use crate::inputs::{build_game, GameInputs};
use crate::outputs::{yuan, OutDir, Outcome};
use crate::SweepArgs;

pub fn run(args: &SweepArgs) -> Result<Outcome> {
    let inputs = GameInputs::load(
        &args.inputs.system,
        &args.inputs.series,
        &args.inputs.wt,
        &args.inputs.pv,
    )?;
    let caps = args.caps.clone();
    let hash = inputs.config_hash(&[
        "sweep".into(),
        format!("caps={caps:?}"),
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

    let mut rows = Vec::with_capacity(caps.len());
    for &cap in &caps {
        let game = build_game(system.with_tie_caps(cap, cap), &wt, &pv, args.search.seed)?;
        let sol = stackelberg_iterate(&game, &config)?;
        rows.push(format!("{cap},{}", yuan(sol.ledger.expected_profit)));
        println!("cap {cap} kW: profit {}", yuan(sol.ledger.expected_profit));
    }
    out.write_csv("sweep.csv", "cap,profit", &rows)?;
    Ok(Outcome::Clean)
}
