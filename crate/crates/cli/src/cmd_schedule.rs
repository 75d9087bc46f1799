//! The schedule command: one full price-search run with artifacts.

use anyhow::Result;

use mcies_core::game::{equilibrium_check, solution_check, StackelbergGame};
use mcies_core::solver::de::DeConfig;
use mcies_core::solver::stackelberg::stackelberg_iterate;

use crate::inputs::{apply_mode, build_game, GameInputs};
use crate::outputs::{
    write_load_csvs, write_prices_csv, write_trace_csv, yuan, OutDir, Outcome, SolutionFile,
};
use crate::{CertArgs, ScheduleArgs};

/// Feasibility and certificate results written next to a solution.
#[derive(serde::Serialize)]
pub struct CheckFile {
    pub eps_follower: f64,
    pub eps_leader: f64,
    pub probes: usize,
    pub probe_seed: u64,
    pub feasible: bool,
    pub violations: Vec<mcies_core::error::Violation>,
    pub report: Option<mcies_core::game::EquilibriumReport>,
}

/// Audits a solved game and writes the report file. Returns the outcome
/// and whether the certificate passed.
pub fn audit_and_report(
    out: &OutDir,
    name: &str,
    game: &StackelbergGame,
    file: &SolutionFile,
    cert: &CertArgs,
    probe_seed: u64,
) -> Result<(Outcome, bool)> {
    let violations = solution_check(game, &file.solution);
    let feasible = violations.is_empty();
    let report = if feasible {
        Some(equilibrium_check(
            game,
            &file.solution,
            cert.eps_follower,
            cert.eps_leader,
            cert.probes,
            probe_seed,
        )?)
    } else {
        None
    };
    let passed = report.as_ref().map(|r| r.passed).unwrap_or(false);
    let check = CheckFile {
        eps_follower: cert.eps_follower,
        eps_leader: cert.eps_leader,
        probes: cert.probes,
        probe_seed,
        feasible,
        violations,
        report,
    };
    out.write_json(name, &check)?;
    let outcome = if feasible { Outcome::Clean } else { Outcome::Violations };
    Ok((outcome, passed))
}

pub fn run(args: &ScheduleArgs) -> Result<Outcome> {
    let inputs = GameInputs::load(
        &args.inputs.system,
        &args.inputs.series,
        &args.inputs.wt,
        &args.inputs.pv,
    )?;
    let hash = inputs.config_hash(&[
        "schedule".into(),
        format!("mode={}", args.mode),
        format!("seed={}", args.search.seed),
        format!("population={}", args.search.population),
        format!("iterations={}", args.search.iterations),
        format!("cert={},{},{}", args.cert.eps_follower, args.cert.eps_leader, args.cert.probes),
    ]);
    let out = OutDir::create(&args.out, hash, args.search.seed)?;

    let system = apply_mode(inputs.system_model()?, args.mode)?;
    let game = build_game(system, &inputs.wt_samples()?, &inputs.pv_samples()?, args.search.seed)?;

    let config = DeConfig {
        population: args.search.population,
        max_iterations: args.search.iterations,
        seed: args.search.seed,
        ..DeConfig::default()
    };
    let solution = stackelberg_iterate(&game, &config)?;
    let profit = solution.ledger.expected_profit;

    let file = SolutionFile { mode: args.mode, solution };
    out.write_json("equilibrium.json", &file)?;
    write_prices_csv(&out, "prices.csv", &file.solution.prices)?;
    write_trace_csv(&out, "trace.csv", &game.system, &file.solution)?;
    write_load_csvs(&out, &game.system, &file.solution.responses)?;

    let (outcome, passed) =
        audit_and_report(&out, "check_report.json", &game, &file, &args.cert, args.search.seed)?;

    println!(
        "mode {} schedule: expected profit {} yuan over {} scenarios, \
         feasible: {}, certificate: {}",
        args.mode,
        yuan(profit),
        game.scenarios.len(),
        outcome == Outcome::Clean,
        if passed { "pass" } else { "fail" },
    );
    println!("artifacts in {}", out.path("").display());
    Ok(outcome)
}
