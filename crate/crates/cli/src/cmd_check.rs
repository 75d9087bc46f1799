//! The check command: re-validate a previously written solution file.

use anyhow::{Context, Result};

use crate::cmd_schedule::audit_and_report;
use crate::inputs::{apply_mode, build_game, GameInputs};
use crate::outputs::{OutDir, Outcome, SolutionFile};
use crate::CheckArgs;

pub fn run(args: &CheckArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.solution)
        .with_context(|| format!("reading solution file {}", args.solution.display()))?;
    let file: SolutionFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing solution file {}", args.solution.display()))?;

    let inputs = GameInputs::load(
        &args.inputs.system,
        &args.inputs.series,
        &args.inputs.wt,
        &args.inputs.pv,
    )?;
    let hash = inputs.config_hash(&[
        "check".into(),
        text,
        format!("cert={},{},{}", args.cert.eps_follower, args.cert.eps_leader, args.cert.probes),
        format!("probe-seed={}", args.probe_seed),
    ]);
    let out = OutDir::create(&args.out, hash, file.solution.seed)?;

    // The game is rebuilt exactly as the producing run saw it: the mode
    // transform from the file and the clustering seed the search used.
    let system = apply_mode(inputs.system_model()?, file.mode)?;
    let game =
        build_game(system, &inputs.wt_samples()?, &inputs.pv_samples()?, file.solution.seed)?;

    let (outcome, passed) =
        audit_and_report(&out, "check_report.json", &game, &file, &args.cert, args.probe_seed)?;
    println!(
        "solution {}: feasible: {}, certificate: {}",
        args.solution.display(),
        outcome == Outcome::Clean,
        if passed { "pass" } else { "fail" },
    );
    if outcome == Outcome::Clean && !passed {
        return Ok(Outcome::Violations);
    }
    Ok(outcome)
}
