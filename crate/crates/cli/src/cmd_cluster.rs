//! The cluster command: scenario reduction reports for one sample family
//! or a joint wind/solar pair.

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use mcies_core::scenario::{
    cluster_sweep, joint_scenarios, read_sample_paths_from, select_cluster_count, ClusterResult,
    JointScenarioSet, SamplePath,
};
use mcies_core::HOURS;

use crate::inputs::{BUNDLED, BUNDLED_PV_CSV, BUNDLED_WT_CSV};
use crate::outputs::{OutDir, Outcome};
use crate::ClusterArgs;

fn read_family(arg: &str, bundled: &'static str, what: &str) -> Result<String> {
    if arg == BUNDLED {
        return Ok(bundled.to_string());
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {what} samples from {arg}"))
}

fn parse_family(content: &str, what: &str) -> Result<Vec<SamplePath>> {
    read_sample_paths_from(content.as_bytes())
        .with_context(|| format!("parsing {what} sample paths"))
}

fn hash_params(params: &[String]) -> String {
    let mut hasher = Sha256::new();
    for p in params {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Writes the DB sweep, chosen centroids, and probabilities for one family.
fn report_family(
    out: &OutDir,
    prefix: &str,
    samples: &[SamplePath],
    k_min: usize,
    k_max: usize,
    seed: u64,
) -> Result<ClusterResult> {
    let sweep = cluster_sweep(samples, k_min..=k_max, seed)
        .with_context(|| format!("sweeping cluster counts for {prefix:?}"))?;
    let rows: Vec<String> = sweep.iter().map(|e| format!("{},{}", e.k, e.db_index)).collect();
    out.write_csv(&format!("{prefix}db_sweep.csv"), "k,db_index", &rows)?;

    let (_k, chosen) = select_cluster_count(samples, k_min..=k_max, seed)?;
    let mut header = String::from("cluster,count,probability");
    for h in 1..=HOURS {
        header.push_str(&format!(",h{h:02}"));
    }
    let probs = chosen.probabilities();
    let rows: Vec<String> = chosen
        .centroids
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row = format!("{},{},{}", i + 1, chosen.counts[i], probs[i]);
            for v in c {
                row.push_str(&format!(",{v}"));
            }
            row
        })
        .collect();
    out.write_csv(&format!("{prefix}centroids.csv"), &header, &rows)?;

    #[derive(serde::Serialize)]
    struct ProbFile<'a> {
        result: &'a ClusterResult,
    }
    out.write_json(&format!("{prefix}probabilities.json"), &ProbFile { result: &chosen })?;
    Ok(chosen)
}

pub fn run(args: &ClusterArgs) -> Result<Outcome> {
    if args.k_min < 2 || args.k_min > args.k_max {
        bail!("cluster-count range {}..{} is empty or starts below 2", args.k_min, args.k_max);
    }
    let base_params = vec![
        "cluster".into(),
        format!("k={}..{}", args.k_min, args.k_max),
        format!("seed={}", args.seed),
    ];

    match (&args.samples, &args.wt, &args.pv) {
        (Some(path), None, None) => {
            let content = std::fs::read_to_string(path)
                .with_context(|| format!("reading samples from {path}"))?;
            let samples = parse_family(&content, "the")?;
            let mut params = base_params;
            params.push(content);
            let out = OutDir::create(&args.out, hash_params(&params), args.seed)?;
            report_family(&out, "", &samples, args.k_min, args.k_max, args.seed)?;
            println!(
                "clustered {} sample paths; reports in {}",
                samples.len(),
                out.path("").display()
            );
        }
        (None, Some(wt_arg), Some(pv_arg)) => {
            let wt_content = read_family(wt_arg, BUNDLED_WT_CSV, "wind")?;
            let pv_content = read_family(pv_arg, BUNDLED_PV_CSV, "solar")?;
            let wt = parse_family(&wt_content, "wind")?;
            let pv = parse_family(&pv_content, "solar")?;
            let mut params = base_params;
            params.push(wt_content);
            params.push(pv_content);
            let out = OutDir::create(&args.out, hash_params(&params), args.seed)?;
            let wt_chosen = report_family(&out, "wt_", &wt, args.k_min, args.k_max, args.seed)?;
            let pv_chosen = report_family(&out, "pv_", &pv, args.k_min, args.k_max, args.seed)?;
            let joint = joint_scenarios(&wt_chosen, &pv_chosen)?;
            #[derive(serde::Serialize)]
            struct JointFile<'a> {
                set: &'a JointScenarioSet,
            }
            out.write_json("joint_scenarios.json", &JointFile { set: &joint })?;
            println!(
                "joint set: {} wind x {} solar = {} scenarios; reports in {}",
                joint.s_w,
                joint.s_p,
                joint.s_max(),
                out.path("").display()
            );
        }
        _ => bail!("pass either --samples, or both --wt and --pv"),
    }
    Ok(Outcome::Clean)
}
