//! Output plumbing: the stamped artifact directory and shared writers.
//!
//! Every file a command writes starts with the config hash and seed so a
//! reader can tell which run produced it, and two runs with the same
//! configuration produce byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use mcies_core::building::DemandResponse;
use mcies_core::game::EquilibriumSolution;
use mcies_core::market::PriceSchedule;
use mcies_core::system::SystemModel;
use mcies_core::HOURS;

/// How a command run ended, mapped to the process exit code by `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// All requested work done, no constraint violations. Exit 0.
    Clean,
    /// The run completed but found constraint violations. Exit 2.
    Violations,
}

/// Target directory plus the stamp written into every artifact.
pub struct OutDir {
    dir: PathBuf,
    pub hash: String,
    pub seed: u64,
}

impl OutDir {
    pub fn create(dir: &Path, hash: String, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutDir { dir: dir.to_path_buf(), hash, seed })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a CSV artifact: stamp comment, header row, data rows.
    pub fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let mut text = String::new();
        writeln!(text, "# config {} seed {}", self.hash, self.seed).unwrap();
        writeln!(text, "{header}").unwrap();
        for row in rows {
            writeln!(text, "{row}").unwrap();
        }
        let path = self.path(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Writes a JSON artifact wrapped with the stamp.
    pub fn write_json<T: Serialize>(&self, name: &str, payload: &T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Stamped<'a, T> {
            config_hash: &'a str,
            seed: u64,
            #[serde(flatten)]
            payload: &'a T,
        }
        let stamped = Stamped { config_hash: &self.hash, seed: self.seed, payload };
        let text = serde_json::to_string_pretty(&stamped).context("serializing artifact")?;
        let path = self.path(name);
        std::fs::write(&path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Money formatting used in every report: yuan with two decimals.
pub fn yuan(v: f64) -> String {
    format!("{v:.2}")
}

/// The solution artifact: scheduling mode plus the solved game.
#[derive(Serialize, serde::Deserialize)]
pub struct SolutionFile {
    pub mode: u8,
    pub solution: EquilibriumSolution,
}

pub fn write_prices_csv(out: &OutDir, name: &str, prices: &PriceSchedule) -> Result<PathBuf> {
    let rows: Vec<String> = (0..HOURS)
        .map(|t| format!("{},{},{}", t + 1, prices.electricity[t], prices.heat[t]))
        .collect();
    out.write_csv(name, "hour,electricity,heat", &rows)
}

pub fn write_trace_csv(
    out: &OutDir,
    name: &str,
    system: &SystemModel,
    solution: &EquilibriumSolution,
) -> Result<PathBuf> {
    let mut header = String::from("iteration,best_profit");
    for b in &system.buildings {
        write!(header, ",cost_{}", b.name).unwrap();
    }
    let rows: Vec<String> = solution
        .trace
        .iter()
        .map(|e| {
            let mut row = format!("{},{}", e.iteration, yuan(e.best_fitness));
            for c in &e.user_costs {
                write!(row, ",{}", yuan(*c)).unwrap();
            }
            row
        })
        .collect();
    out.write_csv(name, &header, &rows)
}

/// One before/after load file per building: the baseline electric and heat
/// demand next to the demand actually scheduled after the user's response.
pub fn write_load_csvs(
    out: &OutDir,
    system: &SystemModel,
    responses: &[DemandResponse],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (b, dr) in system.buildings.iter().zip(responses) {
        let before = mcies_core::building::effective_loads(&b.baseline, &DemandResponse::zero())?;
        let after = mcies_core::building::effective_loads(&b.baseline, dr)?;
        let rows: Vec<String> = (0..HOURS)
            .map(|t| {
                format!(
                    "{},{},{},{},{}",
                    t + 1,
                    before.0[t],
                    after.0[t],
                    before.1[t],
                    after.1[t]
                )
            })
            .collect();
        let name = format!("loads_{}.csv", b.name);
        written.push(out.write_csv(
            &name,
            "hour,electric_base,electric_scheduled,heat_base,heat_scheduled",
            &rows,
        )?);
    }
    Ok(written)
}
