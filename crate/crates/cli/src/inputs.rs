//! Input resolution: bundled-or-file arguments, config hashing, and the
//! shared pipeline that turns raw inputs into a playable game.

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use mcies_core::game::StackelbergGame;
use mcies_core::scenario::{
    joint_scenarios, read_sample_paths_from, select_cluster_count, EnergySource, SamplePath,
};
use mcies_core::system::SystemModel;

/// Sentinel argument value selecting the data shipped inside the binary.
pub const BUNDLED: &str = "bundled";

pub const BUNDLED_SYSTEM_JSON: &str = include_str!("../data/bundled_system.json");
pub const BUNDLED_SERIES_CSV: &str = include_str!("../data/bundled_series.csv");
pub const BUNDLED_WT_CSV: &str = include_str!("../data/wt_samples.csv");
pub const BUNDLED_PV_CSV: &str = include_str!("../data/pv_samples.csv");

fn resolve(arg: &str, bundled: &'static str, what: &str) -> Result<String> {
    if arg == BUNDLED {
        return Ok(bundled.to_string());
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {what} from {arg}"))
}

/// Full content of the four inputs every scheduling command consumes.
pub struct GameInputs {
    pub system: String,
    pub series: String,
    pub wt: String,
    pub pv: String,
}

impl GameInputs {
    pub fn load(system: &str, series: &str, wt: &str, pv: &str) -> Result<Self> {
        Ok(GameInputs {
            system: resolve(system, BUNDLED_SYSTEM_JSON, "system model")?,
            series: resolve(series, BUNDLED_SERIES_CSV, "load series")?,
            wt: resolve(wt, BUNDLED_WT_CSV, "wind samples")?,
            pv: resolve(pv, BUNDLED_PV_CSV, "solar samples")?,
        })
    }

    /// Hash of everything that determines the run: input contents plus the
    /// command parameters the caller lists. Sixteen hex digits.
    pub fn config_hash(&self, params: &[String]) -> String {
        let mut hasher = Sha256::new();
        for part in [&self.system, &self.series, &self.wt, &self.pv] {
            hasher.update(part.as_bytes());
            hasher.update([0u8]);
        }
        for p in params {
            hasher.update(p.as_bytes());
            hasher.update([0u8]);
        }
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn system_model(&self) -> Result<SystemModel> {
        SystemModel::from_readers(self.system.as_bytes(), self.series.as_bytes())
            .context("assembling the system model")
    }

    pub fn wt_samples(&self) -> Result<Vec<SamplePath>> {
        let paths = read_sample_paths_from(self.wt.as_bytes())
            .context("reading wind sample paths")?;
        expect_source(&paths, EnergySource::Wt)?;
        Ok(paths)
    }

    pub fn pv_samples(&self) -> Result<Vec<SamplePath>> {
        let paths = read_sample_paths_from(self.pv.as_bytes())
            .context("reading solar sample paths")?;
        expect_source(&paths, EnergySource::Pv)?;
        Ok(paths)
    }
}

fn expect_source(paths: &[SamplePath], source: EnergySource) -> Result<()> {
    if let Some(p) = paths.iter().find(|p| p.source != source) {
        bail!("sample file mixes sources: expected {source:?}, found {:?}", p.source);
    }
    Ok(())
}

/// Range of cluster counts scanned when reducing a sample family.
pub const K_RANGE: std::ops::RangeInclusive<usize> = 3..=10;

/// Reduces both sample families, pairs the centroids into the joint
/// scenario set, and assembles the game for the given system.
pub fn build_game(
    system: SystemModel,
    wt_samples: &[SamplePath],
    pv_samples: &[SamplePath],
    seed: u64,
) -> Result<StackelbergGame> {
    let (_k_w, wt) = select_cluster_count(wt_samples, K_RANGE, seed)
        .context("clustering wind samples")?;
    let (_k_p, pv) = select_cluster_count(pv_samples, K_RANGE, seed)
        .context("clustering solar samples")?;
    let joint = joint_scenarios(&wt, &pv).context("building the joint scenario set")?;
    StackelbergGame::from_joint(system, &joint).context("assembling the game")
}

/// Applies a scheduling mode to the base system: 1 leaves it unchanged,
/// 2 zeroes user flexibility, 3 disconnects the tie-lines.
pub fn apply_mode(system: SystemModel, mode: u8) -> Result<SystemModel> {
    match mode {
        1 => Ok(system),
        2 => system.with_flex_fraction(0.0).context("zeroing flexibility"),
        3 => Ok(system.with_tie_caps(0.0, 0.0)),
        other => bail!("mode {other} is not one of 1, 2, 3"),
    }
}
