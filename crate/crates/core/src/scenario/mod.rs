//! Renewable scenario handling.
//!
//! Sample paths (normalized 24-hour wind / photovoltaic output) are ingested
//! from CSV, clustered into typical scenarios with Kmeans++, scored with the
//! Davies-Bouldin index, and combined into a joint WT x PV scenario set whose
//! probability weights are exact count ratios. The GAN / WGAN-GP objectives
//! are provided as pure batch statistics so generated batches can be scored
//! without any network code.

mod csvio;
mod fidelity;
mod kmeans;
mod losses;
pub mod synthetic;

pub use csvio::{read_sample_paths, read_sample_paths_from, write_sample_paths};
pub use fidelity::{scenario_fidelity_metrics, FidelityMetrics};
pub use kmeans::{cluster_sweep, davies_bouldin, kmeans_pp, select_cluster_count, KSweepEntry};
pub use losses::{gan_losses, wgan_gp_objective, LossBatch};

use crate::error::{CoreError, Result};
use crate::series::{ensure_in_range, Hourly};
use serde::{Deserialize, Serialize};

// ============================================================================
// Sample paths
// ============================================================================

/// Renewable source a sample path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergySource {
    #[serde(rename = "WT")]
    Wt,
    #[serde(rename = "PV")]
    Pv,
}

impl EnergySource {
    pub fn tag(&self) -> &'static str {
        match self {
            EnergySource::Wt => "WT",
            EnergySource::Pv => "PV",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "WT" => Ok(EnergySource::Wt),
            "PV" => Ok(EnergySource::Pv),
            other => Err(CoreError::invalid(format!(
                "unknown energy source tag {other:?} (expected WT or PV)"
            ))),
        }
    }
}

impl std::fmt::Display for EnergySource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// One normalized 24-hour output path, per-unit of installed capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub source: EnergySource,
    pub values: Hourly,
}

impl SamplePath {
    /// Validates per-unit range and finiteness.
    pub fn new(source: EnergySource, values: Hourly) -> Result<Self> {
        ensure_in_range(&values, 0.0, 1.0, &format!("{source} sample path"))?;
        Ok(SamplePath { source, values })
    }
}

// ============================================================================
// Cluster results
// ============================================================================

/// Output of one Kmeans++ run: centroids, per-sample assignment, and exact
/// per-cluster counts. Probabilities are always derived as `count / total`
/// rather than stored as floats, so they cannot drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClusterResultRepr", into = "ClusterResultRepr")]
pub struct ClusterResult {
    pub source: EnergySource,
    pub centroids: Vec<Hourly>,
    pub assignment: Vec<usize>,
    pub counts: Vec<usize>,
}

impl ClusterResult {
    pub(crate) fn from_parts(
        source: EnergySource,
        centroids: Vec<Hourly>,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        let mut counts = vec![0usize; centroids.len()];
        for &a in &assignment {
            if a >= centroids.len() {
                return Err(CoreError::invalid(format!(
                    "assignment index {a} out of range for {} clusters",
                    centroids.len()
                )));
            }
            counts[a] += 1;
        }
        Ok(ClusterResult {
            source,
            centroids,
            assignment,
            counts,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn total(&self) -> usize {
        self.assignment.len()
    }

    /// Cluster weights `N_k / N` as floats. Sums to 1 up to rounding of the
    /// final division only.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ClusterResultRepr {
    source: EnergySource,
    centroids: Vec<Hourly>,
    assignment: Vec<usize>,
    counts: Vec<usize>,
    total: usize,
    /// Decimal renderings of `counts[i] / total`, for human readers and
    /// drift-free round trips.
    probabilities: Vec<String>,
}

impl From<ClusterResult> for ClusterResultRepr {
    fn from(r: ClusterResult) -> Self {
        let total = r.total();
        let probabilities = r
            .counts
            .iter()
            .map(|&c| decimal_ratio(c as u128, total as u128))
            .collect();
        ClusterResultRepr {
            source: r.source,
            centroids: r.centroids,
            assignment: r.assignment,
            counts: r.counts,
            total,
            probabilities,
        }
    }
}

impl TryFrom<ClusterResultRepr> for ClusterResult {
    type Error = CoreError;

    fn try_from(repr: ClusterResultRepr) -> Result<Self> {
        let rebuilt =
            ClusterResult::from_parts(repr.source, repr.centroids, repr.assignment)?;
        if rebuilt.counts != repr.counts || rebuilt.total() != repr.total {
            return Err(CoreError::invalid(
                "cluster result counts do not match its assignment",
            ));
        }
        for (i, s) in repr.probabilities.iter().enumerate() {
            let parsed: f64 = s
                .parse()
                .map_err(|_| CoreError::invalid(format!("bad probability string {s:?}")))?;
            let exact = rebuilt.counts[i] as f64 / repr.total as f64;
            if (parsed - exact).abs() > 1e-12 {
                return Err(CoreError::invalid(format!(
                    "probability string {s:?} disagrees with count ratio {}/{}",
                    rebuilt.counts[i], repr.total
                )));
            }
        }
        Ok(rebuilt)
    }
}

// ============================================================================
// Joint scenarios
// ============================================================================

/// One joint scenario: a WT centroid paired with a PV centroid, weighted by
/// the product of the two cluster probabilities. The weight is kept as an
/// exact integer ratio `count_product / total_product`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointScenario {
    pub wt_index: usize,
    pub pv_index: usize,
    pub wt: Hourly,
    pub pv: Hourly,
    pub weight_num: u64,
    pub weight_den: u64,
}

impl JointScenario {
    pub fn probability(&self) -> f64 {
        self.weight_num as f64 / self.weight_den as f64
    }
}

/// Cross product of a WT clustering and a PV clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointScenarioSetRepr", into = "JointScenarioSetRepr")]
pub struct JointScenarioSet {
    pub scenarios: Vec<JointScenario>,
    pub s_w: usize,
    pub s_p: usize,
}

impl JointScenarioSet {
    pub fn s_max(&self) -> usize {
        self.s_w * self.s_p
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.probability()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.len() != self.s_max() {
            return Err(CoreError::invalid(format!(
                "joint set has {} scenarios, expected {} x {}",
                self.scenarios.len(),
                self.s_w,
                self.s_p
            )));
        }
        let total: f64 = self.probabilities().iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(CoreError::invalid(format!(
                "joint scenario probabilities sum to {total}, not 1"
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct JointScenarioSetRepr {
    s_w: usize,
    s_p: usize,
    scenarios: Vec<JointScenario>,
    probabilities: Vec<String>,
}

impl From<JointScenarioSet> for JointScenarioSetRepr {
    fn from(set: JointScenarioSet) -> Self {
        let probabilities = set
            .scenarios
            .iter()
            .map(|s| decimal_ratio(s.weight_num as u128, s.weight_den as u128))
            .collect();
        JointScenarioSetRepr {
            s_w: set.s_w,
            s_p: set.s_p,
            scenarios: set.scenarios,
            probabilities,
        }
    }
}

impl TryFrom<JointScenarioSetRepr> for JointScenarioSet {
    type Error = CoreError;

    fn try_from(repr: JointScenarioSetRepr) -> Result<Self> {
        let set = JointScenarioSet {
            scenarios: repr.scenarios,
            s_w: repr.s_w,
            s_p: repr.s_p,
        };
        set.validate()?;
        Ok(set)
    }
}

/// Crosses WT and PV cluster results into the joint scenario set, with
/// `pi_s = pi_w * pi_p` kept as an exact count ratio.
pub fn joint_scenarios(wt: &ClusterResult, pv: &ClusterResult) -> Result<JointScenarioSet> {
    if wt.source != EnergySource::Wt || pv.source != EnergySource::Pv {
        return Err(CoreError::invalid(format!(
            "joint_scenarios needs (WT, PV) inputs, got ({}, {})",
            wt.source, pv.source
        )));
    }
    if wt.total() == 0 || pv.total() == 0 {
        return Err(CoreError::invalid("empty cluster result"));
    }
    let den = (wt.total() as u64)
        .checked_mul(pv.total() as u64)
        .ok_or_else(|| CoreError::invalid("sample counts too large"))?;
    let mut scenarios = Vec::with_capacity(wt.k() * pv.k());
    for (wi, wc) in wt.centroids.iter().enumerate() {
        for (pi, pc) in pv.centroids.iter().enumerate() {
            scenarios.push(JointScenario {
                wt_index: wi,
                pv_index: pi,
                wt: *wc,
                pv: *pc,
                weight_num: wt.counts[wi] as u64 * pv.counts[pi] as u64,
                weight_den: den,
            });
        }
    }
    let set = JointScenarioSet {
        scenarios,
        s_w: wt.k(),
        s_p: pv.k(),
    };
    set.validate()?;
    Ok(set)
}

// ============================================================================
// Exact decimal rendering
// ============================================================================

/// Renders `num / den` as a decimal string by long division, up to 20
/// fractional digits (exact whenever the ratio terminates, which covers every
/// count ratio with a power-of-10-friendly denominator).
pub(crate) fn decimal_ratio(num: u128, den: u128) -> String {
    assert!(den > 0, "decimal_ratio: zero denominator");
    let mut s = format!("{}", num / den);
    let mut rem = num % den;
    if rem == 0 {
        return s;
    }
    s.push('.');
    for _ in 0..20 {
        rem *= 10;
        s.push(char::from(b'0' + (rem / den) as u8));
        rem %= den;
        if rem == 0 {
            break;
        }
    }
    s
}
