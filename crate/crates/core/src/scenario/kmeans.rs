//! Kmeans++ clustering with Davies-Bouldin model selection.
//!
//! Seeding follows the usual squared-distance sampling scheme, Lloyd
//! iterations run to an assignment fixed point (cap 300), and empty clusters
//! are repaired by re-seeding at the sample farthest from its own centroid.
//! Every step uses a fixed iteration / reduction order so a given seed
//! produces bit-identical results, including when the k-sweep runs on
//! multiple threads.

use super::{ClusterResult, SamplePath};
use crate::error::{CoreError, Result};
use crate::series::{Hourly, HOURS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const LLOYD_CAP: usize = 300;

fn dist2(a: &Hourly, b: &Hourly) -> f64 {
    let mut acc = 0.0;
    for i in 0..HOURS {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

fn nearest(point: &Hourly, centroids: &[Hourly]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

fn validate_samples(samples: &[SamplePath]) -> Result<()> {
    let Some(first) = samples.first() else {
        return Err(CoreError::invalid("no samples to cluster"));
    };
    if samples.iter().any(|s| s.source != first.source) {
        return Err(CoreError::invalid(
            "samples mix WT and PV sources; cluster each source separately",
        ));
    }
    Ok(())
}

/// Squared-distance seeding: first centroid uniform, each further centroid
/// drawn with probability proportional to its squared distance from the
/// nearest already-chosen centroid.
fn seed_centroids(samples: &[SamplePath], k: usize, rng: &mut ChaCha8Rng) -> Vec<Hourly> {
    let n = samples.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    chosen.push(rng.gen_range(0..n));
    let mut d2: Vec<f64> = samples
        .iter()
        .map(|s| dist2(&s.values, &samples[chosen[0]].values))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            pick
        } else {
            // All remaining mass is zero (duplicate-heavy data): take the
            // first index not yet chosen so the run stays deterministic.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, s) in samples.iter().enumerate() {
            let d = dist2(&s.values, &samples[next].values);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    chosen.iter().map(|&i| samples[i].values).collect()
}

/// Clusters same-source sample paths into `k` groups.
///
/// Deterministic for a fixed `(samples, k, seed)` triple. The returned
/// assignment maps every sample to its nearest centroid in Euclidean
/// distance, ties broken toward the lower cluster index.
pub fn kmeans_pp(samples: &[SamplePath], k: usize, seed: u64) -> Result<ClusterResult> {
    validate_samples(samples)?;
    let n = samples.len();
    if k == 0 {
        return Err(CoreError::invalid("k must be at least 1"));
    }
    if k > n {
        return Err(CoreError::invalid(format!(
            "k = {k} exceeds the number of samples ({n})"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(samples, k, &mut rng);
    let mut assignment: Vec<usize> = vec![0; n];
    let mut prev: Vec<usize> = vec![usize::MAX; n];

    for _ in 0..LLOYD_CAP {
        let mut repaired = false;
        for (i, s) in samples.iter().enumerate() {
            assignment[i] = nearest(&s.values, &centroids).0;
        }

        // Re-seed empty clusters at the sample farthest from its centroid,
        // skipping donors that would empty their own cluster in turn.
        loop {
            let mut counts = vec![0usize; k];
            for &a in &assignment {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let mut far_idx = None;
            let mut far_d = -1.0;
            for (i, s) in samples.iter().enumerate() {
                if counts[assignment[i]] <= 1 {
                    continue;
                }
                let d = dist2(&s.values, &centroids[assignment[i]]);
                if d > far_d {
                    far_d = d;
                    far_idx = Some(i);
                }
            }
            let donor = far_idx.ok_or_else(|| {
                CoreError::infeasible("cannot repair empty cluster: all clusters singleton")
            })?;
            assignment[donor] = empty;
            centroids[empty] = samples[donor].values;
            repaired = true;
        }

        if !repaired && assignment == prev {
            break;
        }
        prev.copy_from_slice(&assignment);

        let mut sums = vec![[0.0f64; HOURS]; k];
        let mut counts = vec![0usize; k];
        for (i, s) in samples.iter().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for h in 0..HOURS {
                sums[c][h] += s.values[h];
            }
        }
        for c in 0..k {
            for h in 0..HOURS {
                centroids[c][h] = sums[c][h] / counts[c] as f64;
            }
        }
    }

    ClusterResult::from_parts(samples[0].source, centroids, assignment)
}

/// Davies-Bouldin index of a clustering: mean over clusters of the worst
/// ratio `(s_i + s_j) / d_ij`, with `s` the mean member-to-centroid distance
/// and `d` the centroid separation. Lower is better.
pub fn davies_bouldin(samples: &[SamplePath], result: &ClusterResult) -> Result<f64> {
    let k = result.k();
    if k < 2 {
        return Err(CoreError::invalid("Davies-Bouldin needs at least 2 clusters"));
    }
    if result.assignment.len() != samples.len() {
        return Err(CoreError::invalid(format!(
            "assignment covers {} samples but {} were given",
            result.assignment.len(),
            samples.len()
        )));
    }
    if result.counts.iter().any(|&c| c == 0) {
        return Err(CoreError::invalid("Davies-Bouldin: empty cluster"));
    }

    let mut scatter = vec![0.0f64; k];
    for (i, s) in samples.iter().enumerate() {
        let c = result.assignment[i];
        scatter[c] += dist2(&s.values, &result.centroids[c]).sqrt();
    }
    for c in 0..k {
        scatter[c] /= result.counts[c] as f64;
    }

    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let sep = dist2(&result.centroids[i], &result.centroids[j]).sqrt();
            if sep == 0.0 {
                return Err(CoreError::Numeric(format!(
                    "Davies-Bouldin: coincident centroids {i} and {j}"
                )));
            }
            worst = worst.max((scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// One entry of a cluster-count sweep.
#[derive(Debug, Clone)]
pub struct KSweepEntry {
    pub k: usize,
    pub db_index: f64,
    pub result: ClusterResult,
}

/// Runs `kmeans_pp` for every k in the range and scores each clustering.
/// Runs the candidates in parallel; output order is ascending k.
pub fn cluster_sweep(
    samples: &[SamplePath],
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<Vec<KSweepEntry>> {
    validate_samples(samples)?;
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 2 {
        return Err(CoreError::invalid("cluster-count sweep starts below 2"));
    }
    if hi > samples.len() {
        return Err(CoreError::invalid(format!(
            "cluster-count sweep up to {hi} exceeds sample count {}",
            samples.len()
        )));
    }
    if lo > hi {
        return Err(CoreError::invalid("empty cluster-count range"));
    }
    (lo..=hi)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&k| {
            let result = kmeans_pp(samples, k, seed)?;
            let db_index = davies_bouldin(samples, &result)?;
            Ok(KSweepEntry { k, db_index, result })
        })
        .collect()
}

/// Picks the cluster count minimizing the Davies-Bouldin index over the
/// range; ties break toward the smaller k.
pub fn select_cluster_count(
    samples: &[SamplePath],
    k_range: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<(usize, ClusterResult)> {
    let sweep = cluster_sweep(samples, k_range, seed)?;
    let best = sweep
        .into_iter()
        .min_by(|a, b| {
            a.db_index
                .partial_cmp(&b.db_index)
                .expect("DB index is finite")
                .then(a.k.cmp(&b.k))
        })
        .expect("non-empty sweep");
    Ok((best.k, best.result))
}
