//! Synthetic sample-path generation for demos and tests.
//!
//! Paths are drawn as planted templates plus bounded uniform noise, clamped
//! to per-unit range. Template separation is much larger than the noise
//! radius, so clustering is expected to recover the planted structure
//! exactly; tests rely on that.

use super::{EnergySource, SamplePath};
use crate::error::{CoreError, Result};
use crate::series::{per_hour, Hourly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Four wind-shaped daily templates (per-unit): strong night wind, moderate
/// night wind, calm day, evening ramp-up.
pub fn wt_templates() -> [Hourly; 4] {
    let strong = per_hour(|h| match h {
        1..=6 => 0.82,
        7..=9 => 0.68,
        10..=16 => 0.38,
        17..=20 => 0.55,
        _ => 0.74,
    });
    let moderate = per_hour(|h| match h {
        1..=6 => 0.58,
        7..=9 => 0.47,
        10..=16 => 0.27,
        17..=20 => 0.38,
        _ => 0.52,
    });
    let calm = per_hour(|h| match h {
        1..=8 => 0.20,
        9..=17 => 0.12,
        _ => 0.17,
    });
    let evening = per_hour(|h| match h {
        1..=5 => 0.30,
        6..=12 => 0.18,
        13..=17 => 0.40,
        18..=22 => 0.70,
        _ => 0.52,
    });
    [strong, moderate, calm, evening]
}

/// Three solar-shaped daily templates (per-unit): clear, hazy, overcast.
/// A short winter arc: first light at 08:00, gone after 17:00.
pub fn pv_templates() -> [Hourly; 3] {
    const ARC: [f64; 10] = [0.08, 0.25, 0.48, 0.68, 0.78, 0.74, 0.58, 0.35, 0.14, 0.03];
    let bell = |peak: f64| {
        per_hour(move |h| if (8..=17).contains(&h) { peak * ARC[h - 8] } else { 0.0 })
    };
    [bell(0.85), bell(0.55), bell(0.22)]
}

/// Draws `counts[i]` noisy copies of `templates[i]`, in template order.
///
/// Noise is uniform in `[-noise_amp, noise_amp]` per hour, clamped to
/// per-unit range. Deterministic for a fixed seed.
pub fn sample_paths(
    templates: &[Hourly],
    counts: &[usize],
    source: EnergySource,
    noise_amp: f64,
    seed: u64,
) -> Result<Vec<SamplePath>> {
    if templates.len() != counts.len() {
        return Err(CoreError::invalid(format!(
            "{} templates but {} counts",
            templates.len(),
            counts.len()
        )));
    }
    if !(0.0..=0.5).contains(&noise_amp) {
        return Err(CoreError::invalid(format!(
            "noise amplitude {noise_amp} outside [0, 0.5]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(counts.iter().sum());
    for (template, &count) in templates.iter().zip(counts) {
        for _ in 0..count {
            let values = template.map(|v| {
                let noisy = v + rng.gen_range(-noise_amp..=noise_amp);
                noisy.clamp(0.0, 1.0)
            });
            out.push(SamplePath::new(source, values)?);
        }
    }
    Ok(out)
}

/// The wind sample set shipped with the bundled example: 2000 paths whose
/// planted cluster sizes give shares 0.3805 / 0.2365 / 0.156 / 0.227.
pub fn bundled_wt_samples() -> Vec<SamplePath> {
    sample_paths(
        &wt_templates(),
        &[761, 473, 312, 454],
        EnergySource::Wt,
        0.03,
        2024_01,
    )
    .expect("bundled WT generation is well-formed")
}

/// The solar sample set shipped with the bundled example: 2000 paths whose
/// planted cluster sizes give shares 0.3505 / 0.269 / 0.3805.
pub fn bundled_pv_samples() -> Vec<SamplePath> {
    sample_paths(
        &pv_templates(),
        &[701, 538, 761],
        EnergySource::Pv,
        0.03,
        2024_02,
    )
    .expect("bundled PV generation is well-formed")
}

/// Labels every sample by its nearest template (Euclidean), the brute-force
/// oracle clustering recovery is checked against.
pub fn nearest_template_labels(samples: &[SamplePath], templates: &[Hourly]) -> Vec<usize> {
    samples
        .iter()
        .map(|s| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, t) in templates.iter().enumerate() {
                let d: f64 = s
                    .values
                    .iter()
                    .zip(t.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect()
}
