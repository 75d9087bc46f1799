//! Differential evolution with chaotic parameter control.
//!
//! Classic rand/1/bin maximization where a logistic map drives both the
//! initial population spread and the per-trial scale factor F, replacing
//! uniform draws with a deterministic chaotic sequence. Candidate vectors
//! pass through a caller-supplied repair hook after box clipping, so
//! domain constraints beyond plain boxes stay with the caller.
//!
//! Every trial gets its own counter-seeded random stream keyed by
//! (generation, index), and the chaotic F values are drawn sequentially
//! before the population is processed in parallel, so results are
//! identical for a given seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::Result;

/// Search settings; the defaults match the tuning used throughout.
#[derive(Debug, Clone)]
pub struct DeConfig {
    pub population: usize,
    pub crossover: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Scale factor band the chaotic sequence is mapped into.
    pub f_min: f64,
    pub f_max: f64,
    /// Weight on constraint slack when a caller folds violations into the
    /// objective; the optimizer itself never reads it.
    pub penalty_weight: f64,
    /// Stop after this many generations without improvement; `None` runs
    /// the full budget.
    pub plateau_patience: Option<usize>,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population: 50,
            crossover: 0.9,
            max_iterations: 200,
            seed: 0,
            f_min: 0.4,
            f_max: 1.0,
            penalty_weight: 1e3,
            plateau_patience: None,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(CoreError::invalid("population must hold at least 4 individuals"));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(CoreError::invalid("crossover rate must lie in [0, 1]"));
        }
        if self.max_iterations == 0 {
            return Err(CoreError::invalid("at least one iteration is required"));
        }
        if !(self.f_min.is_finite() && self.f_max.is_finite() && self.f_min <= self.f_max) {
            return Err(CoreError::invalid("scale factor band must be a finite interval"));
        }
        if !(self.penalty_weight >= 0.0 && self.penalty_weight.is_finite()) {
            return Err(CoreError::invalid("penalty weight must be finite and non-negative"));
        }
        if self.plateau_patience == Some(0) {
            return Err(CoreError::invalid("plateau patience must allow at least one generation"));
        }
        Ok(())
    }
}

/// Search outcome: the best genome, its fitness, and the best-so-far
/// fitness after initialization and after each generation.
#[derive(Debug, Clone)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    pub trace: Vec<f64>,
    /// Incumbent genome at each trace point, for post-hoc analysis of
    /// how the best candidate evolved.
    pub trace_genomes: Vec<Vec<f64>>,
    pub evaluations: usize,
}

/// Logistic map step; the 4x(1-x) form is fully chaotic on (0, 1).
fn logistic(x: f64) -> f64 {
    4.0 * x * (1.0 - x)
}

/// Initial chaotic state derived from the seed, nudged off the map's
/// fixed points so the orbit never collapses.
fn chaotic_state(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    loop {
        let x: f64 = rng.gen_range(0.05..0.95);
        if (x - 0.25).abs() > 1e-3 && (x - 0.5).abs() > 1e-3 && (x - 0.75).abs() > 1e-3 {
            return x;
        }
    }
}

fn trial_rng(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let key = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(((generation as u64) << 32) ^ index as u64);
    ChaCha8Rng::seed_from_u64(key)
}

fn guarded(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximizes `fitness` over the boxed search space.
///
/// `repair` runs on every candidate after box clipping and must leave the
/// genome inside the boxes; it is the hook for coupled constraints such
/// as budget caps. Selection keeps the incumbent unless the trial is at
/// least as good, so the best-so-far trace never decreases.
pub fn chaotic_de_optimize<F, R>(
    config: &DeConfig,
    bounds: &[(f64, f64)],
    fitness: F,
    repair: R,
) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    R: Fn(&mut [f64]) + Sync,
{
    config.validate()?;
    if bounds.is_empty() {
        return Err(CoreError::invalid("search space must have at least one dimension"));
    }
    for (lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(CoreError::invalid("every bound must be a finite interval"));
        }
    }
    let dim = bounds.len();
    let np = config.population;

    // Chaotic population init: one orbit feeds all genes in fixed order.
    let mut x = chaotic_state(config.seed);
    let mut population: Vec<Vec<f64>> = Vec::with_capacity(np);
    for _ in 0..np {
        let mut genome = Vec::with_capacity(dim);
        for (lo, hi) in bounds {
            x = logistic(x);
            genome.push(lo + x * (hi - lo));
        }
        repair(&mut genome);
        population.push(genome);
    }
    let mut fitnesses: Vec<f64> =
        population.par_iter().map(|g| guarded(fitness(g))).collect();
    let mut evaluations = np;

    let mut best_idx = 0;
    for i in 1..np {
        if fitnesses[i] > fitnesses[best_idx] {
            best_idx = i;
        }
    }
    let mut best = population[best_idx].clone();
    let mut best_fitness = fitnesses[best_idx];
    let mut trace = Vec::with_capacity(config.max_iterations + 1);
    let mut trace_genomes = Vec::with_capacity(config.max_iterations + 1);
    trace.push(best_fitness);
    trace_genomes.push(best.clone());
    let mut stall = 0usize;

    for generation in 0..config.max_iterations {
        // Per-trial scale factors come off the chaotic orbit sequentially.
        let f_values: Vec<f64> = (0..np)
            .map(|_| {
                x = logistic(x);
                config.f_min + x * (config.f_max - config.f_min)
            })
            .collect();

        let trials: Vec<(Vec<f64>, f64)> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(config.seed, generation, i);
                let mut pick = || loop {
                    let r = rng.gen_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let r2 = loop {
                    let r = pick();
                    if r != r1 {
                        break r;
                    }
                };
                let r3 = loop {
                    let r = pick();
                    if r != r1 && r != r2 {
                        break r;
                    }
                };
                let forced = rng.gen_range(0..dim);
                let mut trial = population[i].clone();
                for d in 0..dim {
                    if d == forced || rng.gen::<f64>() < config.crossover {
                        let v = population[r1][d]
                            + f_values[i] * (population[r2][d] - population[r3][d]);
                        trial[d] = v.clamp(bounds[d].0, bounds[d].1);
                    }
                }
                repair(&mut trial);
                let score = guarded(fitness(&trial));
                (trial, score)
            })
            .collect();
        evaluations += np;

        let mut improved = false;
        for (i, (trial, score)) in trials.into_iter().enumerate() {
            if score >= fitnesses[i] {
                population[i] = trial;
                fitnesses[i] = score;
                if score > best_fitness {
                    best_fitness = score;
                    best = population[i].clone();
                    improved = true;
                }
            }
        }
        trace.push(best_fitness);
        trace_genomes.push(best.clone());

        stall = if improved { 0 } else { stall + 1 };
        if let Some(patience) = config.plateau_patience {
            if stall >= patience {
                break;
            }
        }
    }

    Ok(DeResult { best, best_fitness, trace, trace_genomes, evaluations })
}

// ====================================================================
// Tests
// ====================================================================
