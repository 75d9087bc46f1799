//! Generator / discriminator objectives as pure batch statistics.
//!
//! The engine never trains a network: batches of discriminator (or critic)
//! outputs and interpolate gradient norms are produced elsewhere and scored
//! here. Two scoring modes exist, the saturating GAN losses and the
//! gradient-penalty Wasserstein critic objective.

use crate::error::{CoreError, Result};

/// One scoring batch.
///
/// `d_real` / `d_fake` are discriminator outputs on real and generated
/// samples; `grad_norms` are 2-norms of the critic gradient at interpolates,
/// used only by the gradient-penalty objective with weight `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBatch {
    pub d_real: Vec<f64>,
    pub d_fake: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub lambda: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn ensure_non_empty(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(CoreError::invalid(format!("{what}: empty batch")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CoreError::invalid(format!("{what}: non-finite value {v}")));
    }
    Ok(())
}

/// Saturating GAN losses `(L_G, L_D)`.
///
/// `L_G = mean(log(1 - d_fake))` and
/// `L_D = mean(log d_real) + mean(log(1 - d_fake))`.
/// Discriminator outputs must lie strictly inside (0, 1); anything else is a
/// domain error rather than a silent infinity.
pub fn gan_losses(batch: &LossBatch) -> Result<(f64, f64)> {
    ensure_non_empty(&batch.d_real, "gan_losses d_real")?;
    ensure_non_empty(&batch.d_fake, "gan_losses d_fake")?;
    for (label, values) in [("d_real", &batch.d_real), ("d_fake", &batch.d_fake)] {
        if let Some(v) = values.iter().find(|v| **v <= 0.0 || **v >= 1.0) {
            return Err(CoreError::invalid(format!(
                "gan_losses {label}: output {v} outside the open interval (0, 1)"
            )));
        }
    }
    let fake_term = mean(&batch.d_fake.iter().map(|d| (1.0 - d).ln()).collect::<Vec<_>>());
    let real_term = mean(&batch.d_real.iter().map(|d| d.ln()).collect::<Vec<_>>());
    Ok((fake_term, real_term + fake_term))
}

/// Gradient-penalty Wasserstein critic objective:
/// `mean(d_real) - mean(d_fake) + lambda * mean((grad_norms - 1)^2)`.
///
/// Critic outputs are unbounded, so only finiteness is checked; gradient
/// norms must be non-negative and `lambda >= 0`.
pub fn wgan_gp_objective(batch: &LossBatch) -> Result<f64> {
    ensure_non_empty(&batch.d_real, "wgan_gp d_real")?;
    ensure_non_empty(&batch.d_fake, "wgan_gp d_fake")?;
    ensure_non_empty(&batch.grad_norms, "wgan_gp grad_norms")?;
    if batch.grad_norms.iter().any(|g| *g < 0.0) {
        return Err(CoreError::invalid("wgan_gp grad_norms: negative norm"));
    }
    if !(batch.lambda >= 0.0) {
        return Err(CoreError::invalid(format!(
            "wgan_gp lambda {} must be non-negative",
            batch.lambda
        )));
    }
    let penalty = mean(
        &batch
            .grad_norms
            .iter()
            .map(|g| (g - 1.0).powi(2))
            .collect::<Vec<_>>(),
    );
    Ok(mean(&batch.d_real) - mean(&batch.d_fake) + batch.lambda * penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn batch(d_real: &[f64], d_fake: &[f64], grad_norms: &[f64], lambda: f64) -> LossBatch {
        LossBatch {
            d_real: d_real.to_vec(),
            d_fake: d_fake.to_vec(),
            grad_norms: grad_norms.to_vec(),
            lambda,
        }
    }

    #[test]
    fn symmetric_discriminator_generator_loss() {
        let (l_g, _) = gan_losses(&batch(&[0.5], &[0.5], &[], 0.0)).unwrap();
        assert_relative_eq!(l_g, 0.5f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn near_perfect_discriminator_loss_tends_to_zero() {
        let eps = 1e-12;
        let (_, l_d) = gan_losses(&batch(&[1.0 - eps], &[eps], &[], 0.0)).unwrap();
        assert!(l_d.abs() < 1e-11, "got {l_d}");
    }

    #[test]
    fn two_sample_discriminator_loss_matches_hand_expansion() {
        let (_, l_d) = gan_losses(&batch(&[0.8, 0.6], &[0.3, 0.1], &[], 0.0)).unwrap();
        let expected = (0.8f64.ln() + 0.6f64.ln()) / 2.0 + (0.7f64.ln() + 0.9f64.ln()) / 2.0;
        assert_relative_eq!(l_d, expected, max_relative = 1e-15);
    }

    #[test]
    fn gan_losses_reject_boundary_outputs() {
        assert!(gan_losses(&batch(&[1.0], &[0.5], &[], 0.0)).is_err());
        assert!(gan_losses(&batch(&[0.5], &[0.0], &[], 0.0)).is_err());
        assert!(gan_losses(&batch(&[], &[0.5], &[], 0.0)).is_err());
    }

    #[test]
    fn unit_gradient_norm_nullifies_penalty() {
        let v = wgan_gp_objective(&batch(&[0.8], &[0.3], &[1.0], 10.0)).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn off_unit_gradient_norm_is_penalized() {
        let v = wgan_gp_objective(&batch(&[0.8], &[0.3], &[1.5], 10.0)).unwrap();
        assert_relative_eq!(v, 3.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_batch_with_zero_lambda_scores_zero() {
        let v = wgan_gp_objective(&batch(&[0.0], &[0.0], &[0.0], 0.0)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn wgan_accepts_unbounded_critic_outputs() {
        let v = wgan_gp_objective(&batch(&[3.5, -1.0], &[-2.0], &[1.0], 10.0)).unwrap();
        assert_relative_eq!(v, 1.25 + 2.0, max_relative = 1e-15);
    }

    #[test]
    fn wgan_rejects_negative_norms_and_lambda() {
        assert!(wgan_gp_objective(&batch(&[0.1], &[0.1], &[-0.5], 10.0)).is_err());
        assert!(wgan_gp_objective(&batch(&[0.1], &[0.1], &[1.0], -1.0)).is_err());
    }
}
