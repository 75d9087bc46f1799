//! Exact solver for a building user's response problem.
//!
//! Given retail prices, each user minimizes energy cost plus quadratic
//! inconvenience over three independent decision groups: shiftable load
//! (boxed, zero daily sum), interruptible load (boxed below), and heat
//! curtailment (boxed below). The first group couples across hours only
//! through the daily-sum constraint, so the whole problem reduces to
//! per-hour clipping plus a one-dimensional dual search.

use crate::building::{BaselineProfile, BuildingParams, DemandResponse};
use crate::error::CoreError;
use crate::market::PriceSchedule;
use crate::series::HOURS;
use crate::Result;

/// Solved response with the shift dual and a conservative optimality bound.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub response: DemandResponse,
    /// Multiplier on the zero-sum constraint of the shiftable group.
    pub nu: f64,
    /// Worst first-order optimality or feasibility residual.
    pub kkt_residual: f64,
}

// ====================================================================
// Separable groups
// ====================================================================

/// Optimal interruptible load per hour: `clip(mu / (2 vartheta), 0, hi)`.
pub fn interrupt_profile(mu: &[f64], vartheta: f64, hi: &[f64]) -> Vec<f64> {
    mu.iter()
        .zip(hi)
        .map(|(&m, &h)| (m / (2.0 * vartheta)).clamp(0.0, h))
        .collect()
}

/// Optimal heat curtailment per hour: `clip(gamma / (2 theta), 0, hi)`.
pub fn cut_profile(gamma: &[f64], theta: f64, hi: &[f64]) -> Vec<f64> {
    gamma
        .iter()
        .zip(hi)
        .map(|(&g, &h)| (g / (2.0 * theta)).clamp(0.0, h))
        .collect()
}

fn shift_at(mu: &[f64], omega: f64, lo: &[f64], hi: &[f64], nu: f64) -> Vec<f64> {
    (0..mu.len())
        .map(|t| (-(mu[t] + nu) / (2.0 * omega)).clamp(lo[t], hi[t]))
        .collect()
}

/// Optimal shiftable load profile and its dual multiplier.
///
/// Solves `min sum(mu_t x_t + omega x_t^2)` subject to the boxes and
/// `sum x_t = 0` by bisecting the multiplier `nu`: each candidate profile
/// is the unconstrained minimizer `-(mu_t + nu) / (2 omega)` clipped to its
/// box, and the daily sum is monotone decreasing in `nu`. A final Newton
/// polish on the unclamped hours removes the bisection residue.
pub fn shift_profile(mu: &[f64], omega: f64, lo: &[f64], hi: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = mu.len();
    if lo.len() != n || hi.len() != n || n == 0 {
        return Err(CoreError::invalid("shift bounds must match the price vector"));
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(CoreError::invalid("shift box has a crossed bound"));
    }
    let lo_sum: f64 = lo.iter().sum();
    let hi_sum: f64 = hi.iter().sum();
    if lo_sum > 0.0 || hi_sum < 0.0 {
        return Err(CoreError::infeasible(format!(
            "zero-sum shift is impossible for box sums [{lo_sum}, {hi_sum}]"
        )));
    }
    if !(omega > 0.0) {
        return Err(CoreError::invalid("shift discomfort weight must be positive"));
    }

    // Below nu_lo every hour clamps to its upper bound (daily sum >= 0),
    // above nu_hi every hour clamps to its lower bound (daily sum <= 0),
    // so the zero of the monotone daily sum is bracketed.
    let mut nu_lo =
        (0..n).map(|t| -mu[t] - 2.0 * omega * hi[t]).fold(f64::MAX, f64::min) - 1.0;
    let mut nu_hi =
        (0..n).map(|t| -mu[t] - 2.0 * omega * lo[t]).fold(f64::MIN, f64::max) + 1.0;
    let sum_at = |nu: f64| -> f64 { shift_at(mu, omega, lo, hi, nu).iter().sum() };
    let mut nu = 0.0;
    for _ in 0..200 {
        nu = 0.5 * (nu_lo + nu_hi);
        let s = sum_at(nu);
        if s > 0.0 {
            nu_lo = nu;
        } else {
            nu_hi = nu;
        }
        if nu_hi - nu_lo < 1e-14 * (1.0 + nu.abs()) {
            break;
        }
    }

    let mut x = shift_at(mu, omega, lo, hi, nu);
    // Polish: with the active set fixed, the exact multiplier satisfies
    // sum_I -(mu_t + nu)/(2 omega) + sum_B x_b = 0 over interior hours I.
    let interior: Vec<usize> =
        (0..n).filter(|&t| x[t] > lo[t] + 1e-12 && x[t] < hi[t] - 1e-12).collect();
    if !interior.is_empty() {
        let bound_sum: f64 = (0..n).filter(|t| !interior.contains(t)).map(|t| x[t]).sum();
        let mu_sum: f64 = interior.iter().map(|&t| mu[t]).sum();
        let exact = (2.0 * omega * bound_sum - mu_sum) / interior.len() as f64;
        let candidate = shift_at(mu, omega, lo, hi, exact);
        let s: f64 = candidate.iter().sum();
        if s.abs() < sum_at(nu).abs() {
            nu = exact;
            x = candidate;
        }
    }
    Ok((x, nu))
}

// ====================================================================
// Full response problem
// ====================================================================

/// Daily objective value of one user's response under the given prices:
/// electricity and heat purchases plus the quadratic discomfort terms.
pub fn follower_objective(
    prices: &PriceSchedule,
    params: &BuildingParams,
    base: &BaselineProfile,
    dr: &DemandResponse,
) -> f64 {
    let mut total = 0.0;
    for t in 0..HOURS {
        let p = base.p0[t] + dr.tsl[t] - dr.il[t];
        let h = base.h0[t] - dr.ch[t];
        total += prices.electricity[t] * p + prices.heat[t] * h;
        total += params.omega * dr.tsl[t] * dr.tsl[t]
            + params.vartheta * dr.il[t] * dr.il[t]
            + params.theta * dr.ch[t] * dr.ch[t];
    }
    total
}

/// First-order optimality and feasibility residual of a candidate response.
///
/// Zero (to rounding) exactly at the optimum: stationarity on every
/// unclamped coordinate, sign conditions at the bounds, box violations,
/// and the zero-sum defect of the shiftable group all fold into one max.
pub fn kkt_residual(
    prices: &PriceSchedule,
    params: &BuildingParams,
    base: &BaselineProfile,
    dr: &DemandResponse,
    nu: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    let edge: f64 = 1e-12;
    let ch_bounds = base.ch_max();
    for t in 0..HOURS {
        let mu = prices.electricity[t];
        let gamma = prices.heat[t];

        let (lo, hi) = (base.tsl_min[t], base.tsl_max[t]);
        let g = mu + nu + 2.0 * params.omega * dr.tsl[t];
        worst = worst.max((lo - dr.tsl[t]).max(dr.tsl[t] - hi));
        // A coordinate pinned by a zero-width box carries no sign
        // condition, only feasibility.
        if hi - lo > edge {
            if dr.tsl[t] <= lo + edge.max(1e-9 * (hi - lo)) {
                worst = worst.max(-g);
            } else if dr.tsl[t] >= hi - edge.max(1e-9 * (hi - lo)) {
                worst = worst.max(g);
            } else {
                worst = worst.max(g.abs());
            }
        }

        let hi_il = base.il_max[t];
        let g = -mu + 2.0 * params.vartheta * dr.il[t];
        worst = worst.max((-dr.il[t]).max(dr.il[t] - hi_il));
        if hi_il > edge {
            if dr.il[t] <= edge.max(1e-9 * hi_il) {
                worst = worst.max(-g);
            } else if dr.il[t] >= hi_il - edge.max(1e-9 * hi_il) {
                worst = worst.max(g);
            } else {
                worst = worst.max(g.abs());
            }
        }

        let hi_ch = ch_bounds[t];
        let g = -gamma + 2.0 * params.theta * dr.ch[t];
        worst = worst.max((-dr.ch[t]).max(dr.ch[t] - hi_ch));
        if hi_ch > edge {
            if dr.ch[t] <= edge.max(1e-9 * hi_ch) {
                worst = worst.max(-g);
            } else if dr.ch[t] >= hi_ch - edge.max(1e-9 * hi_ch) {
                worst = worst.max(g);
            } else {
                worst = worst.max(g.abs());
            }
        }
    }
    let sum: f64 = dr.tsl.iter().sum();
    worst.max(sum.abs())
}

/// Solves one user's response problem to optimality.
pub fn follower_qp_solve(
    prices: &PriceSchedule,
    params: &BuildingParams,
    base: &BaselineProfile,
) -> Result<QpSolution> {
    params.validate()?;
    let (tsl, nu) = shift_profile(&prices.electricity, params.omega, &base.tsl_min, &base.tsl_max)?;
    let il = interrupt_profile(&prices.electricity, params.vartheta, &base.il_max);
    let ch = cut_profile(&prices.heat, params.theta, &base.ch_max());

    let mut response = DemandResponse::zero();
    response.tsl.copy_from_slice(&tsl);
    response.il.copy_from_slice(&il);
    response.ch.copy_from_slice(&ch);
    let kkt = kkt_residual(prices, params, base, &response, nu);
    Ok(QpSolution { response, nu, kkt_residual: kkt })
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Hourly;
    use approx::assert_abs_diff_eq;

    fn params() -> BuildingParams {
        BuildingParams {
            heat_transfer: 0.5,
            surface_area: 4.5e4,
            volume: 4.5e5,
            air_specific_heat: 1.007,
            air_density: 1.2,
            metabolic_rate: 80.0,
            clothing_resistance: 0.161,
            skin_temp: 33.5,
            omega: 0.003,
            vartheta: 0.002,
            theta: 0.008,
        }
    }

    fn base(flex: f64) -> BaselineProfile {
        let p0 = [500.0; HOURS];
        BaselineProfile {
            p0,
            h0: [300.0; HOURS],
            t_out: [-5.0; HOURS],
            tsl_min: p0.map(|p| -flex * p),
            tsl_max: p0.map(|p| flex * p),
            il_max: p0.map(|p| flex * p),
            h_min: [100.0; HOURS],
        }
    }

    #[test]
    fn flat_prices_leave_shift_idle() {
        let prices = PriceSchedule::flat(0.65, 0.5);
        let sol = follower_qp_solve(&prices, &params(), &base(0.1)).unwrap();
        for t in 0..HOURS {
            assert_abs_diff_eq!(sol.response.tsl[t], 0.0, epsilon = 1e-9);
        }
        // Unbounded stationary points for the other groups are far outside
        // their boxes, so both clamp to the ceiling.
        assert_abs_diff_eq!(sol.response.il[0], 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.response.ch[0], 31.25, epsilon = 1e-12);
        assert!(sol.kkt_residual <= 1e-8);
    }

    #[test]
    fn two_hour_shift_saturates_spread() {
        // With two hours priced 1.0 and 0.4 and wide boxes, load moves
        // from the expensive hour to the cheap one until the marginal
        // discomfort closes the gap: x = (1.0 - 0.4) / (4 * omega) each way.
        let mu = [1.0, 0.4];
        let (x, _nu) = shift_profile(&mu, 0.003, &[-100.0, -100.0], &[100.0, 100.0]).unwrap();
        assert_abs_diff_eq!(x[0], -50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 50.0, epsilon = 1e-9);

        let (x, _nu) = shift_profile(&mu, 0.003, &[-10.0, -10.0], &[10.0, 10.0]).unwrap();
        assert_abs_diff_eq!(x[0], -10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 10.0, epsilon = 1e-9);
    }

    #[test]
    fn stationary_values_reached_with_huge_boxes() {
        let mut prices = PriceSchedule::flat(0.65, 0.5);
        prices.electricity[0] = 1.0;
        let mut b = base(0.1);
        b.tsl_min = [-1e6; HOURS];
        b.tsl_max = [1e6; HOURS];
        b.il_max = [1e6; HOURS];
        b.h_min = [-1e6; HOURS];
        let sol = follower_qp_solve(&prices, &params(), &b).unwrap();
        // il and ch sit at their unconstrained stationary points.
        assert_abs_diff_eq!(sol.response.il[0], 1.0 / 0.004, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.response.il[1], 0.65 / 0.004, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.response.ch[0], 0.5 / 0.016, epsilon = 1e-6);
        // The shift dual settles at minus the mean-adjusted price level.
        let avg_adjust: f64 = sol.response.tsl.iter().sum();
        assert_abs_diff_eq!(avg_adjust, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(
            sol.response.tsl[0],
            -(prices.electricity[0] + sol.nu) / 0.006,
            epsilon = 1e-6
        );
        assert!(sol.kkt_residual <= 1e-8);
    }

    #[test]
    fn solution_beats_grid_search() {
        // Exhaustive 0.5 kW grid over a three-hour shift problem.
        let mu = [0.9, 0.5, 0.7];
        let lo = [-6.0, -6.0, -6.0];
        let hi = [6.0, 6.0, 6.0];
        let omega = 0.01;
        let (x, _nu) = shift_profile(&mu, omega, &lo, &hi).unwrap();
        let obj =
            |v: &[f64]| -> f64 { v.iter().zip(&mu).map(|(&a, &m)| m * a + omega * a * a).sum() };
        let mut best = f64::MAX;
        let steps = (6.0 * 2.0 / 0.5) as i64;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = -6.0 + 0.5 * i as f64;
                let b = -6.0 + 0.5 * j as f64;
                let c = -(a + b);
                if c < -6.0 || c > 6.0 {
                    continue;
                }
                best = best.min(obj(&[a, b, c]));
            }
        }
        assert!(obj(&x) <= best + 1e-9);
        let sum: f64 = x.iter().sum();
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_box_is_reported() {
        let mu = [0.5, 0.5];
        let err = shift_profile(&mu, 0.003, &[1.0, 1.0], &[2.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("zero-sum"));
    }

    #[test]
    fn zero_flexibility_pins_everything() {
        let prices = PriceSchedule::flat(0.65, 0.5);
        let mut b = base(0.0);
        b.h_min = b.h0;
        let sol = follower_qp_solve(&prices, &params(), &b).unwrap();
        assert_eq!(sol.response.tsl, [0.0; HOURS]);
        assert_eq!(sol.response.il, [0.0; HOURS]);
        assert_eq!(sol.response.ch, [0.0; HOURS]);
        assert!(sol.kkt_residual <= 1e-8);
    }

    #[test]
    fn objective_matches_manual_sum() {
        let prices = PriceSchedule::flat(0.65, 0.5);
        let b = base(0.1);
        let dr = DemandResponse::zero();
        let expect = 24.0 * (0.65 * 500.0 + 0.5 * 300.0);
        assert_abs_diff_eq!(
            follower_objective(&prices, &params(), &b, &dr),
            expect,
            epsilon = 1e-9
        );
    }

    #[test]
    fn asymmetric_boxes_keep_zero_sum() {
        let mut mu: Hourly = [0.7; HOURS];
        for t in 9..13 {
            mu[t] = 1.0;
        }
        for t in 0..7 {
            mu[t] = 0.44;
        }
        let lo: Vec<f64> = (0..HOURS).map(|t| if t % 3 == 0 { -20.0 } else { -5.0 }).collect();
        let hi: Vec<f64> = (0..HOURS).map(|t| if t % 2 == 0 { 15.0 } else { 8.0 }).collect();
        let (x, nu) = shift_profile(&mu, 0.004, &lo, &hi).unwrap();
        let sum: f64 = x.iter().sum();
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-8);
        for t in 0..HOURS {
            assert!(x[t] >= lo[t] - 1e-12 && x[t] <= hi[t] + 1e-12);
            if x[t] > lo[t] + 1e-9 && x[t] < hi[t] - 1e-9 {
                assert_abs_diff_eq!(mu[t] + nu + 2.0 * 0.004 * x[t], 0.0, epsilon = 1e-8);
            }
        }
    }
}
