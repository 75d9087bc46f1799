//! Operator dispatch heuristic for one renewable scenario.
//!
//! Builds a feasible commitment of every device from the grid tariff and
//! device costs alone; retail prices never enter, so the operator's profit
//! stays an affine function of them. The stages run in data order:
//!
//! 1. heat per community: CHP first, boiler second, heat storage relief,
//! 2. heat tie-line matching between the two communities,
//! 3. battery arbitrage against the purchase tariff blocks,
//! 4. CHP electric output by marginal cost, ramp-limited hour to hour,
//! 5. micro-turbine commitment against remaining deficits,
//! 6. electric tie-line matching, paired so daily sums stay at zero,
//! 7. grid exchange as the slack, with a quadratic penalty on overflow.
//!
//! Every loop runs in fixed order with no randomness, so a dispatch is a
//! pure function of its inputs.

use crate::devices::{pipe_loss, StorageDevice};
use crate::error::{CoreError, ConstraintId, Violation};
use crate::market::{CiesDispatch, ScenarioDispatch};
use crate::series::{Hourly, HOURS, ZERO_DAY};
use crate::system::SystemModel;
use crate::Result;

/// Feasible dispatch plus the infeasibility mass the heuristic could not
/// place anywhere (kW^2 across all hours and communities).
#[derive(Debug, Clone)]
pub struct DispatchOutcome {
    pub dispatch: ScenarioDispatch,
    /// Sum of squared unserved or unabsorbable power, zero when feasible.
    pub penalty: f64,
    pub violations: Vec<Violation>,
}

// ====================================================================
// Storage plans
// ====================================================================

/// Make-up charge that exactly offsets self-discharge at `level`.
fn hold_charge(s: &StorageDevice, level: f64, dt: f64) -> f64 {
    (s.k_loss * level / (s.eta_ch * dt)).min(s.p_ch_max)
}

/// Charge/discharge plan that pins the level at its initial value all day.
fn hold_plan(s: &StorageDevice, dt: f64) -> (Hourly, Hourly, bool) {
    let mut ch = ZERO_DAY;
    let mut level = s.c_init;
    let mut ok = true;
    for slot in ch.iter_mut() {
        let make_up = hold_charge(s, level, dt);
        *slot = make_up;
        level = (1.0 - s.k_loss) * level + s.eta_ch * make_up * dt;
        if (level - s.c_init).abs() > 1e-9 || level < s.c_min - 1e-9 {
            ok = false;
        }
    }
    (ch, ZERO_DAY, ok)
}

/// Battery plan: fill during the cheapest tariff block, drain during the
/// most expensive one, hold the level otherwise. Falls back to a pure
/// hold plan when the spread cannot pay for the round-trip losses or the
/// greedy schedule fails to close the daily cycle.
fn ees_plan(s: &StorageDevice, p_buy: &Hourly, dt: f64) -> (Hourly, Hourly) {
    let lo = p_buy.iter().cloned().fold(f64::MAX, f64::min);
    let hi = p_buy.iter().cloned().fold(f64::MIN, f64::max);
    let profitable = hi * s.eta_ch * s.eta_dc > lo;
    if !profitable {
        let (ch, dc, _ok) = hold_plan(s, dt);
        return (ch, dc);
    }
    let mut ch = ZERO_DAY;
    let mut dc = ZERO_DAY;
    let mut level = s.c_init;
    for t in 0..HOURS {
        let leaked = (1.0 - s.k_loss) * level;
        if p_buy[t] == lo && leaked < s.c_max {
            ch[t] = ((s.c_max - leaked) / (s.eta_ch * dt)).min(s.p_ch_max);
        } else if p_buy[t] == hi {
            let available = ((leaked - s.c_min) * s.eta_dc / dt).min(s.p_dc_max);
            if available > 1e-12 {
                dc[t] = available;
            } else {
                ch[t] = hold_charge(s, level, dt);
            }
        } else {
            ch[t] = hold_charge(s, level, dt);
        }
        level = leaked + s.eta_ch * ch[t] * dt - dc[t] * dt / s.eta_dc;
    }
    if (level - s.c_init).abs() > 1e-6 {
        let (ch, dc, _ok) = hold_plan(s, dt);
        return (ch, dc);
    }
    (ch, dc)
}

// ====================================================================
// Heat stage
// ====================================================================

struct HeatPlan {
    chp_h: Hourly,
    eb_p: Hourly,
    hst_ch: Hourly,
    hst_dc: Hourly,
    /// Shortfall the community cannot produce or draw from storage.
    shortfall: Hourly,
}

/// Heat demand seen at the source bus: building loads and pipe losses at
/// each building's arrival hour, folded back to the injection hour.
fn source_heat_demand(system: &SystemModel, loads_h: &[Hourly], j: usize) -> Hourly {
    let cies = &system.cies[j];
    let mut demand = ZERO_DAY;
    for (i, b) in system.buildings.iter().enumerate() {
        if b.cies != j {
            continue;
        }
        for (t, slot) in demand.iter_mut().enumerate() {
            let arrive = (t + b.delay_periods) % HOURS;
            *slot += loads_h[i][arrive]
                + pipe_loss(&b.pipe, cies.supply_temp, system.t_out[arrive]).delta_h;
        }
    }
    demand
}

fn heat_plan(system: &SystemModel, j: usize, demand: &Hourly) -> HeatPlan {
    let cies = &system.cies[j];
    let mut plan = HeatPlan {
        chp_h: ZERO_DAY,
        eb_p: ZERO_DAY,
        hst_ch: ZERO_DAY,
        hst_dc: ZERO_DAY,
        shortfall: ZERO_DAY,
    };
    let mut rem = ZERO_DAY;
    for t in 0..HOURS {
        plan.chp_h[t] = demand[t].min(cies.chp.h_max).max(0.0);
        let left = demand[t] - plan.chp_h[t];
        let eb_heat = left.min(cies.eb.eta * cies.eb.p_max);
        plan.eb_p[t] = eb_heat / cies.eb.eta;
        rem[t] = left - eb_heat;
    }

    let s = &cies.hst;
    if rem.iter().all(|r| *r <= 0.0) && s.c_init == 0.0 {
        // Nothing to relieve and an empty tank self-discharges nothing,
        // so the storage can genuinely sit idle.
        return plan;
    }

    // Relief pass: discharge into shortfalls, recover toward the initial
    // level from production headroom otherwise, hold once recovered.
    let mut level = s.c_init;
    for t in 0..HOURS {
        let leaked = (1.0 - s.k_loss) * level;
        if rem[t] > 0.0 {
            let available = ((leaked - s.c_min) * s.eta_dc / system.dt).min(s.p_dc_max);
            let dc = rem[t].min(available).max(0.0);
            plan.hst_dc[t] = dc;
            rem[t] -= dc;
        } else if leaked < s.c_init {
            let headroom = (cies.chp.h_max - plan.chp_h[t])
                + cies.eb.eta * (cies.eb.p_max - plan.eb_p[t]);
            let want = ((s.c_init - leaked) / (s.eta_ch * system.dt)).min(s.p_ch_max);
            let ch = want.min(headroom).max(0.0);
            // Recharge rides on extra production, CHP headroom first.
            let extra_chp = ch.min(cies.chp.h_max - plan.chp_h[t]);
            plan.chp_h[t] += extra_chp;
            plan.eb_p[t] += (ch - extra_chp) / cies.eb.eta;
            plan.hst_ch[t] = ch;
        }
        level = leaked + s.eta_ch * plan.hst_ch[t] * system.dt
            - plan.hst_dc[t] * system.dt / s.eta_dc;
    }
    if (level - s.c_init).abs() > 1e-6 {
        // The relief schedule cannot close the day; fall back to holding
        // the tank and absorbing the shortfall downstream.
        let (hold_ch, hold_dc, ok) = hold_plan(s, system.dt);
        for t in 0..HOURS {
            plan.chp_h[t] = demand[t].min(cies.chp.h_max).max(0.0);
            let left = demand[t] - plan.chp_h[t];
            let eb_heat = left.min(cies.eb.eta * cies.eb.p_max);
            plan.eb_p[t] = eb_heat / cies.eb.eta;
            rem[t] = left - eb_heat;
            let headroom = (cies.chp.h_max - plan.chp_h[t])
                + cies.eb.eta * (cies.eb.p_max - plan.eb_p[t]);
            if ok && hold_ch[t] <= headroom {
                let extra_chp = hold_ch[t].min(cies.chp.h_max - plan.chp_h[t]);
                plan.chp_h[t] += extra_chp;
                plan.eb_p[t] += (hold_ch[t] - extra_chp) / cies.eb.eta;
                plan.hst_ch[t] = hold_ch[t];
                plan.hst_dc[t] = hold_dc[t];
            } else {
                plan.hst_ch[t] = 0.0;
                plan.hst_dc[t] = 0.0;
            }
        }
    }
    plan.shortfall = rem.map(|r| r.max(0.0));
    plan
}

// ====================================================================
// CHP and MT electric stages
// ====================================================================

/// Marginal-cost driven CHP electric schedule: cover local deficit while
/// cheaper than buying, keep producing for export while cheaper than the
/// feed-in price, ramp-limited between consecutive hours.
fn chp_electric(system: &SystemModel, j: usize, deficit: &Hourly, chp_h: &Hourly) -> Hourly {
    let cies = &system.cies[j];
    let c = &cies.costs.chp;
    let om = cies.costs.om.chp;
    let mut out = ZERO_DAY;
    let mut prev: Option<f64> = None;
    for t in 0..HOURS {
        let base_cost = c.power_lin + c.cross * chp_h[t] + om;
        let toward = |price: f64| -> f64 {
            if c.power_quad <= 0.0 {
                if price > base_cost {
                    cies.chp.p_max
                } else {
                    0.0
                }
            } else {
                ((price - base_cost) / (2.0 * c.power_quad)).max(0.0)
            }
        };
        let cover = toward(system.tariff.p_buy[t]).min(deficit[t].max(0.0));
        let export = toward(system.tariff.p_sell[t]).min(cies.chp.p_max);
        let mut want = cover.max(export).clamp(cies.chp.p_min, cies.chp.p_max);
        if let Some(p) = prev {
            want = want.clamp(p + cies.chp.ramp_down, p + cies.chp.ramp_up);
            want = want.clamp(cies.chp.p_min, cies.chp.p_max);
        }
        out[t] = want;
        prev = Some(want);
    }
    out
}

/// Micro-turbine commitment: run only in hours where buying the unit's
/// minimum block from the grid would cost more than generating it, and a
/// deficit at least that large exists; output follows the deficit inside
/// the ramp window, and the unit simply shuts down when squeezed out.
fn mt_plan(system: &SystemModel, j: usize, deficit: &Hourly) -> (Hourly, [bool; HOURS]) {
    let cies = &system.cies[j];
    let mt = &cies.mt;
    let fuel = &cies.costs.mt;
    let mut p = ZERO_DAY;
    let mut on = [false; HOURS];
    let mut prev = 0.0;
    for t in 0..HOURS {
        let worth = system.tariff.p_buy[t] * mt.p_min >= fuel.base + fuel.marginal * mt.p_min;
        if worth && deficit[t] >= mt.p_min {
            let lo = mt.p_min.max(prev + mt.ramp_down);
            let hi = mt.p_max.min(prev + mt.ramp_up);
            if lo <= hi {
                p[t] = deficit[t].min(mt.p_max).clamp(lo, hi);
                on[t] = true;
            }
        }
        prev = if on[t] { p[t] } else { 0.0 };
    }
    (p, on)
}

// ====================================================================
// Tie-line matching
// ====================================================================

#[derive(Debug, Clone, Copy)]
struct TransferSlot {
    hour: usize,
    amount: f64,
    benefit: f64,
}

/// Pairs transfer volume between the two directions so each community's
/// daily tie sum is exactly zero. Candidates are consumed in descending
/// benefit order; the matched volume is the smaller directional total.
fn matched_transfers(
    mut ab: Vec<TransferSlot>,
    mut ba: Vec<TransferSlot>,
) -> (Hourly, Hourly) {
    let order = |x: &TransferSlot, y: &TransferSlot| {
        y.benefit.partial_cmp(&x.benefit).unwrap().then(x.hour.cmp(&y.hour))
    };
    ab.sort_by(order);
    ba.sort_by(order);
    let total = |v: &[TransferSlot]| v.iter().map(|s| s.amount).sum::<f64>();
    let volume = total(&ab).min(total(&ba));
    let take = |list: &[TransferSlot]| -> Hourly {
        let mut left = volume;
        let mut out = ZERO_DAY;
        for slot in list {
            if left <= 1e-12 {
                break;
            }
            let x = slot.amount.min(left);
            out[slot.hour] += x;
            left -= x;
        }
        out
    };
    (take(&ab), take(&ba))
}

// ====================================================================
// Scenario dispatch
// ====================================================================

/// Builds the full dispatch of both communities for one renewable
/// scenario, given each building's effective loads and the per-unit
/// renewable paths shared by the whole district.
pub fn scenario_dispatch(
    system: &SystemModel,
    loads_p: &[Hourly],
    loads_h: &[Hourly],
    wt_path: &Hourly,
    pv_path: &Hourly,
) -> Result<DispatchOutcome> {
    if loads_p.len() != system.buildings.len() || loads_h.len() != system.buildings.len() {
        return Err(CoreError::invalid("one load pair per building is required"));
    }
    let nj = system.cies.len();
    let mut dispatches = Vec::with_capacity(nj);
    let mut heat_shortfall = Vec::with_capacity(nj);
    let mut violations = Vec::new();
    let mut penalty = 0.0;

    // Stage 1: per-community heat plans.
    for j in 0..nj {
        let (wt, pv) = system.renewable_feed(j, wt_path, pv_path);
        let demand = source_heat_demand(system, loads_h, j);
        let plan = heat_plan(system, j, &demand);
        let mut d = CiesDispatch::idle(wt, pv);
        d.chp_h = plan.chp_h;
        d.eb_p = plan.eb_p;
        d.hst_ch = plan.hst_ch;
        d.hst_dc = plan.hst_dc;
        heat_shortfall.push(plan.shortfall);
        dispatches.push(d);
    }

    // Stage 2: heat tie-line. A shortfall can only be imported if the
    // partner has spare production, and only to the extent the reverse
    // direction carries matching volume over the day.
    if nj == 2 && system.tie_heat_cap > 0.0 {
        let headroom = |d: &CiesDispatch, j: usize| -> Hourly {
            let c = &system.cies[j];
            std::array::from_fn(|t| {
                (c.chp.h_max - d.chp_h[t]) + c.eb.eta * (c.eb.p_max - d.eb_p[t])
            })
        };
        let head = [headroom(&dispatches[0], 0), headroom(&dispatches[1], 1)];
        let candidates = |from: usize, to: usize| -> Vec<TransferSlot> {
            (0..HOURS)
                .filter_map(|t| {
                    let amount = heat_shortfall[to][t]
                        .min(head[from][t])
                        .min(system.tie_heat_cap);
                    (amount > 1e-9).then_some(TransferSlot { hour: t, amount, benefit: 1.0 })
                })
                .collect()
        };
        let (flow_01, flow_10) = matched_transfers(candidates(0, 1), candidates(1, 0));
        for t in 0..HOURS {
            for (from, to, x) in [(0usize, 1usize, flow_01[t]), (1, 0, flow_10[t])] {
                if x <= 0.0 {
                    continue;
                }
                let c = &system.cies[from];
                let extra_chp = x.min(c.chp.h_max - dispatches[from].chp_h[t]);
                dispatches[from].chp_h[t] += extra_chp;
                dispatches[from].eb_p[t] += (x - extra_chp) / c.eb.eta;
                dispatches[from].tie_h[t] -= x;
                dispatches[to].tie_h[t] += x;
                heat_shortfall[to][t] -= x;
            }
        }
    }
    for (j, shortfall) in heat_shortfall.iter().enumerate() {
        for (t, &r) in shortfall.iter().enumerate() {
            if r > 1e-9 {
                penalty += r * r;
                violations.push(
                    Violation::new(
                        ConstraintId::HeatBalance,
                        r,
                        format!("community {j} cannot serve {r:.3} kW of heat"),
                    )
                    .at_hour(t + 1),
                );
            }
        }
    }

    // Stage 3: battery arbitrage, then the community's electric deficit.
    let mut deficits = Vec::with_capacity(nj);
    for (j, d) in dispatches.iter_mut().enumerate() {
        let (ch, dc) = ees_plan(&system.cies[j].ees, &system.tariff.p_buy, system.dt);
        d.ees_ch = ch;
        d.ees_dc = dc;
        let mut load = ZERO_DAY;
        for (i, b) in system.buildings.iter().enumerate() {
            if b.cies == j {
                for t in 0..HOURS {
                    load[t] += loads_p[i][t];
                }
            }
        }
        let deficit: Hourly = std::array::from_fn(|t| {
            load[t] + d.eb_p[t] + d.ees_ch[t] - d.wt[t] - d.pv[t] - d.ees_dc[t]
        });
        deficits.push(deficit);
    }

    // Stages 4 and 5: CHP electric output, then micro-turbine cover.
    for (j, d) in dispatches.iter_mut().enumerate() {
        d.chp_p = chp_electric(system, j, &deficits[j], &d.chp_h);
        let after_chp: Hourly = std::array::from_fn(|t| deficits[j][t] - d.chp_p[t]);
        let (mt_p, mt_on) = mt_plan(system, j, &after_chp);
        d.mt_p = mt_p;
        d.mt_on = mt_on;
        deficits[j] = std::array::from_fn(|t| after_chp[t] - d.mt_p[t]);
    }

    // Stage 6: electric tie-line. Surplus in one community covers deficit
    // in the other at the same hour; both directions are paired so the
    // daily sums close. The benefit of a transfer is the avoided purchase
    // minus the foregone feed-in revenue.
    if nj == 2 && system.tie_electric_cap > 0.0 {
        let candidates = |from: usize, to: usize, deficits: &[Hourly]| -> Vec<TransferSlot> {
            (0..HOURS)
                .filter_map(|t| {
                    let surplus = (-deficits[from][t]).max(0.0);
                    let need = deficits[to][t].max(0.0);
                    let amount = surplus.min(need).min(system.tie_electric_cap);
                    (amount > 1e-9).then_some(TransferSlot {
                        hour: t,
                        amount,
                        benefit: system.tariff.p_buy[t] - system.tariff.p_sell[t],
                    })
                })
                .collect()
        };
        let (flow_01, flow_10) =
            matched_transfers(candidates(0, 1, &deficits), candidates(1, 0, &deficits));
        for t in 0..HOURS {
            for (from, to, x) in [(0usize, 1usize, flow_01[t]), (1, 0, flow_10[t])] {
                if x <= 0.0 {
                    continue;
                }
                dispatches[from].tie_p[t] -= x;
                dispatches[to].tie_p[t] += x;
                deficits[from][t] += x;
                deficits[to][t] -= x;
            }
        }
    }

    // Stage 7: the grid takes whatever is left, up to the connection cap.
    for (j, d) in dispatches.iter_mut().enumerate() {
        let cap = system.cies[j].grid_cap;
        for t in 0..HOURS {
            let r = deficits[j][t];
            if r > 0.0 {
                d.grid_buy[t] = r.min(cap);
                let excess = r - d.grid_buy[t];
                if excess > 1e-9 {
                    penalty += excess * excess;
                    violations.push(
                        Violation::new(
                            ConstraintId::GridBound,
                            excess,
                            format!("community {j} is short {excess:.3} kW beyond the grid cap"),
                        )
                        .at_hour(t + 1),
                    );
                }
            } else if r < 0.0 {
                d.grid_sell[t] = (-r).min(cap);
                let excess = -r - d.grid_sell[t];
                if excess > 1e-9 {
                    penalty += excess * excess;
                    violations.push(
                        Violation::new(
                            ConstraintId::GridBound,
                            excess,
                            format!(
                                "community {j} has {excess:.3} kW of surplus beyond the grid cap"
                            ),
                        )
                        .at_hour(t + 1),
                    );
                }
            }
        }
    }

    Ok(DispatchOutcome {
        dispatch: ScenarioDispatch { cies: dispatches },
        penalty,
        violations,
    })
}

// ====================================================================
// Tests
// ====================================================================
