//! Multi-target scheduling protocols and their power/placement solvers.
//!
//! Targets are served in TDMA slots, so each slot k has its own transmit
//! power `P_k` and, under pinch switching (PS), its own PA layout; pinch
//! multiplexing (PM) shares one layout across slots. Two problems are
//! solved under both protocols:
//!
//! - **power minimization**: smallest `sum_k P_k` such that every slot's
//!   BCRB meets a threshold. The KKT conditions make the per-slot optimal
//!   power the positive root of a quadratic in `P` whose coefficients come
//!   from the observation and prior FIMs, leaving a pure placement search.
//! - **min-max BCRB**: smallest worst-case BCRB under a total power budget.
//!   For fixed layouts the optimal power allocation equalizes the BCRBs at
//!   a level `u` found by bisection on the monotone map
//!   `u -> sum_k P_k(u)`; layouts are then improved by alternating
//!   element-wise passes. A high-SNR mode drops the prior FIM, which yields
//!   closed-form powers and removes the bisection.

use crate::bcrb::{prior_fim, Bfim, FimEvaluator, ObsFim, PriorFim};
use crate::error::{Error, Result};
use crate::optimizer::{element_wise_minimize, uniform_init, SearchConfig};
use crate::quadrature::GhRule;
use crate::scenario::{PinchLayout, Scenario, TargetPrior};

/// Target scheduling protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Re-optimize the PA layout for every time slot.
    PinchSwitching,
    /// One shared PA layout for all time slots.
    PinchMultiplexing,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::PinchSwitching => "ps",
            Protocol::PinchMultiplexing => "pm",
        }
    }
}

/// Which optimization problem a solution solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Total power minimization under a BCRB threshold (objective in watts).
    PowerMin,
    /// Min-max BCRB under a total power budget (objective in m^2).
    MinMax,
}

/// A set of targets sharing one physical scenario.
#[derive(Debug, Clone)]
pub struct MultiTargetScenario {
    pub priors: Vec<TargetPrior>,
    pub scenario: Scenario,
}

impl MultiTargetScenario {
    pub fn new(priors: Vec<TargetPrior>, scenario: Scenario) -> Result<Self> {
        if priors.is_empty() {
            return Err(Error::InvalidArgument("need at least one target".into()));
        }
        Ok(MultiTargetScenario { priors, scenario })
    }

    pub fn num_targets(&self) -> usize {
        self.priors.len()
    }
}

/// Coefficients of the KKT quadratic `A1 P^2 + A2 P + A3 = 0` whose positive
/// root is the power meeting a BCRB level exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// `alpha = 2 / sigma^2`.
    pub alpha: f64,
}

impl KktCoefficients {
    /// Builds the coefficients for BCRB level `level` (m^2) from the
    /// unscaled observation FIM and the prior FIM.
    pub fn new(obs: &ObsFim, prior: &PriorFim, level: f64, noise: f64) -> Self {
        let alpha = 2.0 / noise;
        KktCoefficients {
            a1: alpha * alpha * level * obs.det(),
            a2: alpha * level * (obs.xx * prior.yy + prior.xx * obs.yy)
                - alpha * (obs.yy + obs.xx),
            a3: level * prior.xx * prior.yy - (prior.yy + prior.xx),
            alpha,
        }
    }

    /// Power meeting the level: the positive quadratic root, clamped to zero
    /// when the prior alone already satisfies the level (`A3 >= 0`), with a
    /// linear fallback when `A1` underflows (rank-deficient observation FIM).
    /// `None` means no finite power reaches the level.
    pub fn positive_root(&self) -> Option<f64> {
        if self.a3 >= 0.0 {
            return Some(0.0);
        }
        if self.a1 <= f64::MIN_POSITIVE.max(1e-300 * self.a2.abs()) {
            // level below the large-P floor of a singular observation FIM
            if self.a2 > 0.0 {
                return Some(-self.a3 / self.a2);
            }
            return None;
        }
        // a1 > 0, a3 < 0: discriminant exceeds a2^2, exactly one positive root
        let disc = self.a2 * self.a2 - 4.0 * self.a1 * self.a3;
        let sq = disc.sqrt();
        if self.a2 >= 0.0 {
            Some(-2.0 * self.a3 / (self.a2 + sq))
        } else {
            Some((sq - self.a2) / (2.0 * self.a1))
        }
    }
}

/// Large-P limit of the BCRB for a given geometry: zero when the observation
/// FIM is invertible, otherwise the rank-deficient floor.
fn bcrb_floor(obs: &ObsFim, prior: &PriorFim) -> f64 {
    if !obs.is_rank_deficient() {
        return 0.0;
    }
    let denom = obs.xx * prior.yy + prior.xx * obs.yy;
    if denom > 0.0 {
        obs.trace() / denom
    } else {
        prior.prior_only_bcrb()
    }
}

pub(crate) fn power_from_fims(
    obs: &ObsFim,
    prior: &PriorFim,
    level: f64,
    noise: f64,
    slot: usize,
) -> Result<f64> {
    let mut coeffs = KktCoefficients::new(obs, prior, level, noise);
    if obs.is_rank_deficient() {
        // determinant at roundoff scale: force the linear branch so the
        // level either resolves against the rank-one floor or is rejected
        coeffs.a1 = 0.0;
    }
    coeffs.positive_root().ok_or(Error::Infeasible {
        slot,
        threshold: level,
        floor: bcrb_floor(obs, prior),
    })
}

/// Smallest transmit power for which the BCRB of `(layout, prior)` meets
/// `gamma_sen`, from the KKT quadratic. Zero when the prior alone suffices.
pub fn power_for_threshold(
    layout: &PinchLayout,
    prior: &TargetPrior,
    gamma_sen: f64,
    scenario: &Scenario,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<f64> {
    if !(gamma_sen.is_finite() && gamma_sen > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "BCRB threshold must be positive, got {gamma_sen}"
        )));
    }
    let pf = prior_fim(prior, rule_x)?;
    let obs = crate::bcrb::expected_observation_fim(layout, prior, scenario, rule_x, rule_y)?;
    power_from_fims(&obs, &pf, gamma_sen, scenario.total_noise, 0)
}

// ---------------------------------------------------------------------------
// Min-max level solve
// ---------------------------------------------------------------------------

/// `sum_k P_k(u)`; infinite when any slot cannot reach level `u`.
fn level_lhs(obs: &[ObsFim], priors: &[PriorFim], u: f64, noise: f64) -> f64 {
    let mut total = 0.0;
    for (o, p) in obs.iter().zip(priors) {
        match KktCoefficients::new(o, p, u, noise).positive_root() {
            Some(pk) => total += pk,
            None => return f64::INFINITY,
        }
    }
    total
}

/// Relative tolerance on the power-budget residual at the solved level.
const LEVEL_RESIDUAL_TOL: f64 = 1e-10;

pub(crate) fn solve_level_from_fims(
    obs: &[ObsFim],
    priors: &[PriorFim],
    p_max: f64,
    noise: f64,
) -> Result<(f64, Vec<f64>)> {
    let max_prior_bcrb = priors
        .iter()
        .map(|p| p.prior_only_bcrb())
        .fold(0.0f64, f64::max);
    let mut hi = max_prior_bcrb * 10.0;

    // seed the lower bracket from the high-SNR level estimate
    let mut lo = match obs
        .iter()
        .map(|o| o.trace_inverse())
        .try_fold(0.0, |acc, t| t.map(|t| acc + t))
    {
        Some(sum_tr_inv) => (noise / (2.0 * p_max) * sum_tr_inv * 1e-3).min(hi * 0.5),
        None => hi * 1e-12,
    };
    if !(lo > 0.0) {
        lo = hi * 1e-12;
    }

    // expand downward until the budget is exceeded on the low side
    let mut expansions = 0;
    while level_lhs(obs, priors, lo, noise) <= p_max {
        hi = lo;
        lo *= 0.125;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::BracketFailure(format!(
                "sum of slot powers never exceeds the budget {p_max} W down to level {lo}"
            )));
        }
    }

    let tol = LEVEL_RESIDUAL_TOL * p_max;
    let mut u = hi;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let s = level_lhs(obs, priors, mid, noise);
        if s.is_finite() && (s - p_max).abs() <= tol {
            u = mid;
            break;
        }
        if s > p_max {
            lo = mid;
        } else {
            hi = mid;
        }
        u = hi;
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }

    let powers: Vec<f64> = obs
        .iter()
        .zip(priors)
        .enumerate()
        .map(|(k, (o, p))| power_from_fims(o, p, u, noise, k))
        .collect::<Result<_>>()?;
    Ok((u, powers))
}

/// Optimal equalized BCRB level and power split for fixed layouts under a
/// total power budget. `layouts` holds one layout per slot, or a single
/// shared layout.
pub fn minmax_level_solve(
    layouts: &[PinchLayout],
    mts: &MultiTargetScenario,
    p_max: f64,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<(f64, Vec<f64>)> {
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power budget must be positive, got {p_max}"
        )));
    }
    let k_count = mts.num_targets();
    if layouts.len() != k_count && layouts.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected 1 or {k_count} layouts, got {}",
            layouts.len()
        )));
    }
    let mut obs = Vec::with_capacity(k_count);
    let mut priors = Vec::with_capacity(k_count);
    for (k, prior) in mts.priors.iter().enumerate() {
        let layout = if layouts.len() == 1 {
            &layouts[0]
        } else {
            &layouts[k]
        };
        obs.push(crate::bcrb::expected_observation_fim(
            layout,
            prior,
            &mts.scenario,
            rule_x,
            rule_y,
        )?);
        priors.push(prior_fim(prior, rule_x)?);
    }
    solve_level_from_fims(&obs, &priors, p_max, mts.scenario.total_noise)
}

// ---------------------------------------------------------------------------
// Protocol solutions
// ---------------------------------------------------------------------------

/// Solution of one protocol/problem instance.
#[derive(Debug, Clone)]
pub struct ProtocolSolution {
    pub protocol: Protocol,
    pub problem: ProblemKind,
    /// Per-slot layouts for PS; a single shared layout for PM.
    pub layouts: Vec<PinchLayout>,
    /// Per-slot transmit powers, watts.
    pub powers: Vec<f64>,
    /// Achieved per-slot BCRBs, m^2.
    pub bcrbs: Vec<f64>,
    /// Total power (power-min, watts) or worst-case BCRB level (min-max, m^2).
    pub objective: f64,
    /// Equalized level `u` for min-max solutions.
    pub level: Option<f64>,
    /// Outer-iteration objective traces: one per slot search (PS power-min),
    /// a single trace (PM searches), or the per-round level sequence
    /// (min-max alternating optimization).
    pub traces: Vec<Vec<f64>>,
    /// Optimized steering phases for fixed-array solutions (radians, one
    /// vector per slot or a single shared vector); empty for PASS solutions.
    pub phases: Vec<Vec<f64>>,
}

struct SlotWork {
    evaluators: Vec<FimEvaluator>,
    prior_fims: Vec<PriorFim>,
}

fn prepare_slots(
    mts: &MultiTargetScenario,
    cfg: &SearchConfig,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<SlotWork> {
    let mut evaluators = Vec::with_capacity(mts.num_targets());
    let mut prior_fims = Vec::with_capacity(mts.num_targets());
    for prior in &mts.priors {
        let mut ev = FimEvaluator::new(prior, &mts.scenario, rule_x, rule_y);
        ev.enable_grid(cfg.step, mts.scenario.waveguide_length);
        evaluators.push(ev);
        prior_fims.push(prior_fim(prior, rule_x)?);
    }
    Ok(SlotWork {
        evaluators,
        prior_fims,
    })
}

fn achieved_bcrb(obs: &ObsFim, prior: &PriorFim, power: f64, noise: f64) -> Result<f64> {
    Bfim::from_parts(obs, prior, power, noise).bcrb()
}

/// Power minimization under pinch switching: each slot's layout is searched
/// independently for the smallest power meeting `gamma_sen`.
pub fn ps_power_min(
    mts: &MultiTargetScenario,
    gamma_sen: f64,
    cfg: &SearchConfig,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<ProtocolSolution> {
    if !(gamma_sen.is_finite() && gamma_sen > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "BCRB threshold must be positive, got {gamma_sen}"
        )));
    }
    let mut work = prepare_slots(mts, cfg, rule_x, rule_y)?;
    let noise = mts.scenario.total_noise;
    let init = uniform_init(&mts.scenario);

    let mut layouts = Vec::new();
    let mut powers = Vec::new();
    let mut bcrbs = Vec::new();
    let mut traces = Vec::new();

    for k in 0..mts.num_targets() {
        let ev = &mut work.evaluators[k];
        let pf = work.prior_fims[k];
        let mut objective = |l: &PinchLayout| -> Result<f64> {
            power_from_fims(&ev.eval(l.positions()), &pf, gamma_sen, noise, k)
        };
        let out = element_wise_minimize(&mut objective, &mts.scenario, &init, cfg)?;
        let obs = work.evaluators[k].eval(out.layout.positions());
        bcrbs.push(achieved_bcrb(&obs, &work.prior_fims[k], out.value, noise)?);
        powers.push(out.value);
        layouts.push(out.layout);
        traces.push(out.trace);
    }

    Ok(ProtocolSolution {
        protocol: Protocol::PinchSwitching,
        problem: ProblemKind::PowerMin,
        objective: powers.iter().sum(),
        layouts,
        powers,
        bcrbs,
        level: None,
        traces,
        phases: Vec::new(),
    })
}

/// Power minimization under pinch multiplexing: one shared layout minimizes
/// the summed per-slot powers.
pub fn pm_power_min(
    mts: &MultiTargetScenario,
    gamma_sen: f64,
    cfg: &SearchConfig,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<ProtocolSolution> {
    if !(gamma_sen.is_finite() && gamma_sen > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "BCRB threshold must be positive, got {gamma_sen}"
        )));
    }
    let mut work = prepare_slots(mts, cfg, rule_x, rule_y)?;
    let noise = mts.scenario.total_noise;
    let init = uniform_init(&mts.scenario);
    let k_count = mts.num_targets();

    let prior_fims = work.prior_fims.clone();
    let evaluators = &mut work.evaluators;
    let mut objective = |l: &PinchLayout| -> Result<f64> {
        let mut total = 0.0;
        for (k, ev) in evaluators.iter_mut().enumerate() {
            total += power_from_fims(&ev.eval(l.positions()), &prior_fims[k], gamma_sen, noise, k)?;
        }
        Ok(total)
    };
    let out = element_wise_minimize(&mut objective, &mts.scenario, &init, cfg)?;

    let mut powers = Vec::with_capacity(k_count);
    let mut bcrbs = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let obs = work.evaluators[k].eval(out.layout.positions());
        let p = power_from_fims(&obs, &work.prior_fims[k], gamma_sen, noise, k)?;
        bcrbs.push(achieved_bcrb(&obs, &work.prior_fims[k], p, noise)?);
        powers.push(p);
    }

    Ok(ProtocolSolution {
        protocol: Protocol::PinchMultiplexing,
        problem: ProblemKind::PowerMin,
        objective: out.value,
        layouts: vec![out.layout],
        powers,
        bcrbs,
        level: None,
        traces: vec![out.trace],
        phases: Vec::new(),
    })
}

/// Upper bound on alternating-optimization rounds for the exact min-max
/// solvers.
const MAX_AO_ROUNDS: usize = 20;

#[allow(clippy::too_many_arguments)]
fn finish_minmax(
    protocol: Protocol,
    layouts: Vec<PinchLayout>,
    work: &mut SlotWork,
    shared: bool,
    powers: Vec<f64>,
    level: f64,
    noise: f64,
    traces: Vec<Vec<f64>>,
) -> Result<ProtocolSolution> {
    let mut bcrbs = Vec::with_capacity(powers.len());
    for (k, &p) in powers.iter().enumerate() {
        let layout = if shared { &layouts[0] } else { &layouts[k] };
        let obs = work.evaluators[k].eval(layout.positions());
        bcrbs.push(achieved_bcrb(&obs, &work.prior_fims[k], p, noise)?);
    }
    Ok(ProtocolSolution {
        protocol,
        problem: ProblemKind::MinMax,
        layouts,
        powers,
        bcrbs,
        objective: level,
        level: Some(level),
        traces,
        phases: Vec::new(),
    })
}

/// Min-max BCRB under pinch switching.
///
/// Exact mode alternates the bisection power solve with one element-wise
/// pass per slot until the level's fractional decrease drops below the
/// search tolerance. High-SNR mode minimizes `tr{J_k^-1}` per slot and
/// allocates power proportionally, skipping the bisection.
pub fn ps_minmax(
    mts: &MultiTargetScenario,
    p_max: f64,
    cfg: &SearchConfig,
    high_snr: bool,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<ProtocolSolution> {
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power budget must be positive, got {p_max}"
        )));
    }
    let mut work = prepare_slots(mts, cfg, rule_x, rule_y)?;
    let noise = mts.scenario.total_noise;
    let k_count = mts.num_targets();
    let init = uniform_init(&mts.scenario);

    if high_snr {
        let mut layouts = Vec::with_capacity(k_count);
        let mut trace_sums = Vec::with_capacity(k_count);
        let mut tr_invs = Vec::with_capacity(k_count);
        for k in 0..k_count {
            let ev = &mut work.evaluators[k];
            let mut objective = |l: &PinchLayout| -> Result<f64> {
                ev.eval(l.positions())
                    .trace_inverse()
                    .ok_or(Error::DegenerateGeometry {
                        slot: k,
                        detail: "observation FIM is singular in high-SNR mode".into(),
                    })
            };
            let out = element_wise_minimize(&mut objective, &mts.scenario, &init, cfg)?;
            tr_invs.push(out.value);
            layouts.push(out.layout);
            trace_sums.push(out.trace);
        }
        let total_tr: f64 = tr_invs.iter().sum();
        let u_hs = noise / (2.0 * p_max) * total_tr;
        let powers: Vec<f64> = tr_invs.iter().map(|t| p_max * t / total_tr).collect();
        return finish_minmax(
            Protocol::PinchSwitching,
            layouts,
            &mut work,
            false,
            powers,
            u_hs,
            noise,
            trace_sums,
        );
    }

    // exact mode: alternating optimization
    let mut layouts: Vec<PinchLayout> = vec![init; k_count];
    let mut obs_now: Vec<ObsFim> = Vec::with_capacity(k_count);
    for (ev, layout) in work.evaluators.iter_mut().zip(&layouts) {
        obs_now.push(ev.eval(layout.positions()));
    }
    let (mut u_star, _) = solve_level_from_fims(&obs_now, &work.prior_fims, p_max, noise)?;
    let mut level_trace = vec![u_star];

    let pass_cfg = SearchConfig {
        max_outer_iters: 1,
        ..cfg.clone()
    };
    for _ in 0..MAX_AO_ROUNDS {
        let prev = u_star;
        for k in 0..k_count {
            let fixed_obs = obs_now.clone();
            let prior_fims = work.prior_fims.clone();
            let ev = &mut work.evaluators[k];
            let mut objective = |l: &PinchLayout| -> Result<f64> {
                let mut obs = fixed_obs.clone();
                obs[k] = ev.eval(l.positions());
                let (u, _) = solve_level_from_fims(&obs, &prior_fims, p_max, noise)?;
                Ok(u)
            };
            let out = element_wise_minimize(&mut objective, &mts.scenario, &layouts[k], &pass_cfg)?;
            obs_now[k] = work.evaluators[k].eval(out.layout.positions());
            layouts[k] = out.layout;
            u_star = out.value;
        }
        level_trace.push(u_star);
        if (prev - u_star) / prev.abs().max(f64::MIN_POSITIVE) < cfg.convergence_tol {
            break;
        }
    }

    let (u_star, powers) = solve_level_from_fims(&obs_now, &work.prior_fims, p_max, noise)?;
    finish_minmax(
        Protocol::PinchSwitching,
        layouts,
        &mut work,
        false,
        powers,
        u_star,
        noise,
        vec![level_trace],
    )
}

/// Min-max BCRB under pinch multiplexing (one shared layout).
pub fn pm_minmax(
    mts: &MultiTargetScenario,
    p_max: f64,
    cfg: &SearchConfig,
    high_snr: bool,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<ProtocolSolution> {
    if !(p_max.is_finite() && p_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power budget must be positive, got {p_max}"
        )));
    }
    let mut work = prepare_slots(mts, cfg, rule_x, rule_y)?;
    let noise = mts.scenario.total_noise;
    let k_count = mts.num_targets();
    let init = uniform_init(&mts.scenario);

    if high_snr {
        let evaluators = &mut work.evaluators;
        let mut objective = |l: &PinchLayout| -> Result<f64> {
            let mut total = 0.0;
            for (k, ev) in evaluators.iter_mut().enumerate() {
                total += ev
                    .eval(l.positions())
                    .trace_inverse()
                    .ok_or(Error::DegenerateGeometry {
                        slot: k,
                        detail: "observation FIM is singular in high-SNR mode".into(),
                    })?;
            }
            Ok(total)
        };
        let out = element_wise_minimize(&mut objective, &mts.scenario, &init, cfg)?;
        let total_tr = out.value;
        let mut tr_invs = Vec::with_capacity(k_count);
        for k in 0..k_count {
            let tr = work.evaluators[k]
                .eval(out.layout.positions())
                .trace_inverse()
                .ok_or(Error::DegenerateGeometry {
                    slot: k,
                    detail: "observation FIM is singular in high-SNR mode".into(),
                })?;
            tr_invs.push(tr);
        }
        let u_hs = noise / (2.0 * p_max) * total_tr;
        let powers: Vec<f64> = tr_invs.iter().map(|t| p_max * t / total_tr).collect();
        return finish_minmax(
            Protocol::PinchMultiplexing,
            vec![out.layout],
            &mut work,
            true,
            powers,
            u_hs,
            noise,
            vec![out.trace],
        );
    }

    let prior_fims = work.prior_fims.clone();
    let evaluators = &mut work.evaluators;
    let mut objective = |l: &PinchLayout| -> Result<f64> {
        let obs: Vec<ObsFim> = evaluators
            .iter_mut()
            .map(|ev| ev.eval(l.positions()))
            .collect();
        let (u, _) = solve_level_from_fims(&obs, &prior_fims, p_max, noise)?;
        Ok(u)
    };
    let ao_cfg = SearchConfig {
        max_outer_iters: MAX_AO_ROUNDS,
        ..cfg.clone()
    };
    let out = element_wise_minimize(&mut objective, &mts.scenario, &init, &ao_cfg)?;

    let obs_final: Vec<ObsFim> = work
        .evaluators
        .iter_mut()
        .map(|ev| ev.eval(out.layout.positions()))
        .collect();
    let (u_star, powers) = solve_level_from_fims(&obs_final, &work.prior_fims, p_max, noise)?;
    finish_minmax(
        Protocol::PinchMultiplexing,
        vec![out.layout],
        &mut work,
        true,
        powers,
        u_star,
        noise,
        vec![out.trace],
    )
}
