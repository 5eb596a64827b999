//! Benchmark placements: uniform and centered PASS layouts, and a
//! fixed-position array (FPA) with block-coordinate-descent phase tuning.
//!
//! The FPA keeps the PASS signal model but replaces the in-waveguide phases
//! with unit-modulus steering weights `e^{j theta_m}` on half-wavelength
//! spaced elements at the center of the service area; only the phases are
//! optimized.

use num_complex::Complex64;

use crate::bcrb::{prior_fim, Bfim, FimEvaluator, ObsFim, PriorFim};
use crate::error::{Error, Result};
use crate::optimizer::uniform_init;
use crate::protocols::{
    power_from_fims, solve_level_from_fims, MultiTargetScenario, ProblemKind, Protocol,
    ProtocolSolution,
};
use crate::quadrature::GhRule;
use crate::scenario::{PinchLayout, Scenario};

/// Fixed-position array: element coordinates and current steering phases.
#[derive(Debug, Clone)]
pub struct FpaConfig {
    /// Element x-coordinates, meters (half-wavelength spaced, fixed).
    pub element_positions: Vec<f64>,
    /// Steering phases, radians.
    pub phases: Vec<f64>,
}

impl FpaConfig {
    /// `M` half-wavelength spaced elements centered at `center_x`, phases
    /// initialized to zero.
    pub fn centered_at(center_x: f64, scenario: &Scenario) -> Self {
        let m = scenario.num_pas;
        let spacing = scenario.wavelength / 2.0;
        let offset = (m - 1) as f64 / 2.0;
        FpaConfig {
            element_positions: (0..m)
                .map(|i| center_x + (i as f64 - offset) * spacing)
                .collect(),
            phases: vec![0.0; m],
        }
    }

    /// Unit-modulus weights `e^{j theta_m}`.
    pub fn weights(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect()
    }
}

/// Evenly spaced PAs occupying the whole waveguide (interval
/// `x_max / (M - 1)`); a single PA sits at the midpoint.
pub fn uniform_layout(scenario: &Scenario) -> PinchLayout {
    uniform_init(scenario)
}

/// Half-wavelength packed subarray whose midpoint aligns with the centroid
/// of the targets' prior x-means (targets weighted uniformly, components by
/// their mixture weights), shifted into `[0, x_max]` if necessary.
pub fn centered_layout(mts: &MultiTargetScenario) -> PinchLayout {
    let sc = &mts.scenario;
    let m = sc.num_pas;
    let centroid =
        mts.priors.iter().map(|p| p.x.mean()).sum::<f64>() / mts.num_targets() as f64;
    let spacing = sc.wavelength / 2.0;
    let span = (m - 1) as f64 * spacing;
    // leftmost element, projected so the subarray fits on the waveguide
    let base = (centroid - span / 2.0)
        .max(0.0)
        .min((sc.waveguide_length - span).max(0.0));
    // cumulative construction, bumping by ulps where rounding would leave a
    // gap fractionally below the spacing (min_spacing defaults to exactly
    // half a wavelength, so equality must hold in f64 comparisons)
    let mut xs = Vec::with_capacity(m);
    xs.push(base);
    for i in 1..m {
        let mut x = xs[i - 1] + spacing;
        while x - xs[i - 1] < spacing {
            x = x.next_up();
        }
        xs.push(x);
    }
    PinchLayout::new(xs)
}

/// Objective for the FPA benchmark.
#[derive(Debug, Clone, Copy)]
pub enum FpaObjective {
    /// Total power minimization under a BCRB threshold (m^2).
    PowerMin { gamma_sen: f64 },
    /// Min-max BCRB under a total power budget (watts).
    MinMax { p_max: f64 },
}

/// Fractional-decrease stopping tolerance of the BCD loop.
const BCD_TOL: f64 = 1e-4;
const MAX_BCD_ITERS: usize = 50;

/// One cycle of coordinate descent over the phases: scans each `theta_m`
/// over a uniform grid on `[0, 2 pi)` and keeps the argmin (ties resolve to
/// the smallest phase).
fn bcd_pass(
    objective: &mut dyn FnMut(&[f64]) -> Result<f64>,
    phases: &mut [f64],
    phase_grid: usize,
    mut best: f64,
) -> Result<f64> {
    let step = 2.0 * std::f64::consts::PI / phase_grid as f64;
    for m in 0..phases.len() {
        let mut best_phase = phases[m];
        for j in 0..phase_grid {
            let theta = j as f64 * step;
            let old = phases[m];
            phases[m] = theta;
            let v = objective(phases)?;
            phases[m] = old;
            if !v.is_finite() {
                return Err(Error::NumericalDomain(format!(
                    "FPA objective returned {v} at phases {phases:?}"
                )));
            }
            if v < best {
                best = v;
                best_phase = theta;
            }
        }
        phases[m] = best_phase;
    }
    Ok(best)
}

fn bcd_minimize(
    objective: &mut dyn FnMut(&[f64]) -> Result<f64>,
    phases: &mut [f64],
    phase_grid: usize,
) -> Result<Vec<f64>> {
    let mut best = objective(phases)?;
    let mut trace = vec![best];
    for _ in 0..MAX_BCD_ITERS {
        let prev = best;
        best = bcd_pass(objective, phases, phase_grid, best)?;
        trace.push(best);
        if (prev - best) / prev.abs().max(f64::MIN_POSITIVE) < BCD_TOL {
            break;
        }
    }
    Ok(trace)
}

/// FPA benchmark solver: same objectives and protocols as the PASS solvers,
/// with the element positions frozen and the steering phases tuned by BCD.
/// `center_x` locates the array (normally the center of the service area).
pub fn fpa_bcd(
    mts: &MultiTargetScenario,
    center_x: f64,
    objective: FpaObjective,
    protocol: Protocol,
    phase_grid: usize,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<ProtocolSolution> {
    if phase_grid < 8 {
        return Err(Error::InvalidArgument(format!(
            "phase grid must have at least 8 points, got {phase_grid}"
        )));
    }
    match objective {
        FpaObjective::PowerMin { gamma_sen } if !(gamma_sen > 0.0) => {
            return Err(Error::InvalidArgument(format!(
                "BCRB threshold must be positive, got {gamma_sen}"
            )));
        }
        FpaObjective::MinMax { p_max } if !(p_max > 0.0) => {
            return Err(Error::InvalidArgument(format!(
                "power budget must be positive, got {p_max}"
            )));
        }
        _ => {}
    }

    let sc = &mts.scenario;
    let noise = sc.total_noise;
    let k_count = mts.num_targets();
    let fpa = FpaConfig::centered_at(center_x, sc);
    let positions = fpa.element_positions.clone();

    let mut evaluators: Vec<FimEvaluator> = Vec::with_capacity(k_count);
    let mut prior_fims: Vec<PriorFim> = Vec::with_capacity(k_count);
    for prior in &mts.priors {
        evaluators.push(FimEvaluator::new(prior, sc, rule_x, rule_y));
        prior_fims.push(prior_fim(prior, rule_x)?);
    }

    let weights_of = |phases: &[f64]| -> Vec<Complex64> {
        phases
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect()
    };

    let per_slot = protocol == Protocol::PinchSwitching;
    let mut phase_sets: Vec<Vec<f64>> = vec![vec![0.0; sc.num_pas]; if per_slot { k_count } else { 1 }];
    let mut traces = Vec::new();

    match objective {
        FpaObjective::PowerMin { gamma_sen } => {
            if per_slot {
                for k in 0..k_count {
                    let ev = &mut evaluators[k];
                    let pf = prior_fims[k];
                    let mut obj = |phases: &[f64]| -> Result<f64> {
                        let obs = ev.eval_with(&positions, &weights_of(phases));
                        power_from_fims(&obs, &pf, gamma_sen, noise, k)
                    };
                    let trace = bcd_minimize(&mut obj, &mut phase_sets[k], phase_grid)?;
                    traces.push(trace);
                }
            } else {
                let evs = &mut evaluators;
                let pfs = &prior_fims;
                let mut obj = |phases: &[f64]| -> Result<f64> {
                    let w = weights_of(phases);
                    let mut total = 0.0;
                    for (k, ev) in evs.iter_mut().enumerate() {
                        total +=
                            power_from_fims(&ev.eval_with(&positions, &w), &pfs[k], gamma_sen, noise, k)?;
                    }
                    Ok(total)
                };
                let trace = bcd_minimize(&mut obj, &mut phase_sets[0], phase_grid)?;
                traces.push(trace);
            }

            let mut powers = Vec::with_capacity(k_count);
            let mut bcrbs = Vec::with_capacity(k_count);
            for k in 0..k_count {
                let phases = if per_slot { &phase_sets[k] } else { &phase_sets[0] };
                let obs = evaluators[k].eval_with(&positions, &weights_of(phases));
                let p = power_from_fims(&obs, &prior_fims[k], gamma_sen, noise, k)?;
                bcrbs.push(Bfim::from_parts(&obs, &prior_fims[k], p, noise).bcrb()?);
                powers.push(p);
            }
            let layout = PinchLayout::new(positions);
            Ok(ProtocolSolution {
                protocol,
                problem: ProblemKind::PowerMin,
                layouts: vec![layout; phase_sets.len()],
                objective: powers.iter().sum(),
                powers,
                bcrbs,
                level: None,
                traces,
                phases: phase_sets,
            })
        }
        FpaObjective::MinMax { p_max } => {
            if per_slot {
                // alternating optimization over per-slot phases, level
                // re-solved inside the objective
                let mut obs_now: Vec<ObsFim> = (0..k_count)
                    .map(|k| evaluators[k].eval_with(&positions, &weights_of(&phase_sets[k])))
                    .collect();
                let (mut u_star, _) = solve_level_from_fims(&obs_now, &prior_fims, p_max, noise)?;
                let mut level_trace = vec![u_star];
                for _ in 0..MAX_BCD_ITERS {
                    let prev = u_star;
                    for k in 0..k_count {
                        let fixed = obs_now.clone();
                        let ev = &mut evaluators[k];
                        let pfs = &prior_fims;
                        let mut obj = |phases: &[f64]| -> Result<f64> {
                            let mut obs = fixed.clone();
                            obs[k] = ev.eval_with(&positions, &weights_of(phases));
                            solve_level_from_fims(&obs, pfs, p_max, noise).map(|(u, _)| u)
                        };
                        u_star = bcd_pass(&mut obj, &mut phase_sets[k], phase_grid, u_star)?;
                        obs_now[k] =
                            evaluators[k].eval_with(&positions, &weights_of(&phase_sets[k]));
                    }
                    level_trace.push(u_star);
                    if (prev - u_star) / prev.abs().max(f64::MIN_POSITIVE) < BCD_TOL {
                        break;
                    }
                }
                traces.push(level_trace);
            } else {
                let evs = &mut evaluators;
                let pfs = &prior_fims;
                let mut obj = |phases: &[f64]| -> Result<f64> {
                    let w = weights_of(phases);
                    let obs: Vec<ObsFim> =
                        evs.iter_mut().map(|ev| ev.eval_with(&positions, &w)).collect();
                    solve_level_from_fims(&obs, pfs, p_max, noise).map(|(u, _)| u)
                };
                let trace = bcd_minimize(&mut obj, &mut phase_sets[0], phase_grid)?;
                traces.push(trace);
            }

            let obs_final: Vec<ObsFim> = (0..k_count)
                .map(|k| {
                    let phases = if per_slot { &phase_sets[k] } else { &phase_sets[0] };
                    evaluators[k].eval_with(&positions, &weights_of(phases))
                })
                .collect();
            let (u_star, powers) = solve_level_from_fims(&obs_final, &prior_fims, p_max, noise)?;
            let mut bcrbs = Vec::with_capacity(k_count);
            for k in 0..k_count {
                bcrbs.push(Bfim::from_parts(&obs_final[k], &prior_fims[k], powers[k], noise).bcrb()?);
            }
            let layout = PinchLayout::new(positions);
            Ok(ProtocolSolution {
                protocol,
                problem: ProblemKind::MinMax,
                layouts: vec![layout; phase_sets.len()],
                powers,
                bcrbs,
                objective: u_star,
                level: Some(u_star),
                traces,
                phases: phase_sets,
            })
        }
    }
}
