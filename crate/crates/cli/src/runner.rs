//! Experiment orchestration: single runs, baselines, parameter sweeps, and
//! the quadrature self-test.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use pass_sensing::baselines::{centered_layout, fpa_bcd, uniform_layout, FpaObjective};
use pass_sensing::bcrb::{bcrb, expected_observation_fim, prior_fim, Bfim};
use pass_sensing::optimizer::{element_wise_minimize, uniform_init};
use pass_sensing::protocols::{
    minmax_level_solve, pm_minmax, pm_power_min, power_for_threshold, ps_minmax, ps_power_min,
    ProblemKind, Protocol, ProtocolSolution,
};
use pass_sensing::quadrature::gauss_hermite;
use pass_sensing::scenario::{dbm_to_watts, PinchLayout};

use crate::config::{ExperimentConfig, ProblemChoice, ProtocolChoice};
use crate::record::{sha256_hex, RunRecord, RunResult};
use crate::sampler::RNG_ID;

fn protocol_of(choice: ProtocolChoice) -> Protocol {
    match choice {
        ProtocolChoice::Ps => Protocol::PinchSwitching,
        ProtocolChoice::Pm => Protocol::PinchMultiplexing,
    }
}

fn finish_record(
    config: &ExperimentConfig,
    solution: &ProtocolSolution,
    method: &str,
    started: Instant,
) -> RunRecord {
    RunRecord {
        config_hash: sha256_hex(&config.canonical_json()),
        seed: config.seed(),
        rng: RNG_ID.to_string(),
        result: RunResult::from_solution(solution, method, config.output.trace),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Solves the configured protocol/problem with optimized PA placement.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let started = Instant::now();
    let mts = config.build_targets()?;
    let rule = config.build_rule()?;
    let search = config.build_search();

    let solution = match config.solver.problem {
        ProblemChoice::PowerMin => {
            let gamma = config.solver.gamma_sen_m2.expect("validated");
            match config.solver.protocol {
                ProtocolChoice::Ps => ps_power_min(&mts, gamma, &search, &rule, &rule),
                ProtocolChoice::Pm => pm_power_min(&mts, gamma, &search, &rule, &rule),
            }
        }
        ProblemChoice::MinMax => {
            let p_max = config.pmax_watts().expect("validated");
            let hs = config.solver.high_snr;
            match config.solver.protocol {
                ProtocolChoice::Ps => ps_minmax(&mts, p_max, &search, hs, &rule, &rule),
                ProtocolChoice::Pm => pm_minmax(&mts, p_max, &search, hs, &rule, &rule),
            }
        }
    }
    .map_err(anyhow::Error::new)?;

    Ok(finish_record(config, &solution, "pass", started))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Uniform,
    Centered,
    FpaBcd,
}

impl BaselineMethod {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "uniform" => Ok(BaselineMethod::Uniform),
            "centered" => Ok(BaselineMethod::Centered),
            "fpa" | "fpa-bcd" => Ok(BaselineMethod::FpaBcd),
            other => bail!("unknown baseline method `{other}` (expected uniform|centered|fpa)"),
        }
    }

    fn label(self) -> &'static str {
        match self {
            BaselineMethod::Uniform => "uniform",
            BaselineMethod::Centered => "centered",
            BaselineMethod::FpaBcd => "fpa-bcd",
        }
    }
}

/// Center of the service region along the waveguide axis; the FPA benchmark
/// sits here rather than at the target centroid.
fn region_center_x(config: &ExperimentConfig) -> f64 {
    match &config.prior.sampler {
        Some(s) => 0.5 * (s.x_range[0] + s.x_range[1]),
        None => config.scenario.waveguide_length_m / 2.0,
    }
}

/// Fixed-layout solution (uniform or centered benchmarks): powers decouple
/// per slot for power-min; min-max reduces to the level solve.
fn solve_fixed_layout(
    config: &ExperimentConfig,
    layout: PinchLayout,
) -> Result<ProtocolSolution> {
    let mts = config.build_targets()?;
    let rule = config.build_rule()?;
    let noise = mts.scenario.total_noise;
    let protocol = protocol_of(config.solver.protocol);

    match config.solver.problem {
        ProblemChoice::PowerMin => {
            let gamma = config.solver.gamma_sen_m2.expect("validated");
            let mut powers = Vec::new();
            let mut bcrbs = Vec::new();
            for (k, prior) in mts.priors.iter().enumerate() {
                let p = power_for_threshold(&layout, prior, gamma, &mts.scenario, &rule, &rule)
                    .map_err(|e| match e {
                        pass_sensing::Error::Infeasible {
                            threshold, floor, ..
                        } => pass_sensing::Error::Infeasible {
                            slot: k,
                            threshold,
                            floor,
                        },
                        other => other,
                    })
                    .map_err(anyhow::Error::new)?;
                let obs = expected_observation_fim(&layout, prior, &mts.scenario, &rule, &rule)
                    .map_err(anyhow::Error::new)?;
                let pf = prior_fim(prior, &rule).map_err(anyhow::Error::new)?;
                bcrbs.push(
                    Bfim::from_parts(&obs, &pf, p, noise)
                        .bcrb()
                        .map_err(anyhow::Error::new)?,
                );
                powers.push(p);
            }
            Ok(ProtocolSolution {
                protocol,
                problem: ProblemKind::PowerMin,
                layouts: vec![layout],
                objective: powers.iter().sum(),
                powers,
                bcrbs,
                level: None,
                traces: Vec::new(),
                phases: Vec::new(),
            })
        }
        ProblemChoice::MinMax => {
            let p_max = config.pmax_watts().expect("validated");
            let (u, powers) =
                minmax_level_solve(std::slice::from_ref(&layout), &mts, p_max, &rule, &rule)
                    .map_err(anyhow::Error::new)?;
            let mut bcrbs = Vec::new();
            for (k, prior) in mts.priors.iter().enumerate() {
                let obs = expected_observation_fim(&layout, prior, &mts.scenario, &rule, &rule)
                    .map_err(anyhow::Error::new)?;
                let pf = prior_fim(prior, &rule).map_err(anyhow::Error::new)?;
                bcrbs.push(
                    Bfim::from_parts(&obs, &pf, powers[k], noise)
                        .bcrb()
                        .map_err(anyhow::Error::new)?,
                );
            }
            Ok(ProtocolSolution {
                protocol,
                problem: ProblemKind::MinMax,
                layouts: vec![layout],
                powers,
                bcrbs,
                objective: u,
                level: Some(u),
                traces: Vec::new(),
                phases: Vec::new(),
            })
        }
    }
}

/// Runs one of the benchmark placements on the configured problem.
pub fn run_baseline(
    config: &ExperimentConfig,
    method: BaselineMethod,
    phase_grid: usize,
) -> Result<RunRecord> {
    config.validate()?;
    let started = Instant::now();
    let solution = match method {
        BaselineMethod::Uniform => {
            let scenario = config.build_scenario()?;
            solve_fixed_layout(config, uniform_layout(&scenario))?
        }
        BaselineMethod::Centered => {
            let mts = config.build_targets()?;
            solve_fixed_layout(config, centered_layout(&mts))?
        }
        BaselineMethod::FpaBcd => {
            let mts = config.build_targets()?;
            let rule = config.build_rule()?;
            let objective = match config.solver.problem {
                ProblemChoice::PowerMin => FpaObjective::PowerMin {
                    gamma_sen: config.solver.gamma_sen_m2.expect("validated"),
                },
                ProblemChoice::MinMax => FpaObjective::MinMax {
                    p_max: config.pmax_watts().expect("validated"),
                },
            };
            fpa_bcd(
                &mts,
                region_center_x(config),
                objective,
                protocol_of(config.solver.protocol),
                phase_grid,
                &rule,
                &rule,
            )
            .map_err(anyhow::Error::new)?
        }
    };
    Ok(finish_record(config, &solution, method.label(), started))
}

/// Per-target BCRB of a fixed layout at a fixed per-slot power.
pub struct BcrbEvalRow {
    pub target: usize,
    pub power_w: f64,
    pub bcrb_m2: f64,
}

pub fn eval_bcrb(config: &ExperimentConfig, layout: Option<Vec<f64>>) -> Result<Vec<BcrbEvalRow>> {
    let mts = config.build_targets()?;
    let rule = config.build_rule()?;
    let layout = match layout {
        Some(xs) => PinchLayout::new(xs),
        None => uniform_layout(&mts.scenario),
    };
    let power = config
        .pmax_watts()
        .unwrap_or_else(|| dbm_to_watts(10.0));
    let mut rows = Vec::new();
    for (k, prior) in mts.priors.iter().enumerate() {
        let (_, value) = bcrb(&layout, prior, power, &mts.scenario, &rule, &rule)
            .map_err(anyhow::Error::new)?;
        rows.push(BcrbEvalRow {
            target: k,
            power_w: power,
            bcrb_m2: value,
        });
    }
    Ok(rows)
}

/// Element-wise BCRB minimization for a single target at the configured
/// budget (the single-target problem the protocols build on).
pub fn optimize_single(config: &ExperimentConfig, target: usize) -> Result<RunRecord> {
    let started = Instant::now();
    let mts = config.build_targets()?;
    if target >= mts.num_targets() {
        bail!(
            "target index {target} out of range (have {})",
            mts.num_targets()
        );
    }
    let rule = config.build_rule()?;
    let search = config.build_search();
    let power = config
        .pmax_watts()
        .unwrap_or_else(|| dbm_to_watts(10.0));
    let prior = &mts.priors[target];
    let scenario = &mts.scenario;

    let mut objective = |l: &PinchLayout| bcrb(l, prior, power, scenario, &rule, &rule).map(|r| r.1);
    let out = element_wise_minimize(&mut objective, scenario, &uniform_init(scenario), &search)
        .map_err(anyhow::Error::new)?;

    let solution = ProtocolSolution {
        protocol: protocol_of(config.solver.protocol),
        problem: ProblemKind::MinMax,
        layouts: vec![out.layout],
        powers: vec![power],
        bcrbs: vec![out.value],
        objective: out.value,
        level: Some(out.value),
        traces: vec![out.trace],
        phases: Vec::new(),
    };
    Ok(finish_record(config, &solution, "pass", started))
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    GammaSen,
    PmaxDbm,
    NumPas,
    XMax,
    NumTargets,
    Step,
}

impl SweepParam {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "gamma-sen" => SweepParam::GammaSen,
            "pmax-dbm" => SweepParam::PmaxDbm,
            "num-pas" => SweepParam::NumPas,
            "x-max" => SweepParam::XMax,
            "num-targets" => SweepParam::NumTargets,
            "step" => SweepParam::Step,
            other => bail!(
                "unknown sweep parameter `{other}` \
                 (expected gamma-sen|pmax-dbm|num-pas|x-max|num-targets|step)"
            ),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::GammaSen => "gamma-sen",
            SweepParam::PmaxDbm => "pmax-dbm",
            SweepParam::NumPas => "num-pas",
            SweepParam::XMax => "x-max",
            SweepParam::NumTargets => "num-targets",
            SweepParam::Step => "step",
        }
    }

    fn apply(self, config: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = config.clone();
        match self {
            SweepParam::GammaSen => cfg.solver.gamma_sen_m2 = Some(value),
            SweepParam::PmaxDbm => cfg.solver.pmax_dbm = Some(value),
            SweepParam::NumPas => {
                if value.fract() != 0.0 || value < 1.0 {
                    bail!("num-pas sweep values must be positive integers, got {value}");
                }
                cfg.scenario.num_pas = value as usize;
            }
            SweepParam::XMax => cfg.scenario.waveguide_length_m = value,
            SweepParam::NumTargets => {
                if value.fract() != 0.0 || value < 1.0 {
                    bail!("num-targets sweep values must be positive integers, got {value}");
                }
                match cfg.prior.sampler.as_mut() {
                    Some(s) => s.num_targets = value as usize,
                    None => bail!("num-targets sweeps require a sampler prior block"),
                }
            }
            SweepParam::Step => cfg.solver.step_m = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One sweep point: the swept value, the trial index, and the run.
pub struct SweepPoint {
    pub value: f64,
    pub trial: usize,
    pub record: RunRecord,
}

/// Mean and standard error of the objective over the trials at one value.
pub struct SweepSummary {
    pub value: f64,
    pub trials: usize,
    pub objective_mean: f64,
    pub objective_stderr: f64,
}

/// Runs the configured solver at each sweep value, holding everything else
/// (including the seed) fixed. `trials > 1` replicates each point with
/// seeds `seed, seed + 1, ...` for mean/stderr reporting. Points run on a
/// worker pool sized by `threads` (0 = one worker per CPU); each point is
/// internally deterministic, so the emitted sequence does not depend on the
/// thread count.
pub fn sweep(
    config: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    trials: usize,
    threads: usize,
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    let trials = trials.max(1);

    // sorted ascending by sweep value, trials within a value
    let mut ordered: Vec<f64> = values.to_vec();
    ordered.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut jobs = Vec::new();
    for &v in &ordered {
        for t in 0..trials {
            let mut cfg = param.apply(config, v)?;
            if let Some(s) = cfg.prior.sampler.as_mut() {
                s.seed = s.seed.wrapping_add(t as u64);
            }
            jobs.push((v, t, cfg));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("failed to build worker pool")?;
    let records: Result<Vec<RunRecord>> =
        pool.install(|| jobs.par_iter().map(|(_, _, cfg)| run(cfg)).collect());
    let records = records?;

    Ok(jobs
        .into_iter()
        .zip(records)
        .map(|((value, trial, _), record)| SweepPoint {
            value,
            trial,
            record,
        })
        .collect())
}

pub fn summarize(points: &[SweepPoint]) -> Vec<SweepSummary> {
    let mut out: Vec<SweepSummary> = Vec::new();
    for p in points {
        match out.last_mut() {
            Some(s) if s.value == p.value => {
                s.trials += 1;
                s.objective_mean += p.record.result.objective;
            }
            _ => out.push(SweepSummary {
                value: p.value,
                trials: 1,
                objective_mean: p.record.result.objective,
                objective_stderr: 0.0,
            }),
        }
    }
    for s in &mut out {
        s.objective_mean /= s.trials as f64;
    }
    for s in &mut out {
        if s.trials > 1 {
            let var: f64 = points
                .iter()
                .filter(|p| p.value == s.value)
                .map(|p| (p.record.result.objective - s.objective_mean).powi(2))
                .sum::<f64>()
                / (s.trials as f64 - 1.0);
            s.objective_stderr = (var / s.trials as f64).sqrt();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Quadrature self-test
// ---------------------------------------------------------------------------

pub struct SelftestLine {
    pub order: usize,
    pub max_moment_rel_err: f64,
    pub ok: bool,
}

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn analytic_even_moment(k: usize) -> f64 {
    let mut m = SQRT_PI;
    let mut j = 1;
    while j < k {
        m *= j as f64 / 2.0;
        j += 2;
    }
    m
}

/// Validates the Gauss-Hermite rules: closed forms for orders 1-3 to 1e-10,
/// weight sums, exact node symmetry, and all moments up to degree `2I - 1`
/// to 1e-9 relative. Orders above ~60 would overflow the plain-f64 moment
/// comparison, hence the cap.
pub fn gh_selftest(max_order: usize) -> Result<Vec<SelftestLine>> {
    let max_order = max_order.clamp(3, 60);
    let mut lines = Vec::new();
    for order in 1..=max_order {
        let rule = gauss_hermite(order).map_err(anyhow::Error::new)?;
        let mut ok = true;
        let mut max_err = 0.0f64;

        // closed forms for the small orders
        let closed: Option<(Vec<f64>, Vec<f64>)> = match order {
            1 => Some((vec![0.0], vec![SQRT_PI])),
            2 => {
                let n = 1.0 / std::f64::consts::SQRT_2;
                Some((vec![-n, n], vec![SQRT_PI / 2.0, SQRT_PI / 2.0]))
            }
            3 => {
                let n = (1.5f64).sqrt();
                Some((
                    vec![-n, 0.0, n],
                    vec![SQRT_PI / 6.0, 2.0 * SQRT_PI / 3.0, SQRT_PI / 6.0],
                ))
            }
            _ => None,
        };
        if let Some((nodes, weights)) = closed {
            for (got, want) in rule
                .nodes()
                .iter()
                .chain(rule.weights())
                .zip(nodes.iter().chain(&weights))
            {
                if (got - want).abs() > 1e-10 * want.abs().max(1.0) {
                    ok = false;
                }
            }
        }

        for i in 0..order / 2 {
            let j = order - 1 - i;
            if rule.nodes()[i] != -rule.nodes()[j] || rule.weights()[i] != rule.weights()[j] {
                ok = false;
            }
        }

        for k in 0..2 * order {
            let got = rule.integrate(|b| b.powi(k as i32));
            let rel = if k % 2 == 1 {
                let scale = rule.integrate(|b| b.abs().powi(k as i32));
                got.abs() / scale
            } else {
                let want = analytic_even_moment(k);
                (got - want).abs() / want
            };
            max_err = max_err.max(rel);
            if rel > 1e-9 {
                ok = false;
            }
        }

        lines.push(SelftestLine {
            order,
            max_moment_rel_err: max_err,
            ok,
        });
    }
    Ok(lines)
}
