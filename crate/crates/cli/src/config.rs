//! Experiment configuration: JSON schema, defaults, validation, and
//! conversion into the library's domain types.
//!
//! Powers enter in dBm and are converted to watts at this boundary; all
//! other quantities are SI already.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use pass_sensing::protocols::MultiTargetScenario;
use pass_sensing::quadrature::{gauss_hermite, GhRule};
use pass_sensing::scenario::{
    dbm_to_watts, GaussianComponent, Gmm1d, Scenario, ScenarioConfig, TargetPrior,
};
use pass_sensing::SearchConfig;

use crate::sampler::sample_priors;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub carrier_frequency_hz: f64,
    pub effective_index: f64,
    pub waveguide_length_m: f64,
    pub waveguide_height_m: f64,
    pub num_pas: usize,
    /// `null` selects half a carrier wavelength.
    pub min_spacing_m: Option<f64>,
    /// Per-antenna noise power in dBm.
    pub noise_dbm: f64,
}

impl Default for ScenarioBlock {
    fn default() -> Self {
        ScenarioBlock {
            carrier_frequency_hz: 28e9,
            effective_index: 1.4,
            waveguide_length_m: 10.0,
            waveguide_height_m: 3.0,
            num_pas: 5,
            min_spacing_m: None,
            noise_dbm: -90.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean_m: f64,
    pub variance_m2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub x: Vec<ComponentSpec>,
    pub y: Vec<ComponentSpec>,
}

/// Region and spread from which single-Gaussian priors are drawn.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplerBlock {
    pub num_targets: usize,
    /// x-range of the service region, meters.
    pub x_range: [f64; 2],
    /// y-range of the service region, meters.
    pub y_range: [f64; 2],
    /// Per-axis variance range, m^2.
    pub variance_range: [f64; 2],
    pub seed: u64,
}

impl SamplerBlock {
    /// Service region matched to a waveguide of length `x_max`.
    pub fn for_waveguide(x_max: f64) -> Self {
        SamplerBlock {
            num_targets: 5,
            x_range: [-5.0, x_max + 5.0],
            y_range: [-15.0, 15.0],
            variance_range: [0.01, 0.5],
            seed: 42,
        }
    }
}

/// Exactly one of `targets` (explicit mixtures) or `sampler` must be set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct PriorBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<PriorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerBlock>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolChoice {
    Ps,
    Pm,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemChoice {
    PowerMin,
    MinMax,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub protocol: ProtocolChoice,
    pub problem: ProblemChoice,
    /// BCRB threshold for power minimization, m^2.
    pub gamma_sen_m2: Option<f64>,
    /// Total power budget for min-max, dBm.
    pub pmax_dbm: Option<f64>,
    pub high_snr: bool,
    /// Search grid step, meters.
    pub step_m: f64,
    pub convergence_tol: f64,
    pub max_outer_iters: usize,
    /// Gauss-Hermite order per axis.
    pub gh_order: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            protocol: ProtocolChoice::Ps,
            problem: ProblemChoice::MinMax,
            gamma_sen_m2: Some(0.02),
            pmax_dbm: Some(10.0),
            high_snr: false,
            step_m: 0.1,
            convergence_tol: 1e-4,
            max_outer_iters: 50,
            gh_order: 150,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Include per-iteration traces in emitted records.
    pub trace: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            format: OutputFormat::Csv,
            path: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioBlock,
    #[serde(default)]
    pub prior: PriorBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let scenario = ScenarioBlock::default();
        let sampler = SamplerBlock::for_waveguide(scenario.waveguide_length_m);
        ExperimentConfig {
            scenario,
            prior: PriorBlock {
                targets: None,
                sampler: Some(sampler),
            },
            solver: SolverBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("failed to parse experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        match (&self.prior.targets, &self.prior.sampler) {
            (Some(_), Some(_)) => {
                bail!("prior block must set exactly one of `targets` or `sampler`, not both")
            }
            (None, None) => bail!("prior block must set one of `targets` or `sampler`"),
            (Some(t), None) if t.is_empty() => bail!("`targets` must not be empty"),
            _ => {}
        }
        if let Some(s) = &self.prior.sampler {
            if s.num_targets == 0 {
                bail!("sampler must draw at least one target");
            }
            if s.x_range[0] > s.x_range[1]
                || s.y_range[0] > s.y_range[1]
                || s.variance_range[0] > s.variance_range[1]
            {
                bail!("sampler ranges must be ordered low..high");
            }
            if s.variance_range[0] <= 0.0 {
                bail!("sampled variances must be positive");
            }
        }
        match self.solver.problem {
            ProblemChoice::PowerMin => {
                let g = self
                    .solver
                    .gamma_sen_m2
                    .ok_or_else(|| anyhow::anyhow!("power-min requires `gamma_sen_m2`"))?;
                if !(g > 0.0) {
                    bail!("`gamma_sen_m2` must be positive, got {g}");
                }
            }
            ProblemChoice::MinMax => {
                if self.solver.pmax_dbm.is_none() {
                    bail!("min-max requires `pmax_dbm`");
                }
            }
        }
        if !(self.solver.step_m > 0.0) {
            bail!("`step_m` must be positive");
        }
        if self.solver.gh_order == 0 || self.solver.gh_order > 200 {
            bail!("`gh_order` must be in 1..=200");
        }
        Ok(())
    }

    /// Canonical JSON used for hashing and determinism checks.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn build_scenario(&self) -> anyhow::Result<Scenario> {
        let b = &self.scenario;
        Scenario::new(ScenarioConfig {
            carrier_frequency_hz: b.carrier_frequency_hz,
            effective_index: b.effective_index,
            waveguide_length_m: b.waveguide_length_m,
            waveguide_height_m: b.waveguide_height_m,
            num_pas: b.num_pas,
            min_spacing_m: b.min_spacing_m,
            per_antenna_noise_w: dbm_to_watts(b.noise_dbm),
        })
        .map_err(|e| anyhow::anyhow!("invalid scenario: {e}"))
    }

    /// Effective seed of this config: the sampler seed, or zero for
    /// explicit priors.
    pub fn seed(&self) -> u64 {
        self.prior.sampler.as_ref().map_or(0, |s| s.seed)
    }

    pub fn build_targets(&self) -> anyhow::Result<MultiTargetScenario> {
        let scenario = self.build_scenario()?;
        let priors: Vec<TargetPrior> = match (&self.prior.targets, &self.prior.sampler) {
            (Some(specs), None) => specs
                .iter()
                .map(|spec| {
                    let axis = |comps: &[ComponentSpec]| {
                        Gmm1d::new(
                            comps
                                .iter()
                                .map(|c| GaussianComponent::new(c.weight, c.mean_m, c.variance_m2))
                                .collect(),
                        )
                    };
                    Ok(TargetPrior::new(
                        axis(&spec.x).map_err(|e| anyhow::anyhow!("x prior: {e}"))?,
                        axis(&spec.y).map_err(|e| anyhow::anyhow!("y prior: {e}"))?,
                    ))
                })
                .collect::<anyhow::Result<_>>()?,
            (None, Some(sampler)) => sample_priors(sampler)?,
            _ => bail!("prior block must set exactly one of `targets` or `sampler`"),
        };
        MultiTargetScenario::new(priors, scenario).map_err(|e| anyhow::anyhow!("{e}"))
    }

    pub fn build_search(&self) -> SearchConfig {
        SearchConfig {
            step: self.solver.step_m,
            convergence_tol: self.solver.convergence_tol,
            max_outer_iters: self.solver.max_outer_iters,
        }
    }

    pub fn build_rule(&self) -> anyhow::Result<GhRule> {
        gauss_hermite(self.solver.gh_order).map_err(|e| anyhow::anyhow!("{e}"))
    }

    pub fn pmax_watts(&self) -> Option<f64> {
        self.solver.pmax_dbm.map(dbm_to_watts)
    }
}
