//! Physical scenario, PA layouts, and Gaussian-mixture position priors.
//!
//! Everything downstream (channel, Fisher information, solvers) consumes the
//! immutable types defined here. Internal units are strictly SI; dBm is
//! converted at the boundary by [`dbm_to_watts`].

use std::fmt;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s. Fixed so every derived constant is
/// reproducible bit-for-bit.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Converts a power level in dBm to watts: `10^((p - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm. Inverse of [`dbm_to_watts`].
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// User-facing scenario parameters; derived quantities are computed by
/// [`Scenario::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Carrier frequency in Hz.
    pub carrier_frequency_hz: f64,
    /// Effective refractive index of the waveguide (dimensionless).
    pub effective_index: f64,
    /// Waveguide length in meters; PAs live on `[0, waveguide_length_m]`.
    pub waveguide_length_m: f64,
    /// Height of the waveguide above the target plane, meters.
    pub waveguide_height_m: f64,
    /// Number of pinching antennas on the waveguide.
    pub num_pas: usize,
    /// Minimum spacing between adjacent PAs, meters. `None` selects half a
    /// carrier wavelength, the usual mutual-coupling limit.
    pub min_spacing_m: Option<f64>,
    /// Noise power per antenna element, watts.
    pub per_antenna_noise_w: f64,
}

impl Default for ScenarioConfig {
    /// Indoor mmWave defaults: 28 GHz carrier, n_eff = 1.4, 10 m waveguide
    /// at 3 m height, five PAs, -90 dBm per-antenna noise.
    fn default() -> Self {
        ScenarioConfig {
            carrier_frequency_hz: 28e9,
            effective_index: 1.4,
            waveguide_length_m: 10.0,
            waveguide_height_m: 3.0,
            num_pas: 5,
            min_spacing_m: None,
            per_antenna_noise_w: dbm_to_watts(-90.0),
        }
    }
}

/// Immutable physical scenario with all derived constants.
///
/// Derived fields satisfy, to relative error <= 1e-12:
/// `wavelength = c / f`, `free_wavenumber = 2 pi / wavelength`,
/// `guided_wavelength = wavelength / effective_index`,
/// `guided_wavenumber = 2 pi / guided_wavelength`,
/// `pathloss_factor = wavelength / (4 pi)`, `total_noise = M * per_antenna_noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub carrier_frequency: f64,
    pub wavelength: f64,
    pub free_wavenumber: f64,
    pub effective_index: f64,
    pub guided_wavelength: f64,
    pub guided_wavenumber: f64,
    pub pathloss_factor: f64,
    pub waveguide_length: f64,
    pub waveguide_height: f64,
    pub num_pas: usize,
    pub min_spacing: f64,
    pub per_antenna_noise: f64,
    pub total_noise: f64,
}

impl Scenario {
    /// Validates `cfg` and computes the derived constants.
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        let f = cfg.carrier_frequency_hz;
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "carrier frequency must be positive, got {f}"
            )));
        }
        if !(cfg.effective_index.is_finite() && cfg.effective_index > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "effective index must be positive, got {}",
                cfg.effective_index
            )));
        }
        if !(cfg.waveguide_length_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "waveguide length must be positive, got {}",
                cfg.waveguide_length_m
            )));
        }
        if !(cfg.waveguide_height_m > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "waveguide height must be positive, got {}",
                cfg.waveguide_height_m
            )));
        }
        if cfg.num_pas == 0 {
            return Err(Error::InvalidArgument("need at least one PA".into()));
        }
        if !(cfg.per_antenna_noise_w.is_finite() && cfg.per_antenna_noise_w > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "per-antenna noise must be positive, got {}",
                cfg.per_antenna_noise_w
            )));
        }

        let wavelength = SPEED_OF_LIGHT / f;
        let min_spacing = cfg.min_spacing_m.unwrap_or(wavelength / 2.0);
        if min_spacing < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "min spacing must be non-negative, got {min_spacing}"
            )));
        }
        let span = (cfg.num_pas - 1) as f64 * min_spacing;
        if span > cfg.waveguide_length_m {
            return Err(Error::InvalidArgument(format!(
                "{} PAs at spacing >= {min_spacing} m need {span} m but the waveguide is {} m",
                cfg.num_pas, cfg.waveguide_length_m
            )));
        }

        let guided_wavelength = wavelength / cfg.effective_index;
        Ok(Scenario {
            carrier_frequency: f,
            wavelength,
            free_wavenumber: 2.0 * std::f64::consts::PI / wavelength,
            effective_index: cfg.effective_index,
            guided_wavelength,
            guided_wavenumber: 2.0 * std::f64::consts::PI / guided_wavelength,
            pathloss_factor: wavelength / (4.0 * std::f64::consts::PI),
            waveguide_length: cfg.waveguide_length_m,
            waveguide_height: cfg.waveguide_height_m,
            num_pas: cfg.num_pas,
            min_spacing,
            per_antenna_noise: cfg.per_antenna_noise_w,
            total_noise: cfg.num_pas as f64 * cfg.per_antenna_noise_w,
        })
    }

    /// Scenario identical to `self` except for the PA count (noise scales
    /// with `M`).
    pub fn with_num_pas(&self, num_pas: usize) -> Result<Self> {
        Scenario::new(ScenarioConfig {
            carrier_frequency_hz: self.carrier_frequency,
            effective_index: self.effective_index,
            waveguide_length_m: self.waveguide_length,
            waveguide_height_m: self.waveguide_height,
            num_pas,
            min_spacing_m: Some(self.min_spacing),
            per_antenna_noise_w: self.per_antenna_noise,
        })
    }
}

/// Ordered PA x-coordinates along the waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchLayout {
    positions: Vec<f64>,
}

impl PinchLayout {
    pub fn new(positions: Vec<f64>) -> Self {
        PinchLayout { positions }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// First feasibility constraint violated by a layout.
#[derive(Debug, Clone, PartialEq)]
pub enum LayoutViolation {
    /// The layout has `got` PAs but the scenario expects `expected`.
    WrongCount { expected: usize, got: usize },
    /// PA `index` (0-based) lies outside `[0, x_max]`.
    OutOfRange { index: usize, position: f64 },
    /// PA `index` is closer than `min_spacing` to its predecessor (also
    /// covers out-of-order coordinates).
    Spacing { index: usize, gap: f64 },
}

impl fmt::Display for LayoutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutViolation::WrongCount { expected, got } => {
                write!(f, "layout has {got} PAs, scenario expects {expected}")
            }
            LayoutViolation::OutOfRange { index, position } => {
                write!(f, "PA {index} at x = {position} m is outside the waveguide")
            }
            LayoutViolation::Spacing { index, gap } => {
                write!(f, "PA {index} is only {gap} m from its predecessor")
            }
        }
    }
}

/// Checks the layout feasibility set: all positions inside `[0, x_max]` in
/// non-decreasing order with adjacent gaps of at least `min_spacing`.
/// Returns the first violated constraint.
pub fn validate_layout(
    layout: &PinchLayout,
    scenario: &Scenario,
) -> std::result::Result<(), LayoutViolation> {
    let xs = layout.positions();
    if xs.len() != scenario.num_pas {
        return Err(LayoutViolation::WrongCount {
            expected: scenario.num_pas,
            got: xs.len(),
        });
    }
    for (i, &x) in xs.iter().enumerate() {
        if !x.is_finite() || x < 0.0 || x > scenario.waveguide_length {
            return Err(LayoutViolation::OutOfRange {
                index: i,
                position: x,
            });
        }
        if i > 0 {
            let gap = x - xs[i - 1];
            if gap < scenario.min_spacing {
                return Err(LayoutViolation::Spacing { index: i, gap });
            }
        }
    }
    Ok(())
}

/// Target position on the z = 0 plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }
}

/// One Gaussian component of a 1D mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: f64, variance: f64) -> Self {
        GaussianComponent {
            weight,
            mean,
            variance,
        }
    }
}

/// 1D Gaussian mixture: `p(r) = sum_l w_l N(r; u_l, s_l^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm1d {
    components: Vec<GaussianComponent>,
}

/// Weights must sum to one within this tolerance.
const WEIGHT_SUM_TOL: f64 = 1e-12;

impl Gmm1d {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs at least one component".into(),
            ));
        }
        let mut sum = 0.0;
        for (l, c) in components.iter().enumerate() {
            if !(c.weight.is_finite() && (0.0..=1.0).contains(&c.weight)) {
                return Err(Error::InvalidArgument(format!(
                    "component {l}: weight {} outside [0, 1]",
                    c.weight
                )));
            }
            if !(c.variance.is_finite() && c.variance > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "component {l}: variance {} must be positive",
                    c.variance
                )));
            }
            if !c.mean.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "component {l}: mean must be finite"
                )));
            }
            sum += c.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {sum}, expected 1"
            )));
        }
        Ok(Gmm1d { components })
    }

    /// Single Gaussian `N(mean, variance)`.
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Gmm1d::new(vec![GaussianComponent::new(1.0, mean, variance)])
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Mixture mean `sum_l w_l u_l`.
    pub fn mean(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.mean)
            .sum::<f64>()
    }

    /// Density at `r`.
    pub fn pdf(&self, r: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let z = r - c.mean;
                c.weight / (2.0 * std::f64::consts::PI * c.variance).sqrt()
                    * (-z * z / (2.0 * c.variance)).exp()
            })
            .sum()
    }

    /// Score function `d ln p / d r`, evaluated as a convex combination of
    /// per-component scores with responsibilities computed in log space, so
    /// the ratio stays finite far out in the tails where both `p` and `p'`
    /// underflow.
    pub fn score(&self, r: f64) -> f64 {
        // log of each weighted component density, up to a common constant
        let mut log_terms = Vec::with_capacity(self.components.len());
        let mut max_log = f64::NEG_INFINITY;
        for c in &self.components {
            let z = r - c.mean;
            let lt = c.weight.ln() - 0.5 * c.variance.ln() - z * z / (2.0 * c.variance);
            log_terms.push(lt);
            if lt > max_log {
                max_log = lt;
            }
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (c, &lt) in self.components.iter().zip(&log_terms) {
            let w = (lt - max_log).exp();
            num += w * (c.mean - r) / c.variance;
            den += w;
        }
        num / den
    }
}

/// Independent per-axis Gaussian-mixture prior over a target's position.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPrior {
    pub x: Gmm1d,
    pub y: Gmm1d,
}

impl TargetPrior {
    pub fn new(x: Gmm1d, y: Gmm1d) -> Self {
        TargetPrior { x, y }
    }

    /// Prior with a single Gaussian on each axis.
    pub fn gaussian(mean_x: f64, var_x: f64, mean_y: f64, var_y: f64) -> Result<Self> {
        Ok(TargetPrior {
            x: Gmm1d::gaussian(mean_x, var_x)?,
            y: Gmm1d::gaussian(mean_y, var_y)?,
        })
    }
}
