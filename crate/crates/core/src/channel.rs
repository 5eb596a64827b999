//! Free-space and in-waveguide channel model plus its position derivatives.
//!
//! The effective scalar measurement of a target at `r = (r_x, r_y, 0)` seen
//! through PAs at `p_m = (x_m, 0, d)` is
//!
//! ```text
//! f = sum_m g_m h_m,   h_m = eta e^{-j k0 r_m} / r_m,   g_m = e^{-j kw x_m},
//! ```
//!
//! with `r_m = sqrt((x_m - r_x)^2 + r_y^2 + d^2)`. The in-waveguide factor
//! `g_m` is a pure phase; a fixed-position array replaces it with a steering
//! phase `e^{j theta_m}`, which is why the derivative helpers below accept
//! arbitrary unit-modulus weights.

use num_complex::Complex64;

use crate::scenario::{PinchLayout, Position, Scenario};

/// Per-PA channel terms and the effective scalar gain at one target position.
#[derive(Debug, Clone)]
pub struct ChannelSample {
    /// Free-space gains `h_m` (dimensionless).
    pub free_space: Vec<Complex64>,
    /// Unit-modulus guided phases `g_m`.
    pub guided: Vec<Complex64>,
    /// Effective gain `f = sum_m g_m h_m`.
    pub effective: Complex64,
    /// Target-to-PA distances `r_m`, meters.
    pub distances: Vec<f64>,
}

/// Derivatives of the effective gain with respect to the target coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ChannelDerivative {
    /// `df / d r_x`, per meter.
    pub df_dx: Complex64,
    /// `df / d r_y`, per meter.
    pub df_dy: Complex64,
}

/// In-waveguide phase `e^{-j kw x}` accumulated up to position `x`.
#[inline]
pub fn guided_phase(scenario: &Scenario, x: f64) -> Complex64 {
    let (s, c) = (scenario.guided_wavenumber * x).sin_cos();
    Complex64::new(c, -s)
}

/// Distance from a PA at `(x, 0, d)` to the target, with `c = r_y^2 + d^2`
/// precomputed by the caller.
#[inline]
fn pa_distance(dx: f64, c: f64) -> f64 {
    (dx * dx + c).sqrt()
}

/// Shared factor of both coordinate derivatives for one PA:
/// `t = eta (1 + j k0 r) e^{-j k0 r} / r^3`. The x-derivative is
/// `(x_m - r_x) t` and the y-derivative is `-r_y t`.
#[inline]
pub fn derivative_factor(eta: f64, k0: f64, r: f64) -> Complex64 {
    let k0r = k0 * r;
    let (s, c) = k0r.sin_cos();
    // (1 + j k0 r)(cos - j sin) = (cos + k0 r sin) + j (k0 r cos - sin)
    let scale = eta / (r * r * r);
    Complex64::new(scale * (c + k0r * s), scale * (k0r * c - s))
}

/// Evaluates the channel of a PASS layout at one target position.
pub fn sample_channel(layout: &PinchLayout, target: Position, scenario: &Scenario) -> ChannelSample {
    let c = target.y * target.y + scenario.waveguide_height * scenario.waveguide_height;
    let eta = scenario.pathloss_factor;
    let k0 = scenario.free_wavenumber;

    let mut free_space = Vec::with_capacity(layout.len());
    let mut guided = Vec::with_capacity(layout.len());
    let mut distances = Vec::with_capacity(layout.len());
    let mut effective = Complex64::new(0.0, 0.0);

    for &x in layout.positions() {
        let r = pa_distance(x - target.x, c);
        let (s, cs) = (k0 * r).sin_cos();
        let h = Complex64::new(cs, -s) * (eta / r);
        let g = guided_phase(scenario, x);
        effective += g * h;
        free_space.push(h);
        guided.push(g);
        distances.push(r);
    }

    ChannelSample {
        free_space,
        guided,
        effective,
        distances,
    }
}

/// Derivative of the effective gain for arbitrary unit-modulus element
/// weights (PASS guided phases or fixed-array steering phases).
pub fn derivative_with_weights(
    positions: &[f64],
    weights: &[Complex64],
    target: Position,
    scenario: &Scenario,
) -> ChannelDerivative {
    debug_assert_eq!(positions.len(), weights.len());
    let c = target.y * target.y + scenario.waveguide_height * scenario.waveguide_height;
    let eta = scenario.pathloss_factor;
    let k0 = scenario.free_wavenumber;

    let mut df_dx = Complex64::new(0.0, 0.0);
    let mut df_dy = Complex64::new(0.0, 0.0);
    for (&x, &g) in positions.iter().zip(weights) {
        let dx = x - target.x;
        let r = pa_distance(dx, c);
        let gt = g * derivative_factor(eta, k0, r);
        df_dx += gt * dx;
        df_dy += gt * (-target.y);
    }
    ChannelDerivative { df_dx, df_dy }
}

/// Derivative of the effective PASS gain with respect to the target
/// coordinates.
pub fn channel_derivative(
    layout: &PinchLayout,
    target: Position,
    scenario: &Scenario,
) -> ChannelDerivative {
    let weights: Vec<Complex64> = layout
        .positions()
        .iter()
        .map(|&x| guided_phase(scenario, x))
        .collect();
    derivative_with_weights(layout.positions(), &weights, target, scenario)
}
