//! Bayesian Fisher information and the closed-form BCRB.
//!
//! For a target with independent per-axis mixture priors the Bayesian FIM is
//!
//! ```text
//! B = (2 P / sigma^2) E_r[ J(x; r) ] + diag(F_xx, F_yy),
//! ```
//!
//! where `J(x; r)_ij = Re{ (df/d r_i)^* (df/d r_j) }` is the per-position
//! observation FIM of the effective channel gain and `F_xx`, `F_yy` are the
//! Fisher informations of the axis priors. The BCRB is the trace of `B^-1`,
//! which for the 2x2 case reduces to `(B_11 + B_22) / det B`.
//!
//! The expectation over the prior is a Gauss-Hermite tensor sum with up to
//! `L1 L2 I^2` terms; [`FimEvaluator`] evaluates it incrementally so that the
//! element-wise placement search pays `O(nodes)` instead of `O(M x nodes)`
//! per trial position, with an optional precomputed table over the search
//! grid that removes the per-node transcendentals entirely.

use num_complex::Complex64;

use crate::channel::{channel_derivative, derivative_factor, ChannelDerivative};
use crate::error::{Error, Result};
use crate::quadrature::{expect_gmm_1d, GhRule};
use crate::scenario::{Gmm1d, PinchLayout, Position, Scenario, TargetPrior};

/// Variance below which a prior component is collapsed to a point mass.
/// The quadrature change of variables is exact there and skipping it avoids
/// cancellation in the prior-FIM integrand.
pub const DEGENERATE_VARIANCE: f64 = 1e-10;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Fisher information of the position prior. Cross terms vanish because the
/// axes are independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorFim {
    pub xx: f64,
    pub yy: f64,
}

impl PriorFim {
    /// Prior-only BCRB `1/F_xx + 1/F_yy`, the bound at zero transmit power.
    pub fn prior_only_bcrb(&self) -> f64 {
        1.0 / self.xx + 1.0 / self.yy
    }
}

/// Expected observation FIM (the `2 P / sigma^2` scale is *not* included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsFim {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl ObsFim {
    fn from_derivative(d: &ChannelDerivative) -> Self {
        let xy = (d.df_dx.conj() * d.df_dy).re;
        ObsFim {
            xx: d.df_dx.norm_sqr(),
            xy,
            yx: xy,
            yy: d.df_dy.norm_sqr(),
        }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.yx
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// True when the determinant is zero up to rounding of `xx * yy` — the
    /// single-PA / point-prior geometries whose FIM is genuinely rank one
    /// produce determinants at roundoff scale rather than exact zeros.
    pub fn is_rank_deficient(&self) -> bool {
        self.det() <= 1e-12 * self.xx * self.yy
    }

    /// `tr{J^-1}` for the high-SNR limit; `None` when (numerically) singular.
    pub fn trace_inverse(&self) -> Option<f64> {
        let det = self.det();
        if self.is_rank_deficient() || !det.is_finite() {
            None
        } else {
            Some(self.trace() / det)
        }
    }
}

/// Fisher information of an axis prior, `E[(d ln p / dr)^2]`.
///
/// A single-Gaussian axis short-circuits to the exact `1/sigma^2`; mixtures
/// integrate the squared score by Gauss-Hermite quadrature.
fn axis_fisher(gmm: &Gmm1d, rule: &GhRule) -> Result<f64> {
    if gmm.components().len() == 1 {
        return Ok(1.0 / gmm.components()[0].variance);
    }
    expect_gmm_1d(
        |r| {
            let s = gmm.score(r);
            s * s
        },
        gmm,
        rule,
    )
}

/// Fisher information of the 2D prior.
pub fn prior_fim(prior: &TargetPrior, rule: &GhRule) -> Result<PriorFim> {
    Ok(PriorFim {
        xx: axis_fisher(&prior.x, rule)?,
        yy: axis_fisher(&prior.y, rule)?,
    })
}

/// Per-position observation FIM `J(x; r)` of the PASS channel (unscaled).
pub fn observation_fim_at(layout: &PinchLayout, target: Position, scenario: &Scenario) -> ObsFim {
    ObsFim::from_derivative(&channel_derivative(layout, target, scenario))
}

// ---------------------------------------------------------------------------
// Incremental expected-FIM evaluator
// ---------------------------------------------------------------------------

/// One axis of quadrature samples: positions and weights after the
/// change of variables, with degenerate components collapsed to their mean.
fn axis_samples(gmm: &Gmm1d, rule: &GhRule) -> Vec<(f64, f64)> {
    let mut samples = Vec::new();
    for c in gmm.components() {
        if c.variance < DEGENERATE_VARIANCE {
            samples.push((c.mean, c.weight * SQRT_PI));
        } else {
            let sigma = c.variance.sqrt();
            for (b, w) in rule.iter() {
                samples.push((std::f64::consts::SQRT_2 * sigma * b + c.mean, c.weight * w));
            }
        }
    }
    samples
}

/// Table of the shared derivative factor `t(x_j, node)` over a uniform
/// position grid, so grid scans avoid recomputing square roots and
/// trigonometry per node.
struct GridTable {
    step: f64,
    n_points: usize,
    /// `t[j * n_nodes + node]`
    t: Vec<Complex64>,
}

/// Cached evaluation state for one layout.
struct BaseState {
    positions: Vec<f64>,
    weights: Vec<Complex64>,
    /// Per-element per-node contributions to `df/dx` and `df/dy`, laid out
    /// as `contrib_dx[m][node]`.
    contrib_dx: Vec<Vec<Complex64>>,
    contrib_dy: Vec<Vec<Complex64>>,
    sum_dx: Vec<Complex64>,
    sum_dy: Vec<Complex64>,
    fim: ObsFim,
}

/// Evaluates the prior-expected observation FIM of one target for many
/// layouts.
///
/// The evaluator caches the last layout's per-element quadrature sums;
/// evaluating a layout that differs in a single element (the inner step of
/// every coordinate-descent scan) reuses them. Results are a deterministic
/// function of the call sequence.
pub struct FimEvaluator {
    eta: f64,
    k0: f64,
    kw: f64,
    n_nodes: usize,
    node_rx: Vec<f64>,
    node_neg_ry: Vec<f64>,
    /// `r_y^2 + d^2` per node.
    node_c: Vec<f64>,
    /// Quadrature weight per node including the `1/pi` normalization.
    node_beta: Vec<f64>,
    grid: Option<GridTable>,
    base: Option<BaseState>,
}

impl FimEvaluator {
    pub fn new(
        prior: &TargetPrior,
        scenario: &Scenario,
        rule_x: &GhRule,
        rule_y: &GhRule,
    ) -> Self {
        let xs = axis_samples(&prior.x, rule_x);
        let ys = axis_samples(&prior.y, rule_y);
        let d2 = scenario.waveguide_height * scenario.waveguide_height;
        let norm = 1.0 / (SQRT_PI * SQRT_PI);

        let n = xs.len() * ys.len();
        let mut node_rx = Vec::with_capacity(n);
        let mut node_neg_ry = Vec::with_capacity(n);
        let mut node_c = Vec::with_capacity(n);
        let mut node_beta = Vec::with_capacity(n);
        for &(rx, wx) in &xs {
            for &(ry, wy) in &ys {
                node_rx.push(rx);
                node_neg_ry.push(-ry);
                node_c.push(ry * ry + d2);
                node_beta.push(wx * wy * norm);
            }
        }

        FimEvaluator {
            eta: scenario.pathloss_factor,
            k0: scenario.free_wavenumber,
            kw: scenario.guided_wavenumber,
            n_nodes: n,
            node_rx,
            node_neg_ry,
            node_c,
            node_beta,
            grid: None,
            base: None,
        }
    }

    /// Precomputes the derivative factors on the uniform grid
    /// `{0, step, 2 step, ...}` up to `x_max`. Positions constructed as
    /// `j * step` then hit the table; any other position falls back to
    /// direct evaluation.
    pub fn enable_grid(&mut self, step: f64, x_max: f64) {
        assert!(step > 0.0 && x_max >= 0.0);
        if let Some(g) = &self.grid {
            if g.step == step && (g.n_points - 1) as f64 * step >= x_max {
                return;
            }
        }
        let n_points = (x_max / step).floor() as usize + 1;
        let mut t = Vec::with_capacity(n_points * self.n_nodes);
        for j in 0..n_points {
            let x = j as f64 * step;
            for node in 0..self.n_nodes {
                let dx = x - self.node_rx[node];
                let r = (dx * dx + self.node_c[node]).sqrt();
                t.push(derivative_factor(self.eta, self.k0, r));
            }
        }
        self.grid = Some(GridTable { step, n_points, t });
        // contributions in the base were computed with identical formulas,
        // so the cache stays valid
    }

    fn grid_row(&self, x: f64) -> Option<&[Complex64]> {
        let g = self.grid.as_ref()?;
        let j = (x / g.step).round();
        if j < 0.0 || j as usize >= g.n_points || j * g.step != x {
            return None;
        }
        let j = j as usize;
        Some(&g.t[j * self.n_nodes..(j + 1) * self.n_nodes])
    }

    /// Expected observation FIM of a PASS layout (guided phases implied by
    /// the positions).
    pub fn eval(&mut self, positions: &[f64]) -> ObsFim {
        let kw = self.kw;
        let weights: Vec<Complex64> = positions
            .iter()
            .map(|&x| {
                let (s, c) = (kw * x).sin_cos();
                Complex64::new(c, -s)
            })
            .collect();
        self.eval_with(positions, &weights)
    }

    /// Core entry point: evaluate for `positions` with explicit unit-modulus
    /// element weights (fixed-position arrays supply steering phases here).
    pub fn eval_with(&mut self, positions: &[f64], weights: &[Complex64]) -> ObsFim {
        assert_eq!(positions.len(), weights.len());
        if let Some(base) = &self.base {
            if base.positions.len() == positions.len() {
                let mut changed = None;
                let mut n_changed = 0;
                for m in 0..positions.len() {
                    if positions[m] != base.positions[m] || weights[m] != base.weights[m] {
                        changed = Some(m);
                        n_changed += 1;
                        if n_changed > 1 {
                            break;
                        }
                    }
                }
                match (n_changed, changed) {
                    (0, _) => return self.base.as_ref().unwrap().fim,
                    (1, Some(m)) => return self.eval_one_moved(m, positions[m], weights[m]),
                    _ => {}
                }
            }
        }
        self.rebuild(positions, weights)
    }

    /// Fast path: only element `m` moved. Does not mutate the cache.
    fn eval_one_moved(&self, m: usize, x_new: f64, g_new: Complex64) -> ObsFim {
        let base = self.base.as_ref().unwrap();
        let cdx = &base.contrib_dx[m];
        let cdy = &base.contrib_dy[m];

        let mut xx = 0.0;
        let mut yy = 0.0;
        let mut xy = 0.0;

        if base.positions[m] == x_new {
            // weight-only change: rotate the stored contribution
            let rot = g_new * base.weights[m].conj();
            for node in 0..self.n_nodes {
                let ndx = cdx[node] * rot;
                let ndy = cdy[node] * rot;
                let sx = base.sum_dx[node] - cdx[node] + ndx;
                let sy = base.sum_dy[node] - cdy[node] + ndy;
                let beta = self.node_beta[node];
                xx += beta * sx.norm_sqr();
                yy += beta * sy.norm_sqr();
                xy += beta * (sx.re * sy.re + sx.im * sy.im);
            }
        } else if let Some(row) = self.grid_row(x_new) {
            for node in 0..self.n_nodes {
                let gt = g_new * row[node];
                let dx = x_new - self.node_rx[node];
                let ndx = gt * dx;
                let ndy = gt * self.node_neg_ry[node];
                let sx = base.sum_dx[node] - cdx[node] + ndx;
                let sy = base.sum_dy[node] - cdy[node] + ndy;
                let beta = self.node_beta[node];
                xx += beta * sx.norm_sqr();
                yy += beta * sy.norm_sqr();
                xy += beta * (sx.re * sy.re + sx.im * sy.im);
            }
        } else {
            for node in 0..self.n_nodes {
                let dx = x_new - self.node_rx[node];
                let r = (dx * dx + self.node_c[node]).sqrt();
                let gt = g_new * derivative_factor(self.eta, self.k0, r);
                let ndx = gt * dx;
                let ndy = gt * self.node_neg_ry[node];
                let sx = base.sum_dx[node] - cdx[node] + ndx;
                let sy = base.sum_dy[node] - cdy[node] + ndy;
                let beta = self.node_beta[node];
                xx += beta * sx.norm_sqr();
                yy += beta * sy.norm_sqr();
                xy += beta * (sx.re * sy.re + sx.im * sy.im);
            }
        }

        ObsFim {
            xx,
            xy,
            yx: xy,
            yy,
        }
    }

    fn rebuild(&mut self, positions: &[f64], weights: &[Complex64]) -> ObsFim {
        let n = self.n_nodes;
        let m_count = positions.len();
        let mut contrib_dx = Vec::with_capacity(m_count);
        let mut contrib_dy = Vec::with_capacity(m_count);
        let mut sum_dx = vec![Complex64::new(0.0, 0.0); n];
        let mut sum_dy = vec![Complex64::new(0.0, 0.0); n];

        for m in 0..m_count {
            let x = positions[m];
            let g = weights[m];
            let mut cdx = Vec::with_capacity(n);
            let mut cdy = Vec::with_capacity(n);
            if let Some(row) = self.grid_row(x) {
                for node in 0..n {
                    let gt = g * row[node];
                    let dx = x - self.node_rx[node];
                    let ndx = gt * dx;
                    let ndy = gt * self.node_neg_ry[node];
                    sum_dx[node] += ndx;
                    sum_dy[node] += ndy;
                    cdx.push(ndx);
                    cdy.push(ndy);
                }
            } else {
                for node in 0..n {
                    let dx = x - self.node_rx[node];
                    let r = (dx * dx + self.node_c[node]).sqrt();
                    let gt = g * derivative_factor(self.eta, self.k0, r);
                    let ndx = gt * dx;
                    let ndy = gt * self.node_neg_ry[node];
                    sum_dx[node] += ndx;
                    sum_dy[node] += ndy;
                    cdx.push(ndx);
                    cdy.push(ndy);
                }
            }
            contrib_dx.push(cdx);
            contrib_dy.push(cdy);
        }

        let mut xx = 0.0;
        let mut yy = 0.0;
        let mut xy = 0.0;
        for node in 0..n {
            let beta = self.node_beta[node];
            let sx = sum_dx[node];
            let sy = sum_dy[node];
            xx += beta * sx.norm_sqr();
            yy += beta * sy.norm_sqr();
            xy += beta * (sx.re * sy.re + sx.im * sy.im);
        }
        let fim = ObsFim {
            xx,
            xy,
            yx: xy,
            yy,
        };

        self.base = Some(BaseState {
            positions: positions.to_vec(),
            weights: weights.to_vec(),
            contrib_dx,
            contrib_dy,
            sum_dx,
            sum_dy,
            fim,
        });
        fim
    }
}

/// Expected observation FIM: each entry is the prior expectation of the
/// matching [`observation_fim_at`] entry, evaluated by 2D Gauss-Hermite
/// quadrature.
pub fn expected_observation_fim(
    layout: &PinchLayout,
    prior: &TargetPrior,
    scenario: &Scenario,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<ObsFim> {
    let mut ev = FimEvaluator::new(prior, scenario, rule_x, rule_y);
    let fim = ev.eval(layout.positions());
    if !(fim.xx.is_finite() && fim.xy.is_finite() && fim.yy.is_finite()) {
        return Err(Error::NumericalDomain(format!(
            "expected observation FIM is not finite for layout {:?}",
            layout.positions()
        )));
    }
    Ok(fim)
}

// ---------------------------------------------------------------------------
// BFIM and BCRB
// ---------------------------------------------------------------------------

/// Bayesian Fisher information matrix `(2P/sigma^2) J + diag(F_xx, F_yy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bfim {
    /// Row-major entries in 1/m^2.
    pub entries: [[f64; 2]; 2],
    /// Transmit power in watts.
    pub power: f64,
    /// Total noise power in watts.
    pub noise: f64,
}

impl Bfim {
    pub fn from_parts(obs: &ObsFim, prior: &PriorFim, power: f64, noise: f64) -> Self {
        let a = 2.0 * power / noise;
        Bfim {
            entries: [
                [a * obs.xx + prior.xx, a * obs.xy],
                [a * obs.yx, a * obs.yy + prior.yy],
            ],
            power,
            noise,
        }
    }

    pub fn det(&self) -> f64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    /// Closed-form BCRB `(B_11 + B_22) / det B`, the trace of the inverse.
    pub fn bcrb(&self) -> Result<f64> {
        let det = self.det();
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::SingularFim(format!(
                "BFIM determinant is {det}; the prior must make the BFIM positive definite"
            )));
        }
        Ok((self.entries[0][0] + self.entries[1][1]) / det)
    }
}

/// Assembles the BFIM for `(layout, prior, power)` and returns it with its
/// BCRB in m^2.
pub fn bcrb(
    layout: &PinchLayout,
    prior: &TargetPrior,
    power: f64,
    scenario: &Scenario,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<(Bfim, f64)> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transmit power must be non-negative, got {power}"
        )));
    }
    let pf = prior_fim(prior, rule_x)?;
    let obs = expected_observation_fim(layout, prior, scenario, rule_x, rule_y)?;
    let bf = Bfim::from_parts(&obs, &pf, power, scenario.total_noise);
    let value = bf.bcrb()?;
    Ok((bf, value))
}

// ---------------------------------------------------------------------------
// Single-pinch analysis
// ---------------------------------------------------------------------------

/// Evaluation mode for the single-pinch Fisher information.
#[derive(Debug, Clone, Copy)]
pub enum SinglePinchMode<'a> {
    /// Quadrature sum over the prior with the far-field simplification
    /// `k0^2 r^2 >> 1` applied to the integrand.
    ExactGhq(&'a GhRule),
    /// Three-term closed form built from the order-3 rule: terms centered at
    /// the prior mean and at `mean +/- sqrt(3) sigma` with coefficients
    /// 2/3, 1/6, 1/6.
    ThreeSigma,
}

/// Scale constant `C = 2 P eta^2 k0^2 / sigma^2` multiplying the normalized
/// single-pinch FI.
pub fn single_pinch_constant(scenario: &Scenario, power: f64) -> f64 {
    2.0 * power * scenario.pathloss_factor * scenario.pathloss_factor
        * scenario.free_wavenumber
        * scenario.free_wavenumber
        / scenario.total_noise
}

/// Three-sigma-form term: `1 / ((x-c)^2 + 2 D^2 + D^4/(x-c)^2)`, with the
/// removable singularity at `x = c` taken at its limit, zero.
fn three_sigma_term(x: f64, center: f64, delta_sq: f64) -> f64 {
    let z = x - center;
    if z.abs() < 1e-9 {
        return 0.0;
    }
    let z2 = z * z;
    1.0 / (z2 + 2.0 * delta_sq + delta_sq * delta_sq / z2)
}

/// Normalized single-pinch Fisher information (the `C` constant divided
/// out), for a PA at `x`, a Gaussian x-prior `N(mean, variance)` and known
/// cross-range `r_y`.
pub fn single_pinch_fi_normalized(
    x: f64,
    mean: f64,
    variance: f64,
    r_y: f64,
    scenario: &Scenario,
    mode: SinglePinchMode<'_>,
) -> f64 {
    let delta_sq = scenario.waveguide_height * scenario.waveguide_height + r_y * r_y;
    match mode {
        SinglePinchMode::ExactGhq(rule) => {
            let sigma = variance.sqrt();
            let mut total = 0.0;
            for (b, w) in rule.iter() {
                let c = std::f64::consts::SQRT_2 * sigma * b + mean;
                let z = c - x;
                let r_sq = z * z + delta_sq;
                total += w * z * z / (r_sq * r_sq);
            }
            total / SQRT_PI
        }
        SinglePinchMode::ThreeSigma => {
            let spread = (3.0 * variance).sqrt();
            2.0 / 3.0 * three_sigma_term(x, mean, delta_sq)
                + 1.0 / 6.0 * three_sigma_term(x, mean + spread, delta_sq)
                + 1.0 / 6.0 * three_sigma_term(x, mean - spread, delta_sq)
        }
    }
}

/// Single-pinch Fisher information including the `2 P eta^2 k0^2 / sigma^2`
/// constant.
pub fn single_pinch_fi(
    x: f64,
    mean: f64,
    variance: f64,
    r_y: f64,
    scenario: &Scenario,
    power: f64,
    mode: SinglePinchMode<'_>,
) -> f64 {
    single_pinch_constant(scenario, power)
        * single_pinch_fi_normalized(x, mean, variance, r_y, scenario, mode)
}

/// Optimal single-PA position for a Gaussian x-prior: the feasible member of
/// `{mean - Delta, mean + Delta}` with the larger FI, `Delta = sqrt(d^2 + r_y^2)`.
/// Ties resolve to the smaller coordinate; when neither candidate fits on
/// the waveguide, the better endpoint is returned.
pub fn optimal_single_pinch(mean: f64, variance: f64, r_y: f64, scenario: &Scenario) -> f64 {
    let delta = (scenario.waveguide_height * scenario.waveguide_height + r_y * r_y).sqrt();
    let fi = |x: f64| {
        single_pinch_fi_normalized(x, mean, variance, r_y, scenario, SinglePinchMode::ThreeSigma)
    };
    let feasible: Vec<f64> = [mean - delta, mean + delta]
        .into_iter()
        .filter(|&x| (0.0..=scenario.waveguide_length).contains(&x))
        .collect();
    let candidates: Vec<f64> = if feasible.is_empty() {
        vec![0.0, scenario.waveguide_length]
    } else {
        feasible
    };

    let mut best = candidates[0];
    let mut best_fi = fi(best);
    for &x in &candidates[1..] {
        let v = fi(x);
        // strict improvement beyond rounding noise replaces; ties keep the
        // smaller coordinate (candidates are scanned in ascending order)
        if v > best_fi * (1.0 + 1e-12) {
            best = x;
            best_fi = v;
        }
    }
    best
}
