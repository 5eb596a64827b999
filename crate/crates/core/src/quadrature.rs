//! Gauss-Hermite quadrature and expectation operators over Gaussian mixtures.
//!
//! A rule of order `I` integrates `f(b) e^{-b^2}` over the real line as
//! `sum_i w_i f(b_i)` and is exact for polynomials up to degree `2I - 1`.
//! Expectations against a Gaussian `N(u, s^2)` follow from the change of
//! variables `x = sqrt(2) s b + u`, which contributes the `1/sqrt(pi)`
//! normalization; mixtures sum the per-component expectations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scenario::{Gmm1d, TargetPrior};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Largest supported rule order.
pub const MAX_GH_ORDER: usize = 200;

/// Nodes and weights of a Gauss-Hermite rule for the weight `e^{-b^2}`.
///
/// Nodes are sorted ascending and exactly antisymmetric about zero; weights
/// are positive and symmetric, with `sum_i w_i = sqrt(pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GhRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterates over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Quadrature of `f(b) e^{-b^2}` over the real line.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(b, w)| w * f(b)).sum()
    }
}

/// Evaluates the orthonormal (physicists') Hermite polynomials at `x`,
/// returning `(p_n(x), p_{n-1}(x), sum_{k<n} p_k(x)^2)`. The running sum is
/// the reciprocal of the Gauss weight at a node.
fn hermite_ortho(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += cur * cur;
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev, sum_sq)
}

/// Builds the order-`order` Gauss-Hermite rule via Golub-Welsch.
///
/// The Hermite three-term recurrence yields a symmetric tridiagonal Jacobi
/// matrix with zero diagonal and off-diagonal `sqrt(k/2)`; its eigenvalues
/// seed the nodes, which are then polished by Newton iterations on the
/// orthonormal Hermite recurrence (`p_n' = sqrt(2n) p_{n-1}`). Weights come
/// from the Christoffel identity `w = 1 / sum_{k<n} p_k(x)^2`. Nodes and
/// weights are symmetrized pairwise afterwards so the rule's symmetry is
/// exact rather than merely within solver tolerance.
pub fn gauss_hermite(order: usize) -> Result<GhRule> {
    if order == 0 || order > MAX_GH_ORDER {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Hermite order must be in 1..={MAX_GH_ORDER}, got {order}"
        )));
    }
    if order == 1 {
        return Ok(GhRule {
            nodes: vec![0.0],
            weights: vec![SQRT_PI],
        });
    }

    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eigen = jacobi.symmetric_eigen();

    let deriv_scale = (2.0 * order as f64).sqrt();
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .map(|&seed| {
            let mut x = seed;
            for _ in 0..3 {
                let (pn, pn_1, _) = hermite_ortho(order, x);
                let d = deriv_scale * pn_1;
                if d == 0.0 {
                    break;
                }
                let step = pn / d;
                x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, _, sum_sq) = hermite_ortho(order, x);
            (x, 1.0 / sum_sq)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    // Enforce the exact +/- symmetry of the Hermite rule.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let mag = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -mag;
        nodes[j] = mag;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }

    Ok(GhRule { nodes, weights })
}

fn check_finite(value: f64, sample: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericalDomain(format!(
            "integrand returned {value} at {sample}"
        )))
    }
}

/// Expectation `E[f(X)]` for `X` distributed as the 1D mixture `gmm`:
/// `(1/sqrt(pi)) sum_l w_l sum_i w_i f(sqrt(2) s_l b_i + u_l)`.
pub fn expect_gmm_1d<F>(mut f: F, gmm: &Gmm1d, rule: &GhRule) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut total = 0.0;
    for c in gmm.components() {
        let sigma = c.variance.sqrt();
        let mut comp = 0.0;
        for (b, w) in rule.iter() {
            let x = std::f64::consts::SQRT_2 * sigma * b + c.mean;
            comp += w * check_finite(f(x), &format!("x = {x}"))?;
        }
        total += c.weight * comp;
    }
    Ok(total / SQRT_PI)
}

/// Expectation `E[f(X, Y)]` for independent mixture-distributed axes:
/// `(1/pi) sum_{l1,l2,i1,i2} beta f(sqrt(2) s_x b_{i1} + u_x, sqrt(2) s_y b_{i2} + u_y)`
/// with `beta = w_{x,l1} w_{y,l2} w_{i1} w_{i2}`.
pub fn expect_gmm_2d<F>(
    mut f: F,
    prior: &TargetPrior,
    rule_x: &GhRule,
    rule_y: &GhRule,
) -> Result<f64>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut total = 0.0;
    for cx in prior.x.components() {
        let sx = cx.variance.sqrt();
        for cy in prior.y.components() {
            let sy = cy.variance.sqrt();
            let mut comp = 0.0;
            for (bx, wx) in rule_x.iter() {
                let x = std::f64::consts::SQRT_2 * sx * bx + cx.mean;
                let mut row = 0.0;
                for (by, wy) in rule_y.iter() {
                    let y = std::f64::consts::SQRT_2 * sy * by + cy.mean;
                    row += wy * check_finite(f(x, y), &format!("(x, y) = ({x}, {y})"))?;
                }
                comp += wx * row;
            }
            total += cx.weight * cy.weight * comp;
        }
    }
    Ok(total / (SQRT_PI * SQRT_PI))
}
