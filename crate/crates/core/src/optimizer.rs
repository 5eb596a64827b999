//! Element-wise (coordinate-descent) layout search and its exhaustive oracle.
//!
//! The element-wise algorithm cycles over the PAs; for each one it scans the
//! absolute grid `{0, step, 2 step, ...}` restricted to the positions that
//! keep the layout feasible given the other PAs, and keeps the grid point
//! with the smallest objective. The outer loop repeats until the fractional
//! decrease of the objective falls below the configured tolerance. With `J`
//! grid points this costs at most `J * M` objective evaluations per outer
//! iteration.

use crate::error::{Error, Result};
use crate::scenario::{validate_layout, PinchLayout, Scenario};

/// Objective over layouts. Solvers return errors (infeasible slot, singular
/// FIM, ...) rather than sentinel values.
pub type Objective<'a> = dyn FnMut(&PinchLayout) -> Result<f64> + 'a;

/// Search-grid and stopping parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Grid resolution in meters.
    pub step: f64,
    /// Stop when the fractional per-iteration decrease drops below this.
    pub convergence_tol: f64,
    /// Hard cap on outer iterations.
    pub max_outer_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            step: 0.1,
            convergence_tol: 1e-4,
            max_outer_iters: 50,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "search step must be positive, got {}",
                self.step
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "convergence tolerance must be positive, got {}",
                self.convergence_tol
            )));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidArgument("need at least one iteration".into()));
        }
        Ok(())
    }
}

/// Minimization result with the per-iteration trace (entry 0 is the value at
/// the initial layout; the trace never increases).
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub layout: PinchLayout,
    pub value: f64,
    pub trace: Vec<f64>,
}

fn checked_eval(objective: &mut Objective<'_>, layout: &PinchLayout) -> Result<f64> {
    let v = objective(layout)?;
    if !v.is_finite() {
        return Err(Error::NumericalDomain(format!(
            "objective returned {v} at layout {:?}",
            layout.positions()
        )));
    }
    Ok(v)
}

/// Grid indices whose positions fall in `[lo, hi]`; the extra index of slack
/// on each side absorbs floating-point rounding of the bounds, the exact
/// comparison inside does the real filtering.
fn grid_range(lo: f64, hi: f64, step: f64, j_max: i64) -> impl Iterator<Item = i64> {
    let j_lo = ((lo / step).floor() as i64 - 1).max(0);
    let j_hi = ((hi / step).ceil() as i64 + 1).min(j_max);
    j_lo..=j_hi
}

/// Element-wise layout minimization (coordinate descent on the PA grid).
///
/// Scans PA `m` over the grid positions inside
/// `[x_{m-1} + min_spacing, x_{m+1} - min_spacing]` (boundary PAs clip to the
/// waveguide), keeping the minimizing point with ties resolved to the
/// smallest coordinate. Deterministic for a deterministic objective.
pub fn element_wise_minimize(
    objective: &mut Objective<'_>,
    scenario: &Scenario,
    init: &PinchLayout,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    if let Err(v) = validate_layout(init, scenario) {
        return Err(Error::InvalidArgument(format!("infeasible init: {v}")));
    }

    let m_count = init.len();
    let step = cfg.step;
    let j_max = (scenario.waveguide_length / step).floor() as i64;

    let mut xs = init.positions().to_vec();
    let mut best = checked_eval(objective, init)?;
    let mut trace = vec![best];

    for _ in 0..cfg.max_outer_iters {
        let prev = best;
        for m in 0..m_count {
            let lo = if m == 0 {
                0.0
            } else {
                xs[m - 1] + scenario.min_spacing
            };
            let hi = if m == m_count - 1 {
                scenario.waveguide_length
            } else {
                xs[m + 1] - scenario.min_spacing
            };
            if lo > hi {
                continue; // squeezed by the neighbors; keep the current position
            }
            let mut best_x = xs[m];
            for j in grid_range(lo, hi, step, j_max) {
                let x = j as f64 * step;
                // feasibility under exactly the comparisons validate_layout
                // makes, so every accepted candidate is a valid layout
                if x < 0.0 || x > scenario.waveguide_length {
                    continue;
                }
                if m > 0 && x - xs[m - 1] < scenario.min_spacing {
                    continue;
                }
                if m + 1 < m_count && xs[m + 1] - x < scenario.min_spacing {
                    continue;
                }
                let mut cand = xs.clone();
                cand[m] = x;
                let f = checked_eval(objective, &PinchLayout::new(cand))?;
                if f < best {
                    best = f;
                    best_x = x;
                }
            }
            xs[m] = best_x;
        }
        trace.push(best);
        let frac = (prev - best) / prev.abs().max(f64::MIN_POSITIVE);
        if frac < cfg.convergence_tol {
            break;
        }
    }

    Ok(SearchOutcome {
        layout: PinchLayout::new(xs),
        value: best,
        trace,
    })
}

/// Default starting layout for the element-wise search: PAs spread uniformly
/// over the waveguide (a single PA sits at the midpoint). Always feasible
/// because scenario construction enforces `(M - 1) min_spacing <= x_max`.
pub fn uniform_init(scenario: &Scenario) -> PinchLayout {
    let m = scenario.num_pas;
    if m == 1 {
        return PinchLayout::new(vec![scenario.waveguide_length / 2.0]);
    }
    let gap = scenario.waveguide_length / (m - 1) as f64;
    PinchLayout::new((0..m).map(|i| i as f64 * gap).collect())
}

/// Guard for [`exhaustive_grid_minimize`]: refuse enumerations beyond this
/// many grid tuples.
pub const EXHAUSTIVE_GUARD: f64 = 1e7;

/// Global minimization over every feasible `M`-tuple of grid positions.
/// Exponential in `M`; intended as a test oracle for the element-wise
/// search. Ties resolve to the lexicographically smallest layout.
pub fn exhaustive_grid_minimize(
    objective: &mut Objective<'_>,
    scenario: &Scenario,
    cfg: &SearchConfig,
) -> Result<(PinchLayout, f64)> {
    cfg.validate()?;
    let m_count = scenario.num_pas;
    let j_max = (scenario.waveguide_length / cfg.step).floor() as i64;
    let j_count = (j_max + 1) as f64;
    let total = j_count.powi(m_count as i32);
    if total > EXHAUSTIVE_GUARD {
        return Err(Error::GridCapacity {
            points: total,
            limit: EXHAUSTIVE_GUARD,
        });
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut current = vec![0.0; m_count];

    struct Grid {
        j_max: i64,
        step: f64,
        min_spacing: f64,
    }

    // depth-first enumeration in lexicographic order
    fn recurse(
        grid: &Grid,
        depth: usize,
        j_start: i64,
        current: &mut Vec<f64>,
        objective: &mut Objective<'_>,
        best: &mut Option<(Vec<f64>, f64)>,
    ) -> Result<()> {
        let m_count = current.len();
        for j in j_start..=grid.j_max {
            let x = j as f64 * grid.step;
            if depth > 0 && x - current[depth - 1] < grid.min_spacing {
                continue;
            }
            current[depth] = x;
            if depth + 1 == m_count {
                let layout = PinchLayout::new(current.clone());
                let f = checked_eval(objective, &layout)?;
                let better = match best {
                    None => true,
                    Some((_, fb)) => f < *fb,
                };
                if better {
                    *best = Some((current.clone(), f));
                }
            } else {
                recurse(grid, depth + 1, j, current, objective, best)?;
            }
        }
        Ok(())
    }

    let grid = Grid {
        j_max,
        step: cfg.step,
        min_spacing: scenario.min_spacing,
    };
    recurse(&grid, 0, 0, &mut current, objective, &mut best)?;

    match best {
        Some((xs, f)) => Ok((PinchLayout::new(xs), f)),
        None => Err(Error::InvalidArgument(
            "no feasible layout on the search grid".into(),
        )),
    }
}
