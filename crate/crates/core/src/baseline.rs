//! Independent minimizers used to cross-check the fixed-point solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::ConvexRegion;
use crate::solver::initial_point;
use crate::weber::WeberInstance;
use crate::{Error, Point, Result};

/// Planar search window for [`grid_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    /// Spacing of the initial grid; each refinement round divides it by 10.
    pub resolution: f64,
    pub refinement_rounds: usize,
}

impl GridSpec {
    /// Spacing after all refinement rounds.
    pub fn final_resolution(&self) -> f64 {
        self.resolution / 10f64.powi(self.refinement_rounds as i32)
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::InvalidConfig("grid resolution must be positive".into()));
        }
        if (0..2).any(|i| !(self.lower[i] <= self.upper[i])) {
            return Err(Error::InvalidConfig("grid bounds are empty".into()));
        }
        Ok(())
    }
}

/// Refinement windows extend this many old spacings around the incumbent.
const REFINE_HALF_WIDTH: f64 = 10.0;

/// Best strictly feasible node of the lattice `lower + h * (i, j)` inside
/// `[lower, upper]`; rows are scanned in parallel and reduced in row order.
fn scan(
    instance: &WeberInstance,
    region: &ConvexRegion,
    lower: [f64; 2],
    upper: [f64; 2],
    h: f64,
) -> Option<(Point, f64)> {
    let nx = ((upper[0] - lower[0]) / h).floor() as usize + 1;
    let ny = ((upper[1] - lower[1]) / h).floor() as usize + 1;
    let rows: Vec<Option<(Point, f64)>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = lower[1] + h * j as f64;
            let mut best: Option<(Point, f64)> = None;
            for i in 0..nx {
                let node = Point::from_vec(vec![lower[0] + h * i as f64, y]);
                if !region.contains_unchecked(&node, 0.0) {
                    continue;
                }
                let f = instance.value(&node);
                if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
                    best = Some((node, f));
                }
            }
            best
        })
        .collect();
    rows.into_iter().flatten().fold(None, |acc, cand| match acc {
        Some((_, bf)) if bf <= cand.1 => acc,
        _ => Some(cand),
    })
}

/// Dense grid search followed by `refinement_rounds` tenfold refinements
/// around the incumbent. Only nodes satisfying every constraint exactly are
/// considered, so the result is feasible and bounds the minimum from above.
pub fn grid_oracle(
    instance: &WeberInstance,
    region: &ConvexRegion,
    spec: &GridSpec,
) -> Result<(Point, f64)> {
    if instance.dimension() != 2 || region.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: instance.dimension(),
        });
    }
    spec.validate()?;
    let (mut best, mut best_f) = scan(instance, region, spec.lower, spec.upper, spec.resolution)
        .ok_or(Error::NoFeasibleGridNode)?;
    let mut h = spec.resolution;
    for _ in 0..spec.refinement_rounds {
        let half = REFINE_HALF_WIDTH * h;
        h /= 10.0;
        let lower = [best[0] - half, best[1] - half];
        let upper = [best[0] + half, best[1] + half];
        if let Some((p, f)) = scan(instance, region, lower, upper, h) {
            if f < best_f {
                best = p;
                best_f = f;
            }
        }
    }
    Ok((best, best_f))
}

/// Step-size schedule for [`projected_subgradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `t_l = scale / sqrt(l)`.
    InverseSqrt { scale: f64 },
    Constant(f64),
}

impl StepRule {
    /// `InverseSqrt` with the instance diameter as scale.
    pub fn default_for(instance: &WeberInstance) -> Self {
        StepRule::InverseSqrt {
            scale: instance.diameter(),
        }
    }

    fn step(&self, l: usize) -> f64 {
        match *self {
            StepRule::InverseSqrt { scale } => scale / (l as f64).sqrt(),
            StepRule::Constant(t) => t,
        }
    }
}

/// Projected subgradient method from the solver's starting point.
///
/// The subgradient is `-R~(x)` (at a vertex this picks the zero element of
/// the unit-ball term). Steps move `t_l` along the normalized subgradient.
/// Returns the best iterate seen, including the start.
pub fn projected_subgradient(
    instance: &WeberInstance,
    region: &ConvexRegion,
    steps: usize,
    rule: StepRule,
) -> Result<(Point, f64)> {
    let x0 = initial_point(instance, region)?;
    projected_subgradient_from(instance, region, x0, steps, rule).map(|run| (run.best, run.best_objective))
}

/// Best-iterate history of a subgradient run.
#[derive(Debug, Clone)]
pub struct SubgradientRun {
    pub best: Point,
    pub best_objective: f64,
    /// Best objective after each step (index 0 is the start).
    pub best_history: Vec<f64>,
}

pub fn projected_subgradient_from(
    instance: &WeberInstance,
    region: &ConvexRegion,
    x0: Point,
    steps: usize,
    rule: StepRule,
) -> Result<SubgradientRun> {
    if steps == 0 {
        return Err(Error::InvalidConfig("steps must be at least 1".into()));
    }
    let mut x = x0;
    let mut best = x.clone();
    let mut best_objective = instance.value(&x);
    let mut best_history = Vec::with_capacity(steps + 1);
    best_history.push(best_objective);
    for l in 1..=steps {
        let descent = instance.r_tilde(&x);
        let norm = descent.norm();
        if norm == 0.0 {
            best_history.push(best_objective);
            continue;
        }
        x = region.project(&(&x + descent * (rule.step(l) / norm)))?;
        let f = instance.value(&x);
        if f < best_objective {
            best_objective = f;
            best = x.clone();
        }
        best_history.push(best_objective);
    }
    Ok(SubgradientRun {
        best,
        best_objective,
        best_history,
    })
}
