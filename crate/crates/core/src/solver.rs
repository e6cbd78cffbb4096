//! The constrained iteration map `Q` and the fixed-point loop built on it.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexRegion, FEASIBILITY_TOL};
use crate::weber::{VertexId, WeberInstance};
use crate::{Error, Point, Result};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Stop once `|x_l - x_{l-1}| < epsilon`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Vertex snap radius; `None` uses the instance default.
    pub snap_tol: Option<f64>,
    pub feasibility_tol: f64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            max_iterations: 100_000,
            snap_tol: None,
            feasibility_tol: FEASIBILITY_TOL,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.feasibility_tol >= 0.0) {
            return Err(Error::InvalidConfig("feasibility_tol must be nonnegative".into()));
        }
        if let Some(s) = self.snap_tol {
            if !(s >= 0.0) {
                return Err(Error::InvalidConfig("snap_tol must be nonnegative".into()));
            }
        }
        Ok(())
    }

    fn snap(&self, instance: &WeberInstance) -> f64 {
        self.snap_tol.unwrap_or_else(|| instance.default_snap_tol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterationsReached,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "Converged",
            Status::MaxIterationsReached => "MaxIterationsReached",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub iterate: Point,
    pub objective: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: Point,
    pub objective: f64,
    pub iterations: usize,
    pub status: Status,
    pub kkt_residual: f64,
    /// Starts with the initial point (iteration 0, step 0).
    pub trace: Option<Vec<TraceEntry>>,
}

/// Result of [`vertex_descent_check`].
#[derive(Debug, Clone, Copy)]
pub struct VertexDescent {
    /// `G'(0+) = w_k |Q - a^k| - <R~(a^k), Q - a^k>`.
    pub derivative: f64,
    /// `-2 (1 - beta) A |T~ - a^k| |Q - a^k|`, defined when `T(a^k)` is infeasible.
    pub closed_form: Option<f64>,
    pub is_descent: bool,
}

/// One application of `Q` with an explicit snap radius.
pub fn q_step_with(
    instance: &WeberInstance,
    region: &ConvexRegion,
    x: &Point,
    config: &SolverConfig,
) -> Result<Point> {
    if x.len() != region.dimension() || x.len() != instance.dimension() {
        return Err(Error::DimensionMismatch {
            expected: region.dimension(),
            got: x.len(),
        });
    }
    if !region.contains_unchecked(x, config.feasibility_tol) {
        return Err(Error::Infeasible {
            violation: region.max_violation(x)?,
        });
    }
    let terms = instance.terms_with_snap(x, config.snap(instance));
    match terms.vertex {
        None => region.project(&terms.t_modified),
        Some(k) => {
            let a = instance.vertex(k);
            let lambda = region.segment_infimum(&terms.t_modified, a)?;
            Ok(&terms.t_modified * (1.0 - lambda) + a * lambda)
        }
    }
}

/// `Q(x)`: the projected modified step off the vertices, the farthest
/// feasible point of `[a^k, T(a^k)]` at a feasible vertex.
pub fn q_step(instance: &WeberInstance, region: &ConvexRegion, x: &Point) -> Result<Point> {
    q_step_with(instance, region, x, &SolverConfig::default())
}

/// Best feasible vertex (lowest index on ties, with objectives within
/// `1e-12` relative counted as tied), else the projection of the origin.
pub fn initial_point(instance: &WeberInstance, region: &ConvexRegion) -> Result<Point> {
    initial_point_with(instance, region, FEASIBILITY_TOL)
}

fn initial_point_with(
    instance: &WeberInstance,
    region: &ConvexRegion,
    feasibility_tol: f64,
) -> Result<Point> {
    let mut best: Option<(f64, &Point)> = None;
    for a in instance.vertices() {
        if region.contains(a, feasibility_tol)? {
            let f = instance.value(a);
            if best.is_none_or(|(bf, _)| f < bf - 1e-12 * (1.0 + bf.abs())) {
                best = Some((f, a));
            }
        }
    }
    match best {
        Some((_, a)) => Ok(a.clone()),
        None => region.project(&Point::zeros(region.dimension())),
    }
}

/// Runs `x_l = Q(x_{l-1})` from [`initial_point`] until the step norm drops
/// below `epsilon` or the iteration cap is hit.
pub fn solve(
    instance: &WeberInstance,
    region: &ConvexRegion,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    if instance.dimension() != region.dimension() {
        return Err(Error::DimensionMismatch {
            expected: region.dimension(),
            got: instance.dimension(),
        });
    }
    let x0 = initial_point_with(instance, region, config.feasibility_tol)?;
    solve_from(instance, region, config, x0)
}

/// [`solve`] from a caller-supplied feasible starting point.
pub fn solve_from(
    instance: &WeberInstance,
    region: &ConvexRegion,
    config: &SolverConfig,
    x0: Point,
) -> Result<SolveResult> {
    config.validate()?;
    let snap = config.snap(instance);
    let mut x = x0;
    let mut objective = instance.value(&x);
    let mut trace = config.record_trace.then(|| {
        vec![TraceEntry {
            iteration: 0,
            iterate: x.clone(),
            objective,
            step_norm: 0.0,
        }]
    });
    let mut status = Status::MaxIterationsReached;
    let mut iterations = 0;
    for l in 1..=config.max_iterations {
        if let Some(k) = instance.vertex_index(&x, snap) {
            x = instance.vertex(k).clone();
        }
        let next = q_step_with(instance, region, &x, config)?;
        let step = (&next - &x).norm();
        x = next;
        objective = instance.value(&x);
        iterations = l;
        if let Some(t) = trace.as_mut() {
            t.push(TraceEntry {
                iteration: l,
                iterate: x.clone(),
                objective,
                step_norm: step,
            });
        }
        if step < config.epsilon {
            status = Status::Converged;
            break;
        }
    }
    let kkt_residual = kkt_residual_with(instance, region, &x, snap)?;
    Ok(SolveResult {
        solution: x,
        objective,
        iterations,
        status,
        kkt_residual,
        trace,
    })
}

/// Optimality residual at a feasible point.
///
/// Off the vertices this is the projected-gradient residual
/// `|x - P(x + R~(x))|`. At a vertex `a^k`, where `f` is not differentiable,
/// it is `max(0, -min_d G'_d(0+))` over unit feasible directions `d`
/// sampled from `Q(a^k)` and from projections of a ring of nearby points.
pub fn kkt_residual(instance: &WeberInstance, region: &ConvexRegion, x: &Point) -> Result<f64> {
    kkt_residual_with(instance, region, x, instance.default_snap_tol())
}

fn kkt_residual_with(
    instance: &WeberInstance,
    region: &ConvexRegion,
    x: &Point,
    snap: f64,
) -> Result<f64> {
    let terms = instance.terms_with_snap(x, snap);
    let Some(k) = terms.vertex else {
        let stepped = region.project(&(x + &terms.r_tilde))?;
        return Ok((x - stepped).norm());
    };
    let a = instance.vertex(k);
    let wk = instance.weights()[k.0];
    let radius = 1e-3 * (1.0 + instance.diameter());
    let mut targets = Vec::new();
    if let Ok(q) = q_step_with(
        instance,
        region,
        a,
        &SolverConfig {
            snap_tol: Some(snap),
            ..SolverConfig::default()
        },
    ) {
        targets.push(q);
    }
    let n = a.len();
    let mut directions: Vec<Point> = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = Point::zeros(n);
            e[i] = sign;
            directions.push(e);
        }
    }
    if terms.r_norm > 0.0 {
        directions.push(&terms.r_tilde / terms.r_norm);
    }
    for step in 0..32 {
        let angle = std::f64::consts::TAU * step as f64 / 32.0;
        let mut d = Point::zeros(n);
        d[0] = angle.cos();
        d[1] = angle.sin();
        directions.push(d);
    }
    for d in directions {
        targets.push(region.project(&(a + d * radius))?);
    }
    let mut worst: f64 = 0.0;
    for z in targets {
        let d = z - a;
        let len = d.norm();
        if len <= 1e-12 * radius {
            continue;
        }
        let unit = d / len;
        let derivative = wk - terms.r_tilde.dot(&unit);
        worst = worst.max(-derivative);
    }
    Ok(worst)
}

/// One-sided derivative of `f` at the feasible vertex `a^k` along `Q(a^k)`.
pub fn vertex_descent_check(
    instance: &WeberInstance,
    region: &ConvexRegion,
    k: VertexId,
) -> Result<VertexDescent> {
    if k.0 >= instance.len() {
        return Err(Error::VertexOutOfRange {
            index: k.0,
            count: instance.len(),
        });
    }
    let a = instance.vertex(k);
    if !region.contains(a, FEASIBILITY_TOL)? {
        return Err(Error::Infeasible {
            violation: region.max_violation(a)?,
        });
    }
    let terms = instance.terms(a);
    let q = q_step(instance, region, a)?;
    let d = &q - a;
    let wk = instance.weights()[k.0];
    let derivative = wk * d.norm() - terms.r_tilde.dot(&d);
    let closed_form = (!region.contains(&terms.t_modified, FEASIBILITY_TOL)?).then(|| {
        -2.0 * (1.0 - terms.beta)
            * terms.weight_sum
            * (&terms.t_tilde - a).norm()
            * d.norm()
    });
    Ok(VertexDescent {
        derivative,
        closed_form,
        is_descent: d.norm() > 0.0 && derivative < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Constraint;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    fn triangle() -> WeberInstance {
        WeberInstance::new(
            vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.5, SQRT3 / 2.0])],
            vec![1.0; 3],
        )
        .unwrap()
    }

    fn cap(c: f64) -> ConvexRegion {
        ConvexRegion::new(2, vec![Constraint::halfspace(vec![0.0, 1.0], c)]).unwrap()
    }

    #[test]
    fn q_is_t_when_t_is_feasible() {
        let tri = triangle();
        let region = ConvexRegion::unconstrained(2);
        let x = p(&[0.3, 0.3]);
        assert_eq!(q_step(&tri, &region, &x).unwrap(), tri.t_modified(&x));
        // feasible vertex with feasible T(a^k)
        let a1 = p(&[0.0, 0.0]);
        assert_eq!(q_step(&tri, &region, &a1).unwrap(), tri.t_modified(&a1));
    }

    #[test]
    fn q_at_vertex_stops_on_the_boundary() {
        let q = q_step(&triangle(), &cap(0.1), &p(&[0.0, 0.0])).unwrap();
        // the line through 0 and T(a^1) meets y = 0.1 at x = 0.1 * 0.75 / (sqrt3 / 4)
        let expected = p(&[0.3 / SQRT3, 0.1]);
        assert!((&q - &expected).norm() < 1e-11, "{q}");
        assert!((q - p(&[0.1732, 0.1])).norm() < 1e-4);
    }

    #[test]
    fn q_rejects_infeasible_points() {
        let err = q_step(&triangle(), &cap(0.1), &p(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn initial_point_rules() {
        let tri = triangle();
        // both base vertices have f = 2; the lower index wins
        assert_eq!(initial_point(&tri, &cap(0.1)).unwrap(), p(&[0.0, 0.0]));
        let all = ConvexRegion::unconstrained(2);
        assert_eq!(initial_point(&tri, &all).unwrap(), p(&[0.0, 0.0]));
        let far = ConvexRegion::new(
            2,
            vec![
                Constraint::halfspace(vec![-1.0, 0.0], -5.0),
                Constraint::boxed(vec![-10.0, -10.0], vec![10.0, 10.0]),
            ],
        )
        .unwrap();
        let x0 = initial_point(&tri, &far).unwrap();
        assert!((x0 - p(&[5.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn initial_point_picks_the_cheapest_feasible_vertex() {
        let inst = WeberInstance::new(
            vec![p(&[0.0, 0.0]), p(&[4.0, 0.0]), p(&[0.0, 3.0]), p(&[1.0, 1.0])],
            vec![1.0; 4],
        )
        .unwrap();
        let all = ConvexRegion::unconstrained(2);
        assert_eq!(initial_point(&inst, &all).unwrap(), p(&[1.0, 1.0]));
    }

    #[test]
    fn solve_records_a_monotone_trace() {
        let tri = triangle();
        let config = SolverConfig {
            record_trace: true,
            ..SolverConfig::with_epsilon(1e-10)
        };
        let result = solve(&tri, &cap(0.1), &config).unwrap();
        assert_eq!(result.status, Status::Converged);
        let trace = result.trace.unwrap();
        assert_eq!(trace.len(), result.iterations + 1);
        for w in trace.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12 * (1.0 + w[0].objective));
        }
        assert!((result.solution[1] - 0.1).abs() < 1e-9);
        assert!(result.kkt_residual < 1e-8);
    }

    #[test]
    fn max_iterations_status() {
        let config = SolverConfig {
            max_iterations: 2,
            ..SolverConfig::with_epsilon(1e-14)
        };
        let result = solve(&triangle(), &cap(0.1), &config).unwrap();
        assert_eq!(result.status, Status::MaxIterationsReached);
        assert_eq!(result.iterations, 2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let region = cap(0.1);
        let bad_eps = SolverConfig::with_epsilon(0.0);
        assert!(matches!(
            solve(&triangle(), &region, &bad_eps),
            Err(Error::InvalidConfig(_))
        ));
        let bad_cap = SolverConfig {
            max_iterations: 0,
            ..SolverConfig::default()
        };
        assert!(solve(&triangle(), &region, &bad_cap).is_err());
    }

    #[test]
    fn vertex_descent_closed_form_on_the_capped_triangle() {
        let tri = triangle();
        let region = cap(0.1);
        let check = vertex_descent_check(&tri, &region, VertexId(0)).unwrap();
        let beta = 1.0 / SQRT3;
        let t_tilde_dist = p(&[0.75, SQRT3 / 4.0]).norm();
        let q_dist = p(&[0.3 / SQRT3, 0.1]).norm();
        let expected = -2.0 * (1.0 - beta) * 1.0 * t_tilde_dist * q_dist;
        assert!(check.is_descent);
        assert!((check.derivative - expected).abs() < 1e-10);
        assert!((check.closed_form.unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn vertex_descent_zero_direction() {
        let dominant = WeberInstance::new(
            vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.5, SQRT3 / 2.0])],
            vec![10.0, 1.0, 1.0],
        )
        .unwrap();
        let check =
            vertex_descent_check(&dominant, &ConvexRegion::unconstrained(2), VertexId(0)).unwrap();
        assert_eq!(check.derivative, 0.0);
        assert!(!check.is_descent);
        assert!(matches!(
            vertex_descent_check(&dominant, &cap(0.1), VertexId(7)),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            vertex_descent_check(&dominant, &cap(0.1), VertexId(2)),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn vertex_residual_vanishes_at_an_optimal_vertex() {
        let dominant = WeberInstance::new(
            vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.5, SQRT3 / 2.0])],
            vec![10.0, 1.0, 1.0],
        )
        .unwrap();
        let region = ConvexRegion::unconstrained(2);
        assert_eq!(kkt_residual(&dominant, &region, &p(&[0.0, 0.0])).unwrap(), 0.0);
        // a non-optimal vertex has a descent direction
        assert!(kkt_residual(&triangle(), &region, &p(&[0.0, 0.0])).unwrap() > 0.1);
    }
}
