//! Closed convex regions given as intersections of primitive constraints.
//!
//! Each primitive has an exact projection except smooth inequalities, which
//! are projected by solving the stationarity system `z = x - mu * grad g(z)`,
//! `g(z) = 0` for the multiplier. Intersections are projected with Dykstra's
//! algorithm, which (unlike plain cyclic projection) converges to the
//! orthogonal projection onto the intersection. Planar intersections and
//! planar `poly2d` regions are instead projected exactly by enumerating
//! boundary candidates: Dykstra needs every primitive set to be convex and
//! its stopping rule leaves errors of order 1e-9 at corners.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::planar::PlanarBoundary;
use crate::{Error, Point, Result};

/// Default absolute slack accepted by membership tests.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Absolute tolerance of the bisection in [`ConvexRegion::segment_infimum`].
pub const SEGMENT_TOL: f64 = 1e-12;
/// Sweep cap for Dykstra's algorithm.
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;
/// Dykstra stops once a full sweep moves the iterate less than this.
pub const DYKSTRA_TOL: f64 = 1e-10;

/// A continuously differentiable convex inequality `value(y) <= 0`.
///
/// Convexity is the caller's responsibility; [`midpoint_convexity_violations`]
/// can spot-check it on a window.
pub trait SmoothInequality: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;

    fn value(&self, y: &Point) -> f64;

    fn gradient(&self, y: &Point) -> Point;

    /// Hessian of `value`. The default differentiates `gradient` with central
    /// differences.
    fn hessian(&self, y: &Point) -> DMatrix<f64> {
        let n = self.dimension();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let step = 1e-6 * (1.0 + y[i].abs());
            let mut plus = y.clone();
            let mut minus = y.clone();
            plus[i] += step;
            minus[i] -= step;
            let column = (self.gradient(&plus) - self.gradient(&minus)) / (2.0 * step);
            h.set_column(i, &column);
        }
        // symmetrize
        (&h + h.transpose()) * 0.5
    }

    /// JSON description, when the constraint has one.
    fn to_spec(&self) -> Option<ConstraintSpec> {
        None
    }
}

/// Planar constraint `sign_y * y + c0 + c1 x + c2 x^2 + c3 x^3 <= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2d {
    pub coeffs_x: [f64; 4],
    pub sign_y: f64,
    pub offset: f64,
}

impl Poly2d {
    pub fn new(coeffs_x: [f64; 4], sign_y: f64, offset: f64) -> Result<Self> {
        if sign_y != 1.0 && sign_y != -1.0 {
            return Err(Error::InvalidConstraint {
                index: 0,
                reason: format!("sign_y must be +1 or -1, got {sign_y}"),
            });
        }
        if coeffs_x.iter().any(|c| !c.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidConstraint {
                index: 0,
                reason: "non-finite coefficient".into(),
            });
        }
        Ok(Self {
            coeffs_x,
            sign_y,
            offset,
        })
    }

    fn poly(&self, x: f64) -> (f64, f64, f64) {
        let [c0, c1, c2, c3] = self.coeffs_x;
        let p = ((c3 * x + c2) * x + c1) * x + c0;
        let dp = (3.0 * c3 * x + 2.0 * c2) * x + c1;
        let ddp = 6.0 * c3 * x + 2.0 * c2;
        (p, dp, ddp)
    }
}

impl SmoothInequality for Poly2d {
    fn dimension(&self) -> usize {
        2
    }

    fn value(&self, y: &Point) -> f64 {
        self.sign_y * y[1] + self.poly(y[0]).0 - self.offset
    }

    fn gradient(&self, y: &Point) -> Point {
        Point::from_vec(vec![self.poly(y[0]).1, self.sign_y])
    }

    fn hessian(&self, y: &Point) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.poly(y[0]).2, 0.0, 0.0, 0.0])
    }

    fn to_spec(&self) -> Option<ConstraintSpec> {
        Some(ConstraintSpec::Poly2d {
            coeffs_x: self.coeffs_x.to_vec(),
            sign_y: self.sign_y,
            offset: self.offset,
        })
    }
}

type ScalarFn = dyn Fn(&Point) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&Point) -> Point + Send + Sync;

/// Smooth inequality given by a value closure and a gradient closure.
#[derive(Clone)]
pub struct ClosureInequality {
    dimension: usize,
    value: Arc<ScalarFn>,
    gradient: Arc<VectorFn>,
}

impl ClosureInequality {
    pub fn new(
        dimension: usize,
        value: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        Self {
            dimension,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl fmt::Debug for ClosureInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureInequality")
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

impl SmoothInequality for ClosureInequality {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, y: &Point) -> f64 {
        (self.value)(y)
    }

    fn gradient(&self, y: &Point) -> Point {
        (self.gradient)(y)
    }
}

/// One primitive constraint set.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `<normal, y> <= offset`
    Halfspace { normal: Point, offset: f64 },
    Ball { center: Point, radius: f64 },
    Box { lower: Point, upper: Point },
    /// `<normal, y> = offset`
    AffineEquality { normal: Point, offset: f64 },
    Smooth(Arc<dyn SmoothInequality>),
}

impl Constraint {
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Self {
        Constraint::Halfspace {
            normal: Point::from_vec(normal),
            offset,
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Constraint::Ball {
            center: Point::from_vec(center),
            radius,
        }
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Constraint::Box {
            lower: Point::from_vec(lower),
            upper: Point::from_vec(upper),
        }
    }

    pub fn affine_equality(normal: Vec<f64>, offset: f64) -> Self {
        Constraint::AffineEquality {
            normal: Point::from_vec(normal),
            offset,
        }
    }

    pub fn smooth(inequality: impl SmoothInequality + 'static) -> Self {
        Constraint::Smooth(Arc::new(inequality))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Constraint::Halfspace { normal, .. } | Constraint::AffineEquality { normal, .. } => {
                normal.len()
            }
            Constraint::Ball { center, .. } => center.len(),
            Constraint::Box { lower, .. } => lower.len(),
            Constraint::Smooth(s) => s.dimension(),
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let invalid = |reason: &str| {
            Err(Error::InvalidConstraint {
                index,
                reason: reason.to_string(),
            })
        };
        match self {
            Constraint::Halfspace { normal, offset }
            | Constraint::AffineEquality { normal, offset } => {
                if normal.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
                    return invalid("non-finite normal or offset");
                }
                if normal.norm() == 0.0 {
                    return invalid("normal must be nonzero");
                }
            }
            Constraint::Ball { center, radius } => {
                if center.iter().any(|v| !v.is_finite()) {
                    return invalid("non-finite center");
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid("radius must be positive");
                }
            }
            Constraint::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return invalid("lower and upper bounds differ in length");
                }
                if lower.iter().chain(upper.iter()).any(|v| v.is_nan()) {
                    return invalid("NaN bound");
                }
                if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
                    return invalid("lower bound exceeds upper bound");
                }
            }
            Constraint::Smooth(_) => {}
        }
        Ok(())
    }

    /// Signed constraint function: `<= 0` exactly on the set (for equalities,
    /// the absolute residual).
    pub fn value(&self, y: &Point) -> f64 {
        match self {
            Constraint::Halfspace { normal, offset } => normal.dot(y) - offset,
            Constraint::Ball { center, radius } => (y - center).norm() - radius,
            Constraint::Box { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(v, (l, u))| (v - u).max(l - v))
                .fold(f64::NEG_INFINITY, f64::max),
            Constraint::AffineEquality { normal, offset } => (normal.dot(y) - offset).abs(),
            Constraint::Smooth(s) => s.value(y),
        }
    }

    /// Euclidean projection onto this primitive alone.
    pub fn project(&self, y: &Point) -> Result<Point> {
        Ok(match self {
            Constraint::Halfspace { normal, offset } => {
                let excess = normal.dot(y) - offset;
                if excess <= 0.0 {
                    y.clone()
                } else {
                    y - normal * (excess / normal.norm_squared())
                }
            }
            Constraint::Ball { center, radius } => {
                let d = y - center;
                let dist = d.norm();
                if dist <= *radius {
                    y.clone()
                } else {
                    center + d * (*radius / dist)
                }
            }
            Constraint::Box { lower, upper } => Point::from_iterator(
                y.len(),
                y.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.clamp(*l, *u)),
            ),
            Constraint::AffineEquality { normal, offset } => {
                let excess = normal.dot(y) - offset;
                y - normal * (excess / normal.norm_squared())
            }
            Constraint::Smooth(s) => project_sublevel(s.as_ref(), y)?,
        })
    }

    pub fn to_spec(&self) -> Result<ConstraintSpec> {
        Ok(match self {
            Constraint::Halfspace { normal, offset } => ConstraintSpec::Halfspace {
                normal: normal.iter().copied().collect(),
                offset: *offset,
            },
            Constraint::Ball { center, radius } => ConstraintSpec::Ball {
                center: center.iter().copied().collect(),
                radius: *radius,
            },
            Constraint::Box { lower, upper } => ConstraintSpec::Box {
                lower: lower.iter().copied().collect(),
                upper: upper.iter().copied().collect(),
            },
            Constraint::AffineEquality { normal, offset } => ConstraintSpec::AffineEquality {
                normal: normal.iter().copied().collect(),
                offset: *offset,
            },
            Constraint::Smooth(s) => s
                .to_spec()
                .ok_or_else(|| Error::NotSerializable(format!("{s:?}")))?,
        })
    }
}

/// Minimizes `0.5 |z - x|^2 + mu g(z)` by damped Newton, starting at `warm`.
fn penalized_minimizer(s: &dyn SmoothInequality, x: &Point, mu: f64, warm: &Point) -> Point {
    let n = x.len();
    let merit = |z: &Point| 0.5 * (z - x).norm_squared() + mu * s.value(z);
    let mut z = warm.clone();
    for _ in 0..200 {
        let grad = (&z - x) + s.gradient(&z) * mu;
        if grad.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
        let hess = DMatrix::identity(n, n) + s.hessian(&z) * mu;
        let mut dir = match hess.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let mut slope = grad.dot(&dir);
        if !(slope < 0.0) {
            dir = -grad.clone();
            slope = -grad.norm_squared();
        }
        let m0 = merit(&z);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-14 {
            let trial = &z + &dir * t;
            if merit(&trial) <= m0 + 1e-4 * t * slope {
                accepted = true;
                let moved = (&trial - &z).norm();
                z = trial;
                if moved <= 1e-16 * (1.0 + z.norm()) {
                    return z;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    z
}

/// Projection onto `{y : s(y) <= 0}` through the multiplier equation
/// `s(z(mu)) = 0`, `z(mu) = argmin 0.5 |z - x|^2 + mu s(z)`.
///
/// The multiplier is bracketed by doubling and then refined with safeguarded
/// Newton steps (bisection whenever Newton leaves the bracket).
fn project_sublevel(s: &dyn SmoothInequality, x: &Point) -> Result<Point> {
    if s.value(x) <= 0.0 {
        return Ok(x.clone());
    }
    let n = x.len();
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut z_hi = penalized_minimizer(s, x, hi, x);
    let mut doublings = 0;
    while s.value(&z_hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        z_hi = penalized_minimizer(s, x, hi, &z_hi);
        doublings += 1;
        if doublings > 200 {
            return Err(Error::ProjectionFailed {
                sweeps: doublings,
                displacement: f64::NAN,
                violation: s.value(&z_hi),
            });
        }
    }
    let mut mu = hi;
    let mut z = z_hi.clone();
    for _ in 0..300 {
        let g = s.value(&z);
        let grad = s.gradient(&z);
        if g.abs() <= 1e-14 * (1.0 + grad.norm() * (1.0 + z.norm())) {
            return Ok(z);
        }
        if g > 0.0 {
            lo = mu;
        } else {
            hi = mu;
            z_hi = z.clone();
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
        let hess = DMatrix::identity(n, n) + s.hessian(&z) * mu;
        let derivative = hess.cholesky().map(|ch| -grad.dot(&ch.solve(&grad)));
        let mut next = match derivative {
            Some(d) if d < 0.0 => mu - g / d,
            _ => f64::NAN,
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        mu = next;
        z = penalized_minimizer(s, x, mu, &z);
    }
    // feasible end of the final bracket
    Ok(z_hi)
}

/// A nonempty closed convex set given as an intersection of primitives.
#[derive(Clone, Debug)]
pub struct ConvexRegion {
    dimension: usize,
    constraints: Vec<Constraint>,
    /// Set for planar intersections and planar regions with a `poly2d`
    /// constraint.
    planar: Option<PlanarBoundary>,
}

impl ConvexRegion {
    /// Builds and validates a region. An empty constraint list is the whole
    /// space. Nonemptiness is checked by projecting the origin.
    pub fn new(dimension: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidConfig("region dimension must be positive".into()));
        }
        for (index, c) in constraints.iter().enumerate() {
            if c.dimension() != dimension {
                return Err(Error::InvalidConstraint {
                    index,
                    reason: format!(
                        "dimension {} does not match region dimension {dimension}",
                        c.dimension()
                    ),
                });
            }
            c.validate(index)?;
        }
        let has_poly = constraints
            .iter()
            .any(|c| matches!(c, Constraint::Smooth(s) if s.to_spec().is_some()));
        let planar = if dimension == 2 && (has_poly || constraints.len() > 1) {
            PlanarBoundary::from_constraints(&constraints)
        } else {
            None
        };
        let region = Self {
            dimension,
            constraints,
            planar,
        };
        let origin = Point::zeros(dimension);
        match region.project(&origin) {
            Ok(p) if region.max_violation_unchecked(&p) <= FEASIBILITY_TOL => Ok(region),
            Ok(p) => Err(Error::EmptyRegion(format!(
                "projection of the origin violates the constraints by {:e}",
                region.max_violation_unchecked(&p)
            ))),
            Err(e) => Err(Error::EmptyRegion(e.to_string())),
        }
    }

    /// The whole space `R^n`.
    pub fn unconstrained(dimension: usize) -> Self {
        Self {
            dimension,
            constraints: Vec::new(),
            planar: None,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Membership with additive slack `tol` on every constraint.
    pub fn contains(&self, p: &Point, tol: f64) -> Result<bool> {
        self.check_dim(p)?;
        Ok(self.contains_unchecked(p, tol))
    }

    pub(crate) fn contains_unchecked(&self, p: &Point, tol: f64) -> bool {
        self.constraints.iter().all(|c| c.value(p) <= tol)
    }

    /// Largest signed constraint value `max_j g_j(p)`; `-inf` without
    /// constraints.
    pub fn max_constraint_value(&self, p: &Point) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self
            .constraints
            .iter()
            .map(|c| c.value(p))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// `max(0, max_j g_j(p))`.
    pub fn max_violation(&self, p: &Point) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self.max_violation_unchecked(p))
    }

    fn max_violation_unchecked(&self, p: &Point) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(p))
            .fold(0.0, f64::max)
    }

    /// Orthogonal projection onto the region.
    pub fn project(&self, p: &Point) -> Result<Point> {
        self.check_dim(p)?;
        if self.contains_unchecked(p, 0.0) {
            return Ok(p.clone());
        }
        if let Some(boundary) = &self.planar {
            if let Some(z) = self.nearest_candidate(boundary, p) {
                return Ok(z);
            }
        }
        if self.constraints.len() == 1 {
            return self.constraints[0].project(p);
        }
        self.dykstra(p)
    }

    fn nearest_candidate(&self, boundary: &PlanarBoundary, p: &Point) -> Option<Point> {
        boundary
            .candidates([p[0], p[1]])
            .into_iter()
            .map(|z| Point::from_vec(z.to_vec()))
            .filter(|z| self.contains_unchecked(z, FEASIBILITY_TOL))
            .map(|z| ((&z - p).norm_squared(), z))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, z)| z)
    }

    fn dykstra(&self, p: &Point) -> Result<Point> {
        let mut x = p.clone();
        let mut increments = vec![Point::zeros(self.dimension); self.constraints.len()];
        let mut displacement = f64::INFINITY;
        for _ in 0..DYKSTRA_MAX_SWEEPS {
            let previous = x.clone();
            for (c, inc) in self.constraints.iter().zip(increments.iter_mut()) {
                let shifted = &x + &*inc;
                let projected = c.project(&shifted)?;
                *inc = shifted - &projected;
                x = projected;
            }
            displacement = (&x - &previous).norm();
            if displacement < DYKSTRA_TOL && self.contains_unchecked(&x, FEASIBILITY_TOL) {
                return Ok(x);
            }
        }
        Err(Error::ProjectionFailed {
            sweeps: DYKSTRA_MAX_SWEEPS,
            displacement,
            violation: self.max_violation_unchecked(&x),
        })
    }

    /// `inf { lambda in [0,1] : (1 - lambda) p + lambda q in region }` for a
    /// feasible `q`, located by bisection and rounded towards the feasible
    /// side. When `q` satisfies every constraint exactly, so does the
    /// returned point; otherwise it is feasible within the usual tolerance.
    pub fn segment_infimum(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_dim(p)?;
        self.check_dim(q)?;
        if !self.contains_unchecked(q, FEASIBILITY_TOL) {
            return Err(Error::Infeasible {
                violation: self.max_violation_unchecked(q),
            });
        }
        if self.contains_unchecked(p, FEASIBILITY_TOL) {
            return Ok(0.0);
        }
        let tol = if self.contains_unchecked(q, 0.0) {
            0.0
        } else {
            FEASIBILITY_TOL
        };
        let point = |lambda: f64| p * (1.0 - lambda) + q * lambda;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > SEGMENT_TOL {
            let mid = 0.5 * (lo + hi);
            if self.contains_unchecked(&point(mid), tol) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    pub fn to_spec(&self) -> Result<RegionSpec> {
        Ok(RegionSpec {
            dimension: self.dimension,
            constraints: self
                .constraints
                .iter()
                .map(Constraint::to_spec)
                .collect::<Result<_>>()?,
        })
    }

    pub fn from_spec(spec: &RegionSpec) -> Result<Self> {
        let constraints = spec
            .constraints
            .iter()
            .enumerate()
            .map(|(index, c)| c.build(index, spec.dimension))
            .collect::<Result<Vec<_>>>()?;
        Self::new(spec.dimension, constraints)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: RegionSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec()?)?)
    }
}

/// JSON form of a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub dimension: usize,
    pub constraints: Vec<ConstraintSpec>,
}

/// JSON form of one primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Halfspace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    AffineEquality { normal: Vec<f64>, offset: f64 },
    /// `sign_y * y + sum_i coeffs_x[i] x^i <= offset`, planar only.
    Poly2d {
        coeffs_x: Vec<f64>,
        sign_y: f64,
        offset: f64,
    },
}

impl ConstraintSpec {
    fn build(&self, index: usize, dimension: usize) -> Result<Constraint> {
        let c = match self {
            ConstraintSpec::Halfspace { normal, offset } => {
                Constraint::halfspace(normal.clone(), *offset)
            }
            ConstraintSpec::Ball { center, radius } => Constraint::ball(center.clone(), *radius),
            ConstraintSpec::Box { lower, upper } => Constraint::boxed(lower.clone(), upper.clone()),
            ConstraintSpec::AffineEquality { normal, offset } => {
                Constraint::affine_equality(normal.clone(), *offset)
            }
            ConstraintSpec::Poly2d {
                coeffs_x,
                sign_y,
                offset,
            } => {
                if dimension != 2 {
                    return Err(Error::InvalidConstraint {
                        index,
                        reason: "poly2d requires a planar region".into(),
                    });
                }
                if coeffs_x.is_empty() || coeffs_x.len() > 4 {
                    return Err(Error::InvalidConstraint {
                        index,
                        reason: format!("coeffs_x must hold 1 to 4 values, got {}", coeffs_x.len()),
                    });
                }
                let mut coeffs = [0.0; 4];
                coeffs[..coeffs_x.len()].copy_from_slice(coeffs_x);
                let poly = Poly2d::new(coeffs, *sign_y, *offset).map_err(|e| match e {
                    Error::InvalidConstraint { reason, .. } => {
                        Error::InvalidConstraint { index, reason }
                    }
                    other => other,
                })?;
                Constraint::smooth(poly)
            }
        };
        Ok(c)
    }
}

/// A sampled failure of `g((a + b) / 2) <= (g(a) + g(b)) / 2`.
#[derive(Debug, Clone)]
pub struct ConvexityViolation {
    pub a: Point,
    pub b: Point,
    /// `g(mid) - (g(a) + g(b)) / 2`, positive.
    pub gap: f64,
}

/// Samples `samples` random pairs in the box `[lower, upper]` and reports
/// every pair where `g` fails midpoint convexity by more than `tol`.
pub fn midpoint_convexity_violations(
    g: &dyn SmoothInequality,
    lower: &Point,
    upper: &Point,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Vec<ConvexityViolation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Point::from_iterator(
            lower.len(),
            lower
                .iter()
                .zip(upper.iter())
                .map(|(l, u)| l + (u - l) * rng.random::<f64>()),
        )
    };
    let mut out = Vec::new();
    for _ in 0..samples {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let mid = (&a + &b) * 0.5;
        let gap = g.value(&mid) - 0.5 * (g.value(&a) + g.value(&b));
        if gap > tol {
            out.push(ConvexityViolation { a, b, gap });
        }
    }
    out
}
