//! The Weber objective and the vertex-aware Weiszfeld maps.
//!
//! Every map has two branches: the usual formula away from the vertices, and
//! at a vertex `a^k` the same sums with the `j = k` term dropped. A point is
//! treated as the vertex `a^k` when it lies within the snap radius of it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::numeric::{CompensatedSum, CompensatedVecSum};
use crate::{Error, Point, Result};

/// Zero-based index of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Vertices and positive weights of a Weber problem.
#[derive(Debug, Clone)]
pub struct WeberInstance {
    vertices: Vec<Point>,
    weights: Vec<f64>,
    min_separation: f64,
    diameter: f64,
}

/// JSON form: `{"vertices": [[...], ...], "weights": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub vertices: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Every quantity of the modified iteration at one point.
#[derive(Debug, Clone)]
pub struct IterationTerms {
    /// The vertex the point was snapped to, if any.
    pub vertex: Option<VertexId>,
    /// The point the formulas were evaluated at (`a^k` when snapped).
    pub point: Point,
    /// Half the inverse-distance weight sum, `A`.
    pub weight_sum: f64,
    /// Weighted average map `T~`.
    pub t_tilde: Point,
    /// Generalized negative gradient `R~`.
    pub r_tilde: Point,
    /// `r = |R~|`.
    pub r_norm: f64,
    pub gamma: f64,
    pub beta: f64,
    /// Modified map `T = (1 - beta) T~ + beta x`.
    pub t_modified: Point,
}

impl WeberInstance {
    /// Validates and builds an instance: at least three pairwise distinct,
    /// non-collinear vertices of a common dimension, and positive weights.
    pub fn new(vertices: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::InvalidInstance(format!(
                "at least 3 vertices are required, got {m}"
            )));
        }
        if weights.len() != m {
            return Err(Error::InvalidInstance(format!(
                "{} weights for {m} vertices",
                weights.len()
            )));
        }
        let n = vertices[0].len();
        if n < 2 {
            return Err(Error::InvalidInstance(
                "vertices must have dimension at least 2".into(),
            ));
        }
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != n {
                return Err(Error::InvalidVertex {
                    index,
                    reason: format!("dimension {} differs from {n}", v.len()),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidVertex {
                    index,
                    reason: "non-finite coordinate".into(),
                });
            }
        }
        for (index, w) in weights.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidWeight {
                    index,
                    reason: format!("weight must be positive and finite, got {w}"),
                });
            }
        }
        let mut min_separation = f64::INFINITY;
        let mut diameter: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let d = (&vertices[i] - &vertices[j]).norm();
                if d == 0.0 {
                    return Err(Error::InvalidVertex {
                        index: j,
                        reason: format!("duplicates vertex {i}"),
                    });
                }
                min_separation = min_separation.min(d);
                diameter = diameter.max(d);
            }
        }
        // affine dimension >= 2 via the singular values of the centered matrix
        let centroid = vertices.iter().fold(Point::zeros(n), |acc, v| acc + v) / m as f64;
        let centered = DMatrix::from_fn(m, n, |i, j| vertices[i][j] - centroid[j]);
        let mut sv: Vec<f64> = centered.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        if sv.len() < 2 || sv[1] <= 1e-10 * sv[0] {
            return Err(Error::InvalidInstance("vertices are collinear".into()));
        }
        Ok(Self {
            vertices,
            weights,
            min_separation,
            diameter,
        })
    }

    pub fn from_spec(spec: &InstanceSpec) -> Result<Self> {
        Self::new(
            spec.vertices.iter().map(|v| Point::from_row_slice(v)).collect(),
            spec.weights.clone(),
        )
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().copied().collect())
                .collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_spec())?)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, k: VertexId) -> &Point {
        &self.vertices[k.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vertices[0].len()
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest pairwise vertex distance.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Sum of all weights, a Lipschitz constant of the objective.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }

    /// Default snap radius `1e-12 (1 + diameter)`.
    pub fn default_snap_tol(&self) -> f64 {
        1e-12 * (1.0 + self.diameter)
    }

    /// Index of the vertex within `snap_tol` of `x`, if any.
    pub fn vertex_index(&self, x: &Point, snap_tol: f64) -> Option<VertexId> {
        self.vertices
            .iter()
            .position(|a| (x - a).norm() <= snap_tol)
            .map(VertexId)
    }

    fn check_dim(&self, x: &Point) {
        assert_eq!(
            x.len(),
            self.dimension(),
            "point dimension does not match the instance"
        );
    }

    /// `f(x) = sum_j w_j |x - a^j|`.
    pub fn value(&self, x: &Point) -> f64 {
        self.check_dim(x);
        self.vertices
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * (x - a).norm())
            .collect::<CompensatedSum>()
            .value()
    }

    /// Evaluates `A`, `T~`, `R~`, `r`, `gamma`, `beta` and `T` at `x`,
    /// snapping to a vertex within `snap_tol`.
    pub fn terms_with_snap(&self, x: &Point, snap_tol: f64) -> IterationTerms {
        self.check_dim(x);
        let vertex = self.vertex_index(x, snap_tol);
        let point = match vertex {
            Some(k) => self.vertices[k.0].clone(),
            None => x.clone(),
        };
        let n = self.dimension();
        let mut inv_sum = CompensatedSum::new();
        let mut weighted = CompensatedVecSum::zeros(n);
        let mut r_tilde = CompensatedVecSum::zeros(n);
        for (j, (a, w)) in self.vertices.iter().zip(&self.weights).enumerate() {
            if vertex == Some(VertexId(j)) {
                continue;
            }
            let diff = a - &point;
            let dist = diff.norm();
            let c = w / dist;
            inv_sum.add(c);
            weighted.add_scaled(c, a);
            r_tilde.add_scaled(c, &diff);
        }
        let two_a = inv_sum.value();
        let weight_sum = 0.5 * two_a;
        let t_tilde = weighted.value() / two_a;
        let r_tilde = r_tilde.value();
        let r_norm = r_tilde.norm();
        let gamma = match vertex {
            Some(k) if r_norm != 0.0 => self.weights[k.0] / r_norm,
            _ => 0.0,
        };
        let beta = gamma.min(1.0);
        let t_modified = &t_tilde * (1.0 - beta) + &point * beta;
        IterationTerms {
            vertex,
            point,
            weight_sum,
            t_tilde,
            r_tilde,
            r_norm,
            gamma,
            beta,
            t_modified,
        }
    }

    /// [`terms_with_snap`](Self::terms_with_snap) with the default snap radius.
    pub fn terms(&self, x: &Point) -> IterationTerms {
        self.terms_with_snap(x, self.default_snap_tol())
    }

    /// `A(x)`, half the inverse-distance weight sum.
    pub fn weight_sum(&self, x: &Point) -> f64 {
        self.terms(x).weight_sum
    }

    pub fn t_tilde(&self, x: &Point) -> Point {
        self.terms(x).t_tilde
    }

    /// `R~(x)`; equals `-grad f(x)` away from the vertices.
    pub fn r_tilde(&self, x: &Point) -> Point {
        self.terms(x).r_tilde
    }

    /// `(gamma(x), beta(x))`.
    pub fn gamma_beta(&self, x: &Point) -> (f64, f64) {
        let t = self.terms(x);
        (t.gamma, t.beta)
    }

    /// The modified Weiszfeld map `T`.
    pub fn t_modified(&self, x: &Point) -> Point {
        self.terms(x).t_modified
    }

    /// `eta(x)`: `w_k` at the vertex `a^k`, zero elsewhere.
    pub fn eta(&self, x: &Point) -> f64 {
        match self.vertex_index(x, self.default_snap_tol()) {
            Some(k) => self.weights[k.0],
            None => 0.0,
        }
    }

    /// Unconstrained optimality test `r(x) <= eta(x) + tol`.
    pub fn is_unconstrained_optimal(&self, x: &Point, tol: f64) -> bool {
        let t = self.terms(x);
        let eta = t.vertex.map_or(0.0, |k| self.weights[k.0]);
        t.r_norm <= eta + tol
    }

    /// Radius of a ball around the origin containing the sublevel set
    /// `{f <= level}`: `f(x) >= W |x| - sum_j w_j |a^j|`.
    pub fn sublevel_radius(&self, level: f64) -> f64 {
        let anchor: f64 = self
            .vertices
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a.norm())
            .collect::<CompensatedSum>()
            .value();
        (level + anchor) / self.total_weight()
    }

    /// Runs the modified Weiszfeld map `T` without constraints from the best
    /// vertex until the step is below `tol`.
    pub fn unconstrained_optimum(&self, tol: f64, max_iterations: usize) -> (Point, usize) {
        let best = (0..self.len())
            .min_by(|&i, &j| {
                self.value(&self.vertices[i])
                    .total_cmp(&self.value(&self.vertices[j]))
            })
            .unwrap_or(0);
        let mut x = self.vertices[best].clone();
        for iteration in 1..=max_iterations {
            let next = self.t_modified(&x);
            let step = (&next - &x).norm();
            x = next;
            if step < tol {
                return (x, iteration);
            }
        }
        (x, max_iterations)
    }
}
