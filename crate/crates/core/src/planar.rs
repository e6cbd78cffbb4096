//! Exact projection onto planar regions bounded by lines, circles and cubic
//! graphs.
//!
//! The projection of an exterior point lies on the boundary, either at a
//! corner where two boundary curves meet or at a critical point of the
//! distance restricted to one curve. Both sets are roots of low-degree
//! polynomials, so the nearest feasible candidate is the projection. This
//! does not need the individual constraint sets to be convex, only their
//! intersection.

use nalgebra::DMatrix;

use crate::geometry::{Constraint, ConstraintSpec};

/// Polynomial coefficients, lowest degree first.
type Poly = Vec<f64>;

fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(p: &[f64]) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

fn add(p: &[f64], q: &[f64]) -> Poly {
    (0..p.len().max(q.len()))
        .map(|i| p.get(i).unwrap_or(&0.0) + q.get(i).unwrap_or(&0.0))
        .collect()
}

fn scale(p: &[f64], s: f64) -> Poly {
    p.iter().map(|c| c * s).collect()
}

fn mul(p: &[f64], q: &[f64]) -> Poly {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Real roots of `p`, plus the real parts of its complex roots; callers
/// filter candidates, so spurious values cost nothing while a missed
/// near-double root would.
fn roots(p: &[f64]) -> Vec<f64> {
    let max = p.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return Vec::new();
    }
    let degree = match p.iter().rposition(|c| c.abs() > 1e-14 * max) {
        Some(d) => d,
        None => return Vec::new(),
    };
    let p = &p[..=degree];
    let estimates: Vec<f64> = match degree {
        0 => return Vec::new(),
        1 => vec![-p[0] / p[1]],
        _ => {
            let lead = p[degree];
            let mut companion = DMatrix::<f64>::zeros(degree, degree);
            for i in 1..degree {
                companion[(i, i - 1)] = 1.0;
            }
            for i in 0..degree {
                companion[(i, degree - 1)] = -p[i] / lead;
            }
            companion
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .filter(|x| x.is_finite())
                .collect()
        }
    };
    let dp = derivative(p);
    estimates
        .into_iter()
        .map(|mut x| {
            let mut best = (eval(p, x).abs(), x);
            for _ in 0..20 {
                let slope = eval(&dp, x);
                if slope == 0.0 {
                    break;
                }
                x -= eval(p, x) / slope;
                let r = eval(p, x).abs();
                if !x.is_finite() {
                    break;
                }
                if r < best.0 {
                    best = (r, x);
                }
            }
            best.1
        })
        .collect()
}

#[derive(Debug, Clone)]
enum Curve {
    /// `normal . z = offset`
    Line { normal: [f64; 2], offset: f64 },
    /// `z_2 = h(z_1)`
    Graph { h: Poly },
    Circle { center: [f64; 2], radius: f64 },
}

fn circle_line(center: [f64; 2], radius: f64, normal: [f64; 2], offset: f64, out: &mut Vec<[f64; 2]>) {
    let nn = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
    let signed = (normal[0] * center[0] + normal[1] * center[1] - offset) / nn;
    let foot = [center[0] - normal[0] / nn * signed, center[1] - normal[1] / nn * signed];
    // the foot itself covers (near-)tangency
    out.push(foot);
    let h2 = radius * radius - signed * signed;
    if h2 > 0.0 {
        let h = h2.sqrt();
        let t = [-normal[1] / nn, normal[0] / nn];
        out.push([foot[0] + h * t[0], foot[1] + h * t[1]]);
        out.push([foot[0] - h * t[0], foot[1] - h * t[1]]);
    }
}

fn circle_graph(center: [f64; 2], radius: f64, h: &[f64], out: &mut Vec<[f64; 2]>) {
    // (x - c1)^2 + (h(x) - c2)^2 - r^2 = 0
    let dy = add(h, &[-center[1]]);
    let p = add(
        &mul(&dy, &dy),
        &[center[0] * center[0] - radius * radius, -2.0 * center[0], 1.0],
    );
    out.extend(roots(&p).into_iter().map(|x| [x, eval(h, x)]));
}

impl Curve {
    /// Critical points of `|z - y|^2` along the curve.
    fn feet(&self, y: [f64; 2], out: &mut Vec<[f64; 2]>) {
        match self {
            Curve::Line { normal, offset } => {
                let excess = normal[0] * y[0] + normal[1] * y[1] - offset;
                let nn = normal[0] * normal[0] + normal[1] * normal[1];
                out.push([y[0] - normal[0] * excess / nn, y[1] - normal[1] * excess / nn]);
            }
            Curve::Graph { h } => {
                // (x - y1) + (h(x) - y2) h'(x) = 0
                let shifted = add(h, &[-y[1]]);
                let q = add(&mul(&shifted, &derivative(h)), &[-y[0], 1.0]);
                out.extend(roots(&q).into_iter().map(|x| [x, eval(h, x)]));
            }
            Curve::Circle { center, radius } => {
                let d = [y[0] - center[0], y[1] - center[1]];
                let norm = d[0].hypot(d[1]);
                let u = if norm > 0.0 { [d[0] / norm, d[1] / norm] } else { [1.0, 0.0] };
                for s in [*radius, -*radius] {
                    out.push([center[0] + s * u[0], center[1] + s * u[1]]);
                }
            }
        }
    }
}

/// Points where two curves meet.
fn intersections(a: &Curve, b: &Curve, out: &mut Vec<[f64; 2]>) {
    match (a, b) {
        (
            Curve::Line {
                normal: n,
                offset: c,
            },
            Curve::Line {
                normal: m,
                offset: d,
            },
        ) => {
            let det = n[0] * m[1] - n[1] * m[0];
            if det != 0.0 {
                out.push([(c * m[1] - d * n[1]) / det, (n[0] * d - m[0] * c) / det]);
            }
        }
        (Curve::Line { normal, offset }, Curve::Graph { h })
        | (Curve::Graph { h }, Curve::Line { normal, offset }) => {
            if normal[1] == 0.0 {
                let x = offset / normal[0];
                out.push([x, eval(h, x)]);
            } else {
                // normal_1 x + normal_2 h(x) - offset = 0
                let p = add(&scale(h, normal[1]), &[-offset, normal[0]]);
                out.extend(roots(&p).into_iter().map(|x| [x, eval(h, x)]));
            }
        }
        (Curve::Graph { h: g }, Curve::Graph { h }) => {
            let p = add(g, &scale(h, -1.0));
            out.extend(roots(&p).into_iter().map(|x| [x, eval(h, x)]));
        }
        (Curve::Circle { center, radius }, Curve::Line { normal, offset })
        | (Curve::Line { normal, offset }, Curve::Circle { center, radius }) => {
            circle_line(*center, *radius, *normal, *offset, out)
        }
        (Curve::Circle { center, radius }, Curve::Graph { h })
        | (Curve::Graph { h }, Curve::Circle { center, radius }) => {
            circle_graph(*center, *radius, h, out)
        }
        (
            Curve::Circle {
                center: c,
                radius: r,
            },
            Curve::Circle {
                center: d,
                radius: s,
            },
        ) => {
            // subtracting the circle equations leaves their radical line
            let normal = [2.0 * (d[0] - c[0]), 2.0 * (d[1] - c[1])];
            if normal != [0.0, 0.0] {
                let offset = (r * r - s * s) + (d[0] * d[0] + d[1] * d[1]) - (c[0] * c[0] + c[1] * c[1]);
                circle_line(*c, *r, normal, offset, out);
            }
        }
    }
}

/// Boundary curves of a planar region, when every constraint is a
/// halfspace, ball, box, affine equality or `poly2d` inequality.
#[derive(Debug, Clone)]
pub(crate) struct PlanarBoundary {
    curves: Vec<Curve>,
}

impl PlanarBoundary {
    pub(crate) fn from_constraints(constraints: &[Constraint]) -> Option<Self> {
        let mut curves = Vec::new();
        for c in constraints {
            if c.dimension() != 2 {
                return None;
            }
            match c {
                Constraint::Halfspace { normal, offset }
                | Constraint::AffineEquality { normal, offset } => curves.push(Curve::Line {
                    normal: [normal[0], normal[1]],
                    offset: *offset,
                }),
                Constraint::Box { lower, upper } => {
                    for i in 0..2 {
                        let mut normal = [0.0; 2];
                        normal[i] = 1.0;
                        for bound in [lower[i], upper[i]] {
                            if bound.is_finite() {
                                curves.push(Curve::Line {
                                    normal,
                                    offset: bound,
                                });
                            }
                        }
                    }
                }
                Constraint::Ball { center, radius } => curves.push(Curve::Circle {
                    center: [center[0], center[1]],
                    radius: *radius,
                }),
                Constraint::Smooth(s) => match s.to_spec() {
                    Some(ConstraintSpec::Poly2d {
                        coeffs_x,
                        sign_y,
                        offset,
                    }) => {
                        // sign_y y + p(x) <= offset  <=>  boundary y = sign_y (offset - p(x))
                        let mut h = scale(&coeffs_x, -sign_y);
                        h[0] += sign_y * offset;
                        curves.push(Curve::Graph { h });
                    }
                    _ => return None,
                },
            }
        }
        Some(Self { curves })
    }

    /// Every point that can be the projection of `y` onto the region.
    pub(crate) fn candidates(&self, y: [f64; 2]) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for (i, a) in self.curves.iter().enumerate() {
            a.feet(y, &mut out);
            for b in &self.curves[i + 1..] {
                intersections(a, b, &mut out);
            }
        }
        out.retain(|z| z[0].is_finite() && z[1].is_finite());
        out
    }
}
