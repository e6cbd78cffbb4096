//! Random instance and region families shared by the `verify` command and
//! the property and acceptance suites.

use std::ops::RangeInclusive;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{Constraint, ConvexRegion, FEASIBILITY_TOL};
use crate::weber::WeberInstance;
use crate::{Point, Result};

/// Planar instance with `m` drawn from `m_range`, vertices uniform in
/// `[-scale, scale]^2` and weights uniform in `weight_range`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    m_range: RangeInclusive<usize>,
    scale: f64,
    weight_range: RangeInclusive<f64>,
) -> WeberInstance {
    loop {
        let m = rng.random_range(m_range.clone());
        let vertices = (0..m)
            .map(|_| {
                Point::from_vec(vec![
                    rng.random_range(-scale..=scale),
                    rng.random_range(-scale..=scale),
                ])
            })
            .collect();
        let weights = (0..m)
            .map(|_| rng.random_range(weight_range.clone()))
            .collect();
        if let Ok(instance) = WeberInstance::new(vertices, weights) {
            return instance;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Halfplane,
    Ball,
    Box,
    /// Halfplane through the center of a ball, intersected with it.
    HalfBall,
}

fn unit<R: Rng>(rng: &mut R) -> Point {
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    Point::from_vec(vec![angle.cos(), angle.sin()])
}

/// Random convex combination of the vertices.
pub fn hull_point<R: Rng>(rng: &mut R, instance: &WeberInstance) -> Point {
    let weights: Vec<f64> = (0..instance.len()).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    instance
        .vertices()
        .iter()
        .zip(&weights)
        .fold(Point::zeros(2), |acc, (a, w)| acc + a * (w / total))
}

/// Random planar region of the given kind positioned over the vertex hull.
pub fn random_region_of<R: Rng>(
    rng: &mut R,
    instance: &WeberInstance,
    kind: RegionKind,
) -> Result<ConvexRegion> {
    let d = instance.diameter();
    let c = hull_point(rng, instance);
    let constraints = match kind {
        RegionKind::Halfplane => {
            let u = unit(rng);
            vec![Constraint::Halfspace {
                offset: u.dot(&c),
                normal: u,
            }]
        }
        RegionKind::Ball => vec![Constraint::Ball {
            center: c,
            radius: d * rng.random_range(0.1..0.6),
        }],
        RegionKind::Box => {
            let hx = d * rng.random_range(0.05..0.5);
            let hy = d * rng.random_range(0.05..0.5);
            vec![Constraint::boxed(
                vec![c[0] - hx, c[1] - hy],
                vec![c[0] + hx, c[1] + hy],
            )]
        }
        RegionKind::HalfBall => {
            let u = unit(rng);
            vec![
                Constraint::Ball {
                    center: c.clone(),
                    radius: d * rng.random_range(0.1..0.6),
                },
                Constraint::Halfspace {
                    offset: u.dot(&c),
                    normal: u,
                },
            ]
        }
    };
    ConvexRegion::new(2, constraints)
}

pub fn random_region<R: Rng>(rng: &mut R, instance: &WeberInstance) -> Result<ConvexRegion> {
    let kind = *[
        RegionKind::Halfplane,
        RegionKind::Ball,
        RegionKind::Box,
        RegionKind::HalfBall,
    ]
    .choose(rng)
    .expect("nonempty");
    random_region_of(rng, instance, kind)
}

/// Feasible sample points: roughly a quarter feasible vertices (when there
/// are any), the rest random points of an enlarged bounding box, projected
/// onto the region when they fall outside it.
pub fn sample_feasible_points<R: Rng>(
    rng: &mut R,
    instance: &WeberInstance,
    region: &ConvexRegion,
    count: usize,
) -> Result<Vec<Point>> {
    let feasible_vertices: Vec<&Point> = instance
        .vertices()
        .iter()
        .filter(|a| region.contains_unchecked(a, FEASIBILITY_TOL))
        .collect();
    let (lo, hi) = bounding_box(instance, 0.25);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if !feasible_vertices.is_empty() && rng.random::<f64>() < 0.25 {
            out.push((*feasible_vertices.choose(rng).expect("nonempty")).clone());
            continue;
        }
        let y = Point::from_vec(vec![
            rng.random_range(lo[0]..=hi[0]),
            rng.random_range(lo[1]..=hi[1]),
        ]);
        let x = region.project(&y)?;
        if region.contains_unchecked(&x, FEASIBILITY_TOL) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Vertex bounding box enlarged by `margin` times its size on every side.
pub fn bounding_box(instance: &WeberInstance, margin: f64) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for a in instance.vertices() {
        for i in 0..2 {
            lo[i] = lo[i].min(a[i]);
            hi[i] = hi[i].max(a[i]);
        }
    }
    for i in 0..2 {
        let pad = margin * (hi[i] - lo[i]);
        lo[i] -= pad;
        hi[i] += pad;
    }
    (lo, hi)
}

/// Standard normal perturbation of length about `scale`.
pub fn jitter<R: Rng>(rng: &mut R, dimension: usize, scale: f64) -> Point {
    Point::from_iterator(
        dimension,
        (0..dimension).map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)),
    )
}
