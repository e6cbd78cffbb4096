#![allow(dead_code)]

use constrained_weber::geometry::{Constraint, ConvexRegion};
use constrained_weber::{Point, WeberInstance};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

pub fn p(v: &[f64]) -> Point {
    Point::from_row_slice(v)
}

/// Unit-side equilateral triangle with unit weights.
pub fn triangle() -> WeberInstance {
    triangle_weighted([1.0, 1.0, 1.0])
}

pub fn triangle_weighted(w: [f64; 3]) -> WeberInstance {
    WeberInstance::new(
        vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.5, SQRT3 / 2.0])],
        w.to_vec(),
    )
    .unwrap()
}

/// `{x_2 <= c}`
pub fn cap(c: f64) -> ConvexRegion {
    ConvexRegion::new(2, vec![Constraint::halfspace(vec![0.0, 1.0], c)]).unwrap()
}

/// Golden-section minimizer of a unimodal function on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Brute-force nearest feasible point: a grid of spacing `h` over the window,
/// then two tenfold refinements around the incumbent.
pub fn grid_nearest(region: &ConvexRegion, y: &Point, lo: [f64; 2], hi: [f64; 2], h: f64) -> Point {
    let scan = |lo: [f64; 2], hi: [f64; 2], h: f64| -> Option<(f64, Point)> {
        let nx = ((hi[0] - lo[0]) / h) as usize + 1;
        let ny = ((hi[1] - lo[1]) / h) as usize + 1;
        let mut best: Option<(f64, Point)> = None;
        for i in 0..nx {
            for j in 0..ny {
                let z = p(&[lo[0] + h * i as f64, lo[1] + h * j as f64]);
                if !region.contains(&z, 0.0).unwrap() {
                    continue;
                }
                let d = (&z - y).norm();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, z));
                }
            }
        }
        best
    };
    let (_, mut z) = scan(lo, hi, h).expect("window meets the region");
    let mut h = h;
    for _ in 0..2 {
        let half = 10.0 * h;
        h /= 10.0;
        if let Some((_, better)) = scan([z[0] - half, z[1] - half], [z[0] + half, z[1] + half], h) {
            z = better;
        }
    }
    z
}
