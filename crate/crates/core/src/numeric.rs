//! Small numeric helpers shared by the other modules.

use crate::Point;

/// Neumaier-compensated accumulator for scalar sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Componentwise compensated accumulator for vector sums.
#[derive(Debug, Clone)]
pub struct CompensatedVecSum {
    parts: Vec<CompensatedSum>,
}

impl CompensatedVecSum {
    pub fn zeros(dim: usize) -> Self {
        Self {
            parts: vec![CompensatedSum::new(); dim],
        }
    }

    /// Adds `scale * v`.
    pub fn add_scaled(&mut self, scale: f64, v: &Point) {
        for (acc, vi) in self.parts.iter_mut().zip(v.iter()) {
            acc.add(scale * vi);
        }
    }

    pub fn value(&self) -> Point {
        Point::from_iterator(self.parts.len(), self.parts.iter().map(|p| p.value()))
    }
}

/// Compensated sum of a slice.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// SplitMix64 finalizer, used to derive independent 64-bit seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Euclidean norm restricted to the coordinates in `indices`.
pub fn restricted_norm_sq(v: &Point, indices: &[usize]) -> f64 {
    sum(indices.iter().map(|&i| v[i] * v[i]))
}

/// Inner product restricted to the coordinates in `indices`.
pub fn restricted_dot(u: &Point, v: &Point, indices: &[usize]) -> f64 {
    sum(indices.iter().map(|&i| u[i] * v[i]))
}
