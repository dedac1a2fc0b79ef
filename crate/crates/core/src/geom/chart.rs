use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Coordinate box on which every field of a problem lives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartBox {
    /// Variable prefix used by this chart (`u`, `t` or `A`).
    pub label: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub base: Vec<f64>,
}

impl ChartBox {
    pub fn new(label: &str, lower: Vec<f64>, upper: Vec<f64>, base: Vec<f64>) -> Result<Self> {
        let n = lower.len();
        if n == 0 {
            return Err(Error::Schema("chart dimension must be at least 1".into()));
        }
        if upper.len() != n || base.len() != n {
            return Err(Error::Schema(format!(
                "chart bounds disagree on dimension: lower {}, upper {}, base {}",
                n,
                upper.len(),
                base.len()
            )));
        }
        for i in 0..n {
            if !(lower[i] < upper[i]) {
                return Err(Error::Schema(format!("chart axis {}: lower >= upper", i + 1)));
            }
        }
        let chart = ChartBox { label: label.to_string(), lower, upper, base };
        if !chart.contains(&chart.base) {
            return Err(Error::Schema("chart base point is not strictly inside the box".into()));
        }
        Ok(chart)
    }

    /// Symmetric box `[-r, r]^n` around the origin.
    pub fn cube(dim: usize, r: f64) -> Self {
        ChartBox::new("u", vec![-r; dim], vec![r; dim], vec![0.0; dim]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Strict interior test.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(&self.lower).zip(&self.upper).all(|((x, lo), hi)| lo < x && x < hi)
    }

    pub fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        if !self.contains(p) {
            return Err(Error::Domain { point: p.to_vec() });
        }
        Ok(())
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Deterministic low-discrepancy sample restricted to the middle 80 % of
    /// the box: a Halton sequence with a seeded Cranley-Patterson shift.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        (0..count)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let h = (radical_inverse(k as u64 + 1, PRIMES[i % PRIMES.len()]) + shift[i]).fract();
                        self.lower[i] + (0.1 + 0.8 * h) * self.width(i)
                    })
                    .collect()
            })
            .collect()
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut acc = 0.0;
    while k > 0 {
        acc += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_enforced() {
        assert!(ChartBox::new("u", vec![0.0], vec![1.0], vec![0.5]).is_ok());
        assert!(ChartBox::new("u", vec![1.0], vec![0.0], vec![0.5]).is_err());
        assert!(ChartBox::new("u", vec![0.0], vec![1.0], vec![1.0]).is_err());
        assert!(ChartBox::new("u", vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn samples_are_deterministic_and_central() {
        let c = ChartBox::new("u", vec![0.0, -1.0], vec![1.0, 1.0], vec![0.5, 0.0]).unwrap();
        let a = c.sample_points(50, 42);
        let b = c.sample_points(50, 42);
        assert_eq!(a, b);
        assert_ne!(a, c.sample_points(50, 7));
        for p in &a {
            assert!(p[0] >= 0.1 && p[0] <= 0.9);
            assert!(p[1] >= -0.8 && p[1] <= 0.8);
        }
    }
}
