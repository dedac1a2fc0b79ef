//! Line integration of the closed 1-forms `K_j K_l dA` into the potentials
//! `A_{jl}`, anchored to zero at the base point.

use serde::Serialize;

use super::{per_point, rel, HaantjesCandidate};
use crate::error::{Error, Result};

/// Successive Simpson estimates must agree to this relative tolerance.
pub const QUADRATURE_TOL: f64 = 1e-10;
pub const QUADRATURE_MAX_LEVELS: usize = 20;

/// Potentials along the axis-aligned polyline from the base point.
pub struct PotentialIntegrator<'a> {
    cand: &'a HaantjesCandidate,
    base: Vec<f64>,
}

/// Potentials `A_{jl}` tabulated at sample points.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialSquare {
    pub m: usize,
    pub points: Vec<Vec<f64>>,
    /// `values[k][j*m + l]` is `A_{jl}` at `points[k]`.
    pub values: Vec<Vec<f64>>,
    /// `max |A_{jl} - A_{lj}|`, relative.
    pub symmetry_defect: f64,
    /// Forward versus reverse axis order, relative.
    pub path_defect: f64,
}

impl PotentialSquare {
    /// Matrix potential `H` at sample `k`.
    pub fn matrix(&self, k: usize) -> &[f64] {
        &self.values[k]
    }
}

impl<'a> PotentialIntegrator<'a> {
    pub fn new(cand: &'a HaantjesCandidate) -> Self {
        PotentialIntegrator { cand, base: cand.chart.base.clone() }
    }

    /// All `A_{jl}(p)` integrating axis by axis in `order`.
    pub fn at_with_order(&self, p: &[f64], order: &[usize]) -> Result<Vec<f64>> {
        let m = self.cand.k.len();
        let mut total = vec![0.0; m * m];
        let mut q = self.base.clone();
        for &axis in order {
            let (a, b) = (q[axis], p[axis]);
            if a != b {
                let seg = self.segment(&q, axis, a, b)?;
                for (t, s) in total.iter_mut().zip(seg) {
                    *t += s;
                }
            }
            q[axis] = b;
        }
        Ok(total)
    }

    pub fn at(&self, p: &[f64]) -> Result<Vec<f64>> {
        let order: Vec<usize> = (0..p.len()).collect();
        self.at_with_order(p, &order)
    }

    /// Adaptive composite Simpson of component `axis` of every `β_{jl}`
    /// along `q + s e_axis`, `s` from `a` to `b`. Odd nodes are added at
    /// each halving, so no evaluation is repeated.
    fn segment(&self, q: &[f64], axis: usize, a: f64, b: f64) -> Result<Vec<f64>> {
        let eval = |s: f64| -> Result<Vec<f64>> {
            let mut x = q.to_vec();
            x[axis] = s;
            Ok(self.cand.beta_values(&x)?.into_iter().map(|form| form[axis]).collect())
        };
        let fa = eval(a)?;
        let fb = eval(b)?;
        let len = fa.len();
        let ends: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x + y).collect();
        let mut evens = vec![0.0; len];
        let mut odds = eval(0.5 * (a + b))?;
        let mut intervals = 2usize;
        let simpson = |h: f64, evens: &[f64], odds: &[f64]| -> Vec<f64> {
            (0..len).map(|i| h / 3.0 * (ends[i] + 2.0 * evens[i] + 4.0 * odds[i])).collect()
        };
        let mut prev = simpson((b - a) / 2.0, &evens, &odds);
        for _ in 0..QUADRATURE_MAX_LEVELS {
            for i in 0..len {
                evens[i] += odds[i];
            }
            intervals *= 2;
            let h = (b - a) / intervals as f64;
            odds = vec![0.0; len];
            for k in (1..intervals).step_by(2) {
                for (o, v) in odds.iter_mut().zip(eval(a + k as f64 * h)?) {
                    *o += v;
                }
            }
            let next = simpson(h, &evens, &odds);
            let diff = next.iter().zip(&prev).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            let scale = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if diff <= QUADRATURE_TOL * (1.0 + scale) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::QuadratureStall { levels: QUADRATURE_MAX_LEVELS })
    }

    /// Tabulate at `points`, with symmetry and path-order defects.
    pub fn tabulate(&self, points: &[Vec<f64>]) -> Result<PotentialSquare> {
        let m = self.cand.k.len();
        let n = self.cand.n();
        let forward: Vec<usize> = (0..n).collect();
        let reverse: Vec<usize> = (0..n).rev().collect();
        let rows = per_point(points, |p| {
            let f = self.at_with_order(p, &forward)?;
            let r = self.at_with_order(p, &reverse)?;
            Ok((f, r))
        })?;
        let mut symmetry_defect = 0.0f64;
        let mut path_defect = 0.0f64;
        for (f, r) in &rows {
            let scale = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for j in 0..m {
                for l in 0..m {
                    symmetry_defect = symmetry_defect.max(rel((f[j * m + l] - f[l * m + j]).abs(), scale));
                    path_defect = path_defect.max(rel((f[j * m + l] - r[j * m + l]).abs(), scale));
                }
            }
        }
        Ok(PotentialSquare {
            m,
            points: points.to_vec(),
            values: rows.into_iter().map(|(f, _)| f).collect(),
            symmetry_defect,
            path_defect,
        })
    }
}
