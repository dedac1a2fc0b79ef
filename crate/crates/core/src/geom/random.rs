//! Seeded random fields and chart changes for property checks.

use std::sync::Arc;

use rand::Rng;

use crate::expr::{polynomial, Expr};
use crate::geom::{ChartBox, ChartMap, TensorField, Valence};

/// Exponent vectors of all monomials in `dim` variables of total degree
/// at most `degree`.
pub fn monomials(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.iter().sum();
            for e in 0..=degree - used {
                let mut m2 = m.clone();
                m2.push(e);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Dense polynomial with coefficients uniform in `[-1, 1]`.
pub fn random_polynomial<R: Rng>(rng: &mut R, dim: usize, degree: u32) -> Expr {
    let terms: Vec<(f64, Vec<u32>)> =
        monomials(dim, degree).into_iter().map(|m| (rng.gen_range(-1.0..1.0), m)).collect();
    polynomial(&terms)
}

pub fn random_field<R: Rng>(
    rng: &mut R,
    chart: &Arc<ChartBox>,
    valence: Valence,
    degree: u32,
) -> TensorField {
    let n = chart.dim();
    let comps = (0..valence.count(n)).map(|_| random_polynomial(rng, n, degree)).collect();
    TensorField::new("random", valence, chart.clone(), comps).expect("component count matches valence")
}

/// Diagonal (1,1) field with random smooth entries `d_i(u)`.
pub fn random_diagonal<R: Rng>(rng: &mut R, chart: &Arc<ChartBox>, degree: u32) -> TensorField {
    let n = chart.dim();
    let comps = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                let p = random_polynomial(rng, n, degree);
                // mix in a transcendental term so the entries are not all polynomial
                Expr::add(p, Expr::mul(Expr::num(rng.gen_range(-0.5..0.5)), Expr::call(crate::expr::Func::Sin, Expr::var(k % n))))
            } else {
                Expr::num(0.0)
            }
        })
        .collect();
    TensorField::new("D", Valence::Endomorphism, chart.clone(), comps).unwrap()
}

/// Nonlinear diffeomorphism built from quadratic shears
/// `w_i += a_i w_{i+1}^2` (followed by a random invertible linear map),
/// with exact inverse.
pub fn random_chart_map<R: Rng>(rng: &mut R, dim: usize, strength: f64) -> ChartMap {
    let mut map = ChartMap::identity(dim);
    if dim >= 2 {
        for i in 0..dim {
            let a = strength * rng.gen_range(-1.0..1.0);
            let src = (i + 1) % dim;
            let mut fwd: Vec<Expr> = (0..dim).map(Expr::var).collect();
            let mut inv = fwd.clone();
            let sq = Expr::pow(Expr::var(src), 2);
            fwd[i] = Expr::add(Expr::var(i), Expr::mul(Expr::num(a), sq.clone()));
            inv[i] = Expr::sub(Expr::var(i), Expr::mul(Expr::num(a), sq));
            map = map.then(&ChartMap::new(fwd, inv));
        }
    }
    // well-conditioned linear part: identity plus a small perturbation
    let m: Vec<f64> = (0..dim * dim)
        .map(|k| if k / dim == k % dim { 1.0 } else { 0.0 } + 0.3 * rng.gen_range(-1.0..1.0))
        .collect();
    if let Some(lin) = ChartMap::linear(&m, dim) {
        map = map.then(&lin);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn monomial_count() {
        // C(dim + degree, degree)
        assert_eq!(monomials(2, 2).len(), 6);
        assert_eq!(monomials(3, 2).len(), 10);
    }

    #[test]
    fn random_map_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=4 {
            let map = random_chart_map(&mut rng, dim, 0.3);
            let p: Vec<f64> = (0..dim).map(|i| 0.1 * i as f64 - 0.2).collect();
            let q = map.apply(&p).unwrap();
            let back = map.apply_inverse(&q).unwrap();
            for (a, b) in p.iter().zip(&back) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
