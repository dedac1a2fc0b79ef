//! Pointwise contractions on component arrays, generic over [`Scalar`].
//!
//! Convention for a (1,1) tensor `K` (components `K^i_j`, row `i`):
//! on vectors `(Kv)^i = Σ_j K^i_j v^j`; on 1-forms `(Kα)_l = Σ_j K^j_l α_j`.
//! With this choice `K dA` for `K = Id` is `dA`, and `K du^j = Σ_l K^j_l du^l`.

use crate::jet::Scalar;

pub fn zero<S: Scalar>(like: &S) -> S {
    like.zero_like()
}

/// `(Kv)^i = Σ_j K^i_j v^j`.
pub fn apply_vector<S: Scalar>(k: &[S], v: &[S], n: usize) -> Vec<S> {
    (0..n)
        .map(|i| (0..n).fold(zero(&v[0]), |acc, j| acc + k[i * n + j].clone() * v[j].clone()))
        .collect()
}

/// `(Kα)_l = Σ_j K^j_l α_j`.
pub fn apply_form<S: Scalar>(k: &[S], a: &[S], n: usize) -> Vec<S> {
    (0..n)
        .map(|l| (0..n).fold(zero(&a[0]), |acc, j| acc + k[j * n + l].clone() * a[j].clone()))
        .collect()
}

/// Contraction `α(v)`.
pub fn pair<S: Scalar>(a: &[S], v: &[S]) -> S {
    a.iter().zip(v).fold(zero(&a[0]), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `ω(ξ, η) = Σ ω_ab ξ^a η^b` for a 2-form with components `ω_ab = ω(∂_a, ∂_b)`.
pub fn eval_two_form(w: &[f64], xi: &[f64], eta: &[f64]) -> f64 {
    let n = xi.len();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += w[a * n + b] * xi[a] * eta[b];
        }
    }
    s
}

/// Components of `α ∧ β`.
pub fn wedge(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = a[i] * b[j] - a[j] * b[i];
        }
    }
    w
}

/// Vector-valued 2-form `T^j_{lm}` evaluated on `(ξ, η)`.
pub fn eval_vv2(t: &[f64], xi: &[f64], eta: &[f64]) -> Vec<f64> {
    let n = xi.len();
    (0..n)
        .map(|j| {
            let mut s = 0.0;
            for l in 0..n {
                for m in 0..n {
                    s += t[(j * n + l) * n + m] * xi[l] * eta[m];
                }
            }
            s
        })
        .collect()
}

/// Largest absolute component.
pub fn sup<S: Scalar>(v: &[S]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.value().abs()))
}

pub fn values<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(Scalar::value).collect()
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}
