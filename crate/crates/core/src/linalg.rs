//! Small dense linear algebra over [`Scalar`], so that solves and inverses
//! carry derivatives when the entries are jets.

use nalgebra::DMatrix;

use crate::jet::Scalar;

/// Row-major square matrix product `a · b`.
pub fn matmul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let dim = a[0].dim();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = S::cst(0.0, dim);
            for k in 0..n {
                acc = acc + a[i * n + k].clone() * b[k * n + j].clone();
            }
            out.push(acc);
        }
    }
    out
}

pub fn transpose<S: Clone>(a: &[S], n: usize) -> Vec<S> {
    let mut out = a.to_vec();
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].clone();
        }
    }
    out
}

/// Matrix-vector product.
pub fn matvec<S: Scalar>(a: &[S], v: &[S], n: usize) -> Vec<S> {
    let dim = v[0].dim();
    (0..n)
        .map(|i| {
            (0..n).fold(S::cst(0.0, dim), |acc, k| acc + a[i * n + k].clone() * v[k].clone())
        })
        .collect()
}

/// LU factorisation with partial pivoting (pivots chosen on values).
/// Returns `None` when a pivot is exactly zero.
struct Lu<S> {
    n: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    fn new(a: &[S], n: usize) -> Option<Self> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| {
                    lu[i * n + k].value().abs().total_cmp(&lu[j * n + k].value().abs())
                })
                .unwrap();
            if lu[p * n + k].value() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k].clone();
            for i in k + 1..n {
                let f = lu[i * n + k].clone() / pivot.clone();
                for j in k + 1..n {
                    let t = f.clone() * lu[k * n + j].clone();
                    lu[i * n + j] = lu[i * n + j].clone() - t;
                }
                lu[i * n + k] = f;
            }
        }
        Some(Lu { n, lu, perm })
    }

    fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut x: Vec<S> = self.perm.iter().map(|&i| b[i].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                let t = self.lu[i * n + k].clone() * x[k].clone();
                x[i] = x[i].clone() - t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.lu[i * n + k].clone() * x[k].clone();
                x[i] = x[i].clone() - t;
            }
            x[i] = x[i].clone() / self.lu[i * n + i].clone();
        }
        x
    }
}

/// Solve `a x = b`.
pub fn solve<S: Scalar>(a: &[S], b: &[S], n: usize) -> Option<Vec<S>> {
    Lu::new(a, n).map(|lu| lu.solve(b))
}

/// Inverse of a square matrix.
pub fn inverse<S: Scalar>(a: &[S], n: usize) -> Option<Vec<S>> {
    let lu = Lu::new(a, n)?;
    let dim = a[0].dim();
    let mut out = vec![S::cst(0.0, dim); n * n];
    for j in 0..n {
        let mut e = vec![S::cst(0.0, dim); n];
        e[j] = S::cst(1.0, dim);
        let col = lu.solve(&e);
        for i in 0..n {
            out[i * n + j] = col[i].clone();
        }
    }
    Some(out)
}

fn to_dmatrix(a: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, a)
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(a: &[f64], n: usize) -> f64 {
    let sv = to_dmatrix(a, n).singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let m = to_dmatrix(a, n);
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Signature `(positive, negative, zero)` with `zero_tol` relative to the
/// largest eigenvalue magnitude.
pub fn signature(a: &[f64], n: usize, zero_tol: f64) -> (usize, usize, usize) {
    let ev = symmetric_eigenvalues(a, n);
    let big = ev.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut sig = (0, 0, 0);
    for e in ev {
        if e.abs() <= zero_tol * big {
            sig.2 += 1;
        } else if e > 0.0 {
            sig.0 += 1;
        } else {
            sig.1 += 1;
        }
    }
    sig
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
