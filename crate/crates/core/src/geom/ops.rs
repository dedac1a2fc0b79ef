use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geom::algebra::apply_vector;
use crate::geom::{ChartBox, TensorField, Valence};
use crate::jet::{Jet1, Jet2};
use crate::linalg::{condition_number, inverse};

/// Condition-number ceiling for Jacobians and frames.
pub const MAX_CONDITION: f64 = 1e8;

/// 2-jet of a scalar field at `p`.
pub fn eval_jet2(f: &TensorField, p: &[f64]) -> Result<Jet2> {
    f.expect(Valence::Scalar)?;
    Ok(f.jets(p)?.remove(0))
}

/// Largest relative disagreement between the forward-mode gradient and a
/// central finite difference with step `1e-5 (1 + |p|)`.
pub fn fd_gradient_discrepancy(f: &TensorField, p: &[f64]) -> Result<f64> {
    let jet = eval_jet2(f, p)?;
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h = 1e-5 * (1.0 + norm);
    let e = &f.comps[0];
    let mut worst = 0.0f64;
    for k in 0..p.len() {
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        hi[k] += h;
        lo[k] -= h;
        let fd = (eval_at(e, &hi)? - eval_at(e, &lo)?) / (2.0 * h);
        worst = worst.max((fd - jet.grad[k]).abs() / (1.0 + jet.grad[k].abs()));
    }
    Ok(worst)
}

fn eval_at(e: &Expr, p: &[f64]) -> Result<f64> {
    e.eval_f64(p).map_err(|source| Error::Eval { point: p.to_vec(), source })
}

/// `[X,Y]^i = Σ_l X^l ∂_l Y^i - Y^l ∂_l X^i` from first-order jets.
pub fn lie_bracket_jets(x: &[Jet1], y: &[Jet1]) -> Vec<f64> {
    let xv: Vec<f64> = x.iter().map(|c| c.value).collect();
    let yv: Vec<f64> = y.iter().map(|c| c.value).collect();
    x.iter().zip(y).map(|(xi, yi)| yi.directional(&xv) - xi.directional(&yv)).collect()
}

/// Lie bracket of two vector fields at `p`.
pub fn lie_bracket(x: &TensorField, y: &TensorField, p: &[f64]) -> Result<Vec<f64>> {
    x.expect(Valence::Vector)?;
    y.expect(Valence::Vector)?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    Ok(lie_bracket_jets(&x.jet1s(p)?, &y.jet1s(p)?))
}

/// `(dα)_ij = ∂_i α_j - ∂_j α_i`, row-major `n × n`.
pub fn exterior_d_jets(alpha: &[Jet1]) -> Vec<f64> {
    let n = alpha.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = alpha[j].grad[i] - alpha[i].grad[j];
        }
    }
    w
}

pub fn exterior_d_oneform(alpha: &TensorField, p: &[f64]) -> Result<Vec<f64>> {
    alpha.expect(Valence::OneForm)?;
    Ok(exterior_d_jets(&alpha.jet1s(p)?))
}

/// `(L_X α)_i = Σ_l X^l ∂_l α_i + α_l ∂_i X^l`.
pub fn lie_derivative_form_jets(alpha: &[Jet1], x: &[Jet1]) -> Vec<f64> {
    let n = alpha.len();
    let xv: Vec<f64> = x.iter().map(|c| c.value).collect();
    (0..n)
        .map(|i| {
            alpha[i].directional(&xv) + (0..n).map(|l| alpha[l].value * x[l].grad[i]).sum::<f64>()
        })
        .collect()
}

/// `(L_X K)^i_j = Σ_l X^l ∂_l K^i_j - K^l_j ∂_l X^i + K^i_l ∂_j X^l`.
pub fn lie_derivative_endo_jets(k: &[Jet1], x: &[Jet1]) -> Vec<f64> {
    let n = x.len();
    let xv: Vec<f64> = x.iter().map(|c| c.value).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = k[i * n + j].directional(&xv);
            for l in 0..n {
                s += -k[l * n + j].value * x[i].grad[l] + k[i * n + l].value * x[l].grad[j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

/// Lie derivative of a 1-form or (1,1) field along `x` at `p`.
pub fn lie_derivative(t: &TensorField, x: &TensorField, p: &[f64]) -> Result<Vec<f64>> {
    x.expect(Valence::Vector)?;
    if t.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), got: x.dim() });
    }
    let xj = x.jet1s(p)?;
    match t.valence {
        Valence::OneForm => Ok(lie_derivative_form_jets(&t.jet1s(p)?, &xj)),
        Valence::Endomorphism => Ok(lie_derivative_endo_jets(&t.jet1s(p)?, &xj)),
        other => Err(Error::ValenceMismatch { expected: "oneform or (1,1)".into(), got: other.to_string() }),
    }
}

/// Transform components of the given valence with Jacobian `j = ∂v/∂u` and
/// its inverse.
pub fn transform_components(valence: Valence, comps: &[f64], j: &[f64], jinv: &[f64], n: usize) -> Vec<f64> {
    match valence {
        Valence::Scalar => comps.to_vec(),
        Valence::Vector => apply_vector(j, comps, n),
        Valence::OneForm => (0..n).map(|b| (0..n).map(|i| comps[i] * jinv[i * n + b]).sum()).collect(),
        Valence::Endomorphism => {
            let mut out = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for i in 0..n {
                        for k in 0..n {
                            s += j[a * n + i] * comps[i * n + k] * jinv[k * n + b];
                        }
                    }
                    out[a * n + b] = s;
                }
            }
            out
        }
        Valence::Tensor12 => {
            // first pull back the two lower slots, then push the upper one
            let mut lower = vec![0.0; n * n * n];
            for i in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut s = 0.0;
                        for p in 0..n {
                            for q in 0..n {
                                s += comps[(i * n + p) * n + q] * jinv[p * n + b] * jinv[q * n + c];
                            }
                        }
                        lower[(i * n + b) * n + c] = s;
                    }
                }
            }
            let mut out = vec![0.0; n * n * n];
            for a in 0..n {
                for bc in 0..n * n {
                    out[a * n * n + bc] = (0..n).map(|i| j[a * n + i] * lower[i * n * n + bc]).sum();
                }
            }
            out
        }
    }
}

/// A diffeomorphism `v = φ(u)` given with its inverse `u = ψ(v)`.
#[derive(Clone, Debug)]
pub struct ChartMap {
    pub forward: Vec<Expr>,
    pub inverse: Vec<Expr>,
    pub label: String,
}

impl ChartMap {
    pub fn new(forward: Vec<Expr>, inverse: Vec<Expr>) -> Self {
        ChartMap { forward, inverse, label: "v".into() }
    }

    pub fn identity(n: usize) -> Self {
        let id: Vec<Expr> = (0..n).map(Expr::var).collect();
        ChartMap::new(id.clone(), id)
    }

    /// Linear map `v = M u` with its inverse matrix.
    pub fn linear(m: &[f64], n: usize) -> Option<Self> {
        let minv = inverse(m, n)?;
        let lin = |a: &[f64]| -> Vec<Expr> {
            (0..n)
                .map(|i| Expr::sum((0..n).map(|k| Expr::mul(Expr::num(a[i * n + k]), Expr::var(k)))))
                .collect()
        };
        Some(ChartMap::new(lin(m), lin(&minv)))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ChartMap) -> ChartMap {
        ChartMap {
            forward: next.forward.iter().map(|e| e.substitute(&self.forward)).collect(),
            inverse: self.inverse.iter().map(|e| e.substitute(&next.inverse)).collect(),
            label: next.label.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.forward.len()
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.forward.iter().map(|e| eval_at(e, p)).collect()
    }

    pub fn apply_inverse(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.inverse.iter().map(|e| eval_at(e, q)).collect()
    }

    /// `∂v/∂u` at `p`, guarded by [`MAX_CONDITION`].
    pub fn jacobian(&self, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut j = vec![0.0; n * n];
        let seed = Jet2::seed(p);
        for (a, e) in self.forward.iter().enumerate() {
            let jet = e.eval(&seed).map_err(|source| Error::Eval { point: p.to_vec(), source })?;
            j[a * n..(a + 1) * n].copy_from_slice(&jet.grad);
        }
        let cond = condition_number(&j, n);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::SingularJacobian { point: p.to_vec(), cond });
        }
        Ok(j)
    }

    /// The inverse of this map.
    pub fn inverted(&self, label: &str) -> ChartMap {
        ChartMap { forward: self.inverse.clone(), inverse: self.forward.clone(), label: label.into() }
    }

    /// Image chart: bounding box of the mapped source box (sampled on a
    /// grid), padded by a quarter of each width.
    pub fn image_chart(&self, src: &ChartBox) -> Result<ChartBox> {
        let n = src.dim();
        let per_axis = 5usize;
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        let total = per_axis.pow(n as u32);
        for k in 0..total {
            let mut idx = k;
            let p: Vec<f64> = (0..n)
                .map(|i| {
                    let t = (idx % per_axis) as f64 / (per_axis - 1) as f64;
                    idx /= per_axis;
                    src.lower[i] + t * src.width(i)
                })
                .collect();
            let q = self.apply(&p)?;
            for i in 0..n {
                lo[i] = lo[i].min(q[i]);
                hi[i] = hi[i].max(q[i]);
            }
        }
        for i in 0..n {
            let pad = 0.25 * (hi[i] - lo[i]).max(1e-6);
            lo[i] -= pad;
            hi[i] += pad;
        }
        ChartBox::new(&self.label, lo, hi, self.apply(&src.base)?)
    }

    /// The field re-expressed symbolically in the new coordinates.
    pub fn transform_field(&self, t: &TensorField) -> Result<TensorField> {
        let n = self.dim();
        if t.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.dim() });
        }
        let chart = Arc::new(self.image_chart(&t.chart)?);
        // ∂v/∂u expressed in v, and ∂u/∂v
        let j: Vec<Expr> = (0..n * n)
            .map(|k| self.forward[k / n].diff(k % n).substitute(&self.inverse))
            .collect();
        let jinv: Vec<Expr> = (0..n * n).map(|k| self.inverse[k / n].diff(k % n)).collect();
        let c: Vec<Expr> = t.comps.iter().map(|e| e.substitute(&self.inverse)).collect();
        let comps: Vec<Expr> = match t.valence {
            Valence::Scalar => c,
            Valence::Vector => (0..n)
                .map(|a| Expr::sum((0..n).map(|i| Expr::mul(j[a * n + i].clone(), c[i].clone()))))
                .collect(),
            Valence::OneForm => (0..n)
                .map(|b| Expr::sum((0..n).map(|i| Expr::mul(c[i].clone(), jinv[i * n + b].clone()))))
                .collect(),
            Valence::Endomorphism => (0..n * n)
                .map(|ab| {
                    let (a, b) = (ab / n, ab % n);
                    Expr::sum((0..n * n).map(|ik| {
                        let (i, k) = (ik / n, ik % n);
                        Expr::mul(
                            Expr::mul(j[a * n + i].clone(), c[i * n + k].clone()),
                            jinv[k * n + b].clone(),
                        )
                    }))
                })
                .collect(),
            Valence::Tensor12 => (0..n * n * n)
                .map(|abc| {
                    let (a, b, cc) = (abc / (n * n), (abc / n) % n, abc % n);
                    Expr::sum((0..n * n * n).map(|ipq| {
                        let (i, p, q) = (ipq / (n * n), (ipq / n) % n, ipq % n);
                        Expr::mul(
                            Expr::mul(j[a * n + i].clone(), c[(i * n + p) * n + q].clone()),
                            Expr::mul(jinv[p * n + b].clone(), jinv[q * n + cc].clone()),
                        )
                    }))
                })
                .collect(),
        };
        TensorField::new(&t.name, t.valence, chart, comps)
    }
}

/// Components of `t` at `p`, re-expressed in the chart `v = φ(u)` (at `φ(p)`).
pub fn change_chart(t: &TensorField, map: &ChartMap, p: &[f64]) -> Result<Vec<f64>> {
    let n = t.dim();
    if map.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: map.dim() });
    }
    let j = map.jacobian(p)?;
    let jinv = inverse(&j, n).ok_or_else(|| Error::SingularJacobian { point: p.to_vec(), cond: f64::INFINITY })?;
    Ok(transform_components(t.valence, &t.values(p)?, &j, &jinv, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarScope};

    fn field(chart: &Arc<ChartBox>, valence: Valence, src: &[&str]) -> TensorField {
        let scope = VarScope::chart(chart.dim(), "u");
        let comps = src.iter().map(|s| parse_expr(s, &scope).unwrap()).collect();
        TensorField::new("f", valence, chart.clone(), comps).unwrap()
    }

    #[test]
    fn eval_jet2_examples() {
        let c = Arc::new(ChartBox::cube(2, 10.0));
        let f = field(&c, Valence::Scalar, &["u1*u2"]);
        let j = eval_jet2(&f, &[3.0, 4.0]).unwrap();
        assert_eq!((j.value, j.grad.clone()), (12.0, vec![4.0, 3.0]));
        assert_eq!(j.h(0, 1), 1.0);
        let k = eval_jet2(&field(&c, Valence::Scalar, &["5"]), &[1.0, 2.0]).unwrap();
        assert_eq!(k.grad, vec![0.0, 0.0]);
        assert_eq!(k.hess, vec![0.0; 4]);
        let c1 = Arc::new(ChartBox::cube(1, 1.0));
        let e = field(&c1, Valence::Scalar, &["exp(u1)"]);
        let j = eval_jet2(&e, &[0.0]).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess[0]), (1.0, 1.0, 1.0));
        assert!(fd_gradient_discrepancy(&e, &[0.0]).unwrap() <= 1e-6);
        assert!(matches!(eval_jet2(&e, &[2.0]), Err(Error::Domain { .. })));
        let lg = field(&c1, Valence::Scalar, &["log(u1)"]);
        assert!(matches!(eval_jet2(&lg, &[-0.5]), Err(Error::Eval { .. })));
    }

    #[test]
    fn bracket_examples() {
        let c = Arc::new(ChartBox::cube(2, 5.0));
        let d1 = TensorField::coordinate_vector(c.clone(), 0);
        let d2 = TensorField::coordinate_vector(c.clone(), 1);
        assert_eq!(lie_bracket(&d1, &d2, &[0.3, 0.1]).unwrap(), vec![0.0, 0.0]);
        let x = field(&c, Valence::Vector, &["u2", "0"]);
        let y = field(&c, Valence::Vector, &["0", "u1"]);
        assert_eq!(lie_bracket(&x, &y, &[1.0, 1.0]).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn exterior_derivative_examples() {
        let c = Arc::new(ChartBox::cube(2, 5.0));
        let a = field(&c, Valence::Scalar, &["u1^2*u2"]).gradient().unwrap();
        assert!(exterior_d_oneform(&a, &[0.7, -1.3]).unwrap().iter().all(|x| x.abs() < 1e-14));
        let rot = field(&c, Valence::OneForm, &["-u2", "u1"]);
        let w = exterior_d_oneform(&rot, &[0.2, 0.4]).unwrap();
        assert_eq!(w[1], 2.0);
        assert_eq!(w[2], -2.0);
    }

    #[test]
    fn lie_derivative_examples() {
        let c = Arc::new(ChartBox::cube(2, 5.0));
        let da = field(&c, Valence::Scalar, &["u1*u2"]).gradient().unwrap();
        let d1 = TensorField::coordinate_vector(c.clone(), 0);
        // L_{∂1} d(u1 u2) = d(∂1(u1 u2)) = du2
        assert_eq!(lie_derivative(&da, &d1, &[0.5, 0.7]).unwrap(), vec![0.0, 1.0]);
        let x = field(&c, Valence::Vector, &["u1^2 - u2", "sin(u1)"]);
        let id = TensorField::identity(c.clone());
        assert!(lie_derivative(&id, &x, &[0.3, 0.2]).unwrap().iter().all(|v| v.abs() < 1e-15));
        let k = field(&c, Valence::Endomorphism, &["u1", "0", "0", "u2"]);
        let xi = field(&c, Valence::Vector, &["u1", "u2"]);
        let p = [1.5, -0.7];
        let lk = lie_derivative(&k, &xi, &p).unwrap();
        let kv = k.values(&p).unwrap();
        for (l, v) in lk.iter().zip(&kv) {
            assert!((l - v).abs() < 1e-14);
        }
    }

    #[test]
    fn chart_change_examples() {
        let c = Arc::new(ChartBox::cube(2, 2.0));
        let x = field(&c, Valence::Vector, &["u1*u2", "u1 - 3"]);
        let p = [0.4, -0.9];
        let id = ChartMap::identity(2);
        assert_eq!(change_chart(&x, &id, &p).unwrap(), x.values(&p).unwrap());
        let m = [2.0, 1.0, -1.0, 3.0];
        let lin = ChartMap::linear(&m, 2).unwrap();
        let xv = x.values(&p).unwrap();
        let got = change_chart(&x, &lin, &p).unwrap();
        assert!((got[0] - (2.0 * xv[0] + xv[1])).abs() < 1e-14);
        assert!((got[1] - (-xv[0] + 3.0 * xv[1])).abs() < 1e-14);
        let sing = ChartMap::new(vec![Expr::var(0), Expr::var(0)], vec![Expr::var(0), Expr::var(0)]);
        assert!(matches!(change_chart(&x, &sing, &p), Err(Error::SingularJacobian { .. })));
    }
}
