//! Differential concomitants of (1,1) and (1,2) tensor fields: Nijenhuis
//! and Haantjes torsion, the Yano-Ako bracket, and the Frölicher-Nijenhuis
//! differential `d_K` on functions and 1-forms.
//!
//! Everything here is pointwise. The `*_jets` functions take first-order
//! jets of the components so that derived fields (products, solved
//! structure constants) can be fed in as readily as parsed ones.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::algebra::{apply_form, apply_vector, eval_two_form, eval_vv2, sup, values, wedge};
use crate::geom::{exterior_d_jets, lie_bracket_jets, TensorField, Valence};
use crate::jet::{Jet1, Scalar};

/// Vector-valued 2-form `T^j_{lm}` at a point, antisymmetric in `(l, m)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorValued2Form {
    pub n: usize,
    /// Index `(j*n + l)*n + m`.
    pub comps: Vec<f64>,
}

impl VectorValued2Form {
    /// Build from a generator of the `l < m` components; the rest follow
    /// by antisymmetry so the invariant holds exactly.
    fn from_upper(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut comps = vec![0.0; n * n * n];
        for j in 0..n {
            for l in 0..n {
                for m in l + 1..n {
                    let v = f(j, l, m);
                    comps[(j * n + l) * n + m] = v;
                    comps[(j * n + m) * n + l] = -v;
                }
            }
        }
        VectorValued2Form { n, comps }
    }

    pub fn get(&self, j: usize, l: usize, m: usize) -> f64 {
        self.comps[(j * self.n + l) * self.n + m]
    }

    /// `T(ξ, η)`.
    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Vec<f64> {
        eval_vv2(&self.comps, xi, eta)
    }

    pub fn max_abs(&self) -> f64 {
        sup(&self.comps)
    }
}

/// Nijenhuis torsion from the component formula
/// `T^j_{lm} = Σ_s ∂_s K^j_m K^s_l - ∂_s K^j_l K^s_m - K^j_s ∂_l K^s_m + K^j_s ∂_m K^s_l`.
pub fn nijenhuis_jets(k: &[Jet1], n: usize) -> VectorValued2Form {
    VectorValued2Form::from_upper(n, |j, l, m| {
        let mut t = 0.0;
        for s in 0..n {
            t += k[j * n + m].grad[s] * k[s * n + l].value - k[j * n + l].grad[s] * k[s * n + m].value
                - k[j * n + s].value * k[s * n + m].grad[l]
                + k[j * n + s].value * k[s * n + l].grad[m];
        }
        t
    })
}

pub fn nijenhuis_torsion(k: &TensorField, p: &[f64]) -> Result<VectorValued2Form> {
    k.expect(Valence::Endomorphism)?;
    Ok(nijenhuis_jets(&k.jet1s(p)?, k.dim()))
}

/// Nijenhuis torsion from its bracket definition
/// `T(ξ,η) = [Kξ,Kη] - K[Kξ,η] - K[ξ,Kη] + K²[ξ,η]` on coordinate fields.
/// Independent of [`nijenhuis_jets`]; used as its oracle.
pub fn nijenhuis_by_brackets(k: &[Jet1], n: usize) -> VectorValued2Form {
    let kv = values(k);
    let coord = |i: usize| -> Vec<Jet1> {
        (0..n).map(|a| Jet1::cst(if a == i { 1.0 } else { 0.0 }, n)).collect()
    };
    let column = |i: usize| -> Vec<Jet1> { (0..n).map(|a| k[a * n + i].clone()).collect() };
    VectorValued2Form::from_upper(n, |j, l, m| {
        let kl = column(l);
        let km = column(m);
        let b1 = lie_bracket_jets(&kl, &km);
        let b2 = apply_vector(&kv, &lie_bracket_jets(&kl, &coord(m)), n);
        let b3 = apply_vector(&kv, &lie_bracket_jets(&coord(l), &km), n);
        b1[j] - b2[j] - b3[j]
    })
}

/// `H(ξ,η) = T(Kξ,Kη) - K T(Kξ,η) - K T(ξ,Kη) + K² T(ξ,η)` assembled from
/// torsion components and the values of `K`.
pub fn haantjes_from_torsion(t: &VectorValued2Form, k: &[f64]) -> VectorValued2Form {
    let n = t.n;
    let k2 = crate::linalg::matmul(k, k, n);
    let tc = |i: usize, a: usize, b: usize| t.comps[(i * n + a) * n + b];
    VectorValued2Form::from_upper(n, |i, a, b| {
        let mut h = 0.0;
        for c in 0..n {
            for d in 0..n {
                h += tc(i, c, d) * k[c * n + a] * k[d * n + b];
            }
        }
        for e in 0..n {
            let mut left = 0.0;
            let mut right = 0.0;
            for c in 0..n {
                left += tc(e, c, b) * k[c * n + a];
                right += tc(e, a, c) * k[c * n + b];
            }
            h += -k[i * n + e] * (left + right) + k2[i * n + e] * tc(e, a, b);
        }
        h
    })
}

pub fn haantjes_jets(k: &[Jet1], n: usize) -> VectorValued2Form {
    haantjes_from_torsion(&nijenhuis_jets(k, n), &values(k))
}

pub fn haantjes_torsion(k: &TensorField, p: &[f64]) -> Result<VectorValued2Form> {
    k.expect(Valence::Endomorphism)?;
    Ok(haantjes_jets(&k.jet1s(p)?, k.dim()))
}

/// `[C,C]^m_{jklr}` at a point (index `(((m*n+j)*n+k)*n+l)*n+r`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YanoAkoValue {
    pub n: usize,
    pub comps: Vec<f64>,
    /// Set when the symmetry/associativity preconditions were not met at
    /// the requested tolerance (computation still performed).
    pub warning: Option<String>,
    pub symmetry_residual: f64,
    pub associativity_residual: f64,
}

impl YanoAkoValue {
    pub fn get(&self, m: usize, j: usize, k: usize, l: usize, r: usize) -> f64 {
        let n = self.n;
        self.comps[(((m * n + j) * n + k) * n + l) * n + r]
    }

    pub fn max_abs(&self) -> f64 {
        sup(&self.comps)
    }
}

fn c_idx(n: usize, m: usize, j: usize, l: usize) -> usize {
    (m * n + j) * n + l
}

/// Symmetry defect `max |C^l_{jk} - C^l_{kj}|`, with worst index.
pub fn symmetry_defect(c: &[f64], n: usize) -> (f64, Vec<usize>) {
    let mut worst = (0.0, vec![0, 0, 0]);
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = (c[c_idx(n, l, j, k)] - c[c_idx(n, l, k, j)]).abs();
                if d > worst.0 {
                    worst = (d, vec![l, j, k]);
                }
            }
        }
    }
    worst
}

/// Associativity defect `max |Σ_l C^l_{jk} C^s_{lm} - C^l_{mk} C^s_{lj}|`,
/// with worst index `(s, j, k, m)`.
pub fn associativity_defect(c: &[f64], n: usize) -> (f64, Vec<usize>) {
    let mut worst = (0.0, vec![0, 0, 0, 0]);
    for s in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    let mut d = 0.0;
                    for l in 0..n {
                        d += c[c_idx(n, l, j, k)] * c[c_idx(n, s, l, m)]
                            - c[c_idx(n, l, m, k)] * c[c_idx(n, s, l, j)];
                    }
                    if d.abs() > worst.0 {
                        worst = (d.abs(), vec![s, j, k, m]);
                    }
                }
            }
        }
    }
    worst
}

/// All six terms of the Yano-Ako bracket, summed over `s`.
pub fn yano_ako_jets(c: &[Jet1], n: usize) -> Vec<f64> {
    let ci = |m: usize, j: usize, l: usize| &c[c_idx(n, m, j, l)];
    let mut out = vec![0.0; n.pow(5)];
    for m in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    for r in 0..n {
                        let mut v = 0.0;
                        for s in 0..n {
                            v += ci(m, s, j).value * ci(s, l, r).grad[k]
                                + ci(m, s, k).value * ci(s, l, r).grad[j]
                                - ci(m, s, r).value * ci(s, j, k).grad[l]
                                - ci(m, s, l).value * ci(s, j, k).grad[r]
                                + ci(m, j, k).grad[s] * ci(s, l, r).value
                                - ci(m, l, r).grad[s] * ci(s, j, k).value;
                        }
                        out[(((m * n + j) * n + k) * n + l) * n + r] = v;
                    }
                }
            }
        }
    }
    out
}

/// Yano-Ako bracket with precondition handling. With `enforce_pre`, a
/// symmetry or associativity defect above `10 * tol` (relative to
/// `1 + max|C|²`) is an error; between `tol` and `10 * tol` it is a warning.
pub fn yano_ako_checked(c: &[Jet1], n: usize, enforce_pre: bool, tol: f64) -> Result<YanoAkoValue> {
    let cv = values(c);
    let scale = 1.0 + sup(&cv);
    let (sym, sym_idx) = symmetry_defect(&cv, n);
    let (assoc, assoc_idx) = associativity_defect(&cv, n);
    let sym_rel = sym / scale;
    let assoc_rel = assoc / (scale * scale);
    let mut warning = None;
    for (name, rel, idx) in [("symmetry", sym_rel, sym_idx), ("associativity", assoc_rel, assoc_idx)] {
        if rel > tol {
            if enforce_pre && rel > 10.0 * tol {
                return Err(Error::PreconditionViolated { condition: name.into(), index: idx, residual: rel });
            }
            warning = Some(format!("{name} precondition residual {rel:e} exceeds tolerance {tol:e}"));
        }
    }
    Ok(YanoAkoValue {
        n,
        comps: yano_ako_jets(c, n),
        warning,
        symmetry_residual: sym_rel,
        associativity_residual: assoc_rel,
    })
}

pub fn yano_ako_bracket(c: &TensorField, p: &[f64], enforce_pre: bool, tol: f64) -> Result<YanoAkoValue> {
    c.expect(Valence::Tensor12)?;
    yano_ako_checked(&c.jet1s(p)?, c.dim(), enforce_pre, tol)
}

/// `(d_K A)_l = Σ_j K^j_l ∂_j A`, i.e. `K dA`.
pub fn dk_scalar<S: Scalar>(k: &[S], da: &[S], n: usize) -> Vec<S> {
    apply_form(k, da, n)
}

/// `d_K α` for a 1-form, by the derivation rules applied to
/// `α = Σ_l α_l dx^l`:
/// `(d_K α)_ab = Σ_p K^p_a ∂_p α_b - K^p_b ∂_p α_a - Σ_l α_l (∂_a K^l_b - ∂_b K^l_a)`.
pub fn dk_oneform_jets(k: &[Jet1], alpha: &[Jet1], n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut v = 0.0;
            for p in 0..n {
                v += k[p * n + a].value * alpha[b].grad[p] - k[p * n + b].value * alpha[a].grad[p];
            }
            for l in 0..n {
                v -= alpha[l].value * (k[l * n + b].grad[a] - k[l * n + a].grad[b]);
            }
            w[a * n + b] = v;
        }
    }
    w
}

pub fn dk_oneform(k: &TensorField, alpha: &TensorField, p: &[f64]) -> Result<Vec<f64>> {
    k.expect(Valence::Endomorphism)?;
    alpha.expect(Valence::OneForm)?;
    Ok(dk_oneform_jets(&k.jet1s(p)?, &alpha.jet1s(p)?, k.dim()))
}

/// First-order jets of `dA` from a scalar field (needs its Hessian).
pub fn differential_jets(a: &TensorField, p: &[f64]) -> Result<Vec<Jet1>> {
    a.expect(Valence::Scalar)?;
    let j = a.jets(p)?.remove(0);
    Ok((0..p.len()).map(|i| j.partial(i)).collect())
}

/// `d_K d_K A` as 2-form components.
pub fn dk_squared(k: &TensorField, a: &TensorField, p: &[f64]) -> Result<Vec<f64>> {
    let kj = k.jet1s(p)?;
    let da = differential_jets(a, p)?;
    let n = k.dim();
    Ok(dk_oneform_jets(&kj, &dk_scalar(&kj, &da, n), n))
}

/// Residuals of the two identities relating `d` and `d_K` on `α` and
/// `α' = Kα`:
/// `dα'(ξ,η) = dα(Kξ,η) + dα(ξ,Kη) - d_Kα(ξ,η)` and
/// `d_Kα'(ξ,η) = dα(Kξ,Kη) + α(T_K(ξ,η))`,
/// each relative to `1 + max` of the participating terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub first: f64,
    pub second: f64,
}

pub fn d_dk_identities_jets(k: &[Jet1], alpha: &[Jet1], xi: &[f64], eta: &[f64]) -> IdentityResiduals {
    let n = xi.len();
    let kv = values(k);
    let kxi = apply_vector(&kv, xi, n);
    let keta = apply_vector(&kv, eta, n);
    let alpha_prime = apply_form(k, alpha, n);
    let d_alpha = exterior_d_jets(alpha);
    let d_alpha_prime = exterior_d_jets(&alpha_prime);
    let dk_alpha = dk_oneform_jets(k, alpha, n);
    let dk_alpha_prime = dk_oneform_jets(k, &alpha_prime, n);
    let torsion = nijenhuis_jets(k, n);

    let lhs1 = eval_two_form(&d_alpha_prime, xi, eta);
    let t1 = [
        eval_two_form(&d_alpha, &kxi, eta),
        eval_two_form(&d_alpha, xi, &keta),
        eval_two_form(&dk_alpha, xi, eta),
    ];
    let rhs1 = t1[0] + t1[1] - t1[2];
    let lhs2 = eval_two_form(&dk_alpha_prime, xi, eta);
    let t_xi_eta = torsion.eval(xi, eta);
    let t2 = [eval_two_form(&d_alpha, &kxi, &keta), values(alpha).iter().zip(&t_xi_eta).map(|(a, t)| a * t).sum()];
    let rhs2 = t2[0] + t2[1];
    let s1 = 1.0 + [lhs1.abs(), t1[0].abs(), t1[1].abs(), t1[2].abs()].into_iter().fold(0.0, f64::max);
    let s2 = 1.0 + [lhs2.abs(), t2[0].abs(), t2[1].abs()].into_iter().fold(0.0, f64::max);
    IdentityResiduals { first: (lhs1 - rhs1).abs() / s1, second: (lhs2 - rhs2).abs() / s2 }
}

pub fn check_d_dk_identities(
    k: &TensorField,
    alpha: &TensorField,
    p: &[f64],
    xi: &[f64],
    eta: &[f64],
) -> Result<IdentityResiduals> {
    k.expect(Valence::Endomorphism)?;
    alpha.expect(Valence::OneForm)?;
    Ok(d_dk_identities_jets(&k.jet1s(p)?, &alpha.jet1s(p)?, xi, eta))
}

/// Relative residual of `d_K²A(ξ,η) = dA(T_K(ξ,η))`.
pub fn dk_squared_torsion_residual(k: &TensorField, a: &TensorField, p: &[f64], xi: &[f64], eta: &[f64]) -> Result<f64> {
    let lhs = eval_two_form(&dk_squared(k, a, p)?, xi, eta);
    let grad = a.jets(p)?.remove(0).grad;
    let t = nijenhuis_torsion(k, p)?.eval(xi, eta);
    let rhs: f64 = grad.iter().zip(&t).map(|(g, t)| g * t).sum();
    Ok((lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())))
}

/// Outcome of the single-exact-generator ideal test at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdealMembership {
    /// `max |d_K²B - dA ∧ dB|`, relative.
    pub residual: f64,
    /// `max |d_K²A|`, relative; must vanish when membership holds.
    pub self_residual: f64,
}

pub fn ideal_membership_single_generator(
    k: &TensorField,
    a: &TensorField,
    b: &TensorField,
    p: &[f64],
) -> Result<IdealMembership> {
    let lhs = dk_squared(k, b, p)?;
    let da = a.jets(p)?.remove(0).grad;
    let db = b.jets(p)?.remove(0).grad;
    let rhs = wedge(&da, &db);
    let scale = 1.0 + sup(&lhs).max(sup(&rhs));
    let residual = lhs.iter().zip(&rhs).fold(0.0f64, |m, (l, r)| m.max((l - r).abs())) / scale;
    let self_form = dk_squared(k, a, p)?;
    Ok(IdealMembership { residual, self_residual: sup(&self_form) / (1.0 + sup(&da)) })
}

/// Probe scalars `{x^i} ∪ {x^i x^j}` used to test ideal membership.
pub fn ideal_probe_family(chart: &std::sync::Arc<crate::geom::ChartBox>) -> Vec<TensorField> {
    use crate::expr::Expr;
    let n = chart.dim();
    let mut out = Vec::new();
    for i in 0..n {
        out.push(TensorField::scalar(&format!("x{}", i + 1), chart.clone(), Expr::var(i)).unwrap());
    }
    for i in 0..n {
        for j in i..n {
            let e = Expr::mul(Expr::var(i), Expr::var(j));
            out.push(TensorField::scalar(&format!("x{}x{}", i + 1, j + 1), chart.clone(), e).unwrap());
        }
    }
    out
}

/// Worst membership residual over the probe family and the given points;
/// `d_K²B = dA ∧ dB` holding for all probes flags `A` as a
/// single-generator ideal candidate.
pub fn ideal_probe(k: &TensorField, a: &TensorField, points: &[Vec<f64>]) -> Result<(f64, f64)> {
    let probes = ideal_probe_family(&k.chart);
    let mut worst = 0.0f64;
    let mut worst_self = 0.0f64;
    for p in points {
        for b in &probes {
            let r = ideal_membership_single_generator(k, a, b, p)?;
            worst = worst.max(r.residual);
            worst_self = worst_self.max(r.self_residual);
        }
    }
    Ok((worst, worst_self))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarScope};
    use crate::geom::ChartBox;
    use std::sync::Arc;

    fn field(chart: &Arc<ChartBox>, valence: Valence, src: &[&str]) -> TensorField {
        let scope = VarScope::chart(chart.dim(), "u");
        let comps = src.iter().map(|s| parse_expr(s, &scope).unwrap()).collect();
        TensorField::new("f", valence, chart.clone(), comps).unwrap()
    }

    fn chart(n: usize) -> Arc<ChartBox> {
        Arc::new(ChartBox::cube(n, 3.0))
    }

    #[test]
    fn constant_k_has_no_torsion() {
        let c = chart(2);
        let k = field(&c, Valence::Endomorphism, &["1", "2", "-3", "0.5"]);
        assert_eq!(nijenhuis_torsion(&k, &[0.1, 0.2]).unwrap().max_abs(), 0.0);
        assert_eq!(haantjes_torsion(&k, &[0.1, 0.2]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn diagonal_swap_torsion() {
        let c = chart(2);
        let k = field(&c, Valence::Endomorphism, &["u2", "0", "0", "u1"]);
        let t = nijenhuis_torsion(&k, &[0.0, 1.0]).unwrap();
        assert_eq!(t.get(0, 0, 1), 1.0);
        assert_eq!(t.get(1, 0, 1), 1.0);
        assert_eq!(t.get(0, 1, 0), -1.0);
        let oracle = nijenhuis_by_brackets(&k.jet1s(&[0.0, 1.0]).unwrap(), 2);
        assert_eq!(t, oracle);
        assert!(haantjes_torsion(&k, &[0.0, 1.0]).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn conformal_identity_has_no_torsion() {
        let c = chart(2);
        let k = field(&c, Valence::Endomorphism, &["u1*u2", "0", "0", "u1*u2"]);
        for p in c.sample_points(10, 1) {
            assert!(nijenhuis_torsion(&k, &p).unwrap().max_abs() <= 1e-10);
        }
    }

    #[test]
    fn companion_field_has_haantjes_torsion() {
        let c = chart(3);
        let k = field(&c, Valence::Endomorphism, &["0", "1", "0", "0", "0", "1", "u1", "u2", "u3"]);
        let p = [1.0, 0.0, 0.0];
        let kj = k.jet1s(&p).unwrap();
        let closed = haantjes_jets(&kj, 3);
        let oracle = haantjes_from_torsion(&nijenhuis_by_brackets(&kj, 3), &values(&kj));
        assert!(closed.max_abs() > 0.1);
        for (a, b) in closed.comps.iter().zip(&oracle.comps) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn yano_ako_trivial_cases() {
        let c1 = chart(1);
        let cc = field(&c1, Valence::Tensor12, &["exp(u1) + u1^3"]);
        let v = yano_ako_bracket(&cc, &[0.4], true, 1e-8).unwrap();
        assert!(v.max_abs() < 1e-13);
        // constant symmetric associative: the algebra R[x]/(x^2)
        let c2 = chart(2);
        let k = field(&c2, Valence::Tensor12, &["1", "0", "0", "0", "0", "1", "1", "0"]);
        let v = yano_ako_bracket(&k, &[0.1, 0.2], true, 1e-8).unwrap();
        assert_eq!(v.max_abs(), 0.0);
        assert!(v.warning.is_none());
    }

    #[test]
    fn yano_ako_precondition() {
        let c2 = chart(2);
        // symmetric but not associative
        let bad = field(&c2, Valence::Tensor12, &["1", "0", "0", "1", "1", "1", "1", "0"]);
        let err = yano_ako_bracket(&bad, &[0.1, 0.2], true, 1e-8).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated { .. }));
        let lax = yano_ako_bracket(&bad, &[0.1, 0.2], false, 1e-8).unwrap();
        assert!(lax.warning.is_some());
    }

    #[test]
    fn dk_scalar_examples() {
        let c = chart(2);
        let k = field(&c, Valence::Endomorphism, &["u2", "0", "0", "u1"]);
        let a = field(&c, Valence::Scalar, &["u1"]);
        let p = [0.3, 0.7];
        let da = a.jets(&p).unwrap()[0].grad.clone();
        let dka = dk_scalar(&k.values(&p).unwrap(), &da, 2);
        assert_eq!(dka, vec![0.7, 0.0]);
        let id = TensorField::identity(c.clone());
        assert_eq!(dk_scalar(&id.values(&p).unwrap(), &da, 2), da);
    }

    #[test]
    fn dk_squared_matches_torsion_pairing() {
        let c = chart(2);
        let k = field(&c, Valence::Endomorphism, &["u2", "0", "0", "u1"]);
        let a = field(&c, Valence::Scalar, &["u1"]);
        let p = [0.25, 1.5];
        let w = dk_squared(&k, &a, &p).unwrap();
        // both sides equal u2 - u1 on (∂1, ∂2)
        assert!((w[1] - (p[1] - p[0])).abs() < 1e-14);
        assert!(dk_squared_torsion_residual(&k, &a, &p, &[1.0, 0.0], &[0.0, 1.0]).unwrap() < 1e-14);
        let kc = field(&c, Valence::Endomorphism, &["2", "1", "0", "3"]);
        let b = field(&c, Valence::Scalar, &["sin(u1)*u2^3"]);
        assert!(dk_squared(&kc, &b, &p).unwrap().iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn identities_with_identity_operator() {
        let c = chart(2);
        let id = TensorField::identity(c.clone());
        let alpha = field(&c, Valence::OneForm, &["u1*u2^2", "cos(u1)"]);
        let r = check_d_dk_identities(&id, &alpha, &[0.2, 0.5], &[1.0, 0.3], &[-0.4, 2.0]).unwrap();
        assert!(r.first < 1e-14 && r.second < 1e-14);
    }

    #[test]
    fn ideal_membership_diagnostics() {
        let c = chart(2);
        let k = field(&c, Valence::Endomorphism, &["1", "2", "0", "3"]);
        let a = field(&c, Valence::Scalar, &["4"]);
        let (worst, self_res) = ideal_probe(&k, &a, &c.sample_points(5, 2)).unwrap();
        assert!(worst < 1e-14 && self_res < 1e-14);
        let kd = field(&c, Valence::Endomorphism, &["u2", "0", "0", "u1"]);
        let b = field(&c, Valence::Scalar, &["u1"]);
        let r = ideal_membership_single_generator(&kd, &b, &b, &[0.1, 0.9]).unwrap();
        assert!(r.residual.is_finite());
    }
}
