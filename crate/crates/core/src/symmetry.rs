//! Conformal symmetries `L_ξ dA = α dA`, `L_ξ K_j = γ_j K_j`, the induced
//! metric `g(ξ_j, ξ_l) = ξ(A_{jl})` on the frame `ξ_j = K_j ξ`, its
//! Levi-Civita connection and curvature, and the flatness verdict.
//!
//! Frame arrays are indexed by frame labels: `g[j*n + l]`,
//! `c[(j*n + l)*n + m]`, `R[((m*n + p)*n + j)*n + l] = g(R(ξ_j, ξ_l)ξ_m, ξ_p)`
//! with `R(X,Y) = ∇_X∇_Y - ∇_Y∇_X - ∇_[X,Y]`.

use serde::Serialize;

use crate::certifier::{iproduct, per_point, rel, HaantjesCandidate};
use crate::error::{Error, Result};
use crate::geom::algebra::{apply_vector, pair, sup, values};
use crate::geom::{lie_bracket_jets, lie_derivative_endo_jets, lie_derivative_form_jets, TensorField, Valence, MAX_CONDITION};
use crate::jet::{Jet1, Jet2, Scalar};
use crate::linalg::{condition_number, inverse, signature, solve};

/// Threshold below which `|dA|²` or `|K_j|²` counts as zero in the fit.
const FIT_FLOOR: f64 = 1e-24;

#[derive(Clone, Debug, Serialize)]
pub struct ConformalSymmetryFit {
    /// Mean of the pointwise fits.
    pub alpha: f64,
    pub gamma: Vec<f64>,
    /// Deviation from exact proportionality, worst over points.
    pub residual: f64,
    /// Spread (max - min) of the fitted scales over points, relative.
    pub constancy_defect: f64,
    pub excluded: usize,
    pub evaluated: usize,
}

impl ConformalSymmetryFit {
    pub fn passes(&self, tol: f64) -> bool {
        self.evaluated > 0 && self.residual <= tol && self.constancy_defect <= tol
    }
}

fn ratio_fit(lie: &[f64], base: &[f64], p: &[f64]) -> Result<(f64, f64)> {
    let den: f64 = base.iter().map(|b| b * b).sum();
    if den <= FIT_FLOOR {
        return Err(Error::ZeroDenominator { point: p.to_vec() });
    }
    let s = lie.iter().zip(base).map(|(a, b)| a * b).sum::<f64>() / den;
    let dev = lie.iter().zip(base).fold(0.0f64, |m, (a, b)| m.max((a - s * b).abs()));
    Ok((s, rel(dev, sup(lie))))
}

/// Least-squares ratios of `L_ξ dA` against `dA` and `L_ξ K_j` against `K_j`
/// at every point; points where a denominator vanishes are excluded.
pub fn fit_conformal_symmetry(xi: &TensorField, cand: &HaantjesCandidate, points: &[Vec<f64>]) -> Result<ConformalSymmetryFit> {
    xi.expect(Valence::Vector)?;
    let m = cand.k.len();
    let rows = per_point(points, |p| {
        let x = xi.jet1s(p)?;
        let da = cand.da_jets(p)?;
        let fit = (|| {
            let (alpha, r0) = ratio_fit(&lie_derivative_form_jets(&da, &x), &values(&da), p)?;
            let mut scales = vec![alpha];
            let mut res = r0;
            for k in cand.k_jets(p)? {
                let (g, r) = ratio_fit(&lie_derivative_endo_jets(&k, &x), &values(&k), p)?;
                scales.push(g);
                res = res.max(r);
            }
            Ok((scales, res))
        })();
        match fit {
            Ok(v) => Ok(Some(v)),
            Err(Error::ZeroDenominator { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let fitted: Vec<(Vec<f64>, f64)> = rows.iter().flatten().cloned().collect();
    let excluded = rows.len() - fitted.len();
    if fitted.is_empty() {
        return Ok(ConformalSymmetryFit {
            alpha: f64::NAN,
            gamma: vec![f64::NAN; m],
            residual: f64::INFINITY,
            constancy_defect: f64::INFINITY,
            excluded,
            evaluated: 0,
        });
    }
    let count = fitted.len() as f64;
    let mut mean = vec![0.0; m + 1];
    let mut lo = vec![f64::INFINITY; m + 1];
    let mut hi = vec![f64::NEG_INFINITY; m + 1];
    let mut residual = 0.0f64;
    for (s, r) in &fitted {
        residual = residual.max(*r);
        for i in 0..=m {
            mean[i] += s[i] / count;
            lo[i] = lo[i].min(s[i]);
            hi[i] = hi[i].max(s[i]);
        }
    }
    let constancy_defect = (0..=m).fold(0.0f64, |d, i| d.max(rel(hi[i] - lo[i], mean[i].abs())));
    Ok(ConformalSymmetryFit {
        alpha: mean[0],
        gamma: mean[1..].to_vec(),
        residual,
        constancy_defect,
        excluded,
        evaluated: fitted.len(),
    })
}

/// Metric data at one point.
#[derive(Clone, Debug, Serialize)]
pub struct MetricData {
    pub n: usize,
    pub point: Vec<f64>,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    /// `c_{jlm} = ξ_m(A_{jl})`.
    pub c: Vec<f64>,
    /// Frame matrix: column `j` holds `ξ_j` in chart coordinates.
    pub frame: Vec<f64>,
    pub condition: f64,
    /// Total-symmetry defect of `c`, relative.
    pub c_symmetry: f64,
    /// `‖g g⁻¹ - Id‖`.
    pub inverse_defect: f64,
    /// `‖ξ_j - Σ g_{jm} ∂/∂A_m‖`, relative.
    pub frame_defect: f64,
}

fn frame_matrix(frame: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n * n];
    for (j, v) in frame.iter().enumerate() {
        for i in 0..n {
            x[i * n + j] = v[i];
        }
    }
    x
}

/// `g_{jl} = ξ(A_{jl}) = (K_j K_l dA)(ξ)` and `c_{jlm} = (K_j K_l dA)(ξ_m)`.
pub fn build_metric(xi: &TensorField, cand: &HaantjesCandidate, p: &[f64]) -> Result<MetricData> {
    let n = cand.n();
    let beta = cand.beta_values(p)?;
    let x = xi.values(p)?;
    let frame = cand.frame_values(xi, p)?;
    let g: Vec<f64> = iproduct(n).map(|(j, l)| pair(&beta[j * n + l], &x)).collect();
    let condition = condition_number(&g, n);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularMetric { point: p.to_vec(), cond: condition });
    }
    let g_inv = inverse(&g, n).ok_or(Error::SingularMetric { point: p.to_vec(), cond: condition })?;
    let mut c = vec![0.0; n * n * n];
    for (j, l) in iproduct(n) {
        for m in 0..n {
            c[(j * n + l) * n + m] = pair(&beta[j * n + l], &frame[m]);
        }
    }
    let mut sym = 0.0f64;
    for j in 0..n {
        for l in 0..n {
            for m in 0..n {
                let v = c[(j * n + l) * n + m];
                for w in [c[(l * n + j) * n + m], c[(j * n + m) * n + l], c[(m * n + l) * n + j]] {
                    sym = sym.max((v - w).abs());
                }
            }
        }
    }
    let gg = crate::linalg::matmul(&g, &g_inv, n);
    let inverse_defect = gg.iter().enumerate().fold(0.0f64, |d, (i, v)| {
        d.max((v - if i / n == i % n { 1.0 } else { 0.0 }).abs())
    });
    // ∂/∂A_m are the columns of W⁻¹, W having rows dA_m = K_m dA
    let da = cand.da_values(p)?;
    let w: Vec<f64> = cand.k_values(p)?.iter().flat_map(|k| crate::geom::algebra::apply_form(k, &da, n)).collect();
    let frame_defect = match inverse(&w, n) {
        Some(v) => {
            let mut d = 0.0f64;
            for j in 0..n {
                for i in 0..n {
                    let want: f64 = (0..n).map(|m| g[j * n + m] * v[i * n + m]).sum();
                    d = d.max((frame[j][i] - want).abs());
                }
            }
            rel(d, frame.iter().fold(0.0f64, |s, f| s.max(sup(f))))
        }
        None => f64::INFINITY,
    };
    Ok(MetricData {
        n,
        point: p.to_vec(),
        frame: frame_matrix(&frame, n),
        c_symmetry: rel(sym, sup(&c)),
        g,
        g_inv,
        c,
        condition,
        inverse_defect,
        frame_defect,
    })
}

/// `[ξ_j, ξ_l]` against `(γ_l - γ_j) Σ_m c_{jlm} ∂/∂A_m`, worst over points.
pub fn commutator_lemma_check(xi: &TensorField, cand: &HaantjesCandidate, gamma: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    let n = cand.n();
    let rows = per_point(points, |p| {
        let md = build_metric(xi, cand, p)?;
        let frame = cand.frame_jets(xi, p)?;
        let da = cand.da_values(p)?;
        let w: Vec<f64> = cand.k_values(p)?.iter().flat_map(|k| crate::geom::algebra::apply_form(k, &da, n)).collect();
        let v = inverse(&w, n).ok_or(Error::DegenerateFrame { point: p.to_vec(), cond: f64::INFINITY })?;
        let mut worst = 0.0f64;
        for (j, l) in iproduct(n) {
            let lhs = lie_bracket_jets(&frame[j], &frame[l]);
            let rhs: Vec<f64> = (0..n)
                .map(|i| (gamma[l] - gamma[j]) * (0..n).map(|m| md.c[(j * n + l) * n + m] * v[i * n + m]).sum::<f64>())
                .collect();
            let d = lhs.iter().zip(&rhs).fold(0.0f64, |s, (a, b)| s.max((a - b).abs()));
            worst = worst.max(rel(d, sup(&lhs).max(sup(&rhs))));
        }
        Ok(worst)
    })?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Frame connection coefficients `Γ_{jlm} = g(∇_{ξ_j} ξ_l, ξ_m)` by two
/// routes, and the derivative relations they rest on.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionCheck {
    /// Closed form `(α/2 + γ_l) c_{jlm}` against the Koszul formula.
    pub koszul_agreement: f64,
    /// `ξ_m(g_{jl}) = (α + γ_j + γ_l) c_{jlm}`.
    pub metric_derivative: f64,
    /// `ξ_m(g_{jl}) = Γ_{mjl} + Γ_{mlj}`.
    pub compatibility: f64,
    /// `ξ_j(c_{lmp}) - ξ_l(c_{jmp}) = (γ_l - γ_j) Σ c_{jls} g^{st} c_{mpt}`.
    pub c_derivative: f64,
}

impl ConnectionCheck {
    pub fn max(&self) -> f64 {
        self.koszul_agreement.max(self.metric_derivative).max(self.compatibility).max(self.c_derivative)
    }
}

/// Koszul evaluation of `Γ_{jlm}` at `p` from directly computed frame
/// derivatives of `g` and actual brackets.
pub fn koszul_connection(xi: &TensorField, cand: &HaantjesCandidate, p: &[f64]) -> Result<Vec<f64>> {
    let n = cand.n();
    let md = build_metric(xi, cand, p)?;
    let frame = cand.frame_jets(xi, p)?;
    let dg = metric_frame_derivatives(xi, cand, p, &frame)?;
    // g(v, ξ_m) for a chart vector v: expand v in the frame first
    let g_with = |v: &[f64], m: usize| -> Result<f64> {
        let b = solve(&md.frame, v, n).ok_or(Error::SingularMetric { point: p.to_vec(), cond: f64::INFINITY })?;
        Ok((0..n).map(|s| b[s] * md.g[s * n + m]).sum())
    };
    let mut out = vec![0.0; n * n * n];
    for j in 0..n {
        for l in 0..n {
            for m in 0..n {
                let jl = lie_bracket_jets(&frame[j], &frame[l]);
                let jm = lie_bracket_jets(&frame[j], &frame[m]);
                let lm = lie_bracket_jets(&frame[l], &frame[m]);
                let d = |a: usize, b: usize, c: usize| dg[(a * n + b) * n + c];
                out[(j * n + l) * n + m] = 0.5
                    * (d(j, l, m) + d(l, j, m) - d(m, j, l) + g_with(&jl, m)? - g_with(&jm, l)? - g_with(&lm, j)?);
            }
        }
    }
    Ok(out)
}

/// `ξ_a(g_{bc})` at index `(a*n + b)*n + c`.
fn metric_frame_derivatives(xi: &TensorField, cand: &HaantjesCandidate, p: &[f64], frame: &[Vec<Jet1>]) -> Result<Vec<f64>> {
    let n = cand.n();
    let beta = cand.beta_jets(p)?;
    let x = xi.jet1s(p)?;
    let g: Vec<Jet1> = iproduct(n).map(|(j, l)| pair(&beta[j * n + l], &x)).collect();
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        let dir = values(&frame[a]);
        for bc in 0..n * n {
            out[a * n * n + bc] = g[bc].directional(&dir);
        }
    }
    Ok(out)
}

pub fn connection_check(xi: &TensorField, cand: &HaantjesCandidate, fit: &ConformalSymmetryFit, points: &[Vec<f64>]) -> Result<ConnectionCheck> {
    let n = cand.n();
    let (alpha, gamma) = (fit.alpha, &fit.gamma);
    let rows = per_point(points, |p| {
        let md = build_metric(xi, cand, p)?;
        let koszul = koszul_connection(xi, cand, p)?;
        let frame = cand.frame_jets(xi, p)?;
        let dg = metric_frame_derivatives(xi, cand, p, &frame)?;
        let c = &md.c;
        let cs = sup(c);
        let mut agree = 0.0f64;
        let mut deriv = 0.0f64;
        let mut compat = 0.0f64;
        for j in 0..n {
            for l in 0..n {
                for m in 0..n {
                    let closed = (alpha / 2.0 + gamma[l]) * c[(j * n + l) * n + m];
                    agree = agree.max(rel((closed - koszul[(j * n + l) * n + m]).abs(), cs));
                    let dm = dg[(m * n + j) * n + l];
                    deriv = deriv.max(rel((dm - (alpha + gamma[j] + gamma[l]) * c[(j * n + l) * n + m]).abs(), cs));
                    let sum = koszul[(m * n + j) * n + l] + koszul[(m * n + l) * n + j];
                    compat = compat.max(rel((dm - sum).abs(), dm.abs()));
                }
            }
        }
        // ξ_j(c_{lmp}) with c_{lmp} = β_{lm}(ξ_p) differentiated as jets
        let beta = cand.beta_jets(p)?;
        let cj: Vec<Jet1> = (0..n * n * n)
            .map(|idx| {
                let (lm, pp) = (idx / n, idx % n);
                pair(&beta[lm], &frame[pp])
            })
            .collect();
        let mut cder = 0.0f64;
        for (j, l) in iproduct(n) {
            for (m, q) in iproduct(n) {
                let lhs = cj[(l * n + m) * n + q].directional(&values(&frame[j]))
                    - cj[(j * n + m) * n + q].directional(&values(&frame[l]));
                let mut rhs = 0.0;
                for (s, t) in iproduct(n) {
                    rhs += c[(j * n + l) * n + s] * md.g_inv[s * n + t] * c[(m * n + q) * n + t];
                }
                rhs *= gamma[l] - gamma[j];
                cder = cder.max(rel((lhs - rhs).abs(), lhs.abs().max(rhs.abs())));
            }
        }
        Ok(ConnectionCheck { koszul_agreement: agree, metric_derivative: deriv, compatibility: compat, c_derivative: cder })
    })?;
    Ok(rows.into_iter().fold(
        ConnectionCheck { koszul_agreement: 0.0, metric_derivative: 0.0, compatibility: 0.0, c_derivative: 0.0 },
        |a, r| ConnectionCheck {
            koszul_agreement: a.koszul_agreement.max(r.koszul_agreement),
            metric_derivative: a.metric_derivative.max(r.metric_derivative),
            compatibility: a.compatibility.max(r.compatibility),
            c_derivative: a.c_derivative.max(r.c_derivative),
        },
    ))
}

/// Frame Riemann components by the closed form in `c` and `g⁻¹`, and by the
/// form in the structure constants `C^t_{jm} = Σ_s g^{ts} c_{jms}`.
pub fn riemann_closed_form(md: &MetricData, alpha: f64, gamma: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let n = md.n;
    let c = |a: usize, b: usize, d: usize| md.c[(a * n + b) * n + d];
    let mut big_c = vec![0.0; n * n * n];
    for t in 0..n {
        for (j, m) in iproduct(n) {
            big_c[(t * n + j) * n + m] = (0..n).map(|s| md.g_inv[t * n + s] * c(j, m, s)).sum();
        }
    }
    let bc = |t: usize, j: usize, m: usize| big_c[(t * n + j) * n + m];
    let mut r_c = vec![0.0; n.pow(4)];
    let mut r_big = vec![0.0; n.pow(4)];
    let mut scale = 0.0f64;
    for (m, p) in iproduct(n) {
        let pre = (alpha / 2.0 + gamma[m]) * (alpha / 2.0 + gamma[p]);
        for (j, l) in iproduct(n) {
            let mut a = 0.0;
            for (s, t) in iproduct(n) {
                let term1 = md.g_inv[s * n + t] * c(j, m, s) * c(l, p, t);
                let term2 = md.g_inv[s * n + t] * c(j, p, t) * c(l, m, s);
                a += term1 - term2;
                scale = scale.max(pre.abs() * term1.abs().max(term2.abs()));
            }
            let mut b = 0.0;
            for (q, t) in iproduct(n) {
                b += md.g[p * n + q] * (bc(q, l, t) * bc(t, j, m) - bc(q, j, t) * bc(t, l, m));
            }
            let idx = ((m * n + p) * n + j) * n + l;
            r_c[idx] = pre * a;
            r_big[idx] = pre * b;
        }
    }
    (r_c, r_big, scale)
}

/// Lowered coordinate Riemann tensor `R_{abcd} = g(R(∂_c, ∂_d)∂_b, ∂_a)`
/// of a metric given by 2-jets of its components, with the magnitude of
/// the largest contributing term.
pub fn coordinate_riemann(g: &[Jet2], n: usize) -> Result<(Vec<f64>, f64)> {
    let g1: Vec<Jet1> = g.iter().map(Jet2::to_jet1).collect();
    let g_inv = inverse(&g1, n).ok_or(Error::SingularMetric { point: vec![], cond: f64::INFINITY })?;
    // Γ^k_{ij} as first-order jets
    let mut gamma = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for (i, j) in iproduct(n) {
            let mut acc = Jet1::cst(0.0, n);
            for l in 0..n {
                let t = g[l * n + j].partial(i) + g[l * n + i].partial(j) - g[i * n + j].partial(l);
                acc = acc + g_inv[k * n + l].clone() * t;
            }
            gamma.push(acc.scale(0.5));
        }
    }
    let gm = |a: usize, b: usize, c: usize| &gamma[(a * n + b) * n + c];
    let mut r_up = vec![0.0; n.pow(4)];
    let mut scale = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for (c, d) in iproduct(n) {
                let mut v = gm(a, d, b).grad[c] - gm(a, c, b).grad[d];
                scale = scale.max(gm(a, d, b).grad[c].abs()).max(gm(a, c, b).grad[d].abs());
                for e in 0..n {
                    let t1 = gm(a, c, e).value * gm(e, d, b).value;
                    let t2 = gm(a, d, e).value * gm(e, c, b).value;
                    v += t1 - t2;
                    scale = scale.max(t1.abs()).max(t2.abs());
                }
                r_up[((a * n + b) * n + c) * n + d] = v;
            }
        }
    }
    let gv: Vec<f64> = g.iter().map(|x| x.value).collect();
    let mut r = vec![0.0; n.pow(4)];
    for (a, b) in iproduct(n) {
        for (c, d) in iproduct(n) {
            r[((a * n + b) * n + c) * n + d] = (0..n).map(|e| gv[a * n + e] * r_up[((e * n + b) * n + c) * n + d]).sum();
        }
    }
    Ok((r, scale * (1.0 + sup(&gv))))
}

/// Independent curvature route: push the frame metric to chart coordinates,
/// `G = X⁻ᵀ g X⁻¹`, in second-order jets, take the coordinate Riemann
/// tensor, and convert back to the frame.
pub fn riemann_from_metric_oracle(xi: &TensorField, cand: &HaantjesCandidate, p: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = cand.n();
    let beta = cand.beta_jet2s(p)?;
    let x = xi.jets(p)?;
    let g: Vec<Jet2> = iproduct(n).map(|(j, l)| pair(&beta[j * n + l], &x)).collect();
    let k = cand.k_jet2s(p)?;
    let mut frame = vec![Jet2::cst(0.0, n); n * n];
    for (j, kj) in k.iter().enumerate() {
        for (i, v) in apply_vector(kj, &x, n).into_iter().enumerate() {
            frame[i * n + j] = v;
        }
    }
    let cond = condition_number(&values(&frame), n);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularMetric { point: p.to_vec(), cond });
    }
    let xinv = inverse(&frame, n).ok_or(Error::SingularMetric { point: p.to_vec(), cond })?;
    let mut big_g = vec![Jet2::cst(0.0, n); n * n];
    for (a, b) in iproduct(n) {
        let mut acc = Jet2::cst(0.0, n);
        for (j, l) in iproduct(n) {
            acc = acc + xinv[j * n + a].clone() * g[j * n + l].clone() * xinv[l * n + b].clone();
        }
        big_g[a * n + b] = acc;
    }
    let (r, scale) = coordinate_riemann(&big_g, n).map_err(|_| Error::SingularMetric { point: p.to_vec(), cond })?;
    let xv = values(&frame);
    let xf = |i: usize, j: usize| xv[i * n + j];
    let mut out = vec![0.0; n.pow(4)];
    let xs = sup(&xv).max(1.0);
    for (m, pp) in iproduct(n) {
        for (j, l) in iproduct(n) {
            let mut v = 0.0;
            for (a, b) in iproduct(n) {
                for (c, d) in iproduct(n) {
                    v += r[((a * n + b) * n + c) * n + d] * xf(a, pp) * xf(b, m) * xf(c, j) * xf(d, l);
                }
            }
            out[((m * n + pp) * n + j) * n + l] = v;
        }
    }
    Ok((out, scale * xs.powi(4)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Flatness {
    Flat,
    NotFlat,
    HypothesesUnmet,
}

impl Flatness {
    pub fn as_str(self) -> &'static str {
        match self {
            Flatness::Flat => "FLAT",
            Flatness::NotFlat => "NOT_FLAT",
            Flatness::HypothesesUnmet => "HYPOTHESES_UNMET",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RiemannCheck {
    /// Closed form in `c`, relative.
    pub closed_form: f64,
    /// Structure-constant form, relative.
    pub constants_form: f64,
    /// `max |closed - constants form|`, relative.
    pub dual_path: f64,
    /// Coordinate-metric oracle, relative.
    pub oracle: f64,
    /// `max |closed - oracle|`, relative.
    pub oracle_agreement: f64,
}

impl RiemannCheck {
    pub fn max(&self) -> f64 {
        self.closed_form.max(self.constants_form).max(self.dual_path).max(self.oracle).max(self.oracle_agreement)
    }
}

pub fn riemann_check(xi: &TensorField, cand: &HaantjesCandidate, fit: &ConformalSymmetryFit, points: &[Vec<f64>]) -> Result<RiemannCheck> {
    let rows = per_point(points, |p| {
        let md = build_metric(xi, cand, p)?;
        let (rc, rb, scale) = riemann_closed_form(&md, fit.alpha, &fit.gamma);
        let (ro, oscale) = riemann_from_metric_oracle(xi, cand, p)?;
        let dual = rc.iter().zip(&rb).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let agree = rc.iter().zip(&ro).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Ok(RiemannCheck {
            closed_form: rel(sup(&rc), scale),
            constants_form: rel(sup(&rb), scale),
            dual_path: rel(dual, scale),
            oracle: rel(sup(&ro), oscale),
            oracle_agreement: rel(agree, scale.max(oscale)),
        })
    })?;
    Ok(rows.into_iter().fold(
        RiemannCheck { closed_form: 0.0, constants_form: 0.0, dual_path: 0.0, oracle: 0.0, oracle_agreement: 0.0 },
        |a, r| RiemannCheck {
            closed_form: a.closed_form.max(r.closed_form),
            constants_form: a.constants_form.max(r.constants_form),
            dual_path: a.dual_path.max(r.dual_path),
            oracle: a.oracle.max(r.oracle),
            oracle_agreement: a.oracle_agreement.max(r.oracle_agreement),
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessCertificate {
    pub verdict: Flatness,
    /// `(positive, negative, zero)` eigenvalue counts of `g` at the base point.
    pub signature: Option<(usize, usize, usize)>,
    pub reasons: Vec<String>,
}

/// Riemann residuals above `RIEMANN_FACTOR * tol` mean not flat.
pub const RIEMANN_FACTOR: f64 = 10.0;

pub fn flatness_certificate(
    xi: &TensorField,
    cand: &HaantjesCandidate,
    fit: &ConformalSymmetryFit,
    riemann: Option<&RiemannCheck>,
    metric_ok: bool,
    tol: f64,
) -> FlatnessCertificate {
    let mut reasons = Vec::new();
    if !fit.passes(tol) {
        reasons.push(format!(
            "conformal fit: residual {:e}, constancy defect {:e}",
            fit.residual, fit.constancy_defect
        ));
    }
    if !metric_ok {
        reasons.push("metric xi(A_jl) singular or not built".into());
    }
    let signature = build_metric(xi, cand, &cand.chart.base).ok().map(|md| signature(&md.g, md.n, 1e-10));
    let verdict = if !reasons.is_empty() {
        Flatness::HypothesesUnmet
    } else {
        match riemann {
            Some(r) if r.closed_form.max(r.constants_form).max(r.oracle) <= RIEMANN_FACTOR * tol && r.dual_path <= tol => {
                Flatness::Flat
            }
            Some(r) => {
                reasons.push(format!("Riemann residual {:e}", r.max()));
                Flatness::NotFlat
            }
            None => {
                reasons.push("curvature not evaluated".into());
                Flatness::HypothesesUnmet
            }
        }
    };
    FlatnessCertificate { verdict, signature, reasons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarScope};

    #[test]
    fn sphere_oracle_self_test() {
        // diag(1, sin²θ): R_{θφθφ} = sin²θ
        let scope = VarScope::chart(2, "u");
        let comps = ["1", "0", "0", "sin(u1)^2"].map(|s| parse_expr(s, &scope).unwrap());
        let p = [0.7, 0.2];
        let seed = Jet2::seed(&p);
        let g: Vec<Jet2> = comps.iter().map(|e| e.eval(&seed).unwrap()).collect();
        let (r, _) = coordinate_riemann(&g, 2).unwrap();
        let want = p[0].sin().powi(2);
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * 2 + b) * 2 + c) * 2 + d;
        // g(R(∂θ,∂φ)∂φ, ∂θ) = R_{θφθφ}
        assert!((r[idx(0, 1, 0, 1)] - want).abs() <= 1e-6);
        assert!((r[idx(0, 1, 1, 0)] + want).abs() <= 1e-6);
        assert!(r[idx(0, 0, 0, 1)].abs() <= 1e-12);
    }

    #[test]
    fn constant_metric_is_flat() {
        let g: Vec<Jet2> = [2.0, 0.5, 0.5, -1.0].iter().map(|&v| Jet2::cst(v, 2)).collect();
        let (r, _) = coordinate_riemann(&g, 2).unwrap();
        assert!(sup(&r) == 0.0);
    }
}
