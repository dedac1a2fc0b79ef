use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{iproduct, per_point, rel, HaantjesCandidate, PotentialSquare, TCoordinates};
use crate::concomitants::{associativity_defect, dk_oneform_jets, dk_scalar, haantjes_jets, nijenhuis_jets, symmetry_defect};
use crate::error::{Error, Result};
use crate::geom::algebra::{apply_form, apply_vector, pair, sup, values};
use crate::geom::{exterior_d_jets, lie_bracket_jets, random, TensorField, Valence, MAX_CONDITION};
use crate::jet::{Jet1, Scalar};
use crate::linalg::{condition_number, inverse, matmul, solve, transpose};

/// Worst residual per operator pair, maximized over points.
#[derive(Clone, Debug, Serialize)]
pub struct PairTable {
    pub m: usize,
    pub residuals: Vec<f64>,
    pub max: f64,
    /// Pair `(j, l)` attaining the maximum, 0-based.
    pub worst: (usize, usize),
}

impl PairTable {
    fn from_rows(m: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut residuals = vec![0.0f64; m * m];
        for r in rows {
            for (a, b) in residuals.iter_mut().zip(r) {
                *a = a.max(b);
            }
        }
        let (idx, max) = residuals.iter().enumerate().fold((0, 0.0f64), |(bi, bm), (i, &v)| if v > bm { (i, v) } else { (bi, bm) });
        PairTable { m, residuals, max, worst: (idx / m, idx % m) }
    }
}

/// `‖K_j K_l - K_l K_j‖` per pair.
pub fn check_commuting(k: &[TensorField], points: &[Vec<f64>]) -> Result<PairTable> {
    let m = k.len();
    let n = k[0].dim();
    let rows = per_point(points, |p| {
        let kv: Vec<Vec<f64>> = k.iter().map(|f| f.values(p)).collect::<Result<_>>()?;
        Ok(iproduct(m)
            .map(|(j, l)| {
                let a = matmul(&kv[j], &kv[l], n);
                let b = matmul(&kv[l], &kv[j], n);
                let diff = a.iter().zip(&b).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
                rel(diff, sup(&a).max(sup(&b)))
            })
            .collect())
    })?;
    Ok(PairTable::from_rows(m, rows))
}

/// `‖d(K_j K_l dA)‖` per pair.
pub fn check_square_closed(cand: &HaantjesCandidate, points: &[Vec<f64>]) -> Result<PairTable> {
    let m = cand.k.len();
    let rows = per_point(points, |p| {
        Ok(cand
            .beta_jets(p)?
            .iter()
            .map(|beta| {
                let d = exterior_d_jets(beta);
                let scale = beta.iter().flat_map(|c| c.grad.iter()).fold(0.0f64, |s, g| s.max(g.abs()));
                rel(sup(&d), scale)
            })
            .collect())
    })?;
    Ok(PairTable::from_rows(m, rows))
}

/// Structure constants `C^m_{jl}` at a point (index `(m*n + j)*n + l`).
#[derive(Clone, Debug, Serialize)]
pub struct StructureConstants {
    pub n: usize,
    pub c: Vec<f64>,
    /// Condition number of the `dA_m` frame.
    pub condition: f64,
    /// `‖K_l K_j - Σ C^m_{jl} K_m‖`, relative.
    pub reconstruction: f64,
    pub symmetry: f64,
    pub associativity: f64,
    /// `max |C^m_{1l} - δ^m_l|`.
    pub unity: f64,
}

fn frame_rows<S: Scalar>(k: &[Vec<S>], da: &[S], n: usize) -> Vec<S> {
    // row m holds the components of dA_m = K_m dA
    k.iter().flat_map(|km| apply_form(km, da, n)).collect()
}

/// Solve `K_j K_l dA = Σ_m C^m_{jl} dA_m` at `p` in any scalar type.
fn solve_constants<S: Scalar>(k: &[Vec<S>], da: &[S], betas: &[Vec<S>], n: usize, p: &[f64]) -> Result<(Vec<S>, f64)> {
    let w = frame_rows(k, da, n);
    let cond = condition_number(&values(&w), n);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::DegenerateFrame { point: p.to_vec(), cond });
    }
    let wt = transpose(&w, n);
    let mut c = vec![da[0].zero_like(); n * n * n];
    for (j, l) in iproduct(n) {
        let sol = solve(&wt, &betas[j * n + l], n).ok_or(Error::DegenerateFrame { point: p.to_vec(), cond })?;
        for (mi, v) in sol.into_iter().enumerate() {
            c[(mi * n + j) * n + l] = v;
        }
    }
    Ok((c, cond))
}

pub fn structure_constants(cand: &HaantjesCandidate, p: &[f64]) -> Result<StructureConstants> {
    let n = cand.n();
    if cand.k.len() != n {
        return Err(Error::Schema(format!("structure constants need {n} operators, got {}", cand.k.len())));
    }
    let k = cand.k_values(p)?;
    let (c, condition) = solve_constants(&k, &cand.da_values(p)?, &cand.beta_values(p)?, n, p)?;
    let mut reconstruction = 0.0f64;
    for (j, l) in iproduct(n) {
        let prod = matmul(&k[l], &k[j], n);
        let mut sum = vec![0.0; n * n];
        for (mi, km) in k.iter().enumerate() {
            let cm = c[(mi * n + j) * n + l];
            for (s, v) in sum.iter_mut().zip(km) {
                *s += cm * v;
            }
        }
        let diff = prod.iter().zip(&sum).fold(0.0f64, |s, (a, b)| s.max((a - b).abs()));
        reconstruction = reconstruction.max(rel(diff, sup(&prod)));
    }
    let scale = sup(&c);
    let mut unity = 0.0f64;
    for mi in 0..n {
        for l in 0..n {
            let want = if mi == l { 1.0 } else { 0.0 };
            unity = unity.max((c[mi * n * n + l] - want).abs());
        }
    }
    Ok(StructureConstants {
        n,
        symmetry: rel(symmetry_defect(&c, n).0, scale),
        associativity: rel(associativity_defect(&c, n).0, scale * scale),
        c,
        condition,
        reconstruction,
        unity,
    })
}

/// Structure constants with first derivatives, for the Yano-Ako bracket.
pub fn structure_constants_jets(cand: &HaantjesCandidate, p: &[f64]) -> Result<Vec<Jet1>> {
    let n = cand.n();
    Ok(solve_constants(&cand.k_jets(p)?, &cand.da_jets(p)?, &cand.beta_jets(p)?, n, p)?.0)
}

/// Chart components `C^i_{ab}` of the (1,2) tensor field with
/// `e_j ∘ e_l = Σ_m C^m_{jl} e_m`, where `e_j = K_j ξ` when a generator `ξ`
/// is given and `e_j = ∂/∂A_j` (dual to `dA_j`) otherwise.
pub fn multiplication_tensor_jets(cand: &HaantjesCandidate, xi: Option<&TensorField>, p: &[f64]) -> Result<Vec<Jet1>> {
    let n = cand.n();
    let c = structure_constants_jets(cand, p)?;
    let singular = |cond| Error::DegenerateFrame { point: p.to_vec(), cond };
    // e[i*n + m] = e_m^i, dual[j*n + a] = (e^j)_a
    let (e, dual) = match xi {
        Some(xi) => {
            let frame = cand.frame_jets(xi, p)?;
            let e: Vec<Jet1> = (0..n * n).map(|k| frame[k % n][k / n].clone()).collect();
            let cond = condition_number(&values(&e), n);
            let dual = inverse(&e, n).filter(|_| cond <= MAX_CONDITION).ok_or_else(|| singular(cond))?;
            (e, dual)
        }
        None => {
            let w = frame_rows(&cand.k_jets(p)?, &cand.da_jets(p)?, n);
            let cond = condition_number(&values(&w), n);
            let e = inverse(&w, n).filter(|_| cond <= MAX_CONDITION).ok_or_else(|| singular(cond))?;
            (e, w)
        }
    };
    let zero = c[0].zero_like();
    let mut out = vec![zero.clone(); n * n * n];
    for i in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut acc = zero.clone();
                for (m, j, l) in (0..n).flat_map(|m| iproduct(n).map(move |(j, l)| (m, j, l))) {
                    acc = acc + e[i * n + m].clone() * c[(m * n + j) * n + l].clone() * dual[j * n + a].clone() * dual[l * n + b].clone();
                }
                out[(i * n + a) * n + b] = acc;
            }
        }
    }
    Ok(out)
}

/// Worst structure-constant residuals over the points where the `dA_m`
/// frame is nondegenerate.
#[derive(Clone, Debug, Serialize)]
pub struct StructureCheck {
    pub reconstruction: f64,
    pub symmetry: f64,
    pub associativity: f64,
    pub unity: f64,
    pub max_condition: f64,
    pub excluded: usize,
    pub evaluated: usize,
}

impl StructureCheck {
    pub fn max(&self) -> f64 {
        self.reconstruction.max(self.symmetry).max(self.associativity).max(self.unity)
    }
}

pub fn check_structure_constants(cand: &HaantjesCandidate, points: &[Vec<f64>]) -> Result<StructureCheck> {
    let rows = per_point(points, |p| match structure_constants(cand, p) {
        Ok(sc) => Ok(Some(sc)),
        Err(Error::DegenerateFrame { .. }) => Ok(None),
        Err(e) => Err(e),
    })?;
    let mut out = StructureCheck {
        reconstruction: 0.0,
        symmetry: 0.0,
        associativity: 0.0,
        unity: 0.0,
        max_condition: 0.0,
        excluded: 0,
        evaluated: 0,
    };
    for r in rows {
        match r {
            None => out.excluded += 1,
            Some(sc) => {
                out.evaluated += 1;
                out.reconstruction = out.reconstruction.max(sc.reconstruction);
                out.symmetry = out.symmetry.max(sc.symmetry);
                out.associativity = out.associativity.max(sc.associativity);
                out.unity = out.unity.max(sc.unity);
                out.max_condition = out.max_condition.max(sc.condition);
            }
        }
    }
    Ok(out)
}

/// The three weak-Haantjes residuals `H_K = 0`, `d d_K A = 0`,
/// `d_K d_K A = 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeakHaantjes {
    pub haantjes: f64,
    pub closed: f64,
    pub dk_closed: f64,
}

impl WeakHaantjes {
    pub fn max(&self) -> f64 {
        self.haantjes.max(self.closed).max(self.dk_closed)
    }
}

pub fn check_weak_haantjes(a: &TensorField, k: &TensorField, points: &[Vec<f64>]) -> Result<WeakHaantjes> {
    a.expect(Valence::Scalar)?;
    k.expect(Valence::Endomorphism)?;
    let n = k.dim();
    let da_field = a.gradient()?;
    let rows = per_point(points, |p| {
        let kj = k.jet1s(p)?;
        let kv = values(&kj);
        let t = nijenhuis_jets(&kj, n);
        let h = haantjes_jets(&kj, n);
        let kscale = 1.0 + sup(&kv);
        let h_res = rel(h.max_abs(), t.max_abs() * kscale * kscale);
        let da = da_field.jet1s(p)?;
        let dka = dk_scalar(&kj, &da, n);
        let grad_scale = dka.iter().flat_map(|c| c.grad.iter()).fold(0.0f64, |s, g| s.max(g.abs()));
        let closed = rel(sup(&exterior_d_jets(&dka)), grad_scale);
        let dk2 = dk_oneform_jets(&kj, &dka, n);
        let dk_closed = rel(sup(&dk2), kscale * grad_scale + sup(&dka) * kj.iter().flat_map(|c| c.grad.iter()).fold(0.0f64, |s, g| s.max(g.abs())));
        Ok(WeakHaantjes { haantjes: h_res, closed, dk_closed })
    })?;
    Ok(rows.into_iter().fold(WeakHaantjes { haantjes: 0.0, closed: 0.0, dk_closed: 0.0 }, |acc, r| WeakHaantjes {
        haantjes: acc.haantjes.max(r.haantjes),
        closed: acc.closed.max(r.closed),
        dk_closed: acc.dk_closed.max(r.dk_closed),
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct LenardResult {
    pub max_condition: f64,
    /// `max ‖[ξ_j, ξ_l]‖`, relative.
    pub bracket: f64,
    pub independent: bool,
}

impl LenardResult {
    pub fn passes(&self, tol: f64) -> bool {
        self.independent && self.bracket <= tol
    }
}

/// Frame `ξ_j = K_j ξ`: independence and pairwise commutation.
pub fn check_lenard_generator(xi: &TensorField, k: &[TensorField], points: &[Vec<f64>]) -> Result<LenardResult> {
    xi.expect(Valence::Vector)?;
    let n = xi.dim();
    let rows = per_point(points, |p| {
        let x = xi.jet1s(p)?;
        let frame: Vec<Vec<Jet1>> =
            k.iter().map(|kj| Ok(apply_vector(&kj.jet1s(p)?, &x, n))).collect::<Result<_>>()?;
        let cond = if frame.len() == n {
            let mut m = vec![0.0; n * n];
            for (j, v) in frame.iter().enumerate() {
                for i in 0..n {
                    m[i * n + j] = v[i].value;
                }
            }
            condition_number(&m, n)
        } else {
            f64::INFINITY
        };
        let mut bracket = 0.0f64;
        for (j, l) in iproduct(frame.len()) {
            if j < l {
                let b = lie_bracket_jets(&frame[j], &frame[l]);
                let scale = frame[j].iter().chain(&frame[l]).flat_map(|c| c.grad.iter()).fold(0.0f64, |s, g| s.max(g.abs()))
                    * (sup(&frame[j]).max(sup(&frame[l])));
                bracket = bracket.max(rel(sup(&b), scale));
            }
        }
        Ok((cond, bracket))
    })?;
    let max_condition = rows.iter().fold(0.0f64, |m, r| if r.0.is_nan() { f64::INFINITY } else { m.max(r.0) });
    let bracket = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(LenardResult { max_condition, bracket, independent: max_condition <= MAX_CONDITION })
}

/// `[K_j ξ, K_l ξ] - K_j[ξ, K_l ξ] - K_l[K_j ξ, ξ]` for a seeded random
/// polynomial `ξ` per pair; worst relative residual.
pub fn check_compatibility_identity(cand: &HaantjesCandidate, points: &[Vec<f64>], seed: u64) -> Result<PairTable> {
    let m = cand.k.len();
    let n = cand.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<TensorField> = (0..m * m).map(|_| random::random_field(&mut rng, &cand.chart, Valence::Vector, 2)).collect();
    let rows = per_point(points, |p| {
        let k = cand.k_jets(p)?;
        let kv: Vec<Vec<f64>> = k.iter().map(|kj| values(kj)).collect();
        iproduct(m)
            .map(|(j, l)| {
                let xi = fields[j * m + l].jet1s(p)?;
                let kjx = apply_vector(&k[j], &xi, n);
                let klx = apply_vector(&k[l], &xi, n);
                let t1 = lie_bracket_jets(&kjx, &klx);
                let t2 = apply_vector(&kv[j], &lie_bracket_jets(&xi, &klx), n);
                let t3 = apply_vector(&kv[l], &lie_bracket_jets(&kjx, &xi), n);
                let r: Vec<f64> = (0..n).map(|i| t1[i] - t2[i] - t3[i]).collect();
                Ok(rel(sup(&r), sup(&t1).max(sup(&t2)).max(sup(&t3))))
            })
            .collect()
    })?;
    Ok(PairTable::from_rows(m, rows))
}

#[derive(Clone, Debug, Serialize)]
pub struct WdvvResult {
    /// Total symmetry of `c_{jlm} = ∂A_{jl}/∂t_m`, relative.
    pub symmetry: f64,
    /// `‖C_j C_l - C_l C_j‖`, relative.
    pub associativity: f64,
    /// Points whose distinguished coordinates were constructed.
    pub coordinates_built: usize,
    pub excluded: usize,
}

impl WdvvResult {
    pub fn max(&self) -> f64 {
        self.symmetry.max(self.associativity)
    }
}

pub fn wdvv_check(cand: &HaantjesCandidate, points: &[Vec<f64>]) -> Result<WdvvResult> {
    wdvv_check_with(cand, points, |p| cand.beta_values(p))
}

/// WDVV check with the differentials `dA_{jl}` supplied by `potential_forms`
/// (normally `K_j K_l dA`), so that perturbed potential tables can be fed in.
pub fn wdvv_check_with<F>(cand: &HaantjesCandidate, points: &[Vec<f64>], potential_forms: F) -> Result<WdvvResult>
where
    F: Fn(&[f64]) -> Result<Vec<Vec<f64>>> + Sync,
{
    let xi = cand.generator.as_ref().ok_or_else(|| Error::NoGenerator("candidate has no generator".into()))?;
    let n = cand.n();
    let tc = TCoordinates::new(cand, xi);
    let rows = per_point(points, |p| {
        tc.coordinates(p)?;
        let frame = cand.frame_values(xi, p)?;
        let forms = potential_forms(p)?;
        let mut c = vec![0.0; n * n * n];
        for (j, l) in iproduct(n) {
            for mi in 0..n {
                c[(j * n + l) * n + mi] = pair(&forms[j * n + l], &frame[mi]);
            }
        }
        let mut sym = 0.0f64;
        for j in 0..n {
            for l in 0..n {
                for mi in 0..n {
                    let v = c[(j * n + l) * n + mi];
                    for w in [c[(l * n + j) * n + mi], c[(mi * n + l) * n + j], c[(j * n + mi) * n + l]] {
                        sym = sym.max((v - w).abs());
                    }
                }
            }
        }
        let sc = match structure_constants(cand, p) {
            Ok(sc) => sc,
            Err(Error::DegenerateFrame { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        // (C_j)^m_l = C^m_{jl}
        let cj = |j: usize| -> Vec<f64> {
            let mut mat = vec![0.0; n * n];
            for mi in 0..n {
                for l in 0..n {
                    mat[mi * n + l] = sc.c[(mi * n + j) * n + l];
                }
            }
            mat
        };
        let mut assoc = 0.0f64;
        for (j, l) in iproduct(n) {
            let (a, b) = (cj(j), cj(l));
            let ab = matmul(&a, &b, n);
            let ba = matmul(&b, &a, n);
            let d = ab.iter().zip(&ba).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
            assoc = assoc.max(rel(d, sup(&ab).max(sup(&ba))));
        }
        Ok(Some((rel(sym, sup(&c)), assoc)))
    })?;
    let mut out = WdvvResult { symmetry: 0.0, associativity: 0.0, coordinates_built: 0, excluded: 0 };
    for r in rows {
        match r {
            Some((s, a)) => {
                out.coordinates_built += 1;
                out.symmetry = out.symmetry.max(s);
                out.associativity = out.associativity.max(a);
            }
            None => out.excluded += 1,
        }
    }
    Ok(out)
}

/// Recovered potentials against the Hessian of the supplied `F` in the
/// distinguished coordinates, both anchored at the base point.
#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub hessian: f64,
    /// `F` rebuilt from the potentials along rays, modulo its quadratic
    /// Taylor polynomial at the origin (report extra, not gated).
    pub reconstruction: f64,
}

pub fn hessian_round_trip(cand: &HaantjesCandidate, square: &PotentialSquare) -> Result<RoundTrip> {
    let xi = cand.generator.as_ref().ok_or_else(|| Error::NoGenerator("candidate has no generator".into()))?;
    let f = cand.f.as_ref().ok_or_else(|| Error::Schema("candidate has no potential F".into()))?;
    let n = cand.n();
    let tc = TCoordinates::new(cand, xi);
    let t0 = tc.coordinates(&cand.chart.base)?;
    let eval = |t: &[f64]| f.eval_jet2(t).map_err(|source| Error::Eval { point: t.to_vec(), source });
    let f0 = eval(&t0)?;
    let rows = per_point(&square.points, |p| tc.coordinates(p))?;
    let mut hessian = 0.0f64;
    for (t, vals) in rows.iter().zip(&square.values) {
        let ft = eval(t)?;
        let mut d = 0.0f64;
        let mut scale = 0.0f64;
        for (j, l) in iproduct(n) {
            let want = ft.h(j, l) - f0.h(j, l);
            d = d.max((vals[j * n + l] - want).abs());
            scale = scale.max(want.abs());
        }
        hessian = hessian.max(rel(d, scale));
    }
    // Gauss-Legendre nodes on [0, 1]
    const NODES: [(f64, f64); 5] = [
        (0.046_910_077_030_668_0, 0.118_463_442_528_094_54),
        (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
        (0.5, 0.284_444_444_444_444_44),
        (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
        (0.953_089_922_969_332, 0.118_463_442_528_094_54),
    ];
    let integ = super::PotentialIntegrator::new(cand);
    let mut reconstruction = 0.0f64;
    for t in rows.iter().take(3) {
        let tau: Vec<f64> = t.iter().zip(&t0).map(|(a, b)| a - b).collect();
        let mut acc = 0.0;
        for (s, w) in NODES {
            let q = tc.point(&tau.iter().map(|v| s * v).collect::<Vec<_>>())?;
            let h = integ.at(&q)?;
            let mut quad = 0.0;
            for (j, l) in iproduct(n) {
                quad += tau[j] * h[j * n + l] * tau[l];
            }
            acc += w * (1.0 - s) * quad;
        }
        let ft = eval(t)?;
        let mut taylor = f0.value;
        for j in 0..n {
            taylor += f0.grad[j] * tau[j];
            for l in 0..n {
                taylor += 0.5 * tau[j] * f0.h(j, l) * tau[l];
            }
        }
        let want = ft.value - taylor;
        reconstruction = reconstruction.max(rel((acc - want).abs(), want.abs()));
    }
    Ok(RoundTrip { hessian, reconstruction })
}
