//! The check pipeline behind `haantjes check` and its JSON certificate.
//!
//! Records are produced in dependency order. A check whose executed
//! prerequisite did not pass is recorded as SKIPPED; prerequisites that were
//! not requested are computed silently when a check needs their output.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::certifier::{
    check_commuting, check_compatibility_identity, check_lenard_generator, check_square_closed,
    check_structure_constants, check_weak_haantjes, hessian_round_trip, multiplication_tensor_jets, per_point, rel,
    wdvv_check, HaantjesCandidate, PotentialIntegrator, PotentialSquare,
};
use crate::concomitants::{ideal_probe, yano_ako_checked};
use crate::error::{Error, Result};
use crate::geom::algebra::{identity, sup, values};
use crate::manifest::{probe_points, Manifest};
use crate::symmetry::{
    build_metric, commutator_lemma_check, connection_check, fit_conformal_symmetry, flatness_certificate,
    riemann_check, ConformalSymmetryFit, Flatness, RiemannCheck, RIEMANN_FACTOR,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_POINTS: usize = 50;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Check ids in execution order.
pub const CHECK_IDS: [&str; 17] = [
    "commute",
    "square-closed",
    "potentials",
    "structure-constants",
    "yano-ako",
    "weak-haantjes",
    "lenard",
    "compatibility",
    "wdvv",
    "round-trip",
    "ideal",
    "conformal-fit",
    "metric",
    "commutator-lemma",
    "connection",
    "riemann",
    "flatness",
];

/// The relation each check measures.
pub fn anchor(id: &str) -> &'static str {
    match id {
        "commute" => "[K_j, K_l] = 0",
        "square-closed" => "d(K_j K_l dA) = 0",
        "potentials" => "dA_jl = K_j K_l dA, A_jl = A_lj",
        "structure-constants" => "K_j K_l dA = sum_m C^m_jl dA_m, K_j K_l = sum_m C^m_jl K_m",
        "yano-ako" => "Yano-Ako bracket of C vanishes",
        "weak-haantjes" => "H_K = 0, d(K dA) = 0, d(d_K(K dA)) = 0",
        "lenard" => "xi_j = K_j xi independent, [xi_j, xi_l] = 0",
        "compatibility" => "[K_j xi, K_l xi] = K_j[xi, K_l xi] + K_l[K_j xi, xi]",
        "wdvv" => "c_jlm totally symmetric, C_j C_l = C_l C_j",
        "round-trip" => "A_jl = d^2 F / dt_j dt_l",
        "ideal" => "d_K^2 B = dA ^ dB",
        "conformal-fit" => "L_xi dA = alpha dA, L_xi K_j = gamma_j K_j",
        "metric" => "g(xi_j, xi_l) = xi(A_jl), C^t_jm = sum_s g^ts c_jms",
        "commutator-lemma" => "[xi_j, xi_l] = (gamma_l - gamma_j) sum_m c_jlm d/dA_m",
        "connection" => "Koszul connection of g on the frame xi_j",
        "riemann" => "R(xi_j, xi_l) = 0",
        "flatness" => "g flat",
        _ => "",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
    Info,
    Flat,
    NotFlat,
    HypothesesUnmet,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIPPED",
            Verdict::Info => "INFO",
            Verdict::Flat => "FLAT",
            Verdict::NotFlat => "NOT_FLAT",
            Verdict::HypothesesUnmet => "HYPOTHESES_UNMET",
        }
    }

    /// INFO never gates; everything but PASS and FLAT fails the run.
    pub fn gates_ok(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::Flat | Verdict::Info)
    }
}

impl From<Flatness> for Verdict {
    fn from(f: Flatness) -> Verdict {
        match f {
            Flatness::Flat => Verdict::Flat,
            Flatness::NotFlat => Verdict::NotFlat,
            Flatness::HypothesesUnmet => Verdict::HypothesesUnmet,
        }
    }
}

/// Residuals and tolerances as 17-significant-digit decimal strings.
pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub points: usize,
    pub max_residual: Option<String>,
    pub tolerance: String,
    pub verdict: Verdict,
    pub excluded: usize,
    pub detail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartSummary {
    pub label: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub base: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub manifest: String,
    pub manifest_hash: String,
    pub chart: ChartSummary,
    pub seed: u64,
    pub points: usize,
    pub tolerance: String,
    pub checks: Vec<CheckRecord>,
    pub overall: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl CertificateReport {
    pub fn record(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// `(id, expected, got)` for every expected verdict not reproduced.
    pub fn expectation_mismatches(&self, expect: &BTreeMap<String, String>) -> Vec<(String, String, String)> {
        expect
            .iter()
            .filter_map(|(id, want)| {
                let got = self.record(id).map_or("NOT_RUN", |r| r.verdict.as_str());
                (got != want).then(|| (id.clone(), want.clone(), got.to_string()))
            })
            .collect()
    }
}

/// Run settings; unset fields fall back to the manifest, then to defaults.
#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub only: Option<Vec<String>>,
    pub timing: bool,
}

fn validate_ids(ids: &[String], origin: &str) -> Result<()> {
    for id in ids {
        if !CHECK_IDS.contains(&id.as_str()) {
            return Err(Error::Schema(format!("{origin}: unknown check id '{id}' (known: {})", CHECK_IDS.join(", "))));
        }
    }
    Ok(())
}

fn is_identity(cand: &HaantjesCandidate, j: usize) -> Result<bool> {
    let id = identity(cand.n());
    for p in probe_points(&cand.chart) {
        if cand.k[j].values(&p)? != id {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that apply to the candidate's data when nothing is requested.
fn applicable(cand: &HaantjesCandidate, nontrivial: &[usize]) -> Vec<String> {
    CHECK_IDS
        .iter()
        .filter(|id| match **id {
            "weak-haantjes" | "ideal" => !nontrivial.is_empty(),
            "lenard" | "wdvv" => cand.generator.is_some(),
            "round-trip" => cand.generator.is_some() && cand.f.is_some(),
            "conformal-fit" | "metric" | "commutator-lemma" | "connection" | "riemann" | "flatness" => cand.symmetry.is_some(),
            _ => true,
        })
        .map(|s| s.to_string())
        .collect()
}

fn prerequisites(id: &str) -> &'static [&'static str] {
    match id {
        "potentials" => &["square-closed"],
        "yano-ako" => &["structure-constants", "lenard"],
        "wdvv" => &["square-closed", "lenard"],
        "round-trip" => &["potentials", "lenard"],
        "commutator-lemma" | "connection" | "riemann" => &["conformal-fit"],
        _ => &[],
    }
}

/// Outcome of one check before it becomes a record.
struct Outcome {
    residual: Option<f64>,
    tolerance: f64,
    verdict: Verdict,
    excluded: usize,
    detail: Value,
}

impl Outcome {
    fn gate(residual: f64, tolerance: f64, excluded: usize, detail: Value) -> Outcome {
        let verdict = if residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        Outcome { residual: Some(residual), tolerance, verdict, excluded, detail }
    }

    fn skipped(tolerance: f64, why: String) -> Outcome {
        Outcome { residual: None, tolerance, verdict: Verdict::Skipped, excluded: 0, detail: json!({ "reason": why }) }
    }

    fn error(tolerance: f64, e: &Error) -> Outcome {
        Outcome { residual: None, tolerance, verdict: Verdict::Fail, excluded: 0, detail: json!({ "error": e.to_string() }) }
    }
}

/// Errors a check reports as a FAIL record rather than aborting the run.
fn numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::Domain { .. }
            | Error::Eval { .. }
            | Error::SingularJacobian { .. }
            | Error::PreconditionViolated { .. }
            | Error::NotClosed { .. }
            | Error::QuadratureStall { .. }
            | Error::DegenerateFrame { .. }
            | Error::NoGenerator(_)
            | Error::FrameIntegrationFailure(_)
            | Error::ZeroDenominator { .. }
            | Error::SingularMetric { .. }
    )
}

struct Pipeline<'a> {
    cand: &'a HaantjesCandidate,
    points: Vec<Vec<f64>>,
    seed: u64,
    tol: f64,
    nontrivial: Vec<usize>,
    square: Option<PotentialSquare>,
    fit: Option<ConformalSymmetryFit>,
    riemann: Option<RiemannCheck>,
    metric_ok: Option<bool>,
}

impl Pipeline<'_> {
    fn symmetry(&self) -> Result<&crate::geom::TensorField> {
        self.cand.symmetry.as_ref().ok_or_else(|| Error::Schema("candidate has no symmetry field".into()))
    }

    fn generator(&self) -> Result<&crate::geom::TensorField> {
        self.cand.generator.as_ref().ok_or_else(|| Error::NoGenerator("candidate has no generator".into()))
    }

    fn fit(&mut self) -> Result<ConformalSymmetryFit> {
        if self.fit.is_none() {
            self.fit = Some(fit_conformal_symmetry(self.symmetry()?, self.cand, &self.points)?);
        }
        Ok(self.fit.clone().expect("fit computed"))
    }

    fn square(&mut self) -> Result<&PotentialSquare> {
        if self.square.is_none() {
            self.square = Some(PotentialIntegrator::new(self.cand).tabulate(&self.points)?);
        }
        Ok(self.square.as_ref().expect("square computed"))
    }

    fn run(&mut self, id: &str) -> Result<Outcome> {
        let tol = self.tol;
        let cand = self.cand;
        let out = match id {
            "commute" => {
                let t = check_commuting(&cand.k, &self.points)?;
                Outcome::gate(t.max, tol, 0, json!({ "worst_pair": [t.worst.0 + 1, t.worst.1 + 1] }))
            }
            "square-closed" => {
                let t = check_square_closed(cand, &self.points)?;
                Outcome::gate(t.max, tol, 0, json!({ "worst_pair": [t.worst.0 + 1, t.worst.1 + 1] }))
            }
            "potentials" => {
                let s = self.square()?;
                let detail = json!({ "symmetry_defect": s.symmetry_defect, "path_defect": s.path_defect });
                Outcome::gate(s.symmetry_defect.max(s.path_defect), tol, 0, detail)
            }
            "structure-constants" => {
                let s = check_structure_constants(cand, &self.points)?;
                let detail = json!({
                    "reconstruction": s.reconstruction,
                    "symmetry": s.symmetry,
                    "associativity": s.associativity,
                    "unity": s.unity,
                    "max_condition": s.max_condition,
                });
                if s.evaluated == 0 {
                    Outcome { residual: None, tolerance: tol, verdict: Verdict::Fail, excluded: s.excluded, detail }
                } else {
                    Outcome::gate(s.max(), tol, s.excluded, detail)
                }
            }
            "yano-ako" => {
                // On the Lenard frame when a generator exists; otherwise on
                // the coordinate frame of the potentials, reported only.
                let n = cand.n();
                let xi = cand.generator.as_ref();
                let rows = per_point(&self.points, |p| match multiplication_tensor_jets(cand, xi, p) {
                    Ok(c) => {
                        let v = yano_ako_checked(&c, n, false, tol)?;
                        let grads = c.iter().flat_map(|j| j.grad.iter().copied()).fold(0.0f64, |m, g| m.max(g.abs()));
                        let scale = sup(&values(&c)) * (1.0 + grads);
                        Ok(Some((rel(v.max_abs(), scale), v.symmetry_residual.max(v.associativity_residual))))
                    }
                    Err(Error::DegenerateFrame { .. }) => Ok(None),
                    Err(e) => Err(e),
                })?;
                let excluded = rows.iter().filter(|r| r.is_none()).count();
                let (bracket, pre) = rows.iter().flatten().fold((0.0f64, 0.0f64), |a, r| (a.0.max(r.0), a.1.max(r.1)));
                let basis = if xi.is_some() { "lenard-frame" } else { "potential-coordinates" };
                let detail = json!({ "bracket": bracket, "precondition": pre, "basis": basis });
                if excluded == rows.len() {
                    Outcome { residual: None, tolerance: tol, verdict: Verdict::Fail, excluded, detail }
                } else if xi.is_none() {
                    Outcome { residual: Some(bracket.max(pre)), tolerance: tol, verdict: Verdict::Info, excluded, detail }
                } else {
                    Outcome::gate(bracket.max(pre), tol, excluded, detail)
                }
            }
            "weak-haantjes" => {
                let mut worst = 0.0f64;
                let mut per = serde_json::Map::new();
                for &j in &self.nontrivial {
                    let w = check_weak_haantjes(&cand.a, &cand.k[j], &self.points)?;
                    worst = worst.max(w.max());
                    per.insert(
                        format!("K{}", j + 1),
                        json!({ "haantjes": w.haantjes, "closed": w.closed, "dk_closed": w.dk_closed }),
                    );
                }
                Outcome::gate(worst, tol, 0, Value::Object(per))
            }
            "lenard" => {
                let r = check_lenard_generator(self.generator()?, &cand.k, &self.points)?;
                let detail = json!({ "max_condition": r.max_condition, "independent": r.independent });
                let verdict = if r.passes(tol) { Verdict::Pass } else { Verdict::Fail };
                Outcome { residual: Some(r.bracket), tolerance: tol, verdict, excluded: 0, detail }
            }
            "compatibility" => {
                let t = check_compatibility_identity(cand, &self.points, self.seed)?;
                Outcome::gate(t.max, tol, 0, json!({ "worst_pair": [t.worst.0 + 1, t.worst.1 + 1] }))
            }
            "wdvv" => {
                let w = wdvv_check(cand, &self.points)?;
                let detail = json!({ "symmetry": w.symmetry, "associativity": w.associativity, "coordinates_built": w.coordinates_built });
                if w.coordinates_built == 0 {
                    Outcome { residual: None, tolerance: tol, verdict: Verdict::Fail, excluded: w.excluded, detail }
                } else {
                    Outcome::gate(w.max(), tol, w.excluded, detail)
                }
            }
            "round-trip" => {
                let square = self.square()?.clone();
                let r = hessian_round_trip(cand, &square)?;
                Outcome::gate(r.hessian, tol, 0, json!({ "hessian": r.hessian, "reconstruction": r.reconstruction }))
            }
            "ideal" => {
                let mut worst = 0.0f64;
                let mut per = serde_json::Map::new();
                for &j in &self.nontrivial {
                    let (r, s) = ideal_probe(&cand.k[j], &cand.a, &self.points)?;
                    worst = worst.max(r);
                    per.insert(format!("K{}", j + 1), json!({ "membership": r, "self": s, "single_generator": r <= tol }));
                }
                Outcome { residual: Some(worst), tolerance: tol, verdict: Verdict::Info, excluded: 0, detail: Value::Object(per) }
            }
            "conformal-fit" => {
                let f = self.fit()?;
                let detail = json!({ "alpha": f.alpha, "gamma": f.gamma, "residual": f.residual, "constancy_defect": f.constancy_defect });
                let verdict = if f.passes(tol) { Verdict::Pass } else { Verdict::Fail };
                Outcome { residual: Some(f.residual.max(f.constancy_defect)), tolerance: tol, verdict, excluded: f.excluded, detail }
            }
            "metric" => {
                let xi = self.symmetry()?;
                let rows = per_point(&self.points, |p| build_metric(xi, cand, p))?;
                let (mut worst, mut cond) = (0.0f64, 0.0f64);
                for md in &rows {
                    worst = worst.max(md.c_symmetry).max(md.inverse_defect).max(md.frame_defect);
                    cond = cond.max(md.condition);
                }
                let out = Outcome::gate(worst, tol, 0, json!({ "max_condition": cond }));
                self.metric_ok = Some(out.verdict == Verdict::Pass);
                out
            }
            "commutator-lemma" => {
                let f = self.fit()?;
                Outcome::gate(commutator_lemma_check(self.symmetry()?, cand, &f.gamma, &self.points)?, tol, 0, Value::Null)
            }
            "connection" => {
                let f = self.fit()?;
                let c = connection_check(self.symmetry()?, cand, &f, &self.points)?;
                let detail = json!({
                    "koszul_agreement": c.koszul_agreement,
                    "metric_derivative": c.metric_derivative,
                    "compatibility": c.compatibility,
                    "c_derivative": c.c_derivative,
                });
                Outcome::gate(c.max(), tol, 0, detail)
            }
            "riemann" => {
                let f = self.fit()?;
                let r = riemann_check(self.symmetry()?, cand, &f, &self.points)?;
                let detail = json!({
                    "closed_form": r.closed_form,
                    "constants_form": r.constants_form,
                    "dual_path": r.dual_path,
                    "oracle": r.oracle,
                    "oracle_agreement": r.oracle_agreement,
                });
                let curvature = r.closed_form.max(r.constants_form).max(r.oracle);
                let ok = curvature <= RIEMANN_FACTOR * tol && r.dual_path <= tol && r.oracle_agreement <= RIEMANN_FACTOR * tol;
                self.riemann = Some(r.clone());
                Outcome {
                    residual: Some(r.max()),
                    tolerance: RIEMANN_FACTOR * tol,
                    verdict: if ok { Verdict::Pass } else { Verdict::Fail },
                    excluded: 0,
                    detail,
                }
            }
            "flatness" => self.flatness()?,
            other => return Err(Error::Schema(format!("unknown check id '{other}'"))),
        };
        Ok(out)
    }

    fn flatness(&mut self) -> Result<Outcome> {
        let tol = self.tol;
        let xi = self.symmetry()?.clone();
        let fit = match self.fit() {
            Ok(f) => f,
            Err(e) if numerical(&e) => {
                let detail = json!({ "reasons": [e.to_string()], "signature": Value::Null });
                return Ok(Outcome { residual: None, tolerance: RIEMANN_FACTOR * tol, verdict: Verdict::HypothesesUnmet, excluded: 0, detail });
            }
            Err(e) => return Err(e),
        };
        if self.metric_ok.is_none() {
            let ok = per_point(&self.points, |p| build_metric(&xi, self.cand, p)).is_ok();
            self.metric_ok = Some(ok);
        }
        if self.riemann.is_none() && fit.passes(tol) && self.metric_ok == Some(true) {
            self.riemann = riemann_check(&xi, self.cand, &fit, &self.points).ok();
        }
        let cert = flatness_certificate(&xi, self.cand, &fit, self.riemann.as_ref(), self.metric_ok.unwrap_or(false), tol);
        let detail = json!({ "reasons": cert.reasons, "signature": cert.signature });
        Ok(Outcome {
            residual: self.riemann.as_ref().map(|r| r.max()),
            tolerance: RIEMANN_FACTOR * tol,
            verdict: cert.verdict.into(),
            excluded: fit.excluded,
            detail,
        })
    }
}

/// Run the requested checks on a manifest's candidate.
pub fn run_checks(manifest: &Manifest, opts: &CheckOptions) -> Result<CertificateReport> {
    let started = Instant::now();
    let cand = HaantjesCandidate::from_manifest(manifest)?;
    let settings = &manifest.checks;
    let npoints = opts.points.or(settings.points).unwrap_or(DEFAULT_POINTS);
    let seed = opts.seed.or(settings.seed).unwrap_or(DEFAULT_SEED);
    let tol = opts.tol.or(settings.tol).unwrap_or(DEFAULT_TOL);
    if npoints == 0 {
        return Err(Error::Schema("points must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Schema("tol must be positive".into()));
    }
    if let Some(run) = &settings.run {
        validate_ids(run, "checks.run")?;
    }
    if let Some(only) = &opts.only {
        validate_ids(only, "--only")?;
    }
    let mut nontrivial = Vec::new();
    for j in 0..cand.k.len() {
        if !is_identity(&cand, j)? {
            nontrivial.push(j);
        }
    }
    let requested = opts.only.clone().or_else(|| settings.run.clone()).unwrap_or_else(|| applicable(&cand, &nontrivial));
    let mut pipe = Pipeline {
        cand: &cand,
        points: cand.chart.sample_points(npoints, seed),
        seed,
        tol,
        nontrivial,
        square: None,
        fit: None,
        riemann: None,
        metric_ok: None,
    };
    let mut records: Vec<CheckRecord> = Vec::new();
    for id in CHECK_IDS.iter().filter(|id| requested.iter().any(|r| r == *id)) {
        let t0 = Instant::now();
        let blocked = prerequisites(id).iter().find(|pre| records.iter().any(|r| r.id == **pre && !r.verdict.gates_ok()));
        let out = match blocked {
            Some(pre) => Outcome::skipped(tol, format!("prerequisite {pre} did not pass")),
            None => match pipe.run(id) {
                Ok(o) => o,
                Err(e) if numerical(&e) => Outcome::error(tol, &e),
                Err(e) => return Err(e),
            },
        };
        records.push(CheckRecord {
            id: id.to_string(),
            anchor: anchor(id).to_string(),
            points: npoints,
            max_residual: out.residual.map(decimal),
            tolerance: decimal(out.tolerance),
            verdict: out.verdict,
            excluded: out.excluded,
            detail: out.detail,
            elapsed_ms: opts.timing.then(|| t0.elapsed().as_secs_f64() * 1e3),
        });
    }
    let overall = if records.iter().all(|r| r.verdict.gates_ok()) { Verdict::Pass } else { Verdict::Fail };
    let c = &cand.chart;
    Ok(CertificateReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        manifest: manifest.name.clone(),
        manifest_hash: manifest.hash.clone(),
        chart: ChartSummary { label: c.label.clone(), lower: c.lower.clone(), upper: c.upper.clone(), base: c.base.clone() },
        seed,
        points: npoints,
        tolerance: decimal(tol),
        checks: records,
        overall,
        elapsed_ms: opts.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
    })
}

/// Process exit code for an error: 2 for bad input (manifest, flags), 1 for
/// numerical failures of the requested computation, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema(_)
        | Error::Expr { .. }
        | Error::UnknownScenario(_)
        | Error::Io(_)
        | Error::ValenceMismatch { .. }
        | Error::DimensionMismatch { .. }
        | Error::CflViolation { .. } => 2,
        e if numerical(e) => 1,
        Error::Blowup { .. } | Error::ChartExit { .. } => 1,
        _ => 3,
    }
}
