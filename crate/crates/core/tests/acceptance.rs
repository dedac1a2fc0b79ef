//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N ... PASS|FAIL` line before asserting.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use haantjes::certifier::HaantjesCandidate;
use haantjes::concomitants::{
    check_d_dk_identities, dk_squared_torsion_residual, haantjes_torsion, nijenhuis_torsion, yano_ako_bracket,
};
use haantjes::error::Error;
use haantjes::expr::Expr;
use haantjes::geom::algebra::sup;
use haantjes::geom::random::{random_chart_map, random_diagonal, random_field, random_polynomial};
use haantjes::geom::{ChartBox, ChartMap, TensorField, Valence};
use haantjes::hydro::{
    commuting_flows_check, conservation_drift, initial_state, simulate, Grid, Scheme, CONSERVATION_WINDOW,
};
use haantjes::linalg::inverse;
use haantjes::manifest::Manifest;
use haantjes::report::{run_checks, CertificateReport, CheckOptions, Verdict};

fn verdict_line(n: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {n} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn residual(r: &CertificateReport, id: &str) -> f64 {
    r.record(id).and_then(|c| c.max_residual.as_ref()).map_or(f64::INFINITY, |s| s.parse().unwrap())
}

fn detail(r: &CertificateReport, id: &str, key: &str) -> f64 {
    r.record(id).and_then(|c| c.detail.get(key)).and_then(|v| v.as_f64()).unwrap_or(f64::INFINITY)
}

fn run(name: &str, only: &[&str]) -> CertificateReport {
    let m = Manifest::load(name).unwrap();
    let opts = CheckOptions {
        points: Some(50),
        seed: Some(42),
        only: Some(only.iter().map(|s| s.to_string()).collect()),
        ..Default::default()
    };
    run_checks(&m, &opts).unwrap()
}

#[test]
fn criterion_1_identity_suite() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut cases) = (0.0f64, 0);
    for dim in 2..=4 {
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        for _ in 0..20 {
            let k = random_field(&mut rng, &chart, Valence::Endomorphism, 2);
            let a = TensorField::scalar("A", chart.clone(), random_polynomial(&mut rng, dim, 3)).unwrap();
            let alpha = random_field(&mut rng, &chart, Valence::OneForm, 2);
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let eta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ids = check_d_dk_identities(&k, &alpha, &p, &xi, &eta).unwrap();
            let sq = dk_squared_torsion_residual(&k, &a, &p, &xi, &eta).unwrap();
            worst = worst.max(ids.first).max(ids.second).max(sq);
            cases += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let ok = worst <= 1e-9 && cases >= 50 && secs < 10.0;
    verdict_line(1, "identity suite", ok, format!("{cases} inputs, worst {worst:.2e}, {secs:.2}s"));
    assert!(ok);
}

/// `(1,4)` components under `v = φ(u)`: one Jacobian per upper slot, one
/// inverse per lower slot.
fn transform_14(t: &[f64], j: &[f64], jinv: &[f64], n: usize) -> Vec<f64> {
    let mut cur = t.to_vec();
    for slot in 0..5 {
        let stride = n.pow(4 - slot as u32);
        let mut next = vec![0.0; cur.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let a = (idx / stride) % n;
            let base = idx - a * stride;
            *out = (0..n)
                .map(|i| {
                    let w = if slot == 0 { j[a * n + i] } else { jinv[i * n + a] };
                    w * cur[base + i * stride]
                })
                .sum();
        }
        cur = next;
    }
    cur
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    d / (1.0 + sup(a).max(sup(b)))
}

/// Multiplication of the a3 Frobenius algebra in flat coordinates:
/// symmetric and associative at every point.
fn frobenius_c(chart: &Arc<ChartBox>) -> TensorField {
    let v = |i| Expr::var(i);
    let c = |m: usize, j: usize, l: usize| -> Expr {
        let (a, b) = (j.min(l), j.max(l));
        match (m, a, b) {
            (0, 0, 0) | (1, 0, 1) | (2, 0, 2) | (2, 1, 1) => Expr::num(1.0),
            (0, 1, 1) | (1, 1, 2) => v(2),
            (0, 1, 2) | (1, 2, 2) => v(1),
            (0, 2, 2) => Expr::pow(v(2), 2),
            _ => Expr::num(0.0),
        }
    };
    let comps = (0..27).map(|k| c(k / 9, (k / 3) % 3, k % 3)).collect();
    TensorField::new("C", Valence::Tensor12, chart.clone(), comps).unwrap()
}

#[test]
fn criterion_2_tensoriality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for trial in 0..6 {
        let dim = 2 + trial % 2;
        let chart = Arc::new(ChartBox::cube(3, 0.5));
        let chart = if dim == 3 { chart } else { Arc::new(ChartBox::cube(2, 0.5)) };
        let map: ChartMap = random_chart_map(&mut rng, dim, 0.3);
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let q = map.apply(&p).unwrap();
        let j = map.jacobian(&p).unwrap();
        let jinv = inverse(&j, dim).unwrap();
        let k = random_field(&mut rng, &chart, Valence::Endomorphism, 2);
        let kv = map.transform_field(&k).unwrap();
        let n_old = nijenhuis_torsion(&k, &p).unwrap();
        let n_new = nijenhuis_torsion(&kv, &q).unwrap();
        let want = haantjes::geom::transform_components(Valence::Tensor12, &n_old.comps, &j, &jinv, dim);
        worst = worst.max(rel_err(&want, &n_new.comps));
        let h_old = haantjes_torsion(&k, &p).unwrap();
        let h_new = haantjes_torsion(&kv, &q).unwrap();
        let want = haantjes::geom::transform_components(Valence::Tensor12, &h_old.comps, &j, &jinv, dim);
        worst = worst.max(rel_err(&want, &h_new.comps));
        if dim == 3 {
            let c = frobenius_c(&chart);
            let cv = map.transform_field(&c).unwrap();
            let y_old = yano_ako_bracket(&c, &p, true, 1e-8).unwrap();
            let y_new = yano_ako_bracket(&cv, &q, true, 1e-8).unwrap();
            worst = worst.max(rel_err(&transform_14(&y_old.comps, &j, &jinv, dim), &y_new.comps));
        }
    }
    let ok = worst <= 1e-8;
    verdict_line(2, "tensoriality", ok, format!("worst relative error {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_3_diagonal_haantjes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let dim = 2 + i % 3;
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        let k = random_diagonal(&mut rng, &chart, 2);
        for p in chart.sample_points(5, i as u64) {
            let h = haantjes_torsion(&k, &p).unwrap();
            let kv = k.values(&p).unwrap();
            let grads = k.jet1s(&p).unwrap().iter().flat_map(|j| j.grad.clone()).fold(0.0f64, |m, g| m.max(g.abs()));
            // H is quartic: three factors of K and one derivative
            let scale = (1.0 + sup(&kv)).powi(3) * (1.0 + grads);
            worst = worst.max(h.max_abs() / scale);
        }
    }
    let ok = worst <= 1e-10;
    verdict_line(3, "diagonal Haantjes torsion", ok, format!("20 fields, worst {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_4_a3_certification() {
    let started = Instant::now();
    let m = Manifest::load("a3-frobenius").unwrap();
    let opts = CheckOptions { points: Some(50), seed: Some(42), ..Default::default() };
    let r = run_checks(&m, &opts).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let core = [
        "commute",
        "square-closed",
        "potentials",
        "structure-constants",
        "yano-ako",
        "weak-haantjes",
        "lenard",
        "wdvv",
    ];
    let worst = core.iter().map(|id| residual(&r, id)).fold(0.0, f64::max);
    let core_pass = core.iter().all(|id| r.record(id).map(|c| c.verdict) == Some(Verdict::Pass));
    let excluded: usize = r.checks.iter().map(|c| c.excluded).sum();
    let ok = r.overall == Verdict::Pass && core_pass && worst <= 1e-8 && excluded == 0 && secs < 60.0;
    verdict_line(
        4,
        "a3-frobenius certification",
        ok,
        format!("{} checks, worst core residual {worst:.2e}, excluded {excluded}, {secs:.2}s", r.checks.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_5_round_trip() {
    let r = run("a3-frobenius", &["round-trip"]);
    let h = residual(&r, "round-trip");
    let ok = h <= 1e-8 && r.record("round-trip").unwrap().verdict == Verdict::Pass;
    verdict_line(5, "Hessian round trip", ok, format!("hessian residual {h:.2e}"));
    assert!(ok);
}

const NON_CONSTANT_GAMMA: &str = r#"
name = "non-constant-gamma"

[chart]
lower = [0.5, 0.5]
upper = [1.5, 1.5]

[fields.A]
valence = "scalar"
expr = "u2"

[fields.K2]
valence = "(1,1)"
components = { "1.1" = "u1", "1.2" = "0", "2.1" = "0", "2.2" = "u1" }

[fields.xi]
valence = "vector"
components = { "1" = "u1^2", "2" = "u2" }

[candidate]
A = "A"
K = ["Id", "K2"]
symmetry = "xi"
"#;

#[test]
fn criterion_6_flatness() {
    let ids = ["conformal-fit", "metric", "riemann", "flatness"];
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["a3-frobenius", "scaling"] {
        let r = run(name, &ids);
        let paths = detail(&r, "riemann", "closed_form").max(detail(&r, "riemann", "constants_form"));
        let oracle = detail(&r, "riemann", "oracle");
        let dual = detail(&r, "riemann", "dual_path");
        let flat = r.record("flatness").unwrap().verdict == Verdict::Flat;
        ok &= paths <= 1e-7 && oracle <= 1e-7 && dual <= 1e-9 && flat;
        lines.push(format!("{name}: closed {paths:.1e}, oracle {oracle:.1e}, dual {dual:.1e}"));
    }
    let m = Manifest::parse(NON_CONSTANT_GAMMA, "inline").unwrap();
    let r = run_checks(&m, &CheckOptions { only: Some(vec!["flatness".into()]), ..Default::default() }).unwrap();
    let neg = r.record("flatness").unwrap().verdict;
    ok &= neg == Verdict::HypothesesUnmet;
    lines.push(format!("negative control {}", neg.as_str()));
    verdict_line(6, "flatness", ok, lines.join("; "));
    assert!(ok);
}

#[test]
fn criterion_7_hydrodynamic_compatibility() {
    let mut parts = Vec::new();
    let mut ok = true;

    let mut compat = 0.0f64;
    for name in ["a3-frobenius", "scaling"] {
        compat = compat.max(residual(&run(name, &["compatibility"]), "compatibility"));
    }
    ok &= compat <= 1e-8;
    parts.push(format!("identity {compat:.1e}"));

    let m = Manifest::load("a3-frobenius").unwrap();
    let cand = HaantjesCandidate::from_manifest(&m).unwrap();
    let grid = Grid::new(32, 1.0, Scheme::Spectral).unwrap();
    let u0 = initial_state(&cand.chart, &grid, 0.05, 2).unwrap();
    let mut min_order = f64::INFINITY;
    for (j, l) in [(0, 1), (0, 2), (1, 2)] {
        let s = commuting_flows_check(&u0, &cand.k[j], &cand.k[l], &grid, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        // identical flows commute exactly; there is no order to measure
        if s.discrepancy.iter().all(|d| *d < 1e-15) {
            continue;
        }
        min_order = min_order.min(s.min_order());
    }
    ok &= min_order >= 3.0;
    parts.push(format!("commutation order {min_order:.2}"));

    let drift = conservation_drift(&cand, 1, &CONSERVATION_WINDOW).unwrap();
    let worst = drift.iter().copied().fold(0.0, f64::max);
    ok &= worst <= 1e-6;
    parts.push(format!("drift {worst:.1e}"));

    let adv = HaantjesCandidate::from_manifest(&Manifest::load("advection").unwrap()).unwrap();
    let grid = Grid::new(256, 1.0, Scheme::Central4).unwrap();
    let rows = simulate(&adv.chart, &adv.k[0], &grid, 0.05, 1e-3, 1000, 1000, |p| Ok(p.to_vec())).unwrap();
    let last = rows.last().unwrap();
    let err = last.translation_error.unwrap();
    ok &= (last.t - 1.0).abs() < 1e-9 && err <= 1e-6;
    parts.push(format!("advection error {err:.1e}"));

    verdict_line(7, "hydrodynamic compatibility", ok, parts.join(", "));
    assert!(ok);
}

#[test]
fn criterion_8_negative_controls() {
    let mut parts = Vec::new();
    let mut ok = true;

    let a = run("perturbed-a3", &["square-closed"]);
    let b = run("perturbed-a3", &["square-closed"]);
    let closed = a.record("square-closed").unwrap().verdict;
    ok &= closed == Verdict::Fail && a.to_json() == b.to_json();
    parts.push(format!("perturbed-a3 square-closed {}", closed.as_str()));

    let c = run("companion-3d", &["weak-haantjes"]);
    let d = run("companion-3d", &["weak-haantjes"]);
    let rec = c.record("weak-haantjes").unwrap();
    let h = rec.detail.as_object().unwrap().values().map(|v| v["haantjes"].as_f64().unwrap()).fold(0.0, f64::max);
    ok &= rec.verdict == Verdict::Fail && h > 1e-8 && c.to_json() == d.to_json();
    parts.push(format!("companion-3d Haantjes torsion {h:.2e}"));

    let chart = Arc::new(ChartBox::cube(2, 1.0));
    let one = || Expr::num(1.0);
    let zero = || Expr::num(0.0);
    // C^1_11 = C^1_22 = C^2_22 = 1: symmetric but not associative
    let comps = vec![one(), zero(), zero(), one(), zero(), zero(), zero(), one()];
    let cf = TensorField::new("C", Valence::Tensor12, chart, comps).unwrap();
    let refused = (0..2).all(|_| {
        matches!(
            yano_ako_bracket(&cf, &[0.1, 0.2], true, 1e-8),
            Err(Error::PreconditionViolated { ref condition, .. }) if condition == "associativity"
        )
    });
    ok &= refused;
    parts.push(format!("non-associative C refused {refused}"));

    verdict_line(8, "negative controls", ok, parts.join(", "));
    assert!(ok);
}
