//! The Yano-Ako bracket of the a3 multiplication in two bases. Expected
//! values come from an independent symbolic computation.

use haantjes::certifier::{multiplication_tensor_jets, HaantjesCandidate};
use haantjes::concomitants::{yano_ako_bracket, yano_ako_checked};
use haantjes::expr::Expr;
use haantjes::geom::{TensorField, Valence};
use haantjes::manifest::Manifest;

fn a3() -> HaantjesCandidate {
    HaantjesCandidate::from_manifest(&Manifest::load("a3-frobenius").unwrap()).unwrap()
}

/// `C^m_{jl} = (K_j K_l dA)_m` built symbolically; `dA = du1` here.
fn potential_c(cand: &HaantjesCandidate) -> TensorField {
    let n = cand.n();
    let k = |j: usize, a: usize, b: usize| cand.k[j].comps[a * n + b].clone();
    let mut comps = Vec::new();
    for m in 0..n {
        for j in 0..n {
            for l in 0..n {
                comps.push(Expr::sum((0..n).map(|s| Expr::mul(k(j, s, m), k(l, 0, s)))));
            }
        }
    }
    TensorField::new("C", Valence::Tensor12, cand.chart.clone(), comps).unwrap()
}

#[test]
fn potential_coordinate_tensor_matches_symbolic_construction() {
    let cand = a3();
    let c = potential_c(&cand);
    for p in cand.chart.sample_points(10, 3) {
        let jets = multiplication_tensor_jets(&cand, None, &p).unwrap();
        for (a, b) in jets.iter().zip(c.jet1s(&p).unwrap()) {
            assert!((a.value - b.value).abs() < 1e-12);
            for (x, y) in a.grad.iter().zip(&b.grad) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn bracket_in_potential_coordinates_does_not_vanish() {
    let cand = a3();
    let v = yano_ako_bracket(&potential_c(&cand), &cand.chart.base, true, 1e-8).unwrap();
    // 1-based (m, j, k, l, r) at the base point (0.5, 0.1, 1.5)
    let frozen = [
        ((1, 1, 1, 2, 2), 1.0),
        ((1, 1, 1, 3, 3), 1.0),
        ((1, 1, 2, 2, 3), 0.5),
        ((1, 1, 3, 2, 3), 0.1),
        ((1, 2, 2, 1, 1), -1.0),
        ((1, 2, 2, 3, 3), 0.75),
        ((2, 2, 2, 2, 3), 1.5),
        ((2, 2, 3, 3, 3), 0.25),
        ((3, 2, 2, 3, 3), 2.0),
        ((3, 3, 3, 2, 2), -2.0),
    ];
    for ((m, j, k, l, r), want) in frozen {
        let got = v.get(m - 1, j - 1, k - 1, l - 1, r - 1);
        assert!((got - want).abs() < 1e-12, "[C,C]^{m}_{j}{k}{l}{r} = {got}, expected {want}");
    }
    assert_eq!(v.comps.iter().filter(|x| x.abs() > 1e-12).count(), 76);
    assert!((v.max_abs() - 2.0).abs() < 1e-12);
}

#[test]
fn bracket_vanishes_on_the_lenard_frame() {
    let cand = a3();
    for p in cand.chart.sample_points(20, 11) {
        let c = multiplication_tensor_jets(&cand, cand.generator.as_ref(), &p).unwrap();
        let v = yano_ako_checked(&c, 3, true, 1e-8).unwrap();
        assert!(v.max_abs() < 1e-10, "bracket {} at {p:?}", v.max_abs());
    }
}

#[test]
fn bracket_is_antisymmetric_in_index_pairs() {
    let cand = a3();
    let v = yano_ako_bracket(&potential_c(&cand), &[0.3, -0.1, 1.2], false, 1e-8).unwrap();
    let n = 3;
    for m in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    for r in 0..n {
                        assert!((v.get(m, j, k, l, r) + v.get(m, l, r, j, k)).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
