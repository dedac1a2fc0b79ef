use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use haantjes::concomitants::{check_d_dk_identities, dk_squared_torsion_residual, haantjes_torsion, nijenhuis_torsion};
use haantjes::expr::{parse_expr, Expr, Func, VarScope};
use haantjes::geom::algebra::sup;
use haantjes::geom::random::{random_chart_map, random_diagonal, random_field, random_polynomial};
use haantjes::geom::{
    exterior_d_oneform, fd_gradient_discrepancy, lie_bracket, transform_components, ChartBox, TensorField, Valence,
};
use haantjes::linalg::inverse;

fn expr_tree(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0.0f64..10.0).prop_map(Expr::Num), (0..dim).prop_map(Expr::Var)];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (inner.clone(), 0i32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            inner.prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
        ]
    })
}

fn point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-r..r)).collect()
}

fn symbolic_bracket(x: &TensorField, y: &TensorField) -> TensorField {
    let n = x.dim();
    let comps = (0..n)
        .map(|i| {
            Expr::sum((0..n).map(|j| {
                Expr::sub(Expr::mul(x.comps[j].clone(), y.comps[i].diff(j)), Expr::mul(y.comps[j].clone(), x.comps[i].diff(j)))
            }))
        })
        .collect();
    x.with_comps("bracket", Valence::Vector, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn render_then_parse_is_identity(e in expr_tree(3)) {
        let parsed = parse_expr(&e.render("u"), &VarScope::chart(3, "u")).unwrap();
        prop_assert_eq!(parsed, e);
    }

    #[test]
    fn symbolic_derivative_matches_finite_differences(seed in any::<u64>(), dim in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        let f = TensorField::scalar("f", chart, random_polynomial(&mut rng, dim, 3)).unwrap();
        prop_assert!(fd_gradient_discrepancy(&f, &point(&mut rng, dim, 0.9)).unwrap() < 1e-7);
    }

    #[test]
    fn lie_bracket_is_antisymmetric_and_satisfies_jacobi(seed in any::<u64>(), dim in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        let [x, y, z] = [0, 1, 2].map(|_| random_field(&mut rng, &chart, Valence::Vector, 2));
        let p = point(&mut rng, dim, 0.9);
        let xy = lie_bracket(&x, &y, &p).unwrap();
        let yx = lie_bracket(&y, &x, &p).unwrap();
        prop_assert!(xy.iter().zip(&yx).all(|(a, b)| (a + b).abs() < 1e-12));
        let cyclic = [(&x, &y, &z), (&y, &z, &x), (&z, &x, &y)]
            .map(|(a, b, c)| lie_bracket(a, &symbolic_bracket(b, c), &p).unwrap());
        let scale = 1.0 + cyclic.iter().map(|v| sup(v)).fold(0.0, f64::max);
        for i in 0..dim {
            prop_assert!((cyclic[0][i] + cyclic[1][i] + cyclic[2][i]).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        let f = TensorField::scalar("f", chart, random_polynomial(&mut rng, dim, 4)).unwrap();
        let w = exterior_d_oneform(&f.gradient().unwrap(), &point(&mut rng, dim, 0.9)).unwrap();
        prop_assert!(sup(&w) < 1e-12);
    }

    #[test]
    fn chart_maps_round_trip(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = random_chart_map(&mut rng, dim, 0.4);
        let p = point(&mut rng, dim, 0.9);
        let back = map.apply_inverse(&map.apply(&p).unwrap()).unwrap();
        prop_assert!(p.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn torsions_are_tensorial(seed in any::<u64>(), dim in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = Arc::new(ChartBox::cube(dim, 0.5));
        let map = random_chart_map(&mut rng, dim, 0.3);
        let k = random_field(&mut rng, &chart, Valence::Endomorphism, 2);
        let kv = map.transform_field(&k).unwrap();
        let p = point(&mut rng, dim, 0.4);
        let q = map.apply(&p).unwrap();
        let j = map.jacobian(&p).unwrap();
        let jinv = inverse(&j, dim).unwrap();
        for (old, new) in [
            (nijenhuis_torsion(&k, &p).unwrap(), nijenhuis_torsion(&kv, &q).unwrap()),
            (haantjes_torsion(&k, &p).unwrap(), haantjes_torsion(&kv, &q).unwrap()),
        ] {
            let want = transform_components(Valence::Tensor12, &old.comps, &j, &jinv, dim);
            let scale = 1.0 + sup(&want).max(sup(&new.comps));
            prop_assert!(want.iter().zip(&new.comps).all(|(a, b)| (a - b).abs() / scale < 1e-9));
        }
    }

    #[test]
    fn diagonal_operators_have_vanishing_haantjes_torsion(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        let k = random_diagonal(&mut rng, &chart, 2);
        let p = point(&mut rng, dim, 0.9);
        let scale = (1.0 + sup(&k.values(&p).unwrap())).powi(3);
        prop_assert!(haantjes_torsion(&k, &p).unwrap().max_abs() / scale < 1e-10);
    }

    #[test]
    fn exterior_identities_hold(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = Arc::new(ChartBox::cube(dim, 1.0));
        let k = random_field(&mut rng, &chart, Valence::Endomorphism, 2);
        let alpha = random_field(&mut rng, &chart, Valence::OneForm, 2);
        let a = TensorField::scalar("A", chart, random_polynomial(&mut rng, dim, 3)).unwrap();
        let p = point(&mut rng, dim, 0.9);
        let (xi, eta) = (point(&mut rng, dim, 1.0), point(&mut rng, dim, 1.0));
        let ids = check_d_dk_identities(&k, &alpha, &p, &xi, &eta).unwrap();
        prop_assert!(ids.first <= 1e-9 && ids.second <= 1e-9);
        prop_assert!(dk_squared_torsion_residual(&k, &a, &p, &xi, &eta).unwrap() <= 1e-9);
    }
}
