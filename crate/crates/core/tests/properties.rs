//! Randomised invariants of the converter, condition checker, integrators,
//! tableau files and analysis drivers.

use std::sync::Arc;

use proptest::prelude::*;
use rkfd::analysis::efficiency_curve;
use rkfd::conditions::evaluate_conditions;
use rkfd::integrate::{check_reduction_equivalence, rkfd_integrate, Method};
use rkfd::problems::{quadrature_problem, Ivp4, Rhs};
use rkfd::tableaux::{
    builtin_rkfd4_corrected, builtin_rkfd5, convert_rk_to_rkfd, load_tableau, save_tableau, RkCoefficients,
    RkTableau, RkfdCoefficients, RkfdTableau,
};

/// The two-parameter family of three-stage third-order explicit RK methods
/// with nodes `0, u, v`.
fn kutta3(u: f64, v: f64) -> RkTableau {
    let b2 = (2.0 - 3.0 * v) / (6.0 * u * (u - v));
    let b3 = (2.0 - 3.0 * u) / (6.0 * v * (v - u));
    let a32 = v * (v - u) / (u * (2.0 - 3.0 * u));
    RkTableau::new(RkCoefficients {
        name: "kutta3".into(),
        a: vec![vec![0.0; 3], vec![u, 0.0, 0.0], vec![v - a32, a32, 0.0]],
        b: vec![1.0 - b2 - b3, b2, b3],
        c: vec![0.0, u, v],
    })
    .unwrap()
}

/// Nodes kept away from the family's singular set.
fn kutta_nodes() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..0.6, 0.75f64..1.0)
}

fn explicit_rk(max_stages: usize) -> impl Strategy<Value = RkTableau> {
    (1..=max_stages).prop_flat_map(|s| {
        (prop::collection::vec(-1.0f64..1.0, s * s), prop::collection::vec(-1.0f64..1.0, s)).prop_map(
            move |(flat, b)| {
                let a: Vec<Vec<f64>> = (0..s)
                    .map(|i| (0..s).map(|j| if j < i { flat[i * s + j] } else { 0.0 }).collect())
                    .collect();
                let c = a.iter().map(|row| row.iter().sum()).collect();
                RkTableau::new(RkCoefficients { name: "random".into(), a, b, c }).unwrap()
            },
        )
    })
}

fn random_rkfd() -> impl Strategy<Value = RkfdTableau> {
    (1usize..=4).prop_flat_map(|s| {
        (
            prop::collection::vec(-2.0f64..2.0, s),
            prop::collection::vec(-2.0f64..2.0, s * s),
            prop::collection::vec(prop::num::f64::NORMAL, 4 * s),
        )
            .prop_map(move |(c, flat, w)| {
                let a_hat = (0..s)
                    .map(|i| (0..s).map(|j| if j < i { flat[i * s + j] } else { 0.0 }).collect())
                    .collect();
                RkfdTableau::new(RkfdCoefficients {
                    name: "random".into(),
                    c,
                    a_hat,
                    b: w[..s].to_vec(),
                    bp: w[s..2 * s].to_vec(),
                    bpp: w[2 * s..3 * s].to_vec(),
                    bppp: w[3 * s..].to_vec(),
                    declared_order: None,
                })
                .unwrap()
            })
    })
}

fn linear_problem(x0: f64, k: f64) -> Ivp4 {
    let f: Rhs = Arc::new(move |_x, y, out| {
        out[0] = -k * y[0];
        Ok(())
    });
    Ivp4::new("linear", f, x0, x0 + 2.0, [vec![1.0], vec![0.5], vec![-0.25], vec![0.125]]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn converter_keeps_nodes_and_stays_explicit(rk in explicit_rk(5)) {
        let t = convert_rk_to_rkfd(&rk).unwrap();
        prop_assert_eq!(t.c(), rk.c());
        prop_assert_eq!(t.bppp(), rk.b());
        prop_assert!(t.is_explicit());
        for (i, row) in t.a_hat().iter().enumerate() {
            prop_assert!(row[i..].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn converted_third_order_rk_meets_weight_conditions((u, v) in kutta_nodes()) {
        let t = convert_rk_to_rkfd(&kutta3(u, v)).unwrap();
        let r = evaluate_conditions(&t, 3, 1e-12).unwrap();
        for id in ["bppp.e", "bpp.e", "bp.e"] {
            let res = r.get(id).unwrap();
            prop_assert!(res.residual.abs() < 1e-12, "{} residual {}", id, res.residual);
        }
    }

    #[test]
    fn attained_order_is_monotone_in_tolerance(t in random_rkfd(), e1 in -14.0f64..0.0, e2 in -14.0f64..0.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = evaluate_conditions(&t, 7, 10f64.powf(lo)).unwrap().attained_order;
        let b = evaluate_conditions(&t, 7, 10f64.powf(hi)).unwrap().attained_order;
        prop_assert!(a <= b);
    }

    #[test]
    fn scaling_y3_weights_shifts_first_residual(lambda in 0.1f64..3.0) {
        let mut coeffs = builtin_rkfd4_corrected().into_coefficients();
        coeffs.bppp.iter_mut().for_each(|w| *w *= lambda);
        coeffs.declared_order = None;
        let t = RkfdTableau::new(coeffs).unwrap();
        let r = evaluate_conditions(&t, 1, 1e-12).unwrap();
        prop_assert!((r.results[0].residual - (lambda - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn autonomous_problem_is_shift_invariant(x0 in -50.0f64..50.0, k in 0.1f64..4.0, n in 7u32..200) {
        // y updates never read x, so shifting the start changes nothing as
        // long as every step has the same length (a shortened last step
        // would depend on how x0 + span rounds).
        let h = 2.0 / f64::from(n);
        for m in [Method::Rkfd(builtin_rkfd5()), Method::Rk(rkfd::tableaux::builtin_rk4())] {
            let a = m.integrate(&linear_problem(0.0, k), h).unwrap();
            let b = m.integrate(&linear_problem(x0, k), h).unwrap();
            prop_assert_eq!(a.states.len(), b.states.len());
            for (s, t) in a.states.iter().zip(&b.states) {
                prop_assert_eq!(&s.y, &t.y);
                prop_assert_eq!(&s.d3y, &t.d3y);
            }
        }
    }

    #[test]
    fn quartics_are_integrated_exactly(
        init in prop::array::uniform4(-2.0f64..2.0),
        g in -3.0f64..3.0,
        h in 0.05f64..0.2,
    ) {
        // y'''' = g with arbitrary initial data has a quartic solution.
        let f: Rhs = Arc::new(move |_x, _y, out| {
            out[0] = g;
            Ok(())
        });
        let p = Ivp4::new("quartic", f, 0.0, 10.0 * h, init.map(|v| vec![v])).unwrap();
        let exact = |x: f64| {
            let [y, dy, d2y, d3y] = init;
            [
                y + dy * x + d2y * x * x / 2.0 + d3y * x.powi(3) / 6.0 + g * x.powi(4) / 24.0,
                dy + d2y * x + d3y * x * x / 2.0 + g * x.powi(3) / 6.0,
                d2y + d3y * x + g * x * x / 2.0,
                d3y + g * x,
            ]
        };
        for t in [builtin_rkfd4_corrected(), builtin_rkfd5()] {
            let run = rkfd_integrate(&t, &p, h).unwrap();
            for s in &run.states {
                let e = exact(s.x);
                let got = [s.y[0], s.dy[0], s.d2y[0], s.d3y[0]];
                for k in 0..4 {
                    prop_assert!((got[k] - e[k]).abs() <= 1e-12 * (1.0 + e[k].abs()), "{} slot {}", t.name(), k);
                }
            }
        }
    }

    #[test]
    fn solution_is_linear_in_forcing(lambda in -5.0f64..5.0, h in 0.02f64..0.2) {
        let base = quadrature_problem("g", |x: f64| (2.0 * x).sin() + x, None, 2.0).unwrap();
        let scaled = quadrature_problem("lg", move |x: f64| lambda * ((2.0 * x).sin() + x), None, 2.0).unwrap();
        let t = builtin_rkfd5();
        let a = rkfd_integrate(&t, &base, h).unwrap();
        let b = rkfd_integrate(&t, &scaled, h).unwrap();
        for (s, u) in a.states.iter().zip(&b.states) {
            prop_assert!((lambda * s.y[0] - u.y[0]).abs() <= 1e-13 * (1.0 + u.y[0].abs()));
        }
    }

    #[test]
    fn reduction_equivalence_for_third_order_rk((u, v) in kutta_nodes()) {
        let d = check_reduction_equivalence(&kutta3(u, v), f64::cos, 0.1, 100).unwrap();
        prop_assert!(d <= 1e-12, "discrepancy {}", d);
    }

    #[test]
    fn tableau_file_round_trip_is_bit_exact(t in random_rkfd()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        save_tableau(&t, &path).unwrap();
        let back = load_tableau(&path).unwrap();
        prop_assert_eq!(back.coefficients(), t.coefficients());
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.bp()), bits(t.bp()));
        prop_assert_eq!(bits(back.c()), bits(t.c()));
    }

    #[test]
    fn fevals_grow_as_step_shrinks(h0 in 0.05f64..0.5) {
        let hs = [h0, h0 / 2.0, h0 / 3.0, h0 / 7.0];
        let p = rkfd::problems::problem_5();
        let pts = efficiency_curve(&Method::Rkfd(builtin_rkfd4_corrected()), &p, &hs).unwrap();
        prop_assert!(pts.windows(2).all(|w| w[0].n_fevals <= w[1].n_fevals));
        prop_assert!(pts.iter().all(|p| p.n_fevals == 3 * p.n_steps));
    }
}
