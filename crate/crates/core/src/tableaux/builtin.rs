//! Builtin methods.
//!
//! Coefficients are computed from their exact rational (or rational plus
//! rational times sqrt 6) forms rather than typed as decimals. The three-stage
//! tables are usually given with only the two nontrivial stage rows; the first stage
//! has `c1 = 0` and an empty `Â` row.

use super::{RkCoefficients, RkTableau, RkfdCoefficients, RkfdTableau};

fn q(num: i64, den: i64) -> f64 {
    num as f64 / den as f64
}

fn rkfd4_coefficients(name: &str, bp3: f64) -> RkfdCoefficients {
    RkfdCoefficients {
        name: name.to_string(),
        c: vec![0.0, q(4, 11), q(17, 20)],
        a_hat: vec![
            vec![0.0, 0.0, 0.0],
            vec![q(-1, 5), 0.0, 0.0],
            vec![q(19, 125), q(19, 125), 0.0],
        ],
        b: vec![q(17, 200), q(-7, 75), q(1, 20)],
        bp: vec![q(1, 18), q(209, 1926), bp3],
        bpp: vec![q(47, 408), q(847, 2568), q(100, 1819)],
        bppp: vec![q(47, 408), q(1331, 2568), q(2000, 5457)],
        declared_order: Some(4),
    }
}

/// RKFD4 with the coefficient set that has `b'_3 = 6/1926`.
///
/// With that value `b'ᵀe = 1/6 + 1/1926`, so the tableau only reaches
/// order 2. Kept for reference; use [`builtin_rkfd4_corrected`] for work.
pub fn builtin_rkfd4_printed() -> RkfdTableau {
    RkfdTableau::new(rkfd4_coefficients("rkfd4-printed", q(6, 1926)))
        .expect("builtin tableau is valid")
}

/// RKFD4 with `b'_3 = 5/1926`, which restores `b'ᵀe = 1/6` and `b'ᵀc = 1/24`.
pub fn builtin_rkfd4_corrected() -> RkfdTableau {
    RkfdTableau::new(rkfd4_coefficients("rkfd4", q(5, 1926))).expect("builtin tableau is valid")
}

/// Three-stage fifth-order RKFD5.
pub fn builtin_rkfd5() -> RkfdTableau {
    let r6 = 6f64.sqrt();
    let coeffs = RkfdCoefficients {
        name: "rkfd5".into(),
        c: vec![0.0, 0.6 + r6 / 10.0, 0.6 - r6 / 10.0],
        a_hat: vec![
            vec![0.0, 0.0, 0.0],
            vec![q(4059, 187793), 0.0, 0.0],
            vec![q(-1502, 532215), q(1826, 569317), 0.0],
        ],
        b: vec![
            q(19, 1080),
            q(13, 1080) - 11.0 * r6 / 2160.0,
            q(13, 1080) + 11.0 * r6 / 2160.0,
        ],
        bp: vec![q(1, 18), q(1, 18) - r6 / 48.0, q(1, 18) + r6 / 48.0],
        bpp: vec![q(1, 9), q(7, 36) - r6 / 18.0, q(7, 36) + r6 / 18.0],
        bppp: vec![q(1, 9), q(4, 9) - r6 / 36.0, q(4, 9) + r6 / 36.0],
        declared_order: Some(5),
    };
    RkfdTableau::new(coeffs).expect("builtin tableau is valid")
}

/// The classic four-stage fourth-order Runge-Kutta method.
pub fn builtin_rk4() -> RkTableau {
    RkTableau::new(RkCoefficients {
        name: "rk4".into(),
        a: vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ],
        b: vec![q(1, 6), q(1, 3), q(1, 3), q(1, 6)],
        c: vec![0.0, 0.5, 0.5, 1.0],
    })
    .expect("builtin tableau is valid")
}

/// Forward Euler as a one-stage RK tableau.
pub fn builtin_euler() -> RkTableau {
    RkTableau::new(RkCoefficients {
        name: "euler".into(),
        a: vec![vec![0.0]],
        b: vec![1.0],
        c: vec![0.0],
    })
    .expect("builtin tableau is valid")
}
