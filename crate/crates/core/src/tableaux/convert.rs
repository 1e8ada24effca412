use super::{RkTableau, RkfdCoefficients, RkfdTableau};
use crate::Result;

/// Builds the RKFD tableau obtained by applying `rk` to the first-order
/// reduction `(y, v, u, w)' = (v, u, w, f)`.
///
/// The mapping is `b''' = b`, `b'' = bᵀA`, `b' = bᵀA²`, `b = bᵀA³` and
/// `Â = A⁴`, with `c` unchanged. The `y'''` weights are the RK weights
/// themselves, which is what makes `b'''ᵀe = 1` hold for any consistent RK
/// method.
pub fn convert_rk_to_rkfd(rk: &RkTableau) -> Result<RkfdTableau> {
    let a = rk.a();
    let b3 = rk.b().to_vec();
    let b2 = row_times(&b3, a);
    let b1 = row_times(&b2, a);
    let b0 = row_times(&b1, a);
    let a2 = mat_mul(a, a);
    let a4 = mat_mul(&a2, &a2);

    RkfdTableau::new(RkfdCoefficients {
        name: format!("{}-direct", rk.name()),
        c: rk.c().to_vec(),
        a_hat: a4,
        b: b0,
        bp: b1,
        bpp: b2,
        bppp: b3,
        declared_order: None,
    })
}

fn row_times(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    (0..v.len())
        .map(|j| v.iter().zip(m).map(|(vi, row)| vi * row[j]).sum())
        .collect()
}

fn mat_mul(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum())
                .collect()
        })
        .collect()
}
