//! Algebraic order conditions for RKFD tableaus, orders 1 through 7.
//!
//! Each condition has the form `wᵀv = p/q` where `w` is one of the weight rows
//! `b, b', b'', b'''` and `v` is built from the abscissae `c`, the ones vector
//! `e` and the stage matrix `Â`. Conditions written with a bare `Â` (for
//! example `b'''ᵀÂ = 1/120`) are evaluated as `b'''ᵀÂe`.

use std::fmt;

use crate::tableaux::RkfdTableau;
use crate::{Error, Result};

pub const MAX_ORDER: u32 = 7;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// `b`, weights of the `y` update.
    B,
    /// `b'`
    Bp,
    /// `b''`
    Bpp,
    /// `b'''`
    Bppp,
}

impl Weight {
    fn row(self, t: &RkfdTableau) -> &[f64] {
        match self {
            Weight::B => t.b(),
            Weight::Bp => t.bp(),
            Weight::Bpp => t.bpp(),
            Weight::Bppp => t.bppp(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Weight::B => "b",
            Weight::Bp => "bp",
            Weight::Bpp => "bpp",
            Weight::Bppp => "bppp",
        }
    }
}

/// Vector operand of a condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VecExpr {
    /// Elementwise power `c^k`; `k = 0` is the ones vector `e`.
    CPow(u32),
    /// `Â v`
    AHat(Box<VecExpr>),
    /// Elementwise product.
    Mul(Box<VecExpr>, Box<VecExpr>),
}

impl VecExpr {
    fn eval(&self, t: &RkfdTableau) -> Vec<f64> {
        match self {
            VecExpr::CPow(k) => t.c().iter().map(|&c| c.powi(*k as i32)).collect(),
            VecExpr::AHat(v) => {
                let v = v.eval(t);
                t.a_hat()
                    .iter()
                    .map(|row| row.iter().zip(&v).map(|(a, x)| a * x).sum())
                    .collect()
            }
            VecExpr::Mul(u, v) => {
                let u = u.eval(t);
                let v = v.eval(t);
                u.iter().zip(&v).map(|(a, b)| a * b).collect()
            }
        }
    }
}

impl fmt::Display for VecExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VecExpr::CPow(0) => write!(f, "e"),
            VecExpr::CPow(1) => write!(f, "c"),
            VecExpr::CPow(k) => write!(f, "c{k}"),
            VecExpr::AHat(v) => write!(f, "Ahat.{v}"),
            VecExpr::Mul(u, v) => write!(f, "({u}.{v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionDef {
    pub order: u32,
    pub id: String,
    pub weight: Weight,
    pub vector: VecExpr,
    /// Exact target `numer / denom`.
    pub rhs: (i64, i64),
}

impl ConditionDef {
    fn new(order: u32, weight: Weight, vector: VecExpr, rhs: (i64, i64)) -> Self {
        let id = format!("{}.{}", weight.label(), vector);
        Self {
            order,
            id,
            weight,
            vector,
            rhs,
        }
    }

    pub fn rhs_value(&self) -> f64 {
        self.rhs.0 as f64 / self.rhs.1 as f64
    }

    pub fn lhs_value(&self, t: &RkfdTableau) -> f64 {
        let w = self.weight.row(t);
        let v = self.vector.eval(t);
        w.iter().zip(&v).map(|(a, b)| a * b).sum()
    }
}

fn c(k: u32) -> VecExpr {
    VecExpr::CPow(k)
}

fn ahat(v: VecExpr) -> VecExpr {
    VecExpr::AHat(Box::new(v))
}

fn mul(u: VecExpr, v: VecExpr) -> VecExpr {
    VecExpr::Mul(Box::new(u), Box::new(v))
}

/// All conditions of order `≤ max_order`, ordered by order.
pub fn condition_catalog(max_order: u32) -> Result<Vec<ConditionDef>> {
    if !(1..=MAX_ORDER).contains(&max_order) {
        return Err(Error::InvalidArgument(format!(
            "max_order must lie in 1..={MAX_ORDER}, got {max_order}"
        )));
    }
    use Weight::*;
    let all = [
        (1, Bppp, c(0), (1, 1)),
        (2, Bppp, c(1), (1, 2)),
        (2, Bpp, c(0), (1, 2)),
        (3, Bppp, c(2), (1, 3)),
        (3, Bpp, c(1), (1, 6)),
        (3, Bp, c(0), (1, 6)),
        (4, Bppp, c(3), (1, 4)),
        (4, Bpp, c(2), (1, 12)),
        (4, Bp, c(1), (1, 24)),
        (4, B, c(0), (1, 24)),
        (5, Bppp, c(4), (1, 5)),
        (5, Bppp, ahat(c(0)), (1, 120)),
        (5, Bpp, c(3), (1, 20)),
        (5, Bp, c(2), (1, 60)),
        (5, B, c(1), (1, 120)),
        (6, Bppp, c(5), (1, 6)),
        (6, Bppp, ahat(c(1)), (1, 720)),
        (6, Bppp, mul(c(1), ahat(c(0))), (1, 144)),
        (6, Bpp, c(4), (1, 30)),
        (6, Bpp, ahat(c(0)), (1, 720)),
        (6, Bp, c(3), (1, 120)),
        (6, B, c(2), (1, 360)),
        (7, Bppp, c(6), (1, 7)),
        (7, Bppp, mul(c(1), ahat(c(1))), (1, 840)),
        (7, Bppp, mul(c(2), ahat(c(0))), (1, 168)),
        (7, Bppp, ahat(c(2)), (1, 2520)),
        (7, Bpp, c(5), (1, 42)),
        (7, Bpp, ahat(c(1)), (1, 5040)),
        (7, Bpp, mul(c(1), ahat(c(0))), (1, 1008)),
        (7, Bp, c(4), (1, 210)),
        (7, Bp, ahat(c(0)), (1, 5040)),
        (7, B, c(3), (1, 840)),
    ];
    Ok(all
        .into_iter()
        .filter(|(order, ..)| *order <= max_order)
        .map(|(order, w, v, rhs)| ConditionDef::new(order, w, v, rhs))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub order: u32,
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub method: String,
    pub max_order: u32,
    pub tolerance: f64,
    pub results: Vec<ConditionResult>,
    pub attained_order: u32,
}

impl OrderReport {
    pub fn failures(&self) -> impl Iterator<Item = &ConditionResult> {
        self.results.iter().filter(|r| !r.pass)
    }

    pub fn get(&self, id: &str) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

pub fn evaluate_conditions(tableau: &RkfdTableau, max_order: u32, tolerance: f64) -> Result<OrderReport> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let results: Vec<ConditionResult> = condition_catalog(max_order)?
        .iter()
        .map(|def| {
            let lhs = def.lhs_value(tableau);
            let rhs = def.rhs_value();
            let residual = lhs - rhs;
            ConditionResult {
                order: def.order,
                id: def.id.clone(),
                lhs,
                rhs,
                residual,
                pass: residual.abs() <= tolerance,
            }
        })
        .collect();

    let attained_order = results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.order - 1)
        .min()
        .unwrap_or(max_order);

    Ok(OrderReport {
        method: tableau.name().to_string(),
        max_order,
        tolerance,
        results,
        attained_order,
    })
}

/// Largest order whose conditions (and all lower ones) hold to `tolerance`.
pub fn attained_order(tableau: &RkfdTableau, tolerance: f64) -> u32 {
    evaluate_conditions(tableau, MAX_ORDER, tolerance)
        .map(|r| r.attained_order)
        .unwrap_or(0)
}
