//! Coefficient sets for RKFD and classical Runge-Kutta methods.
//!
//! An RKFD method with `s` stages is written as
//!
//! ```text
//!  c | Â
//! ---+------
//!    | b
//!    | b'
//!    | b''
//!    | b'''
//! ```
//!
//! where `b`, `b'`, `b''` and `b'''` weight the stage evaluations in the
//! updates of `y`, `y'`, `y''` and `y'''` respectively. Tableaus are validated
//! on construction and immutable afterwards.

mod builtin;
mod convert;
mod file;

pub use builtin::{
    builtin_euler, builtin_rk4, builtin_rkfd4_corrected, builtin_rkfd4_printed, builtin_rkfd5,
};
pub use convert::convert_rk_to_rkfd;
pub use file::{load_tableau, load_tableau_file, parse_tableau, save_rk_tableau, save_tableau, TableauFile};

use crate::{Error, Result};

/// Tolerance for the consistency checks performed at construction.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Raw RKFD coefficients, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RkfdCoefficients {
    pub name: String,
    pub c: Vec<f64>,
    pub a_hat: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub bp: Vec<f64>,
    pub bpp: Vec<f64>,
    pub bppp: Vec<f64>,
    pub declared_order: Option<u32>,
}

/// A validated RKFD tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct RkfdTableau {
    coeffs: RkfdCoefficients,
    explicit: bool,
}

impl RkfdTableau {
    pub fn new(coeffs: RkfdCoefficients) -> Result<Self> {
        let s = coeffs.c.len();
        if s == 0 {
            return Err(Error::InvalidArgument("tableau has no stages".into()));
        }
        for (field, row) in [
            ("b", &coeffs.b),
            ("bp", &coeffs.bp),
            ("bpp", &coeffs.bpp),
            ("bppp", &coeffs.bppp),
        ] {
            check_len(field, row, s)?;
        }
        check_square("a_hat", &coeffs.a_hat, s)?;

        for (field, row) in [
            ("c", &coeffs.c),
            ("b", &coeffs.b),
            ("bp", &coeffs.bp),
            ("bpp", &coeffs.bpp),
            ("bppp", &coeffs.bppp),
        ] {
            check_finite(field, row)?;
        }
        for (i, row) in coeffs.a_hat.iter().enumerate() {
            check_finite(&format!("a_hat[{i}]"), row)?;
        }

        if coeffs.declared_order == Some(0) {
            return Err(Error::InvalidArgument("declared_order must be positive".into()));
        }
        if coeffs.declared_order.is_some() {
            let sum: f64 = coeffs.bppp.iter().sum();
            if (sum - 1.0).abs() > CONSISTENCY_TOL {
                return Err(Error::Inconsistent { sum });
            }
        }

        let explicit = strictly_lower(&coeffs.a_hat);
        Ok(Self { coeffs, explicit })
    }

    pub fn name(&self) -> &str {
        &self.coeffs.name
    }

    pub fn stages(&self) -> usize {
        self.coeffs.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.coeffs.c
    }

    pub fn a_hat(&self) -> &[Vec<f64>] {
        &self.coeffs.a_hat
    }

    pub fn b(&self) -> &[f64] {
        &self.coeffs.b
    }

    pub fn bp(&self) -> &[f64] {
        &self.coeffs.bp
    }

    pub fn bpp(&self) -> &[f64] {
        &self.coeffs.bpp
    }

    pub fn bppp(&self) -> &[f64] {
        &self.coeffs.bppp
    }

    pub fn declared_order(&self) -> Option<u32> {
        self.coeffs.declared_order
    }

    /// True iff `Â` is strictly lower triangular.
    pub fn is_explicit(&self) -> bool {
        self.explicit
    }

    pub fn coefficients(&self) -> &RkfdCoefficients {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> RkfdCoefficients {
        self.coeffs
    }
}

/// Raw classical RK coefficients, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RkCoefficients {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// A validated explicit Runge-Kutta tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    coeffs: RkCoefficients,
}

impl RkTableau {
    pub fn new(coeffs: RkCoefficients) -> Result<Self> {
        let s = coeffs.c.len();
        if s == 0 {
            return Err(Error::InvalidArgument("tableau has no stages".into()));
        }
        check_len("b", &coeffs.b, s)?;
        check_square("A", &coeffs.a, s)?;
        check_finite("c", &coeffs.c)?;
        check_finite("b", &coeffs.b)?;
        for (i, row) in coeffs.a.iter().enumerate() {
            check_finite(&format!("A[{i}]"), row)?;
        }
        for (row, (a_row, &c)) in coeffs.a.iter().zip(&coeffs.c).enumerate() {
            let sum: f64 = a_row.iter().sum();
            if (sum - c).abs() > CONSISTENCY_TOL {
                return Err(Error::RowSum { row, sum, c });
            }
        }
        if !strictly_lower(&coeffs.a) {
            return Err(Error::NotExplicit(coeffs.name));
        }
        Ok(Self { coeffs })
    }

    pub fn name(&self) -> &str {
        &self.coeffs.name
    }

    pub fn stages(&self) -> usize {
        self.coeffs.c.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.coeffs.a
    }

    pub fn b(&self) -> &[f64] {
        &self.coeffs.b
    }

    pub fn c(&self) -> &[f64] {
        &self.coeffs.c
    }

    pub fn coefficients(&self) -> &RkCoefficients {
        &self.coeffs
    }
}

fn check_len(field: &str, row: &[f64], s: usize) -> Result<()> {
    if row.len() != s {
        return Err(Error::Dimension {
            field: field.to_string(),
            expected: s,
            found: row.len(),
        });
    }
    Ok(())
}

fn check_square(field: &str, m: &[Vec<f64>], s: usize) -> Result<()> {
    if m.len() != s {
        return Err(Error::Dimension {
            field: field.to_string(),
            expected: s,
            found: m.len(),
        });
    }
    for (i, row) in m.iter().enumerate() {
        check_len(&format!("{field}[{i}]"), row, s)?;
    }
    Ok(())
}

fn check_finite(field: &str, row: &[f64]) -> Result<()> {
    if row.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            field: field.to_string(),
        })
    }
}

fn strictly_lower(m: &[Vec<f64>]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row[i..].iter().all(|&v| v == 0.0))
}
