//! Special fourth-order initial value problems `y'''' = f(x, y)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::integrate::State4;
use crate::{DomainError, Error, Result};

/// Right-hand side `f(x, y, out)`. Must be pure and reentrant.
pub type Rhs = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + Send + Sync>;

/// Exact solution `x -> y(x)`.
pub type Exact = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Selector names accepted by [`by_name`], in listing order.
pub const PROBLEM_NAMES: [&str; 9] = [
    "p1", "p2", "p3", "p4", "p5", "poly0", "poly1", "poly2", "poly3",
];

#[derive(Clone)]
pub struct Ivp4 {
    name: String,
    x0: f64,
    x_end: f64,
    initial: [Vec<f64>; 4],
    f: Rhs,
    exact: Option<Exact>,
}

impl fmt::Debug for Ivp4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ivp4")
            .field("name", &self.name)
            .field("interval", &(self.x0, self.x_end))
            .field("initial", &self.initial)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl Ivp4 {
    /// `initial` holds `y, y', y'', y'''` at `x0`.
    pub fn new(
        name: impl Into<String>,
        f: Rhs,
        x0: f64,
        x_end: f64,
        initial: [Vec<f64>; 4],
    ) -> Result<Self> {
        let name = name.into();
        if !(x0.is_finite() && x_end.is_finite() && x_end > x0) {
            return Err(Error::InvalidArgument(format!(
                "{name}: interval [{x0}, {x_end}] is degenerate"
            )));
        }
        let m = initial[0].len();
        if m == 0 {
            return Err(Error::InvalidArgument(format!("{name}: no components")));
        }
        for (slot, v) in ["y0", "dy0", "d2y0", "d3y0"].iter().zip(&initial) {
            if v.len() != m {
                return Err(Error::Dimension {
                    field: slot.to_string(),
                    expected: m,
                    found: v.len(),
                });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite {
                    field: slot.to_string(),
                });
            }
        }
        let mut out = vec![0.0; m];
        f(x0, &initial[0], &mut out).map_err(|source| Error::Domain { x: x0, source })?;
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name}: f is not finite on the initial data"
            )));
        }
        Ok(Self {
            name,
            x0,
            x_end,
            initial,
            f,
            exact: None,
        })
    }

    /// Attaches an exact solution, checking it against `y0` at `x0`.
    pub fn with_exact(mut self, exact: Exact) -> Result<Self> {
        let at_x0 = exact(self.x0);
        if at_x0.len() != self.dim()
            || at_x0
                .iter()
                .zip(&self.initial[0])
                .any(|(e, y)| (e - y).abs() > 1e-12)
        {
            return Err(Error::InvalidArgument(format!(
                "{}: exact solution does not match y0 at x0",
                self.name
            )));
        }
        self.exact = Some(exact);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of components `m`.
    pub fn dim(&self) -> usize {
        self.initial[0].len()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn initial(&self) -> &[Vec<f64>; 4] {
        &self.initial
    }

    pub fn initial_state(&self) -> State4 {
        let [y, dy, d2y, d3y] = self.initial.clone();
        State4 {
            x: self.x0,
            y,
            dy,
            d2y,
            d3y,
        }
    }

    pub fn rhs(&self) -> &Rhs {
        &self.f
    }

    /// Evaluates `f(x, y)` into a fresh vector.
    pub fn eval(&self, x: f64, y: &[f64]) -> Result<Vec<f64>, DomainError> {
        let mut out = vec![0.0; self.dim()];
        (self.f)(x, y, &mut out)?;
        Ok(out)
    }

    pub fn exact(&self) -> Option<&Exact> {
        self.exact.as_ref()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// `y'''' = -4y`, `y = eˣ sin x` on `[0, 10]`.
pub fn problem_1() -> Ivp4 {
    let f: Rhs = Arc::new(|_x, y, out| {
        out[0] = -4.0 * y[0];
        Ok(())
    });
    scalar("p1", f, 0.0, 10.0, [0.0, 1.0, 2.0, 2.0])
        .and_then(|p| p.with_exact(Arc::new(|x: f64| vec![x.exp() * x.sin()])))
        .expect("builtin problem is valid")
}

/// `y'''' = y² + cos²x + sin x - 1`, `y = sin x` on `[0, 10]`.
pub fn problem_2() -> Ivp4 {
    let f: Rhs = Arc::new(|x: f64, y, out| {
        let c = x.cos();
        out[0] = y[0] * y[0] + c * c + x.sin() - 1.0;
        Ok(())
    });
    scalar("p2", f, 0.0, 10.0, [0.0, 1.0, 0.0, -1.0])
        .and_then(|p| p.with_exact(Arc::new(|x: f64| vec![x.sin()])))
        .expect("builtin problem is valid")
}

/// `y'''' = 3 sin y (3 + 2 sin²y) / cos⁷y`, `y = arcsin x` on `[0, π/4]`.
///
/// The right-hand side has a pole at `|y| = π/2` and returns a domain error
/// there and beyond.
pub fn problem_3() -> Ivp4 {
    let f: Rhs = Arc::new(|_x, y, out| {
        let y = y[0];
        if y.abs() >= FRAC_PI_2 {
            return Err(DomainError::new(format!("|y| = {} is at or beyond the pole at π/2", y.abs())));
        }
        let s = y.sin();
        out[0] = 3.0 * s * (3.0 + 2.0 * s * s) / y.cos().powi(7);
        Ok(())
    });
    scalar("p3", f, 0.0, FRAC_PI_4, [0.0, 1.0, 0.0, 1.0])
        .and_then(|p| p.with_exact(Arc::new(|x: f64| vec![x.asin()])))
        .expect("builtin problem is valid")
}

/// Coupled system on `[0, 2]` with components `(y, z, w, u)`:
/// `y'''' = e^{3x} u`, `z'''' = 16 e^{-x} y`, `w'''' = 81 e^{-x} z`,
/// `u'''' = 256 e^{-x} w`, exact `(e^{-x}, e^{-2x}, e^{-3x}, e^{-4x})`.
pub fn problem_4() -> Ivp4 {
    let f: Rhs = Arc::new(|x: f64, y, out| {
        let em = (-x).exp();
        out[0] = (3.0 * x).exp() * y[3];
        out[1] = 16.0 * em * y[0];
        out[2] = 81.0 * em * y[1];
        out[3] = 256.0 * em * y[2];
        Ok(())
    });
    let initial = [
        vec![1.0, 1.0, 1.0, 1.0],
        vec![-1.0, -2.0, -3.0, -4.0],
        vec![1.0, 4.0, 9.0, 16.0],
        vec![-1.0, -8.0, -27.0, -64.0],
    ];
    Ivp4::new("p4", f, 0.0, 2.0, initial)
        .and_then(|p| {
            p.with_exact(Arc::new(|x: f64| {
                (1..=4).map(|k| (-(k as f64) * x).exp()).collect()
            }))
        })
        .expect("builtin problem is valid")
}

/// Beam on an elastic foundation: `y'''' = 1 - y`, zero initial data on
/// `[0, 1]`, exact `1 - cosh(x/√2) cos(x/√2)`.
pub fn problem_5() -> Ivp4 {
    let f: Rhs = Arc::new(|_x, y, out| {
        out[0] = 1.0 - y[0];
        Ok(())
    });
    scalar("p5", f, 0.0, 1.0, [0.0; 4])
        .and_then(|p| p.with_exact(Arc::new(|x: f64| {
            let t = x / SQRT_2;
            vec![1.0 - t.cosh() * t.cos()]
        })))
        .expect("builtin problem is valid")
}

/// `y'''' = g(x)` with zero initial data on `[0, x_end]`.
pub fn quadrature_problem(
    name: &str,
    g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    exact: Option<Exact>,
    x_end: f64,
) -> Result<Ivp4> {
    let f: Rhs = Arc::new(move |x, _y, out| {
        out[0] = g(x);
        Ok(())
    });
    let p = scalar(name, f, 0.0, x_end, [0.0; 4])?;
    match exact {
        Some(e) => p.with_exact(e),
        None => Ok(p),
    }
}

/// `y'''' = xᵏ` on `[0, 1]`, exact `y = k! x^{k+4} / (k+4)!`.
pub fn poly_problem(k: u32) -> Result<Ivp4> {
    if k > 3 {
        return Err(Error::InvalidArgument(format!("poly_problem degree {k} > 3")));
    }
    let ratio: f64 = (1..=k).map(f64::from).product::<f64>() / (1..=k + 4).map(f64::from).product::<f64>();
    quadrature_problem(
        &format!("poly{k}"),
        move |x| x.powi(k as i32),
        Some(Arc::new(move |x: f64| vec![ratio * x.powi(k as i32 + 4)])),
        1.0,
    )
}

/// `y'''' = cos x` on `[0, 10]`, exact `cos x - 1 + x²/2`.
pub fn cos_problem() -> Ivp4 {
    quadrature_problem(
        "cos",
        f64::cos,
        Some(Arc::new(|x: f64| vec![x.cos() - 1.0 + 0.5 * x * x])),
        10.0,
    )
    .expect("builtin problem is valid")
}

fn scalar(name: &str, f: Rhs, x0: f64, x_end: f64, ic: [f64; 4]) -> Result<Ivp4> {
    Ivp4::new(name, f, x0, x_end, ic.map(|v| vec![v]))
}

/// Resolves a selector such as `p2` or `poly3`.
pub fn by_name(name: &str) -> Option<Ivp4> {
    match name {
        "p1" => Some(problem_1()),
        "p2" => Some(problem_2()),
        "p3" => Some(problem_3()),
        "p4" => Some(problem_4()),
        "p5" => Some(problem_5()),
        _ => name
            .strip_prefix("poly")
            .and_then(|k| k.parse().ok())
            .and_then(|k| poly_problem(k).ok()),
    }
}
