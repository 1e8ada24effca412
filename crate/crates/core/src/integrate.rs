//! Fixed-step integration: the direct RKFD scheme and, for comparison, any
//! explicit RK method applied to the first-order reduction
//! `(y, v, u, w)' = (v, u, w, f(x, y))`.
//!
//! One RKFD step with `s` stages computes, for `i = 1..s`,
//!
//! ```text
//! Yᵢ = yₙ + cᵢh y'ₙ + (cᵢh)²/2 y''ₙ + (cᵢh)³/6 y'''ₙ + h⁴ Σ_{j<i} âᵢⱼ f(xₙ + cⱼh, Yⱼ)
//! ```
//!
//! and then advances each derivative with its own weight row:
//!
//! ```text
//! yₙ₊₁    = yₙ + h y'ₙ + h²/2 y''ₙ + h³/6 y'''ₙ + h⁴ Σ bᵢ fᵢ
//! y'ₙ₊₁   = y'ₙ + h y''ₙ + h²/2 y'''ₙ + h³ Σ b'ᵢ fᵢ
//! y''ₙ₊₁  = y''ₙ + h y'''ₙ + h² Σ b''ᵢ fᵢ
//! y'''ₙ₊₁ = y'''ₙ + h Σ b'''ᵢ fᵢ
//! ```
//!
//! The stage sum runs over `j` only.

use std::io::Write;
use std::time::Instant;

use crate::problems::{Exact, Ivp4};
use crate::tableaux::{convert_rk_to_rkfd, RkTableau, RkfdTableau};
use crate::{DomainError, Error, Result};

/// Solution and its first three derivatives at `x`, one entry per component.
#[derive(Debug, Clone, PartialEq)]
pub struct State4 {
    pub x: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub d2y: Vec<f64>,
    pub d3y: Vec<f64>,
}

impl State4 {
    pub fn new(x: f64, y: Vec<f64>, dy: Vec<f64>, d2y: Vec<f64>, d3y: Vec<f64>) -> Result<Self> {
        let m = y.len();
        if m == 0 {
            return Err(Error::InvalidArgument("state has no components".into()));
        }
        for (field, v) in [("dy", &dy), ("d2y", &d2y), ("d3y", &d3y)] {
            if v.len() != m {
                return Err(Error::Dimension {
                    field: field.into(),
                    expected: m,
                    found: v.len(),
                });
            }
        }
        Ok(Self { x, y, dy, d2y, d3y })
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn slot(&self, slot: Slot) -> &[f64] {
        match slot {
            Slot::Y => &self.y,
            Slot::Dy => &self.dy,
            Slot::D2y => &self.d2y,
            Slot::D3y => &self.d3y,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && [&self.y, &self.dy, &self.d2y, &self.d3y]
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// One of the four value lists of a [`State4`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Y,
    Dy,
    D2y,
    D3y,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::Y, Slot::Dy, Slot::D2y, Slot::D3y];
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub method: String,
    pub problem: String,
    pub h: f64,
    pub n_steps: usize,
    /// Number of calls to the vector-valued right-hand side.
    pub n_fevals: usize,
    /// Every grid point, starting at `x0` and ending exactly at `x_end`.
    pub states: Vec<State4>,
    /// Max over grid points and components of `|yₙ - y(xₙ)|`.
    pub max_abs_error: Option<f64>,
    pub wall_seconds: Option<f64>,
}

impl RunResult {
    pub fn final_state(&self) -> &State4 {
        self.states.last().expect("run has at least the initial state")
    }
}

enum StepError {
    Domain(f64, DomainError),
    NonFinite,
}

impl StepError {
    fn into_error(self, step: usize, x: f64) -> Error {
        match self {
            StepError::Domain(x, source) => Error::Domain { x, source },
            StepError::NonFinite => Error::Divergence { step, x },
        }
    }
}

trait Stepper {
    fn stages(&self) -> usize;

    fn step<F>(&mut self, f: &F, state: &mut State4, h: f64) -> Result<(), StepError>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + ?Sized;
}

fn call<F>(f: &F, x: f64, y: &[f64], out: &mut [f64]) -> Result<(), StepError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + ?Sized,
{
    f(x, y, out).map_err(|e| StepError::Domain(x, e))?;
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StepError::NonFinite)
    }
}

struct RkfdStepper<'t> {
    tableau: &'t RkfdTableau,
    k: Vec<Vec<f64>>,
    stage: Vec<f64>,
}

impl<'t> RkfdStepper<'t> {
    fn new(tableau: &'t RkfdTableau, m: usize) -> Result<Self> {
        if !tableau.is_explicit() {
            return Err(Error::NotExplicit(tableau.name().to_string()));
        }
        Ok(Self {
            tableau,
            k: vec![vec![0.0; m]; tableau.stages()],
            stage: vec![0.0; m],
        })
    }
}

impl Stepper for RkfdStepper<'_> {
    fn stages(&self) -> usize {
        self.tableau.stages()
    }

    fn step<F>(&mut self, f: &F, st: &mut State4, h: f64) -> Result<(), StepError>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + ?Sized,
    {
        let t = self.tableau;
        let (c, a_hat) = (t.c(), t.a_hat());
        let h2 = h * h;
        let h3 = h2 * h;
        let h4 = h2 * h2;

        for i in 0..t.stages() {
            let ch = c[i] * h;
            let (ch2, ch3) = (0.5 * ch * ch, ch * ch * ch / 6.0);
            let (done, _) = self.k.split_at(i);
            for (comp, out) in self.stage.iter_mut().enumerate() {
                let acc: f64 = done.iter().zip(&a_hat[i]).map(|(kj, a)| a * kj[comp]).sum();
                *out = st.y[comp] + ch * st.dy[comp] + ch2 * st.d2y[comp] + ch3 * st.d3y[comp] + h4 * acc;
            }
            call(f, st.x + ch, &self.stage, &mut self.k[i])?;
        }

        let weighted = |w: &[f64], comp: usize| -> f64 { w.iter().zip(&self.k).map(|(wi, ki)| wi * ki[comp]).sum() };
        for comp in 0..st.dim() {
            let (y, dy, d2y, d3y) = (st.y[comp], st.dy[comp], st.d2y[comp], st.d3y[comp]);
            st.y[comp] = y + h * dy + 0.5 * h2 * d2y + h3 / 6.0 * d3y + h4 * weighted(t.b(), comp);
            st.dy[comp] = dy + h * d2y + 0.5 * h2 * d3y + h3 * weighted(t.bp(), comp);
            st.d2y[comp] = d2y + h * d3y + h2 * weighted(t.bpp(), comp);
            st.d3y[comp] = d3y + h * weighted(t.bppp(), comp);
        }
        st.x += h;
        if st.is_finite() {
            Ok(())
        } else {
            Err(StepError::NonFinite)
        }
    }
}

/// Explicit RK on the 4m-dimensional reduced system. Only the `w` slot of
/// each stage derivative calls `f`.
struct RkStepper<'t> {
    tableau: &'t RkTableau,
    m: usize,
    z: Vec<f64>,
    stage: Vec<f64>,
    k: Vec<Vec<f64>>,
}

impl<'t> RkStepper<'t> {
    fn new(tableau: &'t RkTableau, m: usize) -> Self {
        Self {
            tableau,
            m,
            z: vec![0.0; 4 * m],
            stage: vec![0.0; 4 * m],
            k: vec![vec![0.0; 4 * m]; tableau.stages()],
        }
    }
}

impl Stepper for RkStepper<'_> {
    fn stages(&self) -> usize {
        self.tableau.stages()
    }

    fn step<F>(&mut self, f: &F, st: &mut State4, h: f64) -> Result<(), StepError>
    where
        F: Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + ?Sized,
    {
        let m = self.m;
        let t = self.tableau;
        for (dst, src) in self.z.chunks_mut(m).zip([&st.y, &st.dy, &st.d2y, &st.d3y]) {
            dst.copy_from_slice(src);
        }

        for i in 0..t.stages() {
            let (done, rest) = self.k.split_at_mut(i);
            for (n, out) in self.stage.iter_mut().enumerate() {
                let acc: f64 = done.iter().zip(&t.a()[i]).map(|(kj, a)| a * kj[n]).sum();
                *out = self.z[n] + h * acc;
            }
            let ki = &mut rest[0];
            ki[..3 * m].copy_from_slice(&self.stage[m..]);
            call(f, st.x + t.c()[i] * h, &self.stage[..m], &mut ki[3 * m..])?;
        }

        for (n, zn) in self.z.iter_mut().enumerate() {
            let acc: f64 = t.b().iter().zip(&self.k).map(|(bi, ki)| bi * ki[n]).sum();
            *zn += h * acc;
        }
        let mut chunks = self.z.chunks(m);
        for dst in [&mut st.y, &mut st.dy, &mut st.d2y, &mut st.d3y] {
            dst.copy_from_slice(chunks.next().expect("four slots"));
        }
        st.x += h;
        if st.is_finite() {
            Ok(())
        } else {
            Err(StepError::NonFinite)
        }
    }
}

/// Advances `state` by one RKFD step of size `h`.
pub fn rkfd_step<F>(tableau: &RkfdTableau, f: &F, state: &State4, h: f64) -> Result<State4>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + ?Sized,
{
    check_h(h)?;
    let mut next = state.clone();
    RkfdStepper::new(tableau, state.dim())?
        .step(f, &mut next, h)
        .map_err(|e| e.into_error(1, state.x))?;
    Ok(next)
}

/// Advances `state` by one step of `rk` applied to the first-order reduction.
pub fn rk_step_reduced<F>(rk: &RkTableau, f: &F, state: &State4, h: f64) -> Result<State4>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), DomainError> + ?Sized,
{
    check_h(h)?;
    let mut next = state.clone();
    RkStepper::new(rk, state.dim())
        .step(f, &mut next, h)
        .map_err(|e| e.into_error(1, state.x))?;
    Ok(next)
}

pub fn rkfd_integrate(tableau: &RkfdTableau, problem: &Ivp4, h: f64) -> Result<RunResult> {
    let stepper = RkfdStepper::new(tableau, problem.dim())?;
    drive(stepper, tableau.name(), problem, h)
}

pub fn rk_integrate_reduced(rk: &RkTableau, problem: &Ivp4, h: f64) -> Result<RunResult> {
    drive(RkStepper::new(rk, problem.dim()), rk.name(), problem, h)
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("step size must be positive, got {h}")))
    }
}

/// Number of steps and size of the last step covering `span` with step `h`.
/// A span within relative 1e-9 of a whole number of steps uses equal steps.
fn grid(span: f64, h: f64) -> (usize, f64) {
    let ratio = span / h;
    let whole = ratio.round();
    if whole >= 1.0 && (ratio - whole).abs() <= 1e-9 * whole {
        (whole as usize, h)
    } else if ratio < 1.0 {
        (1, span)
    } else {
        let full = ratio.floor();
        (full as usize + 1, span - full * h)
    }
}

fn drive<S: Stepper>(mut stepper: S, method: &str, problem: &Ivp4, h: f64) -> Result<RunResult> {
    check_h(h)?;
    let (x0, x_end) = (problem.x0(), problem.x_end());
    let (n_steps, last_h) = grid(x_end - x0, h);
    let f = problem.rhs().as_ref();

    let mut state = problem.initial_state();
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(state.clone());

    let start = Instant::now();
    for k in 0..n_steps {
        let last = k + 1 == n_steps;
        let step = if last { last_h } else { h };
        let x_prev = state.x;
        stepper
            .step(f, &mut state, step)
            .map_err(|e| e.into_error(k + 1, x_prev))?;
        state.x = if last { x_end } else { x0 + (k + 1) as f64 * h };
        states.push(state.clone());
    }
    let wall = start.elapsed().as_secs_f64();

    let max_abs_error = problem.exact().map(|exact| max_y_error(&states, exact));
    Ok(RunResult {
        method: method.to_string(),
        problem: problem.name().to_string(),
        h,
        n_steps,
        n_fevals: n_steps * stepper.stages(),
        states,
        max_abs_error,
        wall_seconds: Some(wall),
    })
}

fn max_y_error(states: &[State4], exact: &Exact) -> f64 {
    states
        .iter()
        .flat_map(|s| {
            let e = exact(s.x);
            s.y.iter().zip(e).map(|(y, e)| (y - e).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Integrates `y'''' = g(x)` with `convert_rk_to_rkfd(rk)` and with `rk` on
/// the reduction, and returns the largest difference over grid points and
/// all four slots.
///
/// For `x`-only right-hand sides the two computations agree algebraically
/// whenever `bᵀe = 1`, `bᵀc = 1/2` and `bᵀAc = 1/6`; those are checked first.
pub fn check_reduction_equivalence(
    rk: &RkTableau,
    g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    h: f64,
    n_steps: usize,
) -> Result<f64> {
    check_h(h)?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be positive".into()));
    }
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let ac: Vec<f64> = rk.a().iter().map(|row| dot(row, rk.c())).collect();
    let checks = [
        ("bᵀe = 1", rk.b().iter().sum::<f64>(), 1.0),
        ("bᵀc = 1/2", dot(rk.b(), rk.c()), 0.5),
        ("bᵀAc = 1/6", dot(rk.b(), &ac), 1.0 / 6.0),
    ];
    for (label, value, target) in checks {
        if (value - target).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "{}: {label} fails ({value}); reduction equivalence needs an RK method of order ≥ 3",
                rk.name()
            )));
        }
    }

    let problem = crate::problems::quadrature_problem("quadrature", g, None, n_steps as f64 * h)?;
    let direct = rkfd_integrate(&convert_rk_to_rkfd(rk)?, &problem, h)?;
    let reduced = rk_integrate_reduced(rk, &problem, h)?;
    debug_assert_eq!(direct.states.len(), reduced.states.len());

    Ok(direct
        .states
        .iter()
        .zip(&reduced.states)
        .flat_map(|(a, b)| {
            Slot::ALL.into_iter().flat_map(move |slot| {
                a.slot(slot)
                    .iter()
                    .zip(b.slot(slot))
                    .map(|(u, v)| (u - v).abs())
            })
        })
        .fold(0.0, f64::max))
}

/// Any method the drivers know how to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Rkfd(RkfdTableau),
    /// Classical RK applied to the first-order reduction.
    Rk(RkTableau),
}

impl Method {
    pub fn name(&self) -> &str {
        match self {
            Method::Rkfd(t) => t.name(),
            Method::Rk(t) => t.name(),
        }
    }

    /// Right-hand side evaluations per step.
    pub fn stages(&self) -> usize {
        match self {
            Method::Rkfd(t) => t.stages(),
            Method::Rk(t) => t.stages(),
        }
    }

    pub fn integrate(&self, problem: &Ivp4, h: f64) -> Result<RunResult> {
        match self {
            Method::Rkfd(t) => rkfd_integrate(t, problem, h),
            Method::Rk(t) => rk_integrate_reduced(t, problem, h),
        }
    }

    pub fn step(&self, problem: &Ivp4, state: &State4, h: f64) -> Result<State4> {
        let f = problem.rhs().as_ref();
        match self {
            Method::Rkfd(t) => rkfd_step(t, f, state, h),
            Method::Rk(t) => rk_step_reduced(t, f, state, h),
        }
    }
}

/// Writes a trajectory as CSV: `x`, then `y_1..y_m`, `dy_*`, `d2y_*`, `d3y_*`.
///
/// Every `stride`-th grid point is written, plus the final one. With
/// `exact`, `err_k` (absolute) and `relerr_k` columns follow.
pub fn write_trajectory_csv<W: Write>(
    run: &RunResult,
    out: W,
    stride: usize,
    exact: Option<&Exact>,
) -> Result<()> {
    let stride = stride.max(1);
    let m = run.states[0].dim();
    let mut header = vec!["x".to_string()];
    for prefix in ["y", "dy", "d2y", "d3y"] {
        header.extend((1..=m).map(|k| format!("{prefix}_{k}")));
    }
    if exact.is_some() {
        header.extend((1..=m).map(|k| format!("err_{k}")));
        header.extend((1..=m).map(|k| format!("relerr_{k}")));
    }

    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "<trajectory>".into(),
        source: e.into(),
    };
    w.write_record(&header).map_err(io)?;
    let last = run.states.len() - 1;
    for (i, s) in run.states.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let mut row = vec![s.x.to_string()];
        for slot in Slot::ALL {
            row.extend(s.slot(slot).iter().map(f64::to_string));
        }
        if let Some(exact) = exact {
            let e = exact(s.x);
            let abs: Vec<f64> = s.y.iter().zip(&e).map(|(y, e)| (y - e).abs()).collect();
            row.extend(abs.iter().map(f64::to_string));
            row.extend(abs.iter().zip(&e).map(|(a, e)| {
                if *e == 0.0 {
                    String::new()
                } else {
                    (a / e.abs()).to_string()
                }
            }));
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<trajectory>".into(),
        source,
    })
}
