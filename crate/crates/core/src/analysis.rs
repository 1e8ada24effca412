//! Convergence-order estimates, work-precision points and timing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::integrate::{rk_step_reduced, Method, Slot, State4};
use crate::problems::Ivp4;
use crate::tableaux::builtin_rk4;
use crate::{Error, Result};

/// Errors at or below this are treated as roundoff and excluded from fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Substeps of the RK4 reference used when no exact value is available.
const REFERENCE_SUBSTEPS: usize = 1000;

/// Environment variable capping the number of analysis worker threads.
pub const THREADS_ENV: &str = "RKFD_THREADS";

/// `ln(e1/e2) / ln(h1/h2)`.
pub fn observed_order(e1: f64, e2: f64, h1: f64, h2: f64) -> Result<f64> {
    if !(h1 > 0.0 && h2 > 0.0) || h1 == h2 {
        return Err(Error::InvalidArgument(format!(
            "step sizes must be positive and distinct, got {h1} and {h2}"
        )));
    }
    for e in [e1, e2] {
        if e.is_nan() || e <= ROUNDOFF_FLOOR {
            return Err(Error::UndefinedOrder(e));
        }
    }
    Ok((e1 / e2).ln() / (h1 / h2).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub h: f64,
    pub error: f64,
    /// Order against the previous point; `None` for the first point or when
    /// either error is at the roundoff floor.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub method: String,
    pub problem: String,
    pub slot: Slot,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `ln e` against `ln h` over points above the floor.
    pub slope: Option<f64>,
}

impl ConvergenceReport {
    fn new(method: &str, problem: &str, slot: Slot, data: Vec<(f64, f64)>) -> Self {
        let points = data
            .iter()
            .enumerate()
            .map(|(i, &(h, error))| ConvergencePoint {
                h,
                error,
                observed_order: i
                    .checked_sub(1)
                    .and_then(|j| observed_order(data[j].1, error, data[j].0, h).ok()),
            })
            .collect();
        let fit: Vec<(f64, f64)> = data
            .iter()
            .filter(|(_, e)| *e > ROUNDOFF_FLOOR)
            .map(|&(h, e)| (h.ln(), e.ln()))
            .collect();
        Self {
            method: method.to_string(),
            problem: problem.to_string(),
            slot,
            points,
            slope: least_squares_slope(&fit),
        }
    }

    /// Pairwise observed orders that are defined.
    pub fn observed_orders(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.observed_order).collect()
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs `op` on a pool capped by `RKFD_THREADS` when that is set.
fn in_pool<R: Send>(op: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(op),
        None => op(),
    }
}

fn check_decreasing(h_list: &[f64]) -> Result<()> {
    if h_list.is_empty() {
        return Err(Error::InvalidArgument("empty step-size list".into()));
    }
    if h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidArgument("step sizes must be positive".into()));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("step sizes must be strictly decreasing".into()));
    }
    Ok(())
}

/// Reference state at `x0 + h`: RK4 on the reduction with `h/1000` steps.
fn reference_state(problem: &Ivp4, h: f64) -> Result<State4> {
    let rk4 = builtin_rk4();
    let f = problem.rhs().as_ref();
    let sub = h / REFERENCE_SUBSTEPS as f64;
    let mut s = problem.initial_state();
    for _ in 0..REFERENCE_SUBSTEPS {
        s = rk_step_reduced(&rk4, f, &s, sub)?;
    }
    Ok(s)
}

/// Single-step error from the initial state for each `h`.
///
/// The reference is the exact solution for the `y` slot when the problem has
/// one, and an RK4 run at `h/1000` otherwise.
pub fn local_error_study(method: &Method, problem: &Ivp4, h_list: &[f64], slot: Slot) -> Result<ConvergenceReport> {
    check_decreasing(h_list)?;
    let span = problem.x_end() - problem.x0();
    if h_list[0] > span {
        return Err(Error::InvalidArgument(format!(
            "step {} leaves the interval of {}",
            h_list[0],
            problem.name()
        )));
    }
    let x0 = problem.x0();
    let start = problem.initial_state();

    let data: Result<Vec<(f64, f64)>> = in_pool(|| {
        h_list
            .par_iter()
            .map(|&h| {
                let one = method.step(problem, &start, h);
                let reference = match (slot, problem.exact()) {
                    (Slot::Y, Some(exact)) => Ok(exact(x0 + h)),
                    _ => reference_state(problem, h).map(|s| s.slot(slot).to_vec()),
                };
                let err = one.and_then(|s| {
                    reference.map(|r| {
                        s.slot(slot)
                            .iter()
                            .zip(&r)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max)
                    })
                });
                err.map(|e| (h, e)).map_err(|source| Error::StudyFailed {
                    h,
                    source: Box::new(source),
                })
            })
            .collect()
    });
    Ok(ConvergenceReport::new(method.name(), problem.name(), slot, data?))
}

/// Full-interval runs at `h0, h0/2, ..., h0/2^{levels-1}`.
pub fn convergence_study(method: &Method, problem: &Ivp4, h0: f64, levels: usize) -> Result<ConvergenceReport> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!("levels must be at least 2, got {levels}")));
    }
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(Error::InvalidArgument(format!("h0 must be positive, got {h0}")));
    }
    if !problem.has_exact() {
        return Err(Error::InvalidArgument(format!(
            "{} has no exact solution",
            problem.name()
        )));
    }
    let hs: Vec<f64> = (0..levels).map(|k| h0 / (1u64 << k) as f64).collect();
    let data: Result<Vec<(f64, f64)>> = in_pool(|| {
        hs.par_iter()
            .map(|&h| {
                method
                    .integrate(problem, h)
                    .map(|r| (h, r.max_abs_error.expect("problem has an exact solution")))
                    .map_err(|source| Error::StudyFailed {
                        h,
                        source: Box::new(source),
                    })
            })
            .collect()
    });
    Ok(ConvergenceReport::new(method.name(), problem.name(), Slot::Y, data?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyPoint {
    pub method: String,
    pub problem: String,
    pub h: f64,
    pub n_steps: usize,
    pub n_fevals: usize,
    pub max_abs_error: Option<f64>,
    pub wall_seconds: Option<f64>,
    /// Set when the run failed; the other fields are then zero or empty.
    pub failure: Option<String>,
}

fn efficiency_point(method: &Method, problem: &Ivp4, h: f64, repeats: usize) -> EfficiencyPoint {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        match method.integrate(problem, h) {
            Ok(run) => {
                times.extend(run.wall_seconds);
                last = Some(run);
            }
            Err(e) => {
                return EfficiencyPoint {
                    method: method.name().to_string(),
                    problem: problem.name().to_string(),
                    h,
                    n_steps: 0,
                    n_fevals: 0,
                    max_abs_error: None,
                    wall_seconds: None,
                    failure: Some(e.to_string()),
                }
            }
        }
    }
    let run = last.expect("repeats >= 1");
    EfficiencyPoint {
        method: run.method,
        problem: run.problem,
        h,
        n_steps: run.n_steps,
        n_fevals: run.n_fevals,
        max_abs_error: run.max_abs_error,
        wall_seconds: median(&mut times),
        failure: None,
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// One full integration per `h`, in the given order. Failed runs are
/// recorded on their point.
pub fn efficiency_curve(method: &Method, problem: &Ivp4, h_list: &[f64]) -> Result<Vec<EfficiencyPoint>> {
    if h_list.is_empty() {
        return Err(Error::InvalidArgument("empty step-size list".into()));
    }
    Ok(h_list
        .iter()
        .map(|&h| efficiency_point(method, problem, h, 1))
        .collect())
}

/// Times every (method, problem, h) cell serially. `wall_seconds` is the
/// median over `repeats` of the stepping loop alone. Output is sorted by
/// method name, then problem name, then the order of `h_list`.
pub fn bench(methods: &[Method], problems: &[Ivp4], h_list: &[f64], repeats: usize) -> Result<Vec<EfficiencyPoint>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    if h_list.is_empty() || h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidArgument("step sizes must be positive".into()));
    }
    let mut methods: Vec<&Method> = methods.iter().collect();
    methods.sort_by(|a, b| a.name().cmp(b.name()));
    let mut problems: Vec<&Ivp4> = problems.iter().collect();
    problems.sort_by(|a, b| a.name().cmp(b.name()));

    let mut out = Vec::new();
    for m in &methods {
        for p in &problems {
            for &h in h_list {
                out.push(efficiency_point(m, p, h, repeats));
            }
        }
    }
    Ok(out)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv>".into(),
        source: e.into(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns: `method, problem, h, steps, fevals, max_error, wall_seconds`.
pub fn write_bench_csv<W: Write>(points: &[EfficiencyPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "problem", "h", "steps", "fevals", "max_error", "wall_seconds"])
        .map_err(csv_io)?;
    for p in points {
        w.write_record([
            p.method.clone(),
            p.problem.clone(),
            p.h.to_string(),
            p.n_steps.to_string(),
            p.n_fevals.to_string(),
            opt(p.max_abs_error),
            opt(p.wall_seconds),
        ])
        .map_err(csv_io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })
}

/// Columns: `method, problem, h, error, observed_order`.
pub fn write_convergence_csv<W: Write>(reports: &[ConvergenceReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "problem", "h", "error", "observed_order"])
        .map_err(csv_io)?;
    for r in reports {
        for p in &r.points {
            w.write_record([
                r.method.clone(),
                r.problem.clone(),
                p.h.to_string(),
                p.error.to_string(),
                opt(p.observed_order),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv>".into(),
        source,
    })
}

/// Gnuplot script plotting log10(error) against log10(fevals), one series
/// per method and problem. The data is inlined.
pub fn gnuplot_script(points: &[EfficiencyPoint]) -> String {
    let mut series: BTreeMap<(String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for p in points {
        if let Some(e) = p.max_abs_error.filter(|e| *e > 0.0) {
            series
                .entry((p.method.clone(), p.problem.clone()))
                .or_default()
                .push((p.n_fevals, e));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "set xlabel 'log10(function evaluations)'");
    let _ = writeln!(s, "set ylabel 'log10(max error)'");
    let _ = writeln!(s, "set key outside");
    let _ = writeln!(s, "set grid");
    let mut plots = Vec::new();
    for (i, ((method, problem), pts)) in series.iter().enumerate() {
        let _ = writeln!(s, "$data{i} << EOD");
        for (fevals, err) in pts {
            let _ = writeln!(s, "{} {}", (*fevals as f64).log10(), err.log10());
        }
        let _ = writeln!(s, "EOD");
        plots.push(format!("$data{i} using 1:2 with linespoints title '{method} {problem}'"));
    }
    if !plots.is_empty() {
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    }
    s
}
