//! The `rkfd` command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification or a diverging run, 2 usage
//! or input errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{self, ConvergenceReport, EfficiencyPoint};
use crate::conditions::{self, OrderReport};
use crate::integrate::{self, Method, Slot};
use crate::problems::{self, Ivp4};
use crate::tableaux::{self, TableauFile};
use crate::Error;

pub const BUILTIN_METHODS: [&str; 4] = ["rkfd4", "rkfd4-printed", "rkfd5", "rk4"];

#[derive(Debug, Parser)]
#[command(name = "rkfd", version, about = "Direct RKFD integrators for y'''' = f(x, y)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SlotArg {
    Y,
    Dy,
    D2y,
    D3y,
}

impl From<SlotArg> for Slot {
    fn from(s: SlotArg) -> Self {
        match s {
            SlotArg::Y => Slot::Y,
            SlotArg::Dy => Slot::Dy,
            SlotArg::D2y => Slot::D2y,
            SlotArg::D3y => Slot::D3y,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an RKFD tableau against the order conditions.
    Verify {
        /// Builtin name (rkfd4, rkfd4-printed, rkfd5) or tableau file.
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = conditions::DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = conditions::MAX_ORDER)]
        max_order: u32,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one problem at a fixed step size.
    Integrate {
        #[arg(long, default_value = "rkfd4")]
        method: String,
        #[arg(long)]
        problem: String,
        #[arg(long)]
        h: f64,
        /// Write every n-th grid point (the last point is always written).
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Append absolute and relative error columns to the CSV.
        #[arg(long)]
        with_errors: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observed convergence orders under step halving.
    Converge {
        #[arg(long, value_delimiter = ',', default_value = "rkfd4")]
        methods: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "p2")]
        problems: Vec<String>,
        #[arg(long, default_value_t = 0.1)]
        h0: f64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Single-step errors from the initial state instead of full runs.
        #[arg(long)]
        local: bool,
        /// Slot measured by --local.
        #[arg(long, value_enum, default_value_t = SlotArg::Y)]
        slot: SlotArg,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Errors, function evaluations and wall time over a grid of runs.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "rkfd4,rkfd5,rk4")]
        methods: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "p2")]
        problems: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01")]
        h_list: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot script of log10(error) against log10(fevals).
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Convert a classical RK tableau into its RKFD form.
    Convert {
        /// Builtin RK name (rk4, euler) or RK tableau file.
        #[arg(long)]
        rk: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the builtin problems.
    ListProblems,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } | Error::Domain { .. } | Error::StudyFailed { .. } => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

type CliResult<T = i32> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(command: Command) -> CliResult {
    match command {
        Command::Verify {
            method,
            tolerance,
            max_order,
            format,
            out,
        } => cmd_verify(&method, tolerance, max_order, format, out.as_deref()),
        Command::Integrate {
            method,
            problem,
            h,
            stride,
            with_errors,
            format,
            out,
        } => cmd_integrate(&method, &problem, h, stride, with_errors, format, out.as_deref()),
        Command::Converge {
            methods,
            problems,
            h0,
            levels,
            local,
            slot,
            format,
            out,
        } => cmd_converge(&methods, &problems, h0, levels, local.then_some(slot.into()), format, out.as_deref()),
        Command::Bench {
            methods,
            problems,
            h_list,
            repeats,
            format,
            out,
            plot_script,
        } => cmd_bench(&methods, &problems, &h_list, repeats, format, out.as_deref(), plot_script.as_deref()),
        Command::Convert { rk, out } => cmd_convert(&rk, &out),
        Command::ListProblems => cmd_list_problems(),
    }
}

fn resolve_method(sel: &str) -> CliResult<Method> {
    match sel {
        "rkfd4" => Ok(Method::Rkfd(tableaux::builtin_rkfd4_corrected())),
        "rkfd4-printed" => Ok(Method::Rkfd(tableaux::builtin_rkfd4_printed())),
        "rkfd5" => Ok(Method::Rkfd(tableaux::builtin_rkfd5())),
        "rk4" => Ok(Method::Rk(tableaux::builtin_rk4())),
        "euler" => Ok(Method::Rk(tableaux::builtin_euler())),
        path if looks_like_path(path) => match tableaux::load_tableau_file(path)? {
            TableauFile::Rkfd(t) => Ok(Method::Rkfd(t)),
            TableauFile::Rk(t) => Ok(Method::Rk(t)),
        },
        other => Err(CliError::input(format!(
            "unknown method '{other}' (expected one of {} or a tableau file)",
            BUILTIN_METHODS.join(", ")
        ))),
    }
}

fn looks_like_path(sel: &str) -> bool {
    sel.ends_with(".json") || sel.contains(std::path::MAIN_SEPARATOR) || Path::new(sel).exists()
}

fn resolve_methods(sels: &[String]) -> CliResult<Vec<Method>> {
    sels.iter().map(|s| resolve_method(s.trim())).collect()
}

fn resolve_problems(sels: &[String]) -> CliResult<Vec<Ivp4>> {
    let mut out = Vec::new();
    for sel in sels {
        match sel.trim() {
            "all" => out.extend([
                problems::problem_1(),
                problems::problem_2(),
                problems::problem_3(),
                problems::problem_4(),
                problems::problem_5(),
            ]),
            name => out.push(problems::by_name(name).ok_or_else(|| {
                CliError::input(format!(
                    "unknown problem '{name}' (expected one of {} or all)",
                    problems::PROBLEM_NAMES.join(", ")
                ))
            })?),
        }
    }
    Ok(out)
}

fn check_step(h: f64, what: &str) -> CliResult<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("{what} must be positive, got {h}")))
    }
}

fn open_output(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn sci(v: f64) -> String {
    format!("{v:.2e}")
}

fn cmd_verify(sel: &str, tolerance: f64, max_order: u32, format: Format, out: Option<&Path>) -> CliResult {
    let tableau = match resolve_method(sel)? {
        Method::Rkfd(t) => t,
        Method::Rk(t) => {
            return Err(CliError::input(format!(
                "'{}' is a classical RK tableau; run `rkfd convert` first",
                t.name()
            )))
        }
    };
    let report = conditions::evaluate_conditions(&tableau, max_order, tolerance)?;
    let mut w = open_output(out)?;
    match format {
        Format::Table => write_order_table(&report, tableau.declared_order(), &mut w)?,
        Format::Csv => write_order_csv(&report, &mut w)?,
    }
    w.flush()?;
    let required = tableau.declared_order().unwrap_or(1);
    Ok(if report.attained_order >= required { 0 } else { 1 })
}

fn write_order_table(report: &OrderReport, declared: Option<u32>, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "method: {}   tolerance: {:e}", report.method, report.tolerance)?;
    writeln!(
        w,
        "{:>5}  {:<16}  {:>24}  {:>24}  {:>10}  pass",
        "order", "condition", "lhs", "rhs", "residual"
    )?;
    for r in &report.results {
        writeln!(
            w,
            "{:>5}  {:<16}  {:>24}  {:>24}  {:>10}  {}",
            r.order,
            r.id,
            r.lhs,
            r.rhs,
            sci(r.residual),
            if r.pass { "ok" } else { "FAIL" }
        )?;
    }
    match declared {
        Some(d) => writeln!(w, "attained order: {} (declared {d})", report.attained_order)?,
        None => writeln!(w, "attained order: {}", report.attained_order)?,
    }
    if let Some(first) = report.failures().find(|r| r.order <= declared.unwrap_or(1)) {
        writeln!(
            w,
            "first failing condition within the declared order: {} (order {}), residual {}",
            first.id,
            first.order,
            sci(first.residual)
        )?;
    }
    Ok(())
}

fn write_order_csv(report: &OrderReport, w: &mut dyn Write) -> CliResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CliError::input(e.to_string());
    csv.write_record(["order", "condition_id", "lhs", "rhs", "residual", "pass"])
        .map_err(io)?;
    for r in &report.results {
        csv.write_record([
            r.order.to_string(),
            r.id.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.residual.to_string(),
            r.pass.to_string(),
        ])
        .map_err(io)?;
    }
    csv.flush()?;
    Ok(())
}

fn cmd_integrate(
    method: &str,
    problem: &str,
    h: f64,
    stride: usize,
    with_errors: bool,
    format: Format,
    out: Option<&Path>,
) -> CliResult {
    let method = resolve_method(method)?;
    let problem = resolve_problems(&[problem.to_string()])?
        .pop()
        .expect("one selector resolves to one problem");
    check_step(h, "h")?;
    if stride == 0 {
        return Err(CliError::input("stride must be at least 1"));
    }
    let run = method.integrate(&problem, h)?;
    let mut w = open_output(out)?;
    match format {
        Format::Csv => {
            let exact = if with_errors { problem.exact() } else { None };
            integrate::write_trajectory_csv(&run, &mut w, stride, exact)?;
        }
        Format::Table => {
            writeln!(w, "method: {}   problem: {}   h: {}", run.method, run.problem, run.h)?;
            writeln!(w, "steps: {}   fevals: {}", run.n_steps, run.n_fevals)?;
            if let Some(e) = run.max_abs_error {
                writeln!(w, "max |y - y_exact|: {}", sci(e))?;
            }
            let s = run.final_state();
            writeln!(w, "final x: {}", s.x)?;
            for (label, slot) in ["y", "dy", "d2y", "d3y"].iter().zip(Slot::ALL) {
                let vals: Vec<String> = s.slot(slot).iter().map(|v| v.to_string()).collect();
                writeln!(w, "{label:>4}: {}", vals.join(", "))?;
            }
        }
    }
    w.flush()?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_converge(
    methods: &[String],
    problems: &[String],
    h0: f64,
    levels: usize,
    local: Option<Slot>,
    format: Format,
    out: Option<&Path>,
) -> CliResult {
    let methods = resolve_methods(methods)?;
    let problems = resolve_problems(problems)?;
    check_step(h0, "h0")?;
    if levels < 2 {
        return Err(CliError::input("levels must be at least 2"));
    }
    let mut reports = Vec::new();
    for m in &methods {
        for p in &problems {
            let report = match local {
                Some(slot) => {
                    let hs: Vec<f64> = (0..levels).map(|k| h0 / (1u64 << k) as f64).collect();
                    analysis::local_error_study(m, p, &hs, slot)?
                }
                None => analysis::convergence_study(m, p, h0, levels)?,
            };
            reports.push(report);
        }
    }
    let mut w = open_output(out)?;
    match format {
        Format::Csv => analysis::write_convergence_csv(&reports, &mut w)?,
        Format::Table => write_convergence_table(&reports, &mut w)?,
    }
    w.flush()?;
    Ok(0)
}

fn write_convergence_table(reports: &[ConvergenceReport], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{:<14} {:<8} {:>12} {:>10} {:>8}", "method", "problem", "h", "error", "order")?;
    for r in reports {
        for p in &r.points {
            let order = p.observed_order.map(|o| format!("{o:.3}")).unwrap_or_default();
            writeln!(w, "{:<14} {:<8} {:>12} {:>10} {:>8}", r.method, r.problem, p.h, sci(p.error), order)?;
        }
        if let Some(s) = r.slope {
            writeln!(w, "{:<14} {:<8} fitted slope {s:.3}", r.method, r.problem)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    methods: &[String],
    problems: &[String],
    h_list: &[f64],
    repeats: usize,
    format: Format,
    out: Option<&Path>,
    plot_script: Option<&Path>,
) -> CliResult {
    let methods = resolve_methods(methods)?;
    let problems = resolve_problems(problems)?;
    for &h in h_list {
        check_step(h, "h")?;
    }
    if repeats == 0 {
        return Err(CliError::input("repeats must be at least 1"));
    }
    let points = analysis::bench(&methods, &problems, h_list, repeats)?;

    let mut w = open_output(out)?;
    match format {
        Format::Csv => analysis::write_bench_csv(&points, &mut w)?,
        Format::Table => write_bench_table(&points, &mut w)?,
    }
    w.flush()?;
    for line in wall_time_ratios(&points) {
        eprintln!("{line}");
    }
    if let Some(path) = plot_script {
        std::fs::write(path, analysis::gnuplot_script(&points))
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }

    let failures: Vec<&EfficiencyPoint> = points.iter().filter(|p| p.failure.is_some()).collect();
    for p in &failures {
        eprintln!(
            "error: {} on {} at h = {}: {}",
            p.method,
            p.problem,
            p.h,
            p.failure.as_deref().unwrap_or_default()
        );
    }
    Ok(if failures.is_empty() { 0 } else { 1 })
}

fn write_bench_table(points: &[EfficiencyPoint], w: &mut dyn Write) -> io::Result<()> {
    writeln!(
        w,
        "{:<14} {:<8} {:>10} {:>9} {:>9} {:>10} {:>12}",
        "method", "problem", "h", "steps", "fevals", "max_error", "wall_s"
    )?;
    for p in points {
        let err = match (&p.failure, p.max_abs_error) {
            (Some(_), _) => "diverged".to_string(),
            (None, Some(e)) => sci(e),
            (None, None) => String::new(),
        };
        let wall = p.wall_seconds.map(|t| format!("{t:.6}")).unwrap_or_default();
        writeln!(
            w,
            "{:<14} {:<8} {:>10} {:>9} {:>9} {:>10} {:>12}",
            p.method, p.problem, p.h, p.n_steps, p.n_fevals, err, wall
        )?;
    }
    Ok(())
}

/// Wall-time ratios of each method against `rk4` at matching problem and h.
/// Informational only.
fn wall_time_ratios(points: &[EfficiencyPoint]) -> Vec<String> {
    let baseline = |p: &EfficiencyPoint| {
        points
            .iter()
            .find(|q| q.method == "rk4" && q.problem == p.problem && q.h == p.h)
            .and_then(|q| q.wall_seconds)
    };
    points
        .iter()
        .filter(|p| p.method != "rk4")
        .filter_map(|p| {
            let (t, base) = (p.wall_seconds?, baseline(p)?);
            (base > 0.0).then(|| {
                format!(
                    "wall-time ratio {}/rk4 on {} at h = {}: {:.2}",
                    p.method,
                    p.problem,
                    p.h,
                    t / base
                )
            })
        })
        .collect()
}

fn cmd_convert(sel: &str, out: &Path) -> CliResult {
    let rk = match resolve_method(sel)? {
        Method::Rk(t) => t,
        Method::Rkfd(t) => {
            return Err(CliError::input(format!("'{}' is already an RKFD tableau", t.name())))
        }
    };
    let converted = tableaux::convert_rk_to_rkfd(&rk)?;
    tableaux::save_tableau(&converted, out)?;
    println!(
        "wrote {} ({} stages, attained order {}) to {}",
        converted.name(),
        converted.stages(),
        conditions::attained_order(&converted, conditions::DEFAULT_TOLERANCE),
        out.display()
    );
    Ok(0)
}

fn cmd_list_problems() -> CliResult {
    let mut w = io::stdout().lock();
    writeln!(w, "{:<6} {:>2}  {:<24} has_exact", "name", "m", "interval")?;
    for name in problems::PROBLEM_NAMES {
        let p = problems::by_name(name).expect("listed problems resolve");
        writeln!(
            w,
            "{:<6} {:>2}  {:<24} {}",
            p.name(),
            p.dim(),
            format!("[{}, {}]", p.x0(), p.x_end()),
            p.has_exact()
        )?;
    }
    Ok(0)
}
