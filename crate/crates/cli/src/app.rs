//! Subcommand dispatch. Every run produces a JSON document on standard output
//! (or CSV when requested) and, on failure, a JSON error on standard error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gevrey_core::asymptotics::check_asymptotic_fit;
use gevrey_core::solver::fit_growth_envelope;
use gevrey_core::{
    borel_sum, check_flat_decay, derivative_bounds_check, estimate_gevrey_order, euler_alpha,
    formal_solve, is_sharp_class, laplace_numeric, laplace_segment, newton_polygon, residual_check,
    BorelSumPlan, Complex64, Continuation, FormalPowerSeries, LinearOperator, Sector,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::expr::Expr;
use crate::parse::{parse_operator, print_operator};
use crate::CliError;

/// Relative tolerance of oracle quadratures.
pub const ORACLE_TOL: f64 = 1e-12;
/// Environment variable overriding the summation quadrature tolerance.
pub const QUAD_TOL_ENV: &str = "GEVREY_QUAD_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "gevrey",
    version,
    about = "Gevrey analysis and Borel summation of formal power series"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Newton polygon and Gevrey candidates of an operator.
    Polygon {
        operator: String,
        /// Emit the polygon vertices as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Formal power-series solution of P u = g.
    Solve {
        operator: String,
        /// Right-hand side: JSON pair list (a polynomial) or a series file.
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        /// Initial value for a free index, as `k=value` (repeatable).
        #[arg(long = "init", allow_hyphen_values = true)]
        init: Vec<String>,
        #[arg(short = 'N')]
        n: usize,
    },
    /// Convergent / Gevrey-2 classification for z^2 u' + u = g.
    ClassifyEuler {
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
        /// Number of terms of the alpha series (default: 20, or the series truncation).
        #[arg(short = 'N')]
        n: Option<usize>,
        /// Growth envelope `M,C` with |b_k| <= M C^k (default: fitted).
        #[arg(long, allow_hyphen_values = true)]
        growth: Option<String>,
    },
    /// Gevrey-order estimate and sharpness test of a series file.
    Gevrey {
        file: PathBuf,
        /// Order for the sharpness test (default: the estimate).
        #[arg(short = 's')]
        s: Option<f64>,
    },
    /// Borel sum of a series file at a point.
    Sum {
        file: PathBuf,
        #[arg(short = 's')]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        /// Evaluation point `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// `pade`, `pade:NUM,DEN`, inline JSON or a JSON file.
        #[arg(long)]
        continuation: Option<String>,
    },
    /// Numerical certification of asymptotic relations on a sector.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
}

#[derive(Debug, Subcommand)]
enum CheckKind {
    /// Gevrey asymptotic expansion of an oracle function by a series file.
    Fit {
        series: PathBuf,
        #[command(flatten)]
        common: CheckArgs,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// Write `(n, z, remainder)` samples to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Flat (exponentially small) decay of an oracle function.
    Flat {
        #[command(flatten)]
        common: CheckArgs,
    },
    /// Gevrey bounds on the derivatives of an oracle function.
    Derivatives {
        #[command(flatten)]
        common: CheckArgs,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
    },
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    #[arg(short = 's')]
    s: f64,
    /// Sector `direction,opening,radius` (radius may be `inf`).
    #[arg(long, allow_hyphen_values = true)]
    sector: String,
    /// Expression in z, inline JSON oracle spec, or a JSON file.
    #[arg(long, allow_hyphen_values = true)]
    oracle: String,
    /// Grid size `n_radii,n_angles`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI with arguments (including the program name), reading
/// `GEVREY_QUAD_TOL` from the environment.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    run_with_env(args, std::env::var(QUAD_TOL_ENV).ok())
}

/// [`run`] with an explicit value for `GEVREY_QUAD_TOL`.
pub fn run_with_env<I, S>(args: I, quad_tol: Option<String>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: 0,
                    stdout: e.to_string(),
                    stderr: String::new(),
                };
            }
            return failure(&CliError::Usage(e.to_string().trim_end().to_string()));
        }
    };
    match dispatch(cli.command, quad_tol.as_deref()) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => failure(&e),
    }
}

fn failure(e: &CliError) -> Outcome {
    let mut body = json!({
        "kind": e.kind(),
        "message": e.to_string(),
    });
    if let CliError::Parse(p) = e {
        body["position"] = json!(p.position);
    }
    let doc = json!({ "error": body, "exit_code": e.exit_code() });
    Outcome {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).expect("serializable")
        ),
    }
}

fn render(v: &Value) -> String {
    format!(
        "{}\n",
        serde_json::to_string_pretty(v).expect("serializable")
    )
}

/// JSON number, with non-finite values spelled out as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn complex(c: Complex64) -> Value {
    json!([num(c.re), num(c.im)])
}

fn point(p: Option<(f64, f64)>) -> Value {
    p.map_or(Value::Null, |(re, im)| json!([num(re), num(im)]))
}

fn series_json(a: &FormalPowerSeries) -> Value {
    Value::Array(a.coeffs().iter().map(|&c| complex(c)).collect())
}

fn dispatch(cmd: Command, quad_tol: Option<&str>) -> Result<String, CliError> {
    match cmd {
        Command::Polygon { operator, csv } => polygon(&operator, csv),
        Command::Solve {
            operator,
            rhs,
            init,
            n,
        } => solve(&operator, &rhs, &init, n),
        Command::ClassifyEuler { rhs, n, growth } => classify_euler(&rhs, n, growth.as_deref()),
        Command::Gevrey { file, s } => gevrey(&file, s),
        Command::Sum {
            file,
            s,
            eta,
            at,
            continuation,
        } => sum(&file, s, eta, &at, continuation.as_deref(), quad_tol),
        Command::Check { kind } => check(kind),
    }
}

fn operator(text: &str) -> Result<LinearOperator, CliError> {
    parse_operator(text).map_err(CliError::Parse)
}

fn polygon(text: &str, csv: bool) -> Result<String, CliError> {
    let op = operator(text)?;
    let poly = newton_polygon(&op)?;
    if csv {
        return Ok(poly.vertices_csv());
    }
    let export = poly.export();
    Ok(render(&json!({
        "operator": print_operator(&op),
        "order": op.order(),
        "base_points": export.base_points,
        "vertices": export.vertices,
        "finite_slopes": export.finite_slopes,
        "gevrey_candidates": export.gevrey_candidates,
        "has_vertical_ray": poly.has_vertical_ray,
    })))
}

fn read_series_file(path: &Path) -> Result<FormalPowerSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: not a series file: {e}", path.display())))
}

/// A JSON pair list is a polynomial (exact zero tail); anything else names
/// a series file, read as a truncated series.
fn read_rhs(arg: &str) -> Result<FormalPowerSeries, CliError> {
    if arg.trim_start().starts_with('[') {
        let pairs: Vec<(f64, f64)> = serde_json::from_str(arg)
            .map_err(|e| CliError::Input(format!("--rhs: expected [[re,im],...]: {e}")))?;
        let coeffs = pairs
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        return Ok(FormalPowerSeries::polynomial(coeffs)?);
    }
    read_series_file(Path::new(arg))
}

fn constant(text: &str) -> Result<Complex64, CliError> {
    let e = Expr::parse(text, "").map_err(CliError::Parse)?;
    let v = e.eval(Complex64::new(0.0, 0.0));
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Input(format!(
            "'{text}' is not a finite constant"
        )))
    }
}

fn parse_init(items: &[String]) -> Result<BTreeMap<usize, Complex64>, CliError> {
    items
        .iter()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("--init expects k=value, got '{item}'")))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("--init: bad index '{k}'")))?;
            Ok((k, constant(v)?))
        })
        .collect()
}

fn solve(text: &str, rhs: &str, init: &[String], n: usize) -> Result<String, CliError> {
    let op = operator(text)?;
    let g = read_rhs(rhs)?;
    let init = parse_init(init)?;
    let result = formal_solve(&op, &g, &init, n)?;
    let residual = result
        .solution
        .as_ref()
        .map_or(Value::Null, |u| num(residual_check(&op, u, &g)));
    Ok(render(&json!({
        "operator": print_operator(&op),
        "N": n,
        "coefficients": result.solution.as_ref().map_or(Value::Null, series_json),
        "free_indices": result.free_indices,
        "resonance_indices": result.resonance_indices,
        "residual": residual,
    })))
}

fn pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a
                .parse()
                .map_err(|_| CliError::Input(format!("{what}: bad number '{a}'")))?;
            let b = b
                .parse()
                .map_err(|_| CliError::Input(format!("{what}: bad number '{b}'")))?;
            Ok((a, b))
        }
        _ => Err(CliError::Input(format!(
            "{what} expects two comma-separated numbers, got '{text}'"
        ))),
    }
}

fn classify_euler(rhs: &str, n: Option<usize>, growth: Option<&str>) -> Result<String, CliError> {
    let g = read_rhs(rhs)?;
    let n = n.unwrap_or(if g.is_polynomial() {
        20
    } else {
        g.truncation_order()
    });
    let envelope = match growth {
        Some(text) => pair(text, "--growth")?,
        None => fit_growth_envelope(&g),
    };
    let class = euler_alpha(&g, n, envelope)?;
    let euler = parse_operator("z^2*D + 1").expect("fixed operator");
    let sol = formal_solve(&euler, &g, &BTreeMap::new(), n)?;
    Ok(render(&json!({
        "N": n,
        "alpha": complex(class.alpha),
        "abs_alpha": num(class.alpha.norm()),
        "alpha_tail_bound": num(class.alpha_tail_bound),
        "verdict": class.verdict,
        "heuristic": growth.is_none(),
        "growth": { "M": num(envelope.0), "C": num(envelope.1) },
        "solution": sol.solution.as_ref().map_or(Value::Null, series_json),
    })))
}

fn gevrey(file: &Path, s: Option<f64>) -> Result<String, CliError> {
    let a = read_series_file(file)?;
    let fit = estimate_gevrey_order(&a)?;
    let s_test = s.unwrap_or(fit.s_hat);
    // an explicit order is always tested; the estimate only when it admits a test
    let sharp = if s.is_some() || s_test > 1.0 {
        let c = is_sharp_class(&a, s_test)?;
        json!({ "s": num(s_test), "sharp": c.sharp, "radius": num(c.radius) })
    } else {
        Value::Null
    };
    Ok(render(&json!({
        "N": a.truncation_order(),
        "s_hat": num(fit.s_hat),
        "log_C": num(fit.log_c),
        "log_M": num(fit.log_m),
        "residual": num(fit.residual),
        "sharp_class": sharp,
    })))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ContinuationSpec {
    ClosedForm {
        expr: String,
    },
    Pade {
        num: Option<usize>,
        den: Option<usize>,
    },
}

fn read_json_spec<T: for<'de> Deserialize<'de>>(arg: &str, what: &str) -> Result<T, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| CliError::Input(format!("{what}: cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

fn continuation(arg: Option<&str>) -> Result<(Continuation, String), CliError> {
    let spec = match arg {
        None | Some("pade") => ContinuationSpec::Pade {
            num: None,
            den: None,
        },
        Some(a) if a.starts_with("pade:") => {
            let (num, den) = pair(&a[5..], "--continuation")?;
            if num < 0.0 || den < 0.0 || num.fract() != 0.0 || den.fract() != 0.0 {
                return Err(CliError::Input(
                    "Padé degrees must be nonnegative integers".into(),
                ));
            }
            ContinuationSpec::Pade {
                num: Some(num as usize),
                den: Some(den as usize),
            }
        }
        Some(a) => read_json_spec(a, "--continuation")?,
    };
    Ok(match spec {
        ContinuationSpec::ClosedForm { expr } => {
            let e = Expr::parse(&expr, "u").map_err(CliError::Parse)?;
            let label = format!("closed_form:{}", e.source());
            (
                Continuation::ClosedForm(std::sync::Arc::new(move |u| e.eval(u))),
                label,
            )
        }
        ContinuationSpec::Pade { num, den } => match (num, den) {
            (Some(n), Some(d)) => (Continuation::Pade(Some((n, d))), format!("pade:{n},{d}")),
            (None, None) => (Continuation::Pade(None), "pade".into()),
            _ => return Err(CliError::Input("Padé spec needs both num and den".into())),
        },
    })
}

fn quad_tolerance(env: Option<&str>) -> Result<f64, CliError> {
    match env {
        None => Ok(gevrey_core::borel::DEFAULT_QUAD_REL_TOL),
        Some(text) => match text.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t < 1.0 => Ok(t),
            _ => Err(CliError::Input(format!(
                "{QUAD_TOL_ENV} must be a number in (0, 1), got '{text}'"
            ))),
        },
    }
}

fn sum(
    file: &Path,
    s: f64,
    eta: f64,
    at: &str,
    cont: Option<&str>,
    quad_tol: Option<&str>,
) -> Result<String, CliError> {
    let a = read_series_file(file)?;
    let (re, im) = pair(at, "--at")?;
    let z = Complex64::new(re, im);
    let tol = quad_tolerance(quad_tol)?;
    let (continuation, label) = continuation(cont)?;
    let plan = BorelSumPlan::for_order(s, eta)?
        .with_continuation(continuation)
        .with_tolerance(tol);
    let r = borel_sum(&a, s, &plan, z)?;
    let pade = r.pade.as_ref().map_or(Value::Null, |p| {
        json!({
            "requested": [p.requested.0, p.requested.1],
            "num_deg": p.numerator_degree(),
            "den_deg": p.denominator_degree(),
            "condition": num(p.condition),
        })
    });
    Ok(render(&json!({
        "s": num(s),
        "m": num(plan.m),
        "eta": num(plan.eta),
        "at": complex(z),
        "continuation": label,
        "quad_rel_tol": num(tol),
        "value": complex(r.value),
        "est_error": num(r.est_error),
        "domain_ok": r.domain_ok,
        "growth": { "B": num(r.growth.big_b), "b": num(r.growth.b), "m": num(r.growth.m) },
        "poles": r.poles.iter().map(|&p| complex(p)).collect::<Vec<_>>(),
        "pade": pade,
        "warnings": r.warnings,
    })))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum OracleSpec {
    /// Expression in `z`.
    Expr { expr: String },
    /// Index-`m` Laplace transform of `g(u)` along the ray through `z`.
    Laplace { g: String, m: f64 },
    /// Laplace integral of `g` over `from < |u| < to` along the ray of angle `eta`.
    LaplaceSegment {
        g: String,
        m: f64,
        from: f64,
        to: f64,
        #[serde(default)]
        eta: f64,
    },
}

type Oracle = Box<dyn Fn(Complex64) -> Complex64>;

fn oracle(arg: &str) -> Result<(Oracle, Value), CliError> {
    let trimmed = arg.trim_start();
    let spec = if trimmed.starts_with('{') || Path::new(arg).is_file() {
        read_json_spec(arg, "--oracle")?
    } else {
        OracleSpec::Expr {
            expr: arg.to_string(),
        }
    };
    let nan = Complex64::new(f64::NAN, f64::NAN);
    Ok(match spec {
        OracleSpec::Expr { expr } => {
            let e = Expr::parse(&expr, "z").map_err(CliError::Parse)?;
            (
                Box::new(move |z| e.eval(z)),
                json!({ "type": "expr", "expr": expr }),
            )
        }
        OracleSpec::Laplace { g, m } => {
            let e = Expr::parse(&g, "u").map_err(CliError::Parse)?;
            BorelSumPlan::new(m, 0.0)?;
            let f = move |z: Complex64| {
                BorelSumPlan::new(m, z.arg())
                    .map(|p| p.with_tolerance(ORACLE_TOL))
                    .and_then(|p| laplace_numeric(&|u| e.eval(u), &p, z))
                    .unwrap_or(nan)
            };
            (
                Box::new(f),
                json!({ "type": "laplace", "g": g, "m": num(m), "tolerance": ORACLE_TOL }),
            )
        }
        OracleSpec::LaplaceSegment {
            g,
            m,
            from,
            to,
            eta,
        } => {
            let e = Expr::parse(&g, "u").map_err(CliError::Parse)?;
            let plan = BorelSumPlan::new(m, eta)?.with_tolerance(ORACLE_TOL);
            let f = move |z: Complex64| {
                laplace_segment(&|u| e.eval(u), &plan, from, to, z).unwrap_or(nan)
            };
            (
                Box::new(f),
                json!({
                    "type": "laplace_segment", "g": g, "m": num(m),
                    "from": num(from), "to": num(to), "eta": num(eta),
                    "tolerance": ORACLE_TOL,
                }),
            )
        }
    })
}

fn sector(args: &CheckArgs) -> Result<Sector, CliError> {
    let parts: Vec<&str> = args.sector.split(',').map(str::trim).collect();
    let [theta, alpha, rho] = parts.as_slice() else {
        return Err(CliError::Input(format!(
            "--sector expects direction,opening,radius, got '{}'",
            args.sector
        )));
    };
    let number = |t: &str| -> Result<f64, CliError> {
        match t {
            "inf" | "infinity" => Ok(f64::INFINITY),
            _ => t
                .parse()
                .map_err(|_| CliError::Input(format!("--sector: bad number '{t}'"))),
        }
    };
    let mut sector = Sector::new(number(theta)?, number(alpha)?, number(rho)?)?;
    if let Some(grid) = &args.grid {
        let (nr, na) = pair(grid, "--grid")?;
        if nr < 2.0 || na < 1.0 || nr.fract() != 0.0 || na.fract() != 0.0 {
            return Err(CliError::Input(
                "--grid needs integers n_radii >= 2, n_angles >= 1".into(),
            ));
        }
        sector = sector.with_grid(nr as usize, na as usize);
    }
    Ok(sector)
}

fn sector_json(s: &Sector) -> Value {
    json!({
        "direction": num(s.direction),
        "opening": num(s.opening),
        "radius": num(s.radius),
        "n_radii": s.n_radii,
        "n_angles": s.n_angles,
    })
}

fn check(kind: CheckKind) -> Result<String, CliError> {
    match kind {
        CheckKind::Fit {
            series,
            common,
            n_max,
            csv,
        } => {
            let a = read_series_file(&series)?;
            let sector = sector(&common)?;
            let (f, spec) = oracle(&common.oracle)?;
            let fit = check_asymptotic_fit(&*f, &a, common.s, &sector, n_max)?;
            if let Some(path) = csv {
                std::fs::write(&path, fit.remainders_csv()).map_err(|e| {
                    CliError::Input(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            Ok(render(&json!({
                "check": "asymptotic_fit",
                "sector": sector_json(&sector),
                "s": num(common.s),
                "n_max": n_max,
                "oracle": spec,
                "M": num(fit.m_const),
                "C": num(fit.c_const),
                "ok": fit.ok,
                "elasticity": num(fit.elasticity),
                "root_sequence": fit.root_sequence.iter().map(|&(n, r)| json!([n, num(r)])).collect::<Vec<_>>(),
                "worst_point": point(fit.worst_point),
            })))
        }
        CheckKind::Flat { common } => {
            let sector = sector(&common)?;
            let (f, spec) = oracle(&common.oracle)?;
            let fit = check_flat_decay(&*f, common.s, &sector)?;
            Ok(render(&json!({
                "check": "flat_decay",
                "sector": sector_json(&sector),
                "s": num(common.s),
                "oracle": spec,
                "B": num(fit.big_b),
                "b": num(fit.b),
                "ok": fit.ok,
                "points_used": fit.points_used,
                "worst_point": point(fit.worst_point),
            })))
        }
        CheckKind::Derivatives { common, k_max } => {
            let sector = sector(&common)?;
            let (f, spec) = oracle(&common.oracle)?;
            let d = derivative_bounds_check(&*f, &sector, common.s, k_max)?;
            Ok(render(&json!({
                "check": "derivative_bounds",
                "sector": sector_json(&sector),
                "s": num(common.s),
                "k_max": k_max,
                "oracle": spec,
                "M": num(d.m_const),
                "C": num(d.c_const),
                "bounded": d.bounded,
                "skipped_points": d.skipped_points,
                "warnings": d.warnings,
                "worst_point": point(d.worst_point),
            })))
        }
    }
}
