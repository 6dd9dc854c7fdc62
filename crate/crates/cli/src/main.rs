mod manifest;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use topo_bc::bounds::{achievable_gdof, outer_bounds, recognize_policy};
use topo_bc::harness::{
    default_alpha_grid, estimate_gdof, verify_against_claims, HarnessError, SweepConfig, VerifyRow,
    DEFAULT_TOLERANCE, DEFAULT_TRIALS, VERIFIED_SCHEMES,
};
use topo_bc::schemes::{Fidelity, Registry, Scheme, SchemeError};
use topo_bc::state::{parse_alpha, parse_distribution_json, Alpha, StateDistribution};

use manifest::RunManifest;

const THREADS_ENV: &str = "TOPO_BC_THREADS";

#[derive(Parser)]
#[command(
    name = "topo-bc",
    version,
    about = "Topological two-user MISO BC with alternating CSIT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outer bounds of a state distribution, and the known achievable value.
    Bounds {
        #[arg(long, value_name = "PATH.json")]
        dist: PathBuf,
        /// Overrides the file's alpha.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Monte Carlo rates of one scheme over an SNR grid, with the fitted slope.
    Simulate {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        alpha: Option<String>,
        /// Custom distribution (schemes with a configurable schedule only).
        #[arg(long, value_name = "PATH.json")]
        dist: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "analytic")]
        mode: Fidelity,
        #[arg(long, value_name = "PATH.csv")]
        out: Option<PathBuf>,
    },
    /// Closed-form sum GDoF curves of the MAT / SU / TSM comparison.
    Sweep {
        /// Comma-separated alpha grid.
        #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
        alpha: String,
        /// Adds measured slopes next to the closed forms.
        #[arg(long)]
        simulated: bool,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "PATH.csv")]
        out: Option<PathBuf>,
    },
    /// Fits every scheme on the default alpha grid and checks the claims.
    Verify {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Comma-separated subset of schemes (default: all).
        #[arg(long)]
        scheme: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "PATH.csv")]
        out: Option<PathBuf>,
    },
    /// Lists the registered schemes.
    Schemes,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Comma-separated SNR points in dB.
    #[arg(long, default_value = "40,60,80")]
    snr_db: String,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum CliError {
    Config(String),
    Runtime(String),
    VerificationFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::VerificationFailed(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_)
            | HarnessError::Scheme(SchemeError::NonIntegerPhases { .. }) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let registry = Registry::standard();
    let result = match cli.command {
        Command::Bounds { dist, alpha } => cmd_bounds(&dist, alpha.as_deref()),
        Command::Simulate {
            scheme,
            alpha,
            dist,
            run,
            mode,
            out,
        } => cmd_simulate(
            &registry,
            &scheme,
            alpha.as_deref(),
            dist.as_ref(),
            &run,
            mode,
            out.as_ref(),
        ),
        Command::Sweep {
            alpha,
            simulated,
            run,
            out,
        } => cmd_sweep(&registry, &alpha, simulated, &run, out.as_ref()),
        Command::Verify {
            tolerance,
            scheme,
            run,
            out,
        } => cmd_verify(&registry, tolerance, scheme.as_deref(), &run, out.as_ref()),
        Command::Schemes => {
            for s in registry.iter() {
                println!("{:14} {}", s.name(), s.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("config error: {m}"),
                CliError::Runtime(m) => eprintln!("error: {m}"),
                CliError::VerificationFailed(n) => {
                    eprintln!("verification failed: {n} row(s) did not pass")
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV}={v:?} is not a positive integer"
            ))),
        },
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse()
                .map_err(|_| CliError::Config(format!("bad {what} {x:?}")))
        })
        .collect()
}

fn alpha_of(s: &str) -> Result<Alpha> {
    parse_alpha(s).map(|a| a.alpha).map_err(CliError::Config)
}

fn load_dist(path: &PathBuf) -> Result<StateDistribution> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = parse_distribution_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(parsed.dist)
}

fn sweep_config(run: &RunArgs, alpha: Alpha, fidelity: Fidelity) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::new(alpha);
    cfg.snr_db = parse_list(&run.snr_db, "SNR")?;
    cfg.trials = run.trials;
    cfg.seed = run.seed;
    cfg.fidelity = fidelity;
    cfg.threads = threads()?;
    cfg.validate()?;
    Ok(cfg)
}

fn record_run(m: &mut RunManifest, run: &RunArgs) {
    m.arg("--snr-db", &run.snr_db);
    m.arg("--trials", run.trials);
    m.arg("--seed", run.seed);
    m.seed = Some(run.seed);
}

fn emit(csv: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn fmt_exact(x: &BigRational) -> String {
    format!(
        "{x} ({:.6})",
        num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
    )
}

fn cmd_bounds(path: &PathBuf, alpha: Option<&str>) -> Result<()> {
    let mut dist = load_dist(path)?;
    if let Some(a) = alpha {
        dist = dist.with_alpha(alpha_of(a)?);
    }
    let report = outer_bounds::<BigRational>(&dist).map_err(|e| CliError::Config(e.to_string()))?;
    println!("alpha = {}", dist.alpha());
    for (name, v) in [
        ("d1", &report.d1),
        ("d2", &report.d2),
        ("d3", &report.d3),
        ("d4", &report.d4),
    ] {
        if let Some(v) = v {
            println!("{name} = {}", fmt_exact(v));
        }
    }
    println!("d_min = {}", fmt_exact(&report.d_min));
    match recognize_policy(&dist) {
        Some(policy) => {
            let ach = achievable_gdof::<BigRational>(policy, dist.alpha());
            println!("policy = {policy}");
            println!(
                "achievable = {} [{}]",
                fmt_exact(&ach.value),
                ach.optimality
            );
            println!("gap = {}", fmt_exact(&(report.d_min.clone() - ach.value)));
        }
        None => println!("policy = unrecognized (no achievable value known)"),
    }
    Ok(())
}

enum Resolved<'a> {
    Registered(&'a dyn Scheme),
    Custom(Box<dyn Scheme>),
}

impl Resolved<'_> {
    fn as_ref(&self) -> &dyn Scheme {
        match self {
            Resolved::Registered(s) => *s,
            Resolved::Custom(s) => s.as_ref(),
        }
    }
}

fn resolve_scheme<'a>(
    registry: &'a Registry,
    name: &str,
    dist: Option<&StateDistribution>,
) -> Result<Resolved<'a>> {
    let base = registry.get(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown scheme {name:?} (known: {})",
            registry.names().join(", ")
        ))
    })?;
    match dist {
        None => Ok(Resolved::Registered(base)),
        Some(d) => base
            .with_distribution(d)
            .map(Resolved::Custom)
            .map_err(|e| CliError::Config(e.to_string())),
    }
}

fn cmd_simulate(
    registry: &Registry,
    name: &str,
    alpha: Option<&str>,
    dist_path: Option<&PathBuf>,
    run: &RunArgs,
    mode: Fidelity,
    out: Option<&PathBuf>,
) -> Result<()> {
    let dist = dist_path.map(load_dist).transpose()?;
    let alpha = match (alpha, &dist) {
        (Some(a), Some(d)) => {
            let a = alpha_of(a)?;
            if a != d.alpha() {
                return Err(CliError::Config(format!(
                    "--alpha {a} disagrees with the distribution's {}",
                    d.alpha()
                )));
            }
            a
        }
        (Some(a), None) => alpha_of(a)?,
        (None, Some(d)) => d.alpha(),
        (None, None) => return Err(CliError::Config("--alpha or --dist is required".into())),
    };
    let resolved = resolve_scheme(registry, name, dist.as_ref())?;
    let scheme = resolved.as_ref();
    scheme
        .supports_alpha(alpha)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = sweep_config(run, alpha, mode)?;

    let mut m = RunManifest::new("simulate");
    m.arg("--scheme", name);
    m.arg("--alpha", alpha);
    if let Some(p) = dist_path {
        m.arg("--dist", p.display());
        m.config = Some(p.display().to_string());
    }
    record_run(&mut m, run);
    m.arg("--mode", mode);
    m.output = out.map(|p| p.display().to_string());
    m.param("scheme", scheme.name());
    m.param("claimed_gdof", format!("{:.6}", scheme.claimed_gdof(alpha)));

    let (points, fit) = estimate_gdof(scheme, &cfg)?;
    let mut body = String::from("snr_db,rho,rate_u1,rate_u2,rate_sum,se_sum\n");
    for p in &points {
        let _ = writeln!(
            body,
            "{},{:e},{},{},{},{}",
            p.snr_db, p.rho, p.rate_user1, p.rate_user2, p.rate_sum, p.se_sum
        );
    }
    let _ = writeln!(body, "slope,,,,{},", fit.slope);
    if let Some(peak) = points.iter().filter_map(|p| p.peak_power).reduce(f64::max) {
        m.param("peak_power", peak);
    }
    if let Some(side) = points.last().and_then(|p| p.side.as_ref()) {
        m.param("side_error_power", side.mean_error_power);
    }
    emit(&format!("{}{body}", m.header()), out)?;
    if out.is_some() {
        println!(
            "{}: slope {:.4} (claimed {:.4})",
            scheme.name(),
            fit.slope,
            scheme.claimed_gdof(alpha)
        );
    }
    Ok(())
}

/// Comparison columns and the registry scheme each one is measured with.
const COMPARISON: [(&str, &str); 4] = [
    ("mat", "mat"),
    ("su", "su"),
    ("tsm1", "tsm3"),
    ("tsm2", "tsm4"),
];

fn comparison_closed_forms(a: f64) -> [f64; 4] {
    [
        2.0 * (1.0 + a) / 3.0,
        1.0,
        1.0 + a * a / (2.0 + a),
        1.0 + a / 3.0,
    ]
}

fn cmd_sweep(
    registry: &Registry,
    alphas: &str,
    simulated: bool,
    run: &RunArgs,
    out: Option<&PathBuf>,
) -> Result<()> {
    let grid: Vec<Alpha> = alphas
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(alpha_of)
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(CliError::Config("empty alpha grid".into()));
    }
    let mut m = RunManifest::new("sweep");
    m.arg("--alpha", alphas);
    if simulated {
        m.flag("--simulated");
        record_run(&mut m, run);
        m.param(
            "measured_with",
            COMPARISON
                .iter()
                .map(|(c, s)| format!("{c}={s}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    m.output = out.map(|p| p.display().to_string());

    let mut body = String::from("alpha,mat,su,tsm1,tsm2");
    if simulated {
        body.push_str(",mat_sim,su_sim,tsm1_sim,tsm2_sim");
    }
    body.push('\n');
    for alpha in grid {
        let _ = write!(body, "{}", alpha.value());
        for v in comparison_closed_forms(alpha.value()) {
            let _ = write!(body, ",{v:.6}");
        }
        if simulated {
            let cfg = sweep_config(run, alpha, Fidelity::Analytic)?;
            for (_, name) in COMPARISON {
                let scheme = resolve_scheme(registry, name, None)?;
                let slope = estimate_gdof(scheme.as_ref(), &cfg)?.1.slope;
                let _ = write!(body, ",{slope:.6}");
            }
        }
        body.push('\n');
    }
    emit(&format!("{}{body}", m.header()), out)
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn verify_table(rows: &[VerifyRow]) -> String {
    let mut s = format!(
        "{:14} {:>5} {:>8} {:>8} {:>8} {:>8}  {}\n",
        "scheme", "alpha", "claimed", "bound", "slope", "se_sum", "result"
    );
    let f = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    for r in rows {
        let _ = writeln!(
            s,
            "{:14} {:>5} {:>8.4} {:>8} {:>8} {:>8}  {}{}",
            r.scheme,
            r.alpha.to_string(),
            r.claimed,
            f(r.bound),
            f(r.slope),
            f(r.se_sum),
            if r.pass { "PASS" } else { "FAIL" },
            if r.note.is_empty() {
                String::new()
            } else {
                format!(" ({})", r.note)
            }
        );
    }
    s
}

fn cmd_verify(
    registry: &Registry,
    tolerance: f64,
    schemes: Option<&str>,
    run: &RunArgs,
    out: Option<&PathBuf>,
) -> Result<()> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(CliError::Config(format!(
            "tolerance {tolerance} must be a nonnegative number"
        )));
    }
    let names: Vec<String> = match schemes {
        Some(list) => parse_list(list, "scheme")?,
        None => VERIFIED_SCHEMES.iter().map(|s| s.to_string()).collect(),
    };
    if let Some(bad) = names.iter().find(|n| registry.get(n).is_none()) {
        return Err(CliError::Config(format!("unknown scheme {bad:?}")));
    }
    let template = sweep_config(run, Alpha::ratio(0, 1), Fidelity::Analytic)?;
    let mut m = RunManifest::new("verify");
    m.arg("--tolerance", tolerance);
    if let Some(list) = schemes {
        m.arg("--scheme", list);
    }
    record_run(&mut m, run);
    m.output = out.map(|p| p.display().to_string());

    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows = verify_against_claims(registry, &refs, &default_alpha_grid(), tolerance, &template);
    print!("{}", verify_table(&rows));
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("{} of {} rows pass", rows.len() - failed, rows.len());

    if let Some(path) = out {
        let mut body =
            String::from("scheme,alpha,claimed,bound,slope,residual_rms,se_sum,pass,note\n");
        for r in &rows {
            let _ = writeln!(
                body,
                "{},{},{},{},{},{},{},{},{}",
                r.scheme,
                r.alpha,
                r.claimed,
                opt(r.bound),
                opt(r.slope),
                opt(r.residual_rms),
                opt(r.se_sum),
                r.pass,
                csv_quote(&r.note)
            );
        }
        emit(&format!("{}{body}", m.header()), Some(path))?;
    }
    if failed > 0 {
        return Err(CliError::VerificationFailed(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_rows() {
        let at = |a: f64| comparison_closed_forms(a).map(|v| (v * 1000.0).round() / 1000.0);
        assert_eq!(at(0.0), [0.667, 1.0, 1.0, 1.0]);
        assert_eq!(at(1.0), [1.333, 1.0, 1.333, 1.333]);
        assert_eq!(at(0.5)[2..], [1.1, 1.167]);
    }

    #[test]
    fn quoting() {
        assert_eq!(csv_quote("plain"), "plain");
        assert_eq!(csv_quote("a, \"b\""), "\"a, \"\"b\"\"\"");
    }
}
