//! Command-line front end. Every command that writes a file also writes
//! `<file>.manifest.json`, from which `replay` re-runs the command and
//! checks the output digests.

use crate::error::{Error, Result};
use crate::estimate::{alpha_bar, lambda_bar, mle_alpha_given_lambda, mle_lambda_given_alpha};
use crate::invert::{cdf_grid, write_cdf_csv, InversionConfig, InversionMethod};
use crate::model::{AsymptoticRef, EstimateReport, EstimatorKind, OUParams, SufficientStats};
use crate::moments::{
    alpha_bar_moments, alpha_hat_moments, cramer_rao_lambda, lambda_bar_moments, lambda_hat_moments,
    scaled_curves, table1, write_moments_csv, write_table1_csv, QuadratureConfig,
};
use crate::oracle::{mc_discretization_sweep, validation_suite, write_sweep_csv, OracleConfig};
use crate::simulate::{for_each_path, path_to_stats, read_paths_csv, write_batch_header, write_batch_rows, write_path_csv, SimConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "oumle", version, about = "Finite-sample moments of OU maximum-likelihood estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Simulate exact OU paths to CSV.
    Simulate(SimulateArgs),
    /// Bias and MSE of λ̂ on the 84-cell reference grid.
    Table1(Table1Args),
    /// Scaled bias and MSE curves over a horizon grid.
    Curves(CurvesArgs),
    /// Estimators and their analytic moments from a path CSV.
    Estimate(EstimateArgs),
    /// Distribution function of λ̂ by transform inversion.
    Cdf(CdfArgs),
    /// Run the Monte Carlo oracle suite.
    Validate(ValidateArgs),
    /// Estimator bias and MSE across time-step resolutions.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest and compare digests.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
}

impl ModelArgs {
    fn params(&self) -> OUParams {
        OUParams::new(self.lambda, self.alpha, self.sigma, self.y0, self.horizon)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 5000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig> {
        let c = QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..Default::default()
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Table1Args {
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurvesArgs {
    #[arg(long, value_delimiter = ',', default_value = "1", allow_hyphen_values = true)]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "-1,0,0.5,1", allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub y0: f64,
    /// Explicit horizons; overrides the min/max/count grid.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 40)]
    pub t_count: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CurvesArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        let g = match &self.t_grid {
            Some(g) => g.clone(),
            None => linspace(self.t_min, self.t_max, self.t_count),
        };
        if g.is_empty() {
            return Err(Error::InvalidConfig("empty horizon grid".into()));
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticMode {
    /// Moments evaluated at the plug-in estimate of each path.
    PlugIn,
    None,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub known_alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub known_lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = AnalyticMode::PlugIn)]
    pub analytic: AnalyticMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Fourier,
    GaverStehfest,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CdfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Explicit abscissae; overrides the min/max/count grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 50)]
    pub x_count: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Fourier)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 14)]
    pub gs_order: usize,
    #[arg(long)]
    pub contour_step: Option<f64>,
    #[arg(long)]
    pub tail_cut: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    /// 10⁴ paths per check instead of 10⁵.
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, default_value_t = OracleConfig::default().seed)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    LambdaHat,
    AlphaHat,
    AlphaBar,
    LambdaBar,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::LambdaHat => EstimatorKind::LambdaHatGivenAlpha,
            EstimatorArg::AlphaHat => EstimatorKind::AlphaHatGivenLambda,
            EstimatorArg::AlphaBar => EstimatorKind::AlphaBar,
            EstimatorArg::LambdaBar => EstimatorKind::LambdaBar,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = EstimatorArg::LambdaHat)]
    pub estimator: EstimatorArg,
    #[arg(long, value_delimiter = ',', default_value = "625,1250,2500,5000,10000")]
    pub steps_grid: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Output file and its SHA-256 digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<OutputDigest>,
}

pub fn manifest_path(out: &FsPath) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &FsPath) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Writes through a sibling temporary file that is renamed into place.
pub fn write_atomic<F>(path: &FsPath, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
        Ok(())
    })();
    match result {
        Ok(()) => {
            fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegenerateQ
        | Error::LambdaZero
        | Error::LambdaZeroUnsupportedExact
        | Error::OutsideConvergenceRegion(_)
        | Error::ToleranceNotMet { .. }
        | Error::ContourDivergence(_)
        | Error::NotApplicable(_)
        | Error::Io(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, &recorded) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Table1(_) => "table1",
        Command::Curves(_) => "curves",
        Command::Estimate(_) => "estimate",
        Command::Cdf(_) => "cdf",
        Command::Validate(_) => "validate",
        Command::Sweep(_) => "sweep",
        Command::Replay(_) => "replay",
    }
}

fn execute(cmd: &Command, argv: &[String]) -> Result<i32> {
    let (out, seeds, code) = match cmd {
        Command::Simulate(a) => (a.out.clone(), vec![a.seed], cmd_simulate(a)?),
        Command::Table1(a) => (a.out.clone(), vec![], cmd_table1(a)?),
        Command::Curves(a) => (a.out.clone(), vec![], cmd_curves(a)?),
        Command::Estimate(a) => (a.out.clone(), vec![], cmd_estimate(a)?),
        Command::Cdf(a) => (a.out.clone(), vec![], cmd_cdf(a)?),
        Command::Validate(a) => (a.out.clone(), vec![a.seed], cmd_validate(a)?),
        Command::Sweep(a) => (a.out.clone(), vec![a.seed], cmd_sweep(a)?),
        Command::Replay(a) => return cmd_replay(a),
    };
    if let Some(path) = out {
        let manifest = RunManifest {
            command: command_name(cmd).into(),
            argv: argv.to_vec(),
            params: serde_json::to_value(cmd).map_err(|e| Error::Io(e.to_string()))?,
            seeds,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs: vec![OutputDigest {
                path: path.to_string_lossy().into_owned(),
                sha256: file_digest(&path)?,
            }],
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        write_atomic(&manifest_path(&path), |w| Ok(w.write_all(text.as_bytes())?))?;
    }
    Ok(code)
}

/// Sends output to `out`, atomically, or to stdout.
fn emit<F>(out: &Option<PathBuf>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(p) => write_atomic(p, |w| f(w)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let params = a.model.params();
    let cfg = SimConfig::new(a.steps, a.seed, a.paths);
    cfg.validate()?;
    crate::model::validate(params)?;
    emit(&a.out, |w| {
        if a.paths == 1 {
            for_each_path(params, cfg, |_, p| write_path_csv(&mut *w, &p))
        } else {
            let mut wr = csv::Writer::from_writer(w);
            write_batch_header(&mut wr)?;
            for_each_path(params, cfg, |k, p| write_batch_rows(&mut wr, k, &p))?;
            wr.flush()?;
            Ok(())
        }
    })?;
    Ok(EXIT_OK)
}

pub fn cmd_table1(a: &Table1Args) -> Result<i32> {
    let rows = table1(&a.quad.config()?);
    emit(&a.out, |w| write_table1_csv(w, &rows))?;
    let failed = rows.iter().filter(|r| r.err.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} cells failed");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

pub fn cmd_curves(a: &CurvesArgs) -> Result<i32> {
    let grid = a.grid()?;
    let cfg = a.quad.config()?;
    let mut rows = Vec::new();
    for &l in &a.lambda {
        for &al in &a.alpha {
            let p = OUParams::unit(l, al, a.y0, grid[0]);
            rows.extend(scaled_curves(&p, &grid, &cfg)?);
        }
    }
    emit(&a.out, |w| write_moments_csv(w, &rows))?;
    Ok(if rows.iter().any(|r| r.err.is_some()) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEstimates {
    pub path_id: usize,
    pub reports: Vec<EstimateReport>,
    /// Estimators that could not be computed on this path.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub estimator_kind: EstimatorKind,
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutput {
    pub paths: Vec<PathEstimates>,
    pub summary: Vec<EstimateSummary>,
}

fn lambda_hat_report(value: f64, alpha: f64, s: &SufficientStats, analytic: bool) -> EstimateReport {
    let mut r = EstimateReport::new(EstimatorKind::LambdaHatGivenAlpha, value);
    if analytic {
        let p = OUParams::unit(value, alpha, s.y0, s.horizon);
        if let Ok(m) = lambda_hat_moments(&p, &QuadratureConfig::default()) {
            r.bias = Some(m.bias.value);
            r.mse = Some(m.mse.value);
            r.cr_bound = cramer_rao_lambda(&p, m.bias_derivative.value).ok();
        }
        r.asymptotic_ref = Some(AsymptoticRef {
            bias: 2.0 / s.horizon,
            mse: 2.0 * value / s.horizon,
        });
    }
    r
}

fn alpha_hat_report(value: f64, lambda: f64, s: &SufficientStats, sigma: f64, analytic: bool) -> EstimateReport {
    let mut r = EstimateReport::new(EstimatorKind::AlphaHatGivenLambda, value * sigma);
    if analytic {
        let p = OUParams::unit(lambda, value, s.y0, s.horizon);
        if let Ok(m) = alpha_hat_moments(&p) {
            r.bias = Some(m.bias);
            r.mse = Some(m.mse * sigma * sigma);
            r.cr_bound = Some(m.mse * sigma * sigma);
            r.asymptotic_ref = Some(AsymptoticRef {
                bias: 0.0,
                mse: m.mse * sigma * sigma,
            });
        }
    }
    r
}

fn unknown_pair_reports(s: &SufficientStats, sigma: f64, analytic: bool) -> (Vec<EstimateReport>, Vec<String>) {
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    let ab = alpha_bar(s);
    let lb = lambda_bar(s);
    let mut ra = EstimateReport::new(EstimatorKind::AlphaBar, ab * sigma);
    match lb {
        Ok(l) => {
            let mut rl = EstimateReport::new(EstimatorKind::LambdaBar, l);
            if analytic {
                let p = OUParams::unit(l, ab, s.y0, s.horizon);
                if let Ok(m) = alpha_bar_moments(&p) {
                    ra.bias = Some((m.mean - ab) * sigma);
                    ra.mse = Some((m.variance + (m.mean - ab).powi(2)) * sigma * sigma);
                    ra.asymptotic_ref = m.asymptotic_variance.map(|v| AsymptoticRef {
                        bias: 0.0,
                        mse: v * sigma * sigma,
                    });
                }
                if let Ok(m) = lambda_bar_moments(&p, &QuadratureConfig::default()) {
                    rl.bias = Some(m.bias);
                    rl.mse = Some(m.mse);
                }
            }
            reports.push(ra);
            reports.push(rl);
        }
        Err(e) => {
            reports.push(ra);
            errors.push(format!("lambda_bar: {e}"));
        }
    }
    (reports, errors)
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<i32> {
    if !(a.sigma > 0.0 && a.sigma.is_finite()) {
        return Err(Error::NonPositiveSigma {
            field: "sigma",
            value: a.sigma,
        });
    }
    let paths = read_paths_csv(File::open(&a.input)?)?;
    let analytic = a.analytic == AnalyticMode::PlugIn;
    let mut out = Vec::with_capacity(paths.len());
    for (k, path) in paths.iter().enumerate() {
        let s = path_to_stats(path).rescaled(a.sigma);
        let mut reports = Vec::new();
        let mut errors = Vec::new();
        if let Some(alpha) = a.known_alpha {
            let alpha_u = alpha / a.sigma;
            match mle_lambda_given_alpha(&s, alpha_u) {
                Ok(v) => reports.push(lambda_hat_report(v, alpha_u, &s, analytic)),
                Err(e) => errors.push(format!("lambda_hat: {e}")),
            }
        }
        if let Some(lambda) = a.known_lambda {
            match mle_alpha_given_lambda(&s, lambda) {
                Ok(v) => reports.push(alpha_hat_report(v, lambda, &s, a.sigma, analytic)),
                Err(e) => errors.push(format!("alpha_hat: {e}")),
            }
        }
        if a.known_alpha.is_none() && a.known_lambda.is_none() {
            let (r, e) = unknown_pair_reports(&s, a.sigma, analytic);
            reports.extend(r);
            errors.extend(e);
        }
        out.push(PathEstimates {
            path_id: k,
            reports,
            errors,
        });
    }
    let summary = summarize(&out);
    let any_err = out.iter().any(|p| !p.errors.is_empty());
    let text = serde_json::to_string_pretty(&EstimateOutput { paths: out, summary })
        .map_err(|e| Error::Io(e.to_string()))?;
    emit(&a.out, |w| {
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    Ok(if any_err { EXIT_NUMERICAL } else { EXIT_OK })
}

fn summarize(paths: &[PathEstimates]) -> Vec<EstimateSummary> {
    let mut kinds: Vec<EstimatorKind> = Vec::new();
    for r in paths.iter().flat_map(|p| &p.reports) {
        if !kinds.contains(&r.estimator_kind) {
            kinds.push(r.estimator_kind);
        }
    }
    kinds
        .into_iter()
        .map(|k| {
            let v: Vec<f64> = paths
                .iter()
                .flat_map(|p| &p.reports)
                .filter(|r| r.estimator_kind == k)
                .map(|r| r.value)
                .collect();
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            EstimateSummary {
                estimator_kind: k,
                n,
                mean,
                std_dev: var.sqrt(),
            }
        })
        .collect()
}

pub fn cmd_cdf(a: &CdfArgs) -> Result<i32> {
    let params = a.model.params();
    let cfg = InversionConfig {
        method: match a.method {
            MethodArg::Fourier => InversionMethod::Fourier,
            MethodArg::GaverStehfest => InversionMethod::GaverStehfest,
        },
        contour_step: a.contour_step,
        tail_cut: a.tail_cut,
        gs_order: a.gs_order,
    };
    cfg.validate()?;
    crate::model::require_unit_sigma(&params)?;
    let xs = match &a.x {
        Some(x) => x.clone(),
        None => linspace(a.x_min, a.x_max, a.x_count),
    };
    if xs.is_empty() {
        return Err(Error::InvalidConfig("empty x grid".into()));
    }
    let results = cdf_grid(&params, &xs, &cfg);
    let failed = results.iter().any(|r| r.as_ref().map_or(true, |c| c.err_flag));
    let rows: Vec<_> = xs.into_iter().zip(results).collect();
    emit(&a.out, |w| write_cdf_csv(w, &rows, cfg.method))?;
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    let mut cfg = if a.quick { OracleConfig::quick() } else { OracleConfig::default() };
    if let Some(n) = a.paths {
        cfg = cfg.with_paths(n);
    }
    cfg = cfg.with_seed(a.seed);
    let checks = validation_suite(&cfg)?;
    for c in &checks {
        let r = &c.report;
        eprintln!(
            "{} {:<28} mc {:.6} (se {:.2e}) analytic {:.6} z {:+.2}{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            r.estimate,
            r.std_error,
            r.analytic.unwrap_or(f64::NAN),
            r.z_score.unwrap_or(f64::NAN),
            if r.retried { " (retried)" } else { "" }
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    eprintln!("{} of {} checks passed", checks.len() - failed, checks.len());
    if a.out.is_some() {
        let text = serde_json::to_string_pretty(&checks).map_err(|e| Error::Io(e.to_string()))?;
        emit(&a.out, |w| Ok(w.write_all(text.as_bytes())?))?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_NUMERICAL })
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    crate::model::require_unit_sigma(&a.model.params())?;
    let cfg = OracleConfig::default().with_paths(a.paths).with_seed(a.seed);
    let s = mc_discretization_sweep(&a.model.params(), a.estimator.into(), &a.steps_grid, &cfg)?;
    emit(&a.out, |w| write_sweep_csv(w, &s.rows))?;
    eprintln!(
        "extrapolated bias {:.6} (se {:.2e})",
        s.extrapolated_bias.estimate, s.extrapolated_bias.std_error
    );
    Ok(EXIT_OK)
}

pub fn cmd_replay(a: &ReplayArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.manifest)?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::MalformedInput {
        row: e.line(),
        column: e.column().to_string(),
        message: e.to_string(),
    })?;
    let mut argv = vec![OsString::from("oumle")];
    argv.extend(m.argv.iter().map(OsString::from));
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::InvalidConfig("a manifest cannot record replay".into()));
    }
    let code = execute(&cli.command, &m.argv)?;
    let mut mismatched = 0;
    for o in &m.outputs {
        let now = file_digest(FsPath::new(&o.path))?;
        let same = now == o.sha256;
        eprintln!("{} {} {}", if same { "identical" } else { "DIFFERENT" }, o.path, now);
        if !same {
            mismatched += 1;
        }
    }
    Ok(if mismatched > 0 { EXIT_NUMERICAL } else { code })
}
